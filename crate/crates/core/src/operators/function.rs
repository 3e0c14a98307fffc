use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{TreeGeometry, Vertex};

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// `values[k]` on the sphere of radius `k` about the root.
    Radial(Vec<f64>),
    Explicit(BTreeMap<Vertex, f64>),
}

/// A real function on the vertices of a ball, zero outside its stored support.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeFunction {
    geom: TreeGeometry,
    repr: Repr,
}

impl TreeFunction {
    /// Radial function `y ↦ values[d(o, y)]`; missing entries are zero.
    pub fn radial(geom: TreeGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() > geom.radius() + 1 {
            return Err(Error::domain(format!(
                "radial profile of length {} does not fit a ball of radius {}",
                values.len(),
                geom.radius()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("function values must be finite"));
        }
        Ok(TreeFunction { geom, repr: Repr::Radial(values) })
    }

    pub fn explicit(geom: TreeGeometry, values: BTreeMap<Vertex, f64>) -> Result<Self> {
        for (v, x) in &values {
            geom.check_vertex(v)?;
            if !x.is_finite() {
                return Err(Error::domain(format!("value at {v} is not finite")));
            }
        }
        Ok(TreeFunction { geom, repr: Repr::Explicit(values) })
    }

    pub fn constant(geom: TreeGeometry, c: f64) -> Result<Self> {
        Self::radial(geom, vec![c; geom.radius() + 1])
    }

    pub fn delta(geom: TreeGeometry, at: Vertex) -> Result<Self> {
        if at.is_root() {
            return Self::radial(geom, vec![1.0]);
        }
        Self::explicit(geom, BTreeMap::from([(at, 1.0)]))
    }

    /// Indicator of the sphere `{d(o, y) = k}`.
    pub fn sphere_indicator(geom: TreeGeometry, k: usize) -> Result<Self> {
        let mut v = vec![0.0; k + 1];
        v[k] = 1.0;
        Self::radial(geom, v)
    }

    pub fn geom(&self) -> TreeGeometry {
        self.geom
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.repr, Repr::Radial(_))
    }

    /// The radial profile, if the function is stored radially.
    pub fn radial_profile(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Radial(v) => Some(v),
            Repr::Explicit(_) => None,
        }
    }

    /// `f(v)`; zero off the support, an error outside the ball.
    pub fn value(&self, v: &Vertex) -> Result<f64> {
        self.geom.check_vertex(v)?;
        Ok(match &self.repr {
            Repr::Radial(p) => p.get(v.depth()).copied().unwrap_or(0.0),
            Repr::Explicit(m) => m.get(v).copied().unwrap_or(0.0),
        })
    }

    /// Largest depth carrying a nonzero value (0 for the zero function).
    pub fn support_radius(&self) -> usize {
        match &self.repr {
            Repr::Radial(p) => p.iter().rposition(|x| *x != 0.0).unwrap_or(0),
            Repr::Explicit(m) => m
                .iter()
                .filter(|(_, x)| **x != 0.0)
                .map(|(v, _)| v.depth())
                .max()
                .unwrap_or(0),
        }
    }

    /// Nonzero entries as explicit `(vertex, value)` pairs, in enumeration order.
    pub fn support(&self) -> Vec<(Vertex, f64)> {
        match &self.repr {
            Repr::Explicit(m) => {
                let mut out: Vec<_> =
                    m.iter().filter(|(_, x)| **x != 0.0).map(|(v, x)| (v.clone(), *x)).collect();
                out.sort_by(|a, b| a.0.depth().cmp(&b.0.depth()).then_with(|| a.0.cmp(&b.0)));
                out
            }
            Repr::Radial(p) => {
                let inner = TreeGeometry::new(self.geom.q(), self.support_radius())
                    .expect("q already validated");
                inner
                    .enumerate_ball()
                    .into_iter()
                    .filter_map(|v| {
                        let x = p.get(v.depth()).copied().unwrap_or(0.0);
                        (x != 0.0).then_some((v, x))
                    })
                    .collect()
            }
        }
    }

    /// The same function stored vertex by vertex.
    pub fn to_explicit(&self) -> TreeFunction {
        TreeFunction {
            geom: self.geom,
            repr: Repr::Explicit(self.support().into_iter().collect()),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match &self.repr {
            Repr::Radial(p) => p.iter().fold(0.0, |a, x| a.max(x.abs())),
            Repr::Explicit(m) => m.values().fold(0.0, |a, x| a.max(x.abs())),
        }
    }

    /// `(Σ_y |f(y)|^p w(y))^{1/p}` over the support.
    pub fn weighted_norm(&self, p: f64, weight: impl Fn(&Vertex) -> f64) -> f64 {
        self.support()
            .iter()
            .map(|(v, x)| x.abs().powf(p) * weight(v))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_and_explicit_agree() {
        let g = TreeGeometry::new(2, 4).unwrap();
        let f = TreeFunction::radial(g, vec![1.0, 0.0, 2.5]).unwrap();
        let e = f.to_explicit();
        for v in g.enumerate_ball() {
            assert_eq!(f.value(&v).unwrap(), e.value(&v).unwrap());
        }
        assert_eq!(e.support().len(), 1 + 6);
        assert_eq!(f.support_radius(), 2);
        assert_eq!(e.support_radius(), 2);
    }

    #[test]
    fn rejects_vertices_outside() {
        let g = TreeGeometry::new(2, 1).unwrap();
        let bad = BTreeMap::from([(Vertex::from_labels(vec![0, 1]), 1.0)]);
        assert!(TreeFunction::explicit(g, bad).is_err());
        assert!(TreeFunction::radial(g, vec![0.0; 3]).is_err());
        let f = TreeFunction::constant(g, 1.0).unwrap();
        assert!(f.value(&Vertex::from_labels(vec![0, 0])).is_err());
    }
}
