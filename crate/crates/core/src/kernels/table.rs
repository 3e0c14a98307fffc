use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use super::{kernel_row, KernelFamily};
use crate::error::{Error, Result};
use crate::geometry::{exact_sphere_size, sphere_size_f64, TreeGeometry};
use crate::special::QuadratureSpec;

/// A kernel tabulated on `0..=radius` with a bound on the mass outside the ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialKernel {
    pub geom: TreeGeometry,
    pub family: KernelFamily,
    pub t: f64,
    pub values: Vec<f64>,
    /// Upper bound on `Σ_{k>radius} |S_k| K_t(k)`.
    pub tail_bound: f64,
}

impl RadialKernel {
    pub fn radius(&self) -> usize {
        self.values.len() - 1
    }

    /// `K_t(k)`; fails when `k` is beyond the table.
    pub fn value(&self, k: usize) -> Result<f64> {
        self.values.get(k).copied().ok_or(Error::RadiusTooSmall {
            radius: self.radius(),
            required: k,
        })
    }

    /// `Σ_{k ≤ radius} |S_k| K_t(k)`.
    pub fn mass(&self) -> f64 {
        self.cumulative_mass().last().copied().unwrap_or(0.0)
    }

    pub fn cumulative_mass(&self) -> Vec<f64> {
        let q = self.geom.q();
        let mut acc = 0.0;
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                acc += sphere_size_f64(q, k) * v;
                acc
            })
            .collect()
    }

    /// CSV with a `#` metadata line, then `k,sphere_size,value,cumulative_mass`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# q={},family={},params={},t={:.16e},tail_bound={:.16e}",
            self.geom.q(),
            self.family.name(),
            self.family.params().replace(',', ";"),
            self.t,
            self.tail_bound
        )?;
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(["k", "sphere_size", "value", "cumulative_mass"])?;
        let q = self.geom.q();
        for (k, (v, m)) in self.values.iter().zip(self.cumulative_mass()).enumerate() {
            let size = match exact_sphere_size(q, k) {
                Some(n) => n.to_string(),
                None => format!("{:.16e}", sphere_size_f64(q, k)),
            };
            out.write_record([k.to_string(), size, format!("{v:.16e}"), format!("{m:.16e}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Bound on `Σ_{k>R} m_k` from the last three terms `m_k = |S_k| K(k)`.
///
/// A geometric majorant is used when the last two ratios stay below 0.9;
/// otherwise a power-law majorant `m_R (R/k)^γ` with `γ` the smallest local
/// exponent of the last three terms, capped by `decay_exponent` when the
/// asymptotic power is known. Without a known power `γ` must exceed 1.05.
pub fn tail_bound(q: u32, values: &[f64], decay_exponent: Option<f64>) -> Result<f64> {
    let r = values.len().saturating_sub(1);
    if r < 3 {
        return Err(Error::RadiusTooSmall { radius: r, required: 3 });
    }
    let m = |k: usize| sphere_size_f64(q, k) * values[k];
    let (m2, m1, m0) = (m(r - 2), m(r - 1), m(r));
    if m0 == 0.0 {
        if m1 == 0.0 {
            return Ok(0.0);
        }
        // underflowed: tail is far below anything representable relative to m1
        return Ok(f64::MIN_POSITIVE);
    }
    let ratio = (m0 / m1).max(m1 / m2);
    if ratio.is_finite() && ratio < 0.9 {
        return Ok(m0 * ratio / (1.0 - ratio));
    }
    let local = |hi: usize, a: f64, b: f64| (a / b).ln() / (hi as f64 / (hi - 1) as f64).ln();
    let mut gamma = local(r, m1, m0).min(local(r - 1, m2, m1));
    let floor = match decay_exponent {
        Some(g) => {
            gamma = gamma.min(g);
            1.0 + 1e-6
        }
        None => 1.05,
    };
    if gamma.is_finite() && gamma > floor {
        // factor 2 absorbs slow convergence of the amplitude m_k k^γ
        return Ok(2.0 * m0 * r as f64 / (gamma - 1.0));
    }
    Err(Error::RadiusTooSmall { radius: r, required: 2 * r })
}

/// Tabulates `family` at time `t` on the ball of `geom`.
pub fn tabulate(
    geom: TreeGeometry,
    family: KernelFamily,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<RadialKernel> {
    family.validate()?;
    let values = kernel_row(geom.q(), family, t, geom.radius(), spec)?;
    let tail = tail_bound(geom.q(), &values, family.tail_exponent(geom.q()))?;
    Ok(RadialKernel { geom, family, t, values, tail_bound: tail })
}

type CacheKey = (u32, usize, (u8, u64), u64, [u64; 5]);

/// Write-once, thread-safe memo of kernel tables.
#[derive(Debug, Default)]
pub struct KernelCache {
    map: RwLock<HashMap<CacheKey, Arc<RadialKernel>>>,
}

impl KernelCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the cached table or tabulates and inserts it. A table, once
    /// stored, is never replaced.
    pub fn get(
        &self,
        geom: TreeGeometry,
        family: KernelFamily,
        t: f64,
        spec: &QuadratureSpec,
    ) -> Result<Arc<RadialKernel>> {
        let key = (geom.q(), geom.radius(), family.key(), t.to_bits(), spec.cache_key());
        if let Some(k) = self.map.read().expect("cache lock poisoned").get(&key) {
            return Ok(Arc::clone(k));
        }
        let table = Arc::new(tabulate(geom, family, t, spec)?);
        let mut map = self.map.write().expect("cache lock poisoned");
        Ok(Arc::clone(map.entry(key).or_insert(table)))
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::heat_kernel_z;

    #[test]
    fn heat_on_z_has_unit_mass() {
        let g = TreeGeometry::new(1, 40).unwrap();
        let k = tabulate(g, KernelFamily::Heat, 1.0, &QuadratureSpec::default()).unwrap();
        for (j, v) in k.values.iter().enumerate() {
            assert!((v - heat_kernel_z(1.0, j).unwrap()).abs() < 1e-16);
        }
        assert!((k.mass() - 1.0).abs() < 1e-10);
        assert!(k.tail_bound < 1e-30);
    }

    #[test]
    fn heat_on_tree_has_unit_mass() {
        let g = TreeGeometry::new(2, 25).unwrap();
        let k = tabulate(g, KernelFamily::Heat, 1.0, &QuadratureSpec::default()).unwrap();
        assert!((k.mass() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn small_radius_is_rejected() {
        let g = TreeGeometry::new(2, 2).unwrap();
        let e = tabulate(g, KernelFamily::Heat, 1.0, &QuadratureSpec::default()).unwrap_err();
        assert!(matches!(e, Error::RadiusTooSmall { .. }));
    }

    #[test]
    fn csv_layout() {
        let g = TreeGeometry::new(2, 5).unwrap();
        let k = tabulate(g, KernelFamily::Heat, 0.5, &QuadratureSpec::default()).unwrap();
        let mut buf = Vec::new();
        k.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# q=2,family=heat,params=,t=5.0000000000000000e-1,tail_bound="));
        assert_eq!(lines[1], "k,sphere_size,value,cumulative_mass");
        assert_eq!(lines.len(), 2 + 6);
        assert!(lines[3].starts_with("1,3,"));
        assert!(!s.contains('\r'));
    }

    #[test]
    fn cache_is_write_once() {
        let cache = KernelCache::new();
        let g = TreeGeometry::new(2, 6).unwrap();
        let spec = QuadratureSpec::default();
        let a = cache.get(g, KernelFamily::Heat, 0.3, &spec).unwrap();
        let b = cache.get(g, KernelFamily::Heat, 0.3, &spec).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        let other = QuadratureSpec { rel_tol: 1e-9, ..spec };
        let c = cache.get(g, KernelFamily::Heat, 0.3, &other).unwrap();
        assert!(!Arc::ptr_eq(&a, &c));
        assert_eq!(cache.len(), 2);
    }
}
