//! Homogeneous trees of degree `q + 1`, truncated to a ball around a root `o`.
//!
//! Vertices are addressed by non-backtracking words: the root is the empty word,
//! the first label ranges over `0..=q` and every later label over `0..q`. With
//! this convention the lowest common ancestor of two vertices is their longest
//! common prefix, and distances are computed without any graph search.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The tree of degree `q + 1` together with a truncation radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeGeometry {
    q: u32,
    radius: usize,
}

impl TreeGeometry {
    pub fn new(q: u32, radius: usize) -> Result<Self> {
        if q < 1 {
            return Err(Error::domain(format!("branching parameter q must be >= 1, got {q}")));
        }
        Ok(TreeGeometry { q, radius })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Number of vertices at distance exactly `k` from the root.
    pub fn sphere_size(&self, k: usize) -> Result<u64> {
        if k > self.radius {
            return Err(Error::domain(format!(
                "sphere index {k} outside the ball of radius {}",
                self.radius
            )));
        }
        exact_sphere_size(self.q, k)
            .ok_or_else(|| Error::Range(format!("sphere size overflows u64 at q={}, k={k}", self.q)))
    }

    /// Number of vertices of the ball.
    pub fn ball_cardinality(&self) -> Result<u64> {
        let q = u64::from(self.q);
        let r = self.radius as u32;
        let overflow = || Error::Range(format!("ball cardinality overflows at q={q}, radius={r}"));
        if q == 1 {
            return Ok(1 + 2 * self.radius as u64);
        }
        let qr = q.checked_pow(r).ok_or_else(overflow)?;
        (qr - 1)
            .checked_mul(q + 1)
            .map(|n| 1 + n / (q - 1))
            .ok_or_else(overflow)
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        v.depth() <= self.radius && v.is_valid(self.q)
    }

    /// A vertex whose full neighbourhood lies inside the ball.
    pub fn is_interior(&self, v: &Vertex) -> bool {
        v.depth() < self.radius && v.is_valid(self.q)
    }

    pub fn check_vertex(&self, v: &Vertex) -> Result<()> {
        if !v.is_valid(self.q) {
            return Err(Error::domain(format!("malformed vertex word {v} for q={}", self.q)));
        }
        if v.depth() > self.radius {
            return Err(Error::domain(format!(
                "vertex {v} lies outside the ball of radius {}",
                self.radius
            )));
        }
        Ok(())
    }

    /// Tree distance between two vertices; both words are validated.
    pub fn distance(&self, u: &Vertex, v: &Vertex) -> Result<usize> {
        for w in [u, v] {
            if !w.is_valid(self.q) {
                return Err(Error::domain(format!("malformed vertex word {w} for q={}", self.q)));
            }
        }
        Ok(u.distance(v))
    }

    /// Every vertex of the ball, ordered by depth and then lexicographically.
    pub fn enumerate_ball(&self) -> Vec<Vertex> {
        let mut out = vec![Vertex::root()];
        let mut start = 0;
        for _ in 0..self.radius {
            let end = out.len();
            for i in start..end {
                let children = out[i].children(self.q);
                out.extend(children);
            }
            start = end;
        }
        out
    }

    /// Position of `v` in [`TreeGeometry::enumerate_ball`], computed arithmetically.
    pub fn vertex_index(&self, v: &Vertex) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        let depth = v.depth();
        let q = self.q as usize;
        let mut offset = 0usize;
        for k in 0..depth {
            offset += exact_sphere_size(self.q, k)? as usize;
        }
        let mut rank = 0usize;
        for (i, &label) in v.labels().iter().enumerate() {
            let radix = if i == 0 { q + 1 } else { q };
            rank = rank * radix + label as usize;
        }
        Some(offset + rank)
    }
}

pub(crate) fn exact_sphere_size(q: u32, k: usize) -> Option<u64> {
    if k == 0 {
        return Some(1);
    }
    let q = u64::from(q);
    q.checked_pow((k - 1) as u32)?.checked_mul(q + 1)
}

/// Sphere cardinality as a float; used by the radial code paths, which never enumerate.
pub fn sphere_size_f64(q: u32, k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        let q = f64::from(q);
        (q + 1.0) * q.powi(k as i32 - 1)
    }
}

/// A vertex addressed by its non-backtracking word from the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vertex(Vec<u32>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn from_labels(labels: Vec<u32>) -> Self {
        Vertex(labels)
    }

    pub fn labels(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_valid(&self, q: u32) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(i, &l)| if i == 0 { l <= q } else { l < q })
    }

    pub fn parent(&self) -> Option<Vertex> {
        if self.0.is_empty() {
            None
        } else {
            Some(Vertex(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn children(&self, q: u32) -> Vec<Vertex> {
        let n = if self.is_root() { q + 1 } else { q };
        (0..n)
            .map(|l| {
                let mut w = self.0.clone();
                w.push(l);
                Vertex(w)
            })
            .collect()
    }

    /// The `q + 1` neighbours: parent first (if any), then children.
    pub fn neighbors(&self, q: u32) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(q as usize + 1);
        out.extend(self.parent());
        out.extend(self.children(q));
        out
    }

    pub fn common_prefix_len(&self, other: &Vertex) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// Distance assuming both words are valid for the same `q`.
    pub fn distance(&self, other: &Vertex) -> usize {
        self.depth() + other.depth() - 2 * self.common_prefix_len(other)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o")?;
        for l in &self.0 {
            write!(f, ".{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Vertex {
    type Err = Error;

    /// Parses `o`, `o.0`, `o.2.1`, ...
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut parts = s.split('.');
        if parts.next() != Some("o") {
            return Err(Error::Parse(format!("vertex word must start with 'o': {s:?}")));
        }
        let labels = parts
            .map(|p| {
                p.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad label {p:?} in vertex word {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Vertex(labels))
    }
}

/// Vertices `y` grouped by `(d(x, y), d(o, y))` for a base vertex `x` at depth
/// `base_depth`: returns `(d(o,y), count)` pairs for the shell `d(x,y) = j`.
///
/// This lets radial data (radial about `o`) be summed around an off-root base
/// point without materialising the ball.
pub fn shell_counts(q: u32, base_depth: usize, j: usize) -> Vec<(usize, f64)> {
    let n = base_depth;
    if n == 0 {
        return vec![(j, sphere_size_f64(q, j))];
    }
    let qf = f64::from(q);
    let mut out = Vec::new();
    // Branch point at distance i from x along the geodesic to o.
    for i in 0..=n.min(j) {
        let r = j - i;
        if r == 0 {
            out.push((n - i, 1.0));
            continue;
        }
        let count = if i == 0 || i == n {
            qf.powi(r as i32)
        } else {
            (qf - 1.0) * qf.powi(r as i32 - 1)
        };
        if count > 0.0 {
            let m = if i == n { r } else { n - i + r };
            out.push((m, count));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashMap, VecDeque};

    fn v(labels: &[u32]) -> Vertex {
        Vertex::from_labels(labels.to_vec())
    }

    fn bfs_distances(geom: &TreeGeometry, ball: &[Vertex], src: usize) -> Vec<usize> {
        let index: HashMap<&Vertex, usize> = ball.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut dist = vec![usize::MAX; ball.len()];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(i) = queue.pop_front() {
            for n in ball[i].neighbors(geom.q()) {
                if let Some(&j) = index.get(&n) {
                    if dist[j] == usize::MAX {
                        dist[j] = dist[i] + 1;
                        queue.push_back(j);
                    }
                }
            }
        }
        dist
    }

    #[test]
    fn sphere_sizes() {
        let g = TreeGeometry::new(2, 5).unwrap();
        assert_eq!(g.sphere_size(0).unwrap(), 1);
        assert_eq!(g.sphere_size(2).unwrap(), 6);
        assert_eq!(TreeGeometry::new(1, 5).unwrap().sphere_size(5).unwrap(), 2);
        assert!(g.sphere_size(6).is_err());
    }

    #[test]
    fn ball_cardinality_matches_sphere_sums() {
        for q in 1..=4 {
            for r in 0..=6 {
                let g = TreeGeometry::new(q, r).unwrap();
                let sum: u64 = (0..=r).map(|k| g.sphere_size(k).unwrap()).sum();
                assert_eq!(sum, g.ball_cardinality().unwrap(), "q={q} r={r}");
                assert_eq!(g.enumerate_ball().len() as u64, sum);
            }
        }
        assert_eq!(TreeGeometry::new(3, 3).unwrap().ball_cardinality().unwrap(), 53);
    }

    #[test]
    fn distance_examples() {
        let g = TreeGeometry::new(2, 4).unwrap();
        assert_eq!(g.distance(&v(&[]), &v(&[1, 0])).unwrap(), 2);
        assert_eq!(g.distance(&v(&[0, 1]), &v(&[0])).unwrap(), 1);
        assert_eq!(g.distance(&v(&[0, 1]), &v(&[2, 0, 0])).unwrap(), 5);
        assert!(g.distance(&v(&[3]), &v(&[])).is_err());
        assert!(g.distance(&v(&[0, 2]), &v(&[])).is_err());
    }

    #[test]
    fn small_ball_enumeration() {
        let g = TreeGeometry::new(2, 1).unwrap();
        assert_eq!(g.enumerate_ball(), vec![v(&[]), v(&[0]), v(&[1]), v(&[2])]);
        assert_eq!(TreeGeometry::new(1, 2).unwrap().enumerate_ball().len(), 5);
    }

    #[test]
    fn word_distance_equals_bfs() {
        for q in 1..=3 {
            let g = TreeGeometry::new(q, 4).unwrap();
            let ball = g.enumerate_ball();
            // BFS inside a ball is exact between vertices of the ball: geodesics stay inside.
            for src in (0..ball.len()).step_by(7.max(ball.len() / 25)) {
                let d = bfs_distances(&g, &ball, src);
                for (i, w) in ball.iter().enumerate() {
                    assert_eq!(ball[src].distance(w), d[i], "q={q} {} {}", ball[src], w);
                }
            }
        }
    }

    #[test]
    fn neighbour_structure() {
        let q = 3;
        let g = TreeGeometry::new(q, 4).unwrap();
        for w in g.enumerate_ball() {
            let ns = w.neighbors(q);
            assert_eq!(ns.len(), q as usize + 1);
            let up = ns.iter().filter(|n| n.depth() + 1 == w.depth()).count();
            assert_eq!(up, usize::from(!w.is_root()));
            assert!(ns.iter().all(|n| n.distance(&w) == 1));
        }
    }

    #[test]
    fn vertex_index_matches_enumeration() {
        for q in 1..=3 {
            let g = TreeGeometry::new(q, 4).unwrap();
            for (i, w) in g.enumerate_ball().iter().enumerate() {
                assert_eq!(g.vertex_index(w), Some(i));
            }
        }
    }

    #[test]
    fn vertex_text_format() {
        let w: Vertex = "o.2.0.1".parse().unwrap();
        assert_eq!(w, v(&[2, 0, 1]));
        assert_eq!(w.to_string(), "o.2.0.1");
        assert_eq!("o".parse::<Vertex>().unwrap(), Vertex::root());
        assert!("x.1".parse::<Vertex>().is_err());
        assert!("o.a".parse::<Vertex>().is_err());
    }

    #[test]
    fn shell_counts_match_enumeration() {
        for q in 1..=3 {
            let radius = 7;
            let g = TreeGeometry::new(q, radius).unwrap();
            let ball = g.enumerate_ball();
            for x in [v(&[]), v(&[1]), v(&[0, 1]), v(&[q, 0, 0])] {
                if !x.is_valid(q) {
                    continue;
                }
                let n = x.depth();
                let mut counts: HashMap<(usize, usize), f64> = HashMap::new();
                for y in &ball {
                    *counts.entry((x.distance(y), y.depth())).or_default() += 1.0;
                }
                // Shells with j + n <= radius are complete inside the ball.
                for j in 0..=(radius - n) {
                    let mut expected: Vec<(usize, f64)> = counts
                        .iter()
                        .filter(|((jj, _), _)| *jj == j)
                        .map(|((_, m), c)| (*m, *c))
                        .collect();
                    expected.sort_by_key(|e| e.0);
                    let mut got = shell_counts(q, n, j);
                    got.sort_by_key(|e| e.0);
                    assert_eq!(got, expected, "q={q} x={x} j={j}");
                }
            }
        }
    }
}
