//! Dynkin types, quiver orientations, positive roots, and the Euler form.
//!
//! Vertices are labeled 1..n on a canonical tree per family:
//! `A`: the path 1-2-...-n; `D`: the path 1-...-(n-2) with leaves n-1 and n
//! attached at n-2; `E`: the path 1-2-4-5-...-n with 3 attached at 4.
//! An orientation is one sign per canonical edge, `+` meaning the arrow runs
//! from the smaller label to the larger.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::geom::{cmp_arg, RatVec};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DynkinError {
    #[error("invalid rank {rank} for family {family:?}")]
    InvalidRank { family: Family, rank: usize },
    #[error("orientation has {got} signs, expected {expected}")]
    OrientationLength { got: usize, expected: usize },
    #[error("dimension vector has {got} coordinates, expected {expected}")]
    RankMismatch { got: usize, expected: usize },
    #[error("unknown Dynkin family `{0}`")]
    UnknownFamily(String),
    #[error("vertex {0} out of range")]
    BadVertex(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    D,
    E,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::A => write!(f, "A"),
            Family::D => write!(f, "D"),
            Family::E => write!(f, "E"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DynkinType {
    family: Family,
    rank: usize,
}

impl fmt::Display for DynkinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family, self.rank)
    }
}

impl DynkinType {
    pub fn new(family: Family, rank: usize) -> Result<Self, DynkinError> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::D => rank >= 4,
            Family::E => (6..=8).contains(&rank),
        };
        if !ok {
            return Err(DynkinError::InvalidRank { family, rank });
        }
        Ok(DynkinType { family, rank })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Coxeter number: `n+1` for A, `2(n-1)` for D, 12/18/30 for E6/E7/E8.
    pub fn coxeter_number(&self) -> usize {
        match self.family {
            Family::A => self.rank + 1,
            Family::D => 2 * (self.rank - 1),
            Family::E => match self.rank {
                6 => 12,
                7 => 18,
                8 => 30,
                _ => unreachable!(),
            },
        }
    }

    /// Canonical edges, 1-based and sorted, matching the orientation sign order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.rank;
        match self.family {
            Family::A => (1..n).map(|i| (i, i + 1)).collect(),
            Family::D => {
                let mut e: Vec<_> = (1..n - 2).map(|i| (i, i + 1)).collect();
                e.push((n - 2, n - 1));
                e.push((n - 2, n));
                e
            }
            Family::E => {
                let mut e = vec![(1, 2), (2, 4), (3, 4)];
                e.extend((4..n).map(|i| (i, i + 1)));
                e
            }
        }
    }

    /// Vertices adjacent to `v` in the canonical tree.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges()
            .into_iter()
            .filter_map(|(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// An orientation of a canonical Dynkin tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DynkinQuiver {
    dtype: DynkinType,
    orientation: Vec<Sign>,
}

impl fmt::Display for DynkinQuiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let signs: String = self
            .orientation
            .iter()
            .map(|s| if *s == Sign::Plus { '+' } else { '-' })
            .collect();
        write!(f, "{}[{}]", self.dtype, signs)
    }
}

impl DynkinQuiver {
    pub fn new(dtype: DynkinType, orientation: Vec<Sign>) -> Result<Self, DynkinError> {
        if orientation.len() != dtype.rank() - 1 {
            return Err(DynkinError::OrientationLength {
                got: orientation.len(),
                expected: dtype.rank() - 1,
            });
        }
        Ok(DynkinQuiver { dtype, orientation })
    }

    pub fn dtype(&self) -> DynkinType {
        self.dtype
    }

    pub fn rank(&self) -> usize {
        self.dtype.rank()
    }

    pub fn orientation(&self) -> &[Sign] {
        &self.orientation
    }

    /// Directed arrows `(source, target)`, one per canonical edge.
    pub fn arrows(&self) -> Vec<(usize, usize)> {
        self.dtype
            .edges()
            .iter()
            .zip(&self.orientation)
            .map(|(&(a, b), s)| match s {
                Sign::Plus => (a, b),
                Sign::Minus => (b, a),
            })
            .collect()
    }

    /// The quiver with every arrow reversed.
    pub fn opposite(&self) -> DynkinQuiver {
        DynkinQuiver {
            dtype: self.dtype,
            orientation: self.orientation.iter().map(|s| s.flip()).collect(),
        }
    }

    pub fn is_sink(&self, v: usize) -> bool {
        self.arrows().iter().all(|&(s, _)| s != v)
    }

    pub fn is_source(&self, v: usize) -> bool {
        self.arrows().iter().all(|&(_, t)| t != v)
    }

    /// Reverse every arrow incident to `v`.
    pub fn reflect(&self, v: usize) -> DynkinQuiver {
        let edges = self.dtype.edges();
        let orientation = self
            .orientation
            .iter()
            .zip(&edges)
            .map(|(s, &(a, b))| if a == v || b == v { s.flip() } else { *s })
            .collect();
        DynkinQuiver {
            dtype: self.dtype,
            orientation,
        }
    }

    /// All `2^(n-1)` orientations of the given type, in sign-lex order.
    pub fn all_orientations(dtype: DynkinType) -> Vec<DynkinQuiver> {
        let m = dtype.rank() - 1;
        (0..1usize << m)
            .map(|mask| {
                let signs = (0..m)
                    .map(|i| {
                        if mask >> i & 1 == 0 {
                            Sign::Plus
                        } else {
                            Sign::Minus
                        }
                    })
                    .collect();
                DynkinQuiver {
                    dtype,
                    orientation: signs,
                }
            })
            .collect()
    }
}

/// A dimension vector indexed by quiver vertices (1-based outside, dense inside).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DimVector(pub Vec<i64>);

impl DimVector {
    pub fn zero(n: usize) -> Self {
        DimVector(vec![0; n])
    }

    pub fn unit(n: usize, v: usize) -> Self {
        let mut d = vec![0; n];
        d[v - 1] = 1;
        DimVector(d)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: usize) -> i64 {
        self.0[v - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &DimVector) -> DimVector {
        DimVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn leq(&self, other: &DimVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn is_nonneg(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }
}

impl fmt::Display for DimVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Euler form `<a, b> = sum_i a_i b_i - sum_{arrows i->j} a_i b_j`.
pub fn euler_form(q: &DynkinQuiver, a: &DimVector, b: &DimVector) -> Result<i64, DynkinError> {
    let n = q.rank();
    if a.len() != n || b.len() != n {
        return Err(DynkinError::RankMismatch {
            got: if a.len() != n { a.len() } else { b.len() },
            expected: n,
        });
    }
    let mut total: i64 = (1..=n).map(|i| a.get(i) * b.get(i)).sum();
    for (s, t) in q.arrows() {
        total -= a.get(s) * b.get(t);
    }
    Ok(total)
}

/// Antisymmetrized Euler form on unit vectors:
/// `lambda(i, j) = <e_j, e_i> - <e_i, e_j>`.
pub fn lambda_form(q: &DynkinQuiver, i: usize, j: usize) -> Result<i64, DynkinError> {
    let n = q.rank();
    if i == 0 || i > n {
        return Err(DynkinError::BadVertex(i));
    }
    if j == 0 || j > n {
        return Err(DynkinError::BadVertex(j));
    }
    let ei = DimVector::unit(n, i);
    let ej = DimVector::unit(n, j);
    Ok(euler_form(q, &ej, &ei)? - euler_form(q, &ei, &ej)?)
}

/// Bilinear extension of `lambda_form` to dimension vectors.
pub fn lambda_bilinear(q: &DynkinQuiver, a: &DimVector, b: &DimVector) -> Result<i64, DynkinError> {
    Ok(euler_form(q, b, a)? - euler_form(q, a, b)?)
}

/// Positive roots by reflection closure from the simple roots.
///
/// The result is sorted (lexicographically on coordinates) and has
/// cardinality `rank * coxeter_number / 2`.
pub fn positive_roots(t: DynkinType) -> Vec<DimVector> {
    let n = t.rank();
    let edges = t.edges();
    let adjacency: Vec<Vec<usize>> = (1..=n)
        .map(|v| {
            edges
                .iter()
                .filter_map(|&(a, b)| {
                    if a == v {
                        Some(b)
                    } else if b == v {
                        Some(a)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    let reflect = |d: &DimVector, i: usize| -> DimVector {
        // Simply-laced simple reflection: negate coordinate i and add neighbors.
        let mut out = d.0.clone();
        let adj_sum: i64 = adjacency[i - 1].iter().map(|&u| d.get(u)).sum();
        out[i - 1] = -d.get(i) + adj_sum;
        DimVector(out)
    };
    let mut seen = std::collections::BTreeSet::new();
    let mut queue: Vec<DimVector> = (1..=n).map(|v| DimVector::unit(n, v)).collect();
    for r in &queue {
        seen.insert(r.clone());
    }
    while let Some(d) = queue.pop() {
        for i in 1..=n {
            let r = reflect(&d, i);
            if r.is_nonneg() && !r.is_zero() && seen.insert(r.clone()) {
                queue.push(r);
            }
        }
    }
    seen.into_iter().collect()
}

/// A central charge on dimension vectors given by one upward vector per vertex.
#[derive(Debug, Clone)]
pub struct StabilityFunction {
    charges: Vec<RatVec>,
}

impl StabilityFunction {
    /// Build from per-vertex charges; every charge must be upward (angle in
    /// `[0, π)`).
    pub fn new(charges: Vec<RatVec>) -> Result<Self, String> {
        for (i, z) in charges.iter().enumerate() {
            if z.is_zero() {
                return Err(format!("charge of vertex {} is zero", i + 1));
            }
            if !z.is_upward() {
                return Err(format!("charge of vertex {} is not upward", i + 1));
            }
        }
        Ok(StabilityFunction { charges })
    }

    pub fn rank(&self) -> usize {
        self.charges.len()
    }

    pub fn charge_of_vertex(&self, v: usize) -> &RatVec {
        &self.charges[v - 1]
    }

    /// Additive extension to a nonzero nonnegative dimension vector.
    pub fn charge(&self, d: &DimVector) -> RatVec {
        let mut acc = RatVec::from_ints(0, 0);
        for (i, c) in d.0.iter().enumerate() {
            if *c != 0 {
                acc = acc.add(&self.charges[i].scale(&crate::geom::rat(*c, 1)));
            }
        }
        acc
    }

    /// Exact phase comparison of two classes (compare angles in `[0, π)`).
    pub fn cmp_phase(&self, a: &DimVector, b: &DimVector) -> std::cmp::Ordering {
        cmp_arg(&self.charge(a), &self.charge(b)).expect("charges of roots are nonzero")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(f: Family, n: usize) -> DynkinType {
        DynkinType::new(f, n).unwrap()
    }

    #[test]
    fn coxeter_numbers() {
        assert_eq!(ty(Family::A, 5).coxeter_number(), 6);
        assert_eq!(ty(Family::D, 6).coxeter_number(), 10);
        assert_eq!(ty(Family::E, 8).coxeter_number(), 30);
        assert!(DynkinType::new(Family::D, 3).is_err());
        assert!(DynkinType::new(Family::E, 9).is_err());
    }

    #[test]
    fn root_counts_match_count_law() {
        for (f, n) in [
            (Family::A, 1),
            (Family::A, 2),
            (Family::A, 5),
            (Family::A, 8),
            (Family::D, 4),
            (Family::D, 5),
            (Family::D, 8),
            (Family::E, 6),
            (Family::E, 7),
            (Family::E, 8),
        ] {
            let t = ty(f, n);
            let roots = positive_roots(t);
            assert_eq!(roots.len(), n * t.coxeter_number() / 2, "{t}");
        }
    }

    #[test]
    fn a2_roots_explicit() {
        let roots = positive_roots(ty(Family::A, 2));
        let expect: Vec<DimVector> = vec![
            DimVector(vec![0, 1]),
            DimVector(vec![1, 0]),
            DimVector(vec![1, 1]),
        ];
        assert_eq!(roots, expect);
    }

    #[test]
    fn roots_have_connected_support() {
        for t in [ty(Family::D, 5), ty(Family::E, 6)] {
            let edges = t.edges();
            for r in positive_roots(t) {
                let support: Vec<usize> = (1..=t.rank()).filter(|&v| r.get(v) > 0).collect();
                // Flood from the first support vertex along edges inside the support.
                let mut reached = vec![support[0]];
                let mut frontier = vec![support[0]];
                while let Some(v) = frontier.pop() {
                    for &(a, b) in &edges {
                        let u = if a == v { b } else if b == v { a } else { continue };
                        if support.contains(&u) && !reached.contains(&u) {
                            reached.push(u);
                            frontier.push(u);
                        }
                    }
                }
                reached.sort_unstable();
                assert_eq!(reached, support, "{t} root {r}");
            }
        }
    }

    #[test]
    fn euler_and_lambda_on_a2() {
        let t = ty(Family::A, 2);
        let q = DynkinQuiver::new(t, vec![Sign::Plus]).unwrap(); // 1 -> 2
        let e1 = DimVector::unit(2, 1);
        let e2 = DimVector::unit(2, 2);
        assert_eq!(euler_form(&q, &e1, &e2).unwrap(), -1);
        assert_eq!(euler_form(&q, &e2, &e1).unwrap(), 0);
        assert_eq!(euler_form(&q, &e1, &e1).unwrap(), 1);
        assert_eq!(lambda_form(&q, 1, 2).unwrap(), 1);
        assert_eq!(lambda_form(&q, 1, 1).unwrap(), 0);
    }

    #[test]
    fn lambda_vanishes_on_nonadjacent() {
        let t = ty(Family::A, 3);
        for q in DynkinQuiver::all_orientations(t) {
            assert_eq!(lambda_form(&q, 1, 3).unwrap(), 0);
            assert_eq!(lambda_form(&q, 1, 2).unwrap(), -lambda_form(&q, 2, 1).unwrap());
        }
    }

    #[test]
    fn reversing_orientation_transposes_euler_matrix() {
        let t = ty(Family::D, 4);
        for q in DynkinQuiver::all_orientations(t) {
            let qop = q.opposite();
            for i in 1..=4 {
                for j in 1..=4 {
                    let ei = DimVector::unit(4, i);
                    let ej = DimVector::unit(4, j);
                    assert_eq!(
                        euler_form(&q, &ei, &ej).unwrap(),
                        euler_form(&qop, &ej, &ei).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn arrows_and_reflections() {
        let t = ty(Family::D, 4);
        let q = DynkinQuiver::new(t, vec![Sign::Minus, Sign::Plus, Sign::Plus]).unwrap();
        assert_eq!(q.arrows(), vec![(2, 1), (2, 3), (2, 4)]);
        assert!(q.is_sink(1));
        assert!(q.is_source(2));
        let r = q.reflect(2);
        assert_eq!(r.arrows(), vec![(1, 2), (3, 2), (4, 2)]);
        assert!(r.is_sink(2));
    }
}
