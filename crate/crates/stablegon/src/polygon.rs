//! The type-tagged stable polygon: defining linear relations, satellite
//! points, level diagonal-gons, the stability predicate, and rigid motions.
//!
//! A polygon of type `A_n` is any closed `(n+1)`-gon; type `D_n` is a
//! centrally symmetric `2(n-1)`-gon carrying two punctures exchanged by the
//! symmetry; types `E6/E7/E8` are 12/18/30-gons whose edge vectors satisfy
//! exact linear relations (E7/E8 additionally centrally symmetric). The E
//! relations make satellite points `W_j` (and `U_j` for E7) well defined;
//! satellites are always re-derived from the vertices, never read from input.

use crate::dynkin::{DynkinType, Family};
use crate::geom::{
    cmp_points, is_positively_convex, rat, side_of, ConvexRegion, DirectedSegment, Rat, RatPoint,
    RatVec, Side,
};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolygonError {
    #[error("expected {expected} vertices for {dtype}, got {got}")]
    VertexCount {
        dtype: String,
        expected: usize,
        got: usize,
    },
    #[error("edge {0} is zero")]
    ZeroEdge(usize),
    #[error("central symmetry violated at vertex {0}")]
    CentralSymmetry(usize),
    #[error("puncture symmetry violated: B+ != 2O - B-")]
    PunctureSymmetry,
    #[error("punctures out of order: B- must not exceed B+")]
    PunctureOrder,
    #[error("type D requires exactly two punctures")]
    MissingPunctures,
    #[error("punctures are only allowed for type D")]
    UnexpectedPunctures,
    #[error("relation `{name}` violated at index {index}")]
    Relation { name: &'static str, index: usize },
    #[error("satellite consistency violated at index {0}")]
    SatelliteConsistency(usize),
    #[error("polygon is not strictly positively convex")]
    NotConvex,
    #[error("level parameter {0} out of range")]
    BadLevel(usize),
}

/// Raw polygon data as supplied by files or constructors, prior to validation.
#[derive(Debug, Clone)]
pub struct PolygonData {
    pub dtype: DynkinType,
    pub vertices: Vec<RatPoint>,
    pub punctures: Option<(RatPoint, RatPoint)>,
}

/// A validated polygon of some Dynkin type. Relation and convexity checks
/// have passed; stability is certified separately by [`StablePolygon::is_stable`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StablePolygon {
    dtype: DynkinType,
    vertices: Vec<RatPoint>,
    punctures: Option<(RatPoint, RatPoint)>,
    satellites_w: Vec<RatPoint>,
    satellites_u: Vec<RatPoint>,
}

/// Outcome of the stability certification: either a certificate listing every
/// containment verified, or the first failure with the violated clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityCheck {
    pub ok: bool,
    pub records: Vec<String>,
    pub failure: Option<String>,
}

impl StablePolygon {
    /// Check every defining relation of the type and derive satellites.
    /// Reports the first violated relation on failure.
    pub fn validate_relations(data: PolygonData) -> Result<StablePolygon, PolygonError> {
        let h = data.dtype.coxeter_number();
        if data.vertices.len() != h {
            return Err(PolygonError::VertexCount {
                dtype: data.dtype.to_string(),
                expected: h,
                got: data.vertices.len(),
            });
        }
        if data.dtype.family() == Family::D {
            if data.punctures.is_none() {
                return Err(PolygonError::MissingPunctures);
            }
        } else if data.punctures.is_some() {
            return Err(PolygonError::UnexpectedPunctures);
        }
        let v = &data.vertices;
        let z = |j: isize| -> RatVec {
            let h = h as isize;
            let jj = j.rem_euclid(h) as usize;
            let pj = (j - 1).rem_euclid(h) as usize;
            v[pj].to(&v[jj])
        };
        for j in 0..h {
            if z(j as isize).is_zero() {
                return Err(PolygonError::ZeroEdge(j));
            }
        }
        let centroid = centroid_of(v);
        let check_symmetry = || -> Result<(), PolygonError> {
            for j in 0..h / 2 {
                if v[j + h / 2] != v[j].reflect_through(&centroid) {
                    return Err(PolygonError::CentralSymmetry(j));
                }
            }
            Ok(())
        };
        let zero = RatVec::from_ints(0, 0);
        let mut satellites_w = Vec::new();
        let mut satellites_u = Vec::new();
        match data.dtype.family() {
            Family::A => {}
            Family::D => {
                check_symmetry()?;
                let (bm, bp) = data.punctures.as_ref().unwrap();
                if *bp != bm.reflect_through(&centroid) {
                    return Err(PolygonError::PunctureSymmetry);
                }
                if cmp_points(bm, bp) == Ordering::Greater {
                    return Err(PolygonError::PunctureOrder);
                }
            }
            Family::E => {
                let n = data.dtype.rank();
                match n {
                    6 => {
                        for j in 0..h as isize {
                            if z(j).add(&z(j + 4)).add(&z(j + 8)) != zero {
                                return Err(PolygonError::Relation {
                                    name: "triangle",
                                    index: j as usize,
                                });
                            }
                            if z(j).add(&z(j - 3).neg()).add(&z(j - 6)).add(&z(j - 9).neg())
                                != zero
                            {
                                return Err(PolygonError::Relation {
                                    name: "alternating",
                                    index: j as usize,
                                });
                            }
                        }
                        // W_j closes the triangle on edge z_j: V_j W_j = z_{j+4}.
                        satellites_w =
                            (0..h).map(|j| v[j].add(&z(j as isize + 4))).collect();
                        for j in 0..h as isize {
                            let w = &satellites_w[j.rem_euclid(h as isize) as usize];
                            let prev = &v[(j - 1).rem_euclid(h as isize) as usize];
                            if w.to(prev) != z(j + 8) {
                                return Err(PolygonError::SatelliteConsistency(j as usize));
                            }
                        }
                    }
                    7 => {
                        check_symmetry()?;
                        for j in 0..h as isize {
                            let sum = z(j)
                                .add(&z(j + 1))
                                .add(&z(j + 6))
                                .add(&z(j + 7))
                                .add(&z(j + 12))
                                .add(&z(j + 13));
                            if sum != zero {
                                return Err(PolygonError::Relation {
                                    name: "hexagon",
                                    index: j as usize,
                                });
                            }
                        }
                        // Hexagon L_j corners: W_j above V_j, U_j between the W's.
                        satellites_w =
                            (0..h).map(|j| v[j].add(&z(j as isize + 5))).collect();
                        satellites_u = (0..h)
                            .map(|j| {
                                satellites_w[(j + 1) % h].add(&z(j as isize + 7))
                            })
                            .collect();
                        for j in 0..h as isize {
                            let jj = j.rem_euclid(h as isize) as usize;
                            let wm1 = &satellites_w[(j - 1).rem_euclid(h as isize) as usize];
                            let vm1 = &v[(j - 1).rem_euclid(h as isize) as usize];
                            if wm1.to(vm1) != z(j + 13) {
                                return Err(PolygonError::SatelliteConsistency(jj));
                            }
                            if satellites_u[jj].to(wm1) != z(j + 12) {
                                return Err(PolygonError::SatelliteConsistency(jj));
                            }
                            let wc = satellites_w[jj].reflect_through(&centroid);
                            if wc != satellites_w[(jj + h / 2) % h] {
                                return Err(PolygonError::SatelliteConsistency(jj));
                            }
                        }
                    }
                    8 => {
                        check_symmetry()?;
                        for j in 0..h as isize {
                            if z(j).add(&z(j + 10)).add(&z(j + 20)) != zero {
                                return Err(PolygonError::Relation {
                                    name: "triangle",
                                    index: j as usize,
                                });
                            }
                            let sum = z(j)
                                .add(&z(j + 6))
                                .add(&z(j + 12))
                                .add(&z(j + 18))
                                .add(&z(j + 24));
                            if sum != zero {
                                return Err(PolygonError::Relation {
                                    name: "pentagon",
                                    index: j as usize,
                                });
                            }
                        }
                        // Triangle on edge z_j has apex W_{j-1}: V_j W_{j-1} = z_{j+10}.
                        satellites_w = (0..h)
                            .map(|j| v[(j + 1) % h].add(&z(j as isize + 11)))
                            .collect();
                        for j in 0..h as isize {
                            let jj = j.rem_euclid(h as isize) as usize;
                            let wm1 = &satellites_w[(j - 1).rem_euclid(h as isize) as usize];
                            let vm1 = &v[(j - 1).rem_euclid(h as isize) as usize];
                            if wm1.to(vm1) != z(j + 20) {
                                return Err(PolygonError::SatelliteConsistency(jj));
                            }
                            let wc = satellites_w[jj].reflect_through(&centroid);
                            if wc != satellites_w[(jj + h / 2) % h] {
                                return Err(PolygonError::SatelliteConsistency(jj));
                            }
                        }
                    }
                    _ => unreachable!(),
                }
            }
        }
        // Bigon (A1) aside, require strict positive convexity.
        if h > 2 && !is_positively_convex(v) {
            return Err(PolygonError::NotConvex);
        }
        Ok(StablePolygon {
            dtype: data.dtype,
            vertices: data.vertices,
            punctures: data.punctures,
            satellites_w,
            satellites_u,
        })
    }

    pub fn dtype(&self) -> DynkinType {
        self.dtype
    }

    pub fn sides(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_bigon(&self) -> bool {
        self.vertices.len() == 2
    }

    pub fn vertices(&self) -> &[RatPoint] {
        &self.vertices
    }

    pub fn vertex(&self, j: isize) -> &RatPoint {
        let h = self.vertices.len() as isize;
        &self.vertices[j.rem_euclid(h) as usize]
    }

    /// Edge vector `z_j` from vertex `j-1` to vertex `j` (indices mod h).
    pub fn edge(&self, j: isize) -> RatVec {
        self.vertex(j - 1).to(self.vertex(j))
    }

    pub fn punctures(&self) -> Option<(&RatPoint, &RatPoint)> {
        self.punctures.as_ref().map(|(a, b)| (a, b))
    }

    /// Satellite table `W_j` (types E6/E7/E8).
    pub fn satellite_w(&self, j: isize) -> &RatPoint {
        let h = self.satellites_w.len() as isize;
        &self.satellites_w[j.rem_euclid(h) as usize]
    }

    pub fn satellites_w(&self) -> &[RatPoint] {
        &self.satellites_w
    }

    /// Satellite table `U_j` (type E7 only).
    pub fn satellite_u(&self, j: isize) -> &RatPoint {
        let h = self.satellites_u.len() as isize;
        &self.satellites_u[j.rem_euclid(h) as usize]
    }

    pub fn satellites_u(&self) -> &[RatPoint] {
        &self.satellites_u
    }

    pub fn centroid(&self) -> RatPoint {
        centroid_of(&self.vertices)
    }

    /// The convex region bounded on the left by every length-`s` diagonal.
    pub fn level_diagonal_gon(&self, s: usize) -> Result<ConvexRegion, PolygonError> {
        let h = self.sides();
        if s == 0 || s > h / 2 {
            return Err(PolygonError::BadLevel(s));
        }
        let bounds = (0..h)
            .map(|j| {
                DirectedSegment::new(
                    self.vertices[j].clone(),
                    self.vertices[(j + s) % h].clone(),
                )
                .expect("vertices are distinct")
            })
            .collect();
        Ok(ConvexRegion::new(bounds))
    }

    /// Certify stability: strict positive convexity plus the type-specific
    /// strict containments (punctures for D, satellites for E).
    pub fn is_stable(&self) -> StabilityCheck {
        let mut records = Vec::new();
        if self.is_bigon() {
            records.push("bigon: trivially stable".to_string());
            return StabilityCheck {
                ok: true,
                records,
                failure: None,
            };
        }
        if !is_positively_convex(&self.vertices) {
            return StabilityCheck {
                ok: false,
                records,
                failure: Some("polygon is not strictly positively convex".to_string()),
            };
        }
        records.push("strictly positively convex".to_string());
        let n = self.dtype.rank();
        match self.dtype.family() {
            Family::A => {}
            Family::D => {
                let gon = self
                    .level_diagonal_gon(n - 2)
                    .expect("level n-2 is within range for D");
                let (bm, bp) = self.punctures.as_ref().unwrap();
                for (name, p) in [("B-", bm), ("B+", bp)] {
                    match gon.contains(p, true) {
                        Ok(()) => records.push(format!(
                            "puncture {name} strictly inside level-{} diagonal-gon",
                            n - 2
                        )),
                        Err(i) => {
                            return StabilityCheck {
                                ok: false,
                                records,
                                failure: Some(format!(
                                    "puncture {name} outside level-{} diagonal-gon (diagonal {i})",
                                    n - 2
                                )),
                            }
                        }
                    }
                }
            }
            Family::E => {
                let gon = self
                    .level_diagonal_gon(n - 3)
                    .expect("level n-3 is within range for E");
                for (j, w) in self.satellites_w.iter().enumerate() {
                    match gon.contains(w, true) {
                        Ok(()) => {}
                        Err(i) => {
                            return StabilityCheck {
                                ok: false,
                                records,
                                failure: Some(format!(
                                    "satellite W_{j} outside level-{} diagonal-gon (diagonal {i})",
                                    n - 3
                                )),
                            }
                        }
                    }
                }
                records.push(format!(
                    "all {} satellites strictly inside level-{} diagonal-gon",
                    self.satellites_w.len(),
                    n - 3
                ));
            }
        }
        StabilityCheck {
            ok: true,
            records,
            failure: None,
        }
    }

    /// Mirror with respect to the y-axis, re-indexed to restore the
    /// counterclockwise order with a canonical starting vertex.
    pub fn mirror(&self) -> StablePolygon {
        let mirrored: Vec<RatPoint> = self
            .vertices
            .iter()
            .rev()
            .map(RatPoint::mirror_x)
            .collect();
        let vertices = canonicalize_start(mirrored);
        let punctures = self.punctures.as_ref().map(|(bm, bp)| {
            order_punctures(bm.mirror_x(), bp.mirror_x())
        });
        StablePolygon::validate_relations(PolygonData {
            dtype: self.dtype,
            vertices,
            punctures,
        })
        .expect("mirror preserves all defining relations")
    }

    /// Exact rotation by the rational circle point
    /// `(cos, sin) = ((1-t^2)/(1+t^2), 2t/(1+t^2))`; negative `t` rotates
    /// clockwise. Relations and convexity are preserved and re-checked.
    pub fn rotate_rational(&self, t: &Rat) -> StablePolygon {
        let one = Rat::one();
        let t2 = t * t;
        let den = &one + &t2;
        let c = (&one - &t2) / &den;
        let s = (Rat::from(BigInt::from(2)) * t) / &den;
        let rot = |p: &RatPoint| -> RatPoint {
            RatPoint::new(&c * &p.x - &s * &p.y, &s * &p.x + &c * &p.y)
        };
        let vertices = canonicalize_start(self.vertices.iter().map(rot).collect());
        let punctures = self
            .punctures
            .as_ref()
            .map(|(bm, bp)| order_punctures(rot(bm), rot(bp)));
        StablePolygon::validate_relations(PolygonData {
            dtype: self.dtype,
            vertices,
            punctures,
        })
        .expect("rotation preserves all defining relations")
    }

    /// Translate so the centroid sits at the origin.
    pub fn center_at_origin(&self) -> StablePolygon {
        let o = self.centroid();
        let shift = |p: &RatPoint| RatPoint::new(&p.x - &o.x, &p.y - &o.y);
        StablePolygon {
            dtype: self.dtype,
            vertices: self.vertices.iter().map(shift).collect(),
            punctures: self.punctures.as_ref().map(|(a, b)| (shift(a), shift(b))),
            satellites_w: self.satellites_w.iter().map(shift).collect(),
            satellites_u: self.satellites_u.iter().map(shift).collect(),
        }
    }

    pub fn raw(&self) -> PolygonData {
        PolygonData {
            dtype: self.dtype,
            vertices: self.vertices.clone(),
            punctures: self.punctures.clone(),
        }
    }
}

pub(crate) fn centroid_of(points: &[RatPoint]) -> RatPoint {
    let mut sx = Rat::zero();
    let mut sy = Rat::zero();
    for p in points {
        sx += &p.x;
        sy += &p.y;
    }
    let count = Rat::from(BigInt::from(points.len() as i64));
    RatPoint::new(sx / &count, sy / &count)
}

/// Rotate a CCW cycle so it starts at the minimal vertex in the point order.
pub(crate) fn canonicalize_start(vertices: Vec<RatPoint>) -> Vec<RatPoint> {
    let min_idx = (0..vertices.len())
        .min_by(|&a, &b| cmp_points(&vertices[a], &vertices[b]))
        .unwrap_or(0);
    let mut out = Vec::with_capacity(vertices.len());
    out.extend_from_slice(&vertices[min_idx..]);
    out.extend_from_slice(&vertices[..min_idx]);
    out
}

fn order_punctures(a: RatPoint, b: RatPoint) -> (RatPoint, RatPoint) {
    if cmp_points(&a, &b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    }
}

/// Sort points into counterclockwise order around their centroid.
/// Only valid when the points are in strictly convex position.
pub(crate) fn ccw_order(points: Vec<RatPoint>) -> Vec<RatPoint> {
    let o = centroid_of(&points);
    let mut pts = points;
    pts.sort_by(|a, b| {
        crate::geom::cmp_arg(&o.to(a), &o.to(b)).expect("points distinct from centroid")
    });
    canonicalize_start(pts)
}

/// Convex position test used by constructions: every point is a corner of the
/// hull walk.
pub(crate) fn all_in_convex_position(points: &[RatPoint]) -> bool {
    if points.len() < 3 {
        return false;
    }
    let ordered = ccw_order(points.to_vec());
    is_positively_convex(&ordered)
}

/// Reject polygons with a degenerate chord through the centroid: used by
/// searches to discard near-miss candidates cheaply.
pub(crate) fn all_points_distinct(points: &[&RatPoint]) -> bool {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return false;
            }
        }
    }
    true
}

/// Exact height range of the vertical segment through the centroid inside a
/// convex region, as (lo, hi) offsets; `None` when the region excludes it.
pub(crate) fn vertical_extent_at(
    region: &ConvexRegion,
    x0: &Rat,
) -> Option<(Rat, Rat)> {
    // Solve each half-plane constraint cross(b-a, (x0, y) - a) > 0 for y.
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    for b in &region.bounds {
        let d = b.tail.to(&b.head);
        // cross = d.dx * (y - ay) - d.dy * (x0 - ax) > 0
        let rhs = &d.dy * (x0 - &b.tail.x);
        if d.dx.is_zero() {
            // Constraint independent of y: 0 > rhs must hold.
            if rhs >= Rat::zero() {
                return None;
            }
            continue;
        }
        let bound = &rhs / &d.dx + &b.tail.y;
        if d.dx > Rat::zero() {
            // y > bound
            if lo.as_ref().is_none_or(|l| bound > *l) {
                lo = Some(bound);
            }
        } else if hi.as_ref().is_none_or(|h| bound < *h) {
            hi = Some(bound);
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) if l < h => Some((l, h)),
        _ => None,
    }
}

/// Verify a point is strictly left of every directed polygon edge (interior).
pub(crate) fn strictly_inside_polygon(poly: &[RatPoint], p: &RatPoint) -> bool {
    let h = poly.len();
    (0..h).all(|i| {
        matches!(
            side_of(&poly[i], &poly[(i + 1) % h], p),
            Ok(Side::Left)
        )
    })
}

pub(crate) fn rat_min(a: Rat, b: Rat) -> Rat {
    if a < b {
        a
    } else {
        b
    }
}

#[allow(dead_code)]
pub(crate) fn rat_abs(a: &Rat) -> Rat {
    if a < &Rat::zero() {
        -a.clone()
    } else {
        a.clone()
    }
}

/// Fig-style hexagon used across tests: a strictly convex 6-gon of type A5.
#[cfg(test)]
pub(crate) fn test_hexagon_a5() -> StablePolygon {
    let pts = vec![
        RatPoint::from_ints(-1, 0),
        RatPoint::from_ints(1, 0),
        RatPoint::from_ints(3, 3),
        RatPoint::new(rat(7, 2), rat(7, 1)),
        RatPoint::from_ints(-1, 10),
        RatPoint::from_ints(-4, 5),
    ];
    StablePolygon::validate_relations(PolygonData {
        dtype: DynkinType::new(Family::A, 5).unwrap(),
        vertices: pts,
        punctures: None,
    })
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::cmp_arg;

    fn p(x: i64, y: i64) -> RatPoint {
        RatPoint::from_ints(x, y)
    }

    #[test]
    fn a_type_accepts_any_convex_gon() {
        let hex = test_hexagon_a5();
        assert!(hex.is_stable().ok);
        assert_eq!(hex.sides(), 6);
    }

    #[test]
    fn wrong_vertex_count_rejected() {
        let err = StablePolygon::validate_relations(PolygonData {
            dtype: DynkinType::new(Family::A, 5).unwrap(),
            vertices: vec![p(0, 0), p(1, 0), p(0, 1)],
            punctures: None,
        })
        .unwrap_err();
        assert!(matches!(err, PolygonError::VertexCount { .. }));
    }

    #[test]
    fn cw_polygon_rejected() {
        let err = StablePolygon::validate_relations(PolygonData {
            dtype: DynkinType::new(Family::A, 2).unwrap(),
            vertices: vec![p(0, 0), p(0, 1), p(1, 0)],
            punctures: None,
        })
        .unwrap_err();
        assert_eq!(err, PolygonError::NotConvex);
    }

    fn d4_hexagon(puncture_y: (i64, i64)) -> Result<StablePolygon, PolygonError> {
        // Centrally symmetric hexagon about the origin.
        let vertices = vec![
            p(1, -2),
            p(2, 0),
            p(1, 2),
            p(-1, 2),
            p(-2, 0),
            p(-1, -2),
        ];
        StablePolygon::validate_relations(PolygonData {
            dtype: DynkinType::new(Family::D, 4).unwrap(),
            vertices,
            punctures: Some((
                RatPoint::new(rat(0, 1), rat(puncture_y.0, puncture_y.1)),
                RatPoint::new(rat(0, 1), rat(-puncture_y.0, puncture_y.1)),
            )),
        })
    }

    #[test]
    fn d_symmetry_enforced() {
        // Punctures must be swapped by the central symmetry and ordered.
        assert!(d4_hexagon((-1, 4)).is_ok());
        let bad = StablePolygon::validate_relations(PolygonData {
            dtype: DynkinType::new(Family::D, 4).unwrap(),
            vertices: vec![p(1, -2), p(2, 0), p(1, 2), p(-1, 2), p(-2, 0), p(-1, -2)],
            punctures: Some((p(0, 0), p(1, 0))),
        });
        assert_eq!(bad.unwrap_err(), PolygonError::PunctureSymmetry);
        let asym = StablePolygon::validate_relations(PolygonData {
            dtype: DynkinType::new(Family::D, 4).unwrap(),
            vertices: vec![p(1, -2), p(2, 0), p(1, 2), p(-1, 2), p(-2, 0), p(-1, -3)],
            punctures: Some((p(0, 0), p(0, 0))),
        });
        assert!(matches!(asym.unwrap_err(), PolygonError::CentralSymmetry(_)));
    }

    #[test]
    fn d_stability_containment() {
        let good = d4_hexagon((-1, 4)).unwrap();
        let check = good.is_stable();
        assert!(check.ok, "{:?}", check.failure);
        assert!(check.records.iter().any(|r| r.contains("B-")));
        // Push punctures outside the level-2 gon.
        let bad = d4_hexagon((-19, 10)).unwrap();
        let check = bad.is_stable();
        assert!(!check.ok);
        assert!(check.failure.unwrap().contains("level-2"));
    }

    #[test]
    fn level_one_gon_is_the_polygon() {
        let hex = test_hexagon_a5();
        let gon = hex.level_diagonal_gon(1).unwrap();
        assert!(gon.has_interior());
        let inside = RatPoint::from_ints(0, 5);
        assert!(gon.contains(&inside, true).is_ok());
        assert!(gon.contains(&p(100, 100), true).is_err());
        assert!(hex.level_diagonal_gon(0).is_err());
        assert!(hex.level_diagonal_gon(4).is_err());
    }

    #[test]
    fn centroid_in_level_gons_of_symmetric_polygon() {
        let d4 = d4_hexagon((-1, 4)).unwrap();
        let o = d4.centroid();
        assert_eq!(o, p(0, 0));
        for s in 1..=2 {
            let gon = d4.level_diagonal_gon(s).unwrap();
            assert!(gon.contains(&o, true).is_ok(), "level {s}");
        }
    }

    #[test]
    fn mirror_involution_and_stability() {
        let hex = test_hexagon_a5();
        let m = hex.mirror();
        assert!(m.is_stable().ok);
        let mm = m.mirror();
        // Same vertex set as the canonicalized original.
        let orig = canonicalize_start(hex.vertices().to_vec());
        assert_eq!(mm.vertices(), &orig[..]);
        let d4 = d4_hexagon((-1, 4)).unwrap();
        let dm = d4.mirror();
        assert!(dm.is_stable().ok);
        assert_eq!(dm.mirror().mirror().mirror().vertices(), dm.vertices());
    }

    #[test]
    fn rotation_exactness() {
        let hex = test_hexagon_a5();
        let r0 = hex.rotate_rational(&rat(0, 1));
        assert_eq!(
            r0.vertices(),
            &canonicalize_start(hex.vertices().to_vec())[..]
        );
        // t = 1 is a quarter turn: (1,0) -> (0,1).
        let one = StablePolygon::validate_relations(PolygonData {
            dtype: DynkinType::new(Family::A, 2).unwrap(),
            vertices: vec![p(0, -1), p(1, 0), p(0, 1)],
            punctures: None,
        })
        .unwrap();
        let r = one.rotate_rational(&rat(1, 1));
        assert!(r.vertices().contains(&p(0, 1)));
        assert!(r.vertices().contains(&p(-1, 0)));
        assert!(r.vertices().contains(&p(1, 0)));
        // Small rotations preserve stability (re-certified exactly).
        let r_small = hex.rotate_rational(&rat(1, 100));
        assert!(r_small.is_stable().ok);
    }

    #[test]
    fn satellite_derivation_is_checked() {
        // A centrally symmetric 30-gon that fails the E8 triangle relation.
        let mut vs = Vec::new();
        for k in 0..30i64 {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / 30.0;
            let x = (1024.0 * ang.cos()).round() as i64;
            let y = (1024.0 * ang.sin()).round() as i64;
            vs.push(RatPoint::new(rat(x, 1024), rat(y, 1024)));
        }
        // Enforce exact central symmetry so the failure is the triangle rule.
        for k in 0..15 {
            vs[k + 15] = vs[k].reflect_through(&p(0, 0));
        }
        let err = StablePolygon::validate_relations(PolygonData {
            dtype: DynkinType::new(Family::E, 8).unwrap(),
            vertices: vs,
            punctures: None,
        })
        .unwrap_err();
        assert!(matches!(
            err,
            PolygonError::Relation { name: "triangle", .. } | PolygonError::Relation { name: "pentagon", .. }
        ));
    }

    #[test]
    fn edge_indexing_wraps() {
        let hex = test_hexagon_a5();
        assert_eq!(hex.edge(0), hex.edge(6));
        assert_eq!(hex.edge(-1), hex.edge(5));
        let total = (0..6).fold(RatVec::from_ints(0, 0), |acc, j| acc.add(&hex.edge(j)));
        assert!(total.is_zero());
    }

    #[test]
    fn vertical_extent_is_exact() {
        let square = ConvexRegion::new(vec![
            DirectedSegment::new(p(-1, -1), p(1, -1)).unwrap(),
            DirectedSegment::new(p(1, -1), p(1, 1)).unwrap(),
            DirectedSegment::new(p(1, 1), p(-1, 1)).unwrap(),
            DirectedSegment::new(p(-1, 1), p(-1, -1)).unwrap(),
        ]);
        let (lo, hi) = vertical_extent_at(&square, &rat(0, 1)).unwrap();
        assert_eq!((lo, hi), (rat(-1, 1), rat(1, 1)));
        assert!(vertical_extent_at(&square, &rat(2, 1)).is_none());
    }

    #[test]
    fn ccw_ordering_helper() {
        let pts = vec![p(1, 1), p(-1, -1), p(-1, 1), p(1, -1)];
        let ordered = ccw_order(pts);
        assert!(is_positively_convex(&ordered));
        assert_eq!(ordered[0], p(-1, -1));
    }
}
