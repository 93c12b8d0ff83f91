//! Exact rational planar primitives.
//!
//! Points are ordered bottom-to-top with ties broken left-to-right, vector
//! angles live in `[0, 2π)` and are compared without ever materializing an
//! angle (quadrant index first, then a cross-product sign), and convexity and
//! containment are strict sign conditions. Every operation here is exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Arbitrary-precision rational scalar. `BigRational` keeps values in lowest
/// terms with a positive denominator, so equality is structural.
pub type Rat = BigRational;

/// Parse a rational from the serialized form `"p/q"` or `"p"`.
pub fn rat_from_str(s: &str) -> Result<Rat, GeomError> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt, GeomError> {
        t.parse::<BigInt>()
            .map_err(|_| GeomError::BadRational(s.to_string()))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(GeomError::BadRational(s.to_string()));
            }
            Ok(Rat::new(parse_int(p)?, den))
        }
        None => Ok(Rat::from(parse_int(s)?)),
    }
}

/// Serialize a rational as `"p/q"`, or `"p"` alone when the denominator is 1.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Shorthand for small rational constants in tests and constructions.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeomError {
    #[error("zero vector where a direction is required")]
    ZeroVector,
    #[error("degenerate segment: endpoints coincide")]
    DegenerateSegment,
    #[error("hull is not strictly positively convex")]
    InvalidHull,
    #[error("cannot parse rational `{0}`")]
    BadRational(String),
}

/// A point of the rational plane.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatPoint {
    pub x: Rat,
    pub y: Rat,
}

/// A displacement vector of the rational plane.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatVec {
    pub dx: Rat,
    pub dy: Rat,
}

impl fmt::Debug for RatPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", rat_to_string(&self.x), rat_to_string(&self.y))
    }
}

impl fmt::Debug for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", rat_to_string(&self.dx), rat_to_string(&self.dy))
    }
}

impl RatPoint {
    pub fn new(x: Rat, y: Rat) -> Self {
        RatPoint { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        RatPoint::new(rat(x, 1), rat(y, 1))
    }

    pub fn to(&self, other: &RatPoint) -> RatVec {
        RatVec {
            dx: &other.x - &self.x,
            dy: &other.y - &self.y,
        }
    }

    pub fn add(&self, v: &RatVec) -> RatPoint {
        RatPoint::new(&self.x + &v.dx, &self.y + &v.dy)
    }

    /// Point reflection through `center`: returns `2*center - self`.
    pub fn reflect_through(&self, center: &RatPoint) -> RatPoint {
        RatPoint::new(
            Rat::from(BigInt::from(2)) * &center.x - &self.x,
            Rat::from(BigInt::from(2)) * &center.y - &self.y,
        )
    }

    /// Mirror with respect to the y-axis.
    pub fn mirror_x(&self) -> RatPoint {
        RatPoint::new(-self.x.clone(), self.y.clone())
    }
}

impl RatVec {
    pub fn new(dx: Rat, dy: Rat) -> Self {
        RatVec { dx, dy }
    }

    pub fn from_ints(dx: i64, dy: i64) -> Self {
        RatVec::new(rat(dx, 1), rat(dy, 1))
    }

    pub fn is_zero(&self) -> bool {
        self.dx.is_zero() && self.dy.is_zero()
    }

    pub fn neg(&self) -> RatVec {
        RatVec::new(-self.dx.clone(), -self.dy.clone())
    }

    pub fn add(&self, other: &RatVec) -> RatVec {
        RatVec::new(&self.dx + &other.dx, &self.dy + &other.dy)
    }

    pub fn scale(&self, k: &Rat) -> RatVec {
        RatVec::new(&self.dx * k, &self.dy * k)
    }

    /// Cross product `self.dx * other.dy - self.dy * other.dx`.
    pub fn cross(&self, other: &RatVec) -> Rat {
        &self.dx * &other.dy - &self.dy * &other.dx
    }

    /// True iff the angle lies in `[0, π)`: positive `dy`, or `dy = 0` with
    /// positive `dx`.
    pub fn is_upward(&self) -> bool {
        match self.dy.cmp(&Rat::zero()) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => self.dx.is_positive(),
        }
    }

    /// Octant index used as the major key when comparing angles in `[0, 2π)`.
    fn octant(&self) -> Result<u8, GeomError> {
        let sx = if self.dx.is_positive() {
            1
        } else if self.dx.is_negative() {
            -1
        } else {
            0
        };
        let sy = if self.dy.is_positive() {
            1
        } else if self.dy.is_negative() {
            -1
        } else {
            0
        };
        Ok(match (sx, sy) {
            (1, 0) => 0,
            (1, 1) => 1,
            (0, 1) => 2,
            (-1, 1) => 3,
            (-1, 0) => 4,
            (-1, -1) => 5,
            (0, -1) => 6,
            (1, -1) => 7,
            (0, 0) => return Err(GeomError::ZeroVector),
            _ => unreachable!(),
        })
    }
}

/// Total order on points: compare `y` first, then `x`.
pub fn cmp_points(p: &RatPoint, q: &RatPoint) -> Ordering {
    p.y.cmp(&q.y).then_with(|| p.x.cmp(&q.x))
}

/// Compare the angles of two nonzero vectors in `[0, 2π)`.
///
/// Equality holds exactly when the vectors are positively proportional.
pub fn cmp_arg(u: &RatVec, v: &RatVec) -> Result<Ordering, GeomError> {
    let ou = u.octant()?;
    let ov = v.octant()?;
    if ou != ov {
        return Ok(ou.cmp(&ov));
    }
    // Same open octant (or same axis ray, where cross = 0).
    let c = u.cross(v);
    Ok(if c.is_positive() {
        Ordering::Less
    } else if c.is_negative() {
        Ordering::Greater
    } else {
        Ordering::Equal
    })
}

/// Which side of the directed line `a -> b` the point `p` lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    On,
    Right,
}

pub fn side_of(a: &RatPoint, b: &RatPoint, p: &RatPoint) -> Result<Side, GeomError> {
    if a == b {
        return Err(GeomError::DegenerateSegment);
    }
    let c = a.to(b).cross(&a.to(p));
    Ok(if c.is_positive() {
        Side::Left
    } else if c.is_negative() {
        Side::Right
    } else {
        Side::On
    })
}

/// A directed segment with distinct endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedSegment {
    pub tail: RatPoint,
    pub head: RatPoint,
}

impl DirectedSegment {
    pub fn new(tail: RatPoint, head: RatPoint) -> Result<Self, GeomError> {
        if tail == head {
            return Err(GeomError::DegenerateSegment);
        }
        Ok(DirectedSegment { tail, head })
    }

    pub fn vector(&self) -> RatVec {
        self.tail.to(&self.head)
    }
}

/// Reorient a segment so that its tail precedes its head in the point order;
/// the resulting vector has angle in `[0, π)`.
pub fn upward(seg: &DirectedSegment) -> DirectedSegment {
    match cmp_points(&seg.tail, &seg.head) {
        Ordering::Less => seg.clone(),
        _ => DirectedSegment {
            tail: seg.head.clone(),
            head: seg.tail.clone(),
        },
    }
}

/// Strict positive convexity of a closed vertex cycle: for every directed
/// edge, every non-incident vertex lies strictly on its left. Collinear
/// triples fail. Fewer than 3 points, or repeated consecutive points, fail.
pub fn is_positively_convex(cycle: &[RatPoint]) -> bool {
    let h = cycle.len();
    if h < 3 {
        return false;
    }
    for i in 0..h {
        let a = &cycle[i];
        let b = &cycle[(i + 1) % h];
        if a == b {
            return false;
        }
        for (k, p) in cycle.iter().enumerate() {
            if k == i || k == (i + 1) % h {
                continue;
            }
            match side_of(a, b, p) {
                Ok(Side::Left) => {}
                _ => return false,
            }
        }
    }
    true
}

/// Membership of a point in a positively convex hull. `strict` demands
/// interior membership; otherwise boundary points count.
pub fn point_in_convex(p: &RatPoint, hull: &[RatPoint], strict: bool) -> Result<bool, GeomError> {
    if !is_positively_convex(hull) {
        return Err(GeomError::InvalidHull);
    }
    let h = hull.len();
    for i in 0..h {
        match side_of(&hull[i], &hull[(i + 1) % h], p)? {
            Side::Left => {}
            Side::On if !strict => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// A convex region cut out by directed boundary lines; the interior is the
/// intersection of their strict left half-planes.
#[derive(Debug, Clone)]
pub struct ConvexRegion {
    pub bounds: Vec<DirectedSegment>,
}

impl ConvexRegion {
    pub fn new(bounds: Vec<DirectedSegment>) -> Self {
        ConvexRegion { bounds }
    }

    /// Strict interior membership, with the index of the first violated
    /// bound on failure.
    pub fn contains(&self, p: &RatPoint, strict: bool) -> Result<(), usize> {
        for (i, b) in self.bounds.iter().enumerate() {
            match side_of(&b.tail, &b.head, p).expect("bounds are nondegenerate") {
                Side::Left => {}
                Side::On if !strict => {}
                _ => return Err(i),
            }
        }
        Ok(())
    }

    /// Whether the region has nonempty interior, decided by exact
    /// half-plane clipping of a bounding box enclosing all bound endpoints.
    pub fn has_interior(&self) -> bool {
        // Bounding box large enough to contain the (bounded) region.
        let mut lo_x = self.bounds[0].tail.x.clone();
        let mut hi_x = lo_x.clone();
        let mut lo_y = self.bounds[0].tail.y.clone();
        let mut hi_y = lo_y.clone();
        for b in &self.bounds {
            for p in [&b.tail, &b.head] {
                if p.x < lo_x {
                    lo_x = p.x.clone();
                }
                if p.x > hi_x {
                    hi_x = p.x.clone();
                }
                if p.y < lo_y {
                    lo_y = p.y.clone();
                }
                if p.y > hi_y {
                    hi_y = p.y.clone();
                }
            }
        }
        let pad = Rat::from(BigInt::from(1)) + (&hi_x - &lo_x) + (&hi_y - &lo_y);
        let poly = vec![
            RatPoint::new(&lo_x - &pad, &lo_y - &pad),
            RatPoint::new(&hi_x + &pad, &lo_y - &pad),
            RatPoint::new(&hi_x + &pad, &hi_y + &pad),
            RatPoint::new(&lo_x - &pad, &hi_y + &pad),
        ];
        let mut poly = poly;
        for b in &self.bounds {
            poly = clip_left(&poly, &b.tail, &b.head);
            if poly.len() < 3 {
                return false;
            }
        }
        // Clipping can leave a degenerate (zero-area) chain; demand a
        // genuine left turn somewhere.
        let m = poly.len();
        (0..m).any(|i| {
            let a = &poly[i];
            let b = &poly[(i + 1) % m];
            let c = &poly[(i + 2) % m];
            a != b && matches!(side_of(a, b, c), Ok(Side::Left))
        })
    }
}

/// Sutherland-Hodgman step: keep the closed left side of `a -> b`.
fn clip_left(poly: &[RatPoint], a: &RatPoint, b: &RatPoint) -> Vec<RatPoint> {
    let mut out = Vec::new();
    let m = poly.len();
    let line = a.to(b);
    let val = |p: &RatPoint| -> Rat { line.cross(&a.to(p)) };
    for i in 0..m {
        let cur = &poly[i];
        let nxt = &poly[(i + 1) % m];
        let vc = val(cur);
        let vn = val(nxt);
        let cur_in = !vc.is_negative();
        let nxt_in = !vn.is_negative();
        if cur_in {
            out.push(cur.clone());
        }
        if cur_in != nxt_in {
            // Exact intersection of segment cur->nxt with the line.
            let t = &vc / (&vc - &vn);
            let dir = cur.to(nxt);
            out.push(cur.add(&dir.scale(&t)));
        }
    }
    out.dedup();
    if out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: i64, y: i64) -> RatPoint {
        RatPoint::from_ints(x, y)
    }

    fn v(dx: i64, dy: i64) -> RatVec {
        RatVec::from_ints(dx, dy)
    }

    #[test]
    fn point_order_y_major_x_tiebreak() {
        assert_eq!(cmp_points(&p(0, -1), &p(-1, 0)), Ordering::Less);
        assert_eq!(cmp_points(&p(-1, 0), &p(1, 0)), Ordering::Less);
        let q = p(3, 7);
        assert_eq!(cmp_points(&q, &q), Ordering::Equal);
    }

    #[test]
    fn arg_comparison() {
        assert_eq!(cmp_arg(&v(1, 0), &v(0, 1)).unwrap(), Ordering::Less);
        assert_eq!(cmp_arg(&v(-1, 1), &v(1, 1)).unwrap(), Ordering::Greater);
        assert_eq!(cmp_arg(&v(2, 3), &v(4, 6)).unwrap(), Ordering::Equal);
        assert_eq!(cmp_arg(&v(0, 0), &v(1, 0)), Err(GeomError::ZeroVector));
        // Around the circle: 0 < π/4 < π/2 < 3π/4 < π < 5π/4 < 3π/2 < 7π/4.
        let ring = [
            v(1, 0),
            v(1, 1),
            v(0, 1),
            v(-1, 1),
            v(-1, 0),
            v(-1, -1),
            v(0, -1),
            v(1, -1),
        ];
        for i in 0..ring.len() {
            for j in 0..ring.len() {
                assert_eq!(cmp_arg(&ring[i], &ring[j]).unwrap(), i.cmp(&j));
            }
        }
    }

    #[test]
    fn upward_normalization() {
        let s = DirectedSegment::new(p(0, 0), p(1, 1)).unwrap();
        assert_eq!(upward(&s), s);
        let s = DirectedSegment::new(p(0, 0), p(-1, -1)).unwrap();
        let u = upward(&s);
        assert_eq!(u.tail, p(-1, -1));
        assert_eq!(u.head, p(0, 0));
        // x tie-break forces reversal; the result has angle 0.
        let s = DirectedSegment::new(p(1, 0), p(0, 0)).unwrap();
        let u = upward(&s);
        assert_eq!(u.tail, p(0, 0));
        assert!(u.vector().is_upward());
        assert_eq!(
            cmp_arg(&u.vector(), &v(1, 0)).unwrap(),
            Ordering::Equal
        );
    }

    #[test]
    fn side_of_examples() {
        let a = p(0, 0);
        let b = p(1, 0);
        assert_eq!(side_of(&a, &b, &p(0, 1)).unwrap(), Side::Left);
        assert_eq!(side_of(&a, &b, &p(0, -1)).unwrap(), Side::Right);
        assert_eq!(side_of(&a, &b, &p(2, 0)).unwrap(), Side::On);
        assert!(side_of(&a, &a, &b).is_err());
    }

    #[test]
    fn convexity() {
        let sq = vec![p(0, 0), p(1, 0), p(1, 1), p(0, 1)];
        assert!(is_positively_convex(&sq));
        let cw: Vec<_> = sq.iter().rev().cloned().collect();
        assert!(!is_positively_convex(&cw));
        // A collinear midpoint breaks strictness.
        let with_mid = vec![p(0, 0), p(2, 0), p(1, 0), p(2, 2), p(0, 2)];
        assert!(!is_positively_convex(&with_mid));
        let with_mid2 = vec![p(0, 0), p(1, 0), p(2, 0), p(2, 2), p(0, 2)];
        assert!(!is_positively_convex(&with_mid2));
    }

    #[test]
    fn containment() {
        let sq = vec![p(0, 0), p(2, 0), p(2, 2), p(0, 2)];
        assert!(point_in_convex(&p(1, 1), &sq, true).unwrap());
        assert!(!point_in_convex(&p(1, 0), &sq, true).unwrap());
        assert!(point_in_convex(&p(1, 0), &sq, false).unwrap());
        assert!(!point_in_convex(&p(3, 1), &sq, false).unwrap());
        let bad = vec![p(0, 0), p(1, 1), p(2, 2)];
        assert!(point_in_convex(&p(0, 1), &bad, true).is_err());
    }

    #[test]
    fn region_interior() {
        let seg = |a: RatPoint, b: RatPoint| DirectedSegment::new(a, b).unwrap();
        // CCW triangle has interior.
        let tri = ConvexRegion::new(vec![
            seg(p(0, 0), p(2, 0)),
            seg(p(2, 0), p(0, 2)),
            seg(p(0, 2), p(0, 0)),
        ]);
        assert!(tri.has_interior());
        assert!(tri.contains(&RatPoint::new(rat(1, 2), rat(1, 2)), true).is_ok());
        assert_eq!(tri.contains(&p(2, 2), true), Err(1));
        // The same line taken with both orientations leaves no interior.
        let empty = ConvexRegion::new(vec![seg(p(0, 0), p(1, 0)), seg(p(1, 0), p(0, 0))]);
        assert!(!empty.has_interior());
        // A strip between two parallel lines does have interior.
        let strip = ConvexRegion::new(vec![seg(p(0, 0), p(1, 0)), seg(p(1, 1), p(0, 1))]);
        assert!(strip.has_interior());
    }

    #[test]
    fn rational_strings() {
        assert_eq!(rat_to_string(&rat(3, 1)), "3");
        assert_eq!(rat_to_string(&rat(-7, 2)), "-7/2");
        assert_eq!(rat_from_str("-7/2").unwrap(), rat(-7, 2));
        assert_eq!(rat_from_str("5").unwrap(), rat(5, 1));
        assert_eq!(rat_from_str("6/4").unwrap(), rat(3, 2));
        assert!(rat_from_str("1/0").is_err());
        assert!(rat_from_str("x").is_err());
    }

    proptest! {
        #[test]
        fn cmp_points_total_order(ax in -50i64..50, ay in -50i64..50,
                                  bx in -50i64..50, by in -50i64..50,
                                  cx in -50i64..50, cy in -50i64..50) {
            let (a, b, c) = (p(ax, ay), p(bx, by), p(cx, cy));
            prop_assert_eq!(cmp_points(&a, &b), cmp_points(&b, &a).reverse());
            if cmp_points(&a, &b) != Ordering::Greater && cmp_points(&b, &c) != Ordering::Greater {
                prop_assert_ne!(cmp_points(&a, &c), Ordering::Greater);
            }
        }

        #[test]
        fn cmp_arg_preorder(ax in -9i64..10, ay in -9i64..10,
                            bx in -9i64..10, by in -9i64..10,
                            cx in -9i64..10, cy in -9i64..10) {
            prop_assume!((ax, ay) != (0, 0) && (bx, by) != (0, 0) && (cx, cy) != (0, 0));
            let (a, b, c) = (v(ax, ay), v(bx, by), v(cx, cy));
            prop_assert_eq!(cmp_arg(&a, &b).unwrap(), cmp_arg(&b, &a).unwrap().reverse());
            if cmp_arg(&a, &b).unwrap() != Ordering::Greater
                && cmp_arg(&b, &c).unwrap() != Ordering::Greater {
                prop_assert_ne!(cmp_arg(&a, &c).unwrap(), Ordering::Greater);
            }
        }

        #[test]
        fn upward_idempotent_and_in_range(ax in -20i64..20, ay in -20i64..20,
                                          bx in -20i64..20, by in -20i64..20) {
            prop_assume!((ax, ay) != (bx, by));
            let s = DirectedSegment::new(p(ax, ay), p(bx, by)).unwrap();
            let u = upward(&s);
            prop_assert_eq!(upward(&u).clone(), u.clone());
            let w = u.vector();
            prop_assert!(w.is_upward());
            // arg in [0, π) means not-less than (1,0) and strictly less than (-1,0).
            prop_assert_ne!(cmp_arg(&w, &v(1, 0)).unwrap(), Ordering::Less);
            prop_assert_eq!(cmp_arg(&w, &v(-1, 0)).unwrap(), Ordering::Less);
        }

        #[test]
        fn side_antisymmetry(ax in -20i64..20, ay in -20i64..20,
                             bx in -20i64..20, by in -20i64..20,
                             px in -20i64..20, py in -20i64..20) {
            prop_assume!((ax, ay) != (bx, by));
            let (a, b, q) = (p(ax, ay), p(bx, by), p(px, py));
            let lhs = side_of(&a, &b, &q).unwrap();
            let rhs = side_of(&b, &a, &q).unwrap();
            let flip = |s: Side| match s {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
                Side::On => Side::On,
            };
            prop_assert_eq!(lhs, flip(rhs));
        }
    }
}
