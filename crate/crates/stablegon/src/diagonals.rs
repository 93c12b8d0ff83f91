//! Admissible diagonal classes, distinguished simples, the intersection
//! quiver, and the induced stability function.
//!
//! Diagonals are symbolic segments between model points (polygon vertices,
//! satellites, punctures), grouped into equivalence classes by the model's
//! identifications. Class membership is bookkept with a signed union-find and
//! then audited exactly: every member of a class must realize the class
//! vector up to the recorded orientation, so any slip in the identification
//! tables is caught at build time rather than silently miscounting.

use crate::dynkin::{DimVector, DynkinQuiver, DynkinType, Family, Sign, StabilityFunction};
use crate::geom::{cmp_arg, cmp_points, RatPoint, RatVec};
use crate::polygon::StablePolygon;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiagonalError {
    #[error("inconsistent diagonal class: {0}")]
    InconsistentClass(String),
    #[error("expected {expected} diagonal classes, found {found}")]
    ClassCount { expected: usize, found: usize },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("polygon is not stable: {0}")]
    NotStable(String),
    #[error("no admissible split for class {0}")]
    NoSplit(usize),
    #[error("intersection quiver shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("decomposition of class {0} does not reproduce its vector")]
    BadDecomposition(usize),
}

/// Symbolic model point: a polygon vertex, a satellite, or a puncture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointTag {
    V(usize),
    W(usize),
    BMinus,
    BPlus,
}

impl PointTag {
    pub fn label(&self) -> String {
        match self {
            PointTag::V(j) => format!("V{j}"),
            PointTag::W(j) => format!("W{j}"),
            PointTag::BMinus => "B-".to_string(),
            PointTag::BPlus => "B+".to_string(),
        }
    }
}

/// Oriented symbolic segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymSeg {
    pub tail: PointTag,
    pub head: PointTag,
}

impl SymSeg {
    fn new(tail: PointTag, head: PointTag) -> Self {
        SymSeg { tail, head }
    }

    pub fn reversed(&self) -> SymSeg {
        SymSeg {
            tail: self.head,
            head: self.tail,
        }
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.tail.label(), self.head.label())
    }
}

/// An equivalence class of admissible diagonals, upward-normalized: every
/// member, in its stored orientation, has geometric vector equal to `vec`.
#[derive(Debug, Clone)]
pub struct DiagonalClass {
    pub id: usize,
    pub members: Vec<SymSeg>,
    pub rep: SymSeg,
    pub vec: RatVec,
    pub endpoints: (RatPoint, RatPoint),
}

/// An arrow of the intersection quiver: an essential oriented intersection
/// between two simples, graded by the intersection index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arrow {
    pub from: usize,
    pub to: usize,
    pub grade: u8,
}

/// The graded quiver on the simples. Its underlying graph is verified to be
/// the Dynkin diagram of the polygon's type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionQuiver {
    pub dtype: DynkinType,
    pub arrows: Vec<Arrow>,
}

impl IntersectionQuiver {
    /// Read the orientation signs off the arrows (requires the shape check
    /// to have passed, which `DiagonalModel::intersection_quiver` enforces).
    pub fn to_dynkin_quiver(&self) -> DynkinQuiver {
        let signs = self
            .dtype
            .edges()
            .iter()
            .map(|&(a, b)| {
                if self.arrows.iter().any(|ar| ar.from == a && ar.to == b) {
                    Sign::Plus
                } else {
                    Sign::Minus
                }
            })
            .collect();
        DynkinQuiver::new(self.dtype, signs).expect("edge count matches rank - 1")
    }

    pub fn opposite(&self) -> IntersectionQuiver {
        IntersectionQuiver {
            dtype: self.dtype,
            arrows: self
                .arrows
                .iter()
                .map(|a| Arrow {
                    from: a.to,
                    to: a.from,
                    grade: a.grade,
                })
                .collect(),
        }
    }
}

/// The distinguished simple diagonals `s_1..s_n` (class ids), along with the
/// scaffolding used to locate them.
#[derive(Debug, Clone)]
pub struct SimpleSet {
    /// Class id of `s_i` at position `i-1`.
    pub classes: Vec<usize>,
    pub locator: SimpleLocator,
}

/// Type-specific scaffolding recorded while locating the simples.
#[derive(Debug, Clone)]
pub enum SimpleLocator {
    TypeA {
        sorted: Vec<PointTag>,
    },
    TypeD {
        /// All 2n model points in increasing order (vertices and punctures).
        sorted: Vec<PointTag>,
        /// 1 when the punctures sit at `Y_{±1}`, 2 when at `Y_{±2}`.
        puncture_level: u8,
    },
    TypeE {
        /// Cyclic shift aligning the lowest run of vertices at indices 1..n-3.
        shift: usize,
        /// Corners of the hull polygon carrying the path simples.
        hull: Vec<PointTag>,
        /// Whether the left candidate triangle was the lower translate.
        took_left: bool,
    },
}

/// One upward diagonal with its class decomposition and phase rank.
#[derive(Debug, Clone)]
pub struct AnnotatedDiagonal {
    pub class_id: usize,
    pub dim: DimVector,
    /// Position in the phase-decreasing order (0 = largest phase).
    pub phase_rank: usize,
}

/// The full diagonal calculus of one validated stable polygon.
pub struct DiagonalModel {
    polygon: StablePolygon,
    classes: Vec<DiagonalClass>,
    /// Oriented symbolic segment -> (class id, matches class orientation).
    symbol_map: HashMap<SymSeg, (usize, bool)>,
    tags: Vec<PointTag>,
}

struct SignedUnionFind {
    parent: Vec<usize>,
    /// Sign of this node relative to its parent.
    sign: Vec<i8>,
}

impl SignedUnionFind {
    fn new(n: usize) -> Self {
        SignedUnionFind {
            parent: (0..n).collect(),
            sign: vec![1; n],
        }
    }

    /// Returns (root, sign of x relative to root).
    fn find(&mut self, x: usize) -> (usize, i8) {
        if self.parent[x] == x {
            return (x, 1);
        }
        let (root, s) = self.find(self.parent[x]);
        self.parent[x] = root;
        self.sign[x] *= s;
        (root, self.sign[x])
    }

    /// Unite with the claim `x = rel * y`; returns false on a sign conflict.
    fn union(&mut self, x: usize, y: usize, rel: i8) -> bool {
        let (rx, sx) = self.find(x);
        let (ry, sy) = self.find(y);
        if rx == ry {
            return sx == rel * sy;
        }
        // x = sx * rx and y = sy * ry, so rx = (rel * sy / sx) * ry.
        self.parent[rx] = ry;
        self.sign[rx] = rel * sy * sx;
        true
    }
}

impl DiagonalModel {
    /// Enumerate all admissible diagonal classes of a stable polygon,
    /// verifying every identification as an exact vector equality.
    pub fn build(polygon: &StablePolygon) -> Result<DiagonalModel, DiagonalError> {
        let stability = polygon.is_stable();
        if !stability.ok {
            return Err(DiagonalError::NotStable(
                stability.failure.unwrap_or_else(|| "unknown".into()),
            ));
        }
        let h = polygon.sides();
        let n = polygon.dtype().rank();
        let wrap = |j: isize| -> usize { j.rem_euclid(h as isize) as usize };
        let v = |j: isize| PointTag::V(wrap(j));
        let w = |j: isize| PointTag::W(wrap(j));

        let mut symbols: Vec<SymSeg> = Vec::new();
        let mut index: HashMap<SymSeg, usize> = HashMap::new();
        fn push(
            s: SymSeg,
            symbols: &mut Vec<SymSeg>,
            index: &mut HashMap<SymSeg, usize>,
        ) -> usize {
            *index.entry(s).or_insert_with(|| {
                symbols.push(s);
                symbols.len() - 1
            })
        }
        // (symbol, symbol, relative sign) claims to be verified and united.
        let mut claims: Vec<(SymSeg, SymSeg, i8)> = Vec::new();

        match polygon.dtype().family() {
            Family::A => {
                for i in 0..h {
                    for j in i + 1..h {
                        push(
                            SymSeg::new(PointTag::V(i), PointTag::V(j)),
                            &mut symbols,
                            &mut index,
                        );
                    }
                }
            }
            Family::D => {
                let half = (h / 2) as isize;
                for s in 1..half {
                    for j in 0..h as isize {
                        push(SymSeg::new(v(j), v(j + s)), &mut symbols, &mut index);
                    }
                }
                for j in 0..h as isize {
                    push(SymSeg::new(v(j), PointTag::BPlus), &mut symbols, &mut index);
                    push(SymSeg::new(v(j), PointTag::BMinus), &mut symbols, &mut index);
                }
                for s in 1..half {
                    for j in 0..h as isize {
                        claims.push((
                            SymSeg::new(v(j), v(j + s)),
                            SymSeg::new(v(j + half), v(j + s + half)),
                            -1,
                        ));
                    }
                }
                for j in 0..h as isize {
                    claims.push((
                        SymSeg::new(v(j), PointTag::BPlus),
                        SymSeg::new(v(j + half), PointTag::BMinus),
                        -1,
                    ));
                }
            }
            Family::E => {
                let chord_max = (n - 3) as isize;
                for s in 1..=chord_max {
                    for j in 0..h as isize {
                        push(SymSeg::new(v(j), v(j + s)), &mut symbols, &mut index);
                    }
                }
                // Satellite families per type, together with the
                // identifications that make the class count come out.
                let mut fams: Vec<Box<dyn Fn(isize) -> SymSeg>> = Vec::new();
                match n {
                    6 => {
                        fams.push(Box::new(move |k| SymSeg::new(v(k), w(k))));
                        fams.push(Box::new(move |k| SymSeg::new(w(k + 1), v(k))));
                        fams.push(Box::new(move |k| SymSeg::new(v(k), w(k + 2))));
                        fams.push(Box::new(move |k| SymSeg::new(w(k + 3), v(k + 4))));
                        fams.push(Box::new(move |k| SymSeg::new(v(k), w(k + 3))));
                        fams.push(Box::new(move |k| SymSeg::new(w(k + 2), v(k + 4))));
                        fams.push(Box::new(move |k| SymSeg::new(w(k), w(k + 2))));
                    }
                    7 => {
                        fams.push(Box::new(move |k| SymSeg::new(v(k), w(k))));
                        fams.push(Box::new(move |k| SymSeg::new(w(k + 1), v(k))));
                        fams.push(Box::new(move |k| SymSeg::new(v(k), w(k - 1))));
                        fams.push(Box::new(move |k| SymSeg::new(v(k), w(k + 2))));
                        fams.push(Box::new(move |k| SymSeg::new(w(k), v(k + 2))));
                        fams.push(Box::new(move |k| SymSeg::new(v(k), w(k + 3))));
                        fams.push(Box::new(move |k| SymSeg::new(w(k), v(k + 3))));
                        fams.push(Box::new(move |k| SymSeg::new(w(k), w(k + 2))));
                    }
                    8 => {
                        fams.push(Box::new(move |k| SymSeg::new(v(k), w(k))));
                        fams.push(Box::new(move |k| SymSeg::new(w(k), v(k + 1))));
                        fams.push(Box::new(move |k| SymSeg::new(w(k + 1), v(k))));
                        fams.push(Box::new(move |k| SymSeg::new(v(k), w(k - 2))));
                        fams.push(Box::new(move |k| SymSeg::new(v(k), w(k + 2))));
                        fams.push(Box::new(move |k| SymSeg::new(w(k), v(k + 3))));
                        fams.push(Box::new(move |k| SymSeg::new(v(k), w(k + 3))));
                        fams.push(Box::new(move |k| SymSeg::new(w(k), v(k + 4))));
                        fams.push(Box::new(move |k| SymSeg::new(w(k), w(k + 2))));
                    }
                    _ => unreachable!(),
                }
                for f in &fams {
                    for j in 0..h as isize {
                        push(f(j), &mut symbols, &mut index);
                    }
                }
                for j in 0..h as isize {
                    let edge = SymSeg::new(v(j - 1), v(j));
                    match n {
                        6 => {
                            claims.push((edge, SymSeg::new(w(j + 4), v(j + 3)), 1));
                            claims.push((edge, SymSeg::new(v(j - 4), w(j - 4)), 1));
                            claims.push((edge, SymSeg::new(w(j - 7), w(j - 5)), -1));
                            claims.push((
                                SymSeg::new(v(j - 1), w(j + 2)),
                                SymSeg::new(w(j + 1), v(j + 3)),
                                1,
                            ));
                            claims.push((
                                SymSeg::new(v(j - 1), w(j + 2)),
                                SymSeg::new(v(j + 6), v(j + 8)),
                                -1,
                            ));
                            claims.push((
                                SymSeg::new(v(j - 1), w(j + 1)),
                                SymSeg::new(w(j + 2), v(j + 3)),
                                1,
                            ));
                            claims.push((
                                SymSeg::new(v(j - 1), w(j + 1)),
                                SymSeg::new(v(j + 5), w(j + 7)),
                                -1,
                            ));
                            claims.push((
                                SymSeg::new(v(j), v(j + 3)),
                                SymSeg::new(v(j + 6), v(j + 9)),
                                -1,
                            ));
                        }
                        7 => {
                            claims.push((edge, SymSeg::new(w(j + 4), v(j + 4)), 1));
                            claims.push((edge, SymSeg::new(v(j - 5), w(j - 5)), 1));
                            claims.push((
                                SymSeg::new(w(j), w(j + 2)),
                                SymSeg::new(w(j + 8), v(j + 7)),
                                1,
                            ));
                            claims.push((
                                SymSeg::new(w(j), w(j + 2)),
                                SymSeg::new(v(j - 5), w(j - 6)),
                                1,
                            ));
                            claims.push((
                                SymSeg::new(v(j - 1), w(j + 2)),
                                SymSeg::new(w(j + 1), v(j + 4)),
                                1,
                            ));
                            claims.push((
                                SymSeg::new(v(j - 1), w(j + 1)),
                                SymSeg::new(w(j + 2), v(j + 4)),
                                1,
                            ));
                        }
                        8 => {
                            claims.push((edge, SymSeg::new(w(j + 4), v(j + 5)), 1));
                            claims.push((edge, SymSeg::new(v(j - 6), w(j - 6)), 1));
                            claims.push((
                                SymSeg::new(w(j), w(j + 2)),
                                SymSeg::new(w(j + 14), v(j + 13)),
                                1,
                            ));
                            claims.push((
                                SymSeg::new(w(j), w(j + 2)),
                                SymSeg::new(v(j - 10), w(j - 12)),
                                1,
                            ));
                            claims.push((
                                SymSeg::new(v(j - 1), w(j + 2)),
                                SymSeg::new(w(j + 1), v(j + 5)),
                                1,
                            ));
                            claims.push((
                                SymSeg::new(v(j - 1), w(j + 1)),
                                SymSeg::new(w(j + 2), v(j + 5)),
                                1,
                            ));
                        }
                        _ => unreachable!(),
                    }
                }
                // Central symmetry identifies antipodal segments (E7/E8).
                if n == 7 || n == 8 {
                    let half = (h / 2) as isize;
                    let shift_tag = |t: PointTag| match t {
                        PointTag::V(j) => v(j as isize + half),
                        PointTag::W(j) => w(j as isize + half),
                        other => other,
                    };
                    for s in symbols.clone() {
                        claims.push((s, SymSeg::new(shift_tag(s.tail), shift_tag(s.head)), -1));
                    }
                }
            }
        }

        let model_points = Self::collect_tags(polygon);
        let geo = |t: PointTag| -> RatPoint { Self::tag_point(polygon, t) };
        let seg_vec = |s: &SymSeg| -> RatVec { geo(s.tail).to(&geo(s.head)) };

        // Unite under the claimed identifications, verifying each one as an
        // exact vector identity first.
        let mut uf = SignedUnionFind::new(symbols.len());
        let lookup = |s: &SymSeg,
                      index: &HashMap<SymSeg, usize>|
         -> Result<(usize, i8), DiagonalError> {
            if let Some(&i) = index.get(s) {
                Ok((i, 1))
            } else if let Some(&i) = index.get(&s.reversed()) {
                Ok((i, -1))
            } else {
                Err(DiagonalError::InconsistentClass(format!(
                    "identification references unknown symbol {}",
                    s.label()
                )))
            }
        };
        for (a, b, rel) in &claims {
            let va = seg_vec(a);
            let vb = seg_vec(b);
            let expected = if *rel == 1 { vb.clone() } else { vb.neg() };
            if va != expected {
                return Err(DiagonalError::InconsistentClass(format!(
                    "claimed {} = {}{} fails as vectors",
                    a.label(),
                    if *rel == 1 { "" } else { "-" },
                    b.label()
                )));
            }
            let (ia, sa) = lookup(a, &index)?;
            let (ib, sb) = lookup(b, &index)?;
            if !uf.union(ia, ib, sa * rel * sb) {
                return Err(DiagonalError::InconsistentClass(format!(
                    "sign conflict uniting {} and {}",
                    a.label(),
                    b.label()
                )));
            }
        }

        // Group into classes.
        let mut groups: BTreeMap<usize, Vec<(usize, i8)>> = BTreeMap::new();
        for i in 0..symbols.len() {
            let (root, s) = uf.find(i);
            groups.entry(root).or_default().push((i, s));
        }
        let expected = n * h / 2;
        if groups.len() != expected {
            return Err(DiagonalError::ClassCount {
                expected,
                found: groups.len(),
            });
        }

        let mut proto: Vec<(SymSeg, Vec<SymSeg>, RatVec)> = Vec::new();
        for (root, members) in groups {
            let root_vec = seg_vec(&symbols[root]);
            if root_vec.is_zero() {
                return Err(DiagonalError::Degenerate(format!(
                    "class of {} has zero vector",
                    symbols[root].label()
                )));
            }
            let flip_all = !root_vec.is_upward();
            let class_vec = if flip_all { root_vec.neg() } else { root_vec };
            let mut oriented: Vec<SymSeg> = Vec::with_capacity(members.len());
            for (i, s) in members {
                let eff = if flip_all { -s } else { s };
                let m = if eff == 1 {
                    symbols[i]
                } else {
                    symbols[i].reversed()
                };
                // The audit: each member must realize the class vector.
                if seg_vec(&m) != class_vec {
                    return Err(DiagonalError::InconsistentClass(format!(
                        "member {} does not match class vector",
                        m.label()
                    )));
                }
                oriented.push(m);
            }
            oriented.sort();
            oriented.dedup();
            proto.push((oriented[0], oriented, class_vec));
        }
        proto.sort_by(|a, b| a.0.cmp(&b.0));

        let mut classes = Vec::with_capacity(proto.len());
        let mut symbol_map: HashMap<SymSeg, (usize, bool)> = HashMap::new();
        for (id, (rep, members, vec)) in proto.into_iter().enumerate() {
            for m in &members {
                let prev_a = symbol_map.insert(*m, (id, true));
                let prev_b = symbol_map.insert(m.reversed(), (id, false));
                if prev_a.is_some_and(|(old, _)| old != id)
                    || prev_b.is_some_and(|(old, _)| old != id)
                {
                    return Err(DiagonalError::InconsistentClass(format!(
                        "symbol {} appears in two classes",
                        m.label()
                    )));
                }
            }
            let endpoints = (geo(rep.tail), geo(rep.head));
            classes.push(DiagonalClass {
                id,
                members,
                rep,
                vec,
                endpoints,
            });
        }

        Ok(DiagonalModel {
            polygon: polygon.clone(),
            classes,
            symbol_map,
            tags: model_points,
        })
    }

    fn collect_tags(polygon: &StablePolygon) -> Vec<PointTag> {
        let h = polygon.sides();
        let mut tags: Vec<PointTag> = (0..h).map(PointTag::V).collect();
        match polygon.dtype().family() {
            Family::A => {}
            Family::D => {
                tags.push(PointTag::BMinus);
                tags.push(PointTag::BPlus);
            }
            Family::E => tags.extend((0..h).map(PointTag::W)),
        }
        tags
    }

    fn tag_point(polygon: &StablePolygon, t: PointTag) -> RatPoint {
        match t {
            PointTag::V(j) => polygon.vertex(j as isize).clone(),
            PointTag::W(j) => polygon.satellite_w(j as isize).clone(),
            PointTag::BMinus => polygon.punctures().expect("D polygon").0.clone(),
            PointTag::BPlus => polygon.punctures().expect("D polygon").1.clone(),
        }
    }

    pub fn polygon(&self) -> &StablePolygon {
        &self.polygon
    }

    pub fn classes(&self) -> &[DiagonalClass] {
        &self.classes
    }

    pub fn class(&self, id: usize) -> &DiagonalClass {
        &self.classes[id]
    }

    pub fn point_of(&self, t: PointTag) -> RatPoint {
        Self::tag_point(&self.polygon, t)
    }

    /// Class id of a symbolic segment, together with whether the given
    /// orientation matches the class (upward) orientation.
    pub fn class_of(&self, seg: &SymSeg) -> Option<(usize, bool)> {
        self.symbol_map.get(seg).copied()
    }

    /// Upward diagonals sorted by decreasing angle (ties broken by
    /// representative here; discreteness is enforced downstream).
    pub fn upward_diagonals(&self) -> Vec<&DiagonalClass> {
        let mut refs: Vec<&DiagonalClass> = self.classes.iter().collect();
        refs.sort_by(|a, b| {
            cmp_arg(&b.vec, &a.vec)
                .expect("class vectors are nonzero")
                .then_with(|| a.rep.cmp(&b.rep))
        });
        refs
    }

    /// The central charge of a diagonal class: its upward vector.
    pub fn central_charge(&self, id: usize) -> &RatVec {
        &self.classes[id].vec
    }

    /// Locate the distinguished simples `s_1..s_n`.
    pub fn simples(&self) -> Result<SimpleSet, DiagonalError> {
        match self.polygon.dtype().family() {
            Family::A => self.simples_a(),
            Family::D => self.simples_d(),
            Family::E => self.simples_e(),
        }
    }

    fn lookup_class(&self, tail: PointTag, head: PointTag) -> Result<usize, DiagonalError> {
        self.class_of(&SymSeg::new(tail, head))
            .map(|(id, _)| id)
            .ok_or_else(|| {
                DiagonalError::Degenerate(format!(
                    "segment {}{} is not admissible",
                    tail.label(),
                    head.label()
                ))
            })
    }

    fn sort_tags(&self, tags: &mut [PointTag]) -> Result<(), DiagonalError> {
        let mut err = None;
        tags.sort_by(|&a, &b| {
            let pa = self.point_of(a);
            let pb = self.point_of(b);
            match cmp_points(&pa, &pb) {
                Ordering::Equal => {
                    // Coincident punctures are ordered B- before B+; any other
                    // coincidence is a degeneracy.
                    match (a, b) {
                        (PointTag::BMinus, PointTag::BPlus) => Ordering::Less,
                        (PointTag::BPlus, PointTag::BMinus) => Ordering::Greater,
                        _ => {
                            err = Some(format!(
                                "coincident model points {} and {}",
                                a.label(),
                                b.label()
                            ));
                            a.cmp(&b)
                        }
                    }
                }
                o => o,
            }
        });
        match err {
            Some(e) => Err(DiagonalError::Degenerate(e)),
            None => Ok(()),
        }
    }

    fn simples_a(&self) -> Result<SimpleSet, DiagonalError> {
        let mut tags: Vec<PointTag> = (0..self.polygon.sides()).map(PointTag::V).collect();
        self.sort_tags(&mut tags)?;
        let classes = tags
            .windows(2)
            .map(|w| self.lookup_class(w[0], w[1]))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SimpleSet {
            classes,
            locator: SimpleLocator::TypeA { sorted: tags },
        })
    }

    fn simples_d(&self) -> Result<SimpleSet, DiagonalError> {
        let n = self.polygon.dtype().rank();
        let mut tags = Self::collect_tags(&self.polygon);
        self.sort_tags(&mut tags)?;
        // 2n points; the punctures must sit at Y_{±1} or Y_{±2}.
        let pos_bm = tags.iter().position(|t| *t == PointTag::BMinus).unwrap();
        let puncture_level = match (n as isize - 1) - pos_bm as isize {
            0 => 1u8,
            1 => 2u8,
            _ => {
                return Err(DiagonalError::NotStable(format!(
                    "puncture B- at order position {pos_bm}, expected Y_-1 or Y_-2"
                )))
            }
        };
        let pos_bp = tags.iter().position(|t| *t == PointTag::BPlus).unwrap();
        if pos_bp != 2 * n - 1 - pos_bm {
            return Err(DiagonalError::Degenerate(
                "punctures are not symmetric in the order".into(),
            ));
        }
        let mut classes: Vec<usize> = tags[..n]
            .windows(2)
            .map(|w| self.lookup_class(w[0], w[1]))
            .collect::<Result<Vec<_>, _>>()?;
        // The extra simple pairs the other puncture with Y_{-2} or Y_{-1}.
        let extra_tail = if puncture_level == 1 {
            tags[n - 2]
        } else {
            tags[n - 1]
        };
        classes.push(self.lookup_class(extra_tail, PointTag::BPlus)?);
        Ok(SimpleSet {
            classes,
            locator: SimpleLocator::TypeD {
                sorted: tags,
                puncture_level,
            },
        })
    }

    fn simples_e(&self) -> Result<SimpleSet, DiagonalError> {
        let n = self.polygon.dtype().rank();
        let h = self.polygon.sides();
        let mut tags = Self::collect_tags(&self.polygon);
        self.sort_tags(&mut tags)?;
        // The n-3 lowest points must be consecutive polygon vertices.
        let mut low = Vec::new();
        for t in &tags[..n - 3] {
            match t {
                PointTag::V(j) => low.push(*j),
                PointTag::W(_) => {
                    return Err(DiagonalError::NotStable(
                        "a satellite is among the lowest points".into(),
                    ))
                }
                _ => unreachable!(),
            }
        }
        let shift = (0..h)
            .find(|&k| (1..=n - 3).all(|i| low.contains(&((k + i) % h))))
            .ok_or_else(|| {
                DiagonalError::NotStable("lowest vertices are not consecutive".into())
            })?;
        let wrap = |j: isize| -> usize { j.rem_euclid(h as isize) as usize };
        let lv = |i: isize| PointTag::V(wrap(shift as isize + i));
        let lw = |i: isize| PointTag::W(wrap(shift as isize + i));
        let pt = |t: PointTag| self.point_of(t);

        // Two parallel candidate triangles; take the lower translate.
        let tri_l = [lv(0), lw(1), lw(3)];
        let tri_r = [lw(2), lw(4), lv(n as isize - 2)];
        let tau = pt(tri_l[1]).to(&pt(tri_r[1]));
        for (a, b) in tri_l.iter().zip(&tri_r) {
            if pt(*b) != pt(*a).add(&tau) {
                return Err(DiagonalError::InconsistentClass(
                    "candidate triangles are not translates".into(),
                ));
            }
        }
        let took_left = match cmp_points(&pt(lw(1)), &pt(lw(4))) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => {
                return Err(DiagonalError::Degenerate(
                    "candidate triangles tie in the point order".into(),
                ))
            }
        };
        let mut hull: Vec<PointTag> = (1..=n as isize - 3).map(lv).collect();
        hull.extend(if took_left { tri_l } else { tri_r });
        let hull_points: Vec<RatPoint> = hull.iter().map(|t| pt(*t)).collect();
        if !crate::polygon::all_in_convex_position(&hull_points) {
            return Err(DiagonalError::NotStable(
                "simple-carrying hull is not strictly convex".into(),
            ));
        }
        self.sort_tags(&mut hull)?;
        // Path simples read top to bottom are s_1, s_2, s_4, ..., s_n.
        let mut labels = vec![1usize, 2];
        labels.extend(4..=n);
        let mut classes = vec![usize::MAX; n];
        for (m, &label) in labels.iter().enumerate() {
            let k = n - 1 - m; // segment (hull[k-1], hull[k]), topmost first
            classes[label - 1] = self.lookup_class(hull[k - 1], hull[k])?;
        }
        classes[2] = self.lookup_class(lv(0), lw(2))?;
        if classes[2] != self.lookup_class(lw(3), lv(n as isize - 2))? {
            return Err(DiagonalError::InconsistentClass(
                "the two descriptions of s_3 disagree".into(),
            ));
        }
        let mut sorted_check = classes.clone();
        sorted_check.sort_unstable();
        sorted_check.dedup();
        if sorted_check.len() != n {
            return Err(DiagonalError::Degenerate(
                "simples are not pairwise distinct".into(),
            ));
        }
        Ok(SimpleSet {
            classes,
            locator: SimpleLocator::TypeE {
                shift,
                hull,
                took_left,
            },
        })
    }

    /// Decompose an upward diagonal as a nonnegative sum of simples. The
    /// result is verified to reproduce the class vector exactly.
    pub fn decompose(&self, id: usize, simples: &SimpleSet) -> Result<DimVector, DiagonalError> {
        self.decompose_inner(id, simples, None)
    }

    /// Like [`DiagonalModel::decompose`], but choosing uniformly among the
    /// valid triangle splits at every recursion step (E types), to exercise
    /// split-path independence.
    pub fn decompose_seeded(
        &self,
        id: usize,
        simples: &SimpleSet,
        seed: u64,
    ) -> Result<DimVector, DiagonalError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.decompose_inner(id, simples, Some(&mut rng))
    }

    fn decompose_inner(
        &self,
        id: usize,
        simples: &SimpleSet,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Result<DimVector, DiagonalError> {
        let n = self.polygon.dtype().rank();
        let dim = match &simples.locator {
            SimpleLocator::TypeA { sorted } => self.decompose_a(id, sorted, n)?,
            SimpleLocator::TypeD {
                sorted,
                puncture_level,
            } => self.decompose_d(id, sorted, *puncture_level, n)?,
            SimpleLocator::TypeE { .. } => {
                let mut memo = HashMap::new();
                self.decompose_e(id, simples, &mut memo, &mut rng)?
            }
        };
        // Final audit: the charges add up.
        let mut acc = RatVec::from_ints(0, 0);
        for (i, c) in dim.0.iter().enumerate() {
            let sv = &self.classes[simples.classes[i]].vec;
            acc = acc.add(&sv.scale(&crate::geom::rat(*c, 1)));
        }
        if acc != self.classes[id].vec {
            return Err(DiagonalError::BadDecomposition(id));
        }
        Ok(dim)
    }

    fn decompose_a(
        &self,
        id: usize,
        sorted: &[PointTag],
        n: usize,
    ) -> Result<DimVector, DiagonalError> {
        let rep = self.classes[id].rep;
        let pos = |t: PointTag| sorted.iter().position(|&s| s == t).unwrap();
        let (mut i, mut j) = (pos(rep.tail), pos(rep.head));
        if i > j {
            std::mem::swap(&mut i, &mut j);
        }
        let mut d = DimVector::zero(n);
        for k in i..j {
            d.0[k] += 1;
        }
        Ok(d)
    }

    fn decompose_d(
        &self,
        id: usize,
        sorted: &[PointTag],
        puncture_level: u8,
        n: usize,
    ) -> Result<DimVector, DiagonalError> {
        // Order index of a tag: negative block -n..-1, positive block 1..n.
        let yindex = |t: PointTag| -> isize {
            let k = sorted.iter().position(|&s| s == t).unwrap() as isize;
            if k < n as isize {
                k - n as isize
            } else {
                k - n as isize + 1
            }
        };
        let beta: isize = -(puncture_level as isize); // index of B-
        let cstar: isize = -3 - beta; // tail index of the extra simple s_n
        let mut d = DimVector::zero(n);
        // Consecutive low-block segments are the simples s_1..s_{n-1}.
        let lowrun = |d: &mut DimVector, from: isize, to: isize| {
            debug_assert!(from <= to && to <= -1);
            for c in from..to {
                d.0[(c + n as isize) as usize] += 1;
            }
        };
        let members: Vec<(isize, isize, bool)> = self.classes[id]
            .members
            .iter()
            .map(|m| {
                let (a, b) = (yindex(m.tail), yindex(m.head));
                let has_bplus = m.tail == PointTag::BPlus || m.head == PointTag::BPlus;
                if a <= b {
                    (a, b, has_bplus)
                } else {
                    (b, a, has_bplus)
                }
            })
            .collect();
        if let Some((a, b, _)) = members.iter().find(|(_, b, _)| *b <= -1) {
            lowrun(&mut d, *a, *b);
            return Ok(d);
        }
        if let Some((a, _, _)) = members
            .iter()
            .find(|(a, _, has_bp)| *has_bp && *a <= cstar)
        {
            lowrun(&mut d, *a, cstar);
            d.0[n - 1] += 1;
            return Ok(d);
        }
        // Spanning chord: route through B- and the reflected half.
        for (a, b, _) in &members {
            if *a < beta && *b >= 1 && -*b <= cstar {
                lowrun(&mut d, *a, beta);
                lowrun(&mut d, -*b, cstar);
                d.0[n - 1] += 1;
                return Ok(d);
            }
        }
        Err(DiagonalError::NoSplit(id))
    }

    fn decompose_e(
        &self,
        id: usize,
        simples: &SimpleSet,
        memo: &mut HashMap<usize, DimVector>,
        rng: &mut Option<&mut ChaCha8Rng>,
    ) -> Result<DimVector, DiagonalError> {
        if let Some(d) = memo.get(&id) {
            return Ok(d.clone());
        }
        let n = self.polygon.dtype().rank();
        if let Some(i) = simples.classes.iter().position(|&c| c == id) {
            let d = DimVector::unit(n, i + 1);
            memo.insert(id, d.clone());
            return Ok(d);
        }
        // Contractible-triangle splits into two upward admissible classes
        // whose vectors chain tail-to-head.
        let mut splits: Vec<(usize, usize)> = Vec::new();
        for m in &self.classes[id].members {
            for &r in &self.tags {
                if r == m.tail || r == m.head {
                    continue;
                }
                let Some((c1, up1)) = self.class_of(&SymSeg::new(m.tail, r)) else {
                    continue;
                };
                let Some((c2, up2)) = self.class_of(&SymSeg::new(r, m.head)) else {
                    continue;
                };
                if up1 && up2 {
                    splits.push((c1, c2));
                }
            }
        }
        splits.sort_unstable();
        splits.dedup();
        if splits.is_empty() {
            return Err(DiagonalError::NoSplit(id));
        }
        let (c1, c2) = match rng {
            Some(r) => splits[r.gen_range(0..splits.len())],
            None => splits[0],
        };
        let d1 = self.decompose_e(c1, simples, memo, rng)?;
        let d2 = self.decompose_e(c2, simples, memo, rng)?;
        let d = d1.add(&d2);
        memo.insert(id, d.clone());
        Ok(d)
    }

    /// Essential oriented intersections between distinct simples: a shared
    /// endpoint whose closing third side is itself admissible (and, for D,
    /// whose triangle strictly contains no puncture). The arrow runs from
    /// the larger-angle simple to the smaller.
    pub fn essential_intersections(
        &self,
        simples: &SimpleSet,
    ) -> Result<Vec<Arrow>, DiagonalError> {
        let n = simples.classes.len();
        let punctures: Vec<RatPoint> = match self.polygon.punctures() {
            Some((bm, bp)) => vec![bm.clone(), bp.clone()],
            None => vec![],
        };
        let mut arrows: Vec<Arrow> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let ci = &self.classes[simples.classes[i]];
                let cj = &self.classes[simples.classes[j]];
                let mut found: Option<Arrow> = None;
                for mi in &ci.members {
                    for mj in &cj.members {
                        for (p, a) in [(mi.tail, mi.head), (mi.head, mi.tail)] {
                            for (q, b) in [(mj.tail, mj.head), (mj.head, mj.tail)] {
                                if p != q || a == b {
                                    continue;
                                }
                                if self.class_of(&SymSeg::new(a, b)).is_none() {
                                    continue;
                                }
                                let (pp, pa, pb) =
                                    (self.point_of(p), self.point_of(a), self.point_of(b));
                                if pp.to(&pa).cross(&pp.to(&pb)).is_zero() {
                                    continue; // degenerate triangle
                                }
                                let tri =
                                    crate::polygon::ccw_order(vec![pp, pa, pb]);
                                if punctures.iter().any(|bp| {
                                    crate::polygon::strictly_inside_polygon(&tri, bp)
                                }) {
                                    continue; // not contractible around a puncture
                                }
                                let (from, to) = match cmp_arg(&ci.vec, &cj.vec)
                                    .expect("class vectors nonzero")
                                {
                                    Ordering::Greater => (i, j),
                                    Ordering::Less => (j, i),
                                    Ordering::Equal => continue,
                                };
                                // Index of the intersection from larger to
                                // smaller angle.
                                let arrow = Arrow {
                                    from: from + 1,
                                    to: to + 1,
                                    grade: 1,
                                };
                                if let Some(prev) = found {
                                    if prev != arrow {
                                        return Err(DiagonalError::InconsistentClass(format!(
                                            "conflicting essential intersections between s{} and s{}",
                                            i + 1,
                                            j + 1
                                        )));
                                    }
                                } else {
                                    found = Some(arrow);
                                }
                            }
                        }
                    }
                }
                if let Some(a) = found {
                    arrows.push(a);
                }
            }
        }
        Ok(arrows)
    }

    /// The intersection quiver over `s_1..s_n`, verified to have the Dynkin
    /// diagram of the polygon's type as its underlying graph.
    pub fn intersection_quiver(&self) -> Result<IntersectionQuiver, DiagonalError> {
        let simples = self.simples()?;
        self.intersection_quiver_of(&simples)
    }

    pub fn intersection_quiver_of(
        &self,
        simples: &SimpleSet,
    ) -> Result<IntersectionQuiver, DiagonalError> {
        let arrows = self.essential_intersections(simples)?;
        let dtype = self.polygon.dtype();
        let mut got: Vec<(usize, usize)> = arrows
            .iter()
            .map(|a| (a.from.min(a.to), a.from.max(a.to)))
            .collect();
        got.sort_unstable();
        let mut want = dtype.edges();
        want.sort_unstable();
        if got != want {
            return Err(DiagonalError::ShapeMismatch(format!(
                "underlying edges {:?} do not form the {} diagram",
                got, dtype
            )));
        }
        Ok(IntersectionQuiver { dtype, arrows })
    }

    /// The stability function induced by the polygon: charges of the simples,
    /// plus every upward diagonal annotated with its decomposition and its
    /// rank in the phase-decreasing order.
    pub fn stability_function(
        &self,
    ) -> Result<(StabilityFunction, Vec<AnnotatedDiagonal>), DiagonalError> {
        let simples = self.simples()?;
        self.stability_function_of(&simples)
    }

    pub fn stability_function_of(
        &self,
        simples: &SimpleSet,
    ) -> Result<(StabilityFunction, Vec<AnnotatedDiagonal>), DiagonalError> {
        let charges: Vec<RatVec> = simples
            .classes
            .iter()
            .map(|&c| self.classes[c].vec.clone())
            .collect();
        let z = StabilityFunction::new(charges).map_err(DiagonalError::Degenerate)?;
        let order = self.upward_diagonals();
        let mut annotated = Vec::with_capacity(order.len());
        for (rank, class) in order.iter().enumerate() {
            let dim = self.decompose(class.id, simples)?;
            // Additivity of the central charge over the decomposition.
            if z.charge(&dim) != class.vec {
                return Err(DiagonalError::BadDecomposition(class.id));
            }
            annotated.push(AnnotatedDiagonal {
                class_id: class.id,
                dim,
                phase_rank: rank,
            });
        }
        // The emitted dimension vectors are exactly the positive roots.
        let mut dims: Vec<DimVector> = annotated.iter().map(|a| a.dim.clone()).collect();
        dims.sort();
        let roots = crate::dynkin::positive_roots(self.polygon.dtype());
        if dims != roots {
            return Err(DiagonalError::ShapeMismatch(
                "decompositions do not enumerate the positive roots".into(),
            ));
        }
        Ok((z, annotated))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynkin::DynkinType;
    use crate::geom::rat;
    use crate::polygon::{PolygonData, StablePolygon};

    fn a2_triangle() -> StablePolygon {
        StablePolygon::validate_relations(PolygonData {
            dtype: DynkinType::new(Family::A, 2).unwrap(),
            vertices: vec![
                RatPoint::from_ints(0, -1),
                RatPoint::from_ints(0, 1),
                RatPoint::from_ints(-1, 0),
            ],
            punctures: None,
        })
        .unwrap()
    }

    #[test]
    fn a2_upward_diagonals() {
        let model = DiagonalModel::build(&a2_triangle()).unwrap();
        assert_eq!(model.classes().len(), 3);
        let vec_set: Vec<RatVec> = model.classes().iter().map(|c| c.vec.clone()).collect();
        assert!(vec_set.contains(&RatVec::from_ints(-1, 1)));
        assert!(vec_set.contains(&RatVec::from_ints(0, 2)));
        assert!(vec_set.contains(&RatVec::from_ints(1, 1)));
        for c in model.classes() {
            assert!(c.vec.is_upward());
        }
    }

    #[test]
    fn a2_simples_and_quiver() {
        let model = DiagonalModel::build(&a2_triangle()).unwrap();
        let simples = model.simples().unwrap();
        let s1 = model.class(simples.classes[0]);
        let s2 = model.class(simples.classes[1]);
        assert_eq!(s1.vec, RatVec::from_ints(-1, 1));
        assert_eq!(s2.vec, RatVec::from_ints(1, 1));
        let arrows = model.essential_intersections(&simples).unwrap();
        assert_eq!(arrows.len(), 1);
        // arg s1 = 3π/4 > arg s2 = π/4, so the arrow runs s1 -> s2, grade 1.
        assert_eq!(
            arrows[0],
            Arrow {
                from: 1,
                to: 2,
                grade: 1
            }
        );
        let iq = model.intersection_quiver().unwrap();
        let q = iq.to_dynkin_quiver();
        assert_eq!(q.arrows(), vec![(1, 2)]);
    }

    #[test]
    fn a2_decompose() {
        let model = DiagonalModel::build(&a2_triangle()).unwrap();
        let simples = model.simples().unwrap();
        let long = model
            .classes()
            .iter()
            .find(|c| c.vec == RatVec::from_ints(0, 2))
            .unwrap();
        let d = model.decompose(long.id, &simples).unwrap();
        assert_eq!(d, DimVector(vec![1, 1]));
        for (i, &c) in simples.classes.iter().enumerate() {
            let d = model.decompose(c, &simples).unwrap();
            assert_eq!(d, DimVector::unit(2, i + 1));
        }
    }

    #[test]
    fn a2_phases_order() {
        let model = DiagonalModel::build(&a2_triangle()).unwrap();
        let (z, annotated) = model.stability_function().unwrap();
        // Phase-decreasing: S1 (3π/4), then S1+S2 (π/2), then S2 (π/4).
        let by_rank: Vec<DimVector> = annotated.iter().map(|a| a.dim.clone()).collect();
        assert_eq!(
            by_rank,
            vec![
                DimVector(vec![1, 0]),
                DimVector(vec![1, 1]),
                DimVector(vec![0, 1])
            ]
        );
        assert_eq!(z.charge(&DimVector(vec![1, 1])), RatVec::from_ints(0, 2));
    }

    #[test]
    fn fig_hexagon_simples_and_arrows() {
        let hex = crate::polygon::test_hexagon_a5();
        let model = DiagonalModel::build(&hex).unwrap();
        assert_eq!(model.classes().len(), 15);
        let simples = model.simples().unwrap();
        let vecs: Vec<RatVec> = simples
            .classes
            .iter()
            .map(|&c| model.class(c).vec.clone())
            .collect();
        assert_eq!(vecs[0], RatVec::from_ints(2, 0));
        assert_eq!(vecs[1], RatVec::from_ints(2, 3));
        assert_eq!(vecs[2], RatVec::from_ints(-7, 2));
        assert_eq!(vecs[3], RatVec::new(rat(15, 2), rat(2, 1)));
        assert_eq!(vecs[4], RatVec::new(rat(-9, 2), rat(3, 1)));
        let arrows = model.essential_intersections(&simples).unwrap();
        let mut got: Vec<(usize, usize)> = arrows.iter().map(|a| (a.from, a.to)).collect();
        got.sort_unstable();
        assert_eq!(got, vec![(2, 1), (3, 2), (3, 4), (5, 4)]);
        assert!(arrows.iter().all(|a| a.grade == 1));
    }

    #[test]
    fn fig_hexagon_decomposition() {
        let hex = crate::polygon::test_hexagon_a5();
        let model = DiagonalModel::build(&hex).unwrap();
        let simples = model.simples().unwrap();
        // Y1Y4 = s1 + s2 + s3 with vector (-3, 5).
        let y1y4 = model
            .classes()
            .iter()
            .find(|c| c.vec == RatVec::from_ints(-3, 5))
            .unwrap();
        let d = model.decompose(y1y4.id, &simples).unwrap();
        assert_eq!(d, DimVector(vec![1, 1, 1, 0, 0]));
        let (_, annotated) = model.stability_function().unwrap();
        assert_eq!(annotated.len(), 15);
    }

    #[test]
    fn a1_bigon() {
        let bigon = StablePolygon::validate_relations(PolygonData {
            dtype: DynkinType::new(Family::A, 1).unwrap(),
            vertices: vec![RatPoint::from_ints(0, -1), RatPoint::from_ints(0, 1)],
            punctures: None,
        })
        .unwrap();
        let model = DiagonalModel::build(&bigon).unwrap();
        assert_eq!(model.classes().len(), 1);
        let simples = model.simples().unwrap();
        assert_eq!(simples.classes.len(), 1);
        let iq = model.intersection_quiver().unwrap();
        assert!(iq.arrows.is_empty());
    }
}
