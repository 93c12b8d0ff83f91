//! Quiver-to-polygon constructors.
//!
//! Types A and D have closed-form constructions on (rational snaps of) the
//! unit circle. Types E are found by seeded search inside the exact rational
//! solution space of their defining linear relations; the search lands in
//! some orientation chamber, and certified deformations then walk between
//! chambers: leaf charges are pushed across the horizontal axis, interior
//! arrows across the wall where two adjacent charges align. Every
//! construction is certified after the fact: relations, stability, and
//! intersection quiver are all re-checked exactly, so the float heuristics
//! inside the search can never leak an uncertified polygon.

use crate::diagonals::{DiagonalModel, PointTag, SimpleSet, SymSeg};
use crate::dynkin::{DynkinQuiver, DynkinType, Family, Sign};
use crate::geom::{rat, Rat, RatPoint};
use crate::linalg::{RatMatrix, SolutionSpace};
use crate::polygon::{ccw_order, PolygonData, StablePolygon};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RealizeError {
    #[error("search exhausted after {attempts} candidates (seed {seed})")]
    SearchExhausted { attempts: usize, seed: u64 },
    #[error("cannot deform: {0}")]
    CannotDeform(String),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("{0}")]
    Internal(String),
}

/// Search parameters. Output is deterministic for a fixed seed.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub seed: u64,
    pub max_candidates: usize,
    /// Bits of the dyadic denominator used when snapping float candidates.
    pub denom_bits: u32,
    /// Directory holding previously derived base polygons, if any.
    pub cache_dir: Option<PathBuf>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 0,
            max_candidates: 4000,
            denom_bits: 16,
            cache_dir: default_cache_dir(),
        }
    }
}

/// Repo-local fixture cache, overridable through `STABLEGON_CACHE_DIR`.
pub fn default_cache_dir() -> Option<PathBuf> {
    if let Ok(dir) = std::env::var("STABLEGON_CACHE_DIR") {
        return Some(PathBuf::from(dir));
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    Some(manifest.join("fixtures").join("e_bases"))
}

/// Which side of the horizontal axis a leaf charge should settle on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafMove {
    /// Angle just above 0: the arrow keeps pointing into the leaf.
    TowardZero,
    /// Angle just below π: the arrow at the leaf is reversed.
    TowardPi,
}

/// Certify a constructed polygon against its target quiver.
pub fn certify(p: &StablePolygon, q: &DynkinQuiver) -> Result<(), RealizeError> {
    let stab = p.is_stable();
    if !stab.ok {
        return Err(RealizeError::Certification(
            stab.failure.unwrap_or_else(|| "instability".into()),
        ));
    }
    let model = DiagonalModel::build(p).map_err(|e| RealizeError::Certification(e.to_string()))?;
    let iq = model
        .intersection_quiver()
        .map_err(|e| RealizeError::Certification(e.to_string()))?;
    let got = iq.to_dynkin_quiver();
    if &got != q {
        return Err(RealizeError::Certification(format!(
            "realized quiver {got} differs from target {q}"
        )));
    }
    Ok(())
}

/// Realize any Dynkin quiver as a certified stable polygon.
pub fn realize(q: &DynkinQuiver, cfg: &SearchConfig) -> Result<StablePolygon, RealizeError> {
    match q.dtype().family() {
        Family::A => realize_a(q),
        Family::D => realize_d(q),
        Family::E => realize_e(q, cfg),
    }
}

/// Rational point just inside the unit circle at height `y`, on the side
/// given by `positive_x`: `sqrt(1 - y^2)` rounded down to `bits` dyadic
/// bits, so the point never leaves the closed disk.
fn circle_point(y: &Rat, positive_x: bool, bits: u32) -> RatPoint {
    let one = Rat::from(BigInt::from(1));
    let sq = &one - &(y * y);
    assert!(!sq.is_negative());
    let scaled = (sq.numer() << (2 * bits)) / sq.denom();
    let root = scaled.sqrt();
    let mut x = Rat::new(root, BigInt::from(1) << bits);
    if !positive_x {
        x = -x;
    }
    RatPoint::new(x, y.clone())
}

/// Closed-form type-A realization: endpoints at `(0, ±1)`, interior vertices
/// on the circle at evenly spaced heights, pushed left or right opposite to
/// each edge sign.
pub fn realize_a(q: &DynkinQuiver) -> Result<StablePolygon, RealizeError> {
    let n = q.rank();
    if n == 1 {
        let p = StablePolygon::validate_relations(PolygonData {
            dtype: q.dtype(),
            vertices: vec![RatPoint::from_ints(0, -1), RatPoint::from_ints(0, 1)],
            punctures: None,
        })
        .map_err(|e| RealizeError::Internal(e.to_string()))?;
        return Ok(p);
    }
    let signs = q.orientation();
    for bits in [12u32, 20, 28, 36] {
        let mut pts = vec![RatPoint::from_ints(0, -1), RatPoint::from_ints(0, 1)];
        for i in 2..=n {
            let y = rat(-1, 1) + rat(2 * (i as i64 - 1), n as i64);
            // sign(x_i) = -eps_i.
            let positive_x = signs[i - 2] == Sign::Minus;
            pts.push(circle_point(&y, positive_x, bits));
        }
        let data = PolygonData {
            dtype: q.dtype(),
            vertices: ccw_order(pts),
            punctures: None,
        };
        let Ok(p) = StablePolygon::validate_relations(data) else {
            continue;
        };
        if certify(&p, q).is_ok() {
            return Ok(p);
        }
    }
    Err(RealizeError::Internal(format!(
        "type A construction failed to certify for {q}"
    )))
}

/// Closed-form type-D realization following the three orientation cases of
/// the two leaf edges: equal signs put both punctures at the center;
/// `(-,+)` splits them along the y-axis inside the level gon; `(+,-)` is the
/// previous case composed with a small certified clockwise rotation.
pub fn realize_d(q: &DynkinQuiver) -> Result<StablePolygon, RealizeError> {
    let n = q.rank();
    let signs = q.orientation();
    let (e_nm1, e_n) = (signs[n - 3], signs[n - 2]);
    let eps_rest = &signs[..n - 3];
    if e_nm1 == e_n {
        return realize_d_case_a(q, eps_rest, e_nm1);
    }
    if (e_nm1, e_n) == (Sign::Minus, Sign::Plus) {
        return realize_d_case_b(q, eps_rest);
    }
    // Case (+,-): rotate the (-,+) polygon clockwise by a small certified
    // rational angle; the two points on the horizontal axis trade places in
    // the point order, which swaps the two leaf simples.
    let mut swapped_signs = signs.to_vec();
    swapped_signs[n - 3] = Sign::Minus;
    swapped_signs[n - 2] = Sign::Plus;
    let q_swapped = DynkinQuiver::new(q.dtype(), swapped_signs)
        .map_err(|e| RealizeError::Internal(e.to_string()))?;
    let base = realize_d_case_b(&q_swapped, eps_rest)?;
    for k in 6..40u32 {
        let t = -Rat::new(BigInt::from(1), BigInt::from(1u64) << k);
        let rotated = base.rotate_rational(&t);
        if certify(&rotated, q).is_ok() {
            return Ok(rotated);
        }
    }
    Err(RealizeError::Internal(format!(
        "rotation never certified for {q}"
    )))
}

fn d_ring_points(n: usize, eps_rest: &[Sign], bits: u32) -> Vec<RatPoint> {
    // Vertices at heights ±i/n for 3 <= i <= n-1, plus the poles (0, ±1).
    // sign(x_{+i}) = eps_{n+1-i}; the negative copies are exact reflections.
    let mut pts = vec![RatPoint::from_ints(0, 1)];
    for i in 3..=n - 1 {
        let y = rat(i as i64, n as i64);
        // eps index n+1-i ranges over 2..=n-2, stored at eps_rest[idx-2].
        let eps = eps_rest[n - 1 - i];
        pts.push(circle_point(&y, eps == Sign::Plus, bits));
    }
    let reflected: Vec<RatPoint> = pts
        .iter()
        .map(|p| p.reflect_through(&RatPoint::from_ints(0, 0)))
        .collect();
    pts.extend(reflected);
    pts
}

fn realize_d_case_a(
    q: &DynkinQuiver,
    eps_rest: &[Sign],
    eps_leaf: Sign,
) -> Result<StablePolygon, RealizeError> {
    let n = q.rank();
    for bits in [12u32, 20, 28, 36] {
        let mut pts = d_ring_points(n, eps_rest, bits);
        let y2 = rat(2, n as i64);
        let p2 = circle_point(&y2, eps_leaf == Sign::Plus, bits);
        pts.push(p2.reflect_through(&RatPoint::from_ints(0, 0)));
        pts.push(p2);
        let data = PolygonData {
            dtype: q.dtype(),
            vertices: ccw_order(pts),
            punctures: Some((RatPoint::from_ints(0, 0), RatPoint::from_ints(0, 0))),
        };
        let Ok(p) = StablePolygon::validate_relations(data) else {
            continue;
        };
        if certify(&p, q).is_ok() {
            return Ok(p);
        }
    }
    Err(RealizeError::Internal(format!(
        "type D case (a) failed to certify for {q}"
    )))
}

fn realize_d_case_b(q: &DynkinQuiver, eps_rest: &[Sign]) -> Result<StablePolygon, RealizeError> {
    let n = q.rank();
    for bits in [12u32, 20, 28, 36] {
        let mut pts = d_ring_points(n, eps_rest, bits);
        pts.push(RatPoint::from_ints(1, 0));
        pts.push(RatPoint::from_ints(-1, 0));
        let vertices = ccw_order(pts);
        // Punctures on the y-axis, a third of the way to the level gon.
        let probe = StablePolygon::validate_relations(PolygonData {
            dtype: q.dtype(),
            vertices: vertices.clone(),
            punctures: Some((RatPoint::from_ints(0, 0), RatPoint::from_ints(0, 0))),
        });
        let Ok(probe) = probe else { continue };
        let gon = probe
            .level_diagonal_gon(n - 2)
            .map_err(|e| RealizeError::Internal(e.to_string()))?;
        let Some((lo, hi)) = crate::polygon::vertical_extent_at(&gon, &Rat::zero()) else {
            continue;
        };
        let reach = crate::polygon::rat_min(-lo, hi);
        if !reach.is_positive() {
            continue;
        }
        let yb = reach / rat(3, 1);
        let data = PolygonData {
            dtype: q.dtype(),
            vertices,
            punctures: Some((
                RatPoint::new(Rat::zero(), -yb.clone()),
                RatPoint::new(Rat::zero(), yb),
            )),
        };
        let Ok(p) = StablePolygon::validate_relations(data) else {
            continue;
        };
        if certify(&p, q).is_ok() {
            return Ok(p);
        }
    }
    Err(RealizeError::Internal(format!(
        "type D case (b) failed to certify for {q}"
    )))
}

// ---------------------------------------------------------------------------
// Type E: exact solution space, seeded search, certified wall crossings.
// ---------------------------------------------------------------------------

/// Vertex coordinates flattened as `(x_0, y_0, ..., x_{h-1}, y_{h-1})`.
fn coords_of(p: &StablePolygon) -> Vec<Rat> {
    let mut x = Vec::with_capacity(2 * p.sides());
    for v in p.vertices() {
        x.push(v.x.clone());
        x.push(v.y.clone());
    }
    x
}

fn polygon_from_coords(dtype: DynkinType, coords: &[Rat]) -> Result<StablePolygon, String> {
    let h = dtype.coxeter_number();
    let vertices: Vec<RatPoint> = (0..h)
        .map(|j| RatPoint::new(coords[2 * j].clone(), coords[2 * j + 1].clone()))
        .collect();
    StablePolygon::validate_relations(PolygonData {
        dtype,
        vertices: crate::polygon::canonicalize_start(vertices),
        punctures: None,
    })
    .map_err(|e| e.to_string())
}

/// Homogeneous rows cutting out the linear family of valid E-type polygons
/// (type relations, central symmetry where required, centroid at origin).
pub fn relation_rows(dtype: DynkinType) -> RatMatrix {
    let h = dtype.coxeter_number();
    let n = dtype.rank();
    let cols = 2 * h;
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    // Edge z_j touches vertex coordinates with +1 at j, -1 at j-1.
    let add_edge = |row: &mut Vec<Rat>, j: isize, coord: usize, coef: i64| {
        let hh = h as isize;
        let jj = j.rem_euclid(hh) as usize;
        let pj = (j - 1).rem_euclid(hh) as usize;
        row[2 * jj + coord] += rat(coef, 1);
        row[2 * pj + coord] += rat(-coef, 1);
    };
    let push_edge_relation = |rows: &mut Vec<Vec<Rat>>, offsets: &[(isize, i64)], j: isize| {
        for coord in 0..2 {
            let mut row = vec![Rat::zero(); cols];
            for &(off, coef) in offsets {
                add_edge(&mut row, j + off, coord, coef);
            }
            rows.push(row);
        }
    };
    let push_symmetry = |rows: &mut Vec<Vec<Rat>>| {
        for j in 0..h / 2 {
            for coord in 0..2 {
                let mut row = vec![Rat::zero(); cols];
                row[2 * j + coord] = rat(1, 1);
                row[2 * (j + h / 2) + coord] = rat(1, 1);
                rows.push(row);
            }
        }
    };
    match n {
        6 => {
            for j in 0..h as isize {
                push_edge_relation(&mut rows, &[(0, 1), (4, 1), (8, 1)], j);
                push_edge_relation(&mut rows, &[(0, 1), (-3, -1), (-6, 1), (-9, -1)], j);
            }
            // Pin the translation: centroid at the origin.
            for coord in 0..2 {
                let mut row = vec![Rat::zero(); cols];
                for j in 0..h {
                    row[2 * j + coord] = rat(1, 1);
                }
                rows.push(row);
            }
        }
        7 => {
            for j in 0..h as isize {
                push_edge_relation(
                    &mut rows,
                    &[(0, 1), (1, 1), (6, 1), (7, 1), (12, 1), (13, 1)],
                    j,
                );
            }
            push_symmetry(&mut rows);
        }
        8 => {
            for j in 0..h as isize {
                push_edge_relation(&mut rows, &[(0, 1), (10, 1), (20, 1)], j);
                push_edge_relation(&mut rows, &[(0, 1), (6, 1), (12, 1), (18, 1), (24, 1)], j);
            }
            push_symmetry(&mut rows);
        }
        _ => unreachable!("relation rows are only defined for E types"),
    }
    RatMatrix::from_rows(rows)
}

/// Accumulate a model point's coordinate as a linear expression in the
/// vertex coordinates (satellites are linear in the vertices).
fn tag_coord_row(dtype: DynkinType, tag: PointTag, coord: usize, row: &mut [Rat], coef: i64) {
    let h = dtype.coxeter_number();
    let n = dtype.rank();
    let idx = |j: usize| 2 * (j % h) + coord;
    match tag {
        PointTag::V(j) => row[idx(j)] += rat(coef, 1),
        PointTag::W(j) => match n {
            6 => {
                // W_j = V_j + V_{j+4} - V_{j+3}
                row[idx(j)] += rat(coef, 1);
                row[idx(j + 4)] += rat(coef, 1);
                row[idx(j + 3)] += rat(-coef, 1);
            }
            7 => {
                // W_j = V_j + V_{j+5} - V_{j+4}
                row[idx(j)] += rat(coef, 1);
                row[idx(j + 5)] += rat(coef, 1);
                row[idx(j + 4)] += rat(-coef, 1);
            }
            8 => {
                // W_j = V_{j+1} + V_{j+11} - V_{j+10}
                row[idx(j + 1)] += rat(coef, 1);
                row[idx(j + 11)] += rat(coef, 1);
                row[idx(j + 10)] += rat(-coef, 1);
            }
            _ => unreachable!(),
        },
        _ => unreachable!("punctures do not occur in E types"),
    }
}

/// Row expressing one coordinate of a symbolic segment's vector.
fn seg_coord_row(dtype: DynkinType, seg: &SymSeg, coord: usize) -> Vec<Rat> {
    let mut row = vec![Rat::zero(); 2 * dtype.coxeter_number()];
    tag_coord_row(dtype, seg.head, coord, &mut row, 1);
    tag_coord_row(dtype, seg.tail, coord, &mut row, -1);
    row
}

/// The float seeding walks the discrete Fourier modes at exactly the
/// Coxeter exponents: these span the relation space.
fn coxeter_exponents(n: usize) -> &'static [usize] {
    match n {
        6 => &[1, 4, 5, 7, 8, 11],
        7 => &[1, 5, 7, 9, 11, 13, 17],
        8 => &[1, 7, 11, 13, 17, 19, 23, 29],
        _ => unreachable!(),
    }
}

fn fourier_vertices(h: usize, exps: &[usize], amps: &[(f64, f64)]) -> Vec<f64> {
    let tau = 2.0 * std::f64::consts::PI;
    let z = |j: usize| -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (&e, &(ar, ai)) in exps.iter().zip(amps) {
            let ang = tau * (j as f64) * (e as f64) / (h as f64);
            let (s, c) = ang.sin_cos();
            re += ar * c - ai * s;
            im += ar * s + ai * c;
        }
        (re, im)
    };
    let mut vx = vec![0.0; h];
    let mut vy = vec![0.0; h];
    for j in 1..h {
        let (zx, zy) = z(j);
        vx[j] = vx[j - 1] + zx;
        vy[j] = vy[j - 1] + zy;
    }
    let mx = vx.iter().sum::<f64>() / h as f64;
    let my = vy.iter().sum::<f64>() / h as f64;
    let mut out = Vec::with_capacity(2 * h);
    for j in 0..h {
        out.push(vx[j] - mx);
        out.push(vy[j] - my);
    }
    out
}

fn dyadic(f: f64, bits: u32) -> Rat {
    let scale = (1u64 << bits) as f64;
    Rat::new(
        BigInt::from((f * scale).round() as i64),
        BigInt::from(1u64 << bits),
    )
}

/// The base-orientation quiver per path sign pattern: arrows point into all
/// three leaves, and into vertex 2 across the (2,4) edge.
pub fn base_quiver(dtype: DynkinType, pattern: &[Sign]) -> DynkinQuiver {
    let n = dtype.rank();
    assert_eq!(pattern.len(), n - 5);
    let mut signs = vec![Sign::Minus, Sign::Minus, Sign::Minus];
    signs.extend_from_slice(pattern);
    signs.push(Sign::Plus);
    DynkinQuiver::new(dtype, signs).expect("sign count matches")
}

/// Leaf vertices with their canonical edge indices and the edge sign that
/// points the arrow into the leaf.
fn leaf_edges(n: usize) -> [(usize, usize, Sign); 3] {
    [
        (1, 0, Sign::Minus),
        (3, 2, Sign::Minus),
        (n, n - 2, Sign::Plus),
    ]
}

/// Canonical indices of the long-path edges whose signs form the base
/// pattern.
fn path_edge_indices(n: usize) -> Vec<usize> {
    (3..n - 2).collect()
}

fn pattern_name(pattern: &[Sign]) -> String {
    if pattern.is_empty() {
        return "base".to_string();
    }
    pattern
        .iter()
        .map(|s| if *s == Sign::Plus { 'p' } else { 'm' })
        .collect()
}

fn pattern_of(q: &DynkinQuiver) -> Vec<Sign> {
    path_edge_indices(q.rank())
        .iter()
        .map(|&e| q.orientation()[e])
        .collect()
}

struct EContext {
    dtype: DynkinType,
    rows: RatMatrix,
    space: SolutionSpace,
}

impl EContext {
    fn new(dtype: DynkinType) -> Self {
        let rows = relation_rows(dtype);
        let space = SolutionSpace::of_homogeneous(&rows);
        EContext { dtype, rows, space }
    }

    /// Re-snap a polygon to bounded dyadic coordinates inside the solution
    /// space, keeping the certificate; counteracts denominator growth along
    /// chains of deformations.
    fn resnap(&self, p: &StablePolygon, expected: &DynkinQuiver) -> StablePolygon {
        let coords = coords_of(p);
        let snapped: Vec<Rat> = coords
            .iter()
            .map(|r| dyadic(rat_to_f64(r), 26))
            .collect();
        let exact = self.space.extend(&self.space.free_values(&snapped));
        if let Ok(candidate) = polygon_from_coords(self.dtype, &exact) {
            if certify(&candidate, expected).is_ok() {
                return candidate;
            }
        }
        p.clone()
    }

    fn analyzed(
        &self,
        p: &StablePolygon,
    ) -> Result<(DiagonalModel, SimpleSet, DynkinQuiver), RealizeError> {
        let model =
            DiagonalModel::build(p).map_err(|e| RealizeError::CannotDeform(e.to_string()))?;
        let simples = model
            .simples()
            .map_err(|e| RealizeError::CannotDeform(e.to_string()))?;
        let iq = model
            .intersection_quiver_of(&simples)
            .map_err(|e| RealizeError::CannotDeform(e.to_string()))?;
        let quiver = iq.to_dynkin_quiver();
        Ok((model, simples, quiver))
    }

    /// Move one simple's charge across a linear wall while freezing every
    /// other simple's charge exactly. `crossing` is the linear functional
    /// whose sign is being flipped; `keep` optionally pins a transverse
    /// component. Halves the settle offset until `expected` certifies.
    fn cross_wall(
        &self,
        p: &StablePolygon,
        model: &DiagonalModel,
        simples: &SimpleSet,
        moving: usize,
        crossing: &[Rat],
        keep: Option<&[Rat]>,
        target_positive: bool,
        expected: &DynkinQuiver,
    ) -> Result<StablePolygon, RealizeError> {
        let dot = |row: &[Rat], x: &[Rat]| -> Rat {
            row.iter()
                .zip(x)
                .filter(|(r, _)| !r.is_zero())
                .map(|(r, v)| r * v)
                .sum()
        };
        let mut frozen: Vec<Vec<Rat>> =
            (0..self.rows.rows).map(|i| self.rows.row(i).to_vec()).collect();
        for (i, &cid) in simples.classes.iter().enumerate() {
            if i == moving {
                continue;
            }
            let rep = model.class(cid).rep;
            frozen.push(seg_coord_row(self.dtype, &rep, 0));
            frozen.push(seg_coord_row(self.dtype, &rep, 1));
        }
        if let Some(k) = keep {
            frozen.push(k.to_vec());
        }
        let mut directions = RatMatrix::from_rows(frozen.clone()).nullspace();
        if keep.is_some() {
            // Also allow directions with the transverse pin released.
            frozen.pop();
            directions.extend(RatMatrix::from_rows(frozen).nullspace());
        }
        directions.retain(|u| !dot(crossing, u).is_zero());
        if directions.is_empty() {
            return Err(RealizeError::CannotDeform(
                "no relation-space direction crosses the wall".into(),
            ));
        }
        let coords = coords_of(p);
        let cur = dot(crossing, &coords);
        // Prefer directions that reach the wall with the least distortion:
        // smallest displacement relative to the crossing speed.
        let mut ranked: Vec<(f64, Vec<Rat>)> = directions
            .into_iter()
            .map(|u| {
                let coef = rat_to_f64(&dot(crossing, &u));
                let norm = u
                    .iter()
                    .map(|c| rat_to_f64(c).abs())
                    .fold(0.0f64, f64::max);
                (norm / coef.abs(), u)
            })
            .collect();
        ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        for (_, direction) in ranked.into_iter().take(4) {
            let coef = dot(crossing, &direction);
            let t_star = -&cur / &coef;
            let offset_sign = if target_positive == coef.is_positive() {
                rat(1, 1)
            } else {
                rat(-1, 1)
            };
            for k in 0..=40u32 {
                let t =
                    &t_star + &offset_sign * Rat::new(BigInt::from(1), BigInt::from(1u64) << k);
                let moved: Vec<Rat> = coords
                    .iter()
                    .zip(&direction)
                    .map(|(c, u)| c + &t * u)
                    .collect();
                match polygon_from_coords(self.dtype, &moved) {
                    Ok(candidate) => match certify(&candidate, expected) {
                        Ok(()) => return Ok(self.resnap(&candidate, expected)),
                        Err(e) => {
                            if std::env::var("STABLEGON_DEBUG_WALL").is_ok() && k > 20 {
                                eprintln!("  k={k}: certify: {e}");
                            }
                        }
                    },
                    Err(e) => {
                        if std::env::var("STABLEGON_DEBUG_WALL").is_ok() && k > 20 {
                            eprintln!("  k={k}: polygon: {e}");
                        }
                    }
                }
            }
        }
        Err(RealizeError::CannotDeform(
            "no certified step within the denominator bound".into(),
        ))
    }
}

/// Push one leaf charge to just above angle 0 or just below angle π without
/// disturbing any other arrow.
pub fn deform_leaf(
    p: &StablePolygon,
    leaf: usize,
    mv: LeafMove,
) -> Result<StablePolygon, RealizeError> {
    let dtype = p.dtype();
    let n = dtype.rank();
    if dtype.family() != Family::E {
        return Err(RealizeError::CannotDeform(
            "leaf deformation applies to E types".into(),
        ));
    }
    let Some(&(_, edge_idx, into_sign)) = leaf_edges(n).iter().find(|(l, _, _)| *l == leaf) else {
        return Err(RealizeError::CannotDeform(format!(
            "vertex {leaf} is not a deformable leaf"
        )));
    };
    let ctx = EContext::new(dtype);
    let (model, simples, before) = ctx.analyzed(p)?;
    // Work with the leaf member oriented to positive real part, so that
    // positive imaginary part means angle near 0.
    let class = model.class(simples.classes[leaf - 1]);
    let seg = if class.vec.dx.is_positive() {
        class.rep
    } else {
        class.rep.reversed()
    };
    let crossing = seg_coord_row(dtype, &seg, 1);
    let keep = seg_coord_row(dtype, &seg, 0);
    let mut expected_signs = before.orientation().to_vec();
    expected_signs[edge_idx] = match mv {
        LeafMove::TowardZero => into_sign,
        LeafMove::TowardPi => into_sign.flip(),
    };
    let expected = DynkinQuiver::new(dtype, expected_signs)
        .map_err(|e| RealizeError::Internal(e.to_string()))?;
    let direct = ctx.cross_wall(
        p,
        &model,
        &simples,
        leaf - 1,
        &crossing,
        Some(&keep),
        mv == LeafMove::TowardZero,
        &expected,
    );
    if direct.is_ok() {
        return direct;
    }
    // Fallback across a larger gap: carry the leaf charge to the end of the
    // phase order through free walls and wrap it by rotation; a leaf has a
    // single edge, so the wrap reverses exactly that arrow.
    if before == expected {
        return Ok(p.clone()); // arrow already on the requested side
    }
    let moved = match mv {
        LeafMove::TowardPi => {
            let low = make_min_arg(p, leaf)?;
            rotate_wrap(&low)?
        }
        LeafMove::TowardZero => {
            let high = make_max_arg(p, leaf)?;
            rotate_unwrap(&high)?
        }
    };
    let (next, reached) = moved;
    if reached != expected {
        return Err(RealizeError::CannotDeform(format!(
            "leaf wrap reached {reached}, expected {expected}"
        )));
    }
    Ok(next)
}

/// Sweep the charge of `mover` onto (just past) the ray of `anchor`, all
/// other charges frozen. Every diagram edge at `mover` whose far endpoint's
/// angle lies strictly between the start and end of the sweep flips as
/// well; the expected outcome is computed exactly beforehand and certified
/// afterwards.
pub fn sweep_towards(
    p: &StablePolygon,
    mover: usize,
    anchor: usize,
) -> Result<(StablePolygon, DynkinQuiver), RealizeError> {
    let ctx = EContext::new(p.dtype());
    let (model, simples, _) = ctx.analyzed(p)?;
    sweep_towards_impl(&ctx, p, &model, &simples, mover, anchor)
}

fn sweep_towards_impl(
    ctx: &EContext,
    p: &StablePolygon,
    model: &DiagonalModel,
    simples: &SimpleSet,
    mover: usize,
    anchor: usize,
) -> Result<(StablePolygon, DynkinQuiver), RealizeError> {
    use std::cmp::Ordering;
    let dtype = p.dtype();
    let before = model
        .intersection_quiver_of(simples)
        .map_err(|e| RealizeError::CannotDeform(e.to_string()))?
        .to_dynkin_quiver();
    let vm = model.class(simples.classes[mover - 1]).vec.clone();
    let va = model.class(simples.classes[anchor - 1]).vec.clone();
    // Both charges are upward: arg order is the sign of the cross product.
    let cross_now = vm.cross(&va);
    if cross_now.is_zero() {
        return Err(RealizeError::CannotDeform(
            "charges are already aligned".into(),
        ));
    }
    // Which edges at `mover` flip: those whose far endpoint's angle lies in
    // the open angular interval swept.
    let between = |c: usize| -> Result<bool, RealizeError> {
        let vc = &model.class(simples.classes[c - 1]).vec;
        let om = crate::geom::cmp_arg(vc, &vm).expect("nonzero");
        let oa = crate::geom::cmp_arg(vc, &va).expect("nonzero");
        if om == Ordering::Equal || oa == Ordering::Equal {
            return Err(RealizeError::CannotDeform(
                "a third charge ties with the sweep endpoints".into(),
            ));
        }
        Ok(om != oa)
    };
    let mut expected_signs = before.orientation().to_vec();
    for (idx, &(u, w)) in dtype.edges().iter().enumerate() {
        let other = if u == mover {
            w
        } else if w == mover {
            u
        } else {
            continue;
        };
        if other == anchor || between(other)? {
            expected_signs[idx] = expected_signs[idx].flip();
        }
    }
    let expected = DynkinQuiver::new(dtype, expected_signs)
        .map_err(|e| RealizeError::Internal(e.to_string()))?;
    let rm_x = seg_coord_row(dtype, &model.class(simples.classes[mover - 1]).rep, 0);
    let rm_y = seg_coord_row(dtype, &model.class(simples.classes[mover - 1]).rep, 1);
    // Crossing functional x -> cross(v_mover(x), v_anchor).
    let crossing: Vec<Rat> = rm_x
        .iter()
        .zip(&rm_y)
        .map(|(rx, ry)| rx * &va.dy - ry * &va.dx)
        .collect();
    // Pin the component along the anchor to keep the charge away from 0.
    let keep: Vec<Rat> = rm_x
        .iter()
        .zip(&rm_y)
        .map(|(rx, ry)| rx * &va.dx + ry * &va.dy)
        .collect();
    let out = ctx.cross_wall(
        p,
        &model,
        &simples,
        mover - 1,
        &crossing,
        Some(&keep),
        cross_now.is_negative(),
        &expected,
    )?;
    Ok((out, expected))
}

/// Rotate the polygon clockwise just far enough that exactly the
/// minimal-angle simple charge wraps across 0 to the top of the range,
/// reversing precisely the arrows at its vertex. This is the generic
/// wall-crossing move: it works in any chamber and, together with the
/// frozen-charge sweeps, connects every orientation of the tree.
pub fn rotate_wrap(p: &StablePolygon) -> Result<(StablePolygon, DynkinQuiver), RealizeError> {
    use std::cmp::Ordering;
    let ctx = EContext::new(p.dtype());
    let (model, simples, before) = ctx.analyzed(p)?;
    // Angles of the simples, as floats for picking the rotation window.
    let mut angles: Vec<(f64, usize)> = Vec::new();
    for (i, &cid) in simples.classes.iter().enumerate() {
        let v = &model.class(cid).vec;
        let fx = rat_to_f64(&v.dx);
        let fy = rat_to_f64(&v.dy);
        angles.push((fy.atan2(fx).rem_euclid(std::f64::consts::PI), i + 1));
    }
    angles.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let (theta_min, vertex) = angles[0];
    let theta_next = angles[1].0;
    let expected = before.reflect(vertex);
    // Bisect the float window; each probe is an exact rational rotation
    // followed by full re-analysis. Under-rotation reproduces the original
    // quiver; over-rotation wraps further charges.
    let (mut lo, mut hi) = (theta_min, theta_next);
    for _ in 0..48 {
        let theta = 0.5 * (lo + hi);
        let t = dyadic(-(theta / 2.0).tan(), 24);
        let rotated = p.rotate_rational(&t);
        match ctx.analyzed(&rotated) {
            Ok((_, _, got)) if got == expected => {
                if rotated.is_stable().ok {
                    return Ok((groom(&ctx.resnap(&rotated, &expected)), expected));
                }
                return Err(RealizeError::CannotDeform(
                    "wrap rotation lost stability".into(),
                ));
            }
            Ok((_, _, got)) if got == before => lo = theta,
            _ => hi = theta,
        }
    }
    Err(RealizeError::CannotDeform(
        "no certified wrap rotation found".into(),
    ))
}

/// Counterclockwise dual of [`rotate_wrap`]: the maximal-angle simple charge
/// wraps across π back to the bottom of the range, reversing the arrows at
/// its vertex (a source becomes a sink).
pub fn rotate_unwrap(p: &StablePolygon) -> Result<(StablePolygon, DynkinQuiver), RealizeError> {
    use std::cmp::Ordering;
    let ctx = EContext::new(p.dtype());
    let (model, simples, before) = ctx.analyzed(p)?;
    let mut angles: Vec<(f64, usize)> = Vec::new();
    for (i, &cid) in simples.classes.iter().enumerate() {
        let v = &model.class(cid).vec;
        let fx = rat_to_f64(&v.dx);
        let fy = rat_to_f64(&v.dy);
        angles.push((fy.atan2(fx).rem_euclid(std::f64::consts::PI), i + 1));
    }
    angles.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let (theta_max, vertex) = *angles.last().expect("at least one simple");
    let theta_prev = angles[angles.len() - 2].0;
    let expected = before.reflect(vertex);
    let pi = std::f64::consts::PI;
    let (mut lo, mut hi) = (pi - theta_max, pi - theta_prev);
    for _ in 0..48 {
        let theta = 0.5 * (lo + hi);
        let t = dyadic((theta / 2.0).tan(), 24);
        let rotated = p.rotate_rational(&t);
        match ctx.analyzed(&rotated) {
            Ok((_, _, got)) if got == expected => {
                if rotated.is_stable().ok {
                    return Ok((groom(&ctx.resnap(&rotated, &expected)), expected));
                }
                return Err(RealizeError::CannotDeform(
                    "unwrap rotation lost stability".into(),
                ));
            }
            Ok((_, _, got)) if got == before => lo = theta,
            _ => hi = theta,
        }
    }
    Err(RealizeError::CannotDeform(
        "no certified unwrap rotation found".into(),
    ))
}

fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// One random stable polygon of the type, with its analysis. Candidates are
/// Fourier samples at the Coxeter exponents, randomly rotated and squashed
/// (both coordinatewise affine, hence relation-preserving), snapped into the
/// exact solution space.
struct Sampler {
    dtype: DynkinType,
    space: SolutionSpace,
    rng: ChaCha8Rng,
    denom_bits: u32,
}

impl Sampler {
    fn new(dtype: DynkinType, seed: u64, denom_bits: u32) -> Self {
        let rows = relation_rows(dtype);
        let space = SolutionSpace::of_homogeneous(&rows);
        debug_assert_eq!(space.dim, 2 * dtype.rank());
        Sampler {
            dtype,
            space,
            rng: ChaCha8Rng::seed_from_u64(seed),
            denom_bits,
        }
    }

    fn next_sample(&mut self) -> Option<(StablePolygon, DiagonalModel, SimpleSet, DynkinQuiver)> {
        let h = self.dtype.coxeter_number();
        let exps = coxeter_exponents(self.dtype.rank());
        // Total perturbation against the unit base mode; too much breaks
        // convexity, too little cannot vary the quiver.
        let budget = self.rng.gen_range(0.05..0.35);
        let per_mode = budget / (exps.len() as f64 - 1.0);
        let amps: Vec<(f64, f64)> = exps
            .iter()
            .enumerate()
            .map(|(k, _)| {
                if k == 0 {
                    (1.0, 0.0)
                } else {
                    (
                        self.rng.gen_range(-per_mode..per_mode),
                        self.rng.gen_range(-per_mode..per_mode),
                    )
                }
            })
            .collect();
        let mut floats = fourier_vertices(h, exps, &amps);
        let lambda = self.rng.gen_range(0.15..1.0);
        let phi = self.rng.gen_range(0.0..std::f64::consts::TAU);
        let (sphi, cphi) = phi.sin_cos();
        for j in 0..h {
            let (x, y) = (floats[2 * j], floats[2 * j + 1]);
            floats[2 * j] = cphi * x - sphi * y;
            floats[2 * j + 1] = lambda * (sphi * x + cphi * y);
        }
        let snapped: Vec<Rat> = floats
            .iter()
            .map(|&f| dyadic(f, self.denom_bits))
            .collect();
        let exact = self.space.extend(&self.space.free_values(&snapped));
        let poly = polygon_from_coords(self.dtype, &exact).ok()?;
        if !poly.is_stable().ok {
            return None;
        }
        let model = DiagonalModel::build(&poly).ok()?;
        let simples = model.simples().ok()?;
        let iq = model.intersection_quiver_of(&simples).ok()?;
        let quiver = iq.to_dynkin_quiver();
        Some((poly, model, simples, quiver))
    }
}

/// The simples in strictly increasing angle order, or None on a tie.
fn arg_order(model: &DiagonalModel, simples: &SimpleSet) -> Option<Vec<usize>> {
    use std::cmp::Ordering;
    let mut idx: Vec<usize> = (1..=simples.classes.len()).collect();
    let mut tie = false;
    idx.sort_by(|&a, &b| {
        let va = &model.class(simples.classes[a - 1]).vec;
        let vb = &model.class(simples.classes[b - 1]).vec;
        match crate::geom::cmp_arg(va, vb).expect("nonzero charges") {
            Ordering::Equal => {
                tie = true;
                a.cmp(&b)
            }
            o => o,
        }
    });
    if tie {
        None
    } else {
        Some(idx)
    }
}

/// Shortest word of sink reflections carrying one orientation to another.
/// Orientations of a tree are connected under sink flips, so this exists.
fn sink_word(from: &DynkinQuiver, to: &DynkinQuiver) -> Vec<usize> {
    use std::collections::VecDeque;
    let n = from.rank();
    let mut queue = VecDeque::from([(from.clone(), Vec::new())]);
    let mut seen = vec![from.clone()];
    while let Some((q, word)) = queue.pop_front() {
        if &q == to {
            return word;
        }
        for v in 1..=n {
            if !q.is_sink(v) {
                continue;
            }
            let next = q.reflect(v);
            if seen.contains(&next) {
                continue;
            }
            seen.push(next.clone());
            let mut w = word.clone();
            w.push(v);
            queue.push_back((next, w));
        }
    }
    unreachable!("sink reflections connect all orientations of a tree")
}

/// Lower the charge of the sink `v` below every other simple's charge by
/// crossing free walls one at a time. Any simple currently below a sink is
/// non-adjacent to it, so none of these crossings changes the quiver.
fn make_min_arg(p: &StablePolygon, v: usize) -> Result<StablePolygon, RealizeError> {
    let ctx = EContext::new(p.dtype());
    let mut cur = recenter(&spread_args(p));
    for _ in 0..2 * p.dtype().rank() {
        let (model, simples, _) = ctx.analyzed(&cur)?;
        let order = arg_order(&model, &simples).ok_or_else(|| {
            RealizeError::CannotDeform("tied charges while reordering".into())
        })?;
        let pos = order.iter().position(|&u| u == v).expect("vertex present");
        if pos == 0 {
            return Ok(cur);
        }
        // Sweep below some lower charge; every wall passed on the way down
        // from a sink is free. Prefer the biggest jump that certifies.
        let mut moved = None;
        for &anchor in order[..pos].iter() {
            if let Ok((next, _)) = sweep_towards_impl(&ctx, &cur, &model, &simples, v, anchor) {
                moved = Some(next);
                break;
            }
            // Same wall with the pair rotated to where there is room.
            let centered = center_pair(&cur, v, anchor);
            if coords_of(&centered) != coords_of(&cur) {
                if let Ok((next, _)) = sweep_towards(&centered, v, anchor) {
                    moved = Some(next);
                    break;
                }
            }
        }
        match moved {
            Some(next) => cur = next,
            None => {
                let centered = recenter(&spread_args(&cur));
                if coords_of(&centered) == coords_of(&cur) {
                    return Err(RealizeError::CannotDeform(
                        "no free downward sweep certified".into(),
                    ));
                }
                cur = centered;
            }
        }
    }
    Err(RealizeError::CannotDeform(
        "charge ordering did not converge".into(),
    ))
}

/// Decompress crowded charges: scaling every y-coordinate by λ > 1 stays in
/// the relation space (the rows act on x and y separately) and multiplies
/// all cross products by λ, so the entire phase order is preserved while
/// angles contract toward π/2. Falls back to the input on any failure.
fn spread_args(p: &StablePolygon) -> StablePolygon {
    let ctx = EContext::new(p.dtype());
    let mut cur = p.clone();
    for _ in 0..3 {
        let Ok((model, simples, before)) = ctx.analyzed(&cur) else {
            return cur;
        };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &cid in &simples.classes {
            let v = &model.class(cid).vec;
            let a = rat_to_f64(&v.dy)
                .atan2(rat_to_f64(&v.dx))
                .rem_euclid(std::f64::consts::PI);
            lo = lo.min(a);
            hi = hi.max(a);
        }
        if lo > 0.25 && hi < std::f64::consts::PI - 0.25 {
            return cur;
        }
        let coords = coords_of(&cur);
        let scaled: Vec<Rat> = coords
            .iter()
            .enumerate()
            .map(|(i, c)| if i % 2 == 1 { c * rat(4, 1) } else { c.clone() })
            .collect();
        let Ok(candidate) = polygon_from_coords(cur.dtype(), &scaled) else {
            return cur;
        };
        if certify(&candidate, &before).is_err() {
            return cur;
        }
        cur = ctx.resnap(&candidate, &before);
    }
    cur
}

/// Rotate the polygon so the simples' angles sit centrally inside `(0, π)`,
/// without wrapping any charge: a free move that gives subsequent
/// deformations room to work. Falls back to the input on any failure.
fn recenter(p: &StablePolygon) -> StablePolygon {
    let ctx = EContext::new(p.dtype());
    let Ok((model, simples, before)) = ctx.analyzed(p) else {
        return p.clone();
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &cid in &simples.classes {
        let v = &model.class(cid).vec;
        let a = rat_to_f64(&v.dy)
            .atan2(rat_to_f64(&v.dx))
            .rem_euclid(std::f64::consts::PI);
        lo = lo.min(a);
        hi = hi.max(a);
    }
    let delta = 0.5 * (std::f64::consts::PI - hi - lo);
    if !delta.is_finite() || delta.abs() < 1e-3 {
        return p.clone();
    }
    let t = dyadic((delta / 2.0).tan(), 24);
    let rotated = p.rotate_rational(&t);
    if certify(&rotated, &before).is_ok() {
        ctx.resnap(&rotated, &before)
    } else {
        p.clone()
    }
}

/// Spread and recenter: the standard grooming applied after every
/// deformation step to keep charges comfortably inside `(0, π)`.
fn groom(p: &StablePolygon) -> StablePolygon {
    recenter(&spread_args(p))
}

/// Rotate so the midpoint of two charges' angles lands near π/2, when that
/// rotation wraps nothing (checked by certification); gives a wall crossing
/// the most room to work.
fn center_pair(p: &StablePolygon, a: usize, b: usize) -> StablePolygon {
    let ctx = EContext::new(p.dtype());
    let Ok((model, simples, before)) = ctx.analyzed(p) else {
        return p.clone();
    };
    let ang = |v: usize| -> f64 {
        let c = &model.class(simples.classes[v - 1]).vec;
        rat_to_f64(&c.dy)
            .atan2(rat_to_f64(&c.dx))
            .rem_euclid(std::f64::consts::PI)
    };
    let delta = std::f64::consts::FRAC_PI_2 - 0.5 * (ang(a) + ang(b));
    if !delta.is_finite() || delta.abs() < 1e-3 {
        return p.clone();
    }
    let t = dyadic((delta / 2.0).tan(), 24);
    let rotated = p.rotate_rational(&t);
    if certify(&rotated, &before).is_ok() {
        ctx.resnap(&rotated, &before)
    } else {
        p.clone()
    }
}

/// Raise the charge of the source `v` above every other simple's charge by
/// crossing free walls one at a time. Any simple currently above a source
/// is non-adjacent to it, so none of these crossings changes the quiver.
fn make_max_arg(p: &StablePolygon, v: usize) -> Result<StablePolygon, RealizeError> {
    let ctx = EContext::new(p.dtype());
    let mut cur = recenter(&spread_args(p));
    for _ in 0..2 * p.dtype().rank() {
        let (model, simples, _) = ctx.analyzed(&cur)?;
        let order = arg_order(&model, &simples).ok_or_else(|| {
            RealizeError::CannotDeform("tied charges while reordering".into())
        })?;
        let pos = order.iter().position(|&u| u == v).expect("vertex present");
        if pos == order.len() - 1 {
            return Ok(cur);
        }
        let mut moved = None;
        for &anchor in order[pos + 1..].iter().rev() {
            if let Ok((next, _)) = sweep_towards_impl(&ctx, &cur, &model, &simples, v, anchor) {
                moved = Some(next);
                break;
            }
            let centered = center_pair(&cur, v, anchor);
            if coords_of(&centered) != coords_of(&cur) {
                if let Ok((next, _)) = sweep_towards(&centered, v, anchor) {
                    moved = Some(next);
                    break;
                }
            }
        }
        match moved {
            Some(next) => cur = next,
            None => {
                let centered = recenter(&spread_args(&cur));
                if coords_of(&centered) == coords_of(&cur) {
                    return Err(RealizeError::CannotDeform(
                        "no free upward sweep certified".into(),
                    ));
                }
                cur = centered;
            }
        }
    }
    Err(RealizeError::CannotDeform(
        "charge ordering did not converge".into(),
    ))
}

/// Walk a polygon to the goal orientation: bubble each sink of the
/// reflection word to the bottom of the phase order, then rotate until it
/// wraps. Every step is certified.
fn guided_walk(
    p: StablePolygon,
    from: &DynkinQuiver,
    goal: &DynkinQuiver,
) -> Result<StablePolygon, RealizeError> {
    let mut cur = p;
    let mut state = from.clone();
    for v in sink_word(from, goal) {
        cur = make_min_arg(&cur, v)?;
        let (next, reached) = rotate_wrap(&cur)?;
        let expected = state.reflect(v);
        if reached != expected {
            return Err(RealizeError::CannotDeform(format!(
                "wrap reached {reached}, expected {expected}"
            )));
        }
        cur = next;
        state = expected;
    }
    let _ = state;
    Ok(groom(&cur))
}

/// Settle all three leaf charges just above the axis, without changing any
/// arrow; makes subsequent leaf flips small certified moves.
fn settle_leaves(p: &StablePolygon) -> Result<StablePolygon, RealizeError> {
    let n = p.dtype().rank();
    let mut out = p.clone();
    for (leaf, _, _) in leaf_edges(n) {
        out = deform_leaf(&out, leaf, LeafMove::TowardZero)?;
    }
    Ok(out)
}

/// Search the exact relation space for a stable polygon realizing the base
/// orientation of the given path pattern (or of any pattern when `want` is
/// None), with the three leaf charges settled near the axis. Samples whose
/// predicted wrap cycle passes through the wanted orientation are rotated
/// into it, so chambers that random sampling rarely hits are still reached.
pub fn search_stable_e(
    dtype: DynkinType,
    want: Option<&[Sign]>,
    cfg: &SearchConfig,
) -> Result<(StablePolygon, Vec<Sign>), RealizeError> {
    let salt: u64 = want
        .unwrap_or(&[])
        .iter()
        .fold(
            0x9e3779b97f4a7c15u64.wrapping_add(dtype.rank() as u64),
            |acc, s| {
                acc.wrapping_mul(31)
                    .wrapping_add(if *s == Sign::Plus { 1 } else { 2 })
            },
        );
    let mut sampler = Sampler::new(dtype, cfg.seed ^ salt, cfg.denom_bits);
    let goal = want.map(|w| base_quiver(dtype, w));
    for _attempt in 0..cfg.max_candidates {
        let Some((poly, model, simples, quiver)) = sampler.next_sample() else {
            continue;
        };
        // Direct hit: the sample itself is a base of the wanted pattern.
        let direct = match (&goal, base_pattern_of(&quiver)) {
            (None, Some(pat)) => Some((poly.clone(), pat)),
            (Some(g), Some(pat)) if *g == quiver => Some((poly.clone(), pat)),
            _ => None,
        };
        if let Some((p, pat)) = direct {
            if let Ok(settled) = settle_leaves(&p) {
                let settled = groom(&settled);
                if certify(&settled, &base_quiver(dtype, &pat)).is_ok() {
                    return Ok((settled, pat));
                }
            }
            continue;
        }
        // Otherwise walk there: a sink-reflection word always connects two
        // orientations of a tree, and each reflection is realized by
        // lowering that sink's charge through free walls and wrapping.
        let Some(g) = &goal else { continue };
        let Ok(walked) = guided_walk(poly, &quiver, g) else {
            continue;
        };
        if let Ok(settled) = settle_leaves(&walked) {
            let settled = groom(&settled);
            let pat = pattern_of(g);
            if certify(&settled, g).is_ok() {
                return Ok((settled, pat));
            }
        }
    }
    Err(RealizeError::SearchExhausted {
        attempts: cfg.max_candidates,
        seed: cfg.seed,
    })
}

fn cache_path(cfg: &SearchConfig, dtype: DynkinType, pattern: &[Sign]) -> Option<PathBuf> {
    cfg.cache_dir
        .as_ref()
        .map(|d| d.join(format!("{}_{}.json", dtype, pattern_name(pattern))))
}

fn load_cached(
    cfg: &SearchConfig,
    dtype: DynkinType,
    pattern: &[Sign],
) -> Option<StablePolygon> {
    let path = cache_path(cfg, dtype, pattern)?;
    let text = std::fs::read_to_string(&path).ok()?;
    let poly = crate::io::polygon_from_json(&text).ok()?;
    if poly.dtype() == dtype && certify(&poly, &base_quiver(dtype, pattern)).is_ok() {
        Some(poly)
    } else {
        None
    }
}

fn store_cached(cfg: &SearchConfig, dtype: DynkinType, pattern: &[Sign], p: &StablePolygon) {
    if let Some(path) = cache_path(cfg, dtype, pattern) {
        if let Some(dir) = path.parent() {
            let _ = std::fs::create_dir_all(dir);
        }
        let _ = std::fs::write(&path, crate::io::polygon_to_json(p));
    }
}

/// All path sign patterns of the type, in lex order.
fn all_patterns(n: usize) -> Vec<Vec<Sign>> {
    let m = n - 5;
    (0..1usize << m)
        .map(|mask| {
            (0..m)
                .map(|i| {
                    if mask >> i & 1 == 0 {
                        Sign::Plus
                    } else {
                        Sign::Minus
                    }
                })
                .collect()
        })
        .collect()
}

/// Whether a full orientation is of base shape (arrows into the leaves and
/// into vertex 2), and if so which path pattern it carries.
fn base_pattern_of(q: &DynkinQuiver) -> Option<Vec<Sign>> {
    let n = q.rank();
    for (_, edge_idx, into_sign) in leaf_edges(n) {
        if q.orientation()[edge_idx] != into_sign {
            return None;
        }
    }
    if q.orientation()[1] != Sign::Minus {
        return None;
    }
    Some(pattern_of(q))
}

/// Base polygon for one path pattern: from the cache (re-certified, never
/// trusted), else searched and stored.
pub fn base_polygon(
    dtype: DynkinType,
    pattern: &[Sign],
    cfg: &SearchConfig,
) -> Result<StablePolygon, RealizeError> {
    if let Some(p) = load_cached(cfg, dtype, pattern) {
        return Ok(p);
    }
    let (p, _) = search_stable_e(dtype, Some(pattern), cfg)?;
    store_cached(cfg, dtype, pattern, &p);
    Ok(p)
}

/// Realize an E-type quiver: pick the base pattern (mirrored if the (2,4)
/// edge demands it), settle each leaf charge on the requested side of the
/// axis, then mirror and certify.
pub fn realize_e(q: &DynkinQuiver, cfg: &SearchConfig) -> Result<StablePolygon, RealizeError> {
    let dtype = q.dtype();
    let n = dtype.rank();
    let signs = q.orientation();
    let mirror_needed = signs[1] == Sign::Plus;
    let flip_if = |s: Sign| if mirror_needed { s.flip() } else { s };
    let pattern: Vec<Sign> = path_edge_indices(n)
        .iter()
        .map(|&e| flip_if(signs[e]))
        .collect();
    let mut p = base_polygon(dtype, &pattern, cfg)?;
    for (leaf, edge_idx, into_sign) in leaf_edges(n) {
        let desired_pre_mirror = flip_if(signs[edge_idx]);
        if desired_pre_mirror != into_sign {
            p = deform_leaf(&p, leaf, LeafMove::TowardPi)?;
        }
    }
    if mirror_needed {
        p = p.mirror();
    }
    certify(&p, q)?;
    Ok(p)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn q(f: Family, n: usize, signs: &str) -> DynkinQuiver {
        let t = DynkinType::new(f, n).unwrap();
        let orientation = signs
            .chars()
            .map(|c| if c == '+' { Sign::Plus } else { Sign::Minus })
            .collect();
        DynkinQuiver::new(t, orientation).unwrap()
    }

    #[test]
    fn a2_plus_gives_the_unit_triangle() {
        let p = realize_a(&q(Family::A, 2, "+")).unwrap();
        let pts = p.vertices();
        assert!(pts.contains(&RatPoint::from_ints(0, -1)));
        assert!(pts.contains(&RatPoint::from_ints(-1, 0)));
        assert!(pts.contains(&RatPoint::from_ints(0, 1)));
    }

    #[test]
    fn a1_realizes_as_bigon() {
        let p = realize_a(&q(Family::A, 1, "")).unwrap();
        assert!(p.is_bigon());
        assert!(p.is_stable().ok);
    }

    #[test]
    fn all_a_orientations_up_to_rank_five() {
        for n in 2..=5 {
            let t = DynkinType::new(Family::A, n).unwrap();
            for quiver in DynkinQuiver::all_orientations(t) {
                let p = realize_a(&quiver).unwrap();
                certify(&p, &quiver).unwrap();
            }
        }
    }

    #[test]
    fn a5_linear_orientation() {
        let quiver = q(Family::A, 5, "++++");
        let p = realize_a(&quiver).unwrap();
        let model = DiagonalModel::build(&p).unwrap();
        let iq = model.intersection_quiver().unwrap();
        assert_eq!(
            iq.to_dynkin_quiver().arrows(),
            vec![(1, 2), (2, 3), (3, 4), (4, 5)]
        );
    }

    #[test]
    fn d4_all_orientations() {
        let t = DynkinType::new(Family::D, 4).unwrap();
        for quiver in DynkinQuiver::all_orientations(t) {
            let p = realize_d(&quiver).unwrap();
            certify(&p, &quiver).unwrap();
        }
    }

    #[test]
    fn d4_case_a_has_central_punctures() {
        let p = realize_d(&q(Family::D, 4, "+++")).unwrap();
        let (bm, bp) = p.punctures().unwrap();
        assert_eq!(bm, bp);
        assert_eq!(*bm, RatPoint::from_ints(0, 0));
    }

    #[test]
    fn d5_case_b_and_b_prime() {
        let qb = q(Family::D, 5, "+--+");
        let p = realize_d(&qb).unwrap();
        certify(&p, &qb).unwrap();
        let qbp = q(Family::D, 5, "+-+-");
        let p = realize_d(&qbp).unwrap();
        certify(&p, &qbp).unwrap();
    }

    #[test]
    fn mirror_reduction_agrees_on_a_and_d() {
        for quiver in [q(Family::A, 4, "+-+"), q(Family::D, 4, "-+-")] {
            let p = realize(&quiver, &SearchConfig::default()).unwrap();
            let mirrored = p.mirror();
            let iq = DiagonalModel::build(&mirrored)
                .unwrap()
                .intersection_quiver()
                .unwrap();
            assert_eq!(iq.to_dynkin_quiver(), quiver.opposite());
        }
    }

    #[test]
    fn e_nullspace_dimensions() {
        for n in [6, 7, 8] {
            let t = DynkinType::new(Family::E, n).unwrap();
            let rows = relation_rows(t);
            let space = SolutionSpace::of_homogeneous(&rows);
            assert_eq!(space.dim, 2 * n, "solution dimension for {t}");
        }
    }

    #[test]
    #[ignore = "search smoke test; run explicitly"]
    fn e6_realize_one_orientation() {
        let cfg = SearchConfig {
            cache_dir: None,
            ..SearchConfig::default()
        };
        let target = q(Family::E, 6, "+-+-+");
        let p = realize_e(&target, &cfg).unwrap();
        certify(&p, &target).unwrap();
    }

    #[test]
    #[ignore = "heavy realization; run explicitly"]
    fn e8_realize_one_orientation() {
        let cfg = SearchConfig {
            cache_dir: None,
            ..SearchConfig::default()
        };
        let target = q(Family::E, 8, "+-+-+-+");
        let p = realize_e(&target, &cfg).unwrap();
        certify(&p, &target).unwrap();
    }
}



#[cfg(test)]
mod e_suite_tests {
    use super::*;

    #[test]
    #[ignore = "full E6 suite; run explicitly"]
    fn e6_all_32_orientations() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SearchConfig {
            cache_dir: Some(dir.path().to_path_buf()),
            ..SearchConfig::default()
        };
        let t = DynkinType::new(Family::E, 6).unwrap();
        for quiver in DynkinQuiver::all_orientations(t) {
            let p = realize_e(&quiver, &cfg).expect(&quiver.to_string());
            certify(&p, &quiver).unwrap();
            eprintln!("ok {quiver}");
        }
    }
}

#[cfg(test)]
mod e_suite_heavy_tests {
    use super::*;

    #[test]
    #[ignore = "full E7 suite; run explicitly"]
    fn e7_all_64_orientations() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SearchConfig {
            cache_dir: Some(dir.path().to_path_buf()),
            ..SearchConfig::default()
        };
        let t = DynkinType::new(Family::E, 7).unwrap();
        for quiver in DynkinQuiver::all_orientations(t) {
            let p = realize_e(&quiver, &cfg).expect(&quiver.to_string());
            certify(&p, &quiver).unwrap();
            eprintln!("ok {quiver}");
        }
    }

    #[test]
    #[ignore = "full E8 suite; run explicitly"]
    fn e8_all_128_orientations() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SearchConfig {
            cache_dir: Some(dir.path().to_path_buf()),
            ..SearchConfig::default()
        };
        let t = DynkinType::new(Family::E, 8).unwrap();
        for quiver in DynkinQuiver::all_orientations(t) {
            let p = realize_e(&quiver, &cfg).expect(&quiver.to_string());
            certify(&p, &quiver).unwrap();
            eprintln!("ok {quiver}");
        }
    }
}






#[cfg(test)]
mod e_debug_tests {
    use super::*;

    #[test]
    #[ignore = "diagnostic probe"]
    fn e7_pmpp_flow() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SearchConfig {
            cache_dir: Some(dir.path().to_path_buf()),
            ..SearchConfig::default()
        };
        let dtype = DynkinType::new(Family::E, 7).unwrap();
        let base = base_polygon(dtype, &[Sign::Plus, Sign::Plus], &cfg).unwrap();
        eprintln!("base ok");
        let dump_args = |p: &StablePolygon, label: &str| {
            let ctx = EContext::new(dtype);
            let (model, simples, q) = ctx.analyzed(p).unwrap();
            let mut s = String::new();
            for (i, &cid) in simples.classes.iter().enumerate() {
                let v = &model.class(cid).vec;
                let a = rat_to_f64(&v.dy).atan2(rat_to_f64(&v.dx)).rem_euclid(std::f64::consts::PI);
                s += &format!("s{}={:.3} ", i + 1, a);
            }
            eprintln!("{label}: {q} | {s}");
        };
        dump_args(&base, "base");
        let p1 = match deform_leaf(&base, 1, LeafMove::TowardPi) {
            Ok(p) => { dump_args(&p, "after leaf1"); p }
            Err(e) => { eprintln!("leaf1 failed: {e}"); return; }
        };
        match deform_leaf(&p1, 3, LeafMove::TowardPi) {
            Ok(p) => dump_args(&p, "after leaf3"),
            Err(e) => {
                eprintln!("leaf3 failed: {e}");
                // Detail: try make_min_arg manually.
                match make_min_arg(&p1, 3) {
                    Ok(_) => eprintln!("make_min_arg(3) ok??"),
                    Err(e2) => eprintln!("make_min_arg(3): {e2}"),
                }
            }
        }
    }
}
