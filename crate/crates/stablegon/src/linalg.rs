//! Dense exact linear algebra over the rationals.
//!
//! Small systems only (dimensions up to a few hundred): plain Gaussian
//! elimination with exact pivoting is more than fast enough and keeps every
//! certificate exact.

use crate::geom::Rat;
use num_traits::{One, Zero};

/// Row-major rational matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        RatMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        RatMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| crate::geom::rat(v, 1)).collect())
                .collect(),
        )
    }

    pub fn at(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Rat {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if !b.is_zero() {
                        let cur = out.at(i, j).clone();
                        *out.at_mut(i, j) = cur + a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for j in 0..self.cols {
                    let a = self.at(i, j);
                    if !a.is_zero() {
                        acc += a * &v[j];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn scale(&self, k: &Rat) -> RatMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= k;
        }
        out
    }

    /// Reduced row echelon form in place; returns pivot column indices.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.at(i, c).is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = Rat::one() / self.at(r, c).clone();
            for j in c..self.cols {
                let v = self.at(r, j).clone();
                *self.at_mut(r, j) = v * &inv;
            }
            for i in 0..self.rows {
                if i != r && !self.at(i, c).is_zero() {
                    let f = self.at(i, c).clone();
                    for j in c..self.cols {
                        let v = self.at(i, j).clone() - &f * self.at(r, j);
                        *self.at_mut(i, j) = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right nullspace, one column vector per free variable.
    pub fn nullspace(&self) -> Vec<Vec<Rat>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rat::zero(); self.cols];
                v[f] = Rat::one();
                for (ri, &pc) in pivots.iter().enumerate() {
                    v[pc] = -m.at(ri, f).clone();
                }
                v
            })
            .collect()
    }

    /// Solve `self * x = b`; returns one solution if consistent.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(self.rows, b.len());
        let mut aug = RatMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *aug.at_mut(i, j) = self.at(i, j).clone();
            }
            *aug.at_mut(i, self.cols) = b[i].clone();
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // inconsistent
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (ri, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.at(ri, self.cols).clone();
        }
        Some(x)
    }

    /// Columns of the matrix whose columns span the kernel, as a matrix.
    pub fn kernel_matrix(&self) -> RatMatrix {
        let basis = self.nullspace();
        let mut m = RatMatrix::zeros(self.cols, basis.len());
        for (j, v) in basis.iter().enumerate() {
            for i in 0..self.cols {
                *m.at_mut(i, j) = v[i].clone();
            }
        }
        m
    }

    /// Full column rank test (injectivity of the linear map).
    pub fn has_full_column_rank(&self) -> bool {
        self.rank() == self.cols
    }
}

/// Solution set of a homogeneous system, parameterized by the free columns of
/// its RREF: any assignment of the free variables extends uniquely to a
/// solution.
#[derive(Debug, Clone)]
pub struct SolutionSpace {
    rref: RatMatrix,
    pivots: Vec<usize>,
    pub free: Vec<usize>,
    pub dim: usize,
    pub cols: usize,
}

impl SolutionSpace {
    pub fn of_homogeneous(m: &RatMatrix) -> Self {
        let mut r = m.clone();
        let pivots = r.rref();
        let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
        SolutionSpace {
            dim: free.len(),
            cols: m.cols,
            rref: r,
            pivots,
            free,
        }
    }

    /// Reconstruct the full solution vector from values of the free variables.
    pub fn extend(&self, free_vals: &[Rat]) -> Vec<Rat> {
        assert_eq!(free_vals.len(), self.free.len());
        let mut x = vec![Rat::zero(); self.cols];
        for (fv, &fc) in free_vals.iter().zip(&self.free) {
            x[fc] = fv.clone();
        }
        for (ri, &pc) in self.pivots.iter().enumerate() {
            let mut acc = Rat::zero();
            for (fv, &fc) in free_vals.iter().zip(&self.free) {
                let coef = self.rref.at(ri, fc);
                if !coef.is_zero() {
                    acc -= coef * fv;
                }
            }
            x[pc] = acc;
        }
        x
    }

    /// Values of the free variables of an arbitrary vector (its projection
    /// coordinates if it is a solution).
    pub fn free_values(&self, x: &[Rat]) -> Vec<Rat> {
        self.free.iter().map(|&c| x[c].clone()).collect()
    }

    /// Whether `x` solves the system (checked through reconstruction).
    pub fn contains(&self, x: &[Rat]) -> bool {
        self.extend(&self.free_values(x)) == x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::rat;

    #[test]
    fn rref_and_rank() {
        let m = RatMatrix::from_i64(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let id = RatMatrix::identity(4);
        assert_eq!(id.rank(), 4);
    }

    #[test]
    fn nullspace_dimension_and_membership() {
        let m = RatMatrix::from_i64(&[&[1, 1, 0, 0], &[0, 0, 1, -1]]);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let out = m.mul_vec(v);
            assert!(out.iter().all(|r| r.is_zero()));
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = RatMatrix::from_i64(&[&[2, 0], &[0, 4]]);
        let x = m.solve(&[rat(1, 1), rat(2, 1)]).unwrap();
        assert_eq!(x, vec![rat(1, 2), rat(1, 2)]);
        let sing = RatMatrix::from_i64(&[&[1, 1], &[1, 1]]);
        assert!(sing.solve(&[rat(0, 1), rat(1, 1)]).is_none());
    }

    #[test]
    fn solution_space_roundtrip() {
        let m = RatMatrix::from_i64(&[&[1, -1, 0], &[0, 1, -1]]);
        let ss = SolutionSpace::of_homogeneous(&m);
        assert_eq!(ss.dim, 1);
        let x = ss.extend(&[rat(7, 3)]);
        assert_eq!(x, vec![rat(7, 3), rat(7, 3), rat(7, 3)]);
        assert!(ss.contains(&x));
        assert!(!ss.contains(&[rat(1, 1), rat(0, 1), rat(0, 1)]));
    }

    #[test]
    fn kernel_matrix_shapes() {
        let m = RatMatrix::from_i64(&[&[1, 2, 3]]);
        let k = m.kernel_matrix();
        assert_eq!((k.rows, k.cols), (3, 2));
        let prod = m.mul(&k);
        assert!((0..prod.rows).all(|i| (0..prod.cols).all(|j| prod.at(i, j).is_zero())));
    }
}
