//! Small dense linear algebra: vectors, operators, operator-norm estimation,
//! and symmetric eigenvalues.
//!
//! Everything here is desk-scale and dense. The operator norm is estimated by
//! power iteration on `A^T A` from a fixed seeded start vector, so repeated
//! runs produce identical step-size bounds. Symmetric spectra come from cyclic
//! Jacobi sweeps, which are independent of the power-iteration path and serve
//! as the ground truth for it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default relative tolerance for [`LinearMap::operator_norm`].
pub const OP_NORM_TOL: f64 = 1e-10;
/// Default iteration budget for [`LinearMap::operator_norm`].
pub const OP_NORM_MAX_ITER: usize = 10_000;

/// Seed for the power-iteration start vector. Fixed so norm estimates are
/// reproducible across runs.
const POWER_START_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// Symmetry slack accepted by [`min_eig_sym`] and [`sym_eigen`].
const SYMMETRY_TOL: f64 = 1e-12;

/// A finite real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector, rejecting NaN and infinite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "Vector::new" });
        }
        Ok(Self(entries))
    }

    /// Builds a vector without the finiteness check. Arithmetic helpers use
    /// this internally; the solver loop re-checks finiteness each iteration.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Euclidean inner product. Panics on dimension mismatch; callers
    /// validate dimensions at the API boundary.
    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dot: dimension mismatch");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_eq!(self.dim(), other.dim(), "add: dimension mismatch");
        Vector::from_raw(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        assert_eq!(self.dim(), other.dim(), "sub: dimension mismatch");
        Vector::from_raw(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: f64) -> Vector {
        Vector::from_raw(self.0.iter().map(|a| c * a).collect())
    }

    /// self + c * other
    pub fn axpy(&self, c: f64, other: &Vector) -> Vector {
        assert_eq!(self.dim(), other.dim(), "axpy: dimension mismatch");
        Vector::from_raw(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + c * b)
                .collect(),
        )
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A bounded linear operator between finite-dimensional real spaces, stored
/// as a dense row-major matrix. `apply` is the forward action `x -> Ax` and
/// `adjoint_apply` the adjoint `y -> A^T y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl LinearMap {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in entries.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Builds a map from rows, rejecting ragged or non-finite input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    context: "LinearMap::from_rows (ragged rows)",
                    expected: c,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "LinearMap::from_rows" });
        }
        Ok(Self { rows: r, cols: c, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Copies `block` into this matrix with its top-left corner at (r0, c0).
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &LinearMap) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.data[(r0 + i) * self.cols + (c0 + j)] = block.entry(i, j);
            }
        }
    }

    /// Writes `c * I` into the square block with top-left corner (r0, r0).
    pub fn set_scaled_identity_block(&mut self, r0: usize, dim: usize, c: f64) {
        for i in 0..dim {
            self.data[(r0 + i) * self.cols + (r0 + i)] = c;
        }
    }

    /// Forward action `Ax`.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        if x.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "LinearMap::apply",
                expected: self.cols,
                actual: x.dim(),
            });
        }
        if self.cols == 0 {
            return Ok(Vector::zeros(self.rows));
        }
        let out = self
            .data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum())
            .collect();
        Ok(Vector::from_raw(out))
    }

    /// Adjoint action `A^T y`. For a real dense matrix this is the transpose
    /// action, so `<Ax, y> = <x, A^T y>` holds to rounding.
    pub fn adjoint_apply(&self, y: &Vector) -> Result<Vector> {
        if y.dim() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "LinearMap::adjoint_apply",
                expected: self.rows,
                actual: y.dim(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        Ok(Vector::from_raw(out))
    }

    pub fn transpose(&self) -> LinearMap {
        LinearMap::from_fn(self.cols, self.rows, |i, j| self.entry(j, i))
    }

    pub fn scale(&self, c: f64) -> LinearMap {
        LinearMap {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &LinearMap) -> Result<LinearMap> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "LinearMap::add",
                expected: self.rows * self.cols,
                actual: other.rows * other.cols,
            });
        }
        Ok(LinearMap {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn matmul(&self, other: &LinearMap) -> Result<LinearMap> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "LinearMap::matmul",
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut out = LinearMap::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.entry(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * out.cols + j] += aik * other.entry(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `A^T A`, a `cols x cols` symmetric positive semidefinite matrix.
    pub fn gram(&self) -> LinearMap {
        let n = self.cols;
        let mut out = LinearMap::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..self.rows {
                    s += self.entry(k, i) * self.entry(k, j);
                }
                out.data[i * n + j] = s;
                out.data[j * n + i] = s;
            }
        }
        out
    }

    /// `A A^T`, a `rows x rows` symmetric positive semidefinite matrix.
    pub fn outer_gram(&self) -> LinearMap {
        self.transpose().gram()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self.entry(i, j) - self.entry(j, i)).abs());
            }
        }
        worst
    }

    /// Largest singular value, estimated by power iteration on `A^T A` from a
    /// fixed seeded start vector. Returns exactly 0 for the zero map. The
    /// estimate stops once the Rayleigh quotient changes by less than `tol`
    /// relative, and errors (carrying the last estimate) if that never
    /// happens within `max_iter` products.
    pub fn operator_norm(&self, tol: f64, max_iter: usize) -> Result<f64> {
        if tol <= 0.0 {
            return Err(Error::NonPositive { name: "tol", value: tol });
        }
        if self.max_abs() == 0.0 {
            return Ok(0.0);
        }
        let g = self.gram();
        let n = g.rows;
        let mut rng = ChaCha8Rng::seed_from_u64(POWER_START_SEED);
        let mut v = Vector::from_raw((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let nv = v.norm();
        if nv == 0.0 {
            // cannot happen for the ChaCha stream, but keep the map total
            v = Vector::from_raw((0..n).map(|i| 1.0 + i as f64).collect());
        }
        v = v.scale(1.0 / v.norm());

        let mut rayleigh = v.dot(&g.apply(&v).expect("gram is square"));
        for _ in 0..max_iter {
            let w = g.apply(&v).expect("gram is square");
            let wn = w.norm();
            if wn == 0.0 {
                // landed exactly in the kernel; restart from a fresh direction
                v = Vector::from_raw((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
                v = v.scale(1.0 / v.norm());
                continue;
            }
            v = w.scale(1.0 / wn);
            let next = v.dot(&g.apply(&v).expect("gram is square"));
            let settled = (next - rayleigh).abs() <= tol * next.max(f64::MIN_POSITIVE);
            rayleigh = next;
            if settled {
                return Ok(rayleigh.max(0.0).sqrt());
            }
        }
        Err(Error::OpNormDidNotConverge {
            max_iter,
            last_estimate: rayleigh.max(0.0).sqrt(),
        })
    }
}

/// Eigendecomposition of a symmetric matrix: `m = Q diag(values) Q^T` with
/// `values` sorted ascending and the columns of `Q` the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: LinearMap,
}

/// Full spectrum of a symmetric matrix by cyclic Jacobi sweeps.
///
/// Rejects non-square or asymmetric (beyond 1e-12) input. Jacobi converges
/// quadratically on these desk-scale matrices; the sweep budget is generous.
pub fn sym_eigen(m: &LinearMap) -> Result<SymEigen> {
    if m.rows != m.cols {
        return Err(Error::DimensionMismatch {
            context: "sym_eigen (square required)",
            expected: m.rows,
            actual: m.cols,
        });
    }
    let asym = m.max_asymmetry();
    if asym > SYMMETRY_TOL * m.max_abs().max(1.0) {
        return Err(Error::NotSymmetric { max_asymmetry: asym });
    }

    let n = m.rows;
    let mut a = m.clone();
    let mut q = LinearMap::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let max_sweeps = 100;

    for _ in 0..max_sweeps {
        let off: f64 = {
            let mut s = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    s += a.entry(i, j) * a.entry(i, j);
                }
            }
            s.sqrt()
        };
        if off <= 1e-15 * scale {
            return Ok(sorted_eigen(&a, q));
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a.entry(p, r);
                if apr.abs() <= 1e-300 {
                    continue;
                }
                let app = a.entry(p, p);
                let arr = a.entry(r, r);
                let tau = (arr - app) / (2.0 * apr);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // rotate rows/columns p and r of a, and columns of q
                for k in 0..n {
                    let akp = a.entry(k, p);
                    let akr = a.entry(k, r);
                    a.set_entry(k, p, c * akp - s * akr);
                    a.set_entry(k, r, s * akp + c * akr);
                }
                for k in 0..n {
                    let apk = a.entry(p, k);
                    let ark = a.entry(r, k);
                    a.set_entry(p, k, c * apk - s * ark);
                    a.set_entry(r, k, s * apk + c * ark);
                }
                for k in 0..n {
                    let qkp = q.entry(k, p);
                    let qkr = q.entry(k, r);
                    q.set_entry(k, p, c * qkp - s * qkr);
                    q.set_entry(k, r, s * qkp + c * qkr);
                }
            }
        }
    }

    let off: f64 = {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a.entry(i, j) * a.entry(i, j);
            }
        }
        s.sqrt()
    };
    Err(Error::EigDidNotConverge { sweeps: max_sweeps, off_norm: off })
}

fn sorted_eigen(a: &LinearMap, q: LinearMap) -> SymEigen {
    let n = a.rows;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.entry(i, i).partial_cmp(&a.entry(j, j)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a.entry(i, i)).collect();
    let vectors = LinearMap::from_fn(n, n, |i, j| q.entry(i, order[j]));
    SymEigen { values, vectors }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eig_sym(m: &LinearMap) -> Result<f64> {
    let eig = sym_eigen(m)?;
    Ok(eig.values[0])
}

/// Solves the dense square system `a x = b` by LU with partial pivoting.
pub fn solve_dense(a: &LinearMap, b: &Vector, context: &'static str) -> Result<Vector> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch {
            context: "solve_dense (square required)",
            expected: a.rows,
            actual: a.cols,
        });
    }
    if b.dim() != a.rows {
        return Err(Error::DimensionMismatch {
            context: "solve_dense (rhs)",
            expected: a.rows,
            actual: b.dim(),
        });
    }
    let n = a.rows;
    let mut lu = a.data.clone();
    let mut x: Vec<f64> = b.as_slice().to_vec();
    let pivot_floor = 1e-14 * a.max_abs().max(1.0);

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = lu[col * n + col].abs();
        for row in (col + 1)..n {
            let v = lu[row * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val <= pivot_floor {
            return Err(Error::SingularSystem { context });
        }
        if pivot_row != col {
            for k in 0..n {
                lu.swap(col * n + k, pivot_row * n + k);
            }
            x.swap(col, pivot_row);
        }
        let pivot = lu[col * n + col];
        for row in (col + 1)..n {
            let factor = lu[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            lu[row * n + col] = 0.0;
            for k in (col + 1)..n {
                lu[row * n + k] -= factor * lu[col * n + k];
            }
            x[row] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for k in (col + 1)..n {
            s -= lu[col * n + k] * x[k];
        }
        x[col] = s / lu[col * n + col];
    }
    Ok(Vector::from_raw(x))
}
