//! Saddle-point problem data, stacked iterates, and optimality residuals.
//!
//! A problem is the triple `(f, g, A)` for
//!
//! ```text
//! min_{x,z} f(x) + g(z)  such that  Ax = z
//! ```
//!
//! and a candidate solution is the stacked triple `s = (x, z, y)` with dual
//! variable `y`. Optimality is the joint inclusion
//!
//! ```text
//! y in dg(z),   z = Ax,   0 in df(x) + A^T y
//! ```
//!
//! which [`kkt_residual`] measures term by term, in closed form per catalog
//! kind, so residuals are exact rather than estimated. The Fenchel dual
//! variable is `v = -y`; this crate stores `y` throughout and maps to `v`
//! only at reporting boundaries.

use crate::error::{Error, Result};
use crate::linalg::{LinearMap, Vector};
use crate::prox::ProxFunction;

/// The problem triple `(f, g, A)` with `A` mapping the domain of `f` into
/// the domain of `g`.
#[derive(Debug, Clone)]
pub struct SaddleProblem {
    f: ProxFunction,
    g: ProxFunction,
    a: LinearMap,
}

impl SaddleProblem {
    pub fn new(f: ProxFunction, g: ProxFunction, a: LinearMap) -> Result<Self> {
        if a.cols() != f.dim() {
            return Err(Error::DimensionMismatch {
                context: "SaddleProblem: cols(A) vs dim(f)",
                expected: f.dim(),
                actual: a.cols(),
            });
        }
        if a.rows() != g.dim() {
            return Err(Error::DimensionMismatch {
                context: "SaddleProblem: rows(A) vs dim(g)",
                expected: g.dim(),
                actual: a.rows(),
            });
        }
        Ok(Self { f, g, a })
    }

    pub fn f(&self) -> &ProxFunction {
        &self.f
    }

    pub fn g(&self) -> &ProxFunction {
        &self.g
    }

    pub fn a(&self) -> &LinearMap {
        &self.a
    }

    /// Primal dimension `n = dim(f)`.
    pub fn primal_dim(&self) -> usize {
        self.f.dim()
    }

    /// Splitting dimension `m = dim(g)`.
    pub fn split_dim(&self) -> usize {
        self.g.dim()
    }

    /// `f(x) + g(Ax)`, possibly `+inf` outside an indicator's domain.
    pub fn primal_objective(&self, x: &Vector) -> Result<f64> {
        let ax = self.a.apply(x)?;
        Ok(self.f.evaluate(x)? + self.g.evaluate(&ax)?)
    }
}

/// The stacked iterate `(x, z, y)` plus the last predictor `p` when the
/// predictor-corrector kernel produced this state.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleState {
    pub x: Vector,
    pub z: Vector,
    pub y: Vector,
    pub p: Option<Vector>,
}

impl SaddleState {
    pub fn new(x: Vector, z: Vector, y: Vector) -> Self {
        Self { x, z, y, p: None }
    }

    pub fn zeros(primal_dim: usize, split_dim: usize) -> Self {
        Self::new(
            Vector::zeros(primal_dim),
            Vector::zeros(split_dim),
            Vector::zeros(split_dim),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.z.is_finite() && self.y.is_finite()
    }

    /// Euclidean norm of the stacked `(x, z, y)` difference; `p` is
    /// bookkeeping and does not enter distances.
    pub fn distance(&self, other: &SaddleState) -> f64 {
        let dx = self.x.sub(&other.x);
        let dz = self.z.sub(&other.z);
        let dy = self.y.sub(&other.y);
        (dx.dot(&dx) + dz.dot(&dz) + dy.dot(&dy)).sqrt()
    }

    fn check_dims(&self, problem: &SaddleProblem, context: &'static str) -> Result<()> {
        if self.x.dim() != problem.primal_dim() {
            return Err(Error::DimensionMismatch {
                context,
                expected: problem.primal_dim(),
                actual: self.x.dim(),
            });
        }
        if self.z.dim() != problem.split_dim() || self.y.dim() != problem.split_dim() {
            return Err(Error::DimensionMismatch {
                context,
                expected: problem.split_dim(),
                actual: self.z.dim().max(self.y.dim()),
            });
        }
        Ok(())
    }
}

/// Distances of a state from each optimality inclusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResidual {
    /// Distance of `-A^T y` from `df(x)`.
    pub r_f: f64,
    /// Distance of `y` from `dg(z)`.
    pub r_g: f64,
    /// Constraint violation `||Ax - z||`.
    pub r_c: f64,
}

impl KktResidual {
    pub fn max(&self) -> f64 {
        self.r_f.max(self.r_g).max(self.r_c)
    }
}

/// Measures how far `s` is from satisfying the saddle conditions. All three
/// components are zero exactly at saddle points.
pub fn kkt_residual(problem: &SaddleProblem, s: &SaddleState) -> Result<KktResidual> {
    s.check_dims(problem, "kkt_residual")?;
    let ax = problem.a.apply(&s.x)?;
    let r_c = ax.sub(&s.z).norm();
    let aty = problem.a.adjoint_apply(&s.y)?;
    let r_f = problem.f.subdiff_distance(&s.x, &aty.scale(-1.0))?;
    let r_g = problem.g.subdiff_distance(&s.z, &s.y)?;
    Ok(KktResidual { r_f, r_g, r_c })
}

/// One element of the stacked monotone operator
///
/// ```text
/// T(x, z, y) = ( df(x) + A^T y,  dg(z) - y,  z - Ax )
/// ```
///
/// under the minimum-norm subgradient selection (deterministic, and zero
/// exactly at saddle points). Errors if a queried subdifferential is empty.
pub fn stacked_operator_apply(
    problem: &SaddleProblem,
    s: &SaddleState,
) -> Result<(Vector, Vector, Vector)> {
    s.check_dims(problem, "stacked_operator_apply")?;
    let aty = problem.a.adjoint_apply(&s.y)?;
    let x_block = problem.f.min_norm_shifted_subgradient(&s.x, &aty)?;
    let z_block = problem
        .g
        .min_norm_shifted_subgradient(&s.z, &s.y.scale(-1.0))?;
    let y_block = s.z.sub(&problem.a.apply(&s.x)?);
    Ok((x_block, z_block, y_block))
}
