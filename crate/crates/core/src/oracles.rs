//! Independent ground-truth computations.
//!
//! These deliberately avoid the solver's own machinery: the lasso oracle
//! enumerates sign/support patterns and solves reduced normal equations, the
//! quadratic oracle solves the stationarity system directly, and the spectral
//! oracles run Jacobi sweeps rather than power iteration. Every returned
//! solution carries a passing optimality certificate; an uncertifiable
//! instance is reported as an oracle failure (a broken fixture), never as a
//! silently wrong answer.

use crate::error::{Error, Result};
use crate::linalg::{solve_dense, sym_eigen, LinearMap, Vector};
use crate::prox::ProxKind;
use crate::saddle::{kkt_residual, KktResidual, SaddleProblem, SaddleState};

/// Certificate threshold: candidates are accepted only below this.
const CERT_TOL: f64 = 1e-10;

/// Largest primal dimension for which support enumeration stays desk-scale.
const LASSO_ENUM_LIMIT: usize = 12;

/// A certified saddle point.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub x_star: Vector,
    pub z_star: Vector,
    pub y_star: Vector,
    pub certificate: KktResidual,
}

impl OracleSolution {
    pub fn state(&self) -> SaddleState {
        SaddleState::new(self.x_star.clone(), self.z_star.clone(), self.y_star.clone())
    }
}

/// Exact solution of `min mu*||x||_1 + (1/2)||Mx - b||^2` by enumerating
/// sign/support patterns. For each support `S` and sign vector `sigma`, the
/// candidate solves `M_S^T M_S x_S = M_S^T b - mu*sigma`; a candidate is
/// accepted when its signs match `sigma` and its saddle certificate passes.
pub fn lasso_oracle(design: &LinearMap, target: &Vector, mu: f64) -> Result<OracleSolution> {
    if mu <= 0.0 || !mu.is_finite() {
        return Err(Error::NonPositive { name: "mu", value: mu });
    }
    let n = design.cols();
    let m = design.rows();
    if target.dim() != m {
        return Err(Error::DimensionMismatch {
            context: "lasso_oracle target",
            expected: m,
            actual: target.dim(),
        });
    }
    if n > LASSO_ENUM_LIMIT {
        return Err(Error::InvalidConfig(format!(
            "lasso_oracle enumerates supports and is capped at {LASSO_ENUM_LIMIT} columns, got {n}"
        )));
    }

    let problem = SaddleProblem::new(
        crate::prox::ProxFunction::l1(n, mu)?,
        crate::prox::ProxFunction::quadratic_distance(target.clone(), 1.0)?,
        design.clone(),
    )?;
    let gram = design.gram();
    let mtb = design.adjoint_apply(target)?;

    let mut best_residual = f64::INFINITY;
    for mask in 0u32..(1u32 << n) {
        let support: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        let k = support.len();
        for signs in 0u32..(1u32 << k) {
            let sigma: Vec<f64> = (0..k)
                .map(|i| if signs & (1 << i) != 0 { -1.0 } else { 1.0 })
                .collect();
            let x = match solve_support(&gram, &mtb, &support, &sigma, mu, n) {
                Some(x) => x,
                None => continue,
            };
            // candidate must realize the sign pattern it was solved under
            if support
                .iter()
                .zip(&sigma)
                .any(|(&j, &s)| x[j] * s <= 0.0)
            {
                continue;
            }
            let z = design.apply(&x)?;
            let y = z.sub(target);
            let state = SaddleState::new(x, z, y);
            let certificate = kkt_residual(&problem, &state)?;
            let worst = certificate.max();
            if worst <= CERT_TOL {
                return Ok(OracleSolution {
                    x_star: state.x,
                    z_star: state.z,
                    y_star: state.y,
                    certificate,
                });
            }
            best_residual = best_residual.min(worst);
        }
    }
    Err(Error::OracleCertification { context: "lasso_oracle", best_residual })
}

fn solve_support(
    gram: &LinearMap,
    mtb: &Vector,
    support: &[usize],
    sigma: &[f64],
    mu: f64,
    n: usize,
) -> Option<Vector> {
    let k = support.len();
    if k == 0 {
        return Some(Vector::zeros(n));
    }
    let sub = LinearMap::from_fn(k, k, |i, j| gram.entry(support[i], support[j]));
    let rhs = Vector::new(
        (0..k)
            .map(|i| mtb[support[i]] - mu * sigma[i])
            .collect(),
    )
    .ok()?;
    let xs = solve_dense(&sub, &rhs, "lasso support system").ok()?;
    let mut full = vec![0.0; n];
    for (i, &j) in support.iter().enumerate() {
        full[j] = xs[i];
    }
    Vector::new(full).ok()
}

/// Exact saddle point of a fully quadratic instance by solving the
/// stationarity system
///
/// ```text
/// wf*(x - bf) + A^T y = 0,    y = wg*(z - bg),    Ax = z
/// ```
///
/// as one dense linear solve.
pub fn quadratic_saddle_oracle(problem: &SaddleProblem) -> Result<OracleSolution> {
    let (bf, wf) = match problem.f().kind() {
        ProxKind::QuadraticDistance { center, weight } => (center.clone(), *weight),
        _ => return Err(Error::RequiresQuadratic { op: "quadratic_saddle_oracle" }),
    };
    let (bg, wg) = match problem.g().kind() {
        ProxKind::QuadraticDistance { center, weight } => (center.clone(), *weight),
        _ => return Err(Error::RequiresQuadratic { op: "quadratic_saddle_oracle" }),
    };
    let a = problem.a();
    let (n, m) = (a.cols(), a.rows());
    let dim = n + 2 * m;

    let mut system = LinearMap::zeros(dim, dim);
    system.set_scaled_identity_block(0, n, wf);
    system.set_block(0, n + m, &a.transpose());
    system.set_scaled_identity_block(n, m, wg);
    system.set_block(n, n + m, &LinearMap::identity(m).scale(-1.0));
    system.set_block(n + m, 0, a);
    system.set_block(n + m, n, &LinearMap::identity(m).scale(-1.0));

    let mut rhs = vec![0.0; dim];
    for i in 0..n {
        rhs[i] = wf * bf[i];
    }
    for i in 0..m {
        rhs[n + i] = wg * bg[i];
    }
    let solution = solve_dense(&system, &Vector::new(rhs)?, "quadratic stationarity system")?;

    let x_star = Vector::from_slice(&solution.as_slice()[..n])?;
    let z_star = Vector::from_slice(&solution.as_slice()[n..n + m])?;
    let y_star = Vector::from_slice(&solution.as_slice()[n + m..])?;
    let state = SaddleState::new(x_star, z_star, y_star);
    let certificate = kkt_residual(problem, &state)?;
    if certificate.max() > CERT_TOL {
        return Err(Error::OracleCertification {
            context: "quadratic_saddle_oracle",
            best_residual: certificate.max(),
        });
    }
    Ok(OracleSolution {
        x_star: state.x,
        z_star: state.z,
        y_star: state.y,
        certificate,
    })
}

/// Largest singular value through the Jacobi symmetric eigensolver; the
/// ground truth for the power-iteration estimate.
pub fn dense_svd_max(a: &LinearMap) -> Result<f64> {
    if a.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let eig = sym_eigen(&a.gram())?;
    Ok(eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Full symmetric spectrum (ascending) through Jacobi sweeps.
pub fn dense_eigs_sym(m: &LinearMap) -> Result<Vec<f64>> {
    Ok(sym_eigen(m)?.values)
}
