//! TOML run configuration: problem construction, kernel choice, and step
//! resolution.
//!
//! See the repository README for the documented schema. Every error carries
//! the parser's line/column diagnostic or a field-level message.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use proxsaddle::instances::{lasso_instance, quadratic_instance};
use proxsaddle::linalg::{LinearMap, OP_NORM_MAX_ITER, OP_NORM_TOL};
use proxsaddle::prox::ProxFunction;
use proxsaddle::{stepsize_bound_new, Kernel, SaddleProblem, StepSizes, Vector};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub solver: SolverSpec,
    #[serde(default)]
    pub run: RunSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub seed: Option<u64>,
    /// L1 weight on `f`; required for `lasso`, optional for `custom-dense`
    /// (absent means `f = 0`).
    pub mu: Option<f64>,
    /// Rescale the operator to unit norm (seeded lasso only).
    #[serde(default)]
    pub normalize: bool,
    /// Explicit operator rows (`custom-dense`).
    pub a: Option<Vec<Vec<f64>>>,
    /// Target center of the quadratic `g` term (`custom-dense`).
    pub b: Option<Vec<f64>>,
    /// Weight of the quadratic `g` term (`custom-dense`, default 1).
    pub w: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum ProblemKind {
    #[serde(rename = "lasso")]
    Lasso,
    #[serde(rename = "quadratic")]
    Quadratic,
    #[serde(rename = "custom-dense")]
    CustomDense,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub kernel: KernelSpec,
    /// Equal step size: a positive number, or "auto" for
    /// `0.99 / sqrt(||A||^2 + 1)`.
    pub lambda: Option<LambdaSpec>,
    pub lambda_x: Option<f64>,
    pub lambda_z: Option<f64>,
    pub lambda_y: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum KernelSpec {
    #[serde(rename = "ct")]
    Ct,
    #[serde(rename = "vmetric")]
    VMetric,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_MAX_ITER: usize = 100_000;
pub const DEFAULT_TOL: f64 = 1e-10;

/// A fully resolved run: the problem plus solver parameters with "auto"
/// steps already substituted.
pub struct BuiltRun {
    pub problem: SaddleProblem,
    pub kernel: Kernel,
    pub steps: StepSizes,
    pub max_iter: usize,
    pub tol: f64,
    pub output: Option<PathBuf>,
}

pub fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
}

pub fn build_run(config: &RunConfig) -> Result<BuiltRun, String> {
    let problem = build_problem(&config.problem)?;
    let norm_a = problem
        .a()
        .operator_norm(OP_NORM_TOL, OP_NORM_MAX_ITER)
        .map_err(|e| format!("operator norm estimation failed: {e}"))?;
    let kernel = match config.solver.kernel {
        KernelSpec::Ct => Kernel::ChenTeboulle,
        KernelSpec::VMetric => Kernel::VMetric,
    };
    let steps = resolve_steps(&config.solver, norm_a)?;
    let max_iter = config.run.max_iter.unwrap_or(DEFAULT_MAX_ITER);
    let tol = config.run.tol.unwrap_or(DEFAULT_TOL);
    if tol <= 0.0 || !tol.is_finite() {
        return Err(format!("run.tol must be > 0, got {tol}"));
    }
    Ok(BuiltRun {
        problem,
        kernel,
        steps,
        max_iter,
        tol,
        output: config.run.output.clone(),
    })
}

fn build_problem(spec: &ProblemSpec) -> Result<SaddleProblem, String> {
    match spec.kind {
        ProblemKind::Lasso => {
            let rows = spec.rows.ok_or("lasso problem needs `rows`")?;
            let cols = spec.cols.ok_or("lasso problem needs `cols`")?;
            let seed = spec.seed.ok_or("lasso problem needs `seed`")?;
            let mu = spec.mu.ok_or("lasso problem needs `mu`")?;
            check_dims(rows, cols)?;
            reject_custom_fields(spec, "lasso")?;
            let inst = lasso_instance(seed, rows, cols, mu, spec.normalize)
                .map_err(|e| format!("lasso instance: {e}"))?;
            Ok(inst.problem)
        }
        ProblemKind::Quadratic => {
            let rows = spec.rows.ok_or("quadratic problem needs `rows`")?;
            let cols = spec.cols.ok_or("quadratic problem needs `cols`")?;
            let seed = spec.seed.ok_or("quadratic problem needs `seed`")?;
            check_dims(rows, cols)?;
            reject_custom_fields(spec, "quadratic")?;
            if spec.normalize {
                return Err("`normalize` is only supported for seeded lasso problems".into());
            }
            if spec.mu.is_some() {
                return Err("`mu` does not apply to quadratic problems".into());
            }
            let inst = quadratic_instance(seed, rows, cols)
                .map_err(|e| format!("quadratic instance: {e}"))?;
            Ok(inst.problem)
        }
        ProblemKind::CustomDense => {
            let rows_spec = spec.a.as_ref().ok_or("custom-dense problem needs `a`")?;
            let b = spec.b.as_ref().ok_or("custom-dense problem needs `b`")?;
            if spec.normalize {
                return Err("`normalize` is only supported for seeded lasso problems".into());
            }
            if spec.rows.is_some() || spec.cols.is_some() || spec.seed.is_some() {
                return Err(
                    "custom-dense takes dimensions from `a`; drop rows/cols/seed".into(),
                );
            }
            let a = LinearMap::from_rows(rows_spec)
                .map_err(|e| format!("problem.a: {e}"))?;
            if a.rows() == 0 || a.cols() == 0 {
                return Err("problem.a must be a non-empty matrix".into());
            }
            let target = Vector::from_slice(b).map_err(|e| format!("problem.b: {e}"))?;
            if target.dim() != a.rows() {
                return Err(format!(
                    "problem.b has {} entries but a has {} rows",
                    target.dim(),
                    a.rows()
                ));
            }
            let f = match spec.mu {
                Some(mu) => {
                    ProxFunction::l1(a.cols(), mu).map_err(|e| format!("problem.mu: {e}"))?
                }
                None => ProxFunction::zero(a.cols()),
            };
            let w = spec.w.unwrap_or(1.0);
            let g = ProxFunction::quadratic_distance(target, w)
                .map_err(|e| format!("problem.w: {e}"))?;
            SaddleProblem::new(f, g, a).map_err(|e| format!("problem: {e}"))
        }
    }
}

fn check_dims(rows: usize, cols: usize) -> Result<(), String> {
    if rows == 0 || cols == 0 {
        return Err("problem dimensions must be positive".into());
    }
    Ok(())
}

fn reject_custom_fields(spec: &ProblemSpec, kind: &str) -> Result<(), String> {
    if spec.a.is_some() || spec.b.is_some() || spec.w.is_some() {
        return Err(format!("`a`/`b`/`w` only apply to custom-dense, not {kind}"));
    }
    Ok(())
}

fn resolve_steps(solver: &SolverSpec, norm_a: f64) -> Result<StepSizes, String> {
    let per_block = [solver.lambda_x, solver.lambda_z, solver.lambda_y];
    let any_per_block = per_block.iter().any(Option::is_some);
    match (&solver.lambda, any_per_block) {
        (Some(_), true) => {
            Err("give either `lambda` or the lambda_x/lambda_z/lambda_y triple, not both".into())
        }
        (None, false) => Err("solver needs `lambda` or lambda_x/lambda_z/lambda_y".into()),
        (Some(LambdaSpec::Keyword(word)), false) => {
            if word == "auto" {
                Ok(StepSizes::Equal(0.99 * stepsize_bound_new(norm_a)))
            } else {
                Err(format!("solver.lambda must be a positive number or \"auto\", got {word:?}"))
            }
        }
        (Some(LambdaSpec::Value(l)), false) => {
            if *l > 0.0 && l.is_finite() {
                Ok(StepSizes::Equal(*l))
            } else {
                Err(format!("solver.lambda must be > 0, got {l}"))
            }
        }
        (None, true) => {
            let [x, z, y] = per_block;
            let (x, z, y) = match (x, z, y) {
                (Some(x), Some(z), Some(y)) => (x, z, y),
                _ => return Err("per-block steps need all of lambda_x, lambda_z, lambda_y".into()),
            };
            for (name, v) in [("lambda_x", x), ("lambda_z", z), ("lambda_y", y)] {
                if v <= 0.0 || !v.is_finite() {
                    return Err(format!("solver.{name} must be > 0, got {v}"));
                }
            }
            if solver.kernel == KernelSpec::Ct && !(x == z && z == y) {
                return Err("the ct kernel takes a single step size; use `lambda`".into());
            }
            Ok(StepSizes::PerBlock { x, z, y })
        }
    }
}
