//! The two iteration kernels and the run loop.
//!
//! Both kernels solve the split problem `min f(x) + g(z) s.t. Ax = z`
//! through exact resolvents:
//!
//! * [`ct_iterate`] — the classic predictor-corrector sweep: a provisional
//!   dual update `p`, the two decoupled resolvent steps against `p`, then the
//!   corrector dual update.
//! * [`vmetric_iterate`] — the same fixed-point map written as a proximal
//!   point step in the block metric `V`: resolvent steps against the current
//!   dual `y`, then one dual update with the doubled increment
//!   `2Ax' - Ax - 2z' + z`.
//!
//! With equal step sizes the two kernels generate the same sweep: the
//! predictor sequence of the first is the dual sequence of the second, one
//! update ahead. [`ppa_identity_check`] verifies on quadratic instances that
//! a `vmetric_iterate` step equals the direct solve of `(V + T) s' = V s`,
//! where `T` is the stacked saddle operator.

use crate::error::{Error, Result};
use crate::linalg::{solve_dense, LinearMap, Vector};
use crate::metric::{build_v, is_positive_definite, v_distance, MetricParams, MetricV};
use crate::prox::ProxKind;
use crate::saddle::{kkt_residual, KktResidual, SaddleProblem, SaddleState};

/// Which iteration kernel drives a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// Predictor-corrector sweep with a single step size.
    ChenTeboulle,
    /// Block-metric proximal point sweep; accepts per-block step sizes.
    VMetric,
}

/// Step sizes for a run: one shared value, or one per block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSizes {
    Equal(f64),
    PerBlock { x: f64, z: f64, y: f64 },
}

impl StepSizes {
    pub fn as_triple(&self) -> (f64, f64, f64) {
        match *self {
            StepSizes::Equal(l) => (l, l, l),
            StepSizes::PerBlock { x, z, y } => (x, z, y),
        }
    }

    fn validate(&self) -> Result<()> {
        let (x, z, y) = self.as_triple();
        for (name, v) in [("lambda_x", x), ("lambda_z", z), ("lambda_y", y)] {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::NonPositive { name, value: v });
            }
        }
        Ok(())
    }

    /// The metric parameters this step choice corresponds to
    /// (`tau = 1/lambda` per block, identity coupling).
    pub fn metric_params(&self, split_dim: usize) -> MetricParams {
        let (x, z, y) = self.as_triple();
        MetricParams::with_identity_coupling(1.0 / x, 1.0 / z, 1.0 / y, split_dim)
    }
}

/// Loop controls for [`run`].
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub steps: StepSizes,
    pub max_iter: usize,
    /// Stop once the Euclidean fixed-point residual `||s_{k+1} - s_k||`
    /// drops to this value.
    pub tol_fixed_point: f64,
    /// Record `||s_k - reference||_V` each iteration. Requires a reference
    /// point and a positive definite metric for the configured steps.
    pub record_v_norm: bool,
    pub reference_point: Option<SaddleState>,
}

impl SolverConfig {
    pub fn new(steps: StepSizes, max_iter: usize, tol_fixed_point: f64) -> Self {
        Self {
            steps,
            max_iter,
            tol_fixed_point,
            record_v_norm: false,
            reference_point: None,
        }
    }

    pub fn with_reference(mut self, reference: SaddleState) -> Self {
        self.record_v_norm = true;
        self.reference_point = Some(reference);
        self
    }

    fn validate(&self, kernel: Kernel) -> Result<()> {
        self.steps.validate()?;
        if self.tol_fixed_point <= 0.0 || !self.tol_fixed_point.is_finite() {
            return Err(Error::NonPositive {
                name: "tol_fixed_point",
                value: self.tol_fixed_point,
            });
        }
        if kernel == Kernel::ChenTeboulle {
            if let StepSizes::PerBlock { x, z, y } = self.steps {
                if x != z || z != y {
                    return Err(Error::InvalidConfig(
                        "the predictor-corrector kernel takes a single step size".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Fixed-point residual reached the tolerance.
    Converged,
    /// Iteration budget exhausted.
    IterLimit,
    /// An iterate left the finite range; the last finite state is returned.
    Diverged,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::Converged => write!(f, "converged"),
            StopReason::IterLimit => write!(f, "iteration-limit"),
            StopReason::Diverged => write!(f, "diverged"),
        }
    }
}

/// Per-iteration measurements.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    /// 1-based iteration index.
    pub iter: usize,
    pub kkt: KktResidual,
    /// `||s_k - s_{k-1}||` over the stacked coordinates.
    pub fixed_point_res: f64,
    /// `f(x_k) + g(A x_k)`; may be `+inf` outside an indicator's domain.
    pub primal_obj: f64,
    /// `||s_k - reference||_V` when tracked.
    pub v_dist: Option<f64>,
}

/// The recorded history of a run, one record per executed iteration.
#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

/// Result of [`run`]: final state, the trace, and why the loop stopped.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: SaddleState,
    pub trace: IterationTrace,
    pub stop: StopReason,
}

/// One predictor-corrector sweep:
///
/// ```text
/// p' = y + lambda*(Ax - z)
/// x' = (df + I/lambda)^{-1}( x/lambda - A^T p' )
/// z' = (dg + I/lambda)^{-1}( z/lambda + p' )
/// y' = y + lambda*(Ax' - z')
/// ```
///
/// The predictor is kept in the returned state for tracing.
pub fn ct_iterate(problem: &SaddleProblem, s: &SaddleState, lambda: f64) -> Result<SaddleState> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::NonPositive { name: "lambda", value: lambda });
    }
    let a = problem.a();
    let tau = 1.0 / lambda;

    let ax = a.apply(&s.x)?;
    let p = s.y.axpy(lambda, &ax.sub(&s.z));
    let x_arg = s.x.scale(tau).sub(&a.adjoint_apply(&p)?);
    let x_next = problem.f().resolvent_scaled(tau, &x_arg)?;
    let z_arg = s.z.scale(tau).add(&p);
    let z_next = problem.g().resolvent_scaled(tau, &z_arg)?;
    let y_next = s.y.axpy(lambda, &a.apply(&x_next)?.sub(&z_next));

    Ok(SaddleState { x: x_next, z: z_next, y: y_next, p: Some(p) })
}

/// One block-metric proximal point sweep:
///
/// ```text
/// x' = (df + I/lambda_x)^{-1}( x/lambda_x - A^T y )
/// z' = (dg + I/lambda_z)^{-1}( z/lambda_z + y )
/// y' = y + lambda_y*(2Ax' - Ax - 2z' + z)
/// ```
pub fn vmetric_iterate(
    problem: &SaddleProblem,
    s: &SaddleState,
    lambda_x: f64,
    lambda_z: f64,
    lambda_y: f64,
) -> Result<SaddleState> {
    for (name, v) in [
        ("lambda_x", lambda_x),
        ("lambda_z", lambda_z),
        ("lambda_y", lambda_y),
    ] {
        if v <= 0.0 || !v.is_finite() {
            return Err(Error::NonPositive { name, value: v });
        }
    }
    let a = problem.a();

    let x_arg = s.x.scale(1.0 / lambda_x).sub(&a.adjoint_apply(&s.y)?);
    let x_next = problem.f().resolvent_scaled(1.0 / lambda_x, &x_arg)?;
    let z_arg = s.z.scale(1.0 / lambda_z).add(&s.y);
    let z_next = problem.g().resolvent_scaled(1.0 / lambda_z, &z_arg)?;

    let ax_next = a.apply(&x_next)?;
    let ax = a.apply(&s.x)?;
    let increment = ax_next
        .scale(2.0)
        .sub(&ax)
        .sub(&z_next.scale(2.0))
        .add(&s.z);
    let y_next = s.y.axpy(lambda_y, &increment);

    Ok(SaddleState::new(x_next, z_next, y_next))
}

/// On a fully quadratic instance the stacked operator `T` is affine, so the
/// proximal point step has the closed form `s' = (V + T)^{-1}(V s)`. This
/// computes `|| vmetric_iterate(s) - direct_solve ||` for the metric given
/// by `params`; agreement within 1e-10 is the contract.
///
/// The block-coordinate sweep corresponds to identity coupling, so `params.b`
/// must be the identity.
pub fn ppa_identity_check(
    problem: &SaddleProblem,
    s: &SaddleState,
    params: &MetricParams,
) -> Result<f64> {
    let (bf, wf) = match problem.f().kind() {
        ProxKind::QuadraticDistance { center, weight } => (center.clone(), *weight),
        _ => return Err(Error::RequiresQuadratic { op: "ppa_identity_check" }),
    };
    let (bg, wg) = match problem.g().kind() {
        ProxKind::QuadraticDistance { center, weight } => (center.clone(), *weight),
        _ => return Err(Error::RequiresQuadratic { op: "ppa_identity_check" }),
    };
    let a = problem.a();
    let (n, m) = (a.cols(), a.rows());
    if params.b != LinearMap::identity(m) {
        return Err(Error::InvalidConfig(
            "ppa_identity_check requires identity z-y coupling".into(),
        ));
    }

    let stepped = vmetric_iterate(
        problem,
        s,
        1.0 / params.tau_x,
        1.0 / params.tau_z,
        1.0 / params.tau_y,
    )?;

    let v = build_v(params.clone(), a)?;
    // stacked affine operator: T s = M s + c
    let dim = n + 2 * m;
    let mut m_op = LinearMap::zeros(dim, dim);
    m_op.set_scaled_identity_block(0, n, wf);
    m_op.set_block(0, n + m, &a.transpose());
    m_op.set_scaled_identity_block(n, m, wg);
    m_op.set_block(n, n + m, &LinearMap::identity(m).scale(-1.0));
    m_op.set_block(n + m, 0, &a.scale(-1.0));
    m_op.set_block(n + m, n, &LinearMap::identity(m));

    let mut c = vec![0.0; dim];
    for i in 0..n {
        c[i] = -wf * bf[i];
    }
    for i in 0..m {
        c[n + i] = -wg * bg[i];
    }

    let system = v.assembled().add(&m_op)?;
    let vs = v.assembled().apply(&stack_state(s, n, m)?)?;
    let rhs = Vector::new(
        vs.as_slice()
            .iter()
            .zip(&c)
            .map(|(a, b)| a - b)
            .collect(),
    )?;
    let direct = solve_dense(&system, &rhs, "ppa identity system")?;

    let diff = stack_state(&stepped, n, m)?.sub(&direct);
    Ok(diff.norm())
}

fn stack_state(s: &SaddleState, n: usize, m: usize) -> Result<Vector> {
    if s.x.dim() != n || s.z.dim() != m || s.y.dim() != m {
        return Err(Error::DimensionMismatch {
            context: "stack_state",
            expected: n + 2 * m,
            actual: s.x.dim() + s.z.dim() + s.y.dim(),
        });
    }
    let mut out = Vec::with_capacity(n + 2 * m);
    out.extend_from_slice(s.x.as_slice());
    out.extend_from_slice(s.z.as_slice());
    out.extend_from_slice(s.y.as_slice());
    Vector::from_slice(&out)
}

/// Iterates a kernel from `s0` until the fixed-point residual reaches the
/// tolerance, the budget runs out, or an iterate stops being finite. The
/// trace records KKT residuals, fixed-point residuals, the primal objective,
/// and (when configured) V-distances to a reference point.
pub fn run(
    problem: &SaddleProblem,
    kernel: Kernel,
    config: &SolverConfig,
    s0: SaddleState,
) -> Result<RunOutcome> {
    config.validate(kernel)?;
    if s0.x.dim() != problem.primal_dim()
        || s0.z.dim() != problem.split_dim()
        || s0.y.dim() != problem.split_dim()
    {
        return Err(Error::InvalidConfig(
            "initial state does not match problem dimensions".into(),
        ));
    }

    let metric: Option<MetricV> = if config.record_v_norm {
        match &config.reference_point {
            None => None,
            Some(reference) => {
                if reference.x.dim() != problem.primal_dim()
                    || reference.z.dim() != problem.split_dim()
                {
                    return Err(Error::InvalidConfig(
                        "reference point does not match problem dimensions".into(),
                    ));
                }
                let params = config.steps.metric_params(problem.split_dim());
                let v = build_v(params, problem.a())?;
                if !is_positive_definite(&v)? {
                    return Err(Error::InvalidConfig(
                        "v-norm tracking requires a positive definite metric; \
                         the configured steps sit on or past the certification bound"
                            .into(),
                    ));
                }
                Some(v)
            }
        }
    } else {
        None
    };

    let (lx, lz, ly) = config.steps.as_triple();
    let mut state = s0;
    let mut trace = IterationTrace::default();

    for iter in 1..=config.max_iter {
        let next = match kernel {
            Kernel::ChenTeboulle => ct_iterate(problem, &state, lx)?,
            Kernel::VMetric => vmetric_iterate(problem, &state, lx, lz, ly)?,
        };
        if !next.is_finite() {
            return Ok(RunOutcome { state, trace, stop: StopReason::Diverged });
        }
        let fixed_point_res = next.distance(&state);
        let v_dist = match (&metric, &config.reference_point) {
            (Some(v), Some(reference)) => Some(v_distance(v, &next, reference)?),
            _ => None,
        };
        let kkt = kkt_residual(problem, &next)?;
        // a state can stay finite while its residuals overflow; that is
        // divergence all the same, and the trace stays finite
        let measurements_finite = fixed_point_res.is_finite()
            && kkt.max().is_finite()
            && v_dist.is_none_or(|d| d.is_finite());
        if !measurements_finite {
            return Ok(RunOutcome { state, trace, stop: StopReason::Diverged });
        }
        trace.records.push(TraceRecord {
            iter,
            kkt,
            fixed_point_res,
            primal_obj: problem.primal_objective(&next.x)?,
            v_dist,
        });
        state = next;
        if fixed_point_res <= config.tol_fixed_point {
            return Ok(RunOutcome { state, trace, stop: StopReason::Converged });
        }
    }
    Ok(RunOutcome { state, trace, stop: StopReason::IterLimit })
}
