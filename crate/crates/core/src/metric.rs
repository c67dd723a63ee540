//! The block metric `V`, its positive-definiteness certificate, and the two
//! step-size bounds.
//!
//! With blocks ordered `(x, z, y)` the metric is
//!
//! ```text
//! V = [ tau_x I    0      -A^T ]
//!     [   0     tau_z I    B^T ]
//!     [  -A        B     tau_y I ]
//! ```
//!
//! Its off-diagonal blocks cancel the skew part of the stacked saddle
//! operator, which is what decouples the `x` and `z` resolvent steps. `V` is
//! positive definite iff `tau_x > 0`, `tau_z > 0`, and
//! `tau_y I - tau_x^{-1} A A^T - tau_z^{-1} B B^T` is positive definite:
//! two Schur complement reductions turn the full `(n+2m)` test into an
//! `m x m` eigenvalue problem. For `B = I` and equal `tau = 1/lambda` that
//! criterion is exactly `lambda < 1/sqrt(||A||^2 + 1)`, which improves on
//! the classic `lambda < 1/(2 max(||A||, 1))`.
//!
//! Equality in `lambda = 1/sqrt(||A||^2 + 1)` makes `V` singular, so the
//! boundary is treated as not positive definite throughout.

use crate::error::{Error, Result};
use crate::linalg::{min_eig_sym, LinearMap, Vector};
use crate::saddle::SaddleState;

/// Tolerance below which a negative squared V-norm is attributed to rounding
/// and clamped to zero.
const V_NORM_CLAMP: f64 = 1e-12;

/// Block scalings of the metric. `B` couples the `z` and `y` blocks and
/// defaults to the identity, which is the coupling the block-coordinate
/// algorithm uses.
#[derive(Debug, Clone)]
pub struct MetricParams {
    pub tau_x: f64,
    pub tau_z: f64,
    pub tau_y: f64,
    pub b: LinearMap,
}

impl MetricParams {
    /// Parameters with `B = I` of the given split dimension.
    pub fn with_identity_coupling(tau_x: f64, tau_z: f64, tau_y: f64, split_dim: usize) -> Self {
        Self { tau_x, tau_z, tau_y, b: LinearMap::identity(split_dim) }
    }

    /// Equal diagonal scalings `tau = 1/lambda`, `B = I`: the metric whose
    /// proximal point iteration is the predictor-corrector algorithm.
    pub fn equal_steps(lambda: f64, split_dim: usize) -> Result<Self> {
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::NonPositive { name: "lambda", value: lambda });
        }
        let tau = 1.0 / lambda;
        Ok(Self::with_identity_coupling(tau, tau, tau, split_dim))
    }

    fn check_finite(&self) -> Result<()> {
        if !(self.tau_x.is_finite() && self.tau_z.is_finite() && self.tau_y.is_finite()) {
            return Err(Error::NonFinite { context: "MetricParams" });
        }
        Ok(())
    }
}

/// An assembled metric: the parameters, the operator it was built around,
/// and the dense symmetric `(n+2m) x (n+2m)` matrix.
#[derive(Debug, Clone)]
pub struct MetricV {
    params: MetricParams,
    a: LinearMap,
    assembled: LinearMap,
}

impl MetricV {
    pub fn params(&self) -> &MetricParams {
        &self.params
    }

    pub fn a(&self) -> &LinearMap {
        &self.a
    }

    pub fn assembled(&self) -> &LinearMap {
        &self.assembled
    }

    pub fn primal_dim(&self) -> usize {
        self.a.cols()
    }

    pub fn split_dim(&self) -> usize {
        self.a.rows()
    }
}

/// Assembles the block metric for the operator `A`.
pub fn build_v(params: MetricParams, a: &LinearMap) -> Result<MetricV> {
    params.check_finite()?;
    let (n, m) = (a.cols(), a.rows());
    if params.b.rows() != m || params.b.cols() != m {
        return Err(Error::DimensionMismatch {
            context: "build_v: B must be m x m",
            expected: m,
            actual: params.b.rows().max(params.b.cols()),
        });
    }
    let dim = n + 2 * m;
    let mut v = LinearMap::zeros(dim, dim);
    v.set_scaled_identity_block(0, n, params.tau_x);
    v.set_scaled_identity_block(n, m, params.tau_z);
    v.set_scaled_identity_block(n + m, m, params.tau_y);
    v.set_block(0, n + m, &a.transpose().scale(-1.0));
    v.set_block(n + m, 0, &a.scale(-1.0));
    v.set_block(n, n + m, &params.b.transpose());
    v.set_block(n + m, n, &params.b);
    Ok(MetricV { params, a: a.clone(), assembled: v })
}

/// Positive definiteness of `V` by the double Schur complement reduction:
/// `tau_x > 0`, `tau_z > 0`, and the reduced block
/// `tau_y I - tau_x^{-1} A A^T - tau_z^{-1} B B^T` has a strictly positive
/// smallest eigenvalue. A zero eigenvalue (singular boundary) reports false.
pub fn is_positive_definite(v: &MetricV) -> Result<bool> {
    let p = &v.params;
    if p.tau_x <= 0.0 || p.tau_z <= 0.0 {
        return Ok(false);
    }
    Ok(schur_complement_min_eig(v)? > 0.0)
}

/// Smallest eigenvalue of the Schur complement block
/// `tau_y I - tau_x^{-1} A A^T - tau_z^{-1} B B^T`. Exposed so callers can
/// report the positivity margin, not just the verdict.
pub fn schur_complement_min_eig(v: &MetricV) -> Result<f64> {
    let p = &v.params;
    let m = v.split_dim();
    let aat = v.a.outer_gram();
    let bbt = p.b.outer_gram();
    let mut reduced = LinearMap::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut e = -aat.entry(i, j) / p.tau_x - bbt.entry(i, j) / p.tau_z;
            if i == j {
                e += p.tau_y;
            }
            reduced.set_entry(i, j, e);
        }
    }
    min_eig_sym(&reduced)
}

/// `<V a, b>` over the stacked `(x, z, y)` coordinates.
pub fn v_inner(v: &MetricV, a: &SaddleState, b: &SaddleState) -> Result<f64> {
    let va = apply_metric(v, a)?;
    let sb = stack(v, b)?;
    Ok(va.dot(&sb))
}

/// `||a||_V = sqrt(<V a, a>)`. Squared values in `[-1e-12, 0)` are treated
/// as rounding and clamped to zero; anything more negative means the metric
/// is not positive definite on this vector and is reported as an error.
pub fn v_norm(v: &MetricV, a: &SaddleState) -> Result<f64> {
    let sq = v_inner(v, a, a)?;
    if sq >= 0.0 {
        Ok(sq.sqrt())
    } else if sq >= -V_NORM_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::IndefiniteMetric { value: sq })
    }
}

/// V-distance `||a - b||_V`.
pub fn v_distance(v: &MetricV, a: &SaddleState, b: &SaddleState) -> Result<f64> {
    let diff = SaddleState::new(a.x.sub(&b.x), a.z.sub(&b.z), a.y.sub(&b.y));
    v_norm(v, &diff)
}

fn stack(v: &MetricV, s: &SaddleState) -> Result<Vector> {
    let (n, m) = (v.primal_dim(), v.split_dim());
    if s.x.dim() != n || s.z.dim() != m || s.y.dim() != m {
        return Err(Error::DimensionMismatch {
            context: "metric: state does not match V blocks",
            expected: n + 2 * m,
            actual: s.x.dim() + s.z.dim() + s.y.dim(),
        });
    }
    let mut out = Vec::with_capacity(n + 2 * m);
    out.extend_from_slice(s.x.as_slice());
    out.extend_from_slice(s.z.as_slice());
    out.extend_from_slice(s.y.as_slice());
    Ok(Vector::from_slice(&out).expect("stacked finite state"))
}

fn apply_metric(v: &MetricV, s: &SaddleState) -> Result<Vector> {
    let stacked = stack(v, s)?;
    v.assembled.apply(&stacked)
}

/// The classic step-size bound `1/(2 max(||A||, 1))`; iterations require a
/// step strictly below it.
pub fn stepsize_bound_ct(norm_a: f64) -> f64 {
    0.5 / norm_a.max(1.0)
}

/// The metric-based bound `1/sqrt(||A||^2 + 1)`, strictly larger than the
/// classic bound everywhere.
pub fn stepsize_bound_new(norm_a: f64) -> f64 {
    1.0 / (norm_a * norm_a + 1.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar_metric(tau: f64) -> MetricV {
        let a = LinearMap::diagonal(&[1.0]);
        build_v(MetricParams::with_identity_coupling(tau, tau, tau, 1), &a).unwrap()
    }

    #[test]
    fn assembles_scalar_example() {
        let v = scalar_metric(1.0);
        let expected = [
            [1.0, 0.0, -1.0],
            [0.0, 1.0, 1.0],
            [-1.0, 1.0, 1.0],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                assert_eq!(v.assembled().entry(i, j), *want);
            }
        }
    }

    #[test]
    fn zero_operator_leaves_only_b_coupling() {
        let a = LinearMap::zeros(2, 3);
        let v = build_v(MetricParams::with_identity_coupling(1.0, 2.0, 3.0, 2), &a).unwrap();
        let m = v.assembled();
        // x-y blocks vanish
        for i in 0..3 {
            for j in 5..7 {
                assert_eq!(m.entry(i, j), 0.0);
                assert_eq!(m.entry(j, i), 0.0);
            }
        }
        // z-y coupling is the identity
        assert_eq!(m.entry(3, 5), 1.0);
        assert_eq!(m.entry(6, 4), 1.0);
    }

    #[test]
    fn assembled_metric_is_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = rng.gen_range(1..5);
            let m = rng.gen_range(1..5);
            let a = LinearMap::from_fn(m, n, |_, _| rng.gen_range(-2.0..2.0));
            let b = LinearMap::from_fn(m, m, |_, _| rng.gen_range(-2.0..2.0));
            let params = MetricParams {
                tau_x: rng.gen_range(-2.0..4.0),
                tau_z: rng.gen_range(-2.0..4.0),
                tau_y: rng.gen_range(-2.0..4.0),
                b,
            };
            let v = build_v(params, &a).unwrap();
            let asm = v.assembled();
            for i in 0..asm.rows() {
                for j in 0..asm.cols() {
                    assert_eq!(asm.entry(i, j), asm.entry(j, i));
                }
            }
        }
    }

    #[test]
    fn build_rejects_mismatched_coupling() {
        let a = LinearMap::zeros(2, 3);
        let params = MetricParams {
            tau_x: 1.0,
            tau_z: 1.0,
            tau_y: 1.0,
            b: LinearMap::identity(3),
        };
        assert!(matches!(
            build_v(params, &a),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn scalar_schur_check() {
        // tau = 2, ||A|| = ||B|| = 1: 2 > 1/2 + 1/2
        assert!(is_positive_definite(&scalar_metric(2.0)).unwrap());
        // tau = 1: 1 < 2
        assert!(!is_positive_definite(&scalar_metric(1.0)).unwrap());
        // and the assembled matrices carry the same signs in full spectrum
        assert!(min_eig_sym(scalar_metric(2.0).assembled()).unwrap() > 0.0);
        assert!(min_eig_sym(scalar_metric(1.0).assembled()).unwrap() < 0.0);
    }

    #[test]
    fn boundary_counts_as_not_positive_definite() {
        // an exactly representable boundary: 1/2 + 1/2 = tau_y = 1
        let a = LinearMap::diagonal(&[1.0]);
        let v = build_v(MetricParams::with_identity_coupling(2.0, 2.0, 1.0, 1), &a).unwrap();
        assert_eq!(schur_complement_min_eig(&v).unwrap(), 0.0);
        assert!(!is_positive_definite(&v).unwrap());

        // the equal-scaling boundary tau = sqrt(2) is irrational, so in
        // floats it lands inside the ambiguity band around zero
        let v = scalar_metric(2.0_f64.sqrt());
        assert!(schur_complement_min_eig(&v).unwrap().abs() < 1e-12);
    }

    #[test]
    fn negative_diagonal_scalings_fail_fast() {
        let a = LinearMap::identity(1);
        for (tx, tz) in [(-1.0, 1.0), (1.0, -1.0), (0.0, 1.0)] {
            let v = build_v(MetricParams::with_identity_coupling(tx, tz, 10.0, 1), &a).unwrap();
            assert!(!is_positive_definite(&v).unwrap());
        }
    }

    #[test]
    fn schur_verdict_matches_full_spectrum_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        let mut checked = 0;
        for _ in 0..300 {
            let n = rng.gen_range(1..5);
            let m = rng.gen_range(1..5);
            let a = LinearMap::from_fn(m, n, |_, _| rng.gen_range(-1.5..1.5));
            let b = LinearMap::from_fn(m, m, |_, _| rng.gen_range(-1.5..1.5));
            let params = MetricParams {
                tau_x: rng.gen_range(0.05..3.0),
                tau_z: rng.gen_range(0.05..3.0),
                tau_y: rng.gen_range(0.05..6.0),
                b,
            };
            let v = build_v(params, &a).unwrap();
            let full_min = min_eig_sym(v.assembled()).unwrap();
            if full_min.abs() < 1e-12 {
                continue; // numerically ambiguous boundary
            }
            checked += 1;
            assert_eq!(
                is_positive_definite(&v).unwrap(),
                full_min > 0.0,
                "Schur verdict disagrees with full spectrum (min eig {full_min})"
            );
        }
        assert!(checked > 200, "too few unambiguous samples: {checked}");
    }

    #[test]
    fn v_inner_reduces_to_euclidean_for_identity_blocks() {
        let a = LinearMap::zeros(2, 2);
        let params = MetricParams {
            tau_x: 1.0,
            tau_z: 1.0,
            tau_y: 1.0,
            b: LinearMap::zeros(2, 2),
        };
        let v = build_v(params, &a).unwrap();
        let s = SaddleState::new(
            Vector::from_slice(&[1.0, 2.0]).unwrap(),
            Vector::from_slice(&[3.0, 4.0]).unwrap(),
            Vector::from_slice(&[5.0, 6.0]).unwrap(),
        );
        let sq: f64 = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0].iter().map(|v| v * v).sum();
        assert!((v_norm(&v, &s).unwrap() - sq.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn v_inner_is_symmetric_and_cauchy_schwarz_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..50 {
            let n = rng.gen_range(1..4);
            let m = rng.gen_range(1..4);
            let a = LinearMap::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
            let norm_a = a.operator_norm(1e-10, 10_000).unwrap();
            // comfortably inside the positive definite region
            let tau = 2.0 * (norm_a * norm_a + 1.0).sqrt();
            let v = build_v(MetricParams::with_identity_coupling(tau, tau, tau, m), &a).unwrap();
            assert!(is_positive_definite(&v).unwrap());
            let state = |rng: &mut ChaCha8Rng| {
                SaddleState::new(
                    Vector::from_raw((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()),
                    Vector::from_raw((0..m).map(|_| rng.gen_range(-2.0..2.0)).collect()),
                    Vector::from_raw((0..m).map(|_| rng.gen_range(-2.0..2.0)).collect()),
                )
            };
            let sa = state(&mut rng);
            let sb = state(&mut rng);
            let iab = v_inner(&v, &sa, &sb).unwrap();
            let iba = v_inner(&v, &sb, &sa).unwrap();
            assert!((iab - iba).abs() <= 1e-12 * (1.0 + iab.abs()));
            let na = v_norm(&v, &sa).unwrap();
            let nb = v_norm(&v, &sb).unwrap();
            assert!(iab.abs() <= na * nb + 1e-10);
        }
    }

    #[test]
    fn v_norm_flags_indefinite_squares() {
        // tau_y far too small: V is indefinite and some vector certifies it
        let a = LinearMap::identity(1);
        let v = build_v(MetricParams::with_identity_coupling(1.0, 1.0, 0.1, 1), &a).unwrap();
        let s = SaddleState::new(
            Vector::from_slice(&[1.0]).unwrap(),
            Vector::from_slice(&[-1.0]).unwrap(),
            Vector::from_slice(&[1.0]).unwrap(),
        );
        assert!(matches!(
            v_norm(&v, &s),
            Err(Error::IndefiniteMetric { .. })
        ));
    }

    #[test]
    fn stepsize_bounds_match_closed_forms() {
        assert_eq!(stepsize_bound_ct(1.0), 0.5);
        assert_eq!(stepsize_bound_ct(2.0), 0.25);
        assert_eq!(stepsize_bound_ct(0.5), 0.5);
        assert!((stepsize_bound_new(1.0) - 1.0 / 2.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(stepsize_bound_new(0.0), 1.0);
        assert!((stepsize_bound_new(2.0) - 1.0 / 5.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn new_bound_strictly_dominates_classic_bound() {
        let mut t = 0.0;
        while t <= 10.0 {
            assert!(
                stepsize_bound_new(t) > stepsize_bound_ct(t),
                "dominance fails at ||A|| = {t}"
            );
            t += 0.01;
        }
    }

    #[test]
    fn pd_flips_exactly_at_the_new_bound() {
        // with B = I and tau = 1/lambda, V is PD iff lambda < 1/sqrt(||A||^2+1)
        let mut rng = ChaCha8Rng::seed_from_u64(808);
        for _ in 0..10 {
            let n = rng.gen_range(1..4);
            let m = rng.gen_range(1..4);
            let a = LinearMap::from_fn(m, n, |_, _| rng.gen_range(-1.5..1.5));
            let norm_a = a.operator_norm(1e-12, 10_000).unwrap();
            let bound = stepsize_bound_new(norm_a);
            for factor in [0.5, 0.9, 0.999, 1.001, 1.1, 2.0] {
                let lambda = factor * bound;
                let params = MetricParams::equal_steps(lambda, m).unwrap();
                let v = build_v(params, &a).unwrap();
                assert_eq!(
                    is_positive_definite(&v).unwrap(),
                    lambda < bound,
                    "PD mismatch at factor {factor} (lambda {lambda}, bound {bound})"
                );
            }
        }
    }
}
