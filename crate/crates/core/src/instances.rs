//! Seeded desk-scale problem generators for tests, sweeps, and the CLI.
//!
//! Every generator is deterministic in its seed so traces and test fixtures
//! are reproducible byte for byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{LinearMap, Vector, OP_NORM_MAX_ITER, OP_NORM_TOL};
use crate::prox::ProxFunction;
use crate::saddle::{SaddleProblem, SaddleState};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> LinearMap {
    LinearMap::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    Vector::new((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .expect("bounded samples are finite")
}

pub fn random_state(rng: &mut ChaCha8Rng, primal_dim: usize, split_dim: usize) -> SaddleState {
    SaddleState::new(
        random_vector(rng, primal_dim),
        random_vector(rng, split_dim),
        random_vector(rng, split_dim),
    )
}

/// An l1-regularized least-squares instance
/// `min mu*||x||_1 + (1/2)||Mx - b||^2` cast as the split problem with
/// `f = mu*||.||_1`, `g = (1/2)||. - b||^2`, `A = M`.
#[derive(Debug, Clone)]
pub struct LassoInstance {
    pub problem: SaddleProblem,
    pub design: LinearMap,
    pub target: Vector,
    pub mu: f64,
}

/// Seeded lasso instance. With `unit_norm` the design matrix is rescaled so
/// its operator norm is 1, which pins the step-size bounds at 1/2 and
/// 1/sqrt(2).
pub fn lasso_instance(
    seed: u64,
    rows: usize,
    cols: usize,
    mu: f64,
    unit_norm: bool,
) -> Result<LassoInstance> {
    let mut rng = seeded_rng(seed);
    let mut design = random_matrix(&mut rng, rows, cols);
    if unit_norm {
        let norm = design.operator_norm(OP_NORM_TOL, OP_NORM_MAX_ITER)?;
        design = design.scale(1.0 / norm);
    }
    let target = random_vector(&mut rng, rows).scale(2.0);
    let f = ProxFunction::l1(cols, mu)?;
    let g = ProxFunction::quadratic_distance(target.clone(), 1.0)?;
    let problem = SaddleProblem::new(f, g, design.clone())?;
    Ok(LassoInstance { problem, design, target, mu })
}

/// A fully quadratic instance
/// `min (wf/2)||x - bf||^2 + (wg/2)||z - bg||^2 s.t. Ax = z`.
#[derive(Debug, Clone)]
pub struct QuadraticInstance {
    pub problem: SaddleProblem,
    pub f_center: Vector,
    pub f_weight: f64,
    pub g_center: Vector,
    pub g_weight: f64,
}

pub fn quadratic_instance(seed: u64, rows: usize, cols: usize) -> Result<QuadraticInstance> {
    let mut rng = seeded_rng(seed);
    let a = random_matrix(&mut rng, rows, cols);
    let f_center = random_vector(&mut rng, cols);
    let g_center = random_vector(&mut rng, rows);
    let f_weight = rng.gen_range(0.2..2.0);
    let g_weight = rng.gen_range(0.2..2.0);
    let f = ProxFunction::quadratic_distance(f_center.clone(), f_weight)?;
    let g = ProxFunction::quadratic_distance(g_center.clone(), g_weight)?;
    let problem = SaddleProblem::new(f, g, a)?;
    Ok(QuadraticInstance { problem, f_center, f_weight, g_center, g_weight })
}

/// A problem with `f` and `g` drawn across the whole prox catalog; used by
/// the kernel-equivalence checks, which are pure algebra and hold for any
/// catalog pair.
pub fn catalog_problem(seed: u64, cols: usize, rows: usize) -> Result<SaddleProblem> {
    let mut rng = seeded_rng(seed);
    let a = random_matrix(&mut rng, rows, cols);
    let f = catalog_function(&mut rng, cols, seed as usize)?;
    let g = catalog_function(&mut rng, rows, (seed as usize) / 5 + 3)?;
    SaddleProblem::new(f, g, a)
}

fn catalog_function(rng: &mut ChaCha8Rng, dim: usize, which: usize) -> Result<ProxFunction> {
    Ok(match which % 5 {
        0 => ProxFunction::l1(dim, rng.gen_range(0.1..2.0))?,
        1 => ProxFunction::quadratic_distance(random_vector(rng, dim), rng.gen_range(0.2..2.0))?,
        2 => ProxFunction::indicator_point(random_vector(rng, dim)),
        3 => {
            let lower: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..0.0)).collect();
            let upper: Vec<f64> = lower.iter().map(|l| l + rng.gen_range(0.2..2.0)).collect();
            ProxFunction::indicator_box(
                Vector::new(lower).expect("finite"),
                Vector::new(upper).expect("finite"),
            )?
        }
        _ => ProxFunction::zero(dim),
    })
}
