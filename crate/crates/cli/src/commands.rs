//! The three subcommands: solve, bounds, sweep.
//!
//! All numeric CSV fields are serialized with 17 significant digits so
//! traces round-trip doubles exactly and runs are byte-stable.

use std::io::Write;
use std::path::{Path, PathBuf};

use proxsaddle::solver::IterationTrace;
use proxsaddle::{
    build_v, is_positive_definite, kkt_residual, run, stepsize_bound_ct, stepsize_bound_new,
    SaddleState, SolverConfig, StepSizes, StopReason,
};

use crate::config::{build_run, load_config};

/// Exit codes: 0 converged, 1 config/usage error, 2 iteration limit,
/// 3 diverged.
pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_CONFIG_ERROR: i32 = 1;
pub const EXIT_ITER_LIMIT: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v > 0.0 {
        "inf".to_string()
    } else if v < 0.0 {
        "-inf".to_string()
    } else {
        "nan".to_string()
    }
}

pub fn cmd_solve(
    config_path: &Path,
    output_flag: Option<&Path>,
    quiet: bool,
) -> Result<i32, String> {
    let config = load_config(config_path)?;
    let built = build_run(&config)?;
    let output: PathBuf = match output_flag {
        Some(p) => p.to_path_buf(),
        None => built.output.clone().ok_or(
            "no trace destination: set run.output in the config or pass --output",
        )?,
    };

    let solver_config = SolverConfig::new(built.steps, built.max_iter, built.tol);
    let s0 = SaddleState::zeros(built.problem.primal_dim(), built.problem.split_dim());
    let outcome = run(&built.problem, built.kernel, &solver_config, s0)
        .map_err(|e| format!("solver rejected the configuration: {e}"))?;

    write_trace(&output, &outcome.trace)
        .map_err(|e| format!("cannot write trace {}: {e}", output.display()))?;

    if !quiet {
        let residual = kkt_residual(&built.problem, &outcome.state)
            .map_err(|e| format!("residual evaluation failed: {e}"))?;
        println!("stop: {} after {} iterations", outcome.stop, outcome.trace.len());
        println!(
            "kkt: r_f={:.3e} r_g={:.3e} r_c={:.3e} (max {:.3e})",
            residual.r_f,
            residual.r_g,
            residual.r_c,
            residual.max()
        );
        println!("trace: {}", output.display());
    }

    Ok(match outcome.stop {
        StopReason::Converged => EXIT_CONVERGED,
        StopReason::IterLimit => EXIT_ITER_LIMIT,
        StopReason::Diverged => EXIT_DIVERGED,
    })
}

fn write_trace(path: &Path, trace: &IterationTrace) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "iter,r_f,r_g,r_c,fixed_point_res,primal_obj,v_dist")?;
    for record in &trace.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            record.iter,
            fmt_f64(record.kkt.r_f),
            fmt_f64(record.kkt.r_g),
            fmt_f64(record.kkt.r_c),
            fmt_f64(record.fixed_point_res),
            fmt_f64(record.primal_obj),
            record.v_dist.map(fmt_f64).unwrap_or_default(),
        )?;
    }
    out.flush()
}

pub fn cmd_bounds(
    start: f64,
    stop: f64,
    step: f64,
    output_flag: Option<&Path>,
) -> Result<i32, String> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err("bounds grid must be finite".into());
    }
    if start < 0.0 {
        return Err(format!("bounds grid start must be >= 0, got {start}"));
    }
    if step <= 0.0 {
        return Err(format!("bounds grid step must be > 0, got {step}"));
    }
    if stop < start {
        return Err(format!("bounds grid is empty: stop {stop} < start {start}"));
    }

    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let mut text = String::from("norm_a,bound_ct,bound_new\n");
    for i in 0..count {
        let norm_a = start + i as f64 * step;
        let classic = stepsize_bound_ct(norm_a);
        let improved = stepsize_bound_new(norm_a);
        debug_assert!(improved > classic);
        text.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(norm_a),
            fmt_f64(classic),
            fmt_f64(improved)
        ));
    }
    emit(output_flag, &text)?;
    Ok(EXIT_CONVERGED)
}

pub fn cmd_sweep(
    config_path: &Path,
    lambda_args: &[String],
    output_flag: Option<&Path>,
    quiet: bool,
) -> Result<i32, String> {
    let lambdas = parse_lambda_grid(lambda_args)?;
    let config = load_config(config_path)?;
    let built = build_run(&config)?;

    let mut text = String::from("lambda,pd_certified,stop_reason,iterations,final_kkt_max\n");
    for &lambda in &lambdas {
        let steps = StepSizes::Equal(lambda);
        let metric = build_v(steps.metric_params(built.problem.split_dim()), built.problem.a())
            .map_err(|e| format!("metric assembly failed: {e}"))?;
        let certified = is_positive_definite(&metric)
            .map_err(|e| format!("positive definiteness test failed: {e}"))?;

        let solver_config = SolverConfig::new(steps, built.max_iter, built.tol);
        let s0 = SaddleState::zeros(built.problem.primal_dim(), built.problem.split_dim());
        let outcome = run(&built.problem, built.kernel, &solver_config, s0)
            .map_err(|e| format!("solver rejected lambda {lambda}: {e}"))?;
        let residual = kkt_residual(&built.problem, &outcome.state)
            .map_err(|e| format!("residual evaluation failed: {e}"))?;

        text.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(lambda),
            certified,
            outcome.stop,
            outcome.trace.len(),
            fmt_f64(residual.max()),
        ));
        if !quiet && output_flag.is_some() {
            eprintln!(
                "lambda {lambda}: pd={certified} {} in {} iterations",
                outcome.stop,
                outcome.trace.len()
            );
        }
    }
    emit(output_flag, &text)?;
    Ok(EXIT_CONVERGED)
}

fn parse_lambda_grid(args: &[String]) -> Result<Vec<f64>, String> {
    let mut grid = Vec::new();
    for arg in args {
        for piece in arg.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            let value: f64 = piece
                .parse()
                .map_err(|_| format!("invalid lambda {piece:?} in sweep grid"))?;
            if value <= 0.0 || !value.is_finite() {
                return Err(format!("sweep lambdas must be > 0, got {value}"));
            }
            grid.push(value);
        }
    }
    if grid.is_empty() {
        return Err("sweep needs a non-empty lambda grid".into());
    }
    Ok(grid)
}

fn emit(output_flag: Option<&Path>, text: &str) -> Result<(), String> {
    match output_flag {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
