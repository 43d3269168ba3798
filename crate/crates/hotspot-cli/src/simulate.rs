//! Time integration front end: build initial data, march the IMEX
//! stepper, write CSV snapshots, and report what the field settled on.

use std::path::{Path, PathBuf};

use hotspot_core::{measure_spikes_with_threshold, run_to_steady_from, FieldState, ModelParams, NewtonSeed};
use serde::Serialize;

use crate::config::{ConfigFile, InitialSpec, Mode};
use crate::csvio::write_snapshot;
use crate::fail::Failure;
use crate::predict::{is_no_solution, predicted_section, Target};
use crate::report::{emit, Measured, ParamsEcho, SCHEMA};

#[derive(Debug, Serialize)]
pub struct SimulationReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub params: ParamsEcho,
    pub initial: String,
    pub t_final: f64,
    pub steps: usize,
    pub reached_tol: bool,
    pub convergence_metric: f64,
    pub snapshots: Vec<String>,
    pub measured: Measured,
}

/// Initial data per the config's `[initial]` table, with a short label
/// for the report.
pub fn build_initial(
    spec: &InitialSpec,
    p: &ModelParams,
    config_dir: &Path,
) -> Result<(FieldState, String), Failure> {
    match spec {
        InitialSpec::Uniform {
            spike_count,
            amplitude,
        } => {
            let mut state = p.uniform_steady_state().map_err(|_| {
                Failure::Config(
                    "uniform initial data needs constant A0 and gamma; \
                     use an ansatz or file start for varying coefficients"
                        .to_string(),
                )
            })?;
            let k = *spike_count as f64;
            let l = p.half_length;
            for (a, &x) in state.a.iter_mut().zip(p.grid().nodes()) {
                *a *= 1.0 + amplitude * (std::f64::consts::PI * k * x / l).cos();
            }
            Ok((
                state,
                format!("uniform+perturbation (K = {spike_count}, amplitude = {amplitude})"),
            ))
        }
        InitialSpec::Ansatz { mode, k, k1, k2 } => {
            let target = Target {
                mode: *mode,
                k: *k,
                k1: *k1,
                k2: *k2,
            };
            let (section, pattern) = predicted_section(&target, p)?;
            let Some(pattern) = pattern else {
                if is_no_solution(&section) {
                    return Err(Failure::NoSolution(
                        "the requested ansatz has no admissible amplitude pair here".to_string(),
                    ));
                }
                return Err(Failure::Config(
                    "ansatz initial data needs a pattern with pinned positions".to_string(),
                ));
            };
            let seed = NewtonSeed::from_pattern(&pattern, p).map_err(Failure::config)?;
            let state = seed.to_state(p).map_err(Failure::config)?;
            let label = match mode {
                Mode::Symmetric => format!("ansatz (symmetric, K = {k})"),
                Mode::Asymmetric => format!("ansatz (asymmetric, k1 = {k1}, k2 = {k2})"),
                Mode::Anisotropic => "ansatz (anisotropic)".to_string(),
            };
            Ok((state, label))
        }
        InitialSpec::File { path } => {
            let resolved = if Path::new(path).is_absolute() {
                PathBuf::from(path)
            } else {
                config_dir.join(path)
            };
            let state = crate::csvio::read_snapshot(&resolved, &p.grid())?;
            Ok((state, format!("file ({})", resolved.display())))
        }
    }
}

fn snapshot_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("snap_{index:04}.csv"))
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_simulate(
    config: &Path,
    t_max: f64,
    dt0: Option<f64>,
    snap_every: usize,
    tol: f64,
    threshold: f64,
    out_dir: &Path,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let cfg = ConfigFile::load(config)?;
    let p = cfg.to_params()?;
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(Failure::Config(format!(
            "t-max must be finite and nonnegative, got {t_max}"
        )));
    }
    let config_dir = config.parent().unwrap_or_else(|| Path::new("."));
    let (initial, label) = build_initial(&cfg.initial(), &p, config_dir)?;
    let grid = p.require_resolved_grid().map_err(Failure::config)?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| Failure::io(&format!("cannot create {}", out_dir.display()), e))?;
    let first = snapshot_path(out_dir, 0);
    write_snapshot(&first, &initial, &grid)?;

    let (states, steps, reached_tol, metric) = if t_max == 0.0 {
        (vec![initial.clone()], 0, false, f64::INFINITY)
    } else {
        match run_to_steady_from(&initial, &p, t_max, tol, snap_every, dt0) {
            Ok(run) => (run.states, run.steps, run.reached_tol, run.convergence_metric),
            Err(hotspot_core::CoreError::Diverged { max_value, t }) => {
                return Err(Failure::Divergence(format!(
                    "field exceeded {max_value:.3e} at t = {t:.6}; last stable snapshot: {}",
                    first.display()
                )));
            }
            Err(e) => return Err(Failure::config(e)),
        }
    };

    let mut snapshots = Vec::with_capacity(states.len());
    for (i, state) in states.iter().enumerate() {
        let path = snapshot_path(out_dir, i);
        if i > 0 {
            write_snapshot(&path, state, &grid)?;
        }
        snapshots.push(path.display().to_string());
    }

    let final_state = states.last().expect("at least the initial state");
    let spikes = measure_spikes_with_threshold(final_state, &p, threshold).map_err(Failure::config)?;
    let report = SimulationReport {
        schema: SCHEMA,
        command: "simulate",
        params: ParamsEcho::from_config(&cfg),
        initial: label,
        t_final: final_state.time,
        steps,
        reached_tol,
        convergence_metric: metric,
        snapshots,
        measured: Measured {
            positions: spikes.pattern.positions().to_vec(),
            v_amplitudes: spikes.pattern.v_amplitudes().to_vec(),
            boundary_clamped: spikes.boundary_clamped,
            threshold,
            newton: None,
        },
    };
    emit(&report, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use hotspot_core::CoefficientField;

    fn params() -> ModelParams {
        ModelParams {
            half_length: 2.0,
            epsilon: 0.1,
            d_hat: 1.0,
            a0: CoefficientField::Constant(1.0),
            gamma: CoefficientField::Constant(2.0),
            grid_n: 320,
        }
    }

    #[test]
    fn uniform_initial_applies_the_cosine_perturbation() {
        let spec = InitialSpec::Uniform {
            spike_count: 2,
            amplitude: 0.05,
        };
        let (state, label) = build_initial(&spec, &params(), Path::new(".")).unwrap();
        // At x = −L the mode cos(πK x/L) = cos(−2π) = 1.
        let abar = 3.0;
        assert!((state.a[0] - abar * 1.05).abs() < 1e-12);
        assert!(label.contains("K = 2"));
        // ρ is left at the uniform level.
        assert!((state.rho[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ansatz_initial_is_a_spike_profile() {
        let spec = InitialSpec::Ansatz {
            mode: Mode::Symmetric,
            k: 1,
            k1: 1,
            k2: 1,
        };
        let (state, _) = build_initial(&spec, &params(), Path::new(".")).unwrap();
        let peak = state.a.iter().cloned().fold(f64::MIN, f64::max);
        assert!(peak > 5.0, "ansatz peak should tower over the background");
    }

    #[test]
    fn varying_coefficients_reject_uniform_initial_data() {
        let mut p = params();
        p.gamma = CoefficientField::Affine {
            offset: 2.0,
            slope: 0.1,
        };
        let spec = InitialSpec::Uniform {
            spike_count: 1,
            amplitude: 0.05,
        };
        let err = build_initial(&spec, &p, Path::new(".")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
