//! Steady-state refinement: seed Newton from the asymptotic pattern,
//! converge, re-measure, and report prediction errors.

use std::path::Path;

use hotspot_core::{
    measure_spikes_with_threshold, newton_steady, ModelParams, NewtonSeed, SpikePattern,
};

use crate::config::{ConfigFile, Mode};
use crate::fail::Failure;
use crate::predict::{is_no_solution, predicted_section, Target};
use crate::report::{
    emit, spike_errors, Measured, NewtonEcho, ParamsEcho, PredictionReport,
};

/// Detection threshold suited to the mode: two-amplitude patterns have
/// a short spike far below the tall one, so they need a low bar.
pub fn default_threshold(mode: Mode) -> f64 {
    match mode {
        Mode::Asymmetric => 0.05,
        Mode::Symmetric | Mode::Anisotropic => 0.25,
    }
}

pub struct SteadyOutcome {
    pub measured: Measured,
    pub pattern: SpikePattern,
    pub converged: bool,
}

/// Newton from a predicted pattern, then spike measurement on the
/// converged state.
pub fn refine_and_measure(
    pattern: &SpikePattern,
    p: &ModelParams,
    threshold: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SteadyOutcome, Failure> {
    let seed = NewtonSeed::from_pattern(pattern, p).map_err(Failure::config)?;
    let result = newton_steady(&seed, p, tol, max_iter).map_err(Failure::config)?;
    let spikes =
        measure_spikes_with_threshold(&result.state, p, threshold).map_err(Failure::config)?;
    let measured = Measured {
        positions: spikes.pattern.positions().to_vec(),
        v_amplitudes: spikes.pattern.v_amplitudes().to_vec(),
        boundary_clamped: spikes.boundary_clamped,
        threshold,
        newton: Some(NewtonEcho::from(&result)),
    };
    Ok(SteadyOutcome {
        measured,
        pattern: spikes.pattern,
        converged: result.converged,
    })
}

pub fn cmd_steady(
    config: &Path,
    target: &Target,
    threshold: Option<f64>,
    tol: f64,
    max_iter: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let cfg = ConfigFile::load(config)?;
    let p = cfg.to_params()?;
    let (section, predicted) = predicted_section(target, &p)?;
    let no_solution = is_no_solution(&section);
    let mut report =
        PredictionReport::new("steady", target.mode, ParamsEcho::from_config(&cfg), section);

    let Some(predicted) = predicted else {
        if no_solution {
            emit(&report, out)?;
            return Err(Failure::NoSolution(
                "no admissible pattern to refine".to_string(),
            ));
        }
        return Err(Failure::Config(
            "this spike-count combination fixes amplitudes but not positions; \
             only one tall and one short spike can seed a steady solve"
                .to_string(),
        ));
    };

    let threshold = threshold.unwrap_or_else(|| default_threshold(target.mode));
    let outcome = refine_and_measure(&predicted, &p, threshold, tol, max_iter)?;
    let (errors, note) = spike_errors(&outcome.pattern, &predicted, p.half_length);
    let converged = outcome.converged;
    let residual = outcome
        .measured
        .newton
        .as_ref()
        .map(|n| n.residual_norm)
        .unwrap_or(f64::NAN);
    report.measured = Some(outcome.measured);
    report.errors = Some(errors);
    report.verdict = Some(if converged { "pass" } else { "fail" });
    if let Some(note) = note {
        report.notes = Some(vec![note]);
    }
    emit(&report, out)?;
    if !converged {
        return Err(Failure::Validation(format!(
            "steady solve stalled at residual {residual:.3e} after {max_iter} iterations"
        )));
    }
    Ok(())
}
