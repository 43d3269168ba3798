//! Asymptotic predictions: equal-amplitude patterns, two-amplitude
//! patterns from the interaction quadratic, and the γ-median position
//! for spatially varying sources.

use std::path::Path;

use hotspot_core::{
    anisotropic_prediction, check_existence_scale, check_nondegenerate_scale, solve_asymmetric,
    symmetric_prediction, AsymmetricClass, ModelParams, SpikePattern,
};

use crate::config::{ConfigFile, Mode};
use crate::fail::Failure;
use crate::report::{emit, ParamsEcho, PatternEcho, Predicted, PredictionReport, RootEcho};

/// What to predict: the mode plus its spike-count arguments.
#[derive(Debug, Clone, Copy)]
pub struct Target {
    pub mode: Mode,
    /// Spike count for equal-amplitude patterns.
    pub k: usize,
    /// Tall-spike count for two-amplitude patterns.
    pub k1: usize,
    /// Short-spike count for two-amplitude patterns.
    pub k2: usize,
}

pub fn classification_label(class: AsymmetricClass) -> &'static str {
    match class {
        AsymmetricClass::UniqueSolution => "unique-solution",
        AsymmetricClass::TwoSolutions => "two-solutions",
        AsymmetricClass::NoSolution => "no-solution",
        AsymmetricClass::DegenerateSymmetric => "degenerate-symmetric",
    }
}

/// Builds the mode's prediction block.  The returned pattern is the
/// one a steady-state run should reproduce; `None` when the theory
/// provides no pattern (no admissible root, or k₁+k₂ patterns whose
/// layout is not pinned down by two amplitudes alone).
pub fn predicted_section(
    target: &Target,
    p: &ModelParams,
) -> Result<(Predicted, Option<SpikePattern>), Failure> {
    match target.mode {
        Mode::Symmetric => {
            let pred = symmetric_prediction(target.k, p).map_err(Failure::config)?;
            let section = Predicted {
                pattern: Some(PatternEcho::from(&pred.pattern)),
                v0: Some(pred.v0),
                ..Predicted::default()
            };
            Ok((section, Some(pred.pattern)))
        }
        Mode::Asymmetric => {
            let sol = solve_asymmetric(target.k1, target.k2, p).map_err(Failure::config)?;
            let section = Predicted {
                pattern: sol.pattern.as_ref().map(PatternEcho::from),
                classification: Some(classification_label(sol.classification)),
                c: Some(sol.c_value),
                roots: Some(
                    sol.roots
                        .iter()
                        .map(|r| RootEcho {
                            z: r.z,
                            v_small: r.v_small,
                            v_large: r.v_large,
                        })
                        .collect(),
                ),
                existence_scale_ok: Some(check_existence_scale(p).map_err(Failure::config)?),
                nondegenerate_scale_ok: Some(
                    check_nondegenerate_scale(p).map_err(Failure::config)?,
                ),
                ..Predicted::default()
            };
            Ok((section, sol.pattern))
        }
        Mode::Anisotropic => {
            let pred = anisotropic_prediction(p).map_err(Failure::config)?;
            let pattern = SpikePattern::new(vec![pred.position], vec![pred.v0], p.half_length)
                .map_err(Failure::config)?;
            let section = Predicted {
                pattern: Some(PatternEcho::from(&pattern)),
                v0: Some(pred.v0),
                position: Some(pred.position),
                gamma_mass: Some(pred.gamma_mass),
                ..Predicted::default()
            };
            Ok((section, Some(pattern)))
        }
    }
}

/// True when the prediction block records that no pattern exists.
pub fn is_no_solution(section: &Predicted) -> bool {
    section.classification == Some("no-solution")
}

pub fn cmd_predict(config: &Path, target: &Target, out: Option<&Path>) -> Result<(), Failure> {
    let cfg = ConfigFile::load(config)?;
    let p = cfg.to_params()?;
    let (section, _) = predicted_section(target, &p)?;
    let no_solution = is_no_solution(&section);
    let report = PredictionReport::new("predict", target.mode, ParamsEcho::from_config(&cfg), section);
    emit(&report, out)?;
    if no_solution {
        return Err(Failure::NoSolution(
            "the amplitude quadratic has no admissible root here".to_string(),
        ));
    }
    Ok(())
}
