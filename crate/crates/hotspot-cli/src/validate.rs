//! Asymptotic-accuracy validation: rerun the steady solve over a
//! descending ε list and check that measurements close in on the
//! predicted amplitudes and positions.

use std::path::Path;

use hotspot_core::ModelParams;

use crate::config::{ConfigFile, Mode};
use crate::fail::Failure;
use crate::predict::{predicted_section, Target};
use crate::report::{emit, ParamsEcho, PredictionReport, RunEcho, TrendPoint};
use crate::steady::{default_threshold, refine_and_measure};

/// Cells needed to resolve spikes of width ε on (−L, L): h ≤ ε/8.
pub fn cells_for(half_length: f64, epsilon: f64) -> usize {
    (16.0 * half_length / epsilon).ceil().max(16.0) as usize
}

/// The list must be finite, positive, and strictly descending, so the
/// trend rows read "ε shrinking, error shrinking".
fn check_descending(eps_list: &[f64]) -> Result<(), Failure> {
    if eps_list.is_empty() {
        return Err(Failure::Config("eps-list must name at least one ε".to_string()));
    }
    for &e in eps_list {
        if !(e > 0.0) || !e.is_finite() {
            return Err(Failure::Config(format!(
                "eps-list entries must be positive and finite, got {e}"
            )));
        }
    }
    for pair in eps_list.windows(2) {
        if pair[1] >= pair[0] {
            return Err(Failure::Config(format!(
                "eps-list must be strictly descending, got {} before {}",
                pair[0], pair[1]
            )));
        }
    }
    Ok(())
}

struct EpsOutcome {
    run: RunEcho,
    trend: TrendPoint,
    gate_ok: bool,
    notes: Vec<String>,
}

/// One steady solve at a fixed ε, with the mode's scalar trend error.
fn run_one(base: &ModelParams, target: &Target, epsilon: f64) -> Result<EpsOutcome, Failure> {
    let p = ModelParams {
        epsilon,
        grid_n: cells_for(base.half_length, epsilon),
        ..base.clone()
    };
    let (_, predicted) = predicted_section(target, &p)?;
    let Some(predicted) = predicted else {
        return Ok(EpsOutcome {
            run: RunEcho {
                epsilon,
                grid_n: p.grid_n,
                newton: crate::report::NewtonEcho {
                    iterations: 0,
                    converged: false,
                    residual_norm: f64::INFINITY,
                    condition_estimate: f64::INFINITY,
                },
                positions: Vec::new(),
                v_amplitudes: Vec::new(),
            },
            trend: TrendPoint {
                epsilon,
                error: None,
                converged: false,
            },
            gate_ok: false,
            notes: vec![format!("ε = {epsilon}: no predicted pattern to refine")],
        });
    };

    let threshold = default_threshold(target.mode);
    let outcome = refine_and_measure(&predicted, &p, threshold, 1e-6, 60)?;
    let measured = &outcome.pattern;
    let mut notes = Vec::new();
    let mut converged = outcome.converged;
    if !converged {
        notes.push(format!("ε = {epsilon}: steady solve did not converge"));
    }

    let h = p.grid().h();
    let (error, gate_ok) = match target.mode {
        Mode::Symmetric => {
            if measured.len() != predicted.len() {
                notes.push(format!(
                    "ε = {epsilon}: measured {} spike(s), predicted {}",
                    measured.len(),
                    predicted.len()
                ));
                converged = false;
                (None, false)
            } else {
                let v0 = predicted.v_amplitudes()[0];
                let amp_err = measured
                    .v_amplitudes()
                    .iter()
                    .map(|v| (v - v0).abs() / v0)
                    .fold(0.0, f64::max);
                let positions_ok = measured
                    .positions()
                    .iter()
                    .zip(predicted.positions())
                    .all(|(m, p)| (m - p).abs() <= 2.0 * h);
                if !positions_ok {
                    notes.push(format!("ε = {epsilon}: a spike sits off its slot by more than 2h"));
                }
                (Some(amp_err), positions_ok)
            }
        }
        Mode::Asymmetric => {
            if measured.len() != 2 || predicted.len() != 2 {
                notes.push(format!(
                    "ε = {epsilon}: expected a tall/short pair, measured {} spike(s)",
                    measured.len()
                ));
                converged = false;
                (None, false)
            } else {
                let ratio = |p: &hotspot_core::SpikePattern| {
                    let v = p.v_amplitudes();
                    v[1].max(v[0]) / v[1].min(v[0])
                };
                let want = ratio(&predicted);
                let got = ratio(measured);
                let spacing_want = predicted.positions()[1] - predicted.positions()[0];
                let spacing_got = measured.positions()[1] - measured.positions()[0];
                let spacing_ok = (spacing_got - spacing_want).abs() <= 0.15 * spacing_want.abs();
                if !spacing_ok {
                    notes.push(format!("ε = {epsilon}: spike spacing off by more than 15%"));
                }
                (Some((got - want).abs() / want), spacing_ok)
            }
        }
        Mode::Anisotropic => {
            if measured.len() != 1 {
                notes.push(format!(
                    "ε = {epsilon}: expected one spike, measured {}",
                    measured.len()
                ));
                converged = false;
                (None, false)
            } else {
                let drift = (measured.positions()[0] - predicted.positions()[0]).abs();
                let ok = drift <= 3.0 * epsilon;
                if !ok {
                    notes.push(format!(
                        "ε = {epsilon}: spike drifted {drift:.6} from the γ median (> 3ε)"
                    ));
                }
                (Some(drift), ok)
            }
        }
    };

    Ok(EpsOutcome {
        run: RunEcho {
            epsilon,
            grid_n: p.grid_n,
            newton: outcome.measured.newton.clone().expect("steady runs carry a newton echo"),
            positions: measured.positions().to_vec(),
            v_amplitudes: measured.v_amplitudes().to_vec(),
        },
        trend: TrendPoint {
            epsilon,
            error,
            converged,
        },
        gate_ok,
        notes,
    })
}

pub fn cmd_validate(
    config: &Path,
    target: &Target,
    eps_list: &[f64],
    out: Option<&Path>,
) -> Result<(), Failure> {
    let cfg = ConfigFile::load(config)?;
    let base = cfg.to_params()?;
    check_descending(eps_list)?;

    // Fan out one steady solve per ε; assemble in input order.
    let outcomes: Vec<Result<EpsOutcome, Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = eps_list
            .iter()
            .map(|&e| scope.spawn({ let base = &base; move || run_one(base, target, e) }))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("validation worker panicked"))
            .collect()
    });

    let mut runs = Vec::with_capacity(outcomes.len());
    let mut trend = Vec::with_capacity(outcomes.len());
    let mut notes = Vec::new();
    let mut all_converged = true;
    let mut all_gates = true;
    for outcome in outcomes {
        let o = outcome?;
        all_converged &= o.trend.converged;
        all_gates &= o.gate_ok;
        notes.extend(o.notes);
        runs.push(o.run);
        trend.push(o.trend);
    }

    // ε shrinks along the list; the error must shrink with it (the
    // position criterion is per-ε, not a trend).
    let trend_ok = match target.mode {
        Mode::Anisotropic => true,
        Mode::Symmetric | Mode::Asymmetric => trend
            .windows(2)
            .all(|w| match (w[0].error, w[1].error) {
                (Some(a), Some(b)) => b < a,
                _ => false,
            }),
    };
    if !trend_ok && all_converged {
        notes.push("error did not decrease with ε".to_string());
    }

    let pass = all_converged && all_gates && trend_ok;
    let (section, _) = predicted_section(target, &base)?;
    let mut report =
        PredictionReport::new("validate", target.mode, ParamsEcho::from_config(&cfg), section);
    report.epsilon_trend = Some(trend);
    report.runs = Some(runs);
    report.verdict = Some(if pass { "pass" } else { "fail" });
    let summary = notes.join("; ");
    if !notes.is_empty() {
        report.notes = Some(notes);
    }
    emit(&report, out)?;
    if !pass {
        let detail = if summary.is_empty() {
            "error did not decrease with ε".to_string()
        } else {
            summary
        };
        return Err(Failure::Validation(detail));
    }
    Ok(())
}
