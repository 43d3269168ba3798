//! Machine-readable reports.  Every document carries
//! `"schema": "hotspot-report/1"` and formats floats at 17 significant
//! digits (`{:.16e}`), so identical inputs give byte-identical output.

use std::io::{self, Write};
use std::path::Path;

use hotspot_core::{SpikePattern, SteadyResult};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::{ConfigFile, FieldSpec, Mode};
use crate::fail::Failure;

pub const SCHEMA: &str = "hotspot-report/1";

/// Pretty JSON with every f64 rendered as `d.dddddddddddddddde±x`
/// (17 significant digits).  Non-finite values have no JSON encoding
/// and are emitted as `null`; report types keep them out by using
/// `Option` fields instead.
struct Sci17<'a> {
    inner: PrettyFormatter<'a>,
}

impl Sci17<'_> {
    fn new() -> Self {
        Sci17 {
            inner: PrettyFormatter::new(),
        }
    }
}

impl Formatter for Sci17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serializes a report and writes it to stdout or `--out`.
pub fn emit<T: Serialize>(report: &T, out: Option<&Path>) -> Result<(), Failure> {
    let bytes = to_bytes(report)?;
    match out {
        None => io::stdout()
            .write_all(&bytes)
            .map_err(|e| Failure::io("cannot write report to stdout", e)),
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| Failure::io(&format!("cannot write {}", path.display()), e)),
    }
}

pub fn to_bytes<T: Serialize>(report: &T) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sci17::new());
    report
        .serialize(&mut ser)
        .map_err(|e| Failure::io("cannot serialize report", e))?;
    buf.push(b'\n');
    Ok(buf)
}

/// The configuration as the run saw it.
#[derive(Debug, Clone, Serialize)]
pub struct ParamsEcho {
    pub half_length: f64,
    pub epsilon: f64,
    pub d_hat: f64,
    pub grid_n: usize,
    pub a0: FieldSpec,
    pub gamma: FieldSpec,
}

impl ParamsEcho {
    pub fn from_config(cfg: &ConfigFile) -> Self {
        ParamsEcho {
            half_length: cfg.half_length,
            epsilon: cfg.epsilon,
            d_hat: cfg.d_hat,
            grid_n: cfg.grid_n,
            a0: cfg.a0.clone(),
            gamma: cfg.gamma.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternEcho {
    pub positions: Vec<f64>,
    pub v_amplitudes: Vec<f64>,
}

impl From<&SpikePattern> for PatternEcho {
    fn from(p: &SpikePattern) -> Self {
        PatternEcho {
            positions: p.positions().to_vec(),
            v_amplitudes: p.v_amplitudes().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RootEcho {
    pub z: f64,
    pub v_small: f64,
    pub v_large: f64,
}

/// Mode-dependent prediction block; absent members are omitted.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Predicted {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<PatternEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<RootEcho>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub existence_scale_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nondegenerate_scale_ok: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NewtonEcho {
    pub iterations: usize,
    pub converged: bool,
    pub residual_norm: f64,
    pub condition_estimate: f64,
}

impl From<&SteadyResult> for NewtonEcho {
    fn from(r: &SteadyResult) -> Self {
        NewtonEcho {
            iterations: r.newton_iterations,
            converged: r.converged,
            residual_norm: r.residual_norm,
            condition_estimate: r.condition_estimate,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Measured {
    pub positions: Vec<f64>,
    pub v_amplitudes: Vec<f64>,
    pub boundary_clamped: bool,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub newton: Option<NewtonEcho>,
}

/// Per-spike deviations from the prediction.  Position error is
/// relative to the half-length L; amplitude error is relative to the
/// predicted amplitude.
#[derive(Debug, Clone, Serialize)]
pub struct SpikeErrors {
    pub position_rel_error: f64,
    pub amplitude_rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendPoint {
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    pub converged: bool,
}

/// Per-ε detail row for `validate`.
#[derive(Debug, Clone, Serialize)]
pub struct RunEcho {
    pub epsilon: f64,
    pub grid_n: usize,
    pub newton: NewtonEcho,
    pub positions: Vec<f64>,
    pub v_amplitudes: Vec<f64>,
}

/// The shared prediction/measurement report shape.
#[derive(Debug, Clone, Serialize)]
pub struct PredictionReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub mode: Mode,
    pub params: ParamsEcho,
    pub predicted: Predicted,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<Measured>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub errors: Option<Vec<SpikeErrors>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_trend: Option<Vec<TrendPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<Vec<RunEcho>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notes: Option<Vec<String>>,
}

impl PredictionReport {
    pub fn new(command: &'static str, mode: Mode, params: ParamsEcho, predicted: Predicted) -> Self {
        PredictionReport {
            schema: SCHEMA,
            command,
            mode,
            params,
            predicted,
            measured: None,
            errors: None,
            epsilon_trend: None,
            runs: None,
            verdict: None,
            notes: None,
        }
    }
}

/// Pairs measured spikes with the prediction they should match.
/// Errors are only meaningful when the spike counts agree; a mismatch
/// yields an empty error list plus a note.
pub fn spike_errors(
    measured: &SpikePattern,
    predicted: &SpikePattern,
    half_length: f64,
) -> (Vec<SpikeErrors>, Option<String>) {
    if measured.len() != predicted.len() {
        return (
            Vec::new(),
            Some(format!(
                "measured {} spike(s) but predicted {}",
                measured.len(),
                predicted.len()
            )),
        );
    }
    let list = measured
        .positions()
        .iter()
        .zip(measured.v_amplitudes())
        .zip(predicted.positions().iter().zip(predicted.v_amplitudes()))
        .map(|((&tm, &vm), (&tp, &vp))| SpikeErrors {
            position_rel_error: (tm - tp).abs() / half_length,
            amplitude_rel_error: (vm - vp).abs() / vp,
        })
        .collect();
    (list, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Probe {
        x: f64,
        tag: &'static str,
        #[serde(skip_serializing_if = "Option::is_none")]
        gone: Option<f64>,
        bad: f64,
    }

    fn probe() -> Probe {
        Probe {
            x: 0.1,
            tag: "t",
            gone: None,
            bad: f64::NAN,
        }
    }

    #[test]
    fn floats_carry_seventeen_significant_digits() {
        let text = String::from_utf8(to_bytes(&probe()).unwrap()).unwrap();
        // 0.1 is not representable; all 17 digits of the double show.
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
    }

    #[test]
    fn output_is_deterministic_and_reparses() {
        let a = to_bytes(&probe()).unwrap();
        let b = to_bytes(&probe()).unwrap();
        assert_eq!(a, b);
        let value: serde_json::Value = serde_json::from_slice(&a).unwrap();
        assert_eq!(value["tag"], "t");
        assert!(value.get("gone").is_none());
    }

    #[test]
    fn non_finite_values_become_null() {
        let text = String::from_utf8(to_bytes(&probe()).unwrap()).unwrap();
        assert!(text.contains("\"bad\": null"), "{text}");
    }

    #[test]
    fn mismatched_spike_counts_note_instead_of_erroring() {
        let measured = SpikePattern::new(vec![0.0], vec![1.0], 1.0).unwrap();
        let predicted = SpikePattern::new(vec![-0.5, 0.5], vec![1.0, 1.0], 1.0).unwrap();
        let (errors, note) = spike_errors(&measured, &predicted, 1.0);
        assert!(errors.is_empty());
        assert!(note.unwrap().contains("measured 1"));
    }

    #[test]
    fn spike_errors_are_relative() {
        let measured = SpikePattern::new(vec![0.1], vec![4.4], 2.0).unwrap();
        let predicted = SpikePattern::new(vec![0.0], vec![4.0], 2.0).unwrap();
        let (errors, note) = spike_errors(&measured, &predicted, 2.0);
        assert!(note.is_none());
        assert!((errors[0].position_rel_error - 0.05).abs() < 1e-15);
        assert!((errors[0].amplitude_rel_error - 0.1).abs() < 1e-12);
    }
}
