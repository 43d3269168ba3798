//! TOML run configuration: model parameters, coefficient fields, and
//! the optional initial-data block for the time integrator.

use std::path::Path;

use hotspot_core::{CoefficientField, ModelParams};
use serde::{Deserialize, Serialize};

use crate::fail::Failure;

/// Which spike family a command targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// K equally tall, equally spaced spikes.
    Symmetric,
    /// Two-amplitude patterns (k₁ tall + k₂ short spikes).
    Asymmetric,
    /// Single spike positioned by a spatially varying source.
    Anisotropic,
}

/// One scalar coefficient as written in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant { value: f64 },
    Affine { offset: f64, slope: f64 },
    PiecewiseLinear { breakpoints: Vec<(f64, f64)> },
    /// Values at equally spaced nodes spanning the whole domain.
    Sampled { values: Vec<f64> },
}

impl FieldSpec {
    pub fn to_field(&self, half_length: f64) -> Result<CoefficientField, Failure> {
        match self {
            FieldSpec::Constant { value } => Ok(CoefficientField::Constant(*value)),
            FieldSpec::Affine { offset, slope } => Ok(CoefficientField::Affine {
                offset: *offset,
                slope: *slope,
            }),
            FieldSpec::PiecewiseLinear { breakpoints } => {
                if breakpoints.len() < 2 {
                    return Err(Failure::Config(
                        "piecewise_linear needs at least two breakpoints".into(),
                    ));
                }
                for w in breakpoints.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Failure::Config(format!(
                            "breakpoints must have strictly increasing x, got {} then {}",
                            w[0].0, w[1].0
                        )));
                    }
                }
                Ok(CoefficientField::PiecewiseLinear {
                    breakpoints: breakpoints.clone(),
                })
            }
            FieldSpec::Sampled { values } => {
                if values.len() < 2 {
                    return Err(Failure::Config(
                        "sampled field needs at least two values".into(),
                    ));
                }
                Ok(CoefficientField::Sampled {
                    half_length,
                    values: values.clone(),
                })
            }
        }
    }
}

/// Initial data for `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Spatially uniform steady state with the A-field modulated by
    /// 1 + amplitude·cos(π·spike_count·x/L), seeding that spike count.
    Uniform {
        #[serde(default = "default_spike_count")]
        spike_count: usize,
        #[serde(default = "default_perturbation")]
        amplitude: f64,
    },
    /// The matched spike ansatz for the given mode.
    Ansatz {
        mode: Mode,
        #[serde(default = "default_spike_count")]
        k: usize,
        #[serde(default = "default_spike_count")]
        k1: usize,
        #[serde(default = "default_spike_count")]
        k2: usize,
    },
    /// A snapshot written earlier (CSV with x, A, rho columns).
    File { path: String },
}

fn default_spike_count() -> usize {
    1
}

fn default_perturbation() -> f64 {
    0.05
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Uniform {
            spike_count: default_spike_count(),
            amplitude: default_perturbation(),
        }
    }
}

/// The whole config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub half_length: f64,
    pub epsilon: f64,
    pub d_hat: f64,
    pub grid_n: usize,
    pub a0: FieldSpec,
    pub gamma: FieldSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Failure::Config(format!("cannot parse {}: {e}", path.display())))
    }

    /// Converts to validated model parameters; the grid must resolve
    /// the spike width (h ≤ ε/8).
    pub fn to_params(&self) -> Result<ModelParams, Failure> {
        let params = ModelParams {
            half_length: self.half_length,
            epsilon: self.epsilon,
            d_hat: self.d_hat,
            a0: self.a0.to_field(self.half_length)?,
            gamma: self.gamma.to_field(self.half_length)?,
            grid_n: self.grid_n,
        };
        params.validate().map_err(Failure::config)?;
        params.require_resolved_grid().map_err(Failure::config)?;
        Ok(params)
    }

    pub fn initial(&self) -> InitialSpec {
        self.initial.clone().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ConfigFile, Failure> {
        toml::from_str::<ConfigFile>(text).map_err(|e| Failure::Config(e.to_string()))
    }

    const BASE: &str = r#"
        half_length = 1.0
        epsilon = 0.1
        d_hat = 1.0
        grid_n = 160

        [a0]
        kind = "constant"
        value = 1.0

        [gamma]
        kind = "affine"
        offset = 2.0
        slope = 1.0
    "#;

    #[test]
    fn parses_constant_and_affine_fields() {
        let cfg = parse(BASE).unwrap();
        let p = cfg.to_params().unwrap();
        assert_eq!(p.grid_n, 160);
        assert!((p.gamma.eval(0.5) - 2.5).abs() < 1e-15);
        assert!((p.a0.eval(-0.3) - 1.0).abs() < 1e-15);
        assert_eq!(cfg.initial(), InitialSpec::default());
    }

    #[test]
    fn parses_piecewise_and_sampled_fields() {
        let text = r#"
            half_length = 1.0
            epsilon = 0.1
            d_hat = 1.0
            grid_n = 160

            [a0]
            kind = "piecewise_linear"
            breakpoints = [[-1.0, 1.0], [0.0, 2.0], [1.0, 1.0]]

            [gamma]
            kind = "sampled"
            values = [1.0, 2.0, 3.0, 2.0, 1.0]
        "#;
        let p = parse(text).unwrap().to_params().unwrap();
        assert!((p.a0.eval(-0.5) - 1.5).abs() < 1e-15);
        assert!((p.gamma.eval(0.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_breakpoints() {
        assert!(parse(&BASE.replace("grid_n = 160", "grid_n = 160\nbogus = 1")).is_err());
        let unsorted = r#"
            half_length = 1.0
            epsilon = 0.1
            d_hat = 1.0
            grid_n = 160

            [a0]
            kind = "piecewise_linear"
            breakpoints = [[0.5, 1.0], [-0.5, 2.0]]

            [gamma]
            kind = "constant"
            value = 1.0
        "#;
        let err = parse(unsorted).unwrap().to_params().unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn surfaces_invariant_violations_with_config_code() {
        // γ = 1 + 2x dips negative at the left wall.
        let text = BASE.replace("offset = 2.0", "offset = 1.0").replace("slope = 1.0", "slope = 2.0");
        let err = parse(&text).unwrap().to_params().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("gamma"), "{err}");
    }

    #[test]
    fn coarse_grids_are_rejected_early() {
        // ε = 0.1 needs h ≤ ε/8 = 0.0125, i.e. at least 160 cells here.
        let text = BASE.replace("grid_n = 160", "grid_n = 100");
        let err = parse(&text).unwrap().to_params().unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn initial_block_round_trips() {
        let text = format!(
            "{BASE}\n[initial]\nkind = \"ansatz\"\nmode = \"symmetric\"\nk = 2\n"
        );
        let cfg = parse(&text).unwrap();
        match cfg.initial() {
            InitialSpec::Ansatz { mode, k, .. } => {
                assert_eq!(mode, Mode::Symmetric);
                assert_eq!(k, 2);
            }
            other => panic!("unexpected initial spec: {other:?}"),
        }
    }
}
