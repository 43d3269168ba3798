//! Per-node solution fields and spike-pattern descriptors.
//!
//! The dynamic variables are the attractiveness A(x) and the criminal
//! density ρ(x); the derived variable v = ρ/A² turns the ρ-equation into
//! the divergence form (A²v)_t = D(A²v_x)_x − vA³ + γ and is the natural
//! amplitude coordinate for spikes: a spike at t with amplitude v(t) has
//! height A(t) ≈ 1/√v(t) · w(0)/ε·(…) in rescaled variables.

use crate::error::{CoreError, Result};
use crate::model::Grid1D;

/// Per-node (A, ρ) snapshot at a simulation time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub a: Vec<f64>,
    pub rho: Vec<f64>,
    pub time: f64,
}

impl FieldState {
    /// Errors when the two fields disagree in length or either is not
    /// strictly positive everywhere.
    pub fn validate(&self, grid: &Grid1D) -> Result<()> {
        if self.a.len() != grid.len() {
            return Err(CoreError::LengthMismatch {
                expected: grid.len(),
                got: self.a.len(),
            });
        }
        if self.rho.len() != grid.len() {
            return Err(CoreError::LengthMismatch {
                expected: grid.len(),
                got: self.rho.len(),
            });
        }
        for (i, (&a, &rho)) in self.a.iter().zip(&self.rho).enumerate() {
            if !(a > 0.0) || !a.is_finite() {
                return Err(CoreError::NonPositiveField {
                    name: "A",
                    x: grid.nodes()[i],
                    value: a,
                });
            }
            if !(rho > 0.0) || !rho.is_finite() {
                return Err(CoreError::NonPositiveField {
                    name: "rho",
                    x: grid.nodes()[i],
                    value: rho,
                });
            }
        }
        Ok(())
    }

    /// The derived field v = ρ/A² per node; errors when A is not
    /// strictly positive somewhere.
    pub fn to_v(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        self.validate(grid)?;
        Ok(self
            .a
            .iter()
            .zip(&self.rho)
            .map(|(&a, &rho)| rho / (a * a))
            .collect())
    }
}

/// Positions and v-amplitudes of a K-spike pattern.
///
/// Construction enforces: positions strictly increasing and strictly
/// inside (−L, L), amplitudes positive, and positive separation (the
/// minimum of the distances to each wall and half the nearest-neighbor
/// gaps).
#[derive(Debug, Clone, PartialEq)]
pub struct SpikePattern {
    positions: Vec<f64>,
    v_amplitudes: Vec<f64>,
}

impl SpikePattern {
    /// Validates ordering, interiority and positivity.  The empty
    /// pattern is legal: it is what spike measurement returns for a
    /// state with no spikes.
    pub fn new(positions: Vec<f64>, v_amplitudes: Vec<f64>, half_length: f64) -> Result<Self> {
        if positions.len() != v_amplitudes.len() {
            return Err(CoreError::LengthMismatch {
                expected: positions.len(),
                got: v_amplitudes.len(),
            });
        }
        for w in positions.windows(2) {
            if !(w[1] > w[0]) {
                return Err(CoreError::SeparationViolated {
                    detail: format!("positions not strictly increasing: {} then {}", w[0], w[1]),
                });
            }
        }
        if let (Some(&first), Some(&last)) = (positions.first(), positions.last()) {
            if !(first > -half_length && last < half_length) {
                return Err(CoreError::SeparationViolated {
                    detail: format!(
                        "positions must lie strictly inside (-{half_length}, {half_length}), \
                         got [{first}, {last}]"
                    ),
                });
            }
        }
        if let Some(&bad) = v_amplitudes.iter().find(|&&v| !(v > 0.0) || !v.is_finite()) {
            return Err(CoreError::NonPositiveField {
                name: "v-amplitude",
                x: f64::NAN,
                value: bad,
            });
        }
        Ok(SpikePattern {
            positions,
            v_amplitudes,
        })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn v_amplitudes(&self) -> &[f64] {
        &self.v_amplitudes
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// min( t₁+L, L−t_K, ½·minᵢ(tᵢ₊₁−tᵢ) ): the clearance that bounds
    /// how far the spike cores stay from each other and from the walls.
    /// Infinite for the empty pattern (no constraint to violate).
    pub fn separation(&self, half_length: f64) -> f64 {
        let (Some(&first), Some(&last)) = (self.positions.first(), self.positions.last()) else {
            return f64::INFINITY;
        };
        let mut sep = f64::min(first + half_length, half_length - last);
        for w in self.positions.windows(2) {
            sep = sep.min(0.5 * (w[1] - w[0]));
        }
        sep
    }
}
