//! The spike profile and its cutoff-localized superpositions.
//!
//! The inner limit of a spike solves the ground-state problem
//!
//!   w″ − w + w³ = 0,  w > 0,  w(±∞) = 0,  w′(0) = 0,
//!
//! whose unique even solution is w(y) = √2 sech y.  Its moments drive
//! every amplitude formula downstream:
//!
//!   ∫w dy = ∫w³ dy = √2·π,   ∫w² dy = 4.
//!
//! A K-spike ansatz superposes copies w((x−tⱼ)/ε)/√vⱼ localized by a C²
//! cutoff so that distinct spikes never interact through the tails.

use crate::error::{CoreError, Result};
use crate::field::SpikePattern;
use crate::model::ModelParams;

/// √2·π: the value of both the first and third moment of the profile.
pub const PROFILE_MASS: f64 = 4.442882938158366; // √2 · π
/// ∫ w² dy.
pub const PROFILE_ENERGY: f64 = 4.0;

/// w(y) = √2 sech y.
pub fn profile(y: f64) -> f64 {
    std::f64::consts::SQRT_2 / y.cosh()
}

/// w′(y) = −√2 sech y · tanh y.
pub fn profile_prime(y: f64) -> f64 {
    -std::f64::consts::SQRT_2 * y.tanh() / y.cosh()
}

/// w″(y) = √2 sech y · (1 − 2 sech² y), computed directly rather than
/// through the defining equation so tests can close the loop.
pub fn profile_second(y: f64) -> f64 {
    let s = 1.0 / y.cosh();
    std::f64::consts::SQRT_2 * s * (1.0 - 2.0 * s * s)
}

/// C² cutoff: 1 on [−1, 1], 0 outside (−2, 2), quintic smoothstep on the
/// transition bands, monotone in |s|.
pub fn cutoff(s: f64) -> f64 {
    let u = s.abs();
    if u <= 1.0 {
        1.0
    } else if u >= 2.0 {
        0.0
    } else {
        let t = u - 1.0;
        1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// A spike pattern together with the localization data used to turn it
/// into per-node fields.
#[derive(Debug, Clone)]
pub struct SpikeAnsatz {
    pub pattern: SpikePattern,
    /// Cutoff radius r₀ = separation/10: each spike's cutoff support
    /// [tⱼ − 2r₀, tⱼ + 2r₀] stays well clear of walls and neighbors.
    pub cutoff_radius: f64,
    pub epsilon: f64,
}

impl SpikeAnsatz {
    pub fn new(pattern: SpikePattern, p: &ModelParams) -> Result<Self> {
        p.validate()?;
        if pattern.is_empty() {
            return Err(CoreError::SeparationViolated {
                detail: "ansatz needs at least one spike".to_string(),
            });
        }
        let cutoff_radius = pattern.separation(p.half_length) / 10.0;
        Ok(SpikeAnsatz {
            pattern,
            cutoff_radius,
            epsilon: p.epsilon,
        })
    }

    /// The rescaled field Â(x) = Σⱼ vⱼ^{−1/2} w((x−tⱼ)/ε) χ(|x−tⱼ|/r₀)
    /// at one point.
    pub fn eval(&self, x: f64) -> f64 {
        self.pattern
            .positions()
            .iter()
            .zip(self.pattern.v_amplitudes())
            .map(|(&t, &v)| {
                let d = x - t;
                profile(d / self.epsilon) * cutoff(d / self.cutoff_radius) / v.sqrt()
            })
            .sum()
    }
}

/// Per-node Â on the model grid for a given pattern.  Requires the grid
/// to resolve the spike width (h ≤ ε/8).
pub fn build_ansatz(pattern: &SpikePattern, p: &ModelParams) -> Result<Vec<f64>> {
    let grid = p.require_resolved_grid()?;
    let ansatz = SpikeAnsatz::new(pattern.clone(), p)?;
    Ok(grid.nodes().iter().map(|&x| ansatz.eval(x)).collect())
}
