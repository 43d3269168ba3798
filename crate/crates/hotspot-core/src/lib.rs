//! Spike dynamics of a two-field urban crime model on an interval.
//!
//! The fields are an attractiveness A(x,t) and a criminal density
//! ρ(x,t) coupled through
//!
//!   A_t = ε²A_xx − A + ρA + A₀(x),
//!   ρ_t = D(ρ_x − 2(ρ/A)A_x)_x − ρA + γ(x),
//!
//! on (−L, L) with no-flux ends, D = D̂/ε².  In the singular limit
//! ε → 0, A develops O(1/ε)-tall spikes of width O(ε) shaped like the
//! homoclinic profile w(y) = √2 sech y, while the effective variable
//! v = ρ/A² varies slowly.  This crate provides, on a shared uniform
//! grid:
//!
//! - the rescaled steady problem and a damped Newton solver for it
//!   ([`steady`]),
//! - a semi-implicit time integrator for the full dynamics ([`sim`]),
//! - the reduced amplitude/position equations, their closed-form
//!   symmetric, asymmetric and anisotropic solutions ([`asymptotics`]),
//! - the slow 2×2 stability data for two-spike layouts ([`nlep`]),
//! - ε-weighted norms matching the spike scaling ([`norms`]),
//! - the per-spike ansatz built from the homoclinic profile
//!   ([`ground`]).

pub mod asymptotics;
pub mod banded;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod ground;
pub mod model;
pub mod nlep;
pub mod norms;
pub mod quad;
pub mod sim;
pub mod steady;
pub mod tridiag;

pub use asymptotics::{
    anisotropic_prediction, asymmetric_constant, check_existence_scale, check_nondegenerate_scale,
    interaction_residuals, positions_from_amplitudes, solve_asymmetric, symmetric_prediction,
    threshold_scale, AnisotropicPrediction, AsymmetricClass, AsymmetricRoot, AsymmetricSolution,
    SymmetricPrediction,
};
pub use elliptic::{approximation_gap, kernel_integral, solve_v, solve_v_reduced, EllipticSolve};
pub use error::{CoreError, Result};
pub use field::{FieldState, SpikePattern};
pub use ground::{build_ansatz, cutoff, profile, SpikeAnsatz, PROFILE_ENERGY, PROFILE_MASS};
pub use model::{CoefficientField, Grid1D, ModelParams};
pub use nlep::{
    build_matrices, layout_jacobian, nondegeneracy_report, LayoutJacobianReport,
    NondegeneracyReport, StabilityMatrices,
};
pub use norms::{envelope, norm_star, norm_star_star};
pub use sim::{
    measure_spikes, measure_spikes_with_threshold, run_to_steady, run_to_steady_from, step,
    MeasuredSpikes, SteppedRun,
};
pub use steady::{newton_steady, residual_of_ansatz, NewtonSeed, SteadyResult};
