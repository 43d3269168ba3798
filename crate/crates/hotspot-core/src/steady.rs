//! Damped Newton solver for the rescaled steady system.
//!
//! In the spike variables Â = ε(A − A₀), v̂ = v/ε² the steady equations
//! read
//!
//!   0 = ε²Âₓₓ − Â + v̂(εA₀+Â)³ + ε³A₀″
//!   0 = D̂((A₀+Â/ε)² v̂ₓ)ₓ − (1/ε)·v̂(εA₀+Â)³ + γ,
//!
//! and the solver works on the per-node residual with the second block
//! multiplied through by ε, which puts both blocks on comparable scales
//! (the raw v̂-rows carry the D̂/h²-sized flux stiffness and would
//! otherwise dominate every norm the line search looks at).  Unknowns
//! interleave as (Â₀, v̂₀, Â₁, v̂₁, …), making the analytic Jacobian a
//! fixed-bandwidth band matrix.
//!
//! Globalization is Armijo backtracking on the residual ‖·‖₂ with factor
//! ½ down to 2⁻²⁰.  Iteration stops when the row-equilibrated residual
//! max |Rᵢ|/maxⱼ|Jᵢⱼ| falls below 1e−8 — the scale-free analogue of "R
//! vanishes to rounding" — and the result is graded afterwards by the
//! envelope norm of the true steady operator with v̂ re-solved from Â.

use crate::banded::BandedMatrix;
use crate::elliptic::solve_v;
use crate::error::{CoreError, Result};
use crate::field::{FieldState, SpikePattern};
use crate::ground::build_ansatz;
use crate::model::{Grid1D, ModelParams};
use crate::norms::norm_star_star;

/// Internal stopping threshold on the row-equilibrated residual.
const EQUILIBRATED_TOL: f64 = 1e-8;
/// Armijo slope parameter.
const ARMIJO_SLOPE: f64 = 1e-4;
/// Smallest admissible line-search factor: 2⁻²⁰.
const STEP_FLOOR: f64 = 1.0 / (1024.0 * 1024.0);
/// Condition estimate past which the Jacobian is reported as singular.
const CONDITION_LIMIT: f64 = 1e14;

/// Seed fields for the Newton iteration, tied to the spike layout whose
/// envelope grades the final residual.
#[derive(Debug, Clone)]
pub struct NewtonSeed {
    pub a_hat: Vec<f64>,
    pub v_hat: Vec<f64>,
    pub pattern: SpikePattern,
}

impl NewtonSeed {
    /// Canonical seed: cutoff ansatz for Â, linear v̂-solve for v̂.
    pub fn from_pattern(pattern: &SpikePattern, p: &ModelParams) -> Result<Self> {
        let a_hat = build_ansatz(pattern, p)?;
        let v_hat = solve_v(&a_hat, p)?.v_hat;
        Ok(NewtonSeed {
            a_hat,
            v_hat,
            pattern: pattern.clone(),
        })
    }

    /// The physical state this seed describes: A = A₀ + Â/ε,
    /// ρ = ε²·v̂·A², at time zero.
    pub fn to_state(&self, p: &ModelParams) -> Result<FieldState> {
        let grid = p.require_resolved_grid()?;
        if self.a_hat.len() != grid.len() || self.v_hat.len() != grid.len() {
            return Err(CoreError::LengthMismatch {
                expected: grid.len(),
                got: self.a_hat.len().min(self.v_hat.len()),
            });
        }
        let eps = p.epsilon;
        let a: Vec<f64> = grid
            .nodes()
            .iter()
            .zip(&self.a_hat)
            .map(|(&x, &ah)| p.a0.eval(x) + ah / eps)
            .collect();
        let rho: Vec<f64> = a
            .iter()
            .zip(&self.v_hat)
            .map(|(&a, &vh)| eps * eps * vh * a * a)
            .collect();
        let state = FieldState { a, rho, time: 0.0 };
        state.validate(&grid)?;
        Ok(state)
    }

    /// Rebuilds the rescaled seed fields from a physical state, e.g. to
    /// restart from a previously computed solution.
    pub fn from_state(state: &FieldState, pattern: &SpikePattern, p: &ModelParams) -> Result<Self> {
        let grid = p.require_resolved_grid()?;
        state.validate(&grid)?;
        let eps = p.epsilon;
        let a_hat: Vec<f64> = grid
            .nodes()
            .iter()
            .zip(&state.a)
            .map(|(&x, &a)| eps * (a - p.a0.eval(x)))
            .collect();
        let v_hat: Vec<f64> = state
            .a
            .iter()
            .zip(&state.rho)
            .map(|(&a, &rho)| rho / (a * a) / (eps * eps))
            .collect();
        Ok(NewtonSeed {
            a_hat,
            v_hat,
            pattern: pattern.clone(),
        })
    }
}

/// Converged (or best-effort) steady state.
#[derive(Debug, Clone)]
pub struct SteadyResult {
    /// Physical fields A = A₀ + Â/ε, ρ = ε²v̂·A².
    pub state: FieldState,
    /// Envelope norm of the steady operator at the final Â with v̂
    /// re-solved from the linear equation.
    pub residual_norm: f64,
    pub newton_iterations: usize,
    /// residual_norm ≤ tol.
    pub converged: bool,
    /// 1-norm condition estimate of the first Jacobian.
    pub condition_estimate: f64,
}

/// Runs the damped Newton iteration from `seed`.  `tol` grades the final
/// envelope-norm residual; iteration effort is capped at `max_iter`.
pub fn newton_steady(
    seed: &NewtonSeed,
    p: &ModelParams,
    tol: f64,
    max_iter: usize,
) -> Result<SteadyResult> {
    let grid = p.require_resolved_grid()?;
    let n = grid.len();
    if seed.a_hat.len() != n || seed.v_hat.len() != n {
        return Err(CoreError::LengthMismatch {
            expected: n,
            got: seed.a_hat.len().min(seed.v_hat.len()),
        });
    }

    // Interleaved unknowns z = (Â₀, v̂₀, Â₁, v̂₁, …).
    let mut z = vec![0.0; 2 * n];
    for i in 0..n {
        z[2 * i] = seed.a_hat[i];
        z[2 * i + 1] = seed.v_hat[i];
    }

    let mut condition_estimate = f64::NAN;
    let mut iterations = 0;
    let mut residual = assemble_residual(&z, p, &grid);
    for iter in 0..max_iter {
        let jacobian = assemble_jacobian(&z, p, &grid);
        let equilibrated = (0..2 * n)
            .map(|r| {
                let scale = jacobian.row_max(r);
                if scale > 0.0 {
                    residual[r].abs() / scale
                } else {
                    residual[r].abs()
                }
            })
            .fold(0.0_f64, f64::max);
        if equilibrated < EQUILIBRATED_TOL {
            break;
        }

        let one_norm = jacobian.one_norm();
        let lu = jacobian.factorize()?;
        if iter == 0 {
            condition_estimate = lu.condition_one_norm(one_norm);
            if !condition_estimate.is_finite() || condition_estimate > CONDITION_LIMIT {
                return Err(CoreError::JacobianSingular {
                    cond_estimate: condition_estimate,
                });
            }
        }

        let mut delta: Vec<f64> = residual.iter().map(|&r| -r).collect();
        lu.solve(&mut delta);

        // Armijo backtracking on ‖R‖₂.
        let merit0 = two_norm(&residual);
        let mut lambda = 1.0;
        let (mut z_next, mut r_next);
        loop {
            z_next = z
                .iter()
                .zip(&delta)
                .map(|(&zi, &di)| zi + lambda * di)
                .collect::<Vec<f64>>();
            r_next = assemble_residual(&z_next, p, &grid);
            let merit = two_norm(&r_next);
            if merit <= (1.0 - ARMIJO_SLOPE * lambda) * merit0 || lambda <= STEP_FLOOR {
                break;
            }
            lambda *= 0.5;
        }
        if !two_norm(&r_next).is_finite() {
            return Err(CoreError::SingularSystem {
                detail: "newton iterate became non-finite".to_string(),
            });
        }
        z = z_next;
        residual = r_next;
        iterations = iter + 1;
    }

    // Grade the outcome by the steady operator with v̂ := T[Â].
    let a_hat: Vec<f64> = (0..n).map(|i| z[2 * i]).collect();
    let elliptic = solve_v(&a_hat, p)?;
    let s = steady_operator(&a_hat, &elliptic.v_hat, p, &grid);
    let residual_norm = norm_star_star(&s, &seed.pattern, p)?;
    let converged = residual_norm.is_finite() && residual_norm <= tol;

    let eps = p.epsilon;
    let a: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(&a_hat)
        .map(|(&x, &ah)| p.a0.eval(x) + ah / eps)
        .collect();
    let rho: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(i, &ai)| eps * eps * z[2 * i + 1] * ai * ai)
        .collect();

    Ok(SteadyResult {
        state: FieldState { a, rho, time: 0.0 },
        residual_norm,
        newton_iterations: iterations,
        converged,
        condition_estimate,
    })
}

/// Envelope norm of the steady operator at the cutoff ansatz of a
/// pattern, with v̂ from the linear solve: the O(ε) smallness that makes
/// the ansatz a valid Newton seed.
pub fn residual_of_ansatz(pattern: &SpikePattern, p: &ModelParams) -> Result<f64> {
    let grid = p.require_resolved_grid()?;
    let a_hat = build_ansatz(pattern, p)?;
    let elliptic = solve_v(&a_hat, p)?;
    let s = steady_operator(&a_hat, &elliptic.v_hat, p, &grid);
    norm_star_star(&s, pattern, p)
}

/// Pointwise steady operator S[Â, v̂] = ε²Âₓₓ − Â + v̂(εA₀+Â)³ + ε³A₀″
/// with reflecting ends.
pub(crate) fn steady_operator(
    a_hat: &[f64],
    v_hat: &[f64],
    p: &ModelParams,
    grid: &Grid1D,
) -> Vec<f64> {
    let n = grid.len();
    let h = grid.h();
    let eps = p.epsilon;
    (0..n)
        .map(|i| {
            let lap = if i == 0 {
                2.0 * (a_hat[1] - a_hat[0]) / (h * h)
            } else if i == n - 1 {
                2.0 * (a_hat[n - 2] - a_hat[n - 1]) / (h * h)
            } else {
                (a_hat[i - 1] - 2.0 * a_hat[i] + a_hat[i + 1]) / (h * h)
            };
            let x = grid.nodes()[i];
            let total = eps * p.a0.eval(x) + a_hat[i];
            eps * eps * lap - a_hat[i]
                + v_hat[i] * total * total * total
                + eps * eps * eps * p.a0.second_derivative(x)
        })
        .collect()
}

/// Interleaved residual with the v̂-block scaled by ε.
fn assemble_residual(z: &[f64], p: &ModelParams, grid: &Grid1D) -> Vec<f64> {
    let n = grid.len();
    let h = grid.h();
    let eps = p.epsilon;
    let a_hat: Vec<f64> = (0..n).map(|i| z[2 * i]).collect();
    let v_hat: Vec<f64> = (0..n).map(|i| z[2 * i + 1]).collect();

    // Node coefficients.
    let a_total: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(&a_hat)
        .map(|(&x, &ah)| p.a0.eval(x) + ah / eps)
        .collect();
    let a_sq: Vec<f64> = a_total.iter().map(|&a| a * a).collect();
    let cube: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(&a_hat)
        .map(|(&x, &ah)| {
            let t = eps * p.a0.eval(x) + ah;
            t * t * t
        })
        .collect();

    let s1 = steady_operator(&a_hat, &v_hat, p, grid);

    let mut r = vec![0.0; 2 * n];
    for i in 0..n {
        r[2 * i] = s1[i];
        // Face fluxes of the v̂-equation (zero outside the domain).
        let up = if i + 1 < n {
            0.5 * (a_sq[i] + a_sq[i + 1]) * (v_hat[i + 1] - v_hat[i]) / h
        } else {
            0.0
        };
        let down = if i > 0 {
            0.5 * (a_sq[i - 1] + a_sq[i]) * (v_hat[i] - v_hat[i - 1]) / h
        } else {
            0.0
        };
        let div = (up - down) / grid.weight(i);
        let x = grid.nodes()[i];
        r[2 * i + 1] = eps * (p.d_hat * div + p.gamma.eval(x)) - v_hat[i] * cube[i];
    }
    r
}

/// Analytic Jacobian of `assemble_residual`: bandwidth (kl, ku) = (3, 2)
/// in the interleaved ordering.
fn assemble_jacobian(z: &[f64], p: &ModelParams, grid: &Grid1D) -> BandedMatrix {
    let n = grid.len();
    let h = grid.h();
    let eps = p.epsilon;
    let mut jac = BandedMatrix::new(2 * n, 3, 2);

    let a_hat: Vec<f64> = (0..n).map(|i| z[2 * i]).collect();
    let v_hat: Vec<f64> = (0..n).map(|i| z[2 * i + 1]).collect();
    let a_total: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(&a_hat)
        .map(|(&x, &ah)| p.a0.eval(x) + ah / eps)
        .collect();
    let a_sq: Vec<f64> = a_total.iter().map(|&a| a * a).collect();
    let cube: Vec<f64> = a_total
        .iter()
        .map(|&a| {
            let t = eps * a; // εA₀ + Â = ε·(A₀ + Â/ε)
            t * t * t
        })
        .collect();
    let cube_sq: Vec<f64> = a_total
        .iter()
        .map(|&a| {
            let t = eps * a;
            t * t
        })
        .collect();

    let lap = eps * eps / (h * h);
    for i in 0..n {
        let row = 2 * i;
        // Â-equation block.
        let mut diag = -1.0 + 3.0 * v_hat[i] * cube_sq[i];
        if i == 0 {
            diag -= 2.0 * lap;
            jac.set(row, 2 * (i + 1), 2.0 * lap);
        } else if i == n - 1 {
            diag -= 2.0 * lap;
            jac.set(row, 2 * (i - 1), 2.0 * lap);
        } else {
            diag -= 2.0 * lap;
            jac.set(row, 2 * (i - 1), lap);
            jac.set(row, 2 * (i + 1), lap);
        }
        jac.set(row, 2 * i, diag);
        jac.set(row, 2 * i + 1, cube[i]);

        // v̂-equation block (rows scaled by ε; the reaction term's ε
        // already cancelled).
        let row = 2 * i + 1;
        let w = grid.weight(i);
        let scale = eps * p.d_hat / (w * h);
        // Face coefficient derivative ∂a²/∂Â = 2a_total/ε cancels the
        // row's ε against the 1/ε of the chain rule.
        let dscale = p.d_hat / (w * h);
        let mut v_diag = -cube[i];
        let mut a_diag = -3.0 * v_hat[i] * cube_sq[i];
        if i + 1 < n {
            let face = 0.5 * (a_sq[i] + a_sq[i + 1]);
            let dv = v_hat[i + 1] - v_hat[i];
            v_diag -= scale * face;
            jac.set(row, 2 * (i + 1) + 1, scale * face);
            a_diag += dscale * dv * a_total[i];
            jac.set(row, 2 * (i + 1), dscale * dv * a_total[i + 1]);
        }
        if i > 0 {
            let face = 0.5 * (a_sq[i - 1] + a_sq[i]);
            let dv = v_hat[i - 1] - v_hat[i];
            v_diag -= scale * face;
            jac.set(row, 2 * (i - 1) + 1, scale * face);
            a_diag += dscale * dv * a_total[i];
            jac.set(row, 2 * (i - 1), dscale * dv * a_total[i - 1]);
        }
        jac.set(row, 2 * i + 1, v_diag);
        jac.set(row, 2 * i, a_diag);
    }
    jac
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|&x| x * x).sum::<f64>().sqrt()
}
