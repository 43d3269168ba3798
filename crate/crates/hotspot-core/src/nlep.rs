//! Stability diagnostics for the tall/short two-spike pattern.
//!
//! Linearizing around a two-amplitude pattern couples the spikes through
//! a 2×2 system: B = (1/d₂)·[[1,−1],[−1,1]] carries the Green-function
//! interaction across the gap d₂, and 𝒞 = (√2π/E)·diag(v_s^{−3/2},
//! v_l^{−3/2}) the per-spike amplitude response (E = D̂A₀²).  The
//! multipliers that decide stability are the eigenvalues of
//!
//!   E⁻¹ = B·𝒞⁻¹ + I,
//!
//! a rank-one update of the identity: one eigenvalue is exactly 1, the
//! other is 1 + tr(B𝒞⁻¹) with eigenvector (1, −1)/√2 — the tall/short
//! see-saw mode.  The see-saw eigenvalue must stay away from 3/2.
//!
//! The second diagnostic is the Jacobian determinant of the force map
//! t ↦ F(t, v(t)) restricted to amplitude-consistent layouts; in the
//! ratio variable α = √(v_l/v_s) it has the closed form
//!
//!   det = (π⁴/(16E²)) · (v_s v_l)⁻² · (α³−α²−α+1)/(α³−2α²−2α+1),
//!
//! cross-checked here against a finite-difference determinant of the
//! actual constrained map.  The two routes can disagree on where the
//! determinant vanishes only through a defect in one of them, so a
//! vanishing mismatch is surfaced as an explicit flag instead of being
//! reconciled silently.

use crate::asymptotics::positions_from_amplitudes;
use crate::error::{CoreError, Result};
use crate::ground::PROFILE_MASS;
use crate::model::ModelParams;

/// Relative exclusion band for the e₁ ≠ 3/2 nondegeneracy test.
const DEGENERACY_BAND: f64 = 1e-9;
/// |denominator| below this is treated as a pole neighborhood where the
/// finite-difference cross-check is not meaningful.
const POLE_BAND: f64 = 0.1;
/// Central-difference step for the layout Jacobian, relative to L.
const FD_STEP_REL: f64 = 1e-6;

/// The interaction matrices and the spectrum of E⁻¹ = B𝒞⁻¹ + I.
#[derive(Debug, Clone)]
pub struct StabilityMatrices {
    pub b: [[f64; 2]; 2],
    /// Diagonal of 𝒞.
    pub c_diag: [f64; 2],
    pub e_inv: [[f64; 2]; 2],
    /// Larger eigenvalue (the see-saw multiplier), from the quadratic of
    /// the characteristic polynomial.
    pub e_m1: f64,
    /// Smaller eigenvalue; exactly 1 by the rank-one structure.
    pub e_m2: f64,
    /// Unit eigenvector of e_m1.
    pub mode_m1: [f64; 2],
}

/// Both evaluation routes for the see-saw eigenvalue and the distance
/// from the degenerate value 3/2.
#[derive(Debug, Clone)]
pub struct NondegeneracyReport {
    /// e₁ from the eigen-decomposition of E⁻¹ with gap d₂ = L.
    pub e_m1: f64,
    /// e₁ from the trace formula 1 + (E/(√2π·d₂))(v_s^{3/2}+v_l^{3/2}).
    pub e_m1_trace: f64,
    /// e₁ from the parameter form G^{3/2}L²/(4π√E) + 1/4, valid when
    /// the amplitudes solve the two-amplitude problem.
    pub e_m1_params: f64,
    /// Whether e₁ clears the exclusion band around 3/2.
    pub nondegenerate: bool,
}

/// Closed-form vs finite-difference layout Jacobian determinant.
#[derive(Debug, Clone)]
pub struct LayoutJacobianReport {
    pub det_closed: f64,
    pub det_fd: f64,
    /// Amplitude ratio α = √(v_l/v_s).
    pub alpha: f64,
    /// α³ − 2α² − 2α + 1, whose roots (3±√5)/2 are poles of the closed
    /// form.
    pub denominator: f64,
    pub near_pole: bool,
    /// True when exactly one of the two routes reports a vanishing
    /// determinant — the open disagreement this report exists to expose.
    pub vanishing_mismatch: bool,
}

/// Assembles B, 𝒞 and the spectrum of E⁻¹ for gap d₂ between the two
/// spikes.
pub fn build_matrices(
    v_s: f64,
    v_l: f64,
    d2: f64,
    p: &ModelParams,
) -> Result<StabilityMatrices> {
    p.validate()?;
    let (a0, _) = p.constant_levels()?;
    if !(v_s > 0.0 && v_l > 0.0 && d2 > 0.0) {
        return Err(CoreError::NonPositiveField {
            name: "stability inputs",
            x: f64::NAN,
            value: v_s.min(v_l).min(d2),
        });
    }
    let e = p.d_hat * a0 * a0;
    let b = [[1.0 / d2, -1.0 / d2], [-1.0 / d2, 1.0 / d2]];
    let c_diag = [
        PROFILE_MASS / e * v_s.powf(-1.5),
        PROFILE_MASS / e * v_l.powf(-1.5),
    ];
    // E⁻¹ = B𝒞⁻¹ + I.
    let e_inv = [
        [b[0][0] / c_diag[0] + 1.0, b[0][1] / c_diag[1]],
        [b[1][0] / c_diag[0], b[1][1] / c_diag[1] + 1.0],
    ];
    // Eigenvalues from the characteristic quadratic λ² − Tλ + Δ.
    let t = e_inv[0][0] + e_inv[1][1];
    let delta = e_inv[0][0] * e_inv[1][1] - e_inv[0][1] * e_inv[1][0];
    let disc = t * t - 4.0 * delta;
    if disc < 0.0 {
        return Err(CoreError::Inconsistency {
            what: "complex spectrum of the interaction matrix",
            lhs: disc,
            rhs: 0.0,
            rel: disc.abs(),
            tol: 0.0,
        });
    }
    let sq = disc.sqrt();
    let e_m1 = 0.5 * (t + sq);
    let e_m2 = 0.5 * (t - sq);
    // Eigenvector of e_m1: (E⁻¹ − e_m1 I) x = 0 via the larger row.
    let mode_m1 = normalized_mode(&e_inv, e_m1);
    Ok(StabilityMatrices {
        b,
        c_diag,
        e_inv,
        e_m1,
        e_m2,
        mode_m1,
    })
}

fn normalized_mode(m: &[[f64; 2]; 2], lambda: f64) -> [f64; 2] {
    // Rows of (M − λI) are parallel; build the kernel vector from the
    // numerically larger one.
    let r0 = [m[0][0] - lambda, m[0][1]];
    let r1 = [m[1][0], m[1][1] - lambda];
    let pick = if r0[0].abs() + r0[1].abs() >= r1[0].abs() + r1[1].abs() {
        r0
    } else {
        r1
    };
    let v = if pick[1].abs() > pick[0].abs() {
        [1.0, -pick[0] / pick[1]]
    } else if pick[0] != 0.0 {
        [-pick[1] / pick[0], 1.0]
    } else {
        [1.0, 0.0]
    };
    let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
    [v[0] / norm, v[1] / norm]
}

/// Evaluates the see-saw eigenvalue by its three routes (spectrum, trace
/// formula, parameter form with d₂ = L) and tests e₁ ≠ 3/2.  The three
/// routes must agree to 1e−3 — inputs are allowed to be rounded — or an
/// inconsistency error is returned.
pub fn nondegeneracy_report(v_s: f64, v_l: f64, p: &ModelParams) -> Result<NondegeneracyReport> {
    let (a0, g) = p.constant_levels()?;
    let e = p.d_hat * a0 * a0;
    let l = p.half_length;
    let matrices = build_matrices(v_s, v_l, l, p)?;
    let e_m1_trace = 1.0 + e / (PROFILE_MASS * l) * (v_s.powf(1.5) + v_l.powf(1.5));
    let e_m1_params =
        g.powf(1.5) * l * l / (4.0 * std::f64::consts::PI * e.sqrt()) + 0.25;
    for (what, other) in [
        ("see-saw eigenvalue vs trace formula", e_m1_trace),
        ("see-saw eigenvalue vs parameter form", e_m1_params),
    ] {
        let rel = (matrices.e_m1 - other).abs() / matrices.e_m1.abs().max(other.abs());
        if rel > 1e-3 {
            return Err(CoreError::Inconsistency {
                what,
                lhs: matrices.e_m1,
                rhs: other,
                rel,
                tol: 1e-3,
            });
        }
    }
    let critical = 1.5;
    let nondegenerate = (matrices.e_m1 - critical).abs() > DEGENERACY_BAND * critical;
    Ok(NondegeneracyReport {
        e_m1: matrices.e_m1,
        e_m1_trace,
        e_m1_params,
        nondegenerate,
    })
}

/// Evaluates the layout Jacobian determinant both ways at an
/// amplitude-consistent two-spike configuration.
///
/// The supplied (v_s, v_l) must satisfy the amplitude-sum constraint to
/// 1e−6 relative (anything returned by the two-amplitude solver or the
/// symmetric predictor does); otherwise the constrained map t ↦ v(t) is
/// not anchored at the input and the comparison would be meaningless.
pub fn layout_jacobian(v_s: f64, v_l: f64, p: &ModelParams) -> Result<LayoutJacobianReport> {
    p.validate()?;
    let (a0, g) = p.constant_levels()?;
    let e = p.d_hat * a0 * a0;
    let l = p.half_length;
    if !(v_s > 0.0 && v_l > 0.0) {
        return Err(CoreError::NonPositiveField {
            name: "v-amplitude",
            x: f64::NAN,
            value: v_s.min(v_l),
        });
    }

    let alpha = (v_l / v_s).sqrt();
    let numerator = ((alpha - 1.0) * (alpha - 1.0)) * (alpha + 1.0);
    let denominator = alpha * alpha * alpha - 2.0 * alpha * alpha - 2.0 * alpha + 1.0;
    let pi = std::f64::consts::PI;
    let det_closed = pi.powi(4) / (16.0 * e * e) / (v_s * v_s * v_l * v_l) * numerator
        / denominator;

    // Anchor check: the input must solve the amplitude-sum identity.
    let mass = PROFILE_MASS * (1.0 / v_s.sqrt() + 1.0 / v_l.sqrt());
    let rel = (mass - 2.0 * g * l).abs() / (2.0 * g * l);
    if rel > 1e-6 {
        return Err(CoreError::Inconsistency {
            what: "layout amplitudes vs amplitude-sum constraint",
            lhs: mass,
            rhs: 2.0 * g * l,
            rel,
            tol: 1e-6,
        });
    }

    let t_star = positions_from_amplitudes(&[v_s, v_l], p)?;
    let near_pole = denominator.abs() <= POLE_BAND;

    // Finite-difference determinant of t ↦ F(t, v(t)).
    let step = FD_STEP_REL * l;
    let mut jac = [[0.0; 2]; 2];
    for (col, _) in t_star.iter().enumerate() {
        let mut tp = [t_star[0], t_star[1]];
        let mut tm = tp;
        tp[col] += step;
        tm[col] -= step;
        let fp = constrained_forces(&tp, [v_s, v_l], g, e, l)?;
        let fm = constrained_forces(&tm, [v_s, v_l], g, e, l)?;
        jac[0][col] = (fp[0] - fm[0]) / (2.0 * step);
        jac[1][col] = (fp[1] - fm[1]) / (2.0 * step);
    }
    let det_fd = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];

    let scale = g * g;
    let closed_vanishes = det_closed.abs() <= 1e-6 * scale;
    let fd_vanishes = det_fd.abs() <= 1e-6 * scale;
    Ok(LayoutJacobianReport {
        det_closed,
        det_fd,
        alpha,
        denominator,
        near_pole,
        vanishing_mismatch: closed_vanishes != fd_vanishes,
    })
}

/// F(t, v(t)) where v(t) solves the amplitude-sum identity together with
/// the integrated force-difference relation at layout t.
fn constrained_forces(t: &[f64; 2], v_guess: [f64; 2], g: f64, e: f64, l: f64) -> Result<[f64; 2]> {
    let v = solve_amplitudes_at(t, v_guess, g, e, l)?;
    let s = [PROFILE_MASS / v[0].sqrt(), PROFILE_MASS / v[1].sqrt()];
    let total = s[0] + s[1];
    Ok([
        0.5 * s[0] - total * (t[0] + l) / (2.0 * l),
        0.5 * s[1] + s[0] - total * (t[1] + l) / (2.0 * l),
    ])
}

/// 2×2 Newton iteration for the amplitude constraints at fixed layout.
fn solve_amplitudes_at(
    t: &[f64; 2],
    mut v: [f64; 2],
    g: f64,
    e: f64,
    l: f64,
) -> Result<[f64; 2]> {
    let q = ((t[1] + l).powi(2) - (t[0] + l).powi(2)) / (4.0 * l);
    let gap = t[1] - t[0];
    for _ in 0..50 {
        let s = [PROFILE_MASS / v[0].sqrt(), PROFILE_MASS / v[1].sqrt()];
        let g1 = s[0] + s[1] - 2.0 * g * l;
        let g2 = v[1] - v[0] - (s[0] * gap - (s[0] + s[1]) * q) / e;
        if g1.abs() < 1e-13 * g * l && g2.abs() < 1e-13 * (v[0].abs() + v[1].abs() + 1.0) {
            return Ok(v);
        }
        // Analytic partials: ds/dv = −s/(2v).
        let ds = [-0.5 * s[0] / v[0], -0.5 * s[1] / v[1]];
        let j11 = ds[0];
        let j12 = ds[1];
        let j21 = -1.0 - (ds[0] * gap - ds[0] * q) / e;
        let j22 = 1.0 + ds[1] * q / e;
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            return Err(CoreError::SingularSystem {
                detail: "amplitude constraint Jacobian".to_string(),
            });
        }
        let dv0 = (g1 * j22 - g2 * j12) / det;
        let dv1 = (g2 * j11 - g1 * j21) / det;
        let next = [v[0] - dv0, v[1] - dv1];
        if !(next[0] > 0.0 && next[1] > 0.0) {
            return Err(CoreError::SingularSystem {
                detail: "amplitude constraints left the positive cone".to_string(),
            });
        }
        v = next;
    }
    Err(CoreError::SingularSystem {
        detail: "amplitude constraint iteration did not converge".to_string(),
    })
}
