//! Closed-form spike predictions in the small-ε limit.
//!
//! For constant coefficients (write G = Ā − A₀ for the constant γ and
//! E = D̂A₀²), interior K-spike equilibria obey two coupled facts:
//!
//!  * mass: Σⱼ √2·π/√vⱼ = 2GL                             (amplitude sum)
//!  * force balance: each spike sits where the outer v-field is locally
//!    even, which pins positions once amplitudes are known.
//!
//! Symmetric patterns share one amplitude v₀ = π²K²/(2G²L²) on the
//! equally spaced lattice tᵢ = (2i−1−K)L/K.  Two-amplitude patterns
//! (k₁ tall spikes, k₂ short ones) reduce to the quadratic
//! z² − z/C + 1 = 0 with C = √π·E^{1/4}·√(k₁k₂)/(G^{3/4}·L), a root
//! being admissible when z < √(k₂/k₁); equality is the symmetric
//! degeneracy.  For spatially varying γ a single spike locks onto the
//! median of the γ-mass with amplitude 2π²/(∫γ)².

use crate::error::{CoreError, Result};
use crate::field::SpikePattern;
use crate::ground::PROFILE_MASS;
use crate::model::ModelParams;

/// Tolerance for the internal consistency identities every returned
/// solution must satisfy.
const IDENTITY_RTOL: f64 = 1e-9;
/// Relative exclusion band around degenerate parameter values.
const DEGENERACY_BAND: f64 = 1e-9;

/// Equal-amplitude K-spike prediction.
#[derive(Debug, Clone)]
pub struct SymmetricPrediction {
    pub pattern: SpikePattern,
    /// Common v-amplitude v₀.
    pub v0: f64,
}

/// How many admissible two-amplitude patterns exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymmetricClass {
    UniqueSolution,
    TwoSolutions,
    NoSolution,
    /// The only root sits exactly on z = √(k₂/k₁), where the two
    /// amplitudes coincide and the pattern is the symmetric one.
    DegenerateSymmetric,
}

/// One admissible root of the amplitude quadratic.
#[derive(Debug, Clone)]
pub struct AsymmetricRoot {
    pub z: f64,
    /// Amplitude of the k₁ tall spikes (small v ⇒ tall in A).
    pub v_small: f64,
    /// Amplitude of the k₂ short spikes.
    pub v_large: f64,
}

/// Output of the two-amplitude solver.
#[derive(Debug, Clone)]
pub struct AsymmetricSolution {
    /// The constant C of the quadratic.
    pub c_value: f64,
    /// Admissible roots, principal (smaller z) first.
    pub roots: Vec<AsymmetricRoot>,
    pub classification: AsymmetricClass,
    /// Spike pattern of the principal root when k₁ = k₂ = 1: tall spike
    /// left, short spike right.  `None` otherwise.
    pub pattern: Option<SpikePattern>,
}

/// Single-spike prediction for spatially varying γ.
#[derive(Debug, Clone)]
pub struct AnisotropicPrediction {
    /// Spike position: the median point of the γ mass.
    pub position: f64,
    /// v-amplitude 2π²/(∫γ)².
    pub v0: f64,
    /// ∫γ over the domain.
    pub gamma_mass: f64,
}

/// Equal-amplitude prediction for K interior spikes.
pub fn symmetric_prediction(k: usize, p: &ModelParams) -> Result<SymmetricPrediction> {
    p.validate()?;
    if k == 0 {
        return Err(CoreError::SeparationViolated {
            detail: "spike count must be at least 1".to_string(),
        });
    }
    let (_, g) = p.constant_levels()?;
    let l = p.half_length;
    let kf = k as f64;
    let pi = std::f64::consts::PI;
    let v0 = pi * pi * kf * kf / (2.0 * g * g * l * l);
    let positions: Vec<f64> = (1..=k)
        .map(|i| (2.0 * i as f64 - 1.0 - kf) * l / kf)
        .collect();
    let pattern = SpikePattern::new(positions, vec![v0; k], l)?;
    Ok(SymmetricPrediction { pattern, v0 })
}

/// The constant C = √π·(D̂A₀²)^{1/4}·√(k₁k₂)/((Ā−A₀)^{3/4}·L) governing
/// existence of two-amplitude patterns.
pub fn asymmetric_constant(k1: usize, k2: usize, p: &ModelParams) -> Result<f64> {
    p.validate()?;
    if k1 == 0 || k2 == 0 {
        return Err(CoreError::SeparationViolated {
            detail: "both spike groups must be non-empty".to_string(),
        });
    }
    let (a0, g) = p.constant_levels()?;
    let e = p.d_hat * a0 * a0;
    let pi = std::f64::consts::PI;
    Ok(pi.sqrt() * e.powf(0.25) * ((k1 * k2) as f64).sqrt()
        / (g.powf(0.75) * p.half_length))
}

/// Solves the two-amplitude problem for k₁ tall and k₂ short spikes.
pub fn solve_asymmetric(k1: usize, k2: usize, p: &ModelParams) -> Result<AsymmetricSolution> {
    let c = asymmetric_constant(k1, k2, p)?;
    let (a0, g) = p.constant_levels()?;
    let e = p.d_hat * a0 * a0;
    let l = p.half_length;
    let pi = std::f64::consts::PI;
    let m = ((k2 as f64) / (k1 as f64)).sqrt();

    let mut roots = Vec::new();
    let mut degenerate_seen = false;

    let two_c = 2.0 * c;
    if (two_c - 1.0).abs() <= 1e-12 {
        // Double root z = 1 of z² − z/C + 1.
        if (1.0 - m).abs() <= DEGENERACY_BAND * m.max(1.0) {
            degenerate_seen = true;
        } else if 1.0 < m {
            roots.push(1.0);
        }
    } else if two_c < 1.0 {
        let disc = (1.0 - 4.0 * c * c).sqrt();
        for z in [(1.0 - disc) / (2.0 * c), (1.0 + disc) / (2.0 * c)] {
            if (z - m).abs() <= DEGENERACY_BAND * m {
                degenerate_seen = true;
            } else if z < m {
                roots.push(z);
            }
        }
    }

    let classification = match (roots.len(), degenerate_seen) {
        (0, true) => AsymmetricClass::DegenerateSymmetric,
        (0, false) => AsymmetricClass::NoSolution,
        (1, _) => AsymmetricClass::UniqueSolution,
        (2, _) => AsymmetricClass::TwoSolutions,
        _ => unreachable!("quadratic has at most two roots"),
    };

    let roots: Vec<AsymmetricRoot> = roots
        .into_iter()
        .map(|z| {
            let v_small = z * z * pi * (k1 as f64) / (2.0 * (k2 as f64) * (e * g).sqrt());
            let v_large = pi * pi / (4.0 * e * g) / v_small;
            AsymmetricRoot {
                z,
                v_small,
                v_large,
            }
        })
        .collect();

    // Every admissible root must satisfy the amplitude-sum and product
    // identities; a violation means the closed forms above are being
    // used outside their derivation and must not be returned silently.
    for root in &roots {
        let mass = PROFILE_MASS
            * (k1 as f64 / root.v_small.sqrt() + k2 as f64 / root.v_large.sqrt());
        check_identity("amplitude sum", mass, 2.0 * g * l)?;
        let product_target = pi / (std::f64::consts::SQRT_2 * e) * (0.5 * l)
            / (k1 as f64 / root.v_small.sqrt() + k2 as f64 / root.v_large.sqrt());
        check_identity("amplitude product", root.v_small * root.v_large, product_target)?;
    }

    let pattern = if k1 == 1 && k2 == 1 {
        roots.first().map(|root| {
            let amplitudes = vec![root.v_small, root.v_large];
            let positions = positions_from_amplitudes(&amplitudes, p)?;
            // Force-balance difference relation between the two spikes.
            let s1 = 1.0 / root.v_small.sqrt();
            let s2 = 1.0 / root.v_large.sqrt();
            let gap = positions[1] - positions[0];
            let rhs = pi / (std::f64::consts::SQRT_2 * e) * gap * 0.5 * (s1 - s2);
            check_identity("amplitude difference", root.v_large - root.v_small, rhs)?;
            SpikePattern::new(positions, amplitudes, l)
        })
        .transpose()?
    } else {
        None
    };

    Ok(AsymmetricSolution {
        c_value: c,
        roots,
        classification,
        pattern,
    })
}

/// Positions implied by an amplitude vector: spike i sits at
/// tᵢ = L·(Σ_{j<i} sⱼ − Σ_{j>i} sⱼ)/Σⱼ sⱼ with sⱼ = vⱼ^{−1/2}.
pub fn positions_from_amplitudes(v_amplitudes: &[f64], p: &ModelParams) -> Result<Vec<f64>> {
    if v_amplitudes.is_empty() {
        return Err(CoreError::SeparationViolated {
            detail: "need at least one amplitude".to_string(),
        });
    }
    for &v in v_amplitudes {
        if !(v > 0.0) {
            return Err(CoreError::NonPositiveField {
                name: "v-amplitude",
                x: f64::NAN,
                value: v,
            });
        }
    }
    let s: Vec<f64> = v_amplitudes.iter().map(|&v| 1.0 / v.sqrt()).collect();
    let total: f64 = s.iter().sum();
    let l = p.half_length;
    let mut prefix = 0.0;
    Ok(s
        .iter()
        .map(|&si| {
            let before = prefix;
            prefix += si;
            let after = total - prefix;
            l * (before - after) / total
        })
        .collect())
}

/// Per-spike force residuals Fᵢ of a pattern; all zero (to rounding) at
/// an equilibrium layout.
pub fn interaction_residuals(pattern: &SpikePattern, p: &ModelParams) -> Result<Vec<f64>> {
    p.validate()?;
    let l = p.half_length;
    let s: Vec<f64> = pattern
        .v_amplitudes()
        .iter()
        .map(|&v| PROFILE_MASS / v.sqrt())
        .collect();
    let total: f64 = s.iter().sum();
    let mut prefix = 0.0;
    Ok(pattern
        .positions()
        .iter()
        .zip(&s)
        .map(|(&t, &si)| {
            let f = 0.5 * si + prefix - total * (t + l) / (2.0 * l);
            prefix += si;
            f
        })
        .collect())
}

/// Single-spike prediction with spatially varying γ: the spike locks
/// onto the median of the γ mass, independent of A₀.
pub fn anisotropic_prediction(p: &ModelParams) -> Result<AnisotropicPrediction> {
    p.validate()?;
    let l = p.half_length;
    let mass = p.gamma.integrate(-l, l);
    if !(mass > 0.0) {
        return Err(CoreError::NonPositiveField {
            name: "gamma mass",
            x: 0.0,
            value: mass,
        });
    }
    // Bisection for G(t) = ∫₋L..t γ − mass/2; γ > 0 makes G strictly
    // increasing, so the root is unique.
    let target = 0.5 * mass;
    let mut lo = -l;
    let mut hi = l;
    let mut glo = -target;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gmid = p.gamma.integrate(-l, mid) - target;
        if gmid.abs() <= 1e-12 * mass && (hi - lo) <= 1e-12 * l {
            break;
        }
        if (gmid >= 0.0) == (glo >= 0.0) {
            lo = mid;
            glo = gmid;
        } else {
            hi = mid;
        }
    }
    let position = 0.5 * (lo + hi);
    let pi = std::f64::consts::PI;
    Ok(AnisotropicPrediction {
        position,
        v0: 2.0 * pi * pi / (mass * mass),
        gamma_mass: mass,
    })
}

/// The scale 2√π·(D̂A₀²)^{1/4}/((Ā−A₀)^{3/4}·L) appearing in both
/// existence and nondegeneracy thresholds (equals 2C at k₁ = k₂ = 1).
pub fn threshold_scale(p: &ModelParams) -> Result<f64> {
    asymmetric_constant(1, 1, p).map(|c| 2.0 * c)
}

/// Existence condition for asymmetric patterns: threshold scale ≤ 1.
pub fn check_existence_scale(p: &ModelParams) -> Result<bool> {
    Ok(threshold_scale(p)? <= 1.0)
}

/// Nondegeneracy condition: the threshold scale must avoid 2/√5, where
/// the layout Jacobian of the two-spike pattern loses rank.  A relative
/// exclusion band of 1e−9 is applied.
pub fn check_nondegenerate_scale(p: &ModelParams) -> Result<bool> {
    let q = threshold_scale(p)?;
    let critical = 2.0 / 5.0_f64.sqrt();
    Ok((q - critical).abs() > DEGENERACY_BAND * critical)
}

fn check_identity(what: &'static str, lhs: f64, rhs: f64) -> Result<()> {
    let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    let rel = (lhs - rhs).abs() / scale;
    if rel > IDENTITY_RTOL {
        return Err(CoreError::Inconsistency {
            what,
            lhs,
            rhs,
            rel,
            tol: IDENTITY_RTOL,
        });
    }
    Ok(())
}
