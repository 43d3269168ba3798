//! Model parameters for the hotspot system
//!
//!   A_t = ε²A_xx − A + ρA + A₀(x)
//!   ρ_t = D(ρ_x − 2(ρ/A)A_x)_x − ρA + γ(x)
//!
//! on the interval (−L, L) with no-flux boundary conditions, where
//! D = D̂/ε².  The opportunity baseline A₀ and the reintroduction rate γ
//! are spatial coefficient fields; the constant-coefficient case is the
//! one with a complete amplitude theory, and then Ā := γ + A₀ is the
//! mass of the uniform state (A, ρ) = (Ā, γ/Ā).

use crate::error::{CoreError, Result};

/// A scalar coefficient on [−L, L].
///
/// The first three kinds integrate exactly; `Sampled` holds values at
/// equally spaced nodes spanning the interval and integrates its linear
/// interpolant (trapezoid rule).
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientField {
    /// Constant value.
    Constant(f64),
    /// `offset + slope · x`.
    Affine { offset: f64, slope: f64 },
    /// Piecewise-linear through `(x, value)` breakpoints with strictly
    /// increasing x covering the interval of use.
    PiecewiseLinear { breakpoints: Vec<(f64, f64)> },
    /// Values at `n+1` equally spaced nodes on [−half_length, half_length].
    Sampled { half_length: f64, values: Vec<f64> },
}

impl CoefficientField {
    /// Evaluates the field at `x`, extending constantly outside the
    /// breakpoint/sample range.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CoefficientField::Constant(c) => *c,
            CoefficientField::Affine { offset, slope } => offset + slope * x,
            CoefficientField::PiecewiseLinear { breakpoints } => {
                eval_piecewise(breakpoints, x)
            }
            CoefficientField::Sampled { half_length, values } => {
                let n = values.len() - 1;
                if n == 0 {
                    return values[0];
                }
                let h = 2.0 * half_length / n as f64;
                let s = (x + half_length) / h;
                let i = (s.floor() as isize).clamp(0, n as isize - 1) as usize;
                let frac = (s - i as f64).clamp(0.0, 1.0);
                values[i] * (1.0 - frac) + values[i + 1] * frac
            }
        }
    }

    /// Second derivative at `x`.  Zero for every kind except in the
    /// interior of curved fields; the piecewise kinds are linear between
    /// nodes, so this is identically zero away from kinks and we adopt
    /// zero there as well.
    pub fn second_derivative(&self, _x: f64) -> f64 {
        0.0
    }

    /// ∫ₐᵇ field dx.  Exact antiderivative for the constant, affine and
    /// piecewise-linear kinds; trapezoid rule on the sample nodes for
    /// `Sampled` (with linear end corrections for partial cells).
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        if b < a {
            return -self.integrate(b, a);
        }
        match self {
            CoefficientField::Constant(c) => c * (b - a),
            CoefficientField::Affine { offset, slope } => {
                offset * (b - a) + 0.5 * slope * (b * b - a * a)
            }
            CoefficientField::PiecewiseLinear { breakpoints } => {
                integrate_piecewise(breakpoints, a, b)
            }
            CoefficientField::Sampled { half_length, values } => {
                let n = values.len() - 1;
                if n == 0 {
                    return values[0] * (b - a);
                }
                let h = 2.0 * half_length / n as f64;
                let node = |i: usize| -half_length + i as f64 * h;
                // Integrate the interpolant segment by segment.
                let mut total = 0.0;
                for i in 0..n {
                    let (xl, xr) = (node(i), node(i + 1));
                    let lo = a.max(xl);
                    let hi = b.min(xr);
                    if hi > lo {
                        let mid = 0.5 * (lo + hi);
                        let frac = ((mid - xl) / h).clamp(0.0, 1.0);
                        let v = values[i] * (1.0 - frac) + values[i + 1] * frac;
                        total += v * (hi - lo);
                    }
                }
                // Constant extension outside the sampled range.
                if a < -half_length {
                    total += values[0] * ((-half_length).min(b) - a);
                }
                if b > *half_length {
                    total += values[n] * (b - half_length.max(a));
                }
                total
            }
        }
    }

    /// True when the field carries no spatial variation.
    pub fn is_constant(&self) -> bool {
        match self {
            CoefficientField::Constant(_) => true,
            CoefficientField::Affine { slope, .. } => *slope == 0.0,
            CoefficientField::PiecewiseLinear { breakpoints } => {
                breakpoints.windows(2).all(|w| w[0].1 == w[1].1)
            }
            CoefficientField::Sampled { values, .. } => {
                values.windows(2).all(|w| w[0] == w[1])
            }
        }
    }

    /// The constant value if `is_constant`, else `None`.
    pub fn constant_value(&self) -> Option<f64> {
        if !self.is_constant() {
            return None;
        }
        Some(match self {
            CoefficientField::Constant(c) => *c,
            CoefficientField::Affine { offset, .. } => *offset,
            CoefficientField::PiecewiseLinear { breakpoints } => breakpoints[0].1,
            CoefficientField::Sampled { values, .. } => values[0],
        })
    }

    /// Abscissas where the field can attain extrema: the kink/sample
    /// locations, used by positivity validation alongside grid nodes.
    pub fn breakpoint_xs(&self) -> Vec<f64> {
        match self {
            CoefficientField::Constant(_) | CoefficientField::Affine { .. } => vec![],
            CoefficientField::PiecewiseLinear { breakpoints } => {
                breakpoints.iter().map(|&(x, _)| x).collect()
            }
            CoefficientField::Sampled { half_length, values } => {
                let n = values.len() - 1;
                if n == 0 {
                    return vec![0.0];
                }
                let h = 2.0 * half_length / n as f64;
                (0..=n).map(|i| -half_length + i as f64 * h).collect()
            }
        }
    }
}

fn eval_piecewise(breakpoints: &[(f64, f64)], x: f64) -> f64 {
    let first = breakpoints.first().expect("piecewise field needs breakpoints");
    let last = breakpoints.last().unwrap();
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let k = breakpoints.partition_point(|&(bx, _)| bx <= x);
    let (x0, y0) = breakpoints[k - 1];
    let (x1, y1) = breakpoints[k];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn integrate_piecewise(breakpoints: &[(f64, f64)], a: f64, b: f64) -> f64 {
    // Exact integral of the piecewise-linear interpolant: split [a, b]
    // at interior breakpoints and use the trapezoid value per segment,
    // which is exact for linear pieces.
    let mut cuts = vec![a];
    for &(x, _) in breakpoints {
        if x > a && x < b {
            cuts.push(x);
        }
    }
    cuts.push(b);
    cuts.windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            0.5 * (eval_piecewise(breakpoints, lo) + eval_piecewise(breakpoints, hi))
                * (hi - lo)
        })
        .sum()
}

/// Uniform node grid on [−L, L]: `n` cells, `n + 1` nodes.
#[derive(Debug, Clone)]
pub struct Grid1D {
    nodes: Vec<f64>,
    h: f64,
}

impl Grid1D {
    /// Builds the uniform grid with spacing h = 2L/n.
    pub fn new(half_length: f64, cells: usize) -> Self {
        let h = 2.0 * half_length / cells as f64;
        let nodes = (0..=cells)
            .map(|i| -half_length + i as f64 * h)
            .collect();
        Grid1D { nodes, h }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integration weight of node `i` (h in the interior, h/2 at the two
    /// boundary nodes), so that Σ wᵢ fᵢ is the trapezoid rule.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.nodes.len() {
            0.5 * self.h
        } else {
            self.h
        }
    }

    /// Trapezoid-rule integral of per-node values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| self.weight(i) * v)
            .sum()
    }
}

/// Full parameter set of one model configuration.
#[derive(Debug, Clone)]
pub struct ModelParams {
    /// Half-length L of the domain (−L, L).
    pub half_length: f64,
    /// Spike width parameter ε.
    pub epsilon: f64,
    /// Rescaled diffusivity D̂; the physical diffusivity is D = D̂/ε².
    pub d_hat: f64,
    /// Opportunity baseline A₀(x).
    pub a0: CoefficientField,
    /// Reintroduction rate γ(x).
    pub gamma: CoefficientField,
    /// Number of grid cells.
    pub grid_n: usize,
}

impl ModelParams {
    /// Checks every structural invariant and reports all violations at
    /// once (positivity of ε, D̂, L; positivity of A₀ and γ sampled at
    /// grid nodes and field breakpoints; a sane cell count).
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        if !(self.epsilon > 0.0) {
            violations.push("epsilon must be positive".to_string());
        }
        if !(self.d_hat > 0.0) {
            violations.push("D_hat must be positive".to_string());
        }
        if !(self.half_length > 0.0) {
            violations.push("L must be positive".to_string());
        }
        if self.grid_n < 16 {
            violations.push(format!("grid_n must be at least 16, got {}", self.grid_n));
        }
        if violations.is_empty() {
            for (name, field) in [("A0", &self.a0), ("gamma", &self.gamma)] {
                if let Some(x) = self.first_nonpositive(field) {
                    violations.push(format!("{name} non-positive at x={x}"));
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(CoreError::InvalidParams { violations })
        }
    }

    fn first_nonpositive(&self, field: &CoefficientField) -> Option<f64> {
        let grid = self.grid();
        let probe = grid
            .nodes()
            .iter()
            .copied()
            .chain(field.breakpoint_xs());
        for x in probe {
            if field.eval(x) <= 0.0 {
                return Some(x);
            }
        }
        None
    }

    /// The node grid implied by `grid_n`.
    pub fn grid(&self) -> Grid1D {
        Grid1D::new(self.half_length, self.grid_n)
    }

    /// Errors unless the grid resolves the spike width (h ≤ ε/8).
    pub fn require_resolved_grid(&self) -> Result<Grid1D> {
        let grid = self.grid();
        let limit = self.epsilon / 8.0;
        if grid.h() > limit + 1e-15 * limit {
            return Err(CoreError::GridTooCoarse { h: grid.h(), limit });
        }
        Ok(grid)
    }

    /// True when both coefficients are spatially constant.
    pub fn is_isotropic(&self) -> bool {
        self.a0.is_constant() && self.gamma.is_constant()
    }

    /// (A₀, Ā − A₀) for constant coefficients; errors otherwise.  The
    /// quantity Ā − A₀ equals the constant γ.
    pub fn constant_levels(&self) -> Result<(f64, f64)> {
        let a0 = self.a0.constant_value().ok_or(CoreError::AnisotropicInput {
            field: "A0",
        })?;
        let gamma = self
            .gamma
            .constant_value()
            .ok_or(CoreError::AnisotropicInput { field: "gamma" })?;
        Ok((a0, gamma))
    }

    /// The spatially uniform steady state (A, ρ) = (Ā, γ/Ā) in the
    /// constant-coefficient case.
    pub fn uniform_steady_state(&self) -> Result<crate::field::FieldState> {
        let (a0, gamma) = self.constant_levels()?;
        let abar = a0 + gamma;
        let n = self.grid().len();
        Ok(crate::field::FieldState {
            a: vec![abar; n],
            rho: vec![gamma / abar; n],
            time: 0.0,
        })
    }
}
