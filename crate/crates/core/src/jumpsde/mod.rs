//! Finite-intensity jump diffusions with a state-dependent power-law kernel.
//!
//! Jumps are driven by a Poisson random measure with the Cauchy intensity
//! `dt ⊗ dv/v²`: an event with mark `v` moves the state by `c(X(t−), v)`,
//! where `c(x, ·)` is the transportation function of the kernel at `x`.
//! Marks are state-independent, so two diffusions fed the same marks are
//! synchronously coupled.

mod bound;
mod simulate;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::measures::{transport_pareto, HalfTransport, TransportFunction};

pub use bound::{
    abar_gap, bound_t1, bound_t2, default_x_grid, g_function, kernel_t1, sup_over_grid,
    BoundReport, T2Ingredients, Theorem,
};
pub use simulate::{
    couple_study, generate_marks, simulate, simulate_coupled, simulate_with_marks, CoupledPaths,
    CouplingSummary, Event, Jump, Path,
};

/// Largest admissible `|X|` before a path is declared blown up.
pub const OVERFLOW_GUARD: f64 = 1e12;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Drift {
    #[default]
    Zero,
    /// `a(x) = intercept + slope·x`
    Linear { slope: f64, intercept: f64 },
    /// `a(x) = Σ coeffs[k] x^k`, with an optional declared Lipschitz constant
    /// on the region of interest.
    Polynomial {
        coeffs: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
}

impl Drift {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Drift::Zero => 0.0,
            Drift::Linear { slope, intercept } => intercept + slope * x,
            Drift::Polynomial { coeffs, .. } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }

    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Drift::Zero => Some(0.0),
            Drift::Linear { slope, .. } => Some(slope.abs()),
            Drift::Polynomial { coeffs, lipschitz } => {
                lipschitz.or_else(|| (coeffs.len() <= 2).then(|| coeffs.get(1).map_or(0.0, |c| c.abs())))
            }
        }
    }
}

/// `α(x)`: `cold` below `s* − δ`, `warm` above `s* + δ`, linear in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaProfile {
    pub warm: f64,
    pub cold: f64,
    #[serde(default = "default_s_star")]
    pub s_star: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_s_star() -> f64 {
    -0.8
}

fn default_delta() -> f64 {
    0.1
}

impl AlphaProfile {
    pub fn constant(alpha: f64) -> Self {
        Self {
            warm: alpha,
            cold: alpha,
            s_star: default_s_star(),
            delta: default_delta(),
        }
    }

    pub fn at(&self, x: f64) -> f64 {
        let lo = self.s_star - self.delta;
        let hi = self.s_star + self.delta;
        if x <= lo {
            self.cold
        } else if x >= hi {
            self.warm
        } else {
            self.cold + (self.warm - self.cold) * (x - lo) / (2.0 * self.delta)
        }
    }

    pub fn lipschitz(&self) -> f64 {
        (self.warm - self.cold).abs() / (2.0 * self.delta)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.warm.min(self.cold), self.warm.max(self.cold))
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("delta", self.delta)?;
        if !self.s_star.is_finite() {
            return Err(Error::domain("s_star", self.s_star, "must be finite"));
        }
        for (name, a) in [("alpha warm", self.warm), ("alpha cold", self.cold)] {
            if !(a >= 2.0) || !a.is_finite() {
                return Err(Error::domain(name, a, "kernel exponents must be finite and >= 2"));
            }
        }
        Ok(())
    }
}

/// One side of the kernel: `Π_{α(x), ε}` restricted to `|v| > ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideKernel {
    pub eps: f64,
    pub alpha: AlphaProfile,
    /// Explicit intensity `λ`; absent means the probability normalization
    /// `λ = α(x) ε^{α(x)}`, which keeps the side's jump rate at 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl SideKernel {
    pub fn validate(&self) -> Result<()> {
        require_positive("eps", self.eps)?;
        if let Some(l) = self.lambda {
            require_positive("lambda", l)?;
        }
        self.alpha.validate()
    }

    fn lambda_at(&self, alpha: f64) -> f64 {
        self.lambda
            .unwrap_or_else(|| crate::measures::probability_lambda(alpha, self.eps))
    }

    /// Cauchy breakpoint `α ε^α / λ` below which the side transport vanishes.
    pub fn breakpoint(&self, alpha: f64) -> f64 {
        match self.lambda {
            None => 1.0,
            Some(l) => alpha * self.eps.powf(alpha) / l,
        }
    }

    /// `inf_x` of the breakpoint; `α ↦ α ε^α` has no interior minimum, so
    /// checking the profile's two plateau values suffices.
    pub fn mark_floor(&self) -> f64 {
        let (lo, hi) = self.alpha.range();
        self.breakpoint(lo).min(self.breakpoint(hi))
    }

    /// Jump size for a positive mark `v` in state `x`.
    pub fn jump(&self, x: f64, v: f64) -> f64 {
        let alpha = self.alpha.at(x);
        if v < self.breakpoint(alpha) {
            return 0.0;
        }
        match self.lambda {
            None => self.eps * v.powf(1.0 / alpha),
            Some(l) => (l / alpha * v).powf(1.0 / alpha),
        }
    }

    /// Half-line transport of the side measure in state `x`.
    pub fn transport_at(&self, x: f64) -> Result<HalfTransport> {
        let alpha = self.alpha.at(x);
        Ok(transport_pareto(alpha, self.eps, self.lambda_at(alpha))?.plus)
    }

    /// Side mass `λ ε^{−α} / α` in state `x`.
    pub fn mass_at(&self, x: f64) -> f64 {
        let alpha = self.alpha.at(x);
        self.lambda_at(alpha) * self.eps.powf(-alpha) / alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus: Option<SideKernel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus: Option<SideKernel>,
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        if self.plus.is_none() && self.minus.is_none() {
            return Err(Error::DegenerateMeasure("kernel has no jump side".into()));
        }
        for side in [self.plus, self.minus].into_iter().flatten() {
            side.validate()?;
        }
        Ok(())
    }

    /// Transportation function of `Π(x, ·)`.
    pub fn transport_at(&self, x: f64) -> Result<TransportFunction> {
        let half = |s: &Option<SideKernel>| s.map_or(Ok(HalfTransport::zero()), |k| k.transport_at(x));
        Ok(TransportFunction::new(half(&self.plus)?, half(&self.minus)?))
    }

    /// Total intensity `Λ(x)`.
    pub fn intensity_at(&self, x: f64) -> f64 {
        [self.plus, self.minus].iter().flatten().map(|k| k.mass_at(x)).sum()
    }

    /// Whether every present side is probability-normalized, making `Λ`
    /// state-independent.
    pub fn is_normalized(&self) -> bool {
        [self.plus, self.minus].iter().flatten().all(|k| k.lambda.is_none())
    }
}

/// `dX = a(X) dt + ∫ c(X(t−), v) ν₀(dt, dv)` with a finite-intensity kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpDiffusionSpec {
    #[serde(default)]
    pub drift: Drift,
    pub kernel: Kernel,
    #[serde(default)]
    pub x0: f64,
}

impl JumpDiffusionSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.x0.is_finite() {
            return Err(Error::domain("x0", self.x0, "must be finite"));
        }
        self.kernel.validate()
    }

    pub fn with_x0(&self, x0: f64) -> Self {
        Self { x0, ..self.clone() }
    }
}
