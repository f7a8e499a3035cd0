use serde::{Deserialize, Serialize};

use crate::distance::{power_pair_side, tp_quadrature, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::measures::MeasureSpec;

use super::{JumpDiffusionSpec, Kernel, SideKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    /// `Δ` built from `T₂` and coefficient gaps (general Lévy-type SDEs).
    T2,
    /// `Δ = ρ(x₁, x₂) + sup_x T₁` (pure-jump SDEs).
    T1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub delta: f64,
    pub g_of_delta: f64,
    pub theorem: Theorem,
}

impl BoundReport {
    pub fn new(delta: f64, theorem: Theorem) -> Self {
        Self {
            delta,
            g_of_delta: g_function(delta),
            theorem,
        }
    }
}

/// `G(x) = max{√x, x}`.
pub fn g_function(x: f64) -> f64 {
    x.sqrt().max(x)
}

fn rho(a: f64, b: f64) -> f64 {
    (a - b).abs().min(1.0)
}

/// Evaluation points covering both plateaus, the band ends and the band
/// interior of every side profile of both kernels.
pub fn default_x_grid(spec1: &JumpDiffusionSpec, spec2: &JumpDiffusionSpec) -> Vec<f64> {
    const INTERIOR: usize = 16;
    let mut grid = Vec::new();
    for k in [&spec1.kernel, &spec2.kernel] {
        for side in [k.plus, k.minus].into_iter().flatten() {
            let p = side.alpha;
            let (lo, hi) = (p.s_star - p.delta, p.s_star + p.delta);
            grid.extend([lo - 1.0, lo, hi, hi + 1.0]);
            grid.extend((1..INTERIOR).map(|i| lo + (hi - lo) * i as f64 / INTERIOR as f64));
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn side_t1(a: Option<SideKernel>, b: Option<SideKernel>, x: f64) -> Option<f64> {
    match (a, b) {
        (None, None) => Some(0.0),
        (Some(a), Some(b)) if a.lambda.is_none() && b.lambda.is_none() && a.eps == b.eps => {
            Some(power_pair_side(a.alpha.at(x), b.alpha.at(x), a.eps, 1.0))
        }
        _ => None,
    }
}

/// `T₁(Π₁(x, ·), Π₂(x, ·))`, in closed form when both sides are
/// probability-normalized with shared thresholds.
pub fn kernel_t1(k1: &Kernel, k2: &Kernel, x: f64) -> Result<f64> {
    if let (Some(p), Some(m)) = (side_t1(k1.plus, k2.plus, x), side_t1(k1.minus, k2.minus, x)) {
        return Ok(p + m);
    }
    Ok(tp_quadrature(&k1.transport_at(x)?, &k2.transport_at(x)?, 1.0, DEFAULT_TOL)?.value)
}

/// `sup` of `f` over a grid; non-finite values are divergence errors.
pub fn sup_over_grid(grid: &[f64], mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let mut sup = 0.0f64;
    for &x in grid {
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::Divergence(format!("value at x = {x} is not finite")));
        }
        sup = sup.max(v);
    }
    Ok(sup)
}

/// `Δ = ρ(x₁, x₂) + sup_x T₁(Π₁(x, ·), Π₂(x, ·))` and `G(Δ)`.
pub fn bound_t1(
    spec1: &JumpDiffusionSpec,
    spec2: &JumpDiffusionSpec,
    x1: f64,
    x2: f64,
    grid: Option<&[f64]>,
) -> Result<BoundReport> {
    spec1.validate()?;
    spec2.validate()?;
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = default_x_grid(spec1, spec2);
            &owned
        }
    };
    let sup = sup_over_grid(grid, |x| kernel_t1(&spec1.kernel, &spec2.kernel, x))?;
    Ok(BoundReport::new(rho(x1, x2) + sup, Theorem::T1))
}

/// Ingredients of `Δ = ρ(x₁,x₂) + ‖a₁−a₂‖² + ‖ā₁−ā₂‖² + ‖b₁−b₂‖² + sup T₂ + (sup T₂)²`,
/// all sup-norms over the state space.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct T2Ingredients {
    /// `ρ(x₁, x₂)`; larger values are truncated at 1.
    pub initial_gap: Option<f64>,
    pub drift_gap: Option<f64>,
    /// Gap of `ā(x) = Π(x, {|u| > 1})`.
    pub abar_gap: Option<f64>,
    pub diffusion_gap: Option<f64>,
    pub sup_t2: Option<f64>,
}

pub fn bound_t2(params: &T2Ingredients) -> Result<BoundReport> {
    let need = |v: Option<f64>, name: &'static str| -> Result<f64> {
        let v = v.ok_or(Error::IncompleteInput(name))?;
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::domain(name, v, "must be finite and >= 0"));
        }
        Ok(v)
    };
    let rho = need(params.initial_gap, "initial_gap")?.min(1.0);
    let a = need(params.drift_gap, "drift_gap")?;
    let abar = need(params.abar_gap, "abar_gap")?;
    let b = need(params.diffusion_gap, "diffusion_gap")?;
    let t2 = need(params.sup_t2, "sup_t2")?;
    let delta = rho + a * a + abar * abar + b * b + t2 + t2 * t2;
    Ok(BoundReport::new(delta, Theorem::T2))
}

/// `sup_x |Π₁(x, {|u|>1}) − Π₂(x, {|u|>1})|` for kernels given as specs.
pub fn abar_gap(
    grid: &[f64],
    k1: impl Fn(f64) -> MeasureSpec,
    k2: impl Fn(f64) -> MeasureSpec,
) -> Result<f64> {
    let abar = |m: &MeasureSpec| m.tail_plus(1.0) + m.tail_minus(1.0);
    sup_over_grid(grid, |x| Ok((abar(&k1(x)) - abar(&k2(x))).abs()))
}
