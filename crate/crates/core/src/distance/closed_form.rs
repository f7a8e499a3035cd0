use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::measures::MeasureSpec;

use super::{DistanceResult, Method};

/// Exponents closer than this to 1 make the closed form indeterminate.
pub const ALPHA_ONE_GUARD: f64 = 1e-6;

/// Points of one Cauchy interval `(a, b]` where the Pareto transport meets
/// `ξ − 1`, `ξ` and `ξ + 1`, clamped to the interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoints {
    pub kappa_minus: f64,
    pub kappa_zero: f64,
    pub kappa_plus: f64,
}

impl Breakpoints {
    /// `κ^σ = (α/λ)(ξ + σ)^α` clamped to `[a, b]`; `ξ + σ ≤ 0` maps to `a`.
    pub fn new(xi: f64, alpha: f64, lambda: f64, a: f64, b: f64) -> Self {
        let kappa = |level: f64| {
            if level <= 0.0 {
                a
            } else {
                (alpha / lambda * level.powf(alpha)).clamp(a, b)
            }
        };
        Breakpoints {
            kappa_minus: kappa(xi - 1.0),
            kappa_zero: kappa(xi),
            kappa_plus: kappa(xi + 1.0),
        }
    }
}

/// Antiderivative of `(c_α(v) − ξ) v⁻²` where `c_α(v) = (λv/α)^{1/α}`.
pub fn q_c(xi: f64, x: f64, alpha: f64, lambda: f64) -> f64 {
    let e = 1.0 / alpha;
    (lambda / alpha).powf(e) * x.powf(e - 1.0) / (e - 1.0) + xi / x
}

/// `T₁` between the empirical measure of `sample` and the Pareto measure
/// `Π_{α,ε,λ}`, summed interval by interval over the piecewise-constant
/// empirical transport.
pub fn t1_empirical_vs_pareto(sample: &[f64], eps: f64, alpha: f64, lambda: f64) -> Result<DistanceResult> {
    crate::measures::transport_empirical(sample, eps)?;
    require_positive("alpha", alpha)?;
    require_positive("lambda", lambda)?;
    if (alpha - 1.0).abs() < ALPHA_ONE_GUARD {
        return Err(Error::UnsupportedExponent(alpha));
    }
    let bp = alpha * eps.powf(alpha) / lambda;
    if bp > 1.0 + 1e-12 {
        return Err(Error::InconsistentNormalization(bp));
    }
    let n = sample.len() as f64;
    let mut value = 1.0;
    if bp < 1.0 {
        value += pareto_below_one(bp, alpha, lambda);
    }
    for (i, &xi) in sample.iter().enumerate() {
        let a = n / (n - i as f64);
        let b = if i + 1 == sample.len() {
            f64::INFINITY
        } else {
            n / (n - i as f64 - 1.0)
        };
        let k = Breakpoints::new(xi, alpha, lambda, a, b);
        let q = |x| q_c(xi, x, alpha, lambda);
        value += q(k.kappa_minus) + q(k.kappa_plus) - 2.0 * q(k.kappa_zero) + 1.0 / k.kappa_plus
            - 1.0 / k.kappa_minus;
    }
    Ok(DistanceResult {
        value,
        order: 1.0,
        method: Method::ClosedForm,
        err_estimate: 0.0,
        normalized: false,
    })
}

/// `∫_{bp}^1 (c_α(v) ∧ 1) v⁻² dv`, the part of the Pareto transport that
/// sits where the empirical transport still vanishes.
fn pareto_below_one(bp: f64, alpha: f64, lambda: f64) -> f64 {
    let e = 1.0 / alpha;
    let antider = |x: f64| (lambda / alpha).powf(e) * x.powf(e - 1.0) / (e - 1.0);
    let unit = (alpha / lambda).clamp(bp, 1.0);
    antider(unit) - antider(bp) + (1.0 / unit - 1.0)
}

/// `∫_{t*}^1 t^{−a} dt`.
fn power_integral(t_star: f64, a: f64) -> f64 {
    if (1.0 - a).abs() < 1e-12 {
        -t_star.ln()
    } else {
        (1.0 - t_star.powf(1.0 - a)) / (1.0 - a)
    }
}

/// `mass · ∫₀¹ (scale·|t^{−1/α₁} − t^{−1/α₂}| ∧ 1) dt`.
///
/// This is `T₁` on one half-line between two power transports
/// `c_i(y) = scale·(y·mass)^{1/α_i}` for `y ≥ 1/mass`, after substituting
/// `t = 1/(y·mass)`. The difference is monotone in `t`, so the truncation
/// point is the unique root of `scale·(t^{−a} − t^{−b}) = 1`.
pub fn power_pair_side(alpha1: f64, alpha2: f64, scale: f64, mass: f64) -> f64 {
    if alpha1 == alpha2 || mass == 0.0 || scale == 0.0 {
        return 0.0;
    }
    let (a, b) = {
        let (x, y) = (1.0 / alpha1, 1.0 / alpha2);
        if x > y {
            (x, y)
        } else {
            (y, x)
        }
    };
    let d = |t: f64| scale * (t.powf(-a) - t.powf(-b));
    // bracket in ln t: d(e^{hi}) < 1 at t = 1, grow lo until d > 1
    let mut hi = 0.0f64;
    let mut lo = -1.0f64;
    while d(lo.exp()) <= 1.0 {
        hi = lo;
        lo *= 2.0;
        if lo < -700.0 {
            // the difference never reaches 1 inside the representable range
            return mass * scale * (power_integral(0.0, a) - power_integral(0.0, b));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if d(mid.exp()) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_star = (0.5 * (lo + hi)).exp();
    mass * (t_star + scale * (power_integral(t_star, a) - power_integral(t_star, b)))
}

/// Untruncated counterpart `mass·scale·(α₁/(α₁−1) − α₂/(α₂−1))` of
/// [`power_pair_side`], an upper bound that coincides with it only when
/// the truncation never binds.
pub fn power_pair_side_untruncated(alpha1: f64, alpha2: f64, scale: f64, mass: f64) -> f64 {
    let f = |al: f64| al / (al - 1.0);
    mass * scale * (f(alpha1) - f(alpha2)).abs()
}

/// Whether `|c₁ − c₂|` exceeds 1 somewhere for the pair in [`power_pair_side`].
/// With distinct exponents one transport outgrows the other, so this holds
/// whenever `α₁ ≠ α₂` on a side with mass.
pub fn power_pair_truncation_binds(alpha1: f64, alpha2: f64, mass: f64) -> bool {
    alpha1 != alpha2 && mass > 0.0
}

/// `T₁` between two two-sided power laws with shared side intensities.
pub fn t1_pareto_pair(spec1: &MeasureSpec, spec2: &MeasureSpec) -> Result<DistanceResult> {
    let (
        MeasureSpec::TwoSidedPowerLaw {
            alpha_plus: ap1,
            alpha_minus: am1,
            lambda_plus: lp1,
            lambda_minus: lm1,
        },
        MeasureSpec::TwoSidedPowerLaw {
            alpha_plus: ap2,
            alpha_minus: am2,
            lambda_plus: lp2,
            lambda_minus: lm2,
        },
    ) = (spec1, spec2)
    else {
        return Err(Error::UnsupportedComparison(format!(
            "closed form needs two two_sided specs, got {} and {}",
            spec1.kind(),
            spec2.kind()
        )));
    };
    spec1.validate()?;
    spec2.validate()?;
    if lp1 != lp2 || lm1 != lm2 {
        return Err(Error::UnsupportedComparison(format!(
            "side intensities differ: ({lp1}, {lm1}) vs ({lp2}, {lm2})"
        )));
    }
    let value = power_pair_side(*ap1, *ap2, 1.0, *lp1) + power_pair_side(*am1, *am2, 1.0, *lm1);
    Ok(DistanceResult {
        value,
        order: 1.0,
        method: Method::ClosedForm,
        err_estimate: 0.0,
        normalized: false,
    })
}
