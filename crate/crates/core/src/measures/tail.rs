use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Default relative tolerance for numeric tail inversion.
pub const INVERSION_TOL: f64 = 1e-12;

// relative rounding allowance when checking that a tail is nonincreasing
const MONOTONE_SLACK: f64 = 1e-12;

/// A nonincreasing tail function `u ↦ Π((u, ∞))` on `(0, ∞)`.
#[derive(Clone)]
pub enum TailCurve {
    /// Log-log linear interpolation through tabulated points.
    Tabulated(TabulatedTail),
    /// Arbitrary user-supplied function. Not serializable.
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl TailCurve {
    /// Wraps a closure after checking it is nonincreasing and finite on a
    /// logarithmic grid spanning `[1e-8, 1e8]`.
    pub fn from_fn<F>(f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let mut prev = f64::INFINITY;
        for k in 0..=320 {
            let u = 10f64.powf(-8.0 + 16.0 * k as f64 / 320.0);
            let t = f(u);
            if !t.is_finite() || t < 0.0 {
                return Err(Error::Validation(format!(
                    "tail({u}) = {t} is not a finite nonnegative number"
                )));
            }
            if t > prev * (1.0 + 1e-12) {
                return Err(Error::NonMonotoneTail(u));
            }
            prev = t;
        }
        Ok(TailCurve::Function(Arc::new(f)))
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            TailCurve::Tabulated(t) => t.eval(u),
            TailCurve::Function(f) => f(u),
        }
    }

    /// Total mass `Π((0, ∞))` when it is known to be finite.
    pub fn total_mass(&self) -> Option<f64> {
        match self {
            TailCurve::Tabulated(t) => Some(t.points[0].1),
            TailCurve::Function(_) => None,
        }
    }

    pub fn support_lower_bound(&self) -> f64 {
        match self {
            TailCurve::Tabulated(t) => t.points[0].0,
            TailCurve::Function(_) => 0.0,
        }
    }
}

impl fmt::Debug for TailCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailCurve::Tabulated(t) => f.debug_tuple("Tabulated").field(t).finish(),
            TailCurve::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Tail given by points `(u_i, Π((u_i, ∞)))`, `u` increasing and tail
/// strictly decreasing. Constant below the first point (no mass there) and
/// extrapolated beyond the last point with the last log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct TabulatedTail {
    points: Vec<(f64, f64)>,
}

impl TabulatedTail {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Validation(
                "tabulated tail needs at least two points".into(),
            ));
        }
        for (i, &(u, t)) in points.iter().enumerate() {
            require_positive("u", u)?;
            require_positive("tail", t)?;
            if i > 0 {
                let (pu, pt) = points[i - 1];
                if u <= pu {
                    return Err(Error::Validation(format!(
                        "tabulated tail abscissae must increase (row {i})"
                    )));
                }
                if t >= pt {
                    return Err(Error::NonMonotoneTail(u));
                }
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, u: f64) -> f64 {
        let pts = &self.points;
        if u <= pts[0].0 {
            return pts[0].1;
        }
        let idx = pts.partition_point(|&(x, _)| x <= u);
        let (lo, hi) = if idx >= pts.len() {
            (pts[pts.len() - 2], pts[pts.len() - 1])
        } else {
            (pts[idx - 1], pts[idx])
        };
        let slope = (hi.1.ln() - lo.1.ln()) / (hi.0.ln() - lo.0.ln());
        (lo.1.ln() + slope * (u.ln() - lo.0.ln())).exp()
    }
}

impl TryFrom<Vec<[f64; 2]>> for TabulatedTail {
    type Error = Error;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        TabulatedTail::new(v.into_iter().map(|[u, t]| (u, t)).collect())
    }
}

impl From<TabulatedTail> for Vec<[f64; 2]> {
    fn from(t: TabulatedTail) -> Self {
        t.points.into_iter().map(|(u, t)| [u, t]).collect()
    }
}

/// Generalized inverse of a tail: `c(v) = inf{u : tail(u) ≤ 1/v}`.
///
/// The bracket starts at `[ε_machine, 1]` and its upper end is doubled until
/// `tail(B) ≤ 1/v`, keeping `tail(lo) > 1/v` as the lower invariant. The
/// bracket is then narrowed to relative width `tol` (or until it has no
/// representable interior point). Values below machine epsilon are
/// returned as `0`.
pub fn transport_from_tail<F>(tail: F, v: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    require_positive("v", v)?;
    require_positive("tol", tol)?;
    let level = 1.0 / v;
    let mut lo = f64::EPSILON;
    let mut t_lo = tail(lo);
    if t_lo <= level {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    let mut t_hi = tail(hi);
    if t_hi > t_lo {
        return Err(Error::NonMonotoneTail(hi));
    }
    while t_hi > level {
        let next = 2.0 * hi;
        let t_next = tail(next);
        if t_next > t_hi {
            return Err(Error::NonMonotoneTail(next));
        }
        if !next.is_finite() || next > 1e300 {
            return Err(Error::Divergence(format!(
                "tail does not fall below 1/v = {level}"
            )));
        }
        lo = hi;
        t_lo = t_hi;
        hi = next;
        t_hi = t_next;
    }
    // Illinois steps on ln tail against ln u, which is close to linear for
    // power-like tails; a bisection step is forced whenever the bracket fails
    // to halve over four steps.
    let ln_level = level.ln();
    let (mut g_lo, mut g_hi) = (t_lo.ln() - ln_level, t_hi.ln() - ln_level);
    let mut last_side = 0i8;
    let mut stalled = 0;
    while hi - lo > tol * hi {
        let width = hi - lo;
        let step = 0.5 * tol * hi;
        let mut mid = lo + 0.5 * width;
        if stalled < 4 && g_hi.is_finite() && g_lo > g_hi {
            let (xl, xh) = (lo.ln(), hi.ln());
            let x = xh - g_hi * (xh - xl) / (g_hi - g_lo);
            // nudge inwards so a converged end pulls the other one in
            let candidate = x.exp().clamp(lo + step, hi - step);
            if candidate > lo && candidate < hi {
                mid = candidate;
            }
        }
        if mid <= lo || mid >= hi {
            break;
        }
        let t_mid = tail(mid);
        if t_mid > t_lo * (1.0 + MONOTONE_SLACK) || t_mid < t_hi * (1.0 - MONOTONE_SLACK) {
            return Err(Error::NonMonotoneTail(mid));
        }
        let g_mid = t_mid.ln() - ln_level;
        if t_mid <= level {
            hi = mid;
            t_hi = t_mid;
            g_hi = g_mid;
            if last_side == 1 {
                g_lo *= 0.5;
            }
            last_side = 1;
        } else {
            lo = mid;
            t_lo = t_mid;
            g_lo = g_mid;
            if last_side == -1 {
                g_hi *= 0.5;
            }
            last_side = -1;
        }
        stalled = if hi - lo > 0.5 * width { stalled + 1 } else { 0 };
    }
    Ok(hi)
}
