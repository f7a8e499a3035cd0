use std::fmt;

use crate::error::{require_positive, Error, Result};

use super::tail::{transport_from_tail, TailCurve, INVERSION_TOL};

/// One monotone piece of a half-line transportation function.
#[derive(Clone)]
pub enum Branch {
    Const(f64),
    /// `s ↦ (scale·s)^exponent`
    Power { scale: f64, exponent: f64 },
    /// `s ↦ inf{u : tail(u) ≤ 1/s}`
    Inverse(TailCurve),
}

impl Branch {
    /// Evaluates the branch formula at `s ≥ 0`, ignoring piece boundaries.
    ///
    /// A tail that turns out not to be monotone yields `NaN`; callers that
    /// need the error use [`Branch::try_eval`].
    pub fn eval(&self, s: f64) -> f64 {
        self.try_eval(s).unwrap_or(f64::NAN)
    }

    pub fn try_eval(&self, s: f64) -> Result<f64> {
        match self {
            Branch::Const(c) => Ok(*c),
            Branch::Power { scale, exponent } => Ok((scale * s).powf(*exponent)),
            Branch::Inverse(tail) => {
                if s <= 0.0 {
                    Ok(0.0)
                } else if s.is_infinite() {
                    Ok(f64::INFINITY)
                } else {
                    transport_from_tail(|u| tail.eval(u), s, INVERSION_TOL)
                }
            }
        }
    }

    /// Smallest `s` in `[start, ∞)` with branch value `> u`, if the branch
    /// ever exceeds `u`.
    fn first_above(&self, u: f64, start: f64) -> Option<f64> {
        match self {
            Branch::Const(c) => (*c > u).then_some(start),
            Branch::Power { scale, exponent } => Some((u.powf(1.0 / exponent) / scale).max(start)),
            Branch::Inverse(tail) => {
                let t = tail.eval(u);
                (t > 0.0).then(|| (1.0 / t).max(start))
            }
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Branch::Inverse(_))
    }
}

impl fmt::Debug for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Const(c) => write!(f, "Const({c})"),
            Branch::Power { scale, exponent } => write!(f, "Power(({scale}·s)^{exponent})"),
            Branch::Inverse(t) => write!(f, "Inverse({t:?})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Piece {
    pub start: f64,
    pub branch: Branch,
}

/// Nondecreasing map `[0, ∞) → [0, ∞)`, zero below the first piece and
/// right-continuous at every piece start.
#[derive(Debug, Clone, Default)]
pub struct HalfTransport {
    pieces: Vec<Piece>,
}

impl HalfTransport {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        for (i, p) in pieces.iter().enumerate() {
            if !(p.start >= 0.0) || !p.start.is_finite() {
                return Err(Error::Validation(format!("piece start {} is invalid", p.start)));
            }
            if i > 0 && p.start <= pieces[i - 1].start {
                return Err(Error::Validation("piece starts must strictly increase".into()));
            }
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Branch governing the open neighbourhood to the right of `s`.
    pub fn branch_at(&self, s: f64) -> Option<&Branch> {
        let idx = self.pieces.partition_point(|p| p.start <= s);
        (idx > 0).then(|| &self.pieces[idx - 1].branch)
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.branch_at(s).map_or(0.0, |b| b.eval(s))
    }

    /// Positive breakpoints (piece starts other than 0).
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.iter().map(|p| p.start).filter(|&s| s > 0.0)
    }

    /// Whether the map is nonzero arbitrarily close to 0 (infinite measure).
    pub fn reaches_zero(&self) -> bool {
        self.pieces.first().is_some_and(|p| p.start == 0.0)
    }

    /// `Π₀({s > 0 : h(s) > u})` for `u ≥ 0`.
    pub fn preimage_mass_above(&self, u: f64) -> f64 {
        for (i, p) in self.pieces.iter().enumerate() {
            let end = self.pieces.get(i + 1).map_or(f64::INFINITY, |q| q.start);
            if let Some(s) = p.branch.first_above(u, p.start) {
                if s < end {
                    return if s == 0.0 { f64::INFINITY } else { 1.0 / s };
                }
            }
        }
        0.0
    }
}

/// Monotone sign-preserving `c : ℝ → ℝ` with `Π = Π₀ ∘ c⁻¹`.
///
/// Stored as two half-line maps: `c(v) = plus(v)` for `v > 0` and
/// `c(v) = −minus(−v)` for `v < 0`, which makes `c` right-continuous on
/// `[0, ∞)` and left-continuous on `(−∞, 0]`.
#[derive(Debug, Clone, Default)]
pub struct TransportFunction {
    pub plus: HalfTransport,
    pub minus: HalfTransport,
}

impl TransportFunction {
    pub fn new(plus: HalfTransport, minus: HalfTransport) -> Self {
        Self { plus, minus }
    }

    pub fn one_sided(plus: HalfTransport) -> Self {
        Self {
            plus,
            minus: HalfTransport::zero(),
        }
    }

    pub fn eval(&self, v: f64) -> f64 {
        if v > 0.0 {
            self.plus.eval(v)
        } else if v < 0.0 {
            -self.minus.eval(-v)
        } else {
            0.0
        }
    }

    pub fn sign_preserving(&self) -> bool {
        true
    }

    /// All breakpoints, sorted, including `0`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .minus
            .breakpoints()
            .map(|s| -s)
            .chain(std::iter::once(0.0))
            .chain(self.plus.breakpoints())
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `Π₀({v : c(v) > u})` for `u > 0`; equals the measure's tail at `u`.
    pub fn mass_above(&self, u: f64) -> f64 {
        self.plus.preimage_mass_above(u)
    }

    /// `Π₀({v : c(v) < −u})` for `u > 0`.
    pub fn mass_below(&self, u: f64) -> f64 {
        self.minus.preimage_mass_above(u)
    }
}

/// Transport of `Π_{α,ε,λ}(dv) = 1{v>ε} λ v^{−α−1} dv`:
/// zero up to `α·ε^α/λ` and `(λv/α)^{1/α}` from there on.
pub fn transport_pareto(alpha: f64, eps: f64, lambda: f64) -> Result<TransportFunction> {
    require_positive("alpha", alpha)?;
    require_positive("eps", eps)?;
    require_positive("lambda", lambda)?;
    let start = alpha * eps.powf(alpha) / lambda;
    if !start.is_finite() {
        return Err(Error::domain("eps", eps, "breakpoint alpha*eps^alpha/lambda overflows"));
    }
    let half = HalfTransport::new(vec![Piece {
        start,
        branch: Branch::Power {
            scale: lambda / alpha,
            exponent: 1.0 / alpha,
        },
    }])?;
    Ok(TransportFunction::one_sided(half))
}

/// Piecewise-constant transport of the empirical measure with atoms `1/n`
/// at the order statistics: `ξ_{i:n}` on `[n/(n−i+1), n/(n−i))`.
pub fn transport_empirical(sample: &[f64], eps: f64) -> Result<TransportFunction> {
    validate_empirical(sample, eps)?;
    let n = sample.len() as f64;
    let pieces = sample
        .iter()
        .enumerate()
        .map(|(i, &x)| Piece {
            start: n / (n - i as f64),
            branch: Branch::Const(x),
        })
        .collect();
    Ok(TransportFunction::one_sided(HalfTransport::new(pieces)?))
}

pub(crate) fn validate_empirical(sample: &[f64], eps: f64) -> Result<()> {
    require_positive("eps", eps)?;
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(i) = sample.windows(2).position(|w| !(w[0] <= w[1])) {
        return Err(Error::Validation(format!(
            "empirical sample must be sorted; entries {} and {} are out of order",
            i,
            i + 1
        )));
    }
    let bad: Vec<String> = sample
        .iter()
        .enumerate()
        .filter(|(_, &x)| !(x > eps) || !x.is_finite())
        .map(|(i, x)| format!("#{i}={x}"))
        .collect();
    if !bad.is_empty() {
        return Err(Error::Validation(format!(
            "empirical sample entries must be finite and > eps = {eps}: {}",
            bad.join(", ")
        )));
    }
    Ok(())
}

/// Two-branch transport `c(y) = −(|y|λ₋)^{1/α⁻} 1{y ≤ −1/λ₋} + (yλ₊)^{1/α⁺} 1{y ≥ 1/λ₊}`.
///
/// Each side carries mass `λ±` on `|v| > 1` with tail `λ± u^{−α±}` for `u ≥ 1`.
pub fn two_sided_transport(
    alpha_plus: f64,
    alpha_minus: f64,
    lambda_plus: f64,
    lambda_minus: f64,
) -> Result<TransportFunction> {
    for (name, a) in [("alpha_plus", alpha_plus), ("alpha_minus", alpha_minus)] {
        if !(a > 1.0) || !a.is_finite() {
            return Err(Error::domain(name, a, "must be > 1"));
        }
    }
    for (name, l) in [("lambda_plus", lambda_plus), ("lambda_minus", lambda_minus)] {
        if !(l >= 0.0) || !l.is_finite() {
            return Err(Error::domain(name, l, "must be finite and >= 0"));
        }
    }
    if lambda_plus == 0.0 && lambda_minus == 0.0 {
        return Err(Error::DegenerateMeasure(
            "both side intensities are zero".into(),
        ));
    }
    let side = |alpha: f64, lambda: f64| -> Result<HalfTransport> {
        if lambda == 0.0 {
            return Ok(HalfTransport::zero());
        }
        HalfTransport::new(vec![Piece {
            start: 1.0 / lambda,
            branch: Branch::Power {
                scale: lambda,
                exponent: 1.0 / alpha,
            },
        }])
    };
    Ok(TransportFunction::new(
        side(alpha_plus, lambda_plus)?,
        side(alpha_minus, lambda_minus)?,
    ))
}

/// Half-line transport obtained by numeric inversion of a tail.
pub fn half_from_tail(tail: TailCurve) -> Result<HalfTransport> {
    let start = match tail.total_mass() {
        Some(m) => 1.0 / m,
        None => 0.0,
    };
    HalfTransport::new(vec![Piece {
        start,
        branch: Branch::Inverse(tail),
    }])
}
