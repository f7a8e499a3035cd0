//! Lévy measure specifications and their transportation functions against
//! the Cauchy reference measure `Π₀(dv) = dv/v²`.

mod tail;
mod transport;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::special::exp_integral_e1;

pub use tail::{transport_from_tail, TabulatedTail, TailCurve, INVERSION_TOL};
pub use transport::{
    half_from_tail, transport_empirical, transport_pareto, two_sided_transport, Branch,
    HalfTransport, Piece, TransportFunction,
};

/// `Π₀((a, b])` for `0 < a ≤ b ≤ ∞`.
pub fn cauchy_mass(a: f64, b: f64) -> f64 {
    1.0 / a - 1.0 / b
}

/// Intensity `λ = α·ε^α` that turns `Π_{α,ε,λ}` into a probability measure.
pub fn probability_lambda(alpha: f64, eps: f64) -> f64 {
    alpha * eps.powf(alpha)
}

/// Where an empirical sample comes from in the JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleSource {
    Inline(Vec<f64>),
    /// CSV file with one value per line, relative paths resolved against the
    /// spec file's directory.
    File(PathBuf),
}

/// Symbolic description of a one-dimensional Lévy measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Density `λ v^{−α−1}` on `(ε, ∞)`. Missing `lambda` means the
    /// probability normalization `λ = α ε^α`.
    #[serde(rename = "pareto")]
    ParetoTail {
        alpha: f64,
        eps: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
    /// Tails `λ± u^{−α±}` for `u ≥ 1` on each half-line.
    #[serde(rename = "two_sided")]
    TwoSidedPowerLaw {
        alpha_plus: f64,
        alpha_minus: f64,
        lambda_plus: f64,
        lambda_minus: f64,
    },
    /// Density `γ e^{−λv} / v` on `(0, ∞)`.
    Gamma { gamma: f64, lambda: f64 },
    /// Atoms of mass `1/n` at the sample points.
    Empirical { sample: SampleSource, eps: f64 },
    /// Tabulated tails for either half-line.
    #[serde(rename = "tail")]
    GenericTail {
        #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_tail")]
        plus: Option<TailCurve>,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_tail")]
        minus: Option<TailCurve>,
    },
}

mod opt_tail {
    use serde::{de::Error as _, ser::Error as _, Deserialize, Deserializer, Serializer};

    use super::{TabulatedTail, TailCurve};

    pub fn serialize<S: Serializer>(t: &Option<TailCurve>, s: S) -> Result<S::Ok, S::Error> {
        match t {
            Some(TailCurve::Tabulated(tab)) => s.serialize_some(tab),
            Some(TailCurve::Function(_)) => {
                Err(S::Error::custom("function tails cannot be serialized"))
            }
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<TailCurve>, D::Error> {
        let raw = Option::<Vec<[f64; 2]>>::deserialize(d)?;
        raw.map(|pts| {
            TabulatedTail::try_from(pts)
                .map(TailCurve::Tabulated)
                .map_err(D::Error::custom)
        })
        .transpose()
    }
}

impl MeasureSpec {
    pub fn pareto(alpha: f64, eps: f64) -> Self {
        MeasureSpec::ParetoTail {
            alpha,
            eps,
            lambda: None,
        }
    }

    pub fn empirical(sample: Vec<f64>, eps: f64) -> Self {
        MeasureSpec::Empirical {
            sample: SampleSource::Inline(sample),
            eps,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MeasureSpec::ParetoTail { .. } => "pareto",
            MeasureSpec::TwoSidedPowerLaw { .. } => "two_sided",
            MeasureSpec::Gamma { .. } => "gamma",
            MeasureSpec::Empirical { .. } => "empirical",
            MeasureSpec::GenericTail { .. } => "tail",
        }
    }

    /// Inline sample of an empirical spec; errors if it still points at a file.
    pub fn sample(&self) -> Result<Option<&[f64]>> {
        match self {
            MeasureSpec::Empirical {
                sample: SampleSource::Inline(s),
                ..
            } => Ok(Some(s)),
            MeasureSpec::Empirical {
                sample: SampleSource::File(p),
                ..
            } => Err(Error::Validation(format!(
                "empirical sample file {} has not been loaded",
                p.display()
            ))),
            _ => Ok(None),
        }
    }

    /// Effective Pareto intensity.
    pub fn pareto_lambda(alpha: f64, eps: f64, lambda: Option<f64>) -> f64 {
        lambda.unwrap_or_else(|| probability_lambda(alpha, eps))
    }

    pub fn validate(&self) -> Result<()> {
        self.transport().map(|_| ())
    }

    /// Builds the transportation function `c` with `Π = Π₀ ∘ c⁻¹`.
    pub fn transport(&self) -> Result<TransportFunction> {
        match self {
            MeasureSpec::ParetoTail { alpha, eps, lambda } => {
                transport_pareto(*alpha, *eps, Self::pareto_lambda(*alpha, *eps, *lambda))
            }
            MeasureSpec::TwoSidedPowerLaw {
                alpha_plus,
                alpha_minus,
                lambda_plus,
                lambda_minus,
            } => two_sided_transport(*alpha_plus, *alpha_minus, *lambda_plus, *lambda_minus),
            MeasureSpec::Gamma { gamma, lambda } => {
                require_positive("gamma", *gamma)?;
                require_positive("lambda", *lambda)?;
                let plus = half_from_tail(gamma_tail(*gamma, *lambda))?;
                Ok(TransportFunction::one_sided(plus))
            }
            MeasureSpec::Empirical { eps, .. } => {
                transport_empirical(self.sample()?.unwrap_or_default(), *eps)
            }
            MeasureSpec::GenericTail { plus, minus } => {
                if plus.is_none() && minus.is_none() {
                    return Err(Error::DegenerateMeasure("tail spec has no side".into()));
                }
                let half = |t: &Option<TailCurve>| match t {
                    Some(t) => half_from_tail(t.clone()),
                    None => Ok(HalfTransport::zero()),
                };
                Ok(TransportFunction::new(half(plus)?, half(minus)?))
            }
        }
    }

    /// `Π((u, ∞))` for `u > 0`.
    pub fn tail_plus(&self, u: f64) -> f64 {
        match self {
            MeasureSpec::ParetoTail { alpha, eps, lambda } => {
                let l = Self::pareto_lambda(*alpha, *eps, *lambda);
                l * u.max(*eps).powf(-alpha) / alpha
            }
            MeasureSpec::TwoSidedPowerLaw {
                alpha_plus,
                lambda_plus,
                ..
            } => lambda_plus * u.max(1.0).powf(-alpha_plus),
            MeasureSpec::Gamma { gamma, lambda } => gamma * exp_integral_e1(lambda * u),
            MeasureSpec::Empirical { .. } => {
                let s = self.sample().ok().flatten().unwrap_or_default();
                let above = s.len() - s.partition_point(|&x| x <= u);
                above as f64 / s.len().max(1) as f64
            }
            MeasureSpec::GenericTail { plus, .. } => plus.as_ref().map_or(0.0, |t| t.eval(u)),
        }
    }

    /// `Π((−∞, −u))` for `u > 0`.
    pub fn tail_minus(&self, u: f64) -> f64 {
        match self {
            MeasureSpec::TwoSidedPowerLaw {
                alpha_minus,
                lambda_minus,
                ..
            } => lambda_minus * u.max(1.0).powf(-alpha_minus),
            MeasureSpec::GenericTail { minus, .. } => minus.as_ref().map_or(0.0, |t| t.eval(u)),
            _ => 0.0,
        }
    }

    /// Largest `ε` with `Π((−ε, ε)) = 0`, used for `T̃₁` normalization.
    pub fn support_gap(&self) -> f64 {
        match self {
            MeasureSpec::ParetoTail { eps, .. } => *eps,
            MeasureSpec::Empirical { eps, .. } => {
                let first = self
                    .sample()
                    .ok()
                    .flatten()
                    .and_then(|s| s.first().copied());
                first.map_or(*eps, |x| x.max(*eps))
            }
            MeasureSpec::TwoSidedPowerLaw { .. } => 1.0,
            MeasureSpec::Gamma { .. } => 0.0,
            MeasureSpec::GenericTail { plus, minus } => {
                let lb = |t: &Option<TailCurve>| t.as_ref().map_or(f64::INFINITY, |t| t.support_lower_bound());
                lb(plus).min(lb(minus))
            }
        }
    }

    /// Reads a JSON spec; an empirical `sample` given as a path is loaded
    /// relative to the JSON file.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        let spec: MeasureSpec = serde_json::from_str(&text).map_err(|e| Error::Data {
            path: path.display().to_string(),
            reason: crate::io::json_error_message(&e),
        })?;
        spec.resolve(path.parent().unwrap_or_else(|| Path::new(".")))
    }

    /// Loads file-backed samples and sorts empirical samples.
    pub fn resolve(self, base: &Path) -> Result<Self> {
        match self {
            MeasureSpec::Empirical { sample, eps } => {
                let mut values = match sample {
                    SampleSource::Inline(v) => v,
                    SampleSource::File(p) => {
                        let full = if p.is_absolute() { p } else { base.join(p) };
                        crate::io::read_values(&full)?
                    }
                };
                values.sort_by(f64::total_cmp);
                let spec = MeasureSpec::empirical(values, eps);
                spec.validate()?;
                Ok(spec)
            }
            other => {
                other.validate()?;
                Ok(other)
            }
        }
    }
}

/// Tail `γ E₁(λu)` of the Gamma-process Lévy measure `γ e^{−λv} v^{−1} dv`.
pub fn gamma_tail(gamma: f64, lambda: f64) -> TailCurve {
    TailCurve::Function(Arc::new(move |u: f64| gamma * exp_integral_e1(lambda * u)))
}
