//! Regime-wise jump extraction and power-law exponent fitting for scalar
//! time series.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{normalize, t1_empirical_vs_pareto, tp_quadrature, ALPHA_ONE_GUARD, DEFAULT_TOL};
use crate::error::{require_positive, Error, Result};
use crate::measures::{probability_lambda, transport_empirical, transport_pareto};
use crate::sampling::{sample_pareto, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlphaGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        Self {
            lo: 2.0,
            hi: 6.0,
            step: 0.1,
        }
    }
}

impl AlphaGrid {
    pub fn validate(&self) -> Result<()> {
        require_positive("step", self.step)?;
        require_positive("lo", self.lo)?;
        if !(self.lo < self.hi) || !self.hi.is_finite() {
            return Err(Error::Validation(format!(
                "alpha grid needs lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    /// `lo, lo + step, …` up to `hi`, rounded to 10 decimals so that grid
    /// values print as entered.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=count)
            .map(|k| ((self.lo + k as f64 * self.step) * 1e10).round() / 1e10)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegimeConfig {
    pub s_star: f64,
    pub delta: f64,
    pub eps_plus: f64,
    pub eps_minus: f64,
    pub alpha_grid: AlphaGrid,
    /// Drop increments whose pre-state lies in `[s* − δ, s* + δ]`.
    pub exclude_band: bool,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        Self {
            s_star: -0.8,
            delta: 0.1,
            eps_plus: 0.36,
            eps_minus: 0.34,
            alpha_grid: AlphaGrid::default(),
            exclude_band: false,
        }
    }
}

impl RegimeConfig {
    pub fn validate(&self) -> Result<()> {
        require_positive("delta", self.delta)?;
        require_positive("eps_plus", self.eps_plus)?;
        require_positive("eps_minus", self.eps_minus)?;
        if !self.s_star.is_finite() {
            return Err(Error::domain("s_star", self.s_star, "must be finite"));
        }
        self.alpha_grid.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Warm,
    Cold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Positive,
    Negative,
}

/// Large increments per regime and sign; negative ones stored as `|d|`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpCells {
    pub warm_plus: Vec<f64>,
    pub warm_minus: Vec<f64>,
    pub cold_plus: Vec<f64>,
    pub cold_minus: Vec<f64>,
    pub discarded: usize,
    pub warnings: Vec<String>,
}

impl JumpCells {
    pub fn get(&self, regime: Regime, tail: Tail) -> &[f64] {
        match (regime, tail) {
            (Regime::Warm, Tail::Positive) => &self.warm_plus,
            (Regime::Warm, Tail::Negative) => &self.warm_minus,
            (Regime::Cold, Tail::Positive) => &self.cold_plus,
            (Regime::Cold, Tail::Negative) => &self.cold_minus,
        }
    }

    fn get_mut(&mut self, regime: Regime, tail: Tail) -> &mut Vec<f64> {
        match (regime, tail) {
            (Regime::Warm, Tail::Positive) => &mut self.warm_plus,
            (Regime::Warm, Tail::Negative) => &mut self.warm_minus,
            (Regime::Cold, Tail::Positive) => &mut self.cold_plus,
            (Regime::Cold, Tail::Negative) => &mut self.cold_minus,
        }
    }

    pub const CELLS: [(Regime, Tail); 4] = [
        (Regime::Warm, Tail::Positive),
        (Regime::Warm, Tail::Negative),
        (Regime::Cold, Tail::Positive),
        (Regime::Cold, Tail::Negative),
    ];
}

/// Splits the increments `x_{t+1} − x_t` by the regime of `x_t` and keeps
/// those above `ε⁺` or below `−ε⁻`; the rest count as continuous motion.
pub fn extract_jumps(series: &[f64], cfg: &RegimeConfig) -> Result<JumpCells> {
    cfg.validate()?;
    if series.len() < 2 {
        return Err(Error::Validation(format!(
            "series needs at least 2 points, got {}",
            series.len()
        )));
    }
    let mut cells = JumpCells::default();
    for w in series.windows(2) {
        let (x, d) = (w[0], w[1] - w[0]);
        if cfg.exclude_band && (x - cfg.s_star).abs() <= cfg.delta {
            cells.discarded += 1;
            continue;
        }
        let regime = if x > cfg.s_star { Regime::Warm } else { Regime::Cold };
        if d > cfg.eps_plus {
            cells.get_mut(regime, Tail::Positive).push(d);
        } else if d < -cfg.eps_minus {
            cells.get_mut(regime, Tail::Negative).push(-d);
        } else {
            cells.discarded += 1;
        }
    }
    for (regime, tail) in JumpCells::CELLS {
        let v = cells.get_mut(regime, tail);
        v.sort_by(f64::total_cmp);
        if v.is_empty() {
            cells
                .warnings
                .push(format!("no {tail:?} jumps in the {regime:?} regime").to_lowercase());
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    pub n: usize,
    /// `(α, T̃₁)` pairs in grid order.
    pub curve: Vec<(f64, f64)>,
    pub alpha_min: f64,
    pub t_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub regime: Regime,
    pub tail: Tail,
    #[serde(flatten)]
    pub fit: AlphaFit,
}

/// `T̃₁(Πₙ, Π_{α,ε})` with the probability normalization.
pub fn normalized_t1(sorted: &[f64], eps: f64, alpha: f64) -> Result<f64> {
    let lambda = probability_lambda(alpha, eps);
    let d = if (alpha - 1.0).abs() < ALPHA_ONE_GUARD {
        tp_quadrature(
            &transport_empirical(sorted, eps)?,
            &transport_pareto(alpha, eps, lambda)?,
            1.0,
            DEFAULT_TOL,
        )?
    } else {
        t1_empirical_vs_pareto(sorted, eps, alpha, lambda)?
    };
    Ok(normalize(d, eps).value)
}

/// Scans the exponent grid for the minimizer of `T̃₁`; ties go to the
/// smallest exponent.
pub fn fit_alpha(sample: &[f64], eps: f64, grid: &AlphaGrid) -> Result<AlphaFit> {
    grid.validate()?;
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    transport_empirical(&sorted, eps)?;
    let curve: Vec<(f64, f64)> = grid
        .values()
        .into_par_iter()
        .map(|a| normalized_t1(&sorted, eps, a).map(|t| (a, t)))
        .collect::<Result<_>>()?;
    let (alpha_min, t_min) = curve
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |best, (a, t)| if t < best.1 { (a, t) } else { best });
    Ok(AlphaFit {
        n: sorted.len(),
        curve,
        alpha_min,
        t_min,
    })
}

/// Fits all non-empty cells.
pub fn fit_cells(cells: &JumpCells, cfg: &RegimeConfig) -> Result<Vec<FitReport>> {
    JumpCells::CELLS
        .iter()
        .filter(|(r, t)| !cells.get(*r, *t).is_empty())
        .map(|&(regime, tail)| {
            let eps = match tail {
                Tail::Positive => cfg.eps_plus,
                Tail::Negative => cfg.eps_minus,
            };
            Ok(FitReport {
                regime,
                tail,
                fit: fit_alpha(cells.get(regime, tail), eps, &cfg.alpha_grid)?,
            })
        })
        .collect()
}

/// `Σ αᵢnᵢ / Σ nᵢ`.
pub fn weighted_exponent(fits: &[(f64, usize)]) -> Result<f64> {
    let total: usize = fits.iter().map(|f| f.1).sum();
    if total == 0 {
        return Err(Error::DivisionDomain("total count is zero".into()));
    }
    Ok(fits.iter().map(|&(a, n)| a * n as f64).sum::<f64>() / total as f64)
}

/// One cell of a synthetic series: jumps drawn from `Π_{alpha, ε}` with
/// the tail's threshold from the config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCell {
    pub regime: Regime,
    pub tail: Tail,
    pub alpha: f64,
    pub n: usize,
}

/// Builds a series whose extracted cells are exactly the requested Pareto
/// samples.
///
/// Before each jump the state walks to its regime's anchor (`s* + 1.3` warm,
/// `s* − 1.2` cold, both outside the band) in steps no larger than
/// `min(ε⁺, ε⁻)/2`, so every connecting increment is discarded as continuous.
/// The jump order is a seeded shuffle of all cells.
pub fn synthetic_series(cells: &[SyntheticCell], cfg: &RegimeConfig, stream: RngStream) -> Result<Vec<f64>> {
    use rand::seq::SliceRandom;
    cfg.validate()?;
    if cfg.exclude_band && cfg.delta >= 1.2 {
        return Err(Error::Validation("band too wide for the synthetic anchors".into()));
    }
    let mut plan = Vec::new();
    for (k, c) in cells.iter().enumerate() {
        let eps = match c.tail {
            Tail::Positive => cfg.eps_plus,
            Tail::Negative => cfg.eps_minus,
        };
        let sample = sample_pareto(c.alpha, eps, c.n, &mut stream.derive("cell", &[k as u64]).rng())?;
        plan.extend(sample.into_iter().map(|d| (c.regime, c.tail, d)));
    }
    plan.shuffle(&mut stream.derive("order", &[]).rng());

    let max_step = 0.5 * cfg.eps_plus.min(cfg.eps_minus);
    let mut x = cfg.s_star + 1.3;
    let mut series = vec![x];
    for (regime, tail, d) in plan {
        let anchor = match regime {
            Regime::Warm => cfg.s_star + 1.3,
            Regime::Cold => cfg.s_star - 1.2,
        };
        while (anchor - x).abs() > 0.0 {
            x += (anchor - x).clamp(-max_step, max_step);
            series.push(x);
        }
        x += match tail {
            Tail::Positive => d,
            Tail::Negative => -d,
        };
        series.push(x);
    }
    Ok(series)
}
