//! Repeated-sampling study of `T̃₁(Πₙ, Π_{α,ε})` over a grid of exponents
//! and thresholds.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{sample_pareto, RngStream};
use crate::timeseries::normalized_t1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyGrid {
    pub alphas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
}

impl Default for StudyGrid {
    fn default() -> Self {
        Self {
            alphas: (1..=10).map(f64::from).collect(),
            epsilons: (5..=10).map(|k| f64::from(k) / 10.0).collect(),
            n: 100,
            reps: 100,
            seed: 0,
        }
    }
}

impl StudyGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Validation("sample size n must be >= 1".into()));
        }
        if self.reps < 2 {
            return Err(Error::Validation("reps must be >= 2 for a standard deviation".into()));
        }
        if self.alphas.is_empty() || self.epsilons.is_empty() {
            return Err(Error::Validation("alpha and eps lists must be non-empty".into()));
        }
        for &a in &self.alphas {
            crate::error::require_positive("alpha", a)?;
        }
        for &e in &self.epsilons {
            crate::error::require_positive("eps", e)?;
        }
        Ok(())
    }

    /// Stream for replicate `rep` of cell `(alpha_idx, eps_idx)`.
    pub fn stream(&self, alpha_idx: usize, eps_idx: usize, rep: usize) -> RngStream {
        RngStream::new(self.seed).derive("study", &[alpha_idx as u64, eps_idx as u64, rep as u64])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyCell {
    pub alpha: f64,
    pub eps: f64,
    pub mean: f64,
    pub sd: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub grid: StudyGrid,
    /// Rows follow `grid.alphas`, columns `grid.epsilons`.
    pub cells: Vec<Vec<StudyCell>>,
}

/// One replicate: draw `n` points from `Π_{α,ε}` and return `T̃₁`.
pub fn replicate(grid: &StudyGrid, ai: usize, ei: usize, rep: usize) -> Result<f64> {
    let (alpha, eps) = (grid.alphas[ai], grid.epsilons[ei]);
    let sample = sample_pareto(alpha, eps, grid.n, &mut grid.stream(ai, ei, rep).rng())?;
    normalized_t1(&sample, eps, alpha)
}

fn cell_error(alpha: f64, eps: f64, e: Error) -> Error {
    Error::Validation(format!("cell (alpha = {alpha}, eps = {eps}): {e}"))
}

pub fn run_cell(grid: &StudyGrid, ai: usize, ei: usize) -> Result<StudyCell> {
    let (alpha, eps) = (grid.alphas[ai], grid.epsilons[ei]);
    let values: Vec<f64> = (0..grid.reps)
        .into_par_iter()
        .map(|r| replicate(grid, ai, ei, r))
        .collect::<Result<_>>()
        .map_err(|e| cell_error(alpha, eps, e))?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(StudyCell {
        alpha,
        eps,
        mean,
        sd,
        reps: grid.reps,
    })
}

pub fn run_study(grid: &StudyGrid) -> Result<StudyResult> {
    grid.validate()?;
    let cells = (0..grid.alphas.len())
        .map(|ai| (0..grid.epsilons.len()).map(|ei| run_cell(grid, ai, ei)).collect())
        .collect::<Result<_>>()?;
    Ok(StudyResult {
        grid: grid.clone(),
        cells,
    })
}

impl StudyResult {
    fn write_matrix(&self, path: &Path, pick: impl Fn(&StudyCell) -> f64) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["alpha".to_string()];
        header.extend(self.grid.epsilons.iter().map(|e| e.to_string()));
        w.write_record(&header)?;
        for (a, row) in self.grid.alphas.iter().zip(&self.cells) {
            let mut rec = vec![a.to_string()];
            rec.extend(row.iter().map(|c| format!("{:.6}", pick(c))));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `means.csv`, `sds.csv` and `study.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        self.write_matrix(&dir.join("means.csv"), |c| c.mean)?;
        self.write_matrix(&dir.join("sds.csv"), |c| c.sd)?;
        crate::io::write_json(&dir.join("study.json"), self)
    }
}
