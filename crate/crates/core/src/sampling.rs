//! Reproducible random streams, Pareto sampling and empirical measures.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::measures::MeasureSpec;

/// A `(master seed, stream id)` pair naming one independent ChaCha8 stream.
///
/// Child streams are derived by hashing the parent id together with a
/// context label and integer indices, so e.g. the study draws replicate
/// `r` of cell `(i, j)` from `root.derive("study", &[i, j, r])` and any
/// single cell can be replayed in isolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            stream_id: 0,
        }
    }

    pub fn derive(&self, label: &str, indices: &[u64]) -> Self {
        let mut h = splitmix(self.stream_id ^ 0x6a09_e667_f3bc_c909);
        for b in label.bytes() {
            h = splitmix(h ^ u64::from(b));
        }
        h = splitmix(h ^ indices.len() as u64);
        for &i in indices {
            h = splitmix(h ^ i);
        }
        Self {
            master_seed: self.master_seed,
            stream_id: h,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform on `(0, 1]`.
pub fn uniform_open0<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Inverse-CDF draw `ε·U^{−1/α}` from the probability-normalized Pareto law.
pub fn pareto_quantile(alpha: f64, eps: f64, u: f64) -> f64 {
    eps * u.powf(-1.0 / alpha)
}

/// `n` i.i.d. draws from `Π_{α,ε}` (probability-normalized), sorted.
pub fn sample_pareto<R: Rng + ?Sized>(alpha: f64, eps: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    require_positive("alpha", alpha)?;
    require_positive("eps", eps)?;
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut out: Vec<f64> = (0..n)
        .map(|_| pareto_quantile(alpha, eps, uniform_open0(rng)))
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Sorted, validated empirical spec with atoms of mass `1/n`.
pub fn empirical_from_sample(sample: &[f64], eps: f64) -> Result<MeasureSpec> {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    crate::measures::transport_empirical(&s, eps)?;
    Ok(MeasureSpec::empirical(s, eps))
}

/// Pareto CDF `1 − (ε/x)^α` for `x ≥ ε`.
pub fn pareto_cdf(alpha: f64, eps: f64, x: f64) -> f64 {
    if x <= eps {
        0.0
    } else {
        1.0 - (eps / x).powf(alpha)
    }
}

/// One-sample Kolmogorov–Smirnov statistic of a sorted sample.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}
