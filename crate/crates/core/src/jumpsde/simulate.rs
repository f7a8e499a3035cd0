use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::sampling::{uniform_open0, RngStream};

use super::{JumpDiffusionSpec, Kernel, SideKernel, OVERFLOW_GUARD};

/// A point of the Cauchy Poisson random measure: time and signed mark `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub mark: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: f64,
    pub mark: f64,
    /// `c(X(t−), mark)`; zero when the mark falls below the state's breakpoint.
    pub size: f64,
    /// Row of the path holding the post-jump value.
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub jump_flags: Vec<bool>,
    pub jumps: Vec<Jump>,
}

impl Path {
    /// The mark stream that produced this path, for exact replay.
    pub fn marks(&self) -> Vec<Event> {
        self.jumps
            .iter()
            .map(|j| Event {
                time: j.time,
                mark: j.mark,
            })
            .collect()
    }

    pub fn jump_count(&self) -> usize {
        self.jumps.iter().filter(|j| j.size != 0.0).count()
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("a path has at least its initial row")
    }

    /// CSV rows `time,value,jump_flag`.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["time", "value", "jump_flag"])?;
        for ((t, x), f) in self.times.iter().zip(&self.values).zip(&self.jump_flags) {
            w.write_record([t.to_string(), x.to_string(), u8::from(*f).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Smallest mark magnitude that can produce a jump on each side.
fn floors(kernel: &Kernel) -> (Option<f64>, Option<f64>) {
    (
        kernel.plus.map(|k| k.mark_floor()),
        kernel.minus.map(|k| k.mark_floor()),
    )
}

/// Cauchy marks with `|v| ≥ floor` on each present side over `[0, horizon]`.
///
/// Their rate is `Σ 1/floor`; a side is picked with probability
/// proportional to `1/floor` and `|v| = floor/U` with `U` uniform on
/// `(0, 1]`. Marks below a state's own breakpoint later map to size 0,
/// which thins the stream when the intensity depends on the state.
pub fn generate_marks<R: Rng + ?Sized>(
    floor_plus: Option<f64>,
    floor_minus: Option<f64>,
    horizon: f64,
    rng: &mut R,
) -> Vec<Event> {
    let rate_plus = floor_plus.map_or(0.0, |b| 1.0 / b);
    let rate_minus = floor_minus.map_or(0.0, |b| 1.0 / b);
    let rate = rate_plus + rate_minus;
    let mut out = Vec::new();
    if !(rate > 0.0) {
        return out;
    }
    let mut t = 0.0;
    loop {
        t += -uniform_open0(rng).ln() / rate;
        if t > horizon {
            break;
        }
        let positive = rng.random::<f64>() * rate < rate_plus;
        let u = uniform_open0(rng);
        let mark = if positive {
            floor_plus.unwrap_or(1.0) / u
        } else {
            -floor_minus.unwrap_or(1.0) / u
        };
        out.push(Event { time: t, mark });
    }
    out
}

fn check_horizon(horizon: f64, dt: f64) -> Result<()> {
    require_positive("T", horizon)?;
    require_positive("dt", dt)?;
    if dt > horizon {
        return Err(Error::domain("dt", dt, "must not exceed the horizon T"));
    }
    Ok(())
}

fn side_jump(side: Option<&SideKernel>, x: f64, v: f64) -> f64 {
    side.map_or(0.0, |k| k.jump(x, v))
}

/// Replays a fixed mark stream through the dynamics.
///
/// The time grid is `{k·dt} ∪ {event times} ∪ {T}` and does not depend on
/// the state, so paths driven by the same marks share their rows. Between
/// rows the drift is integrated with one explicit midpoint step.
pub fn simulate_with_marks(spec: &JumpDiffusionSpec, horizon: f64, dt: f64, marks: &[Event]) -> Result<Path> {
    check_horizon(horizon, dt)?;
    spec.validate()?;
    let steps = (horizon / dt).ceil() as usize;
    let mut path = Path {
        times: Vec::with_capacity(steps + marks.len() + 1),
        values: Vec::with_capacity(steps + marks.len() + 1),
        jump_flags: Vec::with_capacity(steps + marks.len() + 1),
        jumps: Vec::with_capacity(marks.len()),
    };
    let mut t = 0.0;
    let mut x = spec.x0;
    path.times.push(t);
    path.values.push(x);
    path.jump_flags.push(false);

    let mut next_event = marks.iter().filter(|e| e.time <= horizon).peekable();
    let mut k = 1usize;
    loop {
        let grid_t = if k >= steps { horizon } else { k as f64 * dt };
        let (t_next, event) = match next_event.peek() {
            Some(e) if e.time <= grid_t => (e.time, next_event.next()),
            _ => (grid_t, None),
        };
        let h = t_next - t;
        if h > 0.0 {
            let a = &spec.drift;
            let mid = x + 0.5 * h * a.eval(x);
            x += h * a.eval(mid);
        }
        t = t_next;
        let mut flag = false;
        if let Some(e) = event {
            let size = if e.mark > 0.0 {
                side_jump(spec.kernel.plus.as_ref(), x, e.mark)
            } else {
                -side_jump(spec.kernel.minus.as_ref(), x, -e.mark)
            };
            x += size;
            flag = size != 0.0;
            path.jumps.push(Jump {
                time: e.time,
                mark: e.mark,
                size,
                row: path.times.len(),
            });
        }
        if !(x.abs() <= OVERFLOW_GUARD) {
            return Err(Error::BlowUp { time: t, value: x });
        }
        path.times.push(t);
        path.values.push(x);
        path.jump_flags.push(flag);
        if event.is_none() {
            if k >= steps {
                break;
            }
            k += 1;
        }
    }
    Ok(path)
}

/// Simulates one path over `[0, T]`.
pub fn simulate<R: Rng + ?Sized>(spec: &JumpDiffusionSpec, horizon: f64, dt: f64, rng: &mut R) -> Result<Path> {
    check_horizon(horizon, dt)?;
    spec.validate()?;
    let (fp, fm) = floors(&spec.kernel);
    let marks = generate_marks(fp, fm, horizon, rng);
    simulate_with_marks(spec, horizon, dt, &marks)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPaths {
    pub first: Path,
    pub second: Path,
    pub sup_rho: f64,
}

fn compatible(a: &Kernel, b: &Kernel) -> Result<()> {
    let pairs = [("positive", a.plus, b.plus), ("negative", a.minus, b.minus)];
    for (name, x, y) in pairs {
        match (x, y) {
            (None, None) => {}
            (Some(x), Some(y)) => {
                if x.eps != y.eps {
                    return Err(Error::CouplingIncompatible(format!(
                        "{name} thresholds differ: {} vs {}",
                        x.eps, y.eps
                    )));
                }
                if x.lambda.is_some() != y.lambda.is_some() {
                    return Err(Error::CouplingIncompatible(format!(
                        "{name} side mixes probability-normalized and explicit intensities"
                    )));
                }
            }
            _ => {
                return Err(Error::CouplingIncompatible(format!(
                    "{name} side present in only one kernel"
                )))
            }
        }
    }
    Ok(())
}

/// `sup_t ρ(X₁(t), X₂(t))` over the shared rows and their left limits.
pub fn sup_rho(p1: &Path, p2: &Path) -> f64 {
    let rho = |a: f64, b: f64| (a - b).abs().min(1.0);
    let mut sup = p1
        .values
        .iter()
        .zip(&p2.values)
        .map(|(&a, &b)| rho(a, b))
        .fold(0.0, f64::max);
    for (j1, j2) in p1.jumps.iter().zip(&p2.jumps) {
        let left1 = p1.values[j1.row - 1];
        let left2 = p2.values[j2.row - 1];
        sup = sup.max(rho(left1, left2));
    }
    sup
}

/// Two diffusions driven by one mark stream (synchronous coupling).
pub fn simulate_coupled<R: Rng + ?Sized>(
    spec1: &JumpDiffusionSpec,
    spec2: &JumpDiffusionSpec,
    horizon: f64,
    dt: f64,
    rng: &mut R,
) -> Result<CoupledPaths> {
    check_horizon(horizon, dt)?;
    spec1.validate()?;
    spec2.validate()?;
    compatible(&spec1.kernel, &spec2.kernel)?;
    let (a_plus, a_minus) = floors(&spec1.kernel);
    let (b_plus, b_minus) = floors(&spec2.kernel);
    let min = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    let marks = generate_marks(min(a_plus, b_plus), min(a_minus, b_minus), horizon, rng);
    let first = simulate_with_marks(spec1, horizon, dt, &marks)?;
    let second = simulate_with_marks(spec2, horizon, dt, &marks)?;
    let sup_rho = sup_rho(&first, &second);
    Ok(CoupledPaths {
        first,
        second,
        sup_rho,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSummary {
    pub replicates: usize,
    pub mean_sup_rho: f64,
    pub stderr: f64,
    pub delta: Option<f64>,
    pub g_of_delta: Option<f64>,
}

/// Monte-Carlo estimate of `E sup_t ρ(X₁(t), X₂(t))`; replicate `r` uses
/// `stream.derive("couple", &[r])`.
pub fn couple_study(
    spec1: &JumpDiffusionSpec,
    spec2: &JumpDiffusionSpec,
    horizon: f64,
    dt: f64,
    replicates: usize,
    stream: RngStream,
) -> Result<CouplingSummary> {
    if replicates < 2 {
        return Err(Error::Validation("at least two replicates are needed".into()));
    }
    let sups: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream.derive("couple", &[r]).rng();
            simulate_coupled(spec1, spec2, horizon, dt, &mut rng).map(|c| c.sup_rho)
        })
        .collect::<Result<_>>()?;
    let n = sups.len() as f64;
    let mean = sups.iter().sum::<f64>() / n;
    let var = sups.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(CouplingSummary {
        replicates,
        mean_sup_rho: mean,
        stderr: (var / n).sqrt(),
        delta: None,
        g_of_delta: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jumpsde::{AlphaProfile, Drift, SideKernel};
    use crate::sampling::{ks_statistic, pareto_cdf};

    fn spec(alpha: AlphaProfile, drift: Drift, two_sided: bool) -> JumpDiffusionSpec {
        let side = SideKernel {
            eps: 0.36,
            alpha,
            lambda: None,
        };
        JumpDiffusionSpec {
            drift,
            kernel: Kernel {
                plus: Some(side),
                minus: two_sided.then_some(SideKernel { eps: 0.34, ..side }),
            },
            x0: 0.0,
        }
    }

    #[test]
    fn pure_jump_sum_identity() {
        let s = spec(AlphaProfile::constant(3.0), Drift::Zero, false);
        let p = simulate(&s, 2.0, 0.01, &mut RngStream::new(5).rng()).unwrap();
        let total: f64 = p.jumps.iter().map(|j| j.size).sum();
        assert!((p.final_value() - s.x0 - total).abs() < 1e-12);
        for w in p.times.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn replay_reproduces_path() {
        let s = spec(
            AlphaProfile { warm: 2.8, cold: 3.6, s_star: -0.8, delta: 0.1 },
            Drift::Linear { slope: -1.0, intercept: -0.5 },
            true,
        );
        let p = simulate(&s, 5.0, 0.005, &mut RngStream::new(9).rng()).unwrap();
        let q = simulate_with_marks(&s, 5.0, 0.005, &p.marks()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn constant_alpha_jumps_are_pareto() {
        let s = spec(AlphaProfile::constant(3.0), Drift::Linear { slope: -1.0, intercept: 0.0 }, false);
        let p = simulate(&s, 400.0, 0.5, &mut RngStream::new(17).rng()).unwrap();
        let mut sizes: Vec<f64> = p.jumps.iter().map(|j| j.size).collect();
        sizes.sort_by(f64::total_cmp);
        let ks = ks_statistic(&sizes, |x| pareto_cdf(3.0, 0.36, x));
        assert!(ks < 1.628 / (sizes.len() as f64).sqrt(), "ks {ks}, n {}", sizes.len());
    }

    #[test]
    fn identical_coupling_is_exactly_zero() {
        let s = spec(
            AlphaProfile { warm: 2.8, cold: 4.3, s_star: -0.8, delta: 0.1 },
            Drift::Linear { slope: -1.0, intercept: -0.8 },
            true,
        );
        let c = simulate_coupled(&s, &s, 3.0, 0.01, &mut RngStream::new(1).rng()).unwrap();
        assert_eq!(c.sup_rho, 0.0);
        assert_eq!(c.first, c.second);
    }

    #[test]
    fn incompatible_thresholds_are_rejected() {
        let a = spec(AlphaProfile::constant(3.0), Drift::Zero, false);
        let mut b = a.clone();
        b.kernel.plus.as_mut().unwrap().eps = 0.5;
        let e = simulate_coupled(&a, &b, 1.0, 0.1, &mut RngStream::new(1).rng()).unwrap_err();
        assert!(matches!(e, Error::CouplingIncompatible(_)));
        let c = spec(AlphaProfile::constant(3.0), Drift::Zero, true);
        assert!(simulate_coupled(&a, &c, 1.0, 0.1, &mut RngStream::new(1).rng()).is_err());
    }

    #[test]
    fn blow_up_is_reported_with_time() {
        let s = spec(
            AlphaProfile::constant(3.0),
            Drift::Polynomial { coeffs: vec![1.0, 0.0, 1.0], lipschitz: None },
            false,
        );
        match simulate(&s, 10.0, 0.01, &mut RngStream::new(2).rng()) {
            Err(Error::BlowUp { time, .. }) => assert!(time > 0.0 && time < 10.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn thinning_matches_state_dependent_rate() {
        // explicit intensity: side mass λ ε^{−α}/α depends on α
        let side = SideKernel {
            eps: 0.5,
            alpha: AlphaProfile { warm: 2.0, cold: 4.0, s_star: -0.8, delta: 0.1 },
            lambda: Some(0.25),
        };
        let s = JumpDiffusionSpec {
            drift: Drift::Zero,
            kernel: Kernel { plus: Some(side), minus: None },
            x0: 5.0,
        };
        // x stays in the warm plateau: rate = 0.25·0.5^{-2}/2 = 0.5
        let root = RngStream::new(8);
        let counts: Vec<f64> = (0..4000)
            .map(|r| simulate(&s, 1.0, 0.5, &mut root.derive("t", &[r]).rng()).unwrap().jump_count() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        assert!((mean - 0.5).abs() < 3.0 * (0.5f64 / 4000.0).sqrt(), "{mean}");
    }
}
