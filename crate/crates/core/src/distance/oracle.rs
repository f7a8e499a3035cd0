use crate::error::{Error, Result};
use crate::measures::{Branch, HalfTransport, TransportFunction};
use crate::quadrature::{integrate, Integral};

use super::{DistanceResult, Method};

/// Samples per segment used to locate sign changes and `|d| = 1` crossings.
const SCAN_POINTS: usize = 16;
/// Halvings of the outermost segment before the remainder is bounded by its length.
const OUTER_HALVINGS: i32 = 100;
/// Beyond this `w = 1/v` the doubling search for infinite-mass transports gives up.
const DIVERGENCE_W: f64 = 1e16;

/// `T_p` by adaptive quadrature.
///
/// Works in `w = 1/v`, where `Π₀` becomes Lebesgue measure and the truncated
/// integrand is bounded by 1. Each half-line is split at the union of both
/// breakpoint sets, then at every sign change of `c₁ − c₂` and every
/// crossing of `|c₁ − c₂| = 1`, so Gauss–Kronrod only ever sees smooth
/// pieces. Transports that are nonzero arbitrarily close to `v = 0` are
/// integrated over `w ∈ [W, 2W]` blocks until the blocks stop contributing.
pub fn tp_quadrature(
    c1: &TransportFunction,
    c2: &TransportFunction,
    p: f64,
    tol: f64,
) -> Result<DistanceResult> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain("p", p, "order must be finite and >= 1"));
    }
    crate::error::require_positive("tol", tol)?;
    let plus = half_integral(&c1.plus, &c2.plus, p, 0.5 * tol)?;
    let minus = half_integral(&c1.minus, &c2.minus, p, 0.5 * tol)?;
    let total = plus + minus;
    let integral = total.value.max(0.0);
    let value = if p == 1.0 { integral } else { integral.powf(1.0 / p) };
    let err_estimate = if p == 1.0 {
        total.abs_err
    } else if integral > 0.0 {
        total.abs_err / (p * integral.powf(1.0 - 1.0 / p))
    } else {
        total.abs_err.powf(1.0 / p)
    };
    Ok(DistanceResult {
        value,
        order: p,
        method: Method::Quadrature,
        err_estimate,
        normalized: false,
    })
}

/// `∫₀^∞ (|h₁(s) − h₂(s)| ∧ 1)^p s⁻² ds`.
fn half_integral(h1: &HalfTransport, h2: &HalfTransport, p: f64, tol: f64) -> Result<Integral> {
    if h1.is_zero() && h2.is_zero() {
        return Ok(Integral::ZERO);
    }
    let mut starts: Vec<f64> = h1.breakpoints().chain(h2.breakpoints()).collect();
    starts.sort_by(f64::total_cmp);
    starts.dedup();
    let reaches_zero = h1.reaches_zero() || h2.reaches_zero();

    // knots in w, increasing: 0 < 1/s_max < ... < 1/s_min
    let knots: Vec<f64> = starts.iter().rev().map(|s| 1.0 / s).collect();
    let w_max = knots.last().copied().unwrap_or(1.0);
    let mut err = None;
    let mut total = Integral::ZERO;

    let mut lo = 0.0;
    let mut uppers = knots.clone();
    if uppers.is_empty() {
        uppers.push(w_max);
    }
    for &hi in &uppers {
        let seg = Segment::new(h1, h2, lo, hi);
        total = total + seg.integrate(p, tol * (hi - lo) / w_max, &mut err);
        lo = hi;
    }

    if reaches_zero {
        let mut w = w_max;
        let block_tol = tol * 1e-3;
        let mut quiet = 0;
        loop {
            let seg = Segment::new(h1, h2, w, 2.0 * w);
            let block = seg.integrate(p, block_tol, &mut err);
            total = total + block;
            if let Some(e) = err.take() {
                return Err(e);
            }
            quiet = if block.value <= block_tol { quiet + 1 } else { 0 };
            if quiet >= 3 {
                break;
            }
            w *= 2.0;
            if w > DIVERGENCE_W {
                return Err(Error::Divergence(format!(
                    "truncated difference does not decay near v = 0 (still {:.3e} per block at v = {:.3e})",
                    block.value,
                    1.0 / w
                )));
            }
        }
    }
    if let Some(e) = err {
        return Err(e);
    }
    if !total.value.is_finite() {
        return Err(Error::Divergence("non-finite integrand".into()));
    }
    Ok(total)
}

/// A `w`-interval on which each transport follows a single branch.
struct Segment<'a> {
    b1: Option<&'a Branch>,
    b2: Option<&'a Branch>,
    lo: f64,
    hi: f64,
}

impl<'a> Segment<'a> {
    fn new(h1: &'a HalfTransport, h2: &'a HalfTransport, lo: f64, hi: f64) -> Self {
        let s_mid = if lo == 0.0 { 2.0 / hi } else { 2.0 / (lo + hi) };
        Segment {
            b1: h1.branch_at(s_mid),
            b2: h2.branch_at(s_mid),
            lo,
            hi,
        }
    }

    fn diff(&self, w: f64, err: &mut Option<Error>) -> f64 {
        let s = 1.0 / w;
        let mut eval = |b: Option<&Branch>| match b {
            None => 0.0,
            Some(b) => b.try_eval(s).unwrap_or_else(|e| {
                err.get_or_insert(e);
                0.0
            }),
        };
        let x1 = eval(self.b1);
        let x2 = eval(self.b2);
        x1 - x2
    }

    fn integrate(&self, p: f64, tol: f64, err: &mut Option<Error>) -> Integral {
        if self.hi <= self.lo {
            return Integral::ZERO;
        }
        let rho = move |d: f64| {
            let r = d.abs().min(1.0);
            if p == 1.0 {
                r
            } else {
                r.powf(p)
            }
        };
        let constant = |b: Option<&Branch>| matches!(b, None | Some(Branch::Const(_)));
        if constant(self.b1) && constant(self.b2) {
            let v = rho(self.diff(self.hi, err));
            return Integral {
                value: v * (self.hi - self.lo),
                abs_err: 0.0,
                evaluations: 1,
                converged: true,
            };
        }

        let mut out = Integral::ZERO;
        let (grid, floor) = if self.lo == 0.0 {
            // geometric towards w = 0; the remaining (0, floor] is bounded by its length
            let mut g: Vec<f64> = (0..=OUTER_HALVINGS)
                .rev()
                .map(|k| self.hi * 2f64.powi(-k))
                .collect();
            g[OUTER_HALVINGS as usize] = self.hi;
            let floor = g[0];
            let v = rho(self.diff(floor, err));
            out.value += v * floor;
            out.abs_err += floor;
            (g, floor)
        } else {
            let g: Vec<f64> = (0..=SCAN_POINTS)
                .map(|k| {
                    if k == SCAN_POINTS {
                        self.hi
                    } else {
                        self.lo + (self.hi - self.lo) * k as f64 / SCAN_POINTS as f64
                    }
                })
                .collect();
            (g, self.lo)
        };
        let span = self.hi - floor;

        let mut cuts = vec![grid[0]];
        for pair in grid.windows(2) {
            self.crossings(pair[0], pair[1], err, &mut cuts);
            cuts.push(pair[1]);
        }
        // outer segments keep every grid point as a cut; inner ones only crossings
        if self.lo != 0.0 {
            let grid_set: Vec<f64> = grid[1..grid.len() - 1].to_vec();
            cuts.retain(|c| !grid_set.contains(c));
        }
        cuts.dedup();
        for pair in cuts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let piece_tol = tol * (b - a) / span;
            let r = integrate(|w| rho(self.diff(w, err)), a, b, piece_tol);
            out = out + r;
        }
        out
    }

    /// Appends every point in `(a, b)` where the truncated-difference regime
    /// changes (sign of `c₁ − c₂`, or `|c₁ − c₂|` crossing 1).
    fn crossings(&self, a: f64, b: f64, err: &mut Option<Error>, cuts: &mut Vec<f64>) {
        let regime = |d: f64| -> i8 {
            if d >= 1.0 {
                2
            } else if d > 0.0 {
                1
            } else if d == 0.0 {
                0
            } else if d > -1.0 {
                -1
            } else {
                -2
            }
        };
        let r_end = regime(self.diff(b, err));
        let mut lo = a;
        let mut r_lo = regime(self.diff(a, err));
        let mut guard = 0;
        while r_lo != r_end && guard < 8 {
            guard += 1;
            let mut hi = b;
            let mut r_hi = r_end;
            loop {
                let mid = lo + 0.5 * (hi - lo);
                if mid <= lo || mid >= hi {
                    break;
                }
                let r_mid = regime(self.diff(mid, err));
                if r_mid == r_lo {
                    lo = mid;
                } else {
                    hi = mid;
                    r_hi = r_mid;
                }
            }
            if hi < b {
                cuts.push(hi);
            }
            lo = hi;
            r_lo = r_hi;
        }
    }
}
