//! Acceptance suite. Prints one PASS/FAIL line per criterion (details are
//! indented above it). Failures only change the exit status when
//! `ACCEPTANCE_STRICT=1` is set, so the rest of `cargo test` still runs.

use std::process::ExitCode;
use std::time::Instant;

use levy_transport::distance::{
    distance, power_pair_side_untruncated, t1_empirical_vs_pareto, t1_pareto_pair, tp_quadrature,
    DistanceOptions, DEFAULT_TOL,
};
use levy_transport::jumpsde::{
    couple_study, simulate, simulate_coupled, AlphaProfile, Drift, JumpDiffusionSpec, Kernel,
    SideKernel,
};
use levy_transport::measures::{
    probability_lambda, transport_empirical, transport_pareto, MeasureSpec, TabulatedTail,
    TailCurve, TransportFunction,
};
use levy_transport::sampling::{sample_pareto, RngStream};
use levy_transport::study::{run_study, StudyGrid};
use levy_transport::timeseries::{
    extract_jumps, fit_cells, synthetic_series, weighted_exponent, RegimeConfig, Regime,
    SyntheticCell, Tail,
};
use rand::Rng;

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: String) {
        self.pass &= ok;
        self.details
            .push(format!("{} {msg}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, msg: String) {
        self.details.push(format!("     {msg}"));
    }
}

// Published means and standard deviations, alpha = 1..10 (rows) by
// eps = 0.5..1.0 (columns).
const TABLE_MEAN: [[f64; 6]; 10] = [
    [0.1901, 0.2000, 0.2191, 0.2429, 0.2766, 0.3191],
    [0.0877, 0.0893, 0.1039, 0.1017, 0.1181, 0.1406],
    [0.0522, 0.0530, 0.0579, 0.0619, 0.0690, 0.0789],
    [0.0364, 0.0359, 0.0373, 0.0400, 0.0479, 0.0551],
    [0.0286, 0.0277, 0.0272, 0.0294, 0.0335, 0.0403],
    [0.0232, 0.0213, 0.0216, 0.0238, 0.0276, 0.0317],
    [0.0194, 0.0184, 0.0170, 0.0182, 0.0210, 0.0237],
    [0.0169, 0.0153, 0.0149, 0.0149, 0.0172, 0.0193],
    [0.0149, 0.0135, 0.0126, 0.0137, 0.0148, 0.0178],
    [0.0132, 0.0123, 0.0116, 0.0114, 0.0137, 0.0149],
];
const TABLE_SD: [[f64; 6]; 10] = [
    [0.0322, 0.0367, 0.0425, 0.0545, 0.0743, 0.0744],
    [0.0147, 0.0171, 0.0327, 0.0275, 0.0402, 0.0408],
    [0.0075, 0.0098, 0.0189, 0.0183, 0.0231, 0.0263],
    [0.0041, 0.0062, 0.0094, 0.0107, 0.0174, 0.0185],
    [0.0031, 0.0061, 0.0064, 0.0089, 0.0126, 0.0136],
    [0.0030, 0.0038, 0.0057, 0.0077, 0.0099, 0.0115],
    [0.0020, 0.0035, 0.0036, 0.0053, 0.0070, 0.0089],
    [0.0016, 0.0026, 0.0037, 0.0040, 0.0058, 0.0064],
    [0.0016, 0.0026, 0.0040, 0.0036, 0.0052, 0.0057],
    [0.0012, 0.0025, 0.0025, 0.0034, 0.0041, 0.0056],
];

fn table_reproduction() -> Outcome {
    let mut out = Outcome::new();
    let grid = StudyGrid {
        seed: 1,
        ..StudyGrid::default()
    };
    let result = run_study(&grid).expect("study runs");
    let mut inside = 0;
    let mut misses = Vec::new();
    for (ai, row) in result.cells.iter().enumerate() {
        for (ei, cell) in row.iter().enumerate() {
            let (m, s) = (TABLE_MEAN[ai][ei], TABLE_SD[ai][ei]);
            if (cell.mean - m).abs() <= 3.0 * s {
                inside += 1;
            } else {
                misses.push(format!(
                    "({}, {}): {:.4} vs {m:.4} ({:+.1} sd)",
                    cell.alpha,
                    cell.eps,
                    cell.mean,
                    (cell.mean - m) / s
                ));
            }
        }
    }
    out.check(inside == 60, format!("{inside}/60 cell means within 3 table sd"));
    for chunk in misses.chunks(3) {
        out.note(format!("outside: {}", chunk.join("; ")));
    }
    for (alpha, eps, target) in [(1.0, 0.5, 0.1901), (10.0, 1.0, 0.0149), (5.0, 0.8, 0.0294)] {
        let ai = grid.alphas.iter().position(|&a| a == alpha).unwrap();
        let ei = grid.epsilons.iter().position(|&e| e == eps).unwrap();
        let got = result.cells[ai][ei].mean;
        let tol = 3.0 * TABLE_SD[ai][ei];
        out.check(
            (got - target).abs() <= tol,
            format!("spot ({alpha}, {eps}): {got:.4} vs {target} (tolerance {tol:.4})"),
        );
    }
    out
}

fn oracle_equivalence() -> Outcome {
    let mut out = Outcome::new();
    let root = RngStream::new(2);
    let mut worst = 0.0f64;
    let instances = 1000;
    for k in 0..instances {
        let mut rng = root.derive("oracle", &[k]).rng();
        let n = rng.random_range(1..=200);
        let alpha = rng.random_range(1.1..=10.0);
        let eps = rng.random_range(0.3..=1.0);
        let lambda = probability_lambda(alpha, eps);
        let sample = sample_pareto(alpha, eps, n, &mut rng).unwrap();
        let cf = t1_empirical_vs_pareto(&sample, eps, alpha, lambda).unwrap().value;
        let ce = transport_empirical(&sample, eps).unwrap();
        let cp = transport_pareto(alpha, eps, lambda).unwrap();
        let q1 = tp_quadrature(&ce, &cp, 1.0, DEFAULT_TOL).unwrap().value;
        let q2 = tp_quadrature(&cp, &ce, 1.0, DEFAULT_TOL).unwrap().value;
        worst = worst.max((cf - q1).abs()).max((cf - q2).abs());
    }
    out.check(
        worst <= 1e-8,
        format!("{instances} instances, max |closed form − quadrature| = {worst:.2e}"),
    );
    out
}

fn random_spec<R: Rng>(rng: &mut R) -> MeasureSpec {
    match rng.random_range(0..6) {
        0 => MeasureSpec::pareto(rng.random_range(1.1..8.0), rng.random_range(0.3..1.0)),
        1 => MeasureSpec::ParetoTail {
            alpha: rng.random_range(0.5..6.0),
            eps: rng.random_range(0.2..2.0),
            lambda: Some(rng.random_range(0.1..3.0)),
        },
        2 => {
            let alpha = rng.random_range(1.5..6.0);
            let eps = rng.random_range(0.3..1.0);
            let n = rng.random_range(1..60);
            MeasureSpec::empirical(sample_pareto(alpha, eps, n, rng).unwrap(), eps)
        }
        3 => MeasureSpec::TwoSidedPowerLaw {
            alpha_plus: rng.random_range(1.2..8.0),
            alpha_minus: rng.random_range(1.2..8.0),
            lambda_plus: rng.random_range(0.0..2.0),
            lambda_minus: rng.random_range(0.1..2.0),
        },
        4 => MeasureSpec::Gamma {
            gamma: rng.random_range(0.3..3.0),
            lambda: rng.random_range(0.3..3.0),
        },
        _ => {
            let u0 = rng.random_range(0.2..1.0);
            let slope = rng.random_range(1.5..4.0);
            let t0 = rng.random_range(0.2..3.0);
            let pts = vec![(u0, t0), (2.0 * u0, t0 * 2f64.powf(-slope)), (5.0 * u0, t0 * 5f64.powf(-slope - 0.5))];
            MeasureSpec::GenericTail {
                plus: Some(TailCurve::Tabulated(TabulatedTail::new(pts).unwrap())),
                minus: None,
            }
        }
    }
}

fn metric_properties() -> Outcome {
    let mut out = Outcome::new();
    let root = RngStream::new(3);
    for p in [1.0, 2.0] {
        let opts = DistanceOptions {
            p,
            ..Default::default()
        };
        let tol = opts.tol;
        let (mut neg, mut ident, mut sym, mut tri) = (0, 0.0f64, 0.0f64, f64::NEG_INFINITY);
        for k in 0..200 {
            let mut rng = root.derive("triple", &[p as u64, k]).rng();
            let specs = [random_spec(&mut rng), random_spec(&mut rng), random_spec(&mut rng)];
            let d = |i: usize, j: usize| distance(&specs[i], &specs[j], opts).unwrap().value;
            let (ab, ba, bc, ac) = (d(0, 1), d(1, 0), d(1, 2), d(0, 2));
            neg += [ab, ba, bc, ac].iter().filter(|&&x| x < 0.0).count();
            ident = ident.max(d(0, 0)).max(d(1, 1));
            sym = sym.max((ab - ba).abs());
            tri = tri.max(ac - ab - bc);
        }
        out.check(neg == 0, format!("p = {p}: {neg} negative values"));
        out.check(ident <= tol, format!("p = {p}: max T(A, A) = {ident:.2e}"));
        out.check(sym <= 1e-12, format!("p = {p}: max |T(A, B) − T(B, A)| = {sym:.2e}"));
        out.check(
            tri <= 3.0 * tol,
            format!("p = {p}: max T(A, C) − T(A, B) − T(B, C) = {tri:.2e}"),
        );
    }
    out
}

/// `Π₀({v > 0 : c(v) > u})` found by bisecting `c` directly: the set is
/// `[v*, ∞)` or `(v*, ∞)` with mass `1/v*`.
fn preimage_mass(c: impl Fn(f64) -> f64, u: f64) -> f64 {
    let (mut lo, mut hi) = (1e-300f64, 1.0f64);
    while c(hi) <= u {
        lo = hi;
        hi *= 2.0;
        assert!(hi < 1e300, "transport never exceeds {u}");
    }
    while c(lo) > u {
        hi = lo;
        lo *= 0.5;
        if lo < 1e-300 {
            return f64::INFINITY;
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if c(mid) > u {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    1.0 / hi
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

fn pushforward() -> Outcome {
    let mut out = Outcome::new();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    let mut run = |name: &str, c: &TransportFunction, tail: &dyn Fn(f64) -> f64, negative: bool, grid: Vec<f64>| {
        let worst = grid
            .iter()
            .map(|&u| {
                let got = if negative {
                    preimage_mass(|v| -c.eval(-v), u)
                } else {
                    preimage_mass(|v| c.eval(v), u)
                };
                rel(got, tail(u))
            })
            .fold(0.0, f64::max);
        out.check(worst <= 1e-8, format!("{name}: max relative error {worst:.2e} on {} thresholds", grid.len()));
    };

    let pareto = MeasureSpec::ParetoTail {
        alpha: 3.0,
        eps: 0.5,
        lambda: Some(0.375),
    };
    run("pareto (3, 0.5, 0.375)", &pareto.transport().unwrap(), &|u| pareto.tail_plus(u), false, log_grid(0.505, 10.0, 20));
    let normalized = MeasureSpec::pareto(2.8, 0.36);
    run("pareto (2.8, 0.36, probability)", &normalized.transport().unwrap(), &|u| normalized.tail_plus(u), false, log_grid(0.37, 50.0, 20));

    let two = MeasureSpec::TwoSidedPowerLaw {
        alpha_plus: 3.0,
        alpha_minus: 2.2,
        lambda_plus: 1.5,
        lambda_minus: 0.4,
    };
    let c2 = two.transport().unwrap();
    run("two-sided positive branch", &c2, &|u| two.tail_plus(u), false, log_grid(1.01, 30.0, 20));
    run("two-sided negative branch", &c2, &|u| two.tail_minus(u), true, log_grid(1.01, 30.0, 20));

    let gamma = MeasureSpec::Gamma {
        gamma: 1.5,
        lambda: 2.0,
    };
    run("gamma (1.5, 2) via tail inversion", &gamma.transport().unwrap(), &|u| gamma.tail_plus(u), false, log_grid(1e-3, 5.0, 20));

    let sample = sample_pareto(2.5, 0.4, 40, &mut RngStream::new(4).rng()).unwrap();
    let emp = MeasureSpec::empirical(sample.clone(), 0.4);
    let grid: Vec<f64> = (0..20)
        .map(|k| {
            let i = k * (sample.len() - 1) / 20;
            0.5 * (sample[i] + sample[i + 1]).max(sample[i])
        })
        .collect();
    run("empirical (n = 40)", &emp.transport().unwrap(), &|u| emp.tail_plus(u), false, grid);
    out
}

/// Regression bound for `T₁ / (|Δα⁺| + |Δα⁻|)` with `λ⁺ = λ⁻ = 1` and
/// exponents in [2, 8]. A dense oracle sweep put the supremum at 0.99996,
/// approached as Δα → 0 at α = 2.
const FROZEN_D: f64 = 1.0;

fn lipschitz_regression() -> Outcome {
    let mut out = Outcome::new();
    let root = RngStream::new(5);
    let spec = |ap: f64, am: f64| MeasureSpec::TwoSidedPowerLaw {
        alpha_plus: ap,
        alpha_minus: am,
        lambda_plus: 1.0,
        lambda_minus: 1.0,
    };
    let (mut worst_ratio, mut worst_oracle) = (0.0f64, 0.0f64);
    for k in 0..500u64 {
        let mut rng = root.derive("lip", &[k]).rng();
        let scale = [1.0, 0.1, 0.01, 0.001][k as usize % 4];
        let a: [f64; 2] = [rng.random_range(2.0..=8.0), rng.random_range(2.0..=8.0)];
        let b = a.map(|x| (x + scale * rng.random_range(-6.0..=6.0)).clamp(2.0, 8.0));
        let (s1, s2) = (spec(a[0], a[1]), spec(b[0], b[1]));
        let t = t1_pareto_pair(&s1, &s2).unwrap().value;
        let gap = (a[0] - b[0]).abs() + (a[1] - b[1]).abs();
        if gap > 0.0 {
            worst_ratio = worst_ratio.max(t / gap);
        }
        if k < 60 {
            let q = tp_quadrature(&s1.transport().unwrap(), &s2.transport().unwrap(), 1.0, 1e-12).unwrap().value;
            worst_oracle = worst_oracle.max((t - q).abs());
        }
    }
    out.check(
        worst_ratio < FROZEN_D,
        format!("500 random pairs: max T1/(|Δα+|+|Δα−|) = {worst_ratio:.5} < D = {FROZEN_D}"),
    );
    out.check(worst_oracle <= 1e-9, format!("closed form vs quadrature on 60 pairs: {worst_oracle:.2e}"));

    // special case lambda+ = 1, lambda- = 0, alpha = (3, 4)
    let s1 = MeasureSpec::TwoSidedPowerLaw {
        alpha_plus: 3.0,
        alpha_minus: 3.0,
        lambda_plus: 1.0,
        lambda_minus: 0.0,
    };
    let s2 = MeasureSpec::TwoSidedPowerLaw {
        alpha_plus: 4.0,
        alpha_minus: 3.0,
        lambda_plus: 1.0,
        lambda_minus: 0.0,
    };
    let closed = t1_pareto_pair(&s1, &s2).unwrap().value;
    let untruncated = power_pair_side_untruncated(3.0, 4.0, 1.0, 1.0);
    let oracle = tp_quadrature(&s1.transport().unwrap(), &s2.transport().unwrap(), 1.0, 1e-12).unwrap().value;
    let (c1, c2) = (s1.transport().unwrap(), s2.transport().unwrap());
    let max_gap = log_grid(1.0, 1e6, 200)
        .iter()
        .map(|&v| (c1.eval(v) - c2.eval(v)).abs())
        .fold(0.0, f64::max);
    let binding = max_gap > 1.0;
    out.note(format!(
        "alpha (3, 4): closed form {closed:.12}, quadrature {oracle:.12}, untruncated {untruncated:.12}"
    ));
    out.check(
        !binding,
        format!("truncation non-binding per oracle (max |c1 − c2| on [1, 1e6] = {max_gap:.3})"),
    );
    out.check(
        (closed - 1.0 / 6.0).abs() <= 1e-10,
        format!("closed form equals 1/6: |{closed:.12} − 1/6| = {:.2e}", (closed - 1.0 / 6.0).abs()),
    );
    out
}

fn fit_recovery() -> Outcome {
    let mut out = Outcome::new();
    let cfg = RegimeConfig::default();
    let cells = [
        SyntheticCell { regime: Regime::Warm, tail: Tail::Positive, alpha: 2.8, n: 301 },
        SyntheticCell { regime: Regime::Warm, tail: Tail::Negative, alpha: 2.9, n: 302 },
        SyntheticCell { regime: Regime::Cold, tail: Tail::Positive, alpha: 3.6, n: 593 },
        SyntheticCell { regime: Regime::Cold, tail: Tail::Negative, alpha: 4.3, n: 228 },
    ];
    let runs = 50;
    let mut per_cell = [0usize; 4];
    let mut all_four = 0;
    for run in 0..runs {
        let series = synthetic_series(&cells, &cfg, RngStream::new(6).derive("series", &[run])).unwrap();
        let jumps = extract_jumps(&series, &cfg).unwrap();
        let fits = fit_cells(&jumps, &cfg).unwrap();
        assert_eq!(fits.len(), 4);
        let mut ok = true;
        for (k, (fit, cell)) in fits.iter().zip(&cells).enumerate() {
            assert_eq!((fit.regime, fit.tail, fit.fit.n), (cell.regime, cell.tail, cell.n));
            if (fit.fit.alpha_min - cell.alpha).abs() <= 0.3 + 1e-9 {
                per_cell[k] += 1;
            } else {
                ok = false;
            }
        }
        all_four += usize::from(ok);
    }
    for (k, cell) in cells.iter().enumerate() {
        out.note(format!(
            "({:?}, {:?}) alpha {} n {}: recovered in {}/{runs} runs",
            cell.regime, cell.tail, cell.alpha, cell.n, per_cell[k]
        ));
    }
    let need = (0.9 * runs as f64).ceil() as usize;
    out.check(
        all_four >= need,
        format!("all four minimizers within ±0.3 in {all_four}/{runs} runs (need {need})"),
    );
    let w_neg = weighted_exponent(&[(2.9, 302), (4.3, 228)]).unwrap();
    let w_pos = weighted_exponent(&[(2.8, 301), (3.6, 593)]).unwrap();
    out.check((w_neg - 3.5).abs() <= 0.005, format!("weighted negative exponent {w_neg:.4} ≈ 3.5"));
    out.check((w_pos - 3.33).abs() <= 0.005, format!("weighted positive exponent {w_pos:.4} ≈ 3.33"));
    out
}

fn regime_spec(shift: f64) -> JumpDiffusionSpec {
    let side = |warm: f64, cold: f64, eps| SideKernel {
        eps,
        alpha: AlphaProfile {
            warm: warm + shift,
            cold: cold + shift,
            s_star: -0.8,
            delta: 0.1,
        },
        lambda: None,
    };
    JumpDiffusionSpec {
        drift: Drift::Linear {
            slope: -1.0,
            intercept: -0.8,
        },
        kernel: Kernel {
            plus: Some(side(2.8, 3.6, 0.36)),
            minus: Some(side(2.9, 4.3, 0.34)),
        },
        x0: -0.8,
    }
}

fn coupling() -> Outcome {
    let mut out = Outcome::new();
    let base = regime_spec(0.0);
    let root = RngStream::new(7);

    let nonzero = (0..100u64)
        .filter(|&r| {
            let c = simulate_coupled(&base, &base, 5.0, 0.01, &mut root.derive("same", &[r]).rng()).unwrap();
            c.sup_rho != 0.0 || c.first != c.second
        })
        .count();
    out.check(nonzero == 0, format!("identical specs and seeds: {nonzero}/100 replicates with supRho ≠ 0"));

    let sweep: Vec<_> = [0.5, 0.25, 0.125]
        .iter()
        .map(|&d| {
            let s = couple_study(&base, &regime_spec(d), 5.0, 0.01, 1000, root.derive("sweep", &[])).unwrap();
            out.note(format!("Δα = {d}: mean supRho {:.5} ± {:.5}", s.mean_sup_rho, s.stderr));
            s
        })
        .collect();
    for w in sweep.windows(2) {
        let slack = 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        out.check(
            w[1].mean_sup_rho <= w[0].mean_sup_rho + slack,
            format!("{:.5} ≤ {:.5} + {slack:.5}", w[1].mean_sup_rho, w[0].mean_sup_rho),
        );
    }

    let horizon = 3.0;
    let reps = 10_000u64;
    let counts: Vec<f64> = (0..reps)
        .map(|r| {
            simulate(&base, horizon, 0.1, &mut root.derive("poisson", &[r]).rng())
                .unwrap()
                .jump_count() as f64
        })
        .collect();
    let lam = base.kernel.intensity_at(0.0) * horizon;
    let n = reps as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd_mean = (lam / n).sqrt();
    // Var(s²) ≈ (μ₄ − σ⁴)/n with μ₄ = λ(1 + 3λ) for a Poisson law
    let sd_var = ((lam * (1.0 + 3.0 * lam) - lam * lam) / n).sqrt();
    out.check(
        (mean - lam).abs() <= 3.0 * sd_mean,
        format!("jump count mean {mean:.4} vs ΛT = {lam} (3 sd = {:.4})", 3.0 * sd_mean),
    );
    out.check(
        (var - lam).abs() <= 3.0 * sd_var,
        format!("jump count variance {var:.4} vs ΛT = {lam} (3 sd = {:.4})", 3.0 * sd_var),
    );
    out
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("table reproduction", table_reproduction),
        ("oracle equivalence", oracle_equivalence),
        ("metric properties", metric_properties),
        ("pushforward", pushforward),
        ("exponent Lipschitz regression", lipschitz_regression),
        ("fit recovery", fit_recovery),
        ("coupling properties", coupling),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        for d in &outcome.details {
            println!("    {d}");
        }
        println!(
            "criterion {} {name}: {} ({:.1}s)",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed == 0 || !strict {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
