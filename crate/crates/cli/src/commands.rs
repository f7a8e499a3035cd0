use std::path::{Path, PathBuf};

use levy_transport::distance::{self, normalize, DistanceOptions};
use levy_transport::jumpsde::{bound_t1, couple_study, simulate as simulate_path};
use levy_transport::measures::MeasureSpec;
use levy_transport::study::{run_study, StudyGrid};
use levy_transport::timeseries::{extract_jumps, fit_cells, weighted_exponent, FitReport, Tail};
use levy_transport::{io, JumpDiffusionSpec, RngStream};
use serde::Serialize;

use crate::config::Config;
use crate::failure::Failure;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    io::write_json(path, value).map_err(Failure::from)
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable output"));
}

fn required<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, Failure> {
    path.as_deref()
        .ok_or_else(|| Failure::validation(format!("missing {what}")))
}

fn read_process_spec(path: &Path) -> Result<JumpDiffusionSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let spec: JumpDiffusionSpec = serde_json::from_str(&text).map_err(|e| {
        Failure::validation(format!("{}: {}", path.display(), io::json_error_message(&e)))
    })?;
    spec.validate()?;
    Ok(spec)
}

// ε for normalization: the declared threshold of each spec where there is
// one, else the gap around 0 that carries no mass
fn declared_eps(spec: &MeasureSpec) -> f64 {
    match spec {
        MeasureSpec::ParetoTail { eps, .. } | MeasureSpec::Empirical { eps, .. } => *eps,
        other => other.support_gap(),
    }
}

#[derive(Serialize)]
struct DistanceOutput<'a> {
    a: &'a Path,
    b: &'a Path,
    #[serde(flatten)]
    result: distance::DistanceResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
}

pub fn distance(cfg: &Config) -> Result<(), Failure> {
    let c = &cfg.distance;
    let (pa, pb) = (required(&c.a, "first spec")?, required(&c.b, "second spec")?);
    let a = MeasureSpec::from_json_file(pa)?;
    let b = MeasureSpec::from_json_file(pb)?;
    let opts = DistanceOptions {
        p: c.p,
        tol: c.tol,
        force_oracle: c.oracle,
    };
    let mut result = distance::distance(&a, &b, opts)?;
    let mut eps = None;
    if c.normalized {
        if c.p != 1.0 {
            return Err(Failure::validation("--normalized applies to p = 1 only"));
        }
        let e = c.eps.unwrap_or_else(|| declared_eps(&a).min(declared_eps(&b)));
        if !(e > 0.0 && e.is_finite()) {
            return Err(Failure::validation(format!(
                "cannot normalize with eps = {e}; pass --eps"
            )));
        }
        result = normalize(result, e);
        eps = Some(e);
    }
    let out = DistanceOutput {
        a: pa,
        b: pb,
        result,
        eps,
    };
    write_json(&cfg.out.join("distance.json"), &out)?;
    print_json(&out);
    Ok(())
}

pub fn table(cfg: &Config) -> Result<(), Failure> {
    let t = &cfg.table;
    let grid = StudyGrid {
        alphas: t.alphas.clone(),
        epsilons: t.epsilons.clone(),
        n: t.n,
        reps: t.reps,
        seed: cfg.seed,
    };
    let result = run_study(&grid)?;
    result.write(&cfg.out)?;
    println!("alpha\\eps {}", grid.epsilons.iter().map(|e| format!("{e:>8}")).collect::<String>());
    for row in &result.cells {
        let means: String = row.iter().map(|c| format!("{:>8.4}", c.mean)).collect();
        println!("{:>9} {means}", row[0].alpha);
    }
    Ok(())
}

#[derive(Serialize)]
struct FitOutput {
    fits: Vec<FitReport>,
    weighted_exponent: WeightedExponents,
    discarded: usize,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct WeightedExponents {
    positive: Option<f64>,
    negative: Option<f64>,
}

pub fn fit(cfg: &Config) -> Result<(), Failure> {
    let f = &cfg.fit;
    let series = io::read_series(required(&f.series, "series CSV")?, f.header)?;
    let cells = extract_jumps(&series, &f.regime)?;
    let fits = fit_cells(&cells, &f.regime)?;
    for w in &cells.warnings {
        eprintln!("warning: {w}");
    }
    for r in &fits {
        let name = format!("curve_{}_{}.csv", snake(&r.regime), snake(&r.tail));
        io::write_table(
            &cfg.out.join(name),
            &["alpha", "t1_normalized"],
            r.fit.curve.iter().map(|&(a, t)| vec![a, t]),
        )?;
    }
    let weighted = |tail: Tail| {
        let parts: Vec<(f64, usize)> = fits
            .iter()
            .filter(|r| r.tail == tail)
            .map(|r| (r.fit.alpha_min, r.fit.n))
            .collect();
        weighted_exponent(&parts).ok()
    };
    let out = FitOutput {
        weighted_exponent: WeightedExponents {
            positive: weighted(Tail::Positive),
            negative: weighted(Tail::Negative),
        },
        fits,
        discarded: cells.discarded,
        warnings: cells.warnings,
    };
    write_json(&cfg.out.join("fit.json"), &out)?;
    for r in &out.fits {
        println!(
            "{:<5} {:<9} n = {:<5} alpha = {:.1}  T1 = {:.4}",
            snake(&r.regime),
            snake(&r.tail),
            r.fit.n,
            r.fit.alpha_min,
            r.fit.t_min
        );
    }
    Ok(())
}

fn snake<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => unreachable!("unit enum variants serialize as strings"),
    }
}

fn step(horizon: f64, dt: Option<f64>) -> f64 {
    dt.unwrap_or(horizon / 1000.0)
}

#[derive(Serialize)]
struct SimulateOutput {
    horizon: f64,
    dt: f64,
    rows: usize,
    jumps: usize,
    final_value: f64,
}

pub fn simulate(cfg: &Config) -> Result<(), Failure> {
    let s = &cfg.simulate;
    let spec = read_process_spec(required(&s.spec, "process spec")?)?;
    let dt = step(s.horizon, s.dt);
    let mut rng = RngStream::new(cfg.seed).derive("simulate", &[]).rng();
    let path = simulate_path(&spec, s.horizon, dt, &mut rng)?;
    path.write_csv(&cfg.out.join("path.csv"))?;
    let out = SimulateOutput {
        horizon: s.horizon,
        dt,
        rows: path.times.len(),
        jumps: path.jump_count(),
        final_value: path.final_value(),
    };
    write_json(&cfg.out.join("simulate.json"), &out)?;
    print_json(&out);
    Ok(())
}

pub fn couple(cfg: &Config) -> Result<(), Failure> {
    let c = &cfg.couple;
    let a = read_process_spec(required(&c.spec_a, "first process spec")?)?;
    let b = read_process_spec(required(&c.spec_b, "second process spec")?)?;
    let dt = step(c.horizon, c.dt);
    let mut summary = couple_study(&a, &b, c.horizon, dt, c.replicates, RngStream::new(cfg.seed))?;
    if c.bound {
        let report = bound_t1(&a, &b, a.x0, b.x0, None)?;
        summary.delta = Some(report.delta);
        summary.g_of_delta = Some(report.g_of_delta);
    }
    write_json(&cfg.out.join("coupling.json"), &summary)?;
    print_json(&summary);
    Ok(())
}
