use levy_transport::measures::{
    transport_from_tail, transport_pareto, MeasureSpec, TransportFunction, INVERSION_TOL,
};
use levy_transport::sampling::{sample_pareto, RngStream};
use proptest::prelude::*;

fn spec_strategy() -> impl Strategy<Value = MeasureSpec> {
    prop_oneof![
        (0.3f64..8.0, 0.1f64..2.0, prop::option::of(0.1f64..3.0))
            .prop_map(|(alpha, eps, lambda)| MeasureSpec::ParetoTail { alpha, eps, lambda }),
        (1.1f64..8.0, 1.1f64..8.0, 0.0f64..3.0, 0.01f64..3.0).prop_map(|(ap, am, lp, lm)| {
            MeasureSpec::TwoSidedPowerLaw {
                alpha_plus: ap,
                alpha_minus: am,
                lambda_plus: lp,
                lambda_minus: lm,
            }
        }),
        (0.1f64..4.0, 0.1f64..4.0).prop_map(|(gamma, lambda)| MeasureSpec::Gamma { gamma, lambda }),
        (1.2f64..6.0, 0.1f64..1.0, 1usize..80, any::<u64>()).prop_map(|(a, eps, n, seed)| {
            let sample = sample_pareto(a, eps, n, &mut RngStream::new(seed).rng()).unwrap();
            MeasureSpec::empirical(sample, eps)
        }),
    ]
}

fn sorted_pair(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn transport_is_monotone_and_sign_preserving(
        spec in spec_strategy(),
        raw in prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 20),
    ) {
        let c = spec.transport().unwrap();
        // exponentiate so both tiny and huge |v| are visited
        let v = |t: f64| t.signum() * t.abs().exp2() / 1024.0;
        for &(s, t) in &raw {
            let (v1, v2) = sorted_pair(v(s), v(t));
            let (c1, c2) = (c.eval(v1), c.eval(v2));
            prop_assert!(c1 <= c2, "c({v1}) = {c1} > c({v2}) = {c2}");
            prop_assert!(c1 * v1 >= 0.0 && c2 * v2 >= 0.0);
        }
        prop_assert_eq!(c.eval(0.0), 0.0);
    }

    #[test]
    fn inverting_the_pareto_tail_matches_the_power_branch(
        alpha in 0.3f64..8.0,
        eps in 0.1f64..2.0,
        lambda in 0.1f64..3.0,
        log_v in -6.0f64..8.0,
    ) {
        let v = 10f64.powf(log_v);
        let exact = transport_pareto(alpha, eps, lambda).unwrap().eval(v);
        let tail = |u: f64| if u < eps { lambda * eps.powf(-alpha) / alpha } else { lambda * u.powf(-alpha) / alpha };
        let inverted = transport_from_tail(tail, v, INVERSION_TOL).unwrap();
        prop_assert!(
            (inverted - exact).abs() <= 1e-10 * exact.max(1.0),
            "v = {v}: {inverted} vs {exact}"
        );
    }

    #[test]
    fn json_round_trip_preserves_the_transport(alpha in 1.2f64..6.0, eps in 0.1f64..1.0) {
        let spec = MeasureSpec::pareto(alpha, eps);
        let json = serde_json::to_string(&spec).unwrap();
        let back: MeasureSpec = serde_json::from_str(&json).unwrap();
        let (c1, c2) = (spec.transport().unwrap(), back.transport().unwrap());
        for v in [0.5, 1.0, 3.0, 1e4] {
            prop_assert_eq!(c1.eval(v), c2.eval(v));
        }
    }
}

// ∫_u^∞ γ e^{−λs}/s ds with s = u·eᵗ, by composite Simpson on t ∈ [0, 60]
fn gamma_tail_by_quadrature(gamma: f64, lambda: f64, u: f64) -> f64 {
    let n = 60_000;
    let h = 60.0 / n as f64;
    let f = |t: f64| (-lambda * u * t.exp()).exp();
    let mut acc = f(0.0) + f(60.0);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    gamma * acc * h / 3.0
}

#[test]
fn gamma_transport_matches_brute_force_inversion() {
    let (gamma, lambda) = (1.5, 2.0);
    let c = MeasureSpec::Gamma { gamma, lambda }.transport().unwrap();
    for v in [1.0, 10.0, 100.0] {
        let (mut lo, mut hi) = (1e-12, 50.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if gamma_tail_by_quadrature(gamma, lambda, mid) <= 1.0 / v {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let got = c.eval(v);
        assert!((got - hi).abs() <= 1e-9 * hi, "v = {v}: {got} vs {hi}");
    }
}

#[test]
fn empirical_transport_is_a_staircase_over_the_sample() {
    let sample = vec![0.5, 0.7, 0.7, 2.0];
    let c: TransportFunction = MeasureSpec::empirical(sample.clone(), 0.4).transport().unwrap();
    let n = sample.len() as f64;
    for (i, &x) in sample.iter().enumerate() {
        let start = n / (n - i as f64);
        assert_eq!(c.eval(start), x);
        if i == 0 {
            assert_eq!(c.eval(start * (1.0 - 1e-12)), 0.0);
        }
    }
    assert_eq!(c.eval(-3.0), 0.0);
}
