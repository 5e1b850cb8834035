use proptest::prelude::*;

use tissue_owc::fitting::{fit, Dataset, Family, ModelSpec};

fn sample(family: Family, p: &[f64], step: f64) -> Dataset {
    let n = (600.0 / step).round() as usize;
    Dataset::new((0..=n).map(|k| {
        let l = 400.0 + step * k as f64;
        (l, family.value(p, l))
    }))
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Two or three well separated terms, sorted by centre.
fn gaussian_params() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=3).prop_flat_map(|n| {
        let slot = 500.0 / n as f64;
        proptest::collection::vec((1.0..50.0f64, -0.1..0.1f64, 0.12..0.3f64), n).prop_map(move |terms| {
            terms
                .iter()
                .enumerate()
                .flat_map(|(i, &(a, jitter, width))| {
                    [a, 450.0 + slot * (i as f64 + 0.5 + jitter), slot * width]
                })
                .collect()
        })
    })
}

fn fourier_params() -> impl Strategy<Value = Vec<f64>> {
    (20.0..100.0f64, proptest::collection::vec(-10.0..10.0f64, 6), 0.005..0.008f64).prop_map(|(a0, h, w)| {
        let mut p = vec![a0];
        p.extend(h);
        p.push(w);
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gaussian_recovery_and_monotone_objective(truth in gaussian_params()) {
        let family = Family::GaussianSum { terms: truth.len() / 3 };
        let r = fit(&sample(family, &truth, 2.0), &ModelSpec::gaussian_sum(truth.len() / 3)).unwrap();
        for (got, want) in r.params.iter().zip(&truth) {
            prop_assert!(rel(*got, *want) < 1e-2, "{:?} vs {:?}", r.params, truth);
        }
        prop_assert!(r.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn fourier_recovery(truth in fourier_params()) {
        let r = fit(&sample(Family::Fourier { order: 3 }, &truth, 2.0), &ModelSpec::fourier(3)).unwrap();
        for (got, want) in r.params.iter().zip(&truth) {
            prop_assert!(rel(*got, *want) < 1e-2, "{:?} vs {:?}", r.params, truth);
        }
    }

    #[test]
    fn power_law_recovery(mu in 1.0..1000.0f64, e in -4.0..-0.5f64) {
        let f = Family::PowerLaw { lambda_ref: 550.0 };
        let r = fit(&sample(f, &[mu, e], 10.0), &ModelSpec::power_law_free_exponent(550.0)).unwrap();
        prop_assert!(rel(r.params[0], mu) < 1e-6 && rel(r.params[1], e) < 1e-6);
    }

    #[test]
    fn scale_equivariance(truth in gaussian_params(), k in 0.01..100.0f64) {
        let family = Family::GaussianSum { terms: truth.len() / 3 };
        let spec = ModelSpec::gaussian_sum(truth.len() / 3);
        let data = sample(family, &truth, 2.0);
        let base = fit(&data, &spec).unwrap();
        let scaled = fit(&data.scaled(k), &spec).unwrap();
        for (i, (a, b)) in base.params.iter().zip(&scaled.params).enumerate() {
            let want = if i % 3 == 0 { a * k } else { *a };
            prop_assert!(rel(*b, want) < 1e-6, "param {}: {} vs {}", i, b, want);
        }
    }

    #[test]
    fn bounds_are_respected(truth in gaussian_params(), cap in 0.2..0.9f64) {
        let n = truth.len() / 3;
        let family = Family::GaussianSum { terms: n };
        let mut bounds = Vec::new();
        for t in truth.chunks(3) {
            bounds.push(Some((0.0, cap * t[0])));
            bounds.push(Some((t[1] - 20.0, t[1] + 20.0)));
            bounds.push(Some((5.0, 200.0)));
        }
        let spec = ModelSpec::gaussian_sum(n).with_bounds(bounds.clone());
        let r = fit(&sample(family, &truth, 2.0), &spec).unwrap();
        for (v, b) in r.params.iter().zip(&bounds) {
            let (lo, hi) = b.unwrap();
            prop_assert!(*v >= lo && *v <= hi, "{} outside [{}, {}]", v, lo, hi);
        }
        prop_assert!(r.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn seeded_restarts_are_reproducible_and_pick_the_best() {
    let truth = [10.0, 520.0, 30.0, 6.0, 700.0, 60.0];
    let family = Family::GaussianSum { terms: 2 };
    let data = sample(family, &truth, 2.0);
    let spec = ModelSpec::gaussian_sum(2).with_restarts(6, 7);
    let a = fit(&data, &spec).unwrap();
    let b = fit(&data, &spec).unwrap();
    assert_eq!(a, b);
    let single = fit(&data, &ModelSpec::gaussian_sum(2)).unwrap();
    assert!(a.objective_trace.last() <= single.objective_trace.last());
}

#[test]
fn weighted_fit_ignores_nothing_when_in_family() {
    let f = Family::PowerLaw { lambda_ref: 550.0 };
    let data = Dataset::weighted((0..=60).map(|k| {
        let l = 400.0 + 10.0 * k as f64;
        (l, f.value(&[519.0, -3.0], l), 1.0 + k as f64)
    }))
    .unwrap();
    let r = fit(&data, &ModelSpec::power_law_free_exponent(550.0)).unwrap();
    assert!(rel(r.params[0], 519.0) < 1e-9);
    assert!(rel(r.params[1], -3.0) < 1e-9);
}
