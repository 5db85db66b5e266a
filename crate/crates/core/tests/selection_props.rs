use fluxeit_core::scattering::linspace;
use fluxeit_core::selection::{
    add_noise, aic_score, aic_weights, compare_models, derive_seed, fit_model, rss_of, synth_dataset,
};
use fluxeit_core::{LambdaParams, LineShapeData, ModelKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn omega_grid() -> Vec<f64> {
    linspace(-30.0, 30.0, 201)
}

fn model_data(model: ModelKind, truth: &[f64], noise: f64, seed: u64) -> LineShapeData {
    let w = omega_grid();
    let clean: Vec<f64> = w.iter().map(|&w| model.eval(truth, w)).collect();
    LineShapeData::new(w, add_noise(&clean, noise, seed).unwrap()).unwrap()
}

proptest! {
    #[test]
    fn weights_are_complementary(a in -1e6f64..1e6, b in -1e6f64..1e6, n in 1usize..5000) {
        for (x, y) in [(a, b), (f64::NEG_INFINITY, b), (a, f64::NEG_INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY)] {
            let (we, wa) = aic_weights(x, y, n);
            prop_assert!((we + wa - 1.0).abs() <= 1e-15);
            prop_assert!((0.0..=1.0).contains(&we));
        }
    }

    #[test]
    fn fewer_parameters_win_at_equal_residuals(rss in 1e-8f64..1e3, n in 10usize..1000) {
        let (w_eit, w_ats) = aic_weights(
            aic_score(rss, n, ModelKind::Eit.parameter_count()).unwrap(),
            aic_score(rss, n, ModelKind::Ats.parameter_count()).unwrap(),
            n,
        );
        prop_assert!(w_ats > w_eit);
    }
}

#[test]
fn fits_are_local_minima() {
    let params = LambdaParams::canonical();
    let mut rng = ChaCha8Rng::seed_from_u64(441);
    for _ in 0..20 {
        let oc = rng.random_range(1.0..25.0);
        let data = synth_dataset(&params, oc, &omega_grid(), 0.01, rng.random(), false).unwrap();
        let (eit, ats) = compare_models(&data, 0).unwrap();
        for fit in [eit, ats] {
            for i in 0..fit.k {
                for f in [0.99, 1.01] {
                    let mut p = fit.params.clone();
                    p[i] *= f;
                    let rss = rss_of(fit.model, &p, &data);
                    assert!(rss >= fit.rss, "{} oc {oc}: param {i} x{f} gives {rss} < {}", fit.model.name(), fit.rss);
                }
            }
        }
    }
}

#[test]
fn estimates_sharpen_as_noise_falls() {
    let cases = [
        (ModelKind::Eit, vec![40.0, 7.0, 2.0, 0.8]),
        (ModelKind::Eit, vec![60.0, 8.0, -3.0, 1.5]),
        (ModelKind::Ats, vec![12.0, 6.0, 4.0]),
        (ModelKind::Ats, vec![30.0, 12.0, 7.0]),
    ];
    for (model, truth) in cases {
        let error = |noise: f64| {
            let fit = fit_model(model, &model_data(model, &truth, noise, 7), 0).unwrap();
            fit.params.iter().zip(&truth).map(|(p, t)| ((p - t) / t).abs()).fold(0.0, f64::max)
        };
        let (coarse, fine) = (error(0.02), error(0.002));
        assert!(fine < coarse, "{} {truth:?}: {fine} vs {coarse}", model.name());
    }
}

#[test]
fn fixed_seed_gives_identical_outcomes() {
    let params = LambdaParams::canonical();
    let run = || {
        let data = synth_dataset(&params, 9.0, &omega_grid(), 0.01, derive_seed(1729, 3, 5), false).unwrap();
        compare_models(&data, 0).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    let bits = |f: &fluxeit_core::FitOutcome| f.params.iter().map(|p| p.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.0), bits(&b.0));
    assert_eq!(a.0.rss.to_bits(), b.0.rss.to_bits());
}

#[test]
fn synthetic_noise_has_the_requested_spread() {
    let clean = vec![1.0; 20_000];
    let noisy = add_noise(&clean, 0.01, 99).unwrap();
    let n = noisy.len() as f64;
    let mean = noisy.iter().sum::<f64>() / n;
    let std = (noisy.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((0.008..=0.012).contains(&std), "{std}");
}

#[test]
fn noiseless_model_data_saturates_the_weights() {
    let data = model_data(ModelKind::Eit, &[40.0, 7.0, 2.0, 0.8], 0.0, 0);
    let (eit, ats) = compare_models(&data, 0).unwrap();
    assert!(eit.rss < 1e-20);
    let w = eit.per_point_weight.unwrap();
    assert!(w > 0.99 && (w + ats.per_point_weight.unwrap() - 1.0).abs() <= 1e-15);
}
