use fraclab::barriers::{DataRecord, ExteriorData};
use fraclab::geometry::Domain;
use fraclab::kernels::make_fractional_laplacian;
use fraclab::quad::logspace;
use fraclab::regularity::{
    exponent_experiment, fit_holder, holder_seminorm, BoundaryProfile, ExperimentConfig, FitModel, ProfileSample,
};
use fraclab::wos::WoSConfig;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn profile(ts: &[f64], f: impl Fn(f64) -> f64, rel_err: f64) -> BoundaryProfile {
    let samples = ts
        .iter()
        .map(|&t| ProfileSample {
            t,
            value: f(t),
            stderr: rel_err * f(t).abs(),
        })
        .collect();
    BoundaryProfile::from_samples([0.0, 0.0], [0.0, 1.0], 0.0, samples).unwrap()
}

proptest! {
    #[test]
    fn exact_power_laws_are_recovered_at_any_scale(
        alpha in 0.02..1.9f64,
        c in prop_oneof![1e-6..1e-3f64, 0.1..10.0f64, 1e3..1e6f64],
        lo in -7.0..-3.0f64,
        decades in 1.0..4.0f64,
        s in proptest::option::of(0.1..0.9f64),
    ) {
        let ts = logspace(10f64.powf(lo), 10f64.powf(lo + decades), 12);
        let f = fit_holder(&profile(&ts, |t| c * t.powf(alpha), 0.0), s, None).unwrap();
        prop_assert!((f.alpha_hat - alpha).abs() < 1e-3, "{f:?}");
        prop_assert_eq!(f.model, FitModel::Plain);
        let g = fit_holder(&profile(&ts, |t| -c * t.powf(alpha), 0.0), s, None).unwrap();
        prop_assert!((g.alpha_hat - f.alpha_hat).abs() < 1e-12);
        prop_assert!(g.constant_hat < 0.0);
    }

    #[test]
    fn noisy_power_laws_never_select_the_log_model(
        alpha in 0.05..0.95f64,
        s in 0.1..0.9f64,
        seed in any::<u64>(),
    ) {
        // relative noise 0.5%, SNR 200
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ts = logspace(1e-5, 1e-3, 12);
        let noise: Vec<f64> = ts.iter().map(|_| 0.005 * (rng.gen::<f64>() * 2.0 - 1.0) * 3f64.sqrt()).collect();
        let samples = ts
            .iter()
            .zip(&noise)
            .map(|(&t, e)| ProfileSample { t, value: t.powf(alpha) * (1.0 + e), stderr: 0.005 * t.powf(alpha) })
            .collect();
        let p = BoundaryProfile::from_samples([0.0, 0.0], [0.0, 1.0], 0.0, samples).unwrap();
        let f = fit_holder(&p, Some(s), None).unwrap();
        prop_assert_eq!(f.model, FitModel::Plain, "{:?}", f);
    }

    #[test]
    fn seminorm_grows_under_refinement(
        pts in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2..30),
        extra in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..10),
        alpha in 0.05..1.0f64,
    ) {
        let u = |p: [f64; 2]| (p[0] * 3.0).sin() + p[1].abs().sqrt();
        let mut samples: Vec<([f64; 2], f64)> = pts.iter().map(|&(x, y)| ([x, y], u([x, y]))).collect();
        let before = holder_seminorm(&samples, alpha).unwrap();
        samples.extend(extra.iter().map(|&(x, y)| ([x, y], u([x, y]))));
        prop_assert!(holder_seminorm(&samples, alpha).unwrap() >= before);
    }
}

#[test]
fn experiment_verdict_is_scale_equivariant() {
    let k = make_fractional_laplacian(0.5, 2).unwrap();
    let dom = Domain::ball([0.0, 0.0], 1.0).unwrap();
    let g = ExteriorData::new(DataRecord::HolderPointSingularity {
        alpha: 0.3,
        z0: [1.0, 0.0],
        cap: Some(20.0),
    })
    .unwrap();
    let cfg = ExperimentConfig {
        wos: WoSConfig::default().with_paths(20_000).with_seed(4),
        ..ExperimentConfig::default()
    };
    let base = exponent_experiment(&dom, &g, &k, &cfg).unwrap();
    for c in [0.01, 7.5] {
        let scaled = ExteriorData::combination(&[(c, &g)]).unwrap();
        let r = exponent_experiment(&dom, &scaled, &k, &cfg).unwrap();
        assert_eq!(r.pass, base.pass);
        assert_eq!(r.points.len(), base.points.len());
        for (a, b) in r.points.iter().zip(&base.points) {
            assert!((a.fit.alpha_hat - b.fit.alpha_hat).abs() < 1e-9, "{} vs {}", a.fit.alpha_hat, b.fit.alpha_hat);
            assert_eq!(a.fit.model, b.fit.model);
        }
    }
}
