use fraclab::barriers::{DataRecord, ExteriorData};
use fraclab::geometry::Domain;
use fraclab::kernels::make_fractional_laplacian;
use fraclab::wos::{solve, WoSConfig};

fn capped(alpha: f64, z0: [f64; 2], cap: f64) -> ExteriorData {
    ExteriorData::new(DataRecord::HolderPointSingularity { alpha, z0, cap: Some(cap) }).unwrap()
}

fn cfg(paths: usize, seed: u64) -> WoSConfig {
    WoSConfig::default().with_paths(paths).with_seed(seed)
}

fn domains() -> [Domain; 2] {
    [
        Domain::ball([0.0, 0.0], 1.0).unwrap(),
        Domain::polygon(vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]]).unwrap(),
    ]
}

#[test]
fn estimates_respect_the_maximum_principle() {
    let k = make_fractional_laplacian(0.5, 2).unwrap();
    let g = capped(0.3, [1.0, 0.0], 3.0);
    let hi = 3f64.powf(0.3);
    for dom in &domains() {
        for x in [[0.5, 0.5], [0.9, 0.05], [0.1, 0.2], [0.3, 1.5]] {
            if !dom.contains(x) {
                continue;
            }
            let r = solve(dom, &g, x, &k, &cfg(20_000, 3)).unwrap();
            assert!(r.stderr >= 0.0 && (0.0..=1.0).contains(&r.snapped_fraction));
            assert!(r.estimate >= -3.0 * r.stderr && r.estimate <= hi + 3.0 * r.stderr, "{r:?}");
        }
    }
}

#[test]
fn same_seed_is_bit_identical() {
    let k = make_fractional_laplacian(0.4, 2).unwrap();
    let g = capped(0.5, [0.0, 1.0], 2.0);
    let dom = &domains()[1];
    let a = solve(dom, &g, [0.7, 0.6], &k, &cfg(10_000, 11)).unwrap();
    let b = solve(dom, &g, [0.7, 0.6], &k, &cfg(10_000, 11)).unwrap();
    let c = solve(dom, &g, [0.7, 0.6], &k, &cfg(10_000, 12)).unwrap();
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    assert_ne!(a.estimate.to_bits(), c.estimate.to_bits());
}

#[test]
fn halving_the_sphere_fraction_is_consistent() {
    let k = make_fractional_laplacian(0.5, 2).unwrap();
    let g = capped(0.3, [1.0, 0.0], 3.0);
    for dom in &domains() {
        let x = if matches!(dom, Domain::Ball { .. }) { [0.6, 0.2] } else { [1.2, 0.5] };
        let a = solve(dom, &g, x, &k, &cfg(40_000, 5)).unwrap();
        let b_cfg = WoSConfig {
            sphere_fraction: 0.25,
            ..cfg(40_000, 6)
        };
        let b = solve(dom, &g, x, &k, &b_cfg).unwrap();
        let se = a.stderr.hypot(b.stderr);
        assert!((a.estimate - b.estimate).abs() < 3.0 * se, "{a:?} {b:?}");
        assert!(b.mean_steps > a.mean_steps);
    }
}

#[test]
fn snap_bias_is_holder_controlled() {
    let k = make_fractional_laplacian(0.5, 2).unwrap();
    let g = capped(0.3, [1.0, 0.0], 3.0);
    let dom = &domains()[0];
    let eps = 1e-2;
    let run = |e: f64| {
        let c = WoSConfig {
            snap_eps: Some(e),
            ..cfg(40_000, 8)
        };
        solve(dom, &g, [0.9, 0.1], &k, &c).unwrap()
    };
    let (a, b) = (run(eps), run(2.0 * eps));
    let bound = g.c0 * 2f64.powf(g.alpha) * eps.powf(g.alpha) + 3.0 * a.stderr.hypot(b.stderr);
    assert!((a.estimate - b.estimate).abs() <= bound, "{a:?} {b:?} {bound}");
    assert!(b.snapped_fraction >= a.snapped_fraction);
}

#[test]
fn solution_is_linear_in_the_data() {
    let k = make_fractional_laplacian(0.5, 2).unwrap();
    let g1 = capped(0.3, [1.0, 0.0], 3.0);
    let g2 = ExteriorData::new(DataRecord::CappedDistance { center: [0.0, 1.0], cap: 2.0 }).unwrap();
    let (a, b) = (2.5, -0.7);
    let g = ExteriorData::combination(&[(a, &g1), (b, &g2)]).unwrap();
    for dom in &domains() {
        let x = [0.4, 0.3];
        let c = cfg(20_000, 21);
        let (r1, r2, r) = (
            solve(dom, &g1, x, &k, &c).unwrap(),
            solve(dom, &g2, x, &k, &c).unwrap(),
            solve(dom, &g, x, &k, &c).unwrap(),
        );
        let expect = a * r1.estimate + b * r2.estimate;
        let se = (r.stderr.powi(2) + (a * r1.stderr).powi(2) + (b * r2.stderr).powi(2)).sqrt();
        assert!((r.estimate - expect).abs() <= 3.0 * se, "{} vs {expect}", r.estimate);
        // common random numbers make the identity exact up to rounding
        assert!((r.estimate - expect).abs() <= 1e-12 * expect.abs().max(1.0));
    }
}
