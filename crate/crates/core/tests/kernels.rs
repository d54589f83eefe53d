use fraclab::kernels::{kernel_eval, make_fractional_laplacian, validate_kernel, KernelSpec};
use proptest::prelude::*;

fn anisotropic(s: f64) -> KernelSpec {
    // a(θ) = 1 + ½ cos²(θ - 0.3), even in θ
    KernelSpec::custom(s, 2, 1.0, 1.5, true, |t: &[f64]| {
        let c = t[0] * 0.3f64.cos() + t[1] * 0.3f64.sin();
        1.0 + 0.5 * c * c
    })
    .unwrap()
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_filter("nonzero", |(x, y)| x.hypot(*y) > 1e-6).prop_map(|(x, y)| [x, y])
}

proptest! {
    #[test]
    fn kernels_are_symmetric_and_bounded(s in 0.05..0.95f64, y in point(), aniso in any::<bool>()) {
        let k = if aniso { anisotropic(s) } else { make_fractional_laplacian(s, 2).unwrap() };
        prop_assert!(validate_kernel(&k, 256).is_valid());
        let v = kernel_eval(&k, &y).unwrap();
        prop_assert_eq!(v, kernel_eval(&k, &[-y[0], -y[1]]).unwrap());
        let base = y[0].hypot(y[1]).powf(-2.0 - 2.0 * s);
        prop_assert!(k.lambda() * base <= v * (1.0 + 1e-14));
        prop_assert!(v <= k.big_lambda() * base * (1.0 + 1e-14));
    }

    #[test]
    fn kernels_are_homogeneous(s in 0.05..0.95f64, y in point(), t in 1e-3..1e3f64) {
        let k = anisotropic(s);
        let a = kernel_eval(&k, &[t * y[0], t * y[1]]).unwrap();
        let b = t.powf(-2.0 - 2.0 * s) * kernel_eval(&k, &y).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
    }
}

#[test]
fn asymmetric_density_is_reported() {
    let k = KernelSpec::custom(0.5, 2, 1.0, 2.0, true, |t: &[f64]| 1.5 + 0.4 * t[0]).unwrap();
    let r = validate_kernel(&k, 512);
    assert!(r.symmetry_violations > 0 && !r.is_valid());
}
