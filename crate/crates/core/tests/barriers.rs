use fraclab::barriers::{harmonic_extension, verify_halfspace_supersolution, BarrierFn, ExtensionConfig, ExteriorData};
use fraclab::geometry::{cone_psi, Domain};
use fraclab::kernels::make_fractional_laplacian;
use fraclab::nonlocal_op::QuadratureSpec;
use fraclab::point::dist;
use proptest::prelude::*;

fn barrier() -> impl Strategy<Value = BarrierFn> {
    prop_oneof![
        (0.0..std::f64::consts::TAU, 0.05..0.95f64).prop_map(|(a, e)| BarrierFn::half_space([a.cos(), a.sin()], e).unwrap()),
        (0.05..0.95f64).prop_map(|e| BarrierFn::psi_power(Domain::ball([0.0, 0.0], 2.0).unwrap(), e).unwrap()),
        (0.0..std::f64::consts::TAU, 0.1..2.0f64, 0.05..0.95f64)
            .prop_map(|(a, eta, b)| BarrierFn::cone([a.cos(), a.sin()], eta, b).unwrap()),
    ]
}

fn pt() -> impl Strategy<Value = [f64; 2]> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| [x, y])
}

fn positivity_base(b: &BarrierFn, x: [f64; 2]) -> f64 {
    match b {
        BarrierFn::HalfSpacePower { normal, .. } => normal[0] * x[0] + normal[1] * x[1],
        BarrierFn::PsiPower { domain, .. } => domain.psi_value(x).unwrap(),
        BarrierFn::Cone { axis, eta, .. } => cone_psi(*axis, *eta, x),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn barriers_vanish_off_their_support_and_are_holder(b in barrier(), x in pt(), y in pt()) {
        if positivity_base(&b, x) <= 0.0 {
            prop_assert_eq!(b.eval(x), 0.0);
        } else {
            prop_assert!(b.eval(x) > 0.0);
        }
        let (e, c) = b.holder_bound();
        let gap = (b.eval(x) - b.eval(y)).abs();
        prop_assert!(gap <= c * dist(x, y).powf(e) * (1.0 + 1e-12) + 1e-14, "{gap} {b:?}");
    }

    #[test]
    fn cone_barrier_is_positively_homogeneous(a in 0.0..std::f64::consts::TAU, eta in 0.1..2.0f64, beta in 0.05..0.95f64, x in pt(), l in 0.01..100.0f64) {
        let b = BarrierFn::cone([a.cos(), a.sin()], eta, beta).unwrap();
        let lhs = b.eval([l * x[0], l * x[1]]);
        let rhs = l.powf(beta) * b.eval(x);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300), "{lhs} vs {rhs}");
    }
}

#[test]
fn harmonic_extension_obeys_the_maximum_principle() {
    let g = ExteriorData::holder_point_singularity(0.3, [1.0, 0.0]).unwrap();
    let ball = Domain::ball([0.0, 0.0], 1.0).unwrap();
    let square = Domain::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
    let cfg = ExtensionConfig {
        paths: 4000,
        ..ExtensionConfig::default()
    };
    // boundary ranges: [0, 2^0.3] on the ball, [0, 2^0.15] on the square
    for (dom, hi) in [(&ball, 2f64.powf(0.3)), (&square, 2f64.powf(0.15))] {
        for x in [[0.5, 0.1], [0.9, 0.05], [0.2, 0.7], [0.99, 0.5]] {
            if !dom.contains(x) {
                continue;
            }
            let v = harmonic_extension(dom, &g, x, &cfg).unwrap();
            let slack = 3.0 * v.stderr + v.err_estimate;
            assert!(v.value >= -slack && v.value <= hi + slack, "{x:?}: {v:?}");
        }
    }
}

#[test]
fn lowering_alpha_never_breaks_a_passing_halfspace_check() {
    let k = make_fractional_laplacian(0.5, 2).unwrap();
    let q = QuadratureSpec::default().with_rel_tol(1e-7);
    let points = [[0.1, 0.0], [1.0, 0.5], [3.0, -2.0]];
    let mut passed = false;
    for alpha in [0.45, 0.35, 0.25, 0.15, 0.05] {
        let r = verify_halfspace_supersolution(&k, alpha, [1.0, 0.0], &points, &q).unwrap();
        assert!(!(passed && !r.pass), "α = {alpha} flipped PASS to FAIL");
        passed |= r.pass;
    }
    assert!(passed);
}
