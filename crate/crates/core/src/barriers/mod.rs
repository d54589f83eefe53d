//! Explicit comparison functions, their supersolution checks, and the
//! harmonic extension of exterior data.

mod data;
mod extension;

pub use data::{CertificateReport, DataRecord, ExteriorData};
pub use extension::{
    check_extension_bounds, harmonic_extension, ExtendedField, ExtensionBoundsReport, ExtensionConfig, ExtensionValue,
};

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::geometry::{cone_psi, cone_rays, Domain};
use crate::kernels::KernelSpec;
use crate::nonlocal_op::{apply_l, Field, Growth, OperatorValue, PlusPower, QuadratureSpec};
use crate::point::{self, add, norm, normalize, scale, Point};
use crate::quad::logspace;
use crate::regularity::loglog_slope;

/// Comparison functions.
#[derive(Debug, Clone, PartialEq)]
pub enum BarrierFn {
    /// `(x·ν)₊^α`
    HalfSpacePower { normal: Point, alpha: f64 },
    /// `ψ₊^α` with ψ the regularized distance of the domain
    PsiPower { domain: Domain, alpha: f64 },
    /// `ψ_c₊^β` with `ψ_c(x) = e·x + η|x|(1 - (e·x)²/|x|²)`
    Cone { axis: Point, eta: f64, beta: f64 },
}

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(FracError::Parameter(format!("{name} = {v} must lie in (0, 1)")))
    }
}

impl BarrierFn {
    pub fn half_space(normal: Point, alpha: f64) -> Result<Self> {
        check_exponent("α", alpha)?;
        let normal = normalize(normal).ok_or_else(|| FracError::Parameter("normal must be nonzero".into()))?;
        Ok(BarrierFn::HalfSpacePower { normal, alpha })
    }

    pub fn psi_power(domain: Domain, alpha: f64) -> Result<Self> {
        check_exponent("α", alpha)?;
        if domain.psi_value([0.0, 0.0]).is_none() || matches!(domain, Domain::Cone { .. }) {
            return Err(FracError::UnsupportedDomain {
                op: "psi_power",
                variant: domain.variant_name(),
            });
        }
        Ok(BarrierFn::PsiPower { domain, alpha })
    }

    pub fn cone(axis: Point, eta: f64, beta: f64) -> Result<Self> {
        check_exponent("β", beta)?;
        let axis = normalize(axis).ok_or_else(|| FracError::Parameter("axis must be nonzero".into()))?;
        if !(eta > 0.0) {
            return Err(FracError::Parameter(format!("η = {eta} must be positive")));
        }
        Ok(BarrierFn::Cone { axis, eta, beta })
    }

    /// Closed-form value, zero outside the positivity set.
    pub fn eval(&self, x: Point) -> f64 {
        let (base, expo) = match self {
            BarrierFn::HalfSpacePower { normal, alpha } => (point::dot(*normal, x), *alpha),
            BarrierFn::PsiPower { domain, alpha } => (domain.psi_value(x).unwrap_or(0.0), *alpha),
            BarrierFn::Cone { axis, eta, beta } => (cone_psi(*axis, *eta, x), *beta),
        };
        if base > 0.0 {
            base.powf(expo)
        } else {
            0.0
        }
    }

    /// Exponent of positive homogeneity, when the barrier has one.
    pub fn degree(&self) -> Option<f64> {
        match self {
            BarrierFn::HalfSpacePower { alpha, .. } => Some(*alpha),
            BarrierFn::Cone { beta, .. } => Some(*beta),
            BarrierFn::PsiPower { domain: Domain::HalfPlane { .. }, alpha } => Some(*alpha),
            BarrierFn::PsiPower { .. } => None,
        }
    }

    /// `(exponent, C)` with `|b(x) - b(y)| ≤ C|x - y|^exponent`.
    pub fn holder_bound(&self) -> (f64, f64) {
        match self {
            BarrierFn::HalfSpacePower { alpha, .. } => (*alpha, 1.0),
            // |∇ψ_c| ≤ 1 + 4η
            BarrierFn::Cone { eta, beta, .. } => (*beta, (1.0 + 4.0 * eta).powf(*beta)),
            BarrierFn::PsiPower { domain, alpha } => {
                let lip = match domain {
                    Domain::StarShaped(s) => {
                        // |∇ψ| is 1-homogeneous in x, so its sup sits on the boundary
                        let dom = Domain::StarShaped(s.clone());
                        (0..1024)
                            .map(|i| {
                                let b = dom.boundary_point(i as f64 / 1024.0, 1.0);
                                let inner = scale(b, 1.0 - 1e-9);
                                dom.regularized_distance(inner).map(|r| norm(r.grad)).unwrap_or(0.0)
                            })
                            .fold(0.0, f64::max)
                            * 1.01
                    }
                    _ => 1.0,
                };
                (*alpha, lip.powf(*alpha))
            }
        }
    }

    fn plus_power(&self) -> Option<PlusPower> {
        match self {
            BarrierFn::HalfSpacePower { normal, alpha }
            | BarrierFn::PsiPower {
                domain: Domain::HalfPlane { normal },
                alpha,
            } => Some(PlusPower {
                normal: *normal,
                shift: 0.0,
                exponent: *alpha,
                coef: 1.0,
            }),
            _ => None,
        }
    }
}

impl Field for BarrierFn {
    fn value(&self, x: Point) -> f64 {
        self.eval(x)
    }

    fn growth(&self) -> Growth {
        if let Some(p) = self.plus_power() {
            return p.growth();
        }
        match self {
            BarrierFn::PsiPower { domain, alpha } => {
                let sup = match domain {
                    Domain::Ball { radius, .. } => 0.5 * radius,
                    Domain::StarShaped(s) => 0.5 * s.coefficients().0,
                    _ => 1.0,
                };
                Growth::bounded(sup.powf(*alpha))
            }
            BarrierFn::Cone { eta, beta, .. } => Growth {
                exponent: *beta,
                constant: (1.0 + eta).powf(*beta),
            },
            BarrierFn::HalfSpacePower { .. } => unreachable!(),
        }
    }

    fn smooth_radius(&self, x: Point) -> Option<f64> {
        if let Some(p) = self.plus_power() {
            return p.smooth_radius(x);
        }
        let d = match self {
            BarrierFn::PsiPower { domain, .. } => domain.dist(x),
            BarrierFn::Cone { axis, eta, .. } => Domain::Cone { axis: *axis, eta: *eta }.dist(x),
            BarrierFn::HalfSpacePower { .. } => unreachable!(),
        };
        (d > 0.0).then_some(d)
    }

    fn line_breaks(&self, x: Point, dir: Point) -> Vec<f64> {
        if let Some(p) = self.plus_power() {
            return p.line_breaks(x, dir);
        }
        match self {
            BarrierFn::PsiPower { domain, .. } => domain.line_crossings(x, dir),
            BarrierFn::Cone { axis, eta, .. } => Domain::Cone { axis: *axis, eta: *eta }.line_crossings(x, dir),
            BarrierFn::HalfSpacePower { .. } => unreachable!(),
        }
    }

    fn angular_breaks(&self, x: Point) -> Vec<f64> {
        if let Some(p) = self.plus_power() {
            return p.angular_breaks(x);
        }
        match self {
            BarrierFn::Cone { axis, eta, .. } => {
                let (a, b) = cone_rays(*axis, *eta);
                let mut out = vec![a[1].atan2(a[0]), b[1].atan2(b[0])];
                if norm(x) > 0.0 {
                    out.push(x[1].atan2(x[0]));
                }
                out
            }
            _ => Vec::new(),
        }
    }

    fn tail_start(&self, x: Point, dir: Point) -> Option<f64> {
        if let Some(p) = self.plus_power() {
            return p.tail_start(x, dir);
        }
        match self {
            BarrierFn::PsiPower { domain, .. } => {
                let (c, r) = domain.bounding_disk()?;
                Some(point::dist(x, c) + r)
            }
            BarrierFn::Cone { .. } => Some(1e6 * (norm(x) + 1.0)),
            BarrierFn::HalfSpacePower { .. } => unreachable!(),
        }
    }

    fn line_tail(&self, x: Point, dir: Point, s: f64, r: f64) -> (f64, f64) {
        if let Some(p) = self.plus_power() {
            return p.line_tail(x, dir, s, r);
        }
        match self {
            BarrierFn::PsiPower { .. } => (0.0, 0.0),
            BarrierFn::Cone { eta, beta, .. } => {
                // Φ(x ± r·dir) = r^β Φ(±dir + x/r), and |a^β - b^β| ≤ |a - b|^β
                let far = 0.5 * (self.eval(dir) + self.eval(scale(dir, -1.0)));
                let value = far * r.powf(beta - 2.0 * s) / (2.0 * s - beta);
                let lip = 1.0 + 4.0 * eta;
                let err = (lip * norm(x)).powf(*beta) * r.powf(-2.0 * s) / (2.0 * s);
                (value, err)
            }
            BarrierFn::HalfSpacePower { .. } => unreachable!(),
        }
    }
}

/// Operator values of a barrier at a set of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub points: Vec<Point>,
    pub values: Vec<OperatorValue>,
    pub min_value: f64,
    /// min over points of value / err_estimate
    pub min_margin: f64,
    /// PASS iff every value exceeds its error estimate
    pub pass: bool,
}

impl BarrierReport {
    fn from_values(points: Vec<Point>, values: Vec<OperatorValue>) -> Self {
        let min_value = values.iter().map(|v| v.value).fold(f64::INFINITY, f64::min);
        let min_margin = values.iter().map(margin).fold(f64::INFINITY, f64::min);
        let pass = values.iter().all(|v| v.value > v.err_estimate && v.value > 0.0);
        BarrierReport {
            points,
            values,
            min_value,
            min_margin,
            pass,
        }
    }
}

fn margin(v: &OperatorValue) -> f64 {
    if v.err_estimate > 0.0 {
        v.value / v.err_estimate
    } else if v.value > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

fn evaluate_all(k: &KernelSpec, b: &BarrierFn, points: &[Point], q: &QuadratureSpec) -> Result<Vec<OperatorValue>> {
    crate::par_map(points, |_, x| apply_l(k, b, *x, q)).into_iter().collect()
}

/// `-L(x·ν)₊^α` at points of the half-space `{x·ν > 0}`.
pub fn verify_halfspace_supersolution(
    k: &KernelSpec,
    alpha: f64,
    normal: Point,
    points: &[Point],
    q: &QuadratureSpec,
) -> Result<BarrierReport> {
    if !k.is_homogeneous() {
        return Err(FracError::Precondition("the half-space barrier needs a homogeneous kernel".into()));
    }
    if !(alpha > 0.0 && alpha < k.s()) {
        return Err(FracError::Precondition(format!(
            "α = {alpha} must lie in (0, s) with s = {}",
            k.s()
        )));
    }
    let b = BarrierFn::half_space(normal, alpha)?;
    let n = normalize(normal).expect("checked by constructor");
    if let Some(x) = points.iter().find(|x| point::dot(n, **x) <= 0.0) {
        return Err(FracError::NotInterior(*x));
    }
    let values = evaluate_all(k, &b, points, q)?;
    Ok(BarrierReport::from_values(points.to_vec(), values))
}

/// Normalized values `-L(ψ^α)·d^{2s-α}` near the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiBarrierReport {
    pub band: (f64, f64),
    pub d: Vec<f64>,
    pub points: Vec<Point>,
    pub values: Vec<OperatorValue>,
    pub normalized: Vec<f64>,
    /// Requested distances outside the band.
    pub skipped: Vec<f64>,
    /// Empirical constant: infimum of the normalized values.
    pub c0: f64,
    /// Log-log slope of the normalized values against d.
    pub trend_slope: f64,
    pub pass: bool,
    pub note: String,
}

/// Samples `d` inside `band` along the inward normal at the boundary point
/// with parameter 0 (the point `(1,0)` for the unit ball).
pub fn verify_psi_barrier(
    k: &KernelSpec,
    dom: &Domain,
    alpha: f64,
    band: (f64, f64),
    ds: &[f64],
    q: &QuadratureSpec,
) -> Result<PsiBarrierReport> {
    if !matches!(dom, Domain::Ball { .. } | Domain::StarShaped(_)) {
        return Err(FracError::UnsupportedDomain {
            op: "verify_psi_barrier",
            variant: dom.variant_name(),
        });
    }
    if !(alpha > 0.0 && alpha < k.s()) {
        return Err(FracError::Precondition(format!(
            "α = {alpha} must lie in (0, s) with s = {}",
            k.s()
        )));
    }
    let b = BarrierFn::psi_power(dom.clone(), alpha)?;
    let z0 = dom.boundary_point(0.0, 1.0);
    let normal = dom.inward_normal_at(z0);
    let (inside, skipped): (Vec<f64>, Vec<f64>) = ds.iter().partition(|d| **d >= band.0 && **d <= band.1);
    let points: Vec<Point> = inside.iter().map(|d| add(z0, scale(normal, *d))).collect();
    let actual: Vec<f64> = points.iter().map(|x| dom.dist(*x)).collect();
    let values = evaluate_all(k, &b, &points, q)?;
    let expo = 2.0 * k.s() - alpha;
    let normalized: Vec<f64> = values.iter().zip(&actual).map(|(v, d)| v.value * d.powf(expo)).collect();
    let c0 = normalized.iter().copied().fold(f64::INFINITY, f64::min);
    let trend_slope = if normalized.iter().all(|v| *v > 0.0) && actual.len() >= 2 {
        loglog_slope(&actual, &normalized)
    } else {
        f64::NAN
    };
    let pass = !values.is_empty() && values.iter().all(|v| v.value > v.err_estimate && v.value > 0.0);
    let note = if skipped.is_empty() {
        String::new()
    } else {
        format!(
            "{} point(s) outside the band [{}, {}] skipped; the bound is a near-boundary statement",
            skipped.len(),
            band.0,
            band.1
        )
    };
    Ok(PsiBarrierReport {
        band,
        d: actual,
        points,
        values,
        normalized,
        skipped,
        c0,
        trend_slope,
        pass,
        note,
    })
}

/// `n` points on the shifted cone boundary `e + ∂C_{-η}`, split between the
/// two rays, at log-spaced distances from `e` in `[0.05, 20]`.
pub fn cone_test_points(axis: Point, eta: f64, n: usize) -> Vec<Point> {
    let axis = normalize(axis).unwrap_or([0.0, 1.0]);
    let (a, b) = cone_rays(axis, eta);
    let per_ray = n / 2;
    let ts = if per_ray > 0 { logspace(0.05, 20.0, per_ray) } else { Vec::new() };
    let mut out = Vec::with_capacity(n);
    for t in &ts {
        out.push(add(axis, scale(a, *t)));
        out.push(add(axis, scale(b, *t)));
    }
    if n % 2 == 1 {
        out.push(axis);
    }
    out
}

/// `-LΦ_β` at points of `e + ∂C_{-η}`.
pub fn verify_cone_barrier(
    k: &KernelSpec,
    axis: Point,
    eta: f64,
    beta: f64,
    points: &[Point],
    q: &QuadratureSpec,
) -> Result<BarrierReport> {
    let b = BarrierFn::cone(axis, eta, beta)?;
    let values = evaluate_all(k, &b, points, q)?;
    Ok(BarrierReport::from_values(points.to_vec(), values))
}

/// Bisection bracket for the largest β whose cone check passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaBracket {
    /// Largest β seen to pass.
    pub passing: Option<f64>,
    /// Smallest β seen to fail.
    pub failing: Option<f64>,
    pub trials: Vec<(f64, bool)>,
}

pub fn bracket_beta0(
    k: &KernelSpec,
    axis: Point,
    eta: f64,
    points: &[Point],
    (lo, hi): (f64, f64),
    iterations: usize,
    q: &QuadratureSpec,
) -> Result<BetaBracket> {
    let mut trials = Vec::new();
    let mut check = |beta: f64| -> Result<bool> {
        let pass = verify_cone_barrier(k, axis, eta, beta, points, q)?.pass;
        trials.push((beta, pass));
        Ok(pass)
    };
    let mut passing = None;
    let mut failing = None;
    if check(hi)? {
        passing = Some(hi);
    } else if !check(lo)? {
        failing = Some(lo);
    } else {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..iterations {
            let m = 0.5 * (a + b);
            if check(m)? {
                a = m;
            } else {
                b = m;
            }
        }
        passing = Some(a);
        failing = Some(b);
    }
    Ok(BetaBracket {
        passing,
        failing,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::make_fractional_laplacian;
    use crate::point::sub;

    #[test]
    fn barrier_values() {
        let h = BarrierFn::half_space([0.0, 1.0], 0.3).unwrap();
        assert!((h.eval([5.0, 4.0]) - 1.515_716_566_510_398).abs() < 1e-12);
        let c = BarrierFn::cone([0.0, 1.0], 1.0, 0.1).unwrap();
        assert_eq!(c.eval([0.0, -1.0]), 0.0);
        assert_eq!(c.eval([1.0, 0.0]), 1.0);
        let p = BarrierFn::psi_power(Domain::unit_ball(), 0.25).unwrap();
        assert_eq!(p.eval([2.0, 0.0]), 0.0);
        assert!((p.eval([0.5, 0.0]) - 0.375f64.powf(0.25)).abs() < 1e-15);
        assert!(BarrierFn::psi_power(Domain::Polygon(crate::geometry::Polygon::unit_square()), 0.2).is_err());
    }

    #[test]
    fn cone_barrier_is_homogeneous() {
        let c = BarrierFn::cone([0.0, 1.0], 1.0, 0.3).unwrap();
        for x in [[0.3, 0.7], [-1.2, 0.1], [2.0, -0.5]] {
            let l: f64 = 3.7;
            let lhs = c.eval(scale(x, l));
            let rhs = l.powf(0.3) * c.eval(x);
            assert!((lhs - rhs).abs() <= 1e-14 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn halfspace_precondition() {
        let k = make_fractional_laplacian(0.5, 2).unwrap();
        let e = verify_halfspace_supersolution(&k, 0.5, [0.0, 1.0], &[[0.0, 1.0]], &QuadratureSpec::default());
        assert!(matches!(e, Err(FracError::Precondition(_))));
    }

    #[test]
    fn cone_points_lie_on_shifted_boundary() {
        let axis = [0.0, 1.0];
        for x in cone_test_points(axis, 1.0, 16) {
            assert!(cone_psi(axis, 1.0, sub(x, axis)).abs() < 1e-12);
        }
        assert_eq!(cone_test_points(axis, 1.0, 16).len(), 16);
    }

    #[test]
    fn halfspace_barrier_in_one_dimension_reduction() {
        // for ν = e₁ in 2D the value factors as c·(-(-Δ)^s_ℝ t₊^α)(x₁)
        let k = make_fractional_laplacian(0.5, 2).unwrap();
        let q = QuadratureSpec::default().with_rel_tol(1e-7);
        let r = verify_halfspace_supersolution(&k, 0.25, [0.0, 1.0], &[[0.0, 1.0], [0.0, 2.0]], &q).unwrap();
        assert!(r.pass);
        let ratio = r.values[1].value / r.values[0].value;
        assert!((ratio / 2f64.powf(0.25 - 1.0) - 1.0).abs() < 1e-3, "{ratio}");
    }
}
