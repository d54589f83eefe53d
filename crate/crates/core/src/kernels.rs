//! Symmetric, elliptic, homogeneous jump kernels
//! `K(y) = a(y/|y|) |y|^{-N-2s}` with `λ ≤ a ≤ Λ`.
//!
//! The fractional Laplacian is the case `a ≡ 1`. No normalizing constant is
//! attached to it: `-Lu(x) = ∫ (u(x) - (u(x+y)+u(x-y))/2) |y|^{-N-2s} dy`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::rng::radical_inverse;

/// Angular density `a(θ)` evaluated on unit vectors.
pub type AngularDensity = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Serializable description of a kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    #[serde(rename = "type")]
    pub kind: KernelKind,
    pub s: f64,
    pub dim: usize,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(rename = "Lambda", default = "one")]
    pub big_lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular: Option<AngularRecord>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    FracLap,
    Custom,
}

/// Built-in angular densities that can be named in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngularRecord {
    /// `a(θ) = 1 + coef·θ₁²`
    Quadratic { coef: f64 },
    /// `a(θ) = 1 + amp·cos(2φ)` in the plane, φ the polar angle of θ.
    Cos2 { amp: f64 },
}

impl AngularRecord {
    pub fn density(&self) -> AngularDensity {
        match *self {
            AngularRecord::Quadratic { coef } => Arc::new(move |t: &[f64]| 1.0 + coef * t[0] * t[0]),
            AngularRecord::Cos2 { amp } => Arc::new(move |t: &[f64]| {
                let c = t[0];
                let s = t.get(1).copied().unwrap_or(0.0);
                1.0 + amp * (c * c - s * s)
            }),
        }
    }

    /// Exact (λ, Λ) of the density on the unit sphere.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            AngularRecord::Quadratic { coef } => {
                let (a, b): (f64, f64) = (1.0, 1.0 + coef);
                (a.min(b), a.max(b))
            }
            AngularRecord::Cos2 { amp } => (1.0 - amp.abs(), 1.0 + amp.abs()),
        }
    }
}

/// An admissible kernel. Immutable after construction.
#[derive(Clone)]
pub struct KernelSpec {
    s: f64,
    lambda: f64,
    big_lambda: f64,
    dim: usize,
    homogeneous: bool,
    isotropic: bool,
    angular: AngularDensity,
    angular_record: Option<AngularRecord>,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("s", &self.s)
            .field("lambda", &self.lambda)
            .field("Lambda", &self.big_lambda)
            .field("dim", &self.dim)
            .field("homogeneous", &self.homogeneous)
            .field("isotropic", &self.isotropic)
            .finish()
    }
}

fn check_order(s: f64, dim: usize) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(FracError::Parameter(format!("order s = {s} must lie in (0, 1)")));
    }
    if dim == 0 {
        return Err(FracError::Parameter("dimension must be at least 1".into()));
    }
    Ok(())
}

/// The fractional Laplacian kernel `|y|^{-N-2s}` (no normalizing constant).
pub fn make_fractional_laplacian(s: f64, dim: usize) -> Result<KernelSpec> {
    check_order(s, dim)?;
    Ok(KernelSpec {
        s,
        lambda: 1.0,
        big_lambda: 1.0,
        dim,
        homogeneous: true,
        isotropic: true,
        angular: Arc::new(|_| 1.0),
        angular_record: None,
    })
}

impl KernelSpec {
    /// A kernel with a caller-supplied angular density and declared bounds.
    /// The density is not inspected here; see [`validate_kernel`].
    pub fn custom<F>(s: f64, dim: usize, lambda: f64, big_lambda: f64, homogeneous: bool, density: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        check_order(s, dim)?;
        if !(lambda > 0.0 && lambda <= big_lambda && big_lambda.is_finite()) {
            return Err(FracError::Parameter(format!(
                "ellipticity bounds must satisfy 0 < λ ≤ Λ, got λ = {lambda}, Λ = {big_lambda}"
            )));
        }
        Ok(KernelSpec {
            s,
            lambda,
            big_lambda,
            dim,
            homogeneous,
            isotropic: false,
            angular: Arc::new(density),
            angular_record: None,
        })
    }

    pub fn from_record(rec: &KernelRecord) -> Result<Self> {
        match rec.kind {
            KernelKind::FracLap => make_fractional_laplacian(rec.s, rec.dim),
            KernelKind::Custom => {
                let angular = rec.angular.clone().ok_or_else(|| {
                    FracError::Parameter("custom kernel needs an `angular` density".into())
                })?;
                let density = angular.density();
                let mut k = KernelSpec::custom(rec.s, rec.dim, rec.lambda, rec.big_lambda, true, move |t| density(t))?;
                k.angular_record = Some(angular);
                Ok(k)
            }
        }
    }

    pub fn to_record(&self) -> KernelRecord {
        KernelRecord {
            kind: if self.isotropic { KernelKind::FracLap } else { KernelKind::Custom },
            s: self.s,
            dim: self.dim,
            lambda: self.lambda,
            big_lambda: self.big_lambda,
            angular: self.angular_record.clone(),
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }
    /// True for the fractional Laplacian (`a ≡ 1`).
    pub fn is_fractional_laplacian(&self) -> bool {
        self.isotropic
    }

    /// The angular density at a unit vector.
    #[inline]
    pub fn angular(&self, theta: &[f64]) -> f64 {
        (self.angular)(theta)
    }
}

/// `K(y) = a(y/|y|)·|y|^{-N-2s}`.
pub fn kernel_eval(k: &KernelSpec, y: &[f64]) -> Result<f64> {
    if y.len() != k.dim {
        return Err(FracError::Parameter(format!(
            "point has {} coordinates, kernel dimension is {}",
            y.len(),
            k.dim
        )));
    }
    let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(FracError::Singularity);
    }
    let theta: Vec<f64> = y.iter().map(|v| v / r).collect();
    Ok(k.angular(&theta) * r.powf(-(k.dim as f64) - 2.0 * k.s))
}

/// Worst-case findings of [`validate_kernel`]; violations are counted, not raised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelValidation {
    pub samples: usize,
    pub symmetry_violations: usize,
    pub lower_violations: usize,
    pub upper_violations: usize,
    /// max |a(θ) - a(-θ)|
    pub worst_asymmetry: f64,
    /// min (a(θ) - λ); negative when the lower bound fails
    pub worst_lower_margin: f64,
    /// min (Λ - a(θ)); negative when the upper bound fails
    pub worst_upper_margin: f64,
}

impl KernelValidation {
    pub fn violations(&self) -> usize {
        self.symmetry_violations + self.lower_violations + self.upper_violations
    }
    pub fn is_valid(&self) -> bool {
        self.violations() == 0
    }
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Quasi-random unit vectors: golden-angle in the plane, ±1 on the line,
/// normalized Halton points in the cube otherwise.
pub fn sphere_directions(dim: usize, n: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => (0..n).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).collect(),
        2 => {
            let golden = 0.5 * (5f64.sqrt() - 1.0);
            (0..n)
                .map(|i| {
                    let phi = 2.0 * std::f64::consts::PI * ((i as f64 + 0.5) * golden).fract();
                    vec![phi.cos(), phi.sin()]
                })
                .collect()
        }
        _ => {
            let mut out = Vec::with_capacity(n);
            let mut i = 1u64;
            while out.len() < n {
                let v: Vec<f64> = (0..dim)
                    .map(|j| 2.0 * radical_inverse(i, PRIMES[j % PRIMES.len()]) - 1.0)
                    .collect();
                i += 1;
                let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if r > 1e-3 && r <= 1.0 {
                    out.push(v.into_iter().map(|x| x / r).collect());
                }
            }
            out
        }
    }
}

/// Check symmetry and ellipticity of the angular density on `samples`
/// quasi-random directions.
pub fn validate_kernel(k: &KernelSpec, samples: usize) -> KernelValidation {
    let samples = samples.max(1);
    let mut rep = KernelValidation {
        samples,
        symmetry_violations: 0,
        lower_violations: 0,
        upper_violations: 0,
        worst_asymmetry: 0.0,
        worst_lower_margin: f64::INFINITY,
        worst_upper_margin: f64::INFINITY,
    };
    for theta in sphere_directions(k.dim, samples) {
        let neg: Vec<f64> = theta.iter().map(|v| -v).collect();
        let a = k.angular(&theta);
        let b = k.angular(&neg);
        let asym = (a - b).abs();
        rep.worst_asymmetry = rep.worst_asymmetry.max(asym);
        if asym > 1e-12 * a.abs().max(1.0) {
            rep.symmetry_violations += 1;
        }
        let lower = a - k.lambda;
        let upper = k.big_lambda - a;
        rep.worst_lower_margin = rep.worst_lower_margin.min(lower);
        rep.worst_upper_margin = rep.worst_upper_margin.min(upper);
        if lower < 0.0 {
            rep.lower_violations += 1;
        }
        if upper < 0.0 {
            rep.upper_violations += 1;
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractional_laplacian_record() {
        let k = make_fractional_laplacian(0.5, 1).unwrap();
        assert_eq!(k.lambda(), 1.0);
        assert_eq!(k.big_lambda(), 1.0);
        assert!(k.is_homogeneous());
        assert_eq!(k.angular(&[1.0]), 1.0);
        assert_eq!(k.angular(&[-1.0]), 1.0);
    }

    #[test]
    fn unit_vector_value_is_one() {
        let k = make_fractional_laplacian(0.75, 2).unwrap();
        assert_eq!(kernel_eval(&k, &[1.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn order_out_of_range() {
        assert!(matches!(make_fractional_laplacian(1.2, 2), Err(FracError::Parameter(_))));
        assert!(matches!(make_fractional_laplacian(0.0, 2), Err(FracError::Parameter(_))));
        assert!(matches!(make_fractional_laplacian(0.5, 0), Err(FracError::Parameter(_))));
    }

    #[test]
    fn kernel_values() {
        let k = make_fractional_laplacian(0.5, 2).unwrap();
        assert_eq!(kernel_eval(&k, &[2.0, 0.0]).unwrap(), 0.125);
        let aniso = KernelSpec::custom(0.5, 2, 1.0, 1.5, true, |t| 1.0 + 0.5 * t[0] * t[0]).unwrap();
        assert_eq!(kernel_eval(&aniso, &[1.0, 0.0]).unwrap(), 1.5);
        assert_eq!(kernel_eval(&k, &[0.0, 0.0]), Err(FracError::Singularity));
        assert!(kernel_eval(&k, &[1.0]).is_err());
    }

    #[test]
    fn validation_reports() {
        let k = make_fractional_laplacian(0.5, 2).unwrap();
        assert!(validate_kernel(&k, 1000).is_valid());

        let signed = KernelSpec::custom(0.5, 2, 0.1, 1.0, true, |t| t[0]).unwrap();
        let rep = validate_kernel(&signed, 1000);
        assert!(rep.lower_violations > 0);
        // a(θ) = θ₁ is odd, so it is not symmetric either.
        assert!(rep.symmetry_violations > 0);

        let even_signed = KernelSpec::custom(0.5, 2, 0.1, 1.0, true, |t| t[0] * t[0] - 0.5).unwrap();
        let rep = validate_kernel(&even_signed, 1000);
        assert_eq!(rep.symmetry_violations, 0);
        assert!(rep.lower_violations > 0);
        assert!(rep.worst_lower_margin < 0.0);

        let asym = KernelSpec::custom(0.5, 2, 0.01, 2.0, true, |t| 1.0 + t[0]).unwrap();
        let rep = validate_kernel(&asym, 1000);
        assert!(rep.symmetry_violations > 0);
        assert!(rep.worst_asymmetry > 1.0);
    }

    #[test]
    fn builtin_densities_match_declared_bounds() {
        for rec in [AngularRecord::Quadratic { coef: 0.5 }, AngularRecord::Cos2 { amp: 0.3 }] {
            let (lo, hi) = rec.bounds();
            let k = KernelSpec::from_record(&KernelRecord {
                kind: KernelKind::Custom,
                s: 0.4,
                dim: 2,
                lambda: lo,
                big_lambda: hi,
                angular: Some(rec.clone()),
            })
            .unwrap();
            assert!(validate_kernel(&k, 2000).is_valid(), "{rec:?}");
            assert_eq!(k.to_record().angular, Some(rec));
        }
    }

    #[test]
    fn higher_dimensional_directions_are_unit() {
        for d in sphere_directions(3, 50) {
            let r: f64 = d.iter().map(|x| x * x).sum();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }
}
