//! Quadrature for `-Lu(x) = ∫ (u(x) - ½(u(x+y) + u(x-y))) K(y) dy`.
//!
//! In polar form the integral becomes `∫ a(θ) I(θ) dθ` over half the circle
//! (doubled), where `I(θ) = ∫_0^∞ D(r) r^{-1-2s} dr` and `D` is the second
//! difference along the line through `x` with direction θ. Each line integral
//! is split at a near radius ρ: the near field uses dyadic panels down to
//! `ρ/2^levels` plus a quadratic Taylor remainder, the mid field uses
//! geometric panels up to `R`, and the tail beyond `R` is either integrated in
//! closed form (when the field supplies it) or bounded from the declared
//! growth and added to the error estimate.

use std::cell::Cell;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::kernels::KernelSpec;
use crate::point::{axpy, dot, norm, sub, unit, Point};
use crate::quad::{geometric_breaks, integrate_parts, Tolerance};

/// `|½(u(x+y) + u(x-y))| ≲ constant·(1 + |y|^exponent)`.
///
/// Only the even part matters, so affine functions have exponent 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub exponent: f64,
    pub constant: f64,
}

impl Growth {
    pub fn bounded(constant: f64) -> Self {
        Growth {
            exponent: 0.0,
            constant,
        }
    }
}

/// A scalar field on the plane (1D fields read only the first coordinate).
pub trait Field: Sync {
    fn value(&self, x: Point) -> f64;

    fn growth(&self) -> Growth;

    /// Radius of a ball around `x` on which the field is smooth.
    fn smooth_radius(&self, _x: Point) -> Option<f64> {
        None
    }

    /// Radii along `x ± r·dir` where the field is not smooth.
    fn line_breaks(&self, _x: Point, _dir: Point) -> Vec<f64> {
        Vec::new()
    }

    /// Directions in `[0, π)` where the line integral is not smooth in θ.
    fn angular_breaks(&self, _x: Point) -> Vec<f64> {
        Vec::new()
    }

    /// Radius from which [`Field::line_tail`] is available along `±dir`.
    fn tail_start(&self, _x: Point, _dir: Point) -> Option<f64> {
        None
    }

    /// `∫_R^∞ ½(u(x+r·dir) + u(x-r·dir)) r^{-1-2s} dr` and an error bound.
    fn line_tail(&self, _x: Point, _dir: Point, _s: f64, _r: f64) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

impl<F: Field + ?Sized> Field for &F {
    fn value(&self, x: Point) -> f64 {
        (**self).value(x)
    }
    fn growth(&self) -> Growth {
        (**self).growth()
    }
    fn smooth_radius(&self, x: Point) -> Option<f64> {
        (**self).smooth_radius(x)
    }
    fn line_breaks(&self, x: Point, dir: Point) -> Vec<f64> {
        (**self).line_breaks(x, dir)
    }
    fn angular_breaks(&self, x: Point) -> Vec<f64> {
        (**self).angular_breaks(x)
    }
    fn tail_start(&self, x: Point, dir: Point) -> Option<f64> {
        (**self).tail_start(x, dir)
    }
    fn line_tail(&self, x: Point, dir: Point, s: f64, r: f64) -> (f64, f64) {
        (**self).line_tail(x, dir, s, r)
    }
}

/// How the near radius ρ is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NearRadius {
    /// `factor · smooth_radius(x)`; radius 1 when the field gives none.
    Fraction(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub near_radius: NearRadius,
    /// Dyadic levels in the near field.
    pub radial_panels: usize,
    /// Initial angular panels on `[0, π)` (ignored in 1D).
    pub angular_nodes: usize,
    pub far_cutoff: f64,
    pub target_rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            near_radius: NearRadius::Fraction(0.5),
            radial_panels: 12,
            angular_nodes: 8,
            far_cutoff: 1e8,
            target_rel_tol: 1e-8,
            abs_tol: 1e-14,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        match self.near_radius {
            NearRadius::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
                return Err(FracError::Parameter(format!("near-radius factor {f} must lie in (0, 1]")))
            }
            NearRadius::Absolute(r) if !(r > 0.0 && r.is_finite()) => {
                return Err(FracError::Parameter(format!("near radius {r} must be positive")))
            }
            _ => {}
        }
        if self.radial_panels < 4 || self.radial_panels > 60 {
            return Err(FracError::Parameter(format!(
                "radial_panels = {} must lie in [4, 60]",
                self.radial_panels
            )));
        }
        if self.angular_nodes < 1 {
            return Err(FracError::Parameter("angular_nodes must be at least 1".into()));
        }
        if !(self.target_rel_tol > 0.0) || !(self.abs_tol >= 0.0) {
            return Err(FracError::Parameter("tolerances must be positive".into()));
        }
        if !(self.far_cutoff > 0.0) {
            return Err(FracError::Parameter("far_cutoff must be positive".into()));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.target_rel_tol = tol;
        self
    }
}

/// Estimate of `-Lu(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorValue {
    pub value: f64,
    pub err_estimate: f64,
    /// Contribution of `|y| < ρ`.
    pub near_part: f64,
    /// Contribution of `|y| ≥ ρ`, tail included.
    pub far_part: f64,
    /// False when some adaptive stage stopped before meeting its tolerance.
    pub converged: bool,
}

/// One line integral `I(θ)`, split at ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineIntegral {
    pub near: f64,
    pub far: f64,
    pub err: f64,
    pub converged: bool,
}

// Beyond this a closed-form tail start is treated as unavailable.
const TAIL_CAP: f64 = 1e200;

fn near_radius(u: &dyn Field, x: Point, q: &QuadratureSpec) -> f64 {
    match q.near_radius {
        NearRadius::Absolute(r) => r,
        NearRadius::Fraction(f) => match u.smooth_radius(x) {
            Some(d) if d > 0.0 && d.is_finite() => f * d,
            _ => f,
        },
    }
}

/// `∫_0^∞ D(r) r^{-1-2s} dr` along `x ± r·dir`, `dir` a unit vector.
pub fn line_integral(u: &dyn Field, x: Point, dir: Point, s: f64, rho: f64, q: &QuadratureSpec, tol: Tolerance) -> LineIntegral {
    let ux = u.value(x);
    let d = |r: f64| ux - 0.5 * (u.value(axpy(r, dir, x)) + u.value(axpy(-r, dir, x)));
    let p = -1.0 - 2.0 * s;
    let r0 = rho / 2f64.powi(q.radial_panels as i32);

    // D(r) ≈ c r² below r0
    let c1 = d(r0) / (r0 * r0);
    let c2 = d(0.5 * r0) / (0.25 * r0 * r0);
    let scale = r0.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    let remainder = c1 * scale;
    let remainder_err = (c1 - c2).abs() * scale;

    let mut big_r = q.far_cutoff.max(2.0 * norm(x)).max(2.0 * rho);
    let exact_tail = match u.tail_start(x, dir) {
        Some(t) if t <= TAIL_CAP => {
            big_r = big_r.max(t);
            true
        }
        _ => false,
    };

    let mut breaks: Vec<f64> = (0..=q.radial_panels)
        .map(|k| r0 * 2f64.powi(k as i32))
        .collect();
    *breaks.last_mut().expect("non-empty") = rho;
    breaks.extend(geometric_breaks(rho, big_r, 4.0).into_iter().skip(1));
    for k in u.line_breaks(x, dir) {
        if k > r0 && k < big_r && k != rho {
            breaks.push(k);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let res = integrate_parts(
        |r| {
            let v = d(r) * r.powf(p);
            if r < rho {
                [v, 0.0]
            } else {
                [0.0, v]
            }
        },
        &breaks,
        tol,
        |parts| parts[0] + parts[1],
    );

    let own = ux * big_r.powf(-2.0 * s) / (2.0 * s);
    let (tail, tail_err) = if exact_tail {
        let (t, e) = u.line_tail(x, dir, s, big_r);
        (own - t, e)
    } else {
        // ½(u(x+y)+u(x-y)) bounded by the growth; R ≥ 2|x|.
        let g = u.growth();
        let e = g.exponent;
        let bound = g.constant * (big_r.powf(-2.0 * s) / (2.0 * s) + 2f64.powf(e) * big_r.powf(e - 2.0 * s) / (2.0 * s - e));
        (own, bound)
    };

    LineIntegral {
        near: res.parts[0] + remainder,
        far: res.parts[1] + tail,
        err: res.err + remainder_err + tail_err,
        converged: res.converged,
    }
}

fn check_growth(u: &dyn Field, s: f64) -> Result<()> {
    let g = u.growth();
    if !(g.exponent < 2.0 * s) {
        return Err(FracError::Divergence {
            growth: g.exponent,
            limit: 2.0 * s,
        });
    }
    Ok(())
}

/// `-Lu(x)` for a kernel in dimension 1 or 2.
pub fn apply_l(k: &KernelSpec, u: &dyn Field, x: Point, q: &QuadratureSpec) -> Result<OperatorValue> {
    q.validate()?;
    let s = k.s();
    check_growth(u, s)?;
    let rho = near_radius(u, x, q);
    match k.dim() {
        1 => {
            let a = k.angular(&[1.0]);
            let tol = Tolerance::new(q.target_rel_tol, q.abs_tol);
            let li = line_integral(u, x, [1.0, 0.0], s, rho, q, tol);
            let near = 2.0 * a * li.near;
            let far = 2.0 * a * li.far;
            Ok(OperatorValue {
                value: near + far,
                err_estimate: 2.0 * a * li.err,
                near_part: near,
                far_part: far,
                converged: li.converged,
            })
        }
        2 => {
            let inner = Tolerance::new(0.1 * q.target_rel_tol, 0.1 * q.abs_tol);
            let all_converged = Cell::new(true);
            let n = q.angular_nodes;
            let mut breaks: Vec<f64> = (0..=n).map(|i| PI * i as f64 / n as f64).collect();
            for b in u.angular_breaks(x) {
                let b = b.rem_euclid(PI);
                if b > 0.0 && b < PI {
                    breaks.push(b);
                }
            }
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let outer = integrate_parts(
                |th| {
                    let dir = unit(th);
                    let a = k.angular(&dir);
                    let li = line_integral(u, x, dir, s, rho, q, inner);
                    if !li.converged {
                        all_converged.set(false);
                    }
                    [a * li.near, a * li.far, a * li.err]
                },
                &breaks,
                Tolerance::new(q.target_rel_tol, q.abs_tol),
                |parts| parts[0] + parts[1],
            );
            let near = 2.0 * outer.parts[0];
            let far = 2.0 * outer.parts[1];
            Ok(OperatorValue {
                value: near + far,
                err_estimate: 2.0 * (outer.err + outer.parts[2]),
                near_part: near,
                far_part: far,
                converged: outer.converged && all_converged.get(),
            })
        }
        d => Err(FracError::Parameter(format!(
            "operator quadrature supports dimensions 1 and 2, got {d}"
        ))),
    }
}

/// `-(-Δ)^s u(t)` on the line, with the unnormalized kernel `|y|^{-1-2s}`.
pub fn apply_l_1d(s: f64, u: &dyn Field, t: f64, q: &QuadratureSpec) -> Result<OperatorValue> {
    let k = crate::kernels::make_fractional_laplacian(s, 1)?;
    apply_l(&k, u, [t, 0.0], q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub degree: f64,
    pub base: OperatorValue,
    pub scales: Vec<f64>,
    pub values: Vec<OperatorValue>,
    pub predicted: Vec<f64>,
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
}

/// Compares `-Lu(t·x)` with `t^{a-2s}·(-Lu(x))` for a field of degree `a`.
pub fn homogeneity_check(
    k: &KernelSpec,
    u: &dyn Field,
    degree: f64,
    x: Point,
    scales: &[f64],
    q: &QuadratureSpec,
) -> Result<HomogeneityReport> {
    let base = apply_l(k, u, x, q)?;
    let expo = degree - 2.0 * k.s();
    let mut values = Vec::with_capacity(scales.len());
    let mut predicted = Vec::with_capacity(scales.len());
    let mut deviations = Vec::with_capacity(scales.len());
    for &t in scales {
        let v = apply_l(k, u, [t * x[0], t * x[1]], q)?;
        let pred = t.powf(expo) * base.value;
        let dev = if pred == 0.0 && v.value == 0.0 {
            0.0
        } else if pred == 0.0 {
            v.value.abs()
        } else {
            ((v.value - pred) / pred).abs()
        };
        values.push(v);
        predicted.push(pred);
        deviations.push(dev);
    }
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    Ok(HomogeneityReport {
        degree,
        base,
        scales: scales.to_vec(),
        values,
        predicted,
        deviations,
        max_deviation,
    })
}

// ---------------------------------------------------------------------------
// Basic fields

/// `u ≡ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Field for Constant {
    fn value(&self, _x: Point) -> f64 {
        self.0
    }
    fn growth(&self) -> Growth {
        Growth::bounded(self.0.abs())
    }
    fn tail_start(&self, _x: Point, _dir: Point) -> Option<f64> {
        Some(0.0)
    }
    fn line_tail(&self, _x: Point, _dir: Point, s: f64, r: f64) -> (f64, f64) {
        (self.0 * r.powf(-2.0 * s) / (2.0 * s), 0.0)
    }
}

/// `u(x) = grad·x + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub grad: Point,
    pub offset: f64,
}

impl Field for Affine {
    fn value(&self, x: Point) -> f64 {
        dot(self.grad, x) + self.offset
    }
    fn growth(&self) -> Growth {
        Growth::bounded(self.offset.abs())
    }
    fn tail_start(&self, _x: Point, _dir: Point) -> Option<f64> {
        Some(0.0)
    }
    fn line_tail(&self, x: Point, _dir: Point, s: f64, r: f64) -> (f64, f64) {
        (self.value(x) * r.powf(-2.0 * s) / (2.0 * s), 0.0)
    }
}

/// `u(x) = coef · (x·ν + shift)₊^a`; on the line this is `(t + shift)₊^a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlusPower {
    pub normal: Point,
    pub shift: f64,
    pub exponent: f64,
    pub coef: f64,
}

impl PlusPower {
    /// `(t + shift)₊^a` on the real line.
    pub fn line(shift: f64, exponent: f64) -> Self {
        PlusPower {
            normal: [1.0, 0.0],
            shift,
            exponent,
            coef: 1.0,
        }
    }

    fn level(&self, x: Point) -> f64 {
        dot(self.normal, x) + self.shift
    }
}

/// Generalized binomial coefficient `C(a, k)`.
fn binom(a: f64, k: usize) -> f64 {
    let mut c = 1.0;
    for j in 0..k {
        c *= (a - j as f64) / (j as f64 + 1.0);
    }
    c
}

/// `∫_R^∞ ½((p + rq)₊^a + (p - rq)₊^a) r^{-1-2s} dr` for `R|q| ≥ 2|p|`.
pub fn plus_power_line_tail(p: f64, q: f64, a: f64, s: f64, big_r: f64) -> f64 {
    let q = q.abs();
    if q == 0.0 {
        return if p > 0.0 { p.powf(a) * big_r.powf(-2.0 * s) / (2.0 * s) } else { 0.0 };
    }
    // only p + r|q| is positive; expand (r|q|)^a (1 + p/(r|q|))^a
    let ratio = p / (big_r * q);
    let lead = (big_r * q).powf(a) * big_r.powf(-2.0 * s);
    let mut sum = 0.0;
    let mut pow = 1.0;
    for k in 0..200 {
        let term = binom(a, k) * pow / (2.0 * s + k as f64 - a);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > 2 {
            break;
        }
        pow *= ratio;
    }
    0.5 * lead * sum
}

impl Field for PlusPower {
    fn value(&self, x: Point) -> f64 {
        let l = self.level(x);
        if l > 0.0 {
            self.coef * l.powf(self.exponent)
        } else {
            0.0
        }
    }
    fn growth(&self) -> Growth {
        Growth {
            exponent: self.exponent,
            constant: self.coef.abs() * (1.0 + self.shift.abs()).powf(self.exponent) * norm(self.normal).powf(self.exponent).max(1.0),
        }
    }
    fn smooth_radius(&self, x: Point) -> Option<f64> {
        let l = self.level(x).abs();
        let n = norm(self.normal);
        (l > 0.0).then(|| l / n)
    }
    fn line_breaks(&self, x: Point, dir: Point) -> Vec<f64> {
        let q = dot(self.normal, dir).abs();
        let l = self.level(x).abs();
        if q > 0.0 {
            vec![l / q]
        } else {
            Vec::new()
        }
    }
    fn angular_breaks(&self, _x: Point) -> Vec<f64> {
        // directions orthogonal to the normal
        let t = self.normal[1].atan2(self.normal[0]) + 0.5 * PI;
        vec![t.rem_euclid(PI)]
    }
    fn tail_start(&self, x: Point, dir: Point) -> Option<f64> {
        let q = dot(self.normal, dir).abs();
        let p = self.level(x);
        if q == 0.0 {
            Some(0.0)
        } else {
            Some(2.0 * p.abs() / q)
        }
    }
    fn line_tail(&self, x: Point, dir: Point, s: f64, r: f64) -> (f64, f64) {
        let p = self.level(x);
        let q = dot(self.normal, dir);
        let v = self.coef * plus_power_line_tail(p, q, self.exponent, s, r);
        (v, 1e-15 * v.abs())
    }
}

/// A closure with a declared growth and no further structure.
#[derive(Clone)]
pub struct FnField {
    f: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    growth: Growth,
}

impl FnField {
    pub fn new<F: Fn(Point) -> f64 + Send + Sync + 'static>(f: F, growth: Growth) -> Self {
        FnField { f: Arc::new(f), growth }
    }
}

impl std::fmt::Debug for FnField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnField").field("growth", &self.growth).finish_non_exhaustive()
    }
}

impl Field for FnField {
    fn value(&self, x: Point) -> f64 {
        (self.f)(x)
    }
    fn growth(&self) -> Growth {
        self.growth
    }
}

/// `Σ c_i u_i`. Tails are combined when every term has one.
pub struct Combination<'a> {
    pub terms: Vec<(f64, &'a dyn Field)>,
}

impl Field for Combination<'_> {
    fn value(&self, x: Point) -> f64 {
        self.terms.iter().map(|(c, u)| c * u.value(x)).sum()
    }
    fn growth(&self) -> Growth {
        let mut g = Growth::bounded(0.0);
        for (c, u) in &self.terms {
            let h = u.growth();
            g.exponent = g.exponent.max(h.exponent);
            g.constant += c.abs() * h.constant;
        }
        g
    }
    fn smooth_radius(&self, x: Point) -> Option<f64> {
        self.terms
            .iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(_, u)| u.smooth_radius(x))
            .try_fold(f64::INFINITY, |acc, r| r.map(|r| acc.min(r)))
            .filter(|r| r.is_finite())
    }
    fn line_breaks(&self, x: Point, dir: Point) -> Vec<f64> {
        self.terms.iter().flat_map(|(_, u)| u.line_breaks(x, dir)).collect()
    }
    fn angular_breaks(&self, x: Point) -> Vec<f64> {
        self.terms.iter().flat_map(|(_, u)| u.angular_breaks(x)).collect()
    }
    fn tail_start(&self, x: Point, dir: Point) -> Option<f64> {
        self.terms
            .iter()
            .map(|(_, u)| u.tail_start(x, dir))
            .try_fold(0.0f64, |acc, t| t.map(|t| acc.max(t)))
    }
    fn line_tail(&self, x: Point, dir: Point, s: f64, r: f64) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(v, e), (c, u)| {
            let (tv, te) = u.line_tail(x, dir, s, r);
            (v + c * tv, e + c.abs() * te)
        })
    }
}

/// `x ↦ u(x - h)`.
pub struct Translated<F> {
    pub inner: F,
    pub shift: Point,
}

impl<F: Field> Field for Translated<F> {
    fn value(&self, x: Point) -> f64 {
        self.inner.value(sub(x, self.shift))
    }
    fn growth(&self) -> Growth {
        let g = self.inner.growth();
        Growth {
            exponent: g.exponent,
            constant: g.constant * (1.0 + norm(self.shift)).powf(g.exponent),
        }
    }
    fn smooth_radius(&self, x: Point) -> Option<f64> {
        self.inner.smooth_radius(sub(x, self.shift))
    }
    fn line_breaks(&self, x: Point, dir: Point) -> Vec<f64> {
        self.inner.line_breaks(sub(x, self.shift), dir)
    }
    fn angular_breaks(&self, x: Point) -> Vec<f64> {
        self.inner.angular_breaks(sub(x, self.shift))
    }
    fn tail_start(&self, x: Point, dir: Point) -> Option<f64> {
        self.inner.tail_start(sub(x, self.shift), dir)
    }
    fn line_tail(&self, x: Point, dir: Point, s: f64, r: f64) -> (f64, f64) {
        self.inner.line_tail(sub(x, self.shift), dir, s, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::make_fractional_laplacian;
    use crate::quad::integrate;

    #[test]
    fn constant_has_zero_operator() {
        let k = make_fractional_laplacian(0.4, 2).unwrap();
        let v = apply_l(&k, &Constant(1.0), [0.3, -0.2], &QuadratureSpec::default()).unwrap();
        assert!(v.value.abs() < 1e-10, "{v:?}");
    }

    #[test]
    fn linear_has_zero_operator() {
        let k = make_fractional_laplacian(0.5, 2).unwrap();
        let u = Affine {
            grad: [1.0, 0.0],
            offset: 0.0,
        };
        let v = apply_l(&k, &u, [0.0, 0.0], &QuadratureSpec::default()).unwrap();
        assert!(v.value.abs() < 1e-8);
    }

    #[test]
    fn s_harmonic_half_line_power() {
        let q = QuadratureSpec::default();
        for (s, t) in [(0.5, 1.0), (0.3, 0.5)] {
            let v = apply_l_1d(s, &PlusPower::line(0.0, s), t, &q).unwrap();
            assert!(v.value.abs() < 5e-6, "s={s} t={t}: {v:?}");
        }
        let v = apply_l_1d(0.5, &PlusPower::line(1.0, 0.5), 0.0, &q).unwrap();
        assert!(v.value.abs() < 5e-6, "{v:?}");
    }

    #[test]
    fn sub_harmonic_power_is_positive() {
        let v = apply_l_1d(0.5, &PlusPower::line(0.0, 0.45), 1.0, &QuadratureSpec::default()).unwrap();
        assert!(v.value > 10.0 * v.err_estimate, "{v:?}");
    }

    #[test]
    fn quarter_power_matches_direct_oracle() {
        // direct integration over the whole line, split at the kinks ±1 and at 0
        let s: f64 = 0.5;
        let u = |t: f64| if t > 0.0 { t.powf(0.25) } else { 0.0 };
        let f = |y: f64| (1.0 - 0.5 * (u(1.0 + y) + u(1.0 - y))) * y.abs().powf(-1.0 - 2.0 * s);
        let mut breaks = vec![1e-300, 1e-6, 1e-3, 0.5, 1.0, 2.0];
        breaks.extend(geometric_breaks(2.0, 1e12, 2.0).into_iter().skip(1));
        let tol = Tolerance::new(1e-13, 0.0).with_max_panels(100_000);
        let inner = integrate(f, &breaks, tol).value();
        // remaining tail: ∫_{1e12}^∞ (1 - ½ (1+y)^{1/4}) y^{-2}
        let tail = 1.0 / 1e12 - 0.5 * plus_power_line_tail(1.0, 1.0, 0.25, s, 1e12) * 2.0;
        let oracle = 2.0 * (inner + tail);
        let v = apply_l_1d(s, &PlusPower::line(0.0, 0.25), 1.0, &QuadratureSpec::default()).unwrap();
        assert!(((v.value - oracle) / oracle).abs() < 1e-6, "{} vs {oracle}", v.value);
        let v2 = apply_l_1d(s, &PlusPower::line(0.0, 0.25), 2.0, &QuadratureSpec::default()).unwrap();
        let ratio = v2.value / v.value;
        assert!((ratio / 2f64.powf(0.25 - 1.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn plus_power_tail_matches_quadrature() {
        let (p, q, a, s, r) = (0.7, -0.4, 0.3, 0.45, 10.0);
        let f = |t: f64| {
            let pp = |z: f64| if z > 0.0 { z.powf(a) } else { 0.0 };
            0.5 * (pp(p + t * q) + pp(p - t * q)) * t.powf(-1.0 - 2.0 * s)
        };
        let breaks = geometric_breaks(r, 1e30, 2.0);
        let num = integrate(f, &breaks, Tolerance::new(1e-13, 0.0)).value();
        let rest = 0.5 * (1e30 * q.abs()).powf(a) * 1e30f64.powf(-2.0 * s) / (2.0 * s - a);
        let closed = plus_power_line_tail(p, q, a, s, r);
        assert!(((num + rest) / closed - 1.0).abs() < 1e-9, "{} vs {closed}", num + rest);
    }

    #[test]
    fn divergence_guard() {
        let k = make_fractional_laplacian(0.5, 2).unwrap();
        let u = FnField::new(|x| x[0] * x[0], Growth { exponent: 2.0, constant: 1.0 });
        let e = apply_l(&k, &u, [0.0, 0.0], &QuadratureSpec::default()).unwrap_err();
        assert!(matches!(e, FracError::Divergence { .. }));
    }

    #[test]
    fn quadrature_spec_validation() {
        let q = QuadratureSpec {
            radial_panels: 2,
            ..QuadratureSpec::default()
        };
        assert!(q.validate().is_err());
        let q = QuadratureSpec {
            near_radius: NearRadius::Fraction(1.5),
            ..QuadratureSpec::default()
        };
        assert!(q.validate().is_err());
    }

    #[test]
    fn homogeneity_of_zero_field() {
        let k = make_fractional_laplacian(0.5, 1).unwrap();
        let r = homogeneity_check(&k, &Constant(0.0), 0.3, [1.0, 0.0], &[0.5, 2.0], &QuadratureSpec::default()).unwrap();
        assert_eq!(r.max_deviation, 0.0);
        assert!(r.values.iter().all(|v| v.value == 0.0));
    }
}
