//! Harmonic extension `ḡ` of exterior data: `Δḡ = 0` in Ω, `ḡ = g` outside.
//!
//! Balls and half-planes use the classical Poisson integral, polygons a
//! Brownian walk-on-spheres estimate.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::ExteriorData;
use crate::error::{FracError, Result};
use crate::geometry::{sym_norm, Domain};
use crate::kernels::KernelSpec;
use crate::nonlocal_op::{apply_l, Field, Growth, OperatorValue, QuadratureSpec};
use crate::point::{self, add, axpy, dot, perp, scale, sub, unit, Point};
use crate::quad::{integrate, Tolerance};
use crate::regularity::loglog_slope;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtensionConfig {
    /// Relative tolerance of the Poisson quadrature.
    pub rel_tol: f64,
    /// Brownian paths for polygons.
    pub paths: usize,
    pub seed: u64,
    /// Brownian walkers stop at distance `snap_frac · diameter`.
    pub snap_frac: f64,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        ExtensionConfig {
            rel_tol: 1e-11,
            paths: 10_000,
            seed: 0,
            snap_frac: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionValue {
    pub value: f64,
    /// Monte Carlo standard error (0 for quadrature).
    pub stderr: f64,
    /// Quadrature error estimate (0 for Monte Carlo).
    pub err_estimate: f64,
}

fn ball_poisson(center: Point, radius: f64, g: &ExteriorData, x: Point, rel_tol: f64) -> ExtensionValue {
    let y = sub(x, center);
    let r2 = dot(y, y);
    let num = radius * radius - r2;
    let phi0 = y[1].atan2(y[0]);
    let d = radius - r2.sqrt();
    // the kernel peaks at φ0 with width ~ d/R
    let mut breaks = vec![phi0 - PI, phi0, phi0 + PI];
    let mut w = (d / radius).max(1e-300);
    while w < PI {
        breaks.push(phi0 - w);
        breaks.push(phi0 + w);
        w *= 8.0;
    }
    for k in g.kinks() {
        let v = sub(k, center);
        if point::norm(v) > 0.0 {
            let a = v[1].atan2(v[0]);
            let a = phi0 - PI + (a - (phi0 - PI)).rem_euclid(2.0 * PI);
            breaks.push(a);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let f = |phi: f64| {
        let e = unit(phi);
        let z = axpy(radius, e, center);
        let dz = sub(scale(e, radius), y);
        g.eval(z) * num / dot(dz, dz)
    };
    let tol = Tolerance::new(rel_tol, 0.0).with_max_panels(20_000);
    let r = integrate(f, &breaks, tol);
    ExtensionValue {
        value: r.value() / (2.0 * PI),
        stderr: 0.0,
        err_estimate: r.err / (2.0 * PI),
    }
}

fn halfplane_poisson(normal: Point, g: &ExteriorData, x: Point, rel_tol: f64) -> ExtensionValue {
    let tau = perp(normal);
    let h = dot(normal, x);
    let tx = dot(tau, x);
    // t = tx + h tan φ turns h/(π((t-tx)² + h²)) dt into dφ/π
    let mut breaks = vec![-0.5 * PI, 0.0, 0.5 * PI];
    for k in g.kinks() {
        if dot(normal, k).abs() < 1e-12 {
            breaks.push(((dot(tau, k) - tx) / h).atan());
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let f = |phi: f64| g.eval(scale(tau, tx + h * phi.tan()));
    let tol = Tolerance::new(rel_tol, 0.0).with_max_panels(20_000);
    let r = integrate(f, &breaks, tol);
    ExtensionValue {
        value: r.value() / PI,
        stderr: 0.0,
        err_estimate: r.err / PI,
    }
}

fn polygon_brownian(dom: &Domain, g: &ExteriorData, x: Point, cfg: &ExtensionConfig) -> ExtensionValue {
    let diam = dom.diameter().expect("polygons are bounded");
    let eps = cfg.snap_frac * diam;
    const BATCH: usize = 1024;
    let batches = cfg.paths.div_ceil(BATCH);
    let tag = crate::rng::mix(crate::rng::point_tag(x), 0xb70);
    let sums: Vec<(f64, f64, usize)> = (0..batches)
        .map(|b| {
            let mut rng = crate::rng::stream(cfg.seed, tag, b as u64);
            let n = BATCH.min(cfg.paths - b * BATCH);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let mut w = x;
                let v = loop {
                    let d = dom.dist(w);
                    if d < eps {
                        break match dom.project(w) {
                            Ok(p) => g.eval(p.point),
                            Err(_) => g.eval(w),
                        };
                    }
                    w = axpy(d, unit(2.0 * PI * rng.gen::<f64>()), w);
                };
                s1 += v;
                s2 += v * v;
            }
            (s1, s2, n)
        })
        .collect();
    let (s1, s2, n) = sums.iter().fold((0.0, 0.0, 0usize), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let mean = s1 / n as f64;
    let var = (s2 / n as f64 - mean * mean).max(0.0) * n as f64 / (n as f64 - 1.0).max(1.0);
    ExtensionValue {
        value: mean,
        stderr: (var / n as f64).sqrt(),
        err_estimate: 0.0,
    }
}

/// `ḡ(x)` for `x ∈ Ω`.
pub fn harmonic_extension(dom: &Domain, g: &ExteriorData, x: Point, cfg: &ExtensionConfig) -> Result<ExtensionValue> {
    if !dom.contains(x) {
        return Err(FracError::NotInterior(x));
    }
    match dom {
        Domain::Ball { center, radius } => Ok(ball_poisson(*center, *radius, g, x, cfg.rel_tol)),
        Domain::HalfPlane { normal } => {
            // the Poisson kernel decays like |t|^{-2}
            if g.growth_exponent() >= 1.0 {
                return Err(FracError::Divergence {
                    growth: g.growth_exponent(),
                    limit: 1.0,
                });
            }
            Ok(halfplane_poisson(*normal, g, x, cfg.rel_tol))
        }
        Domain::Polygon(_) => Ok(polygon_brownian(dom, g, x, cfg)),
        _ => Err(FracError::UnsupportedDomain {
            op: "harmonic_extension",
            variant: dom.variant_name(),
        }),
    }
}

/// `ḡ` inside Ω and `g` outside, as a field for the operator quadrature.
/// Only the quadrature-based variants (ball, half-plane) are supported.
pub struct ExtendedField<'a> {
    dom: &'a Domain,
    g: &'a ExteriorData,
    rel_tol: f64,
}

impl<'a> ExtendedField<'a> {
    pub fn new(dom: &'a Domain, g: &'a ExteriorData, rel_tol: f64) -> Result<Self> {
        match dom {
            Domain::Ball { .. } => {}
            Domain::HalfPlane { .. } if g.growth_exponent() < 1.0 => {}
            Domain::HalfPlane { .. } => {
                return Err(FracError::Divergence {
                    growth: g.growth_exponent(),
                    limit: 1.0,
                })
            }
            _ => {
                return Err(FracError::UnsupportedDomain {
                    op: "extended_field",
                    variant: dom.variant_name(),
                })
            }
        }
        Ok(ExtendedField { dom, g, rel_tol })
    }
}

impl Field for ExtendedField<'_> {
    fn value(&self, x: Point) -> f64 {
        if !self.dom.contains(x) {
            return self.g.eval(x);
        }
        match self.dom {
            Domain::Ball { center, radius } => ball_poisson(*center, *radius, self.g, x, self.rel_tol).value,
            Domain::HalfPlane { normal } => halfplane_poisson(*normal, self.g, x, self.rel_tol).value,
            _ => unreachable!("checked in the constructor"),
        }
    }
    fn growth(&self) -> Growth {
        Growth {
            exponent: self.g.growth_exponent(),
            constant: self.g.c0,
        }
    }
    fn smooth_radius(&self, x: Point) -> Option<f64> {
        let d = self.dom.dist(x);
        (d > 0.0).then_some(d)
    }
    fn line_breaks(&self, x: Point, dir: Point) -> Vec<f64> {
        let mut out = self.dom.line_crossings(x, dir);
        for k in self.g.kinks() {
            let v = sub(k, x);
            if point::cross(v, dir).abs() <= 1e-14 * point::norm(v) {
                out.push(point::norm(v));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionBoundsReport {
    pub alpha: f64,
    pub d: Vec<f64>,
    pub points: Vec<Point>,
    /// |D²ḡ| by central differences with step d/8
    pub hessian: Vec<f64>,
    pub normalized_hessian: Vec<f64>,
    pub operator: Vec<OperatorValue>,
    pub normalized_operator: Vec<f64>,
    pub hessian_sup: f64,
    pub operator_sup: f64,
    pub hessian_slope: f64,
    pub operator_slope: f64,
    /// Finite-difference noise floor relative to |D²ḡ|, worst case.
    pub noise_floor: f64,
    pub pass: bool,
}

/// Probes `|D²ḡ|·d^{2-α}` and `|Lḡ|·d^{2s-α}` at `z0 + d·n` for the given
/// distances, `n` the inward normal at the boundary point `z0`.
#[allow(clippy::too_many_arguments)]
pub fn check_extension_bounds(
    k: &KernelSpec,
    dom: &Domain,
    g: &ExteriorData,
    z0: Point,
    ds: &[f64],
    alpha: f64,
    cfg: &ExtensionConfig,
    q: &QuadratureSpec,
) -> Result<ExtensionBoundsReport> {
    // the operator needs ḡ only to a fraction of its own tolerance
    let field = ExtendedField::new(dom, g, (0.01 * q.target_rel_tol).max(cfg.rel_tol))?;
    let normal = dom.inward_normal_at(z0);
    let points: Vec<Point> = ds.iter().map(|d| add(z0, scale(normal, *d))).collect();
    let d_actual: Vec<f64> = points.iter().map(|x| dom.dist(*x)).collect();

    let rows: Vec<Result<(f64, f64, OperatorValue)>> = crate::par_map(&points, |i, x| {
        let h = d_actual[i] / 8.0;
        let ext = |p: Point| harmonic_extension(dom, g, p, cfg);
        let c = ext(*x)?;
        let f = |dx: f64, dy: f64| ext([x[0] + dx, x[1] + dy]).map(|v| v.value);
        let fxx = (f(h, 0.0)? - 2.0 * c.value + f(-h, 0.0)?) / (h * h);
        let fyy = (f(0.0, h)? - 2.0 * c.value + f(0.0, -h)?) / (h * h);
        let fxy = (f(h, h)? - f(h, -h)? - f(-h, h)? + f(-h, -h)?) / (4.0 * h * h);
        let hess = sym_norm([[fxx, fxy], [fxy, fyy]]);
        let noise = 4.0 * (c.err_estimate + c.value.abs() * cfg.rel_tol) / (h * h);
        let op = apply_l(k, &field, *x, q)?;
        Ok((hess, noise, op))
    });
    let rows: Vec<(f64, f64, OperatorValue)> = rows.into_iter().collect::<Result<_>>()?;

    let s = k.s();
    let hessian: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let normalized_hessian: Vec<f64> = hessian.iter().zip(&d_actual).map(|(h, d)| h * d.powf(2.0 - alpha)).collect();
    let operator: Vec<OperatorValue> = rows.iter().map(|r| r.2).collect();
    let normalized_operator: Vec<f64> = operator
        .iter()
        .zip(&d_actual)
        .map(|(v, d)| v.value.abs() * d.powf(2.0 * s - alpha))
        .collect();
    let noise_floor = rows
        .iter()
        .map(|r| if r.0 > 0.0 { r.1 / r.0 } else { 0.0 })
        .fold(0.0, f64::max);
    let slope_of = |v: &[f64]| {
        if v.len() >= 2 && v.iter().all(|x| *x > 0.0) {
            loglog_slope(&d_actual, v)
        } else {
            0.0
        }
    };
    let hessian_slope = slope_of(&normalized_hessian);
    let operator_slope = slope_of(&normalized_operator);
    let sup = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Ok(ExtensionBoundsReport {
        alpha,
        d: d_actual.clone(),
        points,
        hessian,
        normalized_hessian: normalized_hessian.clone(),
        operator,
        normalized_operator: normalized_operator.clone(),
        hessian_sup: sup(&normalized_hessian),
        operator_sup: sup(&normalized_operator),
        hessian_slope,
        operator_slope,
        noise_floor,
        pass: hessian_slope.abs() <= 0.15 && operator_slope.abs() <= 0.15,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExtensionConfig {
        ExtensionConfig::default()
    }

    #[test]
    fn ball_mean_value_and_linear_data() {
        let ball = Domain::unit_ball();
        let one = ExteriorData::constant(1.0);
        for x in [[0.0, 0.0], [0.3, -0.4], [0.999, 0.0]] {
            let v = harmonic_extension(&ball, &one, x, &cfg()).unwrap();
            assert!((v.value - 1.0).abs() < 1e-10, "{x:?}: {v:?}");
        }
        let lin = ExteriorData::linear([1.0, 0.0], 0.0);
        for r in [0.1, 0.5, 0.99] {
            let v = harmonic_extension(&ball, &lin, [r, 0.0], &cfg()).unwrap();
            assert!((v.value - r).abs() < 1e-10, "{r}: {v:?}");
        }
    }

    #[test]
    fn halfplane_recovers_bounded_harmonic_data() {
        let hp = Domain::half_plane([0.0, 1.0]).unwrap();
        let one = ExteriorData::constant(2.5);
        let v = harmonic_extension(&hp, &one, [3.0, 0.7], &cfg()).unwrap();
        assert!((v.value - 2.5).abs() < 1e-10);
        let lin = ExteriorData::linear([1.0, 0.0], 0.0);
        assert!(matches!(
            harmonic_extension(&hp, &lin, [0.0, 1.0], &cfg()),
            Err(FracError::Divergence { .. })
        ));
    }

    #[test]
    fn polygon_brownian_is_close_for_linear_data() {
        let sq = Domain::Polygon(crate::geometry::Polygon::unit_square());
        let lin = ExteriorData::linear([1.0, 2.0], 0.5);
        let mut c = cfg();
        c.paths = 4000;
        let v = harmonic_extension(&sq, &lin, [0.3, 0.6], &c).unwrap();
        let exact = 0.3 + 1.2 + 0.5;
        assert!((v.value - exact).abs() < 4.0 * v.stderr + 1e-5, "{v:?}");
    }

    #[test]
    fn exterior_points_are_rejected() {
        let ball = Domain::unit_ball();
        let e = harmonic_extension(&ball, &ExteriorData::constant(1.0), [2.0, 0.0], &cfg());
        assert!(matches!(e, Err(FracError::NotInterior(_))));
    }
}
