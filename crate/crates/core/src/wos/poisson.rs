//! Direct quadrature of the fractional Poisson kernels of the disk and of the
//! upper half-plane, used as deterministic references for the walk solver.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::barriers::ExteriorData;
use crate::error::{FracError, Result};
use crate::nonlocal_op::QuadratureSpec;
use crate::point::{self, axpy, sub, unit, Point};
use crate::quad::{geomspace, integrate, integrate_parts, Tolerance};

/// Quadrature value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonValue {
    pub value: f64,
    pub err_estimate: f64,
    pub converged: bool,
}

/// Largest `ln ρ` reached by the far-field quadrature before the analytic tail.
const LOG_FAR_CAP: f64 = 250.0;

/// Panel budgets of the nested adaptive rules.
const INNER_PANELS: usize = 2000;
const OUTER_PANELS: usize = 400;

/// `u(x) = ∫_{|y-c|>r} P(x, y) g(y) dy` for the fractional Laplacian of order
/// `s` on the disk `B_r(c)`, with
/// `P = sin(πs)/π² · ((r² - |x-c|²)/(|y-c|² - r²))^s |x-y|^{-2}`.
pub fn ball_poisson(center: Point, radius: f64, g: &ExteriorData, x: Point, s: f64, rel_tol: f64) -> Result<PoissonValue> {
    if !(s > 0.0 && s < 1.0) {
        return Err(FracError::Parameter(format!("s = {s} must lie in (0, 1)")));
    }
    let xr = sub(x, center);
    let a = point::norm(xr) / radius;
    if a >= 1.0 {
        return Err(FracError::NotInterior(x));
    }
    let growth = g.growth_exponent();
    if growth >= 2.0 * s {
        return Err(FracError::Divergence { growth, limit: 2.0 * s });
    }
    let phi0 = if a > 0.0 { xr[1].atan2(xr[0]) } else { 0.0 };
    let delta = 1.0 - a;
    let c_s = (PI * s).sin() / (PI * PI);
    let pref = c_s * (1.0 - a * a).powf(s);

    // kink radii and angles, in units of the radius
    let kinks: Vec<(f64, f64)> = g
        .kinks()
        .into_iter()
        .map(|k| {
            let v = sub(k, center);
            (point::norm(v) / radius, v[1].atan2(v[0]))
        })
        .collect();
    let y_at = |rho: f64, phi: f64| axpy(radius * rho, unit(phi), center);

    // J(ρ) = ∫ g dφ / ((ρ-a)² + 4ρa sin²((φ-φ0)/2)) with ρ = 1 + e
    let inner = |e: f64| -> (f64, f64, bool) {
        let rho = 1.0 + e;
        let gap = e + delta;
        let mass = 2.0 * PI / (gap * (rho + a));
        let scale = (0..16)
            .map(|i| g.eval(y_at(rho, phi0 + PI * i as f64 / 8.0)).abs())
            .fold(g.eval(y_at(rho, phi0)).abs(), f64::max);
        let mut breaks = vec![phi0 - PI, phi0, phi0 + PI];
        let mut w = (gap / rho).max(1e-300);
        while w < PI {
            breaks.push(phi0 - w);
            breaks.push(phi0 + w);
            w *= 8.0;
        }
        for &(_, ang) in &kinks {
            breaks.push(phi0 - PI + (ang - (phi0 - PI)).rem_euclid(2.0 * PI));
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let f = |phi: f64| {
            let h = (0.5 * (phi - phi0)).sin();
            g.eval(y_at(rho, phi)) / (gap * gap + 4.0 * rho * a * h * h)
        };
        let tol = Tolerance::new(0.1 * rel_tol, 0.1 * rel_tol * mass * scale.max(1e-300)).with_max_panels(INNER_PANELS);
        let r = integrate(f, &breaks, tol);
        (r.value(), r.err, r.converged)
    };

    let mut converged = true;
    // near ring ρ ∈ (1, 2] with ρ - 1 = v^{1/(1-s)}
    let p = 1.0 / (1.0 - s);
    let mut vb = vec![0.0, 1.0];
    let mut d = delta * 1e-3;
    while d < 1.0 {
        vb.push(d.powf(1.0 - s));
        d *= 8.0;
    }
    for &(kr, _) in &kinks {
        if kr > 1.0 && kr < 2.0 {
            vb.push((kr - 1.0).powf(1.0 - s));
        }
    }
    vb.sort_by(f64::total_cmp);
    vb.dedup();
    let mut inner_ok = true;
    let near = integrate_parts(
        |v: f64| {
            if v <= 0.0 {
                return [0.0, 0.0];
            }
            let ex = v.powf(p);
            let rho = 1.0 + ex;
            let (j, e, ok) = inner(ex);
            inner_ok &= ok;
            let jac = p * (rho + 1.0).powf(-s) * rho;
            [jac * j, jac * e]
        },
        &vb,
        Tolerance::new(rel_tol, 0.0).with_max_panels(OUTER_PANELS),
        |parts| parts[0],
    );
    converged &= near.converged;

    // far field ρ = e^τ
    let t_max = (2f64.ln() + (1e14f64).ln() / (2.0 * s - growth)).min(LOG_FAR_CAP);
    let mut tb: Vec<f64> = Vec::new();
    let mut t = 2f64.ln();
    while t < t_max {
        tb.push(t);
        t += 2.0;
    }
    tb.push(t_max);
    for &(kr, _) in &kinks {
        if kr > 2.0 && kr.ln() < t_max {
            tb.push(kr.ln());
        }
    }
    tb.sort_by(f64::total_cmp);
    tb.dedup();
    let far = integrate_parts(
        |t: f64| {
            let rho = t.exp();
            let (j, e, ok) = inner(t.exp_m1());
            inner_ok &= ok;
            let jac = (rho * rho - 1.0).powf(-s) * rho * rho;
            [jac * j, jac * e]
        },
        &tb,
        Tolerance::new(rel_tol, 0.0).with_max_panels(OUTER_PANELS),
        |parts| parts[0],
    );
    converged &= far.converged && inner_ok;

    // ∫_R^∞ ρ^{-2s-1} ⋅ 2π g dρ with g frozen on the last ring
    let big_r = t_max.exp();
    let g_far = inner(big_r - 1.0).0 * big_r * big_r / (2.0 * PI);
    let tail = 2.0 * PI * g_far * big_r.powf(-2.0 * s) / (2.0 * s - growth);

    let value = pref * (near.parts[0] + far.parts[0] + tail);
    let err = pref * (near.err + far.err + near.parts[1].abs() + far.parts[1].abs());
    Ok(PoissonValue {
        value,
        err_estimate: err,
        converged,
    })
}

/// `x₂^s ∫∫_{z₂<0} g(z) / (|z₂|^s |x - z|²) dz` without the constant.
fn halfplane_raw(g: &ExteriorData, x: Point, s: f64, rel_tol: f64) -> (f64, f64, bool) {
    let (x1, x2) = (x[0], x[1]);
    let growth = g.growth_exponent();
    let mut far_scale: f64 = x2.max(1.0 + x1.abs());
    let mut kink_logs = Vec::new();
    for k in g.kinks() {
        let r = point::dist(k, [x1, 0.0]);
        if r > 0.0 {
            far_scale = far_scale.max(2.0 * r);
            kink_logs.push(r.ln());
        }
    }
    let t_lo = x2.ln() - 40.0;
    let t_hi = far_scale.ln() + ((1e14f64).ln() / (s - growth)).min(LOG_FAR_CAP);
    let mut tb = vec![t_lo];
    let mut t = t_lo + 1.0;
    while t < t_hi {
        tb.push(t);
        t += 1.0;
    }
    tb.push(t_hi);
    tb.push(x2.ln());
    tb.extend(kink_logs.iter().filter(|&&l| l > t_lo && l < t_hi));
    tb.sort_by(f64::total_cmp);
    tb.dedup();

    // z = (x₁ + r cos θ, -r sin θ), θ ∈ (0, π)
    let z_at = |r: f64, th: f64| [x1 + r * th.cos(), -r * th.sin()];
    let big_r = t_hi.exp();
    let radial = |th: f64| -> (f64, f64, bool) {
        let sig = th.sin();
        let f = |t: f64| {
            let r = t.exp();
            g.eval(z_at(r, th)) * r.powf(2.0 - s) / (r * r + 2.0 * r * x2 * sig + x2 * x2)
        };
        let r = integrate(f, &tb, Tolerance::new(0.1 * rel_tol, 1e-300).with_max_panels(INNER_PANELS));
        // ∫_R^∞ g r^{-1-s}(1 - 2x₂σ/r) dr with g frozen at R
        let g_end = g.eval(z_at(big_r, th));
        let tail = g_end * big_r.powf(-s) * (1.0 / (s - growth) - 2.0 * x2 * sig / ((s + 1.0) * big_r));
        let tail_err = (g.eval(z_at(2.0 * big_r, th)) - g_end).abs() * big_r.powf(-s) / s;
        (r.value() + tail, r.err + tail_err, r.converged)
    };

    // θ = w^{1/(1-s)} on (0, π/2] and θ = π - w^{1/(1-s)} on [π/2, π)
    let p = 1.0 / (1.0 - s);
    let w_top = (0.5 * PI).powf(1.0 - s);
    let mut wb = geomspace(w_top * 1e-6, w_top, 6);
    wb.insert(0, 0.0);
    let mut ok = true;
    let outer = integrate_parts(
        |w: f64| {
            if w <= 0.0 {
                return [0.0, 0.0];
            }
            let e = w.powf(p);
            let jac = p * w.powf(p - 1.0) * e.sin().powf(-s);
            let (a, ea, oka) = radial(e);
            let (b, eb, okb) = radial(PI - e);
            ok &= oka && okb;
            [jac * (a + b), jac * (ea + eb)]
        },
        &wb,
        Tolerance::new(rel_tol, 0.0).with_max_panels(OUTER_PANELS),
        |parts| parts[0],
    );
    let xs = x2.powf(s);
    (xs * outer.parts[0], xs * (outer.err + outer.parts[1].abs()), ok && outer.converged)
}

/// Normalizing constant `c_s` of the half-plane kernel, fixed by `u ≡ 1` for
/// `g ≡ 1`. Computed once per `s`.
pub fn halfplane_constant(s: f64) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().expect("constant cache poisoned").get(&s.to_bits()) {
        return *c;
    }
    let (raw, _, _) = halfplane_raw(&ExteriorData::constant(1.0), [0.0, 1.0], s, 1e-13);
    let c = 1.0 / raw;
    cache.lock().expect("constant cache poisoned").insert(s.to_bits(), c);
    c
}

/// `κ_s = ∫_{5π/4}^{7π/4} |sin θ|^{-s} dθ`, the angular factor of the
/// `c_s κ_s t^s ln(1/t)` lower bound for data `min(|y|^s, 1)`.
pub fn kappa_s(s: f64) -> f64 {
    integrate(|th| th.sin().abs().powf(-s), &[1.25 * PI, 1.5 * PI, 1.75 * PI], Tolerance::new(1e-13, 0.0)).value()
}

/// Solution of `(-Δ)^s u = 0` in `{x₂ > 0}` with `u = g` on `{x₂ ≤ 0}`:
/// `u(x) = c_s x₂^s ∫∫_{z₂<0} g(z) / (|z₂|^s |x - z|²) dz`.
pub fn halfplane_poisson(g: &ExteriorData, x: Point, s: f64, q: &QuadratureSpec) -> Result<PoissonValue> {
    q.validate()?;
    if !(s > 0.0 && s < 1.0) {
        return Err(FracError::Parameter(format!("s = {s} must lie in (0, 1)")));
    }
    if !(x[1] > 0.0) {
        return Err(FracError::NotInterior(x));
    }
    let growth = g.growth_exponent();
    if growth >= s {
        return Err(FracError::Divergence { growth, limit: s });
    }
    let c = halfplane_constant(s);
    let (raw, err, converged) = halfplane_raw(g, x, s, q.target_rel_tol);
    Ok(PoissonValue {
        value: c * raw,
        err_estimate: c * err,
        converged,
    })
}
