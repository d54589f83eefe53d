//! Browser bindings for three interactive plots: the log-corrected
//! half-plane profile, the half-space barrier operator, and a boundary
//! profile on the unit disk with its Hölder fit.
//!
//! Each export returns a flat `Float64Array`; layouts are documented per
//! function. The `*_rows` functions hold the logic and run natively.

use wasm_bindgen::prelude::*;

use fraclab::barriers::{BarrierFn, DataRecord, ExteriorData};
use fraclab::kernels::make_fractional_laplacian;
use fraclab::nonlocal_op::{apply_l, QuadratureSpec};
use fraclab::quad::logspace;
use fraclab::regularity::{fit_holder, BoundaryProfile, ProfileSample};
use fraclab::wos::{ball_poisson, halfplane_poisson};

const MAX_POINTS: usize = 200;

fn grid(tmin: f64, tmax: f64, n: usize) -> Result<Vec<f64>, String> {
    if !(tmin > 0.0 && tmax > tmin) {
        return Err(format!("need 0 < tmin < tmax, got {tmin}, {tmax}"));
    }
    if !(2..=MAX_POINTS).contains(&n) {
        return Err(format!("n must lie in [2, {MAX_POINTS}]"));
    }
    Ok(logspace(tmin, tmax, n))
}

/// Rows `(t, u, u / (t^s ln(1/t)))` for data `min(|y|^s, 1)` on the upper
/// half-plane, at `(0, t)`.
pub fn counterexample_rows(s: f64, tmin: f64, tmax: f64, n: usize) -> Result<Vec<f64>, String> {
    if tmax >= 1.0 {
        return Err("tmax must be below 1".into());
    }
    let g = ExteriorData::counterexample_min_rs_1(s).map_err(|e| e.to_string())?;
    let q = QuadratureSpec::default().with_rel_tol(1e-7);
    let mut out = Vec::with_capacity(3 * n);
    for t in grid(tmin, tmax, n)? {
        let u = halfplane_poisson(&g, [0.0, t], s, &q).map_err(|e| e.to_string())?.value;
        out.extend([t, u, u / (t.powf(s) * (1.0 / t).ln())]);
    }
    Ok(out)
}

/// Rows `(t, -L(x₁)₊^α at (t, 0), value · t^{2s-α})`.
pub fn halfspace_rows(s: f64, alpha: f64, tmin: f64, tmax: f64, n: usize) -> Result<Vec<f64>, String> {
    let k = make_fractional_laplacian(s, 2).map_err(|e| e.to_string())?;
    let b = BarrierFn::half_space([1.0, 0.0], alpha).map_err(|e| e.to_string())?;
    let q = QuadratureSpec::default().with_rel_tol(1e-6);
    let mut out = Vec::with_capacity(3 * n);
    for t in grid(tmin, tmax, n)? {
        let v = apply_l(&k, &b, [t, 0.0], &q).map_err(|e| e.to_string())?.value;
        out.extend([t, v, v * t.powf(2.0 * s - alpha)]);
    }
    Ok(out)
}

/// Profile of the solution on the unit disk with data `|y - (1,0)|^α`
/// capped at 20, sampled at `(1 - t, 0)`. Layout: `n` rows `(t, u)`
/// followed by `(alpha_hat, expected)` with `expected = min(α, s)`.
pub fn ball_profile_rows(s: f64, alpha: f64, tmin: f64, tmax: f64, n: usize) -> Result<Vec<f64>, String> {
    let ts = grid(tmin, tmax, n)?;
    if tmax >= 1.0 {
        return Err("tmax must be below 1".into());
    }
    let g = ExteriorData::new(DataRecord::HolderPointSingularity {
        alpha,
        z0: [1.0, 0.0],
        cap: Some(20.0),
    })
    .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * n + 2);
    let mut samples = Vec::with_capacity(n);
    for t in ts {
        let v = ball_poisson([0.0, 0.0], 1.0, &g, [1.0 - t, 0.0], s, 1e-8).map_err(|e| e.to_string())?;
        out.extend([t, v.value]);
        samples.push(ProfileSample {
            t,
            value: v.value,
            stderr: v.err_estimate,
        });
    }
    let p = BoundaryProfile::from_samples([1.0, 0.0], [-1.0, 0.0], 0.0, samples).map_err(|e| e.to_string())?;
    let fit = fit_holder(&p, None, None).map_err(|e| e.to_string())?;
    out.extend([fit.alpha_hat, alpha.min(s)]);
    Ok(out)
}

fn to_js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn counterexample_curve(s: f64, tmin: f64, tmax: f64, n: usize) -> Result<Vec<f64>, JsError> {
    to_js(counterexample_rows(s, tmin, tmax, n))
}

#[wasm_bindgen]
pub fn halfspace_operator(s: f64, alpha: f64, tmin: f64, tmax: f64, n: usize) -> Result<Vec<f64>, JsError> {
    to_js(halfspace_rows(s, alpha, tmin, tmax, n))
}

#[wasm_bindgen]
pub fn ball_profile(s: f64, alpha: f64, tmin: f64, tmax: f64, n: usize) -> Result<Vec<f64>, JsError> {
    to_js(ball_profile_rows(s, alpha, tmin, tmax, n))
}

#[wasm_bindgen]
pub fn version() -> String {
    fraclab::VERSION.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counterexample_ratio_is_flat() {
        let rows = counterexample_rows(0.5, 1e-4, 1e-2, 5).unwrap();
        let ratios: Vec<f64> = rows.chunks(3).map(|r| r[2]).collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
        assert!(lo > 0.0 && hi / lo < 1.2, "{ratios:?}");
    }

    #[test]
    fn halfspace_values_scale_as_a_power() {
        let rows = halfspace_rows(0.5, 0.25, 0.1, 10.0, 3).unwrap();
        let norm: Vec<f64> = rows.chunks(3).map(|r| r[2]).collect();
        assert!(norm.iter().all(|v| (v / norm[0] - 1.0).abs() < 1e-4), "{norm:?}");
    }

    #[test]
    fn ball_profile_fit_is_returned() {
        let rows = ball_profile_rows(0.5, 0.3, 1e-4, 1e-2, 8).unwrap();
        assert_eq!(rows.len(), 18);
        let (alpha_hat, expected) = (rows[16], rows[17]);
        assert_eq!(expected, 0.3);
        assert!(alpha_hat > 0.2 && alpha_hat < 0.35, "{alpha_hat}");
    }

    #[test]
    fn bad_grids_are_rejected() {
        assert!(counterexample_rows(0.5, 1e-2, 1e-4, 5).is_err());
        assert!(halfspace_rows(0.5, 0.25, 0.1, 1.0, 1).is_err());
        assert!(ball_profile_rows(0.5, 0.3, 1e-3, 2.0, 5).is_err());
    }
}
