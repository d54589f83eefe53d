//! Hölder exponents from near-boundary profiles.
//!
//! A profile samples `u(z₀ + t n) - g(z₀)` along the inward normal `n` at a
//! boundary point `z₀`. Power-law fits of the profile estimate the boundary
//! exponent; a competing `t^s ln(1/t)` model detects the logarithmic loss at
//! `α = s`.

use serde::{Deserialize, Serialize};

use crate::barriers::ExteriorData;
use crate::error::{FracError, Result};
use crate::geometry::Domain;
use crate::kernels::KernelSpec;
use crate::nonlocal_op::QuadratureSpec;
use crate::point::{self, axpy, Point};
use crate::quad::logspace;
use crate::wos::{halfplane_poisson, solve, WoSConfig};

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Minimum number of samples a fit needs.
pub const MIN_FIT_SAMPLES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProfile {
    pub z0: Point,
    pub normal: Point,
    pub samples: Vec<ProfileSample>,
    pub g0: f64,
    /// Grid points dropped because they were not interior.
    pub warnings: Vec<String>,
}

impl BoundaryProfile {
    /// A profile from given samples, e.g. synthetic or read from a file.
    pub fn from_samples(z0: Point, normal: Point, g0: f64, samples: Vec<ProfileSample>) -> Result<Self> {
        if samples.iter().any(|p| !(p.t > 0.0) || !(p.stderr >= 0.0) || !p.value.is_finite()) {
            return Err(FracError::Parameter(
                "profile samples need t > 0, stderr ≥ 0 and finite values".into(),
            ));
        }
        if samples.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(FracError::Parameter("profile distances must increase strictly".into()));
        }
        Ok(BoundaryProfile {
            z0,
            normal,
            samples,
            g0,
            warnings: Vec::new(),
        })
    }

    pub fn ts(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.value).collect()
    }
}

/// How profile values are computed.
#[derive(Debug, Clone, Copy)]
pub enum ProfileSolver<'a> {
    /// Stable walk-on-spheres on a bounded domain.
    WalkOnSpheres { kernel: &'a KernelSpec, cfg: WoSConfig },
    /// Poisson-kernel quadrature on the upper half-plane `{x₂ > 0}`.
    HalfPlane { s: f64, q: QuadratureSpec },
}

impl ProfileSolver<'_> {
    fn value(&self, dom: &Domain, g: &ExteriorData, x: Point) -> Result<(f64, f64)> {
        match self {
            ProfileSolver::WalkOnSpheres { kernel, cfg } => {
                let r = solve(dom, g, x, kernel, cfg)?;
                Ok((r.estimate, r.stderr))
            }
            ProfileSolver::HalfPlane { s, q } => {
                let r = halfplane_poisson(g, x, *s, q)?;
                Ok((r.value, r.err_estimate))
            }
        }
    }

    fn check_domain(&self, dom: &Domain) -> Result<()> {
        match (self, dom) {
            (ProfileSolver::HalfPlane { .. }, Domain::HalfPlane { normal }) if *normal == [0.0, 1.0] => Ok(()),
            (ProfileSolver::HalfPlane { .. }, _) => Err(FracError::UnsupportedDomain {
                op: "half-plane quadrature",
                variant: dom.variant_name(),
            }),
            _ => Ok(()),
        }
    }
}

/// `u(z₀ + t n) - g(z₀)` on the grid `ts`, with `n` the inward normal at `z₀`.
pub fn boundary_profile(solver: &ProfileSolver, dom: &Domain, g: &ExteriorData, z0: Point, ts: &[f64]) -> Result<BoundaryProfile> {
    solver.check_domain(dom)?;
    let normal = dom.inward_normal_at(z0);
    let g0 = g.eval(z0);
    let mut grid: Vec<f64> = ts.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut warnings = Vec::new();
    let mut kept = Vec::new();
    for t in grid {
        let x = axpy(t, normal, z0);
        if t > 0.0 && dom.contains(x) {
            kept.push(t);
        } else {
            warnings.push(format!("t = {t} dropped: point ({}, {}) is not interior", x[0], x[1]));
        }
    }
    let values = crate::par_map(&kept, |_, &t| solver.value(dom, g, axpy(t, normal, z0)));
    let mut samples = Vec::with_capacity(kept.len());
    for (t, v) in kept.iter().zip(values) {
        let (u, se) = v?;
        samples.push(ProfileSample {
            t: *t,
            value: u - g0,
            stderr: se,
        });
    }
    Ok(BoundaryProfile {
        z0,
        normal,
        samples,
        g0,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Plain,
    LogCorrected,
}

/// `value = A t^s ln(1/t) + B t^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    pub residual_rms: f64,
    pub aic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    /// Slope of the plain power-law fit `|value| = C t^α`.
    pub alpha_hat: f64,
    /// Signed `C` of the plain fit.
    pub constant_hat: f64,
    /// `A` of the log-corrected model; 0 when the plain model is selected.
    pub log_coeff: f64,
    pub model: FitModel,
    /// Weighted rms residual of the selected model in `ln |value|`.
    pub residual_rms: f64,
    pub window: (f64, f64),
    pub samples_used: usize,
    pub plain_aic: f64,
    pub log_fit: Option<LogFit>,
    /// Plain slopes over the lower and upper halves of the window.
    pub half_window_slopes: Option<(f64, f64)>,
}

/// Weighted least squares for `y ≈ Σ c_k φ_k` with two basis functions.
fn wls2(phi: &[[f64; 2]], y: &[f64], w: &[f64]) -> Option<[f64; 2]> {
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((p, yi), wi) in phi.iter().zip(y).zip(w) {
        a11 += wi * p[0] * p[0];
        a12 += wi * p[0] * p[1];
        a22 += wi * p[1] * p[1];
        b1 += wi * p[0] * yi;
        b2 += wi * p[1] * yi;
    }
    let det = a11 * a22 - a12 * a12;
    if !(det.abs() > 1e-300) || !det.is_finite() {
        return None;
    }
    Some([(b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det])
}

/// Weighted `ln |v|` on `ln t`: `(slope, intercept)`.
fn power_fit(t: &[f64], v: &[f64], w: &[f64]) -> Option<(f64, f64)> {
    let phi: Vec<[f64; 2]> = t.iter().map(|t| [1.0, t.ln()]).collect();
    let y: Vec<f64> = v.iter().map(|v| v.abs().ln()).collect();
    wls2(&phi, &y, w).map(|c| (c[1], c[0]))
}

/// Residual in `ln |value|`, large when the model has the wrong sign.
fn log_residual(v: f64, m: f64) -> f64 {
    if m * v > 0.0 {
        (v / m).ln()
    } else {
        10.0
    }
}

fn aic(n: usize, rss: f64, k: usize) -> f64 {
    let n = n as f64;
    // residuals at roundoff level count as ties
    n * (rss / n).max(1e-24).ln() + 2.0 * k as f64
}

/// Fits `|value| = C t^α` and, with `s` given, `value = A t^s ln(1/t) + B t^s`
/// over the samples inside `window`; selects the model with lower AIC.
///
/// Weights are `(value/stderr)²`, the inverse variance of `ln |value|`; exact
/// samples (all `stderr = 0`) are weighted equally. The log-corrected model
/// counts as the `t^s` law plus one parameter.
pub fn fit_holder(p: &BoundaryProfile, s: Option<f64>, window: Option<(f64, f64)>) -> Result<HolderFit> {
    let (lo, hi) = window.unwrap_or((0.0, f64::INFINITY));
    let used: Vec<&ProfileSample> = p
        .samples
        .iter()
        .filter(|q| q.t >= lo && q.t <= hi && q.value != 0.0 && q.value.abs() > 3.0 * q.stderr)
        .collect();
    if used.len() < MIN_FIT_SAMPLES {
        return Err(FracError::InsufficientData {
            usable: used.len(),
            needed: MIN_FIT_SAMPLES,
        });
    }
    let n = used.len();
    let t: Vec<f64> = used.iter().map(|q| q.t).collect();
    let v: Vec<f64> = used.iter().map(|q| q.value).collect();
    let exact = used.iter().all(|q| q.stderr == 0.0);
    let w: Vec<f64> = used
        .iter()
        .map(|q| {
            if exact {
                1.0
            } else {
                let rel = (q.stderr / q.value.abs()).max(1e-12);
                1.0 / (rel * rel)
            }
        })
        .collect();
    let wsum: f64 = w.iter().sum();

    let (alpha, intercept) = power_fit(&t, &v, &w).ok_or(FracError::InsufficientData {
        usable: n,
        needed: MIN_FIT_SAMPLES,
    })?;
    let positive = v.iter().filter(|v| **v > 0.0).count() * 2 >= n;
    let c = if positive { intercept.exp() } else { -intercept.exp() };
    let plain_rss: f64 = (0..n)
        .map(|i| {
            let r = log_residual(v[i], c * t[i].powf(alpha));
            w[i] * r * r
        })
        .sum::<f64>()
        / wsum
        * n as f64;
    let plain_aic = aic(n, plain_rss, 2);

    let log_fit = s.and_then(|s| {
        let phi: Vec<[f64; 2]> = t.iter().map(|t| [t.powf(s) * (1.0 / t).ln(), t.powf(s)]).collect();
        // relative weights in value space
        let wv: Vec<f64> = (0..n).map(|i| w[i] / (v[i] * v[i])).collect();
        let [a, b] = wls2(&phi, &v, &wv)?;
        let rss: f64 = (0..n)
            .map(|i| {
                let r = log_residual(v[i], a * phi[i][0] + b * phi[i][1]);
                w[i] * r * r
            })
            .sum::<f64>()
            / wsum
            * n as f64;
        Some(LogFit {
            a,
            b,
            residual_rms: (rss / n as f64).sqrt(),
            aic: aic(n, rss, 3),
        })
    });

    let half_window_slopes = {
        let mid = (t[0] * t[n - 1]).sqrt();
        let split = |keep: &dyn Fn(f64) -> bool| {
            let idx: Vec<usize> = (0..n).filter(|&i| keep(t[i])).collect();
            if idx.len() < 2 {
                return None;
            }
            let ts: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
            let vs: Vec<f64> = idx.iter().map(|&i| v[i]).collect();
            let ws: Vec<f64> = idx.iter().map(|&i| w[i]).collect();
            power_fit(&ts, &vs, &ws).map(|f| f.0)
        };
        match (split(&|x| x <= mid), split(&|x| x >= mid)) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        }
    };

    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(FracError::Precondition(format!(
            "fitted exponent {alpha} outside (0, 2); the profile does not decay like a Hölder function"
        )));
    }
    let plain_rms = (plain_rss / n as f64).sqrt();
    let (model, log_coeff, residual_rms) = match log_fit {
        Some(l) if l.aic < plain_aic => (FitModel::LogCorrected, l.a, l.residual_rms),
        _ => (FitModel::Plain, 0.0, plain_rms),
    };
    Ok(HolderFit {
        alpha_hat: alpha,
        constant_hat: c,
        log_coeff,
        model,
        residual_rms,
        window: (t[0], t[n - 1]),
        samples_used: n,
        plain_aic,
        log_fit,
        half_window_slopes,
    })
}

/// `max |u(x) - u(y)| / |x - y|^α` over all sample pairs; a lower bound for
/// the Hölder seminorm.
pub fn holder_seminorm(samples: &[(Point, f64)], alpha: f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(FracError::InsufficientData {
            usable: samples.len(),
            needed: 2,
        });
    }
    let mut best: f64 = 0.0;
    for (i, (x, u)) in samples.iter().enumerate() {
        for (y, v) in &samples[i + 1..] {
            let d = point::dist(*x, *y);
            if d > 0.0 {
                best = best.max((u - v).abs() / d.powf(alpha));
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Boundary points to probe; by default the kinks of `g` on the boundary.
    pub points: Option<Vec<Point>>,
    /// Profile window as fractions of the diameter.
    pub window: (f64, f64),
    pub samples: usize,
    pub wos: WoSConfig,
    /// Accepted deviation of `alpha_hat` from the expected exponent.
    pub tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            points: None,
            window: (1e-5, 1e-3),
            samples: 12,
            wos: WoSConfig::default(),
            tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub z0: Point,
    pub corner: bool,
    pub profile: BoundaryProfile,
    pub fit: HolderFit,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub s: f64,
    /// Declared Hölder exponent of the data.
    pub alpha: f64,
    /// `min(α, s)`.
    pub expected: f64,
    /// True when `α = s`, where a log-corrected profile is expected.
    pub log_expected: bool,
    pub points: Vec<PointReport>,
    pub pass: bool,
    pub verdict: String,
}

/// Profiles and fits at boundary points of a bounded domain, compared with
/// the exponent `min(α, s)`.
pub fn exponent_experiment(dom: &Domain, g: &ExteriorData, k: &KernelSpec, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let diam = dom.diameter().ok_or(FracError::Unbounded("exponent_experiment"))?;
    let (lo, hi) = cfg.window;
    if !(lo > 0.0 && hi > lo) {
        return Err(FracError::Parameter(format!("window ({lo}, {hi}) must satisfy 0 < lo < hi")));
    }
    if cfg.samples < MIN_FIT_SAMPLES {
        return Err(FracError::Parameter(format!("need at least {MIN_FIT_SAMPLES} profile samples")));
    }
    let s = k.s();
    let points: Vec<Point> = match &cfg.points {
        Some(p) => p.clone(),
        None => g.kinks().into_iter().filter(|z| dom.dist(*z) <= 1e-12 * diam && !dom.contains(*z)).collect(),
    };
    if points.is_empty() {
        return Err(FracError::Precondition(
            "no boundary points to probe: give them explicitly or use data with a boundary singularity".into(),
        ));
    }
    let ts = logspace(lo * diam, hi * diam, cfg.samples);
    let mut wos = cfg.wos;
    // the snap bias must stay below the smallest profile distance
    wos.snap_eps = Some(wos.snap_eps.unwrap_or(f64::INFINITY).min(1e-3 * lo * diam));
    let solver = ProfileSolver::WalkOnSpheres { kernel: k, cfg: wos };
    let expected = g.alpha.min(s);
    let log_expected = (g.alpha - s).abs() < 1e-9;

    let mut reports = Vec::with_capacity(points.len());
    for z0 in points {
        let profile = boundary_profile(&solver, dom, g, z0, &ts)?;
        let fit = fit_holder(&profile, Some(s), None)?;
        let exponent_ok = (fit.alpha_hat - expected).abs() <= cfg.tolerance;
        let model_ok = log_expected == (fit.model == FitModel::LogCorrected);
        let corner = match dom {
            Domain::Polygon(p) => p.vertices().iter().any(|v| point::dist(*v, z0) <= 1e-12 * diam),
            _ => false,
        };
        reports.push(PointReport {
            z0,
            corner,
            profile,
            fit,
            pass: exponent_ok && (model_ok || !log_expected),
        });
    }
    let pass = reports.iter().all(|r| r.pass);
    let fitted: Vec<String> = reports.iter().map(|r| format!("{:.4}", r.fit.alpha_hat)).collect();
    let verdict = format!(
        "{}: expected exponent {:.4}{}, fitted [{}] at {} boundary point(s)",
        if pass { "PASS" } else { "FAIL" },
        expected,
        if log_expected { " with log correction" } else { "" },
        fitted.join(", "),
        reports.len()
    );
    Ok(ExperimentReport {
        s,
        alpha: g.alpha,
        expected,
        log_expected,
        points: reports,
        pass,
        verdict,
    })
}
