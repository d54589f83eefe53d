//! Exit position of the isotropic 2s-stable process from the unit ball,
//! started at the center.
//!
//! The exit density is proportional to `(|y|² - 1)^{-s} |y|^{-N}` on `|y| > 1`,
//! so the radius has density `∝ (ρ² - 1)^{-s} / ρ` in every dimension. With
//! `u = ρ² - 1` this is `u^{-s}/(1+u)`, whose total mass is `π / sin(πs)`.
//!
//! Sampling inverts a monotone cubic spline of `ln(ρ - 1)` against the logit
//! of the radial CDF, so both tails keep full relative precision.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;

use crate::point::Point;
use crate::quad::{integrate, Tolerance};

const KNOTS: usize = 4096;
const LOG_LO: f64 = -14.0 * std::f64::consts::LN_10;
const LOG_HI: f64 = 14.0 * std::f64::consts::LN_10;

/// `(ln F(ρ), ln(1 - F(ρ)))` for the radial CDF at `ρ = 1 + excess`,
/// computed by quadrature of smooth substitutes of the two tail integrals.
pub fn radial_log_cdf(s: f64, excess: f64) -> (f64, f64) {
    let u = excess * (2.0 + excess);
    let norm = PI / (s * PI).sin();
    let tol = Tolerance::new(1e-14, 0.0);
    // lower piece: w = u^{1-s}
    let lower = |u: f64| {
        let p = 1.0 / (1.0 - s);
        let top = u.powf(1.0 - s);
        let f = |w: f64| 1.0 / ((1.0 - s) * (1.0 + w.powf(p)));
        integrate(f, &[0.0, top], tol).value()
    };
    // upper piece: v = 1/u, w = v^s
    let upper = |u: f64| {
        let p = 1.0 / s;
        let top = u.recip().powf(s);
        let f = |w: f64| 1.0 / (s * (1.0 + w.powf(p)));
        integrate(f, &[0.0, top], tol).value()
    };
    // each branch integrates over w ≤ 1
    if u <= 1.0 {
        let lo = lower(u) / norm;
        (lo.ln(), (-lo).ln_1p())
    } else {
        let hi = upper(u) / norm;
        ((-hi).ln_1p(), hi.ln())
    }
}

/// Monotone cubic (Fritsch–Carlson) interpolant with linear extrapolation.
#[derive(Debug, Clone)]
struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
    left_slope: f64,
    right_slope: f64,
}

impl Pchip {
    fn new(x: Vec<f64>, y: Vec<f64>, left_slope: f64, right_slope: f64) -> Self {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut m = vec![0.0; n];
        m[0] = delta[0];
        m[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                m[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        Pchip {
            x,
            y,
            m,
            left_slope,
            right_slope,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0] + self.left_slope * (t - self.x[0]);
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1] + self.right_slope * (t - self.x[n - 1]);
        }
        let i = self.x.partition_point(|v| *v <= t) - 1;
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.y[i] + h10 * h * self.m[i] + h01 * self.y[i + 1] + h11 * h * self.m[i + 1]
    }
}

/// Inverse radial CDF for one `s`.
#[derive(Debug, Clone)]
pub struct ExitLaw {
    s: f64,
    spline: Pchip,
}

impl ExitLaw {
    pub fn build(s: f64) -> Self {
        let ys: Vec<f64> = (0..KNOTS)
            .map(|i| LOG_LO + (LOG_HI - LOG_LO) * i as f64 / (KNOTS - 1) as f64)
            .collect();
        let zs: Vec<f64> = ys
            .iter()
            .map(|y| {
                let (lf, lg) = radial_log_cdf(s, y.exp());
                lf - lg
            })
            .collect();
        // ln F ~ (1-s) ln(ρ-1) near 1 and -ln(1-F) ~ 2s ln ρ at infinity
        let spline = Pchip::new(zs, ys, 1.0 / (1.0 - s), 1.0 / (2.0 * s));
        ExitLaw { s, spline }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `ln(ρ - 1)` at CDF logit `z`.
    pub fn log_excess(&self, z: f64) -> f64 {
        self.spline.eval(z)
    }

    /// Radius with CDF value `u ∈ (0, 1)`.
    pub fn radius(&self, u: f64) -> f64 {
        let z = u.ln() - (-u).ln_1p();
        1.0 + self.log_excess(z).exp()
    }

    /// Radius for a draw `u ∈ [0, 1)`, nudged off 0.
    #[inline]
    pub fn radius_from_uniform(&self, u: f64) -> f64 {
        self.radius(u.max(f64::MIN_POSITIVE))
    }

    /// Largest relative error of the spline radius, measured on the CDF at the
    /// midpoints between knots.
    pub fn knot_error(&self) -> f64 {
        let xs = &self.spline.x;
        let mut worst: f64 = 0.0;
        for w in xs.windows(2).step_by(7) {
            let z = 0.5 * (w[0] + w[1]);
            let (lf, lg) = radial_log_cdf(self.s, self.log_excess(z).exp());
            let z_back = lf - lg;
            // relative error in F (or 1 - F, whichever is smaller)
            let rel = ((z_back - z).abs()).min(1.0);
            worst = worst.max(rel);
        }
        worst
    }
}

/// Shared spline for `s`, built on first use.
pub fn exit_law(s: f64) -> Arc<ExitLaw> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<ExitLaw>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(law) = cache.lock().expect("exit-law cache poisoned").get(&s.to_bits()) {
        return law.clone();
    }
    // build outside the lock; a racing builder produces the same table
    let law = Arc::new(ExitLaw::build(s));
    cache
        .lock()
        .expect("exit-law cache poisoned")
        .entry(s.to_bits())
        .or_insert(law)
        .clone()
}

/// One exit point from the unit ball in dimension 1 or 2.
pub fn sample_ball_exit<R: Rng + ?Sized>(law: &ExitLaw, dim: usize, rng: &mut R) -> Point {
    let rho = law.radius_from_uniform(rng.gen::<f64>());
    if dim == 1 {
        if rng.gen::<bool>() {
            [rho, 0.0]
        } else {
            [-rho, 0.0]
        }
    } else {
        let (sn, cs) = (2.0 * PI * rng.gen::<f64>()).sin_cos();
        [rho * cs, rho * sn]
    }
}
