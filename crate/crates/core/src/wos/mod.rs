//! Walk-on-spheres for `(-Δ)^s u = 0` in a bounded domain with `u = g`
//! outside, driven by the exact exit law of the stable process from a ball.

pub mod exit_law;
pub mod poisson;

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::barriers::ExteriorData;
use crate::error::{FracError, Result};
use crate::geometry::Domain;
use crate::kernels::KernelSpec;
use crate::point::{axpy, unit, Point};

pub use exit_law::{exit_law, radial_log_cdf, sample_ball_exit, ExitLaw};
pub use poisson::{ball_poisson, halfplane_constant, halfplane_poisson, kappa_s, PoissonValue};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WoSConfig {
    /// Exit balls have radius `sphere_fraction · d(w)`.
    pub sphere_fraction: f64,
    pub max_steps: usize,
    /// Snap distance; `None` means `1e-6 · diameter`.
    pub snap_eps: Option<f64>,
    pub paths: usize,
    pub seed: u64,
    pub antithetic: bool,
    /// Paths per RNG stream.
    pub batch: usize,
}

impl Default for WoSConfig {
    fn default() -> Self {
        WoSConfig {
            sphere_fraction: 0.5,
            max_steps: 10_000,
            snap_eps: None,
            paths: 100_000,
            seed: 0,
            antithetic: true,
            batch: 4096,
        }
    }
}

impl WoSConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FracError::Parameter(m));
        if !(self.sphere_fraction > 0.0 && self.sphere_fraction < 1.0) {
            return bad(format!("sphere_fraction {} must lie in (0, 1)", self.sphere_fraction));
        }
        if self.paths == 0 {
            return bad("paths must be at least 1".into());
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        if self.batch == 0 {
            return bad("batch must be at least 1".into());
        }
        if let Some(e) = self.snap_eps {
            if !(e > 0.0) {
                return bad(format!("snap_eps {e} must be positive"));
            }
        }
        Ok(())
    }

    pub fn with_paths(mut self, paths: usize) -> Self {
        self.paths = paths;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionSample {
    pub x: Point,
    pub estimate: f64,
    pub stderr: f64,
    pub paths_used: usize,
    pub mean_steps: f64,
    pub snapped_fraction: f64,
    /// `C₀ · snap_eps^α` from the datum's certificate.
    pub bias_bound: f64,
}

struct Walk {
    payload: f64,
    steps: usize,
    snapped: bool,
    failed: bool,
}

/// Replays recorded uniforms, then extends the record from `rng`.
struct Draws<'a, R: Rng> {
    rng: &'a mut R,
    tape: Vec<(f64, f64)>,
    pos: usize,
    record: bool,
}

impl<R: Rng> Draws<'_, R> {
    fn next(&mut self) -> (f64, f64) {
        if self.pos < self.tape.len() {
            self.pos += 1;
            return self.tape[self.pos - 1];
        }
        let d = (self.rng.gen::<f64>(), self.rng.gen::<f64>());
        if self.record {
            self.tape.push(d);
            self.pos += 1;
        }
        d
    }
}

struct Walker<'a> {
    dom: &'a Domain,
    g: &'a ExteriorData,
    law: &'a ExitLaw,
    kappa: f64,
    eps: f64,
    max_steps: usize,
}

impl Walker<'_> {
    fn run<R: Rng>(&self, x: Point, draws: &mut Draws<R>, shift: f64) -> Walk {
        let mut w = x;
        for step in 0..self.max_steps {
            let d = self.dom.dist(w);
            if d < self.eps {
                let z = self.dom.project(w).map(|p| p.point).unwrap_or(w);
                return Walk {
                    payload: self.g.eval(z),
                    steps: step,
                    snapped: true,
                    failed: false,
                };
            }
            let (ur, ua) = draws.next();
            let rho = self.law.radius_from_uniform(ur);
            let y = axpy(self.kappa * d * rho, unit(2.0 * PI * ua + shift), w);
            if !self.dom.contains(y) {
                return Walk {
                    payload: self.g.eval(y),
                    steps: step + 1,
                    snapped: false,
                    failed: false,
                };
            }
            w = y;
        }
        let z = self.dom.project(w).map(|p| p.point).unwrap_or(w);
        Walk {
            payload: self.g.eval(z),
            steps: self.max_steps,
            snapped: false,
            failed: true,
        }
    }
}

/// Running moments of the per-sample means, merged in batch order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    paths: usize,
    steps: usize,
    snapped: usize,
    failed: usize,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let d = v - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (v - self.mean);
    }

    fn merge(mut self, o: &Moments) -> Moments {
        let n = self.n + o.n;
        if n > 0.0 {
            let d = o.mean - self.mean;
            self.mean += d * o.n / n;
            self.m2 += o.m2 + d * d * self.n * o.n / n;
        }
        self.n = n;
        self.paths += o.paths;
        self.steps += o.steps;
        self.snapped += o.snapped;
        self.failed += o.failed;
        self
    }
}

/// Estimates `u(x)` where `(-Δ)^s u = 0` in `dom` and `u = g` outside.
pub fn solve(dom: &Domain, g: &ExteriorData, x: Point, k: &KernelSpec, cfg: &WoSConfig) -> Result<SolutionSample> {
    cfg.validate()?;
    if !k.is_fractional_laplacian() {
        return Err(FracError::Precondition(
            "walk-on-spheres needs the fractional Laplacian (no exact exit law otherwise)".into(),
        ));
    }
    if k.dim() != 2 {
        return Err(FracError::Precondition("walk-on-spheres runs on planar domains".into()));
    }
    let diam = dom.diameter().ok_or(FracError::Unbounded("walk-on-spheres"))?;
    if !dom.contains(x) {
        return Err(FracError::NotInterior(x));
    }
    let eps = cfg.snap_eps.unwrap_or(1e-6 * diam);
    let law = exit_law(k.s());
    let walker = Walker {
        dom,
        g,
        law: &law,
        kappa: cfg.sphere_fraction,
        eps,
        max_steps: cfg.max_steps,
    };
    // one sample = one path, or the mean of an antithetic pair
    let per_sample = if cfg.antithetic { 2 } else { 1 };
    let samples = cfg.paths.div_ceil(per_sample);
    let per_batch = cfg.batch.div_ceil(per_sample).max(1);
    let batches: Vec<usize> = (0..samples.div_ceil(per_batch)).collect();
    let tag = crate::rng::point_tag(x);

    let parts = crate::par_map(&batches, |_, &b| {
        let mut rng = crate::rng::stream(cfg.seed, tag, b as u64);
        let n = per_batch.min(samples - b * per_batch);
        let mut m = Moments::default();
        let mut tape = Vec::new();
        for _ in 0..n {
            tape.clear();
            let mut draws = Draws {
                rng: &mut rng,
                tape: std::mem::take(&mut tape),
                pos: 0,
                record: cfg.antithetic,
            };
            let a = walker.run(x, &mut draws, 0.0);
            let mut walks = vec![a];
            if cfg.antithetic {
                draws.pos = 0;
                draws.record = false;
                walks.push(walker.run(x, &mut draws, PI));
            }
            tape = draws.tape;
            let mut v = 0.0;
            for w in &walks {
                v += w.payload;
                m.paths += 1;
                m.steps += w.steps;
                m.snapped += w.snapped as usize;
                m.failed += w.failed as usize;
            }
            m.push(v / walks.len() as f64);
        }
        m
    });
    let total = parts.iter().fold(Moments::default(), |acc, m| acc.merge(m));

    if total.failed * 100 > total.paths {
        return Err(FracError::Reliability {
            failed: total.failed as u64,
            paths: total.paths as u64,
            max_steps: cfg.max_steps,
        });
    }
    let var = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
    Ok(SolutionSample {
        x,
        estimate: total.mean,
        stderr: (var / total.n).sqrt(),
        paths_used: total.paths,
        mean_steps: total.steps as f64 / total.paths as f64,
        snapped_fraction: total.snapped as f64 / total.paths as f64,
        bias_bound: g.c0 * eps.powf(g.alpha),
    })
}
