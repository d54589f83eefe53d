//! Gauss–Legendre panels and a globally adaptive bisection driver.
//!
//! Every panel is evaluated with a 16-point rule and an 8-point companion;
//! the difference between the two is the panel's error estimate. The panel
//! with the largest estimate is bisected until the summed estimate meets
//! `max(abs_tol, rel_tol * sum |panel|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev-like starting guess, then Newton on P_n.
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    /// Integrate `f` over [a, b].
    pub fn apply<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + h * x);
        }
        acc * h
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn gauss16() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(16))
}

pub fn gauss8() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(8))
}

/// Tolerances for [`integrate`] and [`integrate_parts`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_panels: usize,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Tolerance {
            rel,
            abs,
            max_panels: 4000,
        }
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }
}

/// Outcome of an adaptive integration with `K` simultaneously integrated parts.
#[derive(Debug, Clone, Copy)]
pub struct Integral<const K: usize> {
    pub parts: [f64; K],
    /// Sum of per-panel |high - low| estimates of the controlled quantity.
    pub err: f64,
    /// Sum of |controlled quantity| over panels; scale for the relative test.
    pub abs_sum: f64,
    pub converged: bool,
    pub panels: usize,
}

impl Integral<1> {
    pub fn value(&self) -> f64 {
        self.parts[0]
    }
}

struct Panel<const K: usize> {
    a: f64,
    b: f64,
    parts: [f64; K],
    control: f64,
    err: f64,
}

impl<const K: usize> PartialEq for Panel<K> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<const K: usize> Eq for Panel<K> {}
impl<const K: usize> PartialOrd for Panel<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const K: usize> Ord for Panel<K> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn eval_panel<const K: usize, F, C>(f: &mut F, control: &C, a: f64, b: f64) -> Panel<K>
where
    F: FnMut(f64) -> [f64; K],
    C: Fn(&[f64; K]) -> f64,
{
    let g16 = gauss16();
    let g8 = gauss8();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut hi = [0.0; K];
    let mut lo = [0.0; K];
    for (x, w) in g16.nodes.iter().zip(&g16.weights) {
        let v = f(c + h * x);
        for k in 0..K {
            hi[k] += w * v[k];
        }
    }
    for (x, w) in g8.nodes.iter().zip(&g8.weights) {
        let v = f(c + h * x);
        for k in 0..K {
            lo[k] += w * v[k];
        }
    }
    for k in 0..K {
        hi[k] *= h;
        lo[k] *= h;
    }
    let control_hi = control(&hi);
    let err = (control_hi - control(&lo)).abs();
    Panel {
        a,
        b,
        parts: hi,
        control: control_hi,
        err: if err.is_finite() { err } else { f64::INFINITY },
    }
}

/// Adaptive integration of a vector-valued integrand over the partition given
/// by `breaks` (sorted, at least two entries). The error is controlled on the
/// scalar `control(parts)`.
pub fn integrate_parts<const K: usize, F, C>(
    mut f: F,
    breaks: &[f64],
    tol: Tolerance,
    control: C,
) -> Integral<K>
where
    F: FnMut(f64) -> [f64; K],
    C: Fn(&[f64; K]) -> f64,
{
    assert!(breaks.len() >= 2, "need at least one panel");
    let mut heap: BinaryHeap<Panel<K>> = BinaryHeap::new();
    // Panels too narrow to split in floating point are retired here.
    let mut retired: Vec<Panel<K>> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(eval_panel(&mut f, &control, w[0], w[1]));
        }
    }
    let mut panels = heap.len();
    let mut err: f64 = heap.iter().map(|p| p.err).sum();
    let mut abs_sum: f64 = heap.iter().map(|p| p.control.abs()).sum();
    loop {
        let target = tol.abs.max(tol.rel * abs_sum);
        if err <= target || panels >= tol.max_panels || heap.is_empty() {
            // Recompute the sums exactly; the running ones drift.
            let mut parts = [0.0; K];
            let mut err_sum = 0.0;
            let mut abs_total = 0.0;
            for p in heap.iter().chain(retired.iter()) {
                for (acc, v) in parts.iter_mut().zip(p.parts) {
                    *acc += v;
                }
                err_sum += p.err;
                abs_total += p.control.abs();
            }
            let target = tol.abs.max(tol.rel * abs_total);
            return Integral {
                parts,
                err: err_sum,
                abs_sum: abs_total,
                converged: err_sum <= target,
                panels,
            };
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b)
            || (worst.b - worst.a) <= 4.0 * f64::EPSILON * mid.abs()
        {
            retired.push(worst);
            continue;
        }
        let left = eval_panel(&mut f, &control, worst.a, mid);
        let right = eval_panel(&mut f, &control, mid, worst.b);
        err += left.err + right.err - worst.err;
        abs_sum += left.control.abs() + right.control.abs() - worst.control.abs();
        heap.push(left);
        heap.push(right);
        panels += 1;
    }
}

/// Scalar adaptive integration; see [`integrate_parts`].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: Tolerance) -> Integral<1> {
    integrate_parts(move |x| [f(x)], breaks, tol, |p| p[0])
}

/// `n + 1` geometrically spaced points from `a` to `b` (both > 0).
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > 0.0 && n >= 1);
    let la = a.ln();
    let lb = b.ln();
    let mut out: Vec<f64> = (0..=n)
        .map(|i| (la + (lb - la) * i as f64 / n as f64).exp())
        .collect();
    out[0] = a;
    out[n] = b;
    out
}

/// Geometric breakpoints from `a` to `b` with consecutive ratio at most `ratio`.
pub fn geometric_breaks(a: f64, b: f64, ratio: f64) -> Vec<f64> {
    let n = ((b / a).ln() / ratio.ln()).ceil().max(1.0) as usize;
    geomspace(a, b, n)
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    geomspace(lo, hi, n - 1)
}
