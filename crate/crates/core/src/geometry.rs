//! Planar domains with distance to the complement, boundary projection,
//! inward normals and a regularized distance.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::point::{self, add, axpy, cross, dot, norm, normalize, perp, scale, sub, Point};

/// A simple polygon, stored counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Accepts either orientation; clockwise input is reversed.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() >= 2 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(FracError::Parameter("polygon needs at least 3 vertices".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            if point::dist(vertices[i], vertices[(i + 1) % n]) == 0.0 {
                return Err(FracError::Parameter(format!("polygon edge {i} has zero length")));
            }
        }
        let area = signed_area(&vertices);
        if area.abs() < 1e-14 {
            return Err(FracError::Parameter("polygon is degenerate (zero area)".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        for i in 0..n {
            for j in i + 1..n {
                // adjacent edges share a vertex
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(FracError::Parameter(format!("polygon edges {i} and {j} intersect")));
                }
            }
        }
        for i in 0..n {
            let prev = vertices[(i + n - 1) % n];
            let next = vertices[(i + 1) % n];
            let c = cross(sub(vertices[i], prev), sub(next, vertices[i]));
            let d = dot(sub(vertices[i], prev), sub(next, vertices[i]));
            if c == 0.0 && d < 0.0 {
                return Err(FracError::Parameter(format!("polygon folds back at vertex {i}")));
            }
        }
        Ok(Polygon { vertices })
    }

    pub fn unit_square() -> Self {
        Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).expect("valid square")
    }

    /// `[0,2]² \ [1,2]²` (re-entrant corner at (1,1)).
    pub fn l_shape() -> Self {
        Polygon::new(vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]])
            .expect("valid L-shape")
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    /// Interior angle at vertex `i`, in (0, 2π).
    pub fn interior_angle(&self, i: usize) -> f64 {
        let n = self.vertices.len();
        let prev = self.vertices[(i + n - 1) % n];
        let next = self.vertices[(i + 1) % n];
        let v = self.vertices[i];
        let a = sub(prev, v);
        let b = sub(next, v);
        // CCW polygon: the interior is swept from `b` to `a` counter-clockwise.
        let ang = cross(b, a).atan2(dot(b, a));
        if ang <= 0.0 {
            ang + 2.0 * PI
        } else {
            ang
        }
    }

    /// Inward bisector at vertex `i`.
    pub fn corner_bisector(&self, i: usize) -> Point {
        let n = self.vertices.len();
        let prev = self.vertices[(i + n - 1) % n];
        let next = self.vertices[(i + 1) % n];
        let v = self.vertices[i];
        let n_in = normalize(perp(sub(v, prev))).expect("non-degenerate edge");
        let n_out = normalize(perp(sub(next, v))).expect("non-degenerate edge");
        normalize(add(n_in, n_out)).unwrap_or(n_in)
    }

    /// max over vertices of |cot(θ/2)|, θ the interior angle.
    pub fn lipschitz_constant(&self) -> f64 {
        (0..self.vertices.len())
            .map(|i| (1.0 / (0.5 * self.interior_angle(i)).tan()).abs())
            .fold(0.0, f64::max)
    }

    fn contains(&self, x: Point) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let (a, b) = self.edge(i);
            if (a[1] > x[1]) != (b[1] > x[1]) {
                let t = (x[1] - a[1]) / (b[1] - a[1]);
                let xc = a[0] + t * (b[0] - a[0]);
                if x[0] < xc {
                    inside = !inside;
                }
            }
        }
        if !inside {
            return false;
        }
        // points on an edge are boundary points
        self.nearest(x).1 > 0.0
    }

    /// (edge index, distance, parameter along the edge in [0,1]).
    fn nearest(&self, x: Point) -> (usize, f64, f64) {
        let mut best = (0, f64::INFINITY, 0.0);
        for i in 0..self.vertices.len() {
            let (a, b) = self.edge(i);
            let ab = sub(b, a);
            let t = (dot(sub(x, a), ab) / dot(ab, ab)).clamp(0.0, 1.0);
            let d = point::dist(x, axpy(t, ab, a));
            if d < best.1 {
                best = (i, d, t);
            }
        }
        best
    }

    fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.vertices {
            for b in &self.vertices {
                d = d.max(point::dist(*a, *b));
            }
        }
        d
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| cross(v[i], v[(i + 1) % n])).sum::<f64>()
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(sub(b, a), sub(c, a));
    let d2 = cross(sub(b, a), sub(d, a));
    let d3 = cross(sub(d, c), sub(a, c));
    let d4 = cross(sub(d, c), sub(b, c));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| {
        cross(sub(q, p), sub(r, p)) == 0.0
            && r[0] >= p[0].min(q[0])
            && r[0] <= p[0].max(q[0])
            && r[1] >= p[1].min(q[1])
            && r[1] <= p[1].max(q[1])
    };
    on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b)
}

/// Star-shaped domain `{ρ < r(θ)}` with a trigonometric radial profile
/// `r(θ) = a₀ + Σ_k (a_k cos kθ + b_k sin kθ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarShaped {
    a0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    gamma: f64,
    r_min: f64,
    r_max: f64,
    /// sup |D²ψ|, attained on rays since ψ's Hessian is 0-homogeneous.
    hess_sup: f64,
}

impl StarShaped {
    pub fn new(a0: f64, cos: Vec<f64>, sin: Vec<f64>, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(FracError::Parameter(format!("Hölder exponent γ = {gamma} must lie in (0, 1]")));
        }
        let mut shape = StarShaped {
            a0,
            cos,
            sin,
            gamma,
            r_min: f64::INFINITY,
            r_max: 0.0,
            hess_sup: 0.0,
        };
        let m = 4096;
        for i in 0..m {
            let th = 2.0 * PI * i as f64 / m as f64;
            let r = shape.radius(th);
            shape.r_min = shape.r_min.min(r);
            shape.r_max = shape.r_max.max(r);
            let (_, _, h) = shape.q_derivatives(scale(point::unit(th), 0.5 * r));
            shape.hess_sup = shape.hess_sup.max(sym_norm(h) * 0.5 * a0);
        }
        if !(shape.r_min > 0.0) {
            return Err(FracError::Parameter(format!(
                "radial profile must stay positive, minimum is {}",
                shape.r_min
            )));
        }
        shape.hess_sup *= 1.01;
        Ok(shape)
    }

    pub fn disk(radius: f64) -> Result<Self> {
        StarShaped::new(radius, vec![], vec![], 1.0)
    }

    pub fn coefficients(&self) -> (f64, &[f64], &[f64]) {
        (self.a0, &self.cos, &self.sin)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// r(θ), r'(θ), r''(θ).
    pub fn profile(&self, th: f64) -> (f64, f64, f64) {
        let mut r = self.a0;
        let mut dr = 0.0;
        let mut ddr = 0.0;
        let terms = self.cos.len().max(self.sin.len());
        for k in 1..=terms {
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            let kf = k as f64;
            let (s, c) = (kf * th).sin_cos();
            r += a * c + b * s;
            dr += kf * (-a * s + b * c);
            ddr -= kf * kf * (a * c + b * s);
        }
        (r, dr, ddr)
    }

    pub fn radius(&self, th: f64) -> f64 {
        self.profile(th).0
    }

    fn boundary(&self, th: f64) -> (Point, Point, Point) {
        let (r, dr, ddr) = self.profile(th);
        let e = point::unit(th);
        let t = perp(e);
        let b = scale(e, r);
        let db = add(scale(e, dr), scale(t, r));
        let ddb = add(scale(e, ddr - r), scale(t, 2.0 * dr));
        (b, db, ddb)
    }

    /// q = |x|²/r(θ)², its gradient and Hessian.
    fn q_derivatives(&self, x: Point) -> (f64, Point, [[f64; 2]; 2]) {
        let rho2 = dot(x, x);
        let th = if rho2 > 0.0 { x[1].atan2(x[0]) } else { 0.0 };
        let (r, dr, ddr) = self.profile(th);
        let h = 1.0 / (r * r);
        let h1 = -2.0 * dr / (r * r * r);
        let h2 = 6.0 * dr * dr / (r * r * r * r) - 2.0 * ddr / (r * r * r);
        let (cx, cy) = if rho2 > 0.0 {
            let rho = rho2.sqrt();
            (x[0] / rho, x[1] / rho)
        } else {
            (1.0, 0.0)
        };
        let q = rho2 * h;
        let grad = [2.0 * x[0] * h - x[1] * h1, 2.0 * x[1] * h + x[0] * h1];
        let xy = cx * cy;
        let hxx = 2.0 * h - 2.0 * xy * h1 + cy * cy * h2;
        let hxy = (cx * cx - cy * cy) * h1 - xy * h2;
        let hyy = 2.0 * h + 2.0 * xy * h1 + cx * cx * h2;
        (q, grad, [[hxx, hxy], [hxy, hyy]])
    }

    fn contains(&self, x: Point) -> bool {
        let rho = norm(x);
        if rho == 0.0 {
            return true;
        }
        rho < self.radius(x[1].atan2(x[0]))
    }

    /// Nearest boundary parameter by sampled search plus safeguarded Newton.
    fn nearest(&self, x: Point) -> (f64, f64) {
        let m = 64 * (1 + self.cos.len().max(self.sin.len())).min(64);
        let step = 2.0 * PI / m as f64;
        let f = |th: f64| point::dist(self.boundary(th).0, x);
        let samples: Vec<f64> = (0..m).map(|i| f(i as f64 * step)).collect();
        let mut candidates: Vec<usize> = (0..m)
            .filter(|&i| samples[i] <= samples[(i + m - 1) % m] && samples[i] <= samples[(i + 1) % m])
            .collect();
        candidates.sort_by(|&a, &b| samples[a].total_cmp(&samples[b]));
        candidates.truncate(4);
        let tol = 1e-12 * 2.0 * self.r_max;
        let mut best = (0.0, f64::INFINITY);
        for i in candidates {
            let (mut lo, mut hi) = ((i as f64 - 1.0) * step, (i as f64 + 1.0) * step);
            // g(θ) = (b - x)·b', minimized distance has g = 0 with g' > 0
            let g = |th: f64| {
                let (b, db, ddb) = self.boundary(th);
                let d = sub(b, x);
                (dot(d, db), dot(db, db) + dot(d, ddb), norm(db))
            };
            let mut th = i as f64 * step;
            let (g_lo, _, _) = g(lo);
            let (g_hi, _, _) = g(hi);
            if g_lo > 0.0 || g_hi < 0.0 {
                // no sign change: keep the sample
                let d = f(th);
                if d < best.1 {
                    best = (th, d);
                }
                continue;
            }
            for _ in 0..100 {
                let (gv, dg, speed) = g(th);
                if gv < 0.0 {
                    lo = th;
                } else {
                    hi = th;
                }
                let mut next = if dg > 0.0 { th - gv / dg } else { f64::NAN };
                if !(next > lo && next < hi) {
                    next = 0.5 * (lo + hi);
                }
                let moved = (next - th).abs() * speed;
                th = next;
                if moved < tol || (hi - lo) * speed < tol {
                    break;
                }
            }
            let d = f(th);
            if d < best.1 {
                best = (th, d);
            }
        }
        best
    }
}

/// Operator norm of a symmetric 2×2 matrix.
pub fn sym_norm(h: [[f64; 2]; 2]) -> f64 {
    let tr = 0.5 * (h[0][0] + h[1][1]);
    let det_part = (0.25 * (h[0][0] - h[1][1]).powi(2) + h[0][1] * h[0][1]).sqrt();
    (tr + det_part).abs().max((tr - det_part).abs())
}

/// Serializable domain description, e.g. `{"ball": {"center": [0,0], "radius": 1}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainRecord {
    Ball { center: Point, radius: f64 },
    Polygon { vertices: Vec<Point> },
    Halfplane { normal: Point },
    Cone { axis: Point, eta: f64 },
    Star {
        a0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
        gamma: f64,
    },
}

/// A planar domain Ω.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// `{x·e > 0}`
    HalfPlane { normal: Point },
    Ball { center: Point, radius: f64 },
    /// `{e·x/|x| > -η (1 - (e·x)²/|x|²)}`
    Cone { axis: Point, eta: f64 },
    Polygon(Polygon),
    StarShaped(StarShaped),
}

/// Nearest boundary point and the inward unit normal there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub point: Point,
    pub normal: Point,
}

/// A smooth function comparable to the distance, with its derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedDistance {
    pub psi: f64,
    pub grad: Point,
    pub hess: [[f64; 2]; 2],
    /// ω(d) with ω(r) = C r^γ, so that |D²ψ| ≤ ω(d)/d.
    pub omega_bound: f64,
}

impl Domain {
    pub fn half_plane(normal: Point) -> Result<Self> {
        let normal = normalize(normal).ok_or_else(|| FracError::Parameter("half-plane normal must be nonzero".into()))?;
        Ok(Domain::HalfPlane { normal })
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(FracError::Parameter(format!("ball radius {radius} must be positive")));
        }
        Ok(Domain::Ball { center, radius })
    }

    pub fn unit_ball() -> Self {
        Domain::Ball {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }

    pub fn cone(axis: Point, eta: f64) -> Result<Self> {
        let axis = normalize(axis).ok_or_else(|| FracError::Parameter("cone axis must be nonzero".into()))?;
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(FracError::Parameter(format!("cone opening η = {eta} must be positive")));
        }
        Ok(Domain::Cone { axis, eta })
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        Ok(Domain::Polygon(Polygon::new(vertices)?))
    }

    pub fn from_record(rec: &DomainRecord) -> Result<Self> {
        match rec {
            DomainRecord::Ball { center, radius } => Domain::ball(*center, *radius),
            DomainRecord::Polygon { vertices } => Domain::polygon(vertices.clone()),
            DomainRecord::Halfplane { normal } => Domain::half_plane(*normal),
            DomainRecord::Cone { axis, eta } => Domain::cone(*axis, *eta),
            DomainRecord::Star { a0, cos, sin, gamma } => {
                Ok(Domain::StarShaped(StarShaped::new(*a0, cos.clone(), sin.clone(), *gamma)?))
            }
        }
    }

    pub fn to_record(&self) -> DomainRecord {
        match self {
            Domain::HalfPlane { normal } => DomainRecord::Halfplane { normal: *normal },
            Domain::Ball { center, radius } => DomainRecord::Ball {
                center: *center,
                radius: *radius,
            },
            Domain::Cone { axis, eta } => DomainRecord::Cone { axis: *axis, eta: *eta },
            Domain::Polygon(p) => DomainRecord::Polygon {
                vertices: p.vertices.clone(),
            },
            Domain::StarShaped(st) => DomainRecord::Star {
                a0: st.a0,
                cos: st.cos.clone(),
                sin: st.sin.clone(),
                gamma: st.gamma,
            },
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Domain::HalfPlane { .. } => "half-plane",
            Domain::Ball { .. } => "ball",
            Domain::Cone { .. } => "cone",
            Domain::Polygon(_) => "polygon",
            Domain::StarShaped(_) => "star-shaped",
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Domain::HalfPlane { .. } | Domain::Cone { .. })
    }

    /// Diameter for bounded variants (an upper bound `2 r_max` for star shapes).
    pub fn diameter(&self) -> Option<f64> {
        match self {
            Domain::Ball { radius, .. } => Some(2.0 * radius),
            Domain::Polygon(p) => Some(p.diameter()),
            Domain::StarShaped(s) => Some(2.0 * s.r_max),
            _ => None,
        }
    }

    /// Center and radius of a disk containing the domain.
    pub fn bounding_disk(&self) -> Option<(Point, f64)> {
        match self {
            Domain::Ball { center, radius } => Some((*center, *radius)),
            Domain::Polygon(p) => {
                let n = p.vertices.len() as f64;
                let c = p.vertices.iter().fold([0.0, 0.0], |acc, v| add(acc, scale(*v, 1.0 / n)));
                let r = p.vertices.iter().map(|v| point::dist(*v, c)).fold(0.0, f64::max);
                Some((c, r))
            }
            Domain::StarShaped(s) => Some(([0.0, 0.0], s.r_max)),
            _ => None,
        }
    }

    /// Membership in the open set Ω.
    pub fn contains(&self, x: Point) -> bool {
        match self {
            Domain::HalfPlane { normal } => dot(*normal, x) > 0.0,
            Domain::Ball { center, radius } => point::dist(x, *center) < *radius,
            Domain::Cone { axis, eta } => cone_psi(*axis, *eta, x) > 0.0,
            Domain::Polygon(p) => p.contains(x),
            Domain::StarShaped(s) => s.contains(x),
        }
    }

    /// Distance to the complement; zero outside Ω.
    pub fn dist(&self, x: Point) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        match self {
            Domain::HalfPlane { normal } => dot(*normal, x),
            Domain::Ball { center, radius } => radius - point::dist(x, *center),
            Domain::Cone { axis, eta } => cone_nearest(*axis, *eta, x).1,
            Domain::Polygon(p) => p.nearest(x).1,
            Domain::StarShaped(s) => s.nearest(x).1,
        }
    }

    /// Nearest boundary point of an interior point, with the inward normal.
    pub fn project(&self, x: Point) -> Result<Projection> {
        if !self.contains(x) {
            return Err(FracError::NotInterior(x));
        }
        Ok(match self {
            Domain::HalfPlane { normal } => Projection {
                point: axpy(-dot(*normal, x), *normal, x),
                normal: *normal,
            },
            Domain::Ball { center, radius } => {
                let out = normalize(sub(x, *center)).unwrap_or([1.0, 0.0]);
                Projection {
                    point: axpy(*radius, out, *center),
                    normal: scale(out, -1.0),
                }
            }
            Domain::Cone { axis, eta } => {
                let (z, d) = cone_nearest(*axis, *eta, x);
                let _ = d;
                let normal = normalize(sub(x, z)).unwrap_or(*axis);
                Projection { point: z, normal }
            }
            Domain::Polygon(p) => {
                let (i, _, t) = p.nearest(x);
                let (a, b) = p.edge(i);
                let z = axpy(t, sub(b, a), a);
                let n = p.vertices.len();
                let normal = if t <= 1e-12 {
                    p.corner_bisector(i)
                } else if t >= 1.0 - 1e-12 {
                    p.corner_bisector((i + 1) % n)
                } else {
                    normalize(perp(sub(b, a))).expect("non-degenerate edge")
                };
                Projection { point: z, normal }
            }
            Domain::StarShaped(s) => {
                let (th, _) = s.nearest(x);
                let (b, db, _) = s.boundary(th);
                Projection {
                    point: b,
                    normal: normalize(perp(db)).expect("regular boundary"),
                }
            }
        })
    }

    /// Inward unit normal at a boundary point (bisector at polygon corners).
    pub fn inward_normal_at(&self, z: Point) -> Point {
        match self {
            Domain::HalfPlane { normal } => *normal,
            Domain::Ball { center, .. } => normalize(sub(*center, z)).unwrap_or([1.0, 0.0]),
            Domain::Cone { axis, eta } => {
                if norm(z) == 0.0 {
                    return *axis;
                }
                let (u_plus, u_minus) = cone_rays(*axis, *eta);
                let u = if dot(z, u_plus) >= dot(z, u_minus) { u_plus } else { u_minus };
                let n = perp(u);
                if dot(n, *axis) >= 0.0 {
                    n
                } else {
                    scale(n, -1.0)
                }
            }
            Domain::Polygon(p) => {
                let n = p.vertices.len();
                for (i, v) in p.vertices.iter().enumerate() {
                    if point::dist(*v, z) <= 1e-12 * (1.0 + norm(z)) {
                        return p.corner_bisector(i);
                    }
                }
                let (i, _, _) = p.nearest(z);
                let (a, b) = p.edge(i % n);
                normalize(perp(sub(b, a))).expect("non-degenerate edge")
            }
            Domain::StarShaped(s) => {
                let th = z[1].atan2(z[0]);
                let (_, db, _) = s.boundary(th);
                normalize(perp(db)).expect("regular boundary")
            }
        }
    }

    /// The regularized distance ψ. Closed forms for balls and half-planes;
    /// `(r̄/2)(1 - |x|²/r(θ)²)` for star-shaped domains, with r̄ = a₀.
    pub fn regularized_distance(&self, x: Point) -> Result<RegularizedDistance> {
        if !self.contains(x) {
            return Err(FracError::NotInterior(x));
        }
        match self {
            Domain::Ball { center, radius } => {
                let y = sub(x, *center);
                let d = self.dist(x);
                Ok(RegularizedDistance {
                    psi: (radius * radius - dot(y, y)) / (2.0 * radius),
                    grad: scale(y, -1.0 / radius),
                    hess: [[-1.0 / radius, 0.0], [0.0, -1.0 / radius]],
                    omega_bound: d / radius,
                })
            }
            Domain::HalfPlane { normal } => Ok(RegularizedDistance {
                psi: dot(*normal, x),
                grad: *normal,
                hess: [[0.0; 2]; 2],
                omega_bound: 0.0,
            }),
            Domain::StarShaped(s) => {
                let (q, gq, hq) = s.q_derivatives(x);
                let c = 0.5 * s.a0;
                let d = self.dist(x);
                let diam = 2.0 * s.r_max;
                let c_omega = s.hess_sup * diam.powf(1.0 - s.gamma);
                Ok(RegularizedDistance {
                    psi: c * (1.0 - q),
                    grad: scale(gq, -c),
                    hess: [[-c * hq[0][0], -c * hq[0][1]], [-c * hq[1][0], -c * hq[1][1]]],
                    omega_bound: c_omega * d.powf(s.gamma),
                })
            }
            _ => Err(FracError::UnsupportedDomain {
                op: "regularized_distance",
                variant: self.variant_name(),
            }),
        }
    }

    /// Empirical `C` with `C⁻¹ d ≤ ψ ≤ C d` over a deterministic interior sample.
    pub fn comparability_constant(&self, samples: usize) -> Result<f64> {
        let (c, r) = self.bounding_disk().ok_or(FracError::Unbounded("comparability_constant"))?;
        let mut worst: f64 = 1.0;
        let mut found = 0;
        let mut i = 0u64;
        while found < samples && i < 50 * samples as u64 + 100 {
            i += 1;
            let u = crate::rng::halton2(i);
            let x = add(c, [r * (2.0 * u[0] - 1.0), r * (2.0 * u[1] - 1.0)]);
            if !self.contains(x) {
                continue;
            }
            found += 1;
            let psi = self.regularized_distance(x)?.psi;
            let d = self.dist(x);
            worst = worst.max(psi / d).max(d / psi);
        }
        Ok(worst)
    }
}

impl Domain {
    /// ψ evaluated anywhere (negative outside Ω); `None` for polygons.
    pub fn psi_value(&self, x: Point) -> Option<f64> {
        match self {
            Domain::Ball { center, radius } => {
                let y = sub(x, *center);
                Some((radius * radius - dot(y, y)) / (2.0 * radius))
            }
            Domain::HalfPlane { normal } => Some(dot(*normal, x)),
            Domain::StarShaped(s) => Some(0.5 * s.a0 * (1.0 - s.q_derivatives(x).0)),
            Domain::Cone { axis, eta } => Some(cone_psi(*axis, *eta, x)),
            Domain::Polygon(_) => None,
        }
    }

    /// Boundary point for a parameter `u ∈ [0, 1)`. Unbounded variants map
    /// `u` onto a boundary piece of half-length `half_len` around the origin.
    pub fn boundary_point(&self, u: f64, half_len: f64) -> Point {
        match self {
            Domain::Ball { center, radius } => axpy(*radius, point::unit(2.0 * PI * u), *center),
            Domain::HalfPlane { normal } => scale(perp(*normal), half_len * (2.0 * u - 1.0)),
            Domain::Cone { axis, eta } => {
                let (a, b) = cone_rays(*axis, *eta);
                let t = 2.0 * u - 1.0;
                if t >= 0.0 {
                    scale(a, half_len * t)
                } else {
                    scale(b, -half_len * t)
                }
            }
            Domain::Polygon(p) => {
                let n = p.vertices.len();
                let lens: Vec<f64> = (0..n).map(|i| {
                    let (a, b) = p.edge(i);
                    point::dist(a, b)
                }).collect();
                let total: f64 = lens.iter().sum();
                let mut target = u.rem_euclid(1.0) * total;
                for (i, len) in lens.iter().enumerate() {
                    if target <= *len {
                        let (a, b) = p.edge(i);
                        return axpy(target / len, sub(b, a), a);
                    }
                    target -= len;
                }
                p.vertices[0]
            }
            Domain::StarShaped(s) => s.boundary(2.0 * PI * u).0,
        }
    }

    /// Radii `r > 0` at which `x + r·dir` or `x - r·dir` meets ∂Ω. Empty for
    /// star-shaped domains, where crossings are left to adaptive refinement.
    pub fn line_crossings(&self, x: Point, dir: Point) -> Vec<f64> {
        let mut out = Vec::new();
        match self {
            Domain::Ball { center, radius } => {
                let y = sub(x, *center);
                let b = dot(dir, y);
                let c = dot(y, y) - radius * radius;
                let disc = b * b - c;
                if disc > 0.0 {
                    let sq = disc.sqrt();
                    out.push((-b + sq).abs());
                    out.push((-b - sq).abs());
                }
            }
            Domain::HalfPlane { normal } => {
                let q = dot(*normal, dir);
                if q != 0.0 {
                    out.push((dot(*normal, x) / q).abs());
                }
            }
            Domain::Cone { axis, eta } => {
                let (a, b) = cone_rays(*axis, *eta);
                for u in [a, b] {
                    // x + t·dir = λ·u with λ ≥ 0
                    let den = cross(dir, u);
                    if den != 0.0 {
                        let t = cross(u, x) / den;
                        let lam = cross(dir, x) / den;
                        if lam >= 0.0 {
                            out.push(t.abs());
                        }
                    }
                }
                // the apex
                if cross(dir, x).abs() <= 1e-15 * norm(x) {
                    out.push(norm(x));
                }
            }
            Domain::Polygon(p) => {
                for i in 0..p.vertices.len() {
                    let (a, b) = p.edge(i);
                    let e = sub(b, a);
                    let den = cross(dir, e);
                    if den != 0.0 {
                        let w = sub(a, x);
                        let t = cross(w, e) / den;
                        let lam = cross(w, dir) / den;
                        if (0.0..=1.0).contains(&lam) {
                            out.push(t.abs());
                        }
                    }
                }
            }
            Domain::StarShaped(_) => {}
        }
        out.retain(|r| *r > 0.0 && r.is_finite());
        out
    }
}

/// ψ for the cone `C_{-η}`: `e·x + η|x|(1 - (e·x)²/|x|²)`.
pub fn cone_psi(axis: Point, eta: f64, x: Point) -> f64 {
    let r = norm(x);
    if r == 0.0 {
        return 0.0;
    }
    let c = dot(axis, x);
    c + eta * r * (1.0 - (c / r) * (c / r))
}

/// cos of the half-opening angle of `C_{-η}` (negative root of ηc² - c - η).
pub fn cone_boundary_cos(eta: f64) -> f64 {
    (1.0 - (1.0 + 4.0 * eta * eta).sqrt()) / (2.0 * eta)
}

/// Unit directions of the two boundary rays of `C_{-η}`.
pub fn cone_rays(axis: Point, eta: f64) -> (Point, Point) {
    let c = cone_boundary_cos(eta);
    let s = (1.0 - c * c).max(0.0).sqrt();
    let t = perp(axis);
    (add(scale(axis, c), scale(t, s)), add(scale(axis, c), scale(t, -s)))
}

fn cone_nearest(axis: Point, eta: f64, x: Point) -> (Point, f64) {
    let (u1, u2) = cone_rays(axis, eta);
    let mut best = ([0.0, 0.0], norm(x));
    for u in [u1, u2] {
        let t = dot(x, u);
        if t > 0.0 {
            let z = scale(u, t);
            let d = point::dist(x, z);
            if d < best.1 {
                best = (z, d);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_examples() {
        assert!(Domain::unit_ball().contains([0.5, 0.0]));
        let hp = Domain::half_plane([0.0, 1.0]).unwrap();
        assert!(!hp.contains([3.0, -0.1]));
        let cone = Domain::cone([0.0, 1.0], 1.0).unwrap();
        assert!(cone.contains([1.0, 0.0]));
        assert!(!cone.contains([0.0, -1.0]));
    }

    #[test]
    fn distance_examples() {
        assert!((Domain::unit_ball().dist([0.25, 0.0]) - 0.75).abs() < 1e-15);
        let sq = Domain::Polygon(Polygon::unit_square());
        assert!((sq.dist([0.5, 0.5]) - 0.5).abs() < 1e-15);
        let disk = Domain::StarShaped(StarShaped::disk(1.0).unwrap());
        assert!((disk.dist([0.9, 0.0]) - 0.1).abs() < 1e-10);
        assert_eq!(sq.dist([2.0, 0.5]), 0.0);
    }

    #[test]
    fn projection_examples() {
        let p = Domain::unit_ball().project([0.25, 0.0]).unwrap();
        assert_eq!(p.point, [1.0, 0.0]);
        assert_eq!(p.normal, [-1.0, 0.0]);
        let sq = Domain::Polygon(Polygon::unit_square());
        let p = sq.project([0.5, 0.2]).unwrap();
        assert!(point::dist(p.point, [0.5, 0.0]) < 1e-15);
        assert!(point::dist(p.normal, [0.0, 1.0]) < 1e-15);
        let hp = Domain::half_plane([0.0, 1.0]).unwrap();
        let p = hp.project([7.0, 0.3]).unwrap();
        assert_eq!(p.point, [7.0, 0.0]);
        assert_eq!(p.normal, [0.0, 1.0]);
        assert!(matches!(hp.project([0.0, -1.0]), Err(FracError::NotInterior(_))));
    }

    #[test]
    fn corner_normals_are_bisectors() {
        let sq = Polygon::unit_square();
        let b = sq.corner_bisector(0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(point::dist(b, [h, h]) < 1e-15);
        let l = Polygon::l_shape();
        // re-entrant vertex (1,1): bisector points away from the removed quadrant
        let b = l.corner_bisector(3);
        assert!(point::dist(b, [-h, -h]) < 1e-15);
        assert!((l.interior_angle(3) - 1.5 * PI).abs() < 1e-12);
        assert!((sq.interior_angle(0) - 0.5 * PI).abs() < 1e-12);
        assert!((sq.lipschitz_constant() - 1.0).abs() < 1e-12);
        let dom = Domain::Polygon(sq);
        assert!(point::dist(dom.inward_normal_at([0.0, 0.0]), [h, h]) < 1e-15);
    }

    #[test]
    fn regularized_distance_closed_forms() {
        let rd = Domain::unit_ball().regularized_distance([0.5, 0.0]).unwrap();
        assert_eq!(rd.psi, 0.375);
        assert_eq!(rd.grad, [-0.5, 0.0]);
        assert_eq!(rd.hess, [[-1.0, 0.0], [0.0, -1.0]]);
        let hp = Domain::half_plane([0.0, 1.0]).unwrap();
        let rd = hp.regularized_distance([2.0, 0.3]).unwrap();
        assert_eq!(rd.psi, 0.3);
        assert_eq!(rd.hess, [[0.0; 2]; 2]);
        // ψ/d = (1+|x|)/2 on the unit ball
        let x = [0.99, 0.0];
        let ratio = Domain::unit_ball().regularized_distance(x).unwrap().psi / Domain::unit_ball().dist(x);
        assert!((ratio - 0.995).abs() < 1e-12);
        assert!((0.5..=1.0).contains(&ratio));
        let sq = Domain::Polygon(Polygon::unit_square());
        assert!(matches!(
            sq.regularized_distance([0.5, 0.5]),
            Err(FracError::UnsupportedDomain { .. })
        ));
    }

    #[test]
    fn star_matches_disk_formulas() {
        let disk = Domain::StarShaped(StarShaped::disk(1.0).unwrap());
        for x in [[0.3, 0.4], [-0.7, 0.1], [0.0, -0.95]] {
            let a = disk.regularized_distance(x).unwrap();
            let b = Domain::unit_ball().regularized_distance(x).unwrap();
            assert!((a.psi - b.psi).abs() < 1e-14);
            assert!(point::dist(a.grad, b.grad) < 1e-14);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((a.hess[i][j] - b.hess[i][j]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn star_derivatives_match_finite_differences() {
        let st = StarShaped::new(1.0, vec![0.1, 0.0, 0.05], vec![0.0, -0.08], 1.0).unwrap();
        let dom = Domain::StarShaped(st);
        let x = [0.31, -0.42];
        let rd = dom.regularized_distance(x).unwrap();
        let h = 1e-5;
        let psi = |p: Point| dom.regularized_distance(p).unwrap().psi;
        let gx = (psi([x[0] + h, x[1]]) - psi([x[0] - h, x[1]])) / (2.0 * h);
        let gy = (psi([x[0], x[1] + h]) - psi([x[0], x[1] - h])) / (2.0 * h);
        assert!((gx - rd.grad[0]).abs() < 1e-8 && (gy - rd.grad[1]).abs() < 1e-8);
        let grad = |p: Point| dom.regularized_distance(p).unwrap().grad;
        let hxx = (grad([x[0] + h, x[1]])[0] - grad([x[0] - h, x[1]])[0]) / (2.0 * h);
        let hxy = (grad([x[0], x[1] + h])[0] - grad([x[0], x[1] - h])[0]) / (2.0 * h);
        let hyy = (grad([x[0], x[1] + h])[1] - grad([x[0], x[1] - h])[1]) / (2.0 * h);
        assert!((hxx - rd.hess[0][0]).abs() < 1e-6);
        assert!((hxy - rd.hess[0][1]).abs() < 1e-6);
        assert!((hyy - rd.hess[1][1]).abs() < 1e-6);
    }

    #[test]
    fn cone_geometry() {
        let axis = [0.0, 1.0];
        let c = cone_boundary_cos(1.0);
        assert!((c - (1.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
        let (u1, u2) = cone_rays(axis, 1.0);
        assert!(cone_psi(axis, 1.0, u1).abs() < 1e-14);
        assert!(cone_psi(axis, 1.0, u2).abs() < 1e-14);
        let dom = Domain::cone(axis, 1.0).unwrap();
        let x = [0.0, 1.0];
        // the nearest complement point is on a ray; distance = sin(angle between e and ray)
        // the rays open past the horizontal, so the apex is nearest to the axis point
        assert!((dom.dist(x) - 1.0).abs() < 1e-15);
        let y = add(x, scale(u1, 2.0));
        let d = dom.dist(y);
        let expected = (1.0 - c * c).sqrt();
        assert!((d - expected).abs() < 1e-12, "{d} vs {expected}");
        let p = dom.project(y).unwrap();
        assert!((point::dist(y, p.point) - d).abs() < 1e-14);
        assert!(cone_psi(axis, 1.0, p.point).abs() < 1e-12);
    }

    #[test]
    fn polygon_validation() {
        assert!(Polygon::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
        // bow-tie
        assert!(Polygon::new(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).is_err());
        // clockwise input is reoriented
        let p = Polygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(signed_area(p.vertices()) > 0.0);
        assert!(Domain::ball([0.0, 0.0], -1.0).is_err());
        assert!(Domain::cone([0.0, 1.0], 0.0).is_err());
        assert!(StarShaped::new(0.1, vec![0.5], vec![], 1.0).is_err());
    }
}
