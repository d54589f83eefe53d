//! Planar points. One-dimensional problems live on the first axis.

pub type Point = [f64; 2];

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(a: Point, t: f64) -> Point {
    [a[0] * t, a[1] * t]
}

#[inline]
pub fn axpy(t: f64, dir: Point, base: Point) -> Point {
    [base[0] + t * dir[0], base[1] + t * dir[1]]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

pub fn normalize(a: Point) -> Option<Point> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| scale(a, 1.0 / n))
}

#[inline]
pub fn unit(angle: f64) -> Point {
    let (s, c) = angle.sin_cos();
    [c, s]
}

/// Counter-clockwise perpendicular.
#[inline]
pub fn perp(a: Point) -> Point {
    [-a[1], a[0]]
}
