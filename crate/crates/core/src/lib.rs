//! Nonlocal Dirichlet problems `Lu = 0` in a domain, `u = g` outside, with
//! Hölder-continuous exterior data.
//!
//! The crate evaluates symmetric nonlocal operators by quadrature, builds the
//! explicit comparison functions used near the boundary, solves the
//! fractional-Laplacian problem by stable walk-on-spheres, and measures
//! boundary Hölder exponents from near-boundary profiles.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barriers;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod nonlocal_op;
pub mod point;
pub mod quad;
pub mod regularity;
pub mod rng;
pub mod wos;

pub use error::{FracError, Result};
/// Crate version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use point::Point;

pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
}
