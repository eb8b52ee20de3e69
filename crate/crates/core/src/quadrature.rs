//! Adaptive composite quadrature on top of the double-exponential rule.
//!
//! The double-exponential rule copes with integrable endpoint singularities,
//! but it caps the number of function evaluations per call. The interval is
//! split into pieces and the piece with the largest error estimate is
//! bisected until the summed error estimate meets the target.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Default relative tolerance used throughout the crate.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

const MAX_PIECES: usize = 20_000;
const COARSE_PIECES: usize = 16;

struct Piece {
    a: f64,
    b: f64,
    integral: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn piece<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Piece {
    let out = quadrature::integrate(f, a, b, abs_tol);
    Piece {
        a,
        b,
        integral: out.integral,
        error: out.error_estimate,
    }
}

/// Integrates `f` over `[a, b]` to the given relative tolerance.
pub fn integrate<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::numeric(format!(
            "integration limits must be finite: [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, rel_tol).map(|v| -v);
    }
    // Magnitude estimate from a coarse composite pass; a single call can
    // miss narrow features entirely.
    let h = (b - a) / COARSE_PIECES as f64;
    let mut heap = BinaryHeap::with_capacity(2 * COARSE_PIECES);
    for i in 0..COARSE_PIECES {
        let lo = a + h * i as f64;
        let hi = if i + 1 == COARSE_PIECES { b } else { lo + h };
        heap.push(piece(&f, lo, hi, 1e-8));
    }
    let scale: f64 = heap.iter().map(|p| p.integral.abs()).sum();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let abs_tol = rel_tol * scale;
    let local_tol = abs_tol / COARSE_PIECES as f64;
    // Re-run the coarse pieces at the working tolerance.
    let mut heap: BinaryHeap<Piece> = heap
        .into_iter()
        .map(|p| piece(&f, p.a, p.b, local_tol))
        .collect();
    let mut total_error: f64 = heap.iter().map(|p| p.error).sum();
    while total_error > abs_tol {
        if heap.len() >= MAX_PIECES {
            return Err(Error::numeric(format!(
                "quadrature did not converge on [{a}, {b}]: error estimate {total_error:e} > {abs_tol:e}"
            )));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::numeric(format!(
                "quadrature cannot bisect [{}, {}] further",
                worst.a, worst.b
            )));
        }
        let left = piece(&f, worst.a, mid, local_tol);
        let right = piece(&f, mid, worst.b, local_tol);
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Sum smallest contributions first.
    let mut parts: Vec<f64> = heap.into_iter().map(|p| p.integral).collect();
    parts.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let value: f64 = parts.iter().sum();
    if !value.is_finite() {
        return Err(Error::numeric(format!("non-finite integral on [{a}, {b}]")));
    }
    Ok(value)
}
