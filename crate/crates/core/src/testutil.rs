//! Finite-difference oracle shared by unit tests.

/// Central difference with step `max(1e-6, 1e-6 |x0|)`.
pub fn central_diff(f: impl Fn(f64) -> f64, x0: f64) -> f64 {
    let h = (1e-6 * x0.abs()).max(1e-6);
    (f(x0 + h) - f(x0 - h)) / (2.0 * h)
}

/// Error of `approx` against `analytic`, relative to `max(1, |analytic|)`.
pub fn rel_err(approx: f64, analytic: f64) -> f64 {
    (approx - analytic).abs() / analytic.abs().max(1.0)
}
