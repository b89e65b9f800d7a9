//! Trial functions `f_n(x, y) = e^{ikx} ψ(y) χ_n(x) χ̃_n(y)` attached to the
//! first branch, `ψ(y) = sgn(y) e^{−2|y|}`, for the operator with `α = −1`.
//!
//! The residual `‖(T − (k² − 4)) f_n‖²` and the norm separate into products
//! of one-dimensional integrals, evaluated by composite Gauss–Legendre rules.

use alloc::format;

use num_traits::Float;

use crate::geometry::StarGraph;
use crate::quadrature::integrate;
use crate::{Error, Result};

/// `e^{−1/t}` and its first two derivatives, zero for `t ≤ 0`.
fn g(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let l = Float::ln(t);
    let e = -1.0 / t;
    let g0 = Float::exp(e);
    let g1 = Float::exp(e - 2.0 * l);
    let g2 = Float::exp(e - 4.0 * l) - 2.0 * Float::exp(e - 3.0 * l);
    (g0, g1, g2)
}

/// Smooth step `Φ = g(t) / (g(t) + g(1 − t))` with `Φ'` and `Φ''`.
pub fn smooth_step(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let (a, a1, a2) = g(t);
    let (b, gb1, gb2) = g(1.0 - t);
    let (b1, b2) = (-gb1, gb2);
    let s = a + b;
    let s1 = a1 + b1;
    let num = a1 * b - a * b1;
    let num1 = a2 * b - a * b2;
    (a / s, num / (s * s), (num1 * s - 2.0 * num * s1) / (s * s * s))
}

/// `Φ(p − z) Φ(z − q)` and its derivatives in `z`.
fn bump(z: f64, p: f64, q: f64) -> (f64, f64, f64) {
    let (u0, u1, u2) = smooth_step(p - z);
    let (v0, v1, v2) = smooth_step(z - q);
    (u0 * v0, -u1 * v0 + u0 * v1, u2 * v0 - 2.0 * u1 * v1 + u0 * v2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylTerms {
    /// `‖(T − (k² − 4)) f_n‖²`.
    pub residual_sq: f64,
    pub norm_sq: f64,
    pub quotient: f64,
}

/// Residual quotient of `f_n` on the straight branch, support
/// `[n, 2n] × [−an, an]`.
pub fn weyl_terms(k: f64, n: f64, a: f64, quad_points: usize) -> Result<WeylTerms> {
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::InvalidInput(format!("n = {n} must be at least 1")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidInput(format!("a = {a} must be positive")));
    }
    if !k.is_finite() {
        return Err(Error::InvalidInput(format!("k = {k} is not finite")));
    }
    if quad_points < 2 {
        return Err(Error::InvalidInput("at least two quadrature points".into()));
    }
    let x_panels = Float::ceil(n).max(1.0) as usize;
    let chi = |x: f64| bump(x, 2.0 * n, n);
    let x0 = integrate(|x| Float::powi(chi(x).0, 2), n, 2.0 * n, x_panels, quad_points);
    let x1 = integrate(
        |x| {
            let c = chi(x);
            c.0 * c.2
        },
        n,
        2.0 * n,
        x_panels,
        quad_points,
    );
    let x2 = integrate(|x| Float::powi(chi(x).2, 2), n, 2.0 * n, x_panels, quad_points);
    let x3 = integrate(|x| Float::powi(chi(x).1, 2), n, 2.0 * n, x_panels, quad_points);
    let h = a * n;
    let y_panels = Float::ceil(h).max(1.0) as usize;
    let tilde = |y: f64| bump(y, h, -h);
    let weight = |y: f64| Float::exp(-4.0 * y);
    let p = |y: f64| {
        let c = tilde(y);
        4.0 * c.1 - c.2
    };
    let y0 = integrate(|y| weight(y) * Float::powi(p(y), 2), 0.0, h, y_panels, quad_points);
    let y1 = integrate(|y| weight(y) * p(y) * tilde(y).0, 0.0, h, y_panels, quad_points);
    let y2 = integrate(
        |y| weight(y) * Float::powi(tilde(y).0, 2),
        0.0,
        h,
        y_panels,
        quad_points,
    );
    let residual_sq = 2.0 * (x0 * y0 - 2.0 * x1 * y1 + x2 * y2 + 4.0 * k * k * x3 * y2);
    let norm_sq = 2.0 * x0 * y2;
    Ok(WeylTerms {
        residual_sq,
        norm_sq,
        quotient: residual_sq / norm_sq,
    })
}

pub fn weyl_quotient(k: f64, n: f64, a: f64, quad_points: usize) -> Result<f64> {
    Ok(weyl_terms(k, n, a, quad_points)?.quotient)
}

/// `a = ½ min |tan φ|` over the other branches pointing into the half-plane
/// of the first one (graph rotated so that branch 0 is the positive x-axis),
/// capped at 1.
pub fn default_aperture(graph: &StarGraph) -> f64 {
    let g = graph.rotated_to_first();
    let m = g.angles()[1..]
        .iter()
        .filter(|&&phi| Float::cos(phi) > 0.0)
        .map(|&phi| Float::abs(Float::tan(phi)))
        .fold(f64::INFINITY, f64::min);
    (0.5 * m).min(1.0)
}

/// Whether the support rectangle misses every other branch.
pub fn support_is_clear(graph: &StarGraph, a: f64) -> bool {
    let g = graph.rotated_to_first();
    g.angles()[1..]
        .iter()
        .all(|&phi| Float::cos(phi) <= 0.0 || Float::abs(Float::tan(phi)) > a)
}

/// [`weyl_terms`] on the first branch of `graph`; `a` defaults to
/// [`default_aperture`].
pub fn weyl_terms_on(graph: &StarGraph, k: f64, n: f64, a: Option<f64>, quad_points: usize) -> Result<WeylTerms> {
    let a = a.unwrap_or_else(|| default_aperture(graph));
    if !support_is_clear(graph, a) {
        return Err(Error::Geometry(format!(
            "support rectangle with a = {a} touches another branch"
        )));
    }
    weyl_terms(k, n, a, quad_points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::broken_line;

    #[test]
    fn step_derivatives_match_differences() {
        for &t in &[0.1, 0.3, 0.5, 0.77, 0.95] {
            let hh = 1e-5;
            let (f, d1, d2) = smooth_step(t);
            let (fp, d1p, _) = smooth_step(t + hh);
            let (fm, d1m, _) = smooth_step(t - hh);
            assert!(((fp - fm) / (2.0 * hh) - d1).abs() < 1e-7);
            assert!(((d1p - d1m) / (2.0 * hh) - d2).abs() < 1e-5);
            assert!((0.0..=1.0).contains(&f));
        }
        assert_eq!(smooth_step(0.5).0, 0.5);
    }

    #[test]
    fn collision_detection() {
        let g = broken_line(0.3, -1.0).unwrap();
        let a = default_aperture(&g);
        assert!(support_is_clear(&g, a));
        assert!(!support_is_clear(&g, 1.0));
        assert_eq!(default_aperture(&StarGraph::line(-1.0)), 1.0);
    }
}
