//! Gauss–Legendre and periodic trapezoid rules with order doubling.

use std::f64::consts::{PI, TAU};

use crate::{Error, Result};

/// Convergence target for successive doublings (sup norm).
pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_GL_ORDER: usize = 1 << 12;
const MAX_TRAPEZOID_NODES: usize = 1 << 16;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(order, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
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
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// `∫_a^b f` with a fixed-order Gauss–Legendre rule.
pub fn gauss_legendre_fixed<F>(a: f64, b: f64, order: usize, mut f: F) -> f64
where
    F: FnMut(f64) -> f64,
{
    let (nodes, weights) = gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(&weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Vector-valued `∫_a^b f`, doubling the Gauss–Legendre order from `start`
/// until two successive doublings each change the result by less than `tol`.
pub fn gauss_legendre_adaptive<F>(a: f64, b: f64, start: usize, tol: f64, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Vec<f64>,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut rule = |order: usize| -> Vec<f64> {
        let (nodes, weights) = gauss_legendre(order);
        let mut acc: Vec<f64> = Vec::new();
        for (x, w) in nodes.iter().zip(&weights) {
            let v = f(mid + half * x);
            if acc.is_empty() {
                acc = vec![0.0; v.len()];
            }
            for (s, vi) in acc.iter_mut().zip(&v) {
                *s += w * half * vi;
            }
        }
        acc
    };
    let mut order = start.max(2);
    let mut prev = rule(order);
    let mut agreed = false;
    loop {
        order *= 2;
        let next = rule(order);
        let change = sup_diff(&prev, &next);
        if change < tol {
            if agreed {
                return Ok(next);
            }
            agreed = true;
        } else {
            agreed = false;
        }
        if order >= MAX_GL_ORDER {
            return Err(Error::QuadratureNotConverged { nodes: order, change });
        }
        prev = next;
    }
}

/// Mean of a `2π`-periodic vector-valued `f` over one period, doubling the
/// number of equispaced nodes from `start` until two successive doublings
/// each change the result by less than `tol`. Nested node sets let each doubling reuse earlier evaluations.
pub fn periodic_mean_adaptive<F>(start: usize, tol: f64, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Vec<f64>,
{
    let mut nodes = start.max(4);
    let mut sum: Vec<f64> = Vec::new();
    for j in 0..nodes {
        let v = f(TAU * j as f64 / nodes as f64);
        if sum.is_empty() {
            sum = vec![0.0; v.len()];
        }
        for (s, vi) in sum.iter_mut().zip(&v) {
            *s += vi;
        }
    }
    let mut prev: Vec<f64> = sum.iter().map(|s| s / nodes as f64).collect();
    let mut agreed = false;
    loop {
        // new nodes are the odd multiples of π / nodes
        for j in 0..nodes {
            let v = f(TAU * (2 * j + 1) as f64 / (2 * nodes) as f64);
            for (s, vi) in sum.iter_mut().zip(&v) {
                *s += vi;
            }
        }
        nodes *= 2;
        let next: Vec<f64> = sum.iter().map(|s| s / nodes as f64).collect();
        let change = sup_diff(&prev, &next);
        if change < tol {
            if agreed {
                return Ok(next);
            }
            agreed = true;
        } else {
            agreed = false;
        }
        if nodes >= MAX_TRAPEZOID_NODES {
            return Err(Error::QuadratureNotConverged { nodes, change });
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for order in [1, 2, 5, 12, 33] {
            let (nodes, weights) = gauss_legendre(order);
            assert_abs_diff_eq!(weights.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            for degree in 0..(2 * order) {
                let exact = if degree % 2 == 1 { 0.0 } else { 2.0 / (degree as f64 + 1.0) };
                let approx: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * x.powi(degree as i32)).sum();
                assert_abs_diff_eq!(approx, exact, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn adaptive_gauss_legendre_gaussian() {
        let v = gauss_legendre_adaptive(-6.0, 6.0, 8, 1e-12, |x| vec![(-x * x).exp()]).unwrap();
        assert_abs_diff_eq!(v[0], PI.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn periodic_mean_is_spectral() {
        // mean of exp(κ cos θ) is I0(κ); for κ = 1, I0 = 1.2660658777520082
        let v = periodic_mean_adaptive(4, 1e-14, |t| vec![t.cos().exp(), (3.0 * t).sin()]).unwrap();
        assert_abs_diff_eq!(v[0], 1.266_065_877_752_008_2, epsilon = 1e-14);
        assert_abs_diff_eq!(v[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn non_convergence_is_reported() {
        let err = periodic_mean_adaptive(4, 1e-12, |t| vec![t.sin().abs().sqrt()]).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }
}
