//! Gauss–Legendre rules and the resolvent-integral form of matrix powers.
//!
//! For `x > 0`,
//!
//! ```text
//! x^α =  sin(πα)/π ∫_0^∞ t^α (1/t − 1/(t+x)) dt,   0 < α < 1
//! x^α = −sin(πα)/π ∫_0^∞ t^α / (t+x) dt,           −1 < α < 0
//! ```
//!
//! The half-line is split at `t = 1`; the tail is mapped back to `[0, 1]` by
//! `t = 1/s`. On each piece the algebraic endpoint factor `s^ν` is absorbed
//! by `s = r^{1/(ν+1)}`, which leaves a bounded integrand that the
//! Gauss–Legendre rule handles at spectral speed.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{ensure_square, identity, is_finite, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Nodes per piece of the split integral.
    pub nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { nodes: 200 }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::QuadratureFailure("need at least one node".into()));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            let mut converged = false;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    converged = true;
                    break;
                }
            }
            if !converged {
                let (_, d) = legendre(n, x);
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] → [0, 1]
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Ok(GaussLegendre { nodes, weights })
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `∫_0^1 s^ν k(s) ds` for `ν > −1`, via `s = r^{1/(ν+1)}`.
fn weighted_piece<F>(rule: &GaussLegendre, nu: f64, dim: usize, k: F) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> Result<ComplexMatrix>,
{
    let q = 1.0 / (nu + 1.0);
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += k(r.powf(q))?.scale(w);
    }
    Ok(acc.scale(q))
}

/// `(shift·𝕀 + scale·m)^{-1}`
fn resolvent(m: &ComplexMatrix, shift: f64, scale: f64) -> Result<ComplexMatrix> {
    (identity(m.nrows()).scale(shift) + m.scale(scale))
        .try_inverse()
        .ok_or_else(|| Error::QuadratureFailure("singular resolvent".into()))
}

/// `m^α` assembled from resolvents `(t + m)^{-1}` only.
pub fn integral_power(m: &ComplexMatrix, alpha: f64, cfg: &QuadratureConfig) -> Result<ComplexMatrix> {
    let n = ensure_square(m)?;
    if !(alpha > -1.0 && alpha < 1.0) || alpha == 0.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    let rule = GaussLegendre::new(cfg.nodes)?;
    let positive = alpha > 0.0;
    let numerator = |inv: ComplexMatrix| if positive { m * inv } else { inv };

    // head: t ∈ [0, 1]; tail: t = 1/s with s ∈ (0, 1]
    let (head_nu, tail_nu) = if positive { (alpha - 1.0, -alpha) } else { (alpha, -alpha - 1.0) };
    let head = weighted_piece(&rule, head_nu, n, |t| Ok(numerator(resolvent(m, t, 1.0)?)))?;
    let tail = weighted_piece(&rule, tail_nu, n, |s| Ok(numerator(resolvent(m, 1.0, s)?)))?;

    let sign = if positive { 1.0 } else { -1.0 };
    let out = (head + tail).scale(sign * (PI * alpha).sin() / PI);
    if !is_finite(&out) {
        return Err(Error::QuadratureFailure("non-finite quadrature sum".into()));
    }
    Ok(out)
}
