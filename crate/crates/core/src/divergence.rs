//! Sandwiched and Petz Rényi divergences, relative entropy, Araki–Masuda
//! norms, the closed-form optimizer of the variational formula and a
//! derivative-free search that recovers it numerically.
//!
//! The order is written in the `α` parametrization, `α ∈ [−1, 0) ∪ (0, 1)`,
//! with the conventional orders `n = 1/(1−α)` (sandwiched) and `1+α` (Petz).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    frobenius, hermitian_eig, hermitian_part, identity, real, trace_distance, ComplexMatrix,
    SpectralDecomposition, C64,
};
use crate::modular::{quadratic_form, RelativeModularOperator};
use crate::quadrature::{integral_power, QuadratureConfig};
use crate::quantum::{DensityMatrix, KrausChannel};
use crate::random::ginibre;

/// Inputs closer than this in Frobenius norm are treated as identical.
pub const EQUALITY_CUTOFF: f64 = 1e-12;
/// Smallest `|α|` accepted by the variational routines.
pub const VARIATIONAL_ALPHA_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RenyiOrder {
    alpha: f64,
}

impl RenyiOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        let ok = alpha.is_finite() && (-1.0..1.0).contains(&alpha) && alpha != 0.0;
        if !ok {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(RenyiOrder { alpha })
    }

    /// Order restricted to `|α| ∈ [1e-3, 1 − 1e-3]`.
    pub fn variational(alpha: f64) -> Result<Self> {
        let ord = Self::new(alpha)?;
        if alpha.abs() < VARIATIONAL_ALPHA_MIN || alpha.abs() > 1.0 - VARIATIONAL_ALPHA_MIN {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(ord)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Araki–Masuda exponent `p = 2/(1−α)`.
    pub fn p(&self) -> f64 {
        2.0 / (1.0 - self.alpha)
    }

    /// Conventional sandwiched order `n = 1/(1−α)`.
    pub fn n(&self) -> f64 {
        1.0 / (1.0 - self.alpha)
    }

    /// True when the variational formula is a supremum.
    pub fn is_sup(&self) -> bool {
        self.alpha > 0.0
    }
}

impl TryFrom<f64> for RenyiOrder {
    type Error = Error;
    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<RenyiOrder> for f64 {
    fn from(o: RenyiOrder) -> f64 {
        o.alpha
    }
}

fn ensure_same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    Ok(())
}

fn nearly_equal(rho: &DensityMatrix, sigma: &DensityMatrix) -> bool {
    rho.distance_to(sigma) < EQUALITY_CUTOFF
}

/// `Y = ρ^{1/2} σ^{-α} ρ^{1/2}`.
fn sandwich(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> ComplexMatrix {
    let r = rho.sqrt();
    hermitian_part(&(&r * sigma.powf(-alpha) * &r))
}

/// `D̃_α(ρ‖σ) = ((1−α)/α) ln Tr Y^{1/(1−α)}`.
pub fn sandwiched_renyi(rho: &DensityMatrix, sigma: &DensityMatrix, ord: RenyiOrder) -> Result<f64> {
    ensure_same_dim(rho, sigma)?;
    if nearly_equal(rho, sigma) {
        return Ok(0.0);
    }
    let a = ord.alpha();
    let y = hermitian_eig(&sandwich(rho, sigma, a))?;
    let tr: f64 = y.eigenvalues.iter().map(|&l| l.max(0.0).powf(ord.n())).sum();
    Ok((1.0 - a) / a * tr.ln())
}

/// `D̄_α(ρ‖σ) = (1/α) ln Tr[ρ^{1+α} σ^{-α}]`, evaluated as the quadratic form
/// of `Δ_{σ,ρ}^{-α}` at `|ρ^{1/2}⟩`.
pub fn petz_renyi(rho: &DensityMatrix, sigma: &DensityMatrix, ord: RenyiOrder) -> Result<f64> {
    ensure_same_dim(rho, sigma)?;
    if nearly_equal(rho, sigma) {
        return Ok(0.0);
    }
    Ok(quadratic_form(rho, sigma, rho, ord.alpha())?.ln() / ord.alpha())
}

/// `Tr ρ (ln ρ − ln σ)`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    ensure_same_dim(rho, sigma)?;
    if nearly_equal(rho, sigma) {
        return Ok(0.0);
    }
    Ok((rho.matrix() * (rho.log() - sigma.log())).trace().re)
}

/// Relative entropy as `−⟨ρ^{1/2}| ln Δ_{σ,ρ} |ρ^{1/2}⟩`.
pub fn relative_entropy_modular(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    ensure_same_dim(rho, sigma)?;
    if nearly_equal(rho, sigma) {
        return Ok(0.0);
    }
    let dop = RelativeModularOperator::new(sigma.clone(), rho.clone())?;
    let r = rho.sqrt();
    let log_delta = dop.apply_fn(|x| real(x.ln()), &r)?;
    Ok(-(r.adjoint() * log_delta).trace().re)
}

/// `‖ρ‖_{p,σ} = (Tr Y^{p/2})^{1/p}` with `Y = ρ^{1/2} σ^{2/p−1} ρ^{1/2}`.
pub fn araki_masuda_norm(rho: &DensityMatrix, sigma: &DensityMatrix, p: f64) -> Result<f64> {
    ensure_same_dim(rho, sigma)?;
    if !(p >= 1.0) || p == 2.0 || !p.is_finite() {
        return Err(Error::InvalidOrder(p));
    }
    let y = hermitian_eig(&sandwich(rho, sigma, 1.0 - 2.0 / p))?;
    let tr: f64 = y.eigenvalues.iter().map(|&l| l.max(0.0).powf(p / 2.0)).sum();
    Ok(tr.powf(1.0 / p))
}

/// Unique optimizer `ω_* = Y^{p/2} / Tr Y^{p/2}` of the variational formula.
#[derive(Debug, Clone)]
pub struct OptimizerResult {
    pub omega_star: DensityMatrix,
    pub y: ComplexMatrix,
    /// Quadratic form evaluated at `ω_*`.
    pub value: f64,
    /// `Tr Y^{p/2}`.
    pub normalizer: f64,
}

pub fn closed_form_optimizer(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    ord: RenyiOrder,
) -> Result<OptimizerResult> {
    ensure_same_dim(rho, sigma)?;
    let y = sandwich(rho, sigma, ord.alpha());
    let eig = hermitian_eig(&y)?;
    let powers: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).powf(ord.n())).collect();
    let normalizer: f64 = powers.iter().sum();
    let omega_star = DensityMatrix::from_spectrum(SpectralDecomposition {
        eigenvalues: powers.iter().map(|v| v / normalizer).collect(),
        eigenvectors: eig.eigenvectors,
    })?;
    let value = quadratic_form(rho, sigma, &omega_star, ord.alpha())?;
    Ok(OptimizerResult { omega_star, y, value, normalizer })
}

/// Optimal weight `a_*² = ρ^{-1/2} ω_* ρ^{-1/2}`, so that
/// `ω_* = ρ^{1/2} a_*² ρ^{1/2}`.
pub fn optimal_weight(rho: &DensityMatrix, sigma: &DensityMatrix, ord: RenyiOrder) -> Result<ComplexMatrix> {
    let a = optimal_weight_factor(rho, sigma, ord)?;
    Ok(hermitian_part(&(a.adjoint() * a)))
}

/// A factor `a_* = ω_*^{1/2} ρ^{-1/2}` of the optimal weight, `a_*² = a_*† a_*`.
pub fn optimal_weight_factor(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    ord: RenyiOrder,
) -> Result<ComplexMatrix> {
    let opt = closed_form_optimizer(rho, sigma, ord)?;
    Ok(opt.omega_star.sqrt() * rho.powf(-0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Cap on exploratory sweeps per restart.
    pub max_iterations: usize,
    /// Relative change of the objective over `window` sweeps that counts as
    /// converged.
    pub tolerance: f64,
    pub window: usize,
    pub initial_step: f64,
    pub min_step: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 8,
            max_iterations: 20_000,
            tolerance: 1e-10,
            window: 50,
            initial_step: 0.25,
            min_step: 1e-12,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VariationalResult {
    pub value: f64,
    pub omega_hat: DensityMatrix,
    pub evaluations: usize,
    pub converged_restarts: usize,
}

/// Objective of the search in the factor parametrization `ω = GG†/Tr GG†`.
struct FactorObjective<'a> {
    y: &'a ComplexMatrix,
    dim: usize,
    alpha: f64,
    sign: f64,
}

impl FactorObjective<'_> {
    fn omega(&self, x: &[f64]) -> ComplexMatrix {
        let d = self.dim;
        let g = ComplexMatrix::from_fn(d, d, |i, j| {
            let k = 2 * (i * d + j);
            C64::new(x[k], x[k + 1])
        });
        let w = &g * g.adjoint();
        let t = w.trace().re;
        w.unscale(t)
    }

    /// `sign · Tr[Y ω^α]`; larger is better. Rank-deficient `ω` is scored as
    /// the worst possible value.
    fn score(&self, x: &[f64]) -> f64 {
        let w = self.omega(x);
        let Ok(eig) = hermitian_eig(&w) else { return f64::NEG_INFINITY };
        if !(eig.min_eigenvalue() > 0.0) {
            return f64::NEG_INFINITY;
        }
        let v = &eig.eigenvectors;
        let yv = self.y * v;
        let mut total = 0.0;
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            let diag: C64 = (0..self.dim).map(|i| v[(i, k)].conj() * yv[(i, k)]).sum();
            total += lam.powf(self.alpha) * diag.re;
        }
        let s = self.sign * total;
        if s.is_finite() {
            s
        } else {
            f64::NEG_INFINITY
        }
    }
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// Pattern search with coordinate moves and geometric step decay.
fn pattern_search(obj: &FactorObjective, x0: Vec<f64>, cfg: &OptimizerConfig) -> (Vec<f64>, f64, usize, bool) {
    let mut x = x0;
    normalize(&mut x);
    let mut f = obj.score(&x);
    let mut evals = 1;
    let mut step = cfg.initial_step;
    let mut history = vec![f];
    let mut converged = false;

    for _ in 0..cfg.max_iterations {
        let base = x.clone();
        let f_base = f;
        for k in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut trial = x.clone();
                trial[k] += dir * step;
                let ft = obj.score(&trial);
                evals += 1;
                if ft > f {
                    x = trial;
                    f = ft;
                    break;
                }
            }
        }
        if f > f_base {
            // pattern move along the accepted displacement
            let jump: Vec<f64> = x.iter().zip(&base).map(|(a, b)| 2.0 * a - b).collect();
            let fj = obj.score(&jump);
            evals += 1;
            if fj > f {
                x = jump;
                f = fj;
            }
            normalize(&mut x);
        } else {
            step *= 0.5;
        }
        history.push(f);
        if step < cfg.min_step {
            converged = true;
            break;
        }
        if history.len() > cfg.window {
            let old = history[history.len() - 1 - cfg.window];
            if (f - old).abs() <= cfg.tolerance * f.abs().max(1e-300) && step < 1e-6 {
                converged = true;
                break;
            }
        }
    }
    (x, f, evals, converged)
}

/// Optimizes `ω ↦ Tr[ρ^{1/2}σ^{-α}ρ^{1/2}ω^α]` over states: a supremum for
/// `α > 0`, an infimum for `α < 0`.
pub fn variational_value(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    ord: RenyiOrder,
    cfg: &OptimizerConfig,
) -> Result<VariationalResult> {
    ensure_same_dim(rho, sigma)?;
    let ord = RenyiOrder::variational(ord.alpha())?;
    let d = rho.dim();
    let y = sandwich(rho, sigma, ord.alpha());
    let sign = if ord.is_sup() { 1.0 } else { -1.0 };
    let obj = FactorObjective { y: &y, dim: d, alpha: ord.alpha(), sign };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut evaluations = 0;
    let mut converged_restarts = 0;
    for r in 0..cfg.restarts.max(1) {
        // first restart starts from ρ, the rest from Ginibre factors
        let g = if r == 0 { rho.sqrt() } else { ginibre(d, d, &mut rng) + identity(d).scale(0.1) };
        let x0: Vec<f64> = (0..d * d)
            .flat_map(|k| {
                let z = g[(k / d, k % d)];
                [z.re, z.im]
            })
            .collect();
        let (x, f, evals, ok) = pattern_search(&obj, x0, cfg);
        evaluations += evals;
        converged_restarts += ok as usize;
        if best.as_ref().is_none_or(|(_, fb)| f > *fb) {
            best = Some((x, f));
        }
    }
    let (x, f) = best.expect("at least one restart");
    if converged_restarts == 0 || !f.is_finite() {
        return Err(Error::NonConvergence { best: sign * f, gap: f64::NAN });
    }
    let omega_hat = DensityMatrix::new(obj.omega(&x))?;
    Ok(VariationalResult { value: sign * f, omega_hat, evaluations, converged_restarts })
}

/// `D̃_α(ρ‖σ) − D̃_α(Λρ‖Λσ)`.
pub fn dpi_gap(rho: &DensityMatrix, sigma: &DensityMatrix, ch: &KrausChannel, ord: RenyiOrder) -> Result<f64> {
    let before = sandwiched_renyi(rho, sigma, ord)?;
    let after = sandwiched_renyi(&ch.apply_state(rho)?, &ch.apply_state(sigma)?, ord)?;
    Ok(before - after)
}

/// `‖m^α (quadrature) − m^α (spectral)‖_F`.
pub fn integral_representation_check(m: &ComplexMatrix, alpha: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let spectral = hermitian_eig(m)?.power(real(alpha))?;
    let quad = integral_power(m, alpha, cfg)?;
    Ok(frobenius(&(quad - spectral)))
}

/// Trace distance `½‖ω̂ − ω_*‖_1` between a variational and the closed-form
/// optimizer.
pub fn optimizer_distance(omega_hat: &DensityMatrix, opt: &OptimizerResult) -> f64 {
    trace_distance(omega_hat.matrix(), opt.omega_star.matrix())
}
