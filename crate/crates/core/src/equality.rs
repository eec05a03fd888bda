//! Equality conditions for the data-processing inequality of the sandwiched
//! divergence: geometric means, algebraic residuals, recovery maps and
//! constructors of triples that saturate the inequality.
//!
//! Every residual is a normalized Frobenius norm of `lhs − rhs`, see
//! [`normalized_residual`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::divergence::{dpi_gap, RenyiOrder};
use crate::error::{Error, Result};
use crate::linalg::{
    c, ensure_dim, ensure_square, hermitian_eig, hermitian_part, identity, kron, normalized_residual,
    product_power, real, trace_norm, ComplexMatrix, Subsystem, C64, POSITIVITY_FLOOR,
};
use crate::modular::{
    build_compression, compressed_power_residual, jensen_commutator_norm, RelativeModularOperator,
};
use crate::quantum::{DensityMatrix, KrausChannel};
use crate::random::{random_density, random_unitary};

/// Residual bound used to certify a constructed triple as recoverable.
pub const CERTIFICATE_TOL: f64 = 1e-9;
/// Eigenvalues of dilated (rank-deficient) states at or below this fraction
/// of the largest are treated as exact zeros.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Exponents at which the compressed-power residual enters a report.
pub const COMPRESSED_POWER_TS: [f64; 3] = [0.25, 0.5, 0.75];

/// `A #_λ B = A^{1/2} (A^{-1/2} B A^{-1/2})^λ A^{1/2}` for any real `λ`.
pub fn geometric_mean(a: &ComplexMatrix, b: &ComplexMatrix, lam: f64) -> Result<ComplexMatrix> {
    let n = ensure_square(a)?;
    ensure_dim(b, n)?;
    if !lam.is_finite() {
        return Err(Error::Format(format!("geometric-mean weight {lam} is not finite")));
    }
    let ea = hermitian_eig(a)?;
    let half = ea.power(real(0.5))?;
    let ihalf = ea.power(real(-0.5))?;
    let min_b = hermitian_eig(b)?.min_eigenvalue();
    if !(min_b >= POSITIVITY_FLOOR) {
        return Err(Error::NotPositiveDefinite { min_eig: min_b, floor: POSITIVITY_FLOOR });
    }
    let inner = hermitian_part(&(&ihalf * b * &ihalf));
    let p = hermitian_eig(&inner)?.power(real(lam))?;
    Ok(hermitian_part(&(&half * p * &half)))
}

/// `σ^{-α/2} (σ^{-α/2} ρ σ^{-α/2})^{α/(1−α)} σ^{-α/2}`.
pub fn t1_operator(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> ComplexMatrix {
    let s = sigma.powf(-alpha / 2.0);
    let inner = hermitian_part(&(&s * rho.matrix() * &s));
    let p = hermitian_eig(&inner)
        .and_then(|e| e.power(real(alpha / (1.0 - alpha))))
        .expect("congruence of a positive definite matrix is positive definite");
    &s * p * &s
}

/// `σ^β (ρ σ^{-α})^{β/(α−1)}`.
pub fn t3_operator(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64, beta: C64) -> Result<ComplexMatrix> {
    let z = beta / (alpha - 1.0);
    Ok(sigma.power(beta) * product_power(rho.matrix(), sigma.matrix(), alpha, z)?)
}

fn outputs(rho: &DensityMatrix, sigma: &DensityMatrix, ch: &KrausChannel) -> Result<(DensityMatrix, DensityMatrix)> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    Ok((ch.apply_state(rho)?, ch.apply_state(sigma)?))
}

/// Residual of `t1(ρ, σ) = Λ*(t1(Λρ, Λσ))`.
pub fn t1_residual(rho: &DensityMatrix, sigma: &DensityMatrix, ch: &KrausChannel, ord: RenyiOrder) -> Result<f64> {
    let (lr, ls) = outputs(rho, sigma, ch)?;
    let a = ord.alpha();
    let lhs = t1_operator(rho, sigma, a);
    let rhs = ch.adjoint_apply(&t1_operator(&lr, &ls, a))?;
    Ok(normalized_residual(&lhs, &rhs))
}

fn reduced_pair(
    rho_ab: &DensityMatrix,
    sigma_ab: &DensityMatrix,
    dims: (usize, usize),
) -> Result<(DensityMatrix, DensityMatrix)> {
    let n = dims.0 * dims.1;
    for m in [rho_ab, sigma_ab] {
        if m.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
        }
    }
    Ok((rho_ab.reduced(dims, Subsystem::B)?, sigma_ab.reduced(dims, Subsystem::B)?))
}

/// Residual of `(ρ_A #_{1/(1−α)} σ_A^α) ⊗ 𝕀_B = ρ_AB #_{1/(1−α)} σ_AB^α`.
pub fn t1_geo_residual(
    rho_ab: &DensityMatrix,
    sigma_ab: &DensityMatrix,
    dims: (usize, usize),
    ord: RenyiOrder,
) -> Result<f64> {
    let (rho_a, sigma_a) = reduced_pair(rho_ab, sigma_ab, dims)?;
    let (a, n) = (ord.alpha(), ord.n());
    let lhs = kron(&geometric_mean(rho_a.matrix(), &sigma_a.powf(a), n)?, &identity(dims.1));
    let rhs = geometric_mean(rho_ab.matrix(), &sigma_ab.powf(a), n)?;
    Ok(normalized_residual(&lhs, &rhs))
}

/// Residual of `σ^β(ρσ^{-α})^{β/(α−1)} = Λ*(Λσ^β [Λρ Λσ^{-α}]^{β/(α−1)})`.
pub fn t3_residual(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    ch: &KrausChannel,
    ord: RenyiOrder,
    beta: C64,
) -> Result<f64> {
    check_beta(beta)?;
    let (lr, ls) = outputs(rho, sigma, ch)?;
    let a = ord.alpha();
    let lhs = t3_operator(rho, sigma, a, beta)?;
    let rhs = ch.adjoint_apply(&t3_operator(&lr, &ls, a, beta)?)?;
    Ok(normalized_residual(&lhs, &rhs))
}

/// The same residual evaluated through the Stinespring isometry `V`: the
/// channel becomes a partial trace over the environment of `VρV†`, and the
/// input side is computed from the rank-deficient dilated states with
/// powers taken on their support, then compressed by `V† · V`.
pub fn t3_residual_dilated(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    ch: &KrausChannel,
    ord: RenyiOrder,
    beta: C64,
) -> Result<f64> {
    check_beta(beta)?;
    if rho.dim() != sigma.dim() || rho.dim() != ch.in_dim() {
        return Err(Error::DimensionMismatch { expected: ch.in_dim(), found: rho.dim() });
    }
    let v = ch.stinespring();
    let a = ord.alpha();
    let z = beta / (a - 1.0);
    let as_output = |m: ComplexMatrix| {
        DensityMatrix::new(m).map_err(|e| match e {
            Error::NotPositiveDefinite { min_eig, .. } => Error::SingularOutputState { min_eig },
            other => other,
        })
    };
    let lr = as_output(v.apply(rho.matrix())?)?;
    let ls = as_output(v.apply(sigma.matrix())?)?;
    let lhs = v.adjoint_apply(&t3_operator(&lr, &ls, a, beta)?)?;

    let rho_d = v.dilate(rho.matrix())?;
    let sigma_d = hermitian_eig(&hermitian_part(&v.dilate(sigma.matrix())?))?;
    let cut = SUPPORT_CUTOFF * sigma_d.max_eigenvalue();
    let s_beta = sigma_d.pseudo_power(beta, cut);
    let s_half = sigma_d.pseudo_power(real(a / 2.0), cut);
    let s_mhalf = sigma_d.pseudo_power(real(-a / 2.0), cut);
    let inner = hermitian_eig(&hermitian_part(&(&s_mhalf * rho_d * &s_mhalf)))?;
    let inner_pow = inner.pseudo_power(z, SUPPORT_CUTOFF * inner.max_eigenvalue());
    let full = s_beta * s_half * inner_pow * s_mhalf;
    let rhs = v.compress(&full)?;
    Ok(normalized_residual(&rhs, &lhs))
}

fn check_beta(beta: C64) -> Result<()> {
    if !(beta.re.is_finite() && beta.im.is_finite()) {
        return Err(Error::Format(format!("exponent {beta} is not finite")));
    }
    Ok(())
}

/// Residual of `σ_AB^β ρ_AB^{-β} = σ_A^β ρ_A^{-β} ⊗ 𝕀_B`.
pub fn petz_beta_residual(
    rho_ab: &DensityMatrix,
    sigma_ab: &DensityMatrix,
    dims: (usize, usize),
    beta: C64,
) -> Result<f64> {
    check_beta(beta)?;
    let (rho_a, sigma_a) = reduced_pair(rho_ab, sigma_ab, dims)?;
    let lhs = sigma_ab.power(beta) * rho_ab.power(-beta);
    let rhs = kron(&(sigma_a.power(beta) * rho_a.power(-beta)), &identity(dims.1));
    Ok(normalized_residual(&lhs, &rhs))
}

/// Petz map `σ^{1/2} Λ*(Λσ^{-1/2} y Λσ^{-1/2}) σ^{1/2}`.
pub fn petz_recover(sigma: &DensityMatrix, ch: &KrausChannel, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    let out = ch.apply_state(sigma)?;
    ensure_dim(y, out.dim())?;
    let s = out.powf(-0.5);
    let r = sigma.sqrt();
    Ok(&r * ch.adjoint_apply(&(&s * y * &s))? * &r)
}

/// `σ_AB^{1−α} (σ_A^{α−1} x σ_A^{-α} ⊗ 𝕀_B) σ_AB^α`; the Petz map for `Tr_B`
/// at `α = 1/2`.
pub fn alpha_recover(
    sigma_ab: &DensityMatrix,
    dims: (usize, usize),
    ord: RenyiOrder,
    x_a: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let n = dims.0 * dims.1;
    if sigma_ab.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: sigma_ab.dim() });
    }
    ensure_dim(x_a, dims.0)?;
    let a = ord.alpha();
    let sigma_a = sigma_ab.reduced(dims, Subsystem::B)?;
    let middle = sigma_a.powf(a - 1.0) * x_a * sigma_a.powf(-a);
    Ok(sigma_ab.powf(1.0 - a) * kron(&middle, &identity(dims.1)) * sigma_ab.powf(a))
}

/// Residual of `R_α(ρ_A) = ρ_AB`.
pub fn necessary1_residual(
    rho_ab: &DensityMatrix,
    sigma_ab: &DensityMatrix,
    dims: (usize, usize),
    ord: RenyiOrder,
) -> Result<f64> {
    let (rho_a, _) = reduced_pair(rho_ab, sigma_ab, dims)?;
    let rec = alpha_recover(sigma_ab, dims, ord, rho_a.matrix())?;
    Ok(normalized_residual(&rec, rho_ab.matrix()))
}

/// Residual of `σ^{α−1} ρ σ^{-α} = Λ*(Λσ^{α−1} Λρ Λσ^{-α})`, the channel
/// form of [`necessary1_residual`].
pub fn necessary1_residual_channel(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    ch: &KrausChannel,
    ord: RenyiOrder,
) -> Result<f64> {
    let (lr, ls) = outputs(rho, sigma, ch)?;
    let a = ord.alpha();
    let lhs = sigma.powf(a - 1.0) * rho.matrix() * sigma.powf(-a);
    let rhs = ch.adjoint_apply(&(ls.powf(a - 1.0) * lr.matrix() * ls.powf(-a)))?;
    Ok(normalized_residual(&lhs, &rhs))
}

/// Residual of `σ_A ρ_A^{-1} ⊗ 𝕀_B = σ_AB ρ_AB^{-1}`.
pub fn necessary2_residual(rho_ab: &DensityMatrix, sigma_ab: &DensityMatrix, dims: (usize, usize)) -> Result<f64> {
    let (rho_a, sigma_a) = reduced_pair(rho_ab, sigma_ab, dims)?;
    let lhs = kron(&(sigma_a.matrix() * rho_a.inverse()), &identity(dims.1));
    let rhs = sigma_ab.matrix() * rho_ab.inverse();
    Ok(normalized_residual(&lhs, &rhs))
}

/// Residual of `σ ρ^{-1} = Λ*(Λσ Λρ^{-1})`.
pub fn necessary2_residual_channel(rho: &DensityMatrix, sigma: &DensityMatrix, ch: &KrausChannel) -> Result<f64> {
    let (lr, ls) = outputs(rho, sigma, ch)?;
    let lhs = sigma.matrix() * rho.inverse();
    let rhs = ch.adjoint_apply(&(ls.matrix() * lr.inverse()))?;
    Ok(normalized_residual(&lhs, &rhs))
}

/// `{−1, −1/2, −α, α−1, 1−α, 1/2, 1, i/2, 1/2 + i}`.
pub fn default_beta_grid(alpha: f64) -> Vec<C64> {
    vec![
        real(-1.0),
        real(-0.5),
        real(-alpha),
        real(alpha - 1.0),
        real(1.0 - alpha),
        real(0.5),
        real(1.0),
        c(0.0, 0.5),
        c(0.5, 1.0),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoverableKind {
    /// `ρ_A ⊗ τ`, `σ_A ⊗ τ`.
    Product,
    /// Two product blocks on orthogonal subspaces of `A`, each with its own
    /// `τ_i`, mixed with independent weights for `ρ` and `σ`.
    Blocked,
    /// A product pair conjugated by `U_A ⊗ 𝕀_B`.
    ConjugatedProduct,
}

impl RecoverableKind {
    pub const ALL: [RecoverableKind; 3] =
        [RecoverableKind::Product, RecoverableKind::Blocked, RecoverableKind::ConjugatedProduct];

    pub fn name(&self) -> &'static str {
        match self {
            RecoverableKind::Product => "product",
            RecoverableKind::Blocked => "blocked",
            RecoverableKind::ConjugatedProduct => "conjugated-product",
        }
    }
}

impl fmt::Display for RecoverableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RecoverableKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RecoverableKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown triple kind '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct RecoverableTriple {
    pub kind: RecoverableKind,
    pub dims: (usize, usize),
    pub rho_ab: DensityMatrix,
    pub sigma_ab: DensityMatrix,
    /// `‖R_{σ,Tr_B}(ρ_A) − ρ_AB‖_F` at construction.
    pub certificate: f64,
}

impl RecoverableTriple {
    pub fn channel(&self) -> KrausChannel {
        KrausChannel::partial_trace(self.dims.0, self.dims.1)
    }
}

/// Splits `n` into two nearly equal nonempty parts.
fn block_sizes(n: usize) -> [usize; 2] {
    [n.div_ceil(2), n / 2]
}

fn simplex_pair<R: Rng + ?Sized>(rng: &mut R) -> [f64; 2] {
    let x: f64 = rng.random_range(0.2..0.8);
    [x, 1.0 - x]
}

/// Builds a pair that is exactly recoverable under `Tr_B`.
pub fn build_recoverable_triple<R: Rng + ?Sized>(
    kind: RecoverableKind,
    dims: (usize, usize),
    rng: &mut R,
) -> Result<RecoverableTriple> {
    let (d_a, d_b) = dims;
    if d_a == 0 || d_b == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    let (rho_ab, sigma_ab) = match kind {
        RecoverableKind::Product | RecoverableKind::ConjugatedProduct => {
            let tau = random_density(d_b, rng)?;
            let rho = random_density(d_a, rng)?.tensor(&tau);
            let sigma = random_density(d_a, rng)?.tensor(&tau);
            if kind == RecoverableKind::Product {
                (rho, sigma)
            } else {
                let u = kron(&random_unitary(d_a, rng)?, &identity(d_b));
                (rho.conjugate(&u)?, sigma.conjugate(&u)?)
            }
        }
        RecoverableKind::Blocked => {
            if d_a < 2 {
                return Err(Error::DimensionMismatch { expected: 2, found: d_a });
            }
            let p = simplex_pair(rng);
            let q = simplex_pair(rng);
            let mut rho = ComplexMatrix::zeros(d_a * d_b, d_a * d_b);
            let mut sigma = rho.clone();
            let mut offset = 0;
            for (i, size) in block_sizes(d_a).into_iter().enumerate() {
                let tau = random_density(d_b, rng)?;
                let embed = ComplexMatrix::from_fn(d_a, size, |r, k| real((r == offset + k) as u8 as f64));
                let lift = |m: &DensityMatrix| kron(&(&embed * m.matrix() * embed.adjoint()), tau.matrix());
                rho += lift(&random_density(size, rng)?).scale(p[i]);
                sigma += lift(&random_density(size, rng)?).scale(q[i]);
                offset += size;
            }
            (DensityMatrix::new(rho)?, DensityMatrix::new(sigma)?)
        }
    };
    let ch = KrausChannel::partial_trace(d_a, d_b);
    let recovered = petz_recover(&sigma_ab, &ch, &ch.apply(rho_ab.matrix())?)?;
    let certificate = (recovered - rho_ab.matrix()).norm();
    if !(certificate <= CERTIFICATE_TOL) {
        return Err(Error::CertificateFailed(certificate));
    }
    Ok(RecoverableTriple { kind, dims, rho_ab, sigma_ab, certificate })
}

/// Residuals of every equality condition at one order `α`.
///
/// `t3` and `petz_beta` are indexed like `beta_grid`. Fields that only make
/// sense for a partial trace are `None` for other channels. `dpi_gap` is the
/// signed gap; the remaining entries are nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub alpha: f64,
    pub beta_grid: Vec<C64>,
    pub t1: f64,
    pub t1_geo: Option<f64>,
    pub t3: Vec<f64>,
    pub petz_beta: Option<Vec<f64>>,
    pub necessary1: f64,
    pub necessary2: f64,
    pub commutator: Option<f64>,
    /// Largest compressed-power residual over [`COMPRESSED_POWER_TS`].
    pub compressed_power: Option<f64>,
    pub dpi_gap: f64,
    /// `‖R_{σ,Λ}(Λρ) − ρ‖_1`.
    pub recovery_err: f64,
}

/// One row of the flat serialization of a [`ResidualReport`]: the β-indexed
/// residuals at one grid point alongside the β-independent ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatResidualRow {
    pub alpha: f64,
    pub beta_re: f64,
    pub beta_im: f64,
    pub t1: f64,
    pub t1_geo: Option<f64>,
    pub t3: f64,
    pub petz_beta: Option<f64>,
    pub necessary1: f64,
    pub necessary2: f64,
    pub commutator: Option<f64>,
    pub compressed_power: Option<f64>,
    pub dpi_gap: f64,
    pub recovery_err: f64,
}

/// Outcome of the two implications between a vanishing gap and vanishing
/// residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Consistency {
    pub gap_implies_residuals: bool,
    pub residuals_imply_gap: bool,
}

impl Consistency {
    pub fn holds(&self) -> bool {
        self.gap_implies_residuals && self.residuals_imply_gap
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

impl ResidualReport {
    pub fn t3_max(&self) -> f64 {
        max_of(&self.t3)
    }

    /// β at which `t3` is largest.
    pub fn t3_argmax(&self) -> Option<C64> {
        self.t3
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| self.beta_grid[i])
    }

    pub fn petz_beta_max(&self) -> Option<f64> {
        self.petz_beta.as_deref().map(max_of)
    }

    /// Largest equality residual, the gap and the recovery error excluded.
    pub fn max_equality_residual(&self) -> f64 {
        let mut all = vec![self.t1, self.t3_max(), self.necessary1, self.necessary2];
        all.extend(self.t1_geo);
        all.extend(self.petz_beta_max());
        all.extend(self.commutator);
        all.extend(self.compressed_power);
        max_of(&all)
    }

    /// All entries at most `tol`.
    pub fn is_saturated(&self, tol: f64) -> bool {
        self.dpi_gap <= tol && self.recovery_err <= tol && self.max_equality_residual() <= tol
    }

    /// A gap below `1e-9` forces every residual below `1e-7`, and `t3`
    /// below `1e-9` on the grid forces a gap below `1e-7`.
    pub fn consistency(&self) -> Consistency {
        let gap_implies_residuals = self.dpi_gap > 1e-9 || self.max_equality_residual() <= 1e-7;
        let residuals_imply_gap = self.t3_max() > 1e-9 || self.dpi_gap <= 1e-7;
        Consistency { gap_implies_residuals, residuals_imply_gap }
    }

    pub fn flat_rows(&self) -> Vec<FlatResidualRow> {
        self.beta_grid
            .iter()
            .enumerate()
            .map(|(i, b)| FlatResidualRow {
                alpha: self.alpha,
                beta_re: b.re,
                beta_im: b.im,
                t1: self.t1,
                t1_geo: self.t1_geo,
                t3: self.t3[i],
                petz_beta: self.petz_beta.as_ref().map(|v| v[i]),
                necessary1: self.necessary1,
                necessary2: self.necessary2,
                commutator: self.commutator,
                compressed_power: self.compressed_power,
                dpi_gap: self.dpi_gap,
                recovery_err: self.recovery_err,
            })
            .collect()
    }
}

/// Evaluates every equality diagnostic for `(ρ, σ, Λ)` at order `α`.
pub fn full_report(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    ch: &KrausChannel,
    ord: RenyiOrder,
    beta_grid: &[C64],
) -> Result<ResidualReport> {
    let (lr, _) = outputs(rho, sigma, ch)?;
    let t3 = beta_grid
        .iter()
        .map(|&b| t3_residual(rho, sigma, ch, ord, b))
        .collect::<Result<Vec<_>>>()?;
    let recovered = petz_recover(sigma, ch, lr.matrix())?;
    let recovery_err = trace_norm(&(recovered - rho.matrix()));

    let mut report = ResidualReport {
        alpha: ord.alpha(),
        beta_grid: beta_grid.to_vec(),
        t1: t1_residual(rho, sigma, ch, ord)?,
        t1_geo: None,
        t3,
        petz_beta: None,
        // the σ^{α−1}·σ^{-α} form: same zero set as the recovery form, without
        // multiplying large intermediate powers back down to ρ
        necessary1: necessary1_residual_channel(rho, sigma, ch, ord)?,
        necessary2: 0.0,
        commutator: None,
        compressed_power: None,
        dpi_gap: dpi_gap(rho, sigma, ch, ord)?,
        recovery_err,
    };

    match ch.partial_trace_dims() {
        Some(dims) => {
            report.t1_geo = Some(t1_geo_residual(rho, sigma, dims, ord)?);
            report.petz_beta = Some(
                beta_grid
                    .iter()
                    .map(|&b| petz_beta_residual(rho, sigma, dims, b))
                    .collect::<Result<Vec<_>>>()?,
            );
            report.necessary2 = necessary2_residual(rho, sigma, dims)?;
            let ci = build_compression(rho, dims.0, dims.1)?;
            let dop = RelativeModularOperator::new(sigma.clone(), rho.clone())?;
            report.commutator = Some(jensen_commutator_norm(&ci, &dop)?);
            let powers = COMPRESSED_POWER_TS
                .iter()
                .map(|&t| compressed_power_residual(&ci, &dop, t))
                .collect::<Result<Vec<_>>>()?;
            report.compressed_power = Some(max_of(&powers));
        }
        None => {
            report.necessary2 = necessary2_residual_channel(rho, sigma, ch)?;
        }
    }
    Ok(report)
}

/// Smallest eigenvalue of the Hermitian part of `R_α(x)`; the map is not
/// Hermiticity-preserving for `α ≠ 1/2`, so this is only a probe.
pub fn alpha_recover_min_eig(
    sigma_ab: &DensityMatrix,
    dims: (usize, usize),
    ord: RenyiOrder,
    x_a: &ComplexMatrix,
) -> Result<f64> {
    let out = alpha_recover(sigma_ab, dims, ord, x_a)?;
    Ok(hermitian_eig(&hermitian_part(&out))?.min_eigenvalue())
}
