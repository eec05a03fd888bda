//! Seeded sampling of states, unitaries and channels.
//!
//! Every Monte-Carlo trial draws from its own ChaCha stream keyed by
//! `(seed, trial)`, so results do not depend on scheduling order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c, frobenius, identity, ComplexMatrix, C64};
use crate::quantum::{DensityMatrix, KrausChannel};

/// Eigenvalue below which a sampled state is mixed with the identity.
pub const REGULARIZE_BELOW: f64 = 1e-8;
/// Mixing weight used by the regularization.
pub const REGULARIZE_WEIGHT: f64 = 1e-6;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im).unscale(std::f64::consts::SQRT_2)
}

/// Complex Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

pub fn random_operator<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ginibre(dim, dim, rng)
}

/// `ρ = GG†/Tr[GG†]`, mixed with `𝕀/d` when nearly singular.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(Error::DegenerateSample("dimension must be positive".into()));
    }
    let g = ginibre(dim, dim, rng);
    let gg = &g * g.adjoint();
    let t = gg.trace().re;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::DegenerateSample(format!("Ginibre trace {t}")));
    }
    let rho = crate::linalg::hermitian_part(&gg.unscale(t));
    let min_eig = crate::linalg::hermitian_eig(&rho)?.min_eigenvalue();
    let rho = if min_eig < REGULARIZE_BELOW {
        log::debug!("regularizing sampled state with min eigenvalue {min_eig:.3e}");
        rho.scale(1.0 - REGULARIZE_WEIGHT) + identity(dim).scale(REGULARIZE_WEIGHT / dim as f64)
    } else {
        rho
    };
    DensityMatrix::new(rho).map_err(|e| Error::DegenerateSample(e.to_string()))
}

/// Random positive definite matrix `GG†/d + 𝕀/(10 d)` (not normalized).
pub fn random_positive<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    let n = dim as f64;
    crate::linalg::hermitian_part(&(&g * g.adjoint()).unscale(n)) + identity(dim).scale(0.1 / n)
}

/// Matrix with orthonormal columns from the QR factor of a Ginibre sample,
/// with the phase ambiguity fixed so the distribution is Haar.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if rows < cols {
        return Err(Error::DimensionMismatch { expected: cols, found: rows });
    }
    let qr = ginibre(rows, cols, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..cols {
        let d = r[(j, j)];
        let n = d.norm();
        if n == 0.0 {
            return Err(Error::DegenerateSample("rank-deficient Gaussian sample".into()));
        }
        let phase = d / n;
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    if frobenius(&(q.adjoint() * &q - identity(cols))) > 1e-10 {
        return Err(Error::DegenerateSample("orthonormalization lost accuracy".into()));
    }
    Ok(q)
}

pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexMatrix> {
    random_isometry(dim, dim, rng)
}

/// Channel `in_dim → out_dim` obtained by slicing a random isometry
/// `in_dim → out_dim ⊗ env_dim` into Kraus operators.
pub fn random_channel<R: Rng + ?Sized>(
    in_dim: usize,
    out_dim: usize,
    env_dim: usize,
    rng: &mut R,
) -> Result<KrausChannel> {
    if in_dim == 0 || out_dim == 0 || env_dim == 0 {
        return Err(Error::InvalidChannel("dimensions must be positive".into()));
    }
    if out_dim * env_dim < in_dim {
        return Err(Error::InvalidChannel(format!(
            "out_dim * env_dim = {} cannot host an isometry from dimension {in_dim}",
            out_dim * env_dim
        )));
    }
    let w = random_isometry(out_dim * env_dim, in_dim, rng)?;
    let kraus = (0..env_dim)
        .map(|k| ComplexMatrix::from_fn(out_dim, in_dim, |i, j| w[(i * env_dim + k, j)]))
        .collect();
    KrausChannel::new(kraus)
}
