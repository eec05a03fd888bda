//! Dense complex linear algebra on small Hermitian matrices.
//!
//! Everything here is built on [`nalgebra::DMatrix`] with [`Complex64`]
//! entries. Functions of Hermitian matrices go through
//! [`hermitian_eig`]; non-Hermitian powers of products `ρσ^{-α}` are always
//! taken through a similarity transform to a Hermitian matrix (see
//! [`product_power`]), so no general non-normal eigenproblem is ever solved.
//!
//! Vectorization convention: `|a⟩ = (a ⊗ 𝕀)|𝕀⟩` with `|𝕀⟩ = Σ_j |j⟩⊗|j⟩` in
//! the computational basis, i.e. row-major flattening. Under this convention
//! the super-operator `x ↦ L x R` has matrix `L ⊗ Rᵀ`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Smallest eigenvalue accepted for a "strictly positive" matrix.
pub const POSITIVITY_FLOOR: f64 = 1e-10;
/// Hermiticity tolerance, relative to the Frobenius norm of the input.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Spectral reconstruction tolerance, multiplied by the dimension.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| real(v)),
    ))
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.trace()
}

/// Hilbert–Schmidt inner product `Tr[a† b]`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.norm()
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

pub(crate) fn ensure_dim(m: &ComplexMatrix, expected: usize) -> Result<()> {
    let n = ensure_square(m)?;
    if n != expected {
        return Err(Error::DimensionMismatch { expected, found: n });
    }
    Ok(())
}

/// Eigen-decomposition `m = V diag(λ) V†` of a Hermitian matrix, eigenvalues
/// ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    /// `V diag(f(λ)) V†`.
    pub fn map<F: Fn(f64) -> C64>(&self, f: F) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let fj = f(lam);
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(real)
    }

    /// Principal complex power `Σ λ_i^z P_i`; requires the spectrum to sit
    /// above [`POSITIVITY_FLOOR`].
    pub fn power(&self, z: C64) -> Result<ComplexMatrix> {
        self.ensure_positive()?;
        Ok(self.map(|lam| principal_pow(lam, z)))
    }

    pub fn log(&self) -> Result<ComplexMatrix> {
        self.ensure_positive()?;
        Ok(self.map(|lam| real(lam.ln())))
    }

    /// Power restricted to the support: eigenvalues at or below `cutoff` are
    /// mapped to zero.
    pub fn pseudo_power(&self, z: C64, cutoff: f64) -> ComplexMatrix {
        self.map(|lam| if lam > cutoff { principal_pow(lam, z) } else { ZERO })
    }

    fn ensure_positive(&self) -> Result<()> {
        let min_eig = self.min_eigenvalue();
        if !(min_eig >= POSITIVITY_FLOOR) {
            return Err(Error::NotPositiveDefinite { min_eig, floor: POSITIVITY_FLOOR });
        }
        Ok(())
    }
}

/// `λ^z = exp(z ln λ)` for `λ > 0`.
#[inline]
pub fn principal_pow(lam: f64, z: C64) -> C64 {
    if z.im == 0.0 {
        real(lam.powf(z.re))
    } else {
        (z * lam.ln()).exp()
    }
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    ensure_square(m)?;
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    let scale = frobenius(m);
    let asymmetry = frobenius(&(m - m.adjoint()));
    let tolerance = HERMITICITY_TOL * scale.max(f64::MIN_POSITIVE);
    if asymmetry > tolerance {
        return Err(Error::NonHermitian { asymmetry, tolerance });
    }
    Ok(hermitian_eig_unchecked(&hermitian_part(m)))
}

fn hermitian_eig_unchecked(h: &ComplexMatrix) -> SpectralDecomposition {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    SpectralDecomposition { eigenvalues, eigenvectors }
}

pub fn matrix_power_psd(m: &ComplexMatrix, z: C64) -> Result<ComplexMatrix> {
    hermitian_eig(m)?.power(z)
}

pub fn matrix_power_real(m: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    matrix_power_psd(m, real(t))
}

pub fn matrix_log_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    hermitian_eig(m)?.log()
}

pub fn inverse_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    matrix_power_real(m, -1.0)
}

/// `(ρσ^{-α})^z`, computed as `σ^{α/2} (σ^{-α/2} ρ σ^{-α/2})^z σ^{-α/2}`.
///
/// `ρσ^{-α}` is similar to a positive definite Hermitian matrix, so its
/// spectrum is positive and the principal power is well defined.
pub fn product_power(
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    alpha: f64,
    z: C64,
) -> Result<ComplexMatrix> {
    let n = ensure_square(rho)?;
    ensure_dim(sigma, n)?;
    let sigma_eig = hermitian_eig(sigma)?;
    let s_half = sigma_eig.power(real(alpha / 2.0))?;
    let s_mhalf = sigma_eig.power(real(-alpha / 2.0))?;
    let inner = hermitian_part(&(&s_mhalf * rho * &s_mhalf));
    let inner_pow = hermitian_eig(&inner)?.power(z)?;
    Ok(s_half * inner_pow * s_mhalf)
}

/// Which tensor factor of `A ⊗ B` to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

pub fn partial_trace(
    m: &ComplexMatrix,
    dims: (usize, usize),
    which: Subsystem,
) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    ensure_dim(m, da * db)?;
    Ok(match which {
        Subsystem::B => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::A => ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        }),
    })
}

/// Hilbert–Schmidt vector `|a⟩` of a square operator.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedOperator {
    pub dim: usize,
    pub amplitudes: DVector<C64>,
}

impl VectorizedOperator {
    pub fn inner(&self, other: &VectorizedOperator) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

pub fn vectorize(a: &ComplexMatrix) -> Result<VectorizedOperator> {
    let n = ensure_square(a)?;
    Ok(VectorizedOperator { dim: n, amplitudes: vec_of(a) })
}

pub fn devectorize(v: &VectorizedOperator) -> ComplexMatrix {
    mat_of(&v.amplitudes, v.dim, v.dim)
}

/// Row-major flattening of any matrix.
pub(crate) fn vec_of(a: &ComplexMatrix) -> DVector<C64> {
    let (r, cc) = a.shape();
    DVector::from_fn(r * cc, |k, _| a[(k / cc, k % cc)])
}

pub(crate) fn mat_of(v: &DVector<C64>, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Matrix of a linear super-operator from `d_in × d_in` to `d_out × d_out`
/// operators, in the row-major vectorization.
pub fn superoperator_matrix<F>(f: F, d_in: usize, d_out: usize) -> ComplexMatrix
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix,
{
    let mut out = ComplexMatrix::zeros(d_out * d_out, d_in * d_in);
    for k in 0..d_in * d_in {
        let mut e = ComplexMatrix::zeros(d_in, d_in);
        e[(k / d_in, k % d_in)] = ONE;
        out.set_column(k, &vec_of(&f(&e)));
    }
    out
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Schatten p-norm `(Σ s_i^p)^{1/p}`.
pub fn schatten_norm(m: &ComplexMatrix, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidOrder(p));
    }
    let s = singular_values(m);
    if p.is_infinite() {
        return Ok(s.iter().copied().fold(0.0, f64::max));
    }
    Ok(s.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p))
}

pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// Trace distance `½‖a − b‖₁`.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    0.5 * trace_norm(&(a - b))
}

/// `‖lhs − rhs‖_F / max(√n, ‖lhs‖_F, ‖rhs‖_F)` with `n` the row count.
///
/// Dividing by `√n` alone makes residuals dimension-stable for operators of
/// unit size; the extra terms keep them scale-free when one side is a large
/// power of a near-singular state.
pub fn normalized_residual(lhs: &ComplexMatrix, rhs: &ComplexMatrix) -> f64 {
    let scale = (lhs.nrows() as f64).sqrt().max(frobenius(lhs)).max(frobenius(rhs));
    frobenius(&(lhs - rhs)) / scale
}

/// JSON exchange format `{"rows", "cols", "re", "im"}` with row-major
/// nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let (rows, cols) = m.shape();
        let grab = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..rows).map(|i| (0..cols).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        MatrixJson { rows, cols, re: grab(|z| z.re), im: grab(|z| z.im) }
    }
}

impl TryFrom<&MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<Self> {
        if j.rows == 0 || j.cols == 0 {
            return Err(Error::Format("rows and cols must be positive".into()));
        }
        let shape_ok = |a: &Vec<Vec<f64>>| a.len() == j.rows && a.iter().all(|r| r.len() == j.cols);
        if !shape_ok(&j.re) || !shape_ok(&j.im) {
            return Err(Error::Format(format!(
                "entry arrays do not match declared shape {}x{}",
                j.rows, j.cols
            )));
        }
        let m = ComplexMatrix::from_fn(j.rows, j.cols, |r, k| c(j.re[r][k], j.im[r][k]));
        if !is_finite(&m) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixJson::from(m)).expect("matrix serialization cannot fail")
}

pub fn matrix_from_json(s: &str) -> Result<ComplexMatrix> {
    let j: MatrixJson = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
    ComplexMatrix::try_from(&j)
}
