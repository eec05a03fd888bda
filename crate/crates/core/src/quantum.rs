//! States and channels: strictly positive density matrices, canonical
//! purifications, and CPTP maps in Kraus form with their adjoint, Choi and
//! Stinespring views.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, ensure_dim, ensure_square, frobenius, hermitian_eig, identity, kron, real, vec_of,
    ComplexMatrix, MatrixJson, SpectralDecomposition, Subsystem, VectorizedOperator, C64, ONE,
    POSITIVITY_FLOOR,
};

/// Tolerance on `Tr ρ = 1`.
pub const TRACE_TOL: f64 = 1e-10;
/// Tolerance on `Σ K†K = 𝕀`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// A strictly positive, unit-trace Hermitian matrix with its spectrum cached.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    spectrum: SpectralDecomposition,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let spectrum = hermitian_eig(&matrix)?;
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace { trace });
        }
        let min_eig = spectrum.min_eigenvalue();
        if !(min_eig >= POSITIVITY_FLOOR) {
            return Err(Error::NotPositiveDefinite { min_eig, floor: POSITIVITY_FLOOR });
        }
        Ok(DensityMatrix { matrix: linalg::hermitian_part(&matrix), spectrum })
    }

    /// State from a known spectral decomposition. Only strict positivity is
    /// required: optimizers of the variational formulas can have eigenvalues
    /// far below [`POSITIVITY_FLOOR`] that are still exactly representable.
    pub fn from_spectrum(spectrum: SpectralDecomposition) -> Result<Self> {
        let SpectralDecomposition { eigenvalues, eigenvectors } = spectrum;
        let n = eigenvalues.len();
        if eigenvectors.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, found: eigenvectors.nrows() });
        }
        if eigenvalues.iter().any(|l| !l.is_finite()) || !linalg::is_finite(&eigenvectors) {
            return Err(Error::NonFinite);
        }
        let trace: f64 = eigenvalues.iter().sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace { trace });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eigenvalues[i].total_cmp(&eigenvalues[j]));
        let spectrum = SpectralDecomposition {
            eigenvalues: order.iter().map(|&i| eigenvalues[i]).collect(),
            eigenvectors: ComplexMatrix::from_fn(n, n, |r, k| eigenvectors[(r, order[k])]),
        };
        let min_eig = spectrum.min_eigenvalue();
        if !(min_eig > 0.0) {
            return Err(Error::NotPositiveDefinite { min_eig, floor: 0.0 });
        }
        let matrix = linalg::hermitian_part(&spectrum.reconstruct());
        Ok(DensityMatrix { matrix, spectrum })
    }

    /// `m m† / Tr[m m†]` for a square factor `m`, with the spectrum taken from
    /// the singular values of `m` so that small eigenvalues keep their sign.
    pub fn from_factor(m: &ComplexMatrix) -> Result<Self> {
        ensure_square(m)?;
        if !linalg::is_finite(m) {
            return Err(Error::NonFinite);
        }
        let svd = m.clone().svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let sq: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
        let total: f64 = sq.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidTrace { trace: total });
        }
        Self::from_spectrum(SpectralDecomposition {
            eigenvalues: sq.iter().map(|v| v / total).collect(),
            eigenvectors: u,
        })
    }

    /// Divides a positive definite matrix by its trace.
    pub fn normalized(matrix: ComplexMatrix) -> Result<Self> {
        let t = matrix.trace().re;
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidTrace { trace: t });
        }
        Self::new(matrix.unscale(t))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new(identity(dim).unscale(dim as f64)).expect("maximally mixed state is valid")
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::new(linalg::diag(probabilities))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn min_eig(&self) -> f64 {
        self.spectrum.min_eigenvalue()
    }

    /// `ρ^z`; infallible because the spectrum is known to be positive.
    pub fn power(&self, z: C64) -> ComplexMatrix {
        self.spectrum.map(|lam| linalg::principal_pow(lam, z))
    }

    pub fn powf(&self, t: f64) -> ComplexMatrix {
        self.power(real(t))
    }

    pub fn sqrt(&self) -> ComplexMatrix {
        self.powf(0.5)
    }

    pub fn inverse(&self) -> ComplexMatrix {
        self.powf(-1.0)
    }

    pub fn log(&self) -> ComplexMatrix {
        self.spectrum.map(|lam| real(lam.ln()))
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::new(kron(&self.matrix, &other.matrix)).expect("product of states is a state")
    }

    pub fn reduced(&self, dims: (usize, usize), which: Subsystem) -> Result<DensityMatrix> {
        DensityMatrix::new(linalg::partial_trace(&self.matrix, dims, which)?)
    }

    /// `u ρ u†` for a unitary `u`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<DensityMatrix> {
        ensure_dim(u, self.dim())?;
        DensityMatrix::new(u * &self.matrix * u.adjoint())
    }

    pub fn distance_to(&self, other: &DensityMatrix) -> f64 {
        frobenius(&(&self.matrix - &other.matrix))
    }
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

/// The canonical purification `|ρ^{1/2}⟩ ∈ H ⊗ H`.
#[derive(Debug, Clone)]
pub struct PurifiedState {
    pub dim: usize,
    pub vector: VectorizedOperator,
}

impl PurifiedState {
    pub fn norm(&self) -> f64 {
        self.vector.norm()
    }

    /// State of the first tensor factor, `Tr_2 |ψ⟩⟨ψ|`.
    pub fn reduced_state(&self) -> ComplexMatrix {
        let a = &self.vector.amplitudes;
        let outer = a * a.adjoint();
        linalg::partial_trace(&outer, (self.dim, self.dim), Subsystem::B)
            .expect("purification dimensions are consistent")
    }
}

pub fn canonical_purification(rho: &DensityMatrix) -> PurifiedState {
    let dim = rho.dim();
    PurifiedState { dim, vector: VectorizedOperator { dim, amplitudes: vec_of(&rho.sqrt()) } }
}

/// Structural hint carried by a channel; generic channels are `General`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelStructure {
    General,
    Identity,
    /// `Tr_B` on `A ⊗ B`.
    PartialTrace { d_a: usize, d_b: usize },
}

/// A CPTP map `Λ(ρ) = Σ_i K_i ρ K_i†`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<ComplexMatrix>,
    structure: ChannelStructure,
}

impl KrausChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("at least one Kraus operator is required".into()))?;
        let (out_dim, in_dim) = first.shape();
        if kraus.iter().any(|k| k.shape() != (out_dim, in_dim)) {
            return Err(Error::InvalidChannel("Kraus operators have inconsistent shapes".into()));
        }
        if kraus.iter().any(|k| !linalg::is_finite(k)) {
            return Err(Error::NonFinite);
        }
        let completeness = kraus
            .iter()
            .fold(ComplexMatrix::zeros(in_dim, in_dim), |acc, k| acc + k.adjoint() * k);
        let residual = frobenius(&(completeness - identity(in_dim)));
        if residual > COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!(
                "completeness residual {residual:.3e} exceeds {COMPLETENESS_TOL:.0e}"
            )));
        }
        Ok(KrausChannel { in_dim, out_dim, kraus, structure: ChannelStructure::General })
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel {
            in_dim: dim,
            out_dim: dim,
            kraus: vec![identity(dim)],
            structure: ChannelStructure::Identity,
        }
    }

    /// `Tr_B : A ⊗ B → A`, Kraus operators `𝕀_A ⊗ ⟨k|_B`.
    pub fn partial_trace(d_a: usize, d_b: usize) -> Self {
        let kraus = (0..d_b)
            .map(|k| {
                let mut bra = ComplexMatrix::zeros(1, d_b);
                bra[(0, k)] = ONE;
                kron(&identity(d_a), &bra)
            })
            .collect();
        KrausChannel {
            in_dim: d_a * d_b,
            out_dim: d_a,
            kraus,
            structure: ChannelStructure::PartialTrace { d_a, d_b },
        }
    }

    /// Fully depolarizing qubit channel with Kraus family `{𝕀, X, Y, Z}/2`.
    pub fn depolarizing_qubit() -> Self {
        let i = linalg::c(0.0, 1.0);
        let z = linalg::ZERO;
        let paulis = [
            [ONE, z, z, ONE],
            [z, ONE, ONE, z],
            [z, -i, i, z],
            [ONE, z, z, -ONE],
        ];
        let kraus = paulis
            .iter()
            .map(|p| ComplexMatrix::from_row_slice(2, 2, p).scale(0.5))
            .collect();
        KrausChannel::new(kraus).expect("Pauli family is complete")
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn structure(&self) -> ChannelStructure {
        self.structure
    }

    pub fn partial_trace_dims(&self) -> Option<(usize, usize)> {
        match self.structure {
            ChannelStructure::PartialTrace { d_a, d_b } => Some((d_a, d_b)),
            _ => None,
        }
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        ensure_dim(rho, self.in_dim)?;
        if let ChannelStructure::PartialTrace { d_a, d_b } = self.structure {
            return linalg::partial_trace(rho, (d_a, d_b), Subsystem::B);
        }
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.out_dim, self.out_dim), |acc, k| acc + k * rho * k.adjoint()))
    }

    /// `Λ(ρ)` as a state; fails if the output falls below the positivity floor.
    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply(rho.matrix())?;
        DensityMatrix::new(out).map_err(|e| match e {
            Error::NotPositiveDefinite { min_eig, .. } => Error::SingularOutputState { min_eig },
            other => other,
        })
    }

    /// Hilbert–Schmidt adjoint `Λ*(a) = Σ_i K_i† a K_i`.
    pub fn adjoint_apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        ensure_dim(a, self.out_dim)?;
        if let ChannelStructure::PartialTrace { d_b, .. } = self.structure {
            return Ok(kron(a, &identity(d_b)));
        }
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.in_dim, self.in_dim), |acc, k| acc + k.adjoint() * a * k))
    }

    /// Choi matrix `Σ_{ij} |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)`.
    pub fn choi(&self) -> ComplexMatrix {
        let (n, m) = (self.in_dim, self.out_dim);
        let mut out = ComplexMatrix::zeros(n * m, n * m);
        for i in 0..n {
            for j in 0..n {
                let mut e = ComplexMatrix::zeros(n, n);
                e[(i, j)] = ONE;
                let block = self.apply(&e).expect("basis operator has input dimension");
                out.view_mut((i * m, j * m), (m, m)).copy_from(&block);
            }
        }
        out
    }

    /// Stacks the Kraus operators into an isometry `V = Σ_k K_k ⊗ |k⟩_env`.
    pub fn stinespring(&self) -> StinespringIsometry {
        let env_dim = self.kraus.len();
        let mut v = ComplexMatrix::zeros(self.out_dim * env_dim, self.in_dim);
        for (k, op) in self.kraus.iter().enumerate() {
            for i in 0..self.out_dim {
                for j in 0..self.in_dim {
                    v[(i * env_dim + k, j)] = op[(i, j)];
                }
            }
        }
        StinespringIsometry { v, in_dim: self.in_dim, out_dim: self.out_dim, env_dim }
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            kraus: self.kraus.iter().map(MatrixJson::from).collect(),
        }
    }

    pub fn from_json(j: &ChannelJson) -> Result<Self> {
        let kraus = j
            .kraus
            .iter()
            .map(ComplexMatrix::try_from)
            .collect::<Result<Vec<_>>>()?;
        let ch = KrausChannel::new(kraus)?;
        if ch.in_dim != j.in_dim || ch.out_dim != j.out_dim {
            return Err(Error::Format(format!(
                "declared dims {}->{} do not match Kraus shape {}->{}",
                j.in_dim, j.out_dim, ch.in_dim, ch.out_dim
            )));
        }
        Ok(ch)
    }
}

/// Channel exchange format `{"in_dim", "out_dim", "kraus": [matrix, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub in_dim: usize,
    pub out_dim: usize,
    pub kraus: Vec<MatrixJson>,
}

/// Isometry `V : H_in → H_out ⊗ H_env` with `Λ(ρ) = Tr_env[V ρ V†]`.
#[derive(Debug, Clone)]
pub struct StinespringIsometry {
    pub v: ComplexMatrix,
    pub in_dim: usize,
    pub out_dim: usize,
    pub env_dim: usize,
}

impl StinespringIsometry {
    pub fn isometry_residual(&self) -> f64 {
        frobenius(&(self.v.adjoint() * &self.v - identity(self.in_dim)))
    }

    /// `V ρ V†` on `out ⊗ env`.
    pub fn dilate(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        ensure_dim(rho, self.in_dim)?;
        Ok(&self.v * rho * self.v.adjoint())
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        linalg::partial_trace(&self.dilate(rho)?, (self.out_dim, self.env_dim), Subsystem::B)
    }

    /// `V† (a ⊗ 𝕀_env) V`.
    pub fn adjoint_apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        ensure_dim(a, self.out_dim)?;
        Ok(self.v.adjoint() * kron(a, &identity(self.env_dim)) * &self.v)
    }

    /// `V† x V` for an operator on `out ⊗ env`.
    pub fn compress(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = ensure_square(x)?;
        if n != self.v.nrows() {
            return Err(Error::DimensionMismatch { expected: self.v.nrows(), found: n });
        }
        Ok(self.v.adjoint() * x * &self.v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, hs_inner, trace_norm};
    use crate::random::{random_channel, random_density, random_operator, trial_rng};

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::diagonal(&[0.25, 0.75]).is_ok());
        assert!(matches!(DensityMatrix::diagonal(&[0.5, 0.6]), Err(Error::InvalidTrace { .. })));
        assert!(matches!(
            DensityMatrix::diagonal(&[1.0, 0.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let rho = DensityMatrix::normalized(diag(&[1.0, 3.0])).unwrap();
        assert!((rho.matrix()[(1, 1)].re - 0.75).abs() < 1e-15);
    }

    #[test]
    fn identity_channel_is_noop() {
        let mut rng = trial_rng(1, 0);
        let rho = random_density(3, &mut rng).unwrap();
        let ch = KrausChannel::identity(3);
        assert_eq!(&ch.apply(rho.matrix()).unwrap(), rho.matrix());
        let v = ch.stinespring();
        assert_eq!(v.env_dim, 1);
        assert!(frobenius(&(&v.v - identity(3))) < 1e-15);
    }

    #[test]
    fn partial_trace_channel_matches_kraus_sum() {
        let mut rng = trial_rng(2, 0);
        let ra = random_density(2, &mut rng).unwrap();
        let rb = random_density(3, &mut rng).unwrap();
        let ch = KrausChannel::partial_trace(2, 3);
        let generic = KrausChannel::new(ch.kraus().to_vec()).unwrap();
        let rab = ra.tensor(&rb);
        let fast = ch.apply(rab.matrix()).unwrap();
        let slow = generic.apply(rab.matrix()).unwrap();
        assert!(frobenius(&(&fast - ra.matrix())) < 1e-14);
        assert!(frobenius(&(&fast - &slow)) < 1e-14);

        let a = random_operator(2, &mut rng);
        let fast = ch.adjoint_apply(&a).unwrap();
        let slow = generic.adjoint_apply(&a).unwrap();
        assert!(frobenius(&(&fast - kron(&a, &identity(3)))) < 1e-15);
        assert!(frobenius(&(&fast - &slow)) < 1e-14);
    }

    #[test]
    fn depolarizing_sends_everything_to_mixed() {
        let mut rng = trial_rng(3, 0);
        let ch = KrausChannel::depolarizing_qubit();
        for _ in 0..5 {
            let rho = random_density(2, &mut rng).unwrap();
            let out = ch.apply(rho.matrix()).unwrap();
            assert!(frobenius(&(out - identity(2).scale(0.5))) < 1e-14);
        }
    }

    #[test]
    fn adjoint_is_unital_and_dual() {
        let mut rng = trial_rng(4, 0);
        let ch = random_channel(3, 2, 3, &mut rng).unwrap();
        let unit = ch.adjoint_apply(&identity(2)).unwrap();
        assert!(frobenius(&(unit - identity(3))) < 1e-11);
        for _ in 0..10 {
            let a = random_operator(2, &mut rng);
            let rho = random_density(3, &mut rng).unwrap();
            let lhs = hs_inner(&a.adjoint(), &ch.apply(rho.matrix()).unwrap());
            let rhs = hs_inner(&ch.adjoint_apply(&a).unwrap().adjoint(), rho.matrix());
            assert!((lhs - rhs).norm() < 1e-11);
        }
    }

    #[test]
    fn stinespring_identities() {
        let mut rng = trial_rng(5, 0);
        let ch = random_channel(2, 2, 3, &mut rng).unwrap();
        let v = ch.stinespring();
        assert_eq!(v.env_dim, 3);
        assert!(v.isometry_residual() < 1e-10);
        let rho = random_density(2, &mut rng).unwrap();
        let a = random_operator(2, &mut rng);
        assert!(frobenius(&(v.apply(rho.matrix()).unwrap() - ch.apply(rho.matrix()).unwrap())) < 1e-10);
        assert!(frobenius(&(v.adjoint_apply(&a).unwrap() - ch.adjoint_apply(&a).unwrap())) < 1e-10);

        let pt = KrausChannel::partial_trace(2, 2);
        let v = pt.stinespring();
        assert_eq!(v.env_dim, 2);
        let rab = random_density(4, &mut rng).unwrap();
        let b = random_operator(2, &mut rng);
        assert!(frobenius(&(v.apply(rab.matrix()).unwrap() - pt.apply(rab.matrix()).unwrap())) < 1e-10);
        assert!(frobenius(&(v.adjoint_apply(&b).unwrap() - pt.adjoint_apply(&b).unwrap())) < 1e-10);
    }

    #[test]
    fn choi_of_identity_is_unnormalized_bell_projector() {
        let j = KrausChannel::identity(2).choi();
        let v = crate::linalg::vectorize(&identity(2)).unwrap().amplitudes;
        assert!(frobenius(&(j - &v * v.adjoint())) < 1e-15);
    }

    #[test]
    fn purification_of_mixed_qubit() {
        let psi = canonical_purification(&DensityMatrix::maximally_mixed(2));
        let h = 1.0 / 2f64.sqrt();
        let expect = [real(h), C64::new(0.0, 0.0), C64::new(0.0, 0.0), real(h)];
        for (x, y) in psi.vector.amplitudes.iter().zip(expect.iter()) {
            assert!((x - y).norm() < 1e-15);
        }
        let nearly_pure = DensityMatrix::diagonal(&[1.0 - 1e-8, 1e-8]).unwrap();
        let psi = canonical_purification(&nearly_pure);
        assert!((psi.vector.amplitudes[0] - ONE).norm() < 1e-7);
    }

    #[test]
    fn purification_reduces_to_state() {
        let mut rng = trial_rng(6, 0);
        for d in 2..5 {
            let rho = random_density(d, &mut rng).unwrap();
            let psi = canonical_purification(&rho);
            assert!((psi.norm() - 1.0).abs() < 1e-12);
            assert!(frobenius(&(psi.reduced_state() - rho.matrix())) < 1e-10);
        }
    }

    #[test]
    fn channel_json_round_trip() {
        let mut rng = trial_rng(7, 0);
        let ch = random_channel(2, 2, 2, &mut rng).unwrap();
        let s = serde_json::to_string(&ch.to_json()).unwrap();
        let back = KrausChannel::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        for (a, b) in ch.kraus().iter().zip(back.kraus()) {
            assert_eq!(a, b);
        }
        let broken = ChannelJson { in_dim: 2, out_dim: 2, kraus: vec![MatrixJson::from(&diag(&[1.0, 0.5]))] };
        assert!(matches!(KrausChannel::from_json(&broken), Err(Error::InvalidChannel(_))));
    }

    #[test]
    fn apply_state_flags_singular_output() {
        // replacement channel onto |0⟩⟨0|
        let k0 = ComplexMatrix::from_row_slice(2, 2, &[ONE, linalg::ZERO, linalg::ZERO, linalg::ZERO]);
        let k1 = ComplexMatrix::from_row_slice(2, 2, &[linalg::ZERO, ONE, linalg::ZERO, linalg::ZERO]);
        let ch = KrausChannel::new(vec![k0, k1]).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(matches!(ch.apply_state(&rho), Err(Error::SingularOutputState { .. })));
        let out = ch.apply(rho.matrix()).unwrap();
        assert!((trace_norm(&out) - 1.0).abs() < 1e-14);
    }
}
