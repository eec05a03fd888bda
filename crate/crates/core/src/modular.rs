//! Relative modular operators `Δ_{σ,ω}(x) = σ x ω^{-1}` on operator space,
//! the compression isometry `U` attached to a bipartite state, and the
//! Jensen-equality diagnostics built from them.
//!
//! Functions of `Δ` are never obtained by diagonalizing a `d² × d²` matrix:
//! the eigenvectors of `Δ_{σ,ω}` are `|u_i⟩⟨v_j|` with eigenvalue `s_i/w_j`,
//! where `σ = Σ s_i |u_i⟩⟨u_i|` and `ω = Σ w_j |v_j⟩⟨v_j|`.

use crate::divergence::{closed_form_optimizer, optimal_weight_factor, RenyiOrder};
use crate::error::{Error, Result};
use crate::linalg::{
    ensure_dim, hermitian_eig, hermitian_part, identity, kron, mat_of, normalized_residual,
    partial_trace, principal_pow, real, singular_values, superoperator_matrix, vec_of, ComplexMatrix, Subsystem,
    C64, POSITIVITY_FLOOR,
};
use crate::quantum::{DensityMatrix, PurifiedState};

/// Relative gap below which two eigenvalues of `Δ` are put in one cluster
/// when building the cyclic subspace.
pub const CLUSTER_RTOL: f64 = 1e-6;
/// Smallest `t` accepted by the resolvent diagnostics.
pub const RESOLVENT_T_MIN: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RelativeModularOperator {
    sigma: DensityMatrix,
    omega: DensityMatrix,
}

impl RelativeModularOperator {
    pub fn new(sigma: DensityMatrix, omega: DensityMatrix) -> Result<Self> {
        if sigma.dim() != omega.dim() {
            return Err(Error::DimensionMismatch { expected: sigma.dim(), found: omega.dim() });
        }
        Ok(RelativeModularOperator { sigma, omega })
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn sigma(&self) -> &DensityMatrix {
        &self.sigma
    }

    pub fn omega(&self) -> &DensityMatrix {
        &self.omega
    }

    /// `f(Δ)(a) = U_σ [(U_σ† a V_ω) ∘ F] V_ω†` with `F_ij = f(s_i / w_j)`.
    pub fn apply_fn<F: Fn(f64) -> C64>(&self, f: F, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        ensure_dim(a, self.dim())?;
        let (s, us) = (&self.sigma.spectrum().eigenvalues, &self.sigma.spectrum().eigenvectors);
        let (w, vw) = (&self.omega.spectrum().eigenvalues, &self.omega.spectrum().eigenvectors);
        let mut core = us.adjoint() * a * vw;
        for i in 0..s.len() {
            for j in 0..w.len() {
                core[(i, j)] *= f(s[i] / w[j]);
            }
        }
        Ok(us * core * vw.adjoint())
    }

    /// `Δ^z(a) = σ^z a ω^{-z}`.
    pub fn power_apply(&self, z: C64, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.apply_fn(|x| principal_pow(x, z), a)
    }

    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        ensure_dim(a, self.dim())?;
        Ok(self.sigma.matrix() * a * self.omega.inverse())
    }

    /// Super-operator matrix `σ ⊗ (ω^{-1})ᵀ`.
    pub fn matrix(&self) -> ComplexMatrix {
        kron(self.sigma.matrix(), &self.omega.inverse().transpose())
    }

    /// Super-operator matrix of `Δ^z`, `σ^z ⊗ (ω^{-z})ᵀ`.
    pub fn power_matrix(&self, z: C64) -> ComplexMatrix {
        kron(&self.sigma.power(z), &self.omega.power(-z).transpose())
    }

    /// Super-operator matrix of `f(Δ)` from the Kronecker eigenbasis
    /// `u_i ⊗ conj(v_j)`.
    pub fn function_matrix<F: Fn(f64) -> C64>(&self, f: F) -> ComplexMatrix {
        let basis = self.eigenbasis();
        let vals = self.eigenvalues();
        let mut scaled = basis.clone();
        for (k, &lam) in vals.iter().enumerate() {
            let mut col = scaled.column_mut(k);
            col *= f(lam);
        }
        scaled * basis.adjoint()
    }

    /// Eigenvalues `s_i / w_j`, indexed by `i·d + j`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let s = &self.sigma.spectrum().eigenvalues;
        let w = &self.omega.spectrum().eigenvalues;
        s.iter().flat_map(|si| w.iter().map(move |wj| si / wj)).collect()
    }

    /// Unitary whose column `i·d + j` is `u_i ⊗ conj(v_j)`.
    pub fn eigenbasis(&self) -> ComplexMatrix {
        kron(&self.sigma.spectrum().eigenvectors, &self.omega.spectrum().eigenvectors.map(|z| z.conj()))
    }

    /// Orthonormal basis (as columns) of the cyclic subspace generated by
    /// `|x⟩` under `Δ`: the nonzero projections of `|x⟩` onto the eigenspaces
    /// of `Δ`, with eigenvalues within [`CLUSTER_RTOL`] merged.
    pub fn cyclic_basis(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dim();
        ensure_dim(x, d)?;
        let us = &self.sigma.spectrum().eigenvectors;
        let vw = &self.omega.spectrum().eigenvectors;
        let coeff = us.adjoint() * x * vw;
        let vals = self.eigenvalues();
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));

        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for &k in &order {
            match clusters.last_mut() {
                Some(c) if (vals[k] - vals[*c.last().unwrap()]).abs() <= CLUSTER_RTOL * vals[k] => c.push(k),
                _ => clusters.push(vec![k]),
            }
        }

        let floor = 1e-12 * x.norm().max(f64::MIN_POSITIVE);
        let mut cols = Vec::new();
        for cluster in clusters {
            let mut masked = ComplexMatrix::zeros(d, d);
            for &k in &cluster {
                masked[(k / d, k % d)] = coeff[(k / d, k % d)];
            }
            let v = vec_of(&(us * masked * vw.adjoint()));
            let n = v.norm();
            if n > floor {
                cols.push(v.unscale(n));
            }
        }
        Ok(ComplexMatrix::from_columns(&cols))
    }
}

/// `Δ_{σ,ω}^z(a) = σ^z a ω^{-z}`.
pub fn delta_power_apply(dop: &RelativeModularOperator, z: C64, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    dop.power_apply(z, a)
}

/// `⟨ρ^{1/2}| Δ_{σ,ω}^{-α} |ρ^{1/2}⟩ = Tr[ρ^{1/2} σ^{-α} ρ^{1/2} ω^α]`.
pub fn quadratic_form(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    omega: &DensityMatrix,
    alpha: f64,
) -> Result<f64> {
    RenyiOrder::new(alpha)?;
    for m in [sigma, omega] {
        if m.dim() != rho.dim() {
            return Err(Error::DimensionMismatch { expected: rho.dim(), found: m.dim() });
        }
    }
    let r = rho.sqrt();
    Ok((&r * sigma.powf(-alpha) * &r * omega.powf(alpha)).trace().re)
}

/// The isometry `U(a) = (a ρ_A^{-1/2} ⊗ 𝕀_B) ρ_AB^{1/2}` from operators on
/// `A` to operators on `AB`, with `U|ρ_A^{1/2}⟩ = |ρ_AB^{1/2}⟩`.
#[derive(Debug, Clone)]
pub struct CompressionIsometry {
    d_a: usize,
    d_b: usize,
    rho_ab: DensityMatrix,
    rho_a: DensityMatrix,
    rho_ab_sqrt: ComplexMatrix,
    rho_a_isqrt: ComplexMatrix,
    u: ComplexMatrix,
}

pub fn build_compression(rho_ab: &DensityMatrix, d_a: usize, d_b: usize) -> Result<CompressionIsometry> {
    if rho_ab.dim() != d_a * d_b {
        return Err(Error::DimensionMismatch { expected: d_a * d_b, found: rho_ab.dim() });
    }
    let rho_a = rho_ab.reduced((d_a, d_b), Subsystem::B)?;
    let mut ci = CompressionIsometry {
        d_a,
        d_b,
        rho_ab_sqrt: rho_ab.sqrt(),
        rho_a_isqrt: rho_a.powf(-0.5),
        rho_ab: rho_ab.clone(),
        rho_a,
        u: ComplexMatrix::zeros(0, 0),
    };
    ci.u = superoperator_matrix(|a| ci.apply_unchecked(a), d_a, d_a * d_b);
    Ok(ci)
}

impl CompressionIsometry {
    pub fn dims(&self) -> (usize, usize) {
        (self.d_a, self.d_b)
    }

    pub fn rho_ab(&self) -> &DensityMatrix {
        &self.rho_ab
    }

    pub fn rho_a(&self) -> &DensityMatrix {
        &self.rho_a
    }

    /// `(d_A d_B)² × d_A²` matrix of `U`.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.u
    }

    /// `P = UU†`.
    pub fn projector(&self) -> ComplexMatrix {
        &self.u * self.u.adjoint()
    }

    fn apply_unchecked(&self, a: &ComplexMatrix) -> ComplexMatrix {
        kron(&(a * &self.rho_a_isqrt), &identity(self.d_b)) * &self.rho_ab_sqrt
    }

    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        ensure_dim(a, self.d_a)?;
        Ok(self.apply_unchecked(a))
    }

    /// `U*(y) = Tr_B[y ρ_AB^{1/2}] ρ_A^{-1/2}`.
    pub fn adjoint_apply(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        let yr = y * &self.rho_ab_sqrt;
        Ok(partial_trace(&yr, (self.d_a, self.d_b), Subsystem::B)? * &self.rho_a_isqrt)
    }

    /// `P(y) = U U*(y)`.
    pub fn project(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.apply(&self.adjoint_apply(y)?)
    }

    pub fn isometry_residual(&self) -> f64 {
        (self.u.adjoint() * &self.u - identity(self.d_a * self.d_a)).norm()
    }

    /// `(‖P² − P‖_F, ‖P − P†‖_F)`.
    pub fn projector_residuals(&self) -> (f64, f64) {
        let p = self.projector();
        ((&p * &p - &p).norm(), (&p - p.adjoint()).norm())
    }

    fn ensure_ab(&self, dop: &RelativeModularOperator) -> Result<()> {
        if dop.dim() != self.d_a * self.d_b {
            return Err(Error::DimensionMismatch { expected: self.d_a * self.d_b, found: dop.dim() });
        }
        Ok(())
    }

    /// `U† M U` for a super-operator matrix `M` on `AB`.
    fn compress_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.u.adjoint() * m * &self.u
    }
}

/// Modular operators weighted by `|a|² = a†a`:
/// `Δ_{σ_AB, ρ_AB^{1/2}(|a|²⊗𝕀)ρ_AB^{1/2}}` on `AB` and
/// `Δ_{σ_A, ρ_A^{1/2}|a|²ρ_A^{1/2}}` on `A`, both weighted states normalized
/// by the common factor `Tr[ρ_A |a|²]`.
#[derive(Debug, Clone)]
pub struct WeightedModularPair {
    pub delta_ab: RelativeModularOperator,
    pub delta_a: RelativeModularOperator,
}

pub fn weighted_modular_pair(
    ci: &CompressionIsometry,
    sigma_ab: &DensityMatrix,
    a: &ComplexMatrix,
) -> Result<WeightedModularPair> {
    weighted_pair_with_floor(ci, sigma_ab, a, POSITIVITY_FLOOR)
}

/// `floor` bounds the smallest singular value of `a` relative to the largest.
fn weighted_pair_with_floor(
    ci: &CompressionIsometry,
    sigma_ab: &DensityMatrix,
    a: &ComplexMatrix,
    floor: f64,
) -> Result<WeightedModularPair> {
    let (d_a, d_b) = ci.dims();
    if sigma_ab.dim() != d_a * d_b {
        return Err(Error::DimensionMismatch { expected: d_a * d_b, found: sigma_ab.dim() });
    }
    ensure_dim(a, d_a)?;
    let sv = singular_values(a);
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if !(lo > floor * hi) {
        return Err(Error::DegenerateWeight { min_eig: lo * lo });
    }
    let degenerate = |e| match e {
        Error::NotPositiveDefinite { min_eig, .. } => Error::DegenerateWeight { min_eig },
        other => other,
    };
    // ρ^{1/2}(a†a)ρ^{1/2} = (ρ^{1/2} a†)(ρ^{1/2} a†)†; the common trace is
    // divided out by `from_factor`.
    let omega_a = DensityMatrix::from_factor(&(ci.rho_a.sqrt() * a.adjoint())).map_err(degenerate)?;
    let lifted = &ci.rho_ab_sqrt * kron(&a.adjoint(), &identity(d_b));
    let omega_ab = DensityMatrix::from_factor(&lifted).map_err(degenerate)?;
    let sigma_a = sigma_ab.reduced((d_a, d_b), Subsystem::B)?;
    Ok(WeightedModularPair {
        delta_ab: RelativeModularOperator::new(sigma_ab.clone(), omega_ab)?,
        delta_a: RelativeModularOperator::new(sigma_a, omega_a)?,
    })
}

/// Weighted pair built from the optimal weight `a_*²` of the reduced pair
/// `(ρ_A, σ_A)`; the `A` state is then `ω_*(ρ_A, σ_A)` itself.
pub fn optimal_weighted_pair(
    ci: &CompressionIsometry,
    sigma_ab: &DensityMatrix,
    ord: RenyiOrder,
) -> Result<WeightedModularPair> {
    let (d_a, d_b) = ci.dims();
    let sigma_a = sigma_ab.reduced((d_a, d_b), Subsystem::B)?;
    let a = optimal_weight_factor(&ci.rho_a, &sigma_a, ord)?;
    weighted_pair_with_floor(ci, sigma_ab, &a, 0.0)
}

/// Normalized residual of `U† Δ_AB U = Δ_A` for the weights `|a|² = a†a`.
pub fn compression_identity_residual(
    ci: &CompressionIsometry,
    sigma_ab: &DensityMatrix,
    a: &ComplexMatrix,
) -> Result<f64> {
    let pair = weighted_modular_pair(ci, sigma_ab, a)?;
    let lhs = ci.compress_matrix(&pair.delta_ab.matrix());
    Ok(normalized_residual(&lhs, &pair.delta_a.matrix()))
}

/// Runs `f` on each column of `q`, reshaped as a `d × d` operator.
fn map_columns<F>(q: &ComplexMatrix, d: usize, f: F) -> Result<ComplexMatrix>
where
    F: Fn(&ComplexMatrix) -> Result<ComplexMatrix>,
{
    let mut out = ComplexMatrix::zeros(q.nrows(), q.ncols());
    for k in 0..q.ncols() {
        let x = mat_of(&q.column(k).into_owned(), d, d);
        out.set_column(k, &vec_of(&f(&x)?));
    }
    Ok(out)
}

/// `‖PΔ − ΔP‖` restricted to the cyclic subspace of `Δ` generated by
/// `|ρ_AB^{1/2}⟩`, normalized as in [`normalized_residual`].
pub fn jensen_commutator_norm(ci: &CompressionIsometry, dop: &RelativeModularOperator) -> Result<f64> {
    ci.ensure_ab(dop)?;
    let d = dop.dim();
    let q = dop.cyclic_basis(&ci.rho_ab_sqrt)?;
    let p_delta = map_columns(&q, d, |x| ci.project(&dop.apply(x)?))?;
    let delta_p = map_columns(&q, d, |x| dop.apply(&ci.project(x)?))?;
    Ok(normalized_residual(&p_delta, &delta_p))
}

/// `‖PΔ − ΔP‖` on the whole operator space.
pub fn jensen_commutator_norm_full(ci: &CompressionIsometry, dop: &RelativeModularOperator) -> Result<f64> {
    ci.ensure_ab(dop)?;
    let p = ci.projector();
    let m = dop.matrix();
    Ok(normalized_residual(&(&p * &m), &(&m * &p)))
}

/// `(PΔP)^t` taken on the range of `P`, as a map on columns of `q`:
/// `U (U†ΔU)^t U†`.
fn compressed_power(ci: &CompressionIsometry, dop: &RelativeModularOperator, t: f64) -> Result<ComplexMatrix> {
    let inner = hermitian_part(&ci.compress_matrix(&dop.matrix()));
    let eig = hermitian_eig(&inner)?;
    let cutoff = 1e-12 * eig.max_eigenvalue().max(1.0);
    Ok(&ci.u * eig.pseudo_power(real(t), cutoff) * ci.u.adjoint())
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidOrder(t));
    }
    Ok(())
}

/// `‖PΔ^tP − (PΔP)^t‖` restricted to the cyclic subspace generated by
/// `|ρ_AB^{1/2}⟩`.
pub fn compressed_power_residual(ci: &CompressionIsometry, dop: &RelativeModularOperator, t: f64) -> Result<f64> {
    ci.ensure_ab(dop)?;
    check_t(t)?;
    let d = dop.dim();
    let q = dop.cyclic_basis(&ci.rho_ab_sqrt)?;
    let lhs = map_columns(&q, d, |x| ci.project(&dop.power_apply(real(t), &ci.project(x)?)?))?;
    let rhs = compressed_power(ci, dop, t)? * &q;
    Ok(normalized_residual(&lhs, &rhs))
}

/// `‖PΔ^tP − (PΔP)^t‖` on the whole operator space.
pub fn compressed_power_residual_full(
    ci: &CompressionIsometry,
    dop: &RelativeModularOperator,
    t: f64,
) -> Result<f64> {
    ci.ensure_ab(dop)?;
    check_t(t)?;
    let p = ci.projector();
    let lhs = &p * dop.power_matrix(real(t)) * &p;
    Ok(normalized_residual(&lhs, &compressed_power(ci, dop, t)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventDefect {
    pub t: f64,
    /// `‖X_t |ρ_A^{1/2}⟩‖`.
    pub defect: f64,
    /// Smallest eigenvalue of `X_t`.
    pub min_eig: f64,
}

/// `X_t = U*(Δ_AB + t)^{-1} U − (Δ_A + t)^{-1}` applied to `|ρ_A^{1/2}⟩`.
pub fn resolvent_defect_norm(
    ci: &CompressionIsometry,
    pair: &WeightedModularPair,
    t: f64,
    rho_a_vec: &PurifiedState,
) -> Result<ResolventDefect> {
    if !(t > RESOLVENT_T_MIN) || !t.is_finite() {
        return Err(Error::SingularResolvent(t));
    }
    ci.ensure_ab(&pair.delta_ab)?;
    let d_a = ci.d_a;
    if pair.delta_a.dim() != d_a || rho_a_vec.dim != d_a {
        return Err(Error::DimensionMismatch { expected: d_a, found: rho_a_vec.dim });
    }
    let inv = |x: f64| real(1.0 / (x + t));
    let x_t = superoperator_matrix(
        |e| {
            let lifted = ci.apply_unchecked(e);
            let ab = pair.delta_ab.apply_fn(inv, &lifted).expect("dimensions checked");
            let a = pair.delta_a.apply_fn(inv, e).expect("dimensions checked");
            ci.adjoint_apply(&ab).expect("dimensions checked") - a
        },
        d_a,
        d_a,
    );
    let x_t = hermitian_part(&x_t);
    let min_eig = hermitian_eig(&x_t)?.min_eigenvalue();
    let defect = (&x_t * &rho_a_vec.vector.amplitudes).norm();
    Ok(ResolventDefect { t, defect, min_eig })
}

/// Nine logarithmically spaced points over `[1e-2, 1e2]`.
pub fn default_resolvent_grid() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(-2.0 + 0.5 * k as f64)).collect()
}

/// The three quadratic forms of the data-processing chain for `Tr_B`:
/// the reduced value at `ω_A = ω_*(ρ_A, σ_A)`, its lift to `AB` through the
/// same weight, and the optimum on `AB`. For `α > 0` they increase; for
/// `α < 0` they decrease.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpiChain {
    pub reduced: f64,
    pub lifted: f64,
    pub optimal: f64,
}

impl DpiChain {
    /// True when the chain is ordered within `tol`.
    pub fn is_ordered(&self, alpha: f64, tol: f64) -> bool {
        let s = alpha.signum();
        s * (self.lifted - self.reduced) >= -tol && s * (self.optimal - self.lifted) >= -tol
    }
}

pub fn dpi_chain(
    ci: &CompressionIsometry,
    sigma_ab: &DensityMatrix,
    ord: RenyiOrder,
) -> Result<DpiChain> {
    let pair = optimal_weighted_pair(ci, sigma_ab, ord)?;
    let a = ord.alpha();
    let sigma_a = pair.delta_a.sigma();
    let reduced = quadratic_form(&ci.rho_a, sigma_a, pair.delta_a.omega(), a)?;
    let lifted = quadratic_form(&ci.rho_ab, sigma_ab, pair.delta_ab.omega(), a)?;
    let optimal = closed_form_optimizer(&ci.rho_ab, sigma_ab, ord)?.value;
    Ok(DpiChain { reduced, lifted, optimal })
}
