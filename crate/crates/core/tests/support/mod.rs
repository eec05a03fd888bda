//! Reference implementations that avoid the library's spectral routines.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use sandwich::random::trial_rng;

pub type M = DMatrix<Complex64>;

pub fn rng(seed: u64) -> impl rand::Rng {
    trial_rng(seed, 0xACCE)
}

/// Principal power of a diagonalizable matrix with positive spectrum via
/// complex Schur form and the Parlett recurrence.
pub fn schur_power(m: &M, z: Complex64) -> M {
    let n = m.nrows();
    let (q, t) = m.clone().schur().unpack();
    let mut f = M::zeros(n, n);
    for i in 0..n {
        f[(i, i)] = t[(i, i)].powc(z);
    }
    for d in 1..n {
        for i in 0..n - d {
            let j = i + d;
            let mut s = t[(i, j)] * (f[(j, j)] - f[(i, i)]);
            for k in i + 1..j {
                s += t[(i, k)] * f[(k, j)] - f[(i, k)] * t[(k, j)];
            }
            f[(i, j)] = s / (t[(j, j)] - t[(i, i)]);
        }
    }
    &q * f * q.adjoint()
}

/// Inverse through LU, independent of the eigen solver.
pub fn lu_inverse(m: &M) -> M {
    m.clone().lu().try_inverse().expect("invertible")
}

/// Classical Rényi divergence of order `order` (natural log).
pub fn classical_renyi(p: &[f64], q: &[f64], order: f64) -> f64 {
    let s: f64 = p.iter().zip(q).map(|(a, b)| a.powf(order) * b.powf(1.0 - order)).sum();
    s.ln() / (order - 1.0)
}

pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * (a / b).ln()).sum()
}

/// Random probability vector bounded away from zero.
pub fn random_simplex<R: rand::Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn fro(m: &M) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
