mod support;

use proptest::prelude::*;
use sandwich::linalg::{frobenius, hermitian_eig, hs_inner, trace};
use sandwich::random::{random_channel, random_density, random_operator, random_unitary};
use sandwich::KrausChannel;
use support::rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_channels_are_cptp(seed in any::<u64>(), din in 2usize..=4, dout in 2usize..=3, env in 2usize..=3) {
        let mut r = rng(seed);
        let ch = random_channel(din, dout, env.max(din.div_ceil(dout)), &mut r).unwrap();
        let choi = ch.choi();
        prop_assert!(hermitian_eig(&choi).unwrap().min_eigenvalue() >= -1e-12);
        let rho = random_density(din, &mut r).unwrap();
        let out = ch.apply(rho.matrix()).unwrap();
        prop_assert!((trace(&out).re - 1.0).abs() <= 1e-12);
        prop_assert!(hermitian_eig(&out).unwrap().min_eigenvalue() >= -1e-12);
    }

    #[test]
    fn adjoint_is_hilbert_schmidt_dual(seed in any::<u64>(), din in 2usize..=4, dout in 2usize..=3) {
        let mut r = rng(seed);
        let ch = random_channel(din, dout, din, &mut r).unwrap();
        let x = random_operator(din, &mut r);
        let y = random_operator(dout, &mut r);
        let lhs = hs_inner(&y, &ch.apply(&x).unwrap());
        let rhs = hs_inner(&ch.adjoint_apply(&y).unwrap(), &x);
        prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + lhs.norm()));
    }

    #[test]
    fn stinespring_reproduces_channel(seed in any::<u64>(), din in 2usize..=4, dout in 2usize..=3) {
        let mut r = rng(seed);
        let ch = random_channel(din, dout, din, &mut r).unwrap();
        let st = ch.stinespring();
        prop_assert!(st.isometry_residual() <= 1e-12);
        let x = random_operator(din, &mut r);
        prop_assert!(frobenius(&(st.apply(&x).unwrap() - ch.apply(&x).unwrap())) <= 1e-12);
    }

    #[test]
    fn partial_trace_channel_agrees_with_reduction(seed in any::<u64>(), da in 2usize..=3, db in 2usize..=3) {
        let rho = random_density(da * db, &mut rng(seed)).unwrap();
        let ch = KrausChannel::partial_trace(da, db);
        let via_channel = ch.apply_state(&rho).unwrap();
        let direct = rho.reduced((da, db), sandwich::linalg::Subsystem::B).unwrap();
        prop_assert!(frobenius(&(via_channel.matrix() - direct.matrix())) <= 1e-13);
    }

    #[test]
    fn unitary_conjugation_preserves_spectrum(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let rho = random_density(d, &mut r).unwrap();
        let u = random_unitary(d, &mut r).unwrap();
        let out = rho.conjugate(&u).unwrap();
        for (a, b) in rho.spectrum().eigenvalues.iter().zip(&out.spectrum().eigenvalues) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
