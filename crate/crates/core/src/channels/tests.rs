use super::*;
use crate::matrix::{commutator, frobenius_distance, kron};
use crate::sampling::{haar_unitary, random_pure_state, SeedSpec};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn plus_state() -> DensityMatrix {
    let s = 0.5f64.sqrt();
    DensityMatrix::from_pure(&[c(s, 0.0), c(s, 0.0)]).unwrap()
}

fn sigma_minus() -> CMatrix {
    CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()
}

fn hadamard() -> CMatrix {
    let s = 0.5f64.sqrt();
    CMatrix::from_real_rows(&[&[s, s], &[s, -s]]).unwrap()
}

fn random_hermitian(dim: usize, seed: u64) -> CMatrix {
    let g: CMatrix = crate::sampling::ginibre(dim, &mut SeedSpec::new(seed, 77).rng());
    g.hermitian_part()
}

#[test]
fn identity_channel_leaves_states_alone() {
    let rho = random_pure_state(3, SeedSpec::new(1, 0)).unwrap();
    let out = Channel::identity(3).apply(&rho).unwrap();
    assert_eq!(out, rho);
}

#[test]
fn dephasing_scales_coherences() {
    let out = Channel::qubit_dephasing(0.25).unwrap().apply(&plus_state()).unwrap();
    let m = out.matrix();
    assert!((m[(0, 1)] - c(0.25, 0.0)).norm() < 1e-15);
    assert!((m[(1, 0)] - c(0.25, 0.0)).norm() < 1e-15);
    assert!((m[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
}

#[test]
fn amplitude_damping_relaxes_excited_state() {
    let rho = DensityMatrix::basis(2, 1).unwrap();
    let out = Channel::qubit_amplitude_damping(0.3).unwrap().apply(&rho).unwrap();
    let expected = CMatrix::from_real_diag(&[0.3, 0.7]);
    assert!(frobenius_distance(out.matrix(), &expected).unwrap() < 1e-15);
}

#[test]
fn apply_rejects_dimension_mismatch() {
    let rho = DensityMatrix::basis(3, 0).unwrap();
    assert!(Channel::identity(2).apply(&rho).is_err());
}

#[test]
fn superoperator_special_cases() {
    let sup = Channel::identity(2).to_superoperator().unwrap();
    assert_eq!(sup.matrix(), &CMatrix::identity(4));
    let u: CMatrix = haar_unitary(3, SeedSpec::new(3, 0)).unwrap();
    let sup = Channel::unitary(u.clone()).unwrap().to_superoperator().unwrap();
    assert_eq!(sup.matrix(), &kron(&u, &u.conj()).unwrap());
}

#[test]
fn superoperator_agrees_with_kraus_action() {
    let ch = Channel::random(3, 3, SeedSpec::new(11, 0)).unwrap();
    let sup = ch.to_superoperator().unwrap();
    for i in 0..20 {
        let rho = random_pure_state(3, SeedSpec::new(12, i)).unwrap();
        let direct = ch.apply(&rho).unwrap();
        let via = sup.apply(rho.matrix()).unwrap();
        assert!(frobenius_distance(direct.matrix(), &via).unwrap() <= 1e-10);
    }
}

#[test]
fn superop_trace_examples() {
    assert!((Channel::identity(8).superop_trace() - 64.0).abs() < 1e-12);
    let deph = Channel::qubit_dephasing(0.25).unwrap();
    assert!((deph.superop_trace() - 3.0).abs() < 1e-12);
    assert!((deph.to_superoperator().unwrap().trace().re - 3.0).abs() < 1e-12);
    let z = Channel::unitary(CMatrix::from_real_diag(&[1.0, -1.0])).unwrap();
    assert!(z.superop_trace().abs() < 1e-15);
}

#[test]
fn superop_trace_matches_matrix_trace_on_random_channels() {
    for dim in 2..=8 {
        for k in 1..=3 {
            let ch = Channel::random(dim, k, SeedSpec::new(dim as u64, k as u64)).unwrap();
            let literal = ch.to_superoperator().unwrap().trace();
            assert!((ch.superop_trace() - literal.re).abs() <= 1e-9);
            assert!(literal.im.abs() <= 1e-9);
        }
    }
}

#[test]
fn depolarizing_limits() {
    let rho = random_pure_state(4, SeedSpec::new(5, 5)).unwrap();
    let id = Channel::depolarizing(4, 1.0).unwrap().apply(&rho).unwrap();
    assert!(frobenius_distance(id.matrix(), rho.matrix()).unwrap() < 1e-15);
    let mixed = Channel::depolarizing(4, 0.0).unwrap().apply(&rho).unwrap();
    assert!(frobenius_distance(mixed.matrix(), DensityMatrix::maximally_mixed(4).matrix()).unwrap() < 1e-15);
    assert!(Channel::depolarizing(4, 1.2).is_err());
    assert!(Channel::depolarizing(4, -0.01).is_err());
}

#[test]
fn depolarizing_pauli_kraus_matches_structural_form() {
    let ch = Channel::depolarizing(4, 0.7).unwrap();
    let kraus = Channel::from_kraus(ch.materialize_kraus().unwrap()).unwrap();
    assert_eq!(kraus.kraus_ops().unwrap().len(), 16);
    let rho = random_pure_state(4, SeedSpec::new(6, 0)).unwrap();
    let a = ch.apply(&rho).unwrap();
    let b = kraus.apply(&rho).unwrap();
    assert!(frobenius_distance(a.matrix(), b.matrix()).unwrap() < 1e-14);
    assert!((ch.superop_trace() - kraus.superop_trace()).abs() < 1e-12);
    let sup_a = ch.to_superoperator().unwrap();
    let sup_b = kraus.to_superoperator().unwrap();
    assert!(frobenius_distance(sup_a.matrix(), sup_b.matrix()).unwrap() < 1e-13);
    assert!(Channel::depolarizing(3, 0.5).unwrap().materialize_kraus().is_err());
}

#[test]
fn motion_reversal_examples() {
    let u: CMatrix = haar_unitary(3, SeedSpec::new(8, 0)).unwrap();
    let rev = Channel::identity(3).motion_reversal(&u).unwrap();
    let rho = random_pure_state(3, SeedSpec::new(8, 1)).unwrap();
    assert!(frobenius_distance(rev.apply(&rho).unwrap().matrix(), rho.matrix()).unwrap() < 1e-14);

    // Z dephasing seen through a Hadamard is X flipping.
    let rev = Channel::qubit_dephasing(0.25).unwrap().motion_reversal(&hadamard()).unwrap();
    let out = rev.apply(&DensityMatrix::basis(2, 0).unwrap()).unwrap();
    assert!(frobenius_distance(out.matrix(), &CMatrix::from_real_diag(&[0.75, 0.25])).unwrap() < 1e-15);

    let not_unitary = CMatrix::from_real_diag(&[1.0, 2.0]);
    assert!(matches!(
        Channel::qubit_dephasing(0.1).unwrap().motion_reversal(&not_unitary),
        Err(Error::NotUnitary { .. })
    ));
}

#[test]
fn motion_reversal_preserves_superop_trace() {
    for i in 0..20 {
        let dim = 2 + (i % 4) as usize;
        let ch = Channel::random(dim, 2, SeedSpec::new(30, i)).unwrap();
        let u: CMatrix = haar_unitary(dim, SeedSpec::new(31, i)).unwrap();
        let rev = ch.motion_reversal(&u).unwrap();
        assert!((rev.superop_trace() - ch.superop_trace()).abs() <= 1e-9);
        let sup_rev = Channel::from_superoperator(ch.to_superoperator().unwrap()).motion_reversal(&u).unwrap();
        let expected = rev.to_superoperator().unwrap();
        assert!(frobenius_distance(sup_rev.to_superoperator().unwrap().matrix(), expected.matrix()).unwrap() < 1e-12);
    }
}

#[test]
fn trace_preserving_channels_keep_states_physical() {
    for dim in [2usize, 3, 5] {
        let ch = Channel::random(dim, 3, SeedSpec::new(40, dim as u64)).unwrap();
        for i in 0..50 {
            let rho = random_pure_state(dim, SeedSpec::new(41, i)).unwrap();
            let out = ch.apply(&rho).unwrap();
            assert!((out.trace() - 1.0).abs() <= 1e-8);
            assert!(out.matrix().is_hermitian(1e-8));
        }
    }
}

#[test]
fn non_trace_preserving_kraus_rejected() {
    let bad = vec![CMatrix::identity(2).scale_real(0.5)];
    assert!(matches!(Channel::from_kraus(bad.clone()), Err(Error::NotTracePreserving { .. })));
    let sub = Channel::from_kraus_subnormalized(bad).unwrap();
    assert!(!sub.is_trace_preserving());
}

#[test]
fn lindblad_examples() {
    let zero = LindbladGenerator::new(CMatrix::zeros(2, 2), vec![], 1.0).unwrap();
    let rho = random_pure_state(2, SeedSpec::new(50, 0)).unwrap();
    assert_eq!(zero.apply(rho.matrix()).unwrap(), CMatrix::zeros(2, 2));

    let h = CMatrix::from_real_diag(&[1.0, -1.0]);
    let gen = LindbladGenerator::new(h, vec![], 1.0).unwrap();
    let diag_state = CMatrix::from_real_diag(&[0.3, 0.7]);
    assert!(gen.apply(&diag_state).unwrap().frobenius_norm() < 1e-15);

    let gen = LindbladGenerator::dissipative(2, vec![sigma_minus().scale_real(0.3f64.sqrt())], 1.0).unwrap();
    let out = gen.apply(DensityMatrix::basis(2, 1).unwrap().matrix()).unwrap();
    assert!((out[(1, 1)] - c(-0.3, 0.0)).norm() < 1e-15);
    assert!((out[(0, 0)] - c(0.3, 0.0)).norm() < 1e-15);
}

#[test]
fn lindblad_removes_traces_and_records_them() {
    let h = CMatrix::from_real_diag(&[2.0, 0.0]);
    let v = CMatrix::from_real_diag(&[1.0, 0.0]);
    let gen = LindbladGenerator::new(h, vec![v], 0.5).unwrap();
    assert!(gen.hamiltonian().trace().norm() < 1e-15);
    assert!(gen.jump_ops()[0].trace().norm() < 1e-15);
    assert_eq!(gen.removed_traces().hamiltonian, c(1.0, 0.0));
    assert_eq!(gen.removed_traces().jumps, vec![c(0.5, 0.0)]);
    assert!(LindbladGenerator::new(sigma_minus(), vec![], 1.0).is_err());
    assert!(LindbladGenerator::new(CMatrix::zeros(2, 2), vec![], -1.0).is_err());
}

#[test]
fn lindblad_output_is_traceless_and_hermitian() {
    let jumps = vec![
        crate::sampling::ginibre(4, &mut SeedSpec::new(60, 0).rng()),
        crate::sampling::ginibre(4, &mut SeedSpec::new(60, 1).rng()),
    ];
    let gen = LindbladGenerator::new(random_hermitian(4, 61), jumps, 1.0).unwrap();
    let sup = gen.superoperator().unwrap();
    for i in 0..20 {
        let x = random_hermitian(4, 100 + i);
        let out = gen.apply(&x).unwrap();
        assert!(out.trace().norm() <= 1e-9);
        assert!(out.is_hermitian(1e-9));
        assert!(frobenius_distance(&sup.apply(&x).unwrap(), &out).unwrap() < 1e-12);
    }
}

#[test]
fn lindblad_hamiltonian_part_is_a_commutator() {
    let h = random_hermitian(3, 70);
    let gen = LindbladGenerator::new(h.clone(), vec![], 1.0).unwrap();
    let x = random_hermitian(3, 71);
    let expected = commutator(&h, &x).scale(c(0.0, -1.0));
    assert!(frobenius_distance(&gen.apply(&x).unwrap(), &expected).unwrap() < 1e-12);
}

#[test]
fn compose_examples() {
    let b = Channel::random(2, 2, SeedSpec::new(80, 0)).unwrap();
    let composed = compose(&Channel::identity(2), &b).unwrap();
    let rho = random_pure_state(2, SeedSpec::new(80, 1)).unwrap();
    assert!(
        frobenius_distance(composed.apply(&rho).unwrap().matrix(), b.apply(&rho).unwrap().matrix()).unwrap() < 1e-15
    );

    let (q1, q2) = (0.1, 0.3);
    let both = compose(&Channel::qubit_dephasing(q1).unwrap(), &Channel::qubit_dephasing(q2).unwrap()).unwrap();
    let out = both.apply(&plus_state()).unwrap();
    let factor = (1.0 - 2.0 * q1) * (1.0 - 2.0 * q2);
    assert!((out.matrix()[(0, 1)].re - 0.5 * factor).abs() < 1e-15);
}

#[test]
fn compose_matches_superoperator_product() {
    let a = Channel::random(3, 3, SeedSpec::new(90, 0)).unwrap();
    let b = Channel::random(3, 2, SeedSpec::new(90, 1)).unwrap();
    let ab = compose(&a, &b).unwrap();
    let product = &a.to_superoperator().unwrap().into_matrix() * b.to_superoperator().unwrap().matrix();
    assert!(frobenius_distance(ab.to_superoperator().unwrap().matrix(), &product).unwrap() <= 1e-9);
    assert!(compose(&a, &Channel::identity(2)).is_err());
}

#[test]
fn compose_falls_back_to_superoperator_above_kraus_cap() {
    let a = Channel::dephasing(8, 0.2).unwrap();
    let b = Channel::amplitude_damping(8, 0.1).unwrap();
    assert_eq!(a.kraus_ops().unwrap().len() * b.kraus_ops().unwrap().len(), 64);
    let small = compose(&a, &b).unwrap();
    assert!(small.kraus_ops().is_some());
    let big = compose(&small, &b).unwrap();
    assert!(matches!(big.form(), ChannelForm::Superop(_)));
    let rho = random_pure_state(8, SeedSpec::new(91, 0)).unwrap();
    let direct = small.apply(&b.apply(&rho).unwrap()).unwrap();
    assert!(frobenius_distance(big.apply(&rho).unwrap().matrix(), direct.matrix()).unwrap() < 1e-12);
    assert!((big.superop_trace() - big.to_superoperator().unwrap().trace().re).abs() < 1e-12);
    assert!(big.trace_preservation_defect() < 1e-12);
}

#[test]
fn per_qubit_channels_have_product_structure() {
    let ch = Channel::dephasing(16, 0.25).unwrap();
    assert_eq!(ch.kraus_ops().unwrap().len(), 16);
    assert!((ch.superop_trace() - 81.0).abs() < 1e-10);
    assert!(ch.is_trace_preserving());
    assert!(Channel::dephasing(6, 0.25).is_err());
}

#[test]
fn spec_builds_each_kind() {
    let dep: ChannelSpec = serde_json::from_str(r#"{"dim": 4, "type": "depolarizing", "p": 0.9}"#).unwrap();
    assert_eq!(dep.build_channel().unwrap(), Channel::depolarizing(4, 0.9).unwrap());
    let deph: ChannelSpec = serde_json::from_str(r#"{"dim": 16, "type": "dephasing", "q": 0.25}"#).unwrap();
    assert!((deph.build_channel().unwrap().superop_trace() - 81.0).abs() < 1e-10);
    let ad: ChannelSpec = serde_json::from_str(r#"{"dim": 2, "type": "amplitude_damping", "gamma": 0.3}"#).unwrap();
    assert_eq!(ad.build_channel().unwrap(), Channel::qubit_amplitude_damping(0.3).unwrap());
    let un: ChannelSpec =
        serde_json::from_str(r#"{"dim": 2, "type": "unitary", "matrix": [[[0,0],[1,0]],[[1,0],[0,0]]]}"#).unwrap();
    assert!((un.build_channel().unwrap().superop_trace()).abs() < 1e-15);
    let lb: ChannelSpec = serde_json::from_str(
        r#"{"dim": 2, "type": "lindblad", "epsilon": 0.01, "jumps": [[[[0,0],[0.5477225575051661,0]],[[0,0],[0,0]]]]}"#,
    )
    .unwrap();
    let gen = lb.build_lindblad().unwrap();
    assert!((gen.dissipation_weight() - 0.3).abs() < 1e-15);
    assert!(lb.build_channel().is_err());
}

#[test]
fn spec_errors_name_the_problem() {
    let err = ChannelSpec::from_json(r#"{"type": "depolarizing", "p": 0.9}"#).unwrap_err();
    assert!(err.to_string().contains("dim"), "{err}");
    let err = ChannelSpec::from_json(r#"{"dim": 2, "type": "bogus"}"#).unwrap_err();
    assert!(err.to_string().contains("bogus"), "{err}");
    let spec = ChannelSpec::from_json(r#"{"dim": 3, "type": "kraus", "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#)
        .unwrap();
    assert!(spec.build().is_err());
}

fn entry() -> impl Strategy<Value = [f64; 2]> {
    (any::<f64>().prop_filter("finite", |x| x.is_finite()), -1e3..1e3f64).prop_map(|(a, b)| [a, b])
}

proptest! {
    #[test]
    fn kraus_spec_json_round_trip_is_lossless(
        ops in proptest::collection::vec(proptest::collection::vec(proptest::collection::vec(entry(), 2), 2), 1..4)
    ) {
        let spec = ChannelSpec { dim: 2, kind: ChannelKind::Kraus { kraus: ops } };
        let text = spec.to_json();
        let back = ChannelSpec::from_json(&text).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn scalar_spec_round_trip(p in 0.0..1.0f64, dim in 2usize..64) {
        let spec = ChannelSpec { dim, kind: ChannelKind::Depolarizing { p } };
        prop_assert_eq!(ChannelSpec::from_json(&spec.to_json()).unwrap(), spec);
    }
}
