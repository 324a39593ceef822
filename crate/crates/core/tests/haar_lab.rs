use randecho::fidelity::depolarizing_strength;
use randecho::haar_lab::*;
use randecho::stats::loglog_slope;
use randecho::{Channel, SeedSpec};

#[test]
fn invariant_two_matches_superop_trace() {
    for i in 0..20u64 {
        let d = 2 + (i % 4) as usize;
        let ch = Channel::random(d, 1 + (i % 3) as usize, SeedSpec::new(10, i)).unwrap();
        let inv = invariant_two(&ch.to_superoperator().unwrap());
        assert!((inv.re - ch.superop_trace()).abs() <= 1e-9);
        assert!(inv.im.abs() <= 1e-9);
    }
}

#[test]
fn twirl_of_random_channel_converges() {
    let ch = Channel::random(4, 3, SeedSpec::new(11, 0)).unwrap();
    let reps = twirl_convergence(&ch, &[100, 1000, 20_000], SeedSpec::new(11, 1)).unwrap();
    let c = 5.0 * reps[0].distance_to_depolarizing * 10.0;
    let last = reps[2];
    assert!(last.distance_to_depolarizing <= c / (20_000f64).sqrt(), "{reps:?}");
    assert!((last.p_empirical - last.p_analytic).abs() <= 1e-3);
    assert!(last.invariant_drift <= 1e-9);
    let x: Vec<f64> = reps.iter().map(|r| r.n_samples as f64).collect();
    let y: Vec<f64> = reps.iter().map(|r| r.distance_to_depolarizing).collect();
    let slope = loglog_slope(&x, &y).unwrap();
    assert!((-0.6..=-0.4).contains(&slope), "{slope}");
}

#[test]
fn twirl_p_matches_closed_form() {
    let ch = Channel::qubit_amplitude_damping(0.4).unwrap();
    let r = empirical_twirl(&ch, 500, SeedSpec::new(12, 0)).unwrap();
    assert!((r.p_analytic - depolarizing_strength(&ch)).abs() < 1e-15);
    assert!((r.p_empirical - r.p_analytic).abs() < 1e-12);
}

#[test]
fn concentration_identity_is_exact() {
    let r = concentration_study(ChannelFamily::Identity, &[4, 32], 100, SeedSpec::new(13, 0)).unwrap();
    for row in &r.rows {
        assert!((row.mean - 1.0).abs() < 1e-12);
    }
    assert!(r.to_csv().starts_with("dim,mean,variance,samples\n"));
}

#[test]
fn concentration_variance_shrinks_with_dimension() {
    let r = concentration_study(ChannelFamily::AmplitudeDampingFirstQubit { gamma: 0.3 }, &[4, 16, 64], 1000, SeedSpec::new(14, 0))
        .unwrap();
    assert!(r.rows.windows(2).all(|w| w[1].variance < w[0].variance), "{r:?}");
    assert!(r.slope.unwrap() < 0.0);
}

#[test]
fn concentration_rejects_large_dimensions() {
    assert!(concentration_study(ChannelFamily::Identity, &[256], 10, SeedSpec::new(0, 0)).is_err());
}

#[test]
fn state_and_unitary_averages_agree_for_dephasing() {
    let ch = Channel::qubit_dephasing(0.25).unwrap();
    let r = state_vs_unitary_average(&ch, 100_000, SeedSpec::new(15, 0)).unwrap();
    assert!((r.over_states.mean - 5.0 / 6.0).abs() <= 3.0 * r.over_states.stderr, "{r:?}");
    assert!((r.over_unitaries.mean - 5.0 / 6.0).abs() <= 3.0 * r.over_unitaries.stderr, "{r:?}");
}

#[test]
fn state_and_unitary_averages_agree_for_random_channel() {
    let ch = Channel::random(8, 3, SeedSpec::new(16, 0)).unwrap();
    let r = state_vs_unitary_average(&ch, 10_000, SeedSpec::new(16, 1)).unwrap();
    assert!(r.z_score() <= 3.0, "{r:?}");
}

#[test]
fn equivalence_rejects_large_dimension() {
    assert!(state_vs_unitary_average(&Channel::identity(65), 10, SeedSpec::new(0, 0)).is_err());
}
