use randecho::sampling::{gue_hamiltonian, haar_unitary, random_state_vector, SeedSpec};
use randecho::stats::summarize;
use randecho::{CMatrix, CMatrix32};

fn within(xs: &[f64], target: f64, k: f64) -> bool {
    let s = summarize(xs);
    (s.mean - target).abs() <= k * s.stderr
}

#[test]
fn haar_trace_moments() {
    // E|Tr U|^2 = 1 and E|Tr U|^4 = 2 for D >= 2.
    for d in [2usize, 3, 5] {
        let traces: Vec<f64> = (0..20_000u64)
            .map(|i| {
                let u: CMatrix = haar_unitary(d, SeedSpec::new(1, i)).unwrap();
                u.trace().norm_sqr()
            })
            .collect();
        assert!(within(&traces, 1.0, 4.0), "D={d}");
        let fourth: Vec<f64> = traces.iter().map(|t| t * t).collect();
        assert!(within(&fourth, 2.0, 4.0), "D={d}");
    }
}

#[test]
fn haar_entries_are_isotropic() {
    let d = 4;
    let samples: Vec<CMatrix> = (0..20_000u64).map(|i| haar_unitary(d, SeedSpec::new(2, i)).unwrap()).collect();
    for (r, c) in [(0, 0), (1, 3), (3, 3)] {
        let sq: Vec<f64> = samples.iter().map(|u| u[(r, c)].norm_sqr()).collect();
        assert!(within(&sq, 0.25, 4.0));
        // Without the phase correction the diagonal would have a positive real mean.
        let re: Vec<f64> = samples.iter().map(|u| u[(r, c)].re).collect();
        assert!(within(&re, 0.0, 4.0), "({r},{c})");
    }
}

#[test]
fn haar_in_single_precision_is_unitary() {
    let u: CMatrix32 = haar_unitary(6, SeedSpec::new(3, 0)).unwrap();
    assert!(u.unitarity_defect() < 1e-5);
}

#[test]
fn random_states_are_uniform_on_average() {
    let d = 3;
    let pops: Vec<f64> =
        (0..20_000u64).map(|i| random_state_vector(d, SeedSpec::new(4, i)).unwrap()[1].norm_sqr()).collect();
    assert!(within(&pops, 1.0 / 3.0, 4.0));
}

#[test]
fn gue_normalization() {
    for (d, s) in [(2usize, 1.0), (4, 0.5), (8, 2.0)] {
        let tr2: Vec<f64> = (0..5_000u64)
            .map(|i| {
                let h = gue_hamiltonian(d, s, SeedSpec::new(5, i)).unwrap();
                (&h * &h).trace().re
            })
            .collect();
        let df = d as f64;
        assert!(within(&tr2, s * s * (df + 1.0 - 2.0 / df), 4.0), "D={d}");
    }
}

#[test]
fn streams_are_independent_of_each_other() {
    let a: CMatrix = haar_unitary(3, SeedSpec::new(9, 0)).unwrap();
    let b: CMatrix = haar_unitary(3, SeedSpec::new(9, 1)).unwrap();
    let c: CMatrix = haar_unitary(3, SeedSpec::new(9, 0).derive(1)).unwrap();
    assert_ne!(a, b);
    assert_ne!(a, c);
    assert_eq!(a, haar_unitary(3, SeedSpec::new(9, 0)).unwrap());
}
