use fockfisher::metrics::{evaluate, Scenario, StateSpec};
use fockfisher::Error;

const QUBIT: StateSpec = StateSpec::Ghb { n: 0, photons: 1 };

#[test]
fn qubit_homodyne_is_optimal_without_diffusion() {
    let e = evaluate(&Scenario::new(QUBIT, 0.3, 0.0, 1.0, 1.0)).unwrap();
    let (fc, fq) = (e.pair.physical_fc(), e.pair.physical_fq());
    assert!((fq[(0, 0)] - 1.0).abs() < 1e-12);
    assert!((fc[(0, 0)] - 1.0).abs() < 1e-6, "{}", fc[(0, 0)]);
    // the pdf does not depend on Delta at Delta = 0
    assert_eq!(fc[(1, 1)], 0.0);
    assert_eq!(fc[(0, 1)], 0.0);
    assert_eq!(fq[(1, 1)], 0.0);
}

#[test]
fn qubit_qfi_closed_form_through_the_pipeline() {
    for delta in [0.1_f64, 0.7, 1.9] {
        let v2: f64 = (-delta * delta).exp();
        let fq = evaluate(&Scenario::new(QUBIT, 1.1, delta, 1.0, 1.0)).unwrap().pair.physical_fq();
        assert!((fq[(0, 0)] - v2).abs() < 1e-12);
        assert!((fq[(1, 1)] - delta * delta * v2 / (1.0 - v2)).abs() < 1e-12);
    }
}

#[test]
fn zero_diffusion_leaves_figures_of_merit_undefined() {
    let e = evaluate(&Scenario::new(StateSpec::Ghb { n: 0, photons: 4 }, 0.3, 0.0, 1.0, 1.0)).unwrap();
    assert_eq!(e.upsilon(), Err(Error::SingularQfi { param: "Delta" }));
    assert_eq!(e.sigma2(), Err(Error::SingularQfi { param: "Delta" }));
    assert!(e.hcr().is_err());
}

#[test]
fn large_diffusion_plateau() {
    for s in [StateSpec::Ghb { n: 0, photons: 4 }, StateSpec::Hb { photons: 6 }, StateSpec::Noon { photons: 5 }] {
        let at = |d| evaluate(&Scenario::new(s, 0.3, d, 1.0, 1.0)).unwrap();
        let (a, b) = (at(5.0), at(30.0));
        // the phase information survives only in the reduced units at Delta = 30
        let rel = (a.pair.fc[(0, 0)] / a.pair.fq[(0, 0)] - b.pair.fc[(0, 0)] / b.pair.fq[(0, 0)]).abs();
        assert!(rel < 1e-6, "{s}: {rel:e}");
        assert!((a.upsilon().unwrap() - b.upsilon().unwrap()).abs() < 1e-6);
    }
}

#[test]
fn gain_family_has_vanishing_off_diagonals_and_commutator_trace() {
    for n in [2, 4, 6] {
        for (delta, eta) in [(0.5, 1.0), (2.0, 0.5), (0.7, 0.8)] {
            let e = evaluate(&Scenario::new(StateSpec::Ghb { n: 0, photons: n }, 0.3, delta, eta, eta)).unwrap();
            let (c, q) = e.pair.normalized_off_diagonals();
            assert!(c < 1e-6 && q < 1e-6, "N={n}: {c:e} {q:e}");
            assert!(e.pair.commutator_trace().norm() < 1e-8);
            assert!(e.pair.physical_commutator_norm() > 1e-3);
            assert!(e.flags().is_empty());
        }
    }
}

#[test]
fn lossy_commutation_example() {
    let e = evaluate(&Scenario::new(StateSpec::Ghb { n: 0, photons: 4 }, 0.3, 0.7, 0.5, 0.5)).unwrap();
    assert!(e.pair.commutator_trace().norm() < 1e-8);
    let (h, s) = (e.hcr().unwrap(), e.sigma2().unwrap());
    assert!((h - s).abs() < 1e-8 * s.max(1.0));
}

#[test]
fn asymmetric_loss_is_supported() {
    let e = evaluate(&Scenario::new(StateSpec::Ghb { n: 1, photons: 3 }, 0.3, 1.0, 0.9, 0.4)).unwrap();
    let u = e.upsilon().unwrap();
    assert!(u > 0.0 && u < 2.0);
}
