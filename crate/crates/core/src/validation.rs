//! Fast invariant suite behind the `validate` command.

use serde::Serialize;

use crate::channels::{encode, parameter_derivatives};
use crate::fock::{ghb_state, hb_state, noon_state, ProbeState, SectorUnitary};
use crate::homodyne::joint_pdf;
use crate::linalg::{hermitian_eigen, hermitian_deviation};
use crate::metrics::{evaluate, log_spaced, Scenario, StateSpec};
use crate::quadrature::GridSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, worst: f64, tol: f64, passed: bool) -> Self {
        Check {
            name,
            passed,
            detail: format!("worst {worst:.3e} (tolerance {tol:.0e})"),
        }
    }
}

/// Settings for [`run_suite`]. The grid override applies to every check
/// that integrates over outcomes.
#[derive(Debug, Clone, Copy, Default)]
pub struct SuiteOptions {
    pub grid: GridSpec,
}

fn probes() -> Vec<ProbeState> {
    let mut v = Vec::new();
    for n in 1..=6 {
        v.push(ghb_state(n, 0).unwrap());
        v.push(noon_state(n).unwrap());
    }
    for n in [2, 4, 6] {
        v.push(hb_state(n).unwrap());
    }
    v.push(ghb_state(5, 2).unwrap());
    v
}

fn unitarity() -> Check {
    let worst = (0..=20)
        .map(|m| SectorUnitary::balanced_real(m).unitarity_deviation())
        .fold(0.0, f64::max);
    Check::new("kravchuk_unitarity", worst, 1e-10, worst < 1e-10)
}

fn trace_and_psd() -> [Check; 2] {
    let mut worst_trace = 0.0_f64;
    let mut worst_eig = 0.0_f64;
    let mut worst_herm = 0.0_f64;
    for s in probes() {
        for delta in [0.0, 0.5, 5.0] {
            for eta in [1.0, 0.5] {
                let rho = encode(&s, 0.3, delta, eta, eta).unwrap();
                worst_trace = worst_trace.max((rho.total_trace() - 1.0).abs());
                for b in rho.blocks() {
                    worst_herm = worst_herm.max(hermitian_deviation(b.density()));
                    let (ev, _) = hermitian_eigen(b.density());
                    worst_eig = worst_eig.min(ev[0]);
                }
            }
        }
    }
    [
        Check::new("channel_trace", worst_trace, 1e-10, worst_trace < 1e-10),
        Check {
            name: "block_psd",
            passed: worst_eig >= -1e-10 && worst_herm < 1e-12,
            detail: format!("min eigenvalue {worst_eig:.3e}, max |rho - rho^dag| {worst_herm:.3e}"),
        },
    ]
}

fn normalization(opts: &SuiteOptions) -> Check {
    let mut worst = 0.0_f64;
    for s in probes().iter().filter(|s| s.total_photons() % 2 == 0) {
        for delta in [0.0, 0.5, 5.0] {
            for eta in [1.0, 0.5] {
                let rho = encode(s, 0.3, delta, eta, eta).unwrap();
                let d = parameter_derivatives(&rho);
                let Ok(grid) = opts.grid.build(s.total_photons()) else {
                    return Check {
                        name: "pdf_normalization",
                        passed: false,
                        detail: "invalid grid".into(),
                    };
                };
                let f = joint_pdf(&rho, &d, &grid).unwrap();
                worst = worst.max((f.integrate(&grid, &f.p) - 1.0).abs());
            }
        }
    }
    Check::new("pdf_normalization", worst, 1e-6, worst < 1e-6)
}

fn fisher_checks(opts: &SuiteOptions) -> [Check; 2] {
    let states = [
        StateSpec::Ghb { n: 0, photons: 3 },
        StateSpec::Hb { photons: 4 },
        StateSpec::Noon { photons: 3 },
    ];
    let mut worst_rel = 0.0_f64;
    let mut worst_gap = 0.0_f64;
    for state in states {
        for eta in [1.0, 0.5] {
            let evals: Vec<_> = [0.0, 0.4, 1.3]
                .iter()
                .map(|&phi| evaluate(&Scenario::new(state, phi, 0.5, eta, eta).with_grid(opts.grid)))
                .collect();
            let Ok(evals) = evals.into_iter().collect::<Result<Vec<_>, _>>() else {
                worst_rel = f64::INFINITY;
                continue;
            };
            let base = &evals[0].pair;
            for e in &evals {
                worst_gap = worst_gap.min(e.pair.normalized_gap_min_eigenvalue());
                for (a, b) in [(&e.pair.fc, &base.fc), (&e.pair.fq, &base.fq)] {
                    for i in 0..2 {
                        let rel = (a[(i, i)] - b[(i, i)]).abs() / b[(i, i)].abs().max(1e-300);
                        worst_rel = worst_rel.max(rel);
                    }
                }
            }
        }
    }
    [
        Check::new("phi_independence", worst_rel, 1e-6, worst_rel < 1e-6),
        Check::new("qfi_dominates_fi", worst_gap, 1e-8, worst_gap >= -1e-8),
    ]
}

fn qubit_bound(opts: &SuiteOptions) -> Check {
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    for delta in log_spaced(0.05, 5.0, 10) {
        for eta in [1.0, 0.5] {
            let s = Scenario::new(StateSpec::Ghb { n: 0, photons: 1 }, 0.3, delta, eta, eta).with_grid(opts.grid);
            match evaluate(&s).and_then(|e| e.upsilon()) {
                Ok(u) => worst = worst.max(u),
                Err(_) => failures += 1,
            }
        }
    }
    Check {
        name: "qubit_sqb",
        passed: failures == 0 && worst <= 1.0 + 1e-6,
        detail: format!("max Upsilon {worst:.9} over 10 Delta x 2 eta ({failures} undefined)"),
    }
}

/// Run every check; the result order is fixed.
pub fn run_suite(opts: &SuiteOptions) -> Vec<Check> {
    let mut checks = vec![unitarity()];
    checks.extend(trace_and_psd());
    checks.push(normalization(opts));
    checks.extend(fisher_checks(opts));
    checks.push(qubit_bound(opts));
    checks
}
