//! Joint estimation of phase and phase diffusion with two-mode Fock probes.
//!
//! The pipeline runs a probe state (generalized Holland-Burnett, Holland-Burnett
//! or N00N) through a Mach-Zehnder interferometer with Gaussian phase diffusion
//! and photon loss, models double-homodyne detection of the output, and
//! evaluates the classical and quantum Fisher information matrices for the
//! parameter pair (φ, Δ) together with the figures of merit built on them.
//!
//! ```
//! use fockfisher::{evaluate, Scenario, StateSpec};
//!
//! let scenario = Scenario::new(StateSpec::Ghb { n: 0, photons: 2 }, 0.3, 5.0, 1.0, 1.0);
//! let eval = evaluate(&scenario).unwrap();
//! let upsilon = eval.upsilon().unwrap();
//! assert!(upsilon > 1.0 && upsilon < 2.0);
//! ```
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod error;
pub mod fisher;
pub mod fock;
pub mod homodyne;
pub mod linalg;
pub mod metrics;
pub mod quadrature;
pub mod validation;

pub use channels::{
    apply_loss, apply_phase_diffusion, diffusion_integral_oracle, encode, parameter_derivatives,
    BlockedDensity, DensityDerivatives, LossBlock,
};
pub use error::{Error, Result};
pub use fisher::{
    classical_fisher, commutation_diagnostics, fisher_pair, hcr_bound, qfi_and_slds, FisherPair,
    QfiResult,
};
pub use fock::{
    balanced_bs_unitary, ghb_state, hb_state, kravchuk_coeff, noon_state, ProbeState,
    SectorUnitary, StateLabel,
};
pub use homodyne::{hermite_wavefunction, joint_pdf, JointPdfField};
pub use linalg::{CMat, C64};
pub use metrics::{
    default_delta_grid, evaluate, find_delta_cutoff, qcr_sum, sensitivity_gain, sweep_delta,
    sweep_family, sweep_photon_number, tradeoff_upsilon, CutoffResult, Evaluation, Family,
    Scenario, StateSpec, SweepConfig, SweepRow, SweepTable,
};
pub use quadrature::{GridSpec, QuadGrid};
pub use validation::{run_suite, Check, SuiteOptions};

/// Parameter order used by every 2×2 matrix in this crate.
pub const PARAMETER_ORDER: [&str; 2] = ["phi", "Delta"];
