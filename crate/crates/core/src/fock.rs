//! Two-mode fixed-photon-number probe states and the balanced beam splitter.
//!
//! Basis index `p` of an `N`-photon state is the Fock state `|p, N-p⟩`: `p`
//! photons in mode a (the arm carrying the phase shift), `N-p` in mode b.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};

/// Largest photon number supported by the coefficient routines.
pub const MAX_PHOTONS: usize = 40;

const NORM_TOL: f64 = 1e-12;

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn binomial_i128(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// Krawtchouk polynomial `K_p(n) = Σ_j (-1)^j C(n,j) C(N-n,p-j)` at parameter 1/2.
///
/// Equal to `C(N,p) · ₂F₁(-n,-p;-N;2)`; integer valued, so it vanishes exactly
/// where the Hong-Ou-Mandel interference does.
fn krawtchouk(total: usize, n: usize, p: usize) -> i128 {
    let mut sum = 0_i128;
    for j in 0..=n.min(p) {
        if p - j > total - n {
            continue;
        }
        let term = binomial_i128(n, j) * binomial_i128(total - n, p - j);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

/// Kravchuk coefficient `A_N(n,p)`: amplitude of `|p, N-p⟩` after a balanced
/// beam splitter acts on `|n, N-n⟩`.
///
/// `A_N(n,p) = (-1)^n sqrt(2^{-N} C(N,n) C(N,p)) ₂F₁(-n,-p;-N;2)`, evaluated
/// from the integer Krawtchouk sum with a log-factorial prefactor.
pub fn kravchuk_coeff(total: usize, n: usize, p: usize) -> Result<f64> {
    if total > MAX_PHOTONS {
        return Err(Error::Domain(format!(
            "N = {total} exceeds supported maximum {MAX_PHOTONS}"
        )));
    }
    if n > total || p > total {
        return Err(Error::Domain(format!(
            "Kravchuk coefficient needs 0 <= n, p <= N (N = {total}, n = {n}, p = {p})"
        )));
    }
    let k = krawtchouk(total, n, p);
    if k == 0 {
        return Ok(0.0);
    }
    let ln_pref = 0.5
        * (-(total as f64) * std::f64::consts::LN_2 + ln_binomial(total, n)
            - ln_binomial(total, p));
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * ln_pref.exp() * k as f64)
}

/// Which family a probe state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum StateLabel {
    /// Balanced beam splitter output for input `|n, N-n⟩`.
    Ghb { n: usize, photons: usize },
    /// Holland-Burnett state, `n = ⌊N/2⌋`.
    Hb { photons: usize },
    Noon { photons: usize },
    Custom { photons: usize },
}

impl StateLabel {
    pub fn photons(&self) -> usize {
        match *self {
            StateLabel::Ghb { photons, .. }
            | StateLabel::Hb { photons }
            | StateLabel::Noon { photons }
            | StateLabel::Custom { photons } => photons,
        }
    }

    /// Input occupation `n` of mode a' for beam-splitter-generated states.
    pub fn input_n(&self) -> Option<usize> {
        match *self {
            StateLabel::Ghb { n, .. } => Some(n),
            StateLabel::Hb { photons } => Some(photons / 2),
            _ => None,
        }
    }

    /// Partition label `δ = N - 2n`.
    pub fn partition(&self) -> Option<i64> {
        self.input_n()
            .map(|n| self.photons() as i64 - 2 * n as i64)
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StateLabel::Ghb { n, photons } => write!(f, "ghb({},{})", n, photons - n),
            StateLabel::Hb { photons } => write!(f, "hb({photons})"),
            StateLabel::Noon { photons } => write!(f, "noon({photons})"),
            StateLabel::Custom { photons } => write!(f, "custom({photons})"),
        }
    }
}

/// Pure two-mode state with a definite total photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeState {
    total_photons: usize,
    amplitudes: Vec<C64>,
    label: StateLabel,
}

impl ProbeState {
    /// Builds a state from amplitudes `c_p` over `|p, N-p⟩`; rejects
    /// vectors that are not unit norm within 1e-12.
    pub fn new(amplitudes: Vec<C64>, label: StateLabel) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Dimension("empty amplitude vector".into()));
        }
        let total_photons = amplitudes.len() - 1;
        if label.photons() != total_photons {
            return Err(Error::Dimension(format!(
                "label {label} does not match {} amplitudes",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                value: norm,
                reason: "squared norm must be 1",
            });
        }
        Ok(Self {
            total_photons,
            amplitudes,
            label,
        })
    }

    pub fn total_photons(&self) -> usize {
        self.total_photons
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn label(&self) -> StateLabel {
        self.label
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `|Ψ_gHB(n, N-n)⟩ = U_BS |n, N-n⟩` with real amplitudes `A_N(n,p)`.
pub fn ghb_state(total: usize, n: usize) -> Result<ProbeState> {
    let amps = (0..=total)
        .map(|p| kravchuk_coeff(total, n, p).map(|a| C64::new(a, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    ProbeState::new(amps, StateLabel::Ghb { n, photons: total })
}

/// Holland-Burnett state: equal inputs for even `N`, `n = ⌊N/2⌋` for odd `N`.
pub fn hb_state(total: usize) -> Result<ProbeState> {
    if total < 2 {
        return Err(Error::Domain(format!("HB state needs N >= 2, got {total}")));
    }
    let mut state = ghb_state(total, total / 2)?;
    state.label = StateLabel::Hb { photons: total };
    Ok(state)
}

/// `(|N,0⟩ + |0,N⟩)/√2`.
pub fn noon_state(total: usize) -> Result<ProbeState> {
    if total < 1 {
        return Err(Error::Domain("N00N state needs N >= 1".into()));
    }
    let mut amps = vec![C64::new(0.0, 0.0); total + 1];
    amps[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[total] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ProbeState::new(amps, StateLabel::Noon { photons: total })
}

/// Balanced beam splitter restricted to the `M`-photon sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorUnitary {
    pub sector_photons: usize,
    pub matrix: CMat,
}

/// `a†b + b†a` on `{|m, M-m⟩}`.
fn hopping_generator(sector: usize) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(sector + 1, sector + 1);
    for m in 0..sector {
        let v = (((m + 1) * (sector - m)) as f64).sqrt();
        g[(m + 1, m)] = v;
        g[(m, m + 1)] = v;
    }
    g
}

/// `U_BS = exp[-i π/4 (a†b + b†a)]` on the `M`-photon sector, built from the
/// spectral decomposition of the generator.
///
/// Entries satisfy `U[p][n] = i^{n-p} A_M(n,p)`.
pub fn balanced_bs_unitary(sector: usize) -> SectorUnitary {
    let matrix = linalg::exp_i_symmetric(&hopping_generator(sector), std::f64::consts::FRAC_PI_4);
    SectorUnitary {
        sector_photons: sector,
        matrix,
    }
}

impl SectorUnitary {
    /// Real-amplitude balanced beam splitter `exp[π/4 (a†b - b†a)]`.
    ///
    /// Differs from [`balanced_bs_unitary`] by the diagonal phase `i^{p-n}`
    /// (a π/2 phase on mode b before and after), which makes every entry real:
    /// `U[p][n] = A_M(n,p)`.
    pub fn balanced_real(sector: usize) -> Self {
        let complex = balanced_bs_unitary(sector);
        let matrix = CMat::from_fn(sector + 1, sector + 1, |p, n| {
            complex.matrix[(p, n)] * i_pow(p as i64 - n as i64)
        });
        Self {
            sector_photons: sector,
            matrix,
        }
    }

    pub fn dim(&self) -> usize {
        self.sector_photons + 1
    }

    pub fn unitarity_deviation(&self) -> f64 {
        linalg::unitarity_deviation(&self.matrix)
    }

    /// Applies the unitary to a basis vector `|n, M-n⟩`.
    pub fn column(&self, n: usize) -> Vec<C64> {
        self.matrix.column(n).iter().copied().collect()
    }
}

/// `i^k` for integer `k`.
pub(crate) fn i_pow(k: i64) -> C64 {
    match k.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}
