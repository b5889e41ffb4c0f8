//! Figures of merit and sweep drivers.
//!
//! `Υ = F_C[φ,φ]/F_Q[φ,φ] + F_C[Δ,Δ]/F_Q[Δ,Δ]` measures how much of the
//! quantum information about both parameters one measurement extracts jointly.
//! `Υ ≤ 1` is the single-qubit bound, `Υ ≤ 2` the quantum Cramér-Rao ceiling.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{encode, parameter_derivatives};
use crate::error::{Error, Result};
use crate::fisher::{fisher_pair, hcr_bound, FisherPair};
use crate::fock::{ghb_state, hb_state, noon_state, ProbeState, StateLabel};
use crate::linalg::C64;
use crate::quadrature::{GridSpec, QuadGrid};

/// Off-diagonal Fisher entries above this (diagonal-normalized) are flagged.
pub const OFF_DIAGONAL_TOL: f64 = 1e-6;
/// Reduced `F_Q` diagonals at or below this make `Υ` and `Σ²` undefined.
pub const SINGULAR_TOL: f64 = 1e-14;
/// Reference diffusion for saturation checks.
pub const DELTA_REFERENCE: f64 = 8.0;
/// Smallest diffusion accepted in sweep ranges.
pub const DELTA_MIN: f64 = 0.02;
pub const DEFAULT_PHI: f64 = 0.3;

/// Probe selector with the text grammar `ghb:<n>,<N-n> | hb:<N> | noon:<N>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum StateSpec {
    Ghb { n: usize, photons: usize },
    Hb { photons: usize },
    Noon { photons: usize },
}

impl StateSpec {
    pub fn photons(&self) -> usize {
        match *self {
            StateSpec::Ghb { photons, .. } | StateSpec::Hb { photons } | StateSpec::Noon { photons } => {
                photons
            }
        }
    }

    pub fn build(&self) -> Result<ProbeState> {
        match *self {
            StateSpec::Ghb { n, photons } => ghb_state(photons, n),
            StateSpec::Hb { photons } => hb_state(photons),
            StateSpec::Noon { photons } => noon_state(photons),
        }
    }

    pub fn label(&self) -> StateLabel {
        match *self {
            StateSpec::Ghb { n, photons } => StateLabel::Ghb { n, photons },
            StateSpec::Hb { photons } => StateLabel::Hb { photons },
            StateSpec::Noon { photons } => StateLabel::Noon { photons },
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StateSpec::Ghb { n, photons } => write!(f, "ghb:{},{}", n, photons - n),
            StateSpec::Hb { photons } => write!(f, "hb:{photons}"),
            StateSpec::Noon { photons } => write!(f, "noon:{photons}"),
        }
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::StateSpec(s.to_string());
        let (family, args) = s.trim().split_once(':').ok_or_else(bad)?;
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let spec = match family.trim().to_ascii_lowercase().as_str() {
            "ghb" => {
                let (a, b) = args.split_once(',').ok_or_else(bad)?;
                let (n, rest) = (num(a)?, num(b)?);
                StateSpec::Ghb { n, photons: n + rest }
            }
            "hb" => StateSpec::Hb { photons: num(args)? },
            "noon" => StateSpec::Noon { photons: num(args)? },
            _ => return Err(bad()),
        };
        if spec.photons() == 0 || (matches!(spec, StateSpec::Hb { .. }) && spec.photons() < 2) {
            return Err(bad());
        }
        Ok(spec)
    }
}

impl From<StateSpec> for String {
    fn from(s: StateSpec) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for StateSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// One evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub state: StateSpec,
    pub phi: f64,
    pub delta: f64,
    pub eta_a: f64,
    pub eta_b: f64,
    #[serde(default)]
    pub grid: GridSpec,
}

impl Scenario {
    pub fn new(state: StateSpec, phi: f64, delta: f64, eta_a: f64, eta_b: f64) -> Self {
        Scenario {
            state,
            phi,
            delta,
            eta_a,
            eta_b,
            grid: GridSpec::default(),
        }
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = grid;
        self
    }
}

/// Fisher data of one scenario plus the derived figures of merit.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub scenario: Scenario,
    pub label: StateLabel,
    pub grid: QuadGrid,
    pub pair: FisherPair,
}

impl Evaluation {
    pub fn upsilon(&self) -> Result<f64> {
        tradeoff_upsilon(&self.pair)
    }

    pub fn sigma2(&self) -> Result<f64> {
        qcr_sum(&self.pair)
    }

    /// Holevo bound with unit cost matrix.
    pub fn hcr(&self) -> Result<f64> {
        hcr_identity_cost(&self.pair)
    }

    pub fn off_diagonal_flag(&self) -> bool {
        let (c, q) = self.pair.normalized_off_diagonals();
        c > OFF_DIAGONAL_TOL || q > OFF_DIAGONAL_TOL
    }

    /// Short tags for anomalies worth surfacing in tables.
    pub fn flags(&self) -> Vec<&'static str> {
        let mut flags = Vec::new();
        if self.off_diagonal_flag() {
            flags.push("offdiag");
        }
        if self.pair.normalized_gap_min_eigenvalue() < -1e-8 {
            flags.push("fc_exceeds_fq");
        }
        flags
    }
}

/// Encode, measure and compute all Fisher data for one scenario.
pub fn evaluate(scenario: &Scenario) -> Result<Evaluation> {
    let state = scenario.state.build()?;
    let rho = encode(&state, scenario.phi, scenario.delta, scenario.eta_a, scenario.eta_b)?;
    let derivs = parameter_derivatives(&rho);
    let grid = scenario.grid.build(state.total_photons())?;
    let pair = fisher_pair(&rho, &derivs, &grid)?;
    Ok(Evaluation {
        scenario: *scenario,
        label: state.label(),
        grid,
        pair,
    })
}

fn check_diagonal(fq: &Matrix2<f64>) -> Result<()> {
    for (i, name) in crate::PARAMETER_ORDER.iter().enumerate() {
        if !(fq[(i, i)] > SINGULAR_TOL) {
            return Err(Error::SingularQfi { param: name });
        }
    }
    Ok(())
}

/// `Υ`, from the diagonal ratios, or `Tr(F_C F_Q⁻¹)` when the off-diagonals
/// are not negligible.
pub fn tradeoff_upsilon(pair: &FisherPair) -> Result<f64> {
    check_diagonal(&pair.fq)?;
    let (c, q) = pair.normalized_off_diagonals();
    if c > OFF_DIAGONAL_TOL || q > OFF_DIAGONAL_TOL {
        let inv = pair.fq.try_inverse().ok_or(Error::DegenerateQfi)?;
        return Ok((pair.fc * inv).trace());
    }
    Ok(pair.fc[(0, 0)] / pair.fq[(0, 0)] + pair.fc[(1, 1)] / pair.fq[(1, 1)])
}

/// `Σ² = 1/F_Q[φ,φ] + 1/F_Q[Δ,Δ]` in physical units; `inf` when a physical
/// entry is below `f64` range.
pub fn qcr_sum(pair: &FisherPair) -> Result<f64> {
    check_diagonal(&pair.fq)?;
    Ok((0..2)
        .map(|i| (-2.0 * pair.log_scale[i]).exp() / pair.fq[(i, i)])
        .sum())
}

/// Holevo bound with `G = I`, evaluated in reduced units as
/// `hcr_bound(S⁻², F̃_Q, W̃)` so it matches `Σ²` wherever that is finite.
fn hcr_identity_cost(pair: &FisherPair) -> Result<f64> {
    check_diagonal(&pair.fq)?;
    let g = Matrix2::from_diagonal(&nalgebra::Vector2::new(
        (-2.0 * pair.log_scale[0]).exp(),
        (-2.0 * pair.log_scale[1]).exp(),
    ));
    hcr_bound(&g, &pair.fq, &pair.w)
}

/// Percentage gain `100 (Υ_test / Υ_baseline - 1)`.
pub fn sensitivity_gain(test: f64, baseline: f64) -> Result<f64> {
    if !(baseline > 0.0) {
        return Err(Error::InvalidParameter {
            name: "baseline",
            value: baseline,
            reason: "must be positive",
        });
    }
    if !(test > 0.0) {
        return Err(Error::InvalidParameter {
            name: "test",
            value: test,
            reason: "must be positive",
        });
    }
    Ok(100.0 * (test / baseline - 1.0))
}

/// `n` log-spaced points from `a` to `b`, both included.
pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let (la, lb) = (a.ln(), b.ln());
            (0..n)
                .map(|i| match i {
                    0 => a,
                    i if i == n - 1 => b,
                    i => (la + (lb - la) * i as f64 / (n - 1) as f64).exp(),
                })
                .collect()
        }
    }
}

/// 60 log-spaced points in `[0.02, 5]` plus the anchors 0.6, 1.2 and 5.
pub fn default_delta_grid() -> Vec<f64> {
    let mut g = log_spaced(DELTA_MIN, 5.0, 60);
    g.extend([0.6, 1.2, 5.0]);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Outcome of a saturation search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CutoffResult {
    Found { delta: f64, reference: f64 },
    NotFound { reference: f64 },
}

impl CutoffResult {
    pub fn delta(&self) -> Option<f64> {
        match *self {
            CutoffResult::Found { delta, .. } => Some(delta),
            CutoffResult::NotFound { .. } => None,
        }
    }
}

/// Smallest grid point from which every larger point has
/// `|Υ - reference| / reference < tol`.
pub fn cutoff_from_curve(deltas: &[f64], upsilon: &[f64], reference: f64, tol: f64) -> Option<f64> {
    let mut cutoff = None;
    for (&d, &u) in deltas.iter().zip(upsilon).rev() {
        if ((u - reference) / reference).abs() < tol {
            cutoff = Some(d);
        } else {
            break;
        }
    }
    cutoff
}

/// Diffusion after which `Υ` stays within `tol` of its value at `Δ = 8`.
pub fn find_delta_cutoff(base: &Scenario, deltas: &[f64], tol: f64) -> Result<CutoffResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "must be positive",
        });
    }
    let reference = evaluate(&Scenario { delta: DELTA_REFERENCE, ..*base })?.upsilon()?;
    let curve: Vec<(f64, f64)> = deltas
        .par_iter()
        .filter_map(|&d| {
            let u = evaluate(&Scenario { delta: d, ..*base }).and_then(|e| e.upsilon());
            u.ok().map(|u| (d, u))
        })
        .collect();
    let (ds, us): (Vec<f64>, Vec<f64>) = curve.into_iter().unzip();
    Ok(match cutoff_from_curve(&ds, &us, reference, tol) {
        Some(delta) => CutoffResult::Found { delta, reference },
        None => CutoffResult::NotFound { reference },
    })
}

/// Probe families swept along the photon-number axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// `ghb(k, N-k)`, defined for `N ≥ k`.
    Ghb(usize),
    Hb,
    Noon,
}

impl Family {
    pub fn at(&self, photons: usize) -> Option<StateSpec> {
        match *self {
            Family::Ghb(k) if photons >= k.max(1) => Some(StateSpec::Ghb { n: k, photons }),
            Family::Hb if photons >= 2 => Some(StateSpec::Hb { photons }),
            Family::Noon if photons >= 1 => Some(StateSpec::Noon { photons }),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Ghb(k) => write!(f, "ghb{k}"),
            Family::Hb => f.write_str("hb"),
            Family::Noon => f.write_str("noon"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "hb" => Ok(Family::Hb),
            "noon" => Ok(Family::Noon),
            _ => t
                .strip_prefix("ghb")
                .and_then(|k| k.parse().ok())
                .map(Family::Ghb)
                .ok_or_else(|| Error::StateSpec(s.to_string())),
        }
    }
}

/// Sweep settings shared by the three drivers. Each driver reads only the
/// fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub phi: f64,
    /// Loss settings `(η_a, η_b)`; one panel each.
    pub etas: Vec<(f64, f64)>,
    /// Diffusion grid of the delta and family sweeps.
    pub deltas: Vec<f64>,
    /// Fixed diffusion of the photon-number sweep.
    pub delta_fixed: f64,
    pub families: Vec<Family>,
    pub photons: Vec<usize>,
    pub grid: GridSpec,
    pub cutoff_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            phi: DEFAULT_PHI,
            etas: vec![(1.0, 1.0), (0.5, 0.5)],
            deltas: default_delta_grid(),
            delta_fixed: 5.0,
            families: vec![Family::Ghb(0), Family::Hb, Family::Noon],
            photons: vec![4, 5, 6],
            grid: GridSpec::default(),
            cutoff_tol: 1e-3,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(&d) = self.deltas.iter().find(|&&d| !(d >= DELTA_MIN)) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: d,
                reason: "sweep diffusion must be at least 0.02",
            });
        }
        for &(a, b) in &self.etas {
            for v in [a, b] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidParameter {
                        name: "eta",
                        value: v,
                        reason: "transmissivity must lie in [0, 1]",
                    });
                }
            }
        }
        Ok(())
    }
}

/// One output row. Fisher diagonals are physical and may under- or
/// overflow to 0 or `inf` at large diffusion; `Υ` never does.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub label: String,
    pub photons: usize,
    pub n: Option<usize>,
    pub partition: Option<i64>,
    pub delta: f64,
    pub eta_a: f64,
    pub eta_b: f64,
    pub upsilon: f64,
    pub sigma2: f64,
    pub fc_pp: f64,
    pub fc_dd: f64,
    pub fq_pp: f64,
    pub fq_dd: f64,
    pub hcr: f64,
    pub flags: Vec<String>,
    /// Saturation point, family sweeps only.
    pub delta_cutoff: Option<f64>,
}

/// A table for one figure panel, plus the points that had no defined `Υ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub name: String,
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<String>,
}

fn row_for(scenario: &Scenario) -> std::result::Result<SweepRow, String> {
    let describe = |e: Error| format!("{} Delta={} eta=({},{}): {e}", scenario.state, scenario.delta, scenario.eta_a, scenario.eta_b);
    let ev = evaluate(scenario).map_err(describe)?;
    let upsilon = ev.upsilon().map_err(describe)?;
    let sigma2 = ev.sigma2().map_err(describe)?;
    let hcr = ev.hcr().unwrap_or(f64::NAN);
    let (fc, fq) = (ev.pair.physical_fc(), ev.pair.physical_fq());
    Ok(SweepRow {
        label: ev.label.to_string(),
        photons: ev.label.photons(),
        n: ev.label.input_n(),
        partition: ev.label.partition(),
        delta: scenario.delta,
        eta_a: scenario.eta_a,
        eta_b: scenario.eta_b,
        upsilon,
        sigma2,
        fc_pp: fc[(0, 0)],
        fc_dd: fc[(1, 1)],
        fq_pp: fq[(0, 0)],
        fq_dd: fq[(1, 1)],
        hcr,
        flags: ev.flags().into_iter().map(String::from).collect(),
        delta_cutoff: None,
    })
}

fn run(name: String, scenarios: Vec<Scenario>) -> SweepTable {
    let results: Vec<_> = scenarios.par_iter().map(row_for).collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(msg) => skipped.push(msg),
        }
    }
    SweepTable { name, rows, skipped }
}

/// Panel name fragment for a loss setting, e.g. `eta1` or `eta0.5-0.7`.
pub fn eta_tag((a, b): (f64, f64)) -> String {
    if a == b {
        format!("eta{a}")
    } else {
        format!("eta{a}-{b}")
    }
}

/// `Υ` and `Σ²` against diffusion, one table per loss setting, rows ordered
/// by family, photon number, then diffusion.
pub fn sweep_delta(config: &SweepConfig) -> Result<Vec<SweepTable>> {
    config.validate()?;
    Ok(config
        .etas
        .iter()
        .map(|&(eta_a, eta_b)| {
            let mut scenarios = Vec::new();
            for fam in &config.families {
                for &n in &config.photons {
                    if let Some(state) = fam.at(n) {
                        for &delta in &config.deltas {
                            scenarios.push(Scenario {
                                state,
                                phi: config.phi,
                                delta,
                                eta_a,
                                eta_b,
                                grid: config.grid,
                            });
                        }
                    }
                }
            }
            run(format!("delta_{}", eta_tag((eta_a, eta_b))), scenarios)
        })
        .collect())
}

/// `Υ` and `Σ²` against photon number at fixed diffusion.
pub fn sweep_photon_number(config: &SweepConfig) -> Result<Vec<SweepTable>> {
    config.validate()?;
    Ok(config
        .etas
        .iter()
        .map(|&(eta_a, eta_b)| {
            let mut scenarios = Vec::new();
            for fam in &config.families {
                for &n in &config.photons {
                    if let Some(state) = fam.at(n) {
                        scenarios.push(Scenario {
                            state,
                            phi: config.phi,
                            delta: config.delta_fixed,
                            eta_a,
                            eta_b,
                            grid: config.grid,
                        });
                    }
                }
            }
            run(format!("photons_{}", eta_tag((eta_a, eta_b))), scenarios)
        })
        .collect())
}

/// All partitions `ghb(n, N-n)` of each photon number against diffusion,
/// with the saturation cutoff attached to every row of a partition.
pub fn sweep_family(config: &SweepConfig) -> Result<Vec<SweepTable>> {
    config.validate()?;
    let mut tables = Vec::new();
    for &(eta_a, eta_b) in &config.etas {
        for &photons in &config.photons {
            let states: Vec<StateSpec> = (0..=photons).map(|n| StateSpec::Ghb { n, photons }).collect();
            let scenarios: Vec<Scenario> = states
                .iter()
                .flat_map(|&state| {
                    config.deltas.iter().map(move |&delta| Scenario {
                        state,
                        phi: config.phi,
                        delta,
                        eta_a,
                        eta_b,
                        grid: config.grid,
                    })
                })
                .collect();
            let mut table = run(format!("family_N{photons}_{}", eta_tag((eta_a, eta_b))), scenarios);
            let references: Vec<Result<f64>> = states
                .par_iter()
                .map(|&state| {
                    let s = Scenario {
                        state,
                        phi: config.phi,
                        delta: DELTA_REFERENCE,
                        eta_a,
                        eta_b,
                        grid: config.grid,
                    };
                    evaluate(&s)?.upsilon()
                })
                .collect();
            for (state, reference) in states.iter().zip(references) {
                let label = state.label().to_string();
                let Ok(reference) = reference else { continue };
                let (ds, us): (Vec<f64>, Vec<f64>) = table
                    .rows
                    .iter()
                    .filter(|r| r.label == label)
                    .map(|r| (r.delta, r.upsilon))
                    .unzip();
                let cutoff = cutoff_from_curve(&ds, &us, reference, config.cutoff_tol);
                for r in table.rows.iter_mut().filter(|r| r.label == label) {
                    r.delta_cutoff = cutoff;
                }
            }
            tables.push(table);
        }
    }
    Ok(tables)
}

/// `Tr(ρ[L_φ, L_Δ])` in physical units.
pub fn commutator_trace(ev: &Evaluation) -> C64 {
    ev.pair.commutator_trace()
}
