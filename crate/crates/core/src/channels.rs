//! Phase shift, Gaussian phase diffusion and photon loss acting on a probe.
//!
//! The encoded state is kept as a list of blocks labelled by the number of
//! photons lost from each arm, `(k, l)`. Block `(k, l)` lives on the sector
//! with `M = N - k - l` surviving photons, in the basis `|m, M-m⟩` where
//! `m = p - k`. Blocks sharing `M` act on the same two-mode sector; the
//! system state on that sector is their sum (see [`BlockedDensity::sectors`]).

use crate::error::{Error, Result};
use crate::fock::ProbeState;
use crate::linalg::{self, CMat, C64, I};
use crate::quadrature::gauss_hermite;

/// One `(k, l)` loss block.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBlock {
    pub lost_a: usize,
    pub lost_b: usize,
    density: CMat,
    /// Same block without the diffusion damping. Kept so derivatives can be
    /// scaled in log space after the damped coherences underflow.
    undamped: Option<CMat>,
}

impl LossBlock {
    pub fn density(&self) -> &CMat {
        &self.density
    }

    /// Surviving photon number `M`.
    pub fn sector_photons(&self) -> usize {
        self.density.nrows() - 1
    }

    pub fn weight(&self) -> f64 {
        linalg::trace(&self.density).re
    }
}

/// Parameter-encoded mixed state as a direct sum of loss blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedDensity {
    pub input_photons: usize,
    pub phase: f64,
    pub diffusion: f64,
    pub eta_a: f64,
    pub eta_b: f64,
    blocks: Vec<LossBlock>,
}

/// One photon-number sector of the output: the merged density and its
/// normalized parameter derivatives.
#[derive(Debug, Clone)]
pub struct Sector {
    pub photons: usize,
    pub density: CMat,
    pub d_phase: CMat,
    pub d_diffusion: CMat,
}

impl BlockedDensity {
    pub fn blocks(&self) -> &[LossBlock] {
        &self.blocks
    }

    pub fn block(&self, lost_a: usize, lost_b: usize) -> Option<&LossBlock> {
        self.blocks
            .iter()
            .find(|b| b.lost_a == lost_a && b.lost_b == lost_b)
    }

    pub fn total_trace(&self) -> f64 {
        self.blocks.iter().map(LossBlock::weight).sum()
    }

    pub fn max_photons(&self) -> usize {
        self.blocks
            .iter()
            .map(LossBlock::sector_photons)
            .max()
            .unwrap_or(0)
    }

    /// Densities summed over blocks with equal surviving photon number,
    /// ascending in `M`.
    pub fn sector_densities(&self) -> Vec<(usize, CMat)> {
        merge_by_sector(self.blocks.iter().map(|b| (b.sector_photons(), &b.density)))
    }

    /// Sector-merged density with the normalized derivatives from
    /// [`parameter_derivatives`].
    pub fn sectors(&self, derivs: &DensityDerivatives) -> Vec<Sector> {
        let rho = self.sector_densities();
        let dp = merge_by_sector(
            self.blocks
                .iter()
                .zip(&derivs.phase)
                .map(|(b, d)| (b.sector_photons(), d)),
        );
        let dd = merge_by_sector(
            self.blocks
                .iter()
                .zip(&derivs.diffusion)
                .map(|(b, d)| (b.sector_photons(), d)),
        );
        rho.into_iter()
            .zip(dp)
            .zip(dd)
            .map(|(((photons, density), (_, d_phase)), (_, d_diffusion))| Sector {
                photons,
                density,
                d_phase,
                d_diffusion,
            })
            .collect()
    }
}

fn merge_by_sector<'a>(items: impl Iterator<Item = (usize, &'a CMat)>) -> Vec<(usize, CMat)> {
    let mut out: Vec<(usize, CMat)> = Vec::new();
    for (m, mat) in items {
        match out.iter_mut().find(|(mm, _)| *mm == m) {
            Some((_, acc)) => *acc += mat,
            None => out.push((m, mat.clone())),
        }
    }
    out.sort_by_key(|(m, _)| *m);
    out
}

fn check_diffusion(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "Delta",
            value: delta,
            reason: "diffusion must be finite and non-negative",
        });
    }
    Ok(())
}

fn check_phase(phi: f64) -> Result<()> {
    if !phi.is_finite() {
        return Err(Error::InvalidParameter {
            name: "phi",
            value: phi,
            reason: "phase must be finite",
        });
    }
    Ok(())
}

fn check_eta(name: &'static str, eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter {
            name,
            value: eta,
            reason: "transmission must lie in [0, 1]",
        });
    }
    Ok(())
}

fn damping(delta: f64, d: i64) -> f64 {
    (-0.5 * delta * delta * (d * d) as f64).exp()
}

/// Phase shift `e^{-iφ a†a}` followed by Gaussian diffusion of width `Δ`:
/// `ρ_pq = c_p c̄_q e^{-i(p-q)φ - Δ²(p-q)²/2}`.
pub fn apply_phase_diffusion(state: &ProbeState, phi: f64, delta: f64) -> Result<BlockedDensity> {
    check_phase(phi)?;
    check_diffusion(delta)?;
    let c = state.amplitudes();
    let dim = c.len();
    let undamped = CMat::from_fn(dim, dim, |p, q| {
        let d = p as f64 - q as f64;
        c[p] * c[q].conj() * C64::from_polar(1.0, -d * phi)
    });
    let density = CMat::from_fn(dim, dim, |p, q| {
        undamped[(p, q)] * damping(delta, p as i64 - q as i64)
    });
    Ok(BlockedDensity {
        input_photons: state.total_photons(),
        phase: phi,
        diffusion: delta,
        eta_a: 1.0,
        eta_b: 1.0,
        blocks: vec![LossBlock {
            lost_a: 0,
            lost_b: 0,
            density,
            undamped: Some(undamped),
        }],
    })
}

/// Adds Gaussian diffusion of width `Δ` to an already encoded state.
///
/// Widths add in quadrature; the loss channel commutes with this operation
/// because block-internal index differences equal `p - q`.
pub fn apply_diffusion(rho: &BlockedDensity, delta: f64) -> Result<BlockedDensity> {
    check_diffusion(delta)?;
    let blocks = rho
        .blocks
        .iter()
        .map(|b| {
            let n = b.density.nrows();
            let density = CMat::from_fn(n, n, |m, mm| {
                b.density[(m, mm)] * damping(delta, m as i64 - mm as i64)
            });
            LossBlock {
                density,
                ..b.clone()
            }
        })
        .collect();
    Ok(BlockedDensity {
        diffusion: rho.diffusion.hypot(delta),
        blocks,
        ..rho.clone()
    })
}

/// Evaluates the diffusion channel as an explicit Gaussian average of phase
/// rotations, `∫ dφ' p_{φ,Δ}(φ') U_φ' ρ U_φ'†`, with Gauss-Hermite quadrature.
///
/// Independent of the closed form in [`apply_phase_diffusion`]; used to
/// cross-check it.
pub fn diffusion_integral_oracle(
    state: &ProbeState,
    phi: f64,
    delta: f64,
    nodes: usize,
) -> Result<BlockedDensity> {
    check_phase(phi)?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "Delta",
            value: delta,
            reason: "quadrature oracle needs Delta > 0 (use the closed form at 0)",
        });
    }
    if nodes < 20 {
        return Err(Error::InvalidParameter {
            name: "nodes",
            value: nodes as f64,
            reason: "at least 20 Gauss-Hermite nodes required",
        });
    }
    let (t, w) = gauss_hermite(nodes);
    let c = state.amplitudes();
    let dim = c.len();
    let norm = std::f64::consts::PI.sqrt();
    let mut density = CMat::zeros(dim, dim);
    for (&tk, &wk) in t.iter().zip(&w) {
        let phi_k = phi + std::f64::consts::SQRT_2 * delta * tk;
        for p in 0..dim {
            for q in 0..dim {
                let d = p as f64 - q as f64;
                density[(p, q)] += c[p] * c[q].conj() * C64::from_polar(wk / norm, -d * phi_k);
            }
        }
    }
    Ok(BlockedDensity {
        input_photons: state.total_photons(),
        phase: phi,
        diffusion: delta,
        eta_a: 1.0,
        eta_b: 1.0,
        blocks: vec![LossBlock {
            lost_a: 0,
            lost_b: 0,
            density,
            undamped: None,
        }],
    })
}

/// `B^p_{kl} = C(p,k) C(N-p,l) η_a^{p-k} (1-η_a)^k η_b^{N-p-l} (1-η_b)^l`.
pub fn loss_weight(total: usize, p: usize, k: usize, l: usize, eta_a: f64, eta_b: f64) -> f64 {
    if k > p || l > total - p {
        return 0.0;
    }
    binomial(p, k)
        * binomial(total - p, l)
        * eta_a.powi((p - k) as i32)
        * (1.0 - eta_a).powi(k as i32)
        * eta_b.powi((total - p - l) as i32)
        * (1.0 - eta_b).powi(l as i32)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Photon loss on both arms, modelled by beam splitters of transmission
/// `η_a`, `η_b` placed after the phase shift.
///
/// Block `(k, l)` entry `(m, m')` is `ρ_pq sqrt(B^p_{kl} B^q_{kl})` with
/// `p = m + k`, `q = m' + k`. Blocks with zero weight are dropped.
pub fn apply_loss(rho: &BlockedDensity, eta_a: f64, eta_b: f64) -> Result<BlockedDensity> {
    check_eta("eta_a", eta_a)?;
    check_eta("eta_b", eta_b)?;
    if rho.blocks.len() != 1 || rho.blocks[0].lost_a != 0 || rho.blocks[0].lost_b != 0 {
        return Err(Error::Dimension(
            "loss must be applied to a single unlossy (0,0) block".into(),
        ));
    }
    let source = &rho.blocks[0];
    let total = rho.input_photons;
    let mut blocks = Vec::new();
    for k in 0..=total {
        for l in 0..=(total - k) {
            let sector = total - k - l;
            let amp: Vec<f64> = (0..=sector)
                .map(|m| loss_weight(total, m + k, k, l, eta_a, eta_b).sqrt())
                .collect();
            let pick = |src: &CMat| {
                CMat::from_fn(sector + 1, sector + 1, |m, mm| {
                    src[(m + k, mm + k)] * (amp[m] * amp[mm])
                })
            };
            let density = pick(&source.density);
            if linalg::trace(&density).re == 0.0 {
                continue;
            }
            blocks.push(LossBlock {
                lost_a: k,
                lost_b: l,
                density,
                undamped: source.undamped.as_ref().map(pick),
            });
        }
    }
    Ok(BlockedDensity {
        eta_a,
        eta_b,
        blocks,
        ..rho.clone()
    })
}

/// Phase, diffusion and loss in one call.
pub fn encode(
    state: &ProbeState,
    phi: f64,
    delta: f64,
    eta_a: f64,
    eta_b: f64,
) -> Result<BlockedDensity> {
    apply_loss(&apply_phase_diffusion(state, phi, delta)?, eta_a, eta_b)
}

/// Derivatives `∂φρ` and `∂Δρ`, block by block, normalized to unit maximum
/// entry.
///
/// The physical derivative of parameter `i` is `exp(log_scale[i])` times the
/// stored blocks. Fisher quantities are quadratic in the derivatives, so the
/// scale factors out and the normalized blocks stay representable at large
/// `Δ`, where the physical entries fall below `f64` range.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityDerivatives {
    pub phase: Vec<CMat>,
    pub diffusion: Vec<CMat>,
    /// Natural log of each parameter's scale; `-inf` when the derivative
    /// vanishes identically.
    pub log_scale: [f64; 2],
}

impl DensityDerivatives {
    /// Unnormalized `(∂φρ, ∂Δρ)`; entries may underflow to zero.
    pub fn physical(&self) -> (Vec<CMat>, Vec<CMat>) {
        let s = self.log_scale.map(f64::exp);
        (
            self.phase.iter().map(|b| b * C64::new(s[0], 0.0)).collect(),
            self.diffusion.iter().map(|b| b * C64::new(s[1], 0.0)).collect(),
        )
    }

    pub fn vanishes(&self, param: usize) -> bool {
        self.log_scale[param] == f64::NEG_INFINITY
    }
}

/// Entrywise analytic derivatives: `∂φρ_{mm'} = -i(m-m')ρ_{mm'}` and
/// `∂Δρ_{mm'} = -Δ(m-m')²ρ_{mm'}`.
pub fn parameter_derivatives(rho: &BlockedDensity) -> DensityDerivatives {
    let delta = rho.diffusion;
    // log|∂ρ_mm'| from the undamped block when available
    let log_entry = |b: &LossBlock, m: usize, mm: usize, which: usize| -> Option<(f64, C64)> {
        let d = m as i64 - mm as i64;
        if d == 0 {
            return None;
        }
        let (base, log_damp) = match &b.undamped {
            Some(u) => (u[(m, mm)], -0.5 * delta * delta * (d * d) as f64),
            None => (b.density[(m, mm)], 0.0),
        };
        if base.norm() == 0.0 {
            return None;
        }
        let df = d as f64;
        let (factor_log, factor) = match which {
            0 => (df.abs().ln(), -I * df),
            _ => {
                if delta == 0.0 {
                    return None;
                }
                (delta.ln() + 2.0 * df.abs().ln(), C64::new(-delta * df * df, 0.0))
            }
        };
        let unit = base / base.norm() * (factor / factor.norm());
        Some((base.norm().ln() + log_damp + factor_log, unit))
    };

    let mut log_scale = [f64::NEG_INFINITY; 2];
    for b in &rho.blocks {
        let n = b.density.nrows();
        for m in 0..n {
            for mm in 0..n {
                for (which, ls) in log_scale.iter_mut().enumerate() {
                    if let Some((lg, _)) = log_entry(b, m, mm, which) {
                        *ls = ls.max(lg);
                    }
                }
            }
        }
    }
    let build = |which: usize| -> Vec<CMat> {
        rho.blocks
            .iter()
            .map(|b| {
                let n = b.density.nrows();
                CMat::from_fn(n, n, |m, mm| match log_entry(b, m, mm, which) {
                    Some((lg, unit)) => unit * (lg - log_scale[which]).exp(),
                    None => C64::new(0.0, 0.0),
                })
            })
            .collect()
    };
    DensityDerivatives {
        phase: build(0),
        diffusion: build(1),
        log_scale,
    }
}
