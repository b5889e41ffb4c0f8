//! Double-homodyne detection after the closing beam splitter.
//!
//! Each photon-number sector `σ` of the output is sent through a balanced
//! 50:50 beam splitter with real amplitudes, then the X quadrature of output a
//! and the P quadrature of output b are recorded. With `x̂ = (a+a†)/√2` and
//! `p̂ = i(a†-a)/√2` the outcome amplitude of `|m, M-m⟩` is
//! `ψ_m(x) (-i)^{M-m} ψ_{M-m}(p̄)`, so
//!
//! ```text
//! p(x, p̄) = Σ_M Σ_{m,m'} Re[σ_{mm'} (-i)^{m'-m}] f_m f_m',   f_m = ψ_m(x) ψ_{M-m}(p̄)
//! ```
//!
//! This phase pairing is the one for which the measurement extracts the full
//! phase information of any probe at zero diffusion.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::channels::{BlockedDensity, DensityDerivatives};
use crate::error::{Error, Result};
use crate::fock::{i_pow, SectorUnitary};
use crate::linalg::CMat;
use crate::quadrature::QuadGrid;

/// Position-space Fock wavefunction `ψ_n(x) = H_n(x) e^{-x²/2} / sqrt(2^n n! √π)`.
pub fn hermite_wavefunction(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `table[n][i] = ψ_n(nodes[i])` for `n ≤ max_n`.
pub fn hermite_table(max_n: usize, nodes: &[f64]) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0; nodes.len()]; max_n + 1];
    for (i, &x) in nodes.iter().enumerate() {
        let mut prev = 0.0;
        let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
        table[0][i] = cur;
        for k in 0..max_n {
            let kf = k as f64;
            let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
            table[k + 1][i] = cur;
        }
    }
    table
}

/// Joint outcome density and its parameter derivatives on a square grid.
///
/// Storage is row-major: index `ix * n + iy` with `x` the mode-a X outcome
/// and `iy` the mode-b P outcome. Derivative fields carry the same
/// normalization as the [`DensityDerivatives`] they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPdfField {
    points: usize,
    pub p: Vec<f64>,
    pub dp_dphi: Vec<f64>,
    pub dp_ddelta: Vec<f64>,
    pub log_scale: [f64; 2],
}

impl JointPdfField {
    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.p[ix * self.points + iy]
    }

    /// Derivative field for parameter `0 = φ`, `1 = Δ`, normalized.
    pub fn derivative(&self, param: usize) -> &[f64] {
        match param {
            0 => &self.dp_dphi,
            _ => &self.dp_ddelta,
        }
    }

    /// Physical derivative value at one grid point.
    pub fn physical_derivative(&self, param: usize, ix: usize, iy: usize) -> f64 {
        self.derivative(param)[ix * self.points + iy] * self.log_scale[param].exp()
    }

    /// `∫∫ field dx dp̄` with the grid's product Simpson weights.
    pub fn integrate(&self, grid: &QuadGrid, field: &[f64]) -> f64 {
        let w = grid.weights();
        (0..self.points)
            .map(|ix| {
                let row = &field[ix * self.points..(ix + 1) * self.points];
                w[ix] * row.iter().zip(w).map(|(f, wy)| f * wy).sum::<f64>()
            })
            .sum()
    }
}

/// Real quadratic-form kernel `Re[σ_{mm'} (-i)^{m'-m}]` of one sector.
fn sector_kernel(sector: &CMat, bs: &SectorUnitary) -> DMatrix<f64> {
    let u = &bs.matrix;
    let sigma = u * sector * u.adjoint();
    let n = sigma.nrows();
    DMatrix::from_fn(n, n, |m, mm| {
        (sigma[(m, mm)] * i_pow(-(mm as i64 - m as i64))).re
    })
}

/// Double-homodyne density `p(x, p̄)` together with `∂φp` and `∂Δp`.
///
/// The map from `ρ` to `p` is linear, so the derivative fields are the same
/// contraction applied to the derivative blocks. Expanding the quadratic form
/// over index pairs `t = (M, m ≤ m')` turns the whole field into a matrix
/// product `P = A Bᵀ` with `A[x, t] = K_t ψ_m(x) ψ_m'(x)` and
/// `B[p̄, t] = ψ_{M-m}(p̄) ψ_{M-m'}(p̄)`.
pub fn joint_pdf(
    rho: &BlockedDensity,
    derivs: &DensityDerivatives,
    grid: &QuadGrid,
) -> Result<JointPdfField> {
    if derivs.phase.len() != rho.blocks().len() || derivs.diffusion.len() != rho.blocks().len() {
        return Err(Error::Dimension(format!(
            "{} density blocks but {}/{} derivative blocks",
            rho.blocks().len(),
            derivs.phase.len(),
            derivs.diffusion.len()
        )));
    }
    for ((b, dp), dd) in rho.blocks().iter().zip(&derivs.phase).zip(&derivs.diffusion) {
        if b.density().shape() != dp.shape() || b.density().shape() != dd.shape() {
            return Err(Error::Dimension("derivative block shape mismatch".into()));
        }
    }

    // (M, m, m', multiplicity) and the three kernel values per pair
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    let mut coeffs: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for s in rho.sectors(derivs) {
        let bs = SectorUnitary::balanced_real(s.photons);
        let kernels = [
            sector_kernel(&s.density, &bs),
            sector_kernel(&s.d_phase, &bs),
            sector_kernel(&s.d_diffusion, &bs),
        ];
        for m in 0..=s.photons {
            for mm in m..=s.photons {
                let mult = if m == mm { 1.0 } else { 2.0 };
                pairs.push((s.photons, m, mm));
                for (c, k) in coeffs.iter_mut().zip(&kernels) {
                    c.push(mult * k[(m, mm)]);
                }
            }
        }
    }

    let nodes = grid.nodes();
    let n = nodes.len();
    let psi = hermite_table(rho.max_photons(), nodes);
    let b = DMatrix::from_fn(n, pairs.len(), |iy, t| {
        let (big_m, m, mm) = pairs[t];
        psi[big_m - m][iy] * psi[big_m - mm][iy]
    });
    let fields: Vec<Vec<f64>> = coeffs
        .par_iter()
        .map(|c| {
            // Aᵀ, so that B Aᵀ = Pᵀ whose column-major storage is P row-major
            let a_t = DMatrix::from_fn(pairs.len(), n, |t, ix| {
                let (_, m, mm) = pairs[t];
                c[t] * psi[m][ix] * psi[mm][ix]
            });
            (&b * a_t).data.as_vec().clone()
        })
        .collect();
    let [mut p, dp_dphi, dp_ddelta]: [Vec<f64>; 3] = fields.try_into().expect("three fields");
    for v in &mut p {
        *v = v.max(0.0);
    }
    Ok(JointPdfField {
        points: n,
        p,
        dp_dphi,
        dp_ddelta,
        log_scale: derivs.log_scale,
    })
}
