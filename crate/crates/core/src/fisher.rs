//! Classical and quantum Fisher information, SLDs and the Holevo bound.
//!
//! Everything here is computed from the normalized derivatives of
//! [`DensityDerivatives`]: a matrix entry `(i, j)` in "reduced" units equals
//! the physical value divided by `exp(log_scale[i] + log_scale[j])`. Ratios
//! such as `F_C[i,i] / F_Q[i,i]` are the same in both units, which keeps the
//! trade-off quantity finite when the physical entries leave `f64` range.
//! Parameter order is `(φ, Δ)` throughout.

use nalgebra::{Matrix2, SymmetricEigen};

use crate::channels::{BlockedDensity, DensityDerivatives};
use crate::error::{Error, Result};
use crate::homodyne::JointPdfField;
use crate::linalg::{self, CMat, C64};
use crate::quadrature::QuadGrid;

/// Support threshold on `λ_a + λ_b` for SLD matrix elements.
pub const EPS_RANK: f64 = 1e-10;
/// Grid cells with `p` below this are left out of the classical integral.
pub const PDF_FLOOR: f64 = 1e-12;
/// Largest tolerated `|ρ - ρ†|` entry.
pub const HERMITIAN_TOL: f64 = 1e-10;

use crate::PARAMETER_ORDER as NAMES;

fn scale_matrix(log_scale: [f64; 2]) -> Matrix2<f64> {
    Matrix2::from_fn(|i, j| (log_scale[i] + log_scale[j]).exp())
}

/// `F_C[i][j] = ∫∫ ∂_i p ∂_j p / p`, in the field's reduced units.
pub fn classical_fisher(field: &JointPdfField, grid: &QuadGrid) -> Matrix2<f64> {
    let n = field.points_per_axis();
    let w = grid.weights();
    let mut f = Matrix2::zeros();
    for ix in 0..n {
        for iy in 0..n {
            let k = ix * n + iy;
            let p = field.p[k];
            if p < PDF_FLOOR {
                continue;
            }
            let d = [field.dp_dphi[k], field.dp_ddelta[k]];
            let c = w[ix] * w[iy] / p;
            for i in 0..2 {
                for j in 0..2 {
                    f[(i, j)] += c * d[i] * d[j];
                }
            }
        }
    }
    f
}

/// Symmetric logarithmic derivatives on one photon-number sector.
#[derive(Debug, Clone)]
pub struct SectorSlds {
    pub photons: usize,
    pub density: CMat,
    pub l_phase: CMat,
    pub l_diffusion: CMat,
}

impl SectorSlds {
    pub fn sld(&self, param: usize) -> &CMat {
        match param {
            0 => &self.l_phase,
            _ => &self.l_diffusion,
        }
    }
}

/// Quantum Fisher matrix with the SLDs that produced it (reduced units).
#[derive(Debug, Clone)]
pub struct QfiResult {
    pub fq: Matrix2<f64>,
    pub sectors: Vec<SectorSlds>,
    pub log_scale: [f64; 2],
}

impl QfiResult {
    pub fn physical_fq(&self) -> Matrix2<f64> {
        self.fq.component_mul(&scale_matrix(self.log_scale))
    }
}

/// QFI and SLDs of a single Hermitian matrix with derivatives `d`.
///
/// In the eigenbasis `ρ = Σ λ_a |a⟩⟨a|`,
/// `L_ab = 2⟨a|∂ρ|b⟩ / (λ_a + λ_b)` wherever `λ_a + λ_b > EPS_RANK`
/// and zero elsewhere.
pub fn sld_qfi(rho: &CMat, d: [&CMat; 2]) -> Result<(Matrix2<f64>, [CMat; 2])> {
    let dev = linalg::hermitian_deviation(rho);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let n = rho.nrows();
    let (lambda, v) = linalg::hermitian_eigen(rho);
    let vd = v.adjoint();
    let dt = d.map(|di| &vd * di * &v);
    let mut fq = Matrix2::zeros();
    let mut l_eig = [CMat::zeros(n, n), CMat::zeros(n, n)];
    for a in 0..n {
        for b in 0..n {
            let s = lambda[a] + lambda[b];
            if s <= EPS_RANK {
                continue;
            }
            for i in 0..2 {
                l_eig[i][(a, b)] = dt[i][(a, b)] * (2.0 / s);
                for j in 0..2 {
                    fq[(i, j)] += 2.0 * (dt[i][(a, b)] * dt[j][(b, a)]).re / s;
                }
            }
        }
    }
    let l = l_eig.map(|le| &v * le * &vd);
    Ok((fq, l))
}

/// QFI matrix summed over merged photon-number sectors, with the SLDs.
///
/// Sectors are orthogonal and their weights do not depend on `(φ, Δ)`, so
/// the SLD is block diagonal and the QFI is the sum of sector contributions.
pub fn qfi_and_slds(rho: &BlockedDensity, derivs: &DensityDerivatives) -> Result<QfiResult> {
    let mut fq = Matrix2::zeros();
    let mut sectors = Vec::new();
    for s in rho.sectors(derivs) {
        let (f, [l_phase, l_diffusion]) = sld_qfi(&s.density, [&s.d_phase, &s.d_diffusion])?;
        fq += f;
        sectors.push(SectorSlds {
            photons: s.photons,
            density: s.density,
            l_phase,
            l_diffusion,
        });
    }
    Ok(QfiResult {
        fq,
        sectors,
        log_scale: derivs.log_scale,
    })
}

/// `W_ij = Tr(ρ[L_i, L_j])` summed over sectors.
pub fn incompatibility_matrix(sectors: &[SectorSlds]) -> Matrix2<C64> {
    let mut w = Matrix2::zeros();
    for s in sectors {
        for i in 0..2 {
            for j in 0..2 {
                let comm = s.sld(i) * s.sld(j) - s.sld(j) * s.sld(i);
                w[(i, j)] += linalg::trace(&(&s.density * comm));
            }
        }
    }
    w
}

/// `(Tr(ρ[L_φ, L_Δ]), ‖[L_φ, L_Δ]‖_F)` over the direct sum of sectors, in
/// reduced units.
pub fn commutation_diagnostics(sectors: &[SectorSlds]) -> (C64, f64) {
    let mut tr = C64::new(0.0, 0.0);
    let mut norm_sq = 0.0;
    for s in sectors {
        let comm = &s.l_phase * &s.l_diffusion - &s.l_diffusion * &s.l_phase;
        tr += linalg::trace(&(&s.density * &comm));
        norm_sq += linalg::frobenius_norm(&comm).powi(2);
    }
    (tr, norm_sq.sqrt())
}

fn psd_sqrt(g: &Matrix2<f64>) -> Matrix2<f64> {
    let eig = SymmetricEigen::new(*g);
    let root = eig.eigenvalues.map(|x| x.max(0.0).sqrt());
    eig.eigenvectors * Matrix2::from_diagonal(&root) * eig.eigenvectors.transpose()
}

/// Sum of singular values of a 2×2 matrix: `sqrt(‖A‖_F² + 2|det A|)`.
fn trace_norm2(a: &Matrix2<C64>) -> f64 {
    let fro2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    (fro2 + 2.0 * det.norm()).sqrt()
}

fn check_invertible(fq: &Matrix2<f64>) -> Result<()> {
    for (i, name) in NAMES.iter().enumerate() {
        if !(fq[(i, i)] > 0.0) || !fq[(i, i)].is_finite() {
            return Err(Error::SingularQfi { param: name });
        }
    }
    let det = fq[(0, 0)] * fq[(1, 1)] - fq[(0, 1)] * fq[(1, 0)];
    if !(det > 1e-14 * fq[(0, 0)] * fq[(1, 1)]) {
        return Err(Error::DegenerateQfi);
    }
    Ok(())
}

/// Holevo-Cramér-Rao bound for a D-invariant model,
/// `Tr(G F_Q⁻¹) + ½‖√G F_Q⁻¹ W F_Q⁻¹ √G‖₁` with `W_ij = Tr(ρ[L_i, L_j])`.
///
/// The ½ comes from the incompatibility matrix being
/// `Im Tr(ρ L_i L_j) = W_ij / 2i`.
pub fn hcr_bound(g: &Matrix2<f64>, fq: &Matrix2<f64>, w: &Matrix2<C64>) -> Result<f64> {
    check_invertible(fq)?;
    let inv = fq.try_inverse().ok_or(Error::DegenerateQfi)?;
    let sg = psd_sqrt(g).map(|x| C64::new(x, 0.0));
    let inv_c = inv.map(|x| C64::new(x, 0.0));
    let inner = sg * inv_c * w * inv_c * sg;
    Ok((g * inv).trace() + 0.5 * trace_norm2(&inner))
}

/// Fisher matrices and SLD diagnostics for one encoded state.
#[derive(Debug, Clone)]
pub struct FisherPair {
    /// Classical Fisher matrix of the double-homodyne measurement, reduced.
    pub fc: Matrix2<f64>,
    /// Quantum Fisher matrix, reduced.
    pub fq: Matrix2<f64>,
    /// `Tr(ρ[L_i, L_j])`, reduced.
    pub w: Matrix2<C64>,
    /// `‖[L_φ, L_Δ]‖_F`, reduced.
    pub commutator_norm: f64,
    pub log_scale: [f64; 2],
}

impl FisherPair {
    pub fn physical_fc(&self) -> Matrix2<f64> {
        self.fc.component_mul(&scale_matrix(self.log_scale))
    }

    pub fn physical_fq(&self) -> Matrix2<f64> {
        self.fq.component_mul(&scale_matrix(self.log_scale))
    }

    pub fn physical_w(&self) -> Matrix2<C64> {
        let s = scale_matrix(self.log_scale);
        self.w.zip_map(&s, |z, k| z * k)
    }

    pub fn physical_commutator_norm(&self) -> f64 {
        self.commutator_norm * (self.log_scale[0] + self.log_scale[1]).exp()
    }

    /// `Tr(ρ[L_φ, L_Δ])` in physical units.
    pub fn commutator_trace(&self) -> C64 {
        self.w[(0, 1)] * (self.log_scale[0] + self.log_scale[1]).exp()
    }

    /// Off-diagonal entries divided by `sqrt(F[0,0] F[1,1])`, `(F_C, F_Q)`.
    /// Zero when a diagonal vanishes.
    pub fn normalized_off_diagonals(&self) -> (f64, f64) {
        let norm = |m: &Matrix2<f64>| {
            let d = (m[(0, 0)] * m[(1, 1)]).sqrt();
            if d > 0.0 {
                m[(0, 1)].abs() / d
            } else {
                0.0
            }
        };
        (norm(&self.fc), norm(&self.fq))
    }

    /// Smallest eigenvalue of `S (F_Q - F_C) S` with `S = diag(F_Q)^{-1/2}`.
    ///
    /// Scale free, so the same number results in reduced or physical units.
    pub fn normalized_gap_min_eigenvalue(&self) -> f64 {
        let s = self.fq.diagonal().map(|d| if d > 0.0 { d.sqrt().recip() } else { 0.0 });
        let sm = Matrix2::from_diagonal(&s);
        let gap = sm * (self.fq - self.fc) * sm;
        let gap = (gap + gap.transpose()) * 0.5;
        SymmetricEigen::new(gap).eigenvalues.min()
    }
}

/// Full pipeline from an encoded state to its [`FisherPair`].
pub fn fisher_pair(rho: &BlockedDensity, derivs: &DensityDerivatives, grid: &QuadGrid) -> Result<FisherPair> {
    let field = crate::homodyne::joint_pdf(rho, derivs, grid)?;
    let fc = classical_fisher(&field, grid);
    let qfi = qfi_and_slds(rho, derivs)?;
    let w = incompatibility_matrix(&qfi.sectors);
    let (_, commutator_norm) = commutation_diagnostics(&qfi.sectors);
    Ok(FisherPair {
        fc,
        fq: qfi.fq,
        w,
        commutator_norm,
        log_scale: derivs.log_scale,
    })
}
