//! Two-site reduced density operators.
//!
//! Z₂ symmetry leaves only 1, σᶻ⊗1, 1⊗σᶻ, σˣσˣ, σʸσʸ and σᶻσᶻ in the Pauli
//! expansion, so ρ is an X state. Basis order is |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩ with
//! the first factor the left site.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::correlators::CorrelatorSet;
use crate::error::{Error, Result};
use crate::model::Complex64;

pub type Mat4 = Matrix4<Complex64>;
pub type Mat2 = Matrix2<Complex64>;

pub const PSD_TOLERANCE: f64 = 1e-9;
pub const STRUCTURE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdmSource {
    pub field: f64,
    pub separation: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSiteRdm {
    pub entries: Mat4,
    pub source: Option<RdmSource>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl TwoSiteRdm {
    pub fn from_matrix(entries: Mat4) -> Self {
        Self {
            entries,
            source: None,
        }
    }

    pub fn maximally_mixed() -> Self {
        Self::from_matrix(Mat4::identity() * c(0.25))
    }

    pub fn with_source(mut self, field: f64, separation: i64) -> Self {
        self.source = Some(RdmSource { field, separation });
        self
    }

    /// Reduced state of the left site.
    pub fn marginal_a(&self) -> Mat2 {
        partial_trace_b(&self.entries)
    }

    /// Reduced state of the right site.
    pub fn marginal_b(&self) -> Mat2 {
        partial_trace_a(&self.entries)
    }

    /// Eigenvalues from the two 2×2 blocks of an X state, ascending.
    pub fn x_state_eigenvalues(&self) -> [f64; 4] {
        let m = &self.entries;
        let block = |p: usize, q: usize| {
            let a = m[(p, p)].re;
            let d = m[(q, q)].re;
            let off = m[(p, q)].norm();
            let mean = 0.5 * (a + d);
            let half = (0.25 * (a - d) * (a - d) + off * off).sqrt();
            [mean - half, mean + half]
        };
        let [a, b] = block(0, 3);
        let [e, f] = block(1, 2);
        let mut ev = [a, b, e, f];
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Tr_B ρ
pub fn partial_trace_b(rho: &Mat4) -> Mat2 {
    Mat2::from_fn(|a, a2| rho[(2 * a, 2 * a2)] + rho[(2 * a + 1, 2 * a2 + 1)])
}

/// Tr_A ρ
pub fn partial_trace_a(rho: &Mat4) -> Mat2 {
    Mat2::from_fn(|b, b2| rho[(b, b2)] + rho[(2 + b, 2 + b2)])
}

/// Ascending eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &Mat4) -> [f64; 4] {
    let h = (m + m.adjoint()) * c(0.5);
    let mut ev: [f64; 4] = h.symmetric_eigenvalues().as_slice().try_into().expect("4 eigenvalues");
    ev.sort_by(f64::total_cmp);
    ev
}

/// ρ = ¼[1 + z(σᶻ⊗1 + 1⊗σᶻ) + xx σˣσˣ + yy σʸσʸ + zz σᶻσᶻ]
pub fn build_rdm(corr: &CorrelatorSet) -> Result<TwoSiteRdm> {
    let CorrelatorSet { z, zz, xx, yy, .. } = *corr;
    let mut m = Mat4::zeros();
    m[(0, 0)] = c((1.0 + 2.0 * z + zz) / 4.0);
    m[(1, 1)] = c((1.0 - zz) / 4.0);
    m[(2, 2)] = c((1.0 - zz) / 4.0);
    m[(3, 3)] = c((1.0 - 2.0 * z + zz) / 4.0);
    m[(0, 3)] = c((xx - yy) / 4.0);
    m[(3, 0)] = c((xx - yy) / 4.0);
    m[(1, 2)] = c((xx + yy) / 4.0);
    m[(2, 1)] = c((xx + yy) / 4.0);
    let rho = TwoSiteRdm::from_matrix(m);
    let min = rho.x_state_eigenvalues()[0];
    if min < -PSD_TOLERANCE {
        return Err(Error::Physicality { min_eigenvalue: min });
    }
    Ok(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdmDiagnostics {
    pub hermiticity_residual: f64,
    pub trace_residual: f64,
    pub min_eigenvalue: f64,
    /// Largest modulus among entries that must vanish for an X state.
    pub x_sparsity_residual: f64,
}

impl RdmDiagnostics {
    pub fn passes(&self) -> bool {
        self.hermiticity_residual <= STRUCTURE_TOLERANCE
            && self.trace_residual <= STRUCTURE_TOLERANCE
            && self.min_eigenvalue >= -PSD_TOLERANCE
            && self.x_sparsity_residual <= STRUCTURE_TOLERANCE
    }
}

pub fn validate_rdm(rho: &TwoSiteRdm) -> RdmDiagnostics {
    let m = &rho.entries;
    let hermiticity_residual = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let trace_residual = (m.trace() - c(1.0)).norm();
    let min_eigenvalue = hermitian_eigenvalues(m)[0];
    let x_sparsity_residual = [(0, 1), (0, 2), (1, 3), (2, 3)]
        .iter()
        .flat_map(|&(i, j)| [m[(i, j)].norm(), m[(j, i)].norm()])
        .fold(0.0, f64::max);
    RdmDiagnostics {
        hermiticity_residual,
        trace_residual,
        min_eigenvalue,
        x_sparsity_residual,
    }
}
