//! Spin correlators as determinants of fermionic contractions.
//!
//! With ⟨A_i A_j⟩ = ⟨B_i B_j⟩ = 0 for i ≠ j, Wick's theorem turns every
//! Jordan-Wigner string into a determinant of ⟨A_i B_j⟩ entries. For a
//! translation-invariant chain ⟨A_i B_j⟩ = G_{j-i} and
//!
//! - ⟨σᶻ⟩ = -G_0
//! - ⟨σᶻ_0 σᶻ_R⟩ = G_0² - G_R G_{-R}
//! - ⟨σˣ_0 σˣ_R⟩ = det[G_{p-q+1}]_{p,q<R}
//! - ⟨σʸ_0 σʸ_R⟩ = det[G_{p-q-1}]_{p,q<R}
//! - ⟨Π_{i<n} σᶻ_{2i}⟩ = (-1)^n det[G_{2(q-p)}]_{p,q<n}
//!
//! The functions here take any [`Contractions`] source, so the same code
//! evaluates thermodynamic-limit correlators from a [`GVector`] and exact
//! finite open-chain correlators from a [`BdGSolution`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::det::det;
use crate::error::{Error, Result};
use crate::gfunction::{g_vector, GVector};
use crate::model::BdGSolution;

/// σᶻ = 2c†c - 1 = -A B, so ⟨σᶻ⟩ = -⟨A_0 B_0⟩.
pub const MAGNETIZATION_SIGN: f64 = -1.0;

/// Ground-state contractions ⟨A_i B_j⟩.
pub trait Contractions {
    fn contraction(&self, i: i64, j: i64) -> Result<f64>;
}

impl Contractions for GVector {
    fn contraction(&self, i: i64, j: i64) -> Result<f64> {
        self.get(j - i)
    }
}

impl Contractions for BdGSolution {
    fn contraction(&self, i: i64, j: i64) -> Result<f64> {
        let n = self.sites() as i64;
        for site in [i, j] {
            if site < 0 || site >= n {
                return Err(Error::InvalidParameter(format!(
                    "site {site} outside open chain of {n} sites"
                )));
            }
        }
        Ok(self.contraction(i as usize, j as usize))
    }
}

fn contraction_matrix<C, F>(src: &C, dim: usize, index: F) -> Result<DMatrix<f64>>
where
    C: Contractions + ?Sized,
    F: Fn(i64, i64) -> (i64, i64),
{
    let mut m = DMatrix::zeros(dim, dim);
    for p in 0..dim {
        for q in 0..dim {
            let (a, b) = index(p as i64, q as i64);
            m[(p, q)] = src.contraction(a, b)?;
        }
    }
    Ok(m)
}

fn check_positive(r: i64) -> Result<()> {
    if r < 1 {
        return Err(Error::InvalidParameter(format!("separation must be positive, got {r}")));
    }
    Ok(())
}

pub fn magnetization_at<C: Contractions + ?Sized>(src: &C, site: i64) -> Result<f64> {
    Ok(MAGNETIZATION_SIGN * src.contraction(site, site)?)
}

pub fn zz_at<C: Contractions + ?Sized>(src: &C, site: i64, r: i64) -> Result<f64> {
    check_positive(r)?;
    let j = site + r;
    Ok(src.contraction(site, site)? * src.contraction(j, j)?
        - src.contraction(site, j)? * src.contraction(j, site)?)
}

pub fn xx_at<C: Contractions + ?Sized>(src: &C, site: i64, r: i64) -> Result<f64> {
    check_positive(r)?;
    let m = contraction_matrix(src, r as usize, |p, q| (site + q, site + p + 1))?;
    Ok(det(m))
}

pub fn yy_at<C: Contractions + ?Sized>(src: &C, site: i64, r: i64) -> Result<f64> {
    check_positive(r)?;
    let m = contraction_matrix(src, r as usize, |p, q| (site + q + 1, site + p))?;
    Ok(det(m))
}

/// ⟨Π_{i<n} σᶻ_{site+2i}⟩ over one sublattice.
pub fn string_at<C: Contractions + ?Sized>(src: &C, site: i64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("string needs at least one site".into()));
    }
    let m = contraction_matrix(src, n, |p, q| (site + 2 * p, site + 2 * q))?;
    Ok(MAGNETIZATION_SIGN.powi(n as i32) * det(m))
}

fn check_even(r: i64) -> Result<()> {
    if r < 2 || r % 2 != 0 {
        return Err(Error::OddSeparation(r));
    }
    Ok(())
}

/// ⟨σᶻ⟩ in the thermodynamic limit.
pub fn magnetization(g: &GVector) -> Result<f64> {
    magnetization_at(g, 0)
}

pub fn zz_correlator(g: &GVector, r: i64) -> Result<f64> {
    check_even(r)?;
    zz_at(g, 0, r)
}

pub fn xx_correlator(g: &GVector, r: i64) -> Result<f64> {
    check_even(r)?;
    xx_at(g, 0, r)
}

pub fn yy_correlator(g: &GVector, r: i64) -> Result<f64> {
    check_even(r)?;
    yy_at(g, 0, r)
}

/// String order correlator over `n` sites of one sublattice, equal to the
/// dual Ising correlation ⟨τˣ_0 τˣ_{2n}⟩.
pub fn string_correlator(g: &GVector, n: usize) -> Result<f64> {
    string_at(g, 0, n)
}

/// (1 - 1/B²)^{1/4} for |B| > 1, zero otherwise.
pub fn string_order_asymptote(field: f64) -> f64 {
    if field.abs() > 1.0 {
        (1.0 - 1.0 / (field * field)).powf(0.25)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSet {
    pub separation: i64,
    pub z: f64,
    pub zz: f64,
    pub xx: f64,
    pub yy: f64,
}

impl CorrelatorSet {
    pub fn from_contractions<C: Contractions + ?Sized>(src: &C, site: i64, r: i64) -> Result<Self> {
        Ok(Self {
            separation: r,
            z: magnetization_at(src, site)?,
            zz: zz_at(src, site, r)?,
            xx: xx_at(src, site, r)?,
            yy: yy_at(src, site, r)?,
        })
    }

    pub fn from_gvector(g: &GVector, r: i64) -> Result<Self> {
        check_even(r)?;
        Self::from_contractions(g, 0, r)
    }

    /// ⟨σᶻσᶻ⟩ - ⟨σᶻ⟩²
    pub fn connected_zz(&self) -> f64 {
        self.zz - self.z * self.z
    }
}

/// All correlators at separation `r` in the thermodynamic limit.
pub fn correlator_set(field: f64, r: i64, tol: f64) -> Result<CorrelatorSet> {
    check_even(r)?;
    let g = g_vector(field, r, tol)?;
    CorrelatorSet::from_gvector(&g, r)
}
