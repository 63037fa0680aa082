//! Dense exact diagonalization of short chains.
//!
//! Basis states are bit strings with bit i = 0 for spin up, so σᶻ_i = 1 - 2b_i.
//! Every S_i flips two sites of the same sublattice, which makes the flip
//! parity of each sublattice conserved (only the total parity when a periodic
//! chain has odd length). H is diagonalized block by block in those sectors.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::correlators::CorrelatorSet;
use crate::error::{Error, Result};
use crate::model::{bdg_solve, edge_splitting, Boundary, Complex64, ModelParams, ZERO_MODE_THRESHOLD};
use crate::rdm::{Mat4, TwoSiteRdm};

pub const DEFAULT_SITE_LIMIT: usize = 12;
/// Sizes above the default limit are opt-in; nothing above this is accepted.
pub const HARD_SITE_LIMIT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdOptions {
    pub max_sites: usize,
    /// Degeneracy window in units of J.
    pub degeneracy_tol: f64,
}

impl Default for EdOptions {
    fn default() -> Self {
        Self {
            max_sites: DEFAULT_SITE_LIMIT,
            degeneracy_tol: ZERO_MODE_THRESHOLD,
        }
    }
}

impl EdOptions {
    /// Allows N up to [`HARD_SITE_LIMIT`].
    pub fn extended() -> Self {
        Self {
            max_sites: HARD_SITE_LIMIT,
            ..Self::default()
        }
    }
}

/// One stabilizer term σˣ_{left} σᶻ_{center} σˣ_{right}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triplet {
    pub center: usize,
    pub flip_mask: usize,
}

/// Spin Hamiltonian in the σᶻ basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinHamiltonian {
    pub params: ModelParams,
    pub sites: usize,
    pub triplets: Vec<Triplet>,
}

fn sz(state: usize, site: usize) -> f64 {
    1.0 - 2.0 * ((state >> site) & 1) as f64
}

impl SpinHamiltonian {
    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    fn diagonal(&self, state: usize) -> f64 {
        let total: f64 = (0..self.sites).map(|i| sz(state, i)).sum();
        -self.params.coupling * self.params.field * total
    }

    /// Nonzero off-diagonal elements ⟨s'|H|s⟩ as (s', value).
    pub fn off_diagonal(&self, state: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let j = self.params.coupling;
        self.triplets
            .iter()
            .map(move |t| (state ^ t.flip_mask, -j * sz(state, t.center)))
    }

    /// Sector label preserved by every term of H.
    pub fn sector_of(&self, state: usize) -> usize {
        let parity = |mask: usize| ((state & mask).count_ones() & 1) as usize;
        if self.sublattices_decouple() {
            let even: usize = (0..self.sites).step_by(2).map(|i| 1 << i).sum();
            let odd: usize = (1..self.sites).step_by(2).map(|i| 1 << i).sum();
            parity(even) | (parity(odd) << 1)
        } else {
            parity(usize::MAX)
        }
    }

    fn sublattices_decouple(&self) -> bool {
        self.params.boundary == Boundary::Open || self.sites % 2 == 0
    }

    pub fn sector_count(&self) -> usize {
        if self.sublattices_decouple() {
            4
        } else {
            2
        }
    }

    /// Basis states of each sector, ascending.
    pub fn sectors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.sector_count()];
        for s in 0..self.dim() {
            out[self.sector_of(s)].push(s);
        }
        out
    }

    /// H restricted to `basis` (which must be closed under H).
    pub fn sector_matrix(&self, basis: &[usize]) -> DMatrix<f64> {
        let mut index = vec![usize::MAX; self.dim()];
        for (k, &s) in basis.iter().enumerate() {
            index[s] = k;
        }
        let mut h = DMatrix::zeros(basis.len(), basis.len());
        for (col, &s) in basis.iter().enumerate() {
            h[(col, col)] += self.diagonal(s);
            for (t, v) in self.off_diagonal(s) {
                h[(index[t], col)] += v;
            }
        }
        h
    }

    /// Full 2^N × 2^N matrix. Intended for small N.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let all: Vec<usize> = (0..self.dim()).collect();
        self.sector_matrix(&all)
    }

    /// ⟨t|H|s⟩ for t ≠ s.
    fn element(&self, t: usize, s: usize) -> f64 {
        self.off_diagonal(s).filter(|&(u, _)| u == t).map(|(_, v)| v).sum()
    }

    /// max |⟨t|H|s⟩ - ⟨s|H|t⟩| over all connected pairs.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in 0..self.dim() {
            for (t, _) in self.off_diagonal(s) {
                worst = worst.max((self.element(t, s) - self.element(s, t)).abs());
            }
        }
        worst
    }

    /// max |[H, Π σᶻ]| matrix element.
    pub fn z2_commutator_residual(&self) -> f64 {
        let p = |s: usize| if s.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let mut worst: f64 = 0.0;
        for s in 0..self.dim() {
            for (t, v) in self.off_diagonal(s) {
                worst = worst.max((v * (p(s) - p(t))).abs());
            }
        }
        worst
    }
}

fn check_size(n: usize, opts: &EdOptions) -> Result<()> {
    let limit = opts.max_sites.min(HARD_SITE_LIMIT);
    if n > limit {
        return Err(Error::SizeGuard { sites: n, limit });
    }
    Ok(())
}

/// S_i on every site with both neighbours; periodic chains wrap.
pub fn build_hamiltonian(params: &ModelParams) -> Result<SpinHamiltonian> {
    build_hamiltonian_with(params, &EdOptions::extended())
}

pub fn build_hamiltonian_with(params: &ModelParams, opts: &EdOptions) -> Result<SpinHamiltonian> {
    let n = params.require_sites()?;
    check_size(n, opts)?;
    let centers: Vec<usize> = match params.boundary {
        Boundary::Open => (1..n - 1).collect(),
        Boundary::Periodic => (0..n).collect(),
    };
    let triplets = centers
        .into_iter()
        .map(|c| Triplet {
            center: c,
            flip_mask: (1 << ((c + n - 1) % n)) | (1 << ((c + 1) % n)),
        })
        .collect();
    Ok(SpinHamiltonian {
        params: *params,
        sites: n,
        triplets,
    })
}

/// Full spectrum and ground space of a chain.
#[derive(Debug, Clone)]
pub struct EdSolution {
    pub hamiltonian: SpinHamiltonian,
    /// Every eigenvalue, ascending.
    pub energies: Vec<f64>,
    pub ground: GroundSpace,
}

/// Orthonormal basis of the states within the degeneracy window of the minimum.
/// Expectation values are taken in their uniform mixture.
#[derive(Debug, Clone)]
pub struct GroundSpace {
    pub field: f64,
    pub sites: usize,
    pub energy: f64,
    pub states: Vec<Vec<f64>>,
}

pub fn solve(params: &ModelParams) -> Result<EdSolution> {
    solve_with(params, &EdOptions::default())
}

fn sector_eigenvalues(h: &SpinHamiltonian, sectors: &[Vec<usize>]) -> Vec<Vec<f64>> {
    sectors
        .iter()
        .map(|basis| h.sector_matrix(basis).symmetric_eigenvalues().iter().copied().collect())
        .collect()
}

/// Every eigenvalue, ascending, without eigenvectors.
pub fn spectrum_with(params: &ModelParams, opts: &EdOptions) -> Result<Vec<f64>> {
    let h = build_hamiltonian_with(params, opts)?;
    let mut energies: Vec<f64> = sector_eigenvalues(&h, &h.sectors()).concat();
    energies.sort_by(f64::total_cmp);
    Ok(energies)
}

pub fn solve_with(params: &ModelParams, opts: &EdOptions) -> Result<EdSolution> {
    let h = build_hamiltonian_with(params, opts)?;
    let sectors = h.sectors();
    let per_sector = sector_eigenvalues(&h, &sectors);
    let mut energies: Vec<f64> = per_sector.concat();
    energies.sort_by(f64::total_cmp);
    let e0 = energies[0];
    let window = opts.degeneracy_tol * params.coupling;

    // eigenvectors only where the ground space lives
    let mut states = Vec::new();
    for (basis, values) in sectors.iter().zip(&per_sector) {
        if values.iter().all(|&e| e - e0 > window) {
            continue;
        }
        let eig = SymmetricEigen::try_new(h.sector_matrix(basis), f64::EPSILON, 100_000)
            .ok_or_else(|| Error::Eigensolver("dense eigensolver did not converge".into()))?;
        for (k, &e) in eig.eigenvalues.iter().enumerate() {
            if e - e0 <= window {
                let mut v = vec![0.0; h.dim()];
                for (row, &s) in basis.iter().enumerate() {
                    v[s] = eig.eigenvectors[(row, k)];
                }
                states.push(v);
            }
        }
    }
    if states.is_empty() {
        return Err(Error::Eigensolver("ground space came out empty".into()));
    }
    let sites = h.sites;
    Ok(EdSolution {
        hamiltonian: h,
        energies,
        ground: GroundSpace {
            field: params.field,
            sites,
            energy: e0,
            states,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub lowest_energies: Vec<f64>,
    pub degeneracy: usize,
    pub tol: f64,
}

/// Lowest `count` levels and the number of states within `tol` (units of J) of the minimum.
pub fn degeneracy(params: &ModelParams, tol: f64, count: usize) -> Result<SpectrumResult> {
    let opts = EdOptions {
        degeneracy_tol: tol,
        ..EdOptions::default()
    };
    degeneracy_with(params, &opts, count)
}

pub fn degeneracy_with(params: &ModelParams, opts: &EdOptions, count: usize) -> Result<SpectrumResult> {
    let energies = spectrum_with(params, opts)?;
    let window = opts.degeneracy_tol * params.coupling;
    Ok(SpectrumResult {
        degeneracy: energies.iter().filter(|&&e| e - energies[0] <= window).count(),
        lowest_energies: energies.into_iter().take(count.max(1)).collect(),
        tol: opts.degeneracy_tol,
    })
}

impl GroundSpace {
    pub fn degeneracy(&self) -> usize {
        self.states.len()
    }

    /// ⟨Π X^{x_mask} Z^{z_mask}⟩, with Z acting before X where the masks overlap.
    pub fn pauli_expectation(&self, x_mask: usize, z_mask: usize) -> f64 {
        let mut total = 0.0;
        for psi in &self.states {
            for (s, &amp) in psi.iter().enumerate() {
                if amp == 0.0 {
                    continue;
                }
                let sign = if (s & z_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                total += psi[s ^ x_mask] * sign * amp;
            }
        }
        total / self.states.len() as f64
    }

    pub fn magnetization(&self, site: usize) -> f64 {
        self.pauli_expectation(0, 1 << site)
    }

    /// ⟨Π_{k<n} σᶻ_{site+2k}⟩
    pub fn string_expectation(&self, site: usize, n: usize) -> f64 {
        let mask = (0..n).map(|k| 1 << (site + 2 * k)).sum();
        self.pauli_expectation(0, mask)
    }

    /// Reduced state of sites i and j, i first.
    pub fn two_site_rdm(&self, i: usize, j: usize) -> Result<TwoSiteRdm> {
        if i == j || i >= self.sites || j >= self.sites {
            return Err(Error::InvalidParameter(format!(
                "need two distinct sites below {}, got ({i}, {j})",
                self.sites
            )));
        }
        let mut m = Mat4::zeros();
        let clear = !((1 << i) | (1 << j));
        let weight = 1.0 / self.states.len() as f64;
        for psi in &self.states {
            for (s, &amp) in psi.iter().enumerate() {
                if amp == 0.0 {
                    continue;
                }
                let row = 2 * ((s >> i) & 1) + ((s >> j) & 1);
                let rest = s & clear;
                for col in 0..4 {
                    let t = rest | ((col >> 1) << i) | ((col & 1) << j);
                    m[(row, col)] += Complex64::new(weight * amp * psi[t], 0.0);
                }
            }
        }
        Ok(TwoSiteRdm::from_matrix(m).with_source(self.field, j as i64 - i as i64))
    }

    /// z, zz, xx, yy between sites i and i + r, z taken at site i.
    pub fn correlators(&self, i: usize, r: usize) -> CorrelatorSet {
        let j = i + r;
        let (a, b) = (1usize << i, 1usize << j);
        // Y = iXZ, so YY = -(XZ)(XZ)
        CorrelatorSet {
            separation: r as i64,
            z: self.magnetization(i),
            zz: self.pauli_expectation(0, a | b),
            xx: self.pauli_expectation(a | b, 0),
            yy: -self.pauli_expectation(a | b, a | b),
        }
    }
}

impl EdSolution {
    /// ⟨S_i⟩ for every triplet of the Hamiltonian.
    pub fn stabilizer_expectations(&self) -> Vec<f64> {
        self.hamiltonian
            .triplets
            .iter()
            .map(|t| self.ground.pauli_expectation(t.flip_mask, 1 << t.center))
            .collect()
    }
}

pub fn two_site_rdm_ed(params: &ModelParams, i: usize, j: usize) -> Result<TwoSiteRdm> {
    solve(params)?.ground.two_site_rdm(i, j)
}

pub fn stabilizer_expectations(params: &ModelParams) -> Result<Vec<f64>> {
    Ok(solve(params)?.stabilizer_expectations())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplittingMethod {
    /// ED up to the default size limit, BdG beyond.
    Auto,
    Ed,
    Bdg,
}

/// E₄ - E₁ of the four lowest open-chain levels for each N.
pub fn splitting_curve(field: f64, sizes: &[usize]) -> Result<Vec<(usize, f64)>> {
    splitting_curve_with(field, sizes, SplittingMethod::Auto)
}

pub fn splitting_curve_with(field: f64, sizes: &[usize], method: SplittingMethod) -> Result<Vec<(usize, f64)>> {
    if field.abs() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "splitting curve needs |B| < 1, got {field}"
        )));
    }
    sizes
        .iter()
        .map(|&n| {
            let use_ed = match method {
                SplittingMethod::Auto => n <= DEFAULT_SITE_LIMIT,
                SplittingMethod::Ed => true,
                SplittingMethod::Bdg => false,
            };
            let split = if use_ed {
                let e = spectrum_with(&ModelParams::open(field, n)?, &EdOptions::extended())?;
                e[3] - e[0]
            } else {
                edge_splitting(field, n)?
            };
            Ok((n, split))
        })
        .collect()
}

/// Lowest `count` open-chain levels from the BdG quasiparticles.
pub fn bdg_levels(params: &ModelParams, count: usize) -> Result<Vec<f64>> {
    Ok(bdg_solve(params)?.many_body_levels(count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlators::correlator_set;
    use crate::model::{ground_energy_density, ChainLength};
    use crate::rdm::{build_rdm, validate_rdm};
    use approx::assert_abs_diff_eq;

    #[test]
    fn cluster_point_periodic_spectrum_is_integer_ladder() {
        let sol = solve(&ModelParams::periodic(0.0, 6).unwrap()).unwrap();
        for &e in &sol.energies {
            let m = (e + 6.0) / 2.0;
            assert_abs_diff_eq!(m, m.round(), epsilon = 1e-10);
            assert!((0.0..=6.0).contains(&m.round()));
        }
        assert_abs_diff_eq!(sol.energies[0], -6.0, epsilon = 1e-12);
        assert_eq!(sol.energies.len(), 64);
    }

    #[test]
    fn hamiltonian_is_hermitian_and_z2_symmetric() {
        for p in [ModelParams::open(0.7, 8).unwrap(), ModelParams::periodic(1.3, 7).unwrap()] {
            let h = build_hamiltonian(&p).unwrap();
            assert_eq!(h.hermiticity_residual(), 0.0);
            assert!(h.z2_commutator_residual() < 1e-12);
            let dense = h.to_dense();
            assert_eq!((&dense - dense.transpose()).amax(), 0.0);
        }
    }

    #[test]
    fn sectors_are_closed() {
        for p in [ModelParams::open(0.5, 8).unwrap(), ModelParams::periodic(0.5, 9).unwrap()] {
            let h = build_hamiltonian(&p).unwrap();
            for s in 0..h.dim() {
                for (t, _) in h.off_diagonal(s) {
                    assert_eq!(h.sector_of(s), h.sector_of(t));
                }
            }
        }
    }

    #[test]
    fn sector_spectrum_matches_dense() {
        let p = ModelParams::open(0.6, 8).unwrap();
        let sol = solve(&p).unwrap();
        let mut dense: Vec<f64> = build_hamiltonian(&p).unwrap().to_dense().symmetric_eigenvalues().iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        for (a, b) in sol.energies.iter().zip(&dense) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn degeneracy_examples() {
        let tol = ZERO_MODE_THRESHOLD;
        assert_eq!(degeneracy(&ModelParams::open(0.0, 8).unwrap(), tol, 4).unwrap().degeneracy, 4);
        assert_eq!(degeneracy(&ModelParams::periodic(0.0, 8).unwrap(), tol, 4).unwrap().degeneracy, 1);
        assert_eq!(degeneracy(&ModelParams::open(2.0, 8).unwrap(), tol, 4).unwrap().degeneracy, 1);
        assert_eq!(solve(&ModelParams::open(0.0, 8).unwrap()).unwrap().ground.degeneracy(), 4);
    }

    #[test]
    fn size_guard() {
        let p = ModelParams::open(0.5, 13).unwrap();
        assert!(matches!(solve(&p), Err(Error::SizeGuard { sites: 13, limit: 12 })));
        let p = ModelParams::open(0.5, 15).unwrap();
        assert!(matches!(
            solve_with(&p, &EdOptions::extended()),
            Err(Error::SizeGuard { limit: 14, .. })
        ));
        let p = ModelParams::new(1.0, 0.5, ChainLength::Thermodynamic, Boundary::Open).unwrap();
        assert!(solve(&p).is_err());
    }

    #[test]
    fn stabilizers_at_cluster_point() {
        for p in [ModelParams::open(0.0, 10).unwrap(), ModelParams::periodic(0.0, 10).unwrap()] {
            let s = stabilizer_expectations(&p).unwrap();
            assert_eq!(s.len(), if p.boundary == Boundary::Open { 8 } else { 10 });
            for v in s {
                assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
            }
        }
        for v in stabilizer_expectations(&ModelParams::open(2.0, 10).unwrap()).unwrap() {
            assert!(v < 1.0 - 1e-6);
        }
    }

    #[test]
    fn cluster_pair_is_maximally_mixed() {
        let rho = two_site_rdm_ed(&ModelParams::open(0.0, 10).unwrap(), 4, 6).unwrap();
        assert!((rho.entries - TwoSiteRdm::maximally_mixed().entries).norm() < 1e-10);
        assert!(validate_rdm(&rho).passes());
    }

    #[test]
    fn polarized_pair() {
        let rho = two_site_rdm_ed(&ModelParams::open(100.0, 8).unwrap(), 2, 5).unwrap();
        assert_abs_diff_eq!(rho.entries[(0, 0)].re, 1.0, epsilon = 1e-3);
        assert!(validate_rdm(&rho).passes());
    }

    #[test]
    fn rdm_marginals_match_single_site_values() {
        let sol = solve(&ModelParams::open(0.8, 10).unwrap()).unwrap();
        let rho = sol.ground.two_site_rdm(3, 7).unwrap();
        let za = (rho.marginal_a()[(0, 0)] - rho.marginal_a()[(1, 1)]).re;
        let zb = (rho.marginal_b()[(0, 0)] - rho.marginal_b()[(1, 1)]).re;
        assert_abs_diff_eq!(za, sol.ground.magnetization(3), epsilon = 1e-12);
        assert_abs_diff_eq!(zb, sol.ground.magnetization(7), epsilon = 1e-12);
    }

    #[test]
    fn rdm_entries_match_pauli_expectations() {
        let sol = solve(&ModelParams::open(1.4, 10).unwrap()).unwrap();
        let c = sol.ground.correlators(3, 2);
        let rho = sol.ground.two_site_rdm(3, 5).unwrap().entries;
        assert_abs_diff_eq!(rho[(1, 2)].re, (c.xx + c.yy) / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho[(0, 3)].re, (c.xx - c.yy) / 4.0, epsilon = 1e-12);
        let zz = (rho[(0, 0)] + rho[(3, 3)] - rho[(1, 1)] - rho[(2, 2)]).re;
        assert_abs_diff_eq!(zz, c.zz, epsilon = 1e-12);
    }

    #[test]
    fn ed_levels_match_bdg() {
        for &b in &[0.0, 0.3, 0.7, 2.0] {
            for n in [6usize, 8, 10] {
                let p = ModelParams::open(b, n).unwrap();
                let ed = solve(&p).unwrap().energies;
                let bdg = bdg_levels(&p, 12).unwrap();
                for (a, e) in bdg.iter().zip(&ed) {
                    assert_abs_diff_eq!(a, e, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn ed_correlators_match_bdg_determinants() {
        // same finite chain, two unrelated methods; fixes every sign convention
        for &b in &[0.0, 0.4, 1.0, 2.5] {
            let p = ModelParams::open(b, 10).unwrap();
            let ed = solve(&p).unwrap();
            let bdg = bdg_solve(&p).unwrap();
            for (i, r) in [(2usize, 2usize), (3, 3), (1, 4), (4, 1)] {
                let a = ed.ground.correlators(i, r);
                let d = CorrelatorSet::from_contractions(&bdg, i as i64, r as i64).unwrap();
                assert_abs_diff_eq!(a.z, d.z, epsilon = 1e-10);
                assert_abs_diff_eq!(a.zz, d.zz, epsilon = 1e-10);
                assert_abs_diff_eq!(a.xx, d.xx, epsilon = 1e-10);
                assert_abs_diff_eq!(a.yy, d.yy, epsilon = 1e-10);
            }
            let s_ed = ed.ground.string_expectation(2, 3);
            let s_bdg = crate::correlators::string_at(&bdg, 2, 3).unwrap();
            assert_abs_diff_eq!(s_ed, s_bdg, epsilon = 1e-10);
        }
    }

    #[test]
    fn splitting_examples() {
        for (_, s) in splitting_curve(0.0, &[6, 8, 10]).unwrap() {
            assert!(s.abs() < 1e-12);
        }
        let curve = splitting_curve(0.3, &[6, 8, 10, 12]).unwrap();
        assert!(curve.windows(2).all(|w| w[1].1 < w[0].1), "{curve:?}");
        let ed = splitting_curve_with(0.3, &[12], SplittingMethod::Ed).unwrap()[0].1;
        assert_abs_diff_eq!(ed, edge_splitting(0.3, 12).unwrap(), epsilon = 1e-8);
        assert!(splitting_curve(1.0, &[8]).is_err());
    }

    #[test]
    fn periodic_energy_density() {
        let sol = solve(&ModelParams::periodic(2.0, 12).unwrap()).unwrap();
        let exact = ground_energy_density(1.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(sol.ground.energy / 12.0, exact, epsilon = 1e-2);
    }

    #[test]
    fn mid_chain_approaches_thermodynamic_limit() {
        for &b in &[2.0, 5.0] {
            for r in [2usize, 4] {
                let tl = build_rdm(&correlator_set(b, r as i64, 1e-10).unwrap()).unwrap().entries;
                let dev = |n: usize| {
                    let i = (n - r) / 2;
                    let rho = two_site_rdm_ed(&ModelParams::open(b, n).unwrap(), i, i + r).unwrap();
                    (rho.entries - tl).iter().map(|z| z.norm()).fold(0.0, f64::max)
                };
                let (d8, d12) = (dev(8), dev(12));
                assert!(d12 < 2e-2, "B = {b}, R = {r}: {d12}");
                assert!(d12 <= d8, "B = {b}, R = {r}: {d8} -> {d12}");
            }
        }
    }
}
