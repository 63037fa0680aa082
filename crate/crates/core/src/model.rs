//! Hamiltonian parameters and the free-fermion solution of the chain
//!
//! H = -J Σ_i (σˣ_{i-1} σᶻ_i σˣ_{i+1} + B σᶻ_i)
//!
//! After Jordan-Wigner the chain is quadratic in the fermions, with
//! `A_i = c_i - c_i†` and `B_i = c_i + c_i†`:
//!
//! -H/J = Σ_i A_{i-1} B_{i+1} - B Σ_i A_i B_i
//!
//! Periodic chains are diagonal in momentum space with single-mode energy
//! `2J ε_k`, `ε_k = (1 + B² - 2B cos 2k)^{1/2}`. Open chains are handled by a
//! Majorana (BdG) decomposition of the same quadratic form.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

pub type Complex64 = Complex<f64>;

/// Quasiparticle energies below `ZERO_MODE_THRESHOLD * J` count as zero modes.
pub const ZERO_MODE_THRESHOLD: f64 = 1e-10;

/// `ε_k` below this is treated as a closed gap.
pub const GAP_CLOSING_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainLength {
    Finite(usize),
    Thermodynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub coupling: f64,
    pub field: f64,
    pub length: ChainLength,
    pub boundary: Boundary,
}

impl ModelParams {
    pub fn new(coupling: f64, field: f64, length: ChainLength, boundary: Boundary) -> Result<Self> {
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coupling J must be positive, got {coupling}"
            )));
        }
        if !field.is_finite() {
            return Err(Error::InvalidParameter(format!("field B must be finite, got {field}")));
        }
        if let ChainLength::Finite(n) = length {
            if n < 4 {
                return Err(Error::InvalidParameter(format!(
                    "finite chains need at least 4 sites, got {n}"
                )));
            }
        }
        Ok(Self {
            coupling,
            field,
            length,
            boundary,
        })
    }

    /// Open chain of `sites` sites with J = 1.
    pub fn open(field: f64, sites: usize) -> Result<Self> {
        Self::new(1.0, field, ChainLength::Finite(sites), Boundary::Open)
    }

    /// Periodic chain of `sites` sites with J = 1.
    pub fn periodic(field: f64, sites: usize) -> Result<Self> {
        Self::new(1.0, field, ChainLength::Finite(sites), Boundary::Periodic)
    }

    pub fn sites(&self) -> Option<usize> {
        match self.length {
            ChainLength::Finite(n) => Some(n),
            ChainLength::Thermodynamic => None,
        }
    }

    pub(crate) fn require_sites(&self) -> Result<usize> {
        self.sites().ok_or_else(|| {
            Error::InvalidParameter("operation needs a finite chain length".to_string())
        })
    }
}

/// ε_k = (1 + B² - 2B cos 2k)^{1/2}.
///
/// Evaluated as `(1-B)² + 4B sin²k` (or `(1+B)² + 4|B| cos²k` for B < 0) so the
/// gap-closing point does not lose precision to cancellation.
pub fn dispersion(field: f64, k: f64) -> f64 {
    dispersion_sq(field, k).max(0.0).sqrt()
}

fn dispersion_sq(field: f64, k: f64) -> f64 {
    if field >= 0.0 {
        let s = k.sin();
        (1.0 - field) * (1.0 - field) + 4.0 * field * s * s
    } else {
        let c = k.cos();
        (1.0 + field) * (1.0 + field) - 4.0 * field * c * c
    }
}

/// e^{2iθ_k} = (B - e^{-2ik}) / ε_k.
pub fn bogoliubov_phase(field: f64, k: f64) -> Result<Complex64> {
    let eps = dispersion(field, k);
    if eps < GAP_CLOSING_EPS {
        return Err(Error::DegeneratePoint {
            field,
            momentum: k,
            epsilon: eps,
        });
    }
    // B - cos 2k = (B - 1) + 2 sin²k
    let s = k.sin();
    let re = (field - 1.0) + 2.0 * s * s;
    let im = (2.0 * k).sin();
    Ok(Complex64::new(re / eps, im / eps))
}

/// Momentum-space solution of the periodic chain.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeFermionSolution {
    pub momenta: Vec<f64>,
    /// ε_k in units of J; the single-mode excitation energy is 2Jε_k.
    pub energies: Vec<f64>,
    /// e^{2iθ_k}.
    pub phases: Vec<Complex64>,
    coupling: f64,
}

impl FreeFermionSolution {
    /// -J Σ_k ε_k
    pub fn ground_energy(&self) -> f64 {
        -self.coupling * self.energies.iter().sum::<f64>()
    }
}

/// Momenta k_p = 2πp/N for p = -N/2 .. N/2-1.
pub fn periodic_momenta(sites: usize) -> Vec<f64> {
    let n = sites as i64;
    (-n / 2..n - n / 2)
        .map(|p| 2.0 * PI * p as f64 / sites as f64)
        .collect()
}

pub fn solve_periodic(params: &ModelParams) -> Result<FreeFermionSolution> {
    let n = params.require_sites()?;
    if params.boundary != Boundary::Periodic {
        return Err(Error::InvalidParameter(
            "momentum-space solution needs a periodic chain".to_string(),
        ));
    }
    let momenta = periodic_momenta(n);
    let energies: Vec<f64> = momenta.iter().map(|&k| dispersion(params.field, k)).collect();
    let phases = momenta
        .iter()
        .map(|&k| bogoliubov_phase(params.field, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(FreeFermionSolution {
        momenta,
        energies,
        phases,
        coupling: params.coupling,
    })
}

/// Ground energy per site in the thermodynamic limit, -(J/π) ∫_{-π/2}^{π/2} ε_k dk.
pub fn ground_energy_density(coupling: f64, field: f64, tol: f64) -> Result<f64> {
    let f = |k: f64| Complex64::new(dispersion(field, k), 0.0);
    let breaks = [-0.5 * PI, 0.0, 0.5 * PI];
    let (value, _) = quadrature::integrate(&f, &breaks, tol, quadrature::DEFAULT_MAX_INTERVALS)?;
    Ok(-coupling * value.re / PI)
}

/// Majorana decomposition of an open chain.
#[derive(Debug, Clone, PartialEq)]
pub struct BdGSolution {
    /// Single-quasiparticle excitation energies, ascending, one per fermion mode.
    pub quasiparticle_energies: Vec<f64>,
    /// Entry (i, j) is ⟨A_i B_j⟩ in the ground state. Zero modes are left
    /// unoccupied-or-occupied with equal weight, i.e. the uniform mixture over
    /// the degenerate ground space.
    pub contraction_table: DMatrix<f64>,
    coupling: f64,
}

impl BdGSolution {
    pub fn sites(&self) -> usize {
        self.quasiparticle_energies.len()
    }

    pub fn contraction(&self, i: usize, j: usize) -> f64 {
        self.contraction_table[(i, j)]
    }

    /// Fermion modes with energy below the zero-mode threshold.
    pub fn zero_mode_count(&self) -> usize {
        let cut = ZERO_MODE_THRESHOLD * self.coupling;
        self.quasiparticle_energies.iter().filter(|&&e| e < cut).count()
    }

    /// Unpaired Majorana operators: two for every fermionic zero mode.
    pub fn majorana_zero_modes(&self) -> usize {
        2 * self.zero_mode_count()
    }

    pub fn ground_energy(&self) -> f64 {
        -0.5 * self.quasiparticle_energies.iter().sum::<f64>()
    }

    /// The `count` lowest many-body levels, built by occupying subsets of the
    /// lowest (at most 16) quasiparticle modes.
    pub fn many_body_levels(&self, count: usize) -> Vec<f64> {
        let modes = &self.quasiparticle_energies[..self.sites().min(16)];
        let e0 = self.ground_energy();
        let mut levels: Vec<f64> = (0u32..1 << modes.len())
            .map(|mask| {
                e0 + modes
                    .iter()
                    .enumerate()
                    .filter(|(m, _)| mask & (1 << m) != 0)
                    .map(|(_, e)| e)
                    .sum::<f64>()
            })
            .collect();
        levels.sort_by(f64::total_cmp);
        levels.truncate(count);
        levels
    }
}

/// Solves the open chain through the singular values of its Majorana coupling matrix.
///
/// With Majoranas `a_j = B_j` and `b_i = -i A_i` the Hamiltonian reads
/// `H = i Σ_{ij} W_{ij} b_i a_j`, where `W_{i-1,i+1} = -J` for every complete
/// triplet and `W_{ii} = J B`. For `W = U Σ Vᵀ` each singular value σ gives
/// a mode of excitation energy 2σ, and the ground state has
/// `⟨A_i B_j⟩ = -Σ_k U_{ik} V_{jk}` over the gapped modes.
pub fn bdg_solve(params: &ModelParams) -> Result<BdGSolution> {
    let n = params.require_sites()?;
    if params.boundary != Boundary::Open {
        return Err(Error::InvalidParameter(
            "BdG solver handles open chains only".to_string(),
        ));
    }
    let j = params.coupling;
    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        w[(i, i)] = j * params.field;
    }
    for i in 1..n - 1 {
        w[(i - 1, i + 1)] = -j;
    }

    let svd = w
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigensolver("SVD of the Majorana coupling matrix failed".into()))?;
    let u = svd
        .u
        .ok_or_else(|| Error::Eigensolver("SVD returned no left vectors".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Eigensolver("SVD returned no right vectors".into()))?;
    let sigma = svd.singular_values;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma[a].total_cmp(&sigma[b]));
    let quasiparticle_energies: Vec<f64> = order.iter().map(|&k| 2.0 * sigma[k]).collect();

    let cut = 0.5 * ZERO_MODE_THRESHOLD * j;
    let mut table = DMatrix::<f64>::zeros(n, n);
    for k in (0..n).filter(|&k| sigma[k] >= cut) {
        for a in 0..n {
            let uk = u[(a, k)];
            if uk == 0.0 {
                continue;
            }
            for b in 0..n {
                table[(a, b)] -= uk * v_t[(k, b)];
            }
        }
    }
    table.iter_mut().for_each(|x| *x = x.clamp(-1.0, 1.0));

    Ok(BdGSolution {
        quasiparticle_energies,
        contraction_table: table,
        coupling: j,
    })
}

/// Width E₄ - E₁ of the four quasi-degenerate open-chain ground levels
/// (J = 1), i.e. the sum of the two smallest quasiparticle energies.
pub fn edge_splitting(field: f64, sites: usize) -> Result<f64> {
    if field.abs() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "edge splitting is defined in the topological phase |B| < 1, got B = {field}"
        )));
    }
    let sol = bdg_solve(&ModelParams::open(field, sites)?)?;
    let e = &sol.quasiparticle_energies;
    Ok(e[0] + e[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn dispersion_examples() {
        assert_abs_diff_eq!(dispersion(0.0, 0.37), 1.0, epsilon = 1e-15);
        assert_eq!(dispersion(1.0, 0.0), 0.0);
        assert_abs_diff_eq!(dispersion(2.0, 0.5 * PI), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn dispersion_matches_textbook_form() {
        for &b in &[-2.5, -1.0, -0.3, 0.0, 0.4, 1.0, 3.0] {
            for i in 0..50 {
                let k = -PI + 2.0 * PI * i as f64 / 50.0;
                let direct = (1.0 + b * b - 2.0 * b * (2.0 * k).cos()).max(0.0).sqrt();
                assert_abs_diff_eq!(dispersion(b, k), direct, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn phase_examples() {
        let k = 0.37;
        let p = bogoliubov_phase(0.0, k).unwrap();
        let expected = -Complex64::new(0.0, -2.0 * k).exp();
        assert_abs_diff_eq!(p.re, expected.re, epsilon = 1e-14);
        assert_abs_diff_eq!(p.im, expected.im, epsilon = 1e-14);

        let p = bogoliubov_phase(2.0, 0.0).unwrap();
        assert_abs_diff_eq!(p.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.im, 0.0, epsilon = 1e-15);

        assert!(matches!(
            bogoliubov_phase(1.0, 0.0),
            Err(Error::DegeneratePoint { .. })
        ));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 1.0, ChainLength::Finite(8), Boundary::Open).is_err());
        assert!(ModelParams::new(-1.0, 1.0, ChainLength::Finite(8), Boundary::Open).is_err());
        assert!(ModelParams::open(0.5, 3).is_err());
        assert!(ModelParams::open(f64::NAN, 8).is_err());
        assert!(ModelParams::new(1.0, 0.5, ChainLength::Thermodynamic, Boundary::Periodic).is_ok());
    }

    #[test]
    fn bdg_cluster_point_has_four_majorana_zero_modes() {
        let sol = bdg_solve(&ModelParams::open(0.0, 8).unwrap()).unwrap();
        let e = &sol.quasiparticle_energies;
        assert_eq!(e.len(), 8);
        assert!(e[0] < 1e-12 && e[1] < 1e-12);
        assert_eq!(sol.zero_mode_count(), 2);
        assert_eq!(sol.majorana_zero_modes(), 4);
        for &x in &e[2..] {
            assert_abs_diff_eq!(x, 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn bdg_polarized_phase_is_gapped() {
        let sol = bdg_solve(&ModelParams::open(3.0, 12).unwrap()).unwrap();
        assert!(sol.quasiparticle_energies[0] > 0.5);
        assert_eq!(sol.majorana_zero_modes(), 0);
        // deep in the polarized phase ⟨A_i B_i⟩ → -1
        for i in 0..12 {
            assert!(sol.contraction(i, i) < -0.9);
        }
    }

    #[test]
    fn bdg_rejects_periodic() {
        assert!(bdg_solve(&ModelParams::periodic(0.5, 8).unwrap()).is_err());
    }

    #[test]
    fn zero_modes_for_even_lengths() {
        for n in (8..=40).step_by(2) {
            let at_zero = bdg_solve(&ModelParams::open(0.0, n).unwrap()).unwrap();
            assert_eq!(at_zero.majorana_zero_modes(), 4, "N = {n}");
            let polarized = bdg_solve(&ModelParams::open(1.5, n).unwrap()).unwrap();
            assert_eq!(polarized.majorana_zero_modes(), 0, "N = {n}");
        }
    }

    #[test]
    fn splitting_examples() {
        assert!(edge_splitting(0.0, 10).unwrap() < 1e-12);
        let seq: Vec<f64> = [8, 12, 16, 20]
            .iter()
            .map(|&n| edge_splitting(0.5, n).unwrap())
            .collect();
        assert!(seq.windows(2).all(|w| w[1] < w[0]), "{seq:?}");
        assert!(edge_splitting(1.2, 10).is_err());
    }

    #[test]
    fn bdg_cluster_contractions() {
        // at B = 0 the bulk satisfies ⟨A_{i-1} B_{i+1}⟩ = 1 and nothing else survives
        let sol = bdg_solve(&ModelParams::open(0.0, 10).unwrap()).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let expected = if j == i + 2 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(sol.contraction(i, j), expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn many_body_levels_at_cluster_point() {
        let sol = bdg_solve(&ModelParams::open(0.0, 8).unwrap()).unwrap();
        let levels = sol.many_body_levels(5);
        // six stabilizers at -J each; four degenerate ground states, then one flip
        for &l in &levels[..4] {
            assert_abs_diff_eq!(l, -6.0, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(levels[4], -4.0, epsilon = 1e-10);
    }

    #[test]
    fn periodic_ground_energy_converges() {
        let exact = ground_energy_density(1.0, 0.7, 1e-12).unwrap();
        let mut last = f64::INFINITY;
        for &n in &[8usize, 16, 32, 64] {
            let sol = solve_periodic(&ModelParams::periodic(0.7, n).unwrap()).unwrap();
            let err = (sol.ground_energy() / n as f64 - exact).abs();
            assert!(err <= 1.0 / n as f64, "N = {n}: {err}");
            assert!(err <= last + 1e-15);
            last = err;
        }
        // B = 0: ε ≡ 1 and every stabilizer contributes -J
        let e = ground_energy_density(1.0, 0.0, 1e-12).unwrap();
        assert_abs_diff_eq!(e, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn periodic_momenta_layout() {
        let k = periodic_momenta(8);
        assert_eq!(k.len(), 8);
        assert_abs_diff_eq!(k[0], -PI, epsilon = 1e-15);
        assert_abs_diff_eq!(k[4], 0.0, epsilon = 1e-15);
        assert!(matches!(
            solve_periodic(&ModelParams::periodic(1.0, 8).unwrap()),
            Err(Error::DegeneratePoint { .. })
        ));
    }

    proptest! {
        #[test]
        fn dispersion_is_even(b in -5.0f64..5.0, k in -PI..PI) {
            prop_assert_eq!(dispersion(b, k), dispersion(b, -k));
        }

        #[test]
        fn phase_has_unit_modulus(b in -5.0f64..5.0, k in -PI..PI) {
            prop_assume!(dispersion(b, k) > 1e-10);
            let p = bogoliubov_phase(b, k).unwrap();
            prop_assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }
}
