//! Quantum-information measures for two-qubit states. All entropies are in bits.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Complex64;
use crate::rdm::{hermitian_eigenvalues, partial_trace_a, partial_trace_b, Mat2, Mat4, PSD_TOLERANCE};

/// Eigenvalues below this are dropped from entropy sums (not renormalised).
pub const EIGENVALUE_CLAMP: f64 = 1e-12;

fn entropy_term(l: f64) -> f64 {
    if l < EIGENVALUE_CLAMP {
        0.0
    } else {
        -l * l.log2()
    }
}

/// Von Neumann entropy of a two-qubit density operator.
pub fn entropy(rho: &Mat4) -> Result<f64> {
    let ev = hermitian_eigenvalues(rho);
    if ev[0] < -PSD_TOLERANCE {
        return Err(Error::Physicality { min_eigenvalue: ev[0] });
    }
    Ok(ev.iter().map(|&l| entropy_term(l)).sum())
}

fn qubit_eigenvalues(rho: &Mat2) -> [f64; 2] {
    let a = rho[(0, 0)].re;
    let d = rho[(1, 1)].re;
    let b = 0.5 * (rho[(0, 1)] + rho[(1, 0)].conj());
    let mean = 0.5 * (a + d);
    let half = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - half, mean + half]
}

/// Von Neumann entropy of a single-qubit operator (trace not assumed 1).
pub fn qubit_entropy(rho: &Mat2) -> f64 {
    qubit_eigenvalues(rho).iter().map(|&l| entropy_term(l)).sum()
}

/// S(ρᴬ) + S(ρᴮ) - S(ρᴬᴮ)
pub fn mutual_information(rho: &Mat4) -> Result<f64> {
    let s_ab = entropy(rho)?;
    Ok(qubit_entropy(&partial_trace_b(rho)) + qubit_entropy(&partial_trace_a(rho)) - s_ab)
}

fn sigma_y_sigma_y() -> Mat4 {
    let mut m = Mat4::zeros();
    m[(0, 3)] = Complex64::new(-1.0, 0.0);
    m[(1, 2)] = Complex64::new(1.0, 0.0);
    m[(2, 1)] = Complex64::new(1.0, 0.0);
    m[(3, 0)] = Complex64::new(-1.0, 0.0);
    m
}

/// Wootters concurrence. The λ_i are taken from the Hermitian form
/// √ρ ρ̃ √ρ, which has the same spectrum as ρ ρ̃ with ρ̃ = (σʸ⊗σʸ) ρ* (σʸ⊗σʸ).
pub fn concurrence(rho: &Mat4) -> f64 {
    let h = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let sqrt_vals = eig.eigenvalues.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0));
    let v = &eig.eigenvectors;
    let sqrt_rho = v * Mat4::from_diagonal(&sqrt_vals) * v.adjoint();
    let yy = sigma_y_sigma_y();
    let tilde = yy * rho.conjugate() * yy;
    let r = &sqrt_rho * tilde * &sqrt_rho;
    let r = (r + r.adjoint()) * Complex64::new(0.5, 0.0);
    let mut lambdas: Vec<f64> = r
        .symmetric_eigenvalues()
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_term(p) + entropy_term(1.0 - p)
}

/// E = h((1 + √(1 - C²)) / 2)
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt()))
}

pub fn eof(rho: &Mat4) -> f64 {
    eof_from_concurrence(concurrence(rho))
}

/// Rank-1 projective measurement along the Bloch direction (θ, φ) and its antipode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBasis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementBasis {
    /// Folds arbitrary angles into θ ∈ [0, π], φ ∈ [0, 2π) without changing
    /// the Bloch direction.
    pub fn new(theta: f64, phi: f64) -> Self {
        let mut theta = theta.rem_euclid(2.0 * PI);
        let mut phi = phi;
        if theta > PI {
            theta = 2.0 * PI - theta;
            phi += PI;
        }
        Self {
            theta,
            phi: phi.rem_euclid(2.0 * PI),
        }
    }

    /// The two orthonormal measurement vectors.
    pub fn vectors(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = (0.5 * self.theta).sin_cos();
        let e = Complex64::new(0.0, self.phi).exp();
        [
            [Complex64::new(c, 0.0), e * s],
            [-e.conj() * s, Complex64::new(c, 0.0)],
        ]
    }

    pub fn projectors(&self) -> [Mat2; 2] {
        self.vectors().map(|v| Mat2::from_fn(|i, j| v[i] * v[j].conj()))
    }
}

/// Σ_i p_i S(ρᴬ|i) after measuring the right qubit in `basis`.
pub fn measured_conditional_entropy(rho: &Mat4, basis: &MeasurementBasis) -> f64 {
    basis
        .vectors()
        .iter()
        .map(|v| {
            // ⟨v|_B ρ |v⟩_B, unnormalised
            let m = Mat2::from_fn(|a, a2| {
                let mut acc = Complex64::new(0.0, 0.0);
                for b in 0..2 {
                    for b2 in 0..2 {
                        acc += v[b].conj() * rho[(2 * a + b, 2 * a2 + b2)] * v[b2];
                    }
                }
                acc
            });
            let p = m.trace().re;
            if p < 1e-14 {
                0.0
            } else {
                p * qubit_entropy(&(m / Complex64::new(p, 0.0)))
            }
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscordOptions {
    pub theta_points: usize,
    pub phi_points: usize,
    /// Simplex value spread (bits) required for convergence.
    pub value_tol: f64,
    /// Simplex diameter (radians) required for convergence.
    pub angle_tol: f64,
    pub max_iterations: usize,
}

impl Default for DiscordOptions {
    fn default() -> Self {
        Self {
            theta_points: 64,
            phi_points: 32,
            value_tol: 1e-8,
            angle_tol: 1e-7,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub grid: (usize, usize),
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscordResult {
    pub discord: f64,
    pub classical_correlation: f64,
    pub mutual_information: f64,
    pub optimal_basis: MeasurementBasis,
    pub optimizer_report: OptimizerReport,
}

struct Simplex {
    points: [[f64; 2]; 3],
    values: [f64; 3],
}

impl Simplex {
    fn sort(&mut self) {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.points = idx.map(|i| self.points[i]);
        self.values = idx.map(|i| self.values[i]);
    }

    fn diameter(&self) -> f64 {
        let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let [p, q, r] = self.points;
        d(p, q).max(d(p, r)).max(d(q, r))
    }
}

/// Nelder-Mead on a 2-D function; returns (best point, best value, iterations, converged).
fn nelder_mead<F: Fn([f64; 2]) -> f64>(
    f: F,
    start: [f64; 2],
    step: [f64; 2],
    opts: &DiscordOptions,
) -> ([f64; 2], f64, usize, bool) {
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let points = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut s = Simplex {
        points,
        values: points.map(&f),
    };
    s.sort();
    for iter in 0..opts.max_iterations {
        if s.values[2] - s.values[0] <= opts.value_tol && s.diameter() <= opts.angle_tol {
            return (s.points[0], s.values[0], iter, true);
        }
        let centroid = lerp(s.points[0], s.points[1], 0.5);
        let worst = s.points[2];
        let reflected = lerp(centroid, worst, -1.0);
        let fr = f(reflected);
        if fr < s.values[0] {
            let expanded = lerp(centroid, worst, -2.0);
            let fe = f(expanded);
            if fe < fr {
                s.points[2] = expanded;
                s.values[2] = fe;
            } else {
                s.points[2] = reflected;
                s.values[2] = fr;
            }
        } else if fr < s.values[1] {
            s.points[2] = reflected;
            s.values[2] = fr;
        } else {
            let (target, ft) = if fr < s.values[2] { (reflected, fr) } else { (worst, s.values[2]) };
            let contracted = lerp(centroid, target, 0.5);
            let fc = f(contracted);
            if fc < ft {
                s.points[2] = contracted;
                s.values[2] = fc;
            } else {
                for i in 1..3 {
                    s.points[i] = lerp(s.points[0], s.points[i], 0.5);
                    s.values[i] = f(s.points[i]);
                }
            }
        }
        s.sort();
    }
    (s.points[0], s.values[0], opts.max_iterations, false)
}

/// Best grid cell; ties go to the lexicographically lowest (θ, φ).
fn grid_minimum(rho: &Mat4, opts: &DiscordOptions) -> (f64, f64, f64) {
    let (nt, np) = (opts.theta_points, opts.phi_points);
    let rows: Vec<(f64, usize, usize)> = (0..nt)
        .into_par_iter()
        .map(|k| {
            let theta = PI * k as f64 / nt as f64;
            (0..np)
                .map(|l| {
                    let phi = 2.0 * PI * l as f64 / np as f64;
                    (measured_conditional_entropy(rho, &MeasurementBasis::new(theta, phi)), k, l)
                })
                .fold((f64::INFINITY, 0, 0), |best, cur| if cur.0 < best.0 { cur } else { best })
        })
        .collect();
    let (value, k, l) = rows
        .into_iter()
        .fold((f64::INFINITY, 0, 0), |best, cur| if cur.0 < best.0 { cur } else { best });
    (value, PI * k as f64 / nt as f64, 2.0 * PI * l as f64 / np as f64)
}

/// Quantum discord with projective measurements on the right qubit.
pub fn discord_with(rho: &Mat4, opts: &DiscordOptions) -> Result<DiscordResult> {
    if opts.theta_points == 0 || opts.phi_points == 0 {
        return Err(Error::InvalidParameter("discord grid must be non-empty".into()));
    }
    let s_ab = entropy(rho)?;
    let s_a = qubit_entropy(&partial_trace_b(rho));
    let s_b = qubit_entropy(&partial_trace_a(rho));
    let mutual = s_a + s_b - s_ab;

    let (grid_value, theta0, phi0) = grid_minimum(rho, opts);
    let step = [PI / opts.theta_points as f64, 2.0 * PI / opts.phi_points as f64];
    let objective = |x: [f64; 2]| measured_conditional_entropy(rho, &MeasurementBasis::new(x[0], x[1]));
    let (x, refined, iterations, converged) = nelder_mead(objective, [theta0, phi0], step, opts);

    let (cond, basis) = if refined <= grid_value {
        (refined, MeasurementBasis::new(x[0], x[1]))
    } else {
        (grid_value, MeasurementBasis::new(theta0, phi0))
    };
    let classical = (s_a - cond).max(0.0);
    let discord = (mutual - classical).max(0.0);
    Ok(DiscordResult {
        discord,
        classical_correlation: classical,
        mutual_information: mutual,
        optimal_basis: basis,
        optimizer_report: OptimizerReport {
            grid: (opts.theta_points, opts.phi_points),
            iterations,
            converged,
        },
    })
}

pub fn discord(rho: &Mat4) -> Result<DiscordResult> {
    discord_with(rho, &DiscordOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlators::correlator_set;
    use crate::rdm::build_rdm;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector4;
    use rand::{Rng, SeedableRng};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn pure(v: [f64; 4]) -> Mat4 {
        let v = Vector4::from_iterator(v.iter().map(|&x| c(x))).normalize();
        &v * v.adjoint()
    }

    fn bell() -> Mat4 {
        pure([1.0, 0.0, 0.0, 1.0])
    }

    fn product() -> Mat4 {
        // |0⟩ ⊗ (|0⟩ + 2|1⟩)/√5 mixed with nothing: pure product
        pure([1.0, 2.0, 0.0, 0.0])
    }

    fn classical_mixture() -> Mat4 {
        (pure([1.0, 0.0, 0.0, 0.0]) + pure([0.0, 0.0, 0.0, 1.0])) * c(0.5)
    }

    fn separable_discordant() -> Mat4 {
        (pure([1.0, 0.0, 0.0, 0.0]) + pure([1.0, 1.0, 1.0, 1.0])) * c(0.5)
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&(Mat4::identity() * c(0.25))).unwrap(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(entropy(&bell()).unwrap(), 0.0, epsilon = 1e-12);
        let mut m = Mat4::zeros();
        m[(0, 0)] = c(0.5);
        m[(1, 1)] = c(0.5);
        assert_abs_diff_eq!(entropy(&m).unwrap(), 1.0, epsilon = 1e-14);
        let mut bad = Mat4::identity() * c(0.25);
        bad[(0, 0)] = c(-0.1);
        assert!(entropy(&bad).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        assert_abs_diff_eq!(mutual_information(&product()).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mutual_information(&bell()).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mutual_information(&classical_mixture()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn concurrence_examples() {
        assert_abs_diff_eq!(concurrence(&bell()), 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(concurrence(&(Mat4::identity() * c(0.25))), 0.0, epsilon = 1e-12);
        let rho = build_rdm(&correlator_set(0.0, 2, 1e-10).unwrap()).unwrap();
        assert_abs_diff_eq!(concurrence(&rho.entries), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn concurrence_matches_x_state_closed_form() {
        for &b in &[0.5, 0.98, 1.0, 1.2, 2.0] {
            for r in [2, 4] {
                let rho = build_rdm(&correlator_set(b, r, 1e-10).unwrap()).unwrap().entries;
                let closed = 2.0
                    * (rho[(0, 3)].norm() - (rho[(1, 1)].re * rho[(2, 2)].re).sqrt())
                        .max(rho[(1, 2)].norm() - (rho[(0, 0)].re * rho[(3, 3)].re).sqrt())
                        .max(0.0);
                assert_abs_diff_eq!(concurrence(&rho), closed, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn eof_examples() {
        assert_abs_diff_eq!(eof_from_concurrence(1.0), 1.0, epsilon = 1e-15);
        assert_eq!(eof_from_concurrence(0.0), 0.0);
        // f = 0.9: -(0.9 log2 0.9 + 0.1 log2 0.1)
        assert_abs_diff_eq!(eof_from_concurrence(0.6), 0.468_995_593_589_281_2, epsilon = 1e-12);
    }

    #[test]
    fn measured_conditional_entropy_examples() {
        let z = MeasurementBasis::new(0.0, 0.0);
        let x = MeasurementBasis::new(0.5 * PI, 0.0);
        let mix = classical_mixture();
        assert_abs_diff_eq!(measured_conditional_entropy(&mix, &z), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(measured_conditional_entropy(&mix, &x), 1.0, epsilon = 1e-12);
        for basis in [z, x, MeasurementBasis::new(1.1, 4.0)] {
            assert_abs_diff_eq!(measured_conditional_entropy(&bell(), &basis), 0.0, epsilon = 1e-7);
            // A is pure in the product state; measuring B cannot change it
            assert_abs_diff_eq!(measured_conditional_entropy(&product(), &basis), 0.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn basis_projectors_are_complete() {
        for &(t, p) in &[(0.0, 0.0), (1.0, 2.0), (PI, 5.0), (4.0, -1.0)] {
            let basis = MeasurementBasis::new(t, p);
            assert!((0.0..=PI).contains(&basis.theta));
            assert!((0.0..2.0 * PI).contains(&basis.phi));
            let [p0, p1] = basis.projectors();
            assert!((p0 + p1 - Mat2::identity()).norm() < 1e-12);
            assert!((p0 * p1).norm() < 1e-12);
            assert!((p0 * p0 - p0).norm() < 1e-12);
        }
    }

    #[test]
    fn discord_examples() {
        let d = discord(&product()).unwrap();
        assert_abs_diff_eq!(d.discord, 0.0, epsilon = 1e-8);
        let d = discord(&bell()).unwrap();
        assert_abs_diff_eq!(d.discord, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(d.mutual_information, 2.0, epsilon = 1e-10);
        let rho = build_rdm(&correlator_set(0.0, 2, 1e-10).unwrap()).unwrap();
        assert_abs_diff_eq!(discord(&rho.entries).unwrap().discord, 0.0, epsilon = 1e-8);
    }

    /// Dense 1024×512 grid, independent of the grid + simplex optimiser.
    fn brute_force_conditional_entropy(rho: &Mat4) -> f64 {
        let mut best = f64::INFINITY;
        for k in 0..1024 {
            for l in 0..512 {
                let basis = MeasurementBasis::new(PI * k as f64 / 1024.0, 2.0 * PI * l as f64 / 512.0);
                best = best.min(measured_conditional_entropy(rho, &basis));
            }
        }
        best
    }

    #[test]
    fn separable_state_has_positive_discord() {
        let rho = separable_discordant();
        assert_abs_diff_eq!(concurrence(&rho), 0.0, epsilon = 1e-12);
        let d = discord(&rho).unwrap();
        assert!(d.optimizer_report.converged);
        // frozen from the dense-grid oracle below (θ = 3π/4 lies on that grid)
        assert_abs_diff_eq!(d.discord, 0.144_176_814_899, epsilon = 1e-9);
        let s_a = qubit_entropy(&partial_trace_b(&rho));
        let s_b = qubit_entropy(&partial_trace_a(&rho));
        let s_ab = entropy(&rho).unwrap();
        let oracle = s_b - s_ab + brute_force_conditional_entropy(&rho);
        assert_abs_diff_eq!(d.discord, oracle, epsilon = 1e-9);
        assert!(s_a > 0.0);
    }

    #[test]
    fn discord_identity_and_bounds_over_pipeline() {
        for &b in &[0.2, 0.7, 0.98, 1.0, 1.3, 3.0] {
            for r in [2, 4, 8] {
                let rho = build_rdm(&correlator_set(b, r, 1e-10).unwrap()).unwrap().entries;
                let d = discord(&rho).unwrap();
                assert!(d.discord >= 0.0);
                assert!(d.discord <= d.mutual_information + 1e-9);
                assert_abs_diff_eq!(
                    d.discord,
                    d.mutual_information - d.classical_correlation,
                    epsilon = 1e-12
                );
                let s_a = qubit_entropy(&partial_trace_b(&rho));
                let s_b = qubit_entropy(&partial_trace_a(&rho));
                assert!(d.classical_correlation <= s_a.min(s_b) + 1e-9);
            }
        }
    }

    #[test]
    fn finer_grid_does_not_find_lower_discord() {
        let fine = DiscordOptions {
            theta_points: 128,
            phi_points: 64,
            ..DiscordOptions::default()
        };
        let mut states = vec![separable_discordant(), bell(), classical_mixture()];
        for &b in &[0.5, 1.0, 2.0] {
            states.push(build_rdm(&correlator_set(b, 2, 1e-10).unwrap()).unwrap().entries);
        }
        for rho in &states {
            let coarse = discord(rho).unwrap().discord;
            let finer = discord_with(rho, &fine).unwrap().discord;
            assert!(coarse - finer < 1e-6, "{coarse} vs {finer}");
        }
    }

    fn random_unitary(rng: &mut impl Rng) -> Mat2 {
        let (a, b, g, d): (f64, f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen(), rng.gen());
        let (a, b, g, d) = (a * 2.0 * PI, b * PI, g * 2.0 * PI, d * 2.0 * PI);
        let e = |x: f64| Complex64::new(0.0, x).exp();
        let (s, co) = (0.5 * b).sin_cos();
        Mat2::new(e(a) * co, -e(g) * s, e(d) * s, e(g + d - a) * co)
    }

    fn kron(u: &Mat2, v: &Mat2) -> Mat4 {
        Mat4::from_fn(|i, j| u[(i / 2, j / 2)] * v[(i % 2, j % 2)])
    }

    #[test]
    fn local_unitary_invariance() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let states = [
            separable_discordant(),
            build_rdm(&correlator_set(1.1, 2, 1e-10).unwrap()).unwrap().entries,
        ];
        for rho in &states {
            let base_d = discord(rho).unwrap().discord;
            let base_c = concurrence(rho);
            for _ in 0..4 {
                let u = kron(&random_unitary(&mut rng), &random_unitary(&mut rng));
                assert!((u * u.adjoint() - Mat4::identity()).norm() < 1e-12);
                let rotated = u * rho * u.adjoint();
                assert_abs_diff_eq!(discord(&rotated).unwrap().discord, base_d, epsilon = 1e-8);
                assert_abs_diff_eq!(concurrence(&rotated), base_c, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn eof_vanishes_beyond_next_nearest() {
        for i in 0..=8 {
            let b = 0.25 * i as f64;
            for r in [4, 6, 8, 10] {
                let rho = build_rdm(&correlator_set(b, r, 1e-10).unwrap()).unwrap();
                assert!(eof(&rho.entries) < 1e-10, "B = {b}, R = {r}");
            }
        }
    }
}
