//! The fermionic contraction G_r = ⟨A_0 B_r⟩ of the periodic chain.
//!
//! In the thermodynamic limit
//!
//! G_r = -(1/4π) ∫_{-2π}^{2π} e^{irx/2} (B - e^{-ix}) / (1 + B² - 2B cos x)^{1/2} dx,
//!
//! and for a finite periodic chain G_r = -(1/N) Σ_p e^{i k_p r} e^{2iθ_{k_p}}
//! with k_p = 2πp/N. Every spin correlator is a determinant of G values.
//! The integrand is conjugate-symmetric under x → -x, so G is real.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{bogoliubov_phase, dispersion, periodic_momenta, Complex64};
use crate::quadrature;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Value of one contraction together with its accuracy diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GEstimate {
    pub value: f64,
    pub error: f64,
    pub imaginary_residual: f64,
}

fn integrand(field: f64, r: i64) -> impl Fn(f64) -> Complex64 {
    move |x: f64| {
        let eps = dispersion(field, 0.5 * x);
        if eps == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let s = (0.5 * x).sin();
        // B - e^{-ix} = (B - 1 + 2 sin²(x/2)) + i sin x
        let num = Complex64::new(field - 1.0 + 2.0 * s * s, x.sin());
        let phase = Complex64::new(0.0, 0.5 * r as f64 * x).exp();
        phase * num / eps
    }
}

pub fn g_integral_estimate(field: f64, r: i64, tol: f64) -> Result<GEstimate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let scale = 4.0 * PI;
    let breaks = [-2.0 * PI, -PI, 0.0, PI, 2.0 * PI];
    let f = integrand(field, r);
    let (raw, err) = quadrature::integrate(&f, &breaks, tol * scale, quadrature::DEFAULT_MAX_INTERVALS)
        .map_err(|e| match e {
            Error::QuadratureNonConvergence { estimate, .. } => Error::QuadratureNonConvergence {
                estimate: estimate / scale,
                tol,
            },
            other => other,
        })?;
    let value = -raw / scale;
    if value.im.abs() >= tol {
        return Err(Error::ImaginaryResidual {
            residual: value.im.abs(),
            tol,
        });
    }
    Ok(GEstimate {
        value: value.re,
        error: err / scale,
        imaginary_residual: value.im.abs(),
    })
}

/// G_r in the thermodynamic limit, to absolute accuracy `tol`.
pub fn g_integral(field: f64, r: i64, tol: f64) -> Result<f64> {
    g_integral_estimate(field, r, tol).map(|g| g.value)
}

/// G_r on a periodic chain of `sites` sites.
pub fn g_finite_sum(field: f64, r: i64, sites: usize) -> Result<f64> {
    if sites < 8 || sites % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "finite sum needs an even site count of at least 8, got {sites}"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for k in periodic_momenta(sites) {
        let phase = bogoliubov_phase(field, k)?;
        acc += Complex64::new(0.0, k * r as f64).exp() * phase;
    }
    Ok(-acc.re / sites as f64)
}

/// G_r over the window r ∈ [-r_max, r_max].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GVector {
    pub field: f64,
    pub r_max: i64,
    values: Vec<f64>,
    /// Largest per-entry absolute error estimate.
    pub est_error: f64,
}

impl GVector {
    /// Builds a window from explicit values ordered from r = -r_max to r_max.
    pub fn from_values(field: f64, values: Vec<f64>, est_error: f64) -> Result<Self> {
        if values.len() % 2 != 1 {
            return Err(Error::InvalidParameter(
                "a symmetric window needs an odd number of entries".into(),
            ));
        }
        let r_max = (values.len() / 2) as i64;
        Ok(Self {
            field,
            r_max,
            values,
            est_error,
        })
    }

    pub fn get(&self, r: i64) -> Result<f64> {
        if r.abs() > self.r_max {
            return Err(Error::WindowTooSmall {
                needed: r,
                available: self.r_max,
            });
        }
        Ok(self.values[(r + self.r_max) as usize])
    }

    /// (r, G_r) pairs in increasing r.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (i as i64 - self.r_max, v))
    }

    /// The window with G_r replaced by G_{-r}.
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            values,
            ..self.clone()
        }
    }

    /// The window with every entry negated.
    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }
}

type CacheKey = (u64, i64, u64);

/// Memo of G_r keyed by (B, r, tol). Safe to share between threads.
#[derive(Debug, Default)]
pub struct GCache {
    entries: Mutex<HashMap<CacheKey, GEstimate>>,
}

impl GCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn global() -> &'static GCache {
        static CACHE: OnceLock<GCache> = OnceLock::new();
        CACHE.get_or_init(GCache::new)
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn estimate(&self, field: f64, r: i64, tol: f64) -> Result<GEstimate> {
        // -0.0 and 0.0 must share an entry
        let key = ((field + 0.0).to_bits(), r, tol.to_bits());
        if let Some(g) = self.entries.lock().expect("cache poisoned").get(&key) {
            return Ok(*g);
        }
        let g = g_integral_estimate(field, r, tol)?;
        self.entries.lock().expect("cache poisoned").insert(key, g);
        Ok(g)
    }

    pub fn vector(&self, field: f64, r_max: i64, tol: f64) -> Result<GVector> {
        if r_max < 1 {
            return Err(Error::InvalidParameter(format!("window half-width must be >= 1, got {r_max}")));
        }
        let mut values = Vec::with_capacity((2 * r_max + 1) as usize);
        let mut est_error: f64 = 0.0;
        for r in -r_max..=r_max {
            let g = self.estimate(field, r, tol)?;
            // |⟨A_0 B_r⟩| ≤ 1; only rounding can push past it
            values.push(g.value.clamp(-1.0, 1.0));
            est_error = est_error.max(g.error);
        }
        Ok(GVector {
            field,
            r_max,
            values,
            est_error,
        })
    }
}

/// G over [-r_max, r_max] through the process-wide cache.
pub fn g_vector(field: f64, r_max: i64, tol: f64) -> Result<GVector> {
    GCache::global().vector(field, r_max, tol)
}
