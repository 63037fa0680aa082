//! Decay fits, the entanglement birth point and (B, R) sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlators::{correlator_set, CorrelatorSet};
use crate::error::{Error, Result};
use crate::gfunction::{g_vector, GVector};
use crate::qinfo::{concurrence, discord, eof_from_concurrence, mutual_information};
use crate::rdm::build_rdm;

/// Values with magnitude below this are treated as numerical noise.
pub const DEFAULT_FLOOR: f64 = 1e-12;
pub const MIN_FIT_POINTS: usize = 4;
/// Concurrence above this counts as entangled.
pub const BIRTH_THRESHOLD: f64 = 1e-10;
pub const BIRTH_RESOLUTION: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    Exponential,
    PowerLaw,
}

impl fmt::Display for FitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitKind::Exponential => "exponential",
            FitKind::PowerLaw => "power_law",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: FitKind,
    /// Decay length in sites, or the power-law exponent.
    pub parameter: f64,
    pub r_squared: f64,
    /// Smallest and largest R that survived the floor.
    pub window: (f64, f64),
    pub floor: f64,
    /// Number of points used.
    pub points: usize,
}

/// Least-squares line; returns (slope, intercept, r²).
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2.clamp(0.0, 1.0))
}

fn fit(points: &[(f64, f64)], floor: f64, kind: FitKind) -> Result<FitResult> {
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|(r, v)| v.is_finite() && v.abs() > floor && (kind == FitKind::Exponential || *r > 0.0))
        .map(|&(r, v)| (r, v.abs()))
        .collect();
    if kept.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            found: kept.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let xs: Vec<f64> = kept
        .iter()
        .map(|&(r, _)| if kind == FitKind::PowerLaw { r.ln() } else { r })
        .collect();
    let ys: Vec<f64> = kept.iter().map(|&(_, v)| v.ln()).collect();
    let (slope, _, r_squared) = linear_fit(&xs, &ys);
    if !(slope < 0.0) {
        return Err(Error::NonDecaying { slope });
    }
    let parameter = match kind {
        FitKind::Exponential => -1.0 / slope,
        FitKind::PowerLaw => -slope,
    };
    let (lo, hi) = kept
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(r, _)| (lo.min(r), hi.max(r)));
    Ok(FitResult {
        kind,
        parameter,
        r_squared,
        window: (lo, hi),
        floor,
        points: kept.len(),
    })
}

/// ln|v| = -R/ξ + c; returns ξ.
pub fn exp_decay_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    exp_decay_fit_with(points, DEFAULT_FLOOR)
}

pub fn exp_decay_fit_with(points: &[(f64, f64)], floor: f64) -> Result<FitResult> {
    fit(points, floor, FitKind::Exponential)
}

/// ln|v| = -ξ ln R + c; returns ξ.
pub fn power_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    power_fit_with(points, DEFAULT_FLOOR)
}

pub fn power_fit_with(points: &[(f64, f64)], floor: f64) -> Result<FitResult> {
    fit(points, floor, FitKind::PowerLaw)
}

/// Concurrence of the thermodynamic-limit pair state at separation `r`.
pub fn pair_concurrence(field: f64, r: i64, tol: f64) -> Result<f64> {
    Ok(concurrence(&build_rdm(&correlator_set(field, r, tol)?)?.entries))
}

/// Field at which the concurrence at separation `r` first exceeds
/// [`BIRTH_THRESHOLD`], by bisection inside `bracket` to [`BIRTH_RESOLUTION`].
pub fn entanglement_birth(r: i64, bracket: (f64, f64), tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    let entangled = |b: f64| pair_concurrence(b, r, tol).map(|c| c > BIRTH_THRESHOLD);
    if !(lo < hi) || entangled(lo)? || !entangled(hi)? {
        return Err(Error::BracketInvalid { lo, hi });
    }
    while hi - lo > BIRTH_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if entangled(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A column of the sweep table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Z,
    Xx,
    Yy,
    Zz,
    /// |zz - z²|
    ConnectedZz,
    Mi,
    Discord,
    Concurrence,
    Eof,
}

impl Measure {
    pub const ALL: [Measure; 9] = [
        Measure::Z,
        Measure::Xx,
        Measure::Yy,
        Measure::Zz,
        Measure::ConnectedZz,
        Measure::Mi,
        Measure::Discord,
        Measure::Concurrence,
        Measure::Eof,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Measure::Z => "z",
            Measure::Xx => "xx",
            Measure::Yy => "yy",
            Measure::Zz => "zz",
            Measure::ConnectedZz => "zz_connected",
            Measure::Mi => "mi",
            Measure::Discord => "discord",
            Measure::Concurrence => "concurrence",
            Measure::Eof => "eof",
        }
    }

    /// Value of this measure in a sweep row, if present.
    pub fn of(&self, row: &SweepRow) -> Option<f64> {
        match self {
            Measure::Z => row.z,
            Measure::Xx => row.xx,
            Measure::Yy => row.yy,
            Measure::Zz => row.zz,
            Measure::ConnectedZz => Some((row.zz? - row.z? * row.z?).abs()),
            Measure::Mi => row.mi,
            Measure::Discord => row.discord,
            Measure::Concurrence => row.concurrence,
            Measure::Eof => row.eof,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown measure '{s}'")))
    }
}

/// Which of the costlier state measures a sweep evaluates. Correlators are always filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureSet {
    pub mi: bool,
    pub discord: bool,
    pub concurrence: bool,
    pub eof: bool,
}

impl MeasureSet {
    pub fn all() -> Self {
        Self {
            mi: true,
            discord: true,
            concurrence: true,
            eof: true,
        }
    }

    pub fn none() -> Self {
        Self {
            mi: false,
            discord: false,
            concurrence: false,
            eof: false,
        }
    }

    pub fn with(mut self, m: Measure) -> Self {
        match m {
            Measure::Mi => self.mi = true,
            Measure::Discord => self.discord = true,
            Measure::Concurrence => self.concurrence = true,
            Measure::Eof => self.eof = true,
            _ => {}
        }
        self
    }
}

impl Default for MeasureSet {
    fn default() -> Self {
        Self::all()
    }
}

pub const FLAG_ODD_R: &str = "odd_r";

/// One (B, R) cell. `None` marks a measure that was not requested or could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "B")]
    pub field: f64,
    #[serde(rename = "R")]
    pub separation: i64,
    pub z: Option<f64>,
    pub xx: Option<f64>,
    pub yy: Option<f64>,
    pub zz: Option<f64>,
    pub mi: Option<f64>,
    pub discord: Option<f64>,
    pub concurrence: Option<f64>,
    pub eof: Option<f64>,
    pub flags: Vec<String>,
}

impl SweepRow {
    fn empty(field: f64, separation: i64) -> Self {
        Self {
            field,
            separation,
            z: None,
            xx: None,
            yy: None,
            zz: None,
            mi: None,
            discord: None,
            concurrence: None,
            eof: None,
            flags: Vec::new(),
        }
    }

    pub fn failed(&self) -> bool {
        self.flags.iter().any(|f| f.starts_with("error"))
    }

    fn fail(mut self, err: &Error) -> Self {
        self.flags.push(format!("error: {err}"));
        self
    }
}

fn fill_measures(row: &mut SweepRow, corr: &CorrelatorSet, measures: MeasureSet) -> Result<()> {
    let rho = build_rdm(corr)?;
    if measures.discord {
        let d = discord(&rho.entries)?;
        row.discord = Some(d.discord);
        if measures.mi {
            row.mi = Some(d.mutual_information);
        }
    } else if measures.mi {
        row.mi = Some(mutual_information(&rho.entries)?);
    }
    if measures.concurrence || measures.eof {
        let c = concurrence(&rho.entries);
        if measures.concurrence {
            row.concurrence = Some(c);
        }
        if measures.eof {
            row.eof = Some(eof_from_concurrence(c));
        }
    }
    Ok(())
}

/// Fills one cell from a window of G values covering at least |R|.
///
/// Odd separations are exact product states: xx = yy = 0, zz = z² and every
/// correlation measure vanishes. They carry the `odd_r` flag.
pub fn sweep_cell(g: &GVector, separation: i64, measures: MeasureSet) -> SweepRow {
    let mut row = SweepRow::empty(g.field, separation);
    if separation < 1 {
        return row.fail(&Error::InvalidParameter(format!(
            "separation must be positive, got {separation}"
        )));
    }
    if separation % 2 != 0 {
        let z = match crate::correlators::magnetization(g) {
            Ok(z) => z,
            Err(e) => return row.fail(&e),
        };
        row.z = Some(z);
        row.xx = Some(0.0);
        row.yy = Some(0.0);
        row.zz = Some(z * z);
        let zero = Some(0.0);
        row.mi = if measures.mi { zero } else { None };
        row.discord = if measures.discord { zero } else { None };
        row.concurrence = if measures.concurrence { zero } else { None };
        row.eof = if measures.eof { zero } else { None };
        row.flags.push(FLAG_ODD_R.to_string());
        return row;
    }
    let corr = match CorrelatorSet::from_gvector(g, separation) {
        Ok(c) => c,
        Err(e) => return row.fail(&e),
    };
    row.z = Some(corr.z);
    row.xx = Some(corr.xx);
    row.yy = Some(corr.yy);
    row.zz = Some(corr.zz);
    match fill_measures(&mut row, &corr, measures) {
        Ok(()) => row,
        Err(e) => row.fail(&e),
    }
}

/// Dense table over `fields × separations`, ordered by B then R as given.
/// Cells run in parallel on the current rayon pool; failures stay in-row.
pub fn sweep(fields: &[f64], separations: &[i64], measures: MeasureSet, tol: f64) -> Vec<SweepRow> {
    let r_max = separations.iter().map(|r| r.abs()).max().unwrap_or(1).max(1);
    let windows: Vec<Result<GVector>> = fields.par_iter().map(|&b| g_vector(b, r_max, tol)).collect();
    let cells: Vec<(usize, i64)> = (0..fields.len())
        .flat_map(|i| separations.iter().map(move |&r| (i, r)))
        .collect();
    cells
        .par_iter()
        .map(|&(i, r)| match &windows[i] {
            Ok(g) => sweep_cell(g, r, measures),
            Err(e) => SweepRow::empty(fields[i], r).fail(e),
        })
        .collect()
}

/// (R, value) pairs of one measure at one field, skipping missing cells.
pub fn series(rows: &[SweepRow], field: f64, measure: Measure) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|row| row.field == field && !row.flags.iter().any(|f| f == FLAG_ODD_R))
        .filter_map(|row| measure.of(row).map(|v| (row.separation as f64, v)))
        .collect()
}

/// Sweeps one field over `separations` and fits `measure`.
pub fn fit_measure(field: f64, separations: &[i64], measure: Measure, kind: FitKind, tol: f64) -> Result<FitResult> {
    let measures = MeasureSet::none().with(measure);
    let rows = sweep(&[field], separations, measures, tol);
    if let Some(row) = rows.iter().find(|r| r.failed()) {
        return Err(Error::InvalidParameter(format!(
            "cell B = {}, R = {} failed: {}",
            row.field,
            row.separation,
            row.flags.join("; ")
        )));
    }
    let points = series(&rows, field, measure);
    match kind {
        FitKind::Exponential => exp_decay_fit(&points),
        FitKind::PowerLaw => power_fit(&points),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const TOL: f64 = 1e-10;

    fn even(lo: i64, hi: i64) -> Vec<i64> {
        (lo..=hi).step_by(2).collect()
    }

    #[test]
    fn synthetic_exponential() {
        let pts: Vec<(f64, f64)> = (1..=20).map(|r| (r as f64, (-(r as f64) / 3.0).exp())).collect();
        let f = exp_decay_fit(&pts).unwrap();
        assert_eq!(f.kind, FitKind::Exponential);
        assert_abs_diff_eq!(f.parameter, 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(f.r_squared, 1.0, epsilon = 1e-12);
        assert_eq!(f.window, (1.0, 20.0));
    }

    #[test]
    fn noisy_exponential() {
        let pts: Vec<(f64, f64)> = (1..=20)
            .map(|r| {
                let noise = if r % 2 == 0 { 1e-6 } else { -1e-6 };
                (r as f64, (-(r as f64) / 3.0).exp() * (1.0 + noise))
            })
            .collect();
        assert_abs_diff_eq!(exp_decay_fit(&pts).unwrap().parameter, 3.0, epsilon = 1e-3);
    }

    #[test]
    fn synthetic_power_law() {
        let pts: Vec<(f64, f64)> = (2..=40).map(|r| (r as f64, (r as f64).powi(-2))).collect();
        let f = power_fit(&pts).unwrap();
        assert_abs_diff_eq!(f.parameter, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn fit_preconditions() {
        let pts = [(1.0, 1.0), (2.0, 0.5), (3.0, 1e-20), (4.0, 0.0), (5.0, 0.1)];
        assert!(matches!(
            exp_decay_fit(&pts),
            Err(Error::InsufficientPoints { found: 3, .. })
        ));
        let growing: Vec<(f64, f64)> = (1..=6).map(|r| (r as f64, r as f64)).collect();
        assert!(matches!(exp_decay_fit(&growing), Err(Error::NonDecaying { .. })));
        assert!(matches!(power_fit(&growing), Err(Error::NonDecaying { .. })));
    }

    #[test]
    fn floor_filters_noise() {
        let mut pts: Vec<(f64, f64)> = (1..=10).map(|r| (r as f64, (-(r as f64)).exp())).collect();
        pts.push((50.0, 3e-13));
        let f = exp_decay_fit(&pts).unwrap();
        assert_eq!(f.points, 10);
        assert_abs_diff_eq!(f.parameter, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn birth_point_at_next_nearest_neighbours() {
        let b = entanglement_birth(2, (0.5, 1.0), TOL).unwrap();
        assert_abs_diff_eq!(b, 0.9767, epsilon = 0.01);
        assert!(matches!(
            entanglement_birth(4, (0.0, 2.0), TOL),
            Err(Error::BracketInvalid { .. })
        ));
        assert!(entanglement_birth(2, (0.99, 0.5), TOL).is_err());
    }

    #[test]
    fn concurrence_is_monotone_past_birth() {
        let b_e = entanglement_birth(2, (0.5, 1.0), TOL).unwrap();
        let mut last = 0.0;
        for i in 0..=40 {
            let b = b_e + (0.999 - b_e) * i as f64 / 40.0;
            let c = pair_concurrence(b, 2, TOL).unwrap();
            assert!(c >= last - 1e-12, "B = {b}: {c} < {last}");
            last = c;
        }
    }

    #[test]
    fn cluster_point_sweep_is_zero() {
        let rows = sweep(&[0.0], &[1, 2, 3, 4, 6], MeasureSet::all(), TOL);
        assert_eq!(rows.len(), 5);
        for row in &rows {
            for m in Measure::ALL {
                assert_abs_diff_eq!(m.of(row).unwrap(), 0.0, epsilon = 1e-8);
            }
        }
        assert_eq!(rows[0].flags, vec![FLAG_ODD_R.to_string()]);
        assert!(rows[1].flags.is_empty());
    }

    #[test]
    fn sweep_shape_and_determinism() {
        let bs = [0.3, 1.0, 1.7];
        let rs = [2, 3, 4, 8];
        let a = sweep(&bs, &rs, MeasureSet::all(), TOL);
        assert_eq!(a.len(), bs.len() * rs.len());
        for (k, row) in a.iter().enumerate() {
            assert_eq!(row.field, bs[k / rs.len()]);
            assert_eq!(row.separation, rs[k % rs.len()]);
            assert!(!row.failed());
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| sweep(&bs, &rs, MeasureSet::all(), TOL));
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_records_errors_in_row() {
        let rows = sweep(&[0.5], &[0, 2], MeasureSet::none(), TOL);
        assert!(rows[0].failed());
        assert!(!rows[1].failed());
        assert_eq!(rows[1].discord, None);
        assert!(rows[1].xx.is_some());
    }

    #[test]
    fn odd_rows_are_product_states() {
        let row = &sweep(&[1.4], &[5], MeasureSet::all(), TOL)[0];
        let z = row.z.unwrap();
        assert_eq!(row.zz, Some(z * z));
        assert_eq!(Measure::ConnectedZz.of(row), Some(0.0));
        assert_eq!(row.discord, Some(0.0));
    }

    #[test]
    fn measure_names_round_trip() {
        for m in Measure::ALL {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
        }
        assert!("entropy".parse::<Measure>().is_err());
    }

    #[test]
    fn off_critical_mi_decays_exponentially() {
        let f = fit_measure(0.5, &even(2, 40), Measure::Mi, FitKind::Exponential, TOL).unwrap();
        assert!(f.parameter.is_finite() && f.parameter > 0.0);
        assert!(f.r_squared > 0.995, "{f:?}");
    }

    #[test]
    fn critical_window_stability() {
        let wide = fit_measure(1.0, &even(4, 80), Measure::Mi, FitKind::PowerLaw, TOL).unwrap();
        let half = fit_measure(1.0, &even(4, 40), Measure::Mi, FitKind::PowerLaw, TOL).unwrap();
        assert!((wide.parameter - half.parameter).abs() < 0.05, "{wide:?} {half:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn recovers_decay_length(xi in 0.5f64..20.0, amp in 1e-3f64..1e3) {
            let pts: Vec<(f64, f64)> = (2..=30).step_by(2).map(|r| (r as f64, amp * (-(r as f64) / xi).exp())).collect();
            let pts: Vec<(f64, f64)> = pts.into_iter().filter(|p| p.1 > 1e-11).collect();
            prop_assume!(pts.len() >= MIN_FIT_POINTS);
            let f = exp_decay_fit(&pts).unwrap();
            prop_assert!((f.parameter - xi).abs() < 1e-8 * xi.max(1.0));
        }

        #[test]
        fn recovers_exponent(p in 0.2f64..4.0, amp in 1e-2f64..1e2) {
            let pts: Vec<(f64, f64)> = (2..=40).map(|r| (r as f64, amp * (r as f64).powf(-p))).collect();
            let f = power_fit(&pts).unwrap();
            prop_assert!((f.parameter - p).abs() < 1e-9);
            prop_assert!(f.r_squared <= 1.0 && f.r_squared > 0.999_999);
        }
    }
}
