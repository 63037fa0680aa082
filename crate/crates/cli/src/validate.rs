//! Exact-diagonalization cross-checks for one (N, B).

use clap::Args;

use clusterq_core::correlators::{correlator_set, CorrelatorSet};
use clusterq_core::ed::{self, EdOptions};
use clusterq_core::model::{bdg_solve, ground_energy_density, ModelParams};
use clusterq_core::rdm::build_rdm;

use crate::commands::ed_options;
use crate::config::{parse_bool, parse_value};
use crate::output::{Cell, Table};
use crate::{CliError, Context};

const EXACT_TOL: f64 = 1e-8;
const STABILIZER_TOL: f64 = 1e-12;
const THERMODYNAMIC_TOL: f64 = 2e-2;
const ENERGY_DENSITY_TOL: f64 = 1e-2;

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Number of sites [default: 8]
    #[arg(long)]
    n: Option<usize>,
    /// Field [default: 0]
    #[arg(long)]
    b: Option<f64>,
    /// Allow 13 or 14 sites
    #[arg(long)]
    allow_large: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The check makes no claim at this (N, B).
    Skip,
}

impl Status {
    fn name(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub residual: Option<f64>,
    pub detail: String,
}

fn check(name: &'static str, ok: bool, residual: Option<f64>, detail: String) -> Check {
    Check {
        name,
        status: if ok { Status::Pass } else { Status::Fail },
        residual,
        detail,
    }
}

fn skip(name: &'static str, detail: &str) -> Check {
    Check {
        name,
        status: Status::Skip,
        residual: None,
        detail: detail.into(),
    }
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn set_residual(a: &CorrelatorSet, b: &CorrelatorSet) -> f64 {
    max_abs([a.z - b.z, a.zz - b.zz, a.xx - b.xx, a.yy - b.yy])
}

/// Correlation length is short enough for a chain of up to 14 sites to look infinite.
fn short_ranged(b: f64) -> bool {
    b == 0.0 || b.abs() >= 2.0
}

pub fn checks(n: usize, b: f64, opts: &EdOptions, tol: f64) -> Result<Vec<Check>, CliError> {
    let open = ModelParams::open(b, n)?;
    let periodic = ModelParams::periodic(b, n)?;
    let ed_open = ed::solve_with(&open, opts)?;
    let ed_periodic = ed::solve_with(&periodic, opts)?;
    let mut out = Vec::new();

    let herm = ed_open
        .hamiltonian
        .hermiticity_residual()
        .max(ed_periodic.hamiltonian.hermiticity_residual());
    out.push(check("hermiticity", herm <= 1e-12, Some(herm), "open and periodic".into()));
    let z2 = ed_open
        .hamiltonian
        .z2_commutator_residual()
        .max(ed_periodic.hamiltonian.z2_commutator_residual());
    out.push(check("z2_symmetry", z2 <= 1e-12, Some(z2), "[H, prod sigma_z]".into()));

    let g_open = ed_open.ground.degeneracy();
    let g_periodic = ed_periodic.ground.degeneracy();
    let bdg = bdg_solve(&open)?;
    let zero = bdg.majorana_zero_modes();
    if b == 0.0 {
        out.push(check("degeneracy_open", g_open == 4, None, format!("{g_open}, expected 4")));
        if n % 2 == 0 {
            out.push(check("degeneracy_periodic", g_periodic == 1, None, format!("{g_periodic}, expected 1")));
        } else {
            out.push(skip("degeneracy_periodic", "odd periodic chain"));
        }
        out.push(check("bdg_zero_modes", zero == 4, None, format!("{zero} Majorana, expected 4")));
    } else if b.abs() > 1.0 {
        out.push(check("degeneracy_open", g_open == 1, None, format!("{g_open}, expected 1")));
        out.push(skip("degeneracy_periodic", "no claim away from B = 0"));
        out.push(check("bdg_zero_modes", zero == 0, None, format!("{zero} Majorana, expected 0")));
    } else {
        out.push(skip("degeneracy_open", &format!("{g_open}; split by finite size")));
        out.push(skip("degeneracy_periodic", &format!("{g_periodic}")));
        out.push(skip("bdg_zero_modes", &format!("{zero} Majorana")));
    }

    for (name, sol) in [("stabilizers_open", &ed_open), ("stabilizers_periodic", &ed_periodic)] {
        let s = sol.stabilizer_expectations();
        let worst = max_abs(s.iter().map(|v| 1.0 - v));
        if b == 0.0 {
            out.push(check(name, worst <= STABILIZER_TOL, Some(worst), "all <S_i> = 1".into()));
        } else {
            let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            out.push(check(name, max < 1.0 - STABILIZER_TOL, None, format!("max <S_i> = {max:.6}")));
        }
    }

    let count = 16.min(ed_open.energies.len());
    let bdg_levels = bdg.many_body_levels(count);
    let level_res = max_abs(bdg_levels.iter().zip(&ed_open.energies).map(|(a, e)| a - e));
    out.push(check(
        "bdg_spectrum",
        level_res <= EXACT_TOL,
        Some(level_res),
        format!("lowest {count} open-chain levels"),
    ));

    // same chain, two methods: pins the sign of z and the orientation of the xx/yy determinants
    let mut sign_res: f64 = 0.0;
    for r in [2usize, 3] {
        let i = (n - r) / 2;
        let e = ed_open.ground.correlators(i, r);
        let d = CorrelatorSet::from_contractions(&bdg, i as i64, r as i64)?;
        sign_res = sign_res.max(set_residual(&e, &d));
    }
    out.push(check(
        "sign_convention",
        sign_res <= EXACT_TOL,
        Some(sign_res),
        "z, zz, xx, yy from determinants vs ED".into(),
    ));

    if short_ranged(b) {
        let r = 2usize;
        let i = (n - r) / 2;
        let tl = build_rdm(&correlator_set(b, r as i64, tol)?)?.entries;
        let rho = ed_open.ground.two_site_rdm(i, i + r)?.entries;
        let dev = max_abs((rho - tl).iter().map(|z| z.norm()));
        out.push(check(
            "thermodynamic_rdm",
            dev <= THERMODYNAMIC_TOL,
            Some(dev),
            format!("mid-chain R = {r} vs infinite chain"),
        ));
        let density = ground_energy_density(1.0, b, 1e-12)?;
        let e_dev = (ed_periodic.ground.energy / n as f64 - density).abs();
        out.push(check(
            "energy_density",
            e_dev <= ENERGY_DENSITY_TOL,
            Some(e_dev),
            "periodic E0/N vs integral".into(),
        ));
    } else {
        out.push(skip("thermodynamic_rdm", "correlation length comparable to N"));
        out.push(skip("energy_density", "correlation length comparable to N"));
    }
    Ok(out)
}

pub fn run(ctx: &Context, args: ValidateArgs) -> Result<(), CliError> {
    let n = ctx.config.resolve(args.n, "n", parse_value::<usize>)?.unwrap_or(8);
    let b = ctx.config.resolve(args.b, "b", parse_value::<f64>)?.unwrap_or(0.0);
    let allow_large = args.allow_large || ctx.config.resolve(None, "allow_large", parse_bool)?.unwrap_or(false);
    let opts = ed_options(allow_large);
    if n > opts.max_sites {
        let hint = if n <= ed::HARD_SITE_LIMIT { "; pass --allow-large" } else { "" };
        return Err(CliError::Usage(format!(
            "{n} sites exceeds the exact-diagonalization limit of {}{hint}",
            opts.max_sites
        )));
    }
    let results = checks(n, b, &opts, ctx.tol)?;
    let mut t = Table::new(vec!["check", "status", "residual", "detail"]);
    for c in &results {
        t.push(vec![
            Cell::Text(c.name.into()),
            Cell::Text(c.status.name().into()),
            Cell::Value(c.residual),
            Cell::Text(c.detail.clone()),
        ]);
    }
    t.metadata.insert("sites".into(), serde_json::json!(n));
    t.metadata.insert("field".into(), serde_json::json!(b));
    crate::commands::emit_table(ctx, "validate", t)?;
    let failed: Vec<&str> = results.iter().filter(|c| c.status == Status::Fail).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed.join(", ")))
    }
}
