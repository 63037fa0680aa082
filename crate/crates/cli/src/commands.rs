use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use clusterq_core::analysis::{
    self, entanglement_birth, exp_decay_fit, power_fit, FitKind, Measure, MeasureSet, SweepRow, BIRTH_RESOLUTION,
};
use clusterq_core::correlators::{string_correlator, string_order_asymptote};
use clusterq_core::ed::{self, EdOptions, SplittingMethod, DEFAULT_SITE_LIMIT};
use clusterq_core::gfunction::g_vector;
use clusterq_core::model::{bdg_solve, Boundary, ChainLength, ModelParams, ZERO_MODE_THRESHOLD};

use crate::config::{parse_bool, parse_value};
use crate::grid::{parse_int_grid, parse_real_grid};
use crate::output::{Cell, Table};
use crate::{CliError, Context};

pub const SWEEP_COLUMNS: [&str; 11] = ["B", "R", "z", "xx", "yy", "zz", "mi", "discord", "concurrence", "eof", "flags"];

pub fn metadata(command: &str, ctx: &Context) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert(
        "tolerances".into(),
        json!({
            "g_integral": ctx.tol,
            "discord_value": clusterq_core::qinfo::DiscordOptions::default().value_tol,
            "psd": clusterq_core::rdm::PSD_TOLERANCE,
            "entropy_clamp": clusterq_core::qinfo::EIGENVALUE_CLAMP,
            "fit_floor": analysis::DEFAULT_FLOOR,
            "zero_mode": ZERO_MODE_THRESHOLD,
        }),
    );
    m
}

pub fn emit_table(ctx: &Context, command: &str, mut table: Table) -> Result<(), CliError> {
    let mut meta = metadata(command, ctx);
    meta.append(&mut table.metadata);
    table.metadata = meta;
    table.write(ctx.format, ctx.out.as_deref())
}

fn required<T>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing --{name} (flag or config key '{name}')")))
}

fn real_grid(ctx: &Context, flag: Option<String>, key: &str) -> Result<Option<Vec<f64>>, CliError> {
    ctx.config.resolve_parsed(flag, key, parse_real_grid)
}

fn int_grid(ctx: &Context, flag: Option<String>, key: &str) -> Result<Option<Vec<i64>>, CliError> {
    ctx.config.resolve_parsed(flag, key, parse_int_grid)
}

fn parse_measures(spec: &str) -> Result<MeasureSet, CliError> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(MeasureSet::all());
    }
    spec.split(',').try_fold(MeasureSet::none(), |set, name| {
        let m: Measure = name.parse().map_err(|e: clusterq_core::Error| CliError::Usage(e.to_string()))?;
        Ok(set.with(m))
    })
}

fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(SWEEP_COLUMNS.to_vec());
    for r in rows {
        t.push(vec![
            Cell::Coord(r.field),
            Cell::Int(r.separation),
            Cell::Value(r.z),
            Cell::Value(r.xx),
            Cell::Value(r.yy),
            Cell::Value(r.zz),
            Cell::Value(r.mi),
            Cell::Value(r.discord),
            Cell::Value(r.concurrence),
            Cell::Value(r.eof),
            Cell::Text(r.flags.join(";")),
        ]);
    }
    t
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Field grid: `a:b:step` or a comma list
    #[arg(long)]
    b: Option<String>,
    /// Separation grid; odd entries give exact product-state rows flagged `odd_r`
    #[arg(long)]
    r: Option<String>,
    /// Comma list among mi, discord, concurrence, eof, or `all` [default: all]
    #[arg(long)]
    measures: Option<String>,
}

pub fn sweep(ctx: &Context, args: SweepArgs) -> Result<(), CliError> {
    let fields = required(real_grid(ctx, args.b, "b")?, "b")?;
    let seps = required(int_grid(ctx, args.r, "r")?, "r")?;
    let measures = ctx
        .config
        .resolve_parsed(args.measures, "measures", parse_measures)?
        .unwrap_or_default();
    let rows = analysis::sweep(&fields, &seps, measures, ctx.tol);
    emit_table(ctx, "sweep", sweep_table(&rows))?;
    let failed = rows.iter().filter(|r| r.failed()).count();
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} of {} cells failed", rows.len())));
    }
    Ok(())
}

/// Reads a table written by `sweep --format csv`.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        .clone();
    if headers.iter().ne(SWEEP_COLUMNS) {
        return Err(CliError::Usage(format!("{} is not a sweep table", path.display())));
    }
    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let bad = |what: &str| CliError::Usage(format!("{} row {}: bad {what}", path.display(), line + 1));
        let opt = |i: usize| -> Result<Option<f64>, CliError> {
            let s = rec.get(i).unwrap_or("");
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(SWEEP_COLUMNS[i]))
            }
        };
        rows.push(SweepRow {
            field: rec[0].parse().map_err(|_| bad("B"))?,
            separation: rec[1].parse().map_err(|_| bad("R"))?,
            z: opt(2)?,
            xx: opt(3)?,
            yy: opt(4)?,
            zz: opt(5)?,
            mi: opt(6)?,
            discord: opt(7)?,
            concurrence: opt(8)?,
            eof: opt(9)?,
            flags: rec[10].split(';').filter(|f| !f.is_empty()).map(String::from).collect(),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KindChoice {
    Auto,
    Fixed(FitKind),
}

fn parse_kind(s: &str) -> Result<KindChoice, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "auto" => Ok(KindChoice::Auto),
        "exp" | "exponential" => Ok(KindChoice::Fixed(FitKind::Exponential)),
        "power" | "power_law" => Ok(KindChoice::Fixed(FitKind::PowerLaw)),
        other => Err(CliError::Usage(format!("kind must be auto, exponential or power, got '{other}'"))),
    }
}

fn is_critical(b: f64) -> bool {
    (b.abs() - 1.0).abs() < 1e-12
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Field grid to fit (inline sweep), or a filter on --input
    #[arg(long)]
    b: Option<String>,
    /// Separations [default: 4:60:2 at |B| = 1, else 2:40:2]
    #[arg(long)]
    r: Option<String>,
    /// Comma list of measures, e.g. discord,mi,zz_connected [default: discord,mi]
    #[arg(long)]
    measure: Option<String>,
    /// auto (power law at |B| = 1, exponential elsewhere), exponential or power [default: auto]
    #[arg(long)]
    kind: Option<String>,
    /// Sweep CSV to fit instead of computing a new sweep
    #[arg(long)]
    input: Option<PathBuf>,
}

pub fn fit(ctx: &Context, args: FitArgs) -> Result<(), CliError> {
    let measures: Vec<Measure> = ctx
        .config
        .resolve(args.measure, "measure", |s| Ok(s.to_string()))?
        .unwrap_or_else(|| "discord,mi".into())
        .split(',')
        .map(|s| s.parse().map_err(|e: clusterq_core::Error| CliError::Usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    let kind = ctx.config.resolve_parsed(args.kind, "kind", parse_kind)?.unwrap_or(KindChoice::Auto);
    let fields = real_grid(ctx, args.b, "b")?;
    let seps = int_grid(ctx, args.r, "r")?;
    let input = ctx.config.resolve(args.input, "input", |s| Ok(PathBuf::from(s)))?;

    let (fields, rows) = match input {
        Some(path) => {
            let rows = read_sweep_csv(&path)?;
            let mut present: Vec<f64> = Vec::new();
            for r in &rows {
                if !present.contains(&r.field) {
                    present.push(r.field);
                }
            }
            let fields = match fields {
                Some(f) => f,
                None => present,
            };
            (fields, rows)
        }
        None => {
            let fields = required(fields, "b")?;
            let set = measures.iter().fold(MeasureSet::none(), |s, &m| s.with(m));
            let rows: Vec<SweepRow> = fields
                .iter()
                .flat_map(|&b| {
                    let rs = seps.clone().unwrap_or_else(|| {
                        if is_critical(b) {
                            (4..=60).step_by(2).collect()
                        } else {
                            (2..=40).step_by(2).collect()
                        }
                    });
                    analysis::sweep(&[b], &rs, set, ctx.tol)
                })
                .collect();
            if let Some(r) = rows.iter().find(|r| r.failed()) {
                return Err(CliError::Numerical(format!(
                    "cell B = {}, R = {}: {}",
                    r.field,
                    r.separation,
                    r.flags.join(";")
                )));
            }
            (fields, rows)
        }
    };

    let mut t = Table::new(vec![
        "B", "measure", "kind", "parameter", "r_squared", "r_min", "r_max", "points", "floor",
    ]);
    for &b in &fields {
        for &m in &measures {
            let k = match kind {
                KindChoice::Auto if is_critical(b) => FitKind::PowerLaw,
                KindChoice::Auto => FitKind::Exponential,
                KindChoice::Fixed(k) => k,
            };
            let points = analysis::series(&rows, b, m);
            let f = match k {
                FitKind::Exponential => exp_decay_fit(&points),
                FitKind::PowerLaw => power_fit(&points),
            }
            .map_err(|e| CliError::from(e).with_context(&format!("B = {b}, {m}")))?;
            t.push(vec![
                Cell::Coord(b),
                Cell::Text(m.name().into()),
                Cell::Text(f.kind.to_string()),
                Cell::Value(Some(f.parameter)),
                Cell::Value(Some(f.r_squared)),
                Cell::Coord(f.window.0),
                Cell::Coord(f.window.1),
                Cell::Int(f.points as i64),
                Cell::Value(Some(f.floor)),
            ]);
        }
    }
    emit_table(ctx, "fit", t)
}

impl CliError {
    fn with_context(self, ctx: &str) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{ctx}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{ctx}: {m}")),
            CliError::Validation(m) => CliError::Validation(format!("{ctx}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{ctx}: {m}")),
        }
    }
}

#[derive(Debug, Args)]
pub struct BirthArgs {
    /// Even separation [default: 2]
    #[arg(long)]
    r: Option<i64>,
    /// Lower end of the field bracket [default: 0.5]
    #[arg(long)]
    lo: Option<f64>,
    /// Upper end of the field bracket [default: 1.0]
    #[arg(long)]
    hi: Option<f64>,
}

pub fn birth(ctx: &Context, args: BirthArgs) -> Result<(), CliError> {
    let r = ctx.config.resolve(args.r, "r", parse_value::<i64>)?.unwrap_or(2);
    let lo = ctx.config.resolve(args.lo, "lo", parse_value::<f64>)?.unwrap_or(0.5);
    let hi = ctx.config.resolve(args.hi, "hi", parse_value::<f64>)?.unwrap_or(1.0);
    let b = entanglement_birth(r, (lo, hi), ctx.tol).map_err(|e| match e {
        clusterq_core::Error::BracketInvalid { lo, hi } => CliError::Numerical(format!(
            "no onset of entanglement at R = {r} inside [{lo}, {hi}]"
        )),
        other => other.into(),
    })?;
    let mut t = Table::new(vec!["R", "B_lo", "B_hi", "B_E", "resolution"]);
    t.push(vec![
        Cell::Int(r),
        Cell::Coord(lo),
        Cell::Coord(hi),
        Cell::Value(Some(b)),
        Cell::Value(Some(BIRTH_RESOLUTION)),
    ]);
    emit_table(ctx, "birth", t)
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Number of sites
    #[arg(long)]
    n: Option<usize>,
    /// Field [default: 0]
    #[arg(long)]
    b: Option<f64>,
    /// open or periodic [default: open]
    #[arg(long)]
    boundary: Option<String>,
    /// Number of lowest levels [default: 8]
    #[arg(long)]
    count: Option<usize>,
    /// ed or bdg; bdg handles open chains of any length [default: ed]
    #[arg(long)]
    method: Option<String>,
    /// Instead of levels, print E4 - E1 for each open-chain length in this grid
    #[arg(long)]
    splitting: Option<String>,
    /// Allow exact diagonalization of 13 or 14 sites
    #[arg(long)]
    allow_large: bool,
}

fn parse_boundary(s: &str) -> Result<Boundary, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "open" => Ok(Boundary::Open),
        "periodic" => Ok(Boundary::Periodic),
        other => Err(CliError::Usage(format!("boundary must be open or periodic, got '{other}'"))),
    }
}

fn parse_method(s: &str) -> Result<SplittingMethod, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "ed" => Ok(SplittingMethod::Ed),
        "bdg" => Ok(SplittingMethod::Bdg),
        "auto" => Ok(SplittingMethod::Auto),
        other => Err(CliError::Usage(format!("method must be ed, bdg or auto, got '{other}'"))),
    }
}

pub fn ed_options(allow_large: bool) -> EdOptions {
    if allow_large {
        EdOptions::extended()
    } else {
        EdOptions::default()
    }
}

pub fn spectrum(ctx: &Context, args: SpectrumArgs) -> Result<(), CliError> {
    let b = ctx.config.resolve(args.b, "b", parse_value::<f64>)?.unwrap_or(0.0);
    let allow_large = args.allow_large || ctx.config.resolve(None, "allow_large", parse_bool)?.unwrap_or(false);
    let opts = ed_options(allow_large);
    let method = ctx.config.resolve(args.method, "method", |s| Ok(s.to_string()))?;

    if let Some(spec) = ctx.config.resolve(args.splitting, "splitting", |s| Ok(s.to_string()))? {
        let sizes: Vec<usize> = parse_int_grid(&spec)?
            .into_iter()
            .map(|n| usize::try_from(n).map_err(|_| CliError::Usage(format!("bad chain length {n}"))))
            .collect::<Result<_, _>>()?;
        let method = method.as_deref().map_or(Ok(SplittingMethod::Auto), parse_method)?;
        let mut t = Table::new(vec!["N", "B", "splitting", "method"]);
        for &n in &sizes {
            let use_ed = match method {
                SplittingMethod::Auto => n <= DEFAULT_SITE_LIMIT,
                SplittingMethod::Ed => true,
                SplittingMethod::Bdg => false,
            };
            if use_ed && n > opts.max_sites {
                return Err(clusterq_core::Error::SizeGuard {
                    sites: n,
                    limit: opts.max_sites,
                }
                .into());
            }
            let m = if use_ed { SplittingMethod::Ed } else { SplittingMethod::Bdg };
            let (_, s) = ed::splitting_curve_with(b, &[n], m)?[0];
            t.push(vec![
                Cell::Int(n as i64),
                Cell::Coord(b),
                Cell::Value(Some(s)),
                Cell::Text(if use_ed { "ed" } else { "bdg" }.into()),
            ]);
        }
        return emit_table(ctx, "spectrum", t);
    }

    let n = required(ctx.config.resolve(args.n, "n", parse_value::<usize>)?, "n")?;
    let boundary = ctx
        .config
        .resolve_parsed(args.boundary, "boundary", parse_boundary)?
        .unwrap_or(Boundary::Open);
    let count = ctx.config.resolve(args.count, "count", parse_value::<usize>)?.unwrap_or(8);
    let params = ModelParams::new(1.0, b, ChainLength::Finite(n), boundary)?;
    let method = method.as_deref().map_or(Ok(SplittingMethod::Ed), parse_method)?;
    let (label, levels, degeneracy) = match method {
        SplittingMethod::Bdg => {
            let sol = bdg_solve(&params)?;
            let zero = sol.zero_mode_count().min(62);
            ("bdg", sol.many_body_levels(count), 1usize << zero)
        }
        _ => {
            let s = ed::degeneracy_with(&params, &opts, count)?;
            ("ed", s.lowest_energies, s.degeneracy)
        }
    };
    let mut t = Table::new(vec!["N", "B", "boundary", "method", "level", "energy", "degeneracy"]);
    let boundary_name = match boundary {
        Boundary::Open => "open",
        Boundary::Periodic => "periodic",
    };
    for (i, e) in levels.iter().enumerate() {
        t.push(vec![
            Cell::Int(n as i64),
            Cell::Coord(b),
            Cell::Text(boundary_name.into()),
            Cell::Text(label.into()),
            Cell::Int(i as i64),
            Cell::Value(Some(*e)),
            Cell::Int(degeneracy as i64),
        ]);
    }
    emit_table(ctx, "spectrum", t)
}

#[derive(Debug, Args)]
pub struct SopArgs {
    /// Field grid
    #[arg(long)]
    b: Option<String>,
    /// Longest string, in sublattice sites [default: 50]
    #[arg(long)]
    n: Option<usize>,
}

pub fn sop(ctx: &Context, args: SopArgs) -> Result<(), CliError> {
    let fields = required(real_grid(ctx, args.b, "b")?, "b")?;
    let n_max = ctx.config.resolve(args.n, "n", parse_value::<usize>)?.unwrap_or(50);
    if n_max == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let columns: Vec<Result<Vec<f64>, CliError>> = fields
        .par_iter()
        .map(|&b| {
            let g = g_vector(b, 2 * n_max as i64, ctx.tol)?;
            (1..=n_max)
                .map(|n| string_correlator(&g, n).map_err(CliError::from))
                .collect()
        })
        .collect();
    let mut t = Table::new(vec!["B", "n", "sop", "asymptote"]);
    for (&b, col) in fields.iter().zip(columns) {
        let col = col?;
        for (k, v) in col.iter().enumerate() {
            t.push(vec![
                Cell::Coord(b),
                Cell::Int(k as i64 + 1),
                Cell::Value(Some(*v)),
                Cell::Value(Some(string_order_asymptote(b))),
            ]);
        }
    }
    emit_table(ctx, "sop", t)
}
