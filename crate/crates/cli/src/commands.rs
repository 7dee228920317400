//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use secrecy_core::montecarlo::{estimate_sop_sharded, RngSpec};
use secrecy_core::secrecy::{pzero, pzero_asymptotic, sop_guarded, sop_oracle, sop_with, SecrecyResult, SopMethod};

use crate::format::{real, Table};
use crate::params::{resolve, Command, Common, MethodArg, Quantity, Resolved, SweepArgs, SweepVariable};
use crate::{validate, CliError};

const MODEL_COLUMNS: [&str; 7] = ["m1", "k1", "snr_b_db", "m2", "k2", "snr_e_db", "rho"];

/// Diagnostics of one evaluated point, as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointDiag {
    pub index: usize,
    pub value: f64,
    pub terms_used: Option<usize>,
    pub tail_estimate: Option<f64>,
    pub method: String,
    pub swapped: Option<bool>,
    pub quad_error: Option<f64>,
    pub std_err: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    parameters: &'a Resolved,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepRecord>,
    seed: u64,
    started_unix: f64,
    finished_unix: f64,
    csv: String,
    points: &'a [PointDiag],
}

#[derive(Debug, Serialize)]
struct SweepRecord {
    variable: SweepVariable,
    start: f64,
    stop: f64,
    points: usize,
    quantity: Quantity,
}

/// One evaluated row with its manifest entry.
struct Evaluated {
    cells: Vec<String>,
    diag: PointDiag,
}

fn now_unix() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn model_cells(p: &Resolved) -> Vec<String> {
    [p.m1, p.k1, p.snr_b_db, p.m2, p.k2, p.snr_e_db, p.rho].iter().map(|&v| real(v)).collect()
}

fn warn_high_rho(p: &Resolved) {
    if p.rho > 0.99 {
        eprintln!("secrecy: warning: ρ = {} > 0.99; the mixture index has very heavy tails and runs will be slow", p.rho);
    }
}

fn diag_of(index: usize, r: &SecrecyResult) -> PointDiag {
    PointDiag {
        index,
        value: r.value,
        terms_used: Some(r.terms_used),
        tail_estimate: Some(r.tail_estimate),
        method: r.method.as_str().into(),
        swapped: Some(r.swapped),
        quad_error: r.quad_error.is_finite().then_some(r.quad_error),
        std_err: None,
    }
}

fn series_cells(r: &SecrecyResult) -> Vec<String> {
    vec![r.terms_used.to_string(), real(r.tail_estimate), r.method.as_str().into(), r.swapped.to_string()]
}

fn sop_header() -> Vec<&'static str> {
    let mut h = MODEL_COLUMNS.to_vec();
    h.extend(["rate", "value", "terms_used", "tail_estimate", "method", "swapped"]);
    h
}

fn eval_sop(p: &Resolved, index: usize) -> Result<Evaluated, CliError> {
    let model = p.model()?;
    let ctrl = p.control()?;
    let r = match (p.method, p.guard) {
        (MethodArg::Series, Some(g)) => sop_guarded(&model, p.rate, &ctrl, p.quad_tol, g)?,
        (MethodArg::Series, None) => sop_with(&model, p.rate, &ctrl, SopMethod::Series, p.quad_tol)?,
        (MethodArg::Oracle, _) => sop_oracle(&model, p.rate, p.quad_tol)?,
        (MethodArg::Steen15, _) => sop_with(&model, p.rate, &ctrl, SopMethod::Steen15, p.quad_tol)?,
        (MethodArg::Printed, _) => sop_with(&model, p.rate, &ctrl, SopMethod::Printed, p.quad_tol)?,
        (MethodArg::Asymptotic, _) => {
            return Err(CliError::Usage("the asymptotic method applies to pnzsc only".into()));
        }
    };
    let mut cells = model_cells(p);
    cells.push(real(p.rate));
    cells.push(real(r.value));
    cells.extend(series_cells(&r));
    Ok(Evaluated { cells, diag: diag_of(index, &r) })
}

fn pnzsc_header() -> Vec<&'static str> {
    let mut h = MODEL_COLUMNS.to_vec();
    h.extend(["pzero", "pnzsc", "terms_used", "tail_estimate", "method", "swapped"]);
    h
}

fn eval_pnzsc(p: &Resolved, index: usize, asymptotic: bool) -> Result<Evaluated, CliError> {
    let model = p.model()?;
    let mut cells = model_cells(p);
    if asymptotic || p.method == MethodArg::Asymptotic {
        let v = pzero_asymptotic(&model)?;
        cells.extend([real(v), real(1.0 - v), String::new(), String::new(), "asymptotic".into(), String::new()]);
        let diag = PointDiag {
            index,
            value: v,
            terms_used: None,
            tail_estimate: None,
            method: "asymptotic".into(),
            swapped: None,
            quad_error: None,
            std_err: None,
        };
        return Ok(Evaluated { cells, diag });
    }
    let r = match p.method {
        MethodArg::Oracle => sop_oracle(&model, 0.0, p.quad_tol)?,
        MethodArg::Series => pzero(&model, &p.control()?)?,
        other => return Err(CliError::Usage(format!("method {other:?} does not apply to pnzsc"))),
    };
    cells.extend([real(r.value), real(1.0 - r.value)]);
    cells.extend(series_cells(&r));
    Ok(Evaluated { cells, diag: diag_of(index, &r) })
}

fn mc_header() -> Vec<&'static str> {
    let mut h = MODEL_COLUMNS.to_vec();
    h.extend(["rate", "mean", "std_err", "samples", "seed", "streams"]);
    h
}

fn eval_mc(p: &Resolved, index: usize) -> Result<Evaluated, CliError> {
    let model = p.model()?;
    let e = estimate_sop_sharded(&model, p.rate, p.samples, &RngSpec::new(p.seed, 0), p.streams)?;
    let mut cells = model_cells(p);
    cells.extend([real(p.rate), real(e.mean), real(e.std_err), e.n.to_string(), p.seed.to_string(), p.streams.to_string()]);
    let diag = PointDiag {
        index,
        value: e.mean,
        terms_used: None,
        tail_estimate: None,
        method: "monte_carlo".into(),
        swapped: None,
        quad_error: None,
        std_err: Some(e.std_err),
    };
    Ok(Evaluated { cells, diag })
}

/// Writes the CSV to `--out` (with a manifest beside it) or to standard
/// output, and the plot script if requested.
fn emit(
    common: &Common,
    command: &str,
    params: &Resolved,
    table: &Table,
    points: &[PointDiag],
    sweep: Option<SweepRecord>,
    started: f64,
    plot: Option<(usize, usize, bool)>,
) -> Result<(), CliError> {
    let csv = table.render();
    match &common.out {
        Some(path) => {
            std::fs::write(path, &csv)?;
            let manifest = Manifest {
                tool: "secrecy",
                version: env!("CARGO_PKG_VERSION"),
                command,
                parameters: params,
                sweep,
                seed: params.seed,
                started_unix: started,
                finished_unix: now_unix(),
                csv: path.display().to_string(),
                points,
            };
            let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.into()))?;
            std::fs::write(manifest_path(path), json + "\n")?;
        }
        None => print!("{csv}"),
    }
    if let Some(script) = &common.plot_script {
        let (x, y, logy) = plot.unwrap_or((8, 9, false));
        let data = common.out.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "data.csv".into());
        std::fs::write(script, plot_script(&data, table.header(), x, y, logy))?;
    }
    Ok(())
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn plot_script(data: &str, header: &[String], x: usize, y: usize, logy: bool) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str(&format!("set xlabel '{}'\n", header[x - 1]));
    s.push_str(&format!("set ylabel '{}'\n", header[y - 1]));
    if logy {
        s.push_str("set logscale y\n");
    }
    s.push_str("set grid\n");
    s.push_str(&format!("plot '{data}' using {x}:{y} skip 1 with linespoints title '{}'\n", header[y - 1]));
    s
}

fn single(common: &Common, command: &str, header: Vec<&str>, eval: impl Fn(&Resolved) -> Result<Evaluated, CliError>) -> Result<(), CliError> {
    let started = now_unix();
    let p = resolve(common)?;
    warn_high_rho(&p);
    let e = eval(&p)?;
    let mut t = Table::new(&header);
    t.push(e.cells);
    emit(common, command, &p, &t, &[e.diag], None, started, None)
}

fn apply(p: &Resolved, var: SweepVariable, x: f64) -> Resolved {
    let mut q = p.clone();
    match var {
        SweepVariable::Rate => q.rate = x,
        SweepVariable::SnrBDb => q.snr_b_db = x,
        SweepVariable::SnrEDb => q.snr_e_db = x,
        SweepVariable::Rho => q.rho = x,
        SweepVariable::K => {
            q.k1 = x;
            q.k2 = x;
        }
        SweepVariable::M => {
            q.m1 = x;
            q.m2 = x;
        }
    }
    q
}

fn column_of(var: SweepVariable) -> usize {
    // 1-based column in the sweep table: index, then the model columns
    match var {
        SweepVariable::M => 2,
        SweepVariable::K => 3,
        SweepVariable::SnrBDb => 4,
        SweepVariable::SnrEDb => 7,
        SweepVariable::Rho => 8,
        SweepVariable::Rate => 9,
    }
}

fn sweep(common: &Common, s: &SweepArgs) -> Result<(), CliError> {
    let started = now_unix();
    if !(s.start < s.stop) || s.points < 2 {
        return Err(CliError::Usage("a sweep needs --start < --stop and --points ≥ 2".into()));
    }
    let p = resolve(common)?;
    warn_high_rho(&p);
    if s.variable == SweepVariable::Rate && matches!(s.quantity, Quantity::Pzero | Quantity::Pnzsc) {
        return Err(CliError::Usage("P_o(0) does not depend on the rate".into()));
    }
    let xs: Vec<f64> = (0..s.points).map(|i| s.start + (s.stop - s.start) * i as f64 / (s.points - 1) as f64).collect();
    let results: Vec<Result<Evaluated, CliError>> = xs
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let q = apply(&p, s.variable, x);
            match s.quantity {
                Quantity::Sop => eval_sop(&q, i),
                Quantity::Pzero | Quantity::Pnzsc => eval_pnzsc(&q, i, false),
                Quantity::Mc => eval_mc(&Resolved { seed: q.seed.wrapping_add(i as u64), ..q }, i),
            }
        })
        .collect();
    let base = match s.quantity {
        Quantity::Sop => sop_header(),
        Quantity::Pzero | Quantity::Pnzsc => pnzsc_header(),
        Quantity::Mc => mc_header(),
    };
    let mut header = vec!["index"];
    header.extend(base);
    let mut table = Table::new(&header);
    let mut diags = Vec::with_capacity(xs.len());
    for (i, r) in results.into_iter().enumerate() {
        let e = r?;
        let mut cells = vec![i.to_string()];
        cells.extend(e.cells);
        table.push(cells);
        diags.push(e.diag);
    }
    let y = match s.quantity {
        Quantity::Sop => 10,
        Quantity::Pzero => 9,
        Quantity::Pnzsc => 10,
        Quantity::Mc => 10,
    };
    let logy = matches!(s.quantity, Quantity::Pzero);
    let record = SweepRecord { variable: s.variable, start: s.start, stop: s.stop, points: s.points, quantity: s.quantity };
    emit(common, "sweep", &p, &table, &diags, Some(record), started, Some((column_of(s.variable), y, logy)))
}

/// Runs one subcommand.
pub fn dispatch(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Sop(c) => single(c, "sop", sop_header(), |p| eval_sop(p, 0)),
        Command::Pnzsc { common, asymptotic } => single(common, "pnzsc", pnzsc_header(), |p| eval_pnzsc(p, 0, *asymptotic)),
        Command::Mc(c) => single(c, "mc", mc_header(), |p| eval_mc(p, 0)),
        Command::Sweep { common, sweep: s } => sweep(common, s),
        Command::Validate(v) => validate::run(v),
    }
}
