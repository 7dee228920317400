//! Cross-validation of the series evaluators against the 2D reference
//! integration and Monte Carlo.

use rayon::prelude::*;

use secrecy_core::channel::{db_to_linear, LinkParams, SeriesControl, WiretapModel};
use secrecy_core::montecarlo::{estimate_sop, RngSpec};
use secrecy_core::secrecy::{pzero, sop, sop_oracle};

use crate::format::{real, Table};
use crate::params::ValidateArgs;
use crate::CliError;

/// One grid point: `(m, k₁, k₂, ρ)` with both fading shapes equal to `m`.
type Point = (f64, f64, f64, f64);

struct Grid {
    models: Vec<Point>,
    rates: Vec<f64>,
    /// Indices into `models` checked against Monte Carlo at each rate.
    mc_models: Vec<usize>,
    mc_rates: Vec<f64>,
    samples: u64,
}

fn grid(quick: bool) -> Grid {
    if quick {
        Grid {
            models: vec![(1.0, 1.0, 1.0, 0.5), (3.5, 1.0, 2.0, 0.9), (2.0, 2.0, 4.0, 0.0), (2.0, 2.0, 1.0, 0.5)],
            rates: vec![0.5, 2.0],
            mc_models: vec![0, 1, 3],
            mc_rates: vec![1.0],
            samples: 200_000,
        }
    } else {
        let mut models = Vec::new();
        for &m in &[1.0, 2.0, 3.5] {
            for &(k1, k2) in &[(1.0, 1.0), (1.0, 2.0), (1.0, 4.0), (2.0, 2.0), (2.0, 4.0), (4.0, 4.0)] {
                for &rho in &[0.0, 0.5, 0.9] {
                    models.push((m, k1, k2, rho));
                }
            }
        }
        // one point per (m, ρ) with unequal shadowing shapes
        let mc_models = models.iter().enumerate().filter(|(_, p)| p.1 == 1.0 && p.2 == 2.0).map(|(i, _)| i).collect();
        Grid { models, rates: vec![0.5, 1.0, 2.0], mc_models, mc_rates: vec![0.5, 2.0], samples: 1_000_000 }
    }
}

fn build(p: &Point) -> Result<WiretapModel, CliError> {
    let (m, k1, k2, rho) = *p;
    let b = LinkParams::new(m, k1, db_to_linear(4.0)).map_err(CliError::from_input)?;
    let e = LinkParams::new(m, k2, 1.0).map_err(CliError::from_input)?;
    WiretapModel::new(b, e, rho).map_err(CliError::from_input)
}

struct Check {
    kind: &'static str,
    point: Point,
    rate: f64,
    analytic: f64,
    reference: f64,
    tol: f64,
    error: Option<String>,
}

impl Check {
    fn diff(&self) -> f64 {
        (self.analytic - self.reference).abs()
    }

    fn passed(&self) -> bool {
        self.error.is_none() && self.diff() <= self.tol
    }
}

fn failed(kind: &'static str, point: Point, rate: f64, e: impl std::fmt::Display) -> Check {
    Check { kind, point, rate, analytic: f64::NAN, reference: f64::NAN, tol: f64::NAN, error: Some(e.to_string()) }
}

fn oracle_checks(p: Point, rates: &[f64], a: &ValidateArgs) -> Vec<Check> {
    let model = match build(&p) {
        Ok(m) => m,
        Err(e) => return vec![failed("setup", p, f64::NAN, e)],
    };
    let ctrl = SeriesControl::default();
    let mut out = Vec::new();
    for &r in rates {
        out.push(match (sop(&model, r, &ctrl), sop_oracle(&model, r, a.quad_tol)) {
            (Ok(s), Ok(o)) => {
                Check { kind: "sop_vs_oracle", point: p, rate: r, analytic: s.value, reference: o.value, tol: a.tol_oracle, error: None }
            }
            (Err(e), _) | (_, Err(e)) => failed("sop_vs_oracle", p, r, e),
        });
    }
    out.push(match (pzero(&model, &ctrl), sop_oracle(&model, 0.0, a.quad_tol)) {
        (Ok(s), Ok(o)) => {
            Check { kind: "pzero_vs_oracle", point: p, rate: 0.0, analytic: s.value, reference: o.value, tol: a.tol_pzero, error: None }
        }
        (Err(e), _) | (_, Err(e)) => failed("pzero_vs_oracle", p, 0.0, e),
    });
    out
}

fn mc_check(p: Point, r: f64, stream: u64, samples: u64, a: &ValidateArgs) -> Check {
    let model = match build(&p) {
        Ok(m) => m,
        Err(e) => return failed("sop_vs_mc", p, r, e),
    };
    match (sop(&model, r, &SeriesControl::default()), estimate_sop(&model, r, samples, &RngSpec::new(a.seed, stream))) {
        (Ok(s), Ok(e)) => Check {
            kind: "sop_vs_mc",
            point: p,
            rate: r,
            analytic: s.value,
            reference: e.mean,
            tol: a.mc_sigmas * e.std_err,
            error: None,
        },
        (Err(e), _) | (_, Err(e)) => failed("sop_vs_mc", p, r, e),
    }
}

/// Runs the validation matrix; any failed check is a validation failure.
pub fn run(a: &ValidateArgs) -> Result<(), CliError> {
    if !(a.quad_tol > 0.0) {
        return Err(CliError::Usage("--quad-tol must be > 0".into()));
    }
    let g = grid(a.quick);
    let samples = a.samples.unwrap_or(g.samples);
    if samples == 0 {
        return Err(CliError::Usage("--samples must be ≥ 1".into()));
    }
    let mut checks: Vec<Check> = g.models.par_iter().flat_map_iter(|&p| oracle_checks(p, &g.rates, a)).collect();
    let mc_jobs: Vec<(Point, f64)> =
        g.mc_models.iter().flat_map(|&i| g.mc_rates.iter().map(move |&r| (i, r))).map(|(i, r)| (g.models[i], r)).collect();
    checks.extend(mc_jobs.par_iter().enumerate().map(|(s, &(p, r))| mc_check(p, r, s as u64, samples, a)).collect::<Vec<_>>());

    let mut t = Table::new(&["check", "m", "k1", "k2", "rho", "rate", "analytic", "reference", "diff", "tol", "status"]);
    for c in &checks {
        let status = match (&c.error, c.passed()) {
            (Some(_), _) => "error",
            (None, true) => "pass",
            (None, false) => "fail",
        };
        let (m, k1, k2, rho) = c.point;
        t.push(vec![
            c.kind.into(),
            real(m),
            real(k1),
            real(k2),
            real(rho),
            real(c.rate),
            real(c.analytic),
            real(c.reference),
            real(c.diff()),
            real(c.tol),
            status.into(),
        ]);
        if let Some(e) = &c.error {
            eprintln!("secrecy: {} at (m={m}, k1={k1}, k2={k2}, rho={rho}, r={}): {e}", c.kind, c.rate);
        }
    }
    let csv = t.render();
    match &a.out {
        Some(path) => std::fs::write(path, &csv)?,
        None => print!("{csv}"),
    }
    let bad = checks.iter().filter(|c| !c.passed()).count();
    eprintln!("secrecy: validate: {} checks, {} failed", checks.len(), bad);
    if bad > 0 {
        return Err(CliError::Validation(format!("{bad} of {} checks outside tolerance", checks.len())));
    }
    Ok(())
}
