//! The five subcommands. Each returns a serializable result plus a text
//! rendering; [`super::run`] decides which one is printed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use super::config::{KernelCase, RunConfig};
use super::output::{self, Plot};
use super::reproduce::{self, Classification, DiscrepancyReport};
use super::CliError;
use crate::chareq::{self, CharError, CrossingOptions, DiracDirac, DiracWeak, HopfPoint, WindowUnavailable};
use crate::integrate::{self, IntegrateError, OscillationSummary, Trajectory};
use crate::model::{self, Equilibrium};
use crate::normalform::{self, Diagnostics, NormalFormError, NormalFormResult};
use crate::roots::{self, ScanOptions};

/// Result of one command: a JSON value, a human-readable rendering and the
/// exit status to report.
pub struct Outcome {
    pub json: serde_json::Value,
    pub text: String,
    pub status: i32,
}

impl Outcome {
    fn ok<T: Serialize>(value: &T, text: String) -> Self {
        Self { json: serde_json::to_value(value).expect("result serializes"), text, status: 0 }
    }
}

fn numeric<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numeric(e.to_string())
}

fn char_err(e: CharError) -> CliError {
    match e {
        CharError::Model(m) => CliError::Validation(m.to_string()),
        CharError::InvalidArgument(m) => CliError::Validation(m),
        other => numeric(other),
    }
}

fn nf_err(e: NormalFormError) -> CliError {
    match e {
        NormalFormError::Char(c) => char_err(c),
        NormalFormError::Model(m) => CliError::Validation(m.to_string()),
        other => numeric(other),
    }
}

fn int_err(e: IntegrateError) -> CliError {
    match e {
        IntegrateError::InsufficientData(m) => CliError::Numeric(m),
        other => CliError::Validation(other.to_string()),
    }
}

#[derive(Debug, Serialize)]
pub struct WindowReport {
    pub bounds: Option<(f64, f64)>,
    pub unavailable: Option<WindowUnavailable>,
    pub reason: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    pub equilibria: [Equilibrium; 2],
    pub admissible: bool,
    /// `tau1 + tau2` below this keeps `L0` stable (point lags).
    pub stability_bound: f64,
    pub q2_window: WindowReport,
    pub case: KernelCase,
    /// Roots of the characteristic function at zero delay, closed form.
    pub undelayed_roots: Vec<Complex64>,
    /// Roots found in the scan region for the configured lags.
    pub roots: Vec<Complex64>,
    pub spectral_abscissa: Option<f64>,
    pub verdict: String,
}

fn quadratic_complex_roots(b: f64, c: f64) -> Vec<Complex64> {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        roots::real_quadratic_roots(1.0, b, c).into_iter().map(|r| Complex64::new(r, 0.0)).collect()
    } else {
        let im = (-disc).sqrt() / 2.0;
        vec![Complex64::new(-b / 2.0, im), Complex64::new(-b / 2.0, -im)]
    }
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let case = cfg.validate()?;
    let p = &cfg.model;
    let (l0, l1) = model::equilibria(p).map_err(|e| CliError::Validation(e.to_string()))?;
    let x0 = l0.x;
    let stability_bound = chareq::stability_bound_dd(p).map_err(char_err)?;
    let q2_window = match chareq::q2_stability_window(p).map_err(char_err)? {
        Ok(b) => WindowReport { bounds: Some(b), unavailable: None, reason: None },
        Err(w) => WindowReport { bounds: None, unavailable: Some(w), reason: Some(w.to_string()) },
    };
    let undelayed_roots = match case {
        KernelCase::DiracDirac { .. } => {
            quadratic_complex_roots(p.b3 - p.b1 * x0, (p.a1 * p.b1 - p.a2 * p.b2) * x0)
        }
        KernelCase::DiracWeak { q2, .. } => {
            let k = chareq::WeakCoeffs::new(p, x0, q2);
            cubic_complex_roots(k.p2, k.p1 + k.r1, k.p0 + k.r0)
        }
    };
    let scan = ScanOptions::default();
    let region = cfg.run.scan;
    let found = match case {
        KernelCase::DiracDirac { tau1, tau2 } => {
            chareq::root_scan(&DiracDirac::new(p, tau1, tau2).map_err(char_err)?, region, &scan)
        }
        KernelCase::DiracWeak { tau1, q2 } => {
            chareq::root_scan(&DiracWeak::new(p, tau1, q2).map_err(char_err)?, region, &scan)
        }
    };
    let spectral_abscissa = found.first().map(|z| z.re);
    let verdict = match spectral_abscissa {
        Some(a) if a < 0.0 => "L0 locally asymptotically stable",
        Some(_) => "L0 unstable",
        None => "no characteristic roots found in the scan region",
    }
    .to_string();
    let report = AnalyzeReport {
        equilibria: [l0, l1],
        admissible: true,
        stability_bound,
        q2_window,
        case,
        undelayed_roots,
        roots: found,
        spectral_abscissa,
        verdict,
    };

    let mut t = String::new();
    let _ = writeln!(t, "admissible: yes (b2/b1 < b4/b3 < a1/a2)");
    let _ = writeln!(t, "L0 = ({:.10}, {:.10})", l0.x, l0.y);
    let _ = writeln!(t, "L1 = ({:.10}, {:.10})", l1.x, l1.y);
    let _ = writeln!(t, "stability bound on tau1 + tau2: {:.10}", report.stability_bound);
    match (&report.q2_window.bounds, &report.q2_window.reason) {
        (Some((a, b)), _) => {
            let _ = writeln!(t, "q2 stability window: (0, {a:.10}) u ({b:.10}, inf)");
        }
        (None, Some(r)) => {
            let _ = writeln!(t, "q2 stability window: not available ({r})");
        }
        _ => {}
    }
    let _ = writeln!(t, "case: {}", case_label(&case));
    let _ = writeln!(t, "roots at zero delay:");
    for z in &report.undelayed_roots {
        let _ = writeln!(t, "  {:+.10} {:+.10}i", z.re, z.im);
    }
    let _ = writeln!(t, "leading roots in scan region:");
    for z in report.roots.iter().take(8) {
        let _ = writeln!(t, "  {:+.10} {:+.10}i", z.re, z.im);
    }
    let _ = writeln!(t, "{}", report.verdict);
    Ok(Outcome::ok(&report, t))
}

fn cubic_complex_roots(b: f64, c: f64, d: f64) -> Vec<Complex64> {
    let real = roots::real_cubic_roots(b, c, d);
    if real.len() == 3 {
        return real.into_iter().map(|r| Complex64::new(r, 0.0)).collect();
    }
    let Some(&r) = real.first() else { return Vec::new() };
    // deflate: x^2 + (b + r) x + (c + r (b + r))
    let mut out = vec![Complex64::new(r, 0.0)];
    out.extend(quadratic_complex_roots(b + r, c + r * (b + r)));
    out
}

fn case_label(c: &KernelCase) -> String {
    match c {
        KernelCase::DiracDirac { tau1, tau2 } => format!("dirac-dirac, tau1 = {tau1}, tau2 = {tau2}"),
        KernelCase::DiracWeak { tau1, q2 } => format!("dirac-weak, tau1 = {tau1}, q2 = {q2}"),
    }
}

#[derive(Debug, Serialize)]
pub struct RecipeRow {
    pub omega: f64,
    pub tau: f64,
    pub residual: f64,
}

#[derive(Debug, Serialize)]
pub struct HopfReport {
    pub points: Vec<HopfPoint>,
    pub no_crossing: Option<String>,
    /// Printed-quartic frequencies with `k pi / omega + tau2`, Dirac-Dirac only.
    pub printed_recipe: Vec<RecipeRow>,
}

pub fn cmd_hopf(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let case = cfg.validate()?;
    let p = &cfg.model;
    let opts = CrossingOptions::default();
    let (found, recipe) = match case {
        KernelCase::DiracDirac { tau2, .. } => {
            let x0 = model::interior_x0(p).map_err(|e| CliError::Validation(e.to_string()))?;
            let recipe = chareq::omega_candidates_dd(p, x0)
                .into_iter()
                .map(|w| {
                    let tau = chareq::printed_tau10(w, tau2, 1);
                    let f = DiracDirac { params: *p, x0, tau1: tau, tau2 };
                    RecipeRow { omega: w, tau, residual: roots::ComplexFn::value(&f, Complex64::new(0.0, w)).norm() }
                })
                .collect();
            let pts = chareq::hopf_points_dd(p, tau2, &opts)
                .map(|v| v.into_iter().take(cfg.run.branches as usize).collect::<Vec<_>>());
            (pts, recipe)
        }
        KernelCase::DiracWeak { q2, .. } => (chareq::hopf_points_dw(p, q2, &opts), Vec::new()),
    };
    let (points, no_crossing) = match found {
        Ok(v) if !v.is_empty() => (v, None),
        Ok(_) => (Vec::new(), Some("no crossing found".to_string())),
        Err(e @ (CharError::NoCrossing(_) | CharError::Degenerate { .. } | CharError::Pole)) => (Vec::new(), Some(e.to_string())),
        Err(e) => return Err(char_err(e)),
    };
    let report = HopfReport { points, no_crossing, printed_recipe: recipe };

    let mut t = String::new();
    let _ = writeln!(t, "case: {}", case_label(&case));
    if let Some(reason) = &report.no_crossing {
        let _ = writeln!(t, "no crossing: {reason}");
    }
    for hp in &report.points {
        let _ = writeln!(
            t,
            "branch {}: omega = {:.10}, tau_crit = {:.10}, period = {:.6}, |Delta| = {:.3e}, balance = [{:.3e}, {:.3e}], dlambda/dtau1 = {:.6e} {:+.6e}i",
            hp.branch, hp.omega, hp.tau_crit, hp.period(), hp.residual, hp.balance[0], hp.balance[1], hp.d_re, hp.d_im
        );
    }
    for r in &report.printed_recipe {
        let _ = writeln!(
            t,
            "printed recipe: omega = {:.10}, tau = {:.10}, |Delta| = {:.3e} (not a root)",
            r.omega, r.tau, r.residual
        );
    }
    let status = if report.points.is_empty() { CliError::Numeric(String::new()).code() } else { 0 };
    let mut out = Outcome::ok(&report, t);
    out.status = status;
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct NormalFormOutput {
    pub hopf: HopfPoint,
    pub result: NormalFormResult,
    pub verdict: String,
    pub diagnostics: Diagnostics,
    pub printed_mismatches: Vec<String>,
}

pub fn cmd_normalform(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let case = cfg.validate()?;
    let p = &cfg.model;
    let opts = CrossingOptions::default();
    let hp = match case {
        KernelCase::DiracDirac { tau2, .. } => chareq::hopf_point_dd(p, tau2, 1, &opts),
        KernelCase::DiracWeak { q2, .. } => chareq::hopf_point_dw(p, q2, &opts),
    }
    .map_err(char_err)?;
    let r = normalform::normal_form(p, &hp, cfg.run.zero_nonlinear).map_err(nf_err)?;
    let out = NormalFormOutput {
        hopf: hp,
        verdict: r.result.verdict(),
        result: r.result,
        diagnostics: r.diagnostics,
        printed_mismatches: r.printed_mismatches,
    };
    let res = &out.result;
    let d = &out.diagnostics;
    let mut t = String::new();
    let _ = writeln!(t, "case: {}", case_label(&case));
    let _ = writeln!(t, "omega = {:.10}, tau_crit = {:.10}", hp.omega, hp.tau_crit);
    for (name, z) in [("g20", res.g20), ("g11", res.g11), ("g02", res.g02), ("g21", res.g21), ("C1(0)", res.c1), ("lambda'", res.lambda_prime)] {
        let _ = writeln!(t, "{name:8} = {:+.10e} {:+.10e}i", z.re, z.im);
    }
    let _ = writeln!(t, "mu2 = {:.10e}, beta2 = {:.10e}, T2 = {:.10e}", res.mu2, res.beta2, res.t2);
    let _ = writeln!(t, "verdict: {}", out.verdict);
    let _ = writeln!(
        t,
        "diagnostics: |<h*,h>-1| = {:.2e}, |<h*,conj h>| = {:.2e}, eigen = {:.2e}, adjoint = {:.2e}, E-vectors = {:.2e}",
        d.pairing_error, d.cross_pairing, d.eigen_residual, d.adjoint_residual, d.e_vector_error
    );
    for m in &out.printed_mismatches {
        let _ = writeln!(t, "printed term differs: {m}");
    }
    Ok(Outcome::ok(&out, t))
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub case: KernelCase,
    pub samples: usize,
    pub final_time: f64,
    pub blew_up: bool,
    pub summary: Option<OscillationSummary>,
    pub summary_error: Option<String>,
    pub files: Vec<String>,
}

/// Runs the configured simulation and returns it with its summary.
pub fn run_simulation(cfg: &RunConfig) -> Result<(Trajectory, Result<OscillationSummary, IntegrateError>), CliError> {
    let case = cfg.validate()?;
    let p = &cfg.model;
    let l0 = model::equilibria(p).map_err(|e| CliError::Validation(e.to_string()))?.0;
    let opts = cfg.run.sim_options();
    let (traj, target) = match case {
        KernelCase::DiracDirac { tau1, tau2 } => {
            (integrate::simulate_dd(p, tau1, tau2, &cfg.run.history, &opts).map_err(int_err)?, vec![l0.x, l0.y])
        }
        KernelCase::DiracWeak { tau1, q2 } => (
            integrate::simulate_chain(p, tau1, q2, cfg.run.chain_form, &cfg.run.history, &opts).map_err(int_err)?,
            vec![l0.x, l0.y, l0.y],
        ),
    };
    let summary = integrate::summarize(&traj, &target, cfg.run.tol);
    Ok((traj, summary))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn cmd_simulate(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    let case = cfg.validate()?;
    let (traj, summary) = run_simulation(cfg)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let config_json = serde_json::to_string(cfg).expect("config serializes");
    let meta = serde_json::json!({ "tool": "tumordde", "version": crate::VERSION, "config": cfg }).to_string();

    let csv_path = out_dir.join("trajectory.csv");
    write_file(&csv_path, &output::trajectory_csv(&traj, &config_json, cfg.run.stride))?;
    let note = traj.blew_up.then(|| format!("blow-up: run truncated at t = {}", traj.final_time()));
    let xs: Vec<f64> = traj.component(0).collect();
    let ys: Vec<f64> = traj.component(1).collect();
    let plots = [
        ("waveform_x.svg", "x(t)", "t", "x", traj.times.iter().copied().zip(xs.iter().copied()).collect::<Vec<_>>()),
        ("waveform_y.svg", "y(t)", "t", "y", traj.times.iter().copied().zip(ys.iter().copied()).collect()),
        ("phase.svg", "phase plane", "x", "y", xs.iter().copied().zip(ys.iter().copied()).collect()),
    ];
    let mut files = vec![csv_path.display().to_string()];
    for (name, title, xl, yl, points) in plots {
        let plot = Plot { title: format!("{title}, {}", case_label(&case)), x_label: xl.into(), y_label: yl.into(), points, annotation: note.clone() };
        let path = out_dir.join(name);
        write_file(&path, &output::render_svg(&plot, &meta))?;
        files.push(path.display().to_string());
    }

    let (summary, summary_error) = match summary {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = SimulateReport {
        case,
        samples: traj.len(),
        final_time: traj.final_time(),
        blew_up: traj.blew_up,
        summary,
        summary_error,
        files,
    };
    let mut t = String::new();
    let _ = writeln!(t, "case: {}", case_label(&case));
    let _ = writeln!(t, "samples: {}, final time: {}, blew up: {}", report.samples, report.final_time, report.blew_up);
    match (&report.summary, &report.summary_error) {
        (Some(s), _) => {
            let _ = writeln!(t, "converged: {} (final distance {:.3e})", s.converged, s.final_distance);
            if let (Some(per), Some(amp)) = (s.period_estimate, s.amplitude) {
                let _ = writeln!(t, "period estimate: {per:.6} over {} cycles, amplitude of x: {amp:.6}", s.cycles_used);
            }
            if s.negative_population {
                let _ = writeln!(t, "negative population reached: min x = {}, min y = {}", s.min_x, s.min_y);
            }
        }
        (None, Some(e)) => {
            let _ = writeln!(t, "no summary: {e}");
        }
        _ => {}
    }
    for f in &report.files {
        let _ = writeln!(t, "wrote {f}");
    }
    Ok(Outcome::ok(&report, t))
}

pub fn cmd_reproduce_paper(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<Outcome, CliError> {
    let report = reproduce::reproduce(&cfg.model, cfg.run.q2_scan, cfg.run.q2_scan_points);
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write_file(&dir.join("discrepancy_report.json"), &(json + "\n"))?;
    }
    Ok(Outcome::ok(&report, render_report(&report)))
}

fn render_report(r: &DiscrepancyReport) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "{:<32} {:<8} {:>18} {:>18} {:>10} {:<14} {:>10}", "scenario", "quantity", "printed", "computed", "rel diff", "class", "residual");
    for row in &r.rows {
        let class = match row.classification {
            Classification::Match => "match",
            Classification::Mismatch => "mismatch",
            Classification::NotApplicable => "n/a",
        };
        let fmt_opt = |v: Option<f64>, w: usize| v.map_or_else(|| format!("{:>w$}", "-"), |v| format!("{v:>w$.10}"));
        let _ = writeln!(
            t,
            "{:<32} {:<8} {:>18.10} {} {:>10} {:<14} {:>10}",
            row.scenario,
            row.quantity,
            row.printed,
            fmt_opt(row.artifact, 18),
            row.rel_diff.map_or("-".into(), |v| format!("{v:.3e}")),
            class,
            row.residual.map_or("-".into(), |v| format!("{v:.2e}")),
        );
        if let Some(n) = &row.note {
            let _ = writeln!(t, "    note: {n}");
        }
    }
    for v in &r.verdicts {
        let _ = writeln!(
            t,
            "verdict [{}]: printed \"{}\", computed \"{}\"",
            v.scenario,
            v.printed,
            v.artifact.as_deref().unwrap_or("-")
        );
    }
    for c in &r.printed_recipe {
        if let (Some(w), Some(tau), Some(res)) = (c.omega, c.tau, c.residual) {
            let _ = writeln!(t, "printed recipe with x0 = {:.10}: omega = {w:.10}, tau = {tau:.10}, |Delta| = {res:.3e}", c.x0);
        }
    }
    for m in &r.printed_term_mismatches {
        let _ = writeln!(t, "printed term differs: {m}");
    }
    let _ = writeln!(t, "{} of {} rows mismatch", r.mismatches(), r.rows.len());
    t
}
