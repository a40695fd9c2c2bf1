//! The four subcommands. Each returns the process exit status.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use torus_bnf::bnf::{bnf_run, BnfConfig, BnfResult, HamiltonianSpec};
use torus_bnf::canonical::{flatness_scan, log_radii, FlatnessScan};
use torus_bnf::flow::{escape_sweep, EscapeReport, IntegratorConfig};
use torus_bnf::gevrey::{
    b_envelope_constant, fit_constants, norm_profile, stability_time_estimate, truncation_table,
    verify_estimate_lemmas, FittedConstants, GevreyParams, LemmaReport, NormProfile, TruncationRow,
};
use torus_bnf::series::{HomogeneousPart, TaylorFourier};
use torus_bnf::special::InequalityReport;
use torus_bnf::suites::{self, IdentityReport};

use crate::output::to_stable_json;
use crate::problem::ProblemFile;
use crate::{Failure, Suite, EXIT_FAILED, EXIT_RESONANT, EXIT_SLOPE};

/// What `compute` writes and `diagnose`/`verify` read back.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub problem: ProblemFile,
    pub result: BnfResult,
}

impl ResultFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Failure::schema(format!("result file {}: {e}", path.display())))
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    to_stable_json(value).map_err(|e| Failure::new(EXIT_FAILED, format!("serialization: {e}")))
}

fn summary(spec: &HamiltonianSpec, res: &BnfResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dimension {}, omega {:?}", spec.dim(), spec.omega.omega());
    let _ = writeln!(s, "kappa {}, tau {}", spec.omega.kappa(), spec.omega.tau());
    let _ = writeln!(s, "order M = {}, completed {}", res.order, res.completed_order());
    if let Some(why) = &res.aborted {
        let _ = writeln!(s, "aborted: {why}");
    }
    let _ = writeln!(s, "\nnormal form R_m(I)");
    let _ = writeln!(s, "{:>4}  {:<16}  coefficient", "m", "alpha");
    for (m, part) in res.normal_form.parts() {
        for (alpha, c) in part.terms() {
            let _ = writeln!(s, "{m:>4}  {:<16}  {}", format!("{:?}", alpha.as_slice()), c.mean().re);
        }
    }
    let _ = writeln!(s, "\nsmall divisors");
    let _ = writeln!(s, "{:>4}  min |<omega,k>|  truncated mass", "m");
    for (d, t) in res.divisor_log.iter().zip(&res.truncation_log) {
        let _ = writeln!(s, "{:>4}  {:<15}  {}", d.order, d.value, t.value);
    }
    let _ = writeln!(s, "\ngenerating function g_m");
    if res.g.is_zero() {
        let _ = writeln!(s, "  (empty)");
    } else {
        let _ = writeln!(s, "{:>4}  {:>6}  S_0", "m", "terms");
        for (m, part) in res.g.parts() {
            let s0: f64 = part.terms().map(|(_, c)| c.wiener(0.0)).sum();
            let _ = writeln!(s, "{m:>4}  {:>6}  {s0}", part.len());
        }
    }
    s
}

/// Run the recursion and write `result.json` and `summary.txt` into `out`.
pub fn cmd_compute(problem_path: &Path, order: Option<usize>, retain_b: Option<bool>, out: &Path) -> Result<i32, Failure> {
    let problem = ProblemFile::load(problem_path)?;
    let spec = problem.to_spec()?;
    let m = order.unwrap_or(problem.order);
    let config = BnfConfig {
        retain_b,
        k_max_per_order: problem.k_max_per_order.unwrap_or(BnfConfig::default().k_max_per_order),
        ..BnfConfig::default()
    };
    let result = bnf_run(&spec, m, &config).map_err(Failure::from_core)?;
    let text = summary(&spec, &result);
    let aborted = result.aborted.is_some();
    let mut problem = problem;
    problem.order = m;
    write(&out.join("result.json"), &json(&ResultFile { problem, result })?)?;
    write(&out.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(if aborted { EXIT_RESONANT } else { 0 })
}

fn parts_through(tf: &TaylorFourier, lo: usize, hi: usize) -> Vec<HomogeneousPart> {
    (lo..=hi)
        .map(|m| tf.part(m).cloned().unwrap_or_else(|| HomogeneousPart::zero(tf.dim(), m)))
        .collect()
}

fn profiles_csv(profiles: &[NormProfile]) -> String {
    let mut s = String::from("m,s,value,max_single\n");
    for p in profiles {
        for i in 0..p.s_grid.len() {
            let _ = writeln!(s, "{},{:?},{:?},{:?}", p.order, p.s_grid[i], p.values[i], p.max_single[i]);
        }
    }
    s
}

#[derive(Serialize)]
struct Diagnostics {
    order: usize,
    mu: f64,
    fit: FittedConstants,
    envelope_pass: bool,
    b0_star: Option<f64>,
    truncation: Vec<TruncationRow>,
    lemmas: Option<LemmaReport>,
    pass: bool,
}

/// Profiles, fitted envelope constants, truncation table and lemma checks.
pub fn cmd_diagnose(
    result_path: &Path,
    s_grid: &[f64],
    radii: &[f64],
    samples: usize,
    seed: u64,
    out: &Path,
) -> Result<i32, Failure> {
    let file = ResultFile::load(result_path)?;
    let spec = file.problem.to_spec()?;
    let res = &file.result;
    let b = res.b_parts.as_ref().ok_or_else(|| {
        Failure::schema("result does not retain B_m; rerun compute with --retain-b true")
    })?;
    let top = res.completed_order();
    if top < 3 {
        return Err(Failure::schema(format!("diagnostics need orders through M >= 3, have {top}")));
    }
    if s_grid.len() < 2 || s_grid.iter().any(|s| s.is_nan() || *s < 0.0) {
        return Err(Failure::schema("need at least two nonnegative s values"));
    }
    let g_profiles: Vec<NormProfile> = parts_through(&res.g, 2, top).iter().map(|p| norm_profile(p, s_grid)).collect();
    let b_profiles: Vec<NormProfile> = parts_through(b, 2, top).iter().map(|p| norm_profile(p, s_grid)).collect();
    let fit = fit_constants(&g_profiles, &spec.gevrey).map_err(Failure::from_core)?;
    let fitted: GevreyParams = spec.gevrey.clone().with_constants(fit.c1, fit.c2);
    let b0_star = (!fit.vacuous).then(|| b_envelope_constant(&b_profiles, &fitted));
    let truncation = truncation_table(radii, &fitted).map_err(Failure::from_core)?;
    let lemmas = if top >= 4 {
        Some(verify_estimate_lemmas(&spec, res, &fitted, s_grid, samples, seed).map_err(Failure::from_core)?)
    } else {
        None
    };
    let envelope_pass = fit.violations == 0;
    let pass = envelope_pass && lemmas.as_ref().is_none_or(|l| l.pass) && b0_star.is_none_or(f64::is_finite);
    let report = Diagnostics {
        order: top,
        mu: fitted.mu(),
        fit,
        envelope_pass,
        b0_star,
        truncation,
        lemmas,
        pass,
    };
    write(&out.join("profiles_g.csv"), &profiles_csv(&g_profiles))?;
    write(&out.join("profiles_b.csv"), &profiles_csv(&b_profiles))?;
    let text = json(&report)?;
    write(&out.join("diagnostics.json"), &text)?;
    println!(
        "C1 = {}, C2 = {}, violations = {}, pass = {}",
        report.fit.c1, report.fit.c2, report.fit.violations, report.pass
    );
    Ok(if pass { 0 } else { EXIT_FAILED })
}

/// Settings of [`cmd_verify`].
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Either `[lo, hi]` (log-spaced with `count` points) or an explicit list.
    pub radii: Vec<f64>,
    pub count: usize,
    pub samples: usize,
    pub horizon: f64,
    pub escape_radii: Vec<f64>,
    pub band: f64,
    pub dt: f64,
    pub seed: u64,
}

#[derive(Serialize)]
struct FlatnessReport {
    #[serde(flatten)]
    scan: FlatnessScan,
    order: usize,
    required_slope: f64,
    pass: bool,
}

#[derive(Serialize)]
struct EscapeRow {
    #[serde(flatten)]
    report: EscapeReport,
    /// Heuristic `ln T` from the remainder estimate with fitted constants.
    ln_t_estimate: Option<f64>,
}

#[derive(Serialize)]
struct VerifyReport {
    flatness: FlatnessReport,
    escape: Vec<EscapeRow>,
}

fn fitted_params(spec: &HamiltonianSpec, res: &BnfResult) -> Option<GevreyParams> {
    let top = res.completed_order();
    if top < 3 {
        return None;
    }
    let profiles: Vec<_> = parts_through(&res.g, 2, top)
        .iter()
        .map(|p| norm_profile(p, &torus_bnf::gevrey::DEFAULT_S_GRID))
        .collect();
    let fit = fit_constants(&profiles, &spec.gevrey).ok()?;
    Some(spec.gevrey.clone().with_constants(fit.c1, fit.c2))
}

/// Flatness scan and escape-time table; exit 4 when the fitted slope is
/// below `M + 1 − 0.2`.
pub fn cmd_verify(problem_path: &Path, result_path: &Path, opts: &VerifyOptions, out: &Path) -> Result<i32, Failure> {
    let problem = ProblemFile::load(problem_path)?;
    let spec = problem.to_spec()?;
    let file = ResultFile::load(result_path)?;
    let res = &file.result;
    if res.g.dim() != spec.dim() {
        return Err(Failure::schema(format!(
            "result has dimension {}, problem has {}",
            res.g.dim(),
            spec.dim()
        )));
    }
    let radii = match opts.radii.as_slice() {
        [lo, hi] => log_radii(*lo, *hi, opts.count),
        list => list.to_vec(),
    };
    let scan = flatness_scan(&spec, res, &radii, opts.samples, opts.seed).map_err(Failure::from_core)?;
    let order = res.completed_order();
    let required_slope = order as f64 + 1.0 - 0.2;
    let pass = scan.fitted_slope.is_none_or(|s| s >= required_slope);
    write(&out.join("flatness.csv"), &scan.to_csv())?;

    let mut escape = Vec::new();
    if opts.horizon > 0.0 && !opts.escape_radii.is_empty() {
        let config = IntegratorConfig {
            dt: opts.dt,
            ..IntegratorConfig::default()
        };
        let reports = escape_sweep(&spec, &opts.escape_radii, opts.band, opts.horizon, &config).map_err(Failure::from_core)?;
        let params = fitted_params(&spec, res);
        let mut csv = String::from("r0,outcome,time,max_energy_drift,max_action_drift,steps,ln_t_estimate\n");
        for report in reports {
            let ln_t = params
                .as_ref()
                .and_then(|p| stability_time_estimate(report.r0, p).ok())
                .map(|t| t.ln_t)
                .filter(|_| report.r0 > 0.0);
            let outcome = match report.outcome {
                torus_bnf::flow::EscapeOutcome::Escaped { .. } => "escaped",
                torus_bnf::flow::EscapeOutcome::ExceededCap { .. } => "exceeded_cap",
            };
            let _ = writeln!(
                csv,
                "{:?},{outcome},{:?},{:?},{:?},{},{}",
                report.r0,
                report.outcome.time(),
                report.max_energy_drift,
                report.max_action_drift,
                report.steps,
                ln_t.map_or(String::new(), |x| format!("{x:?}"))
            );
            escape.push(EscapeRow {
                report,
                ln_t_estimate: ln_t,
            });
        }
        write(&out.join("escape.csv"), &csv)?;
    }
    let report = VerifyReport {
        flatness: FlatnessReport {
            scan,
            order,
            required_slope,
            pass,
        },
        escape,
    };
    write(&out.join("verify.json"), &json(&report)?)?;
    match report.flatness.scan.fitted_slope {
        Some(s) => println!("fitted slope {s} (required >= {required_slope})"),
        None => println!("flatness slope fit skipped (identity map)"),
    }
    Ok(if pass { 0 } else { EXIT_SLOPE })
}

#[derive(Serialize)]
struct ChecksReport {
    suite: String,
    seed: u64,
    reports: Vec<InequalityReport>,
    identity: Option<IdentityReport>,
    pass: bool,
}

/// Random polynomials per Fourier-norm check.
pub const WIENER_SAMPLES: usize = 100;

/// Run an inequality suite; exit 0 iff every report passes.
pub fn cmd_checks(suite: Suite, seed: u64, out: Option<&Path>) -> Result<i32, Failure> {
    let mut reports = Vec::new();
    let mut identity = None;
    if matches!(suite, Suite::Wiener | Suite::All) {
        reports.extend(suites::wiener_suite(WIENER_SAMPLES, seed).map_err(Failure::from_core)?);
    }
    if matches!(suite, Suite::Gamma | Suite::All) {
        reports.extend(suites::gamma_suite(seed).map_err(Failure::from_core)?);
    }
    if matches!(suite, Suite::Combinatorics | Suite::All) {
        identity = Some(suites::check_multinomial_identity(3, 12).map_err(Failure::from_core)?);
    }
    let pass = reports.iter().all(|r| r.pass) && identity.as_ref().is_none_or(|i| i.pass);
    let name = format!("{suite:?}").to_lowercase();
    let text = json(&ChecksReport {
        suite: name,
        seed,
        reports,
        identity,
        pass,
    })?;
    if let Some(path) = out {
        write(path, &text)?;
    }
    print!("{text}");
    Ok(if pass { 0 } else { EXIT_FAILED })
}
