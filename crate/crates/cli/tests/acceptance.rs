//! One line per acceptance criterion. Exits nonzero if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use torus_bnf::bnf::{bnf_run, BnfConfig, BnfResult, HamiltonianSpec};
use torus_bnf::canonical::{flatness_scan, log_radii, symplectic_check, CanonicalMap};
use torus_bnf::flow::{escape_sweep, EscapeOutcome, IntegratorConfig};
use torus_bnf::fourier::FourierSeries;
use torus_bnf::gevrey::{fit_constants, profiles_of, DEFAULT_S_GRID};
use torus_bnf::multi_index::MultiIndex;
use torus_bnf::suites;
use torus_bnf_cli::problem::ProblemFile;

const SEED: u64 = 20240601;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn problem(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems").join(name)
}

fn load_spec(name: &str) -> HamiltonianSpec {
    ProblemFile::load(&problem(name)).unwrap().to_spec().unwrap()
}

fn run(spec: &HamiltonianSpec, order: usize) -> BnfResult {
    let res = bnf_run(spec, order, &BnfConfig::default()).unwrap();
    assert!(res.aborted.is_none(), "recursion aborted: {:?}", res.aborted);
    res
}

fn coefficient(tf: &torus_bnf::series::TaylorFourier, m: usize) -> FourierSeries {
    tf.part(m)
        .and_then(|p| p.get(&MultiIndex::new(vec![m as u32])))
        .cloned()
        .unwrap_or_else(|| FourierSeries::zero(1))
}

fn sum(terms: &[FourierSeries]) -> FourierSeries {
    terms.iter().skip(1).fold(terms[0].clone(), |acc, t| FourierSeries::axpby(1.0, &acc, 1.0, t).unwrap())
}

fn recursion_oracle() -> Outcome {
    let start = Instant::now();
    let spec = load_spec("pendulum.json");
    let res = run(&spec, 3);
    let elapsed = start.elapsed();
    let sin = |k: i32, a: f64| FourierSeries::sin_mode(vec![k], a);
    let expected = [
        ("R2", coefficient(&res.normal_form, 2), FourierSeries::constant(1, 0.5)),
        ("R3", coefficient(&res.normal_form, 3), FourierSeries::constant(1, -0.0625)),
        ("g2", coefficient(&res.g, 2), sin(1, -0.25)),
        ("g3", coefficient(&res.g, 3), sum(&[sin(1, 0.25), sin(2, 0.25 * 0.125)])),
    ];
    let mut worst = 0.0f64;
    for (_, got, want) in &expected {
        let gap = FourierSeries::axpby(1.0, got, -1.0, want).unwrap().wiener(0.0) / want.wiener(0.0);
        worst = worst.max(gap.abs());
    }
    let pass = worst <= 1e-12 && elapsed < Duration::from_secs(1);
    outcome(pass, format!("max relative gap {worst:.2e}, {elapsed:.2?}"))
}

fn combinatorial_identity() -> Outcome {
    let start = Instant::now();
    let report = suites::check_multinomial_identity(3, 12).unwrap();
    let elapsed = start.elapsed();
    let pass = report.pass && elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!("{} cases, {} mismatches, {elapsed:.2?}", report.checked, report.mismatches.len()),
    )
}

fn homological_bound() -> Outcome {
    let (bound, residual) = suites::check_homological(100, SEED).unwrap();
    outcome(
        bound.pass && residual.pass,
        format!("worst bound ratio {:.4}, worst residual {:.2e}", bound.worst_ratio, residual.worst_ratio - 1.0),
    )
}

fn product_bounds() -> Outcome {
    let (wiener, modified) = suites::check_products(200, SEED).unwrap();
    outcome(
        wiener.pass && modified.pass,
        format!("worst ratios {:.4} and {:.4}", wiener.worst_ratio, modified.worst_ratio),
    )
}

fn gevrey_envelope() -> Outcome {
    let start = Instant::now();
    let spec = load_spec("pendulum.json");
    let params = &spec.gevrey;
    let mut fits = Vec::new();
    for order in [8, 10] {
        let res = run(&spec, order);
        fits.push(fit_constants(&profiles_of(&res.g, &DEFAULT_S_GRID), params).unwrap());
    }
    let (a, b) = (&fits[0], &fits[1]);
    let change = |x: f64, y: f64| (y - x).abs() / x;
    let (d1, d2) = (change(a.c1, b.c1), change(a.c2, b.c2));
    let certified = fits.iter().all(|f| f.c1.is_finite() && f.c2.is_finite() && f.violations == 0 && !f.vacuous);
    let elapsed = start.elapsed();
    let pass = certified && d1 < 0.1 && d2 < 0.1 && elapsed < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "mu {}, M=8 (C1 {:.4}, C2 {:.4}), M=10 (C1 {:.4}, C2 {:.4}), {elapsed:.2?}",
            params.mu(),
            a.c1,
            a.c2,
            b.c1,
            b.c2
        ),
    )
}

fn flatness_scaling() -> Outcome {
    let spec = load_spec("pendulum.json");
    let radii = log_radii(1e-3, 1e-2, 8);
    let mut pass = true;
    let mut detail = Vec::new();
    for (order, floor) in [(3, 3.8), (5, 5.8)] {
        let res = run(&spec, order);
        let slope = flatness_scan(&spec, &res, &radii, 64, SEED).unwrap().fitted_slope;
        pass &= slope.is_some_and(|s| s >= floor);
        detail.push(format!("M={order} slope {:.4}", slope.unwrap_or(f64::NAN)));
    }
    outcome(pass, detail.join(", "))
}

fn effective_stability() -> Outcome {
    let spec = load_spec("pendulum.json");
    let cfg = IntegratorConfig { dt: 1e-2, ..IntegratorConfig::default() };
    let cap = 1e5;
    let reports = escape_sweep(&spec, &[0.2, 0.1, 0.05], 2.0, cap, &cfg).unwrap();
    let times: Vec<f64> = reports.iter().map(|r| r.outcome.time()).collect();
    let monotone = times.windows(2).all(|w| w[1] >= w[0]);
    let smallest_capped = matches!(reports.last().unwrap().outcome, EscapeOutcome::ExceededCap { .. });
    let drift = reports.iter().map(|r| r.max_energy_drift).fold(0.0, f64::max);
    outcome(
        monotone && smallest_capped && drift < 1e-8,
        format!("times {times:?}, max energy drift {drift:.2e}"),
    )
}

fn gamma_suite() -> Outcome {
    let reports = suites::gamma_suite(SEED).unwrap();
    let rho_one_exact = reports
        .iter()
        .find(|r| r.name == "stirling_equiv(rho=1)")
        .is_some_and(|r| r.fitted_constant == Some(1.0));
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    outcome(
        failed.is_empty() && rho_one_exact,
        format!("{} checks, failed {failed:?}, C(1) exact: {rho_one_exact}", reports.len()),
    )
}

fn canonical_map() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for name in ["pendulum.json", "golden2d.json"] {
        let spec = load_spec(name);
        let order = ProblemFile::load(&problem(name)).unwrap().order;
        let map = CanonicalMap::from_result(&spec, &run(&spec, order)).unwrap();
        let n = spec.dim();
        let mut fixity = 0.0f64;
        for i in 0..50 {
            let phi: Vec<f64> = (0..n).map(|j| 0.125 * (i * n + j) as f64).collect();
            let (x, y) = map.apply_map(&phi, &vec![0.0; n]).unwrap();
            for j in 0..n {
                fixity = fixity.max((x[j] - phi[j]).abs()).max(y[j].abs());
            }
        }
        let defect = symplectic_check(&map, 1e-2, 50, SEED).unwrap();
        pass &= fixity <= 1e-12 && defect <= 1e-6;
        detail.push(format!("{name}: fixity {fixity:.1e}, symplectic defect {defect:.2e}"));
    }
    outcome(pass, detail.join("; "))
}

fn bnf(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_bnf"))
        .args(args)
        .output()
        .expect("bnf binary runs")
        .status
        .code()
        .unwrap_or(-1)
}

fn directory_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let input = problem("golden2d.json");
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        let out_s = out.to_str().unwrap();
        let result = out.join("result.json");
        let c = bnf(&["--seed", "7", "compute", input.to_str().unwrap(), "--out", out_s]);
        let d = bnf(&["--seed", "7", "diagnose", result.to_str().unwrap(), "--out", out_s]);
        if c != 0 || d != 0 {
            return outcome(false, format!("exit codes compute {c}, diagnose {d}"));
        }
        runs.push(directory_bytes(&out));
    }
    let same = runs[0] == runs[1];
    outcome(same, format!("{} files compared", runs[0].len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("recursion oracle", recursion_oracle),
        ("combinatorial identity", combinatorial_identity),
        ("homological bound", homological_bound),
        ("product bounds", product_bounds),
        ("gevrey envelope", gevrey_envelope),
        ("flatness scaling", flatness_scaling),
        ("effective stability", effective_stability),
        ("gamma and beta suite", gamma_suite),
        ("canonical map", canonical_map),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", i + 1, result.detail);
        failures += usize::from(!result.pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
