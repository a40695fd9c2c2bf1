//! Seeded inequality suites over random trigonometric polynomials, the
//! Gamma/Beta checks and the multinomial identity.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fourier::{
    kappa_over_support, solve_homological, sup_derivative_bound, DiophantineVector, FourierSeries,
    HomologicalConfig, Mode, QMode,
};
use crate::multi_index::MultiIndex;
use crate::series::{multinomial_closed_form, multinomial_weight_sum};
use crate::special::{self, log_binomial, InequalityReport, RATIO_SLACK};

/// `C̃` of the modified-norm product estimate.
pub const PRODUCT_CONSTANT: f64 = 8.0 * PI * PI / 3.0;

/// A real trigonometric polynomial with between 1 and `max_terms` random
/// modes, `|k_j| ≤ max_mode`, amplitudes uniform in `[-1, 1]`.
pub fn random_trig_poly(rng: &mut impl Rng, dim: usize, max_mode: i32, max_terms: usize, mean_zero: bool) -> FourierSeries {
    let terms = rng.random_range(1..=max_terms.max(1));
    let mut modes: Vec<(Mode, Complex64)> = Vec::new();
    for _ in 0..terms {
        let mut k: Mode = (0..dim).map(|_| rng.random_range(-max_mode..=max_mode)).collect();
        if mean_zero && k.iter().all(|&x| x == 0) {
            k[0] = 1;
        }
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let neg: Mode = k.iter().map(|x| -x).collect();
        if k == neg {
            modes.push((k, Complex64::new(c.re, 0.0)));
        } else {
            modes.push((k, c));
            modes.push((neg, c.conj()));
        }
    }
    // merge duplicates before the Hermitian check
    let mut merged = std::collections::BTreeMap::new();
    for (k, c) in modes {
        *merged.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
    }
    FourierSeries::from_modes(dim, (2 * max_mode as usize * dim).max(64), true, merged).expect("Hermitian by construction")
}

/// Frequency vector used by the homological suite in dimension `n`.
fn suite_frequency(n: usize) -> (Vec<f64>, f64) {
    match n {
        1 => (vec![1.0], 1.0),
        _ => (vec![1.0, (1.0 + 5f64.sqrt()) / 2.0], 1.5),
    }
}

/// Smoothness weights of the homological suite.
pub const HOMOLOGICAL_S: [f64; 4] = [0.0, 1.0, 2.5, 5.0];
/// Smoothness weights of the product suite.
pub const PRODUCT_S: [f64; 4] = [0.0, 1.5, 3.0, 6.25];

/// `S_s(u) ≤ κ̂⁻¹ S_{s+τ}(f)` for `𝓛_ω u = f`, with `κ̂` taken over the
/// support of `f`, plus the residual `S_0(𝓛_ω u − f)/S_0(f)`.
pub fn check_homological(count: usize, seed: u64) -> Result<(InequalityReport, InequalityReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bound = Vec::new();
    let mut residual = Vec::new();
    for i in 0..count {
        let n = 1 + i % 2;
        let (omega, tau) = suite_frequency(n);
        let f = random_trig_poly(&mut rng, n, 20, 8, true).without_mean();
        let kappa = kappa_over_support(&omega, tau, &f);
        let w = DiophantineVector::new(omega.clone(), kappa.min(1.0), tau, 0)?;
        let sol = solve_homological(&f, &w, &HomologicalConfig::default())?;
        for &s in &HOMOLOGICAL_S {
            let lhs = sol.u.wiener(s);
            let rhs = f.wiener(s + tau) / kappa;
            bound.push((if lhs == 0.0 { 0.0 } else { lhs / rhs }, vec![i as f64, s]));
        }
        let back = sol.u.lie_derivative(&omega)?;
        let defect = FourierSeries::axpby(1.0, &back, -1.0, &f)?.wiener(0.0) / f.wiener(0.0).max(f64::MIN_POSITIVE);
        residual.push((defect, vec![i as f64]));
    }
    let grid = format!("{count} seeded mean-zero polynomials, n <= 2, |k_j| <= 20");
    let bound = ratio_report("homological_bound", &grid, bound);
    let (defect, witness) = worst(residual);
    let residual = InequalityReport {
        name: "homological_residual".into(),
        grid,
        worst_ratio: 1.0 + defect,
        pass: defect <= 1e-10,
        witness,
        fitted_constant: None,
    };
    Ok((bound, residual))
}

fn worst(rows: Vec<(f64, Vec<f64>)>) -> (f64, Vec<f64>) {
    rows.into_iter()
        .fold((0.0, Vec::new()), |b, (r, w)| if r > b.0 || r.is_nan() { (r, w) } else { b })
}

fn ratio_report(name: &str, grid: &str, rows: Vec<(f64, Vec<f64>)>) -> InequalityReport {
    let (worst_ratio, witness) = worst(rows);
    InequalityReport {
        name: name.into(),
        grid: grid.into(),
        worst_ratio,
        pass: worst_ratio <= 1.0 + RATIO_SLACK,
        witness,
        fitted_constant: None,
    }
}

/// `S_s(uv) ≤ 2 Σ_{m≤[s]} C([s],m)[S_{s−m}(u)S_m(v) + S_{s−m}(v)S_m(u)]`.
pub fn wiener_product_rhs(u: &FourierSeries, v: &FourierSeries, s: f64) -> f64 {
    let fl = s.floor() as u64;
    2.0 * (0..=fl)
        .map(|m| {
            let mf = m as f64;
            log_binomial(fl, m).exp() * (u.wiener(s - mf) * v.wiener(mf) + v.wiener(s - mf) * u.wiener(mf))
        })
        .sum::<f64>()
}

/// `P_s(uv) ≤ C̃ sup_{m≤[s]} C([s],m)[P_{s−m}(u)P_m(v) + P_{s−m}(v)P_m(u)]`.
pub fn modified_product_rhs(u: &FourierSeries, v: &FourierSeries, s: f64) -> f64 {
    let fl = s.floor() as u64;
    PRODUCT_CONSTANT
        * (0..=fl)
            .map(|m| {
                let mf = m as f64;
                log_binomial(fl, m).exp()
                    * (u.modified(s - mf) * v.modified(mf) + v.modified(s - mf) * u.modified(mf))
            })
            .fold(0.0, f64::max)
}

/// Both product estimates on `count` seeded random pairs.
pub fn check_products(count: usize, seed: u64) -> Result<(InequalityReport, InequalityReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wiener = Vec::new();
    let mut modified = Vec::new();
    for i in 0..count {
        let n = 1 + i % 2;
        let u = random_trig_poly(&mut rng, n, 20, 8, false);
        let v = random_trig_poly(&mut rng, n, 20, 8, false);
        let (uv, lost) = u.mul_truncated(&v, usize::MAX / 4)?;
        debug_assert_eq!(lost, 0.0);
        for &s in &PRODUCT_S {
            wiener.push((uv.wiener(s) / wiener_product_rhs(&u, &v, s), vec![i as f64, s]));
            modified.push((uv.modified(s) / modified_product_rhs(&u, &v, s), vec![i as f64, s]));
        }
    }
    let grid = format!("{count} seeded pairs, n <= 2, |k_j| <= 20, s in {PRODUCT_S:?}");
    Ok((
        ratio_report("wiener_product", &grid, wiener),
        ratio_report("modified_product", &grid, modified),
    ))
}

/// `P_s(∂^α u) ≤ P_{s+|α|}(u)` for `|α| ≤ 3`, and the lower sandwich
/// `Q_[s]`(grid) `≤ P_s(u)`.
pub fn check_derivative_and_sandwich(count: usize, seed: u64) -> Result<(InequalityReport, InequalityReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deriv = Vec::new();
    let mut sandwich = Vec::new();
    for i in 0..count {
        let n = 1 + i % 2;
        let u = random_trig_poly(&mut rng, n, 10, 6, false);
        for d in 0..=3usize {
            for alpha in MultiIndex::all_of_degree(n, d) {
                let du = u.derivative_multi(&alpha)?;
                for &s in &PRODUCT_S {
                    let lhs = du.modified(s);
                    let r = if lhs == 0.0 { 0.0 } else { lhs / u.modified(s + d as f64) };
                    deriv.push((r, vec![i as f64, d as f64, s]));
                }
            }
        }
        for &s in &PRODUCT_S {
            let q = sup_derivative_bound(&u, s.floor() as usize, QMode::Grid(64)).value;
            let p = u.modified(s);
            sandwich.push((if q == 0.0 { 0.0 } else { q / p }, vec![i as f64, s]));
        }
    }
    let grid = format!("{count} seeded polynomials, |alpha| <= 3, s in {PRODUCT_S:?}");
    Ok((
        ratio_report("derivative_norm", &grid, deriv),
        ratio_report("sandwich_lower", &grid, sandwich),
    ))
}

/// Exact `Σ` of multinomial weights against `(m−1)!/((m−|α|)!(|α|−1)!)`
/// for `n ≤ n_max`, `2 ≤ |α| ≤ m ≤ m_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub checked: usize,
    pub mismatches: Vec<(Vec<u32>, usize, u128, u128)>,
    pub pass: bool,
}

pub fn check_multinomial_identity(n_max: usize, m_max: usize) -> Result<IdentityReport> {
    let mut jobs = Vec::new();
    for n in 1..=n_max {
        for m in 2..=m_max {
            for len in 2..=m {
                jobs.extend(MultiIndex::all_of_degree(n, len).into_iter().map(|a| (a, m)));
            }
        }
    }
    let results = crate::par::try_map(&jobs, |(alpha, m)| {
        multinomial_weight_sum(alpha, *m).map(|got| (got, multinomial_closed_form(alpha.degree(), *m)))
    })?;
    let mismatches: Vec<_> = jobs
        .iter()
        .zip(&results)
        .filter(|(_, (got, want))| got != want)
        .map(|((a, m), (got, want))| (a.as_slice().to_vec(), *m, *got, *want))
        .collect();
    Ok(IdentityReport {
        name: "multinomial_identity".into(),
        checked: jobs.len(),
        pass: mismatches.is_empty(),
        mismatches,
    })
}

/// The Gamma/Beta suite: identity, Cauchy and lower Beta bounds, the
/// Gamma-ratio constant for `ν ∈ {1, 2}`, `δ = 1`, and the Stirling-type
/// constant for `ρ ∈ {1, 1.5, 2}`, `m ≤ 40`.
pub fn gamma_suite(seed: u64) -> Result<Vec<InequalityReport>> {
    let mut out = vec![
        special::check_gamma_beta_identity(500, seed, 1e-10)?,
        special::check_beta_cauchy(&special::CAUCHY_GRID),
        special::check_beta_lower(&special::log_grid(0.1, 20.0, 40)),
    ];
    for nu in [1.0, 2.0] {
        out.push(special::check_gamma_ratio(nu, 1.0, 0.25)?);
    }
    for rho in [1.0, 1.5, 2.0] {
        out.push(special::stirling_equiv(rho, 40)?);
    }
    Ok(out)
}

/// The Fourier-norm suite on seeded random polynomials.
pub fn wiener_suite(count: usize, seed: u64) -> Result<Vec<InequalityReport>> {
    let (hb, hr) = check_homological(count, seed)?;
    let (wp, mp) = check_products(2 * count, seed.wrapping_add(1))?;
    let (dn, sw) = check_derivative_and_sandwich(count, seed.wrapping_add(2))?;
    Ok(vec![hb, hr, wp, mp, dn, sw])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_polys_are_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = random_trig_poly(&mut rng, 2, 5, 4, true);
            assert!(p.is_real());
            assert_eq!(p.mean().norm(), 0.0);
        }
    }

    #[test]
    fn suites_pass() {
        for r in wiener_suite(30, 0).unwrap() {
            assert!(r.pass, "{r:?}");
        }
        for r in gamma_suite(0).unwrap() {
            assert!(r.pass, "{r:?}");
        }
        assert!(check_multinomial_identity(2, 7).unwrap().pass);
    }
}
