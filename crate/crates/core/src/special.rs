//! Gamma and Beta functions in log space, plus numerical checks of the
//! Beta-function inequalities the Gevrey estimates rely on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "log_gamma needs x > 0, got {x}"
        )));
    }
    if x.fract() == 0.0 && x <= 21.0 {
        // exact factorial below 2^64
        let f: u64 = (1..x as u64).product();
        return Ok((f as f64).ln());
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// `ln B(x, y) = ln Γ(x) + ln Γ(y) − ln Γ(x+y)`.
pub fn log_beta(x: f64, y: f64) -> Result<f64> {
    Ok(log_gamma(x)? + log_gamma(y)? - log_gamma(x + y)?)
}

/// `B(x, y)`.
pub fn beta(x: f64, y: f64) -> Result<f64> {
    log_beta(x, y).map(f64::exp)
}

/// `ln C(n, k)` via `ln Γ`.
pub fn log_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let lg = statrs::function::gamma::ln_gamma;
    lg(n as f64 + 1.0) - lg(k as f64 + 1.0) - lg((n - k) as f64 + 1.0)
}

/// Worst case of an inequality `LHS ≤ RHS` over a sampling grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub grid: String,
    /// `max LHS/RHS` over the grid.
    pub worst_ratio: f64,
    pub pass: bool,
    /// Grid point attaining the worst ratio.
    pub witness: Vec<f64>,
    /// Smallest admissible constant, for the existence-type checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_constant: Option<f64>,
}

/// `Γ(x)Γ(y) = Γ(x+y)B(x,y)` on seeded random pairs in `(0, 60]²`, using
/// the direct Gamma function on the left. `worst_ratio` is `1 +` the largest
/// relative defect; passes when that defect is at most `tolerance`.
pub fn check_gamma_beta_identity(samples: usize, seed: u64, tolerance: f64) -> Result<InequalityReport> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let g = statrs::function::gamma::gamma;
    let mut rows = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x: f64 = rng.random_range(0.05..60.0);
        let y: f64 = rng.random_range(0.05..60.0);
        let lhs = g(x) * g(y);
        let rhs = g(x + y) * beta(x, y)?;
        rows.push(((lhs - rhs).abs() / lhs, vec![x, y]));
    }
    let (defect, witness) = worst(rows);
    Ok(InequalityReport {
        name: "gamma_beta_identity".into(),
        grid: format!("{samples} seeded pairs in (0, 60]^2"),
        worst_ratio: 1.0 + defect,
        pass: defect <= tolerance,
        witness,
        fitted_constant: None,
    })
}

/// Slack allowed on ratio-type checks.
pub const RATIO_SLACK: f64 = 1e-10;

impl InequalityReport {
    fn from_ratios(name: &str, grid: String, samples: Vec<(f64, Vec<f64>)>) -> Self {
        let (worst_ratio, witness) = worst(samples);
        InequalityReport {
            name: name.to_string(),
            grid,
            worst_ratio,
            pass: worst_ratio <= 1.0 + RATIO_SLACK,
            witness,
            fitted_constant: None,
        }
    }
}

fn worst(samples: Vec<(f64, Vec<f64>)>) -> (f64, Vec<f64>) {
    samples
        .into_iter()
        .fold((f64::NEG_INFINITY, Vec::new()), |best, (r, w)| {
            if r > best.0 || r.is_nan() {
                (r, w)
            } else {
                best
            }
        })
}

/// Grid used by [`check_beta_cauchy`].
pub const CAUCHY_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 5.0];

/// `B(a+b, c+d) ≤ B(2a, 2c)^{1/2} B(2b, 2d)^{1/2}` on `grid⁴`.
pub fn check_beta_cauchy(grid: &[f64]) -> InequalityReport {
    let mut points = Vec::new();
    for &a in grid {
        for &b in grid {
            for &c in grid {
                for &d in grid {
                    points.push([a, b, c, d]);
                }
            }
        }
    }
    let samples = par::map(&points, |&[a, b, c, d]| {
        let lhs = log_beta(a + b, c + d).unwrap_or(f64::NAN);
        let rhs = 0.5 * (log_beta(2.0 * a, 2.0 * c).unwrap_or(f64::NAN)
            + log_beta(2.0 * b, 2.0 * d).unwrap_or(f64::NAN));
        ((lhs - rhs).exp(), vec![a, b, c, d])
    });
    InequalityReport::from_ratios(
        "beta_cauchy",
        format!("a,b,c,d in {grid:?}"),
        samples,
    )
}

/// `n` log-spaced points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// `4^{-x-y} ≤ B(x, y)` on `grid²`.
pub fn check_beta_lower(grid: &[f64]) -> InequalityReport {
    let mut points = Vec::new();
    for &x in grid {
        for &y in grid {
            points.push((x, y));
        }
    }
    let samples = par::map(&points, |&(x, y)| {
        let lhs = -(x + y) * 4f64.ln();
        let rhs = log_beta(x, y).unwrap_or(f64::NAN);
        ((lhs - rhs).exp(), vec![x, y])
    });
    InequalityReport::from_ratios(
        "beta_lower",
        format!("x,y on {} points in [{}, {}]", grid.len(), grid[0], grid[grid.len() - 1]),
        samples,
    )
}

/// `ln LHS` of the Gamma-ratio inequality,
/// `ν ln C([x]+[y], [x]) + ln B(νx+δ, νy+δ)`.
fn gamma_ratio_lhs(nu: f64, delta: f64, x: f64, y: f64) -> f64 {
    let (fx, fy) = (x.floor() as u64, y.floor() as u64);
    nu * log_binomial(fx + fy, fx) + log_beta(nu * x + delta, nu * y + delta).unwrap_or(f64::NAN)
}

/// Smallest `C′(ν, δ)` with
/// `C([x]+[y], [x])^ν B(νx+δ, νy+δ) ≤ C′ / min(x+1, y+1)^{(ν+1)/2}`
/// over `x, y ∈ [0, extent]` sampled with spacing `step`.
pub fn gamma_ratio_constant(nu: f64, delta: f64, extent: f64, step: f64) -> (f64, Vec<f64>) {
    let count = (extent / step).round() as usize + 1;
    let pts: Vec<f64> = (0..count).map(|i| i as f64 * step).collect();
    let rows = par::map(&pts, |&x| {
        pts.iter()
            .map(|&y| {
                let lhs = gamma_ratio_lhs(nu, delta, x, y);
                let weight = 0.5 * (nu + 1.0) * (x + 1.0).min(y + 1.0).ln();
                ((lhs + weight).exp(), vec![x, y])
            })
            .collect::<Vec<_>>()
    });
    worst(rows.into_iter().flatten().collect())
}

/// Fit `C′(ν, δ)` on `[0, 30]²` at spacing `step`, then again at `step/2`;
/// passes if both are finite and agree within 5%.
pub fn check_gamma_ratio(nu: f64, delta: f64, step: f64) -> Result<InequalityReport> {
    if !(nu >= 1.0) || !(delta > 0.0) || !(step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need nu >= 1, delta > 0, step > 0; got nu={nu}, delta={delta}, step={step}"
        )));
    }
    let extent = 30.0;
    let (coarse, _) = gamma_ratio_constant(nu, delta, extent, step);
    let (fine, witness) = gamma_ratio_constant(nu, delta, extent, step / 2.0);
    let stable = coarse.is_finite() && fine.is_finite() && (fine - coarse).abs() <= 0.05 * fine;
    Ok(InequalityReport {
        name: format!("gamma_ratio(nu={nu}, delta={delta})"),
        grid: format!("x,y in [0, {extent}] step {step} and {}", step / 2.0),
        worst_ratio: fine / coarse,
        pass: stable,
        witness,
        fitted_constant: Some(fine),
    })
}

/// Smallest `C(ρ) ≥ 1` with `C^{-m} Γ(ρm+1) ≤ (m!)^ρ ≤ C^m Γ(ρm+1)` for
/// `1 ≤ m ≤ m_max`, with the witness `m`.
pub fn stirling_constant(rho: f64, m_max: usize) -> (f64, usize) {
    let lg = statrs::function::gamma::ln_gamma;
    let mut best = (0.0f64, 0usize);
    for m in 1..=m_max {
        let mf = m as f64;
        let gap = (rho * lg(mf + 1.0) - lg(rho * mf + 1.0)).abs() / mf;
        if gap > best.0 {
            best = (gap, m);
        }
    }
    (best.0.exp(), best.1)
}

/// Fit `C(ρ)` up to `m_max` and again up to `2·m_max`; passes if finite.
/// The relative change is reported as `worst_ratio`.
pub fn stirling_equiv(rho: f64, m_max: usize) -> Result<InequalityReport> {
    if !(rho > 0.0) || m_max == 0 {
        return Err(Error::InvalidParameter(format!(
            "need rho > 0 and m_max >= 1; got rho={rho}, m_max={m_max}"
        )));
    }
    let (c, witness) = stirling_constant(rho, m_max);
    let (c2, _) = stirling_constant(rho, 2 * m_max);
    Ok(InequalityReport {
        name: format!("stirling_equiv(rho={rho})"),
        grid: format!("m in 1..={m_max} (refit to {})", 2 * m_max),
        worst_ratio: c2 / c,
        pass: c.is_finite() && c2.is_finite(),
        witness: vec![witness as f64],
        fitted_constant: Some(c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_gamma_examples() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_relative_eq!(log_gamma(5.0).unwrap(), 24f64.ln(), max_relative = 1e-14);
        // minimum of Γ near 1.46 with value ≈ 0.8856
        assert_relative_eq!(log_gamma(1.46).unwrap().exp(), 0.8856, epsilon = 5e-4);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.0).is_err());
    }

    #[test]
    fn beta_examples() {
        assert_relative_eq!(beta(1.0, 1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(beta(2.0, 3.0).unwrap(), 1.0 / 12.0, max_relative = 1e-13);
        assert_relative_eq!(beta(0.3, 7.1).unwrap(), beta(7.1, 0.3).unwrap(), max_relative = 1e-14);
        assert!(beta(0.0, 1.0).is_err());
    }

    #[test]
    fn cauchy_examples() {
        let r = check_beta_cauchy(&[0.5]);
        assert_relative_eq!(r.worst_ratio, 1.0, max_relative = 1e-12);
        let r = check_beta_cauchy(&[1.0]);
        assert_relative_eq!(r.worst_ratio, 1.0, max_relative = 1e-12);
        assert!(check_beta_cauchy(&CAUCHY_GRID).pass);
    }

    #[test]
    fn beta_lower_examples() {
        // B(1,1) = 1 against 1/16
        assert_relative_eq!(check_beta_lower(&[1.0]).worst_ratio, 1.0 / 16.0, max_relative = 1e-12);
        // B(5,5) = 1/630 against 4^-10
        assert_relative_eq!(
            check_beta_lower(&[5.0]).worst_ratio,
            630.0 * 4f64.powi(-10),
            max_relative = 1e-12
        );
        assert!(check_beta_lower(&log_grid(0.1, 20.0, 40)).pass);
    }

    #[test]
    fn gamma_ratio_point_value() {
        // ν=1, δ=1 at x=y=1: 2·B(2,2)·2 = 2/3
        let (c, w) = gamma_ratio_constant(1.0, 1.0, 1.0, 1.0);
        let at_one = {
            let lhs = gamma_ratio_lhs(1.0, 1.0, 1.0, 1.0).exp();
            lhs * 2.0
        };
        assert_relative_eq!(at_one, 2.0 / 3.0, max_relative = 1e-13);
        assert!(c >= at_one);
        assert_eq!(w.len(), 2);
        // the corner x = y = 0 is finite
        assert!(gamma_ratio_lhs(1.0, 0.5, 0.0, 0.0).is_finite());
    }

    #[test]
    fn stirling_examples() {
        let (c, _) = stirling_constant(1.0, 40);
        assert_eq!(c, 1.0);
        // ρ = 2, m = 3: 36 / 720 = 0.05 sits inside [3^-3, 3^3]
        let lg = statrs::function::gamma::ln_gamma;
        let ratio = (2.0 * lg(4.0) - lg(7.0)).exp();
        assert_relative_eq!(ratio, 0.05, max_relative = 1e-12);
        assert!(ratio >= 3f64.powi(-3) && ratio <= 27.0);
        let r = stirling_equiv(1.5, 20).unwrap();
        assert!(r.pass);
        assert!(r.fitted_constant.unwrap() > 1.0);
    }

    #[test]
    fn gamma_beta_identity_report() {
        let r = check_gamma_beta_identity(200, 0, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn gamma_beta_identity_and_recursion() {
        for &(x, y) in &[(0.3, 0.7), (2.5, 11.0), (40.0, 3.25), (1.0, 1.0)] {
            let lhs = log_gamma(x).unwrap() + log_gamma(y).unwrap();
            let rhs = log_gamma(x + y).unwrap() + log_beta(x, y).unwrap();
            assert!(((lhs - rhs).exp() - 1.0).abs() < 1e-10);
            let rec = log_gamma(x + 1.0).unwrap() - x.ln() - log_gamma(x).unwrap();
            assert!(rec.abs() < 1e-12);
        }
    }
}
