//! Gevrey growth diagnostics for the computed normal form: norm profiles,
//! certified envelope constants, optimal truncation and the resulting
//! exponentially long stability horizon.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bnf::{BnfResult, HamiltonianSpec};
use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::par;
use crate::series::HomogeneousPart;
use crate::special::{log_binomial, log_gamma, InequalityReport, RATIO_SLACK};

/// Gevrey exponents and constants. `μ = ρ(τ+1)+1` is always derived.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GevreyParams {
    pub rho: f64,
    pub tau: f64,
    pub kappa: f64,
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    pub c1: f64,
    pub c2: f64,
    /// Probe a different `μ` than the derived one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_override: Option<f64>,
}

impl GevreyParams {
    /// Parameters with all constants set to 1.
    pub fn new(rho: f64, tau: f64, kappa: f64) -> Result<Self> {
        let p = GevreyParams {
            rho,
            tau,
            kappa,
            l0: 1.0,
            l1: 1.0,
            l2: 1.0,
            c1: 1.0,
            c2: 1.0,
            mu_override: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho >= 1.0) {
            return Err(Error::InvalidParameter(format!("rho must be >= 1, got {}", self.rho)));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidParameter(format!("tau must be > 0, got {}", self.tau)));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa must lie in (0, 1], got {}",
                self.kappa
            )));
        }
        if !(self.l0 >= 1.0 && self.l1 >= 1.0 && self.l2 >= 1.0) {
            return Err(Error::InvalidParameter("L0, L1, L2 must be >= 1".into()));
        }
        Ok(())
    }

    /// `μ = ρ(τ+1)+1` unless overridden.
    pub fn mu(&self) -> f64 {
        self.mu_override
            .unwrap_or(self.rho * (self.tau + 1.0) + 1.0)
    }

    pub fn with_constants(mut self, c1: f64, c2: f64) -> Self {
        self.c1 = c1;
        self.c2 = c2;
        self
    }

    /// `ln[C₁^s C₂^{m-1} Γ(ρs + (μ-1)(m-1) - ρ)]`.
    pub fn log_g_bound(&self, s: f64, m: usize) -> f64 {
        let arg = self.rho * s + (self.mu() - 1.0) * (m as f64 - 1.0) - self.rho;
        s * self.c1.ln() + (m as f64 - 1.0) * self.c2.ln() + log_gamma(arg).unwrap_or(f64::NAN)
    }

    /// `ln[C₁^s C₂^{m-2} Γ(ρs + (μ-1)(m-2))]` for `m ≥ 3`.
    pub fn log_b_bound(&self, s: f64, m: usize) -> f64 {
        let arg = self.rho * s + (self.mu() - 1.0) * (m as f64 - 2.0);
        s * self.c1.ln() + (m as f64 - 2.0) * self.c2.ln() + log_gamma(arg).unwrap_or(f64::NAN)
    }
}

/// `P_s` of one homogeneous part over an s-grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormProfile {
    pub order: usize,
    pub s_grid: Vec<f64>,
    /// `Σ_α P_s(c_α)`, an upper bound for `sup_{I ∈ 𝔻ⁿ} P_s(part(·, I))`.
    pub values: Vec<f64>,
    /// `max_α P_s(c_α)`, a lower reference.
    pub max_single: Vec<f64>,
}

/// Default smoothness grid for the diagnostics.
pub const DEFAULT_S_GRID: [f64; 6] = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];

pub fn norm_profile(part: &HomogeneousPart, s_grid: &[f64]) -> NormProfile {
    let values = s_grid
        .iter()
        .map(|&s| part.terms().map(|(_, c)| c.modified(s)).sum())
        .collect();
    let max_single = s_grid
        .iter()
        .map(|&s| part.terms().map(|(_, c)| c.modified(s)).fold(0.0, f64::max))
        .collect();
    NormProfile {
        order: part.degree(),
        s_grid: s_grid.to_vec(),
        values,
        max_single,
    }
}

/// Profiles of every stored part of a graded object.
pub fn profiles_of(parts: &crate::series::TaylorFourier, s_grid: &[f64]) -> Vec<NormProfile> {
    parts.parts().map(|(_, p)| norm_profile(p, s_grid)).collect()
}

/// Resolution of the envelope search: one grid step multiplies a constant by `2^{1/8}`.
pub const ENVELOPE_STEP: f64 = std::f64::consts::LN_2 / 8.0;
const ENVELOPE_STEPS: usize = 8 * 64;

/// Output of [`fit_constants`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedConstants {
    pub c1: f64,
    pub c2: f64,
    /// Unconstrained least-squares estimates of `(ln C₁, ln C₂)`.
    pub regression: (f64, f64),
    /// Profile entries re-checked against `(c1, c2)`.
    pub checked: usize,
    pub violations: usize,
    /// `max value / bound` over the checked entries.
    pub worst_ratio: f64,
    /// True when every profile entry was zero.
    pub vacuous: bool,
}

fn positive_entries(profiles: &[NormProfile]) -> Vec<(usize, f64, f64)> {
    profiles
        .iter()
        .flat_map(|p| {
            p.s_grid
                .iter()
                .zip(&p.values)
                .filter(|(_, &v)| v > 0.0)
                .map(move |(&s, &v)| (p.order, s, v))
        })
        .collect()
}

fn least_squares(rows: &[(f64, f64, f64)]) -> (f64, f64) {
    // y ≈ a·x1 + b·x2 (no intercept)
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x1, x2, y) in rows {
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        t1 += x1 * y;
        t2 += x2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() < 1e-300 {
        return (0.0, if s22 > 0.0 { t2 / s22 } else { 0.0 });
    }
    ((t1 * s22 - t2 * s12) / det, (s11 * t2 - s12 * t1) / det)
}

/// Smallest `(C₁, C₂)` on the `2^{j/8}` grid (`C ≥ 1`) for which
/// `P_s(g_m) ≤ C₁^s C₂^{m-1} Γ(ρs + (μ-1)(m-1) - ρ)` holds at every profile
/// entry. "Smallest" minimizes `ln C₁ + ln C₂`, ties going to the smaller
/// `C₁`.
pub fn fit_constants(profiles: &[NormProfile], params: &GevreyParams) -> Result<FittedConstants> {
    let orders: Vec<usize> = profiles.iter().map(|p| p.order).collect();
    if profiles.is_empty() || orders.iter().max().copied().unwrap_or(0) < 3 {
        return Err(Error::Degenerate("need profiles through order >= 3".into()));
    }
    if profiles.iter().any(|p| p.s_grid.len() < 2 || p.values.len() != p.s_grid.len()) {
        return Err(Error::Degenerate("need at least two s-grid points".into()));
    }
    if orders.iter().any(|&m| m < 2) {
        return Err(Error::InvalidParameter("profiles must have order >= 2".into()));
    }
    let entries = positive_entries(profiles);
    if entries.is_empty() {
        return Ok(FittedConstants {
            c1: 1.0,
            c2: 1.0,
            regression: (0.0, 0.0),
            checked: profiles.iter().map(|p| p.values.len()).sum(),
            violations: 0,
            worst_ratio: 0.0,
            vacuous: true,
        });
    }
    let base = params.clone().with_constants(1.0, 1.0);
    // residual after removing the Gamma factor
    let residuals: Vec<(f64, f64, f64)> = entries
        .iter()
        .map(|&(m, s, v)| (s, m as f64 - 1.0, v.ln() - base.log_g_bound(s, m)))
        .collect();
    let regression = least_squares(&residuals);

    let candidates = par::map_range(ENVELOPE_STEPS + 1, |j1| {
        let ln_c1 = j1 as f64 * ENVELOPE_STEP;
        let need = residuals
            .iter()
            .map(|&(s, mm, y)| (y - s * ln_c1) / mm)
            .fold(0.0f64, f64::max);
        let j2 = (need / ENVELOPE_STEP - 1e-9).ceil().max(0.0) as usize;
        (j1 + j2, j1, j2)
    });
    let (_, j1, j2) = candidates
        .into_iter()
        .min()
        .expect("nonempty candidate set");
    let c1 = (j1 as f64 * ENVELOPE_STEP).exp();
    let c2 = (j2 as f64 * ENVELOPE_STEP).exp();

    let fitted = params.clone().with_constants(c1, c2);
    let (checked, violations, worst_ratio) = check_g_envelope(profiles, &fitted);
    Ok(FittedConstants {
        c1,
        c2,
        regression,
        checked,
        violations,
        worst_ratio,
        vacuous: false,
    })
}

/// Count entries of `g` profiles violating the envelope with the constants
/// in `params`. Returns `(checked, violations, worst ratio)`.
pub fn check_g_envelope(profiles: &[NormProfile], params: &GevreyParams) -> (usize, usize, f64) {
    let mut checked = 0;
    let mut violations = 0;
    let mut worst = 0.0f64;
    for p in profiles {
        for (&s, &v) in p.s_grid.iter().zip(&p.values) {
            checked += 1;
            if v <= 0.0 {
                continue;
            }
            let ratio = (v.ln() - params.log_g_bound(s, p.order)).exp();
            worst = worst.max(ratio);
            if ratio > 1.0 + RATIO_SLACK {
                violations += 1;
            }
        }
    }
    (checked, violations, worst)
}

/// Smallest `B₀*` with `P_s(B_m) ≤ B₀* C₁^s C₂^{m-2} Γ(ρs + (μ-1)(m-2))`
/// over the `m ≥ 3` profiles, using the constants in `params`.
pub fn b_envelope_constant(profiles: &[NormProfile], params: &GevreyParams) -> f64 {
    profiles
        .iter()
        .filter(|p| p.order >= 3)
        .flat_map(|p| {
            p.s_grid
                .iter()
                .zip(&p.values)
                .filter(|(_, &v)| v > 0.0)
                .map(move |(&s, &v)| (v.ln() - params.log_b_bound(s, p.order)).exp())
        })
        .fold(0.0, f64::max)
}

fn truncation_exponent(i_norm: f64, params: &GevreyParams) -> Result<f64> {
    if !(i_norm > 0.0) || !(params.c2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need |I| > 0 and C2 > 0, got |I| = {i_norm}, C2 = {}",
            params.c2
        )));
    }
    Ok((params.c2 * i_norm).powf(-1.0 / (params.rho * (params.tau + 1.0))))
}

/// `m* = max(2, round((C₂|I|)^{-1/(ρ(τ+1))}))`; 2 when `C₂|I| ≥ 1`.
pub fn optimal_truncation(i_norm: f64, params: &GevreyParams) -> Result<usize> {
    let x = truncation_exponent(i_norm, params)?;
    if params.c2 * i_norm >= 1.0 {
        return Ok(2);
    }
    Ok((x.round() as usize).max(2))
}

/// `ln` of the exponentially small remainder estimate
/// `A C₁^{|α|} C₂^{|β|} (α!)^ρ (β!)^{μ-1} exp(-(C₂|I|)^{-1/(ρ(τ+1))})`,
/// with the exponent clamped below at 1.
pub fn log_remainder_bound(
    i_norm: f64,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    amplitude: f64,
    params: &GevreyParams,
) -> Result<f64> {
    if !(amplitude > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "amplitude must be positive, got {amplitude}"
        )));
    }
    let x = truncation_exponent(i_norm, params)?.max(1.0);
    let ln_fact = |a: &MultiIndex| -> f64 {
        a.as_slice()
            .iter()
            .map(|&k| log_gamma(k as f64 + 1.0).unwrap_or(0.0))
            .sum()
    };
    Ok(amplitude.ln()
        + alpha.degree() as f64 * params.c1.ln()
        + beta.degree() as f64 * params.c2.ln()
        + params.rho * ln_fact(alpha)
        + (params.mu() - 1.0) * ln_fact(beta)
        - x)
}

pub fn remainder_bound(
    i_norm: f64,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    amplitude: f64,
    params: &GevreyParams,
) -> Result<f64> {
    log_remainder_bound(i_norm, alpha, beta, amplitude, params).map(f64::exp)
}

/// Confinement horizon `T = exp((C₂|I|)^{-1/(ρ(τ+1))})`, kept in log form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityTime {
    /// `ln T`.
    pub ln_t: f64,
    pub log10_t: f64,
}

impl StabilityTime {
    /// `T` itself, `∞` on overflow.
    pub fn value(&self) -> f64 {
        self.ln_t.exp()
    }
}

pub fn stability_time_estimate(i_norm: f64, params: &GevreyParams) -> Result<StabilityTime> {
    let x = truncation_exponent(i_norm, params)?.max(1.0);
    Ok(StabilityTime {
        ln_t: x,
        log10_t: x / std::f64::consts::LN_10,
    })
}

/// One row of an optimal-truncation sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub radius: f64,
    pub m_star: usize,
    pub ln_remainder: f64,
    pub ln_stability_time: f64,
}

pub fn truncation_table(radii: &[f64], params: &GevreyParams) -> Result<Vec<TruncationRow>> {
    radii
        .iter()
        .map(|&r| {
            let zero = MultiIndex::zero(1);
            Ok(TruncationRow {
                radius: r,
                m_star: optimal_truncation(r, params)?,
                ln_remainder: log_remainder_bound(r, &zero, &zero, 1.0, params)?,
                ln_stability_time: stability_time_estimate(r, params)?.ln_t,
            })
        })
        .collect()
}

/// Spot checks of the product estimates behind the recursion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// `P_s(∂g_m/∂θ_j) ≤ P_{s+1}(g_m)`, constant 1.
    pub derivative: InequalityReport,
    /// Smallest `C₀ ≥ 1` making the product-of-derivatives estimate hold on
    /// every sample.
    pub c0: f64,
    /// Smallest `K₀ ≥ 1` for the estimate with an extra `b_α` factor.
    pub k0: f64,
    pub product_samples: usize,
    pub coefficient_samples: usize,
    pub pass: bool,
}

/// `Σ_α P_s(c_α)`.
fn majorant(part: &HomogeneousPart, s: f64) -> f64 {
    part.terms().map(|(_, c)| c.modified(s)).sum()
}

#[derive(Clone, Debug)]
struct ProductSample {
    orders: Vec<usize>,
    axes: Vec<usize>,
}

fn enumerate_products(dim: usize, top: usize, p: usize) -> Vec<ProductSample> {
    let mut out = vec![ProductSample {
        orders: Vec::new(),
        axes: Vec::new(),
    }];
    for _ in 0..p {
        let mut next = Vec::new();
        for smp in &out {
            let lo = smp.orders.last().copied().unwrap_or(2);
            for m in lo..=top {
                for j in 0..dim {
                    let mut s = smp.clone();
                    s.orders.push(m);
                    s.axes.push(j);
                    next.push(s);
                }
            }
        }
        out = next;
    }
    out
}

/// Check the derivative and product estimates on `g_2..g_{M-1}` of a
/// computed normal form, with `δ = μ − 2` and the constants in `params`.
/// At most `sample_budget` product tuples per length `p ∈ {1,2,3}` are
/// drawn (seeded).
pub fn verify_estimate_lemmas(
    spec: &HamiltonianSpec,
    result: &BnfResult,
    params: &GevreyParams,
    s_grid: &[f64],
    sample_budget: usize,
    seed: u64,
) -> Result<LemmaReport> {
    let top_order = result.completed_order();
    if top_order < 4 {
        return Err(Error::MissingData(format!(
            "need orders through M >= 4, have {top_order}"
        )));
    }
    let dim = spec.dim();
    let mu = params.mu();
    let delta = mu - 2.0;
    let exponent = 1.0 + delta - mu;
    let (rho, ln_c1, ln_c2) = (params.rho, params.c1.ln(), params.c2.ln());
    let top = top_order - 1;
    let empty = |m: usize| HomogeneousPart::zero(dim, m);

    // derivatives ∂g_m/∂θ_j, m = 2..top
    let mut dg: Vec<Vec<HomogeneousPart>> = Vec::new();
    for m in 2..=top {
        let g = result.g.part(m).cloned().unwrap_or_else(|| empty(m));
        dg.push((0..dim).map(|j| g.angle_derivative(j)).collect::<Result<_>>()?);
    }

    // p = 1: derivative inequality with constant 1
    let mut deriv_samples = Vec::new();
    for m in 2..=top {
        let g = result.g.part(m).cloned().unwrap_or_else(|| empty(m));
        for (j, d) in dg[m - 2].iter().enumerate() {
            for &s in s_grid {
                let lhs = majorant(d, s);
                let rhs = majorant(&g, s + 1.0);
                let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
                deriv_samples.push((ratio, vec![m as f64, j as f64, s]));
            }
        }
    }
    let (worst, witness) = deriv_samples
        .into_iter()
        .fold((0.0f64, Vec::new()), |b, (r, w)| if r > b.0 { (r, w) } else { b });
    let derivative = InequalityReport {
        name: "derivative_norm".into(),
        grid: format!("m in 2..={top}, all axes, s in {s_grid:?}"),
        worst_ratio: worst,
        pass: worst <= 1.0 + RATIO_SLACK,
        witness,
        fitted_constant: Some(1.0),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tuples = Vec::new();
    for p in 1..=3 {
        let mut all = enumerate_products(dim, top, p);
        if all.len() > sample_budget {
            all.shuffle(&mut rng);
            all.truncate(sample_budget);
        }
        tuples.extend(all);
    }
    let cap = usize::MAX / 4;
    let products: Vec<(ProductSample, HomogeneousPart)> = par::try_map(&tuples, |t| {
        let mut acc = dg[t.orders[0] - 2][t.axes[0]].clone();
        for (&m, &j) in t.orders.iter().zip(&t.axes).skip(1) {
            acc = acc.mul_truncated(&dg[m - 2][j], cap)?.0;
        }
        Ok::<_, Error>((t.clone(), acc))
    })?;

    let log_weight = |orders: &[usize]| -> (f64, f64) {
        let mp: f64 = orders.iter().map(|&m| m as f64 - 1.0).sum();
        let ln_multi = log_gamma(mp + 1.0).unwrap_or(0.0)
            - orders
                .iter()
                .map(|&m| log_gamma(m as f64).unwrap_or(0.0))
                .sum::<f64>();
        (mp, ln_multi)
    };

    // product estimate: LHS ≤ C₀^{p-1} C₁^{p+s} C₂^{M_p} (M_p!/Π(m_k-1)!)^{1+δ-μ} Γ(ρs+(μ-1)M_p)
    let mut ln_c0 = 0.0f64;
    let mut product_samples = 0;
    for (t, f) in &products {
        let p = t.orders.len();
        if p < 2 {
            continue;
        }
        let (mp, ln_multi) = log_weight(&t.orders);
        for &s in s_grid {
            let lhs = majorant(f, s);
            if lhs <= 0.0 {
                continue;
            }
            product_samples += 1;
            let ln_rhs = (p as f64 + s) * ln_c1
                + mp * ln_c2
                + exponent * ln_multi
                + log_gamma(rho * s + (mu - 1.0) * mp)?;
            ln_c0 = ln_c0.max((lhs.ln() - ln_rhs) / (p as f64 - 1.0));
        }
    }
    let c0 = ln_c0.exp();

    // with a coefficient factor b_α
    let b_terms: Vec<(MultiIndex, crate::fourier::FourierSeries)> = spec
        .coeffs
        .parts()
        .flat_map(|(_, p)| p.terms().map(|(a, s)| (a.clone(), s.clone())))
        .filter(|(a, _)| a.degree() >= 2)
        .collect();
    let mut ln_k0 = 0.0f64;
    let mut coefficient_samples = 0;
    for (t, f) in &products {
        let p = t.orders.len() as f64;
        let (mp, ln_multi) = log_weight(&t.orders);
        for (alpha, b) in &b_terms {
            let len = alpha.degree();
            let mut prod = HomogeneousPart::zero(dim, f.degree());
            for (gamma, c) in f.terms() {
                let (x, _) = b.mul_truncated(c, cap)?;
                if !x.is_empty() {
                    prod.insert(gamma.clone(), x)?;
                }
            }
            for &s in s_grid {
                let lhs = majorant(&prod, s);
                if lhs <= 0.0 {
                    continue;
                }
                coefficient_samples += 1;
                let ln_rhs = params.l0.ln()
                    + (len as f64 - 1.0) * ((mu - 1.0) + params.l2.ln())
                    + (p - 1.0) * ln_c0
                    + (p + s) * ln_c1
                    + mp * ln_c2
                    + log_gamma(rho * s + (mu - 1.0) * (mp + len as f64 - 2.0))?
                    + exponent * ln_multi
                    + exponent * log_binomial((mp as u64) + len as u64 - 2, len as u64 - 2);
                ln_k0 = ln_k0.max(lhs.ln() - ln_rhs);
            }
        }
    }
    let k0 = ln_k0.exp();
    let pass = derivative.pass && c0.is_finite() && k0.is_finite();
    Ok(LemmaReport {
        derivative,
        c0,
        k0,
        product_samples,
        coefficient_samples,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierSeries;
    use approx::assert_relative_eq;

    fn params(rho: f64, tau: f64, c1: f64, c2: f64) -> GevreyParams {
        GevreyParams::new(rho, tau, 1.0).unwrap().with_constants(c1, c2)
    }

    #[test]
    fn mu_is_derived() {
        let p = GevreyParams::new(2.0, 1.5, 0.5).unwrap();
        assert_eq!(p.mu(), 6.0);
        assert!(GevreyParams::new(0.5, 1.0, 1.0).is_err());
        assert!(GevreyParams::new(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn profile_examples() {
        let part = HomogeneousPart::monomial(MultiIndex::new(vec![2]), FourierSeries::sin_mode(vec![1], 1.0)).unwrap();
        let prof = norm_profile(&part, &[0.0, 1.0]);
        assert_eq!(prof.values[0], 1.0);
        assert_eq!(prof.values[1], 8.0);

        let zero = norm_profile(&HomogeneousPart::zero(1, 3), &[0.0, 2.0]);
        assert_eq!(zero.values, vec![0.0, 0.0]);

        let c = FourierSeries::axpby(0.25, &FourierSeries::sin_mode(vec![1], 1.0), 0.25 / 8.0, &FourierSeries::sin_mode(vec![2], 1.0)).unwrap();
        let part = HomogeneousPart::monomial(MultiIndex::new(vec![3]), c).unwrap();
        assert_relative_eq!(norm_profile(&part, &[0.0]).values[0], 9.0 / 32.0, max_relative = 1e-15);
    }

    #[test]
    fn optimal_truncation_examples() {
        assert_eq!(optimal_truncation(1e-6, &params(1.0, 1.0, 1.0, 100.0)).unwrap(), 100);
        assert_eq!(optimal_truncation(1.0, &params(1.0, 1.0, 1.0, 1.0)).unwrap(), 2);
        assert_eq!(optimal_truncation(1e-5, &params(2.0, 1.0, 1.0, 10.0)).unwrap(), 10);
        assert!(optimal_truncation(0.0, &params(1.0, 1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn remainder_examples() {
        let p = params(1.0, 1.0, 1.0, 100.0);
        let z = MultiIndex::zero(1);
        assert_relative_eq!(log_remainder_bound(1e-6, &z, &z, 1.0, &p).unwrap(), -100.0, max_relative = 1e-12);
        assert_relative_eq!(log_remainder_bound(1e-4, &z, &z, 1.0, &p).unwrap(), -10.0, max_relative = 1e-12);
        let p2 = params(1.0, 1.0, 2.0, 100.0);
        assert_relative_eq!(
            remainder_bound(1e-6, &MultiIndex::new(vec![1]), &z, 1.0, &p2).unwrap(),
            2.0 * (-100f64).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn stability_time_examples() {
        let p = params(1.0, 1.0, 1.0, 100.0);
        assert_relative_eq!(stability_time_estimate(1e-6, &p).unwrap().ln_t, 100.0, max_relative = 1e-12);
        assert_relative_eq!(stability_time_estimate(1e-4, &p).unwrap().ln_t, 10.0, max_relative = 1e-12);
        let t = stability_time_estimate(0.1, &p).unwrap();
        assert_eq!(t.ln_t, 1.0);
        assert_relative_eq!(t.value(), std::f64::consts::E);
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        let p = params(1.0, 1.0, 1.0, 1.0);
        assert!(fit_constants(&[], &p).is_err());
        let only2 = NormProfile {
            order: 2,
            s_grid: vec![0.0, 1.0],
            values: vec![1.0, 2.0],
            max_single: vec![1.0, 2.0],
        };
        assert!(fit_constants(&[only2], &p).is_err());
    }

    #[test]
    fn vacuous_fit() {
        let p = params(1.0, 1.0, 1.0, 1.0);
        let profs: Vec<_> = (2..=4)
            .map(|m| norm_profile(&HomogeneousPart::zero(1, m), &[0.0, 1.0, 2.0]))
            .collect();
        let fit = fit_constants(&profs, &p).unwrap();
        assert!(fit.vacuous);
        assert_eq!((fit.c1, fit.c2), (1.0, 1.0));
    }

    #[test]
    fn fit_certifies_synthetic_profiles() {
        // values generated from a known envelope with C1 = 3, C2 = 5
        let truth = params(1.0, 1.0, 3.0, 5.0);
        let s_grid = [0.0, 1.0, 2.0, 3.0];
        let profs: Vec<_> = (2..=6)
            .map(|m| NormProfile {
                order: m,
                s_grid: s_grid.to_vec(),
                values: s_grid.iter().map(|&s| 0.9 * truth.log_g_bound(s, m).exp()).collect(),
                max_single: vec![0.0; 4],
            })
            .collect();
        let fit = fit_constants(&profs, &params(1.0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(fit.violations, 0);
        assert!(fit.worst_ratio <= 1.0 + RATIO_SLACK);
        assert!(fit.c1.ln() + fit.c2.ln() <= 3f64.ln() + 5f64.ln() + 2.0 * ENVELOPE_STEP);
    }
}
