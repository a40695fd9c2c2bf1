//! Order-by-order Birkhoff normal form near a Kronecker torus.
//!
//! For `H(θ, r) = ⟨ω, r⟩ + Σ_{|α|≥2} b_α(θ) r^α` the generating function
//! `g = Σ_{m≥2} g_m` is built degree by degree: `B_m` collects the degree-`m`
//! terms of `Σ_α b_α (I + ∂_θ g)^α`, `R_m = ⟨B_m⟩`, and `g_m` solves
//! `𝓛_ω g_m + B_m = R_m` with `⟨g_m⟩ = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{solve_homological, DiophantineVector, HomologicalConfig, DEFAULT_DROP_TOL};
use crate::gevrey::GevreyParams;
use crate::multi_index::MultiIndex;
use crate::par;
use crate::series::{HomogeneousPart, PowerCache, TaylorFourier};

/// A Hamiltonian in prepared coordinates near the torus `r = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub omega: DiophantineVector,
    /// `H̃ = Σ_{|α|≥2} b_α(θ) r^α`.
    pub coeffs: TaylorFourier,
    pub gevrey: GevreyParams,
    pub domain_radius: f64,
}

impl HamiltonianSpec {
    pub fn new(
        omega: DiophantineVector,
        coeffs: TaylorFourier,
        gevrey: GevreyParams,
        domain_radius: f64,
    ) -> Result<Self> {
        if coeffs.dim() != omega.dim() {
            return Err(Error::DimensionMismatch {
                expected: omega.dim(),
                found: coeffs.dim(),
            });
        }
        if coeffs.m_min() < 2 {
            return Err(Error::InvalidParameter(format!(
                "Hamiltonian perturbation must start at degree 2, window starts at {}",
                coeffs.m_min()
            )));
        }
        for (m, part) in coeffs.parts() {
            if !part.is_real() {
                return Err(Error::InvalidParameter(format!(
                    "degree-{m} coefficients are not real"
                )));
            }
        }
        if !(domain_radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "domain radius must be positive, got {domain_radius}"
            )));
        }
        Ok(HamiltonianSpec {
            omega,
            coeffs,
            gevrey,
            domain_radius,
        })
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    /// Largest `|k|` among the input coefficients (at least 1).
    pub fn input_mode_radius(&self) -> usize {
        self.coeffs
            .parts()
            .flat_map(|(_, p)| p.terms().map(|(_, s)| s.support_radius()))
            .max()
            .unwrap_or(0)
            .max(1)
    }

    /// `H(θ, r)`.
    pub fn hamiltonian(&self, theta: &[f64], r: &[f64]) -> f64 {
        let linear: f64 = self.omega.omega().iter().zip(r).map(|(w, x)| w * x).sum();
        linear + self.coeffs.eval(theta, r)
    }
}

/// Numerical settings of the recursion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnfConfig {
    pub homological: HomologicalConfig,
    /// Per-order cap on `|k|`; order `m` keeps modes up to
    /// `m · min(K_input, k_max_per_order)`.
    pub k_max_per_order: usize,
    pub drop_tol: f64,
    /// Keep `B_m`; `None` keeps them when `M < 8`.
    pub retain_b: Option<bool>,
}

impl Default for BnfConfig {
    fn default() -> Self {
        BnfConfig {
            homological: HomologicalConfig::default(),
            k_max_per_order: 64,
            drop_tol: DEFAULT_DROP_TOL,
            retain_b: None,
        }
    }
}

impl BnfConfig {
    fn mode_cap(&self, spec: &HamiltonianSpec, m: usize) -> usize {
        m * spec.input_mode_radius().min(self.k_max_per_order)
    }
}

/// A per-order log entry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderLog {
    pub order: usize,
    /// `∞` (written as `null`) when nothing was recorded at this order.
    #[serde(deserialize_with = "null_as_infinity")]
    pub value: f64,
}

fn null_as_infinity<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

/// Output of [`bnf_run`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnfResult {
    pub order: usize,
    /// `g_2 + … + g_M`.
    pub g: TaylorFourier,
    /// `R_2 + … + R_M`, every coefficient a constant series.
    pub normal_form: TaylorFourier,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub b_parts: Option<TaylorFourier>,
    /// Smallest `|⟨ω,k⟩|` met at each order.
    pub divisor_log: Vec<OrderLog>,
    /// Fourier mass dropped by truncated convolutions at each order.
    pub truncation_log: Vec<OrderLog>,
    /// Set when the recursion stopped early; the parts above are then partial.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub aborted: Option<String>,
}

impl BnfResult {
    /// Highest order actually computed.
    pub fn completed_order(&self) -> usize {
        self.divisor_log.last().map_or(1, |l| l.order)
    }

    /// `Σ_m R_m(I)`.
    pub fn normal_form_value(&self, actions: &[f64]) -> f64 {
        self.normal_form.eval(&vec![0.0; actions.len()], actions)
    }
}

/// Grade-`d` parts (`d = 1..m-1`) of `I_j + Σ_k ∂g_k/∂θ_j` for each axis.
fn correction_components(g_lower: &TaylorFourier, dim: usize, m: usize) -> Result<Vec<Vec<HomogeneousPart>>> {
    (0..dim)
        .map(|j| {
            let mut comp = vec![HomogeneousPart::action(dim, j)];
            for d in 2..m {
                let part = match g_lower.part(d) {
                    Some(p) => p.angle_derivative(j)?,
                    None => HomogeneousPart::zero(dim, d),
                };
                comp.push(part);
            }
            Ok(comp)
        })
        .collect()
}

/// `B_m` together with the Fourier mass discarded while forming it.
pub fn assemble_bm_logged(
    spec: &HamiltonianSpec,
    g_lower: &TaylorFourier,
    m: usize,
    config: &BnfConfig,
) -> Result<(HomogeneousPart, f64)> {
    let dim = spec.dim();
    if m < 2 {
        return Err(Error::InvalidParameter(format!("order must be >= 2, got {m}")));
    }
    if g_lower.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: g_lower.dim(),
        });
    }
    if m > 2 && (g_lower.m_max() < m - 1 || g_lower.m_min() > 2) {
        return Err(Error::MissingData(format!(
            "generating function covers degrees {}..={}, order {m} needs 2..={}",
            g_lower.m_min(),
            g_lower.m_max(),
            m - 1
        )));
    }
    let cap = config.mode_cap(spec, m);
    let components = correction_components(g_lower, dim, m)?;

    let terms: Vec<(MultiIndex, crate::fourier::FourierSeries)> = spec
        .coeffs
        .parts()
        .filter(|(d, _)| *d <= m)
        .flat_map(|(_, p)| p.terms().map(|(a, s)| (a.clone(), s.clone())))
        .collect();

    let mut cache = PowerCache::new(&components, m, cap)?;
    for (alpha, _) in &terms {
        cache.prepare(alpha)?;
    }
    let cache = &cache;
    let pieces = par::try_map(&terms, |(alpha, b)| -> Result<(HomogeneousPart, f64)> {
        let (a, mut lost) = cache.expand(alpha)?;
        let mut out = HomogeneousPart::zero(dim, m);
        for (gamma, c) in a.terms() {
            let (prod, l) = b.mul_truncated(c, cap)?;
            lost += l;
            if !prod.is_empty() {
                out.insert(gamma.clone(), prod)?;
            }
        }
        Ok((out, lost))
    })?;

    let mut bm = HomogeneousPart::zero(dim, m);
    let mut lost = cache.truncated_mass();
    for (piece, l) in pieces {
        bm.add_scaled(1.0, &piece)?;
        lost += l;
    }
    bm.prune(config.drop_tol);
    Ok((bm, lost))
}

/// `B_m = Σ_{2≤|α|≤m} b_α(θ) A_{α,m}(θ, I)`.
pub fn assemble_bm(
    spec: &HamiltonianSpec,
    g_lower: &TaylorFourier,
    m: usize,
    config: &BnfConfig,
) -> Result<HomogeneousPart> {
    assemble_bm_logged(spec, g_lower, m, config).map(|(b, _)| b)
}

/// One order of the recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutput {
    pub g_m: HomogeneousPart,
    pub r_m: HomogeneousPart,
    pub b_m: HomogeneousPart,
    pub min_divisor: f64,
    pub truncated_mass: f64,
}

/// Solve `𝓛_ω g_m + B_m = R_m`, `⟨g_m⟩ = 0`, at order `m`.
pub fn bnf_step(
    spec: &HamiltonianSpec,
    g_lower: &TaylorFourier,
    m: usize,
    config: &BnfConfig,
) -> Result<StepOutput> {
    let dim = spec.dim();
    let (b_m, truncated_mass) = assemble_bm_logged(spec, g_lower, m, config)?;
    let r_m = b_m.mean_part();

    let terms: Vec<_> = b_m.terms().collect();
    let solved = par::try_map(&terms, |(alpha, b)| {
        let rhs = b.without_mean().scale(-1.0);
        solve_homological(&rhs, &spec.omega, &config.homological)
            .map(|sol| ((*alpha).clone(), sol))
    })?;

    let mut g_m = HomogeneousPart::zero(dim, m);
    let mut min_divisor = f64::INFINITY;
    for (alpha, sol) in solved {
        min_divisor = min_divisor.min(sol.min_divisor);
        if !sol.u.is_empty() {
            g_m.insert(alpha, sol.u)?;
        }
    }
    Ok(StepOutput {
        g_m,
        r_m,
        b_m,
        min_divisor,
        truncated_mass,
    })
}

/// Run the recursion for `m = 2..=order`. A resonant divisor stops the run
/// and is reported through [`BnfResult::aborted`]; other errors propagate.
pub fn bnf_run(spec: &HamiltonianSpec, order: usize, config: &BnfConfig) -> Result<BnfResult> {
    if order < 2 {
        return Err(Error::InvalidParameter(format!("order must be >= 2, got {order}")));
    }
    let dim = spec.dim();
    let retain = config.retain_b.unwrap_or(order < 8);
    let mut result = BnfResult {
        order,
        g: TaylorFourier::new(dim, 2, order),
        normal_form: TaylorFourier::new(dim, 2, order),
        b_parts: retain.then(|| TaylorFourier::new(dim, 2, order)),
        divisor_log: Vec::new(),
        truncation_log: Vec::new(),
        aborted: None,
    };
    for m in 2..=order {
        let step = match bnf_step(spec, &result.g, m, config) {
            Ok(s) => s,
            Err(e @ Error::ResonantMode { .. }) => {
                result.aborted = Some(format!("order {m}: {e}"));
                return Ok(result);
            }
            Err(e) => return Err(e),
        };
        result.g.insert_part(step.g_m)?;
        result.normal_form.insert_part(step.r_m)?;
        if let Some(b) = result.b_parts.as_mut() {
            b.insert_part(step.b_m)?;
        }
        result.divisor_log.push(OrderLog {
            order: m,
            value: step.min_divisor,
        });
        result.truncation_log.push(OrderLog {
            order: m,
            value: step.truncated_mass,
        });
    }
    Ok(result)
}

/// `S_0` of the residual `𝓛_ω g_m[α] + B_m[α] − R_m[α]` and `S_0(B_m[α])`
/// for every `α` at order `m`.
pub fn homological_residuals(
    spec: &HamiltonianSpec,
    result: &BnfResult,
    m: usize,
) -> Result<Vec<(MultiIndex, f64, f64)>> {
    let dim = spec.dim();
    let b = result
        .b_parts
        .as_ref()
        .and_then(|b| b.part(m))
        .ok_or_else(|| Error::MissingData(format!("B_{m} not retained")))?;
    let empty = HomogeneousPart::zero(dim, m);
    let g = result.g.part(m).unwrap_or(&empty);
    let r = result.normal_form.part(m).unwrap_or(&empty);
    let lg = g.lie_derivative(spec.omega.omega())?;
    let mut out = Vec::new();
    for (alpha, bs) in b.terms() {
        let mut res = bs.clone();
        if let Some(x) = lg.get(alpha) {
            res.add_scaled(1.0, x)?;
        }
        if let Some(x) = r.get(alpha) {
            res.add_scaled(-1.0, x)?;
        }
        out.push((alpha.clone(), res.wiener(0.0), bs.wiener(0.0)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierSeries;
    use crate::presets;
    use approx::assert_relative_eq;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn assert_same(a: &HomogeneousPart, b: &HomogeneousPart) {
        let flat = |p: &HomogeneousPart| -> Vec<(MultiIndex, Vec<i32>, f64, f64)> {
            p.terms()
                .flat_map(|(a, s)| s.iter().map(move |(k, c)| (a.clone(), k.clone(), c.re, c.im + 0.0)))
                .collect()
        };
        assert_eq!(flat(a), flat(b));
    }

    #[test]
    fn b2_is_quadratic_part() {
        let spec = presets::golden2d();
        let empty = TaylorFourier::new(2, 2, 2);
        let b2 = assemble_bm(&spec, &empty, 2, &BnfConfig::default()).unwrap();
        let h2 = spec.coeffs.part(2).unwrap();
        assert_same(&b2, h2);
    }

    #[test]
    fn pendulum_b3_by_hand() {
        let (w0, eps) = (1.3, 0.4);
        let spec = presets::pendulum(w0, eps);
        let mut g = TaylorFourier::new(1, 2, 2);
        g.insert_term(mi(&[2]), FourierSeries::sin_mode(vec![1], -eps / (2.0 * w0))).unwrap();
        let b3 = assemble_bm(&spec, &g, 3, &BnfConfig::default()).unwrap();
        let c = b3.get(&mi(&[3])).unwrap();
        // −(ε/(2ω₀))(cos θ + ε cos²θ) = −(ε/(2ω₀))(ε/2 + cos θ + (ε/2) cos 2θ)
        let k = -eps / (2.0 * w0);
        assert_relative_eq!(c.coeff(&[0]).re, k * eps / 2.0, max_relative = 1e-14);
        assert_relative_eq!(c.coeff(&[1]).re, k / 2.0, max_relative = 1e-14);
        assert_relative_eq!(c.coeff(&[2]).re, k * eps / 4.0, max_relative = 1e-14);
        assert_eq!(c.len(), 5);
    }

    #[test]
    fn missing_lower_orders() {
        let spec = presets::pendulum(1.0, 0.5);
        let g = TaylorFourier::new(1, 2, 2);
        assert!(matches!(
            assemble_bm(&spec, &g, 4, &BnfConfig::default()),
            Err(Error::MissingData(_))
        ));
    }

    #[test]
    fn pendulum_steps() {
        let spec = presets::pendulum(1.0, 0.5);
        let res = bnf_run(&spec, 3, &BnfConfig::default()).unwrap();
        let r2 = res.normal_form.part(2).unwrap().get(&mi(&[2])).unwrap();
        assert_eq!(r2.coeff(&[0]).re, 0.5);
        let r3 = res.normal_form.part(3).unwrap().get(&mi(&[3])).unwrap();
        assert_relative_eq!(r3.coeff(&[0]).re, -0.0625, max_relative = 1e-14);
        let g2 = res.g.part(2).unwrap().get(&mi(&[2])).unwrap();
        assert_relative_eq!(g2.coeff(&[1]).im, 0.125, max_relative = 1e-14);
        assert!(res.aborted.is_none());
    }

    #[test]
    fn integrable_normal_form_is_input() {
        let spec = presets::integrable(2);
        let res = bnf_run(&spec, 5, &BnfConfig::default()).unwrap();
        assert!(res.g.is_zero());
        for (m, p) in spec.coeffs.parts() {
            assert_same(res.normal_form.part(m).unwrap(), p);
        }
        assert_eq!(res.divisor_log.len(), 4);
    }

    #[test]
    fn single_step_run() {
        let spec = presets::golden2d();
        let res = bnf_run(&spec, 2, &BnfConfig::default()).unwrap();
        assert_eq!(res.divisor_log.len(), 1);
        assert_eq!(res.completed_order(), 2);
    }

    #[test]
    fn b_retention_default() {
        let spec = presets::pendulum(1.0, 0.25);
        assert!(bnf_run(&spec, 7, &BnfConfig::default()).unwrap().b_parts.is_some());
        assert!(bnf_run(&spec, 8, &BnfConfig::default()).unwrap().b_parts.is_none());
        let keep = BnfConfig {
            retain_b: Some(true),
            ..BnfConfig::default()
        };
        assert!(bnf_run(&spec, 9, &keep).unwrap().b_parts.is_some());
    }

    #[test]
    fn resonance_aborts_with_partial_result() {
        // ⟨ω,k⟩ vanishes at k = (2,-1), which lies beyond the verified horizon
        // and appears in the B_3 support.
        let omega = DiophantineVector::new(vec![1.0, 2.0], 0.05, 1.5, 1).unwrap();
        let mut coeffs = TaylorFourier::new(2, 2, 3);
        coeffs.insert_term(mi(&[1, 1]), FourierSeries::cos_mode(vec![1, 0], 1.0)).unwrap();
        coeffs.insert_term(mi(&[2, 0]), FourierSeries::cos_mode(vec![1, -1], 1.0)).unwrap();
        let spec = HamiltonianSpec::new(omega, coeffs, GevreyParams::new(1.0, 1.5, 0.05).unwrap(), 0.1).unwrap();
        let res = bnf_run(&spec, 4, &BnfConfig::default()).unwrap();
        assert!(res.aborted.is_some(), "{res:?}");
        assert!(res.completed_order() < 4);
    }

    #[test]
    fn spec_validation() {
        let omega = DiophantineVector::new(vec![1.0], 1.0, 1.0, 10).unwrap();
        let mut coeffs = TaylorFourier::new(1, 1, 2);
        coeffs.insert_term(mi(&[1]), FourierSeries::cos_mode(vec![1], 1.0)).unwrap();
        let gev = GevreyParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(HamiltonianSpec::new(omega.clone(), coeffs, gev.clone(), 1.0).is_err());
        assert!(HamiltonianSpec::new(omega, TaylorFourier::new(1, 2, 2), gev, 0.0).is_err());
    }
}
