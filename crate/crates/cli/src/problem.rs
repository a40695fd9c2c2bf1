//! Problem files: the input Hamiltonian and run settings.

use serde::{Deserialize, Serialize};
use torus_bnf::bnf::HamiltonianSpec;
use torus_bnf::fourier::{DiophantineVector, FourierSeries};
use torus_bnf::gevrey::GevreyParams;
use torus_bnf::multi_index::MultiIndex;
use torus_bnf::series::TaylorFourier;
use torus_bnf::Error;

use crate::Failure;

fn default_rho() -> f64 {
    1.0
}

fn default_order() -> usize {
    3
}

fn default_horizon() -> usize {
    100
}

/// One coefficient `b_α(θ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub alpha: Vec<u32>,
    pub series: FourierSeries,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dim: usize,
    pub omega: Vec<f64>,
    pub tau: f64,
    /// Diophantine constant; estimated from `omega` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    pub terms: Vec<Term>,
    pub domain_radius: f64,
    #[serde(rename = "order_M", default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub seed: u64,
    /// Modes `0 < |k| ≤ kappa_horizon` scanned for resonances.
    #[serde(default = "default_horizon")]
    pub kappa_horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max_per_order: Option<usize>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| Failure::schema(format!("problem file: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::schema(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Validate and build the Hamiltonian.
    pub fn to_spec(&self) -> Result<HamiltonianSpec, Failure> {
        let n = self.dim;
        if n == 0 || self.omega.len() != n {
            return Err(Failure::schema(format!(
                "dim = {n} but omega has {} components",
                self.omega.len()
            )));
        }
        let mut top = 2;
        for t in &self.terms {
            if t.alpha.len() != n || t.series.dim() != n {
                return Err(Failure::schema(format!(
                    "term {:?} does not match dim = {n}",
                    t.alpha
                )));
            }
            let degree: u32 = t.alpha.iter().sum();
            if degree == 1 {
                return Err(Failure::schema(format!(
                    "term {:?} is linear; the linear part is fixed to <omega, r>",
                    t.alpha
                )));
            }
            if !t.series.is_real() {
                return Err(Failure::schema(format!("term {:?} is not a real series", t.alpha)));
            }
            top = top.max(degree as usize);
        }
        let omega = match self.kappa {
            Some(k) => DiophantineVector::new(self.omega.clone(), k, self.tau, self.kappa_horizon),
            None => DiophantineVector::empirical(self.omega.clone(), self.tau, self.kappa_horizon),
        }
        .map_err(Failure::from_core)?;
        let mut coeffs = TaylorFourier::new(n, 2, top);
        // H(θ, 0) is normalized to zero
        for t in self.terms.iter().filter(|t| t.alpha.iter().any(|&a| a > 0)) {
            coeffs
                .insert_term(MultiIndex::new(t.alpha.clone()), t.series.clone())
                .map_err(Failure::from_core)?;
        }
        let gevrey = GevreyParams::new(self.rho, self.tau, omega.kappa()).map_err(Failure::from_core)?;
        HamiltonianSpec::new(omega, coeffs, gevrey, self.domain_radius).map_err(Failure::from_core)
    }
}

/// `true` for errors that signal a resonant frequency vector.
pub fn is_resonance(e: &Error) -> bool {
    matches!(
        e,
        Error::ResonantMode { .. } | Error::ResonantFrequency { .. } | Error::DiophantineViolation { .. }
    )
}
