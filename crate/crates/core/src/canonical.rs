//! The canonical transformation `χ` generated by `g(θ, I)`:
//! `φ = θ + ∇_I g(θ, I)`, `y = I + ∇_θ g(θ, I)`, and the flatness residual
//! of the transformed Hamiltonian.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bnf::{BnfResult, HamiltonianSpec};
use crate::error::{Error, Result};
use crate::jet::JetEvaluator;
use crate::par;
use crate::series::TaylorFourier;

/// Iteration settings for the implicit equations of the map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Per-component residual tolerance.
    pub tolerance: f64,
    /// Contraction estimate above which Newton replaces fixed-point steps.
    pub newton_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 200,
            tolerance: 1e-12,
            newton_threshold: 0.5,
        }
    }
}

/// `χ` for a fixed generating function.
#[derive(Clone, Debug)]
pub struct CanonicalMap {
    g: TaylorFourier,
    eval: JetEvaluator,
    pub domain_radius: f64,
    pub solver: SolverConfig,
}

/// Wrap an angle difference into `(-π, π]`.
pub fn wrap_angle_diff(d: f64) -> f64 {
    let w = d.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

impl CanonicalMap {
    pub fn new(g: TaylorFourier, domain_radius: f64, solver: SolverConfig) -> Result<Self> {
        if !g.is_zero() && g.m_min() < 2 {
            return Err(Error::InvalidParameter(format!(
                "generating function must start at degree 2, starts at {}",
                g.m_min()
            )));
        }
        if !(domain_radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "domain radius must be positive, got {domain_radius}"
            )));
        }
        let eval = JetEvaluator::new(&g);
        Ok(CanonicalMap {
            g,
            eval,
            domain_radius,
            solver,
        })
    }

    /// The map generated by a normal-form result, on the spec's domain.
    pub fn from_result(spec: &HamiltonianSpec, result: &BnfResult) -> Result<Self> {
        Self::new(result.g.clone(), spec.domain_radius, SolverConfig::default())
    }

    pub fn generating_function(&self) -> &TaylorFourier {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    fn check_point(&self, a: &[f64], actions: &[f64]) -> Result<()> {
        let n = self.dim();
        for v in [a, actions] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        let norm = max_abs(actions);
        if norm > self.domain_radius {
            return Err(Error::DomainExceeded {
                norm,
                radius: self.domain_radius,
            });
        }
        Ok(())
    }

    /// `‖∂_θ ∇_I g(θ, I)‖_∞`, the contraction factor of the angle iteration.
    pub fn contraction_factor(&self, theta: &[f64], actions: &[f64]) -> f64 {
        let n = self.dim();
        let jet = self.eval.jet(theta, actions, true);
        (0..n)
            .map(|i| (0..n).map(|j| jet.hess(n + i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `θ` with `φ = θ + ∇_I g(θ, I)`.
    pub fn solve_angle(&self, phi: &[f64], actions: &[f64]) -> Result<Vec<f64>> {
        self.check_point(phi, actions)?;
        let n = self.dim();
        if self.eval.is_zero() || actions.iter().all(|&x| x == 0.0) {
            return Ok(phi.to_vec());
        }
        let cfg = self.solver;
        let mut theta = phi.to_vec();
        let mut residual = f64::INFINITY;
        let mut settled = 0;
        for _ in 0..cfg.max_iterations {
            let jet = self.eval.jet(&theta, actions, true);
            let f: Vec<f64> = (0..n).map(|i| theta[i] + jet.d_r[i] - phi[i]).collect();
            let prev = residual;
            residual = max_abs(&f.iter().map(|&x| wrap_angle_diff(x)).collect::<Vec<_>>());
            if residual <= cfg.tolerance {
                // polish to rounding level, stop once progress stalls
                settled += 1;
                if residual == 0.0 || residual >= prev || settled > 3 {
                    return Ok(theta);
                }
            }
            let contraction = (0..n)
                .map(|i| (0..n).map(|j| jet.hess(n + i, j).abs()).sum::<f64>())
                .fold(0.0, f64::max);
            if contraction <= cfg.newton_threshold {
                for i in 0..n {
                    theta[i] -= f[i];
                }
            } else {
                let jac = DMatrix::from_fn(n, n, |i, j| {
                    jet.hess(n + i, j) + if i == j { 1.0 } else { 0.0 }
                });
                let step = jac
                    .lu()
                    .solve(&DVector::from_vec(f))
                    .ok_or_else(|| Error::Degenerate("singular angle Jacobian".into()))?;
                for i in 0..n {
                    theta[i] -= step[i];
                }
            }
        }
        if residual <= cfg.tolerance {
            return Ok(theta);
        }
        Err(Error::NoConvergence {
            iterations: cfg.max_iterations,
            residual,
        })
    }

    /// `(x, y) = χ(φ, I)`: `x` solves the angle equation, `y = I + ∇_θ g(x, I)`.
    /// `x` is not wrapped, so it stays close to `φ`.
    pub fn apply_map(&self, phi: &[f64], actions: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let x = self.solve_angle(phi, actions)?;
        if self.eval.is_zero() {
            return Ok((x, actions.to_vec()));
        }
        let jet = self.eval.jet(&x, actions, false);
        let y = actions.iter().zip(&jet.d_theta).map(|(a, d)| a + d).collect();
        Ok((x, y))
    }

    /// Recover `(φ, I)` from `(x, y)`: `I` solves `y = I + ∇_θ g(x, I)`,
    /// then `φ = x + ∇_I g(x, I)`.
    pub fn inverse_map(&self, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        if self.eval.is_zero() {
            return Ok((x.to_vec(), y.to_vec()));
        }
        let cfg = self.solver;
        let mut actions = y.to_vec();
        let mut residual = f64::INFINITY;
        let mut polished = false;
        for _ in 0..cfg.max_iterations {
            self.check_point(x, &actions)?;
            let jet = self.eval.jet(x, &actions, true);
            let f: Vec<f64> = (0..n).map(|i| actions[i] + jet.d_theta[i] - y[i]).collect();
            residual = max_abs(&f);
            let converged = residual <= cfg.tolerance * (1.0 + max_abs(y));
            // one extra Newton step brings small actions to rounding level
            if converged && (polished || residual == 0.0) {
                let jet = self.eval.jet(x, &actions, false);
                let phi = x.iter().zip(&jet.d_r).map(|(a, d)| a + d).collect();
                return Ok((phi, actions));
            }
            let jac = DMatrix::from_fn(n, n, |i, j| {
                jet.hess(i, n + j) + if i == j { 1.0 } else { 0.0 }
            });
            let step = jac
                .lu()
                .solve(&DVector::from_vec(f))
                .ok_or_else(|| Error::Degenerate("singular action Jacobian".into()))?;
            for i in 0..n {
                actions[i] -= step[i];
            }
            polished = converged;
        }
        Err(Error::NoConvergence {
            iterations: cfg.max_iterations,
            residual,
        })
    }

    /// Central-difference Jacobian of `apply_map` at `(φ, I)`, rows and
    /// columns ordered `[angles, actions]`.
    pub fn jacobian(&self, phi: &[f64], actions: &[f64], h: f64) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut jac = DMatrix::zeros(2 * n, 2 * n);
        for c in 0..2 * n {
            let shifted = |sign: f64| -> Result<Vec<f64>> {
                let mut p = phi.to_vec();
                let mut a = actions.to_vec();
                if c < n {
                    p[c] += sign * h;
                } else {
                    a[c - n] += sign * h;
                }
                let (x, y) = self.apply_map(&p, &a)?;
                Ok([x, y].concat())
            };
            let (plus, minus) = (shifted(1.0)?, shifted(-1.0)?);
            for r in 0..2 * n {
                jac[(r, c)] = (plus[r] - minus[r]) / (2.0 * h);
            }
        }
        Ok(jac)
    }

    /// `max |JᵀΩJ − Ω|` at one point.
    pub fn symplectic_defect(&self, phi: &[f64], actions: &[f64], h: f64) -> Result<f64> {
        let n = self.dim();
        let j = self.jacobian(phi, actions, h)?;
        let mut omega = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            omega[(i, n + i)] = 1.0;
            omega[(n + i, i)] = -1.0;
        }
        let d = j.transpose() * &omega * &j - omega;
        Ok(d.amax())
    }
}

/// Random point `(φ, I)` with `max_j |I_j| = r`.
pub fn sample_point(rng: &mut impl Rng, dim: usize, r: f64) -> (Vec<f64>, Vec<f64>) {
    let phi: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let mut dir: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let pin = rng.random_range(0..dim);
    dir[pin] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let scale = max_abs(&dir);
    (phi, dir.iter().map(|d| r * d / scale).collect())
}

/// Symplecticity of the map on `samples` seeded points with `|I| = r`.
pub fn symplectic_check(map: &CanonicalMap, r: f64, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<_> = (0..samples).map(|_| sample_point(&mut rng, map.dim(), r)).collect();
    let defects = par::try_map(&pts, |(phi, a)| map.symplectic_defect(phi, a, 1e-6))?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

/// Largest `2^{-j}` (`j ≥ 1`, `2^{-j} ≤ upper`) at which the sampled angle
/// contraction factor stays below `0.9`.
pub fn default_domain_radius(g: &TaylorFourier, upper: f64, seed: u64) -> f64 {
    let eval = CanonicalMap::new(g.clone(), f64::INFINITY, SolverConfig::default())
        .expect("valid generating function");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = 0.5;
    while r > upper {
        r *= 0.5;
    }
    while r > 1e-12 {
        let worst = (0..64)
            .map(|_| {
                let (phi, a) = sample_point(&mut rng, g.dim(), r);
                eval.contraction_factor(&phi, &a)
            })
            .fold(0.0, f64::max);
        if worst < 0.9 {
            return r;
        }
        r *= 0.5;
    }
    r
}

/// `H(χ(φ, I)) − H⁰(I)` computed as
/// `⟨ω, ∇_θ g(x, I)⟩ + H̃(x, y) − Σ_m R_m(I)` to avoid cancelling the
/// linear terms.
pub struct FlatnessProbe<'a> {
    spec: &'a HamiltonianSpec,
    map: CanonicalMap,
    h_tilde: JetEvaluator,
    normal_form: JetEvaluator,
}

impl<'a> FlatnessProbe<'a> {
    pub fn new(spec: &'a HamiltonianSpec, result: &BnfResult) -> Result<Self> {
        Ok(FlatnessProbe {
            spec,
            map: CanonicalMap::from_result(spec, result)?,
            h_tilde: JetEvaluator::new(&spec.coeffs),
            normal_form: JetEvaluator::new(&result.normal_form),
        })
    }

    pub fn map(&self) -> &CanonicalMap {
        &self.map
    }

    pub fn residual(&self, phi: &[f64], actions: &[f64]) -> Result<f64> {
        let (x, y) = self.map.apply_map(phi, actions)?;
        let shift: f64 = self
            .spec
            .omega
            .omega()
            .iter()
            .zip(&y)
            .zip(actions)
            .map(|((w, yi), ai)| w * (yi - ai))
            .sum();
        let zero = vec![0.0; actions.len()];
        Ok(shift + self.h_tilde.value(&x, &y) - self.normal_form.value(&zero, actions))
    }
}

/// One row of a flatness scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessRow {
    pub r: f64,
    pub sup_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessScan {
    pub rows: Vec<FlatnessRow>,
    /// Least-squares slope of `ln sup_residual` against `ln r`; `None` when
    /// the map is the identity or fewer than two residuals are nonzero.
    pub fitted_slope: Option<f64>,
}

impl FlatnessScan {
    /// CSV with columns `r, sup_residual, fitted_slope`.
    pub fn to_csv(&self) -> String {
        let slope = self.fitted_slope.map_or(String::new(), |s| format!("{s:?}"));
        let mut out = String::from("r,sup_residual,fitted_slope\n");
        for row in &self.rows {
            out.push_str(&format!("{:?},{:?},{}\n", row.r, row.sup_residual, slope));
        }
        out
    }
}

/// `n` log-spaced radii from `lo` to `hi`.
pub fn log_radii(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    crate::special::log_grid(lo, hi, n)
}

/// Slope of the least-squares line through `(ln x, ln y)` over positive `y`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Sup of the flatness residual over `samples` seeded points at each radius.
pub fn flatness_scan(
    spec: &HamiltonianSpec,
    result: &BnfResult,
    radii: &[f64],
    samples: usize,
    seed: u64,
) -> Result<FlatnessScan> {
    let probe = FlatnessProbe::new(spec, result)?;
    for &r in radii {
        if !(r > 0.0) || r > spec.domain_radius {
            return Err(Error::DomainExceeded {
                norm: r,
                radius: spec.domain_radius,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<(f64, Vec<f64>, Vec<f64>)> = radii
        .iter()
        .flat_map(|&r| {
            (0..samples)
                .map(|_| {
                    let (phi, a) = sample_point(&mut rng, spec.dim(), r);
                    (r, phi, a)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let residuals = par::try_map(&points, |(_, phi, a)| probe.residual(phi, a))?;
    let rows: Vec<FlatnessRow> = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| FlatnessRow {
            r,
            sup_residual: residuals[i * samples..(i + 1) * samples]
                .iter()
                .fold(0.0, |m, x| m.max(x.abs())),
        })
        .collect();
    let fitted_slope = if result.g.is_zero() {
        None
    } else {
        loglog_slope(&rows.iter().map(|r| (r.r, r.sup_residual)).collect::<Vec<_>>())
    };
    Ok(FlatnessScan { rows, fitted_slope })
}
