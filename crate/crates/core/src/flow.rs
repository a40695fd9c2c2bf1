//! Symplectic integration of Hamilton's equations for `H(θ, r)` in the
//! original coordinates, with energy and action-drift bookkeeping.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bnf::HamiltonianSpec;
use crate::error::{Error, Result};
use crate::jet::JetEvaluator;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    /// Angles in `[0, 2π)`.
    pub theta: Vec<f64>,
    pub r: Vec<f64>,
    pub t: f64,
}

impl FlowState {
    pub fn new(theta: Vec<f64>, r: Vec<f64>) -> Self {
        let mut s = FlowState { theta, r, t: 0.0 };
        s.wrap();
        s
    }

    fn wrap(&mut self) {
        for a in &mut self.theta {
            *a = a.rem_euclid(2.0 * PI);
            if *a >= 2.0 * PI {
                *a = 0.0;
            }
        }
    }
}

/// Gauss–Legendre collocation methods; all are symplectic and symmetric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// One stage, order 2.
    ImplicitMidpoint,
    /// Two stages, order 4.
    Gauss4,
    /// Three stages, order 6.
    Gauss6,
}

struct Tableau {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl Scheme {
    fn tableau(self) -> Tableau {
        match self {
            Scheme::ImplicitMidpoint => Tableau {
                a: vec![vec![0.5]],
                b: vec![1.0],
            },
            Scheme::Gauss4 => {
                let q = 3f64.sqrt() / 6.0;
                Tableau {
                    a: vec![vec![0.25, 0.25 - q], vec![0.25 + q, 0.25]],
                    b: vec![0.5, 0.5],
                }
            }
            Scheme::Gauss6 => {
                let q = 15f64.sqrt();
                Tableau {
                    a: vec![
                        vec![5.0 / 36.0, 2.0 / 9.0 - q / 15.0, 5.0 / 36.0 - q / 30.0],
                        vec![5.0 / 36.0 + q / 24.0, 2.0 / 9.0, 5.0 / 36.0 - q / 24.0],
                        vec![5.0 / 36.0 + q / 30.0, 2.0 / 9.0 + q / 15.0, 5.0 / 36.0],
                    ],
                    b: vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
                }
            }
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Scheme::ImplicitMidpoint => 2,
            Scheme::Gauss4 => 4,
            Scheme::Gauss6 => 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Stage-equation tolerance, relative to the stage size.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Keep every `sample_every`-th state in the summary (0 keeps none).
    pub sample_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 1e-2,
            scheme: Scheme::Gauss4,
            newton_tol: 1e-15,
            max_newton_iters: 50,
            sample_every: 0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.max_newton_iters == 0 {
            return Err(Error::InvalidParameter("max_newton_iters must be positive".into()));
        }
        Ok(())
    }
}

/// Hamilton's equations for one spec.
pub struct Flow<'a> {
    spec: &'a HamiltonianSpec,
    eval: JetEvaluator,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

impl<'a> Flow<'a> {
    pub fn new(spec: &'a HamiltonianSpec) -> Self {
        Flow {
            spec,
            eval: JetEvaluator::new(&spec.coeffs),
        }
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// `H(θ, r)`.
    pub fn energy(&self, theta: &[f64], r: &[f64]) -> f64 {
        let linear: f64 = self.spec.omega.omega().iter().zip(r).map(|(w, x)| w * x).sum();
        linear + self.eval.value(theta, r)
    }

    fn check_domain(&self, r: &[f64]) -> Result<()> {
        let norm = max_abs(r);
        if norm > self.spec.domain_radius || !norm.is_finite() {
            return Err(Error::DomainExceeded {
                norm,
                radius: self.spec.domain_radius,
            });
        }
        Ok(())
    }

    /// `(θ̇, ṙ) = (ω + ∂_r H̃, −∂_θ H̃)` into `out = [θ̇..., ṙ...]`.
    fn field_into(&self, z: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let (dth, dr) = out.split_at_mut(n);
        self.eval.gradient_into(&z[..n], &z[n..], dr, dth);
        for (j, w) in self.spec.omega.omega().iter().enumerate() {
            dth[j] += w;
            dr[j] = -dr[j];
        }
    }

    pub fn vector_field(&self, state: &FlowState) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        if state.theta.len() != n || state.r.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: state.r.len(),
            });
        }
        self.check_domain(&state.r)?;
        let z = [state.theta.clone(), state.r.clone()].concat();
        let mut out = vec![0.0; 2 * n];
        self.field_into(&z, &mut out);
        let r_dot = out.split_off(n);
        Ok((out, r_dot))
    }

    /// Jacobian of the vector field at `z`.
    fn field_jacobian(&self, z: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let jet = self.eval.jet(&z[..n], &z[n..], true);
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            // θ̇ = ∂H/∂r, ṙ = −∂H/∂θ
            if i < n {
                jet.hess(n + i, j)
            } else {
                -jet.hess(i - n, j)
            }
        })
    }

    /// One collocation step from `z`; `stages` holds the previous stage
    /// slopes on entry (used as the initial guess) and the new ones on exit.
    fn step(&self, z: &mut [f64], stages: &mut [Vec<f64>], tab: &Tableau, cfg: &IntegratorConfig) -> Result<()> {
        let w = z.len();
        let s = tab.b.len();
        let h = cfg.dt;
        let mut y = vec![0.0; w];
        let mut next = vec![vec![0.0; w]; s];
        let mut converged = false;
        let mut last_change = f64::INFINITY;
        for _ in 0..cfg.max_newton_iters {
            let mut change = 0.0f64;
            let mut scale = 1.0f64;
            for i in 0..s {
                for c in 0..w {
                    y[c] = z[c] + h * (0..s).map(|j| tab.a[i][j] * stages[j][c]).sum::<f64>();
                }
                self.field_into(&y, &mut next[i]);
                for c in 0..w {
                    change = change.max((next[i][c] - stages[i][c]).abs());
                    scale = scale.max(next[i][c].abs());
                }
            }
            for i in 0..s {
                stages[i].copy_from_slice(&next[i]);
            }
            if change <= cfg.newton_tol * scale || (change < 1e-12 * scale && change >= last_change) {
                converged = true;
                break;
            }
            if change > last_change && change > 1e-8 * scale {
                break;
            }
            last_change = change;
        }
        if !converged {
            self.newton_stages(z, stages, tab, cfg)?;
        }
        for c in 0..w {
            z[c] += h * (0..s).map(|i| tab.b[i] * stages[i][c]).sum::<f64>();
        }
        Ok(())
    }

    /// Newton iteration on `K_i − f(z + h Σ_j a_ij K_j) = 0`.
    fn newton_stages(&self, z: &[f64], stages: &mut [Vec<f64>], tab: &Tableau, cfg: &IntegratorConfig) -> Result<()> {
        let w = z.len();
        let s = tab.b.len();
        let h = cfg.dt;
        let mut residual = f64::INFINITY;
        for _ in 0..cfg.max_newton_iters {
            let prev = residual;
            let ys: Vec<Vec<f64>> = (0..s)
                .map(|i| {
                    (0..w)
                        .map(|c| z[c] + h * (0..s).map(|j| tab.a[i][j] * stages[j][c]).sum::<f64>())
                        .collect()
                })
                .collect();
            let mut f = DVector::zeros(s * w);
            let mut fy = vec![0.0; w];
            for i in 0..s {
                self.field_into(&ys[i], &mut fy);
                for c in 0..w {
                    f[i * w + c] = stages[i][c] - fy[c];
                }
            }
            residual = f.amax();
            let scale = 1.0 + max_abs(&stages.concat());
            if residual <= cfg.newton_tol * scale || (residual < 1e-12 * scale && residual >= prev) {
                return Ok(());
            }
            let jacs: Vec<DMatrix<f64>> = ys.iter().map(|y| self.field_jacobian(y)).collect();
            let big = DMatrix::from_fn(s * w, s * w, |r, c| {
                let (i, a) = (r / w, r % w);
                let (j, b) = (c / w, c % w);
                let id = if r == c { 1.0 } else { 0.0 };
                id - h * tab.a[i][j] * jacs[i][(a, b)]
            });
            let delta = big
                .lu()
                .solve(&f)
                .ok_or_else(|| Error::Degenerate("singular stage Jacobian".into()))?;
            for i in 0..s {
                for c in 0..w {
                    stages[i][c] -= delta[i * w + c];
                }
            }
        }
        Err(Error::NoConvergence {
            iterations: cfg.max_newton_iters,
            residual,
        })
    }
}

/// One stored point of a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    pub t: f64,
    pub theta: Vec<f64>,
    pub r: Vec<f64>,
    pub energy: f64,
    pub action_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub samples: Vec<FlowSample>,
    pub final_state: FlowState,
    pub steps: u64,
    /// `max_t max_j |r_j(t) − r_j(0)|`.
    pub max_action_drift: f64,
    /// `max_t |H(t) − H(0)| / |H(0)|`, absolute when `H(0) = 0`.
    pub max_energy_drift: f64,
    /// Set when the run stopped because `max_j |r_j| ≥` the escape level.
    pub escaped_at: Option<f64>,
}

impl TrajectorySummary {
    /// CSV with columns `t, θ…, r…, energy, |r−r0|`.
    pub fn to_csv(&self) -> String {
        let n = self.final_state.r.len();
        let mut head = vec!["t".to_string()];
        head.extend((1..=n).map(|j| format!("theta{j}")));
        head.extend((1..=n).map(|j| format!("r{j}")));
        head.push("energy".into());
        head.push("action_drift".into());
        let mut out = head.join(",") + "\n";
        for s in &self.samples {
            let mut row = vec![format!("{:?}", s.t)];
            row.extend(s.theta.iter().map(|x| format!("{x:?}")));
            row.extend(s.r.iter().map(|x| format!("{x:?}")));
            row.push(format!("{:?}", s.energy));
            row.push(format!("{:?}", s.action_drift));
            out += &(row.join(",") + "\n");
        }
        out
    }
}

fn integrate_until(
    spec: &HamiltonianSpec,
    state0: &FlowState,
    horizon: f64,
    escape_level: Option<f64>,
    config: &IntegratorConfig,
) -> Result<TrajectorySummary> {
    config.validate()?;
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let flow = Flow::new(spec);
    let n = flow.dim();
    if state0.theta.len() != n || state0.r.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: state0.r.len(),
        });
    }
    flow.check_domain(&state0.r)?;
    let tab = config.scheme.tableau();
    let mut z = [state0.theta.clone(), state0.r.clone()].concat();
    let mut f0 = vec![0.0; 2 * n];
    flow.field_into(&z, &mut f0);
    let mut stages = vec![f0; tab.b.len()];

    let e0 = flow.energy(&state0.theta, &state0.r);
    let e_scale = if e0 == 0.0 { 1.0 } else { e0.abs() };
    let total = (horizon / config.dt).round().max(1.0) as u64;
    let mut summary = TrajectorySummary {
        samples: Vec::new(),
        final_state: state0.clone(),
        steps: 0,
        max_action_drift: 0.0,
        max_energy_drift: 0.0,
        escaped_at: None,
    };
    let record = |summary: &mut TrajectorySummary, t: f64, z: &[f64], energy: f64, drift: f64| {
        let mut st = FlowState {
            theta: z[..n].to_vec(),
            r: z[n..].to_vec(),
            t,
        };
        st.wrap();
        summary.samples.push(FlowSample {
            t,
            theta: st.theta,
            r: st.r,
            energy,
            action_drift: drift,
        });
    };
    if config.sample_every > 0 {
        record(&mut summary, state0.t, &z, e0, 0.0);
    }
    for step in 1..=total {
        flow.step(&mut z, &mut stages, &tab, config)?;
        for a in &mut z[..n] {
            *a = a.rem_euclid(2.0 * PI);
        }
        let t = state0.t + step as f64 * config.dt;
        flow.check_domain(&z[n..])?;
        let energy = flow.energy(&z[..n], &z[n..]);
        let drift = z[n..]
            .iter()
            .zip(&state0.r)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        summary.max_action_drift = summary.max_action_drift.max(drift);
        summary.max_energy_drift = summary.max_energy_drift.max((energy - e0).abs() / e_scale);
        summary.steps = step;
        if config.sample_every > 0 && step % config.sample_every as u64 == 0 {
            record(&mut summary, t, &z, energy, drift);
        }
        if let Some(level) = escape_level {
            if max_abs(&z[n..]) >= level {
                summary.escaped_at = Some(t);
                break;
            }
        }
    }
    let mut fin = FlowState {
        theta: z[..n].to_vec(),
        r: z[n..].to_vec(),
        t: state0.t + summary.steps as f64 * config.dt,
    };
    fin.wrap();
    summary.final_state = fin;
    Ok(summary)
}

/// Integrate over `[0, horizon]`.
pub fn integrate(
    spec: &HamiltonianSpec,
    state0: &FlowState,
    horizon: f64,
    config: &IntegratorConfig,
) -> Result<TrajectorySummary> {
    integrate_until(spec, state0, horizon, None, config)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum EscapeOutcome {
    Escaped { time: f64 },
    ExceededCap { cap: f64 },
}

impl EscapeOutcome {
    /// Escape time, or the cap when none was observed.
    pub fn time(&self) -> f64 {
        match *self {
            EscapeOutcome::Escaped { time } => time,
            EscapeOutcome::ExceededCap { cap } => cap,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeReport {
    pub r0: f64,
    pub band_factor: f64,
    #[serde(flatten)]
    pub outcome: EscapeOutcome,
    pub max_energy_drift: f64,
    pub max_action_drift: f64,
    pub steps: u64,
}

/// First time `max_j |r_j(t)| ≥ band_factor · r0_norm`, starting from
/// `θ = 0`, `r = r0_norm·(1, …, 1)`.
pub fn escape_time(
    spec: &HamiltonianSpec,
    r0_norm: f64,
    band_factor: f64,
    t_cap: f64,
    config: &IntegratorConfig,
) -> Result<EscapeReport> {
    if !(band_factor > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "band factor must exceed 1, got {band_factor}"
        )));
    }
    if !(r0_norm >= 0.0) {
        return Err(Error::InvalidParameter(format!("r0 must be nonnegative, got {r0_norm}")));
    }
    let n = spec.dim();
    let state0 = FlowState::new(vec![0.0; n], vec![r0_norm; n]);
    let level = if r0_norm == 0.0 { None } else { Some(band_factor * r0_norm) };
    let summary = integrate_until(spec, &state0, t_cap, level, config)?;
    let outcome = match summary.escaped_at {
        Some(time) => EscapeOutcome::Escaped { time },
        None => EscapeOutcome::ExceededCap { cap: t_cap },
    };
    Ok(EscapeReport {
        r0: r0_norm,
        band_factor,
        outcome,
        max_energy_drift: summary.max_energy_drift,
        max_action_drift: summary.max_action_drift,
        steps: summary.steps,
    })
}

/// Escape reports for several initial radii, computed in parallel.
pub fn escape_sweep(
    spec: &HamiltonianSpec,
    radii: &[f64],
    band_factor: f64,
    t_cap: f64,
    config: &IntegratorConfig,
) -> Result<Vec<EscapeReport>> {
    crate::par::try_map(radii, |&r| escape_time(spec, r, band_factor, t_cap, config))
}
