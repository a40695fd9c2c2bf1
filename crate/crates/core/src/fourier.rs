//! Finitely supported Fourier series on `𝕋ⁿ`, their weighted Wiener norms,
//! and the small-divisor solver for `𝓛_ω u = f`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;

/// Integer frequency vector `k ∈ ℤⁿ`.
pub type Mode = Vec<i32>;

/// Default truncation radius `K` in the `|k| = Σ|k_j|` norm.
pub const DEFAULT_MAX_MODE: usize = 64;
/// Amplitudes with modulus below this are not stored.
pub const DEFAULT_DROP_TOL: f64 = 1e-30;
/// Default sampling resolution per angle for grid estimates of `Q_p`.
pub const DEFAULT_GRID_RESOLUTION: usize = 256;

const HERMITIAN_REL_TOL: f64 = 1e-12;

/// `|k| = Σ |k_j|`.
pub fn mode_norm(k: &[i32]) -> usize {
    k.iter().map(|&x| x.unsigned_abs() as usize).sum()
}

fn negate(k: &[i32]) -> Mode {
    k.iter().map(|&x| -x).collect()
}

/// True for the representative of `{k, -k}` whose first nonzero entry is positive.
fn is_positive(k: &[i32]) -> bool {
    k.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

fn dot(k: &[i32], x: &[f64]) -> f64 {
    k.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum()
}

/// `u(θ) = Σ_k u_k e^{i⟨k,θ⟩}` with finite support inside `|k| ≤ max_mode`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries {
    dim: usize,
    coeffs: BTreeMap<Mode, Complex64>,
    max_mode: usize,
    real: bool,
}

impl FourierSeries {
    pub fn zero(dim: usize) -> Self {
        Self::zero_with(dim, DEFAULT_MAX_MODE, true)
    }

    pub fn zero_with(dim: usize, max_mode: usize, real: bool) -> Self {
        FourierSeries {
            dim,
            coeffs: BTreeMap::new(),
            max_mode,
            real,
        }
    }

    /// The constant function `c`.
    pub fn constant(dim: usize, c: f64) -> Self {
        let mut s = Self::zero(dim);
        if c.abs() >= DEFAULT_DROP_TOL {
            s.coeffs.insert(vec![0; dim], Complex64::new(c, 0.0));
        }
        s
    }

    /// Build from `(k, u_k)` pairs; repeated modes are summed. A series
    /// flagged `real` must be Hermitian, `u_{-k} = conj(u_k)`.
    pub fn from_modes<I>(dim: usize, max_mode: usize, real: bool, modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Mode, Complex64)>,
    {
        let mut coeffs: BTreeMap<Mode, Complex64> = BTreeMap::new();
        for (k, c) in modes {
            if k.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k.len(),
                });
            }
            if mode_norm(&k) > max_mode {
                return Err(Error::ModeOutOfRange { mode: k, max_mode });
            }
            *coeffs.entry(k).or_default() += c;
        }
        let mut s = FourierSeries {
            dim,
            coeffs,
            max_mode,
            real,
        };
        if real {
            s.check_hermitian()?;
            s.symmetrize();
        }
        s.prune(DEFAULT_DROP_TOL);
        Ok(s)
    }

    /// `amp · cos⟨k,θ⟩`.
    pub fn cos_mode(k: Mode, amp: f64) -> Self {
        Self::trig(k, Complex64::new(amp / 2.0, 0.0))
    }

    /// `amp · sin⟨k,θ⟩`.
    pub fn sin_mode(k: Mode, amp: f64) -> Self {
        Self::trig(k, Complex64::new(0.0, -amp / 2.0))
    }

    fn trig(k: Mode, c: Complex64) -> Self {
        let dim = k.len();
        let max_mode = DEFAULT_MAX_MODE.max(mode_norm(&k));
        let mut s = Self::zero_with(dim, max_mode, true);
        if k.iter().all(|&x| x == 0) {
            // cos 0 = 1, sin 0 = 0
            let v = 2.0 * c.re;
            if v != 0.0 {
                s.coeffs.insert(k, Complex64::new(v, 0.0));
            }
            return s;
        }
        let nk = negate(&k);
        s.coeffs.insert(k, c);
        s.coeffs.insert(nk, c.conj());
        s.prune(DEFAULT_DROP_TOL);
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `u_k`, zero if not stored.
    pub fn coeff(&self, k: &[i32]) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Stored modes in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &Complex64)> {
        self.coeffs.iter()
    }

    /// Largest `|k|` present in the support.
    pub fn support_radius(&self) -> usize {
        self.coeffs.keys().map(|k| mode_norm(k)).max().unwrap_or(0)
    }

    /// Change the truncation radius; modes beyond it are discarded and their
    /// absolute mass is returned.
    pub fn set_max_mode(&mut self, max_mode: usize) -> f64 {
        self.max_mode = max_mode;
        let mut lost = 0.0;
        self.coeffs.retain(|k, c| {
            let keep = mode_norm(k) <= max_mode;
            if !keep {
                lost += c.norm();
            }
            keep
        });
        lost
    }

    /// Drop amplitudes with modulus below `tol`.
    pub fn prune(&mut self, tol: f64) {
        self.coeffs.retain(|_, c| c.norm() >= tol);
    }

    /// Forget the reality flag (the values are kept).
    pub fn into_complex(mut self) -> Self {
        self.real = false;
        self
    }

    fn check_hermitian(&self) -> Result<()> {
        for (k, c) in &self.coeffs {
            let partner = self.coeff(&negate(k)).conj();
            let scale = c.norm() + partner.norm();
            if (c - partner).norm() > HERMITIAN_REL_TOL * scale + DEFAULT_DROP_TOL {
                return Err(Error::NotHermitian { mode: k.clone() });
            }
        }
        Ok(())
    }

    /// Make `u_{-k} = conj(u_k)` hold bit-exactly, using the positive
    /// representative of each pair as the master copy.
    fn symmetrize(&mut self) {
        let keys: Vec<Mode> = self.coeffs.keys().cloned().collect();
        for k in keys {
            if k.iter().all(|&x| x == 0) {
                if let Some(c) = self.coeffs.get_mut(&k) {
                    c.im = 0.0;
                }
            } else if is_positive(&k) || !self.coeffs.contains_key(&negate(&k)) {
                let c = self.coeffs[&k];
                self.coeffs.insert(negate(&k), c.conj());
            }
        }
    }

    fn check_dim(&self, other: &FourierSeries) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// Multiply every coefficient by `a`.
    pub fn scale(&self, a: f64) -> FourierSeries {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= a;
        }
        out.prune(DEFAULT_DROP_TOL);
        out
    }

    /// `a·u + b·v` with real scalars.
    pub fn axpby(a: f64, u: &FourierSeries, b: f64, v: &FourierSeries) -> Result<FourierSeries> {
        fs_linear_combine(Complex64::new(a, 0.0), u, Complex64::new(b, 0.0), v)
    }

    /// In-place `self += a·other`.
    pub fn add_scaled(&mut self, a: f64, other: &FourierSeries) -> Result<()> {
        self.check_dim(other)?;
        self.max_mode = self.max_mode.max(other.max_mode);
        self.real &= other.real;
        for (k, c) in &other.coeffs {
            *self.coeffs.entry(k.clone()).or_default() += c * a;
        }
        self.prune(DEFAULT_DROP_TOL);
        Ok(())
    }

    /// Convolution product truncated to `|k| ≤ max_mode`. Returns the product
    /// and the total absolute mass `Σ |u_l||v_j|` of the discarded pairs.
    pub fn mul_truncated(&self, other: &FourierSeries, max_mode: usize) -> Result<(FourierSeries, f64)> {
        self.check_dim(other)?;
        let real = self.real && other.real;
        let mut coeffs: BTreeMap<Mode, Complex64> = BTreeMap::new();
        let mut discarded = 0.0;
        let mut k = vec![0i32; self.dim];
        for (l, a) in &self.coeffs {
            for (j, b) in &other.coeffs {
                let mut norm = 0usize;
                for d in 0..self.dim {
                    k[d] = l[d] + j[d];
                    norm += k[d].unsigned_abs() as usize;
                }
                if norm > max_mode {
                    discarded += a.norm() * b.norm();
                    continue;
                }
                if real && !k.iter().all(|&x| x == 0) && !is_positive(&k) {
                    // filled from the conjugate partner below
                    continue;
                }
                *coeffs.entry(k.clone()).or_default() += a * b;
            }
        }
        let mut out = FourierSeries {
            dim: self.dim,
            coeffs,
            max_mode,
            real,
        };
        if real {
            out.symmetrize();
        }
        out.prune(DEFAULT_DROP_TOL);
        Ok((out, discarded))
    }

    /// `∂u/∂θ_axis` (zero-based axis).
    pub fn derivative(&self, axis: usize) -> Result<FourierSeries> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        let mut out = FourierSeries::zero_with(self.dim, self.max_mode, self.real);
        for (k, c) in &self.coeffs {
            if k[axis] != 0 {
                out.coeffs
                    .insert(k.clone(), c * Complex64::new(0.0, k[axis] as f64));
            }
        }
        Ok(out)
    }

    /// `∂^α u`.
    pub fn derivative_multi(&self, alpha: &MultiIndex) -> Result<FourierSeries> {
        if alpha.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: alpha.dim(),
            });
        }
        let mut out = FourierSeries::zero_with(self.dim, self.max_mode, self.real);
        for (k, c) in &self.coeffs {
            let factor = ik_power(k, alpha);
            if factor != Complex64::default() {
                out.coeffs.insert(k.clone(), c * factor);
            }
        }
        Ok(out)
    }

    /// `𝓛_ω u = Σ_j ω_j ∂u/∂θ_j`.
    pub fn lie_derivative(&self, omega: &[f64]) -> Result<FourierSeries> {
        if omega.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: omega.len(),
            });
        }
        let mut out = FourierSeries::zero_with(self.dim, self.max_mode, self.real);
        for (k, c) in &self.coeffs {
            let d = dot(k, omega);
            if d != 0.0 {
                out.coeffs.insert(k.clone(), c * Complex64::new(0.0, d));
            }
        }
        Ok(out)
    }

    /// The mean value `u_0`.
    pub fn mean(&self) -> Complex64 {
        self.coeff(&vec![0; self.dim])
    }

    /// Copy of `u` with the mean removed.
    pub fn without_mean(&self) -> FourierSeries {
        let mut out = self.clone();
        out.coeffs.remove(&vec![0; self.dim]);
        out
    }

    /// `u(θ)` (complex in general).
    pub fn eval(&self, theta: &[f64]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(k, c)| c * Complex64::from_polar(1.0, dot(k, theta)))
            .sum()
    }

    /// `Re u(θ)`.
    pub fn eval_re(&self, theta: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| {
                let (s, co) = dot(k, theta).sin_cos();
                c.re * co - c.im * s
            })
            .sum()
    }

    /// `S_s(u) = Σ (1+|k|)^s |u_k|`.
    pub fn wiener(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| (1.0 + mode_norm(k) as f64).powf(s) * c.norm())
            .sum()
    }

    /// `P_s(u) = (s+1)² S_s(u)`.
    pub fn modified(&self, s: f64) -> f64 {
        (s + 1.0).powi(2) * self.wiener(s)
    }
}

fn ik_power(k: &[i32], alpha: &MultiIndex) -> Complex64 {
    let mut factor = Complex64::new(1.0, 0.0);
    for (j, &a) in alpha.as_slice().iter().enumerate() {
        for _ in 0..a {
            factor *= Complex64::new(0.0, k[j] as f64);
        }
    }
    factor
}

/// Which norm a [`NormValue`] carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    /// Weighted Wiener norm `S_s`.
    S,
    /// Modified norm `P_s = (s+1)² S_s`.
    P,
    /// Rigorous Fourier-side upper bound of `Q_p`.
    QUpper,
    /// Sampled lower estimate of `Q_p`.
    QGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub s: f64,
    pub value: f64,
    pub kind: NormKind,
}

/// How [`sup_derivative_bound`] estimates `Q_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QMode {
    Upper,
    /// Uniform grid with the given number of points per angle.
    Grid(usize),
}

/// `a·u + b·v`. The result is real when both inputs are and `a, b` are real.
pub fn fs_linear_combine(
    a: Complex64,
    u: &FourierSeries,
    b: Complex64,
    v: &FourierSeries,
) -> Result<FourierSeries> {
    u.check_dim(v)?;
    let real = u.real && v.real && a.im == 0.0 && b.im == 0.0;
    let mut coeffs: BTreeMap<Mode, Complex64> = BTreeMap::new();
    for (k, c) in &u.coeffs {
        *coeffs.entry(k.clone()).or_default() += a * c;
    }
    for (k, c) in &v.coeffs {
        *coeffs.entry(k.clone()).or_default() += b * c;
    }
    let mut out = FourierSeries {
        dim: u.dim,
        coeffs,
        max_mode: u.max_mode.max(v.max_mode),
        real,
    };
    out.prune(DEFAULT_DROP_TOL);
    Ok(out)
}

/// Truncated convolution `(uv)_k = Σ_l u_l v_{k-l}` at the larger of the two
/// truncation radii. Returns the product and the discarded absolute mass.
pub fn fs_product(u: &FourierSeries, v: &FourierSeries) -> Result<(FourierSeries, f64)> {
    u.mul_truncated(v, u.max_mode.max(v.max_mode))
}

/// `∂u/∂θ_axis` with a zero-based axis.
pub fn fs_derivative(u: &FourierSeries, axis: usize) -> Result<FourierSeries> {
    u.derivative(axis)
}

pub fn fs_mean(u: &FourierSeries) -> Complex64 {
    u.mean()
}

pub fn wiener_norm(u: &FourierSeries, s: f64) -> Result<NormValue> {
    if !(s >= 0.0) {
        return Err(Error::NegativeSmoothness(s));
    }
    Ok(NormValue {
        s,
        value: u.wiener(s),
        kind: NormKind::S,
    })
}

pub fn modified_norm(u: &FourierSeries, s: f64) -> Result<NormValue> {
    if !(s >= 0.0) {
        return Err(Error::NegativeSmoothness(s));
    }
    Ok(NormValue {
        s,
        value: u.modified(s),
        kind: NormKind::P,
    })
}

/// Estimates of `Q_p(u) = sup_{|α|=p} sup_θ |∂^α u(θ)|`.
///
/// `Upper` returns `sup_{|α|=p} Σ_k |k^α||u_k|`, which dominates `Q_p`.
/// `Grid(r)` samples `|∂^α u|` on an `rⁿ` uniform grid, which is dominated by it.
pub fn sup_derivative_bound(u: &FourierSeries, p: usize, mode: QMode) -> NormValue {
    let alphas = MultiIndex::all_of_degree(u.dim, p);
    let value = match mode {
        QMode::Upper => alphas
            .iter()
            .map(|alpha| {
                u.iter()
                    .map(|(k, c)| ik_power(k, alpha).norm() * c.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max),
        QMode::Grid(resolution) => {
            let resolution = resolution.max(1);
            let total = resolution.pow(u.dim as u32);
            let step = std::f64::consts::TAU / resolution as f64;
            let mut best: f64 = 0.0;
            for alpha in &alphas {
                let d = match u.derivative_multi(alpha) {
                    Ok(d) => d,
                    Err(_) => continue,
                };
                let terms: Vec<(Vec<f64>, Complex64)> = d
                    .iter()
                    .map(|(k, c)| (k.iter().map(|&x| x as f64).collect(), *c))
                    .collect();
                let mut theta = vec![0.0; u.dim];
                for idx in 0..total {
                    let mut rem = idx;
                    for t in theta.iter_mut() {
                        *t = (rem % resolution) as f64 * step;
                        rem /= resolution;
                    }
                    let val: Complex64 = terms
                        .iter()
                        .map(|(k, c)| {
                            let phase: f64 = k.iter().zip(&theta).map(|(a, b)| a * b).sum();
                            c * Complex64::from_polar(1.0, phase)
                        })
                        .sum();
                    best = best.max(val.norm());
                }
            }
            best
        }
    };
    NormValue {
        s: p as f64,
        value,
        kind: match mode {
            QMode::Upper => NormKind::QUpper,
            QMode::Grid(_) => NormKind::QGrid,
        },
    }
}

/// A frequency vector `ω` satisfying `|⟨ω,k⟩| ≥ κ|k|^{-τ}` for all
/// `0 < |k| ≤ verified_horizon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineVector {
    omega: Vec<f64>,
    kappa: f64,
    tau: f64,
    verified_horizon: usize,
}

/// Divisors smaller than this are treated as exact resonances.
pub const RESONANCE_FLOOR: f64 = 1e-14;

impl DiophantineVector {
    /// Check the Diophantine inequality with the given constants up to `horizon`.
    pub fn new(omega: Vec<f64>, kappa: f64, tau: f64, horizon: usize) -> Result<Self> {
        let n = omega.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty frequency vector".into()));
        }
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa must lie in (0, 1], got {kappa}"
            )));
        }
        if !(tau > n as f64 - 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tau must exceed n - 1 = {}, got {tau}",
                n - 1
            )));
        }
        let mut violation = None;
        for_each_half_mode(n, horizon, |k| {
            if violation.is_some() {
                return;
            }
            let d = dot(k, &omega).abs();
            let bound = kappa * (mode_norm(k) as f64).powf(-tau);
            if d < bound {
                violation = Some((k.to_vec(), d, bound));
            }
        });
        if let Some((mode, divisor, bound)) = violation {
            return Err(Error::DiophantineViolation {
                mode,
                divisor,
                bound,
            });
        }
        Ok(DiophantineVector {
            omega,
            kappa,
            tau,
            verified_horizon: horizon,
        })
    }

    /// Use `κ = min(κ̂, 1)` with `κ̂` from [`dioph_empirical_kappa`].
    pub fn empirical(omega: Vec<f64>, tau: f64, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        let est = empirical_kappa(&omega, tau, horizon)?;
        if est.kappa < RESONANCE_FLOOR {
            return Err(Error::ResonantFrequency {
                mode: est.argmin,
                horizon,
            });
        }
        Self::new(omega, est.kappa.min(1.0), tau, horizon)
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn verified_horizon(&self) -> usize {
        self.verified_horizon
    }

    /// `⟨ω,k⟩`.
    pub fn divisor(&self, k: &[i32]) -> f64 {
        dot(k, &self.omega)
    }
}

/// Visit one representative of every pair `±k` with `0 < |k| ≤ radius`.
pub(crate) fn for_each_half_mode<F: FnMut(&[i32])>(dim: usize, radius: usize, mut f: F) {
    let mut k = vec![0i32; dim];
    walk_ball(&mut k, 0, radius as i64, &mut |k: &[i32]| {
        if is_positive(k) {
            f(k)
        }
    });
}

fn walk_ball<F: FnMut(&[i32])>(k: &mut Vec<i32>, axis: usize, budget: i64, f: &mut F) {
    if axis == k.len() {
        f(k);
        return;
    }
    for v in -budget..=budget {
        k[axis] = v as i32;
        walk_ball(k, axis + 1, budget - v.abs(), f);
    }
    k[axis] = 0;
}

/// Outcome of a finite Diophantine scan.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaEstimate {
    /// `min_{0<|k|≤K} |⟨ω,k⟩| |k|^τ`.
    pub kappa: f64,
    /// A mode attaining the minimum (positive representative).
    pub argmin: Mode,
}

/// Finite-horizon Diophantine scan. Ties are broken towards the
/// lexicographically smallest positive representative of smallest `|k|`.
pub fn empirical_kappa(omega: &[f64], tau: f64, horizon: usize) -> Result<KappaEstimate> {
    let n = omega.len();
    if n == 0 || horizon == 0 {
        return Err(Error::InvalidParameter(
            "need a nonempty frequency vector and horizon >= 1".into(),
        ));
    }
    if !(tau >= n as f64 - 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must be at least n - 1 = {}, got {tau}",
            n - 1
        )));
    }
    let mut best = KappaEstimate {
        kappa: f64::INFINITY,
        argmin: Vec::new(),
    };
    for_each_half_mode(n, horizon, |k| {
        let v = dot(k, omega).abs() * (mode_norm(k) as f64).powf(tau);
        let better = v < best.kappa
            || (v == best.kappa
                && (mode_norm(k), k) < (mode_norm(&best.argmin), best.argmin.as_slice()));
        if better {
            best = KappaEstimate {
                kappa: v,
                argmin: k.to_vec(),
            };
        }
    });
    Ok(best)
}

/// `min_{0<|k|≤K} |⟨ω,k⟩| |k|^τ`; zero flags an exact resonance.
pub fn dioph_empirical_kappa(omega: &[f64], tau: f64, horizon: usize) -> Result<f64> {
    empirical_kappa(omega, tau, horizon).map(|e| e.kappa)
}

/// The same minimum restricted to the nonzero support of `f`.
pub fn kappa_over_support(omega: &[f64], tau: f64, f: &FourierSeries) -> f64 {
    f.iter()
        .filter(|(k, _)| k.iter().any(|&x| x != 0))
        .map(|(k, _)| dot(k, omega).abs() * (mode_norm(k) as f64).powf(tau))
        .fold(f64::INFINITY, f64::min)
}

/// Tolerances for [`solve_homological`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomologicalConfig {
    /// Allowed `|⟨f⟩|` relative to `S_0(f)`.
    pub mean_tolerance: f64,
    /// Divisors below this abort with [`Error::ResonantMode`].
    pub resonance_floor: f64,
}

impl Default for HomologicalConfig {
    fn default() -> Self {
        HomologicalConfig {
            mean_tolerance: 1e-12,
            resonance_floor: RESONANCE_FLOOR,
        }
    }
}

/// Solution of `𝓛_ω u = f`, `⟨u⟩ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomologicalSolution {
    pub u: FourierSeries,
    /// Smallest `|⟨ω,k⟩|` over the support of `f` (∞ for constant `f`).
    pub min_divisor: f64,
}

/// Solve `𝓛_ω u = f` with `⟨u⟩ = 0` via `u_k = f_k / (i⟨ω,k⟩)`.
pub fn solve_homological(
    f: &FourierSeries,
    w: &DiophantineVector,
    config: &HomologicalConfig,
) -> Result<HomologicalSolution> {
    if f.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: f.dim(),
        });
    }
    let mean = f.mean().norm();
    let tolerance = config.mean_tolerance * f.wiener(0.0);
    if mean > tolerance {
        return Err(Error::NonZeroMean { mean, tolerance });
    }
    let mut u = FourierSeries::zero_with(f.dim(), f.max_mode(), f.is_real());
    let mut min_divisor = f64::INFINITY;
    for (k, c) in f.iter() {
        if k.iter().all(|&x| x == 0) {
            continue;
        }
        let d = w.divisor(k);
        if d.abs() < config.resonance_floor {
            return Err(Error::ResonantMode {
                mode: k.clone(),
                divisor: d.abs(),
            });
        }
        min_divisor = min_divisor.min(d.abs());
        u.coeffs.insert(k.clone(), c / Complex64::new(0.0, d));
    }
    if u.real {
        u.symmetrize();
    }
    Ok(HomologicalSolution { u, min_divisor })
}

#[derive(Serialize, Deserialize)]
struct ModeJson {
    k: Vec<i32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    dim: usize,
    real: bool,
    modes: Vec<ModeJson>,
}

impl Serialize for FourierSeries {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson {
            dim: self.dim,
            real: self.real,
            modes: self
                .coeffs
                .iter()
                .map(|(k, c)| ModeJson {
                    k: k.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FourierSeries {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SeriesJson::deserialize(deserializer)?;
        let radius = raw.modes.iter().map(|m| mode_norm(&m.k)).max().unwrap_or(0);
        FourierSeries::from_modes(
            raw.dim,
            DEFAULT_MAX_MODE.max(radius),
            raw.real,
            raw.modes
                .into_iter()
                .map(|m| (m.k, Complex64::new(m.re, m.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}
