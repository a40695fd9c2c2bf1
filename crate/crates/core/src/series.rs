//! Action-homogeneous polynomials with Fourier-series coefficients and the
//! graded power expansion `(I + Σ_k ∂_θ g_k)^α`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{FourierSeries, DEFAULT_MAX_MODE};
use crate::multi_index::{factorial, MultiIndex};

/// `Σ_{|α|=m} c_α(θ) I^α`, homogeneous of degree `m` in the actions.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousPart {
    dim: usize,
    degree: usize,
    terms: BTreeMap<MultiIndex, FourierSeries>,
}

impl HomogeneousPart {
    pub fn zero(dim: usize, degree: usize) -> Self {
        HomogeneousPart {
            dim,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// `c(θ) I^α`.
    pub fn monomial(alpha: MultiIndex, coeff: FourierSeries) -> Result<Self> {
        let mut p = Self::zero(alpha.dim(), alpha.degree());
        p.insert(alpha, coeff)?;
        Ok(p)
    }

    /// The grade-one part `I_axis` with unit coefficient.
    pub fn action(dim: usize, axis: usize) -> Self {
        let mut p = Self::zero(dim, 1);
        p.terms
            .insert(MultiIndex::unit(dim, axis), FourierSeries::constant(dim, 1.0));
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(FourierSeries::is_real)
    }

    pub fn get(&self, alpha: &MultiIndex) -> Option<&FourierSeries> {
        self.terms.get(alpha)
    }

    /// Terms in graded-lex order of `α`.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &FourierSeries)> {
        self.terms.iter()
    }

    /// Largest truncation radius among the coefficient series.
    pub fn max_mode(&self) -> usize {
        self.terms
            .values()
            .map(FourierSeries::max_mode)
            .max()
            .unwrap_or(DEFAULT_MAX_MODE)
    }

    /// Add `coeff · I^α` to this part.
    pub fn insert(&mut self, alpha: MultiIndex, coeff: FourierSeries) -> Result<()> {
        if alpha.dim() != self.dim || coeff.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: if alpha.dim() != self.dim {
                    alpha.dim()
                } else {
                    coeff.dim()
                },
            });
        }
        if alpha.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                alpha: alpha.as_slice().to_vec(),
                degree: self.degree,
            });
        }
        match self.terms.get_mut(&alpha) {
            Some(existing) => existing.add_scaled(1.0, &coeff)?,
            None => {
                self.terms.insert(alpha.clone(), coeff);
            }
        }
        if self.terms.get(&alpha).is_some_and(FourierSeries::is_empty) {
            self.terms.remove(&alpha);
        }
        Ok(())
    }

    fn check_compatible(&self, other: &HomogeneousPart) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// `self + a·other`; degrees must agree unless one side is zero.
    pub fn add_scaled(&mut self, a: f64, other: &HomogeneousPart) -> Result<()> {
        self.check_compatible(other)?;
        if other.is_zero() {
            return Ok(());
        }
        if self.degree != other.degree {
            if self.is_zero() {
                self.degree = other.degree;
            } else {
                return Err(Error::InvalidParameter(format!(
                    "cannot add degree {} to degree {}",
                    other.degree, self.degree
                )));
            }
        }
        for (alpha, c) in &other.terms {
            self.insert(alpha.clone(), c.scale(a))?;
        }
        Ok(())
    }

    pub fn scale(&self, a: f64) -> HomogeneousPart {
        let mut out = HomogeneousPart::zero(self.dim, self.degree);
        for (alpha, c) in &self.terms {
            let s = c.scale(a);
            if !s.is_empty() {
                out.terms.insert(alpha.clone(), s);
            }
        }
        out
    }

    /// Product of two homogeneous parts, coefficient convolutions truncated
    /// at `max_mode`. Returns the product and the discarded Fourier mass.
    pub fn mul_truncated(&self, other: &HomogeneousPart, max_mode: usize) -> Result<(HomogeneousPart, f64)> {
        self.check_compatible(other)?;
        let mut out = HomogeneousPart::zero(self.dim, self.degree + other.degree);
        let mut lost = 0.0;
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (prod, l) = ca.mul_truncated(cb, max_mode)?;
                lost += l;
                if !prod.is_empty() {
                    out.insert(a.add(b), prod)?;
                }
            }
        }
        Ok((out, lost))
    }

    /// `∂/∂θ_axis`, degree preserved.
    pub fn angle_derivative(&self, axis: usize) -> Result<HomogeneousPart> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange { axis, dim: self.dim });
        }
        let mut out = HomogeneousPart::zero(self.dim, self.degree);
        for (alpha, c) in &self.terms {
            let d = c.derivative(axis)?;
            if !d.is_empty() {
                out.terms.insert(alpha.clone(), d);
            }
        }
        Ok(out)
    }

    /// `∂/∂I_axis`, degree lowered by one.
    pub fn action_derivative(&self, axis: usize) -> Result<HomogeneousPart> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange { axis, dim: self.dim });
        }
        let mut out = HomogeneousPart::zero(self.dim, self.degree.saturating_sub(1));
        for (alpha, c) in &self.terms {
            if let Some(lower) = alpha.lower(axis) {
                out.terms.insert(lower, c.scale(alpha.get(axis) as f64));
            }
        }
        Ok(out)
    }

    /// `𝓛_ω` applied coefficientwise.
    pub fn lie_derivative(&self, omega: &[f64]) -> Result<HomogeneousPart> {
        let mut out = HomogeneousPart::zero(self.dim, self.degree);
        for (alpha, c) in &self.terms {
            let d = c.lie_derivative(omega)?;
            if !d.is_empty() {
                out.terms.insert(alpha.clone(), d);
            }
        }
        Ok(out)
    }

    /// Average over the torus: every coefficient replaced by its mean.
    pub fn mean_part(&self) -> HomogeneousPart {
        let mut out = HomogeneousPart::zero(self.dim, self.degree);
        for (alpha, c) in &self.terms {
            let m = c.mean();
            let mut s = FourierSeries::zero_with(self.dim, c.max_mode(), c.is_real());
            if m.norm() > 0.0 {
                s = FourierSeries::from_modes(
                    self.dim,
                    c.max_mode(),
                    c.is_real(),
                    [(vec![0; self.dim], m)],
                )
                .unwrap_or(s);
            }
            if !s.is_empty() {
                out.terms.insert(alpha.clone(), s);
            }
        }
        out
    }

    /// Value at `(θ, I)`, real part of each coefficient.
    pub fn eval(&self, theta: &[f64], actions: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(alpha, c)| c.eval_re(theta) * alpha.monomial(actions))
            .sum()
    }

    /// Truncate every coefficient to `|k| ≤ max_mode`; returns the discarded mass.
    pub fn set_max_mode(&mut self, max_mode: usize) -> f64 {
        let mut lost = 0.0;
        for c in self.terms.values_mut() {
            lost += c.set_max_mode(max_mode);
        }
        self.terms.retain(|_, c| !c.is_empty());
        lost
    }

    pub fn prune(&mut self, tol: f64) {
        for c in self.terms.values_mut() {
            c.prune(tol);
        }
        self.terms.retain(|_, c| !c.is_empty());
    }
}

/// `hp_multiply` at the larger truncation radius of the two factors.
pub fn hp_multiply(a: &HomogeneousPart, b: &HomogeneousPart) -> Result<HomogeneousPart> {
    let cap = a.max_mode().max(b.max_mode());
    a.mul_truncated(b, cap).map(|(p, _)| p)
}

/// A graded sum `Σ_d P_d` kept only up to a maximum degree.
#[derive(Clone, Debug)]
struct Graded {
    dim: usize,
    parts: Vec<Option<HomogeneousPart>>,
}

impl Graded {
    fn new(dim: usize, max_degree: usize) -> Self {
        Graded {
            dim,
            parts: vec![None; max_degree + 1],
        }
    }

    fn max_degree(&self) -> usize {
        self.parts.len() - 1
    }

    fn add(&mut self, part: HomogeneousPart) -> Result<()> {
        let d = part.degree();
        if d > self.max_degree() || part.is_zero() {
            return Ok(());
        }
        match &mut self.parts[d] {
            Some(existing) => existing.add_scaled(1.0, &part)?,
            slot => *slot = Some(part),
        }
        Ok(())
    }

    fn mul(&self, other: &Graded, max_mode: usize) -> Result<(Graded, f64)> {
        let top = self.max_degree().min(other.max_degree());
        let mut out = Graded::new(self.dim, top);
        let mut lost = 0.0;
        for (da, pa) in self.parts.iter().enumerate() {
            let Some(pa) = pa else { continue };
            for (db, pb) in other.parts.iter().enumerate() {
                let Some(pb) = pb else { continue };
                if da + db > top {
                    break;
                }
                let (p, l) = pa.mul_truncated(pb, max_mode)?;
                lost += l;
                out.add(p)?;
            }
        }
        Ok((out, lost))
    }

    fn take(mut self, degree: usize) -> HomogeneousPart {
        self.parts
            .get_mut(degree)
            .and_then(Option::take)
            .unwrap_or_else(|| HomogeneousPart::zero(self.dim, degree))
    }
}

/// Memoized powers of the components of a graded vector
/// `V_j = I_j + Σ_{d≥2} V_{j,d}` truncated at a target degree.
///
/// `components[j][d-1]` holds the grade-`d` part of `V_j`; the grade-one
/// entry is normally `I_j`.
#[derive(Debug)]
pub struct PowerCache<'a> {
    components: &'a [Vec<HomogeneousPart>],
    target: usize,
    max_mode: usize,
    powers: Vec<Vec<Graded>>,
    lost: f64,
}

impl<'a> PowerCache<'a> {
    pub fn new(components: &'a [Vec<HomogeneousPart>], target: usize, max_mode: usize) -> Result<Self> {
        let dim = components.len();
        for comp in components {
            for (i, part) in comp.iter().enumerate() {
                if part.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: part.dim(),
                    });
                }
                if !part.is_zero() && part.degree() != i + 1 {
                    return Err(Error::InvalidParameter(format!(
                        "grade slot {} holds a degree-{} part",
                        i + 1,
                        part.degree()
                    )));
                }
            }
        }
        Ok(PowerCache {
            components,
            target,
            max_mode,
            powers: vec![Vec::new(); dim],
            lost: 0.0,
        })
    }

    /// Discarded Fourier mass accumulated so far.
    pub fn truncated_mass(&self) -> f64 {
        self.lost
    }

    fn base(&self, axis: usize) -> Result<Graded> {
        let dim = self.components.len();
        let mut g = Graded::new(dim, self.target);
        for part in self.components[axis].iter().take(self.target) {
            g.add(part.clone())?;
        }
        Ok(g)
    }

    fn ensure_power(&mut self, axis: usize, exp: usize) -> Result<()> {
        if self.powers[axis].is_empty() {
            let base = self.base(axis)?;
            self.powers[axis].push(base);
        }
        while self.powers[axis].len() < exp {
            let (next, l) = {
                let last = self.powers[axis].last().expect("nonempty");
                last.mul(&self.powers[axis][0], self.max_mode)?
            };
            self.lost += l;
            self.powers[axis].push(next);
        }
        Ok(())
    }

    /// Compute and memoize the axis powers needed for `α`.
    pub fn prepare(&mut self, alpha: &MultiIndex) -> Result<()> {
        let dim = self.components.len();
        if alpha.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: alpha.dim(),
            });
        }
        let needed = (self.target + 1).saturating_sub(alpha.degree());
        for (j, comp) in self.components.iter().enumerate() {
            if alpha.get(j) > 0 && comp.len() < needed {
                return Err(Error::MissingData(format!(
                    "axis {j} supplies {} grades, {needed} required",
                    comp.len()
                )));
            }
        }
        for j in 0..dim {
            let e = alpha.get(j) as usize;
            if e > 0 {
                self.ensure_power(j, e)?;
            }
        }
        Ok(())
    }

    /// Degree-`target` component of `Π_j V_j^{α_j}` from prepared powers,
    /// with the Fourier mass discarded in the cross-axis products.
    pub fn expand(&self, alpha: &MultiIndex) -> Result<(HomogeneousPart, f64)> {
        let dim = self.components.len();
        let mut lost = 0.0;
        let mut acc: Option<Graded> = None;
        for j in 0..dim {
            let e = alpha.get(j) as usize;
            if e == 0 {
                continue;
            }
            let p = self.powers[j].get(e - 1).ok_or_else(|| {
                Error::MissingData(format!("power {e} of axis {j} was not prepared"))
            })?;
            acc = Some(match acc {
                None => p.clone(),
                Some(a) => {
                    let (prod, l) = a.mul(p, self.max_mode)?;
                    lost += l;
                    prod
                }
            });
        }
        let part = match acc {
            Some(g) => g.take(self.target),
            None => {
                // α = 0: the constant 1
                let mut p = HomogeneousPart::zero(dim, 0);
                if self.target == 0 {
                    p.insert(MultiIndex::zero(dim), FourierSeries::constant(dim, 1.0))?;
                }
                p
            }
        };
        Ok((part, lost))
    }

    /// [`prepare`](Self::prepare) followed by [`expand`](Self::expand).
    pub fn expansion(&mut self, alpha: &MultiIndex) -> Result<HomogeneousPart> {
        self.prepare(alpha)?;
        let (part, l) = self.expand(alpha)?;
        self.lost += l;
        Ok(part)
    }
}

/// `A_{α,m}`: the degree-`m` component of `Π_j V_j^{α_j}` computed by
/// iterated graded multiplication.
pub fn power_expansion(
    components: &[Vec<HomogeneousPart>],
    alpha: &MultiIndex,
    m: usize,
) -> Result<HomogeneousPart> {
    if alpha.degree() < 2 || m < alpha.degree() {
        return Err(Error::InvalidParameter(format!(
            "need 2 <= |alpha| <= m, got |alpha| = {}, m = {m}",
            alpha.degree()
        )));
    }
    let cap = components
        .iter()
        .flatten()
        .map(HomogeneousPart::max_mode)
        .max()
        .unwrap_or(DEFAULT_MAX_MODE);
    PowerCache::new(components, m, cap)?.expansion(alpha)
}

/// A tuple `(α¹, …, α^{m-1})` with `Σ α^j = α` and `Σ j|α^j| = m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexTuple {
    pub m: usize,
    pub alphas: Vec<MultiIndex>,
}

impl IndexTuple {
    /// Weighted length `Σ_j j·|α^j|`.
    pub fn weight(&self) -> usize {
        self.alphas
            .iter()
            .enumerate()
            .map(|(i, a)| (i + 1) * a.degree())
            .sum()
    }

    /// `α! / (α¹! ⋯ α^{m-1}!)`.
    pub fn multinomial(&self) -> u128 {
        let total = self
            .alphas
            .iter()
            .skip(1)
            .fold(self.alphas[0].clone(), |acc, a| acc.add(a));
        let denom: u128 = self.alphas.iter().map(MultiIndex::factorial).product();
        total.factorial() / denom
    }
}

/// Enumerate the index set `ℕ(α, m)`.
pub fn index_tuples(alpha: &MultiIndex, m: usize) -> Vec<IndexTuple> {
    let mut out = Vec::new();
    if m < 2 {
        return out;
    }
    let slots = m - 1;
    let mut chosen: Vec<MultiIndex> = vec![MultiIndex::zero(alpha.dim()); slots];
    fill_tuple(alpha.as_slice().to_vec(), m, slots, &mut chosen, &mut out);
    out
}

fn fill_tuple(
    remaining: Vec<u32>,
    weight_left: usize,
    slot: usize,
    chosen: &mut Vec<MultiIndex>,
    out: &mut Vec<IndexTuple>,
) {
    if slot == 1 {
        let rest = MultiIndex::new(remaining);
        if rest.degree() == weight_left {
            chosen[0] = rest;
            out.push(IndexTuple {
                m: chosen.len() + 1,
                alphas: chosen.clone(),
            });
        }
        return;
    }
    for sub in sub_indices(&remaining) {
        let deg = sub.degree();
        if slot * deg > weight_left {
            continue;
        }
        let left: Vec<u32> = remaining
            .iter()
            .zip(sub.as_slice())
            .map(|(a, b)| a - b)
            .collect();
        chosen[slot - 1] = sub;
        fill_tuple(left, weight_left - slot * deg, slot - 1, chosen, out);
    }
    chosen[slot - 1] = MultiIndex::zero(remaining.len());
}

fn sub_indices(bound: &[u32]) -> Vec<MultiIndex> {
    let mut out = vec![Vec::with_capacity(bound.len())];
    for &b in bound {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=b).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(MultiIndex::new).collect()
}

/// `Σ_{ℕ(α,m)} α!/(α¹!⋯α^{m-1}!)` by exact enumeration.
pub fn multinomial_weight_sum(alpha: &MultiIndex, m: usize) -> Result<u128> {
    let len = alpha.degree();
    if len < 2 || len > m {
        return Err(Error::InvalidParameter(format!(
            "need 2 <= |alpha| <= m, got |alpha| = {len}, m = {m}"
        )));
    }
    Ok(index_tuples(alpha, m).iter().map(IndexTuple::multinomial).sum())
}

/// `(m-1)! / ((m-|α|)! (|α|-1)!)`.
pub fn multinomial_closed_form(len: usize, m: usize) -> u128 {
    factorial((m - 1) as u64) / (factorial((m - len) as u64) * factorial((len - 1) as u64))
}

/// `Σ_m Σ_{|α|=m} c_α(θ) I^α` over a degree window `[m_min, m_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorFourier {
    dim: usize,
    m_min: usize,
    m_max: usize,
    parts: BTreeMap<usize, HomogeneousPart>,
}

/// Differentiation variable for [`tf_gradient`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variable {
    Angle(usize),
    Action(usize),
}

impl TaylorFourier {
    pub fn new(dim: usize, m_min: usize, m_max: usize) -> Self {
        TaylorFourier {
            dim,
            m_min,
            m_max,
            parts: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m_min(&self) -> usize {
        self.m_min
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// Parts in increasing degree.
    pub fn parts(&self) -> impl Iterator<Item = (usize, &HomogeneousPart)> {
        self.parts.iter().map(|(&m, p)| (m, p))
    }

    pub fn part(&self, m: usize) -> Option<&HomogeneousPart> {
        self.parts.get(&m)
    }

    /// True when no part has a nonzero term.
    pub fn is_zero(&self) -> bool {
        self.parts.values().all(HomogeneousPart::is_zero)
    }

    /// Store (or add into) the part of degree `part.degree()`.
    pub fn insert_part(&mut self, part: HomogeneousPart) -> Result<()> {
        if part.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: part.dim(),
            });
        }
        let m = part.degree();
        if m < self.m_min || m > self.m_max {
            return Err(Error::InvalidParameter(format!(
                "degree {m} outside window [{}, {}]",
                self.m_min, self.m_max
            )));
        }
        match self.parts.get_mut(&m) {
            Some(existing) => existing.add_scaled(1.0, &part)?,
            None => {
                self.parts.insert(m, part);
            }
        }
        Ok(())
    }

    /// Add `coeff · I^α`.
    pub fn insert_term(&mut self, alpha: MultiIndex, coeff: FourierSeries) -> Result<()> {
        self.insert_part(HomogeneousPart::monomial(alpha, coeff)?)
    }

    /// Copy keeping only degrees `≤ m`.
    pub fn truncated(&self, m: usize) -> TaylorFourier {
        let mut out = TaylorFourier::new(self.dim, self.m_min, self.m_max.min(m).max(self.m_min));
        for (&d, p) in &self.parts {
            if d <= m {
                out.parts.insert(d, p.clone());
            }
        }
        out
    }

    pub fn eval(&self, theta: &[f64], actions: &[f64]) -> f64 {
        self.parts.values().map(|p| p.eval(theta, actions)).sum()
    }

    pub fn gradient(&self, var: Variable) -> Result<TaylorFourier> {
        match var {
            Variable::Angle(j) => {
                let mut out = TaylorFourier::new(self.dim, self.m_min, self.m_max);
                for (&m, p) in &self.parts {
                    out.parts.insert(m, p.angle_derivative(j)?);
                }
                Ok(out)
            }
            Variable::Action(j) => {
                let mut out = TaylorFourier::new(
                    self.dim,
                    self.m_min.saturating_sub(1),
                    self.m_max.saturating_sub(1),
                );
                for (&m, p) in &self.parts {
                    if m == 0 {
                        if j >= self.dim {
                            return Err(Error::AxisOutOfRange { axis: j, dim: self.dim });
                        }
                        continue;
                    }
                    out.parts.insert(m - 1, p.action_derivative(j)?);
                }
                Ok(out)
            }
        }
    }
}

/// Evaluate `f(θ, I)`.
pub fn tf_eval(f: &TaylorFourier, theta: &[f64], actions: &[f64]) -> f64 {
    f.eval(theta, actions)
}

pub fn tf_gradient(f: &TaylorFourier, var: Variable) -> Result<TaylorFourier> {
    f.gradient(var)
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    alpha: Vec<u32>,
    series: FourierSeries,
}

#[derive(Serialize, Deserialize)]
struct PartJson {
    m: usize,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TaylorFourierJson {
    dim: usize,
    m_min: usize,
    m_max: usize,
    parts: Vec<PartJson>,
}

impl Serialize for TaylorFourier {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TaylorFourierJson {
            dim: self.dim,
            m_min: self.m_min,
            m_max: self.m_max,
            parts: self
                .parts
                .iter()
                .map(|(&m, p)| PartJson {
                    m,
                    terms: p
                        .terms()
                        .map(|(a, s)| TermJson {
                            alpha: a.as_slice().to_vec(),
                            series: s.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TaylorFourier {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = TaylorFourierJson::deserialize(deserializer)?;
        let mut tf = TaylorFourier::new(raw.dim, raw.m_min, raw.m_max);
        for part in raw.parts {
            let mut hp = HomogeneousPart::zero(raw.dim, part.m);
            for t in part.terms {
                hp.insert(MultiIndex::new(t.alpha), t.series)
                    .map_err(D::Error::custom)?;
            }
            tf.insert_part(hp).map_err(D::Error::custom)?;
        }
        Ok(tf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn one(dim: usize) -> FourierSeries {
        FourierSeries::constant(dim, 1.0)
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn multiply_examples() {
        let i1 = HomogeneousPart::monomial(mi(&[1]), one(1)).unwrap();
        let sq = hp_multiply(&i1, &i1).unwrap();
        assert_eq!(sq.degree(), 2);
        assert_eq!(sq.get(&mi(&[2])).unwrap(), &one(1));

        let a = HomogeneousPart::monomial(mi(&[1, 0]), FourierSeries::cos_mode(vec![1, 0], 1.0)).unwrap();
        let b = HomogeneousPart::monomial(mi(&[0, 1]), one(2)).unwrap();
        let ab = hp_multiply(&a, &b).unwrap();
        assert_eq!(ab.len(), 1);
        assert_eq!(ab.get(&mi(&[1, 1])).unwrap(), &FourierSeries::cos_mode(vec![1, 0], 1.0));

        let c = HomogeneousPart::monomial(mi(&[1]), FourierSeries::cos_mode(vec![1], 1.0)).unwrap();
        let cc = hp_multiply(&c, &c).unwrap();
        let coeff = cc.get(&mi(&[2])).unwrap();
        assert_eq!(coeff.coeff(&[0]), Complex64::new(0.5, 0.0));
        assert_eq!(coeff.coeff(&[2]), Complex64::new(0.25, 0.0));
    }

    #[test]
    fn multiply_rejects_dimension_mismatch() {
        let a = HomogeneousPart::action(1, 0);
        let b = HomogeneousPart::action(2, 0);
        assert!(matches!(hp_multiply(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    fn components_with_grade2(c: FourierSeries, grades: usize) -> Vec<Vec<HomogeneousPart>> {
        let mut comp = vec![HomogeneousPart::action(1, 0)];
        comp.push(HomogeneousPart::monomial(mi(&[2]), c).unwrap());
        while comp.len() < grades {
            let d = comp.len() + 1;
            comp.push(HomogeneousPart::zero(1, d));
        }
        vec![comp]
    }

    #[test]
    fn power_expansion_examples() {
        // no corrections: A_{α,|α|} = I^α
        let comps: Vec<Vec<HomogeneousPart>> = (0..2)
            .map(|j| vec![HomogeneousPart::action(2, j), HomogeneousPart::zero(2, 2)])
            .collect();
        let a = power_expansion(&comps, &mi(&[2, 1]), 3).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a.get(&mi(&[2, 1])).unwrap(), &one(2));

        let c = FourierSeries::cos_mode(vec![1], 0.7);
        let comps = components_with_grade2(c.clone(), 3);
        let a3 = power_expansion(&comps, &mi(&[2]), 3).unwrap();
        assert_eq!(a3.degree(), 3);
        assert_eq!(a3.get(&mi(&[3])).unwrap(), &c.scale(2.0));

        let a4 = power_expansion(&comps, &mi(&[2]), 4).unwrap();
        let (c2, _) = crate::fourier::fs_product(&c, &c).unwrap();
        assert_eq!(a4.get(&mi(&[4])).unwrap(), &c2);
    }

    #[test]
    fn power_expansion_needs_grades() {
        let comps = vec![vec![HomogeneousPart::action(1, 0)]];
        assert!(matches!(
            power_expansion(&comps, &mi(&[2]), 4),
            Err(Error::MissingData(_))
        ));
        assert!(power_expansion(&comps, &mi(&[1]), 2).is_err());
    }

    #[test]
    fn weight_sum_examples() {
        assert_eq!(multinomial_weight_sum(&mi(&[2]), 3).unwrap(), 2);
        assert_eq!(multinomial_weight_sum(&mi(&[1, 1]), 3).unwrap(), 2);
        assert_eq!(multinomial_weight_sum(&mi(&[3]), 3).unwrap(), 1);
        assert_eq!(multinomial_weight_sum(&mi(&[2]), 4).unwrap(), 3);
        assert!(multinomial_weight_sum(&mi(&[1]), 3).is_err());
        assert!(multinomial_weight_sum(&mi(&[3]), 2).is_err());
        assert_eq!(multinomial_closed_form(2, 3), 2);
    }

    #[test]
    fn index_tuples_respect_constraints() {
        for t in index_tuples(&mi(&[2, 1]), 6) {
            assert_eq!(t.weight(), 6);
            let sum = t.alphas.iter().skip(1).fold(t.alphas[0].clone(), |a, b| a.add(b));
            assert_eq!(sum, mi(&[2, 1]));
        }
    }

    #[test]
    fn eval_examples() {
        let mut g = TaylorFourier::new(1, 2, 3);
        g.insert_term(mi(&[2]), FourierSeries::sin_mode(vec![1], 1.0)).unwrap();
        assert_relative_eq!(tf_eval(&g, &[std::f64::consts::FRAC_PI_2], &[2.0]), 4.0, epsilon = 1e-14);

        assert_eq!(tf_eval(&TaylorFourier::new(1, 2, 5), &[0.3], &[0.2]), 0.0);

        let mut h = TaylorFourier::new(1, 3, 3);
        let c = FourierSeries::axpby(0.25, &FourierSeries::sin_mode(vec![1], 1.0), 0.25 / 8.0, &FourierSeries::sin_mode(vec![2], 1.0)).unwrap();
        h.insert_term(mi(&[3]), c).unwrap();
        assert_relative_eq!(tf_eval(&h, &[std::f64::consts::FRAC_PI_2], &[1.0]), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn gradient_examples() {
        let mut g = TaylorFourier::new(1, 2, 2);
        g.insert_term(mi(&[2]), FourierSeries::sin_mode(vec![1], 1.0)).unwrap();
        let dt = tf_gradient(&g, Variable::Angle(0)).unwrap();
        assert_eq!(dt.part(2).unwrap().get(&mi(&[2])).unwrap(), &FourierSeries::cos_mode(vec![1], 1.0));
        let di = tf_gradient(&g, Variable::Action(0)).unwrap();
        assert_eq!((di.m_min(), di.m_max()), (1, 1));
        assert_eq!(di.part(1).unwrap().get(&mi(&[1])).unwrap(), &FourierSeries::sin_mode(vec![1], 2.0));

        let mut f = TaylorFourier::new(2, 2, 2);
        f.insert_term(mi(&[1, 1]), FourierSeries::cos_mode(vec![0, 1], 1.0)).unwrap();
        let d1 = tf_gradient(&f, Variable::Action(0)).unwrap();
        assert_eq!(d1.part(1).unwrap().get(&mi(&[0, 1])).unwrap(), &FourierSeries::cos_mode(vec![0, 1], 1.0));
    }

    #[test]
    fn homogeneity_is_enforced() {
        let mut p = HomogeneousPart::zero(2, 3);
        assert!(matches!(p.insert(mi(&[1, 1]), one(2)), Err(Error::DegreeMismatch { .. })));
        let mut tf = TaylorFourier::new(2, 2, 4);
        assert!(tf.insert_term(mi(&[5, 0]), one(2)).is_err());
    }

    #[test]
    fn taylor_fourier_json_round_trip() {
        let mut tf = TaylorFourier::new(2, 2, 3);
        tf.insert_term(mi(&[1, 1]), FourierSeries::cos_mode(vec![1, -1], 0.5)).unwrap();
        tf.insert_term(mi(&[0, 3]), FourierSeries::sin_mode(vec![0, 2], 1.5)).unwrap();
        let text = serde_json::to_string(&tf).unwrap();
        let back: TaylorFourier = serde_json::from_str(&text).unwrap();
        assert_eq!(back, tf);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}
