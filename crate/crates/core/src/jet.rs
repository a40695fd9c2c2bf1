//! Fast pointwise evaluation of a Taylor–Fourier series together with its
//! first and second derivatives in `(θ, r)`.

use crate::series::TaylorFourier;

#[derive(Clone, Debug)]
struct Term {
    alpha: Vec<u32>,
    /// `(k, Re c_k, Im c_k)` over the full support.
    modes: Vec<(Vec<f64>, f64, f64)>,
}

/// A flattened copy of a [`TaylorFourier`] for repeated evaluation.
#[derive(Clone, Debug)]
pub struct JetEvaluator {
    dim: usize,
    terms: Vec<Term>,
}

/// Value and derivatives at one point. Blocks are indexed `[θ..., r...]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d_theta: Vec<f64>,
    pub d_r: Vec<f64>,
    /// Row-major `2n × 2n` Hessian, present when requested.
    pub hessian: Option<Vec<f64>>,
}

impl Jet {
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        let h = self.hessian.as_ref().expect("hessian not computed");
        h[i * 2 * self.d_theta.len() + j]
    }
}

/// `x^a` for a nonnegative integer exponent.
fn ipow(x: f64, a: u32) -> f64 {
    x.powi(a as i32)
}

impl JetEvaluator {
    /// Dimensions above 8 are not supported by the allocation-free gradient.
    pub fn new(series: &TaylorFourier) -> Self {
        assert!(series.dim() <= 8, "evaluator supports at most 8 degrees of freedom");
        let mut terms = Vec::new();
        for (_, part) in series.parts() {
            for (alpha, coeff) in part.terms() {
                let modes: Vec<_> = coeff
                    .iter()
                    .map(|(k, c)| (k.iter().map(|&x| x as f64).collect(), c.re, c.im))
                    .collect();
                if !modes.is_empty() {
                    terms.push(Term {
                        alpha: alpha.as_slice().to_vec(),
                        modes,
                    });
                }
            }
        }
        JetEvaluator {
            dim: series.dim(),
            terms,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Real part of the series at `(θ, r)`.
    pub fn value(&self, theta: &[f64], r: &[f64]) -> f64 {
        let mut total = 0.0;
        for t in &self.terms {
            let mono: f64 = t.alpha.iter().zip(r).map(|(&a, &x)| ipow(x, a)).product();
            if mono == 0.0 {
                continue;
            }
            let mut b = 0.0;
            for (k, re, im) in &t.modes {
                let phase: f64 = k.iter().zip(theta).map(|(a, b)| a * b).sum();
                let (s, c) = phase.sin_cos();
                b += re * c - im * s;
            }
            total += b * mono;
        }
        total
    }

    /// `(∇_θ, ∇_r)` written into the given buffers, without allocating.
    pub fn gradient_into(&self, theta: &[f64], r: &[f64], d_theta: &mut [f64], d_r: &mut [f64]) {
        let n = self.dim;
        d_theta.iter_mut().for_each(|x| *x = 0.0);
        d_r.iter_mut().for_each(|x| *x = 0.0);
        for t in &self.terms {
            let mut b = 0.0;
            let mut b_d = [0.0f64; 8];
            for (k, re, im) in &t.modes {
                let phase: f64 = k.iter().zip(theta).map(|(a, b)| a * b).sum();
                let (s, c) = phase.sin_cos();
                b += re * c - im * s;
                let dv = -re * s - im * c;
                for j in 0..n {
                    b_d[j] += k[j] * dv;
                }
            }
            let mono: f64 = t.alpha.iter().zip(r).map(|(&a, &x)| ipow(x, a)).product();
            for j in 0..n {
                d_theta[j] += b_d[j] * mono;
                if t.alpha[j] > 0 {
                    let mut p = t.alpha[j] as f64 * ipow(r[j], t.alpha[j] - 1);
                    for l in (0..n).filter(|&l| l != j) {
                        p *= ipow(r[l], t.alpha[l]);
                    }
                    d_r[j] += b * p;
                }
            }
        }
    }

    pub fn jet(&self, theta: &[f64], r: &[f64], with_hessian: bool) -> Jet {
        let n = self.dim;
        let w = 2 * n;
        let mut value = 0.0;
        let mut d_theta = vec![0.0; n];
        let mut d_r = vec![0.0; n];
        let mut hess = with_hessian.then(|| vec![0.0; w * w]);
        let mut mono_d = vec![0.0; n];
        let mut mono_dd = vec![0.0; n * n];
        let mut b_d = vec![0.0; n];
        let mut b_dd = vec![0.0; n * n];
        for t in &self.terms {
            // monomial and its derivatives
            let mono: f64 = t.alpha.iter().zip(r).map(|(&a, &x)| ipow(x, a)).product();
            for j in 0..n {
                mono_d[j] = if t.alpha[j] == 0 {
                    0.0
                } else {
                    let mut p = t.alpha[j] as f64 * ipow(r[j], t.alpha[j] - 1);
                    for l in (0..n).filter(|&l| l != j) {
                        p *= ipow(r[l], t.alpha[l]);
                    }
                    p
                };
            }
            if with_hessian {
                for j in 0..n {
                    for l in 0..n {
                        let mut p = 1.0;
                        for q in 0..n {
                            let mut a = t.alpha[q] as i64;
                            let mut f = 1.0;
                            for &d in &[j, l] {
                                if d == q {
                                    f *= a as f64;
                                    a -= 1;
                                }
                            }
                            p *= if a < 0 { 0.0 } else { f * ipow(r[q], a as u32) };
                        }
                        mono_dd[j * n + l] = p;
                    }
                }
            }
            // trigonometric factor and its derivatives
            let mut b = 0.0;
            b_d.iter_mut().for_each(|x| *x = 0.0);
            b_dd.iter_mut().for_each(|x| *x = 0.0);
            for (k, re, im) in &t.modes {
                let phase: f64 = k.iter().zip(theta).map(|(a, b)| a * b).sum();
                let (s, c) = phase.sin_cos();
                let v = re * c - im * s;
                let dv = -re * s - im * c;
                b += v;
                for j in 0..n {
                    b_d[j] += k[j] * dv;
                }
                if with_hessian {
                    for j in 0..n {
                        for l in 0..n {
                            b_dd[j * n + l] -= k[j] * k[l] * v;
                        }
                    }
                }
            }
            value += b * mono;
            for j in 0..n {
                d_theta[j] += b_d[j] * mono;
                d_r[j] += b * mono_d[j];
            }
            if let Some(h) = hess.as_mut() {
                for j in 0..n {
                    for l in 0..n {
                        h[j * w + l] += b_dd[j * n + l] * mono;
                        h[j * w + n + l] += b_d[j] * mono_d[l];
                        h[(n + j) * w + l] += mono_d[j] * b_d[l];
                        h[(n + j) * w + n + l] += b * mono_dd[j * n + l];
                    }
                }
            }
        }
        Jet {
            value,
            d_theta,
            d_r,
            hessian: hess,
        }
    }
}
