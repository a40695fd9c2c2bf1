//! Ready-made Hamiltonians used by tests, benches and the command line.

use crate::bnf::HamiltonianSpec;
use crate::fourier::{DiophantineVector, FourierSeries};
use crate::gevrey::GevreyParams;
use crate::multi_index::MultiIndex;
use crate::series::TaylorFourier;

/// Modes scanned when estimating `κ` for the presets.
pub const PRESET_HORIZON: usize = 64;

const GOLDEN: f64 = 1.618_033_988_749_895;

fn mi(v: &[u32]) -> MultiIndex {
    MultiIndex::new(v.to_vec())
}

fn assemble(omega: Vec<f64>, tau: f64, coeffs: TaylorFourier, radius: f64) -> HamiltonianSpec {
    let omega = DiophantineVector::empirical(omega, tau, PRESET_HORIZON).expect("non-resonant preset");
    let gevrey = GevreyParams::new(1.0, tau, omega.kappa()).expect("valid preset exponents");
    HamiltonianSpec::new(omega, coeffs, gevrey, radius).expect("valid preset")
}

/// `H = ⟨ω, r⟩ + Σ` angle-independent terms, for `n ∈ {1, 2, 3}`.
/// The generating function vanishes at every order.
pub fn integrable(n: usize) -> HamiltonianSpec {
    let (omega, tau) = match n {
        1 => (vec![1.0], 1.0),
        2 => (vec![1.0, GOLDEN], 1.5),
        3 => (vec![1.0, 2f64.sqrt(), 3f64.sqrt()], 2.5),
        _ => panic!("integrable preset is defined for n = 1, 2, 3"),
    };
    let mut coeffs = TaylorFourier::new(n, 2, 3);
    for j in 0..n {
        let mut a = vec![0; n];
        a[j] = 2;
        coeffs.insert_term(mi(&a), FourierSeries::constant(n, 0.5)).unwrap();
    }
    let mut a = vec![0; n];
    a[0] = 3;
    coeffs.insert_term(mi(&a), FourierSeries::constant(n, 0.1)).unwrap();
    if n > 1 {
        let mut a = vec![0; n];
        a[0] = 1;
        a[1] = 1;
        coeffs.insert_term(mi(&a), FourierSeries::constant(n, 0.25)).unwrap();
    }
    assemble(omega, tau, coeffs, 0.5)
}

/// `H = ω₀ r + (1 + ε cos θ) r²/2`.
pub fn pendulum(omega0: f64, eps: f64) -> HamiltonianSpec {
    let b2 = FourierSeries::axpby(
        0.5,
        &FourierSeries::constant(1, 1.0),
        0.5 * eps,
        &FourierSeries::cos_mode(vec![1], 1.0),
    )
    .unwrap();
    let mut coeffs = TaylorFourier::new(1, 2, 2);
    coeffs.insert_term(mi(&[2]), b2).unwrap();
    assemble(vec![omega0], 1.0, coeffs, 0.5)
}

/// Two degrees of freedom, `ω = (1, φ)`, with low-order trigonometric
/// coefficients of degree 2 and 3.
pub fn golden2d() -> HamiltonianSpec {
    let two = 2;
    let c = |v: f64| FourierSeries::constant(two, v);
    let cos = |k: [i32; 2], a: f64| FourierSeries::cos_mode(k.to_vec(), a);
    let sin = |k: [i32; 2], a: f64| FourierSeries::sin_mode(k.to_vec(), a);
    let mut coeffs = TaylorFourier::new(2, 2, 3);
    coeffs
        .insert_term(mi(&[2, 0]), FourierSeries::axpby(1.0, &c(0.5), 1.0, &cos([1, 0], 0.1)).unwrap())
        .unwrap();
    coeffs
        .insert_term(mi(&[0, 2]), FourierSeries::axpby(1.0, &c(0.5), 1.0, &cos([0, 1], 0.1)).unwrap())
        .unwrap();
    coeffs.insert_term(mi(&[1, 1]), cos([1, -1], 0.05)).unwrap();
    coeffs.insert_term(mi(&[3, 0]), sin([1, 1], 0.02)).unwrap();
    coeffs.insert_term(mi(&[1, 2]), cos([0, 1], 0.02)).unwrap();
    assemble(vec![1.0, GOLDEN], 1.5, coeffs, 0.5)
}
