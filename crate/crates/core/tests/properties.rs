use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torus_bnf::fourier::{
    kappa_over_support, solve_homological, sup_derivative_bound, DiophantineVector, FourierSeries,
    HomologicalConfig, QMode,
};
use torus_bnf::gevrey::{log_remainder_bound, optimal_truncation, GevreyParams};
use torus_bnf::multi_index::MultiIndex;
use torus_bnf::series::{hp_multiply, index_tuples, power_expansion, HomogeneousPart};
use torus_bnf::special::{beta, log_beta, log_gamma};
use torus_bnf::suites::{modified_product_rhs, random_trig_poly, wiener_product_rhs};

const GOLDEN: f64 = 1.618_033_988_749_895;

fn frequency(n: usize) -> (Vec<f64>, f64) {
    if n == 1 {
        (vec![1.0], 1.0)
    } else {
        (vec![1.0, GOLDEN], 1.5)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homological_bound_and_residual(seed in any::<u64>(), n in 1usize..=2, s in 0.0f64..6.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_trig_poly(&mut rng, n, 20, 8, true).without_mean();
        prop_assume!(!f.is_empty());
        let (omega, tau) = frequency(n);
        let kappa = kappa_over_support(&omega, tau, &f);
        let w = DiophantineVector::new(omega.clone(), kappa.min(1.0), tau, 0).unwrap();
        let sol = solve_homological(&f, &w, &HomologicalConfig::default()).unwrap();
        prop_assert!(sol.u.wiener(s) <= f.wiener(s + tau) / kappa * (1.0 + 1e-10));
        prop_assert!(sol.u.is_real());
        let back = sol.u.lie_derivative(&omega).unwrap();
        let defect = FourierSeries::axpby(1.0, &back, -1.0, &f).unwrap().wiener(0.0);
        prop_assert!(defect <= 1e-12 * f.wiener(0.0));
    }

    #[test]
    fn product_bounds(seed in any::<u64>(), n in 1usize..=2, s in 0.0f64..7.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_trig_poly(&mut rng, n, 20, 8, false);
        let v = random_trig_poly(&mut rng, n, 20, 8, false);
        let (uv, lost) = u.mul_truncated(&v, 1 << 20).unwrap();
        prop_assert_eq!(lost, 0.0);
        prop_assert!(uv.wiener(s) <= wiener_product_rhs(&u, &v, s) * (1.0 + 1e-10));
        prop_assert!(uv.modified(s) <= modified_product_rhs(&u, &v, s) * (1.0 + 1e-10));
        let (vu, _) = v.mul_truncated(&u, 1 << 20).unwrap();
        prop_assert!(FourierSeries::axpby(1.0, &uv, -1.0, &vu).unwrap().wiener(0.0) <= 1e-12 * (1.0 + uv.wiener(0.0)));
    }

    #[test]
    fn derivative_norm_and_sandwich(seed in any::<u64>(), n in 1usize..=2, s in 0.0f64..5.0, d in 0usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_trig_poly(&mut rng, n, 10, 6, false);
        for alpha in MultiIndex::all_of_degree(n, d) {
            let du = u.derivative_multi(&alpha).unwrap();
            prop_assert!(du.modified(s) <= u.modified(s + d as f64) * (1.0 + 1e-12));
        }
        let q = sup_derivative_bound(&u, s.floor() as usize, QMode::Grid(32)).value;
        prop_assert!(q <= u.modified(s) * (1.0 + 1e-12));
        let upper = sup_derivative_bound(&u, s.floor() as usize, QMode::Upper).value;
        prop_assert!(q <= upper * (1.0 + 1e-12));
    }

    #[test]
    fn gamma_and_beta(x in 0.05f64..40.0, y in 0.05f64..40.0) {
        let rec = log_gamma(x + 1.0).unwrap() - x.ln() - log_gamma(x).unwrap();
        prop_assert!(rec.abs() <= 1e-12 * (1.0 + log_gamma(x + 1.0).unwrap().abs()));
        prop_assert!((beta(x, y).unwrap() - beta(y, x).unwrap()).abs() <= 1e-14 * beta(x, y).unwrap());
        // decreasing in each argument
        prop_assert!(log_beta(x + 0.5, y).unwrap() <= log_beta(x, y).unwrap());
        prop_assert!(log_beta(x, y + 0.5).unwrap() <= log_beta(x, y).unwrap());
    }

    #[test]
    fn truncation_monotone(a in 1e-8f64..1e-2, b in 1e-8f64..1e-2, c2 in 1.0f64..50.0, tau in 1.0f64..3.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let p = GevreyParams::new(1.0, tau, 1.0).unwrap().with_constants(2.0, c2);
        prop_assert!(optimal_truncation(lo, &p).unwrap() >= optimal_truncation(hi, &p).unwrap());
        let z = MultiIndex::zero(2);
        let one = MultiIndex::new(vec![1, 1]);
        prop_assert!(log_remainder_bound(lo, &one, &z, 1.0, &p).unwrap() <= log_remainder_bound(hi, &one, &z, 1.0, &p).unwrap());
    }
}

fn random_part(rng: &mut ChaCha8Rng, n: usize, degree: usize) -> HomogeneousPart {
    let all = MultiIndex::all_of_degree(n, degree);
    let mut p = HomogeneousPart::zero(n, degree);
    for _ in 0..rng.random_range(1..=2) {
        let a = all[rng.random_range(0..all.len())].clone();
        p.insert(a, random_trig_poly(rng, n, 2, 2, false)).unwrap();
    }
    p
}

/// `A_{α,m}` summed directly over the index set with multinomial weights.
fn expansion_oracle(components: &[Vec<HomogeneousPart>], alpha: &MultiIndex, m: usize) -> HomogeneousPart {
    let n = alpha.dim();
    let mut total = HomogeneousPart::zero(n, m);
    for tuple in index_tuples(alpha, m) {
        let mut term = HomogeneousPart::monomial(MultiIndex::zero(n), FourierSeries::constant(n, 1.0)).unwrap();
        for (j, aj) in tuple.alphas.iter().enumerate() {
            for (i, &e) in aj.as_slice().iter().enumerate() {
                for _ in 0..e {
                    term = hp_multiply(&term, &components[i][j]).unwrap();
                }
            }
        }
        total.add_scaled(tuple.multinomial() as f64, &term).unwrap();
    }
    total
}

fn max_defect(a: &HomogeneousPart, b: &HomogeneousPart) -> (f64, f64) {
    let mut defect = 0.0f64;
    let mut scale = 0.0f64;
    let keys: std::collections::BTreeSet<_> = a.terms().chain(b.terms()).map(|(k, _)| k.clone()).collect();
    for k in keys {
        let zero = FourierSeries::zero(a.dim());
        let x = a.get(&k).unwrap_or(&zero);
        let y = b.get(&k).unwrap_or(&zero);
        defect = defect.max(FourierSeries::axpby(1.0, x, -1.0, y).unwrap().wiener(0.0));
        scale = scale.max(x.wiener(0.0)).max(y.wiener(0.0));
    }
    (defect, scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn power_expansion_matches_index_set(seed in any::<u64>(), n in 1usize..=2, m in 2usize..=5, pick in any::<prop::sample::Index>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let components: Vec<Vec<HomogeneousPart>> = (0..n)
            .map(|_| (1..m).map(|d| random_part(&mut rng, n, d)).collect())
            .collect();
        let alphas: Vec<MultiIndex> = (2..=m).flat_map(|len| MultiIndex::all_of_degree(n, len)).collect();
        let alpha = pick.get(&alphas).clone();
        let fast = power_expansion(&components, &alpha, m).unwrap();
        let slow = expansion_oracle(&components, &alpha, m);
        let (defect, scale) = max_defect(&fast, &slow);
        prop_assert!(defect <= 1e-12 * (1.0 + scale), "defect {defect} at {alpha:?}, m = {m}");
    }
}
