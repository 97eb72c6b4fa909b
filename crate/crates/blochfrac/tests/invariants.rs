//! Randomized invariants. Each property states an identity or inequality
//! that holds for every input in its domain; tolerances reflect only the
//! floating-point route, not the mathematics.

use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use blochfrac::norms::{bmu_norm, hardy_norm, integral_mean, random_corpus, CORPUS_SEED};
use blochfrac::series::{
    a_phi_m, cesaro_block, frac_deriv, frac_integral, hadamard, multiplier_transform,
    smooth_cutoff, w_phi,
};
use blochfrac::{RadialGrid, RadialWeight, TaylorPoly};

fn poly(max_degree: usize) -> impl Strategy<Value = TaylorPoly> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..=max_degree + 1).prop_map(|parts| {
        TaylorPoly::new(
            parts
                .into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect(),
        )
    })
}

fn builtin() -> impl Strategy<Value = RadialWeight> {
    (0usize..4).prop_map(|i| RadialWeight::builtin_suite().swap_remove(i))
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

/// Blocks 0..=13: enough levels to cover every coefficient index below 2^13.
fn partition_blocks() -> &'static Vec<TaylorPoly> {
    static BLOCKS: OnceLock<Vec<TaylorPoly>> = OnceLock::new();
    BLOCKS.get_or_init(|| {
        let cutoff = smooth_cutoff();
        (0..=13).map(|n| cesaro_block(n, &cutoff)).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frac_deriv_is_linear(f in poly(64), g in poly(64), w in builtin(),
                            are in -2.0f64..2.0, aim in -2.0f64..2.0) {
        let alpha = Complex64::new(are, aim);
        let lhs = frac_deriv(&f.scale(alpha).add(&g), &w).unwrap();
        let rhs = frac_deriv(&f, &w).unwrap().scale(alpha).add(&frac_deriv(&g, &w).unwrap());
        for n in 0..=lhs.degree() {
            prop_assert!(close(lhs.coeff(n), rhs.coeff(n), 1e-12), "coefficient {n}");
        }
    }

    #[test]
    fn frac_deriv_inverts_frac_integral(f in poly(128), w in builtin()) {
        let back = frac_deriv(&frac_integral(&f, &w).unwrap(), &w).unwrap();
        for n in 0..=f.degree() {
            prop_assert!(close(back.coeff(n), f.coeff(n), 1e-13), "coefficient {n}");
        }
    }

    #[test]
    fn multiplier_transform_inverts_with_negated_order(f in poly(128), beta in 0.01f64..3.0) {
        let back = multiplier_transform(&multiplier_transform(&f, beta), -beta);
        for n in 0..=f.degree() {
            prop_assert!(close(back.coeff(n), f.coeff(n), 1e-12), "coefficient {n}");
        }
    }

    #[test]
    fn partition_of_unity_per_coefficient(k in 0usize..8192) {
        let total: f64 = partition_blocks().iter().map(|b| b.coeff(k).re).sum();
        prop_assert!((total - 1.0).abs() <= 1e-13, "coefficient {k} sums to {total}");
    }

    #[test]
    fn block_sums_reconstruct(f in poly(256)) {
        let mut sum = TaylorPoly::new(vec![Complex64::new(0.0, 0.0)]);
        for b in partition_blocks() {
            sum = sum.add(&hadamard(b, &f));
        }
        for n in 0..=f.degree() {
            prop_assert!(close(sum.coeff(n), f.coeff(n), 1e-12), "coefficient {n}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval_at_every_radius(f in poly(128), r in 0.0f64..=1.0) {
        let mean = integral_mean(&f, r, 2.0).unwrap();
        let exact: f64 = f
            .coeffs()
            .iter()
            .enumerate()
            .map(|(n, c)| c.norm_sqr() * r.powi(2 * n as i32))
            .sum();
        let exact = exact.sqrt();
        prop_assert!((mean - exact).abs() <= 1e-12 * (1.0 + exact), "M_2 {mean} vs {exact}");
    }

    // Hardy convexity. The sup mean is read from circle samples, so it
    // carries an angular resolution error the integral means do not.
    #[test]
    fn means_nondecreasing_in_radius(f in poly(128),
                                     p in prop_oneof![Just(f64::INFINITY), 0.5f64..4.0],
                                     r1 in 0.05f64..0.85, dr in 0.05f64..0.14) {
        let lo = integral_mean(&f, r1, p).unwrap();
        let hi = integral_mean(&f, r1 + dr, p).unwrap();
        let tol = if p.is_finite() { 1e-6 } else { 1e-2 };
        prop_assert!(lo <= hi * (1.0 + tol), "M_p fell: {lo} at {r1} vs {hi} at {}", r1 + dr);
    }

    #[test]
    fn rotation_leaves_means_fixed(f in poly(128), theta in 0.0f64..std::f64::consts::TAU,
                                   r in 0.1f64..=0.95) {
        let rotated = TaylorPoly::new(
            f.coeffs()
                .iter()
                .enumerate()
                .map(|(n, c)| c * Complex64::from_polar(1.0, n as f64 * theta))
                .collect(),
        );
        let m2 = integral_mean(&f, r, 2.0).unwrap();
        let m2r = integral_mean(&rotated, r, 2.0).unwrap();
        prop_assert!((m2 - m2r).abs() <= 1e-10 * (1.0 + m2), "M_2 moved under rotation");
        let m1 = integral_mean(&f, r, 1.0).unwrap();
        let m1r = integral_mean(&rotated, r, 1.0).unwrap();
        prop_assert!((m1 - m1r).abs() <= 1e-5 * (1.0 + m1), "M_1 moved under rotation");
    }

    #[test]
    fn moments_scale_linearly(w in builtin(), c in 0.05f64..20.0, x in 0.5f64..2000.0) {
        let v = w.rescaled(c).unwrap();
        let a = w.moment(x).unwrap();
        let b = v.moment(x).unwrap();
        prop_assert!((b - c * a).abs() <= 1e-10 * c * a, "moment at {x}: {b} vs {}", c * a);
        let ta = w.tail(0.3).unwrap();
        let tb = v.tail(0.3).unwrap();
        prop_assert!((tb - c * ta).abs() <= 1e-12 * c * ta, "tail: {tb} vs {}", c * ta);
    }
}

/// Weighted-norm dilation bound: the weighted derivative profile of f(ρz)
/// never exceeds the weighted norm of f itself.
#[test]
fn dilation_never_raises_weighted_norm() {
    let grid = RadialGrid::default_depth();
    let polys = random_corpus(CORPUS_SEED ^ 0xd11a, 6, 64);
    let weights = [RadialWeight::constant(), RadialWeight::standard(2.0).unwrap()];
    for w in &weights {
        for f in &polys {
            let full = bmu_norm(f, w, &grid).unwrap().sup;
            for rho in [0.3, 0.7, 0.9, 0.99] {
                let dilated = bmu_norm(&f.dilate(rho), w, &grid).unwrap().sup;
                assert!(
                    dilated <= full * (1.0 + 1e-10),
                    "{}: dilation by {rho} raised the norm: {dilated} > {full}",
                    w.label()
                );
            }
        }
    }
}

/// Window multipliers act boundedly on the mean norm: one constant covers
/// every scale, sized by the smoothness functional of the window profile.
#[test]
fn window_multiplier_bounded_on_mean_norm() {
    let cutoff = smooth_cutoff();
    let a = a_phi_m(|t| cutoff.bump(t), (1.0, 4.0), 2).unwrap();
    let f = &random_corpus(CORPUS_SEED ^ 0x0b, 1, 64)[0];
    let base = hardy_norm(f, 1.0).unwrap();
    let mut worst = 0.0f64;
    for n in 1..=10usize {
        let window = w_phi(n, |t| cutoff.bump(t), (1.0, 4.0));
        let val = hardy_norm(&hadamard(&window, f), 1.0).unwrap();
        worst = worst.max(val / (a * base));
    }
    assert!(worst <= 1.0, "window constant {worst} exceeded the pinned bound 1.0");
    assert!(worst > 1e-4, "window constant {worst} suspiciously small: check the normalizer");
}
