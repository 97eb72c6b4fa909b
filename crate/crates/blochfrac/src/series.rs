//! Truncated Taylor series and their coefficient transforms.
//!
//! Everything here is exact on the retained coefficients: operations never
//! model the dropped tail of a series, they only move, scale, or multiply
//! the coefficients they are given.

use crate::error::{Error, Result};
use crate::weight::RadialWeight;
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

/// A polynomial Σ c_n z^n stored densely from n = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorPoly {
    coeffs: Vec<Complex64>,
}

impl TaylorPoly {
    /// Wrap coefficients c_0..c_N. An empty vector becomes the zero
    /// polynomial of degree 0.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        TaylorPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// z^n.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        TaylorPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs
            .get(n)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Termwise derivative; degree drops by one (constants differentiate
    /// to the zero polynomial of degree 0).
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return TaylorPoly::new(vec![]);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| c * n as f64)
            .collect();
        TaylorPoly { coeffs }
    }

    /// Coefficientwise map by a real multiplier sequence.
    pub fn map_coeffs<M: Fn(usize) -> f64>(&self, m: M) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * m(n))
            .collect();
        TaylorPoly { coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        TaylorPoly { coeffs }
    }

    /// Radial dilation f(ρz): coefficient n scaled by ρ^n.
    pub fn dilate(&self, rho: f64) -> Self {
        self.map_coeffs(|n| rho.powi(n as i32))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        TaylorPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }
}

/// Coefficient n divided by the odd moment w_{2n+1}.
///
/// This raises growth near the boundary the way (1-r²)^{-β} differentiation
/// does for the power-family weights, but calibrated to w.
pub fn frac_deriv(f: &TaylorPoly, w: &RadialWeight) -> Result<TaylorPoly> {
    w.prefetch_odd_moments(f.degree())?;
    let mut coeffs = Vec::with_capacity(f.degree() + 1);
    for (n, c) in f.coeffs().iter().enumerate() {
        coeffs.push(c / w.moment((2 * n + 1) as f64)?);
    }
    Ok(TaylorPoly::new(coeffs))
}

/// Inverse of [`frac_deriv`]: coefficient n multiplied by w_{2n+1}.
pub fn frac_integral(f: &TaylorPoly, w: &RadialWeight) -> Result<TaylorPoly> {
    w.prefetch_odd_moments(f.degree())?;
    let mut coeffs = Vec::with_capacity(f.degree() + 1);
    for (n, c) in f.coeffs().iter().enumerate() {
        coeffs.push(c * w.moment((2 * n + 1) as f64)?);
    }
    Ok(TaylorPoly::new(coeffs))
}

/// Coefficient n multiplied by 2Γ(n+β+1)/(Γ(β+1)Γ(n+1)), the power-family
/// fractional derivative of order β > 0, computed in log-Gamma form so
/// large degrees cannot overflow.
pub fn classical_frac_deriv(f: &TaylorPoly, beta: f64) -> Result<TaylorPoly> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::BadExponent {
            x: beta,
            requirement: "fractional order must be > 0",
        });
    }
    let lg_beta1 = ln_gamma(beta + 1.0);
    Ok(f.map_coeffs(|n| {
        let nf = n as f64;
        (2f64.ln() + ln_gamma(nf + beta + 1.0) - lg_beta1 - ln_gamma(nf + 1.0)).exp()
    }))
}

/// Coefficient n multiplied by (n+1)^β.
pub fn multiplier_transform(f: &TaylorPoly, beta: f64) -> TaylorPoly {
    f.map_coeffs(|n| ((n + 1) as f64).powf(beta))
}

/// Coefficientwise product; degree is the smaller of the two.
pub fn hadamard(wp: &TaylorPoly, f: &TaylorPoly) -> TaylorPoly {
    let n = wp.coeffs().len().min(f.coeffs().len());
    TaylorPoly::new((0..n).map(|k| wp.coeff(k) * f.coeff(k)).collect())
}

/// Smooth step and the dyadic bump derived from it.
///
/// The step is Ψ(t) = φ(2-t)/(φ(2-t) + φ(t-1)) with φ(s) = e^{-1/s} for
/// s > 0 and 0 otherwise: identically 1 up to t = 1, identically 0 from
/// t = 2, strictly decreasing between (all exactly in floating point, since
/// φ underflows to an exact 0 at its edge). The bump is
/// ψ(t) = Ψ(t/2) - Ψ(t), supported on (1, 4) and equal to 1 at t = 2.
#[derive(Clone, Copy, Debug, Default)]
pub struct SmoothCutoff;

/// Construct the cutoff pair.
pub fn smooth_cutoff() -> SmoothCutoff {
    SmoothCutoff
}

fn phi(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

impl SmoothCutoff {
    /// The smooth step: 1 on (-inf, 1], 0 on [2, inf).
    pub fn step(&self, t: f64) -> f64 {
        if t <= 1.0 {
            return 1.0;
        }
        if t >= 2.0 {
            return 0.0;
        }
        let a = phi(2.0 - t);
        a / (a + phi(t - 1.0))
    }

    /// The dyadic bump: step(t/2) - step(t), supported on (1, 4).
    pub fn bump(&self, t: f64) -> f64 {
        self.step(0.5 * t) - self.step(t)
    }

    /// Central-difference derivative of the step, orders 1 and 2.
    pub fn step_derivative(&self, t: f64, m: usize) -> Result<f64> {
        finite_difference(|x| self.step(x), t, m)
    }

    /// Central-difference derivative of the bump, orders 1 and 2.
    pub fn bump_derivative(&self, t: f64, m: usize) -> Result<f64> {
        finite_difference(|x| self.bump(x), t, m)
    }
}

/// Central finite differences with one Richardson refinement for orders 1
/// and 2 (step 1e-4), plain stencils at a wider step for orders 3 and 4.
fn finite_difference<F: Fn(f64) -> f64>(f: F, x: f64, m: usize) -> Result<f64> {
    match m {
        0 => Ok(f(x)),
        1 => {
            let h = 1e-4;
            let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
            Ok((4.0 * d(0.5 * h) - d(h)) / 3.0)
        }
        2 => {
            let h = 1e-4;
            let d = |h: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            Ok((4.0 * d(0.5 * h) - d(h)) / 3.0)
        }
        3 => {
            let h = 4e-3;
            Ok((f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h))
                / (2.0 * h * h * h))
        }
        4 => {
            let h = 4e-3;
            Ok(
                (f(x + 2.0 * h) - 4.0 * f(x + h) + 6.0 * f(x) - 4.0 * f(x - h)
                    + f(x - 2.0 * h))
                    / (h * h * h * h),
            )
        }
        _ => Err(Error::UnsupportedOrder { m }),
    }
}

/// Block polynomial of dyadic level n.
///
/// Level 0 is 1 + z. Level n ≥ 1 has coefficients bump(k/2^{n-1}) for
/// k in [2^{n-1}, 2^{n+1}-1] and zeros elsewhere. Coefficientwise the
/// levels telescope: for every k, the level sums of coefficient k equal 1,
/// so Hadamard-multiplying a polynomial by all levels and summing
/// reconstructs it.
pub fn cesaro_block(n: usize, cutoff: &SmoothCutoff) -> TaylorPoly {
    if n == 0 {
        return TaylorPoly::from_real(&[1.0, 1.0]);
    }
    let scale = 1usize << (n - 1);
    let hi = 4 * scale - 1;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); hi + 1];
    for (k, c) in coeffs.iter_mut().enumerate().skip(scale) {
        *c = Complex64::new(cutoff.bump(k as f64 / scale as f64), 0.0);
    }
    TaylorPoly::new(coeffs)
}

/// Window polynomial with coefficients phi(k/n) over phi's support.
///
/// Coefficients below the support are zero; the degree is the largest k
/// with k/n inside the support.
pub fn w_phi<F: Fn(f64) -> f64>(n: usize, phi: F, support: (f64, f64)) -> TaylorPoly {
    assert!(n >= 1, "window scale must be at least 1");
    let (a, b) = support;
    assert!(a < b, "empty support");
    let hi = (b * n as f64).ceil() as usize;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); hi + 1];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let t = k as f64 / n as f64;
        if t >= a && t <= b {
            *c = Complex64::new(phi(t), 0.0);
        }
    }
    TaylorPoly::new(coeffs)
}

/// Smoothness functional max|phi| + m·max|phi^{(m)}| over the support,
/// by dense sampling at step 1e-4 with finite-difference derivatives.
pub fn a_phi_m<F: Fn(f64) -> f64>(phi: F, support: (f64, f64), m: usize) -> Result<f64> {
    if m > 4 {
        return Err(Error::UnsupportedOrder { m });
    }
    let (a, b) = support;
    let step = 1e-4;
    let n = ((b - a) / step).ceil() as usize;
    let mut max_val = 0.0f64;
    let mut max_deriv = 0.0f64;
    for i in 0..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        max_val = max_val.max(phi(x).abs());
        if m > 0 {
            max_deriv = max_deriv.max(finite_difference(&phi, x, m)?.abs());
        }
    }
    Ok(max_val + m as f64 * max_deriv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::RadialWeight;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_and_derivative_basics() {
        let f = TaylorPoly::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(f.eval(c(0.0, 0.0)), c(1.0, 0.0));
        let z = c(0.5, 0.25);
        let want = c(1.0, 0.0) + z * 2.0 + z * z * 3.0;
        assert!((f.eval(z) - want).norm() < 1e-15);
        let df = f.derivative();
        assert_eq!(df.coeffs(), &[c(2.0, 0.0), c(6.0, 0.0)]);
        assert_eq!(TaylorPoly::from_real(&[5.0]).derivative().degree(), 0);
    }

    #[test]
    fn frac_deriv_closed_form_for_constant_weight() {
        // Odd moments of the constant weight are 1/(2n+2).
        let w = RadialWeight::constant();
        for n in [0usize, 1, 5, 50] {
            let f = TaylorPoly::monomial(n);
            let d = frac_deriv(&f, &w).unwrap();
            let want = (2 * n + 2) as f64;
            assert!(
                (d.coeff(n).re - want).abs() < 1e-12 * want,
                "n = {n}: {} vs {want}",
                d.coeff(n).re
            );
        }
        // Constant polynomial: single coefficient divided by w_1.
        let one = TaylorPoly::from_real(&[1.0]);
        let d = frac_deriv(&one, &w).unwrap();
        assert!((d.coeff(0).re - 2.0).abs() < 1e-13);
    }

    #[test]
    fn frac_integral_inverts_frac_deriv() {
        let w = RadialWeight::standard(2.0).unwrap();
        let f = TaylorPoly::new((0..40).map(|n| c(1.0 / (n as f64 + 1.0), 0.3)).collect());
        let back = frac_integral(&frac_deriv(&f, &w).unwrap(), &w).unwrap();
        for n in 0..=f.degree() {
            assert!((back.coeff(n) - f.coeff(n)).norm() < 1e-13);
        }
    }

    #[test]
    fn classical_multipliers_match_gamma_arithmetic() {
        // Order 1 sends z^n to (2n+2) z^n.
        for n in [0usize, 3, 100] {
            let d = classical_frac_deriv(&TaylorPoly::monomial(n), 1.0).unwrap();
            assert!((d.coeff(n).re - (2 * n + 2) as f64).abs() < 1e-10);
        }
        // Order 2 at n = 3: 2·Γ(6)/(Γ(3)Γ(4)) = 2·120/12 = 20.
        let d = classical_frac_deriv(&TaylorPoly::monomial(3), 2.0).unwrap();
        assert!((d.coeff(3).re - 20.0).abs() < 1e-12);
        assert!(classical_frac_deriv(&TaylorPoly::monomial(1), 0.0).is_err());
    }

    #[test]
    fn standard_weight_reproduces_classical_derivative() {
        for beta in [0.5, 1.0, 2.0, 3.7] {
            let w = RadialWeight::standard(beta).unwrap();
            let f = TaylorPoly::new((0..=64).map(|n| c(1.0, -0.5 / (n as f64 + 1.0))).collect());
            let a = frac_deriv(&f, &w).unwrap();
            let b = classical_frac_deriv(&f, beta).unwrap();
            for n in 0..=64 {
                let (x, y) = (a.coeff(n), b.coeff(n));
                assert!(
                    (x - y).norm() <= 1e-10 * y.norm(),
                    "beta = {beta}, n = {n}: {x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn multiplier_transform_examples() {
        let f = TaylorPoly::from_real(&[1.0, 1.0]);
        let g = multiplier_transform(&f, 1.0);
        assert_eq!(g.coeffs(), &[c(1.0, 0.0), c(2.0, 0.0)]);
        let f = TaylorPoly::new((0..20).map(|n| c(n as f64, 1.0)).collect());
        let round = multiplier_transform(&multiplier_transform(&f, -1.0), 1.0);
        for n in 0..20 {
            assert!((round.coeff(n) - f.coeff(n)).norm() < 1e-14);
        }
        assert_eq!(multiplier_transform(&f, 0.0), f);
    }

    #[test]
    fn hadamard_truncates_to_shorter_factor() {
        let w = TaylorPoly::from_real(&[1.0, 1.0]);
        let f = TaylorPoly::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(hadamard(&w, &f).coeffs(), &[c(1.0, 0.0), c(2.0, 0.0)]);
        let one = TaylorPoly::from_real(&[1.0]);
        assert_eq!(hadamard(&one, &f).coeffs(), &[c(1.0, 0.0)]);
    }

    #[test]
    fn hadamard_is_circular_convolution_on_the_circle() {
        // (W∗f)(e^{it}) = (1/2π) ∫ W(e^{i(t-θ)}) f(e^{iθ}) dθ; the trapezoid
        // rule on a full period is exact for trigonometric polynomials once
        // the sample count clears the bandwidth.
        let w = TaylorPoly::from_real(&[0.5, -1.0, 2.0, 0.25]);
        let f = TaylorPoly::new(vec![c(1.0, 0.5), c(0.0, -2.0), c(3.0, 0.0)]);
        let conv = hadamard(&w, &f);
        let q = 64;
        for t in [0.0, 0.7, 2.0] {
            let mut acc = c(0.0, 0.0);
            for j in 0..q {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / q as f64;
                let zw = Complex64::from_polar(1.0, t - theta);
                let zf = Complex64::from_polar(1.0, theta);
                acc += w.eval(zw) * f.eval(zf);
            }
            acc /= q as f64;
            let want = conv.eval(Complex64::from_polar(1.0, t));
            assert!((acc - want).norm() < 1e-10, "t = {t}: {acc} vs {want}");
        }
    }

    #[test]
    fn cutoff_step_values() {
        let cut = smooth_cutoff();
        assert_eq!(cut.step(0.5), 1.0);
        assert_eq!(cut.step(1.0), 1.0);
        assert_eq!(cut.step(2.0), 0.0);
        assert_eq!(cut.step(3.0), 0.0);
        assert!((cut.step(1.5) - 0.5).abs() < 1e-15);
        // Nonincreasing across (1, 2), strictly so away from the edges
        // (at the edges the complementary bump is below machine precision,
        // so the step is flat in floating point).
        let mut prev = 1.0;
        for i in 1..100 {
            let v = cut.step(1.0 + i as f64 / 100.0);
            assert!(v <= prev);
            if (1.2..=1.8).contains(&(1.0 + i as f64 / 100.0)) {
                assert!(v < prev);
            }
            prev = v;
        }
        // Bump support and normalization.
        assert_eq!(cut.bump(1.0), 0.0);
        assert_eq!(cut.bump(4.0), 0.0);
        assert_eq!(cut.bump(2.0), 1.0);
        for i in 0..=500 {
            let t = i as f64 / 100.0;
            assert!(cut.bump(t) >= 0.0);
            if !(1.0..4.0).contains(&t) {
                assert_eq!(cut.bump(t), 0.0, "t = {t}");
            }
        }
    }

    #[test]
    fn cutoff_derivatives_are_plausible() {
        let cut = smooth_cutoff();
        // Symmetric bump construction: step'(1.5) is the negative peak.
        let d1 = cut.step_derivative(1.5, 1).unwrap();
        assert!(d1 < -1.0 && d1 > -3.0, "{d1}");
        // step(1.5) = 1/2 is the inflection of the symmetric step.
        let d2 = cut.step_derivative(1.5, 2).unwrap();
        assert!(d2.abs() < 1e-4, "{d2}");
        // The bump is flat at its peak t = 2 (both pieces vanish to all
        // orders there); curvature lives on the shoulders.
        assert!(cut.bump_derivative(2.0, 2).unwrap().abs() < 1e-4);
        assert!(cut.bump_derivative(1.3, 2).unwrap().abs() > 0.1);
        assert!(matches!(
            finite_difference(|x| x, 0.0, 5),
            Err(Error::UnsupportedOrder { m: 5 })
        ));
    }

    #[test]
    fn block_zero_and_one() {
        let cut = smooth_cutoff();
        let v0 = cesaro_block(0, &cut);
        assert_eq!(v0.coeffs(), &[c(1.0, 0.0), c(1.0, 0.0)]);
        let v1 = cesaro_block(1, &cut);
        assert_eq!(v1.degree(), 3);
        assert_eq!(v1.coeff(0), c(0.0, 0.0));
        assert_eq!(v1.coeff(1), c(0.0, 0.0)); // bump(1) = 0
        assert_eq!(v1.coeff(2), c(1.0, 0.0)); // bump(2) = 1
        assert!(v1.coeff(3).re > 0.0);
    }

    #[test]
    fn blocks_partition_unity_coefficientwise() {
        let cut = smooth_cutoff();
        let k_max = 1 << 10;
        let mut sums = vec![0.0f64; k_max + 1];
        for n in 0..=12 {
            let v = cesaro_block(n, &cut);
            for k in 0..=k_max.min(v.degree()) {
                sums[k] += v.coeff(k).re;
            }
        }
        for (k, s) in sums.iter().enumerate() {
            assert!((s - 1.0).abs() <= 1e-14, "k = {k}: {s}");
        }
    }

    #[test]
    fn blocks_reconstruct_polynomials() {
        let cut = smooth_cutoff();
        let f = TaylorPoly::new(
            (0..=100)
                .map(|n| c((n as f64 * 0.37).sin(), (n as f64 * 0.11).cos()))
                .collect(),
        );
        let mut acc = TaylorPoly::new(vec![]);
        for n in 0..=8 {
            acc = acc.add(&hadamard(&cesaro_block(n, &cut), &f));
        }
        for k in 0..=100 {
            assert!(
                (acc.coeff(k) - f.coeff(k)).norm() < 1e-12,
                "k = {k}"
            );
        }
    }

    #[test]
    fn window_poly_scaling_and_consistency() {
        let cut = smooth_cutoff();
        // Support [1, 2] at scale 4 occupies k = 4..8.
        let wp = w_phi(4, |_| 1.0, (1.0, 2.0));
        assert_eq!(wp.degree(), 8);
        for k in 0..4 {
            assert_eq!(wp.coeff(k), c(0.0, 0.0));
        }
        for k in 4..=8 {
            assert_eq!(wp.coeff(k), c(1.0, 0.0));
        }
        // Scale-1 window of the bump matches block level 1.
        let v1 = cesaro_block(1, &cut);
        let wb = w_phi(1, |t| cut.bump(t), (1.0, 4.0));
        for k in 0..=3 {
            assert_eq!(v1.coeff(k), wb.coeff(k));
        }
    }

    #[test]
    fn smoothness_functional_values() {
        let cut = smooth_cutoff();
        // Order 0 is just the max, and the bump peaks at exactly 1.
        let a0 = a_phi_m(|t| cut.bump(t), (1.0, 4.0), 0).unwrap();
        assert!((a0 - 1.0).abs() < 1e-12, "{a0}");
        let a2 = a_phi_m(|t| cut.bump(t), (1.0, 4.0), 2).unwrap();
        assert!(a2.is_finite() && a2 > 1.0);
        assert!(a_phi_m(|t| cut.bump(t), (1.0, 4.0), 5).is_err());
    }
}
