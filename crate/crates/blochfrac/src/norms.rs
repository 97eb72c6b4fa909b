//! Integral means on circles and weighted sup-norms built from them.
//!
//! Everything here acts on polynomials, so circle values come from a single
//! inverse FFT per radius and `M_p` integrals are exact trapezoid sums once
//! the angular sample count exceeds the bandwidth. Sup-norms over the disc
//! reduce to sups of radial profiles because all weights involved are radial.

use std::cell::RefCell;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::series::{frac_deriv, TaylorPoly};
use crate::weight::RadialWeight;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Angular sample count for a polynomial of the given degree: enough to make
/// the trapezoid rule exact for |f|^2 and heavily oversampled for other p.
pub fn angular_samples(degree: usize) -> usize {
    4096.max(8 * degree)
}

/// Values of f on the circle of radius `r` at `q` equispaced angles,
/// starting from the positive real axis. Requires `q > deg(f)`.
pub fn circle_values(f: &TaylorPoly, r: f64, q: usize) -> Result<Vec<Complex64>> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::RadiusOutOfRange { r });
    }
    assert!(q > f.degree(), "angular sample count must exceed the degree");
    let mut buf = vec![Complex64::new(0.0, 0.0); q];
    for (n, c) in f.coeffs().iter().enumerate() {
        buf[n] = c * r.powi(n as i32);
    }
    // Unnormalized inverse DFT sends coefficient n to sum_n c_n r^n e^{+2pi i n j / q}.
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_inverse(q);
        fft.process(&mut buf);
    });
    Ok(buf)
}

/// Integral mean M_p(r, f) for p in (0, inf]; p = inf gives the max modulus
/// over the sampled circle. r = 1 is allowed: polynomials are continuous on
/// the closed disc.
pub fn integral_mean(f: &TaylorPoly, r: f64, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::BadExponent {
            x: p,
            requirement: "integral means need p > 0",
        });
    }
    let q = angular_samples(f.degree());
    let vals = circle_values(f, r, q)?;
    if p.is_infinite() {
        return Ok(vals.iter().map(|v| v.norm()).fold(0.0_f64, f64::max));
    }
    let sum: f64 = vals.iter().map(|v| v.norm().powf(p)).sum();
    Ok((sum / q as f64).powf(1.0 / p))
}

/// Hardy space H^p norm of a polynomial: M_p(1, f).
pub fn hardy_norm(f: &TaylorPoly, p: f64) -> Result<f64> {
    integral_mean(f, 1.0, p)
}

/// Radial profile of a weighted sup-norm: per-radius values over a grid,
/// their sup (sharpened by local search around the best grid point), and the
/// last few values as a decay witness near the boundary.
#[derive(Debug, Clone, Serialize)]
pub struct NormProfile {
    /// Weight label, if a weight participates in the value function.
    pub weight: Option<String>,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub sup: f64,
    /// Radius where the sup is attained (after local refinement).
    pub argmax: f64,
    /// Values at the last five computed radii, shallowest first.
    pub decay_tail: Vec<f64>,
    /// True when the sweep stopped early because the weight's tail
    /// underflowed; `radii` and `values` then cover a prefix of the grid.
    pub truncated: bool,
}

/// Grid sweep of a radial value function. `value(r)` returns Ok(None) to
/// signal that this and all deeper radii are numerically out of reach.
fn sweep<V>(grid: &RadialGrid, value: V) -> Result<(Vec<f64>, Vec<f64>, bool)>
where
    V: Fn(f64) -> Result<Option<f64>> + Sync,
{
    let computed: Vec<(f64, Result<Option<f64>>)> = grid
        .points
        .par_iter()
        .map(|p| (p.r, value(p.r)))
        .collect();
    let mut radii = Vec::with_capacity(computed.len());
    let mut values = Vec::with_capacity(computed.len());
    let mut truncated = false;
    for (r, outcome) in computed {
        match outcome? {
            Some(v) => {
                radii.push(r);
                values.push(v);
            }
            None => {
                truncated = true;
                break;
            }
        }
    }
    if values.is_empty() {
        return Err(Error::BadWeight(
            "value profile is empty: every grid radius underflowed".into(),
        ));
    }
    Ok((radii, values, truncated))
}

/// Golden-section maximization on [lo, hi]. The profiles refined here are
/// smooth and unimodal near the grid argmax, so this recovers the interior
/// maximum to near machine precision.
fn golden_max<V>(mut lo: f64, mut hi: f64, value: V) -> Result<f64>
where
    V: Fn(f64) -> Result<Option<f64>>,
{
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let eval = |r: f64| -> Result<f64> { Ok(value(r)?.unwrap_or(0.0)) };
    let mut c = hi - INVPHI * (hi - lo);
    let mut d = lo + INVPHI * (hi - lo);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for _ in 0..70 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INVPHI * (hi - lo);
            fc = eval(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INVPHI * (hi - lo);
            fd = eval(d)?;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(fc.max(fd))
}

/// Sweep a grid, then sharpen the sup by searching between the neighbors of
/// the best grid point. Returns the assembled profile.
fn profiled_sup<V>(weight: Option<String>, grid: &RadialGrid, value: V) -> Result<NormProfile>
where
    V: Fn(f64) -> Result<Option<f64>> + Sync,
{
    let (radii, values, truncated) = sweep(grid, &value)?;
    let (mut best_j, mut sup) = (0usize, f64::NEG_INFINITY);
    for (j, &v) in values.iter().enumerate() {
        if v > sup {
            sup = v;
            best_j = j;
        }
    }
    let mut argmax = radii[best_j];
    // Bracket the refinement by the adjacent grid radii (grid radii increase).
    let lo = if best_j > 0 { radii[best_j - 1] } else { 0.0 };
    let hi = if best_j + 1 < radii.len() {
        radii[best_j + 1]
    } else {
        radii[best_j]
    };
    if hi > lo {
        let refined = golden_max(lo, hi, &value)?;
        if refined > sup {
            sup = refined;
            // Good enough for reporting: the refined argmax lies in (lo, hi).
            argmax = 0.5 * (lo + hi);
        }
    }
    let tail_len = values.len().min(5);
    let decay_tail = values[values.len() - tail_len..].to_vec();
    Ok(NormProfile {
        weight,
        radii,
        values,
        sup,
        argmax,
        decay_tail,
        truncated,
    })
}

/// Profile of (1 - r) M_inf(r, f') over the grid. The Bloch norm adds |f(0)|.
pub fn bloch_profile(f: &TaylorPoly, grid: &RadialGrid) -> Result<NormProfile> {
    let df = f.derivative();
    profiled_sup(None, grid, move |r| {
        Ok(Some((1.0 - r) * integral_mean(&df, r, f64::INFINITY)?))
    })
}

/// Bloch norm |f(0)| + sup over the grid of (1 - r) M_inf(r, f'), with the
/// sup sharpened by local search.
pub fn bloch_norm(f: &TaylorPoly, grid: &RadialGrid) -> Result<f64> {
    Ok(f.coeff(0).norm() + bloch_profile(f, grid)?.sup)
}

/// Weighted sup-norm profile: tail(r) M_inf(r, D^mu f) over the grid, where
/// D^mu divides coefficient n by the odd moment of index 2n + 1. Radii where
/// the tail underflows are dropped and flagged, not treated as zero.
pub fn bmu_norm(f: &TaylorPoly, w: &RadialWeight, grid: &RadialGrid) -> Result<NormProfile> {
    let df = frac_deriv(f, w)?;
    profiled_sup(Some(w.label().to_string()), grid, move |r| {
        let tail = match w.tail(r) {
            Ok(t) => t,
            Err(Error::TailUnderflow { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        Ok(Some(tail * integral_mean(&df, r, f64::INFINITY)?))
    })
}

/// Boundary decay witness for membership in the little space: the value
/// profile at the deepest grid radii plus a monotone-trend flag. With a
/// weight the values are tail(r) M_inf(r, D^mu f); without, (1 - r) M_inf(r, f').
#[derive(Debug, Clone, Serialize)]
pub struct DecayTrend {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// True when the reported values are nonincreasing toward the boundary.
    pub decreasing: bool,
    pub truncated: bool,
}

pub fn little_decay_profile(
    f: &TaylorPoly,
    w: Option<&RadialWeight>,
    grid: &RadialGrid,
) -> Result<DecayTrend> {
    let profile = match w {
        Some(w) => bmu_norm(f, w, grid)?,
        None => bloch_profile(f, grid)?,
    };
    let keep = profile.values.len().min(8);
    let start = profile.values.len() - keep;
    let radii = profile.radii[start..].to_vec();
    let values = profile.values[start..].to_vec();
    let decreasing = values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    Ok(DecayTrend {
        radii,
        values,
        decreasing,
        truncated: profile.truncated,
    })
}

/// Deterministic corpus of random polynomials: degrees log-uniform in
/// [1, max_degree] so each degree octave is sampled equally, coefficients
/// complex standard normal.  Extremal norm-ratio statistics localize at the
/// low-degree end for rapidly decreasing weights; a log-uniform law keeps
/// corpus maxima stable when the corpus grows.
pub fn random_corpus(seed: u64, count: usize, max_degree: usize) -> Vec<TaylorPoly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = 1.0_f64;
    let hi = max_degree.max(1) as f64;
    (0..count)
        .map(|_| {
            let t: f64 = rng.gen_range(0.0..=1.0);
            let deg = (lo * (hi / lo).powf(t)).round() as usize;
            let coeffs = (0..=deg)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im)
                })
                .collect();
            TaylorPoly::new(coeffs)
        })
        .collect()
}

/// Seed for the shared experiment corpus.
pub const CORPUS_SEED: u64 = 0x424c_4f43;
