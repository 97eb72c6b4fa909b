//! Dyadic tail levels, the lacunary series that tracks 1/tail, and the
//! bounded-in-norm / unbounded-in-sup witness built from them.
//!
//! Everything here works with the weight normalized so tail(0) = 1; the
//! applied scale factor is carried in the outputs. Radii are paired with
//! their boundary distances δ = 1 − r because the deep levels live far below
//! the f64 spacing at 1.

use num_complex::Complex64;
use serde::Serialize;

use crate::band::RatioBand;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::series::TaylorPoly;
use crate::weight::RadialWeight;

/// Deepest boundary distance probed when deciding whether a level is
/// reachable.
const DELTA_FLOOR: f64 = 1e-14;

/// Hard cap on the dense-polynomial degree of the witness function.
pub const DENSE_DEGREE_CAP: u64 = 1 << 20;

/// Radii r_n where the normalized tail crosses 2^{-n}, with the induced
/// exponents M_n = floor(1/(1 - r_n)).
#[derive(Debug, Clone, Serialize)]
pub struct LacunaryData {
    pub weight: String,
    /// Factor the tail was multiplied by so tail(0) = 1.
    pub scale_factor: f64,
    pub nmax: usize,
    pub radii: Vec<f64>,
    /// Boundary distances 1 - r_n, exact where r_n rounds.
    pub deltas: Vec<f64>,
    pub exponents: Vec<u64>,
}

/// Largest δ with tail(1-δ) ≤ target, found by bisection with geometric
/// midpoints down to adjacent floats. Returning the inside end makes the
/// result the leftmost radius where a continuous tail attains the target,
/// and lands exactly on representable crossings (tail δ at target 2^{-n}
/// gives δ = 2^{-n} bit for bit).
fn level_delta(w: &RadialWeight, target: f64) -> f64 {
    let mut lo = DELTA_FLOOR;
    let mut hi = 1.0;
    let below = |d: f64| w.tail_lossy(d) <= target;
    if below(hi) {
        return hi;
    }
    debug_assert!(below(lo));
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Levels r_0..r_nmax with tail(r_n) = 2^{-n} (leftmost crossing) for the
/// normalized weight, and exponents M_n = floor(1/δ_n).
pub fn dyadic_radii(w: &RadialWeight, nmax: usize) -> Result<LacunaryData> {
    let wn = w.normalized()?;
    if nmax > 40 {
        return Err(Error::DepthUnreachable {
            requested: nmax,
            achievable: 40,
        });
    }
    // Reachability: the deepest probed tail value caps the attainable level.
    let floor_tail = wn.tail_lossy(DELTA_FLOOR);
    if floor_tail > (-(nmax as f64)).exp2() {
        let achievable = (-floor_tail.log2()).floor().max(0.0) as usize;
        return Err(Error::DepthUnreachable {
            requested: nmax,
            achievable,
        });
    }
    let mut radii = Vec::with_capacity(nmax + 1);
    let mut deltas = Vec::with_capacity(nmax + 1);
    let mut exponents = Vec::with_capacity(nmax + 1);
    for n in 0..=nmax {
        let d = level_delta(&wn, (-(n as f64)).exp2());
        deltas.push(d);
        radii.push(1.0 - d);
        exponents.push((1.0 / d).floor() as u64);
    }
    Ok(LacunaryData {
        weight: w.label().to_string(),
        scale_factor: wn.scale_factor() / w.scale_factor(),
        nmax,
        radii,
        deltas,
        exponents,
    })
}

/// 1 + Σ_{n ≤ nmax} 2^n r^{M_n}, with a geometric estimate of what the
/// missing levels past nmax would add; estimates above 1% of the sum are
/// refused as under-resolved.
pub fn lacunary_sum(d: &LacunaryData, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::RadiusOutOfRange { r });
    }
    let terms = level_terms(d, d.nmax, r);
    let sum = 1.0 + terms.iter().sum::<f64>();
    let last = *terms.last().unwrap();
    let prev = if terms.len() >= 2 {
        terms[terms.len() - 2]
    } else {
        // Single level: fall back on the worst-case next ratio 2r.
        last / (2.0 * r).max(f64::MIN_POSITIVE)
    };
    let ratio = if prev > 0.0 { last / prev } else { 0.0 };
    let estimate = if ratio < 1.0 {
        last * ratio / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    if estimate > 0.01 * sum {
        return Err(Error::Truncation {
            n: d.nmax,
            ratio: estimate / sum,
            target: 0.01,
            suggested: d.nmax + 5,
        });
    }
    Ok(sum)
}

/// Terms 2^n r^{M_n} for n ≤ depth. Powers go through exp(M ln1p(-δ)):
/// δ = 1 - r is exact for r ≥ 1/2 and the log form survives M beyond 1e12.
fn level_terms(d: &LacunaryData, depth: usize, r: f64) -> Vec<f64> {
    let ln_r = (-(1.0 - r)).ln_1p();
    (0..=depth.min(d.nmax))
        .map(|n| (n as f64).exp2() * (d.exponents[n] as f64 * ln_r).exp())
        .collect()
}

/// Band of lacunary_sum(r) · tail(r) over the grid, the two-sided comparison
/// the levels were built for. Radii past the resolved depth (truncation
/// refusal) or past tail underflow end the sweep with the truncated flag.
pub fn lacunary_band(w: &RadialWeight, d: &LacunaryData, grid: &RadialGrid) -> Result<RatioBand> {
    let wn = w.normalized()?;
    let mut keys = Vec::new();
    let mut values = Vec::new();
    let mut truncated = false;
    for p in &grid.points {
        let tail = match wn.tail_1m(p.delta) {
            Ok(t) => t,
            Err(Error::TailUnderflow { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let sum = match lacunary_sum(d, p.r) {
            Ok(s) => s,
            Err(Error::Truncation { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        keys.push(p.r);
        values.push(sum * tail);
    }
    if values.is_empty() {
        return Err(Error::BadWeight(
            "no grid radius is resolved by the requested level depth".into(),
        ));
    }
    Ok(RatioBand::from_rows(keys, values, truncated))
}

/// The witness function μ_1 + Σ μ_{2M_n+1} 2^n z^{M_n} (normalized moments)
/// in dense form, plus the level data it was built from.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub data: LacunaryData,
    pub poly: TaylorPoly,
    /// Set when distinct levels shared an exponent and their coefficients
    /// were summed into one monomial.
    pub duplicates_merged: bool,
}

pub fn counterexample_function(w: &RadialWeight, nmax: usize) -> Result<Counterexample> {
    let data = dyadic_radii(w, nmax)?;
    let wn = w.normalized()?;
    let top = *data.exponents.last().unwrap();
    if top > DENSE_DEGREE_CAP {
        return Err(Error::DegreeCap {
            degree: top,
            cap: DENSE_DEGREE_CAP,
        });
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); top as usize + 1];
    coeffs[0] = Complex64::new(wn.moment(1.0)?, 0.0);
    let mut duplicates_merged = false;
    let mut seen_before = std::collections::HashSet::new();
    for (n, &m) in data.exponents.iter().enumerate() {
        if !seen_before.insert(m) {
            duplicates_merged = true;
        }
        let c = wn.moment(2.0 * m as f64 + 1.0)? * (n as f64).exp2();
        coeffs[m as usize] += Complex64::new(c, 0.0);
    }
    Ok(Counterexample {
        data,
        poly: TaylorPoly::new(coeffs),
        duplicates_merged,
    })
}

/// f(r) for the depth-k truncation of the witness. All coefficients are
/// positive, so this is also its max modulus on the circle of radius r.
fn witness_growth(d: &LacunaryData, coeffs: &[f64], depth: usize, mu1: f64, r: f64) -> f64 {
    let ln_r = (-(1.0 - r)).ln_1p();
    let mut v = mu1;
    for n in 0..=depth.min(d.nmax) {
        v += coeffs[n] * (d.exponents[n] as f64 * ln_r).exp();
    }
    v
}

/// Weighted sup-norm of the depth-k truncation over the grid. The derivative
/// divides coefficient M_n by μ_{2M_n+1}, leaving 1 + Σ 2^n z^{M_n} whose
/// max modulus sits on the positive axis, so no dense transform is needed.
fn witness_norm(d: &LacunaryData, depth: usize, wn: &RadialWeight, grid: &RadialGrid) -> Result<f64> {
    let mut sup = 0.0_f64;
    for p in &grid.points {
        let tail = match wn.tail_1m(p.delta) {
            Ok(t) => t,
            Err(Error::TailUnderflow { .. }) => break,
            Err(e) => return Err(e),
        };
        let sum = 1.0 + level_terms(d, depth, p.r).iter().sum::<f64>();
        sup = sup.max(tail * sum);
    }
    Ok(sup)
}

/// Membership evidence for the witness: its weighted norm is stable under
/// deepening while its coefficient sums keep growing.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub weight: String,
    pub scale_factor: f64,
    pub nmax: usize,
    pub duplicates_merged: bool,
    /// Weighted sup-norm of the truncation at depth nmax.
    pub norm_at_depth: f64,
    /// Same at depth `deeper_nmax`.
    pub norm_deeper: f64,
    /// Depth of the deeper truncation: nmax + 5 when the tail resolves that
    /// far, otherwise the deepest reachable level.
    pub deeper_nmax: usize,
    /// |deeper - base| / base.
    pub norm_rel_change: f64,
    /// S_k = μ_1 + Σ_{n≤k} μ_{2M_n+1} 2^n for k ≤ nmax.
    pub partial_sums: Vec<f64>,
    pub sums_increasing: bool,
    /// S_nmax / S_0.
    pub divergence_factor: f64,
    /// (r, f(r)) along the grid for the depth-nmax truncation.
    pub growth: Vec<(f64, f64)>,
}

pub fn counterexample_report(
    w: &RadialWeight,
    nmax: usize,
    grid: &RadialGrid,
) -> Result<CounterexampleReport> {
    let deep = match dyadic_radii(w, nmax + 5) {
        Ok(d) => d,
        // The deepening probe is best-effort: when the tail cannot resolve
        // five extra levels, deepen as far as it goes instead of failing.
        Err(Error::DepthUnreachable { achievable, .. }) if achievable >= nmax => {
            dyadic_radii(w, achievable)?
        }
        Err(e) => return Err(e),
    };
    let wn = w.normalized()?;
    // Moment coefficients μ_{2M_n+1} 2^n for every level of the deep run.
    let mut coeffs = Vec::with_capacity(deep.nmax + 1);
    let mut duplicates_merged = false;
    for (n, &m) in deep.exponents.iter().enumerate() {
        if n > 0 && deep.exponents[n - 1] == m {
            duplicates_merged = true;
        }
        coeffs.push(wn.moment(2.0 * m as f64 + 1.0)? * (n as f64).exp2());
    }
    let mu1 = wn.moment(1.0)?;
    let norm_at_depth = witness_norm(&deep, nmax, &wn, grid)?;
    let norm_deeper = witness_norm(&deep, deep.nmax, &wn, grid)?;
    let norm_rel_change = (norm_deeper - norm_at_depth).abs() / norm_at_depth;
    let mut partial_sums = Vec::with_capacity(nmax + 1);
    let mut s = mu1;
    for c in coeffs.iter().take(nmax + 1) {
        s += c;
        partial_sums.push(s);
    }
    let sums_increasing = partial_sums.windows(2).all(|p| p[1] > p[0]);
    let divergence_factor = partial_sums[nmax] / partial_sums[0];
    let growth = grid
        .points
        .iter()
        .map(|p| (p.r, witness_growth(&deep, &coeffs, nmax, mu1, p.r)))
        .collect();
    Ok(CounterexampleReport {
        weight: w.label().to_string(),
        scale_factor: deep.scale_factor,
        nmax,
        duplicates_merged,
        norm_at_depth,
        norm_deeper,
        deeper_nmax: deep.nmax,
        norm_rel_change,
        partial_sums,
        sums_increasing,
        divergence_factor,
        growth,
    })
}
