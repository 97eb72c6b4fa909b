use crate::error::{Error, Result};

/// Tabulated tail samples with monotone cubic interpolation.
///
/// Rows are (r, tail(r)) with r strictly increasing from 0 and tails positive
/// nonincreasing. Interpolation uses Hermite cubics with slopes limited so
/// the interpolant never overshoots the data (it stays nonincreasing).
/// Past the last row the tail extrapolates geometrically at the rate set by
/// the last two rows.
#[derive(Clone, Debug)]
pub struct TailTable {
    r: Vec<f64>,
    tail: Vec<f64>,
    slope: Vec<f64>,
}

impl TailTable {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::BadTable(format!(
                "need at least 2 rows, got {}",
                samples.len()
            )));
        }
        if samples[0].0 != 0.0 {
            return Err(Error::BadTable(format!(
                "first radius must be 0, got {}",
                samples[0].0
            )));
        }
        for (i, (r, t)) in samples.iter().enumerate() {
            if !r.is_finite() || !(*r < 1.0) {
                return Err(Error::BadTable(format!("row {i}: radius {r} not in [0, 1)")));
            }
            if !t.is_finite() || !(*t > 0.0) {
                return Err(Error::BadTable(format!("row {i}: tail {t} must be > 0")));
            }
            if i > 0 {
                if *r <= samples[i - 1].0 {
                    return Err(Error::BadTable(format!(
                        "row {i}: radii must strictly increase ({} after {})",
                        r,
                        samples[i - 1].0
                    )));
                }
                if *t > samples[i - 1].1 {
                    return Err(Error::BadTable(format!(
                        "row {i}: tails must be nonincreasing ({} after {})",
                        t,
                        samples[i - 1].1
                    )));
                }
            }
        }
        let r: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let tail: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let slope = monotone_slopes(&r, &tail);
        Ok(TailTable { r, tail, slope })
    }

    /// tail(1 - delta), interpolated or geometrically extrapolated.
    pub fn tail_1m(&self, delta: f64) -> f64 {
        let x = 1.0 - delta;
        let n = self.r.len();
        if x >= self.r[n - 1] {
            return self.extrapolate(x);
        }
        // Last interval with r[i] <= x.
        let i = match self.r.partition_point(|&ri| ri <= x) {
            0 => 0,
            p => p - 1,
        };
        let h = self.r[i + 1] - self.r[i];
        let t = (x - self.r[i]) / h;
        let (y0, y1) = (self.tail[i], self.tail[i + 1]);
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        v.max(0.0)
    }

    fn extrapolate(&self, x: f64) -> f64 {
        let n = self.r.len();
        let (r0, r1) = (self.r[n - 2], self.r[n - 1]);
        let (y0, y1) = (self.tail[n - 2], self.tail[n - 1]);
        if y0 == y1 {
            return y1;
        }
        let rate = (y1 / y0).ln() / (r1 - r0);
        y1 * (rate * (x - r1)).exp()
    }

    /// Radius past which values are extrapolated rather than interpolated.
    pub fn extrapolation_start(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Slopes for a monotonicity-preserving cubic Hermite interpolant: average
/// of adjacent secants, clamped to three times the smaller in magnitude and
/// zeroed where the secants change sign.
fn monotone_slopes(r: &[f64], y: &[f64]) -> Vec<f64> {
    let n = r.len();
    let d: Vec<f64> = (0..n - 1)
        .map(|i| (y[i + 1] - y[i]) / (r[i + 1] - r[i]))
        .collect();
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let avg = 0.5 * (d[i - 1] + d[i]);
            let cap = 3.0 * d[i - 1].abs().min(d[i].abs());
            m[i] = avg.clamp(-cap, cap);
        }
    }
    // End slopes must not point against their secant either.
    for (i, di) in [(0usize, d[0]), (n - 1, d[n - 2])] {
        if m[i] * di < 0.0 {
            m[i] = 0.0;
        } else if m[i].abs() > 3.0 * di.abs() {
            m[i] = 3.0 * di;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_table() -> TailTable {
        // Samples of tail(r) = 1 - r.
        let rows = (0..=10).map(|i| {
            let r = i as f64 / 10.0 * 0.9;
            (r, 1.0 - r)
        });
        TailTable::new(rows.collect()).unwrap()
    }

    #[test]
    fn reproduces_linear_data_exactly() {
        let t = linear_table();
        for r in [0.0, 0.05, 0.31, 0.62, 0.899] {
            assert!(
                (t.tail_1m(1.0 - r) - (1.0 - r)).abs() < 1e-14,
                "r = {r}"
            );
        }
    }

    #[test]
    fn interpolant_stays_within_data_range() {
        let rows = vec![(0.0, 1.0), (0.2, 0.9), (0.3, 0.2), (0.6, 0.19), (0.9, 0.01)];
        let t = TailTable::new(rows.clone()).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=900 {
            let r = k as f64 / 1000.0;
            let v = t.tail_1m(1.0 - r);
            assert!(v <= prev + 1e-14, "not monotone at r = {r}");
            assert!((0.0..=1.0).contains(&v));
            prev = v;
        }
        // Knots are hit exactly.
        for (r, y) in rows {
            assert!((t.tail_1m(1.0 - r) - y).abs() < 1e-15);
        }
    }

    #[test]
    fn extrapolation_is_geometric() {
        let rows = vec![(0.0, 1.0), (0.5, 0.5), (0.8, 0.1), (0.9, 0.01)];
        let t = TailTable::new(rows).unwrap();
        assert_eq!(t.extrapolation_start(), 0.9);
        // Rate from the last two rows: ratio 0.1 over Δr = 0.1.
        let v = t.tail_1m(1.0 - 0.95);
        let want = 0.01 * 0.1f64.powf(0.5);
        assert!((v - want).abs() < 1e-15, "{v} vs {want}");
        // Deep extrapolation stays positive and decreasing.
        assert!(t.tail_1m(1e-6) > 0.0);
        assert!(t.tail_1m(1e-6) < t.tail_1m(1e-3));
    }

    #[test]
    fn rejects_malformed_tables() {
        assert!(TailTable::new(vec![(0.0, 1.0)]).is_err());
        assert!(TailTable::new(vec![(0.1, 1.0), (0.5, 0.5)]).is_err());
        assert!(TailTable::new(vec![(0.0, 1.0), (0.5, 1.1)]).is_err());
        assert!(TailTable::new(vec![(0.0, 1.0), (0.5, 0.0)]).is_err());
        assert!(TailTable::new(vec![(0.0, 1.0), (0.5, 0.4), (0.5, 0.3)]).is_err());
        assert!(TailTable::new(vec![(0.0, 1.0), (1.0, 0.5)]).is_err());
    }
}
