//! Bjøntegaard delta rate.
//!
//! Each curve's `log10(rate)` is interpolated as a function of quality with a
//! shape-preserving piecewise cubic (Fritsch-Carlson derivatives, the same
//! scheme as SciPy's `PchipInterpolator`). The interpolants are integrated
//! exactly over the overlapping quality range and the mean log-rate
//! difference is reported as a percentage. Negative means the test curve
//! needs fewer bits.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub rate: f64,
    pub quality: f64,
}

/// At least two points with strictly increasing, positive rates.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    points: Vec<RatePoint>,
}

impl RateCurve {
    pub fn new(points: Vec<RatePoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewPoints(points.len()));
        }
        for p in &points {
            if !(p.rate.is_finite() && p.rate > 0.0) || !p.quality.is_finite() {
                return Err(Error::InvalidCurve(format!("point ({}, {}) is not usable", p.rate, p.quality)));
            }
        }
        if points.windows(2).any(|w| w[1].rate <= w[0].rate) {
            return Err(Error::InvalidCurve("rates must be strictly increasing".into()));
        }
        Ok(RateCurve { points })
    }

    pub fn points(&self) -> &[RatePoint] {
        &self.points
    }
}

/// Piecewise cubic Hermite interpolant with monotonicity-preserving slopes.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    /// `x` must be strictly increasing with at least two knots.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::TooFewPoints(n));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCurve("qualities must be distinct".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (a, b) = (delta[k - 1], delta[k]);
                if a * b > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / a + w2 / b);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Pchip { x, y, d })
    }

    fn segment(&self, v: f64) -> usize {
        match self.x.partition_point(|&k| k <= v) {
            0 => 0,
            i => (i - 1).min(self.x.len() - 2),
        }
    }

    pub fn eval(&self, v: f64) -> f64 {
        let k = self.segment(v);
        let h = self.x[k + 1] - self.x[k];
        let t = (v - self.x[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        self.y[k] * (2.0 * t3 - 3.0 * t2 + 1.0)
            + h * self.d[k] * (t3 - 2.0 * t2 + t)
            + self.y[k + 1] * (-2.0 * t3 + 3.0 * t2)
            + h * self.d[k + 1] * (t3 - t2)
    }

    /// Antiderivative of segment `k` in its local coordinate `t`, scaled by h.
    fn seg_primitive(&self, k: usize, t: f64) -> f64 {
        let h = self.x[k + 1] - self.x[k];
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        h * (self.y[k] * (t4 / 2.0 - t3 + t)
            + h * self.d[k] * (t4 / 4.0 - 2.0 * t3 / 3.0 + t2 / 2.0)
            + self.y[k + 1] * (-t4 / 2.0 + t3)
            + h * self.d[k + 1] * (t4 / 4.0 - t3 / 3.0))
    }

    /// Exact integral over `[a, b]` within the knot range.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integrate(b, a);
        }
        let (ka, kb) = (self.segment(a), self.segment(b));
        let local = |k: usize, v: f64| (v - self.x[k]) / (self.x[k + 1] - self.x[k]);
        if ka == kb {
            return self.seg_primitive(ka, local(ka, b)) - self.seg_primitive(ka, local(ka, a));
        }
        let mut total = self.seg_primitive(ka, 1.0) - self.seg_primitive(ka, local(ka, a));
        for k in ka + 1..kb {
            total += self.seg_primitive(k, 1.0) - self.seg_primitive(k, 0.0);
        }
        total + self.seg_primitive(kb, local(kb, b)) - self.seg_primitive(kb, 0.0)
    }
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// Log-rate interpolant over quality, plus its quality range.
fn log_rate_model(c: &RateCurve) -> Result<(Pchip, f64, f64)> {
    let mut pts = c.points().to_vec();
    pts.sort_by(|a, b| a.quality.total_cmp(&b.quality));
    let q: Vec<f64> = pts.iter().map(|p| p.quality).collect();
    let lr: Vec<f64> = pts.iter().map(|p| p.rate.log10()).collect();
    let (lo, hi) = (q[0], q[q.len() - 1]);
    Ok((Pchip::new(q, lr)?, lo, hi))
}

pub fn bd_rate(reference: &RateCurve, test: &RateCurve) -> Result<f64> {
    let (pr, rlo, rhi) = log_rate_model(reference)?;
    let (pt, tlo, thi) = log_rate_model(test)?;
    let (lo, hi) = (rlo.max(tlo), rhi.min(thi));
    if hi <= lo {
        return Err(Error::NoQualityOverlap);
    }
    let avg = (pt.integrate(lo, hi) - pr.integrate(lo, hi)) / (hi - lo);
    Ok((10f64.powf(avg) - 1.0) * 100.0)
}
