//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson).

use crate::error::{invalid, Error, Result};
use std::path::Path;

/// Shape-preserving cubic interpolant of sampled data.
///
/// Outside the sampled range the interpolant continues exponentially,
/// `y(x) = y_end * exp(s * (x - x_end))` with `s = y'(x_end) / y_end`, which
/// keeps positive data positive.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(invalid("table columns differ in length"));
        }
        if xs.len() < 2 {
            return Err(invalid("table needs at least two samples"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("table abscissae must be strictly increasing"));
        }
        if ys.iter().chain(&xs).any(|v| !v.is_finite()) {
            return Err(invalid("table contains non-finite values"));
        }
        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            let (l, r) = (secants[i - 1], secants[i]);
            slopes[i] = if l * r <= 0.0 { 0.0 } else { 0.5 * (l + r) };
        }
        for i in 0..n - 1 {
            let d = secants[i];
            if d == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / d;
            let b = slopes[i + 1] / d;
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                slopes[i] = tau * a * d;
                slopes[i + 1] = tau * b * d;
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    /// Reads a two-column CSV `(x, value)` with a header line.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (lineno, line) in text.lines().enumerate().skip(1) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let parse = |c: Option<&str>| -> Result<f64> {
                c.and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| Error::Parse {
                    spec: path.display().to_string(),
                    reason: format!("bad row {}: `{line}`", lineno + 1),
                })
            };
            xs.push(parse(cols.next())?);
            ys.push(parse(cols.next())?);
        }
        Self::new(xs, ys)
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    fn edge_rate(&self, right: bool) -> f64 {
        let i = if right { self.xs.len() - 1 } else { 0 };
        if self.ys[i] == 0.0 {
            0.0
        } else {
            self.slopes[i] / self.ys[i]
        }
    }

    /// Value and first two derivatives at `x`.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            let right = x > self.xs[n - 1];
            let i = if right { n - 1 } else { 0 };
            let s = self.edge_rate(right);
            let y = self.ys[i] * (s * (x - self.xs[i])).exp();
            return [y, s * y, s * s * y];
        }
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let y = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let dy = (6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1;
        let d2y = (12.0 * t - 6.0) * y0
            + (6.0 * t - 4.0) * m0
            + (-12.0 * t + 6.0) * y1
            + (6.0 * t - 2.0) * m1;
        [y, dy / h, d2y / (h * h)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_samples_and_monotonicity() {
        let xs: Vec<f64> = (0..20).map(|i| 1.0 + 0.5 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(-2.0)).collect();
        let t = MonotoneCubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((t.eval(*x)[0] - y).abs() < 1e-14);
        }
        let mut prev = f64::INFINITY;
        for k in 0..1000 {
            let x = 1.0 + 9.5 * k as f64 / 999.0;
            let v = t.eval(x)[0];
            assert!(v > 0.0 && v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let xs: Vec<f64> = (0..40).map(|i| 1.0 + 0.25 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (-x).exp()).collect();
        let t = MonotoneCubic::new(xs, ys).unwrap();
        let x = 3.37;
        let h = 1e-6;
        let fd = (t.eval(x + h)[0] - t.eval(x - h)[0]) / (2.0 * h);
        assert!((fd - t.eval(x)[1]).abs() < 1e-7);
    }

    #[test]
    fn exponential_continuation_stays_positive() {
        let t = MonotoneCubic::new(vec![1.0, 2.0, 3.0], vec![1.0, 0.5, 0.25]).unwrap();
        assert!(t.eval(50.0)[0] > 0.0);
        assert!(t.eval(50.0)[0] < 1e-6);
    }

    #[test]
    fn rejects_unsorted() {
        assert!(MonotoneCubic::new(vec![1.0, 1.0], vec![1.0, 2.0]).is_err());
    }
}
