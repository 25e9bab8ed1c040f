//! Symmetric banded storage and inertia counting by LDLᵀ without pivoting.

use crate::error::{Error, Result};

/// Symmetric matrix with lower bandwidth `bw`, stored column by column.
///
/// Entry `(j + r, j)` for `0 <= r <= bw` lives at `data[j * (bw + 1) + r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let r = hi - lo;
        (r <= self.bw && hi < self.n).then(|| lo * (self.bw + 1) + r)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Adds `v` to entry `(i, j)` (and implicitly `(j, i)`).
    ///
    /// Panics if the entry lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside bandwidth {}", self.bw));
        self.data[k] += v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.data[j * (self.bw + 1)]).collect()
    }

    /// Row-major dense copy, for small oracle comparisons.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for j in 0..self.n {
            for r in 0..=self.bw.min(self.n - 1 - j) {
                let v = self.data[j * (self.bw + 1) + r];
                out[j + r][j] = v;
                out[j][j + r] = v;
            }
        }
        out
    }

    /// `self - shift * other`; both matrices must share dimension and bandwidth.
    pub fn shifted(&self, shift: f64, other: &SymBandMatrix) -> SymBandMatrix {
        assert_eq!(self.n, other.n);
        assert_eq!(self.bw, other.bw);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(k, m)| k - shift * m)
            .collect();
        SymBandMatrix {
            n: self.n,
            bw: self.bw,
            data,
        }
    }
}

/// Outcome of one LDLᵀ sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Negatives(usize),
    TinyPivot(usize),
}

/// Counts negative pivots of the LDLᵀ factorization of `a`, consuming it as
/// workspace. A pivot with `|d_j| <= rel_tol * scale_j` aborts the sweep,
/// where `scale_j` is the magnitude of the original diagonal entry (or 1).
pub fn ldlt_negative_pivots(mut a: SymBandMatrix, rel_tol: f64) -> Sweep {
    let n = a.n;
    let w = a.bw + 1;
    let scales: Vec<f64> = a.diagonal().iter().map(|d| d.abs().max(1.0)).collect();
    let mut col = vec![0.0; w];
    let mut negatives = 0;
    for (j, &scale) in scales.iter().enumerate() {
        let base = j * w;
        let d = a.data[base];
        if !(d.abs() > rel_tol * scale) {
            return Sweep::TinyPivot(j);
        }
        if d < 0.0 {
            negatives += 1;
        }
        let rmax = a.bw.min(n - 1 - j);
        col[..=rmax].copy_from_slice(&a.data[base..=base + rmax]);
        for r in 1..=rmax {
            let ar = col[r];
            if ar == 0.0 {
                continue;
            }
            let l = ar / d;
            let target = (j + r) * w;
            let dst = &mut a.data[target..target + (rmax - r + 1)];
            for (x, &src) in dst.iter_mut().zip(&col[r..=rmax]) {
                *x -= l * src;
            }
        }
    }
    Sweep::Negatives(negatives)
}

/// Number of generalized eigenvalues of the pencil `(k, m)` strictly below
/// `lambda`, with `m` positive definite. Returns the count and the λ shift
/// that was applied when a near-zero pivot forced a retry.
pub fn pencil_count_below(
    k: &SymBandMatrix,
    m: &SymBandMatrix,
    lambda: f64,
) -> Result<(usize, f64)> {
    const RETRIES: usize = 3;
    const REL_TOL: f64 = 1e-14;
    let step = 1e-9 * (1.0 + lambda.abs());
    let mut last = 0;
    for attempt in 0..=RETRIES {
        let shift = -(attempt as f64) * step;
        match ldlt_negative_pivots(k.shifted(lambda + shift, m), REL_TOL) {
            Sweep::Negatives(c) => return Ok((c, shift)),
            Sweep::TinyPivot(j) => last = j,
        }
    }
    Err(Error::FactorizationBreakdown {
        index: last,
        retries: RETRIES,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SymBandMatrix {
        let mut a = SymBandMatrix::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i + 1 < n {
                a.add(i + 1, i, -1.0);
            }
        }
        a
    }

    fn identity(n: usize, bw: usize) -> SymBandMatrix {
        let mut a = SymBandMatrix::zeros(n, bw);
        for i in 0..n {
            a.add(i, i, 1.0);
        }
        a
    }

    #[test]
    fn tridiagonal_known_spectrum() {
        // eigenvalues 2 - 2cos(kπ/4): 0.586, 2, 3.414
        let k = laplacian_1d(3);
        let m = identity(3, 1);
        assert_eq!(pencil_count_below(&k, &m, 0.5).unwrap().0, 0);
        assert_eq!(pencil_count_below(&k, &m, 1.0).unwrap().0, 1);
        assert_eq!(pencil_count_below(&k, &m, 2.5).unwrap().0, 2);
        assert_eq!(pencil_count_below(&k, &m, 4.0).unwrap().0, 3);
    }

    #[test]
    fn exact_eigenvalue_triggers_downward_shift() {
        let k = laplacian_1d(3);
        let m = identity(3, 1);
        let (count, shift) = pencil_count_below(&k, &m, 2.0).unwrap();
        assert_eq!(count, 1);
        assert!(shift < 0.0);
    }

    #[test]
    fn symmetric_access() {
        let mut a = SymBandMatrix::zeros(4, 2);
        a.add(0, 2, 3.0);
        assert_eq!(a.get(2, 0), 3.0);
        assert_eq!(a.get(0, 2), 3.0);
        assert_eq!(a.get(0, 3), 0.0);
        let d = a.to_dense();
        assert_eq!(d[0][2], d[2][0]);
    }

    #[test]
    #[should_panic]
    fn out_of_band_add_panics() {
        let mut a = SymBandMatrix::zeros(4, 1);
        a.add(0, 3, 1.0);
    }
}
