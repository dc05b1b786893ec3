//! Sparse row storage and a banded LU solver for the temperature system.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Relative residual every solve must reach.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Square sparse matrix stored as per-row `(column, value)` lists.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            rows: alloc::vec![Vec::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Adds `value` to entry `(row, col)`.
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        let r = &mut self.rows[row];
        match r.iter_mut().find(|e| e.0 == col) {
            Some(e) => e.1 += value,
            None => r.push((col, value)),
        }
    }

    pub fn scale_row(&mut self, row: usize, factor: f64) {
        for e in &mut self.rows[row] {
            e.1 *= factor;
        }
    }

    pub fn row(&self, row: usize) -> &[(usize, f64)] {
        &self.rows[row]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.rows[row]
            .iter()
            .find(|e| e.0 == col)
            .map_or(0.0, |e| e.1)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(c, v)| v * x[c]).sum())
            .collect()
    }

    /// Lower and upper bandwidths `(kl, ku)`.
    pub fn bandwidth(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, _) in row {
                if c < r {
                    kl = kl.max(r - c);
                } else {
                    ku = ku.max(c - r);
                }
            }
        }
        (kl, ku)
    }
}

/// LU factors of a banded matrix, computed without pivoting.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    /// `min |u_kk| / max |u_kk|`, a cheap conditioning indicator.
    pub pivot_ratio: f64,
}

impl BandLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let n = a.dim();
        let (kl, ku) = a.bandwidth();
        let width = kl + ku + 1;
        let mut data = alloc::vec![0.0; n * width];
        let mut row_scale = alloc::vec![0.0f64; n];
        for r in 0..n {
            for &(c, v) in a.row(r) {
                data[r * width + c + kl - r] = v;
                row_scale[r] = row_scale[r].max(libm::fabs(v));
            }
        }
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot: f64 = 0.0;
        for k in 0..n {
            let pivot = data[k * width + kl];
            let mag = libm::fabs(pivot);
            if !(mag > 1e-13 * row_scale[k]) {
                return Err(Error::Singular {
                    row: k,
                    pivot_ratio: if max_pivot > 0.0 {
                        mag / max_pivot
                    } else {
                        0.0
                    },
                });
            }
            min_pivot = min_pivot.min(mag);
            max_pivot = max_pivot.max(mag);
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku).min(n - 1);
            let (head, tail) = data.split_at_mut((k + 1) * width);
            let pivot_row = &head[k * width + kl..k * width + kl + (last_col - k) + 1];
            for r in k + 1..=last_row {
                let base = (r - k - 1) * width;
                let off = k + kl - r;
                let l = tail[base + off] / pivot;
                tail[base + off] = l;
                if l != 0.0 {
                    let dst = &mut tail[base + off + 1..base + off + 1 + (last_col - k)];
                    for (d, u) in dst.iter_mut().zip(&pivot_row[1..]) {
                        *d -= l * u;
                    }
                }
            }
        }
        Ok(Self {
            n,
            kl,
            ku,
            width,
            data,
            pivot_ratio: if max_pivot > 0.0 {
                min_pivot / max_pivot
            } else {
                0.0
            },
        })
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.width);
        for r in 0..n {
            let first = r.saturating_sub(kl);
            let mut s = x[r];
            for c in first..r {
                s -= self.data[r * w + c + kl - r] * x[c];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let last = (r + ku).min(n - 1);
            let mut s = x[r];
            for c in r + 1..=last {
                s -= self.data[r * w + c + kl - r] * x[c];
            }
            x[r] = s / self.data[r * w + kl];
        }
    }
}

const REFINEMENT_STEPS: usize = 6;

/// `b − A x` with error-free products and compensated summation, so the
/// result is accurate to a few ulps of the residual itself rather than of
/// `|A||x|`.
pub fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    b.iter()
        .enumerate()
        .map(|(r, &bi)| {
            let mut sum = bi;
            let mut comp = 0.0;
            let mut push = |t: f64| {
                let s = sum + t;
                comp += if libm::fabs(sum) >= libm::fabs(t) {
                    (sum - s) + t
                } else {
                    (t - s) + sum
                };
                sum = s;
            };
            for &(c, v) in a.row(r) {
                let p = -v * x[c];
                let e = libm::fma(-v, x[c], -p);
                push(p);
                push(e);
            }
            sum + comp
        })
        .collect()
}

/// Solves `A x = b` to relative residual [`RESIDUAL_TOL`], refining the LU
/// solution with a few correction steps. Returns `x` and the final
/// relative residual `‖b − Ax‖∞ / ‖b‖∞`.
pub fn solve(a: &SparseMatrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let lu = BandLu::factor(a)?;
    let norm_b = b.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    let mut x = b.to_vec();
    lu.solve_in_place(&mut x);
    if norm_b == 0.0 {
        return Ok((x, 0.0));
    }
    let mut relative = f64::INFINITY;
    for _ in 0..REFINEMENT_STEPS {
        let mut r = residual(a, &x, b);
        relative = r.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v))) / norm_b;
        if relative <= RESIDUAL_TOL {
            return Ok((x, relative));
        }
        lu.solve_in_place(&mut r);
        for (x, d) in x.iter_mut().zip(&r) {
            *x += d;
        }
    }
    Err(Error::LinearResidual { relative })
}
