//! Discrete Haar wavelet transform by explicit basis matrix.
//!
//! The basis matrix `B` holds one orthonormal Haar vector per column:
//! column 0 is the constant (approximation) vector, followed by the detail
//! vectors ordered from the coarsest scale to the finest. Scale `j = 1` is
//! the finest, with support of two samples and `L / 2` translations. Since
//! `B` is orthonormal the forward transform is `B^T x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HaarBasis {
    size: usize,
    levels: usize,
    // row-major, size x size; column c is basis vector c
    matrix: Vec<f64>,
}

/// Column of the basis matrix holding detail `(j, k)`.
fn column_of(size: usize, j: usize, k: usize) -> usize {
    (size >> j) + k
}

impl HaarBasis {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 || !size.is_power_of_two() {
            return Err(Error::Config(format!(
                "Haar basis length must be a power of two >= 2, got {size}"
            )));
        }
        let levels = size.trailing_zeros() as usize;
        let mut matrix = vec![0.0; size * size];

        let c0 = 1.0 / (size as f64).sqrt();
        for n in 0..size {
            matrix[n * size] = c0;
        }
        for j in 1..=levels {
            let support = 1usize << j;
            let half = support / 2;
            let amp = 1.0 / (support as f64).sqrt();
            for k in 0..size / support {
                let col = column_of(size, j, k);
                let start = k * support;
                for n in start..start + half {
                    matrix[n * size + col] = amp;
                }
                for n in start + half..start + support {
                    matrix[n * size + col] = -amp;
                }
            }
        }
        Ok(Self {
            size,
            levels,
            matrix,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Entry `B[row][col]`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.size + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.matrix[row * self.size..(row + 1) * self.size]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.size).map(|r| self.get(r, col)).collect()
    }

    /// Largest deviation of `B^T B` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.size;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n).map(|r| self.get(r, a) * self.get(r, b)).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Reconstruct a signal from its coefficients (`B c`).
    pub fn synthesize(&self, coeffs: &WaveletCoeffs) -> Result<Vec<f64>> {
        let flat = coeffs.to_flat();
        if flat.len() != self.size {
            return Err(Error::Shape {
                expected: self.size,
                actual: flat.len(),
            });
        }
        Ok((0..self.size)
            .map(|r| self.row(r).iter().zip(&flat).map(|(b, c)| b * c).sum())
            .collect())
    }
}

/// Haar coefficients of one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletCoeffs {
    pub approx: f64,
    /// `details[j - 1]` holds scale `j`; index 0 is the finest scale.
    pub details: Vec<Vec<f64>>,
}

impl WaveletCoeffs {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Detail coefficients at scale `j` (1 = finest).
    pub fn detail_scale(&self, j: usize) -> Result<&[f64]> {
        if j == 0 || j > self.details.len() {
            return Err(Error::ScaleIndex {
                index: j,
                levels: self.details.len(),
            });
        }
        Ok(&self.details[j - 1])
    }

    pub fn finest(&self) -> &[f64] {
        self.details.first().map_or(&[], |d| d.as_slice())
    }

    /// Coefficients in basis-column order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = vec![self.approx];
        for d in self.details.iter().rev() {
            out.extend_from_slice(d);
        }
        out
    }

    pub fn energy(&self) -> f64 {
        self.approx * self.approx + self.details.iter().flatten().map(|c| c * c).sum::<f64>()
    }
}

/// Forward transform `B^T x`.
pub fn dwt(values: &[f64], basis: &HaarBasis) -> Result<WaveletCoeffs> {
    let n = basis.size;
    if values.len() != n {
        return Err(Error::Shape {
            expected: n,
            actual: values.len(),
        });
    }
    // Positive and negative basis entries are accumulated separately so
    // that a constant window gives exactly zero details.
    let flat: Vec<f64> = (0..n)
        .map(|c| {
            let (mut pos, mut neg) = (0.0, 0.0);
            for (r, &x) in values.iter().enumerate() {
                let b = basis.get(r, c);
                if b > 0.0 {
                    pos += b * x;
                } else if b < 0.0 {
                    neg += b * x;
                }
            }
            pos + neg
        })
        .collect();
    let details = (1..=basis.levels)
        .map(|j| {
            let start = column_of(n, j, 0);
            flat[start..start + (n >> j)].to_vec()
        })
        .collect();
    Ok(WaveletCoeffs {
        approx: flat[0],
        details,
    })
}

/// How runs of equal values are treated by [`find_peaks`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakPolicy {
    /// Only elements strictly greater than both neighbours.
    #[default]
    Strict,
    /// A flat top bounded by lower values on both sides reports its
    /// leftmost index.
    PlateauLeft,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Peaks {
    pub values: Vec<f64>,
    pub locs: Vec<usize>,
}

impl Peaks {
    pub fn is_empty(&self) -> bool {
        self.locs.is_empty()
    }

    /// Largest peak as `(value, loc)`; the earliest wins ties.
    pub fn max(&self) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for (&v, &l) in self.values.iter().zip(&self.locs) {
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, l));
            }
        }
        best
    }
}

/// Local maxima of `series`. Endpoints are never peaks.
pub fn find_peaks(series: &[f64], policy: PeakPolicy) -> Peaks {
    let mut peaks = Peaks::default();
    if series.len() < 3 {
        return peaks;
    }
    let mut i = 1;
    while i + 1 < series.len() {
        let prev = series[i - 1];
        let cur = series[i];
        if cur > prev {
            match policy {
                PeakPolicy::Strict => {
                    if cur > series[i + 1] {
                        peaks.values.push(cur);
                        peaks.locs.push(i);
                    }
                }
                PeakPolicy::PlateauLeft => {
                    let mut end = i;
                    while end + 1 < series.len() && series[end + 1] == cur {
                        end += 1;
                    }
                    if end + 1 < series.len() && series[end + 1] < cur {
                        peaks.values.push(cur);
                        peaks.locs.push(i);
                    }
                    i = end.max(i);
                }
            }
        }
        i += 1;
    }
    peaks
}
