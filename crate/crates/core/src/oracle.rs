//! Brute-force reference implementations used to cross-check the
//! production transform and estimator. Nothing here shares code with
//! [`crate::wavelet`] or [`crate::bump`].

use crate::bump::LipschitzEstimate;
use crate::wavelet::WaveletCoeffs;

/// Sampled, unit-norm Haar function at scale `j` (1 = finest) and shift
/// `k`, evaluated at sample `n`.
pub fn haar_atom(j: u32, k: usize, n: usize) -> f64 {
    let width = 2f64.powi(j as i32);
    let x = n as f64 / width - k as f64;
    let h = if (0.0..0.5).contains(&x) {
        1.0
    } else if (0.5..1.0).contains(&x) {
        -1.0
    } else {
        0.0
    };
    h / width.sqrt()
}

/// Haar coefficients by explicit inner products `sum_n x(n) psi_{j,k}(n)`.
pub fn oracle_dwt(values: &[f64]) -> WaveletCoeffs {
    let len = values.len();
    let levels = len.trailing_zeros();
    let mut details = Vec::new();
    for j in 1..=levels {
        let count = len / 2usize.pow(j);
        let mut d = Vec::with_capacity(count);
        for k in 0..count {
            let mut acc = 0.0;
            for (n, x) in values.iter().enumerate() {
                acc += x * haar_atom(j, k, n);
            }
            d.push(acc);
        }
        details.push(d);
    }
    let approx = values.iter().sum::<f64>() / (len as f64).sqrt();
    WaveletCoeffs { approx, details }
}

/// Strict local maxima, endpoints excluded; 0-based locations.
fn findpeaks(x: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut pks = Vec::new();
    let mut locs = Vec::new();
    for i in 1..x.len().saturating_sub(1) {
        if x[i] > x[i - 1] && x[i] > x[i + 1] {
            pks.push(x[i]);
            locs.push(i);
        }
    }
    (pks, locs)
}

/// Line-by-line transcription of the fixed two-scale regularity estimator,
/// including the unused third scale.
pub fn oracle_algorithm1(values: &[f64]) -> LipschitzEstimate {
    let l = 32usize;
    assert_eq!(values.len(), l, "oracle expects a 32-point window");
    let _levels = (l as f64).log2() as u32;
    let a = [[4.0, 7.0], [7.0, 25.0]];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let m = [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ];

    let w = oracle_dwt(values);
    let d1 = &w.details[0];
    let d2 = &w.details[1];
    let d3 = &w.details[2];

    let abs = |d: &Vec<f64>| d.iter().map(|v| v.abs()).collect::<Vec<f64>>();
    let (pks1, locs1) = findpeaks(&abs(d1));
    let (pks2, locs2) = findpeaks(&abs(d2));
    let (_pks3, _locs3) = findpeaks(&abs(d3));

    let mut p1 = f64::NAN;
    let mut location = 0usize;
    let mut normloc1 = f64::NAN;
    if !pks1.is_empty() {
        let mut i1 = 0;
        for i in 1..pks1.len() {
            if pks1[i] > pks1[i1] {
                i1 = i;
            }
        }
        p1 = pks1[i1];
        location = locs1[i1];
        // 1-based location, as a MATLAB-style peak finder returns it
        normloc1 = (location + 1) as f64 / 16.0;
    }
    let mut p2 = f64::NAN;
    if !pks2.is_empty() && !pks1.is_empty() {
        let normloc2: Vec<f64> = locs2.iter().map(|&l| (l + 1) as f64 / 8.0).collect();
        let normloc3: Vec<f64> = normloc2.iter().map(|n| n - normloc1).collect();
        let mut i2 = 0;
        for i in 1..normloc3.len() {
            if normloc3[i].abs() < normloc3[i2].abs() {
                i2 = i;
            }
        }
        p2 = pks2[i2];
    }
    if p1.is_nan() || p2.is_nan() {
        return LipschitzEstimate::INVALID;
    }
    let beta_hat = m[1][0] * (p1.log2() + p2.log2()) + m[1][1] * 7.0 * (p1.log2() + p2.log2());
    LipschitzEstimate {
        beta_hat,
        p1,
        p2,
        loc: 2 * location + 1,
        valid: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_input_has_zero_details() {
        let w = oracle_dwt(&[9.8; 32]);
        assert!(w.details.iter().flatten().all(|&d| d.abs() < 1e-12));
        assert!(!oracle_algorithm1(&[9.8; 32]).valid);
    }

    #[test]
    fn finest_atom_maps_to_unit_coefficient() {
        let x: Vec<f64> = (0..32).map(|n| haar_atom(1, 5, n)).collect();
        let w = oracle_dwt(&x);
        for (j, d) in w.details.iter().enumerate() {
            for (k, &v) in d.iter().enumerate() {
                let expect = if j == 0 && k == 5 { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_holds() {
        let x: Vec<f64> = (0..32).map(|i| ((i * 37 % 11) as f64).sin()).collect();
        let est = oracle_algorithm1(&x);
        assert!(est.valid);
        assert!((est.beta_hat - 7.0 / 17.0 * (est.p1 * est.p2).log2()).abs() < 1e-12);
    }
}
