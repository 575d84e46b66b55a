//! Scalar special functions used by the closed-form characteristic functions.

use crate::error::{DqsError, Result};
use nalgebra::DMatrix;

/// Above this argument `I0(x)` no longer fits in an `f64`.
pub const I0_OVERFLOW_THRESHOLD: f64 = 713.0;

const I0_SERIES_LIMIT: f64 = 15.0;

/// Generalized Laguerre polynomial `L_n^{(k)}(x)` by the ascending three-term recurrence.
///
/// Negative `k` is allowed down to `-n`.
pub fn laguerre(n: usize, k: i64, x: f64) -> Result<f64> {
    if k < -(n as i64) {
        return Err(DqsError::Domain(format!(
            "laguerre order k = {k} below -n = -{n}"
        )));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let k = k as f64;
    let mut prev = 1.0;
    let mut cur = 1.0 + k - x;
    for m in 1..n {
        let m = m as f64;
        let next = ((2.0 * m + 1.0 + k - x) * cur - (m + k) * prev) / (m + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Bessel function of the first kind, order zero.
///
/// Miller backward recurrence normalised by `J0 + 2 sum J_{2k} = 1`; absolute error is
/// a few ulps of unity for any finite argument.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-8 {
        return 1.0 - 0.25 * ax * ax;
    }
    let start = {
        let m = (ax + 30.0 + 10.0 * ax.sqrt()).ceil() as usize;
        m + m % 2
    };
    let two_over_x = 2.0 / ax;
    let mut j_next = 0.0;
    let mut j_cur = 1e-300;
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for n in (1..=start).rev() {
        let j_prev = n as f64 * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{n-1}
        if (n - 1) % 2 == 0 && n - 1 > 0 {
            norm += 2.0 * j_cur;
        }
        if n - 1 == 0 {
            j0 = j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
        }
    }
    j0 / (norm + j0)
}

/// Modified Bessel function of the first kind, order zero.
///
/// Power series up to `|x| = 15`, large-argument expansion beyond. Fails with
/// [`DqsError::Overflow`] above [`I0_OVERFLOW_THRESHOLD`].
pub fn bessel_i0(x: f64) -> Result<f64> {
    let ax = x.abs();
    if ax > I0_OVERFLOW_THRESHOLD {
        return Err(DqsError::Overflow(format!(
            "I0({x}) exceeds f64 range (threshold {I0_OVERFLOW_THRESHOLD})"
        )));
    }
    if ax <= I0_SERIES_LIMIT {
        Ok(i0_series(ax))
    } else {
        Ok(ax.exp() * i0_asymptotic_scaled(ax))
    }
}

/// `exp(-|x|) I0(x)`, finite for every argument.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= I0_SERIES_LIMIT {
        (-ax).exp() * i0_series(ax)
    } else {
        i0_asymptotic_scaled(ax)
    }
}

fn i0_series(ax: f64) -> f64 {
    let q = 0.25 * ax * ax;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

fn i0_asymptotic_scaled(ax: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd / (8.0 * k as f64 * ax);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * ax).sqrt()
}

/// `ln n!`, exact product up to 20 and Stirling series above.
pub fn log_factorial(n: u64) -> f64 {
    if n <= 20 {
        let mut p: u64 = 1;
        for k in 2..=n {
            p *= k;
        }
        return (p as f64).ln();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let corr = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + corr
}

/// Gauss-Hermite rule for the weight `exp(-x^2)`, nodes ascending.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_hermite needs at least one node");
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // enforce the exact mirror symmetry of the rule
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let node = 0.5 * (pairs[j].0 - pairs[i].0);
        let weight = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-node, weight);
        pairs[j] = (node, weight);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}
