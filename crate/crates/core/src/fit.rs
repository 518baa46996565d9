//! Small least-squares helpers.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

/// Ordinary least-squares line through (x, y).
pub fn line_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::Fit("x and y differ in length".into()));
    }
    if x.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {}", x.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(LineFit { slope, intercept, rms })
}

/// Solves min |A c - y| for A given by columns, via Householder QR.
pub fn lstsq(cols: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let k = cols.len();
    let m = y.len();
    if k == 0 || cols.iter().any(|c| c.len() != m) {
        return Err(Error::Fit("design matrix shape mismatch".into()));
    }
    if m < k {
        return Err(Error::Fit(format!("{m} observations for {k} unknowns")));
    }
    // column-scaled copy
    let scale: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().fold(0.0f64, |a, v| a.max(v.abs())))
        .collect();
    if scale.iter().any(|&s| s == 0.0) {
        return Err(Error::Fit("design matrix has a zero column".into()));
    }
    let mut a: Vec<Vec<f64>> = cols
        .iter()
        .zip(&scale)
        .map(|(c, s)| c.iter().map(|v| v / s).collect())
        .collect();
    let mut b = y.to_vec();
    let mut diag = vec![0.0; k];
    for j in 0..k {
        let norm = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Fit("rank-deficient design".into()));
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vn = v.iter().map(|x| x * x).sum::<f64>();
        for col in a.iter_mut().skip(j) {
            let d: f64 = col[j..].iter().zip(&v).map(|(x, y)| x * y).sum::<f64>() * 2.0 / vn;
            for (x, vi) in col[j..].iter_mut().zip(&v) {
                *x -= d * vi;
            }
        }
        let d: f64 = b[j..].iter().zip(&v).map(|(x, y)| x * y).sum::<f64>() * 2.0 / vn;
        for (x, vi) in b[j..].iter_mut().zip(&v) {
            *x -= d * vi;
        }
        diag[j] = a[j][j];
    }
    let rmax = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let rmin = diag.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    if rmin <= 1e-14 * rmax {
        return Err(Error::Conditioning("least-squares design is numerically singular".into()));
    }
    let mut c = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = b[i];
        for j in i + 1..k {
            acc -= a[j][i] * c[j];
        }
        c[i] = acc / a[i][i];
    }
    Ok(c.iter().zip(&scale).map(|(v, s)| v / s).collect())
}

/// Coefficient of variation (population standard deviation over |mean|).
pub fn coefficient_of_variation(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean.abs()
}
