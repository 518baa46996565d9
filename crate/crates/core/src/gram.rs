//! Gram vectors, scalar Gram weights σ_p, Hessian entries and the
//! weighted Gram blocks G̃^{(q)}.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{check_s, Error, Result};
use crate::linalg::{sym_eig, SymMatrix};
use crate::maps::zeta_c;
use crate::raney::{raney, raney_ratio};

/// Default relative tolerance for series truncation.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn check_subcritical(s: u32, zeta: f64) -> Result<()> {
    check_s(s)?;
    let zc = zeta_c(s);
    if !(zeta > 0.0) {
        return Err(Error::Domain(format!("zeta = {zeta} must be positive")));
    }
    if zeta >= zc {
        return Err(Error::Divergence(format!(
            "zeta = {zeta} is at or beyond zeta_c = {zc}; the Gram series diverges"
        )));
    }
    Ok(())
}

/// ln(R_{s,p}(n) ζ^n) by the ratio recurrence.
fn ln_raney_zeta(s: u32, p: u64, n: u64, zeta: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..n {
        acc += raney_ratio(s, p, k).ln();
    }
    acc + n as f64 * zeta.ln()
}

/// Σ_m (p2+sm)² R_{p1}(m+Δ) R_{p2}(m) ζ^{2m+Δ} · exp(ln_prefactor), the
/// common kernel behind σ_p and the block entries. All terms are positive.
fn cross_series(s: u32, zeta: f64, p1: u64, p2: u64, delta: u64, ln_prefactor: f64, tol: f64) -> Result<f64> {
    let eta2 = (zeta / zeta_c(s)).powi(2);
    let z2 = zeta * zeta;
    let sf = s as f64;
    let (p1f, p2f, df) = (p1 as f64, p2 as f64, delta as f64);
    let mut term = (2.0 * p2f.ln() + ln_raney_zeta(s, p1, delta, zeta) + ln_prefactor).exp();
    if !term.is_finite() {
        return Err(Error::Validation("block entry prefactor overflows".into()));
    }
    let mut sum = KahanSum::default();
    let tail_factor = eta2 / (1.0 - eta2);
    // beyond this index the scaled terms are monotone
    let m_mono = 2 * (p1 + p2) + delta + 16;
    let cap = 200_000_000u64;
    let mut m = 0u64;
    loop {
        sum.add(term);
        let mf = m as f64;
        let a = mf + df;
        let mut num = (p2f + sf * (mf + 1.0)).powi(2) * z2;
        let mut den = (p2f + sf * mf).powi(2) * (a + 1.0) * (mf + 1.0);
        for k in 0..s {
            let kf = k as f64;
            num *= (sf * a + p1f + kf) * (sf * mf + p2f + kf);
        }
        for l in 1..s {
            let lf = l as f64;
            den *= ((sf - 1.0) * a + p1f + lf) * ((sf - 1.0) * mf + p2f + lf);
        }
        let r = num / den;
        term *= r;
        m += 1;
        if m > m_mono && r < eta2 && term * tail_factor < tol * sum.value() {
            break;
        }
        if term == 0.0 {
            break;
        }
        if m > cap {
            return Err(Error::Accuracy(format!("series not converged after {cap} terms")));
        }
    }
    Ok(sum.value())
}

/// σ_p(ζ) = Σ_m (p+ms)²/p · R_{s,p}(m)² ζ^{2m}.
pub fn sigma_p(s: u32, p: u64, zeta: f64, tol: f64) -> Result<f64> {
    check_subcritical(s, zeta)?;
    if p == 0 {
        return Err(Error::UnsupportedRange("p must be at least 1".into()));
    }
    cross_series(s, zeta, p, p, 0, -(p as f64).ln(), tol)
}

/// H_{mn} = mn Σ_{p ≡ m (s), p ≤ min(m,n)} R_{s,p}(k) R_{s,p}(l) ζ^{k+l} / p.
pub fn hessian_entry(s: u32, zeta: f64, m: u64, n: u64) -> Result<f64> {
    check_s(s)?;
    if m == 0 || n == 0 {
        return Err(Error::Domain("Hessian indices start at 1".into()));
    }
    let univ = 1.0 / (s as f64 - 1.0);
    if !(zeta > 0.0 && zeta < univ) {
        return Err(Error::Domain(format!("zeta = {zeta} outside (0, 1/(s-1))")));
    }
    let s64 = s as u64;
    if m % s64 != n % s64 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    let mut p = if m % s64 == 0 { s64 } else { m % s64 };
    while p <= m.min(n) {
        let (k, l) = ((m - p) / s64, (n - p) / s64);
        let rk = to_f64(&raney(s, p as i64, k)?);
        let rl = to_f64(&raney(s, p as i64, l)?);
        acc += rk * rl * zeta.powi((k + l) as i32) / p as f64;
        p += s64;
    }
    Ok((m * n) as f64 * acc)
}

fn to_f64(x: &num_bigint::BigUint) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// The p-th Gram vector v^{(p)}, supported on indices p + ms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramVector {
    pub s: u32,
    pub p: u64,
    pub zeta: f64,
    /// `entries[m]` is the component at index p + ms.
    pub entries: Vec<f64>,
}

impl GramVector {
    /// Component at index `n` (zero off the progression p + sℕ).
    pub fn component(&self, n: u64) -> f64 {
        let s = self.s as u64;
        if n < self.p || (n - self.p) % s != 0 {
            return 0.0;
        }
        self.entries.get(((n - self.p) / s) as usize).copied().unwrap_or(0.0)
    }
}

pub fn gram_vector(s: u32, p: u64, zeta: f64, m_max: usize) -> Result<GramVector> {
    check_s(s)?;
    if p == 0 {
        return Err(Error::UnsupportedRange("p must be at least 1".into()));
    }
    let sp = (p as f64).sqrt();
    let mut rz = 1.0;
    let mut entries = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max as u64 {
        entries.push((p + m * s as u64) as f64 / sp * rz);
        rz *= raney_ratio(s, p, m) * zeta;
    }
    Ok(GramVector { s, p, zeta, entries })
}

/// Compares Σ_p v^{(p)}_m v^{(p)}_n with [`hessian_entry`] at 1e-12 relative.
pub fn gram_consistency(s: u32, zeta: f64, m: u64, n: u64, p_max: u64) -> Result<bool> {
    let h = hessian_entry(s, zeta, m, n)?;
    let s64 = s as u64;
    let mut acc = 0.0;
    if m % s64 == n % s64 {
        let mut p = if m % s64 == 0 { s64 } else { m % s64 };
        let top = m.max(n);
        while p <= m.min(n).min(p_max) {
            let v = gram_vector(s, p, zeta, ((top - p) / s64) as usize)?;
            acc += v.component(m) * v.component(n);
            p += s64;
        }
    }
    if h == 0.0 {
        return Ok(acc == 0.0);
    }
    Ok(((acc - h) / h).abs() <= 1e-12)
}

/// M = s/(s-1).
pub fn m_ratio(s: u32) -> f64 {
    s as f64 / (s as f64 - 1.0)
}

/// p_j = q + js.
pub fn block_index(s: u32, q: u32, j: usize) -> u64 {
    q as u64 + j as u64 * s as u64
}

/// ln w_j with w_j = p_j^{3/2+β} M^{p_j}.
pub fn ln_weight(s: u32, q: u32, beta: f64, j: usize) -> f64 {
    let p = block_index(s, q, j) as f64;
    (1.5 + beta) * p.ln() + p * m_ratio(s).ln()
}

fn check_block(s: u32, q: u32, beta: f64) -> Result<()> {
    check_s(s)?;
    if q < 1 || q > s {
        return Err(Error::Domain(format!("sector q = {q} outside [1, {s}]")));
    }
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta = {beta} must be positive")));
    }
    Ok(())
}

/// G̃_{j1 j2} of the weighted block in sector q.
pub fn block_entry(s: u32, zeta: f64, q: u32, beta: f64, j1: usize, j2: usize, tol: f64) -> Result<f64> {
    check_subcritical(s, zeta)?;
    check_block(s, q, beta)?;
    let (lo, hi) = if j1 <= j2 { (j1, j2) } else { (j2, j1) };
    let p1 = block_index(s, q, lo);
    let p2 = block_index(s, q, hi);
    let ln_pre = -0.5 * ((p1 as f64).ln() + (p2 as f64).ln())
        - ln_weight(s, q, beta, lo)
        - ln_weight(s, q, beta, hi);
    cross_series(s, zeta, p1, p2, (hi - lo) as u64, ln_pre, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedBlock {
    pub s: u32,
    pub q: u32,
    pub beta: f64,
    pub zeta: f64,
    pub matrix: SymMatrix,
    /// w_j for j < N.
    pub weights: Vec<f64>,
}

impl WeightedBlock {
    pub fn n(&self) -> usize {
        self.matrix.dim()
    }

    /// min eigenvalue / max eigenvalue; PSD up to rounding when ≥ -1e-10.
    pub fn psd_ratio(&self) -> Result<f64> {
        let e = sym_eig(&self.matrix)?;
        Ok(e.values[e.values.len() - 1] / e.values[0])
    }
}

/// The N×N truncation of G̃^{(q)}, entries computed in parallel.
pub fn weighted_block(s: u32, zeta: f64, q: u32, beta: f64, n: usize, tol: f64) -> Result<WeightedBlock> {
    check_subcritical(s, zeta)?;
    check_block(s, q, beta)?;
    if n < 2 {
        return Err(Error::Domain("block dimension N must be at least 2".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let vals: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| block_entry(s, zeta, q, beta, i, j, tol))
        .collect();
    let mut matrix = SymMatrix::zeros(n);
    for (&(i, j), v) in pairs.iter().zip(vals) {
        matrix.set_sym(i, j, v?);
    }
    let weights = (0..n).map(|j| ln_weight(s, q, beta, j).exp()).collect();
    Ok(WeightedBlock { s, q, beta, zeta, matrix, weights })
}

/// Ṽ with rows indexed by i (Gram index q + is) and columns by j:
/// Ṽ_{ij} = v^{(p_j)}_{q+is} / w_j. Ṽᵀ Ṽ converges to G̃ as rows grows.
pub fn synthesis_matrix(s: u32, zeta: f64, q: u32, beta: f64, rows: usize, cols: usize) -> Result<Vec<Vec<f64>>> {
    check_block(s, q, beta)?;
    let mut out = vec![vec![0.0; cols]; rows];
    for j in 0..cols {
        let p = block_index(s, q, j);
        let lw = ln_weight(s, q, beta, j);
        let sp = (p as f64).sqrt();
        // ln(R_p(k) ζ^k), k = i - j
        let mut lr = 0.0;
        for (k, row) in out.iter_mut().skip(j).enumerate() {
            let n = (p + k as u64 * s as u64) as f64;
            row[j] = n / sp * (lr - lw).exp();
            lr += (raney_ratio(s, p, k as u64) * zeta).ln();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikeVector {
    pub c_s: f64,
    pub entries: Vec<f64>,
    pub gamma_truncated: f64,
    pub gamma_analytic: f64,
}

/// c_s = √(s/(2π(s-1))).
pub fn spike_constant(s: u32) -> f64 {
    let sf = s as f64;
    (sf / (2.0 * PI * (sf - 1.0))).sqrt()
}

/// Σ_{j≥0} (q + js)^{-a} for a > 1, by direct summation plus an
/// Euler-Maclaurin tail.
pub fn progression_zeta(s: u32, q: u32, a: f64) -> f64 {
    let (sf, qf) = (s as f64, q as f64);
    let big_j = 64.0;
    let mut acc = KahanSum::default();
    for j in 0..64 {
        acc.add((qf + j as f64 * sf).powf(-a));
    }
    let x = qf + big_j * sf;
    let f = x.powf(-a);
    let integral = x.powf(1.0 - a) / (sf * (a - 1.0));
    let d1 = -a * sf * x.powf(-a - 1.0);
    let d3 = -a * (a + 1.0) * (a + 2.0) * sf.powi(3) * x.powf(-a - 3.0);
    let d5 = -a * (a + 1.0) * (a + 2.0) * (a + 3.0) * (a + 4.0) * sf.powi(5) * x.powf(-a - 5.0);
    acc.add(integral + 0.5 * f - d1 / 12.0 + d3 / 720.0 - d5 / 30240.0);
    acc.value()
}

pub fn spike_vector(s: u32, q: u32, beta: f64, n: usize) -> Result<SpikeVector> {
    check_block(s, q, beta)?;
    if n < 1 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let c_s = spike_constant(s);
    let entries: Vec<f64> = (0..n)
        .map(|j| c_s * (block_index(s, q, j) as f64).powf(-1.0 - beta))
        .collect();
    let gamma_truncated = entries.iter().map(|d| d * d).sum();
    let gamma_analytic = c_s * c_s * progression_zeta(s, q, 2.0 + 2.0 * beta);
    Ok(SpikeVector { c_s, entries, gamma_truncated, gamma_analytic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raney::raney_table;
    use proptest::prelude::*;

    /// σ_p by the binomial form p Σ C(sm+p, m)² ζ^{2m}, exact coefficients.
    fn sigma_binomial_oracle(s: u32, p: u64, zeta: f64, terms: u64) -> f64 {
        let t = raney_table(s, p as i64, terms).unwrap();
        let mut acc = 0.0;
        for m in 0..=terms {
            let n = (p + m * s as u64) as f64;
            let rz = to_f64(&t.values[m as usize]) * zeta.powi(m as i32);
            acc += n * n / p as f64 * rz * rz;
        }
        acc
    }

    #[test]
    fn sigma_small_zeta() {
        let v = sigma_p(2, 1, 0.1, 1e-15).unwrap();
        let oracle: f64 = (0..20u64)
            .map(|m| {
                let c = to_f64(&raney(2, 1, m).unwrap());
                ((1 + 2 * m) as f64).powi(2) * c * c * 0.01f64.powi(m as i32)
            })
            .sum();
        assert!((v - oracle).abs() < 1e-14, "{v} vs {oracle}");
        assert!((v - 1.101408532238).abs() < 1e-11);
        assert!((sigma_p(3, 2, 1e-9, 1e-15).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_matches_exact_coefficients() {
        for (s, p) in [(2u32, 1u64), (3, 2), (5, 4)] {
            let z = 0.7 * zeta_c(s);
            let v = sigma_p(s, p, z, 1e-15).unwrap();
            let o = sigma_binomial_oracle(s, p, z, 250);
            assert!(((v - o) / o).abs() < 1e-13, "s={s} p={p}");
        }
    }

    #[test]
    fn sigma_refuses_threshold() {
        assert!(matches!(sigma_p(2, 1, 0.25, 1e-12), Err(Error::Divergence(_))));
        assert!(matches!(sigma_p(3, 1, 0.2, 1e-12), Err(Error::Divergence(_))));
    }

    #[test]
    fn hessian_examples() {
        assert_eq!(hessian_entry(2, 0.1, 1, 1).unwrap(), 1.0);
        assert!((hessian_entry(2, 0.1, 1, 3).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(hessian_entry(3, 0.1, 1, 3).unwrap(), 0.0);
        // H is defined past ζ_c up to ζ_univ
        assert!(hessian_entry(3, 0.3, 4, 7).unwrap() > 0.0);
        assert!(hessian_entry(3, 0.5, 4, 7).is_err());
    }

    #[test]
    fn selection_rule() {
        for s in [2u32, 3, 5] {
            for m in 1..=40 {
                for n in 1..=40 {
                    let h = hessian_entry(s, 0.05, m, n).unwrap();
                    assert_eq!(h == 0.0, m % s as u64 != n % s as u64);
                }
            }
        }
    }

    #[test]
    fn gram_identity() {
        for s in [2u32, 3] {
            let z = 0.5 * zeta_c(s);
            for m in 1..=30 {
                for n in 1..=30 {
                    assert!(gram_consistency(s, z, m, n, 30).unwrap(), "s={s} m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn block_entry_examples() {
        let e = block_entry(2, 0.1, 1, 1.0, 0, 0, 1e-14).unwrap();
        let sig = sigma_p(2, 1, 0.1, 1e-15).unwrap();
        assert!((e - sig / 4.0).abs() < 1e-15);
        assert!((e - 0.2753521330595).abs() < 1e-12);
        let z = 0.9 * zeta_c(3);
        let a = block_entry(3, z, 2, 1.0, 1, 4, 1e-13).unwrap();
        let b = block_entry(3, z, 2, 1.0, 4, 1, 1e-13).unwrap();
        assert_eq!(a, b);
        // diagonal equals σ/w²
        let p = block_index(3, 2, 3);
        let w = ln_weight(3, 2, 1.0, 3).exp();
        let d = block_entry(3, z, 2, 1.0, 3, 3, 1e-14).unwrap();
        assert!((d - sigma_p(3, p, z, 1e-14).unwrap() / (w * w)).abs() < 1e-13 * d);
    }

    #[test]
    fn block_entry_vs_explicit_gram_sum() {
        // independent order: Σ_n v^{(p1)}_n v^{(p2)}_n with exact Raney numbers
        let (s, q, beta) = (3u32, 1u32, 1.0);
        let z = 0.6 * zeta_c(s);
        for (j1, j2) in [(0usize, 2usize), (1, 5), (3, 3)] {
            let p1 = block_index(s, q, j1);
            let p2 = block_index(s, q, j2);
            let v1 = gram_vector(s, p1, z, 400).unwrap();
            let v2 = gram_vector(s, p2, z, 400).unwrap();
            let mut acc = 0.0;
            for k in 0..400u64 {
                let n = p2 + k * s as u64;
                acc += v1.component(n) * v2.component(n);
            }
            let w = (ln_weight(s, q, beta, j1) + ln_weight(s, q, beta, j2)).exp();
            let e = block_entry(s, z, q, beta, j1, j2, 1e-14).unwrap();
            assert!(((acc / w - e) / e).abs() < 1e-12, "({j1},{j2})");
        }
    }

    #[test]
    fn weighted_block_small_zeta_and_psd() {
        let b = weighted_block(2, 1e-8, 1, 1.0, 5, 1e-14).unwrap();
        for j in 0..5 {
            let p = block_index(2, 1, j) as f64;
            let w = b.weights[j];
            assert!((b.matrix.get(j, j) - p / (w * w)).abs() < 1e-12 * b.matrix.get(j, j));
        }
        let z = 0.999 * zeta_c(3);
        let b = weighted_block(3, z, 1, 1.0, 12, 1e-12).unwrap();
        assert!(b.matrix.asymmetry() == 0.0);
        assert!(b.psd_ratio().unwrap() > -1e-10);
        let tr: f64 = (0..12)
            .map(|j| sigma_p(3, block_index(3, 1, j), z, 1e-12).unwrap() / b.weights[j].powi(2))
            .sum();
        assert!(((b.matrix.trace() - tr) / tr).abs() < 1e-11);
    }

    #[test]
    fn diagonal_tail_exponent() {
        // the L-coefficient of G̃_jj decays like p_j^{-2-2β}; at fixed ζ the
        // diagonal itself falls off faster until L ≳ log p_j²
        let (s, q, beta) = (3u32, 1u32, 1.0);
        let zc = zeta_c(s);
        let l = |eta: f64| -(1.0 - eta * eta).ln();
        let pts: Vec<(f64, f64)> = (10..=40)
            .step_by(5)
            .map(|j| {
                let p = block_index(s, q, j);
                let a = block_entry(s, 0.99999 * zc, q, beta, j, j, 1e-13).unwrap();
                let b = block_entry(s, 0.999999 * zc, q, beta, j, j, 1e-13).unwrap();
                ((p as f64).ln(), ((b - a) / (l(0.999999) - l(0.99999))).ln())
            })
            .collect();
        let n = pts.len() as f64;
        let (mx, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope + 2.0 + 2.0 * beta).abs() < 0.2, "slope {slope}");
    }

    #[test]
    fn synthesis_factorisation() {
        let (s, q, beta) = (2u32, 1u32, 1.0);
        let z = 0.5 * zeta_c(s);
        let v = synthesis_matrix(s, z, q, beta, 200, 6).unwrap();
        let b = weighted_block(s, z, q, beta, 6, 1e-15).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let g: f64 = v.iter().map(|r| r[i] * r[j]).sum();
                assert!((g - b.matrix.get(i, j)).abs() < 1e-13 * b.matrix.max_abs());
            }
        }
    }

    #[test]
    fn spike_examples() {
        let sp = spike_vector(2, 1, 1.0, 3).unwrap();
        assert!((sp.c_s - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!((sp.entries[1] / sp.entries[0] - 1.0 / 9.0).abs() < 1e-15);
        assert!((sp.gamma_analytic - PI.powi(3) / 96.0).abs() < 1e-13);
        assert!(sp.gamma_truncated <= sp.gamma_analytic);
        // Σ_{j≥0} (1+j)^{-2} = π²/6
        assert!((progression_zeta(2, 2, 2.0) * 4.0 - PI * PI / 6.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn spike_decreasing(s in 2u32..8, beta in 0.1f64..2.0, n in 2usize..50) {
            let q = 1 + (n as u32 % s);
            let sp = spike_vector(s, q, beta, n).unwrap();
            prop_assert!(sp.entries.windows(2).all(|w| w[0] > w[1] && w[1] > 0.0));
            prop_assert!(sp.gamma_truncated <= sp.gamma_analytic * (1.0 + 1e-14));
        }

        #[test]
        fn gram_vectors_nonnegative(s in 2u32..6, p in 1u64..20, frac in 0.01f64..0.99) {
            let v = gram_vector(s, p, frac * zeta_c(s), 50).unwrap();
            prop_assert!(v.entries.iter().all(|&x| x >= 0.0));
            prop_assert_eq!(v.component(p + 1), if s == 1 { v.entries[1] } else { 0.0 });
        }
    }
}
