//! Exact Raney numbers R_{s,p}(n) = p/(sn+p) C(sn+p, n) and their
//! m^{-3/2} asymptotics.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use crate::error::{check_s, Error, Result};
use crate::maps::zeta_c;

fn check_p(p: i64) -> Result<u64> {
    if p <= 0 {
        return Err(Error::UnsupportedRange(format!("p = {p}; only p >= 1 is supported")));
    }
    Ok(p as u64)
}

/// R_{s,p}(n) from the closed form.
pub fn raney(s: u32, p: i64, n: u64) -> Result<BigUint> {
    check_s(s)?;
    let p = check_p(p)?;
    let top = s as u64 * n + p;
    // C(top, n) by the multiplicative formula; every partial quotient is integral.
    let mut c = BigUint::one();
    for i in 0..n {
        c *= top - i;
        c /= i + 1;
    }
    let num = c * p;
    let (q, r) = num.div_rem(&BigUint::from(top));
    debug_assert!(r.is_zero());
    Ok(q)
}

/// Numerator and denominator of R(n+1)/R(n).
fn ratio_parts(s: u32, p: u64, n: u64) -> (BigUint, BigUint) {
    let s = s as u64;
    let mut num = BigUint::one();
    for k in 0..s {
        num *= s * n + p + k;
    }
    let mut den = BigUint::from(n + 1);
    for l in 1..s {
        den *= (s - 1) * n + p + l;
    }
    (num, den)
}

/// R(n+1)/R(n) as a float.
pub fn raney_ratio(s: u32, p: u64, n: u64) -> f64 {
    let sf = s as f64;
    let (nf, pf) = (n as f64, p as f64);
    let mut r = 1.0 / (nf + 1.0);
    for k in 0..s as u64 {
        r *= sf * nf + pf + k as f64;
    }
    for l in 1..s as u64 {
        r /= (sf - 1.0) * nf + pf + l as f64;
    }
    r
}

/// R(n+1)/R(n) as an exact rational.
pub fn raney_ratio_exact(s: u32, p: u64, n: u64) -> BigRational {
    let (a, b) = ratio_parts(s, p, n);
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RaneyTable {
    pub s: u32,
    pub p: u64,
    #[serde(serialize_with = "ser_big")]
    pub values: Vec<BigUint>,
}

fn ser_big<S: serde::Serializer>(v: &[BigUint], ser: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = ser.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

impl RaneyTable {
    pub fn get(&self, n: usize) -> &BigUint {
        &self.values[n]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// R_{s,p}(0..=n_max) by the exact ratio recurrence.
pub fn raney_table(s: u32, p: i64, n_max: u64) -> Result<RaneyTable> {
    check_s(s)?;
    let p = check_p(p)?;
    let mut values = Vec::with_capacity(n_max as usize + 1);
    let mut cur = BigUint::one();
    values.push(cur.clone());
    for n in 0..n_max {
        let (num, den) = ratio_parts(s, p, n);
        let (q, r) = (cur * num).div_rem(&den);
        debug_assert!(r.is_zero());
        cur = q;
        values.push(cur.clone());
    }
    Ok(RaneyTable { s, p, values })
}

/// Checks Σ over compositions n_1+..+n_k = m of Π R_{s,p_i}(n_i) = R_{s,Σp}(m).
pub fn convolution_check(s: u32, p_list: &[i64], m: u64) -> Result<bool> {
    check_s(s)?;
    if p_list.is_empty() {
        return Err(Error::Domain("p_list is empty".into()));
    }
    let mut total = 0i64;
    let mut tables = Vec::with_capacity(p_list.len());
    for &p in p_list {
        check_p(p)?;
        total += p;
        tables.push(raney_table(s, p, m)?.values);
    }
    let mut sum = BigUint::zero();
    let mut parts = vec![0usize; p_list.len()];
    compositions(&tables, m as usize, 0, &mut parts, &mut sum);
    Ok(sum == raney(s, total, m)?)
}

fn compositions(
    tables: &[Vec<BigUint>],
    remaining: usize,
    idx: usize,
    parts: &mut [usize],
    sum: &mut BigUint,
) {
    if idx + 1 == tables.len() {
        parts[idx] = remaining;
        let mut prod = BigUint::one();
        for (t, &n) in tables.iter().zip(parts.iter()) {
            prod *= &t[n];
        }
        *sum += prod;
        return;
    }
    for n in 0..=remaining {
        parts[idx] = n;
        compositions(tables, remaining - n, idx + 1, parts, sum);
    }
}

/// Coefficients of U = 1 + t U^s to order n_max, obtained by iterating
/// the functional equation on truncated polynomials. Independent of the
/// closed form.
pub fn functional_equation_series(s: u32, n_max: usize) -> Result<Vec<BigUint>> {
    check_s(s)?;
    let mut u = vec![BigUint::zero(); n_max + 1];
    u[0] = BigUint::one();
    // each sweep fixes at least one more coefficient
    for _ in 0..=n_max {
        let us = poly_pow(&u, s as usize, n_max);
        let mut next = vec![BigUint::zero(); n_max + 1];
        next[0] = BigUint::one();
        next[1..=n_max].clone_from_slice(&us[..n_max]);
        if next == u {
            break;
        }
        u = next;
    }
    Ok(u)
}

/// Truncated product of two polynomials.
pub fn poly_mul(a: &[BigUint], b: &[BigUint], n_max: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); n_max + 1];
    for (i, x) in a.iter().enumerate().take(n_max + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n_max + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Truncated power of a polynomial.
pub fn poly_pow(a: &[BigUint], e: usize, n_max: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); n_max + 1];
    out[0] = BigUint::one();
    for _ in 0..e {
        out = poly_mul(&out, a, n_max);
    }
    out
}

/// The first n_max+1 Fuss-Catalan numbers R_{s,1}(n) as floats.
pub fn fuss_catalan_f64(s: u32, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut r = 1.0;
    for n in 0..=n_max as u64 {
        out.push(r);
        r *= raney_ratio(s, 1, n);
    }
    out
}

/// Natural logarithm of a big unsigned integer.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap() as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticData {
    pub amplitude: f64,
    #[serde(serialize_with = "crate::maps::ser_rational")]
    pub m_ratio: BigRational,
    #[serde(serialize_with = "crate::maps::ser_rational")]
    pub zeta_c: BigRational,
}

pub fn asymptotic_data(s: u32, p: i64) -> Result<AsymptoticData> {
    check_s(s)?;
    let p = check_p(p)?;
    let sf = s as f64;
    let m = sf / (sf - 1.0);
    let amplitude = p as f64 * m.powi(p as i32) / (2.0 * PI * sf * (sf - 1.0)).sqrt();
    Ok(AsymptoticData {
        amplitude,
        m_ratio: BigRational::new(BigInt::from(s), BigInt::from(s - 1)),
        zeta_c: crate::maps::thresholds(s)?.zeta_c,
    })
}

/// A_{s,p} ζ_c^{-m} m^{-3/2}; overflows to infinity for large m, see
/// [`ln_asymptotic_value`].
pub fn asymptotic_value(s: u32, p: i64, m: u64) -> Result<f64> {
    Ok(ln_asymptotic_value(s, p, m)?.exp())
}

pub fn ln_asymptotic_value(s: u32, p: i64, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    let a = asymptotic_data(s, p)?.amplitude;
    let mf = m as f64;
    Ok(a.ln() - mf * zeta_c(s).ln() - 1.5 * mf.ln())
}

/// R_{s,p}(m) divided by its leading asymptotic A ζ_c^{-m} m^{-3/2}, given
/// the exact value R.
pub fn asymptotic_ratio(s: u32, p: i64, m: u64, exact: &BigUint) -> Result<f64> {
    Ok((ln_big(exact) - ln_asymptotic_value(s, p, m)?).exp())
}

/// ε_{s,p}(m) in R = A ζ_c^{-m} m^{-3/2} (1 + ε).
pub fn uniform_expansion_error(s: u32, p: i64, m: u64) -> Result<f64> {
    let r = raney(s, p, m)?;
    Ok(asymptotic_ratio(s, p, m, &r)? - 1.0)
}

fn calibration_cache() -> &'static Mutex<HashMap<u32, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// C_s: twice the largest R/(p M^p ζ_c^{-m} m^{-3/2}) over 1 <= p, m <= 200.
pub fn uniform_bound_constant(s: u32) -> Result<f64> {
    check_s(s)?;
    if let Some(c) = calibration_cache().lock().unwrap().get(&s) {
        return Ok(*c);
    }
    let zc = zeta_c(s);
    let mm = s as f64 / (s as f64 - 1.0);
    let mut worst = 0.0f64;
    for p in 1..=200u64 {
        // scaled = R_{s,p}(m) ζ_c^m
        let mut scaled = 1.0;
        let norm = p as f64 * mm.powi(p as i32);
        for m in 1..=200u64 {
            scaled *= raney_ratio(s, p, m - 1) * zc;
            worst = worst.max(scaled * (m as f64).powf(1.5) / norm);
        }
    }
    let c = 2.0 * worst;
    calibration_cache().lock().unwrap().insert(s, c);
    Ok(c)
}

pub fn uniform_bound(s: u32, p: i64, m: u64) -> Result<f64> {
    Ok(ln_uniform_bound(s, p, m)?.exp())
}

pub fn ln_uniform_bound(s: u32, p: i64, m: u64) -> Result<f64> {
    let pu = check_p(p)?;
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    let c = uniform_bound_constant(s)?;
    let mm = s as f64 / (s as f64 - 1.0);
    let mf = m as f64;
    Ok(c.ln() + (pu as f64).ln() + pu as f64 * mm.ln() - mf * zeta_c(s).ln() - 1.5 * mf.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn catalan_and_fuss_catalan() {
        assert_eq!(raney_table(2, 1, 5).unwrap().values, big(&[1, 1, 2, 5, 14, 42]));
        assert_eq!(raney_table(3, 1, 3).unwrap().values, big(&[1, 1, 3, 12]));
        assert_eq!(raney(3, 2, 2).unwrap(), BigUint::from(7u32));
        assert_eq!(raney(2, 3, 1).unwrap(), BigUint::from(3u32));
        assert!(matches!(raney(2, 0, 3), Err(Error::UnsupportedRange(_))));
        assert!(matches!(raney(1, 1, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn functional_equation_oracle() {
        for s in 2..=6u32 {
            let u = functional_equation_series(s, 25).unwrap();
            // U - 1 - t U^s vanishes through order 25
            let us = poly_pow(&u, s as usize, 25);
            for n in 1..=25 {
                assert_eq!(u[n], us[n - 1]);
            }
            for p in 1..=12usize {
                let up = poly_pow(&u, p, 25);
                for n in 0..=25 - p.min(25) {
                    assert_eq!(up[n], raney(s, p as i64, n as u64).unwrap(), "s={s} p={p} n={n}");
                }
            }
        }
    }

    #[test]
    fn table_matches_closed_form() {
        for s in 2..=6u32 {
            for p in 1..=12 {
                let t = raney_table(s, p, 60).unwrap();
                for n in [0u64, 1, 7, 33, 60] {
                    assert_eq!(t.values[n as usize], raney(s, p, n).unwrap());
                }
            }
        }
    }

    #[test]
    fn convolution_examples() {
        assert!(convolution_check(2, &[1, 1], 2).unwrap());
        assert!(convolution_check(3, &[1, 2], 1).unwrap());
        assert!(convolution_check(5, &[4], 9).unwrap());
        assert!(convolution_check(3, &[2, 5, 1], 12).unwrap());
    }

    #[test]
    fn amplitudes() {
        let a = asymptotic_data(2, 1).unwrap().amplitude;
        assert!((a - 1.0 / PI.sqrt()).abs() < 1e-15);
        let a = asymptotic_data(3, 2).unwrap().amplitude;
        assert!((a - 4.5 / (12.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn asymptotic_ratio_catalan() {
        let t = raney_table(2, 1, 100).unwrap();
        let r = asymptotic_ratio(2, 1, 100, &t.values[100]).unwrap();
        // Catalan: C_m ~ 4^m m^{-3/2}/√π (1 - 9/(8m))
        assert!((r - (1.0 - 9.0 / 800.0)).abs() < 2e-4, "r = {r}");
    }

    #[test]
    fn ln_big_accuracy() {
        let x = BigUint::from(10u32).pow(400);
        assert!((ln_big(&x) - 400.0 * 10f64.ln()).abs() < 1e-11);
        assert_eq!(ln_big(&BigUint::from(1u32)), 0.0);
    }

    #[test]
    fn uniform_bound_dominates() {
        for s in [2u32, 3, 5] {
            for p in [1i64, 2, 7, 40] {
                let t = raney_table(s, p, 300).unwrap();
                for m in (1..=300u64).step_by(13) {
                    let lb = ln_uniform_bound(s, p, m).unwrap();
                    assert!(ln_big(&t.values[m as usize]) <= lb, "s={s} p={p} m={m}");
                }
            }
        }
        assert!(uniform_bound(2, 1, 1).unwrap() >= 1.0);
    }

    #[test]
    fn expansion_error_scales_with_p_squared() {
        // |ε| grows like p²/m, so the constant cannot be p-independent
        for s in [2u32, 3, 5] {
            for m in [60u64, 400, 2000] {
                for p in [1u64, 3, 9, m / 8, m / 2] {
                    let e = uniform_expansion_error(s, p as i64, m).unwrap();
                    assert!(e.abs() <= 1.5 * (p * p) as f64 / m as f64, "s={s} p={p} m={m}");
                }
            }
        }
        assert!(uniform_expansion_error(2, 1000, 2000).unwrap() < -0.9);
    }

    proptest! {
        #[test]
        fn table_entries_integral_and_consistent(s in 2u32..7, p in 1i64..13, n in 0u64..61) {
            let t = raney_table(s, p, n).unwrap();
            prop_assert_eq!(&t.values[n as usize], &raney(s, p, n).unwrap());
            prop_assert!(t.values[0] == BigUint::one());
        }

        #[test]
        fn convolution_holds(s in 2u32..6, a in 1i64..6, b in 1i64..6, m in 0u64..16) {
            prop_assert!(convolution_check(s, &[a, b], m).unwrap());
        }

        #[test]
        fn ratio_exact_matches_table(s in 2u32..6, p in 1u64..9, n in 0u64..40) {
            let t = raney_table(s, p as i64, n + 1).unwrap();
            let lhs = BigRational::new(t.values[n as usize + 1].clone().into(), t.values[n as usize].clone().into());
            prop_assert_eq!(lhs, raney_ratio_exact(s, p, n));
        }
    }
}
