//! Moment sequences of the measures behind 𝒢_p, their Jacobi recurrence
//! coefficients, the Weyl function, and the Perron density.
//!
//! Exact work is done on the integer moments R_{s,p}(n)² (support
//! [0, 1/ζ_c²]); the rescaled quantities (support [0, 1]) follow by exact
//! powers of ζ_c².

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::continuation::{gp_continue, CutMarcher, Side, EXCLUSION};
use crate::error::{check_s, Error, Result};
use crate::fit::line_fit;
use crate::linalg::{sym_eig, SymMatrix};
use crate::maps::{thresholds, zeta_c};
use crate::quad::integrate;
use crate::raney::raney_table;

fn ser_rationals<S: serde::Serializer>(v: &[BigRational], ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_seq(v.iter().map(|r| r.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSequence {
    pub s: u32,
    pub p: u64,
    /// Rescaled moments R(n)² ζ_c^{2n}.
    #[serde(serialize_with = "ser_rationals")]
    pub moments: Vec<BigRational>,
    /// Integer moments R(n)².
    #[serde(skip)]
    pub raw: Vec<BigInt>,
    #[serde(skip)]
    zc2: BigRational,
}

impl MomentSequence {
    pub fn n_max(&self) -> usize {
        self.moments.len() - 1
    }
}

pub fn moments(s: u32, p: u64, n_max: usize) -> Result<MomentSequence> {
    check_s(s)?;
    if p == 0 {
        return Err(Error::Domain("p must be at least 1".into()));
    }
    let table = raney_table(s, p as i64, n_max as u64)?;
    let zc = thresholds(s)?.zeta_c;
    let zc2 = &zc * &zc;
    let raw: Vec<BigInt> = table.values.iter().map(|r: &BigUint| BigInt::from(r * r)).collect();
    let mut pw = BigRational::one();
    let mut out = Vec::with_capacity(raw.len());
    for r in &raw {
        out.push(BigRational::from_integer(r.clone()) * &pw);
        pw *= &zc2;
    }
    Ok(MomentSequence { s, p, moments: out, raw, zc2 })
}

/// Bareiss fraction-free determinant.
fn det_bareiss(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Leading Hankel minors det(m_{i+j})_{0≤i,j≤k}, k = 0..=k_max, of the
/// integer moments. Their signs equal those of the rescaled minors.
pub fn hankel_minors(mseq: &MomentSequence, k_max: usize) -> Result<Vec<BigInt>> {
    if 2 * k_max > mseq.n_max() {
        return Err(Error::Domain(format!(
            "depth {k_max} needs moments up to {}, have {}",
            2 * k_max,
            mseq.n_max()
        )));
    }
    Ok((0..=k_max)
        .map(|k| {
            let h: Vec<Vec<BigInt>> = (0..=k).map(|i| (0..=k).map(|j| mseq.raw[i + j].clone()).collect()).collect();
            det_bareiss(h)
        })
        .collect())
}

pub fn hankel_positivity(mseq: &MomentSequence, k_max: usize) -> Result<bool> {
    Ok(hankel_minors(mseq, k_max)?.iter().all(|d| d.is_positive()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobiData {
    pub s: u32,
    pub p: u64,
    /// a_k², k = 1..n−1, rescaled to support [0, 1].
    #[serde(serialize_with = "ser_rationals")]
    pub a_sq: Vec<BigRational>,
    /// b_k, k = 0..n−1, rescaled.
    #[serde(serialize_with = "ser_rationals")]
    pub b: Vec<BigRational>,
    pub a_f64: Vec<f64>,
    pub b_f64: Vec<f64>,
    pub precision: Precision,
}

impl JacobiData {
    pub fn depth(&self) -> usize {
        self.b.len()
    }

    /// Truncated Jacobi matrix in the unrescaled variable t.
    pub fn matrix(&self) -> SymMatrix {
        let n = self.depth();
        let scale = 1.0 / zeta_c(self.s).powi(2);
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, self.b_f64[i] * scale);
            if i + 1 < n {
                m.set_sym(i, i + 1, self.a_f64[i] * scale);
            }
        }
        m
    }

    /// Eigenvalues of the truncated matrix (unrescaled), descending.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(sym_eig(&self.matrix())?.values)
    }
}

/// Recurrence coefficients of the monic orthogonal polynomials, from the
/// moment functional by the Stieltjes procedure in its tableau form
/// (σ_{k,l} = ⟨π_k, x^l⟩), exactly on the integer moments.
pub fn jacobi_coefficients(mseq: &MomentSequence, n: usize) -> Result<JacobiData> {
    if n == 0 || 2 * n > mseq.n_max() + 1 {
        return Err(Error::Domain(format!(
            "depth {n} needs moments up to {}, have {}",
            2 * n - 1,
            mseq.n_max()
        )));
    }
    let mu: Vec<BigRational> = mseq.raw[..2 * n].iter().map(|r| BigRational::from_integer(r.clone())).collect();
    let mut b = vec![&mu[1] / &mu[0]];
    let mut a_sq: Vec<BigRational> = Vec::new();
    let mut prev2: Vec<BigRational> = vec![BigRational::zero(); 2 * n];
    let mut prev: Vec<BigRational> = mu.clone();
    for k in 1..n {
        let mut cur = vec![BigRational::zero(); 2 * n];
        for l in k..(2 * n - k) {
            let mut v = &prev[l + 1] - &b[k - 1] * &prev[l];
            if k >= 2 {
                v -= &a_sq[k - 2] * &prev2[l];
            }
            cur[l] = v;
        }
        if !cur[k].is_positive() {
            return Err(Error::Positivity(format!(
                "⟨π_{k}, π_{k}⟩ = {} is not positive for s = {}, p = {}",
                cur[k], mseq.s, mseq.p
            )));
        }
        b.push(&cur[k + 1] / &cur[k] - &prev[k] / &prev[k - 1]);
        a_sq.push(&cur[k] / &prev[k - 1]);
        prev2 = prev;
        prev = cur;
    }
    // rescale: b ↦ ζ_c² b, a² ↦ ζ_c⁴ a²
    let zc2 = &mseq.zc2;
    let zc4 = zc2 * zc2;
    let b: Vec<BigRational> = b.iter().map(|v| v * zc2).collect();
    let a_sq: Vec<BigRational> = a_sq.iter().map(|v| v * &zc4).collect();
    let b_f64 = b.iter().map(|v| v.to_f64().unwrap()).collect();
    let a_f64 = a_sq.iter().map(|v| v.to_f64().unwrap().sqrt()).collect();
    Ok(JacobiData { s: mseq.s, p: mseq.p, a_sq, b, a_f64, b_f64, precision: Precision::Exact })
}

/// ⟨e_0, (I − uJ)^{-1} e_0⟩ by the backward continued fraction.
pub fn weyl_function(jac: &JacobiData, u: Complex64) -> Result<Complex64> {
    let xi = u / zeta_c(jac.s).powi(2);
    let n = jac.depth();
    let one = Complex64::new(1.0, 0.0);
    let mut tail = Complex64::new(0.0, 0.0);
    for k in (0..n).rev() {
        let d = one - xi * jac.b_f64[k] - tail;
        let scale = 1.0 + (xi * jac.b_f64[k]).norm() + tail.norm();
        if d.norm() < 1e-8 * scale {
            return Err(Error::Conditioning(format!("u = {u} is within 1e-8 of a pole of the truncated resolvent")));
        }
        if k == 0 {
            return Ok(one / d);
        }
        let a2 = jac.a_f64[k - 1] * jac.a_f64[k - 1];
        tail = xi * xi * a2 / d;
    }
    unreachable!()
}

fn check_density_args(s: u32, p: u64, t: f64) -> Result<f64> {
    check_s(s)?;
    if p == 0 {
        return Err(Error::Domain("p must be at least 1".into()));
    }
    let tmax = 1.0 / zeta_c(s).powi(2);
    if !(t > 1e-3 * tmax && t < tmax * (1.0 - 1e-3)) {
        return Err(Error::Domain(format!("t = {t} must lie inside (0, {tmax}) away from the endpoints")));
    }
    Ok(tmax)
}

/// ϱ_p(t) = Im 𝒢_p(1/t + i0)/(πt).
pub fn perron_density(s: u32, p: u64, t: f64, tol: f64) -> Result<f64> {
    check_density_args(s, p, t)?;
    let g = gp_continue(s, p, Complex64::new(1.0 / t, 0.0), Side::Above, tol)?.value();
    Ok(g.im / (PI * t))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerronReport {
    pub s: u32,
    pub p: u64,
    /// ∫ t^n ϱ_p dt over the full support, n = 0..
    pub moments: Vec<f64>,
    /// Exact R(n)², n = 0..
    pub exact: Vec<f64>,
    /// Mass over [δ, 1/ζ_c² − δ], δ = 10⁻³/ζ_c².
    pub truncated_mass: f64,
    /// Log–log slope of ϱ_p against 1/ζ_c² − t at the right endpoint.
    pub endpoint_slope: f64,
    /// Log–log slope of ϱ_p against t near t = 0 (logged, not asserted).
    pub origin_slope: f64,
    pub evaluations: usize,
}

/// Moments and endpoint behaviour of the Perron density, integrating in x
/// with t = e^{−x}/ζ_c²,
/// where ∫ t^n ϱ dt = (1/π) ∫_0^∞ Im 𝒢_p(ζ_c² e^x + i0) (ζ_c² e^x)^{−n} dx.
pub fn perron_report(s: u32, p: u64, n_moments: usize, tol: f64) -> Result<PerronReport> {
    check_s(s)?;
    let zc2 = zeta_c(s).powi(2);
    let mut marcher = CutMarcher::new(s, p, tol)?;
    // Im 𝒢 decays like e^{−(p/s)x}·x; stop where it is below 1e-13
    let decay = p as f64 / s as f64;
    let mut x_max = 10.0f64;
    while (-decay * x_max).exp() * (1.0 + x_max) > 1e-13 {
        x_max += 5.0;
    }
    let lo = EXCLUSION;
    let mut evaluations = 0;
    let mut moments_out = Vec::new();
    for n in 0..n_moments {
        let nf = n as f64;
        let q = integrate(
            |x| {
                let v = marcher.im_g(x)?;
                Ok(v * (-(nf) * (x + zc2.ln())).exp() / PI)
            },
            lo,
            x_max,
            1e-12,
            1e-9,
            4000,
        )?;
        evaluations += q.evaluations;
        moments_out.push(q.value);
    }
    let x_hi = (1.0 / 1e-3f64).ln();
    let x_lo = -(1.0 - 1e-3f64).ln();
    let tm = integrate(|x| Ok(marcher.im_g(x)? / PI), x_lo, x_hi, 1e-12, 1e-9, 4000)?;
    evaluations += tm.evaluations;
    let table = raney_table(s, p as i64, n_moments as u64)?;
    let exact = table.values.iter().take(n_moments).map(|r| (r * r).to_f64().unwrap()).collect();

    let tmax = 1.0 / zc2;
    let eps: Vec<f64> = (0..7).map(|i| 1e-3 * 10f64.powf(i as f64 / 6.0)).collect();
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for &e in &eps {
        let t = tmax * (1.0 - e);
        let x = (1.0 / (t * zc2)).ln();
        let rho = marcher.im_g(x)? / (PI * t);
        if !(rho > 0.0) {
            return Err(Error::Positivity(format!("ϱ_p({t}) = {rho} near the right endpoint")));
        }
        lx.push((tmax - t).ln());
        ly.push(rho.ln());
    }
    let endpoint_slope = line_fit(&lx, &ly)?.slope;
    let mut ox = Vec::new();
    let mut oy = Vec::new();
    for i in 0..7 {
        let t = tmax * 1e-6 * 10f64.powf(i as f64 / 6.0);
        let x = (1.0 / (t * zc2)).ln();
        let rho = marcher.im_g(x)? / (PI * t);
        ox.push(t.ln());
        oy.push(rho.abs().ln());
    }
    let origin_slope = line_fit(&ox, &oy)?.slope;
    Ok(PerronReport {
        s,
        p,
        moments: moments_out,
        exact,
        truncated_mass: tm.value,
        endpoint_slope,
        origin_slope,
        evaluations,
    })
}
