//! Thresholds, the inverse-branch solver and univalence geometry for
//! the map f(w) = w + ζ w^{1-s} on the exterior disk (r = 1).

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{check_s, Error, Result};
use crate::raney;

/// Symmetry order and shape parameter. The exact value of ζ is kept so
/// that the critical case ζ = 1/(s-1) is decided without rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct MapConfig {
    s: u32,
    zeta: f64,
    zeta_exact: BigRational,
}

impl MapConfig {
    pub fn new(s: u32, zeta: f64) -> Result<Self> {
        check_s(s)?;
        if !(zeta.is_finite() && zeta > 0.0) {
            return Err(Error::Domain(format!("zeta = {zeta} must be positive and finite")));
        }
        let zeta_exact = BigRational::from_float(zeta).expect("finite float");
        Ok(Self { s, zeta, zeta_exact })
    }

    /// Builds a configuration from an exact rational ζ.
    pub fn from_rational(s: u32, zeta: BigRational) -> Result<Self> {
        check_s(s)?;
        if !zeta.is_positive() {
            return Err(Error::Domain("zeta must be positive".into()));
        }
        let zf = zeta.to_f64().unwrap_or(f64::NAN);
        Ok(Self { s, zeta: zf, zeta_exact: zeta })
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn zeta_exact(&self) -> &BigRational {
        &self.zeta_exact
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    #[serde(serialize_with = "ser_rational")]
    pub zeta_c: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub zeta_univ: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub ratio: BigRational,
}

pub(crate) fn ser_rational<S: serde::Serializer>(
    r: &BigRational,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&r.to_string())
}

fn pow_rational(base: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= base;
    }
    acc
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn thresholds(s: u32) -> Result<Thresholds> {
    check_s(s)?;
    let sm1 = int(s as i64 - 1);
    let se = int(s as i64);
    let zeta_c = pow_rational(&sm1, s - 1) / pow_rational(&se, s);
    let zeta_univ = BigRational::one() / &sm1;
    let ratio = &zeta_c / &zeta_univ;
    Ok(Thresholds { zeta_c, zeta_univ, ratio })
}

/// ζ_c as a float, for the numerical modules.
pub fn zeta_c(s: u32) -> f64 {
    let s = s as f64;
    (s - 1.0).powf(s - 1.0) / s.powf(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPointData {
    #[serde(serialize_with = "ser_rational")]
    pub u_c: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub kappa_sq: BigRational,
    pub kappa: f64,
}

pub fn branch_point_data(s: u32) -> Result<BranchPointData> {
    check_s(s)?;
    let si = s as i64;
    let u_c = int(si) / int(si - 1);
    let kappa_sq = int(2 * si) / pow_rational(&int(si - 1), 3);
    let kappa = kappa_sq.to_f64().unwrap().sqrt();
    Ok(BranchPointData { u_c, kappa_sq, kappa })
}

const JACOBIAN_FLOOR: f64 = 1e-8;

/// Solves U = 1 + t U^s in the variable t = ζ x^s on the branch with U(0) = 1.
fn solve_u_t(s: u32, t: Complex64, tol: f64) -> Result<Complex64> {
    let zc = zeta_c(s);
    let scale = t.norm().max(1.0);
    if t.im.abs() <= 1e-14 * scale && t.re >= zc {
        return Err(Error::BranchAmbiguity(format!(
            "t = {t} lies on the branch ray [{zc}, inf)"
        )));
    }
    if t == Complex64::zero() {
        return Ok(Complex64::one());
    }
    let series = raney::fuss_catalan_f64(s, 10);
    let seed = |t: Complex64| {
        let mut acc = Complex64::zero();
        let mut pw = Complex64::one();
        for c in &series {
            acc += pw * c;
            pw *= t;
        }
        acc
    };
    let si = s as i32;
    let newton = |tt: Complex64, mut u: Complex64| -> Result<Complex64> {
        for _ in 0..60 {
            let us1 = u.powi(si - 1);
            let f = u - 1.0 - tt * us1 * u;
            let jac = Complex64::one() - tt * us1 * s as f64;
            if jac.norm() < JACOBIAN_FLOOR {
                return Err(Error::BranchAmbiguity(format!(
                    "Newton Jacobian {:.3e} at t = {tt} is below the branch floor",
                    jac.norm()
                )));
            }
            let du = f / jac;
            u -= du;
            let res = (u - 1.0 - tt * u.powi(si)).norm();
            if res < tol && du.norm() < 1e-6 * u.norm() {
                return Ok(u);
            }
            // stagnation at rounding level: accept if the residual is at the floor
            if du.norm() <= 4.0 * f64::EPSILON * u.norm()
                && res <= 64.0 * f64::EPSILON * u.norm().powi(si).max(1.0) * tt.norm().max(1.0)
            {
                return Ok(u);
            }
        }
        Err(Error::Iteration(format!("Newton failed at t = {tt}")))
    };

    // Radial continuation in the parameter lambda: t(lambda) = lambda t.
    let mut lambda = 0.0f64;
    let mut u = Complex64::one();
    let mut h = (0.25 * zc / t.norm()).min(1.0);
    let mut first = true;
    while lambda < 1.0 {
        let step = h.min(1.0 - lambda);
        let tt = t * (lambda + step);
        let guess = if first { seed(tt) } else { u };
        match newton(tt, guess) {
            Ok(next) if (next - u).norm() <= 0.25 * u.norm().max(1.0) => {
                u = next;
                lambda += step;
                first = false;
                h = (step * 1.5).min(1.0);
            }
            Ok(_) | Err(Error::Iteration(_)) => {
                h = step * 0.5;
                if h < 1e-12 {
                    return Err(Error::Iteration(format!(
                        "radial continuation stalled at t = {tt}"
                    )));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(u)
}

/// The inverse-branch value U(x; ζ) with |U - 1 - ζ x^s U^s| < tol.
pub fn solve_u(cfg: &MapConfig, x: Complex64, tol: f64) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(Error::Domain("tol must be positive".into()));
    }
    let t = cfg.zeta * x.powi(cfg.s as i32);
    solve_u_t(cfg.s, t, tol)
}

/// |U(t) - (U_c - κ√eps)| at t = ζ_c(1 - eps).
pub fn local_expansion_check(s: u32, eps: f64) -> Result<f64> {
    check_s(s)?;
    if eps == 0.0 {
        return Err(Error::BranchAmbiguity("eps = 0 sits on the branch point".into()));
    }
    if !(eps > 0.0 && eps < 0.1) {
        return Err(Error::Domain(format!("eps = {eps} outside (0, 0.1)")));
    }
    let bp = branch_point_data(s)?;
    let t = Complex64::new(zeta_c(s) * (1.0 - eps), 0.0);
    let u = solve_u_t(s, t, 1e-14)?;
    let uc = bp.u_c.to_f64().unwrap();
    Ok((u.re - (uc - bp.kappa * eps.sqrt())).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Univalence {
    pub univalent: bool,
    /// ζ = 1/(s-1) exactly: the critical points of f sit on |w| = 1.
    pub critical: bool,
    /// Whether the floating geometric check (|w|^s = (s-1)ζ < 1 at the
    /// critical points) agreed with the exact comparison.
    pub geometric_agrees: bool,
}

pub fn is_univalent(cfg: &MapConfig) -> Univalence {
    let th = thresholds(cfg.s).expect("validated s");
    let z = cfg.zeta_exact();
    let univalent = z < &th.zeta_univ;
    let critical = z == &th.zeta_univ;
    // f'(w) = 1 - (s-1)ζ w^{-s} vanishes at w^s = (s-1)ζ.
    let r = ((cfg.s - 1) as f64 * cfg.zeta).powf(1.0 / cfg.s as f64);
    let geometric = (0..cfg.s).all(|k| {
        let w = Complex64::from_polar(r, 2.0 * PI * k as f64 / cfg.s as f64);
        w.norm().powi(cfg.s as i32) < 1.0
    });
    Univalence { univalent, critical, geometric_agrees: geometric == univalent }
}

pub fn boundary_trace(cfg: &MapConfig, theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
        + Complex64::from_polar(cfg.zeta, -((cfg.s - 1) as f64) * theta)
}

/// Minimum of |sin δ| - ζ|sin((s-1)δ)| over sampled δ in (0, π).
///
/// Coincident boundary points z(θ) = z(φ) force the margin to vanish at
/// δ = (θ - φ)/2. A uniform grid is augmented with geometric refinements
/// towards δ = 0 (equivalently δ = π), where a slightly supercritical ζ shows up first.
pub fn boundary_injectivity_margin(cfg: &MapConfig, n_samples: usize) -> Result<f64> {
    if n_samples < 16 {
        return Err(Error::Domain("n_samples must be at least 16".into()));
    }
    let sm1 = (cfg.s - 1) as f64;
    let g = |d: f64| d.sin().abs() - cfg.zeta * (sm1 * d).sin().abs();
    // g(π - δ) = g(δ), so only (0, π/2] is sampled; evaluating near π
    // would only add rounding noise from sin(kπ) ≠ 0.
    let mut best = f64::INFINITY;
    for k in 1..=n_samples / 2 {
        best = best.min(g(PI * k as f64 / n_samples as f64));
    }
    for j in 1..=60 {
        best = best.min(g(PI * 0.5f64.powi(j)));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn threshold_values() {
        let t = thresholds(2).unwrap();
        assert_eq!((t.zeta_c, t.zeta_univ, t.ratio), (rat(1, 4), rat(1, 1), rat(1, 4)));
        let t = thresholds(3).unwrap();
        assert_eq!((t.zeta_c, t.zeta_univ, t.ratio), (rat(4, 27), rat(1, 2), rat(8, 27)));
        let t = thresholds(5).unwrap();
        assert_eq!(t.zeta_c, rat(256, 3125));
        assert_eq!(t.ratio, rat(1024, 3125));
        assert!(matches!(thresholds(1), Err(Error::Domain(_))));
    }

    #[test]
    fn threshold_ratio_is_power() {
        for s in 2..=12u32 {
            let t = thresholds(s).unwrap();
            assert!(t.zeta_c < t.zeta_univ);
            assert_eq!(t.ratio, pow_rational(&rat(s as i64 - 1, s as i64), s));
            assert!((t.zeta_c.to_f64().unwrap() - zeta_c(s)).abs() < 1e-15);
        }
    }

    #[test]
    fn branch_point_values() {
        let b = branch_point_data(2).unwrap();
        assert_eq!(b.u_c, rat(2, 1));
        assert!((b.kappa - 2.0).abs() < 1e-15);
        let b = branch_point_data(3).unwrap();
        assert_eq!(b.kappa_sq, rat(3, 4));
        assert!((b.kappa - 0.8660254037844386).abs() < 1e-15);
        let b = branch_point_data(5).unwrap();
        assert_eq!((b.u_c, b.kappa_sq.clone()), (rat(5, 4), rat(5, 32)));
        for s in 2..=12 {
            let b = branch_point_data(s).unwrap();
            assert_eq!(&b.kappa_sq * pow_rational(&int(s as i64 - 1), 3), int(2 * s as i64));
        }
    }

    #[test]
    fn solve_u_quadratic() {
        let cfg = MapConfig::new(2, 0.1).unwrap();
        let u = solve_u(&cfg, Complex64::new(1.0, 0.0), 1e-14).unwrap();
        let exact = (1.0 - (1.0f64 - 0.4).sqrt()) / 0.2;
        assert!((u.re - exact).abs() < 1e-13 && u.im.abs() < 1e-14);
        assert_eq!(solve_u(&cfg, Complex64::zero(), 1e-12).unwrap(), Complex64::one());
    }

    #[test]
    fn solve_u_near_branch_point() {
        let cfg = MapConfig::new(2, 0.25 * (1.0 - 1e-10)).unwrap();
        let u = solve_u(&cfg, Complex64::one(), 1e-13).unwrap();
        assert!((u.re - 2.0).abs() < 1e-4);
        let on = MapConfig::new(2, 0.3).unwrap();
        assert!(matches!(
            solve_u(&on, Complex64::one(), 1e-12),
            Err(Error::BranchAmbiguity(_))
        ));
    }

    #[test]
    fn solve_u_matches_series() {
        for s in 2..=6u32 {
            let coeffs = raney::fuss_catalan_f64(s, 50);
            let zc = zeta_c(s);
            for k in 0..12 {
                let t = Complex64::from_polar(0.5 * zc, 2.0 * PI * k as f64 / 12.0 + 0.1);
                let cfg = MapConfig::new(s, 1.0).unwrap();
                // x^s = t with ζ = 1
                let x = t.powf(1.0 / s as f64);
                let u = solve_u(&cfg, x, 1e-14).unwrap();
                let mut series = Complex64::zero();
                let mut pw = Complex64::one();
                for c in &coeffs {
                    series += pw * c;
                    pw *= t;
                }
                assert!((u - series).norm() < 1e-12, "s={s} k={k}");
            }
        }
    }

    #[test]
    fn solve_u_far_field() {
        // large negative t is away from the cut; check the defining equation
        let cfg = MapConfig::new(3, 1.0).unwrap();
        let x = Complex64::new(-5.0, 0.0);
        let u = solve_u(&cfg, x, 1e-12).unwrap();
        let t = x.powi(3);
        assert!((u - 1.0 - t * u.powi(3)).norm() < 1e-12);
    }

    #[test]
    fn local_expansion_s2_exact() {
        for eps in [1e-2, 1e-3, 1e-4] {
            let r = local_expansion_check(2, eps).unwrap();
            let exact = 2.0 * eps / (1.0 + eps.sqrt());
            assert!((r - exact).abs() < 1e-10, "eps={eps} r={r} exact={exact}");
        }
        assert!(matches!(local_expansion_check(2, 0.0), Err(Error::BranchAmbiguity(_))));
        assert!(matches!(local_expansion_check(2, 0.2), Err(Error::Domain(_))));
    }

    #[test]
    fn local_expansion_is_linear() {
        for s in 2..=6 {
            let a = local_expansion_check(s, 1e-3).unwrap();
            let b = local_expansion_check(s, 5e-4).unwrap();
            assert!((a / b - 2.0).abs() < 0.2, "s={s} ratio {}", a / b);
        }
    }

    #[test]
    fn univalence_examples() {
        assert!(is_univalent(&MapConfig::new(2, 0.6).unwrap()).univalent);
        let c = is_univalent(&MapConfig::new(3, 0.5).unwrap());
        assert!(!c.univalent && c.critical);
        assert!(!is_univalent(&MapConfig::new(3, 0.7).unwrap()).univalent);
        let third = MapConfig::from_rational(4, rat(1, 3)).unwrap();
        assert!(is_univalent(&third).critical);
    }

    #[test]
    fn trace_examples() {
        let cfg = MapConfig::new(3, 0.3).unwrap();
        assert!((boundary_trace(&cfg, 0.0) - Complex64::new(1.3, 0.0)).norm() < 1e-15);
        assert!((boundary_trace(&cfg, PI) - Complex64::new(-0.7, 0.0)).norm() < 1e-15);
        let j = MapConfig::new(2, 1.0).unwrap();
        for th in [0.3, 1.1, 2.9] {
            let z = boundary_trace(&j, th);
            assert!((z.re - 2.0 * th.cos()).abs() < 1e-15 && z.im.abs() < 1e-15);
        }
    }

    #[test]
    fn margin_examples() {
        let m = |s, z, n| boundary_injectivity_margin(&MapConfig::new(s, z).unwrap(), n).unwrap();
        assert!(m(2, 0.5, 64) > 0.0);
        assert!(m(3, 0.6, 64) < 0.0);
        let coarse = m(3, 0.5, 64);
        let fine = m(3, 0.5, 4096);
        assert!(coarse > -1e-15 && fine > -1e-15 && fine < 1e-9);
    }
}
