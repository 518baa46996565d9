//! The acceptance suite: twenty numbered checks with pinned tolerances,
//! shared by the integration test target and the CLI `selftest` command.

use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::continuation::{
    b_closed_form, default_fit_grid, edge_density_estimate, gp_continue, gp_series, hyp_params, resonant_fit,
    sigma_cont, Side,
};
use crate::error::Result;
use crate::fit::{coefficient_of_variation, line_fit};
use crate::gram::{gram_consistency, sigma_p};
use crate::jacobi::{hankel_positivity, jacobi_coefficients, moments, perron_report, weyl_function};
use crate::maps::{boundary_injectivity_margin, is_univalent, thresholds, zeta_c, MapConfig};
use crate::raney::{asymptotic_ratio, convolution_check, functional_equation_series, poly_pow, raney, raney_table};
use crate::spectra::{
    eigen_trajectory, eigvec_alignment, log_scale_ratio, nodal_count, soft_spectrum, stiff_trajectory,
    toeplitz_removal_check, BlockSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Warning,
}

/// Criteria that fail for documented reasons and do not fail the suite.
pub const KNOWN_RED: &[u32] = &[7, 14];
/// Observational criteria whose failure is downgraded to a warning.
pub const WARNING_ONLY: &[u32] = &[20];
/// Criteria run by the quick level.
pub const QUICK: &[u32] = &[1, 2, 3, 5, 10, 11];
pub const ALL: [u32; 20] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub status: Status,
    pub known_red: bool,
    pub measured: String,
    pub tolerance: String,
    pub seconds: f64,
}

impl CriterionReport {
    /// One-line summary.
    pub fn line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail if self.known_red => "FAIL (known)",
            Status::Fail => "FAIL",
            Status::Warning => "WARN",
        };
        format!(
            "[{tag}] {:>2} {}: {} (tolerance: {}; {:.1} s)",
            self.id, self.title, self.measured, self.tolerance, self.seconds
        )
    }

    /// Whether this result should fail the suite.
    pub fn blocking(&self) -> bool {
        self.status == Status::Fail && !self.known_red
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub level: Level,
    pub criteria: Vec<CriterionReport>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.criteria.iter().all(|c| !c.blocking())
    }
}

struct Outcome {
    pass: bool,
    measured: String,
    tolerance: String,
}

fn outcome(pass: bool, measured: impl Into<String>, tolerance: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, measured: measured.into(), tolerance: tolerance.into() })
}

pub fn title(id: u32) -> &'static str {
    match id {
        1 => "threshold exactness",
        2 => "Raney exactness",
        3 => "convolution identity",
        4 => "asymptotic amplitude",
        5 => "Gram/Hessian identity",
        6 => "stiff slope",
        7 => "soft boundedness and convergence",
        8 => "alignment law",
        9 => "Toeplitz removal",
        10 => "parametric excess",
        11 => "resonant coefficient",
        12 => "edge density",
        13 => "subcritical/continuation consistency",
        14 => "Gram-weight divergence law",
        15 => "regularity at the univalence threshold",
        16 => "Hankel positivity and Jacobi",
        17 => "Weyl identity",
        18 => "Perron mass and endpoint exponent",
        19 => "univalence criterion",
        20 => "nodal observation",
        _ => "unknown",
    }
}

fn ipow(b: i64, e: u32) -> BigRational {
    BigRational::from_integer(num_traits::pow(BigInt::from(b), e as usize))
}

fn c1_thresholds() -> Result<Outcome> {
    let mut bad = 0;
    for s in 2..=12u32 {
        let t = thresholds(s)?;
        let si = s as i64;
        let zc = ipow(si - 1, s - 1) / ipow(si, s);
        let zu = BigRational::new(BigInt::one(), BigInt::from(si - 1));
        let ratio = ipow(si - 1, s) / ipow(si, s);
        if t.zeta_c != zc || t.zeta_univ != zu || t.ratio != ratio || &t.zeta_c / &t.zeta_univ != t.ratio {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{bad} mismatches for s in [2,12]"), "exact")
}

fn c2_raney() -> Result<Outcome> {
    let mut bad = 0;
    let mut checked = 0;
    for s in 2..=6u32 {
        let u = functional_equation_series(s, 60)?;
        for p in 1..=12i64 {
            let up = poly_pow(&u, p as usize, 60);
            for n in 0..=60u64 {
                checked += 1;
                if raney(s, p, n)? != up[n as usize] {
                    bad += 1;
                }
            }
        }
    }
    outcome(bad == 0, format!("{bad} of {checked} values differ"), "exact")
}

fn c3_convolution() -> Result<Outcome> {
    let mut lists: Vec<Vec<i64>> = Vec::new();
    for a in 1..=5 {
        lists.push(vec![a]);
        for b in 1..=5 {
            lists.push(vec![a, b]);
            for c in 1..=5 {
                lists.push(vec![a, b, c]);
            }
        }
    }
    let mut bad = 0;
    let mut checked = 0;
    for s in [2u32, 3, 5] {
        for l in &lists {
            for m in 0..=15 {
                checked += 1;
                if !convolution_check(s, l, m)? {
                    bad += 1;
                }
            }
        }
    }
    outcome(bad == 0, format!("{bad} of {checked} identities fail"), "exact")
}

fn c4_asymptotic() -> Result<Outcome> {
    const C: f64 = 5.0;
    let mut worst = 0.0f64;
    for s in [2u32, 3, 5] {
        for p in [1i64, 2, s as i64] {
            let table = raney_table(s, p, 2000)?;
            for m in 50..=2000u64 {
                let r = asymptotic_ratio(s, p, m, table.get(m as usize))?;
                worst = worst.max(m as f64 * (r - 1.0).abs());
            }
        }
    }
    outcome(worst <= C, format!("max m·|ratio − 1| = {worst:.3}"), format!("≤ {C}"))
}

fn c5_gram() -> Result<Outcome> {
    let mut bad = 0;
    for s in [2u32, 3] {
        let zeta = 0.5 * zeta_c(s);
        for m in 1..=30u64 {
            for n in 1..=30u64 {
                if !gram_consistency(s, zeta, m, n, 30)? {
                    bad += 1;
                }
            }
        }
    }
    outcome(bad == 0, format!("{bad} of 1800 entries disagree"), "1e-12 relative")
}

/// 13 values of ζ/ζ_c, log-spaced in 1 − ζ/ζ_c over [1e-5, 1e-2].
pub fn stiff_grid() -> Vec<f64> {
    (0..13).map(|i| 1.0 - 1e-2 * 10f64.powf(-3.0 * i as f64 / 12.0)).collect()
}

fn c6_stiff() -> Result<Outcome> {
    const SLOPE_TOL: f64 = 0.15;
    const RESID_TOL: f64 = 0.02;
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [3u32, 5] {
        let f = stiff_trajectory(&BlockSpec::new(s, 1, 1.0, 30), &stiff_grid())?;
        pass &= f.slope_error() < SLOPE_TOL && f.relative_residual() < RESID_TOL;
        parts.push(format!(
            "s={s}: slope {:.5} vs Γ_N {:.5} ({:.2}%), residual {:.1e} of range",
            f.slope,
            f.gamma_truncated,
            100.0 * f.slope_error(),
            f.relative_residual()
        ));
    }
    outcome(pass, parts.join("; "), format!("slope within {SLOPE_TOL}, residual < {RESID_TOL}"))
}

fn c7_soft() -> Result<Outcome> {
    const CONV_TOL: f64 = 0.05;
    const RATIO_TOL: f64 = 0.05;
    let spec = BlockSpec::new(3, 1, 1.0, 40);
    let grid = [0.99, 0.995, 0.999, 0.9995, 0.9999];
    let traj = eigen_trajectory(&spec, &grid, 6)?;
    let finite = traj.iter().all(|t| t.mu.iter().all(|v| v.is_finite()));
    let a = &traj[2].mu;
    let b = &traj[4].mu;
    let changes: Vec<f64> = (1..6).map(|k| (b[k] - a[k]).abs() / b[k]).collect();
    let converged = changes.iter().all(|c| *c < CONV_TOL);
    let last = traj.last().unwrap();
    let ratio = last.mu[1] / last.mu[0];
    let soft = soft_spectrum(&spec, 0.9999, 6)?;
    let soft_prev = soft_spectrum(&spec, 0.999, 6)?;
    let compressed: Vec<f64> = soft
        .compressed
        .iter()
        .zip(&soft_prev.compressed)
        .map(|(x, y)| (x - y).abs() / x)
        .collect();
    outcome(
        finite && converged && ratio < RATIO_TOL,
        format!(
            "finite={finite}; relative change 0.999→0.9999 of μ_2..μ_6 = [{}]; μ_2/μ_1 = {ratio:.4}; compressed remainder change = [{}]",
            changes.iter().map(|c| format!("{c:.3}")).collect::<Vec<_>>().join(", "),
            compressed.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>().join(", ")
        ),
        format!("change < {CONV_TOL}, μ_2/μ_1 < {RATIO_TOL}"),
    )
}

fn c8_alignment() -> Result<Outcome> {
    const CV_TOL: f64 = 0.30;
    let spec = BlockSpec::new(3, 1, 1.0, 40);
    let grid: Vec<f64> = (0..9).map(|i| 1.0 - 1e-2 * 10f64.powf(-2.0 * i as f64 / 8.0)).collect();
    let mut c = Vec::new();
    for &eta in &grid {
        let a = eigvec_alignment(&spec, eta)?;
        c.push((1.0 - a.value) * a.l);
    }
    let cv = coefficient_of_variation(&c);
    outcome(
        cv < CV_TOL,
        format!("(1−align)·L ∈ [{:.4}, {:.4}], CV = {cv:.3}", c.iter().cloned().fold(f64::INFINITY, f64::min), c.iter().cloned().fold(0.0, f64::max)),
        format!("CV < {CV_TOL}"),
    )
}

fn c9_toeplitz() -> Result<Outcome> {
    const LHS_TOL: f64 = 0.05;
    const SLOPE_TOL: f64 = 0.15;
    const N: usize = 100_000;
    let grid: Vec<f64> = (0..9).map(|i| 1.0 - 0.1 * 10f64.powf(-(i as f64) / 4.0)).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for beta in [0.25, 1.0] {
        let pts = toeplitz_removal_check(3, 1, beta, N, &grid)?;
        let x: Vec<f64> = pts.iter().map(|p| (1.0 - p.eta).ln()).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.hs.ln()).collect();
        let slope = line_fit(&x, &y)?.slope;
        let target = (0.5 + beta).min(1.0);
        pass &= (slope - target).abs() < SLOPE_TOL;
        if beta == 1.0 {
            let decreasing = pts.windows(2).all(|w| w[1].l_times_hs < w[0].l_times_hs);
            let at = toeplitz_removal_check(3, 1, beta, N, &[0.999])?[0].l_times_hs;
            pass &= decreasing && at < LHS_TOL;
            parts.push(format!("β=1: L·HS decreasing={decreasing}, L·HS(0.999) = {at:.5}"));
        }
        parts.push(format!("β={beta}: HS exponent {slope:.3} vs {target}"));
    }
    outcome(pass, parts.join("; "), format!("L·HS < {LHS_TOL}; exponent within {SLOPE_TOL}; N = {N}"))
}

fn c10_excess() -> Result<Outcome> {
    let two = BigRational::from_integer(BigInt::from(2));
    let mut bad = 0;
    for s in 2..=8 {
        for p in 1..=8 {
            if hyp_params(s, p)?.excess != two {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("{bad} of 49 excesses differ from 2"), "exact")
}

fn c11_resonant(level: Level) -> Result<Outcome> {
    const TOL: f64 = 0.05;
    let cases: &[(u32, u64)] = match level {
        Level::Quick => &[(2, 1)],
        Level::Full => &[(2, 1), (3, 1), (3, 2), (5, 1)],
    };
    let grid = default_fit_grid();
    let mut pass = true;
    let mut parts = Vec::new();
    for &(s, p) in cases {
        let r = resonant_fit(s, p, &grid)?;
        pass &= r.rel_err < TOL && r.b_fit < 0.0;
        parts.push(format!("({s},{p}): {:.6} vs {:.6} ({:.3}%)", r.b_fit, r.b_at_branch.value, 100.0 * r.rel_err));
    }
    outcome(pass, parts.join("; "), format!("relative error < {TOL}"))
}

fn c12_edge() -> Result<Outcome> {
    const TOL: f64 = 0.03;
    let mut pass = true;
    let mut parts = Vec::new();
    for (s, p) in [(2u32, 1u64), (3, 1), (3, 2)] {
        let e = edge_density_estimate(s, p, 1e-12)?;
        pass &= e.rel_err < TOL;
        parts.push(format!("({s},{p}): {:.6} vs {:.6}", e.estimate, e.closed));
    }
    outcome(pass, parts.join("; "), format!("relative error < {TOL}"))
}

fn c13_consistency() -> Result<Outcome> {
    const TOL: f64 = 1e-8;
    let mut worst = 0.0f64;
    for (s, p) in [(2u32, 1u64), (3, 2)] {
        let zeta = 0.5 * zeta_c(s);
        let direct = sigma_p(s, p, zeta, 1e-14)?;
        let cont = sigma_cont(s, p, Complex64::new(zeta * zeta, 0.0), Side::None, 1e-12)?;
        worst = worst.max((cont - direct).norm() / direct);
    }
    outcome(worst < TOL, format!("max relative difference {worst:.2e}"), format!("< {TOL:e}"))
}

fn c14_divergence() -> Result<Outcome> {
    const TOL: f64 = 0.10;
    let grid: Vec<f64> = (0..7).map(|i| 1.0 - 1e-2 * 10f64.powf(-2.0 * i as f64 / 6.0)).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for (s, p) in [(2u32, 1u64), (3, 1), (3, 2)] {
        let b = b_closed_form(s, p)?.value;
        let coef = 2.0 * (s * s) as f64 / p as f64 * b;
        let vals: Vec<f64> = grid
            .iter()
            .map(|&eta| Ok(sigma_p(s, p, eta * zeta_c(s), 1e-13)? + coef * log_scale_ratio(eta)?))
            .collect::<Result<_>>()?;
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let range = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let rel = range / mean.abs();
        pass &= rel < TOL;
        // the remainder is O(w log w); successive differences show it shrinking
        let d: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        parts.push(format!(
            "({s},{p}): range/mean = {rel:.4}, last value {:.5}, step differences {:.1e} → {:.1e}",
            vals[vals.len() - 1],
            d[0],
            d[d.len() - 1]
        ));
    }
    outcome(pass, parts.join("; "), format!("< {TOL}"))
}

fn c15_univ() -> Result<Outcome> {
    const CAP: f64 = 1e6;
    let mut worst = 0.0f64;
    for s in [2u32, 3] {
        let zu = 1.0 / (s as f64 - 1.0);
        for p in [1u64, 2] {
            for side in [Side::Above, Side::Below] {
                let st = gp_continue(s, p, Complex64::new(zu * zu, 0.0), side, 1e-12)?;
                for v in [st.value(), st.sigma()] {
                    worst = worst.max(if v.is_finite() { v.norm() } else { f64::INFINITY });
                }
            }
        }
    }
    outcome(worst < CAP, format!("largest lateral |value| = {worst:.4}"), format!("finite, < {CAP:e}"))
}

fn c16_hankel() -> Result<Outcome> {
    const DELTA: f64 = 1e-8;
    let mut pass = true;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut checked = 0;
    for s in [2u32, 3, 5] {
        for p in 1..=s as u64 {
            let m = moments(s, p, 16)?;
            let pos = hankel_positivity(&m, 8)?;
            let j = jacobi_coefficients(&m, 8)?;
            let a_pos = j.a_sq.iter().all(|a| a.is_positive());
            let spec = j.spectrum()?;
            let tmax = 1.0 / zeta_c(s).powi(2);
            let excess = (spec[0] - tmax).max(-spec.last().unwrap());
            worst_excess = worst_excess.max(excess);
            pass &= pos && a_pos && excess <= DELTA;
            checked += 1;
        }
    }
    outcome(
        pass,
        format!("{checked} (s,p) pairs; largest spectral excursion beyond [0, 1/ζ_c²] = {worst_excess:.3e}"),
        format!("minors > 0, a_k² > 0, excursion ≤ {DELTA:e}"),
    )
}

fn c17_weyl() -> Result<Outcome> {
    const TOL: f64 = 1e-8;
    let mut worst = 0.0f64;
    for s in [2u32, 3] {
        let j = jacobi_coefficients(&moments(s, 1, 80)?, 40)?;
        let zc2 = zeta_c(s).powi(2);
        for u in [0.1 * zc2, 0.3 * zc2] {
            let u = Complex64::new(u, 0.0);
            worst = worst.max((weyl_function(&j, u)? - gp_series(s, 1, u, 1e-15)?).norm());
        }
        let u = Complex64::new(-1.0, 0.0);
        worst = worst.max((weyl_function(&j, u)? - gp_continue(s, 1, u, Side::None, 1e-12)?.value()).norm());
    }
    outcome(worst < TOL, format!("max |weyl − 𝒢| = {worst:.2e}"), format!("< {TOL:e}"))
}

fn c18_perron() -> Result<Outcome> {
    const MASS_TOL: f64 = 0.02;
    const SLOPE_TOL: f64 = 0.2;
    let mut pass = true;
    let mut parts = Vec::new();
    for (s, p) in [(2u32, 1u64), (3, 1), (3, 2)] {
        let r = perron_report(s, p, 1, 1e-12)?;
        let mass = r.moments[0];
        pass &= (mass - 1.0).abs() < MASS_TOL && (r.endpoint_slope - 2.0).abs() < SLOPE_TOL;
        parts.push(format!(
            "({s},{p}): mass {mass:.8}, endpoint slope {:.3}, mass on [δ, 1/ζ_c²−δ] {:.4}",
            r.endpoint_slope, r.truncated_mass
        ));
    }
    outcome(pass, parts.join("; "), format!("mass 1 ± {MASS_TOL}, slope 2 ± {SLOPE_TOL}"))
}

fn c19_univalence() -> Result<Outcome> {
    const BAND: f64 = 1e-6;
    let mut bad = 0;
    let mut checked = 0;
    for s in 2..=8u32 {
        let zu = 1.0 / (s as f64 - 1.0);
        for i in 0..40 {
            let ratio = 0.05 + 1.95 * i as f64 / 39.0;
            if (ratio - 1.0).abs() < BAND {
                continue;
            }
            let cfg = MapConfig::new(s, ratio * zu)?;
            let univalent = is_univalent(&cfg).univalent;
            let margin = boundary_injectivity_margin(&cfg, 4096)?;
            checked += 1;
            if univalent != (margin > 0.0) {
                bad += 1;
            }
        }
        for d in [1e-5, 1e-3, 1e-1] {
            for r in [1.0 - d, 1.0 + d] {
                let cfg = MapConfig::new(s, r * zu)?;
                checked += 1;
                if is_univalent(&cfg).univalent != (boundary_injectivity_margin(&cfg, 4096)? > 0.0) {
                    bad += 1;
                }
            }
        }
    }
    outcome(bad == 0, format!("{bad} of {checked} grid points disagree"), format!("exact agreement outside a {BAND:e} band"))
}

fn c20_nodal() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [3u32, 5] {
        let spec = BlockSpec::new(s, 1, 1.0, 40);
        let soft = soft_spectrum(&spec, 0.9999, 5)?;
        let counts: Vec<usize> = soft.compressed_vectors.iter().map(|v| nodal_count(v)).collect::<Result<_>>()?;
        pass &= counts.iter().enumerate().all(|(i, c)| *c == i + 1);
        parts.push(format!("s={s}: φ_2..φ_5 sign changes {counts:?}"));
    }
    outcome(pass, parts.join("; "), "φ_k has k−1 sign changes")
}

fn evaluate(id: u32, level: Level) -> Result<Outcome> {
    match id {
        1 => c1_thresholds(),
        2 => c2_raney(),
        3 => c3_convolution(),
        4 => c4_asymptotic(),
        5 => c5_gram(),
        6 => c6_stiff(),
        7 => c7_soft(),
        8 => c8_alignment(),
        9 => c9_toeplitz(),
        10 => c10_excess(),
        11 => c11_resonant(level),
        12 => c12_edge(),
        13 => c13_consistency(),
        14 => c14_divergence(),
        15 => c15_univ(),
        16 => c16_hankel(),
        17 => c17_weyl(),
        18 => c18_perron(),
        19 => c19_univalence(),
        20 => c20_nodal(),
        _ => outcome(false, "no such criterion", "-"),
    }
}

/// Runs one criterion; computation errors count as failures.
pub fn run_criterion(id: u32, level: Level) -> CriterionReport {
    let start = Instant::now();
    let (pass, measured, tolerance) = match evaluate(id, level) {
        Ok(o) => (o.pass, o.measured, o.tolerance),
        Err(e) => (false, format!("error: {e}"), "-".to_string()),
    };
    let status = if pass {
        Status::Pass
    } else if WARNING_ONLY.contains(&id) {
        Status::Warning
    } else {
        Status::Fail
    };
    CriterionReport {
        id,
        title: title(id),
        status,
        known_red: KNOWN_RED.contains(&id),
        measured,
        tolerance,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_suite(level: Level) -> SuiteReport {
    let ids: Vec<u32> = match level {
        Level::Quick => QUICK.to_vec(),
        Level::Full => ALL.to_vec(),
    };
    SuiteReport { level, criteria: ids.into_iter().map(|id| run_criterion(id, level)).collect() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub s: u32,
    pub n: usize,
    pub slope: f64,
    pub gamma_truncated: f64,
    pub gamma_analytic: f64,
}

/// Stiff slope against truncation size, N ∈ {20, 30, 40}.
pub fn stiff_convergence_in_n(s: u32) -> Result<Vec<ConvergencePoint>> {
    [20usize, 30, 40]
        .iter()
        .map(|&n| {
            let f = stiff_trajectory(&BlockSpec::new(s, 1, 1.0, n), &stiff_grid())?;
            Ok(ConvergencePoint { s, n, slope: f.slope, gamma_truncated: f.gamma_truncated, gamma_analytic: f.gamma_analytic })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass() {
        for id in [1, 10] {
            let r = run_criterion(id, Level::Quick);
            assert_eq!(r.status, Status::Pass, "{}", r.line());
        }
    }

    #[test]
    fn unknown_id_fails() {
        let r = run_criterion(99, Level::Quick);
        assert!(r.blocking());
    }

    #[test]
    fn known_red_does_not_block() {
        let r = CriterionReport {
            id: 7,
            title: title(7),
            status: Status::Fail,
            known_red: true,
            measured: String::new(),
            tolerance: String::new(),
            seconds: 0.0,
        };
        assert!(!r.blocking());
        assert!(r.line().starts_with("[FAIL (known)]"));
    }
}
