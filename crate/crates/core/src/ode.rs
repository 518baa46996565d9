//! Adaptive Dormand–Prince 5(4) integration of complex linear systems along
//! straight segments of the complex plane.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 200_000;
const H_MIN: f64 = 1e-14;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

impl StepStats {
    fn merge(&mut self, o: StepStats) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
    }
}

/// Integrates y' = f(t, y) from `t0` to `t1` along the straight segment
/// between them. `f(t, y, dy)` writes the derivative with respect to t.
pub fn integrate_segment<F>(f: &F, y: &mut [Complex64], t0: Complex64, t1: Complex64, tol: f64) -> Result<StepStats>
where
    F: Fn(Complex64, &[Complex64], &mut [Complex64]),
{
    let n = y.len();
    let dir = t1 - t0;
    let len = dir.norm();
    let mut stats = StepStats::default();
    if len == 0.0 {
        return Ok(stats);
    }
    let mut k = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut ynew = vec![Complex64::new(0.0, 0.0); n];
    // parameter λ runs over [0, 1]
    let mut lam = 0.0f64;
    let mut h = (0.05 / len).min(1.0);
    let eval = |lam: f64, y: &[Complex64], out: &mut [Complex64]| {
        f(t0 + dir * lam, y, out);
        for v in out.iter_mut() {
            *v *= dir;
        }
    };
    eval(lam, y, &mut k[0]);
    while lam < 1.0 {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(Error::Stiffness(format!("step budget exhausted at t = {}", t0 + dir * lam)));
        }
        if h * len < H_MIN {
            return Err(Error::Stiffness(format!("step size underflow at t = {}", t0 + dir * lam)));
        }
        let h_eff = h.min(1.0 - lam);
        for stage in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(stage) {
                    if A[stage][j] != 0.0 {
                        acc += kj[i] * (h_eff * A[stage][j]);
                    }
                }
                tmp[i] = acc;
            }
            eval(lam + C[stage] * h_eff, &tmp, &mut k[stage]);
        }
        let mut err = 0.0f64;
        let ymax = y.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        for i in 0..n {
            let mut acc = y[i];
            let mut e = Complex64::new(0.0, 0.0);
            for j in 0..7 {
                acc += k[j][i] * (h_eff * B5[j]);
                e += k[j][i] * (h_eff * E[j]);
            }
            ynew[i] = acc;
            let scale = tol * y[i].norm().max(acc.norm()).max(1e-3 * ymax).max(1e-300);
            err = err.max(e.norm() / scale);
        }
        if !err.is_finite() {
            return Err(Error::Stiffness(format!("non-finite state near t = {}", t0 + dir * lam)));
        }
        if err <= 1.0 {
            lam += h_eff;
            if 1.0 - lam < 1e-15 {
                lam = 1.0;
            }
            y.copy_from_slice(&ynew);
            // first-same-as-last
            let last = k[6].clone();
            k[0] = last;
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = h_eff * fac;
    }
    Ok(stats)
}

/// Integrates along a polyline through `points`.
pub fn integrate_path<F>(f: &F, y: &mut [Complex64], points: &[Complex64], tol: f64) -> Result<StepStats>
where
    F: Fn(Complex64, &[Complex64], &mut [Complex64]),
{
    let mut stats = StepStats::default();
    for w in points.windows(2) {
        stats.merge(integrate_segment(f, y, w[0], w[1], tol)?);
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_along_complex_segment() {
        // y' = i y, y(0) = 1
        let f = |_t: Complex64, y: &[Complex64], dy: &mut [Complex64]| dy[0] = Complex64::i() * y[0];
        let mut y = [Complex64::new(1.0, 0.0)];
        let t1 = Complex64::new(3.0, -1.0);
        integrate_segment(&f, &mut y, Complex64::new(0.0, 0.0), t1, 1e-12).unwrap();
        let exact = (Complex64::i() * t1).exp();
        assert!((y[0] - exact).norm() < 1e-10 * exact.norm());
    }

    #[test]
    fn harmonic_oscillator_closed_loop() {
        // y'' = -y as a system; any closed loop returns the start value
        let f = |_t: Complex64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let mut y = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let pts = [
            Complex64::new(0.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(2.0, 1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
        ];
        integrate_path(&f, &mut y, &pts, 1e-12).unwrap();
        assert!((y[0] - 1.0).norm() < 1e-10 && y[1].norm() < 1e-10);
    }

    #[test]
    fn singular_rhs_reports_stiffness() {
        let f = |t: Complex64, y: &[Complex64], dy: &mut [Complex64]| dy[0] = y[0] / (t - 1.0).powi(3);
        let mut y = [Complex64::new(1.0, 0.0)];
        let r = integrate_segment(&f, &mut y, Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0), 1e-12);
        assert!(matches!(r, Err(Error::Stiffness(_))));
    }
}
