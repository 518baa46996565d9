//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x)? + f(c + x)?;
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok((kron * h, ((kron - gauss) * h).abs()))
}

/// Integrates f over [a, b] to max(abs_tol, rel_tol·|I|), bisecting the
/// interval with the largest error estimate.
pub fn integrate<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature> {
    let (v, e) = gk15(&mut f, a, b)?;
    let mut parts = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        if !value.is_finite() {
            return Err(Error::Accuracy("non-finite integrand".into()));
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Quadrature { value, error, evaluations });
        }
        if parts.len() >= max_intervals {
            return Err(Error::Accuracy(format!(
                "quadrature error {error:e} above target after {} intervals",
                parts.len()
            )));
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid)?;
        let (v2, e2) = gk15(&mut f, mid, hi)?;
        evaluations += 30;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| Ok(x.powi(20) - 3.0 * x), 0.0, 2.0, 1e-14, 1e-14, 10).unwrap();
        assert!((q.value - (2f64.powi(21) / 21.0 - 6.0)).abs() < 1e-9);
    }

    #[test]
    fn endpoint_singularity() {
        let q = integrate(|x: f64| Ok(x.sqrt().recip()), 0.0, 1.0, 1e-10, 1e-10, 500).unwrap();
        assert!((q.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn oscillatory() {
        let q = integrate(|x: f64| Ok((30.0 * x).sin() * x.exp()), 0.0, 3.0, 1e-12, 1e-12, 200).unwrap();
        let exact = {
            let e3 = 3f64.exp();
            (e3 * ((90f64).sin() - 30.0 * (90f64).cos()) + 30.0) / 901.0
        };
        assert!((q.value - exact).abs() < 1e-10);
    }

    #[test]
    fn errors_propagate() {
        let r = integrate(|x| if x > 0.5 { Err(Error::Path("x".into())) } else { Ok(x) }, 0.0, 1.0, 1e-12, 1e-12, 10);
        assert!(matches!(r, Err(Error::Path(_))));
    }
}
