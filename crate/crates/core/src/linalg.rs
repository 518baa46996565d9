//! Dense symmetric matrices and a Householder + implicit QL eigensolver.

use serde::Serialize;

use crate::error::{Error, Result};

/// Square matrix stored row-major. Symmetry is checked where it matters
/// rather than enforced by the storage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Validation("matrix is not square".into()));
        }
        Ok(Self { n, data: rows.concat() })
    }

    /// Outer product v vᵀ scaled by `alpha`.
    pub fn rank_one(v: &[f64], alpha: f64) -> Self {
        Self::from_fn(v.len(), |i, j| alpha * v[i] * v[j])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Sets both (i, j) and (j, i).
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { n: self.n, data }
    }

    pub fn add_scaled(&self, other: &Self, alpha: f64) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + alpha * b).collect();
        Self { n: self.n, data }
    }

    /// Largest |eigenvalue| (the operator 2-norm for symmetric input).
    pub fn op_norm(&self) -> Result<f64> {
        let e = sym_eig(self)?;
        Ok(e.values.iter().fold(0.0f64, |a, &x| a.max(x.abs())))
    }

    /// Rows and columns in `idx`, in that order.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]))
    }

    /// Qᵀ A Q for a square Q given by columns.
    pub fn congruence(&self, q_cols: &[Vec<f64>]) -> Self {
        let aq: Vec<Vec<f64>> = q_cols.iter().map(|c| self.matvec(c)).collect();
        let k = q_cols.len();
        let mut out = Self::zeros(k);
        for i in 0..k {
            for j in 0..=i {
                out.set_sym(i, j, dot(&q_cols[i], &aq[j]));
            }
        }
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenDecomposition {
    /// Descending.
    pub values: Vec<f64>,
    /// `vectors[k]` belongs to `values[k]`; unit length, first
    /// significant component positive.
    pub vectors: Vec<Vec<f64>>,
}

impl EigenDecomposition {
    pub fn max_residual(&self, a: &SymMatrix) -> f64 {
        let mut worst = 0.0f64;
        for (mu, v) in self.values.iter().zip(&self.vectors) {
            let av = a.matvec(v);
            let r: f64 = av.iter().zip(v).map(|(x, y)| (x - mu * y).powi(2)).sum();
            worst = worst.max(r.sqrt());
        }
        worst
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.vectors.len() {
            for j in 0..=i {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(&self.vectors[i], &self.vectors[j]) - target).abs());
            }
        }
        worst
    }
}

/// Full eigen-decomposition of a symmetric matrix, eigenvalues descending.
pub fn sym_eig(a: &SymMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    if n == 0 {
        return Ok(EigenDecomposition { values: vec![], vectors: vec![] });
    }
    let scale = a.max_abs();
    if a.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("matrix has non-finite entries".into()));
    }
    if a.asymmetry() > 1e-12 * scale {
        return Err(Error::Validation(format!(
            "matrix is not symmetric (defect {:.3e})",
            a.asymmetry()
        )));
    }
    let mut v = a.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]).then(i.cmp(&j)));
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &k in &order {
        let mut col: Vec<f64> = (0..n).map(|i| v[i * n + k]).collect();
        let big = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-12 * big) {
            if *first < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
        }
        values.push(d[k]);
        vectors.push(col);
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Householder reduction to tridiagonal form, accumulating the transform
/// in `v` (row-major). On exit `d` holds the diagonal and `e[1..]` the
/// subdiagonal.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let idx = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
                v[idx(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in j + 1..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = 0.0;
    }
    v[idx(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iteration on the tridiagonal form from [`tred2`].
fn tql2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let idx = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 100 {
                    return Err(Error::Iteration("QL iteration did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[idx(k, i + 1)];
                        v[idx(k, i + 1)] = s * v[idx(k, i)] + c * h;
                        v[idx(k, i)] = c * v[idx(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Householder reflector H = I - 2uuᵀ mapping `x/|x|` to e_0. Returns the
/// columns of H; columns 1.. span the orthogonal complement of x.
pub fn householder_basis(x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let nx = norm2(x);
    if nx == 0.0 {
        return Err(Error::Validation("zero vector has no complement basis".into()));
    }
    let mut u: Vec<f64> = x.iter().map(|v| v / nx).collect();
    // reflect onto +e_0 or -e_0, whichever avoids cancellation
    let sign = if u[0] >= 0.0 { 1.0 } else { -1.0 };
    u[0] += sign;
    let nu = norm2(&u);
    u.iter_mut().for_each(|v| *v /= nu);
    Ok((0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { 1.0 } else { 0.0 } - 2.0 * u[i] * u[j])
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trivial_spectra() {
        let e = sym_eig(&SymMatrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        let d = SymMatrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]])
            .unwrap();
        let e = sym_eig(&d).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vectors[1], vec![0.0, 0.0, 1.0]);
        let v = [1.0, 2.0, -1.0, 1.0];
        let e = sym_eig(&SymMatrix::rank_one(&v, 1.0)).unwrap();
        assert!((e.values[0] - 7.0).abs() < 1e-14);
        assert!(e.values[1..].iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn rejects_asymmetric() {
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&m), Err(Error::Validation(_))));
    }

    #[test]
    fn one_by_one_and_sign_convention() {
        let e = sym_eig(&SymMatrix::from_rows(&[vec![-2.5]]).unwrap()).unwrap();
        assert_eq!(e.values, vec![-2.5]);
        assert_eq!(e.vectors, vec![vec![1.0]]);
        let m = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = sym_eig(&m).unwrap();
        assert!(e.vectors.iter().all(|v| v[0] > 0.0));
    }

    #[test]
    fn hilbert_matrix() {
        // Hilbert matrix of order 6: largest eigenvalue 1.6188998589...
        let h = SymMatrix::from_fn(6, |i, j| 1.0 / (i + j + 1) as f64);
        let e = sym_eig(&h).unwrap();
        assert!((e.values[0] - 1.618899858924339).abs() < 1e-13);
        assert!(e.max_residual(&h) < 1e-14);
    }

    #[test]
    fn householder_complement() {
        let x = [3.0, -1.0, 2.0, 0.5];
        let q = householder_basis(&x).unwrap();
        for c in &q[1..] {
            assert!(dot(c, &x).abs() < 1e-14);
        }
        assert!((dot(&q[0], &x).abs() - norm2(&x)).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn random_symmetric(seed in proptest::collection::vec(-1.0f64..1.0, 36..37)) {
            let a = SymMatrix::from_fn(8, |i, j| {
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                seed[(hi * (hi + 1) / 2 + lo) % 36]
            });
            let e = sym_eig(&a).unwrap();
            prop_assert!(e.max_residual(&a) <= 1e-12 * a.max_abs().max(1e-300));
            prop_assert!(e.orthonormality_defect() < 1e-12);
            prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            let tr: f64 = e.values.iter().sum();
            prop_assert!((tr - a.trace()).abs() < 1e-12);
        }
    }
}
