//! Spectra of the truncated weighted blocks: the stiff eigenvalue and its
//! L(ζ) law, eigenvector alignment with the spike, the soft spectrum and
//! the rank-one decomposition G̃ = L d̃d̃ᵀ + C̃.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::gram::{spike_vector, weighted_block, SpikeVector, WeightedBlock};
use crate::linalg::{dot, householder_basis, norm2, sym_eig, EigenDecomposition, SymMatrix};
use crate::maps::zeta_c;

pub use crate::linalg::sym_eig as eigen;

/// L(ζ) = log(1/(1 - ζ²/ζ_c²)).
pub fn log_scale(zeta: f64, zeta_c: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta < zeta_c) {
        return Err(Error::Domain(format!("zeta = {zeta} outside (0, {zeta_c})")));
    }
    let eta = zeta / zeta_c;
    Ok(-(-eta * eta).ln_1p())
}

/// L as a function of η = ζ/ζ_c.
pub fn log_scale_ratio(eta: f64) -> Result<f64> {
    log_scale(eta, 1.0)
}

/// Block parameters shared by the spectral operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockSpec {
    pub s: u32,
    pub q: u32,
    pub beta: f64,
    pub n: usize,
    /// Relative truncation tolerance per entry.
    pub tol: f64,
}

impl BlockSpec {
    pub fn new(s: u32, q: u32, beta: f64, n: usize) -> Self {
        Self { s, q, beta, n, tol: crate::gram::DEFAULT_TOL }
    }

    pub fn block(&self, eta: f64) -> Result<WeightedBlock> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::Domain(format!("zeta/zeta_c = {eta} outside (0, 1)")));
        }
        weighted_block(self.s, eta * zeta_c(self.s), self.q, self.beta, self.n, self.tol)
    }

    pub fn spike(&self) -> Result<SpikeVector> {
        spike_vector(self.s, self.q, self.beta, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    /// ζ/ζ_c.
    pub eta: f64,
    pub l: f64,
    /// Leading eigenvalues μ_1 ≥ μ_2 ≥ …
    pub mu: Vec<f64>,
}

/// Leading `k` eigenvalues of G̃ along a grid of ζ/ζ_c values.
pub fn eigen_trajectory(spec: &BlockSpec, etas: &[f64], k: usize) -> Result<Vec<TrajectoryPoint>> {
    if k == 0 || k > spec.n {
        return Err(Error::Domain(format!("k = {k} must lie in [1, N = {}]", spec.n)));
    }
    etas.iter()
        .map(|&eta| {
            let b = spec.block(eta)?;
            let e = sym_eig(&b.matrix)?;
            Ok(TrajectoryPoint { eta, l: log_scale_ratio(eta)?, mu: e.values[..k].to_vec() })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StiffFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of the affine fit over the fit window.
    pub residual: f64,
    /// Range of μ_1 over the fit window.
    pub range: f64,
    pub l_values: Vec<f64>,
    pub mu1: Vec<f64>,
    /// Number of grid points in the fit window (upper half of the L range).
    pub window: usize,
    pub gamma_truncated: f64,
    pub gamma_analytic: f64,
}

impl StiffFit {
    pub fn relative_residual(&self) -> f64 {
        self.residual / self.range
    }

    pub fn slope_error(&self) -> f64 {
        (self.slope - self.gamma_truncated).abs() / self.gamma_truncated
    }
}

/// Affine fit μ_1 ≈ slope·L + intercept over the upper half of the L range.
pub fn stiff_fit(points: &[TrajectoryPoint], spike: &SpikeVector) -> Result<StiffFit> {
    let l_values: Vec<f64> = points.iter().map(|p| p.l).collect();
    let mu1: Vec<f64> = points.iter().map(|p| p.mu[0]).collect();
    let (lmin, lmax) = l_values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| (a.min(l), b.max(l)));
    let mid = 0.5 * (lmin + lmax);
    let (x, y): (Vec<f64>, Vec<f64>) = l_values
        .iter()
        .zip(&mu1)
        .filter(|(l, _)| **l >= mid)
        .map(|(l, m)| (*l, *m))
        .unzip();
    let f = line_fit(&x, &y)?;
    let range = y.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - y.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if f.slope <= 0.0 {
        return Err(Error::Fit(format!("stiff slope {} is not positive", f.slope)));
    }
    Ok(StiffFit {
        slope: f.slope,
        intercept: f.intercept,
        residual: f.rms,
        range,
        window: x.len(),
        l_values,
        mu1,
        gamma_truncated: spike.gamma_truncated,
        gamma_analytic: spike.gamma_analytic,
    })
}

pub fn stiff_trajectory(spec: &BlockSpec, etas: &[f64]) -> Result<StiffFit> {
    if spec.n < 10 {
        return Err(Error::Domain("stiff fits need N >= 10".into()));
    }
    if etas.len() < 2 {
        return Err(Error::Fit("need at least 2 grid points".into()));
    }
    let pts = eigen_trajectory(spec, etas, 1)?;
    stiff_fit(&pts, &spec.spike()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alignment {
    pub eta: f64,
    pub l: f64,
    /// |⟨ψ_1, d̂⟩|.
    pub value: f64,
    /// μ_1 - μ_2 < 1e-10 μ_1: ψ_1 is not well defined.
    pub degenerate: bool,
}

fn alignment_from(e: &EigenDecomposition, spike: &[f64], eta: f64) -> Result<Alignment> {
    let dn = norm2(spike);
    let value = (dot(&e.vectors[0], spike) / dn).abs();
    let degenerate = e.values.len() > 1 && e.values[0] - e.values[1] < 1e-10 * e.values[0].abs();
    Ok(Alignment { eta, l: log_scale_ratio(eta)?, value, degenerate })
}

pub fn eigvec_alignment(spec: &BlockSpec, eta: f64) -> Result<Alignment> {
    let b = spec.block(eta)?;
    let e = sym_eig(&b.matrix)?;
    alignment_from(&e, &spec.spike()?.entries, eta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankOneRemainder {
    pub eta: f64,
    pub l: f64,
    /// C̃ = G̃ - L d̃d̃ᵀ.
    pub matrix: SymMatrix,
    pub op_norm: f64,
}

pub fn rank_one_remainder_of(block: &WeightedBlock, spike: &SpikeVector, eta: f64) -> Result<RankOneRemainder> {
    let l = log_scale_ratio(eta)?;
    let matrix = block.matrix.sub(&SymMatrix::rank_one(&spike.entries, l));
    let op_norm = matrix.op_norm()?;
    Ok(RankOneRemainder { eta, l, matrix, op_norm })
}

pub fn rank_one_remainder(spec: &BlockSpec, eta: f64) -> Result<RankOneRemainder> {
    rank_one_remainder_of(&spec.block(eta)?, &spec.spike()?, eta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoftSpectrum {
    pub eta: f64,
    pub l: f64,
    /// μ_2..μ_k of G̃.
    pub values: Vec<f64>,
    /// Leading k-1 eigenvalues of the compression of C̃ to d̃^⊥.
    pub compressed: Vec<f64>,
    /// Matching eigenvectors of the compression, in block coordinates
    /// (each orthogonal to d̃).
    pub compressed_vectors: Vec<Vec<f64>>,
}

/// Eigen-decomposition of Q C̃ Q on the orthogonal complement of `spike`,
/// returned in block coordinates.
pub fn compress_remainder(c: &SymMatrix, spike: &[f64]) -> Result<EigenDecomposition> {
    let basis = householder_basis(spike)?;
    let perp = &basis[1..];
    let small = c.congruence(perp);
    let e = sym_eig(&small)?;
    let n = spike.len();
    let vectors = e
        .vectors
        .iter()
        .map(|y| {
            let mut v = vec![0.0; n];
            for (coef, col) in y.iter().zip(perp) {
                for (vi, ci) in v.iter_mut().zip(col) {
                    *vi += coef * ci;
                }
            }
            // same sign convention as sym_eig
            let big = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if let Some(f) = v.iter().find(|x| x.abs() > 1e-12 * big) {
                if *f < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            v
        })
        .collect();
    Ok(EigenDecomposition { values: e.values, vectors })
}

pub fn soft_spectrum(spec: &BlockSpec, eta: f64, k: usize) -> Result<SoftSpectrum> {
    if k < 2 || k > spec.n {
        return Err(Error::Domain(format!("k = {k} must lie in [2, N = {}]", spec.n)));
    }
    let b = spec.block(eta)?;
    let spike = spec.spike()?;
    let e = sym_eig(&b.matrix)?;
    let rem = rank_one_remainder_of(&b, &spike, eta)?;
    let ce = compress_remainder(&rem.matrix, &spike.entries)?;
    Ok(SoftSpectrum {
        eta,
        l: rem.l,
        values: e.values[1..k].to_vec(),
        compressed: ce.values[..k - 1].to_vec(),
        compressed_vectors: ce.vectors[..k - 1].to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToeplitzPoint {
    pub eta: f64,
    pub l: f64,
    /// ‖K_η - K_1‖_HS.
    pub hs: f64,
    pub l_times_hs: f64,
}

/// Σ_{i,j} a_i a_j x^{|i-j|} in O(N).
fn geometric_kernel_sum(a: &[f64], x: f64) -> f64 {
    let mut tail = 0.0; // Σ_{j>i} a_j x^{j-i}
    let mut acc = 0.0;
    for i in (0..a.len()).rev() {
        acc += a[i] * (a[i] + 2.0 * tail);
        tail = x * (a[i] + tail);
    }
    acc
}

/// L·‖K_η - K_1‖_HS with (K_η)_{ij} = η^{|i-j|} d̃_i d̃_j, for each η.
pub fn toeplitz_removal_check(s: u32, q: u32, beta: f64, n: usize, etas: &[f64]) -> Result<Vec<ToeplitzPoint>> {
    let spike = spike_vector(s, q, beta, n)?;
    let a: Vec<f64> = spike.entries.iter().map(|d| d * d).collect();
    let s1 = geometric_kernel_sum(&a, 1.0);
    etas.par_iter()
        .map(|&eta| {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::Domain(format!("eta = {eta} outside (0, 1]")));
            }
            if eta == 1.0 {
                return Ok(ToeplitzPoint { eta, l: f64::INFINITY, hs: 0.0, l_times_hs: 0.0 });
            }
            let hs2 = s1 - 2.0 * geometric_kernel_sum(&a, eta) + geometric_kernel_sum(&a, eta * eta);
            let hs = hs2.max(0.0).sqrt();
            let l = log_scale_ratio(eta)?;
            Ok(ToeplitzPoint { eta, l, hs, l_times_hs: l * hs })
        })
        .collect()
}

/// Strict sign changes in index order, ignoring entries below 1e-12 ‖v‖_∞.
pub fn nodal_count(v: &[f64]) -> Result<usize> {
    let big = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if big == 0.0 {
        return Err(Error::Validation("zero vector has no sign pattern".into()));
    }
    let mut count = 0;
    let mut last = 0.0f64;
    for &x in v {
        if x.abs() < 1e-12 * big {
            continue;
        }
        if last != 0.0 && x.signum() != last.signum() {
            count += 1;
        }
        last = x;
    }
    Ok(count)
}

/// Largest mismatch between the spectra of Ṽᵀ Ṽ and Ṽ Ṽᵀ (the latter
/// padded with zeros), relative to the top eigenvalue. Backward-stable
/// solvers only resolve eigenvalues to ε‖A‖, so tiny eigenvalues are not
/// compared entrywise-relatively.
pub fn synthesis_isospectrality(v: &[Vec<f64>]) -> Result<f64> {
    let rows = v.len();
    let cols = v.first().map_or(0, |r| r.len());
    let gram = SymMatrix::from_fn(cols, |i, j| v.iter().map(|r| r[i] * r[j]).sum());
    let outer = SymMatrix::from_fn(rows, |i, j| dot(&v[i], &v[j]));
    let a = sym_eig(&gram)?.values;
    let b = sym_eig(&outer)?.values;
    let top = a[0].abs().max(1e-300);
    let mut worst = 0.0f64;
    for (k, x) in a.iter().enumerate() {
        worst = worst.max((x - b[k]).abs() / top);
    }
    for y in &b[cols.min(rows)..] {
        worst = worst.max(y.abs() / top);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::synthesis_matrix;

    #[test]
    fn log_scale_examples() {
        let e = (1.0 - (-1.0f64).exp()).sqrt();
        assert!((log_scale(e * 0.3, 0.3).unwrap() - 1.0).abs() < 1e-14);
        assert!((log_scale_ratio(0.9).unwrap() - (1.0f64 / 0.19).ln()).abs() < 1e-14);
        assert!(log_scale_ratio(1e-9).unwrap() < 1e-17);
        assert!(log_scale(0.3, 0.3).is_err());
    }

    #[test]
    fn nodal_examples() {
        assert_eq!(nodal_count(&[1.0, 2.0, 3.0]).unwrap(), 0);
        assert_eq!(nodal_count(&[1.0, -1.0, 1.0]).unwrap(), 2);
        assert_eq!(nodal_count(&[1.0, 1e-20, -1.0]).unwrap(), 1);
        assert!(nodal_count(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn geometric_kernel_direct() {
        let a = [0.5, 0.2, 0.1, 0.05, 0.01];
        let x: f64 = 0.7;
        let mut direct = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                direct += a[i] * a[j] * x.powi((i as i32 - j as i32).abs());
            }
        }
        assert!((geometric_kernel_sum(&a, x) - direct).abs() < 1e-15);
    }

    #[test]
    fn toeplitz_limits() {
        let pts = toeplitz_removal_check(3, 1, 1.0, 200, &[0.9, 0.99, 0.999, 1.0]).unwrap();
        assert_eq!(pts[3].hs, 0.0);
        assert!(pts[0].l_times_hs > pts[1].l_times_hs && pts[1].l_times_hs > pts[2].l_times_hs);
        // β = 1: HS ~ C(1 - η)
        let r = pts[1].hs / pts[2].hs;
        assert!((r.log10() - 1.0).abs() < 0.15, "ratio {r}");
    }

    #[test]
    fn stiff_fit_needs_points() {
        let spec = BlockSpec::new(3, 1, 1.0, 12);
        assert!(matches!(stiff_trajectory(&spec, &[0.9]), Err(Error::Fit(_))));
        assert!(stiff_trajectory(&BlockSpec::new(3, 1, 1.0, 5), &[0.9, 0.99]).is_err());
    }

    #[test]
    fn soft_spectrum_bounds() {
        let spec = BlockSpec::new(3, 1, 1.0, 8);
        assert!(soft_spectrum(&spec, 0.9, 9).is_err());
        let sp = soft_spectrum(&spec, 0.99, 4).unwrap();
        assert_eq!(sp.values.len(), 3);
        let d = spec.spike().unwrap().entries;
        for v in &sp.compressed_vectors {
            assert!(dot(v, &d).abs() < 1e-12);
        }
        // interlacing: the compression of G̃ to d̃^⊥ interlaces G̃, and on d̃^⊥
        // the rank-one part vanishes, so compressed values sit below μ_1
        let b = spec.block(0.99).unwrap();
        let mu1 = sym_eig(&b.matrix).unwrap().values[0];
        assert!(sp.compressed[0] <= mu1 + 1e-12);
    }

    #[test]
    fn stiff_mode_small_case() {
        let spec = BlockSpec::new(3, 1, 1.0, 12);
        let etas = [0.99, 0.995, 0.999, 0.9995, 0.9999];
        let pts = eigen_trajectory(&spec, &etas, 3).unwrap();
        // gap grows along the grid
        let gaps: Vec<f64> = pts.iter().map(|p| p.mu[0] - p.mu[1]).collect();
        assert!(gaps.windows(2).all(|w| w[1] > w[0]));
        let a0 = eigvec_alignment(&spec, 0.9).unwrap();
        let a1 = eigvec_alignment(&spec, 0.9999).unwrap();
        assert!(a1.value > a0.value && a1.value <= 1.0 + 1e-12);
        // Rayleigh lower bound μ_1 ≥ Γ_N L - ‖C̃‖
        let spike = spec.spike().unwrap();
        for p in &pts {
            let rem = rank_one_remainder(&spec, p.eta).unwrap();
            assert!(p.mu[0] >= spike.gamma_truncated * p.l - rem.op_norm - 1e-12);
        }
    }

    #[test]
    fn isospectral_synthesis() {
        let z = 0.9 * zeta_c(3);
        let v = synthesis_matrix(3, z, 1, 1.0, 14, 6).unwrap();
        assert!(synthesis_isospectrality(&v).unwrap() < 1e-8);
    }

    #[test]
    fn remainder_reconstructs_block() {
        let spec = BlockSpec::new(2, 1, 1.0, 6);
        let b = spec.block(0.999).unwrap();
        let sp = spec.spike().unwrap();
        let r = rank_one_remainder_of(&b, &sp, 0.999).unwrap();
        let back = r.matrix.add_scaled(&SymMatrix::rank_one(&sp.entries, 1.0), r.l);
        assert!(back.sub(&b.matrix).max_abs() < 1e-14 * b.matrix.max_abs());
    }
}
