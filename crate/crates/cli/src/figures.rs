//! Figure recipes. Parameters follow the figure captions; the ζ grids,
//! which the captions leave open, are recorded in each CSV header.

use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use raney_spectra::continuation::{disc_density_rho, edge_density_closed, sigma_cont, Side};
use raney_spectra::gram::block_index;
use raney_spectra::maps::zeta_c;
use raney_spectra::spectra::{eigen_trajectory, soft_spectrum, stiff_fit, BlockSpec};
use raney_spectra::Result;

use crate::config::{Grid, Spacing};
use crate::svg::{Plot, Series};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl FromStr for FigureId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <FigureId as clap::ValueEnum>::from_str(s, true)
    }
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
        }
    }
}

/// Bound parameters of a figure.
#[derive(Debug, Clone, PartialEq)]
pub struct Recipe {
    pub id: FigureId,
    pub s: Vec<u32>,
    pub q: u32,
    pub beta: f64,
    pub n: usize,
    pub p: Vec<u64>,
    pub grid: Grid,
    pub snapshot: f64,
    pub tol: f64,
}

impl Recipe {
    pub fn defaults(id: FigureId) -> Recipe {
        let eta_grid = |b: f64, n: usize| Grid { a: 0.99, b, n, spacing: Spacing::Log1m };
        let base = Recipe {
            id,
            s: vec![3, 5],
            q: 1,
            beta: 1.0,
            n: 30,
            p: vec![],
            grid: eta_grid(0.99999, 13),
            snapshot: 0.9999,
            tol: 1e-12,
        };
        match id {
            FigureId::Fig1 => base,
            FigureId::Fig2 => Recipe { n: 40, grid: eta_grid(0.9999, 9), ..base },
            FigureId::Fig3 => Recipe {
                p: vec![1, 2, 4, 8],
                // supercritical side, u/ζ_c² − 1 geometric
                grid: Grid { a: 2e-3, b: 7.0, n: 40, spacing: Spacing::Log },
                ..base
            },
            FigureId::Fig4 => Recipe { n: 40, ..base },
        }
    }
}

fn fig1(r: &Recipe) -> Result<Table> {
    let mut cols = vec!["s", "q", "beta", "N", "zeta_ratio", "L"].into_iter().map(String::from).collect::<Vec<_>>();
    cols.extend((1..=6).map(|k| format!("mu{k}")));
    let mut t = Table::with_columns("fig1", cols);
    t.meta("zeta_ratio grid", &r.grid).meta("fit", "tail affine fit of mu1 against L over the upper half of the L range");
    let etas = r.grid.points();
    let mut top = Plot::new("Leading eigenvalue", "L", "μ1");
    let mut lower = Vec::new();
    for &s in &r.s {
        let spec = BlockSpec::new(s, r.q, r.beta, r.n);
        let traj = eigen_trajectory(&spec, &etas, 6)?;
        let fit = stiff_fit(&traj, &spec.spike()?)?;
        t.meta(&format!("s={s} fit"), format!("slope {} intercept {} Gamma_N {}", fit.slope, fit.intercept, fit.gamma_truncated));
        let ls: Vec<f64> = traj.iter().map(|p| p.l).collect();
        for p in &traj {
            let mut row: Vec<Cell> = vec![s.into(), r.q.into(), r.beta.into(), r.n.into(), p.eta.into(), p.l.into()];
            row.extend(p.mu.iter().map(|&m| Cell::Float(m)));
            t.push(row);
        }
        top.series.push(Series::line(format!("s={s}"), ls.clone(), traj.iter().map(|p| p.mu[0]).collect()));
        let mut line = Series::line(format!("s={s} fit"), ls.clone(), ls.iter().map(|l| fit.slope * l + fit.intercept).collect());
        line.dashed = true;
        top.series.push(line);
        let mut bottom = Plot::new(format!("Normalized eigenvalues, s={s}"), "L", "μk / L");
        for k in 0..6 {
            bottom.series.push(Series::line(format!("k={}", k + 1), ls.clone(), traj.iter().map(|p| p.mu[k] / p.l).collect()));
        }
        lower.push(bottom);
    }
    t.plots.push(top);
    t.plots.extend(lower);
    Ok(t)
}

fn fig2(r: &Recipe) -> Result<Table> {
    let mut cols: Vec<String> = ["s", "q", "zeta_ratio", "inv_L"].iter().map(|c| c.to_string()).collect();
    cols.extend((2..=6).map(|k| format!("mu{k}")));
    let mut t = Table::with_columns("fig2", cols);
    t.meta("beta", r.beta).meta("N", r.n).meta("zeta_ratio grid (q=1 rows)", &r.grid);
    t.meta("snapshot", format!("all sectors q=1..s at zeta_ratio {}", r.snapshot));
    let etas = r.grid.points();
    let mut plots = Vec::new();
    for &s in &r.s {
        let traj = eigen_trajectory(&BlockSpec::new(s, r.q, r.beta, r.n), &etas, 6)?;
        let mut top = Plot::new(format!("Soft branches, s={s}, q={}", r.q), "1/L", "μk");
        let inv: Vec<f64> = traj.iter().map(|p| 1.0 / p.l).collect();
        for k in 1..6 {
            top.series.push(Series::line(format!("k={}", k + 1), inv.clone(), traj.iter().map(|p| p.mu[k]).collect()));
        }
        for p in &traj {
            let mut row: Vec<Cell> = vec![s.into(), r.q.into(), p.eta.into(), (1.0 / p.l).into()];
            row.extend(p.mu[1..6].iter().map(|&m| Cell::Float(m)));
            t.push(row);
        }
        let snaps: Vec<_> = (1..=s)
            .into_par_iter()
            .map(|q| soft_spectrum(&BlockSpec::new(s, q, r.beta, r.n), r.snapshot, 6))
            .collect::<Result<_>>()?;
        let mut bottom = Plot::new(format!("Soft spectrum at ζ/ζc = {}, s={s}", r.snapshot), "k", "μk");
        for (q, snap) in (1..=s).zip(&snaps) {
            let mut row: Vec<Cell> = vec![s.into(), q.into(), snap.eta.into(), (1.0 / snap.l).into()];
            row.extend(snap.values.iter().map(|&m| Cell::Float(m)));
            t.push(row);
            bottom.series.push(Series::line(format!("q={q}"), (2..=6).map(f64::from).collect(), snap.values.clone()));
        }
        plots.push(top);
        plots.push(bottom);
    }
    t.plots = plots;
    Ok(t)
}

fn fig3(r: &Recipe) -> Result<Table> {
    let mut t = Table::new("fig3", &["s", "p", "u", "sigma_cont", "rho", "edge_value"]);
    let sub = Grid { a: 0.02, b: 0.998, n: 40, spacing: Spacing::Log1m };
    t.meta("subcritical u/zeta_c^2 grid", &sub);
    t.meta("supercritical u/zeta_c^2 - 1 grid", &r.grid);
    let sub_pts = sub.points();
    let sup_pts = r.grid.points();
    let mut plots = Vec::new();
    for &s in &r.s {
        let zc2 = zeta_c(s).powi(2);
        let mut top = Plot::new(format!("Continued Gram weight, s={s}"), "u", "σ_p^cont(u)");
        let mut bottom = Plot::new(format!("Discontinuity density, s={s}"), "u", "ρ_p(u)");
        let mut edges = Series::line("edge", vec![], vec![]);
        edges.markers = true;
        for &p in &r.p {
            let edge = edge_density_closed(s, p)?.value;
            let sig: Vec<f64> = sub_pts
                .par_iter()
                .map(|&x| Ok(sigma_cont(s, p, Complex64::new(x * zc2, 0.0), Side::None, r.tol)?.re))
                .collect::<Result<_>>()?;
            let rho: Vec<f64> = sup_pts
                .par_iter()
                .map(|&x| disc_density_rho(s, p, (1.0 + x) * zc2, r.tol))
                .collect::<Result<_>>()?;
            let us: Vec<f64> = sub_pts.iter().map(|x| x * zc2).collect();
            let ur: Vec<f64> = sup_pts.iter().map(|x| (1.0 + x) * zc2).collect();
            for (u, v) in us.iter().zip(&sig) {
                t.push(vec![s.into(), p.into(), (*u).into(), (*v).into(), Cell::Empty, edge.into()]);
            }
            for (u, v) in ur.iter().zip(&rho) {
                t.push(vec![s.into(), p.into(), (*u).into(), Cell::Empty, (*v).into(), edge.into()]);
            }
            top.series.push(Series::line(format!("p={p}"), us, sig));
            bottom.series.push(Series::line(format!("p={p}"), ur, rho));
            edges.xs.push(zc2);
            edges.ys.push(edge);
        }
        bottom.series.push(edges);
        plots.push(top);
        plots.push(bottom);
    }
    t.plots = plots;
    Ok(t)
}

fn fig4(r: &Recipe) -> Result<Table> {
    let mut t = Table::new("fig4", &["s", "j", "p_j", "phi2", "phi3", "phi4", "phi5"]);
    t.meta("q", r.q).meta("beta", r.beta).meta("N", r.n).meta("zeta_ratio", r.snapshot);
    t.meta("sign", "each eigenvector is scaled so its largest-magnitude component is positive");
    let mut plots = Vec::new();
    for &s in &r.s {
        let soft = soft_spectrum(&BlockSpec::new(s, r.q, r.beta, r.n), r.snapshot, 5)?;
        let vecs: Vec<Vec<f64>> = soft
            .compressed_vectors
            .iter()
            .map(|v| {
                let big = v.iter().fold(0.0f64, |m, x| if x.abs() > m.abs() { *x } else { m });
                v.iter().map(|x| x * big.signum()).collect()
            })
            .collect();
        let js: Vec<f64> = (0..r.n).map(|j| j as f64).collect();
        let mut plot = Plot::new(format!("Soft modes, s={s}"), "j", "component");
        for (k, v) in vecs.iter().enumerate() {
            plot.series.push(Series::line(format!("φ{}", k + 2), js.clone(), v.clone()));
        }
        for j in 0..r.n {
            let mut row: Vec<Cell> = vec![s.into(), j.into(), block_index(s, r.q, j).into()];
            row.extend(vecs.iter().map(|v| Cell::Float(v[j])));
            t.push(row);
        }
        plots.push(plot);
    }
    t.plots = plots;
    Ok(t)
}

pub fn build(r: &Recipe) -> Result<Table> {
    match r.id {
        FigureId::Fig1 => fig1(r),
        FigureId::Fig2 => fig2(r),
        FigureId::Fig3 => fig3(r),
        FigureId::Fig4 => fig4(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use raney_spectra::acceptance::stiff_grid;

    #[test]
    fn caption_defaults() {
        let f1 = Recipe::defaults(FigureId::Fig1);
        assert_eq!((f1.beta, f1.n, f1.q, f1.s.clone()), (1.0, 30, 1, vec![3, 5]));
        let f2 = Recipe::defaults(FigureId::Fig2);
        assert_eq!((f2.n, f2.snapshot), (40, 0.9999));
        let f4 = Recipe::defaults(FigureId::Fig4);
        assert_eq!((f4.q, f4.beta, f4.n), (1, 1.0, 40));
    }

    #[test]
    fn fig1_grid_matches_acceptance_grid() {
        let g = Recipe::defaults(FigureId::Fig1).grid.points();
        for (a, b) in g.iter().zip(stiff_grid()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fig4_small_is_deterministic() {
        let r = Recipe { s: vec![3], n: 12, ..Recipe::defaults(FigureId::Fig4) };
        let a = build(&r).unwrap();
        let b = build(&r).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows.len(), 12);
        assert_eq!(a.columns, vec!["s", "j", "p_j", "phi2", "phi3", "phi4", "phi5"]);
    }
}
