//! One function per subcommand. Each builds a [`Table`] which `emit`
//! renders in the requested format.

use std::path::Path;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::json;

use raney_spectra::acceptance::{run_suite, stiff_convergence_in_n, stiff_grid, Level};
use raney_spectra::continuation::{
    b_closed_form, default_fit_grid, disc_density_rho, edge_density_closed, gp_continue, hyp_params, resonant_fit,
    HypParams, Side,
};
use raney_spectra::gram::{block_index, hessian_entry, sigma_p};
use raney_spectra::jacobi::{hankel_positivity, jacobi_coefficients, moments, perron_density, perron_report, weyl_function};
use raney_spectra::maps::{thresholds, zeta_c};
use raney_spectra::raney::raney_table;
use raney_spectra::spectra::{eigen_trajectory, eigvec_alignment, soft_spectrum, stiff_fit, BlockSpec};

use crate::config::{Format, Grid, Params, PrecisionArg, Spacing};
use crate::figures::{self, Recipe};
use crate::svg::{self, Plot, Series};
use crate::table::{Cell, Table};
use crate::{CliError, Command, LevelArg, Point, SideArg};

type Res<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> Res<T> {
    Err(CliError::Usage(msg.into()))
}

fn s_list(p: &Params, default: u32) -> Res<Vec<u32>> {
    let list = p.s.clone().unwrap_or_else(|| vec![default as u64]);
    list.into_iter()
        .map(|s| u32::try_from(s).map_err(|_| CliError::Usage(format!("s = {s} is too large"))))
        .collect()
}

fn single_s(p: &Params, default: u32) -> Res<u32> {
    match s_list(p, default)?.as_slice() {
        [s] => Ok(*s),
        _ => usage("this command takes a single value of --s"),
    }
}

fn p_list(p: &Params, default: u64) -> Vec<u64> {
    p.p.clone().unwrap_or_else(|| vec![default])
}

fn single_p(p: &Params, default: u64) -> Res<u64> {
    match p_list(p, default).as_slice() {
        [v] => Ok(*v),
        _ => usage("this command takes a single value of --p"),
    }
}

/// ζ/ζ_c from --zeta or --zeta-ratio, if either is given.
fn eta_point(p: &Params, s: u32) -> Res<Option<f64>> {
    match (p.zeta, p.zeta_ratio) {
        (Some(_), Some(_)) => usage("give either --zeta or --zeta-ratio, not both"),
        (Some(z), None) => Ok(Some(z / zeta_c(s))),
        (None, r) => Ok(r),
    }
}

/// The ζ/ζ_c values of a sweep: the grid, a single point, or the default grid.
fn eta_values(p: &Params, s: u32, default: Grid) -> Res<(Vec<f64>, String)> {
    match (eta_point(p, s)?, &p.grid) {
        (Some(_), Some(_)) => usage("give either a point (--zeta, --zeta-ratio) or --grid"),
        (Some(e), None) => Ok((vec![e], format!("{e}"))),
        (None, Some(g)) => Ok((g.points(), g.to_string())),
        (None, None) => Ok((default.points(), default.to_string())),
    }
}

fn grid_or(p: &Params, default: Grid) -> Grid {
    p.grid.clone().unwrap_or(default)
}

fn log1m(a: f64, b: f64, n: usize) -> Grid {
    Grid { a, b, n, spacing: Spacing::Log1m }
}

fn double_only(p: &Params, cmd: &str) -> Res<()> {
    if p.precision == Some(PrecisionArg::Extended) {
        return usage(format!("{cmd} has no extended-precision path; only resonant-fit does"));
    }
    Ok(())
}

fn side_of(s: SideArg) -> Side {
    match s {
        SideArg::Above => Side::Above,
        SideArg::Below => Side::Below,
        SideArg::None => Side::None,
    }
}

fn u_point(pt: &Point, p: &Params, s: u32) -> Res<Complex64> {
    match (pt.u, eta_point(p, s)?) {
        (Some(_), Some(_)) => usage("give either --u or a ζ point, not both"),
        (Some(u), None) => Ok(Complex64::new(u, pt.im)),
        (None, Some(e)) => {
            let z = e * zeta_c(s);
            Ok(Complex64::new(z * z, pt.im))
        }
        (None, None) => usage("this command needs --u (or --zeta / --zeta-ratio)"),
    }
}

fn hyp_meta(t: &mut Table, h: &HypParams) {
    let list = |v: &[num_rational::BigRational]| v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" ");
    t.meta("c_p", h.cancellations)
        .meta("reduced upper", list(&h.reduced_upper))
        .meta("reduced lower", list(&h.reduced_lower))
        .meta("order", h.order());
}

fn cmd_thresholds(p: &Params) -> Res<Table> {
    double_only(p, "thresholds")?;
    let mut t = Table::new(
        "thresholds",
        &["s", "zeta_c", "zeta_c_value", "zeta_univ", "zeta_univ_value", "ratio", "ratio_value"],
    );
    for s in s_list(p, 3)? {
        let th = thresholds(s)?;
        let f = |r: &num_rational::BigRational| Cell::Float(r.to_f64().unwrap());
        t.push(vec![
            s.into(),
            th.zeta_c.to_string().into(),
            f(&th.zeta_c),
            th.zeta_univ.to_string().into(),
            f(&th.zeta_univ),
            th.ratio.to_string().into(),
            f(&th.ratio),
        ]);
    }
    Ok(t)
}

fn cmd_raney(p: &Params) -> Res<Table> {
    double_only(p, "raney")?;
    let n = p.n.unwrap_or(10) as u64;
    let mut t = Table::new("raney", &["s", "p", "n", "R"]);
    for s in s_list(p, 3)? {
        for &pp in &p_list(p, 1) {
            let pi = i64::try_from(pp).map_err(|_| CliError::Usage("p too large".into()))?;
            let table = raney_table(s, pi, n)?;
            for (i, r) in table.values.iter().enumerate() {
                t.push(vec![s.into(), pp.into(), i.into(), r.to_string().into()]);
            }
        }
    }
    Ok(t)
}

fn cmd_sigma(p: &Params) -> Res<Table> {
    double_only(p, "sigma")?;
    let tol = p.tol.unwrap_or(1e-14);
    let mut t = Table::new("sigma", &["s", "p", "zeta", "zeta_ratio", "sigma"]);
    let mut plot = Plot::new("Gram weights", "ζ/ζc", "σ_p");
    for s in s_list(p, 3)? {
        let (etas, desc) = eta_values(p, s, log1m(0.5, 0.9999, 20))?;
        t.meta(&format!("s={s} zeta_ratio"), desc);
        let zc = zeta_c(s);
        for &pp in &p_list(p, 1) {
            let vals: Vec<f64> = etas.par_iter().map(|&e| sigma_p(s, pp, e * zc, tol)).collect::<Result<_, _>>()?;
            for (e, v) in etas.iter().zip(&vals) {
                t.push(vec![s.into(), pp.into(), (e * zc).into(), (*e).into(), (*v).into()]);
            }
            plot.series.push(Series::line(format!("s={s} p={pp}"), etas.clone(), vals));
        }
    }
    t.plots.push(plot);
    Ok(t)
}

fn cmd_hessian(p: &Params) -> Res<Table> {
    double_only(p, "hessian")?;
    let s = single_s(p, 3)?;
    let eta = eta_point(p, s)?.unwrap_or(0.5);
    let zeta = eta * zeta_c(s);
    let n = p.n.unwrap_or(10) as u64;
    let mut t = Table::new("hessian", &["m", "n", "H"]);
    t.meta("s", s).meta("zeta", zeta);
    for m in 1..=n {
        for k in 1..=n {
            t.push(vec![m.into(), k.into(), hessian_entry(s, zeta, m, k)?.into()]);
        }
    }
    Ok(t)
}

fn spec_of(p: &Params, s: u32, n_default: usize) -> BlockSpec {
    let mut spec = BlockSpec::new(s, p.q.unwrap_or(1), p.beta.unwrap_or(1.0), p.n.unwrap_or(n_default));
    if let Some(tol) = p.tol {
        spec.tol = tol;
    }
    spec
}

fn spec_meta(t: &mut Table, spec: &BlockSpec) {
    t.meta("s", spec.s).meta("q", spec.q).meta("beta", spec.beta).meta("N", spec.n);
}

fn cmd_block(p: &Params) -> Res<Table> {
    double_only(p, "block")?;
    let s = single_s(p, 3)?;
    let spec = spec_of(p, s, 30);
    let eta = eta_point(p, s)?.unwrap_or(0.99);
    let b = spec.block(eta)?;
    let mut t = Table::new("block", &["j1", "j2", "p_j1", "p_j2", "value"]);
    spec_meta(&mut t, &spec);
    t.meta("zeta_ratio", eta).meta("min/max eigenvalue", b.psd_ratio()?);
    for i in 0..spec.n {
        for j in i..spec.n {
            t.push(vec![
                i.into(),
                j.into(),
                block_index(s, spec.q, i).into(),
                block_index(s, spec.q, j).into(),
                b.matrix.get(i, j).into(),
            ]);
        }
    }
    Ok(t)
}

fn cmd_spectrum(p: &Params, k: usize) -> Res<Table> {
    double_only(p, "spectrum")?;
    let s = single_s(p, 3)?;
    let spec = spec_of(p, s, 30);
    let (etas, desc) = eta_values(p, s, log1m(0.99, 0.99999, 13))?;
    let traj = eigen_trajectory(&spec, &etas, k)?;
    let mut cols = vec!["zeta_ratio".to_string(), "L".to_string()];
    cols.extend((1..=k).map(|i| format!("mu{i}")));
    let mut t = Table::with_columns("spectrum", cols);
    spec_meta(&mut t, &spec);
    t.meta("zeta_ratio grid", desc);
    for pt in &traj {
        let mut row: Vec<Cell> = vec![pt.eta.into(), pt.l.into()];
        row.extend(pt.mu.iter().map(|&m| Cell::Float(m)));
        t.push(row);
    }
    let mut plot = Plot::new(format!("Eigenvalues, s={s}"), "L", "μk");
    plot.y_log = true;
    let ls: Vec<f64> = traj.iter().map(|x| x.l).collect();
    for i in 0..k {
        plot.series.push(Series::line(format!("k={}", i + 1), ls.clone(), traj.iter().map(|x| x.mu[i]).collect()));
    }
    t.plots.push(plot);
    Ok(t)
}

fn cmd_stiff_fit(p: &Params) -> Res<Table> {
    double_only(p, "stiff-fit")?;
    let s = single_s(p, 3)?;
    let spec = spec_of(p, s, 30);
    let default = log1m(0.99, 0.99999, 13);
    let (etas, desc) = eta_values(p, s, default)?;
    let traj = eigen_trajectory(&spec, &etas, 1)?;
    let fit = stiff_fit(&traj, &spec.spike()?)?;
    let mut t = Table::new("stiff-fit", &["zeta_ratio", "L", "mu1", "fit"]);
    spec_meta(&mut t, &spec);
    t.meta("zeta_ratio grid", desc)
        .meta("slope", fit.slope)
        .meta("intercept", fit.intercept)
        .meta("Gamma_N", fit.gamma_truncated)
        .meta("Gamma", fit.gamma_analytic)
        .meta("slope error", fit.slope_error())
        .meta("residual/range", fit.relative_residual())
        .meta("fit window", format!("{} upper points", fit.window));
    for pt in &traj {
        t.push(vec![pt.eta.into(), pt.l.into(), pt.mu[0].into(), (fit.slope * pt.l + fit.intercept).into()]);
    }
    let mut plot = Plot::new(format!("Stiff eigenvalue, s={s}"), "L", "μ1");
    plot.series.push(Series::line("μ1", fit.l_values.clone(), fit.mu1.clone()));
    let mut line = Series::line("fit", t.column("L"), t.column("fit"));
    line.dashed = true;
    plot.series.push(line);
    t.plots.push(plot);
    Ok(t)
}

fn cmd_soft(p: &Params, k: usize) -> Res<Table> {
    double_only(p, "soft")?;
    let s = single_s(p, 3)?;
    let spec = spec_of(p, s, 40);
    let eta = eta_point(p, s)?.unwrap_or(0.9999);
    let soft = soft_spectrum(&spec, eta, k)?;
    let mut t = Table::new("soft", &["k", "mu", "compressed", "sign_changes"]);
    spec_meta(&mut t, &spec);
    t.meta("zeta_ratio", eta).meta("L", soft.l);
    for i in 0..k - 1 {
        let nodes = raney_spectra::spectra::nodal_count(&soft.compressed_vectors[i])?;
        t.push(vec![(i + 2).into(), soft.values[i].into(), soft.compressed[i].into(), nodes.into()]);
    }
    Ok(t)
}

fn cmd_align(p: &Params) -> Res<Table> {
    double_only(p, "align")?;
    let s = single_s(p, 3)?;
    let spec = spec_of(p, s, 40);
    let (etas, desc) = eta_values(p, s, log1m(0.99, 0.9999, 9))?;
    let mut t = Table::new("align", &["zeta_ratio", "L", "alignment", "defect_times_L", "degenerate"]);
    spec_meta(&mut t, &spec);
    t.meta("zeta_ratio grid", desc);
    for &e in &etas {
        let a = eigvec_alignment(&spec, e)?;
        t.push(vec![
            a.eta.into(),
            a.l.into(),
            a.value.into(),
            ((1.0 - a.value) * a.l).into(),
            (if a.degenerate { "true" } else { "false" }).into(),
        ]);
    }
    let mut plot = Plot::new(format!("Alignment defect, s={s}"), "L", "(1 − |⟨ψ1, d⟩|)·L");
    plot.series.push(Series::line("defect·L", t.column("L"), t.column("defect_times_L")));
    t.plots.push(plot);
    Ok(t)
}

fn cmd_continue(p: &Params, pt: &Point, side: SideArg) -> Res<Table> {
    double_only(p, "continue")?;
    let s = single_s(p, 3)?;
    let pp = single_p(p, 1)?;
    let u = u_point(pt, p, s)?;
    let tol = p.tol.unwrap_or(1e-12);
    let st = gp_continue(s, pp, u, side_of(side), tol)?;
    let mut t = Table::new(
        "continue",
        &["s", "p", "u_re", "u_im", "side", "g_re", "g_im", "sigma_re", "sigma_im", "steps"],
    );
    hyp_meta(&mut t, &hyp_params(s, pp)?);
    t.meta("path (tau)", st.path.iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect::<Vec<_>>().join(" "));
    let (g, sg) = (st.value(), st.sigma());
    let side_name = format!("{side:?}").to_lowercase();
    t.push(vec![
        s.into(),
        pp.into(),
        u.re.into(),
        u.im.into(),
        side_name.into(),
        g.re.into(),
        g.im.into(),
        sg.re.into(),
        sg.im.into(),
        st.steps.into(),
    ]);
    Ok(t)
}

fn cmd_rho(p: &Params) -> Res<Table> {
    double_only(p, "rho")?;
    let s = single_s(p, 3)?;
    let grid = grid_or(p, Grid { a: 1.002, b: 8.0, n: 40, spacing: Spacing::Log });
    if grid.a <= 1.0 || grid.b <= 1.0 {
        return usage("rho grid is in u/zeta_c^2 and must lie above 1");
    }
    let tol = p.tol.unwrap_or(1e-12);
    let zc2 = zeta_c(s).powi(2);
    let xs = grid.points();
    let mut t = Table::new("rho", &["s", "p", "u_ratio", "u", "rho", "edge_value"]);
    t.meta("u/zeta_c^2 grid", &grid);
    let mut plot = Plot::new(format!("Discontinuity density, s={s}"), "u/ζc²", "ρ_p");
    for pp in p_list(p, 1) {
        let edge = edge_density_closed(s, pp)?;
        t.meta(&format!("p={pp} edge"), format!("{}/pi = {}", edge.rational, edge.value));
        let rho: Vec<f64> = xs.par_iter().map(|&x| disc_density_rho(s, pp, x * zc2, tol)).collect::<Result<_, _>>()?;
        for (x, r) in xs.iter().zip(&rho) {
            t.push(vec![s.into(), pp.into(), (*x).into(), (x * zc2).into(), (*r).into(), edge.value.into()]);
        }
        plot.series.push(Series::line(format!("p={pp}"), xs.clone(), rho));
    }
    t.plots.push(plot);
    Ok(t)
}

fn cmd_resonant_fit(p: &Params) -> Res<Table> {
    if p.precision == Some(PrecisionArg::Double) {
        return usage("resonant-fit needs extended precision: the w² log w term is below double rounding on the fit grid");
    }
    let grid = match &p.grid {
        Some(g) => g.points(),
        None => default_fit_grid(),
    };
    let mut t = Table::new(
        "resonant-fit",
        &["s", "p", "c_p", "B_fit", "B_closed", "B_closed_times_pi", "rel_err", "residual"],
    );
    t.meta("w grid", p.grid.as_ref().map_or("24 log-spaced points in [1e-4, 1e-2]".to_string(), |g| g.to_string()));
    t.meta("model", "1, w, w^2, w^2 log w, w^3, w^3 log w (double-double series)");
    let ss = s_list(p, 3)?;
    let ps = p_list(p, 1);
    let jobs: Vec<(u32, u64)> = ss.iter().flat_map(|&s| ps.iter().map(move |&q| (s, q))).collect();
    for (s, pp) in jobs {
        let h = hyp_params(s, pp)?;
        let r = resonant_fit(s, pp, &grid)?;
        let b = b_closed_form(s, pp)?;
        t.meta(&format!("s={s} p={pp} c_p"), h.cancellations);
        t.push(vec![
            s.into(),
            pp.into(),
            h.cancellations.into(),
            r.b_fit.into(),
            b.value.into(),
            b.rational.to_string().into(),
            r.rel_err.into(),
            r.residual.into(),
        ]);
    }
    Ok(t)
}

fn cmd_jacobi(p: &Params) -> Res<Table> {
    let s = single_s(p, 3)?;
    let pp = single_p(p, 1)?;
    let depth = p.n.unwrap_or(10);
    let m = moments(s, pp, 2 * depth)?;
    let j = jacobi_coefficients(&m, depth)?;
    let spec = j.spectrum()?;
    let mut t = Table::new("jacobi", &["k", "b", "b_value", "a_sq", "a_sq_value"]);
    t.meta("s", s).meta("p", pp).meta("scaling", "support rescaled to [0, 1] (t zeta_c^2)");
    t.meta("hankel minors positive", hankel_positivity(&m, depth)?);
    t.meta("spectrum (t)", format!("[{}, {}]", spec[spec.len() - 1], spec[0]));
    for k in 0..depth {
        let (a, av) = if k == 0 {
            (Cell::Empty, Cell::Empty)
        } else {
            (j.a_sq[k - 1].to_string().into(), Cell::Float(j.a_sq[k - 1].to_f64().unwrap()))
        };
        t.push(vec![k.into(), j.b[k].to_string().into(), j.b_f64[k].into(), a, av]);
    }
    Ok(t)
}

fn cmd_weyl(p: &Params, pt: &Point) -> Res<Table> {
    double_only(p, "weyl")?;
    let s = single_s(p, 3)?;
    let pp = single_p(p, 1)?;
    let depth = p.n.unwrap_or(40);
    let u = u_point(pt, p, s)?;
    let j = jacobi_coefficients(&moments(s, pp, 2 * depth)?, depth)?;
    let w = weyl_function(&j, u)?;
    let g = gp_continue(s, pp, u, Side::None, p.tol.unwrap_or(1e-12))?.value();
    let mut t = Table::new("weyl", &["s", "p", "depth", "u_re", "u_im", "weyl_re", "weyl_im", "g_re", "g_im", "abs_diff"]);
    t.push(vec![
        s.into(),
        pp.into(),
        depth.into(),
        u.re.into(),
        u.im.into(),
        w.re.into(),
        w.im.into(),
        g.re.into(),
        g.im.into(),
        (w - g).norm().into(),
    ]);
    Ok(t)
}

fn cmd_density(p: &Params) -> Res<Table> {
    double_only(p, "density")?;
    let s = single_s(p, 3)?;
    let pp = single_p(p, 1)?;
    let tol = p.tol.unwrap_or(1e-12);
    let grid = grid_or(p, Grid { a: 0.01, b: 0.99, n: 50, spacing: Spacing::Linear });
    let tmax = 1.0 / zeta_c(s).powi(2);
    let xs = grid.points();
    let vals: Vec<f64> = xs.par_iter().map(|&x| perron_density(s, pp, x * tmax, tol)).collect::<Result<_, _>>()?;
    let report = perron_report(s, pp, 1, tol)?;
    let mut t = Table::new("density", &["t_scaled", "t", "density"]);
    t.meta("s", s)
        .meta("p", pp)
        .meta("t_scaled grid", &grid)
        .meta("mass", report.moments[0])
        .meta("endpoint slope", report.endpoint_slope)
        .meta("origin slope", report.origin_slope);
    for (x, v) in xs.iter().zip(&vals) {
        t.push(vec![(*x).into(), (x * tmax).into(), (*v).into()]);
    }
    let mut plot = Plot::new(format!("Perron density, s={s} p={pp}"), "t ζc²", "ϱ_p");
    plot.series.push(Series::line("ϱ", xs, vals));
    t.plots.push(plot);
    Ok(t)
}

fn write_file(path: &Path, body: &str) -> Res<()> {
    std::fs::write(path, body)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_figure(p: &Params, id: figures::FigureId) -> Res<()> {
    double_only(p, "figure")?;
    let mut r = Recipe::defaults(id);
    if p.s.is_some() {
        r.s = s_list(p, 3)?;
    }
    if let Some(v) = &p.p {
        r.p = v.clone();
    }
    r.q = p.q.unwrap_or(r.q);
    r.beta = p.beta.unwrap_or(r.beta);
    r.n = p.n.unwrap_or(r.n);
    r.grid = p.grid.clone().unwrap_or(r.grid);
    r.tol = p.tol.unwrap_or(r.tol);
    if p.zeta.is_some() {
        return usage("figures take --zeta-ratio for the snapshot point");
    }
    r.snapshot = p.zeta_ratio.unwrap_or(r.snapshot);
    let table = figures::build(&r)?;
    let dir = p.out.clone().unwrap_or_else(|| ".".into());
    std::fs::create_dir_all(&dir)?;
    let stem = dir.join(id.name());
    match p.format {
        Format::Json => write_file(&stem.with_extension("json"), &format!("{:#}\n", table.to_json())),
        Format::Csv => write_file(&stem.with_extension("csv"), &table.to_csv()),
        Format::Svg => {
            write_file(&stem.with_extension("csv"), &table.to_csv())?;
            write_file(&stem.with_extension("svg"), &svg::render(&table.plots))
        }
    }
}

fn cmd_selftest(p: &Params, level: LevelArg) -> Res<()> {
    let level = match level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let report = run_suite(level);
    let convergence = if level == Level::Full {
        let mut v = Vec::new();
        for s in [3, 5] {
            v.extend(stiff_convergence_in_n(s)?);
        }
        v
    } else {
        Vec::new()
    };
    let body = match p.format {
        Format::Json => format!(
            "{:#}\n",
            json!({ "level": report.level, "ok": report.ok(), "criteria": report.criteria, "convergence_in_n": convergence })
        ),
        Format::Csv => {
            let mut t = Table::new("selftest", &["id", "title", "status", "known_red", "measured", "tolerance", "seconds"]);
            for c in &report.criteria {
                t.push(vec![
                    c.id.into(),
                    c.title.into(),
                    format!("{:?}", c.status).to_lowercase().into(),
                    (if c.known_red { "true" } else { "false" }).into(),
                    c.measured.clone().into(),
                    c.tolerance.clone().into(),
                    c.seconds.into(),
                ]);
            }
            for c in &convergence {
                t.meta(
                    &format!("stiff slope s={} N={}", c.s, c.n),
                    format!("{} (Gamma_N {}, Gamma {})", c.slope, c.gamma_truncated, c.gamma_analytic),
                );
            }
            t.meta("stiff grid", format!("{} points, zeta_ratio {}..{}", stiff_grid().len(), stiff_grid()[0], stiff_grid()[12]));
            t.to_csv()
        }
        Format::Svg => return usage("selftest has no SVG output"),
    };
    match &p.out {
        Some(path) => write_file(path, &body)?,
        None => print!("{body}"),
    }
    for c in &report.criteria {
        eprintln!("{}", c.line());
    }
    if report.ok() {
        Ok(())
    } else {
        Err(CliError::Acceptance)
    }
}

fn emit(t: &Table, p: &Params) -> Res<()> {
    let body = match p.format {
        Format::Csv => t.to_csv(),
        Format::Json => format!("{:#}\n", t.to_json()),
        Format::Svg if t.plots.is_empty() => return usage(format!("{} has no plot; use csv or json", t.name)),
        Format::Svg => svg::render(&t.plots),
    };
    match &p.out {
        Some(path) => write_file(path, &body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

pub fn dispatch(cmd: &Command, p: &Params) -> Res<()> {
    let table = match cmd {
        Command::Thresholds => cmd_thresholds(p)?,
        Command::Raney => cmd_raney(p)?,
        Command::Sigma => cmd_sigma(p)?,
        Command::Hessian => cmd_hessian(p)?,
        Command::Block => cmd_block(p)?,
        Command::Spectrum { k } => cmd_spectrum(p, *k)?,
        Command::StiffFit => cmd_stiff_fit(p)?,
        Command::Soft { k } => cmd_soft(p, *k)?,
        Command::Align => cmd_align(p)?,
        Command::Continue { point, side } => cmd_continue(p, point, *side)?,
        Command::Rho => cmd_rho(p)?,
        Command::ResonantFit => cmd_resonant_fit(p)?,
        Command::Jacobi => cmd_jacobi(p)?,
        Command::Weyl { point } => cmd_weyl(p, point)?,
        Command::Density => cmd_density(p)?,
        Command::Figure { id } => return cmd_figure(p, *id),
        Command::Selftest { level } => return cmd_selftest(p, *level),
    };
    emit(&table, p)
}
