//! Browser bindings. Every export returns a JSON string; the page in `www/`
//! parses it and draws on a canvas.

use num_complex::Complex64;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use raney_spectra::continuation::{disc_density_rho, edge_density_closed, gp_continue, hyp_params, Side};
use raney_spectra::maps::{thresholds, zeta_c};
use raney_spectra::raney::raney_table;
use raney_spectra::spectra::{eigen_trajectory, BlockSpec};

type Out = Result<Value, String>;

fn err(e: raney_spectra::Error) -> String {
    e.to_string()
}

pub fn thresholds_value(s: u32, p: u32, n: u32) -> Out {
    if n > 200 {
        return Err("n is limited to 200 in the demo".into());
    }
    let t = thresholds(s).map_err(err)?;
    let r = raney_table(s, p as i64, n as u64).map_err(err)?;
    Ok(json!({
        "zeta_c": t.zeta_c.to_string(),
        "zeta_c_value": zeta_c(s),
        "zeta_univ": t.zeta_univ.to_string(),
        "ratio": t.ratio.to_string(),
        "raney": r.values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
    }))
}

/// σ_cont below the threshold and ρ above it, on `points` values of
/// u/ζ_c² spread over (0, ratio_max).
pub fn continuation_value(s: u32, p: u32, ratio_max: f64, points: u32) -> Out {
    if !(ratio_max > 1.0 && ratio_max <= 20.0) || !(4..=400).contains(&points) {
        return Err("need 1 < ratio_max ≤ 20 and 4 ≤ points ≤ 400".into());
    }
    let p = p as u64;
    let zc2 = zeta_c(s).powi(2);
    let h = hyp_params(s, p).map_err(err)?;
    let edge = edge_density_closed(s, p).map_err(err)?;
    let mut sub = Vec::new();
    let mut sup = Vec::new();
    for i in 1..=points {
        let x = ratio_max * i as f64 / points as f64;
        // step off the branch point itself
        if (x - 1.0).abs() < 1e-3 {
            continue;
        }
        if x < 1.0 {
            let st = gp_continue(s, p, Complex64::new(x * zc2, 0.0), Side::None, 1e-10).map_err(err)?;
            sub.push([x, st.sigma().re]);
        } else {
            sup.push([x, disc_density_rho(s, p, x * zc2, 1e-10).map_err(err)?]);
        }
    }
    Ok(json!({
        "c_p": h.cancellations,
        "order": h.order(),
        "edge": edge.value,
        "edge_rational": format!("{}/π", edge.rational),
        "sigma": sub,
        "rho": sup,
    }))
}

/// Full spectrum of the N×N weighted Gram block at ζ/ζ_c = eta.
pub fn spectrum_value(s: u32, q: u32, beta: f64, n: u32, eta: f64) -> Out {
    if !(2..=40).contains(&n) {
        return Err("N must lie in [2, 40] in the demo".into());
    }
    let spec = BlockSpec::new(s, q, beta, n as usize);
    let pt = eigen_trajectory(&spec, &[eta], n as usize).map_err(err)?.remove(0);
    Ok(json!({ "L": pt.l, "eigenvalues": pt.mu }))
}

fn export(v: Out) -> Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn raney_info(s: u32, p: u32, n: u32) -> Result<String, JsError> {
    export(thresholds_value(s, p, n))
}

#[wasm_bindgen]
pub fn continuation_curve(s: u32, p: u32, ratio_max: f64, points: u32) -> Result<String, JsError> {
    export(continuation_value(s, p, ratio_max, points))
}

#[wasm_bindgen]
pub fn block_spectrum(s: u32, q: u32, beta: f64, n: u32, eta: f64) -> Result<String, JsError> {
    export(spectrum_value(s, q, beta, n, eta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_and_catalan() {
        let v = thresholds_value(2, 1, 5).unwrap();
        assert_eq!(v["zeta_c"], "1/4");
        assert_eq!(v["raney"], json!(["1", "1", "2", "5", "14", "42"]));
        assert!(thresholds_value(1, 1, 5).is_err());
    }

    #[test]
    fn continuation_edge_matches_closed_form() {
        let v = continuation_value(2, 1, 2.0, 40).unwrap();
        assert_eq!(v["c_p"], hyp_params(2, 1).unwrap().cancellations);
        let rho = v["rho"].as_array().unwrap();
        let first = rho[0].as_array().unwrap();
        // first sample at u = 1.05 ζ_c², close to the 4/π edge
        assert!((first[1].as_f64().unwrap() - 4.0 / std::f64::consts::PI).abs() < 0.1);
        assert!(continuation_value(2, 1, 0.5, 40).is_err());
    }

    #[test]
    fn spectrum_is_sorted_and_positive() {
        let v = spectrum_value(3, 1, 1.0, 8, 0.9).unwrap();
        let e: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert_eq!(e.len(), 8);
        assert!(e.windows(2).all(|w| w[0] >= w[1]) && e[0] > 0.0);
        assert!(spectrum_value(3, 1, 1.0, 80, 0.9).is_err());
    }
}
