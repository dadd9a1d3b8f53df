//! WebAssembly entry points for the demo page in `www/`.
//!
//! Every export returns a flat row-major `Float64Array`; the column layout
//! is given in each doc comment. The `*_rows` functions are the same
//! computations with plain Rust errors, usable (and tested) natively.

use tangency::bounds::{exp_snr_capacity_lower, gap_factor_mu, simo_capacity_lower};
use tangency::distributions::{affine_of, exponential, quad_expectation};
use tangency::{GridSpec, Refine};
use wasm_bindgen::prelude::*;

/// Columns in the SIMO table.
pub const SIMO_COLUMNS: usize = 4;
/// Columns in the exponential-SNR table.
pub const EXP_SNR_COLUMNS: usize = 4;
/// Columns in the gap-factor table.
pub const GAP_COLUMNS: usize = 3;

fn err(e: tangency::Error) -> String {
    e.to_string()
}

fn alpha_grid(alpha_max: f64, step: f64) -> Result<GridSpec, String> {
    GridSpec::new(0.0, alpha_max, step).map_err(err)
}

/// `k, lower, jensen_upper, heuristic` for `k = 1..=k_max`.
pub fn simo_rows(k_max: u32, sigma2: f64, step: f64) -> Result<Vec<f64>, String> {
    let grid = alpha_grid(10.0, step)?;
    let mut out = Vec::with_capacity(k_max as usize * SIMO_COLUMNS);
    for k in 1..=u64::from(k_max) {
        let r = simo_capacity_lower(k, sigma2, &grid).map_err(err)?;
        out.extend([
            k as f64,
            r.value,
            r.diagnostic("jensen_upper").unwrap_or(f64::NAN),
            r.diagnostic("heuristic").unwrap_or(f64::NAN),
        ]);
    }
    Ok(out)
}

/// `theta, lower, quadrature, jensen_upper` over the theta grid.
pub fn exp_snr_rows(
    gain: f64,
    theta_min: f64,
    theta_max: f64,
    theta_step: f64,
    step: f64,
) -> Result<Vec<f64>, String> {
    let grid = alpha_grid(10.0, step)?;
    let thetas = GridSpec::new(theta_min, theta_max, theta_step).map_err(err)?;
    let mut out = Vec::new();
    for theta in thetas.points() {
        let r = exp_snr_capacity_lower(theta, gain, &grid).map_err(err)?;
        let x = affine_of(&exponential(theta).map_err(err)?, 1.0, gain).map_err(err)?;
        let q = quad_expectation(
            |v| x.pdf(v).unwrap_or(0.0),
            (1.0, f64::INFINITY),
            f64::ln,
            1e-8,
        )
        .map_err(err)?;
        out.extend([
            theta,
            r.value,
            q.value,
            r.diagnostic("jensen_upper").unwrap_or(f64::NAN),
        ]);
    }
    Ok(out)
}

/// `t, mu_t, s_star` over the t grid, with a refined s grid on `[0, 10]`.
pub fn gap_rows(t_min: f64, t_max: f64, t_step: f64, s_step: f64) -> Result<Vec<f64>, String> {
    let s_grid = GridSpec::new(0.0, 10.0, s_step)
        .and_then(|g| g.with_refinement(Refine::default()))
        .map_err(err)?;
    let ts = GridSpec::new(t_min, t_max, t_step).map_err(err)?;
    let mut out = Vec::new();
    for t in ts.points() {
        let (mu, s) = gap_factor_mu(t, &s_grid).map_err(err)?;
        out.extend([t, mu, s]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn simo_curve(k_max: u32, sigma2: f64, step: f64) -> Result<Vec<f64>, String> {
    simo_rows(k_max, sigma2, step)
}

#[wasm_bindgen]
pub fn exp_snr_curve(
    gain: f64,
    theta_min: f64,
    theta_max: f64,
    theta_step: f64,
    step: f64,
) -> Result<Vec<f64>, String> {
    exp_snr_rows(gain, theta_min, theta_max, theta_step, step)
}

#[wasm_bindgen]
pub fn gap_curve(t_min: f64, t_max: f64, t_step: f64, s_step: f64) -> Result<Vec<f64>, String> {
    gap_rows(t_min, t_max, t_step, s_step)
}
