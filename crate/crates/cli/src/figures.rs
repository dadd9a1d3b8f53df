//! Figure reproduction as CSV rows.

use std::io::{self, Write};

use tangency::bounds::{
    exp_snr_capacity_lower, gap_factor_mu, power_moment_lower, simo_capacity_lower,
};
use tangency::distributions::{
    affine_of, bernoulli_sum, discrete_expectation, exponential, mc_expectation, quad_expectation,
    shifted_chi_square_sum, TailBound,
};
use tangency::{Direction, GridSpec, OracleEstimate, Refine, Result};

pub const FIGURE_HEADER: &str =
    "x,jensen_bound,jensen_direction,family_bound,heuristic_bound,oracle,oracle_err";
pub const GAP_HEADER: &str = "t,mu_t,s_star";

/// One plotted abscissa: the Jensen bound, the family bound and, when
/// computed, the heuristic value and an oracle estimate of the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub x: f64,
    pub jensen_bound: f64,
    pub jensen_direction: Direction,
    pub family_bound: f64,
    pub heuristic_bound: Option<f64>,
    pub oracle: Option<f64>,
    pub oracle_err: Option<f64>,
}

impl FigureRow {
    /// `family - 5 err <= oracle <= jensen + 5 err` for an upper Jensen
    /// bound, mirrored for a lower one. Rows without an oracle hold trivially.
    pub fn is_ordered(&self) -> bool {
        let (Some(o), Some(e)) = (self.oracle, self.oracle_err) else {
            return true;
        };
        let slack = 5.0 * e;
        match self.jensen_direction {
            Direction::Upper => self.family_bound - slack <= o && o <= self.jensen_bound + slack,
            Direction::Lower => self.jensen_bound - slack <= o && o <= self.family_bound + slack,
        }
    }

    fn with_oracle(mut self, o: Option<OracleEstimate>) -> Self {
        if let Some(o) = o {
            self.oracle = Some(o.value);
            self.oracle_err = Some(o.uncertainty);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRow {
    pub t: f64,
    pub mu_t: f64,
    pub s_star: f64,
}

/// Decimal rendering rounded to 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

pub fn write_rows<W: Write + ?Sized>(out: &mut W, rows: &[FigureRow]) -> io::Result<()> {
    writeln!(out, "{FIGURE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_num(r.x),
            fmt_num(r.jensen_bound),
            r.jensen_direction,
            fmt_num(r.family_bound),
            fmt_opt(r.heuristic_bound),
            fmt_opt(r.oracle),
            fmt_opt(r.oracle_err)
        )?;
    }
    Ok(())
}

pub fn write_gap_rows<W: Write + ?Sized>(out: &mut W, rows: &[GapRow]) -> io::Result<()> {
    writeln!(out, "{GAP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{}",
            fmt_num(r.t),
            fmt_num(r.mu_t),
            fmt_num(r.s_star)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct Fig1 {
    pub sigma2: f64,
    pub k_max: u64,
    pub resolution: f64,
    pub alpha_max: f64,
    pub samples: u64,
    pub seed: u64,
    pub oracle: bool,
}

impl Default for Fig1 {
    fn default() -> Self {
        Fig1 {
            sigma2: 1.0,
            k_max: 100,
            resolution: 0.001,
            alpha_max: 10.0,
            samples: 1_000_000,
            seed: 1,
            oracle: true,
        }
    }
}

/// SIMO capacity `E ln(1 + sum_{i<=k} Y_i^2)` against the number of antennas `k`.
pub fn fig1(cfg: &Fig1) -> Result<Vec<FigureRow>> {
    (1..=cfg.k_max).map(|k| fig1_row(cfg, k)).collect()
}

pub fn fig1_row(cfg: &Fig1, k: u64) -> Result<FigureRow> {
    let grid = GridSpec::new(0.0, cfg.alpha_max, cfg.resolution)?;
    let r = simo_capacity_lower(k, cfg.sigma2, &grid)?;
    let oracle = if cfg.oracle {
        let x = shifted_chi_square_sum(k, cfg.sigma2)?;
        Some(mc_expectation(&x, f64::ln, cfg.samples, cfg.seed)?)
    } else {
        None
    };
    Ok(FigureRow {
        x: k as f64,
        jensen_bound: (k as f64 * cfg.sigma2).ln_1p(),
        jensen_direction: Direction::Upper,
        family_bound: r.value,
        heuristic_bound: r.diagnostic("heuristic"),
        oracle: None,
        oracle_err: None,
    }
    .with_oracle(oracle))
}

#[derive(Debug, Clone, Copy)]
pub struct Fig2 {
    pub gain: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_step: f64,
    pub resolution: f64,
    pub alpha_max: f64,
    pub tol: f64,
    pub oracle: bool,
}

impl Default for Fig2 {
    fn default() -> Self {
        Fig2 {
            gain: 5.0,
            theta_min: 0.1,
            theta_max: 5.0,
            theta_step: 0.05,
            resolution: 0.001,
            alpha_max: 10.0,
            tol: 1e-8,
            oracle: true,
        }
    }
}

/// Ergodic capacity `E ln(1 + g Z)`, `Z ~ Exp(theta)`, against `theta`.
pub fn fig2(cfg: &Fig2) -> Result<Vec<FigureRow>> {
    let thetas = GridSpec::new(cfg.theta_min, cfg.theta_max, cfg.theta_step)?;
    thetas.points().map(|theta| fig2_row(cfg, theta)).collect()
}

pub fn fig2_row(cfg: &Fig2, theta: f64) -> Result<FigureRow> {
    let grid = GridSpec::new(0.0, cfg.alpha_max, cfg.resolution)?;
    let r = exp_snr_capacity_lower(theta, cfg.gain, &grid)?;
    let oracle = if cfg.oracle {
        let x = affine_of(&exponential(theta)?, 1.0, cfg.gain)?;
        Some(quad_expectation(
            |v| x.pdf(v).unwrap_or(0.0),
            (1.0, f64::INFINITY),
            f64::ln,
            cfg.tol,
        )?)
    } else {
        None
    };
    Ok(FigureRow {
        x: theta,
        jensen_bound: (cfg.gain / theta).ln_1p(),
        jensen_direction: Direction::Upper,
        family_bound: r.value,
        heuristic_bound: None,
        oracle: None,
        oracle_err: None,
    }
    .with_oracle(oracle))
}

#[derive(Debug, Clone, Copy)]
pub struct Fig3 {
    pub p: f64,
    pub n_max: u64,
    pub t: f64,
    pub resolution: f64,
    pub alpha_max: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub oracle: bool,
}

impl Default for Fig3 {
    fn default() -> Self {
        Fig3 {
            p: 0.2,
            n_max: 100,
            t: 0.5,
            resolution: 0.01,
            alpha_max: 10.0,
            s_min: 0.5,
            s_max: 10.0,
            oracle: true,
        }
    }
}

/// `E{X^t}` for a Binomial(n, p) count against `n`.
pub fn fig3(cfg: &Fig3) -> Result<Vec<FigureRow>> {
    (1..=cfg.n_max).map(|n| fig3_row(cfg, n)).collect()
}

pub fn fig3_row(cfg: &Fig3, n: u64) -> Result<FigureRow> {
    let alphas = GridSpec::new(0.0, cfg.alpha_max, cfg.resolution)?;
    let ss = GridSpec::new(cfg.s_min, cfg.s_max, cfg.resolution)?;
    let x = bernoulli_sum(n, cfg.p)?;
    let r = power_moment_lower(&x, cfg.t, &ss, &alphas)?;
    let oracle = if cfg.oracle {
        let terms = x.pmf_terms().expect("binomial pmf is enumerable");
        Some(discrete_expectation(
            terms,
            |k| k.powf(cfg.t),
            TailBound::Finite,
            0.0,
        )?)
    } else {
        None
    };
    Ok(FigureRow {
        x: n as f64,
        jensen_bound: (n as f64 * cfg.p).powf(cfg.t),
        jensen_direction: Direction::Upper,
        family_bound: r.value,
        heuristic_bound: None,
        oracle: None,
        oracle_err: None,
    }
    .with_oracle(oracle))
}

#[derive(Debug, Clone, Copy)]
pub struct Fig4 {
    pub t_min: f64,
    pub t_max: f64,
    pub t_step: f64,
    pub s_resolution: f64,
    pub s_max: f64,
}

impl Default for Fig4 {
    fn default() -> Self {
        Fig4 {
            t_min: 0.1,
            t_max: 2.0,
            t_step: 0.01,
            s_resolution: 0.001,
            s_max: 10.0,
        }
    }
}

/// The gap factor `mu_t` against `t`. The `s` grid starts at 0, points
/// with `s <= 1 - t/2` are skipped, and the default refinement is applied.
pub fn fig4(cfg: &Fig4) -> Result<Vec<GapRow>> {
    let ts = GridSpec::new(cfg.t_min, cfg.t_max, cfg.t_step)?;
    let ss = GridSpec::new(0.0, cfg.s_max, cfg.s_resolution)?.with_refinement(Refine::default())?;
    ts.points()
        .map(|t| {
            let (mu_t, s_star) = gap_factor_mu(t, &ss)?;
            Ok(GapRow { t, mu_t, s_star })
        })
        .collect()
}
