//! Self-verification: every acceptance criterion and library invariant,
//! reported as a deterministic JSON document.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use tangency::bounds::{
    capacity_variance_upper, empirical_entropy_lower, estimation_error_moment_lower, exp_of_convex,
    exp_snr_capacity_lower, exp_tilted, gap_factor_mu, gaussian_exp_square, guessing_moment_lower,
    log_expectation_lower, moment_two_point, power_moment_lower, product_convex_positive,
    product_two_convex, simo_capacity_lower, Orientation, PmfTable,
};
use tangency::distributions::{
    affine_of, bernoulli_sum, discrete_expectation, exponential, gaussian, geometric,
    mc_expectation, plugin_entropy_mc, point_mass, quad_expectation, sample_mean_sq_error,
    shifted_chi_square_sum, DistributionModel, TailBound,
};
use tangency::funcs::{catalog, tangent_at, DifferentiableFunction};
use tangency::optimize::grid_max;
use tangency::{BoundResult, Convexity, Direction, GridSpec, OracleEstimate, Refine, Result};

use crate::figures::{self, Fig1, Fig2, Fig3, Fig4};

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Multiplies every tolerance. 1 in normal runs; a negative value
    /// replaces every tolerance by -inf so that each check must fail.
    pub tol_scale: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 1,
            tol_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Accumulates the failures of one check; the first few are kept as detail.
struct Probe {
    failures: Vec<String>,
    count: usize,
    notes: Vec<String>,
}

impl Probe {
    fn new() -> Self {
        Probe {
            failures: Vec::new(),
            count: 0,
            notes: Vec::new(),
        }
    }

    fn ensure(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.count += 1;
            if self.failures.len() < 5 {
                self.failures.push(what());
            }
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn finish(self, name: &str) -> Check {
        let pass = self.count == 0;
        let mut detail = self.notes.join("; ");
        if !pass {
            if !detail.is_empty() {
                detail.push_str("; ");
            }
            detail.push_str(&format!(
                "{} failure(s): {}",
                self.count,
                self.failures.join("; ")
            ));
        }
        Check {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

struct Ctx {
    seed: u64,
    scale: f64,
}

impl Ctx {
    fn tol(&self, t: f64) -> f64 {
        if self.scale < 0.0 {
            f64::NEG_INFINITY
        } else {
            t * self.scale
        }
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(salt);
        r
    }
}

fn rel_err(x: f64, want: f64) -> f64 {
    (x - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

fn run_check(name: &str, body: impl FnOnce(&mut Probe) -> Result<()>) -> Check {
    let mut p = Probe::new();
    if let Err(e) = body(&mut p) {
        p.ensure(false, || format!("error: {e}"));
    }
    p.finish(name)
}

pub fn run(cfg: &VerifyConfig) -> Vec<Check> {
    let c = Ctx {
        seed: cfg.seed,
        scale: cfg.tol_scale,
    };
    type CheckFn = fn(&Ctx, &mut Probe) -> Result<()>;
    let checks: &[(&str, CheckFn)] = &[
        ("acceptance.01.gaussian_exp_square", acceptance_1),
        ("acceptance.02.fig1_simo", acceptance_2),
        ("acceptance.03.fig2_exp_snr", acceptance_3),
        ("acceptance.04.fig3_power_moment", acceptance_4),
        ("acceptance.05.gap_factor", acceptance_5),
        ("acceptance.06.empirical_entropy", acceptance_6),
        ("acceptance.07.guessing_moments", acceptance_7),
        ("acceptance.08.jensen_reductions", acceptance_8),
        ("acceptance.09.point_mass_log", acceptance_9),
        ("acceptance.10.capacity_variance", acceptance_10),
        ("acceptance.11.concentration", acceptance_11),
        ("acceptance.12.determinism", acceptance_12),
        ("invariant.funcs.tangent_minorant", funcs_minorant),
        ("invariant.funcs.tangent_touch", funcs_touch),
        ("invariant.funcs.finite_differences", funcs_fd),
        ("invariant.distributions.cgf_origin", dist_origin),
        ("invariant.distributions.mc_mgf", dist_mc_mgf),
        ("invariant.distributions.affine_composition", dist_affine),
        (
            "invariant.distributions.sampler_determinism",
            dist_determinism,
        ),
        ("invariant.bounds.direction_soundness", bounds_soundness),
        ("invariant.bounds.gaussian_ratio", bounds_gaussian_ratio),
        ("invariant.bounds.grid_sup_dominance", bounds_dominance),
        ("invariant.bounds.point_mass_equality", bounds_point_mass),
        ("invariant.bounds.entropy_order", bounds_entropy),
        ("invariant.optimize.grid_max", optimize_invariants),
        ("invariant.cli.figure_row_ordering", figure_ordering),
    ];
    checks
        .iter()
        .map(|(name, f)| run_check(name, |p| f(&c, p)))
        .collect()
}

pub fn report(cfg: &VerifyConfig, checks: &[Check]) -> Value {
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    json!({
        "seed": cfg.seed,
        "status": if failed.is_empty() { "pass" } else { "fail" },
        "passed": checks.len() - failed.len(),
        "failed": failed,
        "checks": checks
            .iter()
            .map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail}))
            .collect::<Vec<_>>(),
    })
}

fn acceptance_1(c: &Ctx, p: &mut Probe) -> Result<()> {
    let mus = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let sigma2s = [0.1, 0.5, 1.0, 2.0, 4.0];
    let ss = [0.0, 0.05, 0.1, 0.15, 0.2];
    let mut worst: f64 = 0.0;
    for mu in mus {
        for sigma2 in sigma2s {
            for s in ss {
                let (b, x) = gaussian_exp_square(mu, sigma2, s)?;
                let want = (1.0 - sigma2 * s).sqrt();
                let e = rel_err(b / x, want);
                worst = worst.max(e);
                p.ensure(e <= c.tol(1e-12), || {
                    format!("mu={mu} sigma2={sigma2} s={s}: rel {e:e}")
                });
            }
        }
    }
    let (b, x) = gaussian_exp_square(1.0, 0.5, 1.0)?;
    let e = std::f64::consts::E;
    p.ensure(rel_err(b, e) <= c.tol(1e-12), || format!("bound {b} != e"));
    p.ensure(
        rel_err(x, std::f64::consts::SQRT_2 * e) <= c.tol(1e-12),
        || format!("exact {x} != sqrt(2) e"),
    );
    p.note(format!("max ratio rel err {worst:e}"));
    Ok(())
}

fn acceptance_2(c: &Ctx, p: &mut Probe) -> Result<()> {
    let cfg = Fig1 {
        seed: c.seed,
        ..Fig1::default()
    };
    let grid = GridSpec::new(0.0, cfg.alpha_max, cfg.resolution)?;
    for k in [1u64, 10, 100] {
        let row = figures::fig1_row(&cfg, k)?;
        let r = simo_capacity_lower(k, 1.0, &grid)?;
        let (o, se) = (
            row.oracle.unwrap_or(f64::NAN),
            row.oracle_err.unwrap_or(f64::NAN),
        );
        let slack = c.tol(5.0 * se);
        let jensen = (1.0 + k as f64).ln();
        p.ensure(row.family_bound <= o + slack, || {
            format!("k={k}: lower {} > oracle {o} + 5se", row.family_bound)
        });
        p.ensure(o <= jensen + c.tol(0.0), || {
            format!("k={k}: oracle {o} above ln(1+k) {jensen}")
        });
        let grid_opt = r.diagnostic("grid_max").unwrap_or(f64::NAN);
        let h = r.diagnostic("heuristic").unwrap_or(f64::NAN);
        let gap = rel_err(h, grid_opt);
        p.ensure(gap <= c.tol(0.02), || {
            format!("k={k}: heuristic {h} vs grid {grid_opt}")
        });
        p.note(format!(
            "k={k}: lower {} oracle {o}±{se} jensen {jensen} heuristic gap {gap:.2e}",
            fmt(row.family_bound)
        ));
    }
    Ok(())
}

fn fmt(x: f64) -> String {
    figures::fmt_num(x)
}

fn acceptance_3(c: &Ctx, p: &mut Probe) -> Result<()> {
    let cfg = Fig2::default();
    for theta in [0.2, 1.0, 5.0] {
        let row = figures::fig2_row(&cfg, theta)?;
        let o = row.oracle.unwrap_or(f64::NAN);
        let slack = c.tol(0.0);
        p.ensure(row.family_bound <= o + slack, || {
            format!("theta={theta}: lower {} > quadrature {o}", row.family_bound)
        });
        p.ensure(o <= row.jensen_bound + slack, || {
            format!(
                "theta={theta}: quadrature {o} > jensen {}",
                row.jensen_bound
            )
        });
        p.note(format!(
            "theta={theta}: {} <= {} <= {}",
            fmt(row.family_bound),
            fmt(o),
            fmt(row.jensen_bound)
        ));
    }
    Ok(())
}

fn acceptance_4(c: &Ctx, p: &mut Probe) -> Result<()> {
    let cfg = Fig3::default();
    let mut gaps = Vec::new();
    for n in [10u64, 50, 100] {
        let row = figures::fig3_row(&cfg, n)?;
        let o = row.oracle.unwrap_or(f64::NAN);
        let slack = c.tol(0.0);
        p.ensure(row.family_bound <= o + slack, || {
            format!("n={n}: lower {} > exact {o}", row.family_bound)
        });
        p.ensure(o <= row.jensen_bound + slack, || {
            format!("n={n}: exact {o} > sqrt(np) {}", row.jensen_bound)
        });
        let gap = (o - row.family_bound) / o;
        gaps.push(gap);
        p.note(format!("n={n}: relative gap {gap:.4e}"));
    }
    p.ensure(gaps[2] < gaps[0] * c.scale.max(0.0), || {
        format!(
            "gap at n=100 ({:e}) not below n=10 ({:e})",
            gaps[2], gaps[0]
        )
    });
    Ok(())
}

fn acceptance_5(c: &Ctx, p: &mut Probe) -> Result<()> {
    let s_grid = GridSpec::new(0.0, 10.0, 0.001)?.with_refinement(Refine::default())?;
    let (mu2, s2) = gap_factor_mu(2.0, &s_grid)?;
    p.ensure((mu2 - 1.0).abs() <= c.tol(1e-3), || format!("mu_2 = {mu2}"));
    p.note(format!("mu_2 = {mu2} at s = {s2:e}"));
    let rows = figures::fig4(&Fig4::default())?;
    for r in &rows {
        p.ensure(r.mu_t <= 1.0 + c.tol(0.0) && r.mu_t > 0.0, || {
            format!("mu at t={} is {}", r.t, r.mu_t)
        });
    }
    p.note(format!("{} t values", rows.len()));
    Ok(())
}

fn acceptance_6(c: &Ctx, p: &mut Probe) -> Result<()> {
    let probs = [0.3, 0.7];
    let pmf = PmfTable::from_probs(&probs)?;
    let (b1, b2) = empirical_entropy_lower(&pmf, 100)?;
    let h = pmf.entropy();
    let o = plugin_entropy_mc(&probs, 100, 100_000, c.seed)?;
    let slack = c.tol(3.0 * o.uncertainty);
    p.ensure(o.value >= b1 - slack, || {
        format!("simulated {} < B1 {b1} - 3se", o.value)
    });
    p.ensure(b1 >= b2, || format!("B1 {b1} < B2 {b2}"));
    p.ensure(b2 == h - 0.01, || format!("B2 {b2} != H - 0.01"));
    p.ensure(o.value <= h + slack, || {
        format!("simulated {} > H {h} + 3se", o.value)
    });
    p.note(format!(
        "B2 {b2} <= B1 {b1} <= sim {}±{} <= H {h}",
        o.value, o.uncertainty
    ));
    Ok(())
}

fn acceptance_7(c: &Ctx, p: &mut Probe) -> Result<()> {
    for q in [0.1, 0.3, 0.7] {
        let g = geometric(q)?;
        for s in [1.2, 1.5, 1.9] {
            let bound = guessing_moment_lower(q, s)?;
            let sum = discrete_expectation(
                g.pmf_terms().expect("geometric pmf"),
                |k| k.powf(s),
                TailBound::geometric_power(q, s),
                1e-10,
            )?;
            p.ensure(bound <= sum.value + c.tol(0.0), || {
                format!("p={q} s={s}: bound {bound} > E G^s {}", sum.value)
            });
        }
        // the equality needs the tail controlled well below its own tolerance
        let mean = discrete_expectation(
            g.pmf_terms().expect("geometric pmf"),
            |k| k,
            TailBound::geometric_power(q, 1.0),
            1e-14,
        )?;
        let at_one = guessing_moment_lower(q, 1.0)?;
        p.ensure(rel_err(at_one, mean.value) <= c.tol(1e-12), || {
            format!("p={q} s=1: {at_one} vs {}", mean.value)
        });
    }
    Ok(())
}

fn convex_entry(rng: &mut ChaCha8Rng) -> DifferentiableFunction {
    let pick = rng.random_range(0..5u32);
    let f = match pick {
        0 => catalog("neg_log", &[]),
        1 => catalog("x_log_x", &[]),
        2 => {
            let t = if rng.random_bool(0.5) {
                rng.random_range(1.0..4.0)
            } else {
                rng.random_range(-3.0..0.0)
            };
            catalog("power", &[t])
        }
        3 => catalog("exp_scale", &[rng.random_range(-2.0..2.0)]),
        _ => catalog("scaled_neg_log", &[rng.random_range(0.1..3.0)]),
    };
    f.expect("catalog entry")
}

fn positive_model(rng: &mut ChaCha8Rng) -> Result<DistributionModel> {
    match rng.random_range(0..5u32) {
        0 => gaussian(rng.random_range(0.5..5.0), rng.random_range(0.01..2.0)),
        1 => exponential(rng.random_range(0.2..5.0)),
        2 => bernoulli_sum(rng.random_range(1..50), rng.random_range(0.05..0.95)),
        3 => geometric(rng.random_range(0.05..0.95)),
        _ => shifted_chi_square_sum(rng.random_range(1..20), rng.random_range(0.1..3.0)),
    }
}

fn acceptance_8(c: &Ctx, p: &mut Probe) -> Result<()> {
    let mut rng = c.rng(8);
    for i in 0..20 {
        let f = convex_entry(&mut rng);
        let m = positive_model(&mut rng)?;
        let mean = m.mean();
        let jensen = f.value(mean)?;
        let tol = c.tol(1e-12);
        let a = product_convex_positive(&f, 1.0, mean)?.value;
        let b = exp_tilted(&f, &m, 0.0)?.value;
        let s = rng.random_range(1.0..4.0);
        let d = moment_two_point(1.0, mean, s, 0.0)?.value;
        for (what, v, want) in [
            ("g=1", a, jensen),
            ("s=0", b, jensen),
            ("t=0", d, mean.powf(s)),
        ] {
            p.ensure(rel_err(v, want) <= tol, || {
                format!("pair {i} {} / {} {what}: {v} vs {want}", f.name(), m.name())
            });
        }
    }
    Ok(())
}

fn acceptance_9(c: &Ctx, p: &mut Probe) -> Result<()> {
    let grid = GridSpec::new(0.0, 10.0, 0.001)?;
    for x in [2.0, std::f64::consts::E, 10.0] {
        let r = log_expectation_lower(&point_mass(x)?, &grid)?;
        let want = x.ln();
        let e = (r.value - want).abs();
        p.ensure(e <= c.tol(grid.step() * want.abs() + 1e-6), || {
            format!("c={x}: {} vs ln c = {want}", r.value)
        });
        p.note(format!("c={}: err {e:.2e}", fmt(x)));
    }
    Ok(())
}

fn exp_snr_quad(theta: f64, gain: f64, h: impl Fn(f64) -> f64) -> Result<OracleEstimate> {
    let x = affine_of(&exponential(theta)?, 1.0, gain)?;
    quad_expectation(|v| x.pdf(v).unwrap_or(0.0), (1.0, f64::INFINITY), h, 1e-10)
}

fn acceptance_10(c: &Ctx, p: &mut Probe) -> Result<()> {
    let f = catalog("log1p_gain", &[5.0])?;
    let u = product_two_convex(&f, &f, 1.0, 2.0, Orientation::ConcavePair)?;
    let second = exp_snr_quad(1.0, 5.0, |x| x.ln().powi(2))?;
    let first = exp_snr_quad(1.0, 5.0, f64::ln)?;
    let var = second.value - first.value * first.value;
    let r = capacity_variance_upper(1.0, 5.0, &GridSpec::new(0.0, 10.0, 0.001)?)?;
    let slack = c.tol(0.0);
    p.ensure(u.value >= second.value - slack, || {
        format!("U {} < E ln^2 {}", u.value, second.value)
    });
    p.ensure(r.value >= var - slack, || {
        format!("variance bound {} < Var {var}", r.value)
    });
    p.note(format!(
        "U {} >= {}; var bound {} >= {}",
        fmt(u.value),
        fmt(second.value),
        fmt(r.value),
        fmt(var)
    ));
    Ok(())
}

fn acceptance_11(c: &Ctx, p: &mut Probe) -> Result<()> {
    let grid = GridSpec::new(-10.0, 10.0, 0.001)?;
    let f = catalog("half_quadratic", &[1.0])?;
    let mut last = f64::INFINITY;
    for sigma2 in [0.5, 0.05, 0.005] {
        let r = exp_of_convex(&f, &gaussian(1.0, sigma2)?, &grid)?;
        let (_, exact) = gaussian_exp_square(1.0, sigma2, 1.0)?;
        let gap = (exact - r.value) / exact;
        p.ensure(gap < last * c.scale.max(0.0), || {
            format!("sigma2={sigma2}: gap {gap:e} not below {last:e}")
        });
        p.note(format!("sigma2={sigma2}: gap {gap:.4e}"));
        last = gap;
    }
    Ok(())
}

fn acceptance_12(c: &Ctx, p: &mut Probe) -> Result<()> {
    let cfg = Fig1 {
        k_max: 5,
        samples: 100_000,
        seed: c.seed,
        ..Fig1::default()
    };
    let render = || -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        figures::write_rows(&mut buf, &figures::fig1(&cfg)?).expect("in-memory write");
        Ok(buf)
    };
    p.ensure(render()? == render()?, || {
        "fig1 output differs between runs".into()
    });
    p.ensure(c.scale > 0.0, || "tolerances corrupted".into());
    Ok(())
}

fn catalog_sample(rng: &mut ChaCha8Rng) -> (DifferentiableFunction, f64, f64) {
    let pick = rng.random_range(0..8u32);
    let (f, real_line) = match pick {
        0 => (catalog("neg_log", &[]), false),
        1 => (catalog("x_log_x", &[]), false),
        2 => (catalog("power", &[rng.random_range(-3.0..4.0)]), false),
        3 => (catalog("exp_scale", &[rng.random_range(-2.0..2.0)]), true),
        4 => (
            catalog("half_quadratic", &[rng.random_range(-3.0..3.0)]),
            true,
        ),
        5 => (catalog("log1p_gain", &[rng.random_range(0.1..10.0)]), false),
        6 => (
            catalog("scaled_neg_log", &[rng.random_range(-3.0..3.0)]),
            false,
        ),
        _ => (catalog("constant", &[rng.random_range(-5.0..5.0)]), true),
    };
    let f = f.expect("catalog entry");
    let d = f.domain();
    let lo = match (real_line, d.lo < 0.0) {
        (true, _) => -5.0,
        (false, true) => 0.9 * d.lo,
        (false, false) => d.lo + 0.05,
    };
    let a = rng.random_range(lo..lo + 10.0);
    let x = rng.random_range(lo..lo + 10.0);
    (f, a, x)
}

fn funcs_minorant(c: &Ctx, p: &mut Probe) -> Result<()> {
    let mut rng = c.rng(101);
    for _ in 0..2000 {
        let (f, a, x) = catalog_sample(&mut rng);
        let fx = f.value(x)?;
        let t = f.value(a)? + f.deriv(a)? * (x - a);
        let slack = c.tol(1e-12 * (1.0 + fx.abs()) + 1e-12 * t.abs());
        match f.convexity() {
            Convexity::Convex => p.ensure(fx >= t - slack, || format!("{} a={a} x={x}", f.name())),
            Convexity::Concave => p.ensure(fx <= t + slack, || format!("{} a={a} x={x}", f.name())),
            _ => {}
        }
    }
    Ok(())
}

fn funcs_touch(c: &Ctx, p: &mut Probe) -> Result<()> {
    let mut rng = c.rng(102);
    for _ in 0..500 {
        let (f, a, _) = catalog_sample(&mut rng);
        let (t, v) = (tangent_at(&f, a)?.value(a)?, f.value(a)?);
        p.ensure((t - v).abs() <= c.tol(0.0), || {
            format!("{} at {a}: {t} vs {v}", f.name())
        });
    }
    Ok(())
}

fn funcs_fd(c: &Ctx, p: &mut Probe) -> Result<()> {
    let specs: &[(&str, &[f64])] = &[
        ("neg_log", &[]),
        ("x_log_x", &[]),
        ("power", &[0.5]),
        ("power", &[2.5]),
        ("power", &[-1.0]),
        ("exp_scale", &[0.7]),
        ("half_quadratic", &[2.0]),
        ("log1p_gain", &[5.0]),
        ("log1p_gain_squared", &[5.0]),
        ("scaled_neg_log", &[1.5]),
        ("constant", &[3.0]),
    ];
    for (name, params) in specs {
        let f = catalog(name, params)?;
        let d = f.domain();
        let lo = if d.lo.is_finite() { d.lo + 0.05 } else { -3.0 };
        for i in 0..100 {
            let x = lo + 0.06 * i as f64;
            let e = f.finite_difference_error(x)?;
            p.ensure(e <= c.tol(1e-5), || format!("{} at {x}: {e:e}", f.name()));
        }
    }
    Ok(())
}

fn all_models() -> Result<Vec<DistributionModel>> {
    Ok(vec![
        gaussian(0.7, 1.3)?,
        exponential(2.0)?,
        bernoulli_sum(12, 0.3)?,
        geometric(0.4)?,
        shifted_chi_square_sum(3, 0.5)?,
        sample_mean_sq_error(8, 2.0)?,
        point_mass(1.5)?,
        affine_of(&exponential(1.0)?, 1.0, 5.0)?,
    ])
}

fn dist_origin(c: &Ctx, p: &mut Probe) -> Result<()> {
    for m in all_models()? {
        let tol = c.tol(1e-10);
        p.ensure(m.cgf(0.0)?.abs() <= tol, || format!("{} cgf(0)", m.name()));
        p.ensure((m.cgf_prime(0.0)? - m.mean()).abs() <= tol, || {
            format!("{} cgf'(0)", m.name())
        });
        p.ensure((m.cgf_second(0.0)? - m.variance()).abs() <= tol, || {
            format!("{} cgf''(0)", m.name())
        });
    }
    Ok(())
}

fn dist_mc_mgf(c: &Ctx, p: &mut Probe) -> Result<()> {
    let mut rng = c.rng(103);
    for m in all_models()? {
        // 4s inside the domain keeps the standard error itself well estimated
        let d = m.cgf_domain();
        let (lo, hi) = (d.lo.max(-8.0) / 4.0, d.hi.min(8.0) / 4.0);
        for i in 0..100u64 {
            let s = rng.random_range(lo..hi);
            let est = mc_expectation(&m, |x| (s * x).exp(), 100_000, c.seed.wrapping_add(i))?;
            let exact = m.cgf(s)?.exp();
            p.ensure(
                (est.value - exact).abs() <= c.tol(5.0 * est.uncertainty + 1e-12 * exact),
                || {
                    format!(
                        "{} s={s}: {} vs {exact} (se {})",
                        m.name(),
                        est.value,
                        est.uncertainty
                    )
                },
            );
        }
    }
    Ok(())
}

fn dist_affine(c: &Ctx, p: &mut Probe) -> Result<()> {
    let mut rng = c.rng(104);
    let bases = [
        gaussian(0.4, 0.8)?,
        exponential(1.5)?,
        bernoulli_sum(5, 0.4)?,
        geometric(0.5)?,
    ];
    for _ in 0..100 {
        let (c1, b1) = (rng.random_range(-3.0..3.0), rng.random_range(0.2..3.0));
        let (c2, b2) = (rng.random_range(-3.0..3.0), rng.random_range(0.2..3.0));
        let b2 = if rng.random_bool(0.5) { b2 } else { -b2 };
        for base in &bases {
            let nested = affine_of(&affine_of(base, c1, b1)?, c2, b2)?;
            let flat = affine_of(base, c2 + b2 * c1, b2 * b1)?;
            let d = flat.cgf_domain();
            let (lo, hi) = (d.lo.max(-3.0), d.hi.min(3.0));
            let s = lo + (hi - lo) * rng.random_range(0.05..0.95);
            let (x, y) = (nested.cgf(s)?, flat.cgf(s)?);
            p.ensure((x - y).abs() <= c.tol(1e-12 * (1.0 + y.abs())), || {
                format!("{} at {s}: {x} vs {y}", base.name())
            });
        }
    }
    Ok(())
}

fn dist_determinism(c: &Ctx, p: &mut Probe) -> Result<()> {
    for m in all_models()? {
        let a = mc_expectation(&m, |x| x * x, 50_000, c.seed)?;
        let b = mc_expectation(&m, |x| x * x, 50_000, c.seed)?;
        p.ensure(
            a.value.to_bits() == b.value.to_bits() && c.scale > 0.0,
            || format!("{}: {} vs {}", m.name(), a.value, b.value),
        );
    }
    Ok(())
}

fn sound(c: &Ctx, p: &mut Probe, label: &str, r: &BoundResult, o: &OracleEstimate) {
    let z = c.tol(5.0);
    let ok = match r.direction {
        Direction::Lower => o.admits_lower(r.value, z),
        Direction::Upper => o.admits_upper(r.value, z),
    };
    p.ensure(ok, || {
        format!(
            "{label}: {} {} vs {}±{}",
            r.direction, r.value, o.value, o.uncertainty
        )
    });
}

fn bounds_soundness(c: &Ctx, p: &mut Probe) -> Result<()> {
    let alphas = GridSpec::new(0.0, 10.0, 0.001)?;
    for k in [1u64, 4, 25] {
        let r = simo_capacity_lower(k, 1.0, &alphas)?;
        let o = mc_expectation(&shifted_chi_square_sum(k, 1.0)?, f64::ln, 200_000, c.seed)?;
        sound(c, p, &format!("simo k={k}"), &r, &o);
    }
    for theta in [0.1, 0.7, 3.0] {
        let r = exp_snr_capacity_lower(theta, 5.0, &alphas)?;
        sound(
            c,
            p,
            &format!("exp snr theta={theta}"),
            &r,
            &exp_snr_quad(theta, 5.0, f64::ln)?,
        );
    }
    let m = shifted_chi_square_sum(3, 2.0)?;
    let r = log_expectation_lower(&m, &alphas)?;
    sound(
        c,
        p,
        "log expectation",
        &r,
        &mc_expectation(&m, f64::ln, 200_000, c.seed)?,
    );

    let (ag, sg) = (
        GridSpec::new(0.0, 10.0, 0.05)?,
        GridSpec::new(0.5, 10.0, 0.05)?,
    );
    for (n, t) in [(10u64, 0.5), (30, 2.0)] {
        let m = bernoulli_sum(n, 0.2)?;
        let r = power_moment_lower(&m, t, &sg, &ag)?;
        let o = discrete_expectation(
            m.pmf_terms().expect("binomial"),
            |k| k.powf(t),
            TailBound::Finite,
            0.0,
        )?;
        sound(c, p, &format!("power n={n} t={t}"), &r, &o);
    }
    for (n, t) in [(10u64, 1.0), (50, 0.5)] {
        let x = sample_mean_sq_error(n, 1.5)?;
        let o = mc_expectation(&x, |v| v.powf(t / 2.0), 200_000, c.seed)?;
        let v = estimation_error_moment_lower(n, 1.5, t, 1.0 / (t + 1.0), 1.0)?;
        p.ensure(o.admits_lower(v, c.tol(5.0)), || {
            format!("estimation n={n} t={t}: {v} vs {o:?}")
        });
    }
    let grid = GridSpec::new(-10.0, 10.0, 0.001)?;
    for (mu, sigma2, s) in [(1.0, 0.5, 1.0), (-2.0, 0.3, 1.5)] {
        let r = exp_of_convex(
            &catalog("half_quadratic", &[s])?,
            &gaussian(mu, sigma2)?,
            &grid,
        )?;
        let (_, exact) = gaussian_exp_square(mu, sigma2, s)?;
        sound(
            c,
            p,
            "exp of convex",
            &r,
            &OracleEstimate::closed_form(exact),
        );
    }
    let f = catalog("log1p_gain", &[5.0])?;
    let u = product_two_convex(&f, &f, 1.0, 2.0, Orientation::ConcavePair)?;
    sound(
        c,
        p,
        "concave pair",
        &u,
        &exp_snr_quad(1.0, 5.0, |x| x.ln().powi(2))?,
    );
    let q = 0.35;
    let g = geometric(q)?;
    for s in [2.5, 4.0, 0.5] {
        let r = moment_two_point(1.0 / q, (2.0 - q) / (q * q), s, 1.0)?;
        let o = discrete_expectation(
            g.pmf_terms().expect("geometric"),
            |k| k.powf(s),
            TailBound::geometric_power(q, s),
            1e-12,
        )?;
        sound(c, p, &format!("two point s={s}"), &r, &o);
    }
    Ok(())
}

fn bounds_gaussian_ratio(c: &Ctx, p: &mut Probe) -> Result<()> {
    let mut rng = c.rng(105);
    for _ in 0..500 {
        let (mu, sigma2) = (rng.random_range(-3.0..3.0), rng.random_range(0.01..2.0));
        let s = rng.random_range(0.0..0.999) / sigma2;
        let (b, x) = gaussian_exp_square(mu, sigma2, s)?;
        if !x.is_finite() {
            continue;
        }
        let want = (1.0 - sigma2 * s).sqrt();
        p.ensure(rel_err(b / x, want) <= c.tol(1e-12), || {
            format!("mu={mu} sigma2={sigma2} s={s}")
        });
    }
    Ok(())
}

fn bounds_dominance(c: &Ctx, p: &mut Probe) -> Result<()> {
    let grid = GridSpec::new(0.0, 10.0, 0.001)?;
    for k in [1u64, 7, 40, 100] {
        let full = simo_capacity_lower(k, 1.0, &grid)?;
        let h = full.diagnostic("heuristic").unwrap_or(f64::NAN);
        p.ensure(full.value >= h, || {
            format!("simo k={k}: {} < heuristic {h}", full.value)
        });
        for i in (0..grid.len() - 1).step_by(997) {
            let (a, b) = (grid.point(i), grid.point(i + 1));
            let pair = simo_capacity_lower(k, 1.0, &GridSpec::new(a, b, b - a)?)?;
            p.ensure(full.value >= pair.value, || {
                format!("simo k={k} at alpha={a}")
            });
        }
    }
    let s_grid = GridSpec::new(0.0, 10.0, 0.001)?;
    for t in [0.3, 1.0, 1.7] {
        let (mu, _) = gap_factor_mu(t, &s_grid)?;
        let zeta = 1.0 / (t + 1.0);
        for s in [1.0 - t / 2.0 + 0.001, 1.0, 3.0] {
            let v = estimation_error_moment_lower(1, 1.0, t, zeta, s)?;
            p.ensure(v <= mu * (1.0 + c.tol(1e-12)), || {
                format!("mu_t={mu} below point value {v} at t={t} s={s}")
            });
        }
    }
    Ok(())
}

fn bounds_point_mass(c: &Ctx, p: &mut Probe) -> Result<()> {
    let grid = GridSpec::new(-10.0, 10.0, 0.001)?;
    for x in [0.5, 1.25, -2.0] {
        let r = exp_of_convex(&catalog("half_quadratic", &[1.0])?, &point_mass(x)?, &grid)?;
        let exact = (0.5f64 * x * x).exp();
        p.ensure(rel_err(r.value, exact) <= c.tol(1e-12), || {
            format!("exp of convex at {x}")
        });
    }
    let f = catalog("exp_scale", &[0.05])?;
    for x in [2.0, std::f64::consts::E, 10.0] {
        let r = product_two_convex(&f, &f, x, x * x, Orientation::ConvexPair)?;
        p.ensure(rel_err(r.value, (0.1 * x).exp()) <= c.tol(1e-12), || {
            format!("two convex at {x}")
        });
    }
    Ok(())
}

fn bounds_entropy(c: &Ctx, p: &mut Probe) -> Result<()> {
    let mut rng = c.rng(106);
    for _ in 0..500 {
        let k = rng.random_range(1..12);
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let Ok(pmf) = PmfTable::from_probs(&probs) else {
            continue;
        };
        let n = rng.random_range(1..100_000);
        let (b1, b2) = empirical_entropy_lower(&pmf, n)?;
        p.ensure(b1 >= b2 - c.tol(1e-12), || {
            format!("{probs:?} n={n}: {b1} < {b2}")
        });
    }
    for (probs, n) in [(vec![0.1, 0.2, 0.7], 20u64), (vec![0.25; 4], 8)] {
        let pmf = PmfTable::from_probs(&probs)?;
        let (b1, _) = empirical_entropy_lower(&pmf, n)?;
        let o = plugin_entropy_mc(&probs, n, 100_000, c.seed)?;
        p.ensure(o.value >= b1 - c.tol(3.0 * o.uncertainty), || {
            format!("{probs:?}: {} < {b1}", o.value)
        });
    }
    Ok(())
}

fn optimize_invariants(c: &Ctx, p: &mut Probe) -> Result<()> {
    let mut rng = c.rng(107);
    for _ in 0..50 {
        let (m, w) = (rng.random_range(-4.0..9.0), rng.random_range(0.1..5.0));
        let step = rng.random_range(0.01..0.5);
        let obj = move |x: f64| Some(-(x - m) * (x - m) / w + (3.0 * x).sin());
        let grid = GridSpec::new(-5.0, 10.0, step)?;
        let plain = grid_max(obj, &grid)?;
        let refined = grid_max(obj, &grid.with_refinement(Refine::default())?)?;
        p.ensure(obj(plain.argmax) == Some(plain.max), || {
            "max != objective(argmax)".into()
        });
        p.ensure(refined.max >= plain.max, || {
            format!("refined {} < {}", refined.max, plain.max)
        });
        p.ensure(grid_max(obj, &grid)? == plain && c.scale > 0.0, || {
            "nondeterministic".into()
        });
    }
    Ok(())
}

fn figure_ordering(c: &Ctx, p: &mut Probe) -> Result<()> {
    let f1 = Fig1 {
        k_max: 10,
        samples: 100_000,
        seed: c.seed,
        ..Fig1::default()
    };
    let f3 = Fig3 {
        n_max: 20,
        ..Fig3::default()
    };
    let mut rows = figures::fig1(&f1)?;
    rows.extend(figures::fig2(&Fig2::default())?);
    rows.extend(figures::fig3(&f3)?);
    for r in &rows {
        let shrunk = figures::FigureRow {
            oracle_err: r.oracle_err.map(|e| c.tol(e)),
            ..r.clone()
        };
        p.ensure(shrunk.is_ordered(), || format!("row x={} {:?}", r.x, r));
    }
    p.note(format!("{} rows", rows.len()));
    Ok(())
}
