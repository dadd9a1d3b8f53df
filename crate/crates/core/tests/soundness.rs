//! Every bound checked against an independent estimate of the quantity it bounds.

use tangency::bounds::{
    capacity_variance_upper, empirical_entropy_lower, estimation_error_moment_lower, exp_of_convex,
    exp_snr_capacity_lower, gaussian_exp_square, log_expectation_lower, moment_two_point,
    power_moment_lower, product_exp_composition, product_two_convex, simo_capacity_lower,
    Orientation, PmfTable,
};
use tangency::distributions::{
    affine_of, bernoulli_sum, discrete_expectation, exponential, gaussian, geometric,
    mc_expectation, plugin_entropy_mc, point_mass, quad_expectation, sample_mean_sq_error,
    shifted_chi_square_sum, TailBound,
};
use tangency::funcs::catalog;
use tangency::{BoundResult, Direction, GridSpec, OracleEstimate};

const Z: f64 = 5.0;

fn alpha_grid() -> GridSpec {
    GridSpec::new(0.0, 10.0, 0.001).unwrap()
}

fn sound(label: &str, r: &BoundResult, oracle: &OracleEstimate) {
    let ok = match r.direction {
        Direction::Lower => oracle.admits_lower(r.value, Z),
        Direction::Upper => oracle.admits_upper(r.value, Z),
    };
    assert!(
        ok,
        "{label}: {} bound {} vs oracle {:?}",
        r.direction, r.value, oracle
    );
}

fn exp_snr_oracle(theta: f64, gain: f64, h: impl Fn(f64) -> f64) -> OracleEstimate {
    let x = affine_of(&exponential(theta).unwrap(), 1.0, gain).unwrap();
    quad_expectation(|v| x.pdf(v).unwrap_or(0.0), (1.0, f64::INFINITY), h, 1e-10).unwrap()
}

#[test]
fn simo_is_below_monte_carlo() {
    for k in [1u64, 4, 25] {
        let r = simo_capacity_lower(k, 1.0, &alpha_grid()).unwrap();
        let m = shifted_chi_square_sum(k, 1.0).unwrap();
        let o = mc_expectation(&m, f64::ln, 200_000, 3).unwrap();
        sound(&format!("simo k={k}"), &r, &o);
        assert!(o.admits_upper(r.diagnostic("jensen_upper").unwrap(), Z));
    }
}

#[test]
fn exp_snr_is_below_quadrature() {
    for theta in [0.1, 0.7, 3.0] {
        let r = exp_snr_capacity_lower(theta, 5.0, &alpha_grid()).unwrap();
        let o = exp_snr_oracle(theta, 5.0, f64::ln);
        sound(&format!("exp snr theta={theta}"), &r, &o);
        assert!(r.diagnostic("jensen_upper").unwrap() >= o.value);
    }
}

#[test]
fn log_expectation_is_below_monte_carlo() {
    let m = shifted_chi_square_sum(3, 2.0).unwrap();
    let r = log_expectation_lower(&m, &alpha_grid()).unwrap();
    let o = mc_expectation(&m, f64::ln, 200_000, 9).unwrap();
    sound("log expectation", &r, &o);
}

#[test]
fn power_moment_is_below_exact_sum() {
    let alphas = GridSpec::new(0.0, 10.0, 0.05).unwrap();
    let ss = GridSpec::new(0.5, 10.0, 0.05).unwrap();
    for (n, t) in [(10u64, 0.5), (40, 0.5), (30, 2.0)] {
        let m = bernoulli_sum(n, 0.2).unwrap();
        let r = power_moment_lower(&m, t, &ss, &alphas).unwrap();
        let o = discrete_expectation(
            m.pmf_terms().unwrap(),
            |k| k.powf(t),
            TailBound::Finite,
            0.0,
        )
        .unwrap();
        sound(&format!("power n={n} t={t}"), &r, &o);
    }
}

#[test]
fn estimation_error_is_below_monte_carlo() {
    for (n, t) in [(10u64, 1.0), (50, 0.5), (5, 2.0)] {
        let zeta = 1.0 / (t + 1.0);
        let x = sample_mean_sq_error(n, 1.5).unwrap();
        let o = mc_expectation(&x, |v| v.powf(t / 2.0), 200_000, 4).unwrap();
        for s in [1.0 - t / 2.0, 0.5, 2.0] {
            if s < 1.0 - t / 2.0 {
                continue;
            }
            let v = estimation_error_moment_lower(n, 1.5, t, zeta, s).unwrap();
            assert!(o.admits_lower(v, Z), "n={n} t={t} s={s}: {v} vs {o:?}");
        }
    }
}

#[test]
fn exp_of_convex_is_below_exact_values() {
    let grid = GridSpec::new(-10.0, 10.0, 0.001).unwrap();
    for (mu, sigma2, s) in [(1.0, 0.5, 1.0), (-2.0, 0.3, 1.5), (0.0, 1.0, 0.9)] {
        let f = catalog("half_quadratic", &[s]).unwrap();
        let r = exp_of_convex(&f, &gaussian(mu, sigma2).unwrap(), &grid).unwrap();
        let (_, exact) = gaussian_exp_square(mu, sigma2, s).unwrap();
        sound(
            "gaussian exp square",
            &r,
            &OracleEstimate::closed_form(exact),
        );
    }
    // E{X^-0.5} for X ~ Exp(2) through f(x) = -0.5 ln x
    let m = exponential(2.0).unwrap();
    let f = catalog("scaled_neg_log", &[0.5]).unwrap();
    let r = exp_of_convex(&f, &m, &GridSpec::new(0.001, 10.0, 0.001).unwrap()).unwrap();
    let o = quad_expectation(
        |v| m.pdf(v).unwrap_or(0.0),
        (0.0, f64::INFINITY),
        |v| v.powf(-0.5),
        1e-8,
    )
    .unwrap();
    sound("inverse root moment", &r, &o);
}

#[test]
fn product_exp_composition_is_below_quadrature() {
    let m = gaussian(1.0, 0.3).unwrap();
    let f = catalog("half_quadratic", &[0.8]).unwrap();
    let g = catalog("exp_scale", &[0.5]).unwrap();
    let r = product_exp_composition(&f, &g, &m, &GridSpec::new(-5.0, 5.0, 0.001).unwrap()).unwrap();
    let o = quad_expectation(
        |v| m.pdf(v).unwrap(),
        (f64::NEG_INFINITY, f64::INFINITY),
        |v| (0.4 * v * v + 0.5 * v).exp(),
        1e-10,
    )
    .unwrap();
    sound("exp composition times exp", &r, &o);
}

#[test]
fn two_moment_bounds_against_sums() {
    let p = 0.35;
    let g = geometric(p).unwrap();
    let (m1, m2) = (1.0 / p, (2.0 - p) / (p * p));
    for s in [2.5, 3.0, 4.0, 0.5, 1.0] {
        let r = moment_two_point(m1, m2, s, 1.0).unwrap();
        let o = discrete_expectation(
            g.pmf_terms().unwrap(),
            |k| k.powf(s),
            TailBound::geometric_power(p, s),
            1e-12,
        )
        .unwrap();
        sound(&format!("two point s={s}"), &r, &o);
    }
}

#[test]
fn concave_pair_and_variance_are_above_quadrature() {
    let c = catalog("log1p_gain", &[5.0]).unwrap();
    let u = product_two_convex(&c, &c, 1.0, 2.0, Orientation::ConcavePair).unwrap();
    let second = exp_snr_oracle(1.0, 5.0, |x| x.ln().powi(2));
    sound("second moment", &u, &second);
    let first = exp_snr_oracle(1.0, 5.0, f64::ln);
    let var = OracleEstimate {
        value: second.value - first.value * first.value,
        uncertainty: second.uncertainty + 2.0 * first.value.abs() * first.uncertainty,
        ..second
    };
    let r = capacity_variance_upper(1.0, 5.0, &alpha_grid()).unwrap();
    sound("variance", &r, &var);
}

#[test]
fn point_masses_are_attained() {
    let grid = GridSpec::new(-10.0, 10.0, 0.001).unwrap();
    for c in [0.5, 1.25, -2.0] {
        let r = exp_of_convex(
            &catalog("half_quadratic", &[1.0]).unwrap(),
            &point_mass(c).unwrap(),
            &grid,
        )
        .unwrap();
        let exact = (0.5f64 * c * c).exp();
        assert!((r.value - exact).abs() <= 1e-12 * exact, "{c}: {}", r.value);
    }
    for c in [2.0, std::f64::consts::E, 10.0] {
        let r = log_expectation_lower(&point_mass(c).unwrap(), &alpha_grid()).unwrap();
        assert!((r.value - c.ln()).abs() <= 0.001 * c.ln() + 1e-6);
        let f = catalog("exp_scale", &[0.05]).unwrap();
        let r = product_two_convex(&f, &f, c, c * c, Orientation::ConvexPair).unwrap();
        let exact = (0.1 * c).exp();
        assert!((r.value - exact).abs() <= 1e-12 * exact);
    }
}

#[test]
fn entropy_simulation_respects_both_bounds() {
    for (probs, n) in [
        (vec![0.3, 0.7], 100u64),
        (vec![0.1, 0.2, 0.7], 20),
        (vec![0.25; 4], 8),
    ] {
        let pmf = PmfTable::from_probs(&probs).unwrap();
        let (b1, b2) = empirical_entropy_lower(&pmf, n).unwrap();
        let o = plugin_entropy_mc(&probs, n, 100_000, 11).unwrap();
        assert!(
            o.value >= b1 - 3.0 * o.uncertainty,
            "{probs:?}: {o:?} vs {b1}"
        );
        assert!(b1 >= b2);
        assert!(o.value <= pmf.entropy() + 3.0 * o.uncertainty);
    }
}

#[test]
fn concentration_tightens_the_bound() {
    let grid = GridSpec::new(-10.0, 10.0, 0.001).unwrap();
    let f = catalog("half_quadratic", &[1.0]).unwrap();
    let mut last = f64::INFINITY;
    for sigma2 in [0.5, 0.05, 0.005, 0.0005] {
        let r = exp_of_convex(&f, &gaussian(1.0, sigma2).unwrap(), &grid).unwrap();
        let (_, exact) = gaussian_exp_square(1.0, sigma2, 1.0).unwrap();
        let gap = (exact - r.value) / exact;
        assert!(
            gap >= 0.0 && gap < last,
            "sigma2 = {sigma2}: {gap} after {last}"
        );
        last = gap;
    }
}
