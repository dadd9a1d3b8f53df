use proptest::prelude::*;

use tangency::bounds::{
    empirical_entropy_lower, exp_tilted, gaussian_exp_square, moment_two_point,
    product_convex_positive, simo_capacity_lower, PmfTable,
};
use tangency::distributions::{
    affine_of, bernoulli_sum, exponential, gaussian, geometric, mc_expectation, point_mass,
    sample_mean_sq_error, shifted_chi_square_sum, DistributionModel,
};
use tangency::funcs::{catalog, tangent_at};
use tangency::optimize::{grid_max, grid_max_2d};
use tangency::{Convexity, GridSpec, Refine};

fn entry() -> impl Strategy<Value = (String, Vec<f64>)> {
    prop_oneof![
        Just(("neg_log".to_string(), vec![])),
        Just(("x_log_x".to_string(), vec![])),
        (-3.0..4.0f64).prop_map(|t| ("power".to_string(), vec![t])),
        (-2.0..2.0f64).prop_map(|s| ("exp_scale".to_string(), vec![s])),
        (-3.0..3.0f64).prop_map(|s| ("half_quadratic".to_string(), vec![s])),
        (0.1..10.0f64).prop_map(|g| ("log1p_gain".to_string(), vec![g])),
        (-3.0..3.0f64).prop_map(|s| ("scaled_neg_log".to_string(), vec![s])),
        (-5.0..5.0f64).prop_map(|c| ("constant".to_string(), vec![c])),
    ]
}

/// Maps `u` in [0, 1] to an interior point of the entry's domain.
fn interior(name: &str, params: &[f64], u: f64) -> f64 {
    match name {
        "exp_scale" | "half_quadratic" | "constant" => -5.0 + 10.0 * u,
        "log1p_gain" => -1.0 / params[0] * 0.9 + 20.0 * u,
        _ => 0.05 + 20.0 * u,
    }
}

fn models() -> Vec<DistributionModel> {
    vec![
        gaussian(0.7, 1.3).unwrap(),
        exponential(2.0).unwrap(),
        bernoulli_sum(12, 0.3).unwrap(),
        geometric(0.4).unwrap(),
        shifted_chi_square_sum(3, 0.5).unwrap(),
        sample_mean_sq_error(8, 2.0).unwrap(),
        point_mass(1.5).unwrap(),
        affine_of(&exponential(1.0).unwrap(), 1.0, 5.0).unwrap(),
    ]
}

proptest! {
    #[test]
    fn catalog_tangents_support_the_graph((name, params) in entry(), u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let f = catalog(&name, &params).unwrap();
        let (a, x) = (interior(&name, &params, u), interior(&name, &params, v));
        let fx = f.value(x).unwrap();
        let tangent = f.value(a).unwrap() + f.deriv(a).unwrap() * (x - a);
        let slack = 1e-12 * (1.0 + fx.abs()) + 1e-12 * tangent.abs();
        match f.convexity() {
            Convexity::Convex => prop_assert!(fx >= tangent - slack, "{name}{params:?} a={a} x={x}"),
            Convexity::Concave => prop_assert!(fx <= tangent + slack, "{name}{params:?} a={a} x={x}"),
            _ => {}
        }
    }

    #[test]
    fn tangent_touches_exactly((name, params) in entry(), u in 0.0..1.0f64) {
        let f = catalog(&name, &params).unwrap();
        let a = interior(&name, &params, u);
        prop_assert_eq!(tangent_at(&f, a).unwrap().value(a).unwrap(), f.value(a).unwrap());
    }

    #[test]
    fn affine_composition_collapses(
        c1 in -3.0..3.0f64, b1 in 0.2..3.0f64, c2 in -3.0..3.0f64, b2 in -3.0..3.0f64, u in 0.0..1.0f64,
    ) {
        prop_assume!(b2.abs() > 0.1);
        for base in [gaussian(0.4, 0.8).unwrap(), exponential(1.5).unwrap(), bernoulli_sum(5, 0.4).unwrap()] {
            let nested = affine_of(&affine_of(&base, c1, b1).unwrap(), c2, b2).unwrap();
            let flat = affine_of(&base, c2 + b2 * c1, b2 * b1).unwrap();
            let dom = flat.cgf_domain();
            let (lo, hi) = (dom.lo.max(-3.0), dom.hi.min(3.0));
            let s = lo + (hi - lo) * (0.05 + 0.9 * u);
            let (x, y) = (nested.cgf(s).unwrap(), flat.cgf(s).unwrap());
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{} at {s}: {x} vs {y}", base.name());
        }
    }

    #[test]
    fn jensen_reductions(mu in 0.2..5.0f64, sigma2 in 0.01..2.0f64, t in -2.0..4.0f64, s in 1.0..4.0f64) {
        let model = gaussian(mu, sigma2).unwrap();
        for f in [catalog("neg_log", &[]).unwrap(), catalog("x_log_x", &[]).unwrap(), catalog("power", &[t]).unwrap()] {
            if f.convexity() != Convexity::Convex {
                continue;
            }
            let jensen = f.value(mu).unwrap();
            let tol = 1e-12 * jensen.abs().max(1e-300);
            prop_assert!((product_convex_positive(&f, 1.0, mu).unwrap().value - jensen).abs() <= tol);
            prop_assert!((exp_tilted(&f, &model, 0.0).unwrap().value - jensen).abs() <= tol);
        }
        let m = moment_two_point(1.0, mu, s, 0.0).unwrap().value;
        prop_assert!((m - mu.powf(s)).abs() <= 1e-12 * mu.powf(s));
    }

    #[test]
    fn gaussian_exp_square_ratio(mu in -3.0..3.0f64, sigma2 in 0.001..2.0f64, u in 0.0..0.999f64) {
        let s = u / sigma2;
        let (b, x) = gaussian_exp_square(mu, sigma2, s).unwrap();
        prop_assume!(x.is_finite() && b > 0.0);
        let want = (1.0 - sigma2 * s).sqrt();
        prop_assert!((b / x - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn entropy_bounds_are_ordered(raw in prop::collection::vec(0.0..1.0f64, 1..12), n in 1u64..100_000) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-3);
        let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
        let pmf = PmfTable::from_probs(&probs).unwrap();
        let (b1, b2) = empirical_entropy_lower(&pmf, n).unwrap();
        prop_assert!(b1 >= b2 - 1e-12, "{b1} < {b2}");
        prop_assert!(b1 <= pmf.entropy() + 1e-12);
    }

    #[test]
    fn grid_max_is_sound_and_refinement_helps(c in -4.0..9.0f64, w in 0.1..5.0f64, step in 0.01..0.5f64) {
        let obj = |x: f64| Some(-(x - c).powi(2) / w + (3.0 * x).sin());
        let grid = GridSpec::new(-5.0, 10.0, step).unwrap();
        let plain = grid_max(obj, &grid).unwrap();
        prop_assert_eq!(obj(plain.argmax).unwrap(), plain.max);
        for x in grid.points() {
            prop_assert!(obj(x).unwrap() <= plain.max);
        }
        let refined = grid_max(obj, &grid.with_refinement(Refine::default()).unwrap()).unwrap();
        prop_assert!(refined.max >= plain.max);
        prop_assert_eq!(obj(refined.argmax).unwrap(), refined.max);
        prop_assert!(refined.argmax >= grid.lo() && refined.argmax <= grid.hi());
        prop_assert_eq!(plain, grid_max(obj, &grid).unwrap());
    }

    #[test]
    fn grid_max_2d_is_deterministic(a0 in -1.0..1.0f64, b0 in -1.0..1.0f64) {
        let obj = |a: f64, b: f64| Some(-(a - a0).abs() - (b - b0).abs());
        let g = GridSpec::new(-1.0, 1.0, 0.05).unwrap();
        let first = grid_max_2d(obj, &g, &g).unwrap();
        prop_assert_eq!(obj(first.argmax.0, first.argmax.1).unwrap(), first.max);
        prop_assert_eq!(first, grid_max_2d(obj, &g, &g).unwrap());
    }
}

#[test]
fn cgf_matches_moments_at_origin() {
    for m in models() {
        assert!(m.cgf(0.0).unwrap().abs() <= 1e-10, "{}", m.name());
        assert!(
            (m.cgf_prime(0.0).unwrap() - m.mean()).abs() <= 1e-10,
            "{}",
            m.name()
        );
        assert!(
            (m.cgf_second(0.0).unwrap() - m.variance()).abs() <= 1e-10,
            "{}",
            m.name()
        );
    }
}

#[test]
fn monte_carlo_mgf_within_five_standard_errors() {
    // s is drawn so that 4s stays in the CGF domain and the standard error is itself well estimated
    let mut u = 0.123_456_789f64;
    for m in models() {
        let dom = m.cgf_domain();
        let (lo, hi) = (dom.lo.max(-8.0) / 4.0, dom.hi.min(8.0) / 4.0);
        for i in 0..100u64 {
            u = (u * 9301.0 + 0.49297).fract();
            let s = lo + (hi - lo) * (0.01 + 0.98 * u);
            let est = mc_expectation(&m, |x| (s * x).exp(), 100_000, 1000 + i).unwrap();
            let exact = m.cgf(s).unwrap().exp();
            let dev = (est.value - exact).abs();
            assert!(
                dev <= 5.0 * est.uncertainty + 1e-12 * exact,
                "{} at s = {s}: {} vs {exact} (se {})",
                m.name(),
                est.value,
                est.uncertainty
            );
        }
    }
}

#[test]
fn monte_carlo_is_reproducible() {
    for m in models() {
        let a = mc_expectation(&m, |x| x * x, 50_000, 42).unwrap();
        let b = mc_expectation(&m, |x| x * x, 50_000, 42).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.uncertainty.to_bits(), b.uncertainty.to_bits());
    }
}

#[test]
fn simo_bound_dominates_every_grid_point() {
    let grid = GridSpec::new(0.0, 10.0, 0.001).unwrap();
    for k in [1u64, 7, 40] {
        let full = simo_capacity_lower(k, 1.0, &grid).unwrap();
        assert!(full.value >= full.diagnostic("heuristic").unwrap());
        for i in (0..grid.len() - 1).step_by(613) {
            let (a, b) = (grid.point(i), grid.point(i + 1));
            let pair = simo_capacity_lower(k, 1.0, &GridSpec::new(a, b, b - a).unwrap()).unwrap();
            assert!(full.value >= pair.value, "k = {k}, alpha = {a}");
        }
    }
}
