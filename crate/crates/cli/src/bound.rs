//! `bound <op> key=value ...`: any single operation by name, as JSON.
//!
//! Functions are written `name` or `name:p1:p2`, models `law:p1:p2`
//! (e.g. `gaussian:1:0.5`, `affine:1:5:exponential:2`) and grids
//! `lo:hi:step`, optionally suffixed with `:refine`.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use tangency::bounds::{self, Orientation, PmfTable};
use tangency::distributions::{self as dist, DistributionModel};
use tangency::funcs::{catalog, DifferentiableFunction};
use tangency::{BoundResult, Error, GridSpec, Refine};

pub const OPERATIONS: &[&str] = &[
    "capacity_variance_upper",
    "empirical_entropy_lower",
    "estimation_error_moment_lower",
    "exp_of_convex",
    "exp_snr_capacity_lower",
    "exp_tilted",
    "gap_factor_mu",
    "gaussian_exp_square",
    "guessing_moment_lower",
    "log_expectation_lower",
    "moment_two_point",
    "power_moment_lower",
    "power_moment_lower_at",
    "product_convex_positive",
    "product_exp_composition",
    "product_two_convex",
    "product_two_convex_joint",
    "simo_capacity_lower",
];

/// Why a `bound` invocation failed.
#[derive(Debug)]
pub enum BoundError {
    /// Malformed invocation: unknown operation or key, missing or unparsable value.
    Usage(String),
    /// The operation itself refused the inputs.
    Library(Error),
}

impl From<Error> for BoundError {
    fn from(e: Error) -> Self {
        BoundError::Library(e)
    }
}

impl std::fmt::Display for BoundError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundError::Usage(m) => f.write_str(m),
            BoundError::Library(e) => write!(f, "{e}"),
        }
    }
}

type Res<T> = std::result::Result<T, BoundError>;

fn usage(msg: impl Into<String>) -> BoundError {
    BoundError::Usage(msg.into())
}

struct Args {
    op: String,
    kv: BTreeMap<String, String>,
    used: Vec<String>,
}

impl Args {
    fn raw(&mut self, key: &str) -> Option<String> {
        self.used.push(key.to_string());
        self.kv.get(key).cloned()
    }

    fn req(&mut self, key: &str) -> Res<String> {
        self.raw(key)
            .ok_or_else(|| usage(format!("`{}` needs `{key}=...`", self.op)))
    }

    fn num(&mut self, key: &str) -> Res<f64> {
        let v = self.req(key)?;
        parse_num(key, &v)
    }

    fn num_or(&mut self, key: &str, default: f64) -> Res<f64> {
        match self.raw(key) {
            Some(v) => parse_num(key, &v),
            None => Ok(default),
        }
    }

    fn count(&mut self, key: &str) -> Res<u64> {
        let v = self.req(key)?;
        v.parse()
            .map_err(|_| usage(format!("`{key}` must be a nonnegative integer, got `{v}`")))
    }

    fn func(&mut self, key: &str) -> Res<DifferentiableFunction> {
        let v = self.req(key)?;
        let mut parts = v.split(':');
        let name = parts.next().unwrap_or_default();
        let params = parts
            .map(|p| parse_num(key, p))
            .collect::<Res<Vec<f64>>>()?;
        catalog(name, &params).map_err(|e| usage(e.to_string()))
    }

    fn model(&mut self, key: &str) -> Res<DistributionModel> {
        let v = self.req(key)?;
        parse_model(&v)
    }

    fn grid_or(&mut self, key: &str, default: &str) -> Res<GridSpec> {
        let v = self.raw(key).unwrap_or_else(|| default.to_string());
        parse_grid(key, &v)
    }

    fn orientation(&mut self) -> Res<Orientation> {
        match self.raw("orientation").as_deref() {
            None | Some("convex") => Ok(Orientation::ConvexPair),
            Some("concave") => Ok(Orientation::ConcavePair),
            Some(other) => Err(usage(format!(
                "orientation must be `convex` or `concave`, got `{other}`"
            ))),
        }
    }

    fn finish(&self) -> Res<()> {
        match self.kv.keys().find(|k| !self.used.contains(k)) {
            Some(k) => Err(usage(format!("`{}` does not take `{k}`", self.op))),
            None => Ok(()),
        }
    }
}

fn parse_num(key: &str, v: &str) -> Res<f64> {
    v.trim()
        .parse()
        .map_err(|_| usage(format!("`{key}` must be a number, got `{v}`")))
}

fn parse_grid(key: &str, v: &str) -> Res<GridSpec> {
    let parts: Vec<&str> = v.split(':').collect();
    let refine = match parts.len() {
        3 => false,
        4 if parts[3] == "refine" => true,
        _ => {
            return Err(usage(format!(
                "`{key}` must be lo:hi:step[:refine], got `{v}`"
            )))
        }
    };
    let g = GridSpec::new(
        parse_num(key, parts[0])?,
        parse_num(key, parts[1])?,
        parse_num(key, parts[2])?,
    )
    .map_err(|e| usage(e.to_string()))?;
    if refine {
        g.with_refinement(Refine::default())
            .map_err(|e| usage(e.to_string()))
    } else {
        Ok(g)
    }
}

fn parse_model(v: &str) -> Res<DistributionModel> {
    let parts: Vec<&str> = v.split(':').collect();
    let bad = || usage(format!("cannot read model `{v}`"));
    let num = |i: usize| -> Res<f64> {
        parts
            .get(i)
            .ok_or_else(bad)
            .and_then(|p| parse_num("model", p))
    };
    let int = |i: usize| -> Res<u64> { parts.get(i).and_then(|p| p.parse().ok()).ok_or_else(bad) };
    let arity = |n: usize| {
        if parts.len() == n + 1 {
            Ok(())
        } else {
            Err(bad())
        }
    };
    let m = match parts[0] {
        "gaussian" => arity(2).and_then(|_| Ok(dist::gaussian(num(1)?, num(2)?)?)),
        "exponential" => arity(1).and_then(|_| Ok(dist::exponential(num(1)?)?)),
        "bernoulli_sum" => arity(2).and_then(|_| Ok(dist::bernoulli_sum(int(1)?, num(2)?)?)),
        "geometric" => arity(1).and_then(|_| Ok(dist::geometric(num(1)?)?)),
        "shifted_chi_square_sum" => {
            arity(2).and_then(|_| Ok(dist::shifted_chi_square_sum(int(1)?, num(2)?)?))
        }
        "sample_mean_sq_error" => {
            arity(2).and_then(|_| Ok(dist::sample_mean_sq_error(int(1)?, num(2)?)?))
        }
        "point_mass" => arity(1).and_then(|_| Ok(dist::point_mass(num(1)?)?)),
        "affine" if parts.len() > 3 => {
            let base = parse_model(&parts[3..].join(":"))?;
            Ok(dist::affine_of(&base, num(1)?, num(2)?)?)
        }
        _ => Err(bad()),
    };
    m.map_err(|e| match e {
        BoundError::Library(e) => usage(e.to_string()),
        u => u,
    })
}

fn pairs(list: &[(String, f64)]) -> Value {
    list.iter()
        .map(|(k, v)| (k.clone(), json!(v)))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

pub fn result_json(op: &str, r: &BoundResult) -> Value {
    json!({
        "operation": op,
        "value": r.value,
        "direction": r.direction.to_string(),
        "family": r.family.to_string(),
        "optimizer": pairs(&r.optimizer),
        "validity": r.validity.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "diagnostics": pairs(&r.diagnostics),
        "notes": r.notes,
    })
}

/// Runs `op` with `key=value` arguments and returns the JSON document.
pub fn run(op: &str, params: &[String]) -> Res<Value> {
    let mut kv = BTreeMap::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| usage(format!("expected key=value, got `{p}`")))?;
        if kv.insert(k.to_string(), v.to_string()).is_some() {
            return Err(usage(format!("`{k}` given twice")));
        }
    }
    let mut a = Args {
        op: op.to_string(),
        kv,
        used: Vec::new(),
    };
    const ALPHA: &str = "0:10:0.001";
    let out = match op {
        "product_convex_positive" => {
            let f = a.func("f")?;
            let (m_g, m_xg) = (a.num("m_g")?, a.num("m_xg")?);
            a.finish()?;
            result_json(op, &bounds::product_convex_positive(&f, m_g, m_xg)?)
        }
        "exp_tilted" => {
            let (f, m, s) = (a.func("f")?, a.model("model")?, a.num("s")?);
            a.finish()?;
            result_json(op, &bounds::exp_tilted(&f, &m, s)?)
        }
        "moment_two_point" => {
            let (m_t, m_t1, s, t) = (a.num("m_t")?, a.num("m_t1")?, a.num("s")?, a.num("t")?);
            a.finish()?;
            result_json(op, &bounds::moment_two_point(m_t, m_t1, s, t)?)
        }
        "empirical_entropy_lower" => {
            let probs = a
                .req("probs")?
                .split(',')
                .map(|p| parse_num("probs", p))
                .collect::<Res<Vec<f64>>>()?;
            let n = a.count("n")?;
            a.finish()?;
            let pmf = PmfTable::from_probs(&probs)?;
            let (b1, b2) = bounds::empirical_entropy_lower(&pmf, n)?;
            json!({"operation": op, "b1": b1, "b2": b2, "entropy": pmf.entropy(), "direction": "lower"})
        }
        "guessing_moment_lower" => {
            let (p, s) = (a.num("p")?, a.num("s")?);
            a.finish()?;
            json!({"operation": op, "value": bounds::guessing_moment_lower(p, s)?})
        }
        "exp_of_convex" => {
            let (f, m) = (a.func("f")?, a.model("model")?);
            let g = a.grid_or("grid", "-10:10:0.001")?;
            a.finish()?;
            result_json(op, &bounds::exp_of_convex(&f, &m, &g)?)
        }
        "gaussian_exp_square" => {
            let (mu, sigma2, s) = (a.num("mu")?, a.num("sigma2")?, a.num("s")?);
            a.finish()?;
            let (bound, exact) = bounds::gaussian_exp_square(mu, sigma2, s)?;
            json!({"operation": op, "value": bound, "exact": exact, "direction": "lower"})
        }
        "product_exp_composition" => {
            let (f, g, m) = (a.func("f")?, a.func("g")?, a.model("model")?);
            let grid = a.grid_or("grid", "-10:10:0.001")?;
            a.finish()?;
            result_json(op, &bounds::product_exp_composition(&f, &g, &m, &grid)?)
        }
        "log_expectation_lower" => {
            let m = a.model("model")?;
            let g = a.grid_or("grid", ALPHA)?;
            a.finish()?;
            result_json(op, &bounds::log_expectation_lower(&m, &g)?)
        }
        "simo_capacity_lower" => {
            let (k, sigma2) = (a.count("k")?, a.num_or("sigma2", 1.0)?);
            let g = a.grid_or("grid", ALPHA)?;
            a.finish()?;
            result_json(op, &bounds::simo_capacity_lower(k, sigma2, &g)?)
        }
        "exp_snr_capacity_lower" => {
            let (theta, gain) = (a.num("theta")?, a.num_or("g", 5.0)?);
            let g = a.grid_or("grid", ALPHA)?;
            a.finish()?;
            result_json(op, &bounds::exp_snr_capacity_lower(theta, gain, &g)?)
        }
        "power_moment_lower" => {
            let (m, t) = (a.model("model")?, a.num("t")?);
            let ss = a.grid_or("s_grid", "0.5:10:0.01")?;
            let alphas = a.grid_or("alpha_grid", "0:10:0.01")?;
            a.finish()?;
            result_json(op, &bounds::power_moment_lower(&m, t, &ss, &alphas)?)
        }
        "power_moment_lower_at" => {
            let (m, t, s) = (a.model("model")?, a.num("t")?, a.num("s")?);
            let alphas = a.grid_or("alpha_grid", "0:10:0.01")?;
            a.finish()?;
            result_json(op, &bounds::power_moment_lower_at(&m, t, s, &alphas)?)
        }
        "estimation_error_moment_lower" => {
            let n = a.count("n")?;
            let (sigma2, t, s) = (a.num("sigma2")?, a.num("t")?, a.num("s")?);
            let zeta = a.num_or("zeta", 1.0 / (t + 1.0))?;
            a.finish()?;
            let v = bounds::estimation_error_moment_lower(n, sigma2, t, zeta, s)?;
            json!({"operation": op, "value": v, "direction": "lower", "zeta": zeta})
        }
        "gap_factor_mu" => {
            let t = a.num("t")?;
            let g = a.grid_or("s_grid", "0:10:0.001:refine")?;
            a.finish()?;
            let (mu, s) = bounds::gap_factor_mu(t, &g)?;
            json!({"operation": op, "mu_t": mu, "s_star": s})
        }
        "product_two_convex" => {
            let (f, g) = (a.func("f")?, a.func("g")?);
            let (m1, m2, o) = (a.num("m1")?, a.num("m2")?, a.orientation()?);
            a.finish()?;
            result_json(op, &bounds::product_two_convex(&f, &g, m1, m2, o)?)
        }
        "product_two_convex_joint" => {
            let (f, g) = (a.func("f")?, a.func("g")?);
            let (mx, my, mxy) = (a.num("m_x")?, a.num("m_y")?, a.num("m_xy")?);
            let o = a.orientation()?;
            a.finish()?;
            result_json(
                op,
                &bounds::product_two_convex_joint(&f, &g, mx, my, mxy, o)?,
            )
        }
        "capacity_variance_upper" => {
            let (theta, gain) = (a.num("theta")?, a.num_or("g", 5.0)?);
            let g = a.grid_or("grid", ALPHA)?;
            a.finish()?;
            result_json(op, &bounds::capacity_variance_upper(theta, gain, &g)?)
        }
        other => {
            return Err(usage(format!(
                "unknown operation `{other}`; known: {}",
                OPERATIONS.join(", ")
            )))
        }
    };
    Ok(out)
}
