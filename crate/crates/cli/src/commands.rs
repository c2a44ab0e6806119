//! The `fit` and `ci` commands.

use crate::error::{CliError, Status};
use crate::input::{Dataset, RunSpec};
use serde::Serialize;
use statcp::kernel::{optimize, Direction};
use statcp::models::BuiltModel;
use statcp::{Outcome, Solution};

#[derive(Clone, Debug, Serialize)]
pub struct ParamValue {
    pub name: String,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub model: String,
    pub status: Status,
    pub objective: Option<String>,
    /// Bounds on the optimal objective value.
    pub objective_bounds: Option<[f64; 2]>,
    pub parameters: Vec<ParamValue>,
    pub statistic: Option<f64>,
    /// Quantile the statistic is tested against.
    pub bound: Option<f64>,
    pub diagnostics: Vec<String>,
    pub nodes: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CiReport {
    pub model: String,
    pub parameter: String,
    pub status: Status,
    /// Proven outer bounds of the interval.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Extreme values attained by solutions that were found.
    pub attained: Option<[f64; 2]>,
    pub objective_tolerance: f64,
    pub diagnostics: Vec<String>,
    pub nodes: u64,
}

pub(crate) fn status_of(out: &Outcome) -> Status {
    match out {
        Outcome::Feasible(_) => Status::Feasible,
        Outcome::Infeasible(_) => Status::Infeasible,
        Outcome::ResourceLimit(..) => Status::ResourceLimit,
    }
}

fn parameters(built: &BuiltModel, sol: &Solution) -> Vec<ParamValue> {
    built
        .parameters
        .iter()
        .map(|(name, v)| {
            let iv = sol.interval(*v);
            ParamValue {
                name: name.clone(),
                value: sol.value(*v),
                lo: iv.lo(),
                hi: iv.hi(),
            }
        })
        .collect()
}

/// Optimises the model (by default `min s`) and reports the best solution.
pub fn fit(spec: &RunSpec, data: &Dataset) -> Result<FitReport, CliError> {
    let mut built = spec.build(data)?;
    let (dir, name) = spec
        .objective
        .clone()
        .unwrap_or((Direction::Minimize, "s".to_string()));
    built.set_objective(dir, &name)?;
    let out = optimize(&built.model, &spec.search)?;
    let sol = out.solution();
    Ok(FitReport {
        model: spec.kind.name(),
        status: status_of(&out),
        objective: Some(format!("{}:{name}", if dir == Direction::Minimize { "min" } else { "max" })),
        objective_bounds: sol.and_then(|s| s.objective).map(|o| [o.lo(), o.hi()]),
        parameters: sol.map(|s| parameters(&built, s)).unwrap_or_default(),
        statistic: sol.map(|s| s.value(built.statistic)),
        bound: built.bound,
        diagnostics: built.diagnostics.clone(),
        nodes: out.stats().nodes,
    })
}

/// Minimises and maximises `target` over the feasible region.
pub fn ci(spec: &RunSpec, data: &Dataset, target: &str) -> Result<CiReport, CliError> {
    let built = spec.build(data)?;
    if built.var(target).is_none() {
        return Err(CliError::input(format!("model `{}` has no variable `{target}`", spec.kind.name())));
    }
    let mut ends = Vec::with_capacity(2);
    for dir in [Direction::Minimize, Direction::Maximize] {
        let mut b = built.clone();
        b.set_objective(dir, target)?;
        ends.push(optimize(&b.model, &spec.search)?);
    }
    let status = status_of(&ends[0]).worst(status_of(&ends[1]));
    let objective = |k: usize| ends[k].solution().and_then(|s| s.objective);
    let (lo, hi) = (objective(0), objective(1));
    let feasible = status != Status::Infeasible;
    Ok(CiReport {
        model: spec.kind.name(),
        parameter: target.to_string(),
        status,
        lower: lo.filter(|_| feasible).map(|o| o.lo()),
        upper: hi.filter(|_| feasible).map(|o| o.hi()),
        attained: match (lo, hi) {
            (Some(l), Some(h)) if feasible => Some([l.hi(), h.lo()]),
            _ => None,
        },
        objective_tolerance: spec.search.obj_tol,
        diagnostics: built.diagnostics.clone(),
        nodes: ends.iter().map(|o| o.stats().nodes).sum(),
    })
}
