//! Monte Carlo coverage of the confidence regions.
//!
//! Each replicate draws a dataset from known parameter values, fixes the
//! model parameters to those values and checks feasibility. The fraction of
//! feasible replicates estimates the coverage of the region.

use crate::error::CliError;
use crate::input::{Dataset, ModelKind, RunSpec};
use crate::region::fix_or_reject;
use serde::Serialize;
use statcp::kernel::solve_satisfaction;
use statcp::models::generate;
use statcp::Outcome;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageReport {
    pub replicates: usize,
    pub hits: usize,
    /// Replicates whose search hit a limit before deciding feasibility.
    pub unresolved: usize,
    pub nominal: f64,
    pub coverage: Option<f64>,
    /// Binomial standard error of the coverage at the nominal level.
    pub standard_error: Option<f64>,
    /// `|coverage − nominal|` in standard errors.
    pub deviation: Option<f64>,
}

impl CoverageReport {
    pub fn new(replicates: usize, hits: usize, unresolved: usize, alpha: f64) -> CoverageReport {
        let nominal = 1.0 - alpha;
        let (coverage, se, dev) = if replicates == 0 {
            (None, None, None)
        } else {
            let m = replicates as f64;
            let cov = hits as f64 / m;
            let se = (alpha * nominal / m).sqrt();
            (Some(cov), Some(se), Some((cov - nominal).abs() / se))
        };
        CoverageReport {
            replicates,
            hits,
            unresolved,
            nominal,
            coverage,
            standard_error: se,
            deviation: dev,
        }
    }

    /// Whether the coverage lies within `k` standard errors of nominal.
    pub fn within(&self, k: f64) -> bool {
        self.deviation.is_some_and(|d| d <= k)
    }
}

#[derive(Clone, Debug)]
pub struct CoverageRun {
    /// True parameter values; generator-only values (such as `sigma` for
    /// the known-sigma fit) may be included.
    pub truth: Vec<(String, f64)>,
    pub replicates: usize,
    pub seed: u64,
    /// Series length or number of draws; a per-model default when `None`.
    pub length: Option<usize>,
}

fn truth_of(run: &CoverageRun, name: &str) -> Result<f64, CliError> {
    run.truth
        .iter()
        .find(|(n, _)| n == name)
        .map(|&(_, v)| v)
        .ok_or_else(|| CliError::input(format!("truth must give `{name}`")))
}

fn generator(spec: &RunSpec, run: &CoverageRun) -> Result<Box<dyn Fn(u64) -> Dataset>, CliError> {
    let positive = |v: f64, name: &str| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::input(format!("truth `{name}` must be positive")))
        }
    };
    Ok(match spec.kind {
        ModelKind::Linear | ModelKind::LinearUnknownSigma | ModelKind::LinearKnownSigma => {
            let (a, b) = (truth_of(run, "a")?, truth_of(run, "b")?);
            let sigma = match (truth_of(run, "sigma"), spec.params.known_sigma) {
                (Ok(s), _) => s,
                (Err(_), Some(s)) if spec.kind == ModelKind::LinearKnownSigma => s,
                (Err(e), _) => return Err(e),
            };
            let sigma = positive(sigma, "sigma")?;
            let len = run.length.unwrap_or(20);
            Box::new(move |seed| Dataset::Variates(generate::linear_normal(a, b, sigma, len, seed)))
        }
        ModelKind::Ar1 => {
            let (c, beta) = (truth_of(run, "c")?, truth_of(run, "beta")?);
            let rate = positive(truth_of(run, "lambda")?, "lambda")?;
            let len = run.length.unwrap_or(100);
            Box::new(move |seed| Dataset::Series(generate::ar1_poisson(c, beta, rate, len, seed)))
        }
        ModelKind::Multinomial => {
            let mut probs = Vec::new();
            while let Ok(p) = truth_of(run, &format!("p{}", probs.len() + 1)) {
                probs.push(p);
            }
            if probs.len() < 2 || probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(CliError::input("truth must give proportions p1, p2, ... in [0, 1]"));
            }
            let len = run.length.unwrap_or(100);
            Box::new(move |seed| Dataset::Onehot(generate::multinomial_onehot(&probs, len, seed)))
        }
        other => return Err(CliError::input(format!("no data generator for model `{}`", other.name()))),
    })
}

/// Replicate `r` uses seed `run.seed + r`.
pub fn coverage(spec: &RunSpec, run: &CoverageRun) -> Result<CoverageReport, CliError> {
    let draw = generator(spec, run)?;
    let (mut hits, mut unresolved) = (0, 0);
    for r in 0..run.replicates {
        let data = draw(run.seed.wrapping_add(r as u64));
        let mut built = spec.build(&data)?;
        let names: Vec<String> = built.parameter_names().iter().map(|s| s.to_string()).collect();
        let mut inside = true;
        for name in &names {
            inside &= fix_or_reject(&mut built, name, truth_of(run, name)?)?;
        }
        if !inside {
            continue;
        }
        match solve_satisfaction(&built.model, &spec.search)? {
            Outcome::Feasible(_) | Outcome::ResourceLimit(Some(_), _) => hits += 1,
            Outcome::ResourceLimit(None, _) => unresolved += 1,
            Outcome::Infeasible(_) => {}
        }
    }
    Ok(CoverageReport::new(run.replicates, hits, unresolved, spec.params.alpha))
}
