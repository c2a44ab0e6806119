//! First-order autoregressive processes `x_t = c + β·x_{t−1} + ε_t`, with
//! `x_0 = 0`.

use super::{param, BuiltModel, ModelParams};
use crate::counting::BinStructure;
use crate::kernel::{Expr, Model, ModelError, VarId};
use crate::sct::{post_chi2_gof, post_chi2_independence};

const CONSTANT: (f64, f64) = (0.0, 20.0);
const COEFFICIENT: (f64, f64) = (0.0, 1.0);
const RATE: (f64, f64) = (0.1, 30.0);

fn errors(model: &mut Model, series: &[f64], c: VarId, beta: VarId, tag: &str) -> Vec<Expr> {
    let mut prev = 0.0;
    series
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let e = model.define(&format!("{tag}[{}]", i + 1), x - c - prev * beta);
            prev = x;
            Expr::Var(e)
        })
        .collect()
}

fn check_series(series: &[f64]) -> Result<(), ModelError> {
    if series.len() < 2 || series.iter().any(|x| !x.is_finite()) {
        return Err(ModelError::Invalid(
            "a series needs at least two finite observations".into(),
        ));
    }
    Ok(())
}

/// Unit bins `[k, k+1)` for `k = 0..15`.
pub fn default_bins() -> BinStructure {
    BinStructure::new((0..=15).map(|k| k as f64).collect()).expect("valid bins")
}

/// Goodness of fit of the errors against Poisson noise with rate `lambda`.
/// Target counts use `P(X < b)`, so a unit bin `[k, k+1)` expects
/// `T·P(X = k)`.
pub fn build_ar1(series: &[f64], params: &ModelParams) -> Result<BuiltModel, ModelError> {
    params.check()?;
    check_series(series)?;
    let bins = params.bins.clone().unwrap_or_else(default_bins);
    let n = series.len() as f64;
    let mut model = Model::new();
    let c = param(&mut model, params, "c", CONSTANT)?;
    let beta = param(&mut model, params, "beta", COEFFICIENT)?;
    let lambda = param(&mut model, params, "lambda", RATE)?;
    let es = errors(&mut model, series, c, beta, "e");
    let targets: Vec<Expr> = (0..bins.len())
        .map(|j| {
            let upper = Expr::poisson_below(bins.upper(j), Expr::Var(lambda));
            let lower = Expr::poisson_below(bins.lower(j), Expr::Var(lambda));
            Expr::Var(model.define(&format!("target[{j}]"), n * (upper - lower)))
        })
        .collect();
    let gof = post_chi2_gof(&mut model, &es, &bins, &targets, params.test()?, params.closed_bins)?;
    model.minimize(gof.statistic);
    let mut built = BuiltModel::new(model, gof.statistic, gof.bound);
    built.parameters = vec![("c".into(), c), ("beta".into(), beta), ("lambda".into(), lambda)];
    Ok(built)
}

/// Two processes whose errors must pass a chi-squared test of independence.
pub fn build_ar1_independence(
    first: &[f64],
    second: &[f64],
    params: &ModelParams,
) -> Result<BuiltModel, ModelError> {
    params.check()?;
    check_series(first)?;
    check_series(second)?;
    if first.len() != second.len() {
        return Err(ModelError::Invalid(format!(
            "series must have equal length, got {} and {}",
            first.len(),
            second.len()
        )));
    }
    let rows = params.bins.clone().unwrap_or_else(default_bins);
    let cols = params.col_bins.clone().unwrap_or_else(|| rows.clone());
    let mut model = Model::new();
    let c1 = param(&mut model, params, "c1", CONSTANT)?;
    let b1 = param(&mut model, params, "beta1", COEFFICIENT)?;
    let c2 = param(&mut model, params, "c2", CONSTANT)?;
    let b2 = param(&mut model, params, "beta2", COEFFICIENT)?;
    let e1 = errors(&mut model, first, c1, b1, "e1");
    let e2 = errors(&mut model, second, c2, b2, "e2");
    let pairs: Vec<(Expr, Expr)> = e1.into_iter().zip(e2).collect();
    let ind = post_chi2_independence(&mut model, &pairs, &rows, &cols, params.test()?)?;
    model.minimize(ind.statistic);
    let mut built = BuiltModel::new(model, ind.statistic, ind.bound);
    built.parameters = vec![
        ("c1".into(), c1),
        ("beta1".into(), b1),
        ("c2".into(), c2),
        ("beta2".into(), b2),
    ];
    Ok(built)
}
