//! Comparing group means: one-way analysis of variance and Hotelling's
//! `t²` on the vector of group means.

use super::{BuiltModel, ModelParams};
use crate::kernel::{Cmp, Expr, Model, ModelError};
use crate::sct::{f_bounds, post_hotelling, HotellingVariant, TestSpec};
use crate::stats::{sample_variance, statistic_var, StatisticKind};

fn check_groups(groups: &[Vec<f64>], min_groups: usize) -> Result<usize, ModelError> {
    if groups.len() < min_groups {
        return Err(ModelError::Invalid(format!(
            "need at least {min_groups} groups, got {}",
            groups.len()
        )));
    }
    let n = groups[0].len();
    if groups.iter().any(|g| g.len() != n) {
        return Err(ModelError::Invalid("groups must all have the same size".into()));
    }
    if n < 2 {
        return Err(ModelError::Invalid("each group needs at least two values".into()));
    }
    if groups.iter().flatten().any(|x| !x.is_finite()) {
        return Err(ModelError::Invalid("group values must be finite".into()));
    }
    Ok(n)
}

fn constants(values: &[f64]) -> Vec<Expr> {
    values.iter().map(|&v| Expr::Const(v)).collect()
}

/// One-way ANOVA: the between-group mean square `n·var(group means)` over
/// the mean within-group variance, bounded by the `F(m − 1, m(n − 1))`
/// quantile. Infeasibility means the equal-means hypothesis is rejected.
pub fn build_anova(groups: &[Vec<f64>], params: &ModelParams) -> Result<BuiltModel, ModelError> {
    params.check()?;
    let n = check_groups(groups, 2)?;
    let m = groups.len();
    if groups.iter().all(|g| sample_variance(g) == 0.0) {
        return Err(ModelError::Invalid(
            "every group has zero variance: the F ratio is undefined".into(),
        ));
    }
    let bound = if params.statistic_only {
        None
    } else {
        let spec = TestSpec::new(params.alpha, Cmp::Le)?;
        Some(f_bounds((m - 1) as f64, (m * (n - 1)) as f64, spec)?.hi())
    };
    let mut model = Model::new();
    let mut named = Vec::new();
    let (f, between, within) = model.scoped("anova", |model| -> Result<_, ModelError> {
        let mut means = Vec::with_capacity(m);
        let mut variances = Vec::with_capacity(m);
        for (i, g) in groups.iter().enumerate() {
            let data = constants(g);
            let mean = statistic_var(model, &format!("group_mean[{}]", i + 1), StatisticKind::Mean, &data, &[])?;
            named.push((format!("group_mean{}", i + 1), mean));
            means.push(Expr::Var(mean));
            let var = statistic_var(model, &format!("group_var[{}]", i + 1), StatisticKind::Variance, &data, &[])?;
            variances.push(Expr::Var(var));
        }
        let spread = statistic_var(model, "var_of_means", StatisticKind::Variance, &means, &[])?;
        let between = model.define("mean_sq_between", n as f64 * spread);
        let within = statistic_var(model, "mean_sq_within", StatisticKind::Mean, &variances, &[])?;
        let f = model.define("f_ratio", between / within);
        if let Some(q) = bound {
            model.post_rel(f, Cmp::Le, q);
        }
        Ok((f, between, within))
    })?;
    named.push(("mean_sq_between".into(), between));
    named.push(("mean_sq_within".into(), within));
    model.minimize(f);
    let mut built = BuiltModel::new(model, f, bound);
    built.named = named;
    Ok(built)
}

/// Hotelling `t²` on the `m`-vector of group means, treating the `k`-th
/// value of every group as one `m`-dimensional observation.
pub fn build_multivariate_mean(
    groups: &[Vec<f64>],
    params: &ModelParams,
) -> Result<BuiltModel, ModelError> {
    params.check()?;
    let n = check_groups(groups, 1)?;
    let m = groups.len();
    if n < m + 1 {
        return Err(ModelError::Invalid(format!(
            "{m} groups need at least {} values each, got {n}",
            m + 1
        )));
    }
    let lo = groups.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi = groups.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = (hi - lo).max(1.0);
    let default = (lo - 3.0 * range, hi + 3.0 * range);
    let mut model = Model::new();
    let mut parameters = Vec::with_capacity(m);
    for i in 0..m {
        let name = format!("mu{}", i + 1);
        let v = super::param(&mut model, params, &name, default)?;
        parameters.push((name, v));
    }
    let tuples: Vec<Vec<Expr>> = (0..n)
        .map(|k| groups.iter().map(|g| Expr::Const(g[k])).collect())
        .collect();
    let mu: Vec<Expr> = parameters.iter().map(|&(_, v)| Expr::Var(v)).collect();
    let h = post_hotelling(&mut model, HotellingVariant::T2Sample, &tuples, &mu, params.test()?)?;
    model.minimize(h.statistic);
    let mut built = BuiltModel::new(model, h.statistic, h.bound);
    built.parameters = parameters;
    built.named = h
        .means
        .iter()
        .enumerate()
        .map(|(i, &v)| (format!("sample_mean{}", i + 1), v))
        .collect();
    Ok(built)
}
