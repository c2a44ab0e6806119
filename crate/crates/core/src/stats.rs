//! Descriptive-statistic constraints with sample (`n − 1`) denominators.

use crate::kernel::{Cmp, Expr, Interval, Model, ModelError, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatisticKind {
    Mean,
    Variance,
    StdDev,
    StdErr,
    Covariance,
}

impl StatisticKind {
    fn min_len(self) -> usize {
        match self {
            StatisticKind::Mean => 1,
            _ => 2,
        }
    }

    fn nonnegative(self) -> bool {
        !matches!(self, StatisticKind::Mean | StatisticKind::Covariance)
    }
}

fn check(kind: StatisticKind, xs: &[Expr], ys: &[Expr]) -> Result<(), ModelError> {
    if xs.len() < kind.min_len() {
        return Err(ModelError::Invalid(format!(
            "{kind:?} needs at least {} values, got {}",
            kind.min_len(),
            xs.len()
        )));
    }
    match kind {
        StatisticKind::Covariance if ys.len() != xs.len() => Err(ModelError::Invalid(format!(
            "covariance needs equal-length lists, got {} and {}",
            xs.len(),
            ys.len()
        ))),
        StatisticKind::Covariance => Ok(()),
        _ if !ys.is_empty() => Err(ModelError::Invalid(format!(
            "{kind:?} takes a single list"
        ))),
        _ => Ok(()),
    }
}

fn mean_expr(xs: &[Expr]) -> Expr {
    Expr::sum(xs.iter().cloned()) / xs.len() as f64
}

/// Auxiliary mean variable, or the constant mean when every value is known.
fn mean_of(model: &mut Model, xs: &[Expr], name: &str) -> Expr {
    if let Some(vals) = constants(xs) {
        return Expr::Const(sample_mean(&vals));
    }
    Expr::Var(model.define(name, mean_expr(xs)))
}

fn constants(xs: &[Expr]) -> Option<Vec<f64>> {
    xs.iter().map(Expr::as_const).collect()
}

/// Posts `result = kind(xs[, ys])`.
pub fn post_statistic(
    model: &mut Model,
    kind: StatisticKind,
    xs: &[Expr],
    ys: &[Expr],
    result: VarId,
) -> Result<(), ModelError> {
    check(kind, xs, ys)?;
    let n = xs.len() as f64;
    model.scoped(&format!("{kind:?}").to_lowercase(), |model| match kind {
        StatisticKind::Mean => model.post_rel(result, Cmp::Eq, mean_expr(xs)),
        StatisticKind::Variance => {
            let m = mean_of(model, xs, "mean");
            let ss = Expr::sum(xs.iter().map(|x| (x - m.clone()).sqr()));
            model.post_rel(result, Cmp::Eq, ss / (n - 1.0));
        }
        StatisticKind::StdDev => {
            let v = model.aux_real("variance", Interval::NONNEG);
            post_statistic(model, StatisticKind::Variance, xs, ys, v)
                .expect("arguments already checked");
            model.post_rel(Expr::Var(result).sqr(), Cmp::Eq, v);
            model.post_rel(result, Cmp::Ge, 0.0);
        }
        StatisticKind::StdErr => {
            let sd = model.aux_real("stddev", Interval::NONNEG);
            post_statistic(model, StatisticKind::StdDev, xs, ys, sd)
                .expect("arguments already checked");
            model.post_rel(result, Cmp::Eq, sd / Expr::Const(n).sqrt());
        }
        StatisticKind::Covariance => {
            let mx = mean_of(model, xs, "mean_x");
            let my = mean_of(model, ys, "mean_y");
            let sp = Expr::sum(
                xs.iter()
                    .zip(ys)
                    .map(|(x, y)| (x - mx.clone()) * (y - my.clone())),
            );
            model.post_rel(result, Cmp::Eq, sp / (n - 1.0));
        }
    });
    Ok(())
}

/// Fresh auxiliary result variable with `kind(xs[, ys])` posted on it.
pub fn statistic_var(
    model: &mut Model,
    name: &str,
    kind: StatisticKind,
    xs: &[Expr],
    ys: &[Expr],
) -> Result<VarId, ModelError> {
    check(kind, xs, ys)?;
    let dom = if kind.nonnegative() {
        Interval::NONNEG
    } else {
        Interval::ENTIRE
    };
    let r = model.aux_real(name, dom);
    post_statistic(model, kind, xs, ys, r)?;
    Ok(r)
}

pub fn sample_mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (sample_mean(xs), sample_mean(ys));
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (xs.len() as f64 - 1.0)
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    sample_covariance(xs, xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{solve_satisfaction, SearchConfig};

    fn ground(kind: StatisticKind, xs: &[f64], ys: &[f64]) -> Interval {
        let mut m = Model::new();
        let to = |m: &mut Model, v: &[f64], p: &str| -> Vec<Expr> {
            v.iter()
                .enumerate()
                .map(|(i, &x)| {
                    let id = m.real_var(&format!("{p}{i}"), x, x).unwrap();
                    Expr::Var(id)
                })
                .collect()
        };
        let xe = to(&mut m, xs, "x");
        let ye = to(&mut m, ys, "y");
        let r = statistic_var(&mut m, "r", kind, &xe, &ye).unwrap();
        let out = solve_satisfaction(&m, &SearchConfig::default()).unwrap();
        out.solution().expect("feasible").interval(r)
    }

    #[test]
    fn small_examples() {
        assert!(ground(StatisticKind::Mean, &[1.0, 2.0, 3.0], &[]).contains(2.0));
        assert!(ground(StatisticKind::Variance, &[1.0, 2.0, 3.0], &[]).contains(1.0));
        assert!(ground(StatisticKind::StdDev, &[1.0, 2.0, 3.0], &[]).contains(1.0));
        let se = ground(StatisticKind::StdErr, &[1.0, 2.0, 3.0], &[]);
        assert!((se.mid() - 1.0 / 3f64.sqrt()).abs() < 1e-9);
        let cov = ground(StatisticKind::Covariance, &[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]);
        assert!(cov.contains(-1.0));
    }

    #[test]
    fn too_few_values() {
        let mut m = Model::new();
        let x = Expr::Var(m.real_var("x", 0.0, 1.0).unwrap());
        assert!(statistic_var(&mut m, "v", StatisticKind::Variance, &[x.clone()], &[]).is_err());
        assert!(statistic_var(&mut m, "c", StatisticKind::Covariance, &[x.clone(), x], &[]).is_err());
    }
}
