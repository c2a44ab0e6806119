//! Statistical constraints: hypothesis tests whose feasible set is the set
//! of assignments the test fails to reject.
//!
//! Each constraint has a statistic form, which only defines the statistic
//! variable, and a test form, which also bounds it by a quantile of the
//! statistic's null distribution. Quantiles are computed when the
//! constraint is posted; propagation only ever sees constants.

use crate::counting::{count_vars, post_bin_counts, post_contingency, BinStructure, ContingencyVars};
use crate::dist::DistSpec;
use crate::kernel::{Cmp, Expr, Interval, Model, ModelError, VarId};
use crate::matrix::{post_matrix_inversion, MatrixVar, MAX_DIM};
use crate::stats::{statistic_var, StatisticKind};

/// Smallest admissible target count in a goodness-of-fit test.
pub const MIN_TARGET: f64 = 1e-6;

/// Significance level and the relation tested.
///
/// For mean and variance tests the tail reads as the null hypothesis:
/// `Eq` is two-sided, `Le` tests "parameter ≤ reference", `Ge` tests
/// "parameter ≥ reference" and `Ne` accepts exactly what the two-sided test
/// rejects. Chi-squared and Hotelling tests are upper-tailed and ignore it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestSpec {
    pub alpha: f64,
    pub tail: Cmp,
}

impl TestSpec {
    pub fn new(alpha: f64, tail: Cmp) -> Result<TestSpec, ModelError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ModelError::Invalid(format!(
                "significance level must lie in (0, 1), got {alpha}"
            )));
        }
        if matches!(tail, Cmp::Lt | Cmp::Gt) {
            return Err(ModelError::Invalid(
                "test tails are =, ≠, ≤ or ≥".into(),
            ));
        }
        Ok(TestSpec { alpha, tail })
    }

    pub fn two_sided(alpha: f64) -> Result<TestSpec, ModelError> {
        TestSpec::new(alpha, Cmp::Eq)
    }
}

/// Variables created by [`post_t_test`].
#[derive(Clone, Debug)]
pub struct TTestVars {
    pub mean: VarId,
    pub std_err: VarId,
    /// Critical value of the t distribution used for the band.
    pub critical: f64,
}

/// One-sample t-test of the mean of `xs` against `mu`.
pub fn post_t_test(
    model: &mut Model,
    xs: &[Expr],
    mu: Expr,
    spec: TestSpec,
) -> Result<TTestVars, ModelError> {
    if xs.len() < 2 {
        return Err(ModelError::Invalid("the t-test needs at least two values".into()));
    }
    let t = DistSpec::student_t(xs.len() as f64 - 1.0)?;
    model.scoped("t_test", |model| {
        let mean = statistic_var(model, "mean", StatisticKind::Mean, xs, &[])?;
        let std_err = statistic_var(model, "std_err", StatisticKind::StdErr, xs, &[])?;
        let degenerate = xs
            .iter()
            .map(Expr::as_const)
            .collect::<Option<Vec<f64>>>()
            .is_some_and(|v| v.iter().all(|&x| x == v[0]));
        let critical = match spec.tail {
            Cmp::Eq | Cmp::Ne => t.quantile(1.0 - spec.alpha / 2.0)?,
            _ => t.quantile(1.0 - spec.alpha)?,
        };
        let half = critical * std_err;
        match spec.tail {
            Cmp::Eq if degenerate => model.post_rel(mu, Cmp::Eq, mean),
            Cmp::Eq => {
                model.post_rel(mu.clone(), Cmp::Ge, mean - half.clone());
                model.post_rel(mu, Cmp::Le, mean + half);
            }
            Cmp::Le => model.post_rel(mu, Cmp::Ge, mean - half),
            Cmp::Ge => model.post_rel(mu, Cmp::Le, mean + half),
            _ => model.post_rel((mu - mean).sqr(), Cmp::Ge, half.sqr()),
        }
        Ok(TTestVars {
            mean,
            std_err,
            critical,
        })
    })
}

/// Variables created by [`post_chi2_gof`].
#[derive(Clone, Debug)]
pub struct GoodnessOfFitVars {
    pub statistic: VarId,
    pub counts: Vec<VarId>,
    /// Upper quantile bounding the statistic in the test form.
    pub bound: Option<f64>,
}

/// Pearson goodness of fit of the bin counts of `xs` against `targets`.
///
/// `closed` forces every value into a bin; otherwise values outside the
/// structure are left uncounted.
pub fn post_chi2_gof(
    model: &mut Model,
    xs: &[Expr],
    bins: &BinStructure,
    targets: &[Expr],
    spec: Option<TestSpec>,
    closed: bool,
) -> Result<GoodnessOfFitVars, ModelError> {
    let m = bins.len();
    if targets.len() != m {
        return Err(ModelError::Invalid(format!(
            "{m} bins but {} target counts",
            targets.len()
        )));
    }
    let bound = match spec {
        Some(spec) if m >= 2 => Some(DistSpec::chi_squared((m - 1) as f64)?.quantile(1.0 - spec.alpha)?),
        Some(_) => {
            return Err(ModelError::Invalid(
                "the goodness-of-fit test needs at least two bins".into(),
            ))
        }
        None => None,
    };
    let counts = count_vars(model, "count", m, xs.len());
    post_bin_counts(model, xs, bins, &counts, closed)?;
    let statistic = model.scoped("chi2_gof", |model| {
        for t in targets {
            model.post_rel(t.clone(), Cmp::Ge, MIN_TARGET);
        }
        let s = model.aux_real("chi2", Interval::NONNEG);
        let terms = counts
            .iter()
            .zip(targets)
            .map(|(&c, t)| Expr::chi_term(Expr::Var(c), t.clone()));
        model.post_rel(s, Cmp::Eq, Expr::sum(terms));
        if let Some(q) = bound {
            model.post_rel(s, Cmp::Le, q);
        }
        s
    });
    Ok(GoodnessOfFitVars {
        statistic,
        counts,
        bound,
    })
}

/// Variables created by [`post_chi2_independence`].
#[derive(Clone, Debug)]
pub struct IndependenceVars {
    pub statistic: VarId,
    pub table: ContingencyVars,
    /// `expected[i][j] = row_i · col_j / total`.
    pub expected: Vec<Vec<VarId>>,
    pub bound: Option<f64>,
}

/// Pearson test of independence on the contingency table of `pairs`.
pub fn post_chi2_independence(
    model: &mut Model,
    pairs: &[(Expr, Expr)],
    row_bins: &BinStructure,
    col_bins: &BinStructure,
    spec: Option<TestSpec>,
) -> Result<IndependenceVars, ModelError> {
    if pairs.is_empty() {
        return Err(ModelError::Invalid("the independence test needs at least one pair".into()));
    }
    let (rows, cols) = (row_bins.len(), col_bins.len());
    let bound = match spec {
        Some(spec) if rows >= 2 && cols >= 2 => {
            let df = ((rows - 1) * (cols - 1)) as f64;
            Some(DistSpec::chi_squared(df)?.quantile(1.0 - spec.alpha)?)
        }
        Some(_) => {
            return Err(ModelError::Invalid(
                "the independence test needs at least two bins per axis".into(),
            ))
        }
        None => None,
    };
    let n = pairs.len() as f64;
    let table = post_contingency(model, pairs, row_bins, col_bins);
    let (statistic, expected) = model.scoped("chi2_independence", |model| {
        let total = model.aux_real("total", Interval::new(0.0, n));
        model.post_rel(
            total,
            Cmp::Eq,
            Expr::sum(table.row_totals.iter().map(|&h| Expr::Var(h))),
        );
        let mut expected = Vec::with_capacity(rows);
        let mut terms = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            let mut row = Vec::with_capacity(cols);
            for j in 0..cols {
                let e = model.aux_real(&format!("expected[{i}][{j}]"), Interval::new(0.0, n));
                let (h, w) = (table.row_totals[i], table.col_totals[j]);
                model.post_rel(e * total, Cmp::Eq, h * w);
                terms.push(Expr::chi_term(Expr::Var(table.cells[i][j]), Expr::Var(e)));
                row.push(e);
            }
            expected.push(row);
        }
        let s = model.aux_real("chi2", Interval::NONNEG);
        model.post_rel(s, Cmp::Eq, Expr::sum(terms));
        if let Some(q) = bound {
            model.post_rel(s, Cmp::Le, q);
        }
        (s, expected)
    });
    Ok(IndependenceVars {
        statistic,
        table,
        expected,
        bound,
    })
}

/// Variables created by [`post_f_ratio`].
#[derive(Clone, Debug)]
pub struct FRatioVars {
    pub statistic: VarId,
    pub var1: VarId,
    pub var2: VarId,
    /// Admissible range of the statistic in the test form.
    pub bounds: Option<Interval>,
}

/// Fisher's variance ratio `var(x1) / var(x2)`.
///
/// Tails: `Eq` is the two-sided test, `Le` tests against the alternative
/// `var1 > var2` (upper bound only), `Ge` against `var1 < var2` (lower bound
/// only).
pub fn post_f_ratio(
    model: &mut Model,
    x1: &[Expr],
    x2: &[Expr],
    spec: Option<TestSpec>,
) -> Result<FRatioVars, ModelError> {
    if x1.len() < 2 || x2.len() < 2 {
        return Err(ModelError::Invalid("the F test needs two samples of size ≥ 2".into()));
    }
    let bounds = match spec {
        None => None,
        Some(spec) => Some(f_bounds(
            (x1.len() - 1) as f64,
            (x2.len() - 1) as f64,
            spec,
        )?),
    };
    model.scoped("f_ratio", |model| {
        let var1 = statistic_var(model, "var1", StatisticKind::Variance, x1, &[])?;
        let var2 = statistic_var(model, "var2", StatisticKind::Variance, x2, &[])?;
        let s = model.aux_real("f", Interval::NONNEG);
        model.post_rel(s, Cmp::Eq, var1 / var2);
        model.post_rel(s * var2, Cmp::Eq, var1);
        if let Some(b) = bounds {
            post_range(model, s, b);
        }
        Ok(FRatioVars {
            statistic: s,
            var1,
            var2,
            bounds,
        })
    })
}

/// Acceptance range of an F statistic with the given degrees of freedom.
pub fn f_bounds(df1: f64, df2: f64, spec: TestSpec) -> Result<Interval, ModelError> {
    let f = DistSpec::fisher_f(df1, df2)?;
    Ok(match spec.tail {
        Cmp::Eq => Interval::new(
            f.quantile(spec.alpha / 2.0)?,
            f.quantile(1.0 - spec.alpha / 2.0)?,
        ),
        Cmp::Le => Interval::new(0.0, f.quantile(1.0 - spec.alpha)?),
        Cmp::Ge => Interval::new(f.quantile(spec.alpha)?, f64::INFINITY),
        _ => {
            return Err(ModelError::Invalid(
                "the F test supports the =, ≤ and ≥ tails".into(),
            ))
        }
    })
}

fn post_range(model: &mut Model, v: VarId, range: Interval) {
    if range.lo() > 0.0 {
        model.post_rel(v, Cmp::Ge, range.lo());
    }
    if range.hi().is_finite() {
        model.post_rel(v, Cmp::Le, range.hi());
    }
}

/// Covariance source for [`post_hotelling`].
#[derive(Clone, Debug)]
pub enum HotellingVariant {
    /// Known (possibly variable) covariance matrix; the statistic is
    /// compared with a chi-squared quantile on `p` degrees of freedom.
    Chi2Known(MatrixVar),
    /// Sample covariance; the statistic is compared with Hotelling's
    /// `T²(p, n − 1)` quantile.
    T2Sample,
}

/// Variables created by [`post_hotelling`].
#[derive(Clone, Debug)]
pub struct HotellingVars {
    pub statistic: VarId,
    pub means: Vec<VarId>,
    pub covariance: MatrixVar,
    pub inverse: MatrixVar,
    pub bound: Option<f64>,
}

/// `s = n (x̄ − μ)' Σ⁻¹ (x̄ − μ)` over `n` tuples of dimension `p`.
pub fn post_hotelling(
    model: &mut Model,
    variant: HotellingVariant,
    tuples: &[Vec<Expr>],
    mu: &[Expr],
    spec: Option<TestSpec>,
) -> Result<HotellingVars, ModelError> {
    let n = tuples.len();
    let p = mu.len();
    if p == 0 || p > MAX_DIM {
        return Err(ModelError::Invalid(format!(
            "Hotelling dimension {p} outside 1..={MAX_DIM}"
        )));
    }
    if tuples.iter().any(|t| t.len() != p) {
        return Err(ModelError::Invalid(format!(
            "every tuple must have {p} components"
        )));
    }
    let min_n = match variant {
        HotellingVariant::T2Sample => p + 1,
        HotellingVariant::Chi2Known(_) => 1,
    };
    if n < min_n {
        return Err(ModelError::Invalid(format!(
            "Hotelling statistic needs at least {min_n} tuples, got {n}"
        )));
    }
    let bound = match (&variant, spec) {
        (_, None) => None,
        (HotellingVariant::Chi2Known(_), Some(spec)) => {
            Some(DistSpec::chi_squared(p as f64)?.quantile(1.0 - spec.alpha)?)
        }
        (HotellingVariant::T2Sample, Some(spec)) => {
            Some(DistSpec::hotelling_t2(p as u32, (n - 1) as u32)?.quantile(1.0 - spec.alpha)?)
        }
    };
    let columns: Vec<Vec<Expr>> = (0..p)
        .map(|i| tuples.iter().map(|t| t[i].clone()).collect())
        .collect();
    model.scoped("hotelling", |model| {
        let means = columns
            .iter()
            .enumerate()
            .map(|(i, col)| statistic_var(model, &format!("mean[{i}]"), StatisticKind::Mean, col, &[]))
            .collect::<Result<Vec<_>, _>>()?;
        let covariance = match variant {
            HotellingVariant::Chi2Known(sigma) => {
                if sigma.dim() != p {
                    return Err(ModelError::Invalid(format!(
                        "covariance matrix is {0}×{0}, expected {p}×{p}",
                        sigma.dim()
                    )));
                }
                sigma
            }
            HotellingVariant::T2Sample => {
                let mut entries = vec![Expr::Const(0.0); p * p];
                for i in 0..p {
                    for j in i..p {
                        let v = statistic_var(
                            model,
                            &format!("cov[{i}][{j}]"),
                            StatisticKind::Covariance,
                            &columns[i],
                            &columns[j],
                        )?;
                        entries[i * p + j] = Expr::Var(v);
                        entries[j * p + i] = Expr::Var(v);
                    }
                }
                MatrixVar::new(p, entries)?
            }
        };
        let inverse = MatrixVar::fresh(model, "inv", p);
        post_matrix_inversion(model, &covariance, &inverse)?;
        let dev: Vec<Expr> = means
            .iter()
            .zip(mu)
            .map(|(&m, mu)| m - mu.clone())
            .collect();
        let mut terms = Vec::with_capacity(p * (p + 1) / 2);
        for i in 0..p {
            terms.push(inverse.get(i, i).clone() * dev[i].clone().sqr());
            for j in i + 1..p {
                terms.push(2.0 * (inverse.get(i, j).clone() * (dev[i].clone() * dev[j].clone())));
            }
        }
        let s = model.aux_real("t2", Interval::NONNEG);
        model.post_rel(s, Cmp::Eq, n as f64 * Expr::sum(terms));
        if let Some(q) = bound {
            model.post_rel(s, Cmp::Le, q);
        }
        Ok(HotellingVars {
            statistic: s,
            means,
            covariance,
            inverse,
            bound,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(TestSpec::new(0.0, Cmp::Eq).is_err());
        assert!(TestSpec::new(0.05, Cmp::Lt).is_err());
        assert!(TestSpec::two_sided(0.05).is_ok());
    }

    #[test]
    fn f_tails() {
        let two = f_bounds(2.0, 15.0, TestSpec::two_sided(0.1).unwrap()).unwrap();
        let upper = f_bounds(2.0, 15.0, TestSpec::new(0.05, Cmp::Le).unwrap()).unwrap();
        assert!((two.hi() - upper.hi()).abs() < 1e-9);
        assert!((upper.hi() - 3.6823).abs() < 1e-3);
        assert!(f_bounds(2.0, 15.0, TestSpec::new(0.05, Cmp::Ne).unwrap()).is_err());
    }
}
