//! Simultaneous confidence intervals for multinomial proportions.

use super::{BuiltModel, ModelParams};
use crate::dist::DistSpec;
use crate::kernel::{Cmp, Expr, Model, ModelError};
use crate::matrix::MatrixVar;
use crate::sct::{post_hotelling, HotellingVariant};

/// How the covariance matrix of the one-hot observations is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovarianceSource {
    /// `σ_jj = p_j(1 − p_j)`, `σ_ij = −p_i·p_j`, as functions of the
    /// proportions; chi-squared bound with `k − 1` degrees of freedom.
    Known,
    /// Sample covariance of the observations; Hotelling `T²` bound.
    Sample,
}

const PROPORTION: (f64, f64) = (1e-6, 1.0 - 1e-6);

fn cell_counts(onehot: &[Vec<u8>]) -> Result<Vec<u64>, ModelError> {
    let k = onehot.first().map_or(0, Vec::len);
    if k < 2 {
        return Err(ModelError::Invalid("need at least two categories".into()));
    }
    let mut counts = vec![0u64; k];
    for (r, row) in onehot.iter().enumerate() {
        if row.len() != k || row.iter().any(|&x| x > 1) || row.iter().map(|&x| x as u32).sum::<u32>() != 1 {
            return Err(ModelError::Invalid(format!(
                "row {} is not a one-hot vector of length {k}",
                r + 1
            )));
        }
        counts[row.iter().position(|&x| x == 1).unwrap()] += 1;
    }
    Ok(counts)
}

/// Hotelling-type confidence region for the event probabilities of the
/// one-hot observations `onehot` (one row per trial). The last category is
/// dropped from the statistic to keep the covariance matrix nonsingular and
/// recovered through `Σ p_j = 1`.
pub fn build_multinomial_ci(
    onehot: &[Vec<u8>],
    params: &ModelParams,
    source: CovarianceSource,
) -> Result<BuiltModel, ModelError> {
    params.check()?;
    let counts = cell_counts(onehot)?;
    let k = counts.len();
    let kept = k - 1;
    let mut model = Model::new();
    let mut parameters = Vec::with_capacity(k);
    for j in 0..k {
        let name = format!("p{}", j + 1);
        let v = super::param(&mut model, params, &name, PROPORTION)?;
        parameters.push((name, v));
    }
    let ps: Vec<Expr> = parameters.iter().map(|&(_, v)| Expr::Var(v)).collect();
    model.post_rel(Expr::sum(ps.iter().cloned()), Cmp::Eq, 1.0);
    let tuples: Vec<Vec<Expr>> = onehot
        .iter()
        .map(|row| row[..kept].iter().map(|&x| Expr::Const(x as f64)).collect())
        .collect();
    let variant = match source {
        CovarianceSource::Known => {
            let mut entries = Vec::with_capacity(kept * kept);
            for i in 0..kept {
                for j in 0..kept {
                    entries.push(if i == j {
                        ps[i].clone() * (1.0 - ps[i].clone())
                    } else {
                        -(ps[i].clone() * ps[j].clone())
                    });
                }
            }
            HotellingVariant::Chi2Known(MatrixVar::new(kept, entries)?)
        }
        CovarianceSource::Sample => HotellingVariant::T2Sample,
    };
    let h = post_hotelling(&mut model, variant, &tuples, &ps[..kept], params.test()?)?;
    if source == CovarianceSource::Known {
        // For multinomial covariance the quadratic form equals Pearson's
        // statistic over all categories; posting it as an implied constraint
        // bounds each proportion directly.
        let n = onehot.len() as f64;
        let pearson = Expr::sum(counts.iter().zip(&ps).map(|(&c, p)| {
            let diff = c as f64 / n - p.clone();
            n * diff.sqr() / p.clone()
        }));
        model.scoped("pearson", |m| m.post_rel(pearson, Cmp::Eq, Expr::Var(h.statistic)));
    }
    model.minimize(h.statistic);
    let mut built = BuiltModel::new(model, h.statistic, h.bound);
    if source == CovarianceSource::Sample && counts.contains(&0) {
        built.diagnostics.push(format!(
            "cell counts {counts:?} include a zero: the sample covariance matrix is singular and the model is infeasible"
        ));
    }
    built.parameters = parameters;
    Ok(built)
}

/// Closed-form simultaneous intervals: for each category, the roots of
/// `(N + Q)p² − (2c + Q)p + c²/N = 0` with `Q` the chi-squared quantile on
/// `k − 1` degrees of freedom, clipped to `[0, 1]`.
pub fn quesenberry_hurst_ci(counts: &[u64], alpha: f64) -> Result<Vec<(f64, f64)>, ModelError> {
    if counts.len() < 2 {
        return Err(ModelError::Invalid("need at least two categories".into()));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(ModelError::Invalid("counts sum to zero".into()));
    }
    let n = total as f64;
    let q = DistSpec::chi_squared((counts.len() - 1) as f64)?.quantile(1.0 - alpha)?;
    Ok(counts
        .iter()
        .map(|&c| {
            let c = c as f64;
            let disc = q * (q + 4.0 * c * (1.0 - c / n));
            let root = disc.max(0.0).sqrt();
            let denom = 2.0 * (n + q);
            let lo = (2.0 * c + q - root) / denom;
            let hi = (2.0 * c + q + root) / denom;
            (lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0))
        })
        .collect())
}
