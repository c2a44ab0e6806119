//! Linear trend `v_t = a·t + b + e_t` with normal errors.

use super::{param, BuiltModel, DfPolicy, ModelParams};
use crate::dist::DistSpec;
use crate::kernel::{Cmp, Expr, Interval, Model, ModelError, VarId};
use crate::sct::{post_chi2_gof, post_hotelling, HotellingVariant};

const SLOPE: (f64, f64) = (-10.0, 10.0);
const INTERCEPT: (f64, f64) = (-50.0, 50.0);
const SIGMA: (f64, f64) = (0.1, 50.0);

fn errors(model: &mut Model, variates: &[f64], a: VarId, b: VarId) -> Vec<Expr> {
    variates
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let t = (i + 1) as f64;
            Expr::Var(model.define(&format!("e[{}]", i + 1), v - (t * a + b)))
        })
        .collect()
}

fn check_len(variates: &[f64], min: usize) -> Result<(), ModelError> {
    if variates.len() < min {
        return Err(ModelError::Invalid(format!(
            "need at least {min} variates, got {}",
            variates.len()
        )));
    }
    if variates.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::Invalid("variates must be finite".into()));
    }
    Ok(())
}

/// Chi-squared goodness of fit of the errors against a zero-mean normal
/// with unknown standard deviation `sigma`.
pub fn build_linear_fit(variates: &[f64], params: &ModelParams) -> Result<BuiltModel, ModelError> {
    params.check()?;
    check_len(variates, 2)?;
    let bins = params
        .bins
        .as_ref()
        .ok_or_else(|| ModelError::Invalid("the linear fit needs a bin structure".into()))?;
    let n = variates.len() as f64;
    let mut model = Model::new();
    let a = param(&mut model, params, "a", SLOPE)?;
    let b = param(&mut model, params, "b", INTERCEPT)?;
    let sigma = param(&mut model, params, "sigma", SIGMA)?;
    let es = errors(&mut model, variates, a, b);
    let targets: Vec<Expr> = (0..bins.len())
        .map(|j| {
            let upper = (bins.upper(j) / sigma).normal_cdf();
            let lower = (bins.lower(j) / sigma).normal_cdf();
            Expr::Var(model.define(&format!("target[{j}]"), n * (upper - lower)))
        })
        .collect();
    let gof = post_chi2_gof(&mut model, &es, bins, &targets, params.test()?, params.closed_bins)?;
    model.minimize(gof.statistic);
    let mut built = BuiltModel::new(model, gof.statistic, gof.bound);
    built.parameters = vec![("a".into(), a), ("b".into(), b), ("sigma".into(), sigma)];
    Ok(built)
}

/// Which known-form test replaces the goodness of fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AppendixVariant {
    /// Known `sigma`: `s = Σ e_t² / sigma²` against a chi-squared quantile
    /// with `T` (or `T − 3`) degrees of freedom.
    KnownSigma,
    /// Unknown `sigma`: univariate Hotelling `t²` of the errors about zero.
    UnknownSigma,
}

/// Linear fit with a parametric test on the errors instead of binning.
pub fn build_linear_fit_appendix(
    variates: &[f64],
    params: &ModelParams,
    variant: AppendixVariant,
) -> Result<BuiltModel, ModelError> {
    params.check()?;
    check_len(variates, 3)?;
    let t_len = variates.len();
    let mut model = Model::new();
    let a = param(&mut model, params, "a", SLOPE)?;
    let b = param(&mut model, params, "b", INTERCEPT)?;
    let es = errors(&mut model, variates, a, b);
    let mut built = match variant {
        AppendixVariant::KnownSigma => {
            let sigma = params.known_sigma.ok_or_else(|| {
                ModelError::Invalid("the known-sigma fit needs sigma in the parameters".into())
            })?;
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(ModelError::Invalid(format!("sigma must be positive, got {sigma}")));
            }
            let df = match params.df_policy {
                DfPolicy::Nominal => t_len,
                DfPolicy::Fitted if t_len > 3 => t_len - 3,
                DfPolicy::Fitted => {
                    return Err(ModelError::Invalid(
                        "fitted degrees of freedom need more than three variates".into(),
                    ))
                }
            };
            let bound = match params.test()? {
                Some(spec) => Some(DistSpec::chi_squared(df as f64)?.quantile(1.0 - spec.alpha)?),
                None => None,
            };
            let s = model.scoped("hotelling_chi2", |m| {
                let s = m.aux_real("chi2", Interval::NONNEG);
                let ss = Expr::sum(es.iter().map(|e| e.clone().sqr()));
                m.post_rel(s, Cmp::Eq, ss / (sigma * sigma));
                if let Some(q) = bound {
                    m.post_rel(s, Cmp::Le, q);
                }
                s
            });
            BuiltModel::new(model, s, bound)
        }
        AppendixVariant::UnknownSigma => {
            if residual_variance(variates) <= 1e-12 * (1.0 + mean_square(variates)) {
                return Err(ModelError::Invalid(
                    "variates lie on a line: the error variance can vanish and the t² statistic is undefined"
                        .into(),
                ));
            }
            let tuples: Vec<Vec<Expr>> = es.iter().map(|e| vec![e.clone()]).collect();
            let h = post_hotelling(
                &mut model,
                HotellingVariant::T2Sample,
                &tuples,
                &[Expr::Const(0.0)],
                params.test()?,
            )?;
            BuiltModel::new(model, h.statistic, h.bound)
        }
    };
    built.model.minimize(built.statistic);
    built.parameters = vec![("a".into(), a), ("b".into(), b)];
    Ok(built)
}

fn mean_square(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64
}

/// Mean squared residual of the least-squares line through `(t, v_t)`.
fn residual_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let tm = (n + 1.0) / 2.0;
    let vm = v.iter().sum::<f64>() / n;
    let (mut stt, mut stv) = (0.0, 0.0);
    for (i, &y) in v.iter().enumerate() {
        let dt = (i + 1) as f64 - tm;
        stt += dt * dt;
        stv += dt * (y - vm);
    }
    let slope = stv / stt;
    v.iter()
        .enumerate()
        .map(|(i, &y)| {
            let r = y - vm - slope * ((i + 1) as f64 - tm);
            r * r
        })
        .sum::<f64>()
        / n
}
