//! Ready-made declarative-statistics models.
//!
//! Each builder turns a dataset and a [`ModelParams`] into a [`BuiltModel`]:
//! a kernel model whose feasible region is a confidence region for the
//! named parameters, with `min s` as the default objective. Objectives,
//! fixings and extra equalities can be changed through the named-variable
//! helpers before solving.

mod anova;
mod ar1;
pub mod data;
pub mod generate;
mod linear;
mod multinomial;

pub use anova::{build_anova, build_multivariate_mean};
pub use ar1::{build_ar1, build_ar1_independence};
pub use linear::{build_linear_fit, build_linear_fit_appendix, AppendixVariant};
pub use multinomial::{build_multinomial_ci, quesenberry_hurst_ci, CovarianceSource};

use crate::counting::BinStructure;
use crate::kernel::{Cmp, Direction, Model, ModelError, VarId};
use std::collections::BTreeMap;

/// Degrees of freedom for the known-variance linear fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DfPolicy {
    /// `T` degrees of freedom: the region has nominal coverage.
    #[default]
    Nominal,
    /// `T − 3`, discounting the three fitted parameters.
    Fitted,
}

/// Options shared by the builders.
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub alpha: f64,
    /// Bins for the goodness-of-fit builders, and the first axis of the
    /// independence model.
    pub bins: Option<BinStructure>,
    /// Second axis of the independence model.
    pub col_bins: Option<BinStructure>,
    /// Forces every error into a bin.
    pub closed_bins: bool,
    /// Overrides of the default parameter bounds, by parameter name.
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub df_policy: DfPolicy,
    /// Noise standard deviation for the known-variance linear fit.
    pub known_sigma: Option<f64>,
    /// Omits the quantile bound, leaving only the statistic definition.
    pub statistic_only: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            alpha: 0.05,
            bins: None,
            col_bins: None,
            closed_bins: false,
            bounds: BTreeMap::new(),
            df_policy: DfPolicy::Nominal,
            known_sigma: None,
            statistic_only: false,
        }
    }
}

impl ModelParams {
    pub fn with_alpha(alpha: f64) -> Self {
        ModelParams {
            alpha,
            ..Default::default()
        }
    }

    pub(crate) fn check(&self) -> Result<(), ModelError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ModelError::Invalid(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        for (name, &(lo, hi)) in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(ModelError::Invalid(format!(
                    "bounds for `{name}` must be finite with lo ≤ hi"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn bound(&self, name: &str, default: (f64, f64)) -> (f64, f64) {
        self.bounds.get(name).copied().unwrap_or(default)
    }

    pub(crate) fn test(&self) -> Result<Option<crate::sct::TestSpec>, ModelError> {
        if self.statistic_only {
            Ok(None)
        } else {
            crate::sct::TestSpec::two_sided(self.alpha).map(Some)
        }
    }
}

/// A model together with its named parameters and statistic.
#[derive(Clone, Debug)]
pub struct BuiltModel {
    pub model: Model,
    /// Parameters of the statistical model, in declaration order.
    pub parameters: Vec<(String, VarId)>,
    /// Other named quantities (intermediate statistics and the like).
    pub named: Vec<(String, VarId)>,
    /// The test statistic `s`.
    pub statistic: VarId,
    /// Quantile bounding the statistic, when the test form was posted.
    pub bound: Option<f64>,
    /// Warnings about the data that explain a likely infeasibility.
    pub diagnostics: Vec<String>,
}

impl BuiltModel {
    pub(crate) fn new(model: Model, statistic: VarId, bound: Option<f64>) -> BuiltModel {
        BuiltModel {
            model,
            parameters: Vec::new(),
            named: Vec::new(),
            statistic,
            bound,
            diagnostics: Vec::new(),
        }
    }

    /// Looks up a parameter, a named quantity, or `s` for the statistic.
    pub fn var(&self, name: &str) -> Option<VarId> {
        if name == "s" {
            return Some(self.statistic);
        }
        self.parameters
            .iter()
            .chain(&self.named)
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }

    pub fn parameter_names(&self) -> Vec<&str> {
        self.parameters.iter().map(|(n, _)| n.as_str()).collect()
    }

    fn lookup(&self, name: &str) -> Result<VarId, ModelError> {
        self.var(name)
            .ok_or_else(|| ModelError::Invalid(format!("unknown parameter `{name}`")))
    }

    pub fn fix(&mut self, name: &str, value: f64) -> Result<(), ModelError> {
        let v = self.lookup(name)?;
        self.model.fix(v, value)
    }

    /// Posts `left = right` between two named variables.
    pub fn constrain_equal(&mut self, left: &str, right: &str) -> Result<(), ModelError> {
        let (l, r) = (self.lookup(left)?, self.lookup(right)?);
        self.model.post_rel(l, Cmp::Eq, r);
        Ok(())
    }

    pub fn set_objective(&mut self, direction: Direction, name: &str) -> Result<(), ModelError> {
        let v = self.lookup(name)?;
        match direction {
            Direction::Minimize => self.model.minimize(v),
            Direction::Maximize => self.model.maximize(v),
        }
        Ok(())
    }
}

pub(crate) fn param(
    model: &mut Model,
    params: &ModelParams,
    name: &str,
    default: (f64, f64),
) -> Result<VarId, ModelError> {
    let (lo, hi) = params.bound(name, default);
    model.real_var(name, lo, hi)
}
