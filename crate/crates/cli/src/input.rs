//! Datasets, parameter files and the flags shared by every command.

use crate::error::CliError;
use clap::{Args, ValueEnum};
use serde::Deserialize;
use statcp::counting::BinStructure;
use statcp::kernel::Direction;
use statcp::models::{self, AppendixVariant, BuiltModel, CovarianceSource, DfPolicy, ModelParams};
use statcp::SearchConfig;
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Linear,
    LinearKnownSigma,
    LinearUnknownSigma,
    Ar1,
    Ar1Indep,
    Anova,
    HotellingMean,
    Multinomial,
}

impl ModelKind {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Dataset {
    Variates(Vec<f64>),
    Series(Vec<f64>),
    SeriesPair(Vec<f64>, Vec<f64>),
    Groups(Vec<Vec<f64>>),
    Onehot(Vec<Vec<u8>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    variates: Option<Vec<f64>>,
    series: Option<SeriesField>,
    groups: Option<Vec<Vec<f64>>>,
    onehot: Option<Vec<Vec<u8>>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SeriesField {
    One(Vec<f64>),
    Many(Vec<Vec<f64>>),
}

impl Dataset {
    /// Parses a dataset object holding exactly one of `variates`, `series`,
    /// `groups` or `onehot`. Two series may be given as `[[...], [...]]`.
    pub fn from_json(text: &str, origin: &str) -> Result<Dataset, CliError> {
        let f: DatasetFile = serde_json::from_str(text).map_err(|source| CliError::Json {
            path: origin.to_string(),
            source,
        })?;
        let mut found = Vec::new();
        if let Some(v) = f.variates {
            found.push(Dataset::Variates(v));
        }
        if let Some(s) = f.series {
            found.push(match s {
                SeriesField::One(v) => Dataset::Series(v),
                SeriesField::Many(mut v) if v.len() == 2 => {
                    let second = v.pop().unwrap();
                    Dataset::SeriesPair(v.pop().unwrap(), second)
                }
                SeriesField::Many(v) if v.len() == 1 => Dataset::Series(v.into_iter().next().unwrap()),
                SeriesField::Many(v) => {
                    return Err(CliError::input(format!("`series` holds {} series; expected one or two", v.len())))
                }
            });
        }
        if let Some(g) = f.groups {
            found.push(Dataset::Groups(g));
        }
        if let Some(o) = f.onehot {
            found.push(Dataset::Onehot(o));
        }
        match found.len() {
            1 => Ok(found.pop().unwrap()),
            0 => Err(CliError::input(format!("`{origin}` has no dataset field"))),
            _ => Err(CliError::input(format!("`{origin}` has more than one dataset field"))),
        }
    }

    pub fn load(path: &Path) -> Result<Dataset, CliError> {
        Dataset::from_json(&read(path)?, &path.display().to_string())
    }

    fn field(&self) -> &'static str {
        match self {
            Dataset::Variates(_) => "variates",
            Dataset::Series(_) => "series (one)",
            Dataset::SeriesPair(..) => "series (two)",
            Dataset::Groups(_) => "groups",
            Dataset::Onehot(_) => "onehot",
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DfArg {
    Nominal,
    Fitted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceArg {
    Known,
    Sample,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BinsField {
    Boundaries(Vec<f64>),
    Uniform { lo: f64, hi: f64, m: usize },
}

impl BinsField {
    fn into_bins(self) -> Result<BinStructure, CliError> {
        Ok(match self {
            BinsField::Boundaries(b) => BinStructure::new(b)?,
            BinsField::Uniform { lo, hi, m } => BinStructure::uniform(lo, hi, m)?,
        })
    }
}

/// Model options read from a `--params` file. Flags take precedence.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    alpha: Option<f64>,
    bins: Option<BinsField>,
    col_bins: Option<BinsField>,
    closed_bins: Option<bool>,
    bounds: Option<BTreeMap<String, (f64, f64)>>,
    df: Option<DfArg>,
    sigma: Option<f64>,
    covariance: Option<CovarianceArg>,
    statistic_only: Option<bool>,
}

/// Flags shared by all commands.
#[derive(Args, Clone, Debug, Default)]
pub struct ModelArgs {
    /// JSON file with model options (alpha, bins, col_bins, closed_bins,
    /// bounds, df, sigma, covariance, statistic_only)
    #[arg(long)]
    pub params: Option<std::path::PathBuf>,
    /// Significance level of the embedded test
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Bins as `lo:hi:m` or as a comma-separated boundary list
    #[arg(long, allow_hyphen_values = true)]
    pub bins: Option<String>,
    /// Second bin structure of the independence model
    #[arg(long, allow_hyphen_values = true)]
    pub col_bins: Option<String>,
    /// Force every error into a bin
    #[arg(long)]
    pub closed_bins: bool,
    /// Parameter search range, `name=lo:hi` (repeatable)
    #[arg(long = "bound", allow_hyphen_values = true)]
    pub bounds: Vec<String>,
    /// Degrees of freedom of the known-sigma linear fit
    #[arg(long, value_enum)]
    pub df: Option<DfArg>,
    /// Known noise standard deviation (linear-known-sigma)
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Covariance of the multinomial model [default: sample]
    #[arg(long, value_enum)]
    pub covariance: Option<CovarianceArg>,
    /// Post only the statistic definition, not the test bound
    #[arg(long)]
    pub statistic_only: bool,
    /// Fix a variable, `name=value` (repeatable)
    #[arg(long = "fix", allow_hyphen_values = true)]
    pub fixes: Vec<String>,
    /// Equality between two variables, `left=right` (repeatable)
    #[arg(long = "constrain")]
    pub equalities: Vec<String>,
    /// Objective as `min:name` or `max:name` [default: min:s]
    #[arg(long)]
    pub objective: Option<String>,
    /// Precision of real variables
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Wall-clock limit per search, in seconds
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Node limit per search
    #[arg(long)]
    pub node_limit: Option<u64>,
}

impl ModelArgs {
    pub fn into_spec(self, kind: ModelKind) -> Result<RunSpec, CliError> {
        let file: ParamsFile = match &self.params {
            Some(p) => serde_json::from_str(&read(p)?).map_err(|source| CliError::Json {
                path: p.display().to_string(),
                source,
            })?,
            None => ParamsFile::default(),
        };
        let mut params = ModelParams::with_alpha(self.alpha.or(file.alpha).unwrap_or(0.05));
        params.bins = match (&self.bins, file.bins) {
            (Some(s), _) => Some(parse_bins(s)?),
            (None, Some(b)) => Some(b.into_bins()?),
            (None, None) => None,
        };
        params.col_bins = match (&self.col_bins, file.col_bins) {
            (Some(s), _) => Some(parse_bins(s)?),
            (None, Some(b)) => Some(b.into_bins()?),
            (None, None) => None,
        };
        params.closed_bins = self.closed_bins || file.closed_bins.unwrap_or(false);
        params.bounds = file.bounds.unwrap_or_default();
        for b in &self.bounds {
            let (name, lo, hi) = parse_bound(b)?;
            params.bounds.insert(name, (lo, hi));
        }
        params.df_policy = match self.df.or(file.df) {
            Some(DfArg::Fitted) => DfPolicy::Fitted,
            _ => DfPolicy::Nominal,
        };
        params.known_sigma = self.sigma.or(file.sigma);
        params.statistic_only = self.statistic_only || file.statistic_only.unwrap_or(false);
        let covariance = match self.covariance.or(file.covariance) {
            Some(CovarianceArg::Known) => CovarianceSource::Known,
            _ => CovarianceSource::Sample,
        };

        let mut search = SearchConfig::default();
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(CliError::input("--epsilon must be positive"));
            }
            search.epsilon = e;
        }
        if let Some(t) = self.time_limit {
            search.time_limit = Some(
                Duration::try_from_secs_f64(t).map_err(|_| CliError::input("--time-limit must be a non-negative number"))?,
            );
        }
        search.node_limit = self.node_limit;

        Ok(RunSpec {
            kind,
            params,
            covariance,
            fixes: self.fixes.iter().map(|s| parse_assignment(s)).collect::<Result<_, _>>()?,
            equalities: self.equalities.iter().map(|s| parse_equality(s)).collect::<Result<_, _>>()?,
            objective: self.objective.as_deref().map(parse_objective).transpose()?,
            search,
        })
    }
}

/// Everything needed to build and solve one model, minus the data.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub kind: ModelKind,
    pub params: ModelParams,
    pub covariance: CovarianceSource,
    pub fixes: Vec<(String, f64)>,
    pub equalities: Vec<(String, String)>,
    pub objective: Option<(Direction, String)>,
    pub search: SearchConfig,
}

impl RunSpec {
    pub fn new(kind: ModelKind, params: ModelParams) -> RunSpec {
        RunSpec {
            kind,
            params,
            covariance: CovarianceSource::Sample,
            fixes: Vec::new(),
            equalities: Vec::new(),
            objective: None,
            search: SearchConfig::default(),
        }
    }

    /// Builds the named model on `data` and applies the fixings and
    /// equalities.
    pub fn build(&self, data: &Dataset) -> Result<BuiltModel, CliError> {
        let p = &self.params;
        let mismatch = || {
            CliError::input(format!(
                "model `{}` does not take a dataset of {}",
                self.kind.name(),
                data.field()
            ))
        };
        let mut built = match (self.kind, data) {
            (ModelKind::Linear, Dataset::Variates(v)) => models::build_linear_fit(v, p)?,
            (ModelKind::LinearKnownSigma, Dataset::Variates(v)) => {
                models::build_linear_fit_appendix(v, p, AppendixVariant::KnownSigma)?
            }
            (ModelKind::LinearUnknownSigma, Dataset::Variates(v)) => {
                models::build_linear_fit_appendix(v, p, AppendixVariant::UnknownSigma)?
            }
            (ModelKind::Ar1, Dataset::Series(s)) => models::build_ar1(s, p)?,
            (ModelKind::Ar1Indep, Dataset::SeriesPair(a, b)) => models::build_ar1_independence(a, b, p)?,
            (ModelKind::Anova, Dataset::Groups(g)) => models::build_anova(g, p)?,
            (ModelKind::HotellingMean, Dataset::Groups(g)) => models::build_multivariate_mean(g, p)?,
            (ModelKind::Multinomial, Dataset::Onehot(o)) => models::build_multinomial_ci(o, p, self.covariance)?,
            _ => return Err(mismatch()),
        };
        for (name, value) in &self.fixes {
            built.fix(name, *value)?;
        }
        for (l, r) in &self.equalities {
            built.constrain_equal(l, r)?;
        }
        Ok(built)
    }
}

fn number(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::input(format!("`{s}` is not a number in {what}")))
}

fn count(s: &str, what: &str) -> Result<usize, CliError> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| CliError::input(format!("`{s}` is not a count in {what}")))
}

/// `lo:hi:m` for `m` equal bins, or `b0,b1,...` for explicit boundaries.
pub fn parse_bins(s: &str) -> Result<BinStructure, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    Ok(match parts.as_slice() {
        [lo, hi, m] => BinStructure::uniform(number(lo, s)?, number(hi, s)?, count(m, s)?)?,
        [_] => BinStructure::new(s.split(',').map(|b| number(b, s)).collect::<Result<_, _>>()?)?,
        _ => return Err(CliError::input(format!("bins `{s}` must be lo:hi:m or a boundary list"))),
    })
}

/// `name=value`.
pub fn parse_assignment(s: &str) -> Result<(String, f64), CliError> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| CliError::input(format!("`{s}` must have the form name=value")))?;
    Ok((name.trim().to_string(), number(value, s)?))
}

/// `left=right` between two variable names.
pub fn parse_equality(s: &str) -> Result<(String, String), CliError> {
    match s.split_once('=') {
        Some((l, r)) if is_name(l.trim()) && is_name(r.trim()) => Ok((l.trim().into(), r.trim().into())),
        _ => Err(CliError::input(format!("`{s}` must have the form name=name"))),
    }
}

fn is_name(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `min:name` or `max:name`.
pub fn parse_objective(s: &str) -> Result<(Direction, String), CliError> {
    let bad = || CliError::input(format!("objective `{s}` must be min:name or max:name"));
    let (dir, name) = s.split_once(':').ok_or_else(bad)?;
    let dir = match dir {
        "min" => Direction::Minimize,
        "max" => Direction::Maximize,
        _ => return Err(bad()),
    };
    if !is_name(name) {
        return Err(bad());
    }
    Ok((dir, name.to_string()))
}

/// `name=lo:hi`.
pub fn parse_bound(s: &str) -> Result<(String, f64, f64), CliError> {
    let bad = || CliError::input(format!("bound `{s}` must have the form name=lo:hi"));
    let (name, range) = s.split_once('=').ok_or_else(bad)?;
    let (lo, hi) = range.split_once(':').ok_or_else(bad)?;
    Ok((name.trim().to_string(), number(lo, s)?, number(hi, s)?))
}

/// Comma-separated `name=value` list.
pub fn parse_assignments(s: &str) -> Result<Vec<(String, f64)>, CliError> {
    s.split(',').map(parse_assignment).collect()
}
