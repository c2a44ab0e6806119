//! Variables, constraints and objectives.

use super::domain::{Domain, FiniteSet};
use super::expr::Expr;
use super::interval::Interval;
use super::propagate::{eval_expr, Store};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Cmp {
    /// The comparison that holds exactly when `self` does not.
    pub fn negate(self) -> Cmp {
        match self {
            Cmp::Eq => Cmp::Ne,
            Cmp::Ne => Cmp::Eq,
            Cmp::Le => Cmp::Gt,
            Cmp::Lt => Cmp::Ge,
            Cmp::Ge => Cmp::Lt,
            Cmp::Gt => Cmp::Le,
        }
    }

    /// The comparison with operands swapped: `a op b` iff `b op.flip() a`.
    pub fn flip(self) -> Cmp {
        match self {
            Cmp::Le => Cmp::Ge,
            Cmp::Lt => Cmp::Gt,
            Cmp::Ge => Cmp::Le,
            Cmp::Gt => Cmp::Lt,
            c => c,
        }
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
            Cmp::Le => a <= b,
            Cmp::Lt => a < b,
            Cmp::Ge => a >= b,
            Cmp::Gt => a > b,
        }
    }
}

#[derive(Clone, Debug)]
pub enum ConstraintKind {
    /// `lhs cmp rhs`.
    Rel { lhs: Expr, cmp: Cmp, rhs: Expr },
    /// `flag = 1 ⇔ lhs cmp rhs`, with `flag` a 0/1 variable.
    Reified {
        flag: VarId,
        lhs: Expr,
        cmp: Cmp,
        rhs: Expr,
    },
    /// `output = 1 ⇔ every input = 1`.
    And { output: VarId, inputs: Vec<VarId> },
    /// `counts[j] = |{i : vars[i] = values[j]}|`; when `closed`, every
    /// variable must take one of `values`.
    GlobalCardinality {
        vars: Vec<VarId>,
        values: Vec<i64>,
        counts: Vec<VarId>,
        closed: bool,
    },
}

impl ConstraintKind {
    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        match self {
            ConstraintKind::Rel { lhs, rhs, .. } => {
                lhs.visit_vars(&mut |v| out.push(v));
                rhs.visit_vars(&mut |v| out.push(v));
            }
            ConstraintKind::Reified { flag, lhs, rhs, .. } => {
                out.push(*flag);
                lhs.visit_vars(&mut |v| out.push(v));
                rhs.visit_vars(&mut |v| out.push(v));
            }
            ConstraintKind::And { output, inputs } => {
                out.push(*output);
                out.extend(inputs);
            }
            ConstraintKind::GlobalCardinality { vars, counts, .. } => {
                out.extend(vars);
                out.extend(counts);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// One posted constraint with a tag naming the factory that created it.
#[derive(Clone, Debug)]
pub struct ConstraintNode {
    pub kind: ConstraintKind,
    pub origin: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Objective {
    pub direction: Direction,
    pub var: VarId,
}

#[derive(Clone, Debug)]
pub struct VarInfo {
    pub name: String,
    pub domain: Domain,
    /// Decision variables are branched on first; auxiliary variables only
    /// when everything else is resolved.
    pub searchable: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("variable `{0}` has an unbounded or invalid real domain")]
    UnboundedDomain(String),
    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("constraint {constraint} ({origin}) refers to unknown variable #{var}")]
    DanglingVar {
        constraint: usize,
        origin: String,
        var: usize,
    },
    #[error("variable `{0}` must be a 0/1 integer variable")]
    NotBoolean(String),
    #[error("variable `{0}` must be an integer variable")]
    NotInteger(String),
    #[error("global cardinality values must be distinct")]
    DuplicateValues,
    #[error(transparent)]
    Distribution(#[from] crate::dist::DistError),
    #[error("{0}")]
    Invalid(String),
}

/// A constraint model: variables, constraints and an optional objective.
#[derive(Clone, Debug, Default)]
pub struct Model {
    vars: Vec<VarInfo>,
    constraints: Vec<ConstraintNode>,
    objective: Option<Objective>,
    origin: Option<String>,
}

impl Model {
    pub fn new() -> Model {
        Model::default()
    }

    fn push_var(&mut self, name: &str, domain: Domain, searchable: bool) -> VarId {
        let id = VarId(self.vars.len() as u32);
        self.vars.push(VarInfo {
            name: name.to_string(),
            domain,
            searchable,
        });
        id
    }

    /// Integer decision variable over `lo..=hi`.
    pub fn int_var(&mut self, name: &str, lo: i64, hi: i64) -> VarId {
        self.push_var(name, Domain::Finite(FiniteSet::range(lo, hi)), true)
    }

    pub fn int_var_from(&mut self, name: &str, values: &[i64]) -> VarId {
        self.push_var(name, Domain::Finite(FiniteSet::from_values(values)), true)
    }

    pub fn bool_var(&mut self, name: &str) -> VarId {
        self.int_var(name, 0, 1)
    }

    /// Real decision variable; the domain must be bounded.
    pub fn real_var(&mut self, name: &str, lo: f64, hi: f64) -> Result<VarId, ModelError> {
        match Interval::checked(lo, hi) {
            Some(iv) if iv.is_bounded() => Ok(self.push_var(name, Domain::Real(iv), true)),
            _ => Err(ModelError::UnboundedDomain(name.to_string())),
        }
    }

    /// Auxiliary integer variable, branched on only after decision variables.
    pub fn aux_int(&mut self, name: &str, lo: i64, hi: i64) -> VarId {
        self.push_var(name, Domain::Finite(FiniteSet::range(lo, hi)), false)
    }

    pub fn aux_bool(&mut self, name: &str) -> VarId {
        self.aux_int(name, 0, 1)
    }

    /// Auxiliary real variable; never branched on directly.
    pub fn aux_real(&mut self, name: &str, domain: Interval) -> VarId {
        self.push_var(name, Domain::Real(domain), false)
    }

    /// New auxiliary real `v` with `v = expr`, its domain initialised to the
    /// interval image of `expr` over the current declared domains.
    pub fn define(&mut self, name: &str, expr: Expr) -> VarId {
        let doms: Vec<Domain> = self.vars.iter().map(|v| v.domain.clone()).collect();
        let dom = eval_expr(&expr, &doms).unwrap_or(Interval::ENTIRE);
        let v = self.aux_real(name, dom);
        self.post_rel(Expr::Var(v), Cmp::Eq, expr);
        v
    }

    /// Runs `f` with every constraint it posts tagged by `origin`.
    pub fn scoped<T>(&mut self, origin: &str, f: impl FnOnce(&mut Model) -> T) -> T {
        let saved = self.origin.replace(origin.to_string());
        let out = f(self);
        self.origin = saved;
        out
    }

    pub fn post(&mut self, kind: ConstraintKind) {
        let origin = self.origin.clone().unwrap_or_else(|| "user".to_string());
        self.constraints.push(ConstraintNode { kind, origin });
    }

    pub fn post_rel(&mut self, lhs: impl Into<Expr>, cmp: Cmp, rhs: impl Into<Expr>) {
        self.post(ConstraintKind::Rel {
            lhs: lhs.into(),
            cmp,
            rhs: rhs.into(),
        });
    }

    pub fn post_reified(&mut self, flag: VarId, lhs: impl Into<Expr>, cmp: Cmp, rhs: impl Into<Expr>) {
        self.post(ConstraintKind::Reified {
            flag,
            lhs: lhs.into(),
            cmp,
            rhs: rhs.into(),
        });
    }

    pub fn post_and(&mut self, output: VarId, inputs: Vec<VarId>) {
        self.post(ConstraintKind::And { output, inputs });
    }

    pub fn minimize(&mut self, var: VarId) {
        self.objective = Some(Objective {
            direction: Direction::Minimize,
            var,
        });
    }

    pub fn maximize(&mut self, var: VarId) {
        self.objective = Some(Objective {
            direction: Direction::Maximize,
            var,
        });
    }

    pub fn clear_objective(&mut self) {
        self.objective = None;
    }

    /// Narrows the declared domain of `var` to the single value `value`.
    pub fn fix(&mut self, var: VarId, value: f64) -> Result<(), ModelError> {
        let info = self
            .vars
            .get_mut(var.index())
            .ok_or_else(|| ModelError::Invalid(format!("unknown variable #{}", var.index())))?;
        match &mut info.domain {
            Domain::Finite(s) => {
                if value.fract() != 0.0 {
                    return Err(ModelError::NotInteger(info.name.clone()));
                }
                s.assign(value as i64);
                if s.is_empty() {
                    return Err(ModelError::EmptyDomain(info.name.clone()));
                }
            }
            Domain::Real(iv) => {
                if !iv.contains(value) {
                    return Err(ModelError::EmptyDomain(info.name.clone()));
                }
                *iv = Interval::point(value);
            }
        }
        Ok(())
    }

    /// Intersects the declared domain of `var` with `range`.
    pub fn restrict(&mut self, var: VarId, range: Interval) -> Result<(), ModelError> {
        let info = self
            .vars
            .get_mut(var.index())
            .ok_or_else(|| ModelError::Invalid(format!("unknown variable #{}", var.index())))?;
        let ok = match &mut info.domain {
            Domain::Finite(s) => {
                s.restrict((range.lo() - 1e-9).ceil() as i64, (range.hi() + 1e-9).floor() as i64);
                !s.is_empty()
            }
            Domain::Real(iv) => match iv.intersect(&range) {
                Some(r) => {
                    *iv = r;
                    true
                }
                None => false,
            },
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::EmptyDomain(info.name.clone()))
        }
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &VarInfo {
        &self.vars[id.index()]
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .map(|i| VarId(i as u32))
    }

    pub fn constraints(&self) -> &[ConstraintNode] {
        &self.constraints
    }

    pub fn objective(&self) -> Option<Objective> {
        self.objective
    }

    /// Domain store holding the declared domains.
    pub fn initial_store(&self) -> Store {
        Store::new(self.vars.iter().map(|v| v.domain.clone()).collect())
    }

    /// Structural checks run before any search.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.vars.len();
        for v in &self.vars {
            match &v.domain {
                Domain::Finite(s) if s.is_empty() => {
                    return Err(ModelError::EmptyDomain(v.name.clone()))
                }
                Domain::Real(iv) if v.searchable && !iv.is_bounded() => {
                    return Err(ModelError::UnboundedDomain(v.name.clone()))
                }
                _ => {}
            }
        }
        let is_bool = |id: VarId| match &self.vars[id.index()].domain {
            Domain::Finite(s) => s.min().is_some_and(|m| m >= 0) && s.max().is_some_and(|m| m <= 1),
            Domain::Real(_) => false,
        };
        let is_int = |id: VarId| self.vars[id.index()].domain.is_finite();
        for (ci, c) in self.constraints.iter().enumerate() {
            for v in c.kind.vars() {
                if v.index() >= n {
                    return Err(ModelError::DanglingVar {
                        constraint: ci,
                        origin: c.origin.clone(),
                        var: v.index(),
                    });
                }
            }
            match &c.kind {
                ConstraintKind::Reified { flag, .. } => {
                    if !is_bool(*flag) {
                        return Err(ModelError::NotBoolean(self.vars[flag.index()].name.clone()));
                    }
                }
                ConstraintKind::And { output, inputs } => {
                    for v in std::iter::once(output).chain(inputs) {
                        if !is_bool(*v) {
                            return Err(ModelError::NotBoolean(self.vars[v.index()].name.clone()));
                        }
                    }
                }
                ConstraintKind::GlobalCardinality {
                    vars,
                    values,
                    counts,
                    ..
                } => {
                    if values.len() != counts.len() {
                        return Err(ModelError::Invalid(
                            "global cardinality needs one count per value".into(),
                        ));
                    }
                    let mut sorted = values.clone();
                    sorted.sort_unstable();
                    sorted.dedup();
                    if sorted.len() != values.len() {
                        return Err(ModelError::DuplicateValues);
                    }
                    for v in vars.iter().chain(counts) {
                        if !is_int(*v) {
                            return Err(ModelError::NotInteger(self.vars[v.index()].name.clone()));
                        }
                    }
                }
                ConstraintKind::Rel { .. } => {}
            }
        }
        if let Some(obj) = self.objective {
            if obj.var.index() >= n {
                return Err(ModelError::Invalid("objective refers to unknown variable".into()));
            }
        }
        Ok(())
    }
}
