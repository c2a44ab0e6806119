//! Branch-and-prune satisfaction search and branch-and-bound optimisation.

use super::domain::Domain;
use super::interval::Interval;
use super::model::{Direction, Model, ModelError, VarId};
use super::propagate::{Propagators, Store};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

/// Variable-ordering heuristic for real variables during optimisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branching {
    /// Largest relative width first.
    WidestFirst,
    /// Try several split candidates and keep the one whose children have the
    /// highest objective lower bound.
    Strong,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Precision of real decision variables: a variable is resolved once its
    /// width is at most `epsilon · max(1, |midpoint|)`.
    pub epsilon: f64,
    /// Slack allowed when checking constraints on a solution box.
    pub feas_tol: f64,
    /// Absolute optimality gap for branch and bound.
    pub obj_tol: f64,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub branching: Branching,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            epsilon: 1e-6,
            feas_tol: 1e-9,
            obj_tol: 1e-3,
            node_limit: None,
            time_limit: None,
            branching: Branching::Strong,
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<(), ModelError> {
        if !(self.epsilon > 0.0 && self.feas_tol > 0.0 && self.obj_tol > 0.0) {
            return Err(ModelError::Invalid(
                "epsilon, feasibility and objective tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Real(Interval),
}

impl Value {
    /// Integer value, or the midpoint of a real box.
    pub fn point(&self) -> f64 {
        match self {
            Value::Int(v) => *v as f64,
            Value::Real(iv) => iv.mid(),
        }
    }

    pub fn interval(&self) -> Interval {
        match self {
            Value::Int(v) => Interval::point(*v as f64),
            Value::Real(iv) => *iv,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SearchStats {
    pub nodes: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub values: Vec<Value>,
    /// Bounds on the optimal objective value, when optimising.
    pub objective: Option<Interval>,
    pub stats: SearchStats,
}

impl Solution {
    pub fn value(&self, v: VarId) -> f64 {
        self.values[v.index()].point()
    }

    pub fn interval(&self, v: VarId) -> Interval {
        self.values[v.index()].interval()
    }

    pub fn int(&self, v: VarId) -> Option<i64> {
        match self.values[v.index()] {
            Value::Int(x) => Some(x),
            Value::Real(_) => None,
        }
    }

    fn from_store(store: &Store) -> Solution {
        let values = store
            .domains()
            .iter()
            .map(|d| match d {
                Domain::Finite(s) => Value::Int(s.min().unwrap()),
                Domain::Real(iv) => Value::Real(*iv),
            })
            .collect();
        Solution {
            values,
            objective: None,
            stats: SearchStats::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Feasible(Solution),
    Infeasible(SearchStats),
    /// Limits hit before a proof; carries the best solution found, if any.
    ResourceLimit(Option<Solution>, SearchStats),
}

impl Outcome {
    pub fn solution(&self) -> Option<&Solution> {
        match self {
            Outcome::Feasible(s) => Some(s),
            Outcome::ResourceLimit(s, _) => s.as_ref(),
            Outcome::Infeasible(_) => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Outcome::Feasible(_))
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Outcome::Infeasible(_))
    }

    pub fn stats(&self) -> SearchStats {
        match self {
            Outcome::Feasible(s) => s.stats,
            Outcome::Infeasible(st) | Outcome::ResourceLimit(_, st) => *st,
        }
    }
}

/// Relative width below which a decision real is no longer refined.
const REFINE_FLOOR: f64 = 1e-13;

enum Branch {
    /// `x = v` versus `x ≠ v`.
    Value(VarId, i64),
    /// Split a real domain at its midpoint.
    Split(VarId),
}

struct Engine<'m> {
    model: &'m Model,
    props: Propagators,
    cfg: SearchConfig,
    initial: Vec<Interval>,
    start: Instant,
    nodes: u64,
}

impl<'m> Engine<'m> {
    fn new(model: &'m Model, cfg: &SearchConfig) -> Result<Engine<'m>, ModelError> {
        model.validate()?;
        cfg.validate()?;
        let initial = model
            .vars()
            .iter()
            .map(|v| v.domain.hull().unwrap_or(Interval::ZERO))
            .collect();
        Ok(Engine {
            model,
            props: Propagators::compile(model),
            cfg: cfg.clone(),
            initial,
            start: Instant::now(),
            nodes: 0,
        })
    }

    fn stats(&self) -> SearchStats {
        SearchStats {
            nodes: self.nodes,
            elapsed: self.start.elapsed(),
        }
    }

    fn out_of_budget(&self) -> bool {
        if let Some(limit) = self.cfg.node_limit {
            if self.nodes >= limit {
                return true;
            }
        }
        if let Some(limit) = self.cfg.time_limit {
            if self.nodes.is_multiple_of(32) && self.start.elapsed() >= limit {
                return true;
            }
        }
        false
    }

    fn resolved(&self, iv: Interval) -> bool {
        iv.width() <= self.cfg.epsilon * iv.mid().abs().max(1.0)
    }

    fn rel_width(&self, v: VarId, iv: Interval) -> f64 {
        let init = self.initial[v.index()].width();
        if init > 0.0 && init.is_finite() {
            iv.width() / init
        } else {
            iv.width()
        }
    }

    /// Unresolved searchable reals ordered by decreasing relative width.
    fn open_reals(&self, store: &Store) -> Vec<(VarId, f64)> {
        let mut out: Vec<(VarId, f64)> = self
            .model
            .vars()
            .iter()
            .enumerate()
            .filter(|(_, info)| info.searchable)
            .filter_map(|(i, _)| {
                let v = VarId(i as u32);
                match store.domain(v) {
                    Domain::Real(iv) if !self.resolved(*iv) => Some((v, self.rel_width(v, *iv))),
                    _ => None,
                }
            })
            .collect();
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
        out
    }

    /// Widest decision real still above machine-level resolution; used to
    /// keep refining a box whose midpoint fails verification.
    fn refinable_real(&self, store: &Store) -> Option<VarId> {
        let mut best: Option<(f64, VarId)> = None;
        for (i, info) in self.model.vars().iter().enumerate() {
            if !info.searchable {
                continue;
            }
            let v = VarId(i as u32);
            if let Domain::Real(iv) = store.domain(v) {
                let floor = REFINE_FLOOR * iv.mid().abs().max(REFINE_FLOOR);
                let (l, r) = iv.bisect();
                if iv.width() > floor && l.hi() < iv.hi() && r.lo() > iv.lo() {
                    let w = self.rel_width(v, *iv);
                    if best.is_none_or(|(bw, _)| w > bw) {
                        best = Some((w, v));
                    }
                }
            }
        }
        best.map(|(_, v)| v)
    }

    /// Fixes the decision reals one at a time at the midpoint of their
    /// current domain, propagating after each, and checks the constraints on
    /// the result. Returns the fixed store when it verifies.
    fn verify_point(&self, store: &Store) -> Option<Store> {
        let mut s = store.clone();
        for (i, info) in self.model.vars().iter().enumerate() {
            if !info.searchable {
                continue;
            }
            let v = VarId(i as u32);
            if let Domain::Real(iv) = s.domain(v) {
                if iv.width() > 0.0 {
                    let m = iv.mid();
                    s.set_real(v, Interval::point(m)).ok()?;
                    self.props.propagate(&mut s).ok()?;
                }
            }
        }
        self.props.propagate(&mut s).ok()?;
        self.props.satisfied(&s, self.cfg.feas_tol).then_some(s)
    }

    fn smallest_finite(&self, store: &Store, searchable: bool) -> Option<Branch> {
        let mut best: Option<(usize, VarId)> = None;
        for (i, info) in self.model.vars().iter().enumerate() {
            if info.searchable != searchable {
                continue;
            }
            if let Domain::Finite(s) = store.domain(VarId(i as u32)) {
                let n = s.len();
                if n > 1 && best.is_none_or(|(m, _)| n < m) {
                    best = Some((n, VarId(i as u32)));
                }
            }
        }
        best.map(|(_, v)| Branch::Value(v, store.hull(v).lo() as i64))
    }

    /// Decision finite variables, then decision reals, then auxiliary finite
    /// variables.
    fn choose(&self, store: &Store) -> Option<Branch> {
        if let Some(b) = self.smallest_finite(store, true) {
            return Some(b);
        }
        if let Some(&(v, _)) = self.open_reals(store).first() {
            return Some(Branch::Split(v));
        }
        self.smallest_finite(store, false)
    }

    fn children(&self, store: &Store, branch: &Branch) -> [Option<Store>; 2] {
        match *branch {
            Branch::Value(v, x) => {
                let mut a = store.clone();
                let mut b = store.clone();
                let ok_a = a.assign(v, x).is_ok();
                let ok_b = b.remove_value(v, x).is_ok();
                [ok_a.then_some(a), ok_b.then_some(b)]
            }
            Branch::Split(v) => {
                let (l, r) = store.hull(v).bisect();
                let mut a = store.clone();
                let mut b = store.clone();
                let ok_a = a.set_real(v, l).is_ok();
                let ok_b = b.set_real(v, r).is_ok();
                [ok_a.then_some(a), ok_b.then_some(b)]
            }
        }
    }

    fn root(&self) -> Option<Store> {
        let mut store = self.model.initial_store();
        self.props.propagate(&mut store).ok()?;
        Some(store)
    }

    /// Depth-first search below `store`; returns a solution, `Ok(None)` when
    /// the subtree is exhausted, `Err` when the budget (global or `local`) ran out.
    fn dfs(&mut self, store: Store, local: Option<u64>) -> Result<Option<Store>, ()> {
        let mut stack = vec![store];
        let mut local_nodes = 0u64;
        while let Some(mut node) = stack.pop() {
            if self.out_of_budget() {
                return Err(());
            }
            if let Some(l) = local {
                if local_nodes >= l {
                    return Err(());
                }
            }
            self.nodes += 1;
            local_nodes += 1;
            if self.props.propagate_changed(&mut node).is_err() {
                continue;
            }
            match self.choose(&node) {
                None => {
                    if !self.props.satisfied(&node, self.cfg.feas_tol) {
                        continue;
                    }
                    if let Some(point) = self.verify_point(&node) {
                        return Ok(Some(point));
                    }
                    match self.refinable_real(&node) {
                        Some(v) => {
                            let [a, b] = self.children(&node, &Branch::Split(v));
                            stack.extend(b);
                            stack.extend(a);
                        }
                        None => return Ok(Some(node)),
                    }
                }
                Some(branch) => {
                    let [a, b] = self.children(&node, &branch);
                    stack.extend(b);
                    stack.extend(a);
                }
            }
        }
        Ok(None)
    }
}

/// Searches for one assignment satisfying every constraint.
pub fn solve_satisfaction(model: &Model, cfg: &SearchConfig) -> Result<Outcome, ModelError> {
    let mut eng = Engine::new(model, cfg)?;
    let Some(root) = eng.root() else {
        eng.nodes = 1;
        return Ok(Outcome::Infeasible(eng.stats()));
    };
    Ok(match eng.dfs(root, None) {
        Ok(Some(store)) => {
            let mut sol = Solution::from_store(&store);
            sol.stats = eng.stats();
            Outcome::Feasible(sol)
        }
        Ok(None) => Outcome::Infeasible(eng.stats()),
        Err(()) => Outcome::ResourceLimit(None, eng.stats()),
    })
}

struct Node {
    lb: f64,
    seq: u64,
    store: Store,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap on (−lb, −seq): smallest bound first, oldest first on ties
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lb
            .total_cmp(&self.lb)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Optimizer<'m> {
    eng: Engine<'m>,
    obj: VarId,
    sign: f64,
    ub: f64,
    best: Option<Store>,
    seq: u64,
}

impl<'m> Optimizer<'m> {
    /// Lower bound of the signed objective (always minimised) on `store`.
    fn lb(&self, store: &Store) -> f64 {
        let iv = store.hull(self.obj);
        if self.sign > 0.0 {
            iv.lo()
        } else {
            -iv.hi()
        }
    }

    fn signed_hi(&self, store: &Store) -> f64 {
        let iv = store.hull(self.obj);
        if self.sign > 0.0 {
            iv.hi()
        } else {
            -iv.lo()
        }
    }

    /// Restricts the objective to improve on the incumbent by `obj_tol`.
    fn cut(&self, store: &mut Store) -> Result<(), ()> {
        if !self.ub.is_finite() {
            return Ok(());
        }
        let bound = self.ub - self.eng.cfg.obj_tol;
        let range = if self.sign > 0.0 {
            Interval::checked(f64::NEG_INFINITY, bound)
        } else {
            Interval::checked(-bound, f64::INFINITY)
        };
        let range = range.ok_or(())?;
        store.narrow(self.obj, range).map_err(|_| ())?;
        self.eng.props.propagate_changed(store).map_err(|_| ())
    }

    fn offer(&mut self, store: &Store) {
        let hi = self.signed_hi(store);
        if hi < self.ub {
            self.ub = hi;
            self.best = Some(store.clone());
        }
    }

    /// Fixes decision reals at their midpoints and looks for a completion.
    fn probe(&mut self, store: &Store) -> Result<(), ()> {
        let mut s = store.clone();
        for (i, info) in self.eng.model.vars().iter().enumerate() {
            if !info.searchable {
                continue;
            }
            let v = VarId(i as u32);
            if let Domain::Real(iv) = s.domain(v) {
                let m = iv.mid();
                if s.set_real(v, Interval::point(m)).is_err() {
                    return Ok(());
                }
            }
        }
        let found = self.eng.dfs(s, Some(64));
        match found {
            Ok(Some(sol)) => {
                self.offer(&sol);
                Ok(())
            }
            Ok(None) => Ok(()),
            Err(()) if self.eng.out_of_budget() => Err(()),
            Err(()) => Ok(()),
        }
    }

    fn push(&mut self, heap: &mut BinaryHeap<Node>, store: Store) {
        let lb = self.lb(&store);
        self.seq += 1;
        heap.push(Node {
            lb,
            seq: self.seq,
            store,
        });
    }

    fn propagated_children(&mut self, store: &Store, branch: &Branch) -> [Option<Store>; 2] {
        let kids = self.eng.children(store, branch);
        kids.map(|k| {
            k.and_then(|mut s| {
                self.eng.nodes += 1;
                self.eng.props.propagate_changed(&mut s).ok()?;
                self.cut(&mut s).ok()?;
                Some(s)
            })
        })
    }

    /// Picks the real split whose weaker child has the highest lower bound.
    fn strong_split(&mut self, store: &Store, cands: &[(VarId, f64)]) -> [Option<Store>; 2] {
        let mut best: Option<(f64, f64, [Option<Store>; 2])> = None;
        for &(v, w) in cands.iter().take(6) {
            let kids = self.propagated_children(store, &Branch::Split(v));
            let score = kids
                .iter()
                .map(|k| k.as_ref().map_or(f64::INFINITY, |s| self.lb(s)))
                .fold(f64::INFINITY, f64::min);
            let better = match &best {
                None => true,
                Some((bs, bw, _)) => score > *bs || (score == *bs && w > *bw),
            };
            if better {
                best = Some((score, w, kids));
            }
            if score == f64::INFINITY {
                break;
            }
        }
        best.map(|b| b.2).unwrap_or([None, None])
    }

    fn run(&mut self, root: Store) -> Outcome {
        let mut heap = BinaryHeap::new();
        let root_lb = self.lb(&root);
        self.push(&mut heap, root);
        let mut exhausted = true;
        let mut since_probe = 0u32;
        while let Some(Node { mut store, .. }) = heap.pop() {
            if self.eng.out_of_budget() {
                exhausted = false;
                self.push(&mut heap, store);
                break;
            }
            if self.lb(&store) >= self.ub - self.eng.cfg.obj_tol {
                self.push(&mut heap, store);
                break;
            }
            self.eng.nodes += 1;
            if self.cut(&mut store).is_err() {
                continue;
            }
            since_probe += 1;
            if self.best.is_none() || since_probe >= 16 {
                since_probe = 0;
                if self.probe(&store).is_err() {
                    exhausted = false;
                    self.push(&mut heap, store);
                    break;
                }
                if self.cut(&mut store).is_err() {
                    continue;
                }
            }
            let kids = if let Some(b) = self.eng.smallest_finite(&store, true) {
                self.propagated_children(&store, &b)
            } else {
                let reals = self.eng.open_reals(&store);
                if !reals.is_empty() {
                    if self.eng.cfg.branching == Branching::Strong && reals.len() > 1 {
                        self.strong_split(&store, &reals)
                    } else {
                        self.propagated_children(&store, &Branch::Split(reals[0].0))
                    }
                } else if let Some(b) = self.eng.smallest_finite(&store, false) {
                    self.propagated_children(&store, &b)
                } else {
                    // every variable is decided: a candidate solution
                    if !self.eng.props.satisfied(&store, self.eng.cfg.feas_tol) {
                        continue;
                    }
                    let point = self.eng.verify_point(&store);
                    if let Some(p) = &point {
                        self.offer(p);
                    }
                    let obj = store.hull(self.obj);
                    let loose = obj.width() > self.eng.cfg.obj_tol;
                    if !loose && point.is_some() {
                        continue;
                    }
                    if let Some(v) = self.eng.refinable_real(&store) {
                        self.propagated_children(&store, &Branch::Split(v))
                    } else if loose
                        && matches!(store.domain(self.obj), Domain::Real(_))
                        && obj.mid() > obj.lo()
                        && obj.mid() < obj.hi()
                    {
                        self.propagated_children(&store, &Branch::Split(self.obj))
                    } else {
                        if point.is_none() {
                            self.offer(&store);
                        }
                        continue;
                    }
                }
            };
            for k in kids.into_iter().flatten() {
                self.push(&mut heap, k);
            }
        }
        let stats = self.eng.stats();
        let open_lb = heap.iter().map(|n| n.lb).fold(f64::INFINITY, f64::min);
        let best = self.best.take();
        match best {
            None if exhausted => Outcome::Infeasible(stats),
            None => Outcome::ResourceLimit(None, stats),
            Some(store) => {
                let ub = self.ub;
                let lb = open_lb
                    .min(ub - self.eng.cfg.obj_tol)
                    .max(root_lb)
                    .min(ub);
                let bounds = if self.sign > 0.0 {
                    Interval::new(lb, ub)
                } else {
                    Interval::new(-ub, -lb)
                };
                let mut sol = Solution::from_store(&store);
                sol.objective = Some(bounds);
                sol.stats = stats;
                let closed = exhausted || open_lb >= ub - self.eng.cfg.obj_tol;
                if closed {
                    Outcome::Feasible(sol)
                } else {
                    Outcome::ResourceLimit(Some(sol), stats)
                }
            }
        }
    }
}

/// Minimises or maximises the model objective to within `cfg.obj_tol`.
pub fn optimize(model: &Model, cfg: &SearchConfig) -> Result<Outcome, ModelError> {
    let objective = model
        .objective()
        .ok_or_else(|| ModelError::Invalid("optimize needs an objective".into()))?;
    let mut eng = Engine::new(model, cfg)?;
    let Some(root) = eng.root() else {
        eng.nodes = 1;
        return Ok(Outcome::Infeasible(eng.stats()));
    };
    let mut opt = Optimizer {
        eng,
        obj: objective.var,
        sign: match objective.direction {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        },
        ub: f64::INFINITY,
        best: None,
        seq: 0,
    };
    Ok(opt.run(root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::model::Cmp;

    #[test]
    fn contradictory_finite_model_is_infeasible() {
        let mut m = Model::new();
        let x = m.int_var("x", 0, 1);
        m.post_rel(x, Cmp::Eq, 1.0);
        m.post_rel(x, Cmp::Eq, 0.0);
        let out = solve_satisfaction(&m, &SearchConfig::default()).unwrap();
        assert!(out.is_infeasible());
    }

    #[test]
    fn minimise_bound_variable() {
        let mut m = Model::new();
        let x = m.real_var("x", 2.0, 5.0).unwrap();
        m.minimize(x);
        let out = optimize(&m, &SearchConfig::default()).unwrap();
        let sol = out.solution().unwrap();
        assert!(out.is_feasible());
        assert!((sol.value(x) - 2.0).abs() <= 1e-3);
        let obj = sol.objective.unwrap();
        assert!(obj.lo() <= 2.0 && 2.0 <= obj.hi() && obj.width() <= 1e-3 + 1e-12);
    }

    #[test]
    fn maximise_on_a_disc() {
        let mut m = Model::new();
        let x = m.real_var("x", -2.0, 2.0).unwrap();
        let y = m.real_var("y", -2.0, 2.0).unwrap();
        m.post_rel(Expr::from(x).sqr() + Expr::from(y).sqr(), Cmp::Le, 1.0);
        let s = m.define("s", x + y);
        m.maximize(s);
        let out = optimize(&m, &SearchConfig::default()).unwrap();
        let obj = out.solution().unwrap().objective.unwrap();
        let opt = 2f64.sqrt();
        assert!(obj.lo() <= opt + 1e-9 && opt <= obj.hi() + 1e-9, "{obj:?}");
        assert!(obj.width() <= 1e-3 + 1e-9);
    }

    #[test]
    fn node_limit_reports_resource_limit() {
        let mut m = Model::new();
        let xs: Vec<VarId> = (0..12).map(|i| m.int_var(&format!("x{i}"), 0, 1)).collect();
        // parity constraint with no solution, hard to refute by bounds alone
        m.post_rel(Expr::sum(xs.iter().map(|&x| Expr::from(x) * 2.0)), Cmp::Eq, 7.0);
        let cfg = SearchConfig {
            node_limit: Some(5),
            ..SearchConfig::default()
        };
        let out = solve_satisfaction(&m, &cfg).unwrap();
        assert!(matches!(out, Outcome::ResourceLimit(None, _)));
    }

    use crate::kernel::expr::Expr;
}
