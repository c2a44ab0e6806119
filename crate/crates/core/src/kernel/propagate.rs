//! Domain stores and propagation to a fixpoint.
//!
//! Arithmetic relations are filtered with HC4-revise: a forward interval
//! evaluation of the expression tree followed by a backward projection of
//! the constraint's target range onto every sub-expression. Reified
//! relations, conjunctions and global cardinality have dedicated
//! propagators. A change to a real domain re-triggers its watchers only
//! when the width shrinks by more than `SIGNIFICANT_SHRINK` relative.

use super::domain::{Domain, FiniteSet};
use super::expr::Expr;
use super::interval::Interval;
use super::model::{Cmp, ConstraintKind, Model, VarId};
use crate::dist;
use std::collections::VecDeque;

/// Relative width reduction below which a real-domain update does not wake
/// other propagators.
pub const SIGNIFICANT_SHRINK: f64 = 1e-3;

/// Step cap for exact fixpoint runs.
const EXACT_BUDGET: usize = 5_000_000;

/// Tolerance used when rounding real bounds to integer domains.
const INT_SLACK: f64 = 1e-9;

/// Marker for a provably empty domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fail;

pub type PropResult = Result<(), Fail>;

/// One domain per variable plus the list of significantly changed variables
/// since the last drain.
#[derive(Clone, Debug)]
pub struct Store {
    doms: Vec<Domain>,
    changed: Vec<u32>,
    exact: bool,
}

fn significant(old: Interval, new: Interval) -> bool {
    if old.lo().is_infinite() != new.lo().is_infinite()
        || old.hi().is_infinite() != new.hi().is_infinite()
    {
        return true;
    }
    let ow = old.width();
    if !ow.is_finite() {
        return false;
    }
    let shrink = ow - new.width();
    shrink > SIGNIFICANT_SHRINK * ow && shrink > 1e-14 * (1.0 + new.mag())
}

pub(crate) fn int_bounds(iv: Interval) -> (i64, i64) {
    ((iv.lo() - INT_SLACK).ceil() as i64, (iv.hi() + INT_SLACK).floor() as i64)
}

impl Store {
    pub fn new(doms: Vec<Domain>) -> Store {
        Store {
            doms,
            changed: Vec::new(),
            exact: false,
        }
    }

    pub fn domains(&self) -> &[Domain] {
        &self.doms
    }

    pub fn domain(&self, v: VarId) -> &Domain {
        &self.doms[v.index()]
    }

    pub fn len(&self) -> usize {
        self.doms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doms.is_empty()
    }

    /// Interval hull of the domain of `v`. Domains in a live store are never empty.
    pub fn hull(&self, v: VarId) -> Interval {
        self.doms[v.index()]
            .hull()
            .expect("empty domain in live store")
    }

    pub fn is_fixed(&self, v: VarId) -> bool {
        match &self.doms[v.index()] {
            Domain::Finite(s) => s.len() == 1,
            Domain::Real(iv) => iv.is_point(),
        }
    }

    pub fn int_value(&self, v: VarId) -> Option<i64> {
        match &self.doms[v.index()] {
            Domain::Finite(s) => s.value(),
            Domain::Real(_) => None,
        }
    }

    fn note(&mut self, v: VarId) {
        self.changed.push(v.0);
    }

    pub(crate) fn take_changed(&mut self) -> Vec<u32> {
        std::mem::take(&mut self.changed)
    }

    /// Intersects the domain of `v` with `range` (rounded inward to integers
    /// for finite domains).
    pub fn narrow(&mut self, v: VarId, range: Interval) -> PropResult {
        match &mut self.doms[v.index()] {
            Domain::Finite(s) => {
                let (lo, hi) = int_bounds(range);
                if s.restrict(lo, hi) {
                    if s.is_empty() {
                        return Err(Fail);
                    }
                    self.note(v);
                }
                Ok(())
            }
            Domain::Real(iv) => {
                let old = *iv;
                let new = old.intersect(&range).ok_or(Fail)?;
                if new != old {
                    *iv = new;
                    if self.exact || significant(old, new) {
                        self.note(v);
                    }
                }
                Ok(())
            }
        }
    }

    /// Replaces the domain of `v` with `range` when `range` lies inside it.
    /// Used for branching; always records a change.
    pub fn set_real(&mut self, v: VarId, range: Interval) -> PropResult {
        match &mut self.doms[v.index()] {
            Domain::Real(iv) => {
                *iv = iv.intersect(&range).ok_or(Fail)?;
                self.note(v);
                Ok(())
            }
            Domain::Finite(_) => self.narrow(v, range),
        }
    }

    pub fn remove_value(&mut self, v: VarId, x: i64) -> PropResult {
        if let Domain::Finite(s) = &mut self.doms[v.index()] {
            if s.remove(x) {
                if s.is_empty() {
                    return Err(Fail);
                }
                self.note(v);
            }
        }
        Ok(())
    }

    pub fn assign(&mut self, v: VarId, x: i64) -> PropResult {
        match &mut self.doms[v.index()] {
            Domain::Finite(s) => {
                if s.assign(x) {
                    if s.is_empty() {
                        return Err(Fail);
                    }
                    self.note(v);
                }
                Ok(())
            }
            Domain::Real(_) => self.narrow(v, Interval::point(x as f64)),
        }
    }

    fn finite(&self, v: VarId) -> Option<&FiniteSet> {
        match &self.doms[v.index()] {
            Domain::Finite(s) => Some(s),
            Domain::Real(_) => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Compiled expression trees

#[derive(Clone, Debug)]
enum Op {
    Const(Interval),
    Var(VarId),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    Sqr(u32),
    Pow(u32, u32),
    Sqrt(u32),
    Sum(u32, u32),
    NormalCdf(u32),
    PoissonBelow(f64, u32),
    ChiTerm(u32, u32),
}

/// A flattened expression; children always precede their parent and the
/// root is the last node.
#[derive(Clone, Debug)]
pub(crate) struct Tree {
    ops: Vec<Op>,
    integral: Vec<bool>,
    kids: Vec<u32>,
}

impl Tree {
    pub(crate) fn compile(expr: &Expr, is_int: &dyn Fn(VarId) -> bool) -> Tree {
        let mut t = Tree {
            ops: Vec::new(),
            integral: Vec::new(),
            kids: Vec::new(),
        };
        t.push_expr(expr, is_int);
        t
    }

    fn push(&mut self, op: Op, integral: bool) -> u32 {
        self.ops.push(op);
        self.integral.push(integral);
        (self.ops.len() - 1) as u32
    }

    fn push_expr(&mut self, e: &Expr, is_int: &dyn Fn(VarId) -> bool) -> u32 {
        match e {
            Expr::Const(c) => self.push(Op::Const(Interval::point(*c)), c.fract() == 0.0),
            Expr::Var(v) => self.push(Op::Var(*v), is_int(*v)),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let ia = self.push_expr(a, is_int);
                let ib = self.push_expr(b, is_int);
                let both = self.integral[ia as usize] && self.integral[ib as usize];
                match e {
                    Expr::Add(..) => self.push(Op::Add(ia, ib), both),
                    Expr::Sub(..) => self.push(Op::Sub(ia, ib), both),
                    Expr::Mul(..) => self.push(Op::Mul(ia, ib), both),
                    _ => self.push(Op::Div(ia, ib), false),
                }
            }
            Expr::Neg(a) => {
                let ia = self.push_expr(a, is_int);
                let int = self.integral[ia as usize];
                self.push(Op::Neg(ia), int)
            }
            Expr::Sqr(a) => {
                let ia = self.push_expr(a, is_int);
                let int = self.integral[ia as usize];
                self.push(Op::Sqr(ia), int)
            }
            Expr::Pow(a, k) => {
                let ia = self.push_expr(a, is_int);
                let int = self.integral[ia as usize];
                self.push(Op::Pow(ia, *k), int)
            }
            Expr::Sqrt(a) => {
                let ia = self.push_expr(a, is_int);
                self.push(Op::Sqrt(ia), false)
            }
            Expr::Sum(ts) => {
                let idx: Vec<u32> = ts.iter().map(|t| self.push_expr(t, is_int)).collect();
                let int = idx.iter().all(|&i| self.integral[i as usize]);
                let start = self.kids.len() as u32;
                self.kids.extend(&idx);
                self.push(Op::Sum(start, idx.len() as u32), int)
            }
            Expr::NormalCdf(a) => {
                let ia = self.push_expr(a, is_int);
                self.push(Op::NormalCdf(ia), false)
            }
            Expr::PoissonBelow { bound, rate } => {
                let ir = self.push_expr(rate, is_int);
                self.push(Op::PoissonBelow(*bound, ir), false)
            }
            Expr::ChiTerm(o, ex) => {
                let io = self.push_expr(o, is_int);
                let ie = self.push_expr(ex, is_int);
                self.push(Op::ChiTerm(io, ie), false)
            }
        }
    }

    pub(crate) fn root_integral(&self) -> bool {
        *self.integral.last().unwrap()
    }

    fn root(&self) -> usize {
        self.ops.len() - 1
    }

    /// The root variable when the whole tree is a single variable.
    fn single_var(&self) -> Option<VarId> {
        match self.ops.as_slice() {
            [Op::Var(v)] => Some(*v),
            _ => None,
        }
    }

    fn vars(&self, out: &mut Vec<VarId>) {
        for op in &self.ops {
            if let Op::Var(v) = op {
                out.push(*v);
            }
        }
    }

    /// Forward interval evaluation into `vals`; `None` if some node is empty.
    fn forward(&self, doms: &[Domain], vals: &mut Vec<Interval>) -> Option<Interval> {
        vals.clear();
        for (i, op) in self.ops.iter().enumerate() {
            let v = |k: &u32| vals[*k as usize];
            let x = match op {
                Op::Const(c) => *c,
                Op::Var(var) => doms[var.index()].hull()?,
                Op::Add(a, b) => v(a).add(v(b)),
                Op::Sub(a, b) => v(a).sub(v(b)),
                Op::Mul(a, b) => v(a).mul(v(b)),
                Op::Div(a, b) => v(a).div(v(b))?,
                Op::Neg(a) => v(a).neg(),
                Op::Sqr(a) => v(a).sqr(),
                Op::Pow(a, k) => v(a).powi(*k),
                Op::Sqrt(a) => v(a).sqrt()?,
                Op::Sum(s, n) => sum_forward(&self.kids[*s as usize..(*s + *n) as usize], vals),
                Op::NormalCdf(a) => dist::std_normal_cdf_interval(v(a)),
                Op::PoissonBelow(bound, r) => dist::poisson_below_interval(*bound, v(r)),
                Op::ChiTerm(o, e) => chi_term_range(v(o), v(e))?,
            };
            let x = if self.integral[i] { round_int(x)? } else { x };
            vals.push(x);
        }
        vals.last().copied()
    }

    /// Backward projection; `vals` must hold a forward evaluation whose root
    /// has already been intersected with the target.
    fn backward(&self, store: &mut Store, vals: &mut [Interval]) -> PropResult {
        for i in (0..self.ops.len()).rev() {
            let p = vals[i];
            match &self.ops[i] {
                Op::Const(_) => {}
                Op::Var(var) => store.narrow(*var, p)?,
                Op::Add(a, b) => {
                    let na = self.set(vals, *a, p.sub(vals[*b as usize]))?;
                    self.set(vals, *b, p.sub(na))?;
                }
                Op::Sub(a, b) => {
                    let na = self.set(vals, *a, p.add(vals[*b as usize]))?;
                    self.set(vals, *b, na.sub(p))?;
                }
                Op::Mul(a, b) => {
                    if let Some(r) = factor_preimage(p, vals[*b as usize]) {
                        self.set(vals, *a, r)?;
                    }
                    if let Some(r) = factor_preimage(p, vals[*a as usize]) {
                        self.set(vals, *b, r)?;
                    }
                }
                Op::Div(a, b) => {
                    let na = self.set(vals, *a, p.mul(vals[*b as usize]))?;
                    if let Some(r) = factor_preimage(na, p) {
                        self.set(vals, *b, r)?;
                    }
                }
                Op::Neg(a) => {
                    self.set(vals, *a, p.neg())?;
                }
                Op::Sqr(a) => {
                    let r = p.intersect(&Interval::NONNEG).ok_or(Fail)?.sqrt().ok_or(Fail)?;
                    let cur = vals[*a as usize];
                    let hull = even_preimage(r, cur).ok_or(Fail)?;
                    self.set(vals, *a, hull)?;
                }
                Op::Pow(a, k) => {
                    let cur = vals[*a as usize];
                    let k = *k;
                    if k == 0 {
                        continue;
                    }
                    if k % 2 == 1 {
                        let lo = signed_root(p.lo(), k, false);
                        let hi = signed_root(p.hi(), k, true);
                        self.set(vals, *a, Interval::new(lo, hi))?;
                    } else {
                        let q = p.intersect(&Interval::NONNEG).ok_or(Fail)?;
                        let r = Interval::new(signed_root(q.lo(), k, false).max(0.0), signed_root(q.hi(), k, true));
                        let hull = even_preimage(r, cur).ok_or(Fail)?;
                        self.set(vals, *a, hull)?;
                    }
                }
                Op::Sqrt(a) => {
                    let q = p.intersect(&Interval::NONNEG).ok_or(Fail)?;
                    let sq = q.sqr().intersect(&Interval::NONNEG).ok_or(Fail)?;
                    self.set(vals, *a, sq)?;
                }
                Op::Sum(s, n) => {
                    let kids = &self.kids[*s as usize..(*s + *n) as usize];
                    sum_backward(self, kids, p, vals)?;
                }
                Op::NormalCdf(a) => {
                    let r = dist::std_normal_cdf_preimage(p, vals[*a as usize]).ok_or(Fail)?;
                    self.set(vals, *a, r)?;
                }
                Op::PoissonBelow(bound, r) => {
                    let pre = dist::poisson_below_preimage(*bound, p, vals[*r as usize]).ok_or(Fail)?;
                    self.set(vals, *r, pre)?;
                }
                Op::ChiTerm(o, e) => chi_term_backward(self, *o, *e, p, vals)?,
            }
        }
        Ok(())
    }

    fn set(&self, vals: &mut [Interval], k: u32, r: Interval) -> Result<Interval, Fail> {
        let k = k as usize;
        let mut x = vals[k].intersect(&r).ok_or(Fail)?;
        if self.integral[k] {
            x = round_int(x).ok_or(Fail)?;
        }
        vals[k] = x;
        Ok(x)
    }
}

/// Values `x` with `x·y ∈ prod` for some `y ∈ other`; `None` when
/// unconstrained (both ranges contain zero).
fn factor_preimage(prod: Interval, other: Interval) -> Option<Interval> {
    if prod.contains_zero() && other.contains_zero() {
        return None;
    }
    prod.div(other)
}

fn round_int(x: Interval) -> Option<Interval> {
    let lo = if x.lo().is_finite() { (x.lo() - INT_SLACK).ceil() } else { x.lo() };
    let hi = if x.hi().is_finite() { (x.hi() + INT_SLACK).floor() } else { x.hi() };
    Interval::checked(lo, hi)
}

/// Hull of `(r ∪ −r) ∩ cur` for a nonnegative `r`.
fn even_preimage(r: Interval, cur: Interval) -> Option<Interval> {
    let pos = r.intersect(&cur);
    let neg = r.neg().intersect(&cur);
    match (pos, neg) {
        (Some(a), Some(b)) => Some(a.hull(&b)),
        (Some(a), None) | (None, Some(a)) => Some(a),
        (None, None) => None,
    }
}

/// Outward-widened real k-th root of `x` (odd k allows negative `x`).
fn signed_root(x: f64, k: u32, upward: bool) -> f64 {
    if x.is_infinite() {
        return x;
    }
    let r = x.abs().powf(1.0 / k as f64).copysign(x);
    let slack = 1e-14 * r.abs() + f64::MIN_POSITIVE;
    if upward {
        r + slack
    } else {
        r - slack
    }
}

fn sum_forward(kids: &[u32], vals: &[Interval]) -> Interval {
    let mut acc = Interval::ZERO;
    for &k in kids {
        acc = acc.add(vals[k as usize]);
    }
    acc
}

/// Each child of a sum lies in `target − Σ others`.
fn sum_backward(tree: &Tree, kids: &[u32], target: Interval, vals: &mut [Interval]) -> PropResult {
    use super::interval::{add_down, add_up, sub_down, sub_up};
    // finite parts of the bound sums plus counts of infinite contributions
    let (mut lo_sum, mut hi_sum, mut lo_inf, mut hi_inf) = (0.0, 0.0, 0usize, 0usize);
    for &k in kids {
        let v = vals[k as usize];
        if v.lo().is_finite() {
            lo_sum = add_down(lo_sum, v.lo());
        } else {
            lo_inf += 1;
        }
        if v.hi().is_finite() {
            hi_sum = add_up(hi_sum, v.hi());
        } else {
            hi_inf += 1;
        }
    }
    for &k in kids {
        let v = vals[k as usize];
        let others_lo = if v.lo().is_finite() {
            if lo_inf > 0 { f64::NEG_INFINITY } else { sub_down(lo_sum, v.lo()) }
        } else if lo_inf > 1 {
            f64::NEG_INFINITY
        } else {
            lo_sum
        };
        let others_hi = if v.hi().is_finite() {
            if hi_inf > 0 { f64::INFINITY } else { sub_up(hi_sum, v.hi()) }
        } else if hi_inf > 1 {
            f64::INFINITY
        } else {
            hi_sum
        };
        // child ∈ [target.lo − others_hi, target.hi − others_lo]
        let lo = if target.lo().is_finite() && others_hi.is_finite() {
            sub_down(target.lo(), others_hi)
        } else {
            f64::NEG_INFINITY
        };
        let hi = if target.hi().is_finite() && others_lo.is_finite() {
            sub_up(target.hi(), others_lo)
        } else {
            f64::INFINITY
        };
        let r = Interval::checked(lo, hi).ok_or(Fail)?;
        tree.set(vals, k, r)?;
    }
    Ok(())
}

fn chi_point(o: f64, e: f64) -> Interval {
    let d = Interval::point(o).sub(Interval::point(e));
    d.sqr().div(Interval::point(e)).unwrap_or(Interval::ENTIRE)
}

/// Exact range of `(o − e)² / e` over a box, with `0/0 = 0`.
pub(crate) fn chi_term_range(o: Interval, e: Interval) -> Option<Interval> {
    let e = e.intersect(&Interval::NONNEG)?;
    if o.lo() < 0.0 {
        // outside the count setting; plain interval evaluation
        if e.lo() == 0.0 {
            return Some(Interval::NONNEG);
        }
        return o.sub(e).sqr().div(e)?.intersect(&Interval::NONNEG);
    }
    if e.hi() == 0.0 {
        return if o.lo() > 0.0 {
            None
        } else {
            Some(Interval::ZERO)
        };
    }
    let lo = if o.hi() >= e.lo() && o.lo() <= e.hi() {
        0.0
    } else if o.hi() < e.lo() {
        chi_point(o.hi(), e.lo()).lo()
    } else {
        chi_point(o.lo(), e.hi()).lo()
    };
    let mut hi: f64 = 0.0;
    for oc in [o.lo(), o.hi()] {
        for ec in [e.lo(), e.hi()] {
            let v = if ec == 0.0 {
                if oc == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else if oc.is_infinite() || ec.is_infinite() {
                f64::INFINITY
            } else {
                chi_point(oc, ec).hi()
            };
            hi = hi.max(v);
        }
    }
    Interval::checked(lo.max(0.0), hi)
}

fn chi_term_backward(tree: &Tree, o: u32, e: u32, p: Interval, vals: &mut [Interval]) -> PropResult {
    let r = p.hi();
    if !r.is_finite() {
        return Ok(());
    }
    let ri = Interval::point(r);
    let ev = vals[e as usize].intersect(&Interval::NONNEG).ok_or(Fail)?;
    // observed within expected ± sqrt(r · expected)
    if ev.is_bounded() {
        let up = |x: f64| {
            let xi = Interval::point(x);
            xi.add(ri.mul(xi).sqrt().unwrap_or(Interval::ZERO)).hi()
        };
        let low = |x: f64| {
            let xi = Interval::point(x);
            xi.sub(ri.mul(xi).sqrt().unwrap_or(Interval::ZERO)).lo()
        };
        let vertex = r / 4.0;
        let mut lo = low(ev.lo()).min(low(ev.hi()));
        if ev.contains(vertex) {
            lo = lo.min(-vertex - 1e-12 * vertex.abs());
        }
        let hi = up(ev.hi());
        tree.set(vals, o, Interval::new(lo, hi))?;
    }
    // expected within the roots of e² − (2o + r) e + o² = 0, increasing in o
    let ov = vals[o as usize];
    if ov.lo() >= 0.0 && ov.is_bounded() {
        let root = |x: f64, upper: bool| {
            let xi = Interval::point(x);
            let b = xi.scale(2.0).add(ri);
            let disc = ri.sqr().add(ri.mul(xi).scale(4.0)).sqrt().unwrap_or(Interval::ZERO);
            let v = if upper { b.add(disc) } else { b.sub(disc) };
            v.scale(0.5)
        };
        let lo = root(ov.lo(), false).lo().max(0.0);
        let hi = root(ov.hi(), true).hi();
        if let Some(r) = Interval::checked(lo, hi) {
            tree.set(vals, e, r)?;
        } else {
            return Err(Fail);
        }
    }
    Ok(())
}

/// Interval image of `expr` over `doms`; `None` when provably empty.
pub fn eval_expr(expr: &Expr, doms: &[Domain]) -> Option<Interval> {
    let tree = Tree::compile(expr, &|v| doms[v.index()].is_finite());
    let mut vals = Vec::new();
    tree.forward(doms, &mut vals)
}

// ---------------------------------------------------------------------------
// Relations

#[derive(Clone, Debug)]
enum Target {
    Range(Interval),
    NotEqual(f64),
    Empty,
}

/// `tree cmp rhs` with a constant right-hand side.
#[derive(Clone, Debug)]
struct Relation {
    tree: Tree,
    cmp: Cmp,
    rhs: f64,
}

impl Relation {
    fn compile(lhs: &Expr, cmp: Cmp, rhs: &Expr, is_int: &dyn Fn(VarId) -> bool) -> Relation {
        match (lhs.as_const(), rhs.as_const()) {
            (_, Some(c)) => Relation {
                tree: Tree::compile(lhs, is_int),
                cmp,
                rhs: c,
            },
            (Some(c), None) => Relation {
                tree: Tree::compile(rhs, is_int),
                cmp: cmp.flip(),
                rhs: c,
            },
            _ => Relation {
                tree: Tree::compile(&(lhs.clone() - rhs.clone()), is_int),
                cmp,
                rhs: 0.0,
            },
        }
    }

    fn target(&self, cmp: Cmp) -> Target {
        let c = self.rhs;
        let int = self.tree.root_integral();
        let range = |lo: f64, hi: f64| match Interval::checked(lo, hi) {
            Some(iv) => Target::Range(iv),
            None => Target::Empty,
        };
        match cmp {
            Cmp::Eq => {
                if int && c.fract() != 0.0 {
                    Target::Empty
                } else {
                    range(c, c)
                }
            }
            Cmp::Ne => Target::NotEqual(c),
            Cmp::Le => range(f64::NEG_INFINITY, if int { c.floor() } else { c }),
            Cmp::Lt => range(f64::NEG_INFINITY, if int { c.ceil() - 1.0 } else { c }),
            Cmp::Ge => range(if int { c.ceil() } else { c }, f64::INFINITY),
            Cmp::Gt => range(if int { c.floor() + 1.0 } else { c }, f64::INFINITY),
        }
    }

    /// Whether `cmp` certainly holds for every value in `v`.
    fn entailed(&self, cmp: Cmp, v: Interval) -> bool {
        let c = self.rhs;
        match cmp {
            Cmp::Eq => v.lo() == c && v.hi() == c,
            Cmp::Ne => !v.contains(c),
            Cmp::Le => v.hi() <= c,
            Cmp::Lt => v.hi() < c,
            Cmp::Ge => v.lo() >= c,
            Cmp::Gt => v.lo() > c,
        }
    }

    fn enforce(&self, cmp: Cmp, store: &mut Store, vals: &mut Vec<Interval>) -> PropResult {
        let v = self.tree.forward(&store.doms, vals).ok_or(Fail)?;
        match self.target(cmp) {
            Target::Empty => Err(Fail),
            Target::NotEqual(c) => {
                if v.is_point() && v.lo() == c {
                    return Err(Fail);
                }
                if let Some(var) = self.tree.single_var() {
                    if c.fract() == 0.0 && store.finite(var).is_some() {
                        store.remove_value(var, c as i64)?;
                    }
                }
                Ok(())
            }
            Target::Range(t) => {
                let root = self.tree.root();
                vals[root] = v.intersect(&t).ok_or(Fail)?;
                if vals[root] == v {
                    // nothing to project when the target does not cut the range
                    return Ok(());
                }
                self.tree.backward(store, vals)
            }
        }
    }

    /// Whether `cmp` can hold somewhere in `v`, with slack `tol`.
    fn possible(&self, cmp: Cmp, v: Interval, tol: f64) -> bool {
        match self.target(cmp) {
            Target::Empty => false,
            Target::NotEqual(c) => !(v.is_point() && v.lo() == c),
            Target::Range(t) => v.intersect(&t.inflate(tol, 0.0)).is_some(),
        }
    }
}

// ---------------------------------------------------------------------------
// Propagators

#[derive(Clone, Debug)]
enum Prop {
    Rel(Relation),
    Reified { flag: VarId, rel: Relation },
    And { output: VarId, inputs: Vec<VarId> },
    Gcc(Gcc),
}

#[derive(Clone, Debug)]
struct Gcc {
    vars: Vec<VarId>,
    values: Vec<i64>,
    counts: Vec<VarId>,
    closed: bool,
}

impl Gcc {
    fn propagate(&self, store: &mut Store) -> PropResult {
        let in_values = |x: i64| self.values.contains(&x);
        if self.closed {
            for &x in &self.vars {
                let s = store.finite(x).ok_or(Fail)?;
                let outside: Vec<i64> = s.iter().filter(|&v| !in_values(v)).collect();
                for v in outside {
                    store.remove_value(x, v)?;
                }
            }
        }
        for _round in 0..8 {
            let before = store.changed.len();
            let m = self.values.len();
            let mut mand = vec![0i64; m];
            let mut poss = vec![0i64; m];
            let (mut certain_in, mut maybe_in) = (0i64, 0i64);
            for &x in &self.vars {
                let s = store.finite(x).ok_or(Fail)?;
                let mut any = false;
                let mut hits = 0usize;
                for (j, &v) in self.values.iter().enumerate() {
                    if s.contains(v) {
                        poss[j] += 1;
                        any = true;
                        hits += 1;
                        if s.len() == 1 {
                            mand[j] += 1;
                        }
                    }
                }
                if any {
                    maybe_in += 1;
                }
                if hits == s.len() {
                    certain_in += 1;
                }
            }
            for j in 0..m {
                store.narrow(self.counts[j], Interval::new(mand[j] as f64, poss[j] as f64))?;
            }
            // the counts sum to the number of variables taking a listed value
            let bounds: Vec<(i64, i64)> = self
                .counts
                .iter()
                .map(|&c| {
                    let s = store.finite(c).unwrap();
                    (s.min().unwrap(), s.max().unwrap())
                })
                .collect();
            let sum_min: i64 = bounds.iter().map(|b| b.0).sum();
            let sum_max: i64 = bounds.iter().map(|b| b.1).sum();
            if sum_min > maybe_in || sum_max < certain_in {
                return Err(Fail);
            }
            for j in 0..m {
                let lo = certain_in - (sum_max - bounds[j].1);
                let hi = maybe_in - (sum_min - bounds[j].0);
                store.narrow(self.counts[j], Interval::new(lo as f64, hi.max(lo) as f64))?;
                if hi < lo {
                    return Err(Fail);
                }
            }
            for j in 0..m {
                let s = store.finite(self.counts[j]).unwrap();
                let (cmin, cmax) = (s.min().unwrap(), s.max().unwrap());
                let v = self.values[j];
                if cmax == mand[j] && poss[j] > mand[j] {
                    for &x in &self.vars {
                        if store.finite(x).unwrap().len() > 1 {
                            store.remove_value(x, v)?;
                        }
                    }
                } else if cmin == poss[j] && poss[j] > mand[j] {
                    for &x in &self.vars {
                        if store.finite(x).unwrap().contains(v) {
                            store.assign(x, v)?;
                        }
                    }
                }
            }
            if !self.closed {
                let sum_min: i64 = self.counts.iter().map(|&c| store.finite(c).unwrap().min().unwrap()).sum();
                let sum_max: i64 = self.counts.iter().map(|&c| store.finite(c).unwrap().max().unwrap()).sum();
                if sum_min == maybe_in && maybe_in > certain_in {
                    // every variable that can take a listed value must
                    for &x in &self.vars {
                        let s = store.finite(x).unwrap();
                        if s.iter().any(in_values) {
                            let outside: Vec<i64> = s.iter().filter(|&v| !in_values(v)).collect();
                            for v in outside {
                                store.remove_value(x, v)?;
                            }
                        }
                    }
                } else if sum_max == certain_in && maybe_in > certain_in {
                    // variables not certainly inside must stay outside
                    for &x in &self.vars {
                        let s = store.finite(x).unwrap();
                        if !s.iter().all(in_values) {
                            let inside: Vec<i64> = s.iter().filter(|&v| in_values(v)).collect();
                            for v in inside {
                                store.remove_value(x, v)?;
                            }
                        }
                    }
                }
            }
            if store.changed.len() == before {
                break;
            }
        }
        Ok(())
    }

    fn satisfied(&self, store: &Store) -> bool {
        let mut tally = vec![0i64; self.values.len()];
        for &x in &self.vars {
            let Some(v) = store.int_value(x) else { return false };
            match self.values.iter().position(|&w| w == v) {
                Some(j) => tally[j] += 1,
                None if self.closed => return false,
                None => {}
            }
        }
        self.counts
            .iter()
            .zip(&tally)
            .all(|(&c, &t)| store.int_value(c) == Some(t))
    }
}

fn bool_state(store: &Store, v: VarId) -> Result<Option<bool>, Fail> {
    let s = store.finite(v).ok_or(Fail)?;
    Ok(match (s.min(), s.max()) {
        (Some(0), Some(0)) => Some(false),
        (Some(1), Some(1)) => Some(true),
        (Some(_), Some(_)) => None,
        _ => return Err(Fail),
    })
}

impl Prop {
    fn propagate(&self, store: &mut Store, vals: &mut Vec<Interval>) -> PropResult {
        match self {
            Prop::Rel(r) => r.enforce(r.cmp, store, vals),
            Prop::Reified { flag, rel } => match bool_state(store, *flag)? {
                Some(true) => rel.enforce(rel.cmp, store, vals),
                Some(false) => rel.enforce(rel.cmp.negate(), store, vals),
                None => {
                    let v = rel.tree.forward(&store.doms, vals).ok_or(Fail)?;
                    if rel.entailed(rel.cmp, v) {
                        store.assign(*flag, 1)?;
                    } else if rel.entailed(rel.cmp.negate(), v) || !rel.possible(rel.cmp, v, 0.0) {
                        store.assign(*flag, 0)?;
                        rel.enforce(rel.cmp.negate(), store, vals)?;
                    } else if !rel.possible(rel.cmp.negate(), v, 0.0) {
                        store.assign(*flag, 1)?;
                        rel.enforce(rel.cmp, store, vals)?;
                    }
                    Ok(())
                }
            },
            Prop::And { output, inputs } => {
                let out = bool_state(store, *output)?;
                if out == Some(true) {
                    for &i in inputs {
                        store.assign(i, 1)?;
                    }
                    return Ok(());
                }
                let mut open = Vec::new();
                for &i in inputs {
                    match bool_state(store, i)? {
                        Some(false) => return store.assign(*output, 0),
                        Some(true) => {}
                        None => open.push(i),
                    }
                }
                if open.is_empty() {
                    store.assign(*output, 1)
                } else if out == Some(false) && open.len() == 1 {
                    store.assign(open[0], 0)
                } else {
                    Ok(())
                }
            }
            Prop::Gcc(g) => g.propagate(store),
        }
    }

    fn satisfied(&self, store: &Store, tol: f64, vals: &mut Vec<Interval>) -> bool {
        match self {
            Prop::Rel(r) => match r.tree.forward(&store.doms, vals) {
                Some(v) => r.possible(r.cmp, v, tol),
                None => false,
            },
            Prop::Reified { flag, rel } => {
                let Some(v) = rel.tree.forward(&store.doms, vals) else { return false };
                match store.int_value(*flag) {
                    Some(1) => rel.possible(rel.cmp, v, tol),
                    Some(0) => rel.possible(rel.cmp.negate(), v, tol),
                    _ => false,
                }
            }
            Prop::And { output, inputs } => {
                let all = inputs.iter().map(|&i| store.int_value(i)).collect::<Option<Vec<_>>>();
                match (all, store.int_value(*output)) {
                    (Some(xs), Some(o)) => (xs.iter().all(|&x| x == 1)) == (o == 1),
                    _ => false,
                }
            }
            Prop::Gcc(g) => g.satisfied(store),
        }
    }

    fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        match self {
            Prop::Rel(r) => r.tree.vars(&mut out),
            Prop::Reified { flag, rel } => {
                out.push(*flag);
                rel.tree.vars(&mut out);
            }
            Prop::And { output, inputs } => {
                out.push(*output);
                out.extend(inputs);
            }
            Prop::Gcc(g) => {
                out.extend(&g.vars);
                out.extend(&g.counts);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// The compiled propagators of a model with their watch lists.
#[derive(Clone, Debug)]
pub struct Propagators {
    props: Vec<Prop>,
    watch: Vec<Vec<u32>>,
}

impl Propagators {
    pub fn compile(model: &Model) -> Propagators {
        let is_int = |v: VarId| model.var(v).domain.is_finite();
        let props: Vec<Prop> = model
            .constraints()
            .iter()
            .map(|c| match &c.kind {
                ConstraintKind::Rel { lhs, cmp, rhs } => {
                    Prop::Rel(Relation::compile(lhs, *cmp, rhs, &is_int))
                }
                ConstraintKind::Reified { flag, lhs, cmp, rhs } => Prop::Reified {
                    flag: *flag,
                    rel: Relation::compile(lhs, *cmp, rhs, &is_int),
                },
                ConstraintKind::And { output, inputs } => Prop::And {
                    output: *output,
                    inputs: inputs.clone(),
                },
                ConstraintKind::GlobalCardinality {
                    vars,
                    values,
                    counts,
                    closed,
                } => Prop::Gcc(Gcc {
                    vars: vars.clone(),
                    values: values.clone(),
                    counts: counts.clone(),
                    closed: *closed,
                }),
            })
            .collect();
        let mut watch = vec![Vec::new(); model.num_vars()];
        for (i, p) in props.iter().enumerate() {
            for v in p.vars() {
                watch[v.index()].push(i as u32);
            }
        }
        Propagators { props, watch }
    }

    pub fn len(&self) -> usize {
        self.props.len()
    }

    pub fn is_empty(&self) -> bool {
        self.props.is_empty()
    }

    /// Runs every propagator to a joint fixpoint.
    pub fn propagate(&self, store: &mut Store) -> PropResult {
        let all: Vec<u32> = (0..self.props.len() as u32).collect();
        store.changed.clear();
        self.run(store, all)
    }

    /// Runs the propagators watching variables changed since the last call.
    pub fn propagate_changed(&self, store: &mut Store) -> PropResult {
        let changed = store.take_changed();
        let mut seeds = Vec::new();
        let mut seen = vec![false; self.props.len()];
        for v in changed {
            for &p in &self.watch[v as usize] {
                if !seen[p as usize] {
                    seen[p as usize] = true;
                    seeds.push(p);
                }
            }
        }
        self.run(store, seeds)
    }

    /// Runs every propagator until no domain changes at all, so that a
    /// second call leaves the store untouched.
    pub fn propagate_exact(&self, store: &mut Store) -> PropResult {
        store.exact = true;
        let all: Vec<u32> = (0..self.props.len() as u32).collect();
        store.changed.clear();
        let out = self.run_with_budget(store, all, EXACT_BUDGET);
        store.exact = false;
        out
    }

    fn run(&self, store: &mut Store, seeds: Vec<u32>) -> PropResult {
        self.run_with_budget(store, seeds, 200 * self.props.len() + 10_000)
    }

    fn run_with_budget(&self, store: &mut Store, seeds: Vec<u32>, budget: usize) -> PropResult {
        let mut queued = vec![false; self.props.len()];
        let mut queue: VecDeque<u32> = VecDeque::with_capacity(seeds.len());
        for p in seeds {
            if !queued[p as usize] {
                queued[p as usize] = true;
                queue.push_back(p);
            }
        }
        let mut vals = Vec::with_capacity(64);
        let mut steps = 0usize;
        while let Some(p) = queue.pop_front() {
            queued[p as usize] = false;
            steps += 1;
            if steps > budget {
                break;
            }
            self.props[p as usize].propagate(store, &mut vals)?;
            for v in store.take_changed() {
                for &w in &self.watch[v as usize] {
                    if !queued[w as usize] {
                        queued[w as usize] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        store.changed.clear();
        Ok(())
    }

    /// Whether every constraint can hold on the store within `tol`.
    pub fn satisfied(&self, store: &Store, tol: f64) -> bool {
        let mut vals = Vec::new();
        self.props.iter().all(|p| p.satisfied(store, tol, &mut vals))
    }

    /// Index of the first constraint not satisfiable on `store`.
    pub fn first_violation(&self, store: &Store, tol: f64) -> Option<usize> {
        let mut vals = Vec::new();
        self.props.iter().position(|p| !p.satisfied(store, tol, &mut vals))
    }
}

/// Contracts `store` to a propagation fixpoint of `model`'s constraints.
/// Returns `None` when some domain becomes empty.
pub fn propagate(model: &Model, store: &Store) -> Option<Store> {
    let props = Propagators::compile(model);
    let mut out = store.clone();
    props.propagate_exact(&mut out).ok().map(|_| out)
}
