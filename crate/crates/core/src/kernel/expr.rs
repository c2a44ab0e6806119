//! Arithmetic expression trees over model variables.

use super::model::VarId;
use crate::dist::{poisson_below, std_normal_cdf};
use std::ops;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(VarId),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sqr(Box<Expr>),
    Pow(Box<Expr>, u32),
    Sqrt(Box<Expr>),
    Sum(Vec<Expr>),
    /// Standard normal CDF of the argument.
    NormalCdf(Box<Expr>),
    /// `P(X < bound)` for `X ~ Poisson(rate)`.
    PoissonBelow { bound: f64, rate: Box<Expr> },
    /// One Pearson term `(observed - expected)² / expected`, with `0/0 = 0`.
    ChiTerm(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(v: VarId) -> Expr {
        Expr::Var(v)
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let terms: Vec<Expr> = terms.into_iter().collect();
        match terms.len() {
            0 => Expr::Const(0.0),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr::Sum(terms),
        }
    }

    pub fn sqr(self) -> Expr {
        Expr::Sqr(Box::new(self))
    }

    pub fn powi(self, k: u32) -> Expr {
        Expr::Pow(Box::new(self), k)
    }

    pub fn sqrt(self) -> Expr {
        Expr::Sqrt(Box::new(self))
    }

    pub fn normal_cdf(self) -> Expr {
        Expr::NormalCdf(Box::new(self))
    }

    pub fn poisson_below(bound: f64, rate: Expr) -> Expr {
        Expr::PoissonBelow {
            bound,
            rate: Box::new(rate),
        }
    }

    pub fn chi_term(observed: Expr, expected: Expr) -> Expr {
        Expr::ChiTerm(Box::new(observed), Box::new(expected))
    }

    /// Point evaluation given a value for every variable.
    pub fn eval(&self, value: &dyn Fn(VarId) -> f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => value(*v),
            Expr::Add(a, b) => a.eval(value) + b.eval(value),
            Expr::Sub(a, b) => a.eval(value) - b.eval(value),
            Expr::Mul(a, b) => a.eval(value) * b.eval(value),
            Expr::Div(a, b) => a.eval(value) / b.eval(value),
            Expr::Neg(a) => -a.eval(value),
            Expr::Sqr(a) => {
                let x = a.eval(value);
                x * x
            }
            Expr::Pow(a, k) => a.eval(value).powi(*k as i32),
            Expr::Sqrt(a) => a.eval(value).sqrt(),
            Expr::Sum(ts) => ts.iter().map(|t| t.eval(value)).sum(),
            Expr::NormalCdf(a) => std_normal_cdf(a.eval(value)),
            Expr::PoissonBelow { bound, rate } => poisson_below(*bound, rate.eval(value)),
            Expr::ChiTerm(o, e) => {
                let (o, e) = (o.eval(value), e.eval(value));
                if o == e {
                    0.0
                } else {
                    (o - e) * (o - e) / e
                }
            }
        }
    }

    /// Calls `f` on every variable occurrence.
    pub fn visit_vars(&self, f: &mut dyn FnMut(VarId)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Expr::ChiTerm(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Expr::Neg(a) | Expr::Sqr(a) | Expr::Pow(a, _) | Expr::Sqrt(a) | Expr::NormalCdf(a) => {
                a.visit_vars(f)
            }
            Expr::PoissonBelow { rate, .. } => rate.visit_vars(f),
            Expr::Sum(ts) => ts.iter().for_each(|t| t.visit_vars(f)),
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }
}

impl From<VarId> for Expr {
    fn from(v: VarId) -> Self {
        Expr::Var(v)
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::Const(c)
    }
}

impl From<&Expr> for Expr {
    fn from(e: &Expr) -> Self {
        e.clone()
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl<R: Into<Expr>> ops::$trait<R> for Expr {
            type Output = Expr;
            fn $method(self, rhs: R) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs.into()))
            }
        }
        impl<R: Into<Expr>> ops::$trait<R> for VarId {
            type Output = Expr;
            fn $method(self, rhs: R) -> Expr {
                Expr::$variant(Box::new(Expr::Var(self)), Box::new(rhs.into()))
            }
        }
        impl<R: Into<Expr>> ops::$trait<R> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: R) -> Expr {
                Expr::$variant(Box::new(self.clone()), Box::new(rhs.into()))
            }
        }
        impl ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(Expr::Const(self)), Box::new(rhs))
            }
        }
        impl ops::$trait<VarId> for f64 {
            type Output = Expr;
            fn $method(self, rhs: VarId) -> Expr {
                Expr::$variant(Box::new(Expr::Const(self)), Box::new(Expr::Var(rhs)))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl ops::Neg for VarId {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(Expr::Var(self)))
    }
}
