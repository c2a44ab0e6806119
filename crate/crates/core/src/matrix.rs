//! Matrix inversion as algebraic constraints.
//!
//! The inverse of an `n × n` matrix is produced once, symbolically, by
//! fraction-free Gauss-Jordan elimination over integer polynomials in the
//! matrix entries. Every inverse entry is a polynomial divided by the common
//! denominator `det(A)`. Posting substitutes the entry expressions into
//! those templates.

use crate::kernel::{Cmp, Expr, Interval, Model, ModelError, VarId};
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

/// Largest supported dimension.
pub const MAX_DIM: usize = 4;

/// Default lower bound on `|det(A)|`.
pub const DET_EPSILON: f64 = 1e-12;

/// A polynomial with integer coefficients; monomials are exponent vectors
/// over a fixed number of variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u8>, i128>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: i128) -> Poly {
        let mut p = Poly::zero(nvars);
        if c != 0 {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, idx: usize) -> Poly {
        let mut e = vec![0; nvars];
        e[idx] = 1;
        let mut p = Poly::zero(nvars);
        p.terms.insert(e, 1);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(exponents, coefficient)` pairs in lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u8], i128)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    fn add_term(&mut self, e: Vec<u8>, c: i128) {
        match self.terms.entry(e) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                if c != 0 {
                    v.insert(c);
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// Exact division; `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        let (lead_e, &lead_c) = divisor.terms.iter().next_back()?;
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.nvars);
        while let Some((e, &c)) = rem.terms.iter().next_back() {
            if c % lead_c != 0 || e.iter().zip(lead_e).any(|(x, y)| x < y) {
                return None;
            }
            let qe: Vec<u8> = e.iter().zip(lead_e).map(|(x, y)| x - y).collect();
            let mut q = Poly::zero(self.nvars);
            q.terms.insert(qe, c / lead_c);
            rem = rem.sub(&q.mul(divisor));
            quot = quot.add(&q);
        }
        Some(quot)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, &c)| {
                e.iter()
                    .zip(x)
                    .fold(c as f64, |acc, (&k, &v)| acc * v.powi(k as i32))
            })
            .sum()
    }

    /// Expression obtained by substituting `entries` for the variables.
    /// Constant entries are folded into the coefficients.
    pub fn to_expr(&self, entries: &[Expr]) -> Expr {
        let mut constant = 0.0;
        let mut terms = Vec::new();
        for (e, &c) in &self.terms {
            let mut coef = c as f64;
            let mut factors = Vec::new();
            for (idx, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                match entries[idx].as_const() {
                    Some(v) => coef *= v.powi(k as i32),
                    None if k == 1 => factors.push(entries[idx].clone()),
                    None if k == 2 => factors.push(entries[idx].clone().sqr()),
                    None => factors.push(entries[idx].clone().powi(k as u32)),
                }
            }
            if factors.is_empty() {
                constant += coef;
                continue;
            }
            let mut prod = factors.into_iter().reduce(|a, b| a * b).unwrap();
            if coef == -1.0 {
                prod = -prod;
            } else if coef != 1.0 {
                prod = coef * prod;
            }
            terms.push(prod);
        }
        if constant != 0.0 || terms.is_empty() {
            terms.push(Expr::Const(constant));
        }
        Expr::sum(terms)
    }
}

/// Symbolic inverse: `inverse[i][j] = adjugate[i][j] / det`, polynomials in
/// the row-major entries `a_{ij}` (variable index `i·n + j`).
#[derive(Clone, Debug)]
pub struct InverseTemplate {
    pub n: usize,
    pub det: Poly,
    pub adjugate: Vec<Vec<Poly>>,
}

/// Fraction-free Gauss-Jordan on `[A | I]` with natural pivot order.
pub fn symbolic_inverse(n: usize) -> Result<InverseTemplate, ModelError> {
    if n == 0 || n > MAX_DIM {
        return Err(ModelError::Invalid(format!(
            "matrix dimension {n} outside 1..={MAX_DIM}"
        )));
    }
    let nv = n * n;
    let mut rows: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            (0..2 * n)
                .map(|j| {
                    if j < n {
                        Poly::var(nv, i * n + j)
                    } else if j - n == i {
                        Poly::constant(nv, 1)
                    } else {
                        Poly::zero(nv)
                    }
                })
                .collect()
        })
        .collect();
    let mut prev = Poly::constant(nv, 1);
    for k in 0..n {
        let pivot_row = rows[k].clone();
        let pivot = pivot_row[k].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == k {
                continue;
            }
            let factor = row[k].clone();
            for j in 0..2 * n {
                let num = pivot.mul(&row[j]).sub(&factor.mul(&pivot_row[j]));
                row[j] = num
                    .div_exact(&prev)
                    .expect("fraction-free elimination divides exactly");
            }
        }
        prev = pivot;
    }
    let det = rows[n - 1][n - 1].clone();
    let adjugate = rows.iter().map(|r| r[n..].to_vec()).collect();
    Ok(InverseTemplate { n, det, adjugate })
}

/// A square matrix of expressions, stored row-major.
#[derive(Clone, Debug)]
pub struct MatrixVar {
    n: usize,
    entries: Vec<Expr>,
}

impl MatrixVar {
    pub fn new(n: usize, entries: Vec<Expr>) -> Result<MatrixVar, ModelError> {
        if n == 0 || entries.len() != n * n {
            return Err(ModelError::Invalid(format!(
                "a {n}×{n} matrix needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(MatrixVar { n, entries })
    }

    pub fn constant(rows: &[Vec<f64>]) -> Result<MatrixVar, ModelError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(ModelError::Invalid("matrix must be square".into()));
        }
        MatrixVar::new(n, rows.iter().flatten().map(|&v| Expr::Const(v)).collect())
    }

    /// `n × n` fresh auxiliary reals.
    pub fn fresh(model: &mut Model, name: &str, n: usize) -> MatrixVar {
        let entries = (0..n * n)
            .map(|k| Expr::Var(model.aux_real(&format!("{name}[{}][{}]", k / n, k % n), Interval::ENTIRE)))
            .collect();
        MatrixVar { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    /// The entry as a variable, if it is one.
    pub fn var(&self, i: usize, j: usize) -> Option<VarId> {
        match self.get(i, j) {
            Expr::Var(v) => Some(*v),
            _ => None,
        }
    }
}

/// Posts `B = A⁻¹` with `|det(A)| ≥ DET_EPSILON`; returns the determinant
/// variable.
pub fn post_matrix_inversion(
    model: &mut Model,
    a: &MatrixVar,
    b: &MatrixVar,
) -> Result<VarId, ModelError> {
    if a.n != b.n {
        return Err(ModelError::Invalid(format!(
            "matrix_inversion needs equal dimensions, got {} and {}",
            a.n, b.n
        )));
    }
    let tpl = symbolic_inverse(a.n)?;
    Ok(model.scoped("matrix_inversion", |model| {
        let det = model.define("det", tpl.det.to_expr(&a.entries));
        model.post_rel(Expr::Var(det).sqr(), Cmp::Ge, DET_EPSILON * DET_EPSILON);
        for i in 0..a.n {
            for j in 0..a.n {
                let num = tpl.adjugate[i][j].to_expr(&a.entries);
                let entry = b.get(i, j).clone();
                model.post_rel(entry.clone(), Cmp::Eq, num.clone() / det);
                model.post_rel(entry * det, Cmp::Eq, num);
            }
        }
        det
    }))
}
