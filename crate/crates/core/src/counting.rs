//! Counting constraints: global cardinality, bin counts and contingency
//! tables.
//!
//! Bin counts and contingency tables are posted as decompositions into
//! reified bound checks, conjunctions and a global cardinality constraint.
//! A value outside every bin gets the allocation value 0 and is not counted
//! unless the structure is closed, in which case every value must land in a
//! bin.

use crate::kernel::{Cmp, ConstraintKind, Expr, Model, ModelError, VarId};

/// Half-open bins `[b_j, b_{j+1})` over strictly increasing boundaries.
#[derive(Clone, Debug, PartialEq)]
pub struct BinStructure {
    bounds: Vec<f64>,
}

impl BinStructure {
    pub fn new(bounds: Vec<f64>) -> Result<Self, ModelError> {
        if bounds.len() < 2 {
            return Err(ModelError::Invalid(
                "a bin structure needs at least two boundaries".into(),
            ));
        }
        if bounds.iter().any(|b| !b.is_finite()) {
            return Err(ModelError::Invalid("bin boundaries must be finite".into()));
        }
        if bounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ModelError::Invalid(
                "bin boundaries must be strictly increasing".into(),
            ));
        }
        Ok(BinStructure { bounds })
    }

    /// `bins` equal-width bins covering `[lo, hi)`.
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self, ModelError> {
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
        if bins == 0 || !(lo < hi) {
            return Err(ModelError::Invalid(format!(
                "cannot split [{lo}, {hi}) into {bins} bins"
            )));
        }
        let width = (hi - lo) / bins as f64;
        let mut bounds: Vec<f64> = (0..bins).map(|j| lo + width * j as f64).collect();
        bounds.push(hi);
        BinStructure::new(bounds)
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.bounds
    }

    /// Number of bins.
    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lower(&self, j: usize) -> f64 {
        self.bounds[j]
    }

    pub fn upper(&self, j: usize) -> f64 {
        self.bounds[j + 1]
    }

    /// Index of the bin containing `x`, if any.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= self.bounds[0] && x < self.bounds[self.bounds.len() - 1]) {
            return None;
        }
        Some(self.bounds.partition_point(|&b| b <= x) - 1)
    }
}

/// Fresh auxiliary count variables over `0..=n`.
pub fn count_vars(model: &mut Model, prefix: &str, bins: usize, n: usize) -> Vec<VarId> {
    (0..bins)
        .map(|j| model.aux_int(&format!("{prefix}[{j}]"), 0, n as i64))
        .collect()
}

/// Posts `counts[j] = |{i : vars[i] = values[j]}|`.
pub fn post_global_cardinality(
    model: &mut Model,
    vars: &[VarId],
    values: &[i64],
    counts: &[VarId],
    closed: bool,
) -> Result<(), ModelError> {
    if values.len() != counts.len() {
        return Err(ModelError::Invalid(format!(
            "{} values but {} count variables",
            values.len(),
            counts.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(ModelError::DuplicateValues);
    }
    model.scoped("global_cardinality", |m| {
        m.post(ConstraintKind::GlobalCardinality {
            vars: vars.to_vec(),
            values: values.to_vec(),
            counts: counts.to_vec(),
            closed,
        })
    });
    Ok(())
}

/// Posts flags `in[j] = 1 ⇔ x ∈ [b_j, b_{j+1})` and returns them.
fn membership_flags(model: &mut Model, x: &Expr, bins: &BinStructure, tag: &str) -> Vec<VarId> {
    let ge: Vec<VarId> = bins
        .boundaries()
        .iter()
        .enumerate()
        .map(|(j, &b)| {
            let f = model.aux_bool(&format!("{tag}.ge[{j}]"));
            model.post_reified(f, x.clone(), Cmp::Ge, b);
            f
        })
        .collect();
    // Crossing a higher boundary implies crossing every lower one.
    for w in ge.windows(2) {
        model.post_rel(w[1], Cmp::Le, w[0]);
    }
    let flags: Vec<VarId> = (0..bins.len())
        .map(|j| {
            let below_next = model.aux_bool(&format!("{tag}.lt[{}]", j + 1));
            model.post_rel(below_next + ge[j + 1], Cmp::Eq, 1.0);
            let inside = model.aux_bool(&format!("{tag}.in[{j}]"));
            model.post_and(inside, vec![ge[j], below_next]);
            inside
        })
        .collect();
    model.post_rel(Expr::sum(flags.iter().map(|&f| Expr::Var(f))), Cmp::Le, 1.0);
    flags
}

/// Posts `counts[j] = |{i : xs[i] ∈ [b_j, b_{j+1})}|` through allocation
/// variables `a_i` and a global cardinality constraint over them.
pub fn post_bin_counts(
    model: &mut Model,
    xs: &[Expr],
    bins: &BinStructure,
    counts: &[VarId],
    closed: bool,
) -> Result<Vec<VarId>, ModelError> {
    let m = bins.len();
    if counts.len() != m {
        return Err(ModelError::Invalid(format!(
            "{m} bins but {} count variables",
            counts.len()
        )));
    }
    let first = if closed { 1 } else { 0 };
    let alloc = model.scoped("bin_counts", |model| {
        xs.iter()
            .enumerate()
            .map(|(i, x)| {
                let a = model.aux_int(&format!("alloc[{i}]"), first, m as i64);
                let flags = membership_flags(model, x, bins, &format!("x[{i}]"));
                for (j, &f) in flags.iter().enumerate() {
                    model.post_reified(f, a, Cmp::Eq, (j + 1) as f64);
                }
                a
            })
            .collect::<Vec<_>>()
    });
    let values: Vec<i64> = (1..=m as i64).collect();
    post_global_cardinality(model, &alloc, &values, counts, closed)?;
    Ok(alloc)
}

/// Variables of a posted contingency table.
#[derive(Clone, Debug)]
pub struct ContingencyVars {
    /// `cells[i][j]` counts pairs in row bin `i` and column bin `j`.
    pub cells: Vec<Vec<VarId>>,
    pub row_totals: Vec<VarId>,
    pub col_totals: Vec<VarId>,
}

/// Posts the contingency table of `pairs` over the row and column bins.
pub fn post_contingency(
    model: &mut Model,
    pairs: &[(Expr, Expr)],
    row_bins: &BinStructure,
    col_bins: &BinStructure,
) -> ContingencyVars {
    let n = pairs.len() as i64;
    let (rows, cols) = (row_bins.len(), col_bins.len());
    model.scoped("contingency", |model| {
        let mut members: Vec<Vec<Vec<VarId>>> = vec![vec![Vec::new(); cols]; rows];
        for (k, (x1, x2)) in pairs.iter().enumerate() {
            let rf = membership_flags(model, x1, row_bins, &format!("pair[{k}].row"));
            let cf = membership_flags(model, x2, col_bins, &format!("pair[{k}].col"));
            for (i, &r) in rf.iter().enumerate() {
                for (j, &c) in cf.iter().enumerate() {
                    let z = model.aux_bool(&format!("pair[{k}].cell[{i}][{j}]"));
                    model.post_and(z, vec![r, c]);
                    members[i][j].push(z);
                }
            }
        }
        let cells: Vec<Vec<VarId>> = members
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, zs)| {
                        let c = model.aux_int(&format!("cell[{i}][{j}]"), 0, n);
                        model.post_rel(c, Cmp::Eq, Expr::sum(zs.iter().map(|&z| Expr::Var(z))));
                        c
                    })
                    .collect()
            })
            .collect();
        let row_totals = (0..rows)
            .map(|i| {
                let h = model.aux_int(&format!("row[{i}]"), 0, n);
                model.post_rel(h, Cmp::Eq, Expr::sum(cells[i].iter().map(|&c| Expr::Var(c))));
                h
            })
            .collect();
        let col_totals = (0..cols)
            .map(|j| {
                let w = model.aux_int(&format!("col[{j}]"), 0, n);
                model.post_rel(w, Cmp::Eq, Expr::sum(cells.iter().map(|r| Expr::Var(r[j]))));
                w
            })
            .collect();
        ContingencyVars {
            cells,
            row_totals,
            col_totals,
        }
    })
}
