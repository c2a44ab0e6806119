//! Feasibility scans over a two-parameter grid.

use crate::error::CliError;
use crate::input::{Dataset, RunSpec};
use rayon::prelude::*;
use statcp::kernel::{optimize, solve_satisfaction, Direction};
use statcp::models::BuiltModel;
use statcp::{ModelError, Outcome};
use std::io::{Read, Write};

pub const CSV_HEADER: [&str; 4] = ["x", "y", "feasible", "best_s"];

/// One grid axis: `steps` cells of equal width spanning `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(name: &str, lo: f64, hi: f64, steps: usize) -> Result<Axis, CliError> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) || steps == 0 {
            return Err(CliError::input(format!(
                "axis `{name}` needs finite lo ≤ hi and at least one step"
            )));
        }
        Ok(Axis { name: name.to_string(), lo, hi, steps })
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * (self.hi - self.lo) / self.steps as f64
    }
}

/// Parses `x=lo:hi:n,y=lo:hi:n`.
pub fn parse_grid(s: &str) -> Result<(Axis, Axis), CliError> {
    let axis = |part: &str| -> Result<Axis, CliError> {
        let bad = || CliError::input(format!("grid axis `{part}` must have the form name=lo:hi:n"));
        let (name, range) = part.split_once('=').ok_or_else(bad)?;
        let f: Vec<&str> = range.split(':').collect();
        let [lo, hi, n] = f.as_slice() else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        Axis::new(name.trim(), lo, hi, n)
    };
    let parts: Vec<&str> = s.split(',').collect();
    let [x, y] = parts.as_slice() else {
        return Err(CliError::input(format!("grid `{s}` must name exactly two axes")));
    };
    let (x, y) = (axis(x)?, axis(y)?);
    if x.name == y.name {
        return Err(CliError::input("grid axes must name different parameters"));
    }
    Ok((x, y))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Infeasible,
    Feasible { best_s: f64 },
}

/// Cells are stored with `x` varying slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionGrid {
    pub x: Axis,
    pub y: Axis,
    pub cells: Vec<Cell>,
}

impl RegionGrid {
    pub fn cell(&self, ix: usize, iy: usize) -> Cell {
        self.cells[ix * self.y.steps + iy]
    }

    /// The cell whose center is nearest to `(x, y)`.
    pub fn cell_at(&self, x: f64, y: f64) -> Cell {
        let idx = |a: &Axis, v: f64| {
            let w = (a.hi - a.lo) / a.steps as f64;
            if w == 0.0 {
                0
            } else {
                (((v - a.lo) / w).floor().max(0.0) as usize).min(a.steps - 1)
            }
        };
        self.cell(idx(&self.x, x), idx(&self.y, y))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let csv_err = |e: csv::Error| CliError::Csv(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for ix in 0..self.x.steps {
            for iy in 0..self.y.steps {
                let (flag, s) = match self.cell(ix, iy) {
                    Cell::Infeasible => ("0", String::new()),
                    Cell::Feasible { best_s } => ("1", best_s.to_string()),
                };
                w.write_record([self.x.center(ix).to_string(), self.y.center(iy).to_string(), flag.into(), s])
                    .map_err(csv_err)?;
            }
        }
        w.flush().map_err(|e| CliError::Csv(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    /// Reads a grid written by [`RegionGrid::write_csv`]. The axes are not
    /// part of the CSV; rows must sit on their cell centers.
    pub fn read_csv<R: Read>(input: R, x: Axis, y: Axis) -> Result<RegionGrid, CliError> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(|e| CliError::Csv(e.to_string()))?;
        if header.iter().ne(CSV_HEADER) {
            return Err(CliError::Csv(format!("unexpected header {header:?}")));
        }
        let mut cells = Vec::with_capacity(x.steps * y.steps);
        for (k, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| CliError::Csv(e.to_string()))?;
            let (ix, iy) = (k / y.steps, k % y.steps);
            if ix >= x.steps {
                return Err(CliError::Csv("more rows than grid cells".into()));
            }
            let num = |field: &str| field.parse::<f64>().map_err(|_| CliError::Csv(format!("row {}: `{field}` is not a number", k + 1)));
            if num(&rec[0])? != x.center(ix) || num(&rec[1])? != y.center(iy) {
                return Err(CliError::Csv(format!("row {} is not at its cell center", k + 1)));
            }
            cells.push(match (&rec[2], &rec[3]) {
                ("0", "") => Cell::Infeasible,
                ("1", s) if !s.is_empty() => Cell::Feasible { best_s: num(s)? },
                _ => return Err(CliError::Csv(format!("row {}: bad feasibility fields", k + 1))),
            });
        }
        if cells.len() != x.steps * y.steps {
            return Err(CliError::Csv(format!("expected {} rows, found {}", x.steps * y.steps, cells.len())));
        }
        Ok(RegionGrid { x, y, cells })
    }
}

/// A finished scan. Cells whose search hit a limit without finding a
/// solution are recorded as infeasible and counted in `unresolved`.
#[derive(Clone, Debug)]
pub struct RegionScan {
    pub grid: RegionGrid,
    pub unresolved: usize,
}

fn worker_count() -> Result<usize, CliError> {
    match std::env::var("STATCP_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::input(format!("STATCP_THREADS must be a positive integer, got `{v}`"))),
        },
        // zero lets rayon pick
        Err(_) => Ok(0),
    }
}

/// Fixes `name`; a value outside its declared range is reported as `false`.
pub(crate) fn fix_or_reject(b: &mut BuiltModel, name: &str, value: f64) -> Result<bool, CliError> {
    match b.fix(name, value) {
        Ok(()) => Ok(true),
        Err(ModelError::EmptyDomain(_)) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

/// Solves one copy of the model per cell, with the two axis parameters
/// fixed to the cell center. With `min_s`, each cell is optimised and
/// reports its smallest statistic; otherwise the statistic of the first
/// solution found.
pub fn scan(spec: &RunSpec, data: &Dataset, x: &Axis, y: &Axis, min_s: bool) -> Result<RegionScan, CliError> {
    let mut base = spec.build(data)?;
    for a in [x, y] {
        if base.var(&a.name).is_none() {
            return Err(CliError::input(format!("model `{}` has no variable `{}`", spec.kind.name(), a.name)));
        }
    }
    if min_s {
        base.set_objective(Direction::Minimize, "s")?;
    }
    let solve_cell = |k: usize| -> Result<(Cell, bool), CliError> {
        let mut b = base.clone();
        if !fix_or_reject(&mut b, &x.name, x.center(k / y.steps))? || !fix_or_reject(&mut b, &y.name, y.center(k % y.steps))? {
            return Ok((Cell::Infeasible, false));
        }
        let out = if min_s {
            optimize(&b.model, &spec.search)?
        } else {
            solve_satisfaction(&b.model, &spec.search)?
        };
        Ok(match out.solution() {
            Some(sol) => (Cell::Feasible { best_s: sol.value(b.statistic).max(0.0) }, false),
            None => (Cell::Infeasible, matches!(out, Outcome::ResourceLimit(..))),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count()?)
        .build()
        .map_err(|e| CliError::input(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(Cell, bool)> =
        pool.install(|| (0..x.steps * y.steps).into_par_iter().map(solve_cell).collect::<Result<_, _>>())?;
    Ok(RegionScan {
        unresolved: results.iter().filter(|r| r.1).count(),
        grid: RegionGrid {
            x: x.clone(),
            y: y.clone(),
            cells: results.into_iter().map(|r| r.0).collect(),
        },
    })
}
