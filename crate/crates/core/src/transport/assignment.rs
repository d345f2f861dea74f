//! Exact minimum-cost assignment under squared Euclidean cost.

use std::io::{self, Write};
use std::ops::{Add, Sub};

use num_traits::{Bounded, Zero};

use super::cells::CellSets;
use crate::error::{Error, Result};
use crate::scalar::{dist_sq, Point, Real};

/// Largest square instance solved by enumerating permutations.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// Scalar cost usable by the solvers.
pub trait Cost: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Zero + Bounded {}

impl<C: Copy + PartialOrd + Add<Output = C> + Sub<Output = C> + Zero + Bounded> Cost for C {}

/// Hungarian algorithm with potentials, O(rows² · cols).
///
/// Requires `rows ≤ cols`; returns the column assigned to every row.
pub fn hungarian<C: Cost>(cost: &[Vec<C>]) -> Vec<usize> {
    let rows = cost.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = cost[0].len();
    assert!(rows <= cols, "more rows than columns");
    let inf = C::max_value();
    // 1-based arrays, index 0 is the virtual row/column
    let mut u = vec![C::zero(); rows + 1];
    let mut v = vec![C::zero(); cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] = u[owner[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut pairing = vec![0usize; rows];
    for j in 1..=cols {
        if owner[j] > 0 {
            pairing[owner[j] - 1] = j - 1;
        }
    }
    pairing
}

/// Sum of `cost[i][pairing[i]]` in row order.
pub fn pairing_cost<C: Cost>(cost: &[Vec<C>], pairing: &[usize]) -> C {
    pairing
        .iter()
        .enumerate()
        .fold(C::zero(), |acc, (i, &j)| acc + cost[i][j])
}

/// Minimum over all permutations of a square cost matrix (Heap's algorithm).
pub fn exhaustive<C: Cost>(cost: &[Vec<C>]) -> (Vec<usize>, C) {
    let n = cost.len();
    assert!(cost.iter().all(|r| r.len() == n), "square matrix required");
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = pairing_cost(cost, &perm);
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let total = pairing_cost(cost, &perm);
            if total < best_cost {
                best_cost = total;
                best.copy_from_slice(&perm);
            }
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    (best, best_cost)
}

/// Optimal pairing of source cells with target cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellAssignment<T> {
    pub source_cells: Vec<Point<T>>,
    pub target_cells: Vec<Point<T>>,
    /// `pairing[i]` indexes the target of source `i`.
    pub pairing: Vec<usize>,
    /// `Σ |x - T(x)|²`
    pub total_cost: T,
    /// Common cell volume (0 for bare point sets).
    pub cell_volume: T,
    pub cell_diameter: T,
    /// Total cost in squared lattice units, when the cells come from a lattice.
    pub lattice_cost: Option<i64>,
}

impl<T: Real> CellAssignment<T> {
    fn empty() -> Self {
        Self {
            source_cells: Vec::new(),
            target_cells: Vec::new(),
            pairing: Vec::new(),
            total_cost: T::zero(),
            cell_volume: T::zero(),
            cell_diameter: T::zero(),
            lattice_cost: None,
        }
    }

    pub fn len(&self) -> usize {
        self.pairing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairing.is_empty()
    }

    /// `(x, T(x))` pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (&Point<T>, &Point<T>)> {
        self.source_cells
            .iter()
            .zip(&self.pairing)
            .map(move |(x, &j)| (x, &self.target_cells[j]))
    }

    /// Whether every target is used at most once.
    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target_cells.len()];
        self.pairing.iter().all(|&j| j < seen.len() && !std::mem::replace(&mut seen[j], true))
    }

    /// Writes `x0,x1,x2,y0,y1,y2,cost` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x0,x1,x2,y0,y1,y2,cost")?;
        for (x, y) in self.pairs() {
            let f = |v: T| v.to_f64_lossy();
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                f(x[0]),
                f(x[1]),
                f(x[2]),
                f(y[0]),
                f(y[1]),
                f(y[2]),
                f(dist_sq(x, y))
            )?;
        }
        Ok(())
    }
}

fn solve<C: Cost>(cost: &[Vec<C>]) -> Vec<usize> {
    let square = cost.first().map_or(true, |r| r.len() == cost.len());
    if square && cost.len() <= EXHAUSTIVE_LIMIT {
        exhaustive(cost).0
    } else {
        hungarian(cost)
    }
}

/// Minimum-cost bijection between equal-size point sets under `|x - y|²`.
pub fn assign_min_cost<T: Real>(source: &[Point<T>], target: &[Point<T>]) -> Result<CellAssignment<T>> {
    if source.len() != target.len() {
        return Err(Error::Argument(format!(
            "assignment needs equal counts, got {} sources and {} targets",
            source.len(),
            target.len()
        )));
    }
    let cost: Vec<Vec<T>> = source
        .iter()
        .map(|x| target.iter().map(|y| dist_sq(x, y)).collect())
        .collect();
    let pairing = solve(&cost);
    Ok(CellAssignment {
        total_cost: pairing_cost(&cost, &pairing),
        source_cells: source.to_vec(),
        target_cells: target.to_vec(),
        pairing,
        ..CellAssignment::empty()
    })
}

/// Squared lattice distances between source and target cells.
pub fn lattice_costs<T: Real>(sets: &CellSets<T>) -> Vec<Vec<i64>> {
    sets.source
        .iter()
        .map(|x| {
            sets.target
                .iter()
                .map(|y| (0..3).map(|d| (x.index[d] - y.index[d]).pow(2)).sum())
                .collect()
        })
        .collect()
}

/// Optimal injective assignment of every source cell to a distinct target
/// cell, solved exactly in integer lattice units.
pub fn assign_cells<T: Real>(sets: &CellSets<T>) -> Result<CellAssignment<T>> {
    if sets.source.len() > sets.target.len() {
        return Err(Error::Argument("more source than target cells".into()));
    }
    let mut out = CellAssignment::empty();
    out.cell_volume = sets.cell_volume();
    out.cell_diameter = sets.cell_diameter();
    out.source_cells = sets.source.iter().map(|c| c.center).collect();
    out.target_cells = sets.target.iter().map(|c| c.center).collect();
    if sets.source.is_empty() {
        out.lattice_cost = Some(0);
        return Ok(out);
    }
    let cost = lattice_costs(sets);
    out.pairing = solve(&cost);
    let units = pairing_cost(&cost, &out.pairing);
    out.lattice_cost = Some(units);
    out.total_cost = T::lit(units as f64) * sets.cell_size * sets.cell_size;
    Ok(out)
}
