//! Lattice discretization of `G∖E` and `E∖G` for the discrete set transport.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::radial::{BallProfile, RaySet};
use crate::scalar::{norm, Point, Real};

/// Upper bound on the number of cells per side handed to the assignment solver.
pub const MAX_CELLS: usize = 400;

/// Cell count aimed for when the cell size is chosen automatically.
pub const TARGET_CELLS: usize = 200;

/// Axis-aligned lattice cell with center `(k + 1/2) h` in each coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<T> {
    pub index: [i64; 3],
    pub center: Point<T>,
}

impl<T: Real> Cell<T> {
    fn new(index: [i64; 3], n: usize, h: T) -> Self {
        let mut center = [T::zero(); 3];
        for d in 0..n {
            center[d] = (T::lit(index[d] as f64) + T::lit(0.5)) * h;
        }
        Self { index, center }
    }
}

/// Source cells in `G∖E`, target cells in `E∖G`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSets<T> {
    pub n: usize,
    pub source: Vec<Cell<T>>,
    pub target: Vec<Cell<T>>,
    pub cell_size: T,
    /// Fraction of source cells dropped to avoid a surplus over the target.
    pub discarded_fraction: T,
    /// `|G∖E|` from the ray radii.
    pub source_volume: T,
    /// `|E∖G|` from the ray radii.
    pub target_volume: T,
}

impl<T: Real> CellSets<T> {
    fn empty(n: usize, source_volume: T, target_volume: T) -> Self {
        Self {
            n,
            source: Vec::new(),
            target: Vec::new(),
            cell_size: T::zero(),
            discarded_fraction: T::zero(),
            source_volume,
            target_volume,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn cell_volume(&self) -> T {
        self.cell_size.powi(self.n as i32)
    }

    pub fn cell_diameter(&self) -> T {
        self.cell_size * T::from_usize_lossy(self.n).sqrt()
    }
}

/// `(|G∖E|, |E∖G|)` computed ray by ray from `κ` and `R`.
pub fn difference_volumes<T: Real>(e: &BallProfile<T>, g: &RaySet<T>) -> (T, T) {
    let n = g.grid().n();
    let nf = T::from_usize_lossy(n);
    let rn = e.radius.powi(n as i32);
    let mut out = (T::zero(), T::zero());
    for (&s, &k) in g.grid().dir_weights().iter().zip(g.kappa()) {
        let d = (k.powi(n as i32) - rn) * s / nf;
        if d > T::zero() {
            out.0 += d;
        } else {
            out.1 -= d;
        }
    }
    out
}

/// Lattice indices `k` with `|(k + 1/2) h|` in `[lo, hi)`.
fn shell_indices<T: Real>(lo: T, hi: T, h: T) -> Vec<i64> {
    let mut out = Vec::new();
    if !(hi > lo) {
        return out;
    }
    let kmax = (hi / h).ceil().to_f64_lossy() as i64 + 1;
    for k in 0..kmax {
        let c = (T::lit(k as f64) + T::lit(0.5)) * h;
        if c >= lo && c < hi {
            out.push(k);
            out.push(-k - 1);
        }
    }
    out.sort_unstable();
    out
}

/// Calls `visit` for every lattice cell whose center lies in `lo ≤ |x| < hi`.
fn scan_shell<T: Real>(n: usize, h: T, lo: T, hi: T, mut visit: impl FnMut(Cell<T>)) {
    let sq = |v: T| v * v;
    let last = |rest: T| {
        let outer = (sq(hi) - rest).max(T::zero()).sqrt();
        let inner = (sq(lo) - rest).max(T::zero()).sqrt();
        shell_indices(inner, outer, h)
    };
    let all = shell_indices(T::zero(), hi, h);
    let coord = |k: i64| (T::lit(k as f64) + T::lit(0.5)) * h;
    match n {
        1 => {
            for k in last(T::zero()) {
                visit(Cell::new([k, 0, 0], 1, h));
            }
        }
        2 => {
            for &i in &all {
                for j in last(sq(coord(i))) {
                    visit(Cell::new([i, j, 0], 2, h));
                }
            }
        }
        _ => {
            for &i in &all {
                let xi = sq(coord(i));
                if xi >= sq(hi) {
                    continue;
                }
                for &j in &all {
                    let xy = xi + sq(coord(j));
                    if xy >= sq(hi) {
                        continue;
                    }
                    for k in last(xy) {
                        visit(Cell::new([i, j, k], 3, h));
                    }
                }
            }
        }
    }
}

/// Distance of a cell center to the nearer boundary of its set.
fn margin<T: Real>(e: &BallProfile<T>, g: &RaySet<T>, c: &Cell<T>) -> T {
    let r = norm(&c.center);
    let k = g.boundary_radius(&c.center);
    (r - e.radius).abs().min((k - r).abs())
}

fn classify<T: Real>(e: &BallProfile<T>, g: &RaySet<T>, h: T) -> (Vec<Cell<T>>, Vec<Cell<T>>) {
    let n = g.grid().n();
    let lo = e.radius.min(g.min_kappa());
    let hi = e.radius.max(g.max_kappa());
    let (mut source, mut target) = (Vec::new(), Vec::new());
    scan_shell(n, h, lo, hi, |c| {
        let r = norm(&c.center);
        let k = g.boundary_radius(&c.center);
        if r >= e.radius && r < k {
            source.push(c);
        } else if r < e.radius && r >= k {
            target.push(c);
        }
    });
    (source, target)
}

fn build<T: Real>(e: &BallProfile<T>, g: &RaySet<T>, h: T, vs: T, vt: T) -> CellSets<T> {
    let (mut source, target) = classify(e, g, h);
    let mut discarded = T::zero();
    if source.len() > target.len() {
        let surplus = source.len() - target.len();
        discarded = T::from_usize_lossy(surplus) / T::from_usize_lossy(source.len());
        source.sort_by(|a, b| {
            margin(e, g, b)
                .partial_cmp(&margin(e, g, a))
                .unwrap_or(Ordering::Equal)
                .then(a.index.cmp(&b.index))
        });
        source.truncate(target.len());
        source.sort_by(|a, b| a.index.cmp(&b.index));
    }
    CellSets {
        n: g.grid().n(),
        source,
        target,
        cell_size: h,
        discarded_fraction: discarded,
        source_volume: vs,
        target_volume: vt,
    }
}

/// Discretizes `G∖E` (source) and `E∖G` (target) by lattice cells, a cell
/// belonging to the set that contains its center.
///
/// A source surplus is trimmed by dropping the cells closest to the set
/// boundary; more than `max_trim` of the source must not be dropped. When the
/// target is larger (competitors below the mass bound), it is kept whole and
/// the assignment picks the image. With `cell_size = None` the size is chosen
/// so the larger side holds between [`TARGET_CELLS`] and [`MAX_CELLS`] cells.
pub fn discretize_sets<T: Real>(
    e: &BallProfile<T>,
    g: &RaySet<T>,
    cell_size: Option<T>,
    max_trim: T,
) -> Result<CellSets<T>> {
    let n = g.grid().n();
    let (vs, vt) = difference_volumes(e, g);
    let negligible = T::tol_at_least(1e-12, 64.0) * e.volume();
    if vs <= negligible {
        return Ok(CellSets::empty(n, vs, vt));
    }
    let check = |sets: CellSets<T>| -> Result<CellSets<T>> {
        if sets.source.len().max(sets.target.len()) > MAX_CELLS {
            return Err(Error::Argument(format!(
                "cell size {} gives more than {MAX_CELLS} cells per side",
                sets.cell_size
            )));
        }
        if sets.discarded_fraction > max_trim {
            return Err(Error::Trim {
                fraction: sets.discarded_fraction.to_f64_lossy(),
                limit: max_trim.to_f64_lossy(),
            });
        }
        Ok(sets)
    };
    if let Some(h) = cell_size {
        if !(h > T::zero()) {
            return Err(Error::Argument("cell size must be positive".into()));
        }
        return check(build(e, g, h, vs, vt));
    }
    let big = vs.max(vt);
    let mut last_err = None;
    for count in (TARGET_CELLS..=MAX_CELLS).step_by(8) {
        let h = (big / T::from_usize_lossy(count)).powf(T::from_usize_lossy(n).recip());
        match check(build(e, g, h, vs, vt)) {
            Ok(s) => return Ok(s),
            Err(err) => last_err = Some(err),
        }
    }
    Err(last_err.expect("at least one candidate size"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::RadialGrid;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn ball(n: usize, radius: f64) -> BallProfile<f64> {
        BallProfile { radius, a: 1.0, p: 1.0, n, t: 0.0 }
    }

    #[test]
    fn equal_sets_are_empty() {
        let grid = Arc::new(RadialGrid::build(2, 2.0, 16, 32).unwrap());
        let g = RaySet::new(grid, 1.0, 1.0, vec![0.5; 32]);
        let s = discretize_sets(&ball(2, 0.5), &g, None, 0.02).unwrap();
        assert!(s.is_empty() && s.target.is_empty());
    }

    #[test]
    fn interval_geometry() {
        let grid = Arc::new(RadialGrid::build(1, 2.0, 16, 2).unwrap());
        let g = RaySet::new(grid, 1.0, 1.0, vec![0.4, 0.6]);
        let s = discretize_sets(&ball(1, 0.5), &g, Some(0.01), 0.02).unwrap();
        assert_eq!(s.source.len(), s.target.len());
        assert_eq!(s.source.len(), 10);
        assert!(s.source.iter().all(|c| c.center[0] > -0.6 && c.center[0] < -0.5));
        assert!(s.target.iter().all(|c| c.center[0] > 0.4 && c.center[0] < 0.5));
    }

    #[test]
    fn shifted_disk_area_is_covered() {
        let n_dir = 512;
        let grid = Arc::new(RadialGrid::build(2, 2.0, 16, n_dir).unwrap());
        let (r, tau) = (0.564_f64, 0.1);
        let kappa = grid
            .directions()
            .iter()
            .map(|d| tau * d[0] + (r * r - tau * tau * d[1] * d[1]).sqrt())
            .collect();
        let g = RaySet::new(grid, 1.0, 1.0, kappa);
        let s = discretize_sets(&ball(2, r), &g, Some(0.02), 0.02).unwrap();
        let lens = 2.0 * r * r * (tau / (2.0 * r)).acos() - 0.5 * tau * (4.0 * r * r - tau * tau).sqrt();
        let half = std::f64::consts::PI * r * r - lens;
        assert_relative_eq!(half, 0.1128, epsilon = 1e-3);
        let covered = s.source.len() as f64 * s.cell_volume();
        assert!((covered - half).abs() < 0.1 * half, "{covered} vs {half}");
        assert!((s.target.len() as f64 * s.cell_volume() - half).abs() < 0.1 * half);
    }

    #[test]
    fn automatic_size_respects_bounds() {
        let grid = Arc::new(RadialGrid::build(3, 2.0, 16, 64).unwrap());
        let kappa: Vec<f64> = grid.directions().iter().map(|d| 0.5 + 0.05 * d[2]).collect();
        let g = RaySet::new(grid, 1.0, 1.0, kappa);
        let s = discretize_sets(&ball(3, 0.5), &g, None, 0.02).unwrap();
        assert!(!s.is_empty());
        assert!(s.source.len() <= MAX_CELLS && s.target.len() <= MAX_CELLS);
        assert!(s.discarded_fraction <= 0.02);
        assert!(s.source.len() <= s.target.len());
    }

    #[test]
    fn too_fine_cells_are_rejected() {
        let grid = Arc::new(RadialGrid::build(1, 2.0, 16, 2).unwrap());
        let g = RaySet::new(grid, 1.0, 1.0, vec![0.4, 0.6]);
        assert!(discretize_sets(&ball(1, 0.5), &g, Some(1e-4), 0.02).is_err());
    }
}
