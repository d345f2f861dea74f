use crate::error::{Error, Result};
use crate::scalar::{dot, Point, Real};

/// Surface measure of the unit sphere `S^{n-1}`: 2, 2π, 4π.
pub fn sphere_area<T: Real>(n: usize) -> T {
    match n {
        1 => T::lit(2.0),
        2 => T::lit(2.0) * T::PI(),
        3 => T::lit(4.0) * T::PI(),
        _ => T::nan(),
    }
}

/// Exact volume of the n-ball of radius `r`.
pub fn ball_volume<T: Real>(n: usize, r: T) -> T {
    sphere_area::<T>(n) / T::from_usize_lossy(n) * r.powi(n as i32)
}

/// Polar discretization of `R^n` truncated to the ball of radius `r_max`.
///
/// The radial interval `[0, r_max]` is split into `n_r` equal cells, each
/// integrated with Simpson's rule, so the node list holds the `2 n_r + 1`
/// composite Simpson nodes. Directions carry weights summing to `|S^{n-1}|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid<T> {
    n: usize,
    r_max: T,
    edges: Vec<T>,
    nodes: Vec<T>,
    weights: Vec<T>,
    directions: Vec<Point<T>>,
    dir_weights: Vec<T>,
}

/// Default direction count per dimension.
pub fn default_directions(n: usize) -> usize {
    match n {
        1 => 2,
        2 => 128,
        _ => 256,
    }
}

pub const DEFAULT_RADIAL_CELLS: usize = 512;

impl<T: Real> RadialGrid<T> {
    /// `n = 1` always uses the two directions `±1`; `n = 2` equally spaced angles;
    /// `n = 3` a Fibonacci lattice with equal weights.
    pub fn build(n: usize, r_max: T, n_r: usize, n_dir: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::Config(format!("unsupported dimension {n}")));
        }
        if !(r_max > T::zero()) || !r_max.is_finite() {
            return Err(Error::Config(format!("truncation radius must be positive, got {r_max}")));
        }
        if n_r < 16 {
            return Err(Error::Config(format!("need at least 16 radial cells, got {n_r}")));
        }
        if n_dir == 0 {
            return Err(Error::Config("need at least one direction".into()));
        }
        let h = r_max / T::from_usize_lossy(n_r);
        let mut edges: Vec<T> = (0..=n_r).map(|k| h * T::from_usize_lossy(k)).collect();
        edges[n_r] = r_max;
        let mut nodes = Vec::with_capacity(2 * n_r + 1);
        let mut weights = vec![T::zero(); 2 * n_r + 1];
        for k in 0..n_r {
            nodes.push(edges[k]);
            nodes.push(T::lit(0.5) * (edges[k] + edges[k + 1]));
            let w = (edges[k + 1] - edges[k]) / T::lit(6.0);
            weights[2 * k] += w;
            weights[2 * k + 1] += T::lit(4.0) * w;
            weights[2 * k + 2] += w;
        }
        nodes.push(r_max);

        let zero = T::zero();
        let (directions, dir_weights): (Vec<Point<T>>, Vec<T>) = match n {
            1 => (vec![[T::one(), zero, zero], [-T::one(), zero, zero]], vec![T::one(), T::one()]),
            2 => {
                let step = T::lit(2.0) * T::PI() / T::from_usize_lossy(n_dir);
                let dirs = (0..n_dir)
                    .map(|i| {
                        let th = step * T::from_usize_lossy(i);
                        [th.cos(), th.sin(), zero]
                    })
                    .collect();
                (dirs, vec![step; n_dir])
            }
            _ => {
                let golden = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
                let count = T::from_usize_lossy(n_dir);
                let dirs = (0..n_dir)
                    .map(|k| {
                        let kf = T::from_usize_lossy(k);
                        let z = T::one() - (T::lit(2.0) * kf + T::one()) / count;
                        let rho = (T::one() - z * z).max(zero).sqrt();
                        let phi = golden * kf;
                        [rho * phi.cos(), rho * phi.sin(), z]
                    })
                    .collect();
                (dirs, vec![T::lit(4.0) * T::PI() / count; n_dir])
            }
        };
        Ok(Self {
            n,
            r_max,
            edges,
            nodes,
            weights,
            directions,
            dir_weights,
        })
    }

    /// Grid with the default resolution for dimension `n`.
    pub fn with_defaults(n: usize, r_max: T) -> Result<Self> {
        Self::build(n, r_max, DEFAULT_RADIAL_CELLS, default_directions(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    pub fn radial_cells(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn directions(&self) -> &[Point<T>] {
        &self.directions
    }

    pub fn dir_weights(&self) -> &[T] {
        &self.dir_weights
    }

    pub fn n_dir(&self) -> usize {
        self.directions.len()
    }

    /// `r^{n-1}`, the polar volume factor.
    #[inline]
    pub fn jacobian(&self, r: T) -> T {
        match self.n {
            1 => T::one(),
            2 => r,
            _ => r * r,
        }
    }

    /// Nodal composite-Simpson quadrature of a smooth `f(direction index, r)` over the ball.
    pub fn integrate_nodal(&self, mut f: impl FnMut(usize, T) -> T) -> T {
        let mut total = T::zero();
        for (i, &sigma) in self.dir_weights.iter().enumerate() {
            let mut ray = T::zero();
            for (&r, &w) in self.nodes.iter().zip(&self.weights) {
                ray += w * f(i, r) * self.jacobian(r);
            }
            total += sigma * ray;
        }
        total
    }

    /// Index of the direction whose cell contains `x`.
    pub fn nearest_direction(&self, x: &Point<T>) -> usize {
        match self.n {
            1 => usize::from(x[0] < T::zero()),
            2 => {
                let k = self.n_dir();
                let step = T::lit(2.0) * T::PI() / T::from_usize_lossy(k);
                let th = x[1].atan2(x[0]);
                let idx = (th / step).round().to_i64().unwrap_or(0);
                idx.rem_euclid(k as i64) as usize
            }
            _ => {
                let mut best = 0;
                let mut best_dot = T::neg_infinity();
                for (i, d) in self.directions.iter().enumerate() {
                    let c = dot(d, x);
                    if c > best_dot {
                        best_dot = c;
                        best = i;
                    }
                }
                best
            }
        }
    }
}
