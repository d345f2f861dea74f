//! Cumulative distribution functions of ray densities and their
//! left-continuous generalized inverses.

use crate::quadrature::{gauss7, merge_knots};
use crate::radial::{Level, RadialGrid, RayProfile};
use crate::scalar::Real;

/// Density law on one piece of a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece<T> {
    Empty,
    /// `c · r^{n-1}`
    Power(T),
    /// `level(r)^p r^{n-1}` for a non-constant level.
    Smooth(Level<T>),
    /// Linear interpolation between the endpoint densities.
    Linear(T, T),
}

/// Cumulative mass `C(x) = ∫_0^x ρ` of a nonnegative ray density `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayCdf<T> {
    knots: Vec<T>,
    cum: Vec<T>,
    pieces: Vec<Piece<T>>,
    n: usize,
    p: T,
}

impl<T: Real> RayCdf<T> {
    /// CDF of the density `u(r)^p r^{n-1}` for a ray profile `u`.
    pub fn from_profile(grid: &RadialGrid<T>, profile: &RayProfile<T>, p: T) -> Self {
        let n = grid.n();
        let knots = merge_knots(grid.edges(), &profile.breaks(), T::zero(), grid.r_max());
        let segs = profile.segments();
        let mut idx = 0;
        let pieces = knots
            .windows(2)
            .map(|w| {
                let mid = T::lit(0.5) * (w[0] + w[1]);
                while idx < segs.len() && segs[idx].end <= mid {
                    idx += 1;
                }
                match segs.get(idx) {
                    Some(s) if s.start <= mid => match s.level {
                        Level::Constant(c) => Piece::Power(c.powf(p)),
                        l => Piece::Smooth(l),
                    },
                    _ => Piece::Empty,
                }
            })
            .collect();
        Self::assemble(knots, pieces, n, p)
    }

    /// CDF of a density sampled at increasing `nodes`, interpolated linearly.
    pub fn from_samples(nodes: &[T], density: &[T]) -> Self {
        assert_eq!(nodes.len(), density.len(), "one density sample per node");
        assert!(nodes.len() >= 2, "need at least two nodes");
        let pieces = density
            .windows(2)
            .map(|d| {
                if d[0] <= T::zero() && d[1] <= T::zero() {
                    Piece::Empty
                } else {
                    Piece::Linear(d[0].max(T::zero()), d[1].max(T::zero()))
                }
            })
            .collect();
        Self::assemble(nodes.to_vec(), pieces, 1, T::one())
    }

    fn assemble(knots: Vec<T>, pieces: Vec<Piece<T>>, n: usize, p: T) -> Self {
        let mut out = Self {
            cum: Vec::with_capacity(knots.len()),
            knots,
            pieces,
            n,
            p,
        };
        let mut acc = T::zero();
        out.cum.push(acc);
        for k in 0..out.pieces.len() {
            acc += out.partial(k, out.knots[k + 1]);
            out.cum.push(acc);
        }
        out
    }

    pub fn total(&self) -> T {
        *self.cum.last().expect("nonempty knots")
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    /// Right end of the support: the last knot where the density is positive.
    pub fn support_end(&self) -> T {
        self.pieces
            .iter()
            .rposition(|p| !matches!(p, Piece::Empty))
            .map_or(T::zero(), |k| self.knots[k + 1])
    }

    fn density_in(&self, k: usize, r: T) -> T {
        let jac = r.powi(self.n as i32 - 1);
        match self.pieces[k] {
            Piece::Empty => T::zero(),
            Piece::Power(c) => c * jac,
            Piece::Smooth(l) => l.value(r).powf(self.p) * jac,
            Piece::Linear(d0, d1) => {
                let (x0, x1) = (self.knots[k], self.knots[k + 1]);
                d0 + (d1 - d0) * (r - x0) / (x1 - x0)
            }
        }
    }

    /// Mass of piece `k` between its left knot and `x`.
    fn partial(&self, k: usize, x: T) -> T {
        let x0 = self.knots[k];
        match self.pieces[k] {
            Piece::Empty => T::zero(),
            Piece::Power(c) => {
                let n = self.n as i32;
                c * (x.powi(n) - x0.powi(n)) / T::from_usize_lossy(self.n)
            }
            Piece::Smooth(_) => gauss7(|r| self.density_in(k, r), x0, x),
            Piece::Linear(d0, d1) => {
                let h = x - x0;
                let slope = (d1 - d0) / (self.knots[k + 1] - x0);
                d0 * h + T::lit(0.5) * slope * h * h
            }
        }
    }

    fn piece_of(&self, x: T) -> usize {
        let k = self.knots.partition_point(|&t| t <= x);
        k.saturating_sub(1).min(self.pieces.len() - 1)
    }

    /// Density at `x`, taken from the piece to the right of a knot.
    pub fn density(&self, x: T) -> T {
        if x < self.knots[0] || x >= *self.knots.last().unwrap() {
            return T::zero();
        }
        self.density_in(self.piece_of(x), x)
    }

    pub fn eval(&self, x: T) -> T {
        if x <= self.knots[0] {
            return T::zero();
        }
        if x >= *self.knots.last().unwrap() {
            return self.total();
        }
        let k = self.piece_of(x);
        self.cum[k] + self.partial(k, x)
    }

    /// Left-continuous generalized inverse `Q(m) = inf{x : C(x) ≥ m}`.
    pub fn inverse(&self, m: T) -> T {
        if m <= T::zero() {
            return self.knots[0];
        }
        if m >= self.total() {
            return self.support_end();
        }
        // first knot with C ≥ m; the piece to its left carries positive mass
        let j = self.cum.partition_point(|&c| c < m);
        let k = j - 1;
        let (x0, x1) = (self.knots[k], self.knots[k + 1]);
        let dm = m - self.cum[k];
        let x = match self.pieces[k] {
            Piece::Empty => x0,
            Piece::Power(c) => {
                let nf = T::from_usize_lossy(self.n);
                (x0.powi(self.n as i32) + nf * dm / c).powf(nf.recip())
            }
            Piece::Linear(d0, d1) => {
                let slope = (d1 - d0) / (x1 - x0);
                // d0 h + slope h²/2 = dm, stable root
                let disc = (d0 * d0 + T::lit(2.0) * slope * dm).max(T::zero());
                x0 + T::lit(2.0) * dm / (d0 + disc.sqrt())
            }
            Piece::Smooth(_) => self.newton(k, dm),
        };
        x.max(x0).min(x1)
    }

    /// Safeguarded Newton iteration for `partial(k, x) = dm` on piece `k`.
    fn newton(&self, k: usize, dm: T) -> T {
        let (mut lo, mut hi) = (self.knots[k], self.knots[k + 1]);
        let mut x = lo + (hi - lo) * (dm / (self.cum[k + 1] - self.cum[k]));
        let tol = T::epsilon() * T::lit(4.0) * hi.abs().max(T::one());
        for _ in 0..100 {
            let f = self.partial(k, x) - dm;
            if f == T::zero() {
                break;
            }
            if f > T::zero() {
                hi = x;
            } else {
                lo = x;
            }
            if hi - lo <= tol {
                break;
            }
            let d = self.density_in(k, x);
            let step = if d > T::zero() { x - f / d } else { lo - T::one() };
            x = if step > lo && step < hi {
                step
            } else {
                T::lit(0.5) * (lo + hi)
            };
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn indicator_cdf_is_closed_form() {
        let g = RadialGrid::<f64>::build(3, 1.0, 32, 8).unwrap();
        let c = RayCdf::from_profile(&g, &RayProfile::indicator(2.0, 0.61), 2.0);
        assert_relative_eq!(c.total(), 4.0 * 0.61f64.powi(3) / 3.0, epsilon = 1e-15);
        assert_relative_eq!(c.eval(0.3), 4.0 * 0.027 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(c.inverse(c.eval(0.3)), 0.3, epsilon = 1e-14);
        assert_eq!(c.support_end(), 0.61);
    }

    #[test]
    fn inverse_is_left_continuous_across_gaps() {
        let g = RadialGrid::<f64>::build(1, 1.0, 16, 2).unwrap();
        let prof = RayProfile::new(vec![
            crate::radial::Segment { start: 0.1, end: 0.2, level: Level::Constant(1.0) },
            crate::radial::Segment { start: 0.6, end: 0.7, level: Level::Constant(1.0) },
        ])
        .unwrap();
        let c = RayCdf::from_profile(&g, &prof, 1.0);
        assert_eq!(c.inverse(0.0), 0.0);
        // mass 0.1 is reached at the end of the first segment, not at the start of the second
        assert_relative_eq!(c.inverse(0.1), 0.2, epsilon = 1e-15);
        assert_relative_eq!(c.inverse(0.1 + 1e-9), 0.6, epsilon = 1e-8);
        assert_relative_eq!(c.inverse(0.2), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn smooth_levels_invert_to_roundoff() {
        let g = RadialGrid::<f64>::build(2, 1.0, 16, 4).unwrap();
        let prof = RayProfile::new(vec![crate::radial::Segment {
            start: 0.0,
            end: 0.8,
            level: Level::Bump { height: 1.0, radius: 0.8 },
        }])
        .unwrap();
        let c = RayCdf::from_profile(&g, &prof, 2.0);
        // ∫_0^ρ (1 - r²/ρ²)^4 r dr = ρ²/10
        assert_relative_eq!(c.total(), 0.064, epsilon = 1e-15);
        for &x in &[0.01, 0.2, 0.41] {
            assert_relative_eq!(c.inverse(c.eval(x)), x, epsilon = 1e-13);
        }
        // the density is tiny near the edge, so check the mass residual there
        let m = c.eval(0.79);
        assert_relative_eq!(c.eval(c.inverse(m)), m, epsilon = 1e-17);
    }

    #[test]
    fn sampled_linear_density() {
        let c = RayCdf::from_samples(&[0.0, 1.0, 2.0], &[0.0, 2.0, 2.0]);
        assert_relative_eq!(c.total(), 3.0, epsilon = 1e-15);
        assert_relative_eq!(c.eval(0.5), 0.25, epsilon = 1e-15);
        assert_relative_eq!(c.inverse(0.25), 0.5, epsilon = 1e-15);
        assert_relative_eq!(c.inverse(2.0), 1.5, epsilon = 1e-15);
    }
}
