use std::io::{self, Write};
use std::sync::Arc;

use super::grid::RadialGrid;
use super::profile::{integrate_ray, RayProfile};
use crate::error::{Error, Result};
use crate::integrand::Integrand;
use crate::quadrature::Estimate;
use crate::scalar::Real;

/// A competitor `u` on a polar grid: one [`RayProfile`] per direction, living in
/// the constraint set `{0 ≤ u ≤ a, ∫u^p ≤ 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    grid: Arc<RadialGrid<T>>,
    a: T,
    p: T,
    rays: Vec<RayProfile<T>>,
}

impl<T: Real> GridFunction<T> {
    /// Validates the amplitude bound and that every profile fits inside the grid.
    /// The mass constraint is checked separately by [`GridFunction::in_constraint_set`].
    pub fn new(grid: Arc<RadialGrid<T>>, a: T, p: T, rays: Vec<RayProfile<T>>) -> Result<Self> {
        if rays.len() != grid.n_dir() {
            return Err(Error::Argument(format!(
                "expected {} ray profiles, got {}",
                grid.n_dir(),
                rays.len()
            )));
        }
        let slack = T::tol_at_least(1e-12, 16.0) * grid.r_max();
        for ray in &rays {
            if ray.max_value() > a {
                return Err(Error::Argument(format!("values exceed the cap a = {a}")));
            }
            if ray.support_end() > grid.r_max() + slack {
                return Err(Error::Argument("profile support exceeds the truncation radius".into()));
            }
        }
        Ok(Self { grid, a, p, rays })
    }

    pub fn zero(grid: Arc<RadialGrid<T>>, a: T, p: T) -> Self {
        let rays = vec![RayProfile::zero(); grid.n_dir()];
        Self { grid, a, p, rays }
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        &self.grid
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn rays(&self) -> &[RayProfile<T>] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &RayProfile<T> {
        &self.rays[i]
    }

    /// `u(ν_i, r)`
    pub fn sample(&self, i: usize, r: T) -> T {
        self.rays[i].value(r)
    }

    /// Values at every (direction, radial node) pair.
    pub fn nodal_values(&self) -> Vec<Vec<T>> {
        self.rays
            .iter()
            .map(|ray| self.grid.nodes().iter().map(|&r| ray.value(r)).collect())
            .collect()
    }

    /// `s · u`; with `0 ≤ s ≤ 1` the result stays inside `[0, a]`.
    pub fn scaled(&self, s: T) -> Self {
        Self {
            grid: self.grid.clone(),
            a: self.a,
            p: self.p,
            rays: self.rays.iter().map(|r| r.scaled(s)).collect(),
        }
    }

    /// Ray mass `∫ u(rν_i)^p r^{n-1} dr` with its quadrature error estimate.
    pub fn ray_mass(&self, i: usize) -> Estimate<T> {
        let p = self.p;
        let g = &*self.grid;
        integrate_ray(g, [&self.rays[i]], T::zero(), g.r_max(), &[], |r, [u]| u.powf(p) * g.jacobian(r))
    }

    pub fn in_constraint_set(&self, tol_mass: T) -> bool {
        lp_mass(self) <= T::one() + tol_mass
    }

    /// Writes `direction,radius,value` rows at the grid nodes.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "direction,radius,value")?;
        for (i, ray) in self.rays.iter().enumerate() {
            for &r in self.grid.nodes() {
                writeln!(out, "{i},{:.16e},{:.16e}", r.to_f64_lossy(), ray.value(r).to_f64_lossy())?;
            }
        }
        Ok(())
    }
}

/// Direction-weighted sum of per-ray estimates, reduced in direction order.
pub(crate) fn sum_over_directions<T: Real>(
    grid: &RadialGrid<T>,
    mut per_ray: impl FnMut(usize) -> Estimate<T>,
) -> Estimate<T> {
    let mut total = Estimate::zero();
    for (i, &sigma) in grid.dir_weights().iter().enumerate() {
        total += per_ray(i).scale(sigma);
    }
    total
}

/// `∫ u^p` with its quadrature error estimate.
pub fn lp_mass_estimate<T: Real>(u: &GridFunction<T>) -> Estimate<T> {
    sum_over_directions(&u.grid, |i| u.ray_mass(i))
}

/// `∫ u^p` over the truncated ball.
pub fn lp_mass<T: Real>(u: &GridFunction<T>) -> T {
    lp_mass_estimate(u).value
}

/// `∫ |u - w|^p`; both functions must share a grid.
pub fn lp_distance<T: Real>(u: &GridFunction<T>, w: &GridFunction<T>, p: T) -> Estimate<T> {
    let g = &*u.grid;
    sum_over_directions(g, |i| {
        integrate_ray(g, [&u.rays[i], &w.rays[i]], T::zero(), g.r_max(), &[], |r, [x, y]| {
            (x - y).abs().powf(p) * g.jacobian(r)
        })
    })
}

/// Value of the functional `∫ F(|x|, u(x)) dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation<T> {
    pub value: T,
    /// Richardson estimate of the radial quadrature error.
    pub error: T,
    /// Whether `∫u^p ≤ 1 + tol_mass` held; evaluation proceeds either way.
    pub in_constraint_set: bool,
}

/// Polar quadrature `Σ_i σ_i ∫ F(r, u(rν_i)) r^{n-1} dr`.
pub fn evaluate_functional<T: Real>(f: &Integrand<T>, u: &GridFunction<T>, tol_mass: T) -> Evaluation<T> {
    let g = &*u.grid;
    let kinks = f.radial_kinks();
    let est = sum_over_directions(g, |i| {
        integrate_ray(g, [&u.rays[i]], T::zero(), g.r_max(), &kinks, |r, [s]| f.value(r, s) * g.jacobian(r))
    });
    Evaluation {
        value: est.value,
        error: est.error,
        in_constraint_set: u.in_constraint_set(tol_mass),
    }
}
