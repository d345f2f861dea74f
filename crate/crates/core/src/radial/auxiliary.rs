use std::sync::Arc;

use super::function::GridFunction;
use super::grid::RadialGrid;
use super::profile::RayProfile;
use crate::scalar::{norm, Point, Real};

/// `κ(ν_i) = (n/a^p ∫ u(rν_i)^p r^{n-1} dr)^{1/n}`: the radius at which
/// `a 1_{[0, κ]}` carries the same ray mass as `u`.
pub fn kappa<T: Real>(u: &GridFunction<T>, i: usize) -> T {
    let n = T::from_usize_lossy(u.grid().n());
    let mass = u.ray_mass(i).value.max(T::zero());
    (n * mass / u.a().powf(u.p())).powf(n.recip())
}

/// The star-shaped set `G = {x : |x| < κ(x/|x|)}` carrying `v = a 1_G`.
#[derive(Debug, Clone, PartialEq)]
pub struct RaySet<T> {
    grid: Arc<RadialGrid<T>>,
    a: T,
    p: T,
    kappa: Vec<T>,
}

impl<T: Real> RaySet<T> {
    pub fn new(grid: Arc<RadialGrid<T>>, a: T, p: T, kappa: Vec<T>) -> Self {
        assert_eq!(kappa.len(), grid.n_dir(), "one radius per direction");
        Self { grid, a, p, kappa }
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        &self.grid
    }

    pub fn kappa(&self) -> &[T] {
        &self.kappa
    }

    pub fn max_kappa(&self) -> T {
        self.kappa.iter().copied().fold(T::zero(), T::max)
    }

    pub fn min_kappa(&self) -> T {
        self.kappa.iter().copied().fold(T::infinity(), T::min)
    }

    /// `|G| = Σ σ_i κ_i^n / n`.
    pub fn volume(&self) -> T {
        let n = self.grid.n();
        self.grid
            .dir_weights()
            .iter()
            .zip(&self.kappa)
            .fold(T::zero(), |acc, (&s, &k)| acc + s * k.powi(n as i32) / T::from_usize_lossy(n))
    }

    /// Radius of `G` in the direction cell containing `x`.
    pub fn boundary_radius(&self, x: &Point<T>) -> T {
        self.kappa[self.grid.nearest_direction(x)]
    }

    pub fn contains(&self, x: &Point<T>) -> bool {
        norm(x) < self.boundary_radius(x)
    }

    /// The auxiliary competitor `v = a 1_G`.
    pub fn to_grid_function(&self) -> GridFunction<T> {
        let slack = self.grid.r_max();
        let rays = self
            .kappa
            .iter()
            .map(|&k| RayProfile::indicator(self.a, k.min(slack)))
            .collect();
        GridFunction::new(self.grid.clone(), self.a, self.p, rays).expect("indicator rays fit the grid")
    }
}

/// Builds `G` (and hence `v`) from `u` by matching every ray mass.
pub fn build_auxiliary<T: Real>(u: &GridFunction<T>) -> RaySet<T> {
    let kappa = (0..u.grid().n_dir()).map(|i| kappa(u, i)).collect();
    RaySet::new(u.grid().clone(), u.a(), u.p(), kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::function::lp_mass;
    use approx::assert_relative_eq;

    fn radial(n: usize, a: f64, p: f64, ray: RayProfile<f64>) -> GridFunction<f64> {
        let g = Arc::new(RadialGrid::build(n, 1.0, 64, if n == 2 { 16 } else { 40 }).unwrap());
        let k = g.n_dir();
        GridFunction::new(g, a, p, vec![ray; k]).unwrap()
    }

    #[test]
    fn kappa_of_indicator_is_its_radius() {
        let u = radial(3, 2.0, 1.5, RayProfile::indicator(2.0, 0.37));
        assert_relative_eq!(kappa(&u, 0), 0.37, epsilon = 1e-12);
    }

    #[test]
    fn kappa_of_half_height_segment() {
        let u = radial(1, 1.0, 1.0, RayProfile::indicator(0.5, 1.0));
        assert_relative_eq!(kappa(&u, 0), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn kappa_of_annulus() {
        let u = radial(2, 1.0, 2.0, RayProfile::interval(1.0, 0.3, 0.5));
        let g = build_auxiliary(&u);
        for &k in g.kappa() {
            assert_relative_eq!(k, 0.4, epsilon = 1e-12);
        }
        assert_relative_eq!(g.volume(), 0.16 * std::f64::consts::PI, epsilon = 1e-12);
        assert_relative_eq!(lp_mass(&g.to_grid_function()), lp_mass(&u), epsilon = 1e-12);
    }

    #[test]
    fn zero_function_gives_empty_set() {
        let u = radial(2, 1.0, 2.0, RayProfile::zero());
        let g = build_auxiliary(&u);
        assert!(g.kappa().iter().all(|&k| k == 0.0));
        assert!(!g.contains(&[0.0, 0.0, 0.0]));
    }

    #[test]
    fn membership_uses_direction_cells() {
        let grid = Arc::new(RadialGrid::build(2, 1.0, 16, 4).unwrap());
        let g = RaySet::new(grid, 1.0, 2.0, vec![0.5, 0.2, 0.2, 0.2]);
        assert!(g.contains(&[0.45, 0.05, 0.0]));
        assert!(!g.contains(&[0.0, 0.45, 0.0]));
    }
}
