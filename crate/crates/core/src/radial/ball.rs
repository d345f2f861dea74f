use std::sync::Arc;

use super::function::GridFunction;
use super::grid::{ball_volume, sphere_area, RadialGrid};
use super::profile::RayProfile;
use crate::error::{Error, Result};
use crate::integrand::Integrand;
use crate::scalar::Real;

/// The saturating ball `E = B_R` with `a^p |B_R| = 1` and its superlevel threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallProfile<T> {
    pub radius: T,
    pub a: T,
    pub p: T,
    pub n: usize,
    /// `t = F(R, a)`
    pub t: T,
}

impl<T: Real> BallProfile<T> {
    pub fn volume(&self) -> T {
        ball_volume(self.n, self.radius)
    }
}

/// Solves `a^p ω_n R^n = 1` for the integrand's `(n, a, p)`.
///
/// Fails when the ball does not fit inside the truncation radius `r_max`.
pub fn ball_radius<T: Real>(f: &Integrand<T>, r_max: T) -> Result<BallProfile<T>> {
    let n = f.n();
    let omega = sphere_area::<T>(n) / T::from_usize_lossy(n);
    let radius = (T::one() / (f.a().powf(f.p()) * omega)).powf(T::one() / T::from_usize_lossy(n));
    if radius > r_max {
        return Err(Error::Config(format!(
            "truncation radius {r_max} smaller than maximizer radius {radius}"
        )));
    }
    Ok(BallProfile {
        radius,
        a: f.a(),
        p: f.p(),
        n,
        t: f.value(radius, f.a()),
    })
}

/// `w = a 1_E` on the grid.
pub fn build_maximizer<T: Real>(profile: &BallProfile<T>, grid: &Arc<RadialGrid<T>>) -> Result<GridFunction<T>> {
    if profile.radius > grid.r_max() {
        return Err(Error::Config("truncation smaller than maximizer".into()));
    }
    if profile.n != grid.n() {
        return Err(Error::Config("ball and grid dimensions differ".into()));
    }
    let ray = RayProfile::indicator(profile.a, profile.radius);
    GridFunction::new(grid.clone(), profile.a, profile.p, vec![ray; grid.n_dir()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::Family;
    use crate::radial::function::{evaluate_functional, lp_mass};
    use approx::assert_relative_eq;

    fn integrand(n: usize, a: f64, p: f64) -> Integrand<f64> {
        Integrand::new(Family::LinearCutoff { c: 1.0, q: 2.0 }, a, p, n).unwrap()
    }

    #[test]
    fn radii_match_exact_formulas() {
        let pi = std::f64::consts::PI;
        assert_relative_eq!(ball_radius(&integrand(1, 1.0, 2.0), 10.0).unwrap().radius, 0.5, max_relative = 1e-12);
        assert_relative_eq!(ball_radius(&integrand(2, 1.0, 1.0), 10.0).unwrap().radius, pi.powf(-0.5), max_relative = 1e-12);
        let r3 = ball_radius(&integrand(3, 2.0, 2.0), 10.0).unwrap().radius;
        assert_relative_eq!(r3, (3.0 / (16.0 * pi)).cbrt(), max_relative = 1e-12);
        assert!((r3 - 0.3907).abs() < 1e-4);
    }

    #[test]
    fn saturates_mass_exactly() {
        for n in 1..=3 {
            let b = ball_radius(&integrand(n, 1.3, 1.5), 10.0).unwrap();
            assert_relative_eq!(1.3f64.powf(1.5) * b.volume(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn threshold_is_value_at_radius() {
        let b = ball_radius(&integrand(1, 1.0, 2.0), 10.0).unwrap();
        assert_relative_eq!(b.t, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn truncation_too_small_is_config_error() {
        assert!(matches!(ball_radius(&integrand(1, 1.0, 2.0), 0.4), Err(Error::Config(_))));
    }

    #[test]
    fn maximizer_saturates_and_vanishes_outside() {
        let f = integrand(1, 1.0, 2.0);
        let b = ball_radius(&f, 1.0).unwrap();
        let g = Arc::new(RadialGrid::build(1, 1.0, 64, 2).unwrap());
        let w = build_maximizer(&b, &g).unwrap();
        assert_relative_eq!(lp_mass(&w), 1.0, epsilon = 1e-8);
        for &r in g.nodes().iter().filter(|&&r| r > b.radius) {
            assert_eq!(w.sample(0, r), 0.0);
            assert_eq!(w.sample(1, r), 0.0);
        }
        // 2 ∫_0^{1/2} (1 - r) dr
        assert_relative_eq!(evaluate_functional(&f, &w, 1e-6).value, 0.75, epsilon = 1e-12);
    }
}
