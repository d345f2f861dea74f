//! Admissible competitors around the maximizer `w = a 1_E`.
//!
//! Every family is parametrized by a size `τ ≥ 0` measured in units of the
//! maximizer radius `R`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quadrature::gauss_kronrod;
use crate::radial::{build_maximizer, lp_mass, sphere_area, BallProfile, GridFunction, Level, RadialGrid, RayProfile, Segment};
use crate::scalar::{dot, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PerturbationFamily {
    /// `a 1_{B_R(τR e)}`, shifted along `e_1` (`e_3` in three dimensions).
    TranslateBall,
    /// `a 1_{B_{R(1-τ)}}`
    DilateBall,
    /// `(1-τ) a 1_{B_R}`
    ScaleHeight,
    /// `a 1` on the annulus `τR ≤ |x| < (R^n + (τR)^n)^{1/n}`, same volume as `E`.
    Annulus,
    /// Smooth radial bump of radius `R(1+τ)`, as tall as the constraints allow.
    SmoothBump,
    /// Independent piecewise-constant rays with levels in `{0, a/2, a}` on `[0, R(1+τ)]`.
    RandomRays,
}

impl PerturbationFamily {
    pub const ALL: [PerturbationFamily; 6] = [
        PerturbationFamily::TranslateBall,
        PerturbationFamily::DilateBall,
        PerturbationFamily::ScaleHeight,
        PerturbationFamily::Annulus,
        PerturbationFamily::SmoothBump,
        PerturbationFamily::RandomRays,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PerturbationFamily::TranslateBall => "translate_ball",
            PerturbationFamily::DilateBall => "dilate_ball",
            PerturbationFamily::ScaleHeight => "scale_height",
            PerturbationFamily::Annulus => "annulus",
            PerturbationFamily::SmoothBump => "smooth_bump",
            PerturbationFamily::RandomRays => "random_rays",
        }
    }

    /// Whether `τ = 0` reproduces the maximizer.
    pub fn is_ball_type(&self) -> bool {
        !matches!(self, PerturbationFamily::SmoothBump | PerturbationFamily::RandomRays)
    }
}

impl fmt::Display for PerturbationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PerturbationFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown perturbation family '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec<T> {
    pub family: PerturbationFamily,
    pub tau: T,
    pub seed: u64,
}

impl<T: Real> PerturbationSpec<T> {
    pub fn new(family: PerturbationFamily, tau: T) -> Self {
        Self { family, tau, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Largest admissible `τ` for a ball of radius `radius` in `n` dimensions truncated at `r_max`.
    pub fn max_tau(family: PerturbationFamily, n: usize, radius: T, r_max: T) -> T {
        let room = r_max / radius;
        match family {
            PerturbationFamily::TranslateBall => room - T::one(),
            PerturbationFamily::DilateBall | PerturbationFamily::ScaleHeight => T::one(),
            PerturbationFamily::Annulus => {
                let n = n as i32;
                (room.powi(n) - T::one()).max(T::zero()).powf(T::one() / T::lit(n as f64))
            }
            PerturbationFamily::SmoothBump | PerturbationFamily::RandomRays => room - T::one(),
        }
    }

    pub fn validate(&self, profile: &BallProfile<T>, r_max: T) -> Result<()> {
        let hi = Self::max_tau(self.family, profile.n, profile.radius, r_max);
        if !(self.tau >= T::zero()) || self.tau > hi {
            return Err(Error::Argument(format!(
                "{} needs 0 <= tau <= {hi}, got {}",
                self.family, self.tau
            )));
        }
        Ok(())
    }
}

/// `∫_0^1 (1 - t²)^{2p} t^{n-1} dt`
fn bump_shape_moment<T: Real>(n: usize, p: T) -> T {
    let e = T::lit(2.0) * p;
    let nm1 = T::from_usize_lossy(n - 1);
    gauss_kronrod(|t: T| (T::one() - t * t).powf(e) * t.powf(nm1), T::zero(), T::one(), T::lit(1e-15)).value
}

fn translated_trace<T: Real>(dir: &[T; 3], shift: &[T; 3], radius: T) -> Option<(T, T)> {
    let b = dot(dir, shift);
    let disc = b * b - dot(shift, shift) + radius * radius;
    if disc <= T::zero() {
        return None;
    }
    let root = disc.sqrt();
    let (lo, hi) = ((b - root).max(T::zero()), b + root);
    (hi > lo).then_some((lo, hi))
}

fn random_ray<T: Real>(rng: &mut ChaCha8Rng, a: T, extent: T) -> Result<RayProfile<T>> {
    let cuts = rng.gen_range(1..=4usize);
    let mut pts: Vec<T> = (0..cuts).map(|_| extent * T::lit(rng.gen::<f64>())).collect();
    pts.push(T::zero());
    pts.push(extent);
    pts.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let levels = [T::zero(), T::lit(0.5) * a, a];
    let segments = pts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| Segment {
            start: w[0],
            end: w[1],
            level: Level::Constant(levels[rng.gen_range(0..3usize)]),
        })
        .collect::<Vec<_>>();
    RayProfile::new(merge_equal(segments))
}

/// Joins touching segments with equal constant levels.
fn merge_equal<T: Real>(segments: Vec<Segment<T>>) -> Vec<Segment<T>> {
    let mut out: Vec<Segment<T>> = Vec::with_capacity(segments.len());
    for s in segments {
        match out.last_mut() {
            Some(last) if last.end == s.start && last.level == s.level => last.end = s.end,
            _ => out.push(s),
        }
    }
    out
}

/// Generates the competitor described by `spec`, rescaled into the mass constraint if needed.
pub fn generate<T: Real>(
    spec: &PerturbationSpec<T>,
    profile: &BallProfile<T>,
    grid: &Arc<RadialGrid<T>>,
) -> Result<GridFunction<T>> {
    spec.validate(profile, grid.r_max())?;
    let (a, p, radius, n) = (profile.a, profile.p, profile.radius, profile.n);
    let tau = spec.tau;
    let uniform = |ray: RayProfile<T>| GridFunction::new(grid.clone(), a, p, vec![ray; grid.n_dir()]);
    if spec.family.is_ball_type() && tau == T::zero() {
        return build_maximizer(profile, grid);
    }
    let u = match spec.family {
        PerturbationFamily::TranslateBall => {
            let mut shift = [T::zero(); 3];
            shift[if n == 3 { 2 } else { 0 }] = tau * radius;
            let rays = grid
                .directions()
                .iter()
                .map(|d| match translated_trace(d, &shift, radius) {
                    Some((lo, hi)) => RayProfile::interval(a, lo, hi),
                    None => RayProfile::zero(),
                })
                .collect();
            GridFunction::new(grid.clone(), a, p, rays)?
        }
        PerturbationFamily::DilateBall => {
            if tau >= T::one() {
                GridFunction::zero(grid.clone(), a, p)
            } else {
                uniform(RayProfile::indicator(a, radius * (T::one() - tau)))?
            }
        }
        PerturbationFamily::ScaleHeight => {
            if tau >= T::one() {
                GridFunction::zero(grid.clone(), a, p)
            } else {
                uniform(RayProfile::indicator(a * (T::one() - tau), radius))?
            }
        }
        PerturbationFamily::Annulus => {
            let ni = n as i32;
            let inner = tau * radius;
            let outer = (radius.powi(ni) + inner.powi(ni)).powf(T::one() / T::from_usize_lossy(n));
            uniform(RayProfile::interval(a, inner, outer.min(grid.r_max())))?
        }
        PerturbationFamily::SmoothBump => {
            let rho = radius * (T::one() + tau);
            let unit = sphere_area::<T>(n) * rho.powi(n as i32) * bump_shape_moment(n, p);
            let height = a.min(unit.recip().powf(p.recip()));
            uniform(RayProfile::new(vec![Segment {
                start: T::zero(),
                end: rho,
                level: Level::Bump { height, radius: rho },
            }])?)?
        }
        PerturbationFamily::RandomRays => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let extent = radius * (T::one() + tau);
            let rays = (0..grid.n_dir())
                .map(|_| random_ray(&mut rng, a, extent))
                .collect::<Result<Vec<_>>>()?;
            GridFunction::new(grid.clone(), a, p, rays)?
        }
    };
    let mass = lp_mass(&u);
    if mass > T::one() + T::lit(1e-12) {
        Ok(u.scaled(mass.recip().powf(p.recip()).min(T::one())))
    } else {
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::{Family, Integrand};
    use crate::radial::{ball_radius, lp_distance};
    use approx::assert_relative_eq;

    fn setup(n: usize) -> (BallProfile<f64>, Arc<RadialGrid<f64>>) {
        let f = Integrand::new(Family::Exponential { gamma: 1.0, q: 2.0 }, 1.0, 2.0, n).unwrap();
        let b = ball_radius(&f, f64::INFINITY).unwrap();
        let dirs = [2, 32, 64][n - 1];
        (b, Arc::new(RadialGrid::build(n, 4.0 * b.radius, 64, dirs).unwrap()))
    }

    #[test]
    fn ball_families_at_zero_are_the_maximizer() {
        let (b, g) = setup(2);
        let w = build_maximizer(&b, &g).unwrap();
        for fam in PerturbationFamily::ALL.into_iter().filter(|f| f.is_ball_type()) {
            assert_eq!(generate(&PerturbationSpec::new(fam, 0.0), &b, &g).unwrap(), w);
        }
    }

    #[test]
    fn half_height_has_quarter_mass() {
        let (b, g) = setup(1);
        let u = generate(&PerturbationSpec::new(PerturbationFamily::ScaleHeight, 0.5), &b, &g).unwrap();
        assert_relative_eq!(lp_mass(&u), 0.25, epsilon = 1e-12);
        assert_eq!(u.sample(0, 0.1), 0.5);
    }

    #[test]
    fn one_dimensional_translation() {
        let (b, g) = setup(1);
        let u = generate(&PerturbationSpec::new(PerturbationFamily::TranslateBall, 0.2), &b, &g).unwrap();
        assert_eq!(u.ray(0).support_end(), 0.6);
        assert_eq!(u.ray(1).support_end(), 0.4);
        let w = build_maximizer(&b, &g).unwrap();
        assert_relative_eq!(lp_distance(&u, &w, 2.0).value, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn translated_ray_misses_when_origin_is_outside() {
        let shift = [2.0, 0.0, 0.0];
        assert!(translated_trace(&[-1.0, 0.0, 0.0], &shift, 1.0).is_none());
        let (lo, hi) = translated_trace(&[1.0, 0.0, 0.0], &shift, 1.0).unwrap();
        assert_eq!((lo, hi), (1.0, 3.0));
    }

    #[test]
    fn annulus_keeps_volume() {
        let (b, g) = setup(3);
        let u = generate(&PerturbationSpec::new(PerturbationFamily::Annulus, 0.5), &b, &g).unwrap();
        assert_relative_eq!(lp_mass(&u), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn smooth_bump_saturates_or_caps() {
        let (b, g) = setup(2);
        for tau in [0.0, 0.3, 1.0] {
            let u = generate(&PerturbationSpec::new(PerturbationFamily::SmoothBump, tau), &b, &g).unwrap();
            let m = lp_mass(&u);
            assert!(m <= 1.0 + 1e-12);
            let capped = u.ray(0).max_value() == 1.0;
            assert!(capped || (m - 1.0).abs() < 1e-9, "tau {tau}: mass {m}");
        }
    }

    #[test]
    fn random_rays_are_reproducible_and_admissible() {
        let (b, g) = setup(2);
        let spec = PerturbationSpec::new(PerturbationFamily::RandomRays, 0.5).with_seed(7);
        let u = generate(&spec, &b, &g).unwrap();
        assert_eq!(u, generate(&spec, &b, &g).unwrap());
        assert!(lp_mass(&u) <= 1.0 + 1e-12);
        assert!(u.rays().iter().all(|r| r.max_value() <= 1.0 && r.support_end() <= g.r_max()));
    }

    #[test]
    fn inadmissible_tau_is_rejected() {
        let (b, g) = setup(1);
        assert!(generate(&PerturbationSpec::new(PerturbationFamily::TranslateBall, 3.5), &b, &g).is_err());
        assert!(generate(&PerturbationSpec::new(PerturbationFamily::DilateBall, -0.1), &b, &g).is_err());
        assert!("wobble".parse::<PerturbationFamily>().is_err());
        assert_eq!("annulus".parse::<PerturbationFamily>().unwrap(), PerturbationFamily::Annulus);
    }
}
