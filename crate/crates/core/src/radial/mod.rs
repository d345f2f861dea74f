//! Polar discretization, competitors on it, the ball maximizer and the
//! auxiliary ray-wise rearrangement `v = a 1_G`.

mod auxiliary;
mod ball;
mod function;
mod grid;
mod profile;

pub use auxiliary::{build_auxiliary, kappa, RaySet};
pub use ball::{ball_radius, build_maximizer, BallProfile};
pub use function::{evaluate_functional, lp_distance, lp_mass, lp_mass_estimate, Evaluation, GridFunction};
pub use grid::{ball_volume, default_directions, sphere_area, RadialGrid, DEFAULT_RADIAL_CELLS};
pub use profile::{integrate_ray, Level, RayProfile, Segment};
