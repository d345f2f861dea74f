//! Numerical verification of ball maximizers for radially decreasing integral
//! functionals `𝓕(u) = ∫ F(|x|, u(x)) dx` over
//! `X = {0 ≤ u ≤ a, ∫ u^p ≤ 1}` in dimensions one to three.
//!
//! The crate builds the maximizer `w = a 1_E`, the ray-wise rearrangement
//! `v = a 1_G` of any competitor `u`, the transport maps relating them, and
//! every quantity of the stability estimate
//! `∫|u - w|^p ≤ C √((𝓕(w) - 𝓕(u)) / λ)`.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.
//!
//! ```
//! use ballmax::{Family, Integrand64, Problem64};
//! use ballmax::perturb::{generate, PerturbationFamily, PerturbationSpec};
//! use ballmax::stability::stability_report;
//!
//! let f = Integrand64::new(Family::LinearCutoff { c: 3.0, q: 2.0 }, 1.0, 2.0, 1).unwrap();
//! let problem = Problem64::with_defaults(f).unwrap();
//! let spec = PerturbationSpec::new(PerturbationFamily::TranslateBall, 0.1);
//! let u = generate(&spec, &problem.ball, &problem.grid).unwrap();
//! let report = stability_report(&problem, &u).unwrap();
//! assert!(report.inequalities_hold());
//! assert!((report.ratio - 2.0).abs() < 1e-9);
//! ```

pub mod error;
pub mod integrand;
pub mod perturb;
pub mod problem;
pub mod quadrature;
pub mod radial;
pub mod scalar;
pub mod stability;
pub mod transport;

pub use error::{Error, Result};
pub use integrand::Family;
pub use scalar::Real;

pub type Integrand64 = integrand::Integrand<f64>;
pub type HypothesisReport64 = integrand::HypothesisReport<f64>;
pub type RadialGrid64 = radial::RadialGrid<f64>;
pub type GridFunction64 = radial::GridFunction<f64>;
pub type BallProfile64 = radial::BallProfile<f64>;
pub type RaySet64 = radial::RaySet<f64>;
pub type MonotoneMap1D64 = transport::MonotoneMap1D<f64>;
pub type CellAssignment64 = transport::CellAssignment<f64>;
pub type Problem64 = problem::Problem<f64>;
pub type ChainReport64 = stability::ChainReport<f64>;
pub type StabilityReport64 = stability::StabilityReport<f64>;
pub type PerturbationSpec64 = perturb::PerturbationSpec<f64>;
