use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrand::{CheckTolerance, HypothesisReport, Integrand};
use crate::radial::{ball_radius, build_maximizer, evaluate_functional, BallProfile, Evaluation, GridFunction, RadialGrid};
use crate::scalar::Real;

/// Default truncation radius in units of the maximizer radius.
pub const DEFAULT_RADIUS_MULTIPLE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    /// Absolute slack in the hypothesis checks.
    pub hypothesis: T,
    /// Margin required for strict decrease of `F(·, a)`.
    pub strict: T,
    /// Slack in `∫u^p ≤ 1`.
    pub mass: T,
    /// Relative part of the chain tolerance, multiplied by `max(1, 𝓕(w))`.
    pub chain_rel: T,
    /// Relative ray-mass mismatch accepted by the monotone maps.
    pub transport_mass: T,
    /// Largest fraction of cells the equal-count trimming may drop.
    pub max_trim: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        let check = CheckTolerance::<T>::default();
        Self {
            hypothesis: check.tol,
            strict: check.strict,
            mass: T::tol_at_least(1e-6, 64.0),
            chain_rel: T::tol_at_least(1e-6, 64.0),
            transport_mass: T::tol_at_least(1e-8, 256.0),
            max_trim: T::lit(0.02),
        }
    }
}

impl<T: Real> Tolerances<T> {
    /// Multiplies every numerical slack by `x`; the trimming budget is a fraction and is kept.
    pub fn scaled(self, x: T) -> Self {
        Self {
            hypothesis: self.hypothesis * x,
            strict: self.strict * x,
            mass: self.mass * x,
            chain_rel: self.chain_rel * x,
            transport_mass: self.transport_mass * x,
            max_trim: self.max_trim,
        }
    }

    pub fn check(&self) -> CheckTolerance<T> {
        CheckTolerance {
            tol: self.hypothesis,
            strict: self.strict,
        }
    }
}

/// An integrand on a grid together with its maximizer and hypothesis report.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    pub integrand: Integrand<T>,
    pub grid: Arc<RadialGrid<T>>,
    pub ball: BallProfile<T>,
    pub maximizer: GridFunction<T>,
    pub f_max: Evaluation<T>,
    pub hypotheses: HypothesisReport<T>,
    pub tol: Tolerances<T>,
}

impl<T: Real> Problem<T> {
    pub fn new(integrand: Integrand<T>, grid: Arc<RadialGrid<T>>, tol: Tolerances<T>) -> Result<Self> {
        if grid.n() != integrand.n() {
            return Err(Error::Config(format!(
                "grid dimension {} differs from integrand dimension {}",
                grid.n(),
                integrand.n()
            )));
        }
        let ball = ball_radius(&integrand, grid.r_max())?;
        let maximizer = build_maximizer(&ball, &grid)?;
        let f_max = evaluate_functional(&integrand, &maximizer, tol.mass);
        let hypotheses = HypothesisReport::evaluate(&integrand, grid.nodes(), tol.check())?;
        Ok(Self {
            integrand,
            grid,
            ball,
            maximizer,
            f_max,
            hypotheses,
            tol,
        })
    }

    /// Grid of `n_r` cells and `n_dir` directions truncated at `multiple · R`.
    pub fn with_resolution(integrand: Integrand<T>, multiple: T, n_r: usize, n_dir: usize) -> Result<Self> {
        let radius = ball_radius(&integrand, T::infinity())?.radius;
        let grid = Arc::new(RadialGrid::build(integrand.n(), multiple * radius, n_r, n_dir)?);
        Self::new(integrand, grid, Tolerances::default())
    }

    /// Default resolution and truncation at four maximizer radii.
    pub fn with_defaults(integrand: Integrand<T>) -> Result<Self> {
        let n = integrand.n();
        Self::with_resolution(
            integrand,
            T::lit(DEFAULT_RADIUS_MULTIPLE),
            crate::radial::DEFAULT_RADIAL_CELLS,
            crate::radial::default_directions(n),
        )
    }

    pub fn lambda(&self) -> T {
        self.hypotheses.lambda_hat
    }

    /// Fails with the first hypothesis the maximality chain needs and does not have.
    pub fn require_hypotheses(&self) -> Result<()> {
        match self.hypotheses.first_failure() {
            None => Ok(()),
            Some(name) => {
                let h = &self.hypotheses;
                let detail = match name {
                    "h1" => format!("worst monotonicity violation {}", h.h1_worst_violation),
                    "condition" => format!("worst violation {}", h.condition_worst_violation),
                    _ => "domination fails on the grid".to_string(),
                };
                Err(Error::Hypothesis {
                    name: name.to_string(),
                    detail,
                })
            }
        }
    }
}
