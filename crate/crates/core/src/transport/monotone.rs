use super::cdf::RayCdf;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_kronrod, Estimate};
use crate::radial::{RadialGrid, RayProfile};
use crate::scalar::Real;

/// Monotone rearrangement `T = Q_target ∘ C_source` along one ray.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneMap1D<T> {
    source: RayCdf<T>,
    target: RayCdf<T>,
    source_nodes: Vec<T>,
    map_values: Vec<T>,
    source_density: Vec<T>,
    target_density: Vec<T>,
    range_end: T,
}

/// Builds the monotone map pushing `source` to `target`, sampled at `nodes`.
///
/// The total masses must agree within `mass_tol · max(1, mass)`.
pub fn monotone_transport_1d<T: Real>(
    source: RayCdf<T>,
    target: RayCdf<T>,
    nodes: &[T],
    mass_tol: T,
) -> Result<MonotoneMap1D<T>> {
    let (ms, mt) = (source.total(), target.total());
    if (ms - mt).abs() > mass_tol * ms.max(mt).max(T::one()) {
        return Err(Error::MassMismatch {
            source_mass: ms.to_f64_lossy(),
            target_mass: mt.to_f64_lossy(),
        });
    }
    let range_end = target.support_end();
    let mut map = MonotoneMap1D {
        source_nodes: nodes.to_vec(),
        source_density: nodes.iter().map(|&r| source.density(r)).collect(),
        target_density: nodes.iter().map(|&r| target.density(r)).collect(),
        map_values: Vec::with_capacity(nodes.len()),
        source,
        target,
        range_end,
    };
    let snap = T::tol_at_least(0.0, 64.0) * nodes.last().copied().unwrap_or(T::one()).max(T::one());
    let mut prev = T::zero();
    for &r in nodes {
        let mut t = map.apply(r).max(prev);
        if t > r && t - r <= snap {
            t = r;
        }
        map.map_values.push(t);
        prev = t;
    }
    Ok(map)
}

/// Monotone map along one ray between the `p`-th power densities of two profiles.
pub fn ray_transport<T: Real>(
    grid: &RadialGrid<T>,
    source: &RayProfile<T>,
    target: &RayProfile<T>,
    p: T,
    mass_tol: T,
) -> Result<MonotoneMap1D<T>> {
    monotone_transport_1d(
        RayCdf::from_profile(grid, source, p),
        RayCdf::from_profile(grid, target, p),
        grid.nodes(),
        mass_tol,
    )
}

impl<T: Real> MonotoneMap1D<T> {
    /// `T(r)`, clamped to the target's support.
    pub fn apply(&self, r: T) -> T {
        self.target
            .inverse(self.source.eval(r))
            .max(T::zero())
            .min(self.range_end)
    }

    pub fn source_nodes(&self) -> &[T] {
        &self.source_nodes
    }

    pub fn map_values(&self) -> &[T] {
        &self.map_values
    }

    pub fn source_density(&self) -> &[T] {
        &self.source_density
    }

    pub fn target_density(&self) -> &[T] {
        &self.target_density
    }

    pub fn source_cdf(&self) -> &RayCdf<T> {
        &self.source
    }

    pub fn target_cdf(&self) -> &RayCdf<T> {
        &self.target
    }

    /// End of the target support, `κ(ν)` for the auxiliary set.
    pub fn range_end(&self) -> T {
        self.range_end
    }

    pub fn is_monotone(&self) -> bool {
        self.map_values.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn in_range(&self) -> bool {
        self.map_values.iter().all(|&t| t >= T::zero() && t <= self.range_end)
    }

    /// Largest `T(r_j) - r_j` over nodes where the source density is positive.
    pub fn domination_excess(&self) -> T {
        self.source_nodes
            .iter()
            .zip(&self.map_values)
            .zip(&self.source_density)
            .filter(|(_, &d)| d > T::zero())
            .map(|((&r, &t), _)| t - r)
            .fold(T::zero(), T::max)
    }
}

/// Radial test function `H` for the pushforward identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction<T> {
    One,
    Linear,
    Square,
    ExpDecay,
    Indicator(T, T),
}

impl<T: Real> TestFunction<T> {
    pub fn eval(&self, r: T) -> T {
        match *self {
            TestFunction::One => T::one(),
            TestFunction::Linear => r,
            TestFunction::Square => r * r,
            TestFunction::ExpDecay => (-r).exp(),
            TestFunction::Indicator(lo, hi) => {
                if r >= lo && r < hi {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::One => "one",
            TestFunction::Linear => "r",
            TestFunction::Square => "r^2",
            TestFunction::ExpDecay => "exp(-r)",
            TestFunction::Indicator(..) => "indicator",
        }
    }

    fn jumps(&self) -> Vec<T> {
        match *self {
            TestFunction::Indicator(lo, hi) => vec![lo, hi],
            _ => Vec::new(),
        }
    }
}

/// `{1, r, r², e^{-r}, 1_{[κ/4, 3κ/4)}}` for a target supported on `[0, κ]`.
pub fn standard_test_functions<T: Real>(kappa: T) -> [TestFunction<T>; 5] {
    [
        TestFunction::One,
        TestFunction::Linear,
        TestFunction::Square,
        TestFunction::ExpDecay,
        TestFunction::Indicator(T::lit(0.25) * kappa, T::lit(0.75) * kappa),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushforwardCheck<T> {
    pub function: TestFunction<T>,
    /// `∫ H dμ_target`
    pub lhs: T,
    /// `∫ H∘T dμ_source`
    pub rhs: T,
    pub rel_error: T,
}

fn integrate_pieces<T: Real>(knots: &[T], tol: T, mut f: impl FnMut(T) -> T) -> Estimate<T> {
    let mut total = Estimate::zero();
    for w in knots.windows(2) {
        if w[1] > w[0] {
            total += gauss_kronrod(&mut f, w[0], w[1], tol);
        }
    }
    total
}

fn sorted_within<T: Real>(mut pts: Vec<T>, hi: T) -> Vec<T> {
    pts.retain(|&x| x >= T::zero() && x <= hi);
    pts.push(T::zero());
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    pts.dedup();
    pts
}

/// Evaluates both sides of `∫ H dμ_target = ∫ H(T(r)) dμ_source` for each test function.
///
/// Both sides use adaptive quadrature split at the density knots; the source
/// side is additionally split where `T` crosses a target knot or a jump of `H`.
pub fn verify_pushforward<T: Real>(map: &MonotoneMap1D<T>, tests: &[TestFunction<T>]) -> Vec<PushforwardCheck<T>> {
    pushforward_against(map, map.source_cdf(), map.target_cdf(), tests)
}

/// As [`verify_pushforward`], but integrates against reference measures
/// `source` and `target` instead of the ones `map` was built from. This
/// measures how well a map built from approximate densities transports the
/// exact ones.
pub fn pushforward_against<T: Real>(
    map: &MonotoneMap1D<T>,
    source: &RayCdf<T>,
    target: &RayCdf<T>,
    tests: &[TestFunction<T>],
) -> Vec<PushforwardCheck<T>> {
    let (src, tgt) = (source, target);
    let (msrc, mtgt) = (map.source_cdf(), map.target_cdf());
    let mass = src.total().max(tgt.total());
    let tol = T::tol_at_least(1e-15, 4.0) * mass.max(T::min_positive_value());
    let t_end = tgt.support_end();
    let s_end = src.support_end();
    tests
        .iter()
        .map(|h| {
            let jumps = h.jumps();
            let t_knots = sorted_within(
                tgt.knots().iter().copied().chain(jumps.iter().copied()).collect(),
                t_end,
            );
            // preimages of the map's target knots and of the jumps of H
            let marks = mtgt.knots().iter().copied().chain(jumps.iter().copied());
            let pulled: Vec<T> = marks.map(|y| msrc.inverse(mtgt.eval(y))).collect();
            let s_knots = sorted_within(
                src.knots().iter().copied().chain(msrc.knots().iter().copied()).chain(pulled).collect(),
                s_end,
            );
            let lhs = integrate_pieces(&t_knots, tol, |y| h.eval(y) * tgt.density(y)).value;
            let rhs = integrate_pieces(&s_knots, tol, |r| {
                let d = src.density(r);
                if d > T::zero() {
                    h.eval(map.apply(r)) * d
                } else {
                    T::zero()
                }
            })
            .value;
            let scale = lhs.abs().max(rhs.abs());
            let rel_error = if scale > T::zero() { (lhs - rhs).abs() / scale } else { T::zero() };
            PushforwardCheck {
                function: *h,
                lhs,
                rhs,
                rel_error,
            }
        })
        .collect()
}
