//! The maximality chain `𝓕(u) ≤ 𝓕(v) ≤ 𝓕(w)`, the displacement lower bounds
//! for the deficit `δ = 𝓕(w) - 𝓕(u)`, and the quantitative stability ratios.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::quadrature::{gauss_kronrod, Estimate};
use crate::radial::{
    build_auxiliary, evaluate_functional, integrate_ray, lp_distance, GridFunction, RadialGrid, RayProfile, RaySet,
};
use crate::scalar::{norm, Real};
use crate::transport::{
    assign_cells, discretize_sets, ray_transport, CellAssignment, CellSets, MonotoneMap1D,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainReport<T> {
    pub f_u: T,
    pub f_v: T,
    pub f_w: T,
    pub gap_uv: T,
    pub gap_vw: T,
    /// `gap_uv + gap_vw`
    pub delta: T,
    /// `chain_rel · max(1, 𝓕(w))` plus the quadrature error estimates of the three values.
    pub tol_chain: T,
    pub quadrature_error: T,
}

impl<T: Real> ChainReport<T> {
    pub fn uv_holds(&self) -> bool {
        self.gap_uv >= -self.tol_chain
    }

    pub fn vw_holds(&self) -> bool {
        self.gap_vw >= -self.tol_chain
    }

    pub fn uw_holds(&self) -> bool {
        self.delta >= -self.tol_chain
    }

    pub fn holds(&self) -> bool {
        self.uv_holds() && self.vw_holds()
    }
}

fn chain_with<T: Real>(problem: &Problem<T>, u: &GridFunction<T>, v: &GridFunction<T>) -> ChainReport<T> {
    let f = &problem.integrand;
    let eu = evaluate_functional(f, u, problem.tol.mass);
    let ev = evaluate_functional(f, v, problem.tol.mass);
    let ew = problem.f_max;
    let gap_uv = ev.value - eu.value;
    let gap_vw = ew.value - ev.value;
    let quadrature_error = eu.error + ev.error + ew.error;
    ChainReport {
        f_u: eu.value,
        f_v: ev.value,
        f_w: ew.value,
        gap_uv,
        gap_vw,
        delta: gap_uv + gap_vw,
        tol_chain: problem.tol.chain_rel * ew.value.max(T::one()) + quadrature_error,
        quadrature_error,
    }
}

/// Evaluates `𝓕` on `u`, on its ray-wise rearrangement `v = a 1_G`, and on the maximizer.
///
/// Fails when the integrand misses a hypothesis the chain relies on.
pub fn chain_report<T: Real>(problem: &Problem<T>, u: &GridFunction<T>) -> Result<ChainReport<T>> {
    problem.require_hypotheses()?;
    Ok(evaluate_chain(problem, u))
}

/// [`chain_report`] without the hypothesis gate.
pub fn evaluate_chain<T: Real>(problem: &Problem<T>, u: &GridFunction<T>) -> ChainReport<T> {
    let v = build_auxiliary(u).to_grid_function();
    chain_with(problem, u, &v)
}

/// `τ1(ν) = ∫_0^{κ} u^p r^{n-1} dr` and `τ2(ν) = ∫_κ^∞ u^p r^{n-1} dr` per direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalMasses<T> {
    pub kappa: Vec<T>,
    pub tau1: Vec<T>,
    pub tau2: Vec<T>,
    /// `max_i |a^p κ_i^n / n - τ1_i - τ2_i|`
    pub identity_residual: T,
}

pub fn directional_masses<T: Real>(u: &GridFunction<T>, g: &RaySet<T>) -> DirectionalMasses<T> {
    let grid = &**u.grid();
    let (p, ap) = (u.p(), u.a().powf(u.p()));
    let n = grid.n();
    let nf = T::from_usize_lossy(n);
    let mut out = DirectionalMasses {
        kappa: g.kappa().to_vec(),
        tau1: Vec::with_capacity(grid.n_dir()),
        tau2: Vec::with_capacity(grid.n_dir()),
        identity_residual: T::zero(),
    };
    for (i, &k) in g.kappa().iter().enumerate() {
        let mass = |lo: T, hi: T| {
            integrate_ray(grid, [u.ray(i)], lo, hi, &[k], |r, [s]| s.powf(p) * grid.jacobian(r)).value
        };
        let t1 = mass(T::zero(), k);
        let t2 = mass(k, grid.r_max());
        let resid = (ap * k.powi(n as i32) / nf - t1 - t2).abs();
        out.identity_residual = out.identity_residual.max(resid);
        out.tau1.push(t1);
        out.tau2.push(t2);
    }
    out
}

/// Right-hand sides of the two displacement lower bounds for `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Displacement<T> {
    /// `λ Σ h^n (|x| - |T(x)|)` over the optimal cell assignment.
    pub quant1: T,
    pub quant1_error: T,
    /// `λ Σ_ν σ ∫ (r - T_ν(r)) u^p / a^p r^{n-1} dr`
    pub quant2: T,
    pub quant2_error: T,
    pub cells: CellSets<T>,
    pub assignment: CellAssignment<T>,
}

/// `∫ (r - T(r)) u(r)^p r^{n-1} dr` along one ray.
///
/// `T` has square-root endpoint behaviour where source mass starts after a
/// gap, so each smooth piece goes through adaptive Gauss-Kronrod instead of
/// the fixed Simpson panels. Pieces are cut at the profile breaks, at `κ`,
/// and where `T` crosses a knot of the target.
fn ray_displacement<T: Real>(grid: &RadialGrid<T>, ray: &RayProfile<T>, map: &MonotoneMap1D<T>, kappa: T, p: T) -> Estimate<T> {
    let end = ray.support_end();
    if !(end > T::zero()) {
        return Estimate::zero();
    }
    let (src, tgt) = (map.source_cdf(), map.target_cdf());
    let mut knots: Vec<T> = ray.breaks();
    knots.push(kappa);
    knots.extend(src.knots().iter().copied());
    knots.extend(tgt.knots().iter().map(|&y| src.inverse(tgt.eval(y))));
    knots.retain(|&x| x > T::zero() && x < end);
    knots.push(T::zero());
    knots.push(end);
    knots.sort_by(|a, b| a.partial_cmp(b).expect("finite knots"));
    knots.dedup();
    let tol = T::tol_at_least(1e-15, 16.0) * end.max(T::one()).powi(grid.n() as i32 + 1);
    let mut total = Estimate::zero();
    for w in knots.windows(2) {
        let mid = T::lit(0.5) * (w[0] + w[1]);
        if ray.value(mid) == T::zero() {
            continue;
        }
        total += gauss_kronrod(
            |r| (r - map.apply(r)) * ray.value(r).powf(p) * grid.jacobian(r),
            w[0],
            w[1],
            tol,
        );
    }
    total
}

/// Computes both displacement bounds; `λ` must be positive.
pub fn displacement_bounds<T: Real>(problem: &Problem<T>, u: &GridFunction<T>, g: &RaySet<T>) -> Result<Displacement<T>> {
    let lambda = positive_lambda(problem)?;
    let grid = &*problem.grid;
    let (p, ap) = (u.p(), u.a().powf(u.p()));
    let v = g.to_grid_function();

    let mut q2 = Estimate::zero();
    for i in 0..grid.n_dir() {
        let map = ray_transport(grid, u.ray(i), v.ray(i), p, problem.tol.transport_mass)?;
        let e = ray_displacement(grid, u.ray(i), &map, g.kappa()[i], p);
        q2 += e.scale(grid.dir_weights()[i] / ap);
    }

    let cells = discretize_sets(&problem.ball, g, None, problem.tol.max_trim)?;
    let assignment = assign_cells(&cells)?;
    let vol = cells.cell_volume();
    let displaced = assignment
        .pairs()
        .fold(T::zero(), |acc, (x, y)| acc + (norm(x) - norm(y)) * vol);
    let covered = T::from_usize_lossy(assignment.len()) * vol;
    let reach = g.max_kappa().max(problem.ball.radius);
    let quant1_error = if cells.source_volume > T::zero() {
        lambda * (covered * cells.cell_diameter() + (cells.source_volume - covered).abs() * reach)
    } else {
        T::zero()
    };
    Ok(Displacement {
        quant1: lambda * displaced,
        quant1_error,
        quant2: lambda * q2.value,
        quant2_error: lambda * q2.error,
        cells,
        assignment,
    })
}

fn positive_lambda<T: Real>(problem: &Problem<T>) -> Result<T> {
    let lambda = problem.lambda();
    if lambda > T::zero() {
        Ok(lambda)
    } else {
        Err(Error::Hypothesis {
            name: "lambda".into(),
            detail: "F(·, a) has no positive decay rate on the truncated range".into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport<T> {
    pub n: usize,
    pub p: T,
    pub a: T,
    pub chain: ChainReport<T>,
    pub delta: T,
    pub lambda: T,
    /// `∫|u - w|^p`
    pub lhs: T,
    pub lhs_error: T,
    /// `√(δ/λ)`
    pub rhs_core: T,
    /// `lhs / rhs_core`, defined as 0 when `δ` is within the chain tolerance.
    pub ratio: T,
    pub quant1_rhs: T,
    pub quant1_error: T,
    pub quant2_rhs: T,
    pub quant2_error: T,
    /// `a^{-p} ∫|w - v|^p`
    pub step1_lhs: T,
    /// `max{√(δR^{n-1}/λ), δ/(λR)}`
    pub step1_rhs_core: T,
    pub step1_ratio: T,
    /// `∫|u - v|^p`
    pub step2_lhs: T,
    /// `√(a^{p/n} δ/λ)`
    pub step2_rhs_core: T,
    pub step2_ratio: T,
    pub cells: usize,
    pub discarded_fraction: T,
}

impl<T: Real> StabilityReport<T> {
    /// Whether `δ` is within the chain tolerance of zero.
    pub fn is_degenerate(&self) -> bool {
        self.delta <= self.chain.tol_chain
    }

    pub fn quant1_holds(&self) -> bool {
        self.delta + self.chain.tol_chain + self.quant1_error >= self.quant1_rhs
    }

    pub fn quant2_holds(&self) -> bool {
        self.delta + self.chain.tol_chain + self.quant2_error >= self.quant2_rhs
    }

    /// Every inequality of the chain and both displacement bounds.
    pub fn inequalities_hold(&self) -> bool {
        self.chain.holds() && self.quant1_holds() && self.quant2_holds()
    }

    /// `∫|u-w|^p ≤ 2^p` for competitors in the constraint set.
    pub fn lhs_bounded(&self) -> bool {
        self.lhs <= T::lit(2.0).powf(self.p) + self.lhs_error
    }

    /// Row values in the order of [`STABILITY_CSV_HEADER`].
    pub fn csv_fields(&self, meta: &RunMeta<T>) -> Vec<String> {
        let f = |v: T| format!("{:.16e}", v.to_f64_lossy() + 0.0);
        vec![
            meta.family.clone(),
            meta.params.clone(),
            self.n.to_string(),
            f(self.p),
            f(self.a),
            f(meta.tau),
            f(self.delta),
            f(self.lambda),
            f(self.lhs),
            f(self.rhs_core),
            f(self.ratio),
            f(self.quant1_rhs),
            f(self.quant2_rhs),
            f(self.step1_lhs),
            f(self.step1_ratio),
            f(self.step2_lhs),
            f(self.step2_ratio),
        ]
    }

    pub fn write_csv_row<W: Write>(&self, mut out: W, meta: &RunMeta<T>) -> io::Result<()> {
        writeln!(out, "{}", self.csv_fields(meta).join(","))
    }
}

/// Column order of [`StabilityReport::csv_fields`].
pub const STABILITY_CSV_HEADER: [&str; 17] = [
    "family", "params", "n", "p", "a", "tau", "delta", "lambda", "lhs", "rhs_core", "ratio", "quant1_rhs",
    "quant2_rhs", "step1_lhs", "step1_ratio", "step2_lhs", "step2_ratio",
];

/// Labels attached to a report row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta<T> {
    pub family: String,
    pub params: String,
    pub tau: T,
}

fn ratio<T: Real>(num: T, den: T) -> T {
    if den > T::zero() {
        num / den
    } else {
        T::zero()
    }
}

/// Fills every quantity of the stability estimate for one competitor.
pub fn stability_report<T: Real>(problem: &Problem<T>, u: &GridFunction<T>) -> Result<StabilityReport<T>> {
    problem.require_hypotheses()?;
    evaluate_stability(problem, u)
}

/// [`stability_report`] without the hypothesis gate; `λ` must still be positive.
pub fn evaluate_stability<T: Real>(problem: &Problem<T>, u: &GridFunction<T>) -> Result<StabilityReport<T>> {
    let lambda = positive_lambda(problem)?;
    let g = build_auxiliary(u);
    let v = g.to_grid_function();
    let w = &problem.maximizer;
    let chain = chain_with(problem, u, &v);
    let disp = displacement_bounds(problem, u, &g)?;

    let (n, p, a) = (problem.grid.n(), u.p(), u.a());
    let ap = a.powf(p);
    let radius = problem.ball.radius;
    let delta = chain.delta;
    let d = delta.max(T::zero());
    let degenerate = delta <= chain.tol_chain;

    let lhs = lp_distance(u, w, p);
    let rhs_core = (d / lambda).sqrt();
    let step1_lhs = lp_distance(w, &v, p).value / ap;
    let step1_rhs_core = (d * radius.powi(n as i32 - 1) / lambda).sqrt().max(d / (lambda * radius));
    let step2_lhs = lp_distance(u, &v, p).value;
    let step2_rhs_core = (ap.powf(T::from_usize_lossy(n).recip()) * d / lambda).sqrt();
    let gated = |num: T, den: T| if degenerate { T::zero() } else { ratio(num, den) };

    Ok(StabilityReport {
        n,
        p,
        a,
        chain,
        delta,
        lambda,
        lhs: lhs.value,
        lhs_error: lhs.error,
        rhs_core,
        ratio: gated(lhs.value, rhs_core),
        quant1_rhs: disp.quant1,
        quant1_error: disp.quant1_error,
        quant2_rhs: disp.quant2,
        quant2_error: disp.quant2_error,
        step1_lhs,
        step1_rhs_core,
        step1_ratio: gated(step1_lhs, step1_rhs_core),
        step2_lhs,
        step2_rhs_core,
        step2_ratio: gated(step2_lhs, step2_rhs_core),
        cells: disp.assignment.len(),
        discarded_fraction: disp.cells.discarded_fraction,
    })
}

/// Empirical lower bound for the stability constant `C(n, p, a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration<T> {
    pub n: usize,
    pub p: T,
    pub a: T,
    pub constant: T,
    /// Runs with positive deficit that entered the maximum.
    pub runs: usize,
}

/// Largest ratio over the runs with positive deficit.
pub fn calibrate_constant<T: Real>(reports: &[StabilityReport<T>]) -> Result<Calibration<T>> {
    let live: Vec<&StabilityReport<T>> = reports.iter().filter(|r| r.delta > T::zero()).collect();
    let first = live
        .first()
        .ok_or_else(|| Error::Argument("every run has zero deficit".into()))?;
    Ok(Calibration {
        n: first.n,
        p: first.p,
        a: first.a,
        constant: live.iter().map(|r| r.ratio).fold(T::zero(), T::max),
        runs: live.len(),
    })
}

/// Directional masses of `u` with its own auxiliary set.
pub fn directional_masses_of<T: Real>(u: &GridFunction<T>) -> DirectionalMasses<T> {
    directional_masses(u, &build_auxiliary(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::{Family, Integrand};
    use crate::perturb::{generate, PerturbationFamily, PerturbationSpec};
    use crate::radial::RayProfile;
    use approx::assert_relative_eq;

    fn problem(family: Family<f64>, n: usize, n_r: usize, n_dir: usize) -> Problem<f64> {
        Problem::with_resolution(Integrand::new(family, 1.0, 2.0, n).unwrap(), 4.0, n_r, n_dir).unwrap()
    }

    fn exp2() -> Family<f64> {
        Family::Exponential { gamma: 1.0, q: 2.0 }
    }

    #[test]
    fn maximizer_has_zero_deficit() {
        let pb = problem(exp2(), 2, 64, 16);
        let c = chain_report(&pb, &pb.maximizer).unwrap();
        assert_eq!(c.delta, 0.0);
        assert_eq!(c.f_u, c.f_w);
        let s = stability_report(&pb, &pb.maximizer).unwrap();
        assert_eq!(s.lhs, 0.0);
        assert_eq!(s.ratio, 0.0);
        assert_eq!(s.quant1_rhs, 0.0);
        assert_eq!(s.quant2_rhs, 0.0);
    }

    #[test]
    fn annulus_chain_is_strict() {
        let pb = problem(exp2(), 2, 128, 16);
        let u = GridFunction::new(pb.grid.clone(), 1.0, 2.0, vec![RayProfile::interval(1.0, 0.3, 0.5); 16]).unwrap();
        let c = chain_report(&pb, &u).unwrap();
        // 2π ∫_{0.3}^{0.5} e^{-r} r dr and 2π ∫_0^{0.4} e^{-r} r dr
        let prim = |r: f64| -(r + 1.0) * (-r).exp();
        let two_pi = 2.0 * std::f64::consts::PI;
        assert_relative_eq!(c.f_u, two_pi * (prim(0.5) - prim(0.3)), epsilon = 1e-8);
        assert_relative_eq!(c.f_v, two_pi * (prim(0.4) - prim(0.0)), epsilon = 1e-8);
        assert!(c.f_u < c.f_v && c.f_v < c.f_w);
        assert_eq!(c.delta, c.gap_uv + c.gap_vw);
    }

    #[test]
    fn annulus_displacement_matches_deficit_for_linear_decay() {
        // slope one on the whole range, so the ray-wise bound is an equality
        let pb = problem(Family::LinearCutoff { c: 3.0, q: 2.0 }, 2, 256, 32);
        let (big_r, rho) = (pb.ball.radius, 0.9 * pb.ball.radius);
        let u = generate(&PerturbationSpec::new(PerturbationFamily::Annulus, 0.9), &pb.ball, &pb.grid).unwrap();
        let d = displacement_bounds(&pb, &u, &build_auxiliary(&u)).unwrap();
        let s = (big_r * big_r + rho * rho).sqrt();
        let exact = 2.0 * std::f64::consts::PI / 3.0 * (s.powi(3) - rho.powi(3) - big_r.powi(3));
        assert_relative_eq!(d.quant2, exact, max_relative = 1e-10);
        let c = chain_report(&pb, &u).unwrap();
        assert_relative_eq!(c.delta, exact, max_relative = 1e-10);
    }

    #[test]
    fn half_height_ball_quarter_value() {
        let pb = problem(exp2(), 3, 64, 64);
        let u = pb.maximizer.scaled(0.5);
        let c = chain_report(&pb, &u).unwrap();
        assert_relative_eq!(c.f_u, 0.25 * c.f_w, epsilon = 1e-13);
        assert!(c.f_u <= c.f_v);
        let g = build_auxiliary(&u);
        for &k in g.kappa() {
            assert_relative_eq!(k, pb.ball.radius * 0.25f64.cbrt(), epsilon = 1e-12);
        }
        let d = displacement_bounds(&pb, &u, &g).unwrap();
        assert_eq!(d.quant1, 0.0);
        assert!(d.quant2 > 0.0);
    }

    #[test]
    fn one_dimensional_shift_displacement() {
        let pb = problem(Family::LinearCutoff { c: 3.0, q: 2.0 }, 1, 64, 2);
        let u = GridFunction::new(
            pb.grid.clone(),
            1.0,
            2.0,
            vec![RayProfile::indicator(1.0, 0.4), RayProfile::indicator(1.0, 0.6)],
        )
        .unwrap();
        let g = build_auxiliary(&u);
        let d = displacement_bounds(&pb, &u, &g).unwrap();
        assert_relative_eq!(d.quant1, 0.01 * pb.lambda(), epsilon = d.quant1_error.max(1e-12));
        let s = stability_report(&pb, &u).unwrap();
        assert!(s.inequalities_hold());
        // 2∫_{0.4}^{0.5}(3 - r) dr - 2∫... reduces to ∫_{0.5}^{0.6} - ∫_{0.4}^{0.5} of (3-r), i.e. 0.01
        assert_relative_eq!(s.delta, 0.01, epsilon = 1e-12);
    }

    #[test]
    fn directional_mass_identity() {
        let pb = problem(exp2(), 2, 64, 16);
        let u = GridFunction::new(pb.grid.clone(), 1.0, 2.0, vec![RayProfile::interval(1.0, 0.3, 0.5); 16]).unwrap();
        let m = directional_masses_of(&u);
        assert_relative_eq!(m.tau1[0], 0.035, epsilon = 1e-14);
        assert_relative_eq!(m.tau2[0], 0.045, epsilon = 1e-14);
        assert!(m.identity_residual < 1e-12);
        let w = directional_masses_of(&pb.maximizer);
        assert!(w.tau2.iter().all(|&t| t == 0.0));
        let z = directional_masses_of(&GridFunction::zero(pb.grid.clone(), 1.0, 2.0));
        assert!(z.tau1.iter().chain(&z.tau2).all(|&t| t == 0.0));
    }

    #[test]
    fn zero_lambda_is_an_error() {
        let pb = problem(Family::LinearCutoff { c: 0.6, q: 2.0 }, 1, 64, 2);
        assert_eq!(pb.lambda(), 0.0);
        assert!(matches!(stability_report(&pb, &pb.maximizer), Err(Error::Hypothesis { .. })));
    }

    #[test]
    fn calibration_takes_the_maximum() {
        let pb = problem(Family::LinearCutoff { c: 3.0, q: 2.0 }, 1, 64, 2);
        let reports: Vec<_> = [0.1, 0.2]
            .iter()
            .map(|&t| {
                let u = generate(&PerturbationSpec::new(PerturbationFamily::TranslateBall, t), &pb.ball, &pb.grid).unwrap();
                stability_report(&pb, &u).unwrap()
            })
            .collect();
        let cal = calibrate_constant(&reports).unwrap();
        assert_eq!(cal.runs, 2);
        assert_eq!(cal.constant, reports[0].ratio.max(reports[1].ratio));
        let mut single = reports[0];
        single.ratio = 0.8;
        assert_eq!(calibrate_constant(&[single]).unwrap().constant, 0.8);
        assert!(calibrate_constant(&[stability_report(&pb, &pb.maximizer).unwrap()]).is_err());
    }
}
