//! Integrands `F(r, s)` and numerical checks of the structural hypotheses the
//! maximality argument relies on: monotonicity in `r`, domination by a
//! separable majorant, the sub-homogeneity `F(r, λa) ≤ λ^p F(r, a)` and the
//! linear separation rate `λ` of `F(·, a)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::quadrature::gauss_kronrod;
use crate::scalar::Real;

/// A tabulated integrand, bilinear in `(r, s)` and constant beyond the last radial knot.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<T> {
    r_knots: Vec<T>,
    s_knots: Vec<T>,
    /// `values[i][j] = F(r_knots[i], s_knots[j])`
    values: Vec<Vec<T>>,
}

impl<T: Real> Table<T> {
    pub fn new(r_knots: Vec<T>, s_knots: Vec<T>, values: Vec<Vec<T>>) -> Result<Self> {
        let increasing = |v: &[T]| v.windows(2).all(|w| w[0] < w[1]);
        if r_knots.is_empty() || !increasing(&r_knots) || r_knots[0] < T::zero() {
            return Err(Error::Argument(
                "tabulated r knots must be nonnegative and strictly increasing".into(),
            ));
        }
        if s_knots.len() < 2 || !increasing(&s_knots) || s_knots[0] != T::zero() {
            return Err(Error::Argument(
                "tabulated s knots must start at 0 and be strictly increasing".into(),
            ));
        }
        if values.len() != r_knots.len() || values.iter().any(|row| row.len() != s_knots.len()) {
            return Err(Error::Argument("tabulated values must be |r| x |s|".into()));
        }
        for row in &values {
            if row.iter().any(|v| !(*v >= T::zero())) {
                return Err(Error::Argument("tabulated values must be nonnegative".into()));
            }
            if row[0] != T::zero() {
                return Err(Error::Argument("tabulated F(r, 0) must vanish".into()));
            }
        }
        Ok(Self {
            r_knots,
            s_knots,
            values,
        })
    }

    /// Separable table `F(r, s) = g_i * (s / s_max)^q` sampled on `s_samples` points.
    pub fn separable(r_knots: Vec<T>, radial: Vec<T>, s_max: T, q: T, s_samples: usize) -> Result<Self> {
        if radial.len() != r_knots.len() || s_samples < 2 {
            return Err(Error::Argument("radial values must match r knots".into()));
        }
        let s_knots: Vec<T> = (0..s_samples)
            .map(|j| s_max * T::from_usize_lossy(j) / T::from_usize_lossy(s_samples - 1))
            .collect();
        let values = radial
            .iter()
            .map(|&g| s_knots.iter().map(|&s| g * (s / s_max).powf(q)).collect())
            .collect();
        Self::new(r_knots, s_knots, values)
    }

    pub fn r_knots(&self) -> &[T] {
        &self.r_knots
    }

    pub fn s_knots(&self) -> &[T] {
        &self.s_knots
    }

    fn locate(knots: &[T], x: T) -> (usize, T) {
        if knots.len() == 1 || x <= knots[0] {
            return (0, T::zero());
        }
        let last = knots.len() - 1;
        if x >= knots[last] {
            return (last - 1, T::one());
        }
        let k = knots.partition_point(|&k| k <= x) - 1;
        (k, (x - knots[k]) / (knots[k + 1] - knots[k]))
    }

    fn value(&self, r: T, s: T) -> T {
        let (j, ts) = Self::locate(&self.s_knots, s);
        let along_s = |row: &Vec<T>| row[j] + ts * (row[j + 1] - row[j]);
        if self.r_knots.len() == 1 {
            return along_s(&self.values[0]);
        }
        let (i, tr) = Self::locate(&self.r_knots, r);
        let lo = along_s(&self.values[i]);
        let hi = along_s(&self.values[i + 1]);
        lo + tr * (hi - lo)
    }

    fn radial_max(&self, r: T) -> T {
        let (i, _) = Self::locate(&self.r_knots, r);
        // bilinear interpolation never exceeds its corner values
        let row_max = |row: &Vec<T>| row.iter().copied().fold(T::zero(), T::max);
        if self.r_knots.len() == 1 {
            return row_max(&self.values[0]);
        }
        row_max(&self.values[i]).max(row_max(&self.values[i + 1]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family<T> {
    /// `F(r, s) = (1 + r)^{-m} s^q`
    PowerDecay { m: T, q: T },
    /// `F(r, s) = (c - r)_+ s^q`
    LinearCutoff { c: T, q: T },
    /// `F(r, s) = exp(-γ r) s^q`
    Exponential { gamma: T, q: T },
    Tabulated(Table<T>),
}

impl<T: Real> Family<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Family::PowerDecay { .. } => "power_decay",
            Family::LinearCutoff { .. } => "linear_cutoff",
            Family::Exponential { .. } => "exponential",
            Family::Tabulated(_) => "tabulated",
        }
    }
}

/// An integrand together with the constraint data `(a, p, n)` it is studied with.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrand<T> {
    family: Family<T>,
    a: T,
    p: T,
    n: usize,
}

impl<T: Real> Integrand<T> {
    pub fn new(family: Family<T>, a: T, p: T, n: usize) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::Argument(format!("amplitude a must be positive, got {a}")));
        }
        if !(p >= T::one()) || !p.is_finite() {
            return Err(Error::Argument(format!("exponent p must be >= 1, got {p}")));
        }
        if !(1..=3).contains(&n) {
            return Err(Error::Argument(format!("unsupported dimension {n}")));
        }
        let positive_q = |q: T| {
            if q > T::zero() && q.is_finite() {
                Ok(())
            } else {
                Err(Error::Argument(format!("exponent q must be positive, got {q}")))
            }
        };
        match &family {
            Family::PowerDecay { m, q } => {
                positive_q(*q)?;
                if !(*m >= T::zero()) {
                    return Err(Error::Argument("power-decay m must be >= 0".into()));
                }
            }
            Family::LinearCutoff { c, q } => {
                positive_q(*q)?;
                if !(*c > T::zero()) {
                    return Err(Error::Argument("linear-cutoff c must be > 0".into()));
                }
            }
            Family::Exponential { gamma, q } => {
                positive_q(*q)?;
                if !(*gamma >= T::zero()) {
                    return Err(Error::Argument("exponential rate must be >= 0".into()));
                }
            }
            Family::Tabulated(table) => {
                if *table.s_knots.last().unwrap() < a {
                    return Err(Error::Argument("tabulated s knots must cover [0, a]".into()));
                }
            }
        }
        Ok(Self { family, a, p, n })
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Point evaluation with domain checks.
    pub fn eval(&self, r: T, s: T) -> Result<T> {
        if !(r >= T::zero()) {
            return Err(Error::Domain(format!("radius {r} < 0")));
        }
        if !(s >= T::zero()) || s > self.a {
            return Err(Error::Domain(format!("value {s} outside [0, {}]", self.a)));
        }
        Ok(self.value(r, s))
    }

    /// Point evaluation without domain checks; callers guarantee `r >= 0`, `0 <= s <= a`.
    #[inline]
    pub fn value(&self, r: T, s: T) -> T {
        match &self.family {
            Family::PowerDecay { m, q } => (T::one() + r).powf(-*m) * s.powf(*q),
            Family::LinearCutoff { c, q } => (*c - r).max(T::zero()) * s.powf(*q),
            Family::Exponential { gamma, q } => (-*gamma * r).exp() * s.powf(*q),
            Family::Tabulated(table) => table.value(r, s),
        }
    }

    /// Radii where `F(·, s)` is not smooth; quadrature cells are split there.
    pub fn radial_kinks(&self) -> Vec<T> {
        match &self.family {
            Family::LinearCutoff { c, .. } => vec![*c],
            Family::Tabulated(table) => table.r_knots.clone(),
            _ => Vec::new(),
        }
    }

    /// The separable majorant `α(r) β(s)` each family is naturally dominated by.
    pub fn natural_domination(&self) -> Domination<'_, T> {
        match &self.family {
            Family::PowerDecay { m, q } => {
                let (m, q) = (*m, *q);
                Domination::new(move |r: T| (T::one() + r).powf(-m), move |s: T| s.powf(q))
            }
            Family::LinearCutoff { c, q } => {
                let (c, q) = (*c, *q);
                Domination::new(move |r: T| (c - r).max(T::zero()), move |s: T| s.powf(q))
            }
            Family::Exponential { gamma, q } => {
                let (g, q) = (*gamma, *q);
                Domination::new(move |r: T| (-g * r).exp(), move |s: T| s.powf(q))
            }
            Family::Tabulated(table) => Domination::new(move |r: T| table.radial_max(r), |_| T::one()),
        }
    }
}

impl<T: Real> fmt::Display for Integrand<T> {
    /// Compact descriptor without commas, safe inside a CSV field.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::PowerDecay { m, q } => write!(f, "power_decay(m={m};q={q})"),
            Family::LinearCutoff { c, q } => write!(f, "linear_cutoff(c={c};q={q})"),
            Family::Exponential { gamma, q } => write!(f, "exponential(gamma={gamma};q={q})"),
            Family::Tabulated(t) => write!(f, "tabulated({}x{})", t.r_knots.len(), t.s_knots.len()),
        }
    }
}

/// Separable majorant `F(r, s) ≤ α(r) β(s)`.
pub struct Domination<'a, T> {
    pub alpha: Box<dyn Fn(T) -> T + Send + Sync + 'a>,
    pub beta: Box<dyn Fn(T) -> T + Send + Sync + 'a>,
}

impl<'a, T> Domination<'a, T> {
    pub fn new(
        alpha: impl Fn(T) -> T + Send + Sync + 'a,
        beta: impl Fn(T) -> T + Send + Sync + 'a,
    ) -> Self {
        Self {
            alpha: Box::new(alpha),
            beta: Box::new(beta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H1Check<T> {
    pub pass: bool,
    pub worst_violation: T,
    pub strict_decrease: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck<T> {
    pub pass: bool,
    pub worst_violation: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H2Check<T> {
    pub pass: bool,
    pub worst_violation: T,
    /// `∫_0^{R_max} α(r) r^{n-1} dr`
    pub alpha_integral: T,
}

/// Absolute tolerances used by the hypothesis checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckTolerance<T> {
    pub tol: T,
    pub strict: T,
}

impl<T: Real> Default for CheckTolerance<T> {
    fn default() -> Self {
        Self {
            tol: T::tol_at_least(1e-10, 64.0),
            strict: T::tol_at_least(1e-12, 8.0),
        }
    }
}

fn require_increasing<T: Real>(r_grid: &[T], min_len: usize) -> Result<()> {
    if r_grid.len() < min_len {
        return Err(Error::Argument(format!("radial grid needs at least {min_len} nodes")));
    }
    if r_grid[0] < T::zero() || r_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Argument("radial grid must be nonnegative and strictly increasing".into()));
    }
    Ok(())
}

/// Checks that `F(·, s)` is non-increasing on consecutive grid nodes for every sampled `s`,
/// and separately whether `F(·, a)` is strictly decreasing.
pub fn check_h1<T: Real>(
    f: &Integrand<T>,
    r_grid: &[T],
    s_samples: &[T],
    tol: CheckTolerance<T>,
) -> Result<H1Check<T>> {
    require_increasing(r_grid, 1)?;
    if s_samples.is_empty() {
        return Err(Error::Argument("no s samples".into()));
    }
    let mut worst = T::zero();
    for &s in s_samples {
        let mut prev = f.eval(r_grid[0], s)?;
        for &r in &r_grid[1..] {
            let next = f.value(r, s);
            worst = worst.max(next - prev);
            prev = next;
        }
    }
    let strict_decrease = r_grid
        .windows(2)
        .all(|w| f.value(w[0], f.a) > f.value(w[1], f.a) + tol.strict);
    Ok(H1Check {
        pass: worst <= tol.tol,
        worst_violation: worst,
        strict_decrease,
    })
}

/// Checks `F(r, λa) ≤ λ^p F(r, a)` on the product of `r_grid` and `lambda_grid`.
pub fn check_condition<T: Real>(
    f: &Integrand<T>,
    r_grid: &[T],
    lambda_grid: &[T],
    tol: CheckTolerance<T>,
) -> Result<ConditionCheck<T>> {
    require_increasing(r_grid, 1)?;
    if lambda_grid.iter().any(|&l| !(l >= T::zero() && l <= T::one()))
        || !lambda_grid.contains(&T::zero())
        || !lambda_grid.contains(&T::one())
    {
        return Err(Error::Argument("lambda grid must lie in [0, 1] and contain both endpoints".into()));
    }
    let mut worst = T::zero();
    for &r in r_grid {
        let full = f.value(r, f.a);
        for &l in lambda_grid {
            worst = worst.max(f.value(r, l * f.a) - l.powf(f.p) * full);
        }
    }
    Ok(ConditionCheck {
        pass: worst <= tol.tol,
        worst_violation: worst,
    })
}

/// Largest `λ ≥ 0` with `F(r_i, a) ≥ F(r_j, a) + λ (r_j - r_i)` for all grid pairs `r_i < r_j`.
///
/// The rate is only meaningful on the truncated range covered by `r_grid`.
pub fn estimate_lambda<T: Real>(f: &Integrand<T>, r_grid: &[T]) -> Result<T> {
    require_increasing(r_grid, 2)?;
    let vals: Vec<T> = r_grid.iter().map(|&r| f.value(r, f.a)).collect();
    let mut best = T::infinity();
    for i in 0..r_grid.len() {
        for j in i + 1..r_grid.len() {
            let q = (vals[i] - vals[j]) / (r_grid[j] - r_grid[i]);
            if q < best {
                best = q;
            }
        }
    }
    Ok(best.max(T::zero()))
}

/// Checks `F(r, s) ≤ α(r) β(s)` on the product grid and integrates `α(r) r^{n-1}`
/// over `[0, max r_grid]`.
pub fn check_h2<T: Real>(
    f: &Integrand<T>,
    domination: &Domination<'_, T>,
    r_grid: &[T],
    s_samples: &[T],
    tol: CheckTolerance<T>,
) -> Result<H2Check<T>> {
    require_increasing(r_grid, 1)?;
    let mut worst = T::zero();
    for &r in r_grid {
        let alpha = (domination.alpha)(r);
        for &s in s_samples {
            worst = worst.max(f.value(r, s) - alpha * (domination.beta)(s));
        }
    }
    let n_minus_1 = T::from_usize_lossy(f.n - 1);
    let mut integral = T::zero();
    let mut lo = T::zero();
    for &hi in r_grid {
        if hi > lo {
            let cell_tol = T::tol_at_least(1e-14, 16.0) * (hi - lo);
            integral += gauss_kronrod(|r: T| (domination.alpha)(r) * r.powf(n_minus_1), lo, hi, cell_tol).value;
            lo = hi;
        }
    }
    Ok(H2Check {
        pass: worst <= tol.tol,
        worst_violation: worst,
        alpha_integral: integral,
    })
}

/// Outcome of every hypothesis check on one discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport<T> {
    pub h1_pass: bool,
    pub h1_worst_violation: T,
    pub condition_pass: bool,
    pub condition_worst_violation: T,
    pub strict_decrease_pass: bool,
    pub lambda_hat: T,
    pub h2_pass: bool,
    pub h2_alpha_integral: T,
}

impl<T: Real> HypothesisReport<T> {
    /// Runs all checks on `r_grid` using `s` and `λ` sample counts from [`default_samples`].
    pub fn evaluate(f: &Integrand<T>, r_grid: &[T], tol: CheckTolerance<T>) -> Result<Self> {
        let (s_samples, lambda_grid) = default_samples(f.a);
        let h1 = check_h1(f, r_grid, &s_samples, tol)?;
        let condition = check_condition(f, r_grid, &lambda_grid, tol)?;
        let lambda_hat = estimate_lambda(f, r_grid)?;
        let h2 = check_h2(f, &f.natural_domination(), r_grid, &s_samples, tol)?;
        Ok(Self {
            h1_pass: h1.pass,
            h1_worst_violation: h1.worst_violation,
            condition_pass: condition.pass,
            condition_worst_violation: condition.worst_violation,
            strict_decrease_pass: h1.strict_decrease,
            lambda_hat,
            h2_pass: h2.pass,
            h2_alpha_integral: h2.alpha_integral,
        })
    }

    /// First failed hypothesis among those the maximality chain needs.
    pub fn first_failure(&self) -> Option<&'static str> {
        if !self.h1_pass {
            Some("h1")
        } else if !self.condition_pass {
            Some("condition")
        } else if !self.h2_pass {
            Some("h2")
        } else {
            None
        }
    }
}

/// 17 evenly spaced `s` samples in `[0, a]` and 21 `λ` samples in `[0, 1]`.
pub fn default_samples<T: Real>(a: T) -> (Vec<T>, Vec<T>) {
    let s = (0..=16).map(|k| a * T::from_usize_lossy(k) / T::lit(16.0)).collect();
    let l = (0..=20).map(|k| T::from_usize_lossy(k) / T::lit(20.0)).collect();
    (s, l)
}
