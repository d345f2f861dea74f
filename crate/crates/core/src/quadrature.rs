//! One-dimensional quadrature primitives.
//!
//! The radial integrals in this crate are evaluated cell by cell with Simpson's
//! rule, where cells are first split at every known discontinuity of the
//! integrand. [`simpson_piece`] also returns a Richardson error estimate
//! obtained by comparing the single-panel rule with its two-panel refinement.
//! [`gauss_kronrod`] is a globally adaptive G7/K15 rule used where an
//! accuracy independent of the radial grid is required.

use std::ops::{Add, AddAssign};

use crate::scalar::Real;

/// A quadrature value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

impl<T: Real> Estimate<T> {
    pub fn new(value: T, error: T) -> Self {
        Self { value, error }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.value * s, self.error * s.abs())
    }
}

impl<T: Real> Add for Estimate<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.value + rhs.value, self.error + rhs.error)
    }
}

impl<T: Real> AddAssign for Estimate<T> {
    fn add_assign(&mut self, rhs: Self) {
        self.value += rhs.value;
        self.error += rhs.error;
    }
}

/// Simpson's rule on `[x0, x1]` with a Richardson error estimate.
///
/// The returned value is the single-panel rule; the error estimate is
/// `16/15 |S_2 - S_1|` where `S_2` is the two-panel rule.
pub fn simpson_piece<T: Real, F: FnMut(T) -> T>(mut f: F, x0: T, x1: T) -> Estimate<T> {
    let h = x1 - x0;
    if h <= T::zero() {
        return Estimate::zero();
    }
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let four = T::lit(4.0);
    let f0 = f(x0);
    let fm = f(x0 + half * h);
    let f1 = f(x1);
    let fq1 = f(x0 + quarter * h);
    let fq3 = f(x0 + T::lit(0.75) * h);
    let coarse = h / T::lit(6.0) * (f0 + four * fm + f1);
    let fine = h / T::lit(12.0) * (f0 + four * fq1 + T::lit(2.0) * fm + four * fq3 + f1);
    Estimate::new(coarse, (fine - coarse).abs() * T::lit(16.0 / 15.0))
}

/// Single-panel Simpson rule without error estimate.
pub fn simpson<T: Real, F: FnMut(T) -> T>(mut f: F, x0: T, x1: T) -> T {
    let h = x1 - x0;
    if h <= T::zero() {
        return T::zero();
    }
    h / T::lit(6.0) * (f(x0) + T::lit(4.0) * f(x0 + T::lit(0.5) * h) + f(x1))
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Estimate<T> {
    let center = T::lit(0.5) * (a + b);
    let half = T::lit(0.5) * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(center - dx) + f(center + dx);
        kronrod += T::lit(WGK[j]) * s;
        if j % 2 == 1 {
            gauss += T::lit(WG[j / 2]) * s;
        }
    }
    Estimate::new(kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Fixed seven-point Gauss–Legendre rule, exact for polynomials of degree 13.
pub fn gauss7<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T) -> T {
    let center = T::lit(0.5) * (a + b);
    let half = T::lit(0.5) * (b - a);
    let mut sum = f(center) * T::lit(WG[3]);
    for j in 0..3 {
        let dx = half * T::lit(XGK[2 * j + 1]);
        sum += T::lit(WG[j]) * (f(center - dx) + f(center + dx));
    }
    sum * half
}

/// Adaptive Gauss–Kronrod (G7/K15) quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn gauss_kronrod<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T) -> Estimate<T> {
    if b <= a {
        return Estimate::zero();
    }
    gk_recurse(&mut f, a, b, tol, 48)
}

fn gk_recurse<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T, tol: T, depth: u32) -> Estimate<T> {
    let whole = gk15(f, a, b);
    if whole.error <= tol || depth == 0 || (b - a) <= T::epsilon() * (a.abs() + b.abs()) {
        return whole;
    }
    let mid = T::lit(0.5) * (a + b);
    let half_tol = T::lit(0.5) * tol;
    gk_recurse(f, a, mid, half_tol, depth - 1) + gk_recurse(f, mid, b, half_tol, depth - 1)
}

/// Merges sorted cell edges with extra breakpoints, clipped to `[lo, hi]`.
///
/// Breakpoints closer than a relative `1e-13` to an existing knot are dropped so
/// no degenerate cell is produced.
pub fn merge_knots<T: Real>(edges: &[T], breaks: &[T], lo: T, hi: T) -> Vec<T> {
    let snap = T::tol_at_least(1e-13, 16.0) * hi.abs().max(T::one());
    let mut knots: Vec<T> = Vec::with_capacity(edges.len() + breaks.len() + 2);
    knots.push(lo);
    knots.extend(edges.iter().copied().filter(|&e| e > lo && e < hi));
    knots.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
    knots.push(hi);
    knots.sort_by(|x, y| x.partial_cmp(y).expect("finite knots"));
    let mut out: Vec<T> = Vec::with_capacity(knots.len());
    for k in knots {
        match out.last() {
            Some(&last) if k - last <= snap => {
                // keep the range endpoint exact
                if k == hi {
                    *out.last_mut().unwrap() = hi;
                }
            }
            _ => out.push(k),
        }
    }
    if out.len() == 1 {
        out.push(hi);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss7_exact_for_degree_13() {
        let v = gauss7(|x: f64| x.powi(13) + x.powi(12), 0.0, 1.0);
        assert_relative_eq!(v, 1.0 / 14.0 + 1.0 / 13.0, epsilon = 1e-15);
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let e = simpson_piece(|x: f64| x * x * x - 2.0 * x + 1.0, 0.0, 2.0);
        assert_relative_eq!(e.value, 4.0 - 4.0 + 2.0, epsilon = 1e-14);
        assert!(e.error < 1e-14);
    }

    #[test]
    fn simpson_error_estimate_tracks_true_error() {
        let e = simpson_piece(|x: f64| x.exp(), 0.0, 1.0);
        let truth = std::f64::consts::E - 1.0;
        let err = (e.value - truth).abs();
        assert!(e.error > 0.5 * err && e.error < 2.0 * err, "{} vs {}", e.error, err);
    }

    #[test]
    fn gauss_kronrod_handles_sqrt_endpoint() {
        let e = gauss_kronrod(|x: f64| x.sqrt(), 0.0, 1.0, 1e-13);
        assert_relative_eq!(e.value, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn merge_knots_drops_near_duplicates() {
        let edges = [0.0, 0.25, 0.5, 0.75, 1.0];
        let knots = merge_knots(&edges, &[0.5 + 1e-16, 0.3, 2.0], 0.0, 1.0);
        assert_eq!(knots, vec![0.0, 0.25, 0.3, 0.5, 0.75, 1.0]);
        let sub = merge_knots(&edges, &[], 0.1, 0.6);
        assert_eq!(sub, vec![0.1, 0.25, 0.5, 0.6]);
    }
}
