//! Ray profiles: the restriction `r ↦ u(rν)` of a competitor to one direction.
//!
//! Profiles are piecewise: a sorted list of disjoint segments, each carrying a
//! smooth level, and zero elsewhere. Segment endpoints are kept exactly so that
//! radial quadrature can split cells at every jump.

use super::grid::RadialGrid;
use crate::error::{Error, Result};
use crate::quadrature::{merge_knots, simpson_piece, Estimate};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Level<T> {
    Constant(T),
    /// `height · (1 - (r / radius)^2)^2`, vanishing to first order at `radius`.
    Bump { height: T, radius: T },
}

impl<T: Real> Level<T> {
    #[inline]
    pub fn value(&self, r: T) -> T {
        match *self {
            Level::Constant(c) => c,
            Level::Bump { height, radius } => {
                let x = r / radius;
                let b = (T::one() - x * x).max(T::zero());
                height * b * b
            }
        }
    }

    pub fn max_value(&self) -> T {
        match *self {
            Level::Constant(c) => c,
            Level::Bump { height, .. } => height,
        }
    }

    pub fn min_value(&self) -> T {
        match *self {
            Level::Constant(c) => c,
            Level::Bump { height, .. } => height.min(T::zero()),
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        match *self {
            Level::Constant(c) => Level::Constant(c * s),
            Level::Bump { height, radius } => Level::Bump {
                height: height * s,
                radius,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub start: T,
    pub end: T,
    pub level: Level<T>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RayProfile<T> {
    segments: Vec<Segment<T>>,
}

impl<T: Real> RayProfile<T> {
    /// Builds a profile from sorted, disjoint, nonempty segments with nonnegative levels.
    /// Segments with a zero constant level are dropped.
    pub fn new(segments: Vec<Segment<T>>) -> Result<Self> {
        let mut prev_end = T::zero();
        let mut kept = Vec::with_capacity(segments.len());
        for s in segments {
            if !(s.start >= prev_end) || !(s.end > s.start) || !s.end.is_finite() {
                return Err(Error::Argument(format!(
                    "profile segments must be sorted, disjoint and nonempty ([{}, {}])",
                    s.start, s.end
                )));
            }
            if !(s.level.min_value() >= T::zero()) {
                return Err(Error::Argument("profile levels must be nonnegative".into()));
            }
            prev_end = s.end;
            if s.level != Level::Constant(T::zero()) {
                kept.push(s);
            }
        }
        Ok(Self { segments: kept })
    }

    pub fn zero() -> Self {
        Self { segments: Vec::new() }
    }

    /// `height · 1_{[0, radius)}`.
    pub fn indicator(height: T, radius: T) -> Self {
        Self::interval(height, T::zero(), radius)
    }

    /// `height · 1_{[start, end)}`.
    pub fn interval(height: T, start: T, end: T) -> Self {
        if end > start && height > T::zero() {
            Self {
                segments: vec![Segment {
                    start,
                    end,
                    level: Level::Constant(height),
                }],
            }
        } else {
            Self::zero()
        }
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn is_zero(&self) -> bool {
        self.segments.is_empty()
    }

    /// Right-continuous point value.
    pub fn value(&self, r: T) -> T {
        let k = self.segments.partition_point(|s| s.end <= r);
        match self.segments.get(k) {
            Some(s) if s.start <= r => s.level.value(r),
            _ => T::zero(),
        }
    }

    pub fn breaks(&self) -> Vec<T> {
        let mut b = Vec::with_capacity(2 * self.segments.len());
        for s in &self.segments {
            b.push(s.start);
            b.push(s.end);
        }
        b
    }

    pub fn support_end(&self) -> T {
        self.segments.last().map_or(T::zero(), |s| s.end)
    }

    pub fn max_value(&self) -> T {
        self.segments.iter().map(|s| s.level.max_value()).fold(T::zero(), T::max)
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .map(|seg| Segment {
                    level: seg.level.scaled(s),
                    ..*seg
                })
                .collect(),
        }
    }
}

/// Cursor locating the segment of a profile that covers a sequence of increasing points.
struct Cursor<'a, T> {
    segments: &'a [Segment<T>],
    idx: usize,
}

impl<'a, T: Real> Cursor<'a, T> {
    fn new(p: &'a RayProfile<T>) -> Self {
        Self {
            segments: &p.segments,
            idx: 0,
        }
    }

    fn level_at(&mut self, mid: T) -> Option<Level<T>> {
        while self.idx < self.segments.len() && self.segments[self.idx].end <= mid {
            self.idx += 1;
        }
        match self.segments.get(self.idx) {
            Some(s) if s.start <= mid => Some(s.level),
            _ => None,
        }
    }
}

/// Integrates `g(r, [u_1(r), …, u_K(r)])` over `[lo, hi]` along one ray.
///
/// The grid cells are split at every segment endpoint of the profiles and at
/// `extra_breaks`; each piece is integrated with Simpson's rule using the
/// levels that are active in its interior, so jumps never fall inside a
/// panel. Pieces on which every profile vanishes are skipped: `g` must satisfy
/// `g(r, [0; K]) = 0`. The Jacobian `r^{n-1}` is not included.
pub fn integrate_ray<T: Real, const K: usize>(
    grid: &RadialGrid<T>,
    profiles: [&RayProfile<T>; K],
    lo: T,
    hi: T,
    extra_breaks: &[T],
    mut g: impl FnMut(T, [T; K]) -> T,
) -> Estimate<T> {
    let mut breaks: Vec<T> = extra_breaks.to_vec();
    let mut support_end = T::zero();
    for p in &profiles {
        breaks.extend(p.breaks());
        support_end = support_end.max(p.support_end());
    }
    let hi = hi.min(support_end);
    if !(hi > lo) {
        return Estimate::zero();
    }
    let knots = merge_knots(grid.edges(), &breaks, lo, hi);
    let mut cursors: Vec<Cursor<'_, T>> = profiles.iter().map(|p| Cursor::new(p)).collect();
    let mut total = Estimate::zero();
    for w in knots.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let mid = T::lit(0.5) * (x0 + x1);
        let mut levels: [Option<Level<T>>; K] = [None; K];
        let mut any = false;
        for (slot, c) in levels.iter_mut().zip(cursors.iter_mut()) {
            *slot = c.level_at(mid);
            any |= slot.is_some();
        }
        if !any {
            continue;
        }
        total += simpson_piece(
            |r| {
                let mut vals = [T::zero(); K];
                for (v, l) in vals.iter_mut().zip(levels.iter()) {
                    if let Some(l) = l {
                        *v = l.value(r);
                    }
                }
                g(r, vals)
            },
            x0,
            x1,
        );
    }
    total
}
