use super::assignment::CellAssignment;
use crate::radial::{BallProfile, RaySet};
use crate::scalar::{norm, Real};

/// How well a discrete assignment moves mass toward the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InwardReport<T> {
    pub pairs: usize,
    /// Fraction of pairs with `|T(x)| ≤ |x| + cell_diameter`.
    pub inward_fraction: T,
    /// Fraction of assigned targets lying in `E∖G`.
    pub target_fraction: T,
    /// `max (|T(x)| - |x|)`, zero for no pairs.
    pub worst_excess: T,
}

pub fn verify_inward<T: Real>(assignment: &CellAssignment<T>, e: &BallProfile<T>, g: &RaySet<T>) -> InwardReport<T> {
    let (mut inward, mut inside) = (0usize, 0usize);
    let mut worst = T::neg_infinity();
    for (x, y) in assignment.pairs() {
        let excess = norm(y) - norm(x);
        worst = worst.max(excess);
        if excess <= assignment.cell_diameter {
            inward += 1;
        }
        let r = norm(y);
        if r < e.radius && r >= g.boundary_radius(y) {
            inside += 1;
        }
    }
    let pairs = assignment.len();
    let frac = |k: usize| {
        if pairs == 0 {
            T::one()
        } else {
            T::from_usize_lossy(k) / T::from_usize_lossy(pairs)
        }
    };
    InwardReport {
        pairs,
        inward_fraction: frac(inward),
        target_fraction: frac(inside),
        worst_excess: if pairs == 0 { T::zero() } else { worst },
    }
}
