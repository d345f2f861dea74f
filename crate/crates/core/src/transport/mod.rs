//! Transport maps standing in for the Brenier maps: monotone rearrangement
//! along rays and exact discrete assignment between lattice cells.

mod assignment;
mod cdf;
mod cells;
mod inward;
mod monotone;

pub use assignment::{
    assign_cells, assign_min_cost, exhaustive, hungarian, lattice_costs, pairing_cost, CellAssignment, Cost,
    EXHAUSTIVE_LIMIT,
};
pub use cdf::RayCdf;
pub use cells::{difference_volumes, discretize_sets, Cell, CellSets, MAX_CELLS, TARGET_CELLS};
pub use inward::{verify_inward, InwardReport};
pub use monotone::{
    monotone_transport_1d, pushforward_against, ray_transport, standard_test_functions, verify_pushforward, MonotoneMap1D,
    PushforwardCheck, TestFunction,
};
