//! One-dimensional semiclassical toy on the unit torus: coherent states,
//! Husimi and Toeplitz maps, exact discrete optimal transport, and the
//! interpolation between the entropy and Wasserstein bounds in `ħ`.

mod bounds;
mod torus;
mod transport;

pub use bounds::{
    monotonicity_check, solve_hbar_crossing, uniform_envelope, BoundParams, Crossing, EnvelopeRow,
    Monotonicity, CROSSING_TOL, HBAR_BRACKET,
};
pub use torus::{
    coherent_state, duality_check, husimi, husimi_density, overlap, projected_coherent_state,
    resolution_identity_check, standard_window, toeplitz, DiscreteMeasure, PhaseSpaceGrid,
    ResolutionDefect, TorusHilbert, TAIL_TOL,
};
pub use transport::{
    dist1, dist_mk2, optimal_transport, torus_distance, total_variation, TransportPlan,
};
