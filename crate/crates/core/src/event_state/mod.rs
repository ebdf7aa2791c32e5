//! Events, states and conditioning operations for the finite classical
//! model and the finite-dimensional projection model.

mod axioms;
mod classical;
mod model_file;
mod operation;
mod von_neumann;

pub use axioms::{axiom_suite, commutation_deviation, names, AxiomCheck, AxiomReport, EventStateModel, AXIOM_TOL};
pub use classical::{classical_operation, measure_of, ClassicalModel};
pub use model_file::{EventSpec, ModelSpec};
pub use operation::{
    apply_operation, are_compatible, compose_and_apply, implies, involution, join, meet,
    operation_orthocomplement, probe_states, unnormalized_update, Operation, COMMUTE_TOL,
    DOMAIN_TOL, MAP_EQUALITY_TOL, PROBE_STATES,
};
pub use von_neumann::{validate_projection, EventSet, LatticeReport, VonNeumannModel};
