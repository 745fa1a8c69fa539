//! Coherent targeting of quantum states along heteroclinic orbits of the
//! kicked rotor.

pub mod control;
pub mod error;
pub mod heteroclinic;
pub mod quantum;
pub mod scheme;
pub mod torus;
pub mod wigner;

pub use control::{verify_constraints, ConstraintReport, KickPotential, KickTiming};
pub use error::{Error, Result};
pub use heteroclinic::{
    find_orbits, select_optimal, table_one, verify_orbit, ControlOrbit, EndCondition, OrbitReport,
    SearchConfig, SearchOutcome,
};
pub use scheme::ControlScheme;
pub use quantum::{
    build_gaussian, propagate, sweep_dimension, PropagationPlan, QuantumState, TorusQuantization,
    UnitaryOperator, WavePacketSpec,
};
pub use torus::{
    AccumulatedStability, KickedRotorParams, PhasePoint, StabilityMatrix, TorusAction,
};
pub use wigner::{
    extract_contours, trace_densities, wigner_transform, ContourLevel, ContourSet,
    PhaseSpaceDensity, Resolution,
};
