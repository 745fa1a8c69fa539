//! Torus quantization, controlled unitaries and targeting fidelity.

pub mod operator;
pub mod propagate;
pub mod space;

pub use operator::{
    controlled_half_steps, floquet_uncontrolled, floquet_uncontrolled_dense, max_diff_up_to_phase,
    sampled_unwind_kernel, shift_operator, unitarity_defect, unwind_operator, Factor,
    Representation, UnitaryOperator,
};
pub use propagate::{
    full_kick_phase, propagate, sweep_dimension, targeting_error, Propagation, PropagationPlan,
    SweepRow,
};
pub use space::{build_gaussian, QuantumState, TorusQuantization, WavePacketSpec, TAIL_LIMIT};
