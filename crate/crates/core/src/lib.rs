//! Geometric phases of two coupled spin-½ particles in a composite
//! environment: particle 1 exchanges excitations with a quantized field mode,
//! particle 2 precesses in a classical magnetic field.
//!
//! Every phase is computed twice, once as a discretized overlap product along
//! the loop and once from its closed form, so the two routes can be compared.
//!
//! The numerics are generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the aliases at the crate root fix `f64`.

pub mod eigen;
pub mod error;
pub mod linalg;
pub mod model;
pub mod phases;
pub mod scalar;
pub mod subsystem;
pub mod two_mode;

pub use eigen::{
    amplitudes_from_angles, eigenframes, extract_angles, fix_gauge, frame_at_origin, hermitian_eigensystem,
    track_all_levels, track_loop, Angles, EigenFrame, LoopTrace, DEFAULT_LOOP_STEPS,
};
pub use error::{Error, Result};
pub use model::{build_block_hamiltonian, number_expectation, number_operator_block, BlockHamiltonian, ModelParams};
pub use phases::{
    berry_magnetic_analytic, berry_magnetic_from_trace, berry_magnetic_numeric, berry_quantized_analytic,
    berry_quantized_numeric, solid_angle_fixed_latitude, two_mode_berry_analytic, two_mode_berry_numeric,
    two_mode_jz_phase, vacuum_induced_phase, wilson_loop_phase, PhaseReport,
};
pub use scalar::{wrap_angle, Real};
pub use subsystem::{
    concurrence_from_angles, concurrence_pure, gamma2_arctan_form, gamma2_closed_form, gamma_2q_subsystem_analytic,
    mixed_phase_numeric, mixed_phase_two_mode_numeric, reduce_to_particle2, MixedPhaseReport, Partition, ReducedState,
};
pub use two_mode::{embed_two_mode, two_mode_rotation, TwoModeState};

pub type Params = ModelParams<f64>;
pub type Frame = EigenFrame<f64>;
pub type Trace = LoopTrace<f64>;
pub type Report = PhaseReport<f64>;
pub type MixedReport = MixedPhaseReport<f64>;
pub type TwoMode = TwoModeState<f64>;

pub type ParamsF32 = ModelParams<f32>;
pub type FrameF32 = EigenFrame<f32>;
pub type ReportF32 = PhaseReport<f32>;
