//! Cavity-assisted Rydberg gate: the central atom emits its photon early or
//! late depending on the plaquette parity it is shifted by.

mod dynamics;
mod encoding;
mod outcome;
mod scheme;

pub use dynamics::{block, emission_amplitude, evolve, lindblad_block, photon_flux, Mode, Trajectory};
pub use encoding::{logical_projector, Encoding, LogicalState, PlaquetteConfig};
pub use outcome::{
    run_gate, BranchReport, Fidelity, GateOptions, GateOutcome, IntegrationReport, JointState, LogicalPopulations,
};
pub use scheme::{
    build_hamiltonian, detuning_for_config, idx, ConstantDrive, Drive, Level, LevelScheme, PulseSchedule, DIM,
};
