//! Analytic reductions of the level scheme, the motional adiabaticity monitor
//! and parameter sweeps.

mod adiabatic;
mod reduced;
mod sweep;

pub use adiabatic::{adiabaticity_check, AdiabaticityOptions, AdiabaticityReport, VrfProfile};
pub use reduced::{
    analytic_emission, analytic_flux, dark_bright_decomposition, driven_steady_state, reduced_hamiltonian,
    steady_coherence, to_ser, two_level_reduction, DarkBright, ReducedParams, SteadyCoherence, TwoLevel,
};
pub use sweep::{
    fig3_baseline, fig3_panel, fig3_panels, linspace, logspace, sweep, Fig3Panel, SweepAxis, SweepRow, SweepTable,
    MAX_POINTS,
};
