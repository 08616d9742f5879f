//! Bell-experiment models: Born-rule quantum predictions, a local
//! deterministic baseline and pilot-wave trajectories.

pub mod born;
pub mod local;
pub mod pilot_wave;

pub use born::{
    joint_prob, joint_table, no_signalling_check, no_signalling_residual, quantum_correlator, singlet,
    singlet_hv_model, state_hv_model, BellSettings, Ket4, SpinSetting,
};
pub use local::local_deterministic_model;
pub use pilot_wave::{
    equilibrium_sample, grid_points, parameter_dependence_witnesses, pilot_wave_hv_model,
    pw_equilibrium_stats, pw_evolve,
    DependenceWitness, Guidance, PWConfig, PWState, PWStats,
};
