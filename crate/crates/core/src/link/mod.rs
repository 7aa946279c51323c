//! End-to-end communication chain on top of the waveform and channel models.

mod constellation;
mod effective;
mod equalize;
mod estimate;
mod experiment;

pub use constellation::{Constellation, ConstellationKind};
pub use effective::{
    build_effective_channel, diagonal_centre, full_diversity_holds, min_c1_full_diversity,
    path_displacement, EffectiveChannel,
};
pub use equalize::{equalize, Equalized, EqualizerKind, EqualizerSpec};
pub use estimate::{estimate_channel_single_pilot, required_guard, SinglePilotEstimator};
pub use experiment::{
    run_ber_experiment, trial_seed, BerExperiment, ChannelSpec, Csi, PilotSpec, RandomProfile,
    ResultRecord,
};
