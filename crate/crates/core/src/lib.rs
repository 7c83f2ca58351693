//! Two-channel photodetection of femtosecond pulses, one channel in vacuum
//! and one tunnelling through a multilayer dielectric mirror.
//!
//! The crate is organised bottom-up:
//!
//! * [`pulse`]: Gaussian spectral function, frequency grids and the free
//!   analytic signal.
//! * [`layered`]: characteristic-matrix response of lossless layer stacks.
//! * [`detection`]: first-electron photoionization probabilities and the
//!   SHG coincidence functional.
//! * [`scenario`] and [`runner`]: scenario files, the reproduction pipeline
//!   and its CSV/JSON outputs.
//! * [`falsify`]: randomized stopband stacks for probing the sign of the
//!   probability difference.
//!
//! Units: time in fs, angular frequency in rad/fs, lengths in nm.

pub mod detection;
pub mod error;
pub mod falsify;
pub mod layered;
pub mod pulse;
pub mod runner;
pub mod scenario;

pub use detection::{
    barrier_probability, detector_envelope, peak_delay, probability_difference,
    reference_probability, shg_coincidence, Channel, DetectionCurve, TimeGrid,
};
pub use error::{Error, Result};
pub use layered::{
    barrier_field, build_quarter_wave_stack, characteristic_matrix, group_delay, stack_response,
    BarrierResponse, ChannelGeometry, CharacteristicMatrix, FirstLayer, Layer, QuarterWaveDesign,
    Stack,
};
pub use pulse::{
    free_analytic_signal, gaussian_spectrum, make_frequency_grid, FrequencyGrid, PulseSpec,
    SPEED_OF_LIGHT_NM_PER_FS,
};
pub use runner::{run_reproduction, sweep, RunReport, SweepParameter};
pub use scenario::{load_scenario, BarrierRecipe, Scenario};
