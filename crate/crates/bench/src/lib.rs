//! Shared fixtures for the criterion benches.

use evanesim::{Scenario, BarrierRecipe, FirstLayer, PulseSpec, QuarterWaveDesign};
use evanesim::scenario::GridSettings;

/// The two-channel configuration with the 11-period TiO2/SiO2 mirror.
pub fn mirror_scenario() -> Scenario {
    let pulse = PulseSpec::new(375.0, 28.0).expect("valid pulse");
    Scenario {
        pulse,
        barrier: BarrierRecipe::QuarterWave(QuarterWaveDesign {
            n_high: 2.4,
            n_low: 1.46,
            periods: 11,
            center_wavelength_nm: pulse.center_wavelength_nm(),
            first: FirstLayer::High,
        }),
        path_length_mm: 0.3,
        grids: GridSettings::default(),
        output_dir: None,
    }
}
