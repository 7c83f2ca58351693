//! Scenario files: TOML key/value pairs describing the pulse, the barrier
//! recipe, the channel length and the sampling grids.
//!
//! ```toml
//! center_frequency_thz = 375.0
//! fwhm_bandwidth_thz = 28.0
//! barrier = "quarter_wave"
//! n_high = 2.4
//! n_low = 1.46
//! periods = 11
//! path_length_mm = 0.3
//! ```
//!
//! Grid keys may be omitted and take the defaults in [`GridSettings`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detection::TimeGrid;
use crate::error::{Error, Result};
use crate::layered::{ChannelGeometry, FirstLayer, Layer, QuarterWaveDesign, Stack};
use crate::pulse::{make_frequency_grid, FrequencyGrid, PulseSpec, SPEED_OF_LIGHT_NM_PER_FS};

/// What sits on the barrier path.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BarrierRecipe {
    QuarterWave(QuarterWaveDesign),
    /// Explicit layer list, entrance first.
    Layers { layers: Vec<Layer> },
    /// No barrier; the barrier channel is a second vacuum channel.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSettings {
    pub frequency_points: usize,
    pub frequency_half_width_sigmas: f64,
    pub time_half_span_fs: f64,
    pub time_step_fs: f64,
    pub delay_half_span_fs: f64,
    pub delay_step_fs: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        GridSettings {
            frequency_points: 2049,
            frequency_half_width_sigmas: 6.0,
            time_half_span_fs: 150.0,
            time_step_fs: 0.25,
            delay_half_span_fs: 60.0,
            delay_step_fs: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub pulse: PulseSpec,
    pub barrier: BarrierRecipe,
    pub path_length_mm: f64,
    pub grids: GridSettings,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
enum BarrierKind {
    QuarterWave,
    Layers,
    None,
}

/// On-disk form; every key optional so that missing values become
/// validation errors naming the key instead of opaque parse failures.
#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    center_frequency_thz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fwhm_bandwidth_thz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    emission_time_fs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    barrier: Option<BarrierKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_high: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_low: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    periods: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    center_wavelength_nm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_layer: Option<FirstLayer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    layer_indices: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    layer_thicknesses_nm: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path_length_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frequency_points: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frequency_half_width_sigmas: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_half_span_fs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_step_fs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delay_half_span_fs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delay_step_fs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_dir: Option<String>,
}

fn invalid(constraint: &'static str, detail: impl Into<String>) -> Error {
    Error::Validation {
        constraint,
        detail: detail.into(),
    }
}

fn required<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| invalid("missing_key", format!("`{key}` is required")))
}

fn positive(value: f64, key: &str) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid("positive", format!("`{key}` must be positive, got {value}")))
    }
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario> {
        let center = required(self.center_frequency_thz, "center_frequency_thz")?;
        let fwhm = required(self.fwhm_bandwidth_thz, "fwhm_bandwidth_thz")?;
        let pulse =
            PulseSpec::with_emission_time(center, fwhm, self.emission_time_fs.unwrap_or(0.0))
                .map_err(|e| invalid("quasi_monochromatic", e.to_string()))?;

        let barrier = match self.barrier.unwrap_or(BarrierKind::QuarterWave) {
            BarrierKind::QuarterWave => {
                let periods = required(self.periods, "periods")?;
                if periods < 1 {
                    return Err(invalid(
                        "periods_positive",
                        format!("`periods` must be at least 1, got {periods}"),
                    ));
                }
                BarrierRecipe::QuarterWave(QuarterWaveDesign {
                    n_high: positive(required(self.n_high, "n_high")?, "n_high")?,
                    n_low: positive(required(self.n_low, "n_low")?, "n_low")?,
                    periods: periods as usize,
                    center_wavelength_nm: positive(
                        self.center_wavelength_nm
                            .unwrap_or_else(|| pulse.center_wavelength_nm()),
                        "center_wavelength_nm",
                    )?,
                    first: self.first_layer.unwrap_or_default(),
                })
            }
            BarrierKind::Layers => {
                let n = required(self.layer_indices, "layer_indices")?;
                let h = required(self.layer_thicknesses_nm, "layer_thicknesses_nm")?;
                if n.len() != h.len() {
                    return Err(invalid(
                        "layers",
                        format!("{} indices but {} thicknesses", n.len(), h.len()),
                    ));
                }
                let layers = n
                    .into_iter()
                    .zip(h)
                    .map(|(n, h)| Layer::new(n, h))
                    .collect::<Result<_>>()
                    .map_err(|e| invalid("layers", e.to_string()))?;
                BarrierRecipe::Layers { layers }
            }
            BarrierKind::None => BarrierRecipe::None,
        };

        let d = GridSettings::default();
        let points = self.frequency_points.unwrap_or(d.frequency_points as i64);
        if points < 2 {
            return Err(invalid(
                "grid",
                format!("`frequency_points` must be at least 2, got {points}"),
            ));
        }
        let grids = GridSettings {
            frequency_points: points as usize,
            frequency_half_width_sigmas: positive(
                self.frequency_half_width_sigmas
                    .unwrap_or(d.frequency_half_width_sigmas),
                "frequency_half_width_sigmas",
            )?,
            time_half_span_fs: positive(
                self.time_half_span_fs.unwrap_or(d.time_half_span_fs),
                "time_half_span_fs",
            )?,
            time_step_fs: positive(self.time_step_fs.unwrap_or(d.time_step_fs), "time_step_fs")?,
            delay_half_span_fs: positive(
                self.delay_half_span_fs.unwrap_or(d.delay_half_span_fs),
                "delay_half_span_fs",
            )?,
            delay_step_fs: positive(
                self.delay_step_fs.unwrap_or(d.delay_step_fs),
                "delay_step_fs",
            )?,
        };

        let scenario = Scenario {
            pulse,
            barrier,
            path_length_mm: positive(self.path_length_mm.unwrap_or(0.3), "path_length_mm")?,
            grids,
            output_dir: self.output_dir.map(PathBuf::from),
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

impl Scenario {
    /// Parses and validates scenario text; `origin` is only used in diagnostics.
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        file.into_scenario()
    }

    /// Canonical scenario text; reloading it yields an equal scenario.
    pub fn to_toml_string(&self) -> String {
        let mut file = ScenarioFile {
            center_frequency_thz: Some(self.pulse.center_frequency_thz()),
            fwhm_bandwidth_thz: Some(self.pulse.fwhm_bandwidth_thz()),
            emission_time_fs: Some(self.pulse.emission_time_fs()),
            path_length_mm: Some(self.path_length_mm),
            frequency_points: Some(self.grids.frequency_points as i64),
            frequency_half_width_sigmas: Some(self.grids.frequency_half_width_sigmas),
            time_half_span_fs: Some(self.grids.time_half_span_fs),
            time_step_fs: Some(self.grids.time_step_fs),
            delay_half_span_fs: Some(self.grids.delay_half_span_fs),
            delay_step_fs: Some(self.grids.delay_step_fs),
            output_dir: self
                .output_dir
                .as_ref()
                .map(|p| p.to_string_lossy().into_owned()),
            ..Default::default()
        };
        match &self.barrier {
            BarrierRecipe::QuarterWave(q) => {
                file.barrier = Some(BarrierKind::QuarterWave);
                file.n_high = Some(q.n_high);
                file.n_low = Some(q.n_low);
                file.periods = Some(q.periods as i64);
                file.center_wavelength_nm = Some(q.center_wavelength_nm);
                file.first_layer = Some(q.first);
            }
            BarrierRecipe::Layers { layers } => {
                file.barrier = Some(BarrierKind::Layers);
                file.layer_indices = Some(layers.iter().map(Layer::refractive_index).collect());
                file.layer_thicknesses_nm = Some(layers.iter().map(Layer::thickness_nm).collect());
            }
            BarrierRecipe::None => file.barrier = Some(BarrierKind::None),
        }
        toml::to_string(&file).expect("flat scenario always serializes")
    }

    pub fn path_length_nm(&self) -> f64 {
        self.path_length_mm * 1e6
    }

    /// Vacuum retardation T = l/c in fs.
    pub fn retardation_fs(&self) -> f64 {
        self.path_length_nm() / SPEED_OF_LIGHT_NM_PER_FS
    }

    /// Split point at 0, detector at l.
    pub fn geometry(&self) -> ChannelGeometry {
        ChannelGeometry {
            split_position_nm: 0.0,
            detector_position_nm: self.path_length_nm(),
        }
    }

    /// Barrier stack, centered between the split point and the detector.
    pub fn stack(&self) -> Result<Stack> {
        let stack = match &self.barrier {
            BarrierRecipe::QuarterWave(q) => q.build()?,
            BarrierRecipe::Layers { layers } => Stack::new(layers.clone()),
            BarrierRecipe::None => Stack::empty(),
        };
        let d = stack.thickness_nm();
        Ok(stack.placed_at(0.5 * (self.path_length_nm() - d)))
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        make_frequency_grid(
            &self.pulse,
            self.grids.frequency_half_width_sigmas,
            self.grids.frequency_points,
        )
    }

    /// Detection samples around the vacuum arrival time t0 + T.
    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::centered(
            self.pulse.emission_time_fs() + self.retardation_fs(),
            self.grids.time_half_span_fs,
            self.grids.time_step_fs,
        )
    }

    pub fn delay_grid(&self) -> Result<TimeGrid> {
        TimeGrid::centered(0.0, self.grids.delay_half_span_fs, self.grids.delay_step_fs)
    }

    pub fn validate(&self) -> Result<()> {
        let duration = self.pulse.duration_fwhm_fs();
        let t = self.retardation_fs();
        if t <= 10.0 * duration {
            return Err(invalid(
                "retardation_exceeds_pulse",
                format!(
                    "retardation l/c = {t:.1} fs must exceed ten pulse durations ({:.1} fs)",
                    10.0 * duration
                ),
            ));
        }
        let d = self
            .stack()
            .map_err(|e| invalid("barrier", e.to_string()))?
            .thickness_nm();
        if d >= self.path_length_nm() {
            return Err(invalid(
                "barrier_shorter_than_path",
                format!(
                    "barrier thickness {d:.1} nm must be below the path length {:.1} nm",
                    self.path_length_nm()
                ),
            ));
        }
        self.frequency_grid()
            .map_err(|e| invalid("grid", e.to_string()))?;
        if self.grids.time_half_span_fs > t + self.pulse.emission_time_fs() {
            return Err(invalid(
                "grid",
                "time window would start before the emission time; reduce `time_half_span_fs`",
            ));
        }
        Ok(())
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Scenario::from_toml_str(&text, path)
}
