//! Randomized search for stopband stacks on which the barrier detector
//! overtakes the vacuum detector.
//!
//! Stacks are perturbed quarter-wave mirrors (random indices, period count,
//! design wavelength and per-layer thickness jitter) kept only when their
//! transmission stays below a threshold over the pulse band.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::detection::{barrier_probability, probability_difference, reference_probability};
use crate::error::{Error, Result};
use crate::layered::{stack_response, Layer, Stack};
use crate::pulse::{FrequencyGrid, PulseSpec};
use crate::scenario::{BarrierRecipe, Scenario};

/// Half width of the pulse band in units of σ (f > 1% of its peak).
const PULSE_BAND_SIGMAS: f64 = 3.0;

const MAX_DRAWS: usize = 10_000;

/// Largest |τ| over |ω − ω₀| ≤ 3σ.
pub fn max_band_transmission(stack: &Stack, pulse: &PulseSpec, grid: &FrequencyGrid) -> Result<f64> {
    let w0 = pulse.center_omega();
    let half = PULSE_BAND_SIGMAS * pulse.sigma_omega();
    grid.samples()
        .iter()
        .filter(|&&w| (w - w0).abs() <= half)
        .map(|&w| stack.coefficients(w).map(|(t, _)| t.norm()))
        .try_fold(0.0, |m, b| Ok(f64::max(m, b?)))
}

/// One perturbed quarter-wave candidate, not yet filtered.
pub fn random_candidate(rng: &mut impl Rng, pulse: &PulseSpec) -> Stack {
    let n_high = rng.gen_range(1.9..3.2);
    let n_low = rng.gen_range(1.3..1.7);
    let periods = rng.gen_range(5..=16);
    let lambda = pulse.center_wavelength_nm() * rng.gen_range(0.97..1.03);
    let mut layers = Vec::with_capacity(2 * periods);
    for _ in 0..periods {
        for n in [n_high, n_low] {
            let h = lambda / (4.0 * n) * rng.gen_range(0.9..1.1);
            layers.push(Layer::new(n, h).expect("positive by construction"));
        }
    }
    Stack::new(layers)
}

/// Draws until a candidate has band transmission below `max_b`.
pub fn random_stopband_stack(
    rng: &mut impl Rng,
    pulse: &PulseSpec,
    grid: &FrequencyGrid,
    max_b: f64,
) -> Result<(Stack, f64)> {
    for _ in 0..MAX_DRAWS {
        let stack = random_candidate(rng, pulse);
        let b = max_band_transmission(&stack, pulse, grid)?;
        if b < max_b {
            return Ok((stack, b));
        }
    }
    Err(Error::numeric(format!(
        "no stopband stack with band transmission below {max_b} in {MAX_DRAWS} draws"
    )))
}

#[derive(Debug, Clone)]
pub struct Trial {
    pub scenario: Scenario,
    pub max_band_transmission: f64,
    /// Minimum of ΔP over every time sample.
    pub delta_p_min: f64,
    /// Sample time (relative to the vacuum arrival) of that minimum.
    pub delta_p_argmin_fs: f64,
}

impl Trial {
    pub fn is_counterexample(&self) -> bool {
        !(self.delta_p_min > 0.0)
    }
}

/// Runs `count` random stopband stacks through the detection pipeline of `base`.
pub fn run_trials(base: &Scenario, count: usize, max_b: f64, seed: u64) -> Result<Vec<Trial>> {
    let pulse = base.pulse;
    let grid = base.frequency_grid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stacks = (0..count)
        .map(|_| random_stopband_stack(&mut rng, &pulse, &grid, max_b))
        .collect::<Result<Vec<_>>>()?;

    let retardation = base.retardation_fs();
    let times = base.time_grid()?;
    let reference = reference_probability(&pulse, &grid, retardation, &times)?;
    let arrival = pulse.emission_time_fs() + retardation;

    stacks
        .into_par_iter()
        .map(|(stack, b)| {
            let response = stack_response(&stack, &grid)?;
            let barrier = barrier_probability(&pulse, &grid, &response, retardation, &times)?;
            let diff = probability_difference(&reference, &barrier)?;
            let (k, &min) = diff
                .values
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("time grid is non-empty");
            Ok(Trial {
                scenario: Scenario {
                    barrier: BarrierRecipe::Layers {
                        layers: stack.layers().to_vec(),
                    },
                    ..base.clone()
                },
                max_band_transmission: b,
                delta_p_min: min,
                delta_p_argmin_fs: times.samples()[k] - arrival,
            })
        })
        .collect()
}

/// Writes the scenario of a trial so it can be rerun with the CLI.
pub fn write_trial_scenario(trial: &Trial, dir: &Path, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, trial.scenario.to_toml_string()).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
