//! First-electron photoionization probabilities and SHG coincidence.
//!
//! For a broadband detector at the end of a channel with transmission τ(ω),
//! the ejection probability per unit detector constant α is
//!
//! ```text
//! P(t) = ∫_{t0}^{t} dt' |A(t')|²,   A(t') = ∫ dω f(ω − ω₀) τ(ω) exp[−iω(t' − t0 − T)]
//! ```
//!
//! with τ ≡ 1 for the vacuum channel. Both integrals use the trapezoidal
//! rule; envelopes at distinct times are evaluated in parallel and then
//! accumulated sequentially.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layered::BarrierResponse;
use crate::pulse::{FrequencyGrid, PulseSpec, SpectralSum};

/// Largest step used to integrate from the origin up to the first requested sample.
const LEADING_STEP_FS: f64 = 1.0;

/// Extent of the SHG window beyond the envelope centers, in units of 1/σ.
const SHG_WINDOW_SIGMAS: f64 = 12.0;

/// Relative intensity allowed at the edge of the SHG window.
const SHG_EDGE_TOLERANCE: f64 = 1e-8;

/// Below this a probability plateau is treated as an underflow.
const DEGENERATE_PLATEAU: f64 = 1e-300;

/// Uniform, strictly increasing grid of times in fs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    samples: Vec<f64>,
    spacing: f64,
}

impl TimeGrid {
    pub fn new(start: f64, spacing: f64, len: usize) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::domain(format!(
                "time step must be positive, got {spacing} fs"
            )));
        }
        if len == 0 || !start.is_finite() {
            return Err(Error::domain("time grid needs a finite start and at least one sample"));
        }
        let samples = (0..len).map(|k| start + k as f64 * spacing).collect();
        Ok(TimeGrid { samples, spacing })
    }

    /// Grid on `[center − half_span, center + half_span]` with `center` on a sample.
    pub fn centered(center: f64, half_span: f64, spacing: f64) -> Result<Self> {
        if !(half_span.is_finite() && half_span >= 0.0) {
            return Err(Error::domain("time half span must be non-negative"));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::domain("time step must be positive"));
        }
        let half = (half_span / spacing).round() as usize;
        let samples = (0..=2 * half)
            .map(|k| center + (k as f64 - half as f64) * spacing)
            .collect();
        Ok(TimeGrid { samples, spacing })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.samples[0]
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Reference,
    Barrier,
    Difference,
    Shg,
}

/// Sampled curve on a time (or delay) grid.
///
/// `tail` is the truncation diagnostic of the curve: for probabilities the
/// share of the final value accumulated before the first sample, for the
/// coincidence curve the largest relative intensity at the window edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionCurve {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub label: Channel,
    pub tail: f64,
    /// Set when the channel's spectrum underflowed and the curve is all zero.
    pub degenerate: bool,
}

impl DetectionCurve {
    /// Final sample, i.e. the plateau for a probability curve.
    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn channel_kernel(
    pulse: &PulseSpec,
    grid: &FrequencyGrid,
    response: Option<&BarrierResponse>,
) -> Result<SpectralSum> {
    let Some(response) = response else {
        return Ok(SpectralSum::free(pulse, grid));
    };
    if response.grid() != grid {
        return Err(Error::contract(
            "barrier response was sampled on a different frequency grid",
        ));
    }
    let coefficients = grid
        .weighted_spectrum(pulse)
        .into_iter()
        .zip(response.tau())
        .map(|(w, &t)| t * w)
        .collect();
    Ok(SpectralSum::new(grid, coefficients))
}

/// Inner frequency integral of the detection probability at time `t`.
///
/// With `response = None` this is the vacuum channel.
pub fn detector_envelope(
    pulse: &PulseSpec,
    grid: &FrequencyGrid,
    response: Option<&BarrierResponse>,
    retardation: f64,
    t: f64,
) -> Result<Complex64> {
    let kernel = channel_kernel(pulse, grid, response)?;
    Ok(kernel.eval(t - pulse.emission_time_fs() - retardation))
}

/// The trapezoidal frequency sum is periodic in time with period 2π/Δω;
/// keep every evaluated offset well inside a quarter of a half period.
fn aliasing_guard(grid: &FrequencyGrid, max_offset: f64) -> Result<()> {
    let product = grid.spacing() * max_offset;
    if product >= PI / 4.0 {
        return Err(Error::numeric(format!(
            "frequency spacing {:.3e} rad/fs is too coarse for time offsets up to {:.1} fs \
             (Δω·|t − T| = {product:.3} ≥ π/4); increase the number of frequency points",
            grid.spacing(),
            max_offset
        )));
    }
    Ok(())
}

fn intensities(kernel: &SpectralSum, offsets: &[f64]) -> Vec<f64> {
    offsets.par_iter().map(|&s| kernel.eval(s).norm_sqr()).collect()
}

fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => step * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

fn cumulative_probability(
    kernel: &SpectralSum,
    pulse: &PulseSpec,
    grid: &FrequencyGrid,
    retardation: f64,
    time_grid: &TimeGrid,
    label: Channel,
) -> Result<DetectionCurve> {
    let origin = pulse.emission_time_fs();
    let start = time_grid.start();
    if start < origin - 1e-9 * origin.abs().max(1.0) {
        return Err(Error::contract(format!(
            "time grid starts at {start} fs, before the integration origin t0 = {origin} fs"
        )));
    }
    let center = origin + retardation;
    let max_offset = (origin - center).abs().max((time_grid.end() - center).abs());
    aliasing_guard(grid, max_offset)?;

    let leading = if start > origin {
        let pieces = ((start - origin) / LEADING_STEP_FS.min(4.0 * time_grid.spacing()))
            .ceil()
            .max(1.0) as usize;
        let step = (start - origin) / pieces as f64;
        let offsets: Vec<f64> = (0..=pieces)
            .map(|j| origin + j as f64 * step - center)
            .collect();
        trapezoid(&intensities(kernel, &offsets), step)
    } else {
        0.0
    };

    let offsets: Vec<f64> = time_grid.samples().iter().map(|&t| t - center).collect();
    let intensity = intensities(kernel, &offsets);
    let half_step = 0.5 * time_grid.spacing();
    let mut values = Vec::with_capacity(intensity.len());
    let mut acc = leading;
    values.push(acc);
    for pair in intensity.windows(2) {
        acc += half_step * (pair[0] + pair[1]);
        values.push(acc);
    }

    if acc < DEGENERATE_PLATEAU {
        warn!("{label:?} channel plateau underflowed ({acc:e}); returning a zero curve");
        return Ok(DetectionCurve {
            grid: time_grid.clone(),
            values: vec![0.0; time_grid.len()],
            label,
            tail: 0.0,
            degenerate: true,
        });
    }
    Ok(DetectionCurve {
        grid: time_grid.clone(),
        values,
        label,
        tail: leading / acc,
        degenerate: false,
    })
}

/// Vacuum-channel probability P_r(t)/α.
///
/// The integral always runs from the emission time; a grid starting later
/// has the leading segment integrated on a coarser auxiliary grid.
pub fn reference_probability(
    pulse: &PulseSpec,
    grid: &FrequencyGrid,
    retardation: f64,
    time_grid: &TimeGrid,
) -> Result<DetectionCurve> {
    let kernel = channel_kernel(pulse, grid, None)?;
    cumulative_probability(&kernel, pulse, grid, retardation, time_grid, Channel::Reference)
}

/// Barrier-channel probability P_b(t)/α.
pub fn barrier_probability(
    pulse: &PulseSpec,
    grid: &FrequencyGrid,
    response: &BarrierResponse,
    retardation: f64,
    time_grid: &TimeGrid,
) -> Result<DetectionCurve> {
    let kernel = channel_kernel(pulse, grid, Some(response))?;
    cumulative_probability(&kernel, pulse, grid, retardation, time_grid, Channel::Barrier)
}

/// ΔP(t) = P_r(t) − P_b(t). The sign is not enforced.
pub fn probability_difference(
    reference: &DetectionCurve,
    barrier: &DetectionCurve,
) -> Result<DetectionCurve> {
    if reference.grid != barrier.grid {
        return Err(Error::contract("curves are sampled on different time grids"));
    }
    Ok(DetectionCurve {
        grid: reference.grid.clone(),
        values: reference
            .values
            .iter()
            .zip(&barrier.values)
            .map(|(r, b)| r - b)
            .collect(),
        label: Channel::Difference,
        tail: reference.tail.max(barrier.tail),
        degenerate: reference.degenerate || barrier.degenerate,
    })
}

/// Coincidence ∫ dt' |E_r(t' + δ)|² |E_b(t')|² versus relative delay δ,
/// normalised to its maximum. Positive δ advances the reference pulse, so a
/// barrier that delays by `t_d` peaks at δ = −t_d.
///
/// Delays must lie on a lattice whose step is `delay_grid.spacing()`
/// divided by a whole number no larger than needed for 0.25 fs resolution.
pub fn shg_coincidence(
    pulse: &PulseSpec,
    grid: &FrequencyGrid,
    response: &BarrierResponse,
    retardation: f64,
    delay_grid: &TimeGrid,
) -> Result<DetectionCurve> {
    let reference = channel_kernel(pulse, grid, None)?;
    let barrier = channel_kernel(pulse, grid, Some(response))?;

    let substeps = (delay_grid.spacing() / 0.25 - 1e-9).ceil().max(1.0);
    let step = delay_grid.spacing() / substeps;
    let shifts: Vec<i64> = delay_grid
        .samples()
        .iter()
        .map(|&d| {
            let k = d / step;
            if (k - k.round()).abs() > 1e-6 {
                Err(Error::domain(format!(
                    "delay {d} fs is not a multiple of the {step} fs integration step"
                )))
            } else {
                Ok(k.round() as i64)
            }
        })
        .collect::<Result<_>>()?;
    let max_shift = shifts.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0) as i64;

    let window = SHG_WINDOW_SIGMAS / pulse.sigma_omega();
    let inner = (window / step).ceil() as i64 + max_shift;
    let outer = inner + max_shift;
    aliasing_guard(grid, outer as f64 * step)?;

    // Window centered on the vacuum arrival t0 + T at the detector.
    let arrival = pulse.emission_time_fs() + retardation;
    let outer_offsets: Vec<f64> = (-outer..=outer)
        .map(|j| arrival + j as f64 * step)
        .map(|t| t - pulse.emission_time_fs() - retardation)
        .collect();
    let inner_offsets = &outer_offsets[max_shift as usize..(outer + inner + 1) as usize];
    let i_ref = intensities(&reference, &outer_offsets);
    let i_bar = intensities(&barrier, inner_offsets);

    let peak_ref = i_ref.iter().copied().fold(0.0, f64::max);
    let peak_bar = i_bar.iter().copied().fold(0.0, f64::max);
    if peak_bar < DEGENERATE_PLATEAU || peak_ref < DEGENERATE_PLATEAU {
        warn!("SHG channel intensity underflowed; returning a zero curve");
        return Ok(DetectionCurve {
            grid: delay_grid.clone(),
            values: vec![0.0; delay_grid.len()],
            label: Channel::Shg,
            tail: 0.0,
            degenerate: true,
        });
    }
    let edge = |v: &[f64], peak: f64| v[0].max(v[v.len() - 1]) / peak;
    let tail = edge(&i_ref, peak_ref).max(edge(&i_bar, peak_bar));
    if tail > SHG_EDGE_TOLERANCE {
        return Err(Error::Accuracy(format!(
            "coincidence window ±{:.1} fs leaves relative intensity {tail:.2e} at its edge",
            inner as f64 * step
        )));
    }

    let n = i_bar.len();
    let raw: Vec<f64> = shifts
        .par_iter()
        .map(|&k| {
            // t'_j + δ on the outer grid sits at index j + max_shift + k.
            let base = (max_shift + k) as usize;
            let products: Vec<f64> = (0..n).map(|j| i_ref[base + j] * i_bar[j]).collect();
            trapezoid(&products, step)
        })
        .collect();
    let max = raw.iter().copied().fold(0.0, f64::max);
    Ok(DetectionCurve {
        grid: delay_grid.clone(),
        values: raw.iter().map(|v| v / max).collect(),
        label: Channel::Shg,
        tail,
        degenerate: false,
    })
}

/// Location of the curve's maximum, refined by a parabola through the
/// three samples around the discrete peak.
pub fn peak_delay(curve: &DetectionCurve) -> f64 {
    let v = &curve.values;
    let t = curve.grid.samples();
    let k = v
        .iter()
        .enumerate()
        .fold(0, |best, (i, &x)| if x > v[best] { i } else { best });
    if k == 0 || k + 1 == v.len() {
        return t[k];
    }
    let (a, b, c) = (v[k - 1], v[k], v[k + 1]);
    let denom = a - 2.0 * b + c;
    if denom == 0.0 {
        return t[k];
    }
    t[k] + 0.5 * (a - c) / denom * curve.grid.spacing()
}
