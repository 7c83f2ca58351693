//! Pulse spectrum, frequency discretisation and the free analytic signal.
//!
//! The analytic signal of a pulse emitted at `t0` is
//!
//! ```text
//! E(x, t) = ∫₀^∞ dω f(ω − ω₀) exp{−iω [t − t0 − (x − x0)/c]}
//! ```
//!
//! and is evaluated here by the trapezoidal rule on a uniform grid that
//! covers the support of the Gaussian `f`.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum.
pub const SPEED_OF_LIGHT_NM_PER_FS: f64 = 299.792_458;

/// THz to rad/fs.
const THZ_TO_RAD_PER_FS: f64 = 2.0 * PI * 1e-3;

/// Gaussian pulse with a symmetric spectrum normalised to unit peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    center_frequency_thz: f64,
    fwhm_bandwidth_thz: f64,
    emission_time_fs: f64,
}

impl PulseSpec {
    /// Quasi-monochromatic pulses only: the FWHM must stay below a third of
    /// the carrier frequency.
    pub fn new(center_frequency_thz: f64, fwhm_bandwidth_thz: f64) -> Result<Self> {
        Self::with_emission_time(center_frequency_thz, fwhm_bandwidth_thz, 0.0)
    }

    pub fn with_emission_time(
        center_frequency_thz: f64,
        fwhm_bandwidth_thz: f64,
        emission_time_fs: f64,
    ) -> Result<Self> {
        if !(center_frequency_thz.is_finite() && center_frequency_thz > 0.0) {
            return Err(Error::domain(format!(
                "center frequency must be positive, got {center_frequency_thz} THz"
            )));
        }
        if !(fwhm_bandwidth_thz.is_finite() && fwhm_bandwidth_thz > 0.0) {
            return Err(Error::domain(format!(
                "bandwidth must be positive, got {fwhm_bandwidth_thz} THz"
            )));
        }
        if fwhm_bandwidth_thz >= center_frequency_thz / 3.0 {
            return Err(Error::domain(format!(
                "pulse is not quasi-monochromatic: bandwidth {fwhm_bandwidth_thz} THz \
                 must be below a third of the center frequency {center_frequency_thz} THz"
            )));
        }
        if !emission_time_fs.is_finite() {
            return Err(Error::domain("emission time must be finite"));
        }
        Ok(PulseSpec {
            center_frequency_thz,
            fwhm_bandwidth_thz,
            emission_time_fs,
        })
    }

    pub fn center_frequency_thz(&self) -> f64 {
        self.center_frequency_thz
    }

    pub fn fwhm_bandwidth_thz(&self) -> f64 {
        self.fwhm_bandwidth_thz
    }

    pub fn emission_time_fs(&self) -> f64 {
        self.emission_time_fs
    }

    /// Carrier angular frequency ω₀ in rad/fs.
    pub fn center_omega(&self) -> f64 {
        self.center_frequency_thz * THZ_TO_RAD_PER_FS
    }

    /// Angular FWHM Δω in rad/fs.
    pub fn fwhm_omega(&self) -> f64 {
        self.fwhm_bandwidth_thz * THZ_TO_RAD_PER_FS
    }

    /// Spectral standard deviation σ = Δω / (2√(2 ln 2)).
    pub fn sigma_omega(&self) -> f64 {
        self.fwhm_omega() / (2.0 * (2.0 * LN_2).sqrt())
    }

    /// Vacuum wavelength of the carrier in nm.
    pub fn center_wavelength_nm(&self) -> f64 {
        SPEED_OF_LIGHT_NM_PER_FS / (self.center_frequency_thz * 1e-3)
    }

    /// FWHM of the temporal intensity |E|², which for this spectrum is
    /// Gaussian with standard deviation 1/(√2 σ).
    pub fn duration_fwhm_fs(&self) -> f64 {
        2.0 * LN_2.sqrt() / self.sigma_omega()
    }

    /// Spectral amplitude without the domain check.
    #[inline]
    pub(crate) fn amplitude(&self, omega: f64) -> f64 {
        let sigma = self.sigma_omega();
        let x = (omega - self.center_omega()) / sigma;
        (-0.5 * x * x).exp()
    }
}

/// Gaussian spectral function with unit peak at ω₀.
pub fn gaussian_spectrum(pulse: &PulseSpec, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain(format!(
            "spectral function is defined for positive frequencies, got {omega} rad/fs"
        )));
    }
    Ok(pulse.amplitude(omega))
}

/// Uniform, strictly positive grid of angular frequencies (rad/fs).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    samples: Vec<f64>,
    spacing: f64,
    center: f64,
}

impl FrequencyGrid {
    /// `points` samples symmetric about `center`, spanning `center ± half_width`.
    pub fn centered(center: f64, half_width: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::domain(format!(
                "frequency grid needs at least 2 points, got {points}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::domain("frequency grid half width must be positive"));
        }
        if !(center - half_width > 0.0) {
            return Err(Error::domain(format!(
                "frequency grid reaches {} rad/fs; bandwidth too large for a \
                 quasi-monochromatic pulse",
                center - half_width
            )));
        }
        let mut grid = FrequencyGrid {
            samples: Vec::with_capacity(points),
            spacing: 2.0 * half_width / (points - 1) as f64,
            center,
        };
        grid.samples = (0..points).map(|k| center + grid.offset_at(k, points)).collect();
        Ok(grid)
    }

    fn offset_at(&self, k: usize, points: usize) -> f64 {
        (k as f64 - (points - 1) as f64 / 2.0) * self.spacing
    }

    /// `ω_k − center`, computed without cancellation.
    pub fn offset(&self, k: usize) -> f64 {
        self.offset_at(k, self.len())
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

    /// The frequency the grid was centered on.
    pub fn center(&self) -> f64 {
        self.center
    }

    /// Index of the sample nearest to `omega`.
    pub fn nearest_index(&self, omega: f64) -> usize {
        let first = self.samples[0];
        let k = ((omega - first) / self.spacing).round();
        k.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// Trapezoidal quadrature weight of sample `k`.
    #[inline]
    pub fn weight(&self, k: usize) -> f64 {
        if k == 0 || k + 1 == self.len() {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    /// Trapezoidal weights multiplied by `f(ω_k)`.
    pub(crate) fn weighted_spectrum(&self, pulse: &PulseSpec) -> Vec<f64> {
        self.samples
            .iter()
            .enumerate()
            .map(|(k, &w)| self.weight(k) * pulse.amplitude(w))
            .collect()
    }
}

/// Grid centered at ω₀ spanning `±half_width_sigmas · σ`.
pub fn make_frequency_grid(
    pulse: &PulseSpec,
    half_width_sigmas: f64,
    points: usize,
) -> Result<FrequencyGrid> {
    if !(half_width_sigmas.is_finite() && half_width_sigmas > 0.0) {
        return Err(Error::domain(format!(
            "grid half width must be a positive number of sigmas, got {half_width_sigmas}"
        )));
    }
    FrequencyGrid::centered(
        pulse.center_omega(),
        half_width_sigmas * pulse.sigma_omega(),
        points,
    )
}

/// Frequency-domain kernel `Σ_k c_k exp(−iω_k s)` with precomputed complex
/// coefficients. Shared by the free signal and the detector envelopes.
///
/// Phases are accumulated relative to the grid center so that rounding in
/// `ω_k s` stays proportional to the offset, not to the carrier.
#[derive(Debug, Clone)]
pub(crate) struct SpectralSum {
    carrier: f64,
    offsets: Vec<f64>,
    coefficients: Vec<Complex64>,
}

impl SpectralSum {
    pub(crate) fn new(grid: &FrequencyGrid, coefficients: Vec<Complex64>) -> Self {
        debug_assert_eq!(grid.len(), coefficients.len());
        SpectralSum {
            carrier: grid.center(),
            offsets: (0..grid.len()).map(|k| grid.offset(k)).collect(),
            coefficients,
        }
    }

    pub(crate) fn free(pulse: &PulseSpec, grid: &FrequencyGrid) -> Self {
        let coefficients = grid
            .weighted_spectrum(pulse)
            .into_iter()
            .map(|w| Complex64::new(w, 0.0))
            .collect();
        SpectralSum::new(grid, coefficients)
    }

    /// Evaluates the sum at retarded time `s`.
    #[inline]
    pub(crate) fn eval(&self, s: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&dw, &c) in self.offsets.iter().zip(&self.coefficients) {
            let (sin, cos) = (dw * s).sin_cos();
            acc += c * Complex64::new(cos, -sin);
        }
        let (sin, cos) = (self.carrier * s).sin_cos();
        acc * Complex64::new(cos, -sin)
    }
}

/// Free-space analytic signal at retardation `position_delay = (x − x0)/c`.
///
/// The physical field is the real part of the returned value.
pub fn free_analytic_signal(
    pulse: &PulseSpec,
    grid: &FrequencyGrid,
    position_delay: f64,
    t: f64,
) -> Complex64 {
    SpectralSum::free(pulse, grid).eval(t - pulse.emission_time_fs() - position_delay)
}
