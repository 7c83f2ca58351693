//! Lossless layer stacks at normal incidence and their plane-wave response.
//!
//! Each layer is represented by its characteristic matrix in the
//! exp(−iωt) convention,
//!
//! ```text
//! M = | cos δ        −(i/p) sin δ |      δ = n ω h / c,  p = n
//!     | −i p sin δ    cos δ       |
//! ```
//!
//! so that a vacuum slab of thickness `h` transmits `exp(+iωh/c)` and the
//! slope of the transmission phase is a positive delay.

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{FrequencyGrid, PulseSpec, SpectralSum, SPEED_OF_LIGHT_NM_PER_FS};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Homogeneous lossless layer; thickness in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    refractive_index: f64,
    thickness_nm: f64,
}

impl Layer {
    pub fn new(refractive_index: f64, thickness_nm: f64) -> Result<Self> {
        if !(refractive_index.is_finite() && refractive_index > 0.0) {
            return Err(Error::domain(format!(
                "refractive index must be a positive real number, got {refractive_index}"
            )));
        }
        if !(thickness_nm.is_finite() && thickness_nm >= 0.0) {
            return Err(Error::domain(format!(
                "layer thickness must be non-negative, got {thickness_nm} nm"
            )));
        }
        Ok(Layer {
            refractive_index,
            thickness_nm,
        })
    }

    pub fn refractive_index(&self) -> f64 {
        self.refractive_index
    }

    pub fn thickness_nm(&self) -> f64 {
        self.thickness_nm
    }

    /// Optical phase thickness δ = n ω h / c.
    pub fn phase_thickness(&self, omega: f64) -> f64 {
        self.refractive_index * omega * self.thickness_nm / SPEED_OF_LIGHT_NM_PER_FS
    }
}

/// Ordered layers from entrance to exit, embedded in a uniform surround.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stack {
    layers: Vec<Layer>,
    surround_index: f64,
    entrance_position_nm: f64,
    exit_position_nm: f64,
}

impl Stack {
    /// Stack in vacuum with its entrance plane at the origin.
    pub fn new(layers: Vec<Layer>) -> Self {
        let d = layers.iter().map(Layer::thickness_nm).sum();
        Stack {
            layers,
            surround_index: 1.0,
            entrance_position_nm: 0.0,
            exit_position_nm: d,
        }
    }

    pub fn empty() -> Self {
        Stack::new(Vec::new())
    }

    pub fn with_surround_index(mut self, surround_index: f64) -> Result<Self> {
        if !(surround_index.is_finite() && surround_index > 0.0) {
            return Err(Error::domain("surround index must be positive"));
        }
        self.surround_index = surround_index;
        Ok(self)
    }

    /// Moves the stack so that its entrance plane sits at `x1` (nm).
    pub fn placed_at(mut self, x1: f64) -> Self {
        let d = self.thickness_nm();
        self.entrance_position_nm = x1;
        self.exit_position_nm = x1 + d;
        self
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn surround_index(&self) -> f64 {
        self.surround_index
    }

    pub fn entrance_position_nm(&self) -> f64 {
        self.entrance_position_nm
    }

    pub fn exit_position_nm(&self) -> f64 {
        self.exit_position_nm
    }

    /// Total physical thickness d = x₂ − x₁.
    pub fn thickness_nm(&self) -> f64 {
        self.layers.iter().map(Layer::thickness_nm).sum()
    }

    /// Same layers traversed from the exit side.
    pub fn reversed(&self) -> Stack {
        let mut layers = self.layers.clone();
        layers.reverse();
        Stack {
            layers,
            ..self.clone()
        }
    }

    /// Product of the layer matrices in propagation order.
    pub fn total_matrix(&self, omega: f64) -> Result<CharacteristicMatrix> {
        self.layers
            .iter()
            .try_fold(CharacteristicMatrix::identity(), |acc, layer| {
                Ok(acc * characteristic_matrix(layer, omega)?)
            })
    }

    /// Transmission and reflection amplitudes `(τ, ρ)` at one frequency.
    pub fn coefficients(&self, omega: f64) -> Result<(Complex64, Complex64)> {
        let m = self.total_matrix(omega)?.0;
        let p0 = self.surround_index;
        let a = p0 * m[0][0] + p0 * p0 * m[0][1];
        let b = m[1][0] + p0 * m[1][1];
        let denominator = a + b;
        if denominator.norm() < 1e-300 {
            return Err(Error::numeric(format!(
                "vanishing transmission denominator at ω = {omega} rad/fs"
            )));
        }
        Ok((2.0 * p0 / denominator, (a - b) / denominator))
    }
}

/// Which material faces the incoming pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FirstLayer {
    #[default]
    High,
    Low,
}

/// Recipe for a `(HL)^N` quarter-wave mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarterWaveDesign {
    pub n_high: f64,
    pub n_low: f64,
    pub periods: usize,
    pub center_wavelength_nm: f64,
    pub first: FirstLayer,
}

impl QuarterWaveDesign {
    pub fn build(&self) -> Result<Stack> {
        if !(self.n_high.is_finite() && self.n_high > 0.0)
            || !(self.n_low.is_finite() && self.n_low > 0.0)
        {
            return Err(Error::domain("quarter-wave indices must be positive"));
        }
        if self.periods == 0 {
            return Err(Error::domain("a quarter-wave stack needs at least one period"));
        }
        if !(self.center_wavelength_nm.is_finite() && self.center_wavelength_nm > 0.0) {
            return Err(Error::domain("design wavelength must be positive"));
        }
        let quarter = |n: f64| Layer::new(n, self.center_wavelength_nm / (4.0 * n));
        let (a, b) = match self.first {
            FirstLayer::High => (quarter(self.n_high)?, quarter(self.n_low)?),
            FirstLayer::Low => (quarter(self.n_low)?, quarter(self.n_high)?),
        };
        let layers = std::iter::repeat([a, b])
            .take(self.periods)
            .flatten()
            .collect();
        Ok(Stack::new(layers))
    }
}

/// `(HL)^periods` with H facing the entrance, in vacuum.
pub fn build_quarter_wave_stack(
    n_high: f64,
    n_low: f64,
    periods: usize,
    center_wavelength_nm: f64,
) -> Result<Stack> {
    QuarterWaveDesign {
        n_high,
        n_low,
        periods,
        center_wavelength_nm,
        first: FirstLayer::High,
    }
    .build()
}

/// Unimodular 2×2 matrix relating tangential E and H across a layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicMatrix(pub [[Complex64; 2]; 2]);

impl CharacteristicMatrix {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        CharacteristicMatrix([[one, zero], [zero, one]])
    }

    pub fn determinant(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

impl Mul for CharacteristicMatrix {
    type Output = CharacteristicMatrix;

    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        CharacteristicMatrix([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

pub fn characteristic_matrix(layer: &Layer, omega: f64) -> Result<CharacteristicMatrix> {
    if !(omega > 0.0) {
        return Err(Error::domain(format!(
            "characteristic matrix needs a positive frequency, got {omega} rad/fs"
        )));
    }
    let (sin, cos) = layer.phase_thickness(omega).sin_cos();
    let p = layer.refractive_index;
    let c = Complex64::new(cos, 0.0);
    Ok(CharacteristicMatrix([
        [c, -I * (sin / p)],
        [-I * (p * sin), c],
    ]))
}

/// Sampled transmission/reflection of a barrier, with τ = B·exp(iφ).
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierResponse {
    grid: FrequencyGrid,
    tau: Vec<Complex64>,
    rho: Vec<Complex64>,
    magnitude: Vec<f64>,
    phase: Vec<f64>,
}

impl BarrierResponse {
    pub fn from_coefficients(
        grid: FrequencyGrid,
        tau: Vec<Complex64>,
        rho: Vec<Complex64>,
    ) -> Result<Self> {
        if tau.len() != grid.len() || rho.len() != grid.len() {
            return Err(Error::contract(format!(
                "response has {} / {} samples for a grid of {}",
                tau.len(),
                rho.len(),
                grid.len()
            )));
        }
        let magnitude = tau.iter().map(|t| t.norm()).collect();
        let anchor = grid.nearest_index(grid.center());
        let phase = unwrap_phase(&tau, anchor);
        Ok(BarrierResponse {
            grid,
            tau,
            rho,
            magnitude,
            phase,
        })
    }

    /// Synthetic barrier with transmission `tau(ω)`. The reflection is the
    /// real amplitude that makes the element lossless where |τ| ≤ 1.
    pub fn from_transmission(grid: FrequencyGrid, tau: impl Fn(f64) -> Complex64) -> Self {
        let tau: Vec<Complex64> = grid.samples().iter().map(|&w| tau(w)).collect();
        let rho = tau
            .iter()
            .map(|t| Complex64::new((1.0 - t.norm_sqr()).max(0.0).sqrt(), 0.0))
            .collect();
        BarrierResponse::from_coefficients(grid, tau, rho).expect("lengths match by construction")
    }

    /// Appends a pure delay: τ(ω) ↦ τ(ω)·exp(iωs).
    pub fn delayed(&self, delay_fs: f64) -> Self {
        let tau = self
            .grid
            .samples()
            .iter()
            .zip(&self.tau)
            .map(|(&w, &t)| t * Complex64::from_polar(1.0, w * delay_fs))
            .collect();
        BarrierResponse::from_coefficients(self.grid.clone(), tau, self.rho.clone())
            .expect("lengths match by construction")
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn tau(&self) -> &[Complex64] {
        &self.tau
    }

    pub fn rho(&self) -> &[Complex64] {
        &self.rho
    }

    /// B(ω) = |τ(ω)|.
    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }

    /// Unwrapped φ(ω) in radians.
    pub fn phase(&self) -> &[f64] {
        &self.phase
    }
}

/// Wraps into (−π, π].
fn wrap(x: f64) -> f64 {
    let y = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Continuous phase along the grid, with `phase[anchor]` in (−π, π].
fn unwrap_phase(values: &[Complex64], anchor: usize) -> Vec<f64> {
    let raw: Vec<f64> = values.iter().map(|v| v.arg()).collect();
    let mut phase = vec![0.0; raw.len()];
    if raw.is_empty() {
        return phase;
    }
    phase[anchor] = wrap(raw[anchor]);
    for k in anchor + 1..raw.len() {
        phase[k] = phase[k - 1] + wrap(raw[k] - raw[k - 1]);
    }
    for k in (0..anchor).rev() {
        phase[k] = phase[k + 1] + wrap(raw[k] - raw[k + 1]);
    }
    phase
}

/// Plane-wave response of `stack` at every grid frequency.
pub fn stack_response(stack: &Stack, grid: &FrequencyGrid) -> Result<BarrierResponse> {
    let (tau, rho): (Vec<_>, Vec<_>) = grid
        .samples()
        .iter()
        .map(|&w| stack.coefficients(w))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    BarrierResponse::from_coefficients(grid.clone(), tau, rho)
}

/// Slope dφ/dω near ω₀ from a least-squares line over |ω − ω₀| ≤ σ, in fs.
pub fn group_delay(response: &BarrierResponse, pulse: &PulseSpec) -> Result<f64> {
    let w0 = pulse.center_omega();
    let half = pulse.sigma_omega() * (1.0 + 1e-12);
    let (xs, ys): (Vec<f64>, Vec<f64>) = response
        .grid
        .samples()
        .iter()
        .zip(&response.phase)
        .filter(|(&w, _)| (w - w0).abs() <= half)
        .map(|(&w, &p)| (w - w0, p))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::domain(format!(
            "only {} frequency samples within one sigma of the carrier; need 3",
            xs.len()
        )));
    }
    Ok(linear_fit(&xs, &ys).0)
}

/// Least-squares `(slope, intercept)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (sxy, sxx) = xs
        .iter()
        .zip(ys)
        .fold((0.0, 0.0), |(sxy, sxx), (&x, &y)| {
            (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
        });
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Positions along the channel, in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGeometry {
    /// x₀, where the pulse is split.
    pub split_position_nm: f64,
    /// x_l, where the detector sits.
    pub detector_position_nm: f64,
}

impl ChannelGeometry {
    /// Vacuum retardation T = (x_l − x₀)/c in fs.
    pub fn retardation_fs(&self) -> f64 {
        (self.detector_position_nm - self.split_position_nm) / SPEED_OF_LIGHT_NM_PER_FS
    }
}

/// Analytic signal on the barrier path, outside the stack.
///
/// Right of the stack the field is the τ-filtered pulse at the vacuum
/// retardation `(x − x₀)/c`. Left of it the incident pulse is superposed
/// with the ρ-filtered counter-propagating term
/// `ρ(ω) exp{−iω[t − t₀ + (x − x₀)/c]}`.
#[derive(Debug, Clone)]
pub struct BarrierChannel {
    entrance: f64,
    exit: f64,
    split: f64,
    emission: f64,
    incident: SpectralSum,
    transmitted: SpectralSum,
    reflected: SpectralSum,
}

impl BarrierChannel {
    pub fn new(
        stack: &Stack,
        pulse: &PulseSpec,
        grid: &FrequencyGrid,
        geometry: &ChannelGeometry,
    ) -> Result<Self> {
        let response = stack_response(stack, grid)?;
        let weights = grid.weighted_spectrum(pulse);
        let filtered = |coeffs: &[Complex64]| {
            SpectralSum::new(
                grid,
                weights.iter().zip(coeffs).map(|(&w, &c)| c * w).collect(),
            )
        };
        Ok(BarrierChannel {
            entrance: stack.entrance_position_nm(),
            exit: stack.exit_position_nm(),
            split: geometry.split_position_nm,
            emission: pulse.emission_time_fs(),
            incident: SpectralSum::free(pulse, grid),
            transmitted: filtered(response.tau()),
            reflected: filtered(response.rho()),
        })
    }

    pub fn field(&self, x: f64, t: f64) -> Result<Complex64> {
        let delay = (x - self.split) / SPEED_OF_LIGHT_NM_PER_FS;
        let s = t - self.emission;
        if x >= self.exit {
            Ok(self.transmitted.eval(s - delay))
        } else if x <= self.entrance {
            Ok(self.incident.eval(s - delay) + self.reflected.eval(s + delay))
        } else {
            Err(Error::domain(format!(
                "x = {x} nm lies inside the barrier [{}, {}]",
                self.entrance, self.exit
            )))
        }
    }
}

/// One-shot evaluation of the barrier-path analytic signal.
pub fn barrier_field(
    stack: &Stack,
    pulse: &PulseSpec,
    grid: &FrequencyGrid,
    geometry: &ChannelGeometry,
    x: f64,
    t: f64,
) -> Result<Complex64> {
    BarrierChannel::new(stack, pulse, grid, geometry)?.field(x, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{free_analytic_signal, make_frequency_grid};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn zero_thickness_layer_is_identity() {
        let m = characteristic_matrix(&Layer::new(2.4, 0.0).unwrap(), 2.3).unwrap();
        assert_eq!(m, CharacteristicMatrix::identity());
    }

    #[test]
    fn quarter_wave_layer_at_design_frequency() {
        let n = 2.4;
        let lambda = 800.0;
        let layer = Layer::new(n, lambda / (4.0 * n)).unwrap();
        let omega = 2.0 * PI * SPEED_OF_LIGHT_NM_PER_FS / lambda;
        let m = characteristic_matrix(&layer, omega).unwrap().0;
        assert!(close(m[0][0], Complex64::new(0.0, 0.0), 1e-15));
        assert!(close(m[1][1], Complex64::new(0.0, 0.0), 1e-15));
        assert!(close(m[0][1], -I / n, 1e-15));
        assert!(close(m[1][0], -I * n, 1e-15));
    }

    #[test]
    fn characteristic_matrix_domain() {
        let layer = Layer::new(1.5, 100.0).unwrap();
        assert!(characteristic_matrix(&layer, 0.0).is_err());
        assert!(Layer::new(0.0, 1.0).is_err());
        assert!(Layer::new(1.0, -1.0).is_err());
    }

    #[test]
    fn quarter_wave_builder() {
        let s = build_quarter_wave_stack(2.4, 1.46, 11, 800.0).unwrap();
        assert_eq!(s.layers().len(), 22);
        for (k, l) in s.layers().iter().enumerate() {
            let n = if k % 2 == 0 { 2.4 } else { 1.46 };
            assert_eq!(l.refractive_index(), n);
            assert!((l.thickness_nm() - 800.0 / (4.0 * n)).abs() < 1e-12);
        }
        assert!((s.layers()[0].thickness_nm() - 83.333).abs() < 1e-3);
        assert!((s.layers()[1].thickness_nm() - 136.986).abs() < 1e-3);
        assert_eq!(s.surround_index(), 1.0);
        assert!((s.exit_position_nm() - s.entrance_position_nm() - s.thickness_nm()).abs() < 1e-9);
        assert!(build_quarter_wave_stack(2.4, 1.46, 0, 800.0).is_err());
        assert!(build_quarter_wave_stack(-2.4, 1.46, 1, 800.0).is_err());
        assert!(build_quarter_wave_stack(2.4, 1.46, 1, 0.0).is_err());
    }

    #[test]
    fn index_matched_stack_is_transparent() {
        let p = PulseSpec::new(375.0, 28.0).unwrap();
        let g = make_frequency_grid(&p, 6.0, 257).unwrap();
        let s = build_quarter_wave_stack(1.0, 1.0, 1, 800.0).unwrap();
        let r = stack_response(&s, &g).unwrap();
        for (k, &w) in g.samples().iter().enumerate() {
            assert!((r.magnitude()[k] - 1.0).abs() < 1e-14);
            assert!(r.rho()[k].norm() < 1e-14);
            let free = Complex64::from_polar(1.0, w * 400.0 / SPEED_OF_LIGHT_NM_PER_FS);
            assert!(close(r.tau()[k], free, 1e-13));
        }
    }

    #[test]
    fn empty_stack_response() {
        let p = PulseSpec::new(375.0, 28.0).unwrap();
        let g = make_frequency_grid(&p, 6.0, 129).unwrap();
        let r = stack_response(&Stack::empty(), &g).unwrap();
        assert!(r.tau().iter().all(|&t| t == Complex64::new(1.0, 0.0)));
        assert!(r.rho().iter().all(|&t| t == Complex64::new(0.0, 0.0)));
        assert_eq!(group_delay(&r, &p).unwrap(), 0.0);
    }

    #[test]
    fn vacuum_slab_group_delay_is_flight_time() {
        let p = PulseSpec::new(375.0, 28.0).unwrap();
        let g = make_frequency_grid(&p, 6.0, 2049).unwrap();
        let h = 3000.0;
        let s = Stack::new(vec![Layer::new(1.0, h).unwrap()]);
        let r = stack_response(&s, &g).unwrap();
        let gd = group_delay(&r, &p).unwrap();
        assert!((gd - h / SPEED_OF_LIGHT_NM_PER_FS).abs() < 1e-10, "{gd}");
    }

    #[test]
    fn group_delay_needs_three_samples() {
        let p = PulseSpec::new(375.0, 28.0).unwrap();
        let g = make_frequency_grid(&p, 6.0, 5).unwrap();
        let r = stack_response(&Stack::empty(), &g).unwrap();
        assert!(matches!(group_delay(&r, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn phase_is_anchored_and_continuous() {
        let p = PulseSpec::new(375.0, 28.0).unwrap();
        let g = make_frequency_grid(&p, 6.0, 2049).unwrap();
        let s = build_quarter_wave_stack(2.4, 1.46, 11, p.center_wavelength_nm()).unwrap();
        let r = stack_response(&s, &g).unwrap();
        let a = r.phase()[1024];
        assert!(a > -PI && a <= PI);
        assert!(r.phase().windows(2).all(|w| (w[1] - w[0]).abs() < PI));
        for k in 0..g.len() {
            let recon = Complex64::from_polar(r.magnitude()[k], r.phase()[k]);
            assert!(close(recon, r.tau()[k], 1e-14 * r.magnitude()[k]));
        }
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap(PI), PI);
        assert_eq!(wrap(-PI), PI);
        assert!((wrap(3.0 * PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn barrier_field_inside_is_rejected() {
        let p = PulseSpec::new(375.0, 28.0).unwrap();
        let g = make_frequency_grid(&p, 6.0, 65).unwrap();
        let s = build_quarter_wave_stack(2.4, 1.46, 2, 800.0).unwrap().placed_at(1000.0);
        let geom = ChannelGeometry {
            split_position_nm: 0.0,
            detector_position_nm: 1e5,
        };
        assert!(barrier_field(&s, &p, &g, &geom, 1100.0, 0.0).is_err());
        assert!(barrier_field(&s, &p, &g, &geom, 900.0, 0.0).is_ok());
        assert!(barrier_field(&s, &p, &g, &geom, 2000.0, 0.0).is_ok());
    }

    #[test]
    fn empty_barrier_field_matches_free_signal() {
        let p = PulseSpec::new(375.0, 28.0).unwrap();
        let g = make_frequency_grid(&p, 6.0, 513).unwrap();
        let geom = ChannelGeometry {
            split_position_nm: 0.0,
            detector_position_nm: 3e4,
        };
        let s = Stack::empty().placed_at(1e4);
        let ch = BarrierChannel::new(&s, &p, &g, &geom).unwrap();
        let x = 2e4;
        let delay = x / SPEED_OF_LIGHT_NM_PER_FS;
        for t in [delay - 20.0, delay, delay + 7.0] {
            let a = ch.field(x, t).unwrap();
            let b = free_analytic_signal(&p, &g, delay, t);
            assert!(close(a, b, 1e-13));
        }
    }
}
