use std::f64::consts::PI;

use evanesim::{
    barrier_probability, build_quarter_wave_stack, free_analytic_signal, make_frequency_grid,
    peak_delay, probability_difference, reference_probability, shg_coincidence, stack_response,
    BarrierResponse, FrequencyGrid, PulseSpec, TimeGrid,
};
use num_complex::Complex64;

const T: f64 = 1000.0;

fn pulse() -> PulseSpec {
    PulseSpec::new(375.0, 28.0).unwrap()
}

fn grid(p: &PulseSpec) -> FrequencyGrid {
    make_frequency_grid(p, 6.0, 2049).unwrap()
}

fn times() -> TimeGrid {
    TimeGrid::centered(T, 150.0, 0.25).unwrap()
}

/// ∫|A|² dt = 2π ∫ f² dω = 2π σ √π for the unit-peak Gaussian.
fn plateau_oracle(p: &PulseSpec) -> f64 {
    2.0 * PI * p.sigma_omega() * PI.sqrt()
}

/// |∫ f(ω) e^{−iωs} dω| = σ √(2π) exp(−σ² s² / 2).
fn envelope_oracle(p: &PulseSpec, s: f64) -> f64 {
    let sigma = p.sigma_omega();
    sigma * (2.0 * PI).sqrt() * (-0.5 * sigma * sigma * s * s).exp()
}

#[test]
fn envelope_matches_closed_form_transform() {
    let p = pulse();
    let g = grid(&p);
    let sigma_t = 1.0 / p.sigma_omega();
    for k in -70..=70 {
        let s = k as f64 * 0.05 * sigma_t;
        let got = free_analytic_signal(&p, &g, 0.0, s).norm();
        let want = envelope_oracle(&p, s);
        assert!((got / want - 1.0).abs() < 1e-6, "s = {s}: {got} vs {want}");
    }
}

#[test]
fn reference_plateau_matches_parseval() {
    let p = pulse();
    let c = reference_probability(&p, &grid(&p), T, &times()).unwrap();
    let rel = c.last() / plateau_oracle(&p) - 1.0;
    assert!(rel.abs() < 1e-6, "{rel}");
}

#[test]
fn reference_is_half_plateau_at_arrival() {
    let p = pulse();
    let tg = times();
    let c = reference_probability(&p, &grid(&p), T, &tg).unwrap();
    let k = tg.samples().iter().position(|&t| t == T).unwrap();
    assert!((c.values[k] / c.last() - 0.5).abs() < 1e-6);
}

#[test]
fn reference_is_negligible_before_arrival() {
    // The ±6σ grid leaves an O(f(edge)) truncation floor in the far tail;
    // ±10σ removes it, leaving the f64 rounding floor of the frequency sum
    // (≈1e-14 of the peak amplitude), far above the exact Gaussian tail.
    let p = pulse();
    let g = make_frequency_grid(&p, 10.0, 4097).unwrap();
    let early = T - 10.5 / p.sigma_omega();
    let tg = TimeGrid::new(0.0, 0.25, (early / 0.25) as usize).unwrap();
    let c = reference_probability(&p, &g, T, &tg).unwrap();
    let ratio = c.last() / plateau_oracle(&p);
    assert!(ratio < 1e-29, "{ratio:e}");
    let exact_tail = 0.5 * (-(10.5f64).powi(2)).exp();
    assert!(exact_tail < 1e-40);
}

#[test]
fn from_origin_and_windowed_grids_agree() {
    let p = pulse();
    let g = grid(&p);
    let full = TimeGrid::new(0.0, 0.25, 4801).unwrap();
    let a = reference_probability(&p, &g, T, &full).unwrap();
    let b = reference_probability(&p, &g, T, &times()).unwrap();
    assert!((a.last() / b.last() - 1.0).abs() < 1e-10);
    assert!(b.tail < 1e-15, "{}", b.tail);
}

#[test]
fn probabilities_are_monotone_and_non_negative() {
    let p = pulse();
    let g = grid(&p);
    let stack = build_quarter_wave_stack(2.4, 1.46, 11, p.center_wavelength_nm()).unwrap();
    let r = stack_response(&stack, &g).unwrap();
    for c in [
        reference_probability(&p, &g, T, &times()).unwrap(),
        barrier_probability(&p, &g, &r, T, &times()).unwrap(),
    ] {
        assert!(c.values[0] >= 0.0);
        assert!(c.values.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn halving_spacings_leaves_plateau_unchanged() {
    let p = pulse();
    let coarse = reference_probability(&p, &grid(&p), T, &times()).unwrap();
    let fine_grid = make_frequency_grid(&p, 6.0, 4097).unwrap();
    let fine_times = TimeGrid::centered(T, 150.0, 0.125).unwrap();
    let fine = reference_probability(&p, &fine_grid, T, &fine_times).unwrap();
    assert!((fine.last() / coarse.last() - 1.0).abs() < 1e-7);
}

#[test]
fn transparent_barrier_reproduces_reference() {
    let p = pulse();
    let g = grid(&p);
    let one = BarrierResponse::from_transmission(g.clone(), |_| Complex64::new(1.0, 0.0));
    let r = reference_probability(&p, &g, T, &times()).unwrap();
    let b = barrier_probability(&p, &g, &one, T, &times()).unwrap();
    let worst = r
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-12 * r.last());
    let d = probability_difference(&r, &b).unwrap();
    assert!(d.values.iter().all(|&v| v.abs() < 1e-12 * r.last()));
}

#[test]
fn opaque_barrier_difference_is_reference() {
    let p = pulse();
    let g = grid(&p);
    let zero = BarrierResponse::from_transmission(g.clone(), |_| Complex64::new(0.0, 0.0));
    let r = reference_probability(&p, &g, T, &times()).unwrap();
    let b = barrier_probability(&p, &g, &zero, T, &times()).unwrap();
    let d = probability_difference(&r, &b).unwrap();
    assert_eq!(d.values, r.values);
}

/// Shifts `curve` by a whole number of samples for comparison.
fn max_shift_error(a: &[f64], b: &[f64], shift: isize) -> f64 {
    (0..a.len() as isize)
        .filter_map(|k| {
            let j = k - shift;
            (j >= 0 && (j as usize) < b.len()).then(|| (a[k as usize] - b[j as usize]).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn pure_delay_barrier_shifts_reference() {
    let p = pulse();
    let g = grid(&p);
    let td = 12.5;
    let delay = BarrierResponse::from_transmission(g.clone(), |w| Complex64::from_polar(1.0, w * td));
    let r = reference_probability(&p, &g, T, &times()).unwrap();
    let b = barrier_probability(&p, &g, &delay, T, &times()).unwrap();
    let err = max_shift_error(&b.values, &r.values, (td / 0.25) as isize);
    assert!(err < 1e-9 * r.last(), "{err:e}");
}

#[test]
fn extra_phase_slope_shifts_barrier_curve() {
    let p = pulse();
    let g = grid(&p);
    let stack = build_quarter_wave_stack(2.4, 1.46, 11, p.center_wavelength_nm()).unwrap();
    let resp = stack_response(&stack, &g).unwrap();
    let base = barrier_probability(&p, &g, &resp, T, &times()).unwrap();
    for s in [-20.0, -7.5, 3.25, 20.0] {
        let shifted = barrier_probability(&p, &g, &resp.delayed(s), T, &times()).unwrap();
        let err = max_shift_error(&shifted.values, &base.values, (s / 0.25) as isize);
        assert!(err < 1e-9 * base.last(), "s = {s}: {err:e}");
    }
}

#[test]
fn shg_identical_channels_is_even_and_peaks_at_zero() {
    let p = pulse();
    let g = grid(&p);
    let one = BarrierResponse::from_transmission(g.clone(), |_| Complex64::new(1.0, 0.0));
    let delays = TimeGrid::centered(0.0, 60.0, 0.25).unwrap();
    let c = shg_coincidence(&p, &g, &one, T, &delays).unwrap();
    let n = c.values.len();
    for k in 0..n / 2 {
        let (a, b) = (c.values[k], c.values[n - 1 - k]);
        assert!((a - b).abs() <= 1e-9 * a.max(b).max(1e-300), "{k}: {a} {b}");
    }
    assert_eq!(c.values[n / 2], 1.0);
    assert!(peak_delay(&c).abs() < 1e-9);
}

#[test]
fn shg_pure_delay_peaks_at_negative_delay() {
    let p = pulse();
    let g = grid(&p);
    let td = 7.3;
    let delay = BarrierResponse::from_transmission(g.clone(), |w| Complex64::from_polar(1.0, w * td));
    let delays = TimeGrid::centered(0.0, 40.0, 0.25).unwrap();
    let c = shg_coincidence(&p, &g, &delay, T, &delays).unwrap();
    let peak = peak_delay(&c);
    // parabolic refinement of a Gaussian peak sampled at 0.25 fs
    assert!((peak + td).abs() < 5e-3, "{peak}");
}

#[test]
fn shg_window_too_short_for_delay_is_an_accuracy_error() {
    let p = pulse();
    let g = grid(&p);
    let far = BarrierResponse::from_transmission(g.clone(), |w| Complex64::from_polar(1.0, w * 400.0));
    let delays = TimeGrid::centered(0.0, 5.0, 0.25).unwrap();
    assert!(matches!(
        shg_coincidence(&p, &g, &far, T, &delays),
        Err(evanesim::Error::Accuracy(_))
    ));
}
