//! Reproduction pipeline: barrier response, detection curves, coincidence
//! curve, and the files they are written to.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::detection::{
    barrier_probability, peak_delay, probability_difference, reference_probability,
    shg_coincidence, DetectionCurve,
};
use crate::error::{Error, Result};
use crate::layered::{group_delay, stack_response, BarrierResponse};
use crate::pulse::PulseSpec;
use crate::scenario::{BarrierRecipe, Scenario};

/// ΔP is only judged where P_r exceeds this fraction of its plateau.
pub const SIGNIFICANT_FRACTION: f64 = 1e-12;

pub const RESPONSE_CSV: &str = "response.csv";
pub const DETECTION_CSV: &str = "detection.csv";
pub const SHG_CSV: &str = "shg.csv";
pub const REPORT_JSON: &str = "report.json";
pub const SWEEP_CSV: &str = "sweep.csv";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    pub frequency_points: usize,
    pub frequency_spacing_rad_per_fs: f64,
    pub frequency_half_width_sigmas: f64,
    pub time_samples: usize,
    pub time_step_fs: f64,
    pub delay_samples: usize,
    /// Share of each plateau accumulated before the first time sample.
    pub reference_leading_tail: f64,
    pub barrier_leading_tail: f64,
    /// Largest relative intensity at the edge of the coincidence window.
    pub shg_window_tail: f64,
    pub barrier_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub retardation_fs: f64,
    pub barrier_thickness_nm: f64,
    pub plateau_reference: f64,
    pub plateau_barrier: f64,
    pub plateau_ratio: f64,
    pub group_delay_fs: f64,
    pub shg_peak_delay_fs: f64,
    /// Minimum of ΔP over all samples.
    pub delta_p_min: f64,
    /// Minimum of ΔP over samples where P_r > 1e-12 of its plateau.
    pub delta_p_min_significant: f64,
    pub convergence: Convergence,
}

/// Everything computed for one scenario, before anything is written.
#[derive(Debug, Clone)]
pub struct RunOutputs {
    pub response: BarrierResponse,
    pub reference: DetectionCurve,
    pub barrier: DetectionCurve,
    pub difference: DetectionCurve,
    pub shg: DetectionCurve,
    pub report: RunReport,
}

/// Minimum of ΔP where the reference curve is above `fraction` of its plateau.
pub fn significant_minimum(
    reference: &DetectionCurve,
    difference: &DetectionCurve,
    fraction: f64,
) -> f64 {
    let floor = fraction * reference.last();
    reference
        .values
        .iter()
        .zip(&difference.values)
        .filter(|(&r, _)| r > floor)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min)
}

pub fn simulate(scenario: &Scenario) -> Result<RunOutputs> {
    scenario.validate()?;
    let pulse = &scenario.pulse;
    let grid = scenario.frequency_grid()?;
    let stack = scenario.stack()?;
    let response = stack_response(&stack, &grid)?;
    let retardation = scenario.retardation_fs();
    let times = scenario.time_grid()?;
    let delays = scenario.delay_grid()?;

    let reference = reference_probability(pulse, &grid, retardation, &times)?;
    let barrier = barrier_probability(pulse, &grid, &response, retardation, &times)?;
    let difference = probability_difference(&reference, &barrier)?;
    let shg = shg_coincidence(pulse, &grid, &response, retardation, &delays)?;

    let report = RunReport {
        scenario: scenario.clone(),
        retardation_fs: retardation,
        barrier_thickness_nm: stack.thickness_nm(),
        plateau_reference: reference.last(),
        plateau_barrier: barrier.last(),
        plateau_ratio: reference.last() / barrier.last(),
        group_delay_fs: group_delay(&response, pulse)?,
        shg_peak_delay_fs: peak_delay(&shg),
        delta_p_min: difference.min(),
        delta_p_min_significant: significant_minimum(
            &reference,
            &difference,
            SIGNIFICANT_FRACTION,
        ),
        convergence: Convergence {
            frequency_points: grid.len(),
            frequency_spacing_rad_per_fs: grid.spacing(),
            frequency_half_width_sigmas: scenario.grids.frequency_half_width_sigmas,
            time_samples: times.len(),
            time_step_fs: times.spacing(),
            delay_samples: delays.len(),
            reference_leading_tail: reference.tail,
            barrier_leading_tail: barrier.tail,
            shg_window_tail: shg.tail,
            barrier_degenerate: barrier.degenerate,
        },
    };
    Ok(RunOutputs {
        response,
        reference,
        barrier,
        difference,
        shg,
        report,
    })
}

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn response_csv(response: &BarrierResponse, pulse: &PulseSpec) -> String {
    let mut out = String::from("frequency_THz,B,phase_over_2pi,f_normalized\n");
    let two_pi = 2.0 * std::f64::consts::PI;
    for (k, &w) in response.grid().samples().iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(w / two_pi * 1e3),
            num(response.magnitude()[k]),
            num(response.phase()[k] / two_pi),
            num(pulse.amplitude(w)),
        );
    }
    out
}

pub fn detection_csv(outputs: &RunOutputs) -> String {
    let arrival = outputs.report.scenario.pulse.emission_time_fs() + outputs.report.retardation_fs;
    let mut out = String::from("t_minus_T_fs,P_ref,P_barrier,delta_P\n");
    for (k, &t) in outputs.reference.grid.samples().iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(t - arrival),
            num(outputs.reference.values[k]),
            num(outputs.barrier.values[k]),
            num(outputs.difference.values[k]),
        );
    }
    out
}

pub fn shg_csv(shg: &DetectionCurve) -> String {
    let mut out = String::from("delay_fs,coincidence_normalized\n");
    for (d, v) in shg.grid.samples().iter().zip(&shg.values) {
        let _ = writeln!(out, "{},{}", num(*d), num(*v));
    }
    out
}

const PLOT_RESPONSE: &str = r#"#!/usr/bin/env python3
"""Transmission magnitude, phase (units of 2π) and pulse spectrum vs frequency."""
import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("response.csv")))
nu = [float(r["frequency_THz"]) for r in rows]
fig, ax = plt.subplots()
ax.plot(nu, [float(r["B"]) for r in rows], "-", label="B")
ax.set_xlabel("frequency (THz)")
ax.set_ylabel("|tau|")
ax2 = ax.twinx()
ax2.plot(nu, [float(r["phase_over_2pi"]) for r in rows], "--", label="phase / 2pi")
ax2.plot(nu, [float(r["f_normalized"]) for r in rows], "-.", label="spectrum")
ax2.set_ylabel("phase / 2pi, spectrum")
fig.legend(loc="upper right")
fig.savefig("response.png", dpi=150)
"#;

const PLOT_DETECTION: &str = r#"#!/usr/bin/env python3
"""Photoionization probability per unit alpha on both channels vs t - T."""
import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("detection.csv")))
t = [float(r["t_minus_T_fs"]) for r in rows]
fig, ax = plt.subplots()
ax.semilogy(t, [max(float(r["P_ref"]), 1e-300) for r in rows], label="reference")
ax.semilogy(t, [max(float(r["P_barrier"]), 1e-300) for r in rows], label="barrier")
ax.set_xlabel("t - T (fs)")
ax.set_ylabel("P / alpha")
ax.set_ylim(bottom=1e-12)
ax.legend()
fig.savefig("detection.png", dpi=150)
"#;

const PLOT_SHG: &str = r#"#!/usr/bin/env python3
"""Normalized SHG coincidence signal vs relative delay."""
import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("shg.csv")))
fig, ax = plt.subplots()
ax.plot([float(r["delay_fs"]) for r in rows],
        [float(r["coincidence_normalized"]) for r in rows])
ax.set_xlabel("delay (fs)")
ax.set_ylabel("coincidence (normalized)")
fig.savefig("shg.png", dpi=150)
"#;

/// Writes a set of files, removing the ones already written if any fails.
fn write_all(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, contents) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(Error::io(path, e));
        }
        written.push(path);
    }
    Ok(written)
}

pub fn write_outputs(outputs: &RunOutputs, dir: &Path) -> Result<Vec<PathBuf>> {
    let report = serde_json::to_string_pretty(&outputs.report)
        .expect("report contains only plain data");
    write_all(
        dir,
        &[
            (
                RESPONSE_CSV,
                response_csv(&outputs.response, &outputs.report.scenario.pulse),
            ),
            (DETECTION_CSV, detection_csv(outputs)),
            (SHG_CSV, shg_csv(&outputs.shg)),
            (REPORT_JSON, report + "\n"),
            ("plot_response.py", PLOT_RESPONSE.to_string()),
            ("plot_detection.py", PLOT_DETECTION.to_string()),
            ("plot_shg.py", PLOT_SHG.to_string()),
        ],
    )
}

/// Runs the full pipeline and writes its outputs into `out_dir`.
///
/// Nothing is written unless every computation succeeds.
pub fn run_reproduction(scenario: &Scenario, out_dir: &Path) -> Result<RunReport> {
    let outputs = simulate(scenario)?;
    write_outputs(&outputs, out_dir)?;
    Ok(outputs.report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Periods,
    FwhmBandwidth,
    CenterWavelength,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Periods => "periods",
            SweepParameter::FwhmBandwidth => "fwhm_bandwidth",
            SweepParameter::CenterWavelength => "center_wavelength",
        }
    }

    /// Copy of `scenario` with this parameter set to `value`.
    pub fn apply(&self, scenario: &Scenario, value: f64) -> Result<Scenario> {
        let mut s = scenario.clone();
        let not_applicable = || Error::Validation {
            constraint: "sweep_parameter",
            detail: format!("`{}` needs a quarter-wave barrier", self.name()),
        };
        match self {
            SweepParameter::Periods => {
                let BarrierRecipe::QuarterWave(q) = &mut s.barrier else {
                    return Err(not_applicable());
                };
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(Error::Validation {
                        constraint: "periods_positive",
                        detail: format!("periods must be a positive integer, got {value}"),
                    });
                }
                q.periods = value as usize;
            }
            SweepParameter::FwhmBandwidth => {
                s.pulse = PulseSpec::with_emission_time(
                    s.pulse.center_frequency_thz(),
                    value,
                    s.pulse.emission_time_fs(),
                )
                .map_err(|e| Error::Validation {
                    constraint: "quasi_monochromatic",
                    detail: e.to_string(),
                })?;
            }
            SweepParameter::CenterWavelength => {
                let BarrierRecipe::QuarterWave(q) = &mut s.barrier else {
                    return Err(not_applicable());
                };
                q.center_wavelength_nm = value;
            }
        }
        s.validate()?;
        Ok(s)
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periods" => Ok(SweepParameter::Periods),
            "fwhm_bandwidth" => Ok(SweepParameter::FwhmBandwidth),
            "center_wavelength" => Ok(SweepParameter::CenterWavelength),
            other => Err(Error::Validation {
                constraint: "sweep_parameter",
                detail: format!(
                    "unknown parameter `{other}`; expected periods, fwhm_bandwidth \
                     or center_wavelength"
                ),
            }),
        }
    }
}

pub fn sweep_csv(parameter: SweepParameter, values: &[f64], reports: &[RunReport]) -> String {
    let mut out = String::from(
        "parameter,value,plateau_reference,plateau_barrier,plateau_ratio,group_delay_fs,\
         shg_peak_delay_fs,delta_p_min\n",
    );
    for (v, r) in values.iter().zip(reports) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            parameter.name(),
            num(*v),
            num(r.plateau_reference),
            num(r.plateau_barrier),
            num(r.plateau_ratio),
            num(r.group_delay_fs),
            num(r.shg_peak_delay_fs),
            num(r.delta_p_min),
        );
    }
    out
}

/// One report per value, plus `sweep.csv` in `out_dir` when `values` is non-empty.
pub fn sweep(
    scenario: &Scenario,
    parameter: SweepParameter,
    values: &[f64],
    out_dir: &Path,
) -> Result<Vec<RunReport>> {
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let reports = values
        .iter()
        .map(|&v| Ok(simulate(&parameter.apply(scenario, v)?)?.report))
        .collect::<Result<Vec<_>>>()?;
    write_all(out_dir, &[(SWEEP_CSV, sweep_csv(parameter, values, &reports))])?;
    Ok(reports)
}
