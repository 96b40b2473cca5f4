//! Fiber-delay / AOM interferometer simulation.
//!
//! Both arms pass through the same fiber (position shift `X = n_eff · L`) and
//! the same AOM (spatial-frequency shift `K = Ω_rf / c`) in opposite orders.
//! The arms therefore differ by the loop phase `K X`; a tilt between the
//! output beams turns that phase into the position of a static fringe pattern
//! on the camera. Stepping the rf frequency by `ΔΩ` moves the fringes by
//! `Δφ = ΔK · X`, so the slope `Δφ / ΔK` measures `X` without knowing the
//! absolute optical path.

use std::f64::consts::TAU;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::sig17;
use crate::phase;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Effective index of a typical single-mode fiber.
pub const DEFAULT_N_EFF: f64 = 1.4682;

/// Fits whose phase uncertainty exceeds 1/5 rad are flagged as low visibility.
const LOW_VISIBILITY_RATIO: f64 = 5.0;

fn default_n_eff() -> f64 {
    DEFAULT_N_EFF
}

/// Apparatus parameters. Angular frequencies are in rad/s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferometerConfig {
    /// Manufacturer fiber length, m.
    pub fiber_length: f64,
    #[serde(default = "default_n_eff")]
    pub n_eff: f64,
    /// Ω_rf, rad/s.
    pub base_rf_frequency: f64,
    /// ΔΩ_rf offsets in acquisition order, rad/s.
    pub rf_sweep: Vec<f64>,
    /// Fringe spatial frequency on the camera, rad/pixel.
    pub tilt_spatial_frequency: f64,
    pub camera_pixels: usize,
    pub visibility: f64,
    pub intensity_offset: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

impl Default for InterferometerConfig {
    /// 95 m fiber, 80 MHz AOM, ±2 MHz sweep in 0.2 MHz steps, noiseless.
    fn default() -> Self {
        let mhz = TAU * 1e6;
        Self {
            fiber_length: 95.0,
            n_eff: DEFAULT_N_EFF,
            base_rf_frequency: 80.0 * mhz,
            rf_sweep: (-10..=10).map(|i| 0.2 * i as f64 * mhz).collect(),
            tilt_spatial_frequency: TAU / 64.0,
            camera_pixels: 1024,
            visibility: 0.8,
            intensity_offset: 100.0,
            noise_sigma: 0.0,
            rng_seed: 0,
        }
    }
}

impl InterferometerConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config fields are plain numbers")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("fiber_length", self.fiber_length),
            ("n_eff", self.n_eff),
            ("base_rf_frequency", self.base_rf_frequency),
            ("tilt_spatial_frequency", self.tilt_spatial_frequency),
            ("intensity_offset", self.intensity_offset),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.visibility > 0.0 && self.visibility <= 1.0) {
            return Err(Error::Config(format!(
                "visibility must lie in (0, 1], got {}",
                self.visibility
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Config(format!(
                "noise_sigma must be nonnegative, got {}",
                self.noise_sigma
            )));
        }
        if self.camera_pixels < 32 {
            return Err(Error::Config(format!(
                "camera_pixels must be at least 32, got {}",
                self.camera_pixels
            )));
        }
        if let Some(bad) = self.rf_sweep.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("rf offset {bad} is not finite")));
        }
        Ok(())
    }

    /// `X = n_eff · fiber_length`.
    pub fn optical_path(&self) -> f64 {
        self.n_eff * self.fiber_length
    }

    /// Largest predicted phase step between neighbouring sweep points, the
    /// zero-offset reference included. Unwrapping needs this below π.
    pub fn max_phase_step(&self) -> f64 {
        let mut offsets = self.rf_sweep.clone();
        offsets.push(0.0);
        offsets.sort_by(f64::total_cmp);
        offsets
            .windows(2)
            .map(|w| differential_phase(self, w[1]) - differential_phase(self, w[0]))
            .fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// `ΔK = ΔΩ_rf / c`.
pub fn delta_k(delta_rf: f64) -> f64 {
    delta_rf / SPEED_OF_LIGHT
}

/// `Δφ = ΔK · X`. Phases common to both arms (laser, rf drive, absolute
/// path) drop out, so neither `base_rf_frequency` nor anything else enters.
pub fn differential_phase(config: &InterferometerConfig, delta_rf: f64) -> f64 {
    delta_k(delta_rf) * config.optical_path()
}

/// One camera frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FringeImage {
    pub pixels: Vec<f64>,
    /// Phase the frame was rendered with.
    pub true_phase: f64,
}

impl FringeImage {
    pub fn new(pixels: Vec<f64>, true_phase: f64) -> Self {
        Self { pixels, true_phase }
    }

    /// Writes `pixel,intensity` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "pixel,intensity")?;
        for (y, v) in self.pixels.iter().enumerate() {
            writeln!(w, "{y},{}", sig17(*v))?;
        }
        Ok(())
    }
}

/// Noise generator for frame `stream` of a run; frames never share draws, so
/// parallel and serial sweeps are bit-identical.
pub fn frame_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `I(y) = I₀ (1 + V cos(k_t y + φ)) + noise`, using noise stream 0.
pub fn render_fringes(config: &InterferometerConfig, phase: f64) -> FringeImage {
    render_fringes_on_stream(config, phase, 0)
}

pub fn render_fringes_on_stream(config: &InterferometerConfig, phase: f64, stream: u64) -> FringeImage {
    let mut rng = frame_rng(config.rng_seed, stream);
    let pixels = (0..config.camera_pixels)
        .map(|y| {
            let clean = config.intensity_offset
                * (1.0 + config.visibility * (config.tilt_spatial_frequency * y as f64 + phase).cos());
            if config.noise_sigma > 0.0 {
                let n: f64 = rng.sample(StandardNormal);
                clean + config.noise_sigma * n
            } else {
                clean
            }
        })
        .collect();
    FringeImage::new(pixels, phase)
}

/// Least-squares fit of `c₀ + c₁ cos(k_t y) + c₂ sin(k_t y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FringeFit {
    /// `atan2(−c₂, c₁)` in (−π, π].
    pub phase: f64,
    /// `√(c₁² + c₂²)`, intensity units.
    pub amplitude: f64,
    pub offset: f64,
    pub rms_residual: f64,
    /// 1σ phase error implied by the residual noise.
    pub phase_uncertainty: f64,
    pub low_visibility: bool,
}

pub fn fit_fringe_phase(image: &FringeImage, k_t: f64) -> Result<FringeFit> {
    if !(k_t.is_finite() && k_t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tilt spatial frequency must be positive, got {k_t}"
        )));
    }
    let n = image.pixels.len();
    if n < 4 {
        return Err(Error::DegenerateInput(format!("{n} pixels cannot fix 3 parameters")));
    }
    if image.pixels.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fringe pixels"));
    }

    let design = DMatrix::from_fn(n, 3, |y, j| {
        let arg = k_t * y as f64;
        match j {
            0 => 1.0,
            1 => arg.cos(),
            _ => arg.sin(),
        }
    });
    let target = DVector::from_column_slice(&image.pixels);
    let svd = design.clone().svd(true, true);
    let (smax, smin) = svd
        .singular_values
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    if smin <= 1e-10 * smax {
        return Err(Error::DegenerateInput("fringe basis is rank deficient".into()));
    }
    let coeffs = svd
        .solve(&target, 0.0)
        .map_err(|e| Error::DegenerateInput(e.to_string()))?;

    let residual = &target - &design * &coeffs;
    let rms = (residual.norm_squared() / n as f64).sqrt();
    let amplitude = coeffs[1].hypot(coeffs[2]);
    let phase = phase::wrap((-coeffs[2]).atan2(coeffs[1]));

    // Unbiased noise estimate, then the amplitude/phase error of a
    // two-quadrature fit over n samples.
    let sigma = (residual.norm_squared() / (n - 3) as f64).sqrt();
    let amplitude_sigma = sigma * (2.0 / n as f64).sqrt();
    let phase_uncertainty = if amplitude > 0.0 {
        amplitude_sigma / amplitude
    } else {
        f64::INFINITY
    };
    let floor = 1e-12 * coeffs[0].abs().max(1.0);
    let low_visibility = amplitude <= floor || amplitude < LOW_VISIBILITY_RATIO * amplitude_sigma;

    Ok(FringeFit {
        phase,
        amplitude,
        offset: coeffs[0],
        rms_residual: rms,
        phase_uncertainty,
        low_visibility,
    })
}

/// Estimates the fringe spatial frequency (rad/pixel) of a calibration frame:
/// the strongest non-DC DFT bin, refined by maximizing the fitted amplitude
/// within one bin of it.
pub fn estimate_tilt_frequency(image: &FringeImage) -> Result<f64> {
    let n = image.pixels.len();
    if n < 8 {
        return Err(Error::DegenerateInput(format!("{n} pixels is too few")));
    }
    let mean = image.pixels.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<num_complex::Complex64> = image
        .pixels
        .iter()
        .map(|&v| num_complex::Complex64::new(v - mean, 0.0))
        .collect();
    rustfft::FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let peak = (1..n / 2)
        .max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))
        .ok_or_else(|| Error::DegenerateInput("no spectrum".into()))?;
    if buf[peak].norm() == 0.0 {
        return Err(Error::DegenerateInput("flat calibration frame".into()));
    }

    let bin = TAU / n as f64;
    let amplitude_at = |k: f64| fit_fringe_phase(image, k).map(|f| f.amplitude).unwrap_or(0.0);
    let (mut lo, mut hi) = (((peak as f64) - 1.0).max(0.5) * bin, (peak as f64 + 1.0) * bin);
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - golden * (hi - lo);
    let mut b = lo + golden * (hi - lo);
    let (mut fa, mut fb) = (amplitude_at(a), amplitude_at(b));
    for _ in 0..80 {
        if fa > fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - golden * (hi - lo);
            fa = amplitude_at(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + golden * (hi - lo);
            fb = amplitude_at(b);
        }
    }
    Ok((lo + hi) / 2.0)
}

/// One rf setting of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    /// ΔΩ_rf, rad/s.
    pub delta_rf: f64,
    /// ΔK, rad/m.
    pub delta_k: f64,
    /// Measured phase relative to the zero-offset reference, unwrapped.
    pub fitted_phase: f64,
    /// `ΔK · X`.
    pub predicted_phase: f64,
    pub phase_uncertainty: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    /// Sorted by `delta_rf`.
    pub rows: Vec<SweepRow>,
    /// Least-squares `Δφ / ΔK`, m.
    pub fitted_slope: f64,
    /// RMS of the line-fit residuals, rad.
    pub slope_residual: f64,
    /// 1σ slope error propagated from the per-frame phase errors, m.
    pub slope_uncertainty: f64,
    /// `n_eff · fiber_length`, m.
    pub optical_path: f64,
    /// Whether every unwrapping step stayed below π.
    pub unwrap_ok: bool,
}

impl SweepResult {
    /// Allowed `|slope − X|`: five propagated standard errors plus a 1e-9
    /// relative floor for the noiseless case.
    pub fn slope_tolerance(&self) -> f64 {
        5.0 * self.slope_uncertainty + 1e-9 * self.optical_path
    }

    pub fn slope_ok(&self) -> bool {
        (self.fitted_slope - self.optical_path).abs() <= self.slope_tolerance()
    }

    /// RMS of the per-frame phase uncertainties.
    pub fn rms_phase_uncertainty(&self) -> f64 {
        let n = self.rows.len().max(1) as f64;
        (self.rows.iter().map(|r| r.phase_uncertainty.powi(2)).sum::<f64>() / n).sqrt()
    }

    /// Writes the sweep table; frequencies in Hz (`ΔΩ / 2π`).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "delta_rf_hz,delta_k_per_m,fitted_phase_rad,predicted_phase_rad")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                sig17(r.delta_rf / TAU),
                sig17(r.delta_k),
                sig17(r.fitted_phase),
                sig17(r.predicted_phase)
            )?;
        }
        Ok(())
    }
}

/// Absolute loop phase at the carrier, wrapped; the sweep analysis never
/// sees it directly.
pub fn carrier_phase(config: &InterferometerConfig) -> f64 {
    (config.base_rf_frequency / SPEED_OF_LIGHT * config.optical_path()).rem_euclid(TAU)
}

/// The camera frame recorded at `rf_sweep[index]`, as fitted by
/// [`sweep_experiment`].
pub fn sweep_frame(config: &InterferometerConfig, index: usize) -> FringeImage {
    let phase = carrier_phase(config) + differential_phase(config, config.rf_sweep[index]);
    render_fringes_on_stream(config, phase, index as u64 + 1)
}

/// Renders and fits one frame per rf offset plus a zero-offset reference,
/// unwraps the phase differences along the frequency axis, and fits the slope.
///
/// Frame `i` of `rf_sweep` draws its noise from stream `i + 1`; the reference
/// uses stream 0.
pub fn sweep_experiment(config: &InterferometerConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut distinct = config.rf_sweep.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InsufficientSweep {
            points: distinct.len(),
        });
    }

    let x = config.optical_path();
    let k_t = config.tilt_spatial_frequency;
    let reference = fit_fringe_phase(&render_fringes_on_stream(config, carrier_phase(config), 0), k_t)?;

    let fits: Vec<FringeFit> = config
        .rf_sweep
        .par_iter()
        .enumerate()
        .map(|(i, _)| fit_fringe_phase(&sweep_frame(config, i), k_t))
        .collect::<Result<_>>()?;

    // Chain through the reference at ΔΩ = 0 so the unwrapped phases carry no
    // arbitrary multiple of 2π.
    let mut chain: Vec<(f64, f64, Option<usize>)> = config
        .rf_sweep
        .iter()
        .zip(&fits)
        .enumerate()
        .map(|(i, (&d, f))| (d, phase::wrap(f.phase - reference.phase), Some(i)))
        .collect();
    chain.push((0.0, 0.0, None));
    chain.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.is_some().cmp(&b.2.is_some())));
    let wrapped: Vec<f64> = chain.iter().map(|c| c.1).collect();
    let unwrapped = phase::unwrap(&wrapped);
    let anchor = chain
        .iter()
        .position(|c| c.2.is_none())
        .expect("reference is in the chain");
    let anchor_value = unwrapped[anchor];

    let rows: Vec<SweepRow> = chain
        .iter()
        .zip(&unwrapped)
        .filter_map(|(c, &u)| {
            c.2.map(|i| SweepRow {
                delta_rf: c.0,
                delta_k: delta_k(c.0),
                fitted_phase: u - anchor_value,
                predicted_phase: differential_phase(config, c.0),
                phase_uncertainty: fits[i].phase_uncertainty,
            })
        })
        .collect();

    let line = fit_line(&rows);
    Ok(SweepResult {
        rows,
        fitted_slope: line.slope,
        slope_residual: line.rms_residual,
        slope_uncertainty: line.slope_sigma,
        optical_path: x,
        unwrap_ok: config.max_phase_step() < std::f64::consts::PI,
    })
}

struct LineFit {
    slope: f64,
    rms_residual: f64,
    slope_sigma: f64,
}

/// Ordinary least squares of `fitted_phase` on `delta_k`, with intercept.
fn fit_line(rows: &[SweepRow]) -> LineFit {
    let n = rows.len() as f64;
    let mean_k = rows.iter().map(|r| r.delta_k).sum::<f64>() / n;
    let mean_phi = rows.iter().map(|r| r.fitted_phase).sum::<f64>() / n;
    let sxx: f64 = rows.iter().map(|r| (r.delta_k - mean_k).powi(2)).sum();
    let sxy: f64 = rows
        .iter()
        .map(|r| (r.delta_k - mean_k) * (r.fitted_phase - mean_phi))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_phi - slope * mean_k;
    let rms_residual = (rows
        .iter()
        .map(|r| (r.fitted_phase - intercept - slope * r.delta_k).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    // slope = Σ w_i φ_i with w_i = (k_i − k̄)/Sxx; the shared reference error
    // only moves the intercept.
    let slope_sigma = rows
        .iter()
        .map(|r| ((r.delta_k - mean_k) / sxx * r.phase_uncertainty).powi(2))
        .sum::<f64>()
        .sqrt();
    LineFit {
        slope,
        rms_residual,
        slope_sigma,
    }
}
