//! Subcommand execution. Every run takes a resolved [`RunManifest`] so that
//! fresh invocations and replays follow the same code path.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use dcplab::action::{self, PhasePoint, PolygonPath};
use dcplab::fock::{self, DisplacementAmplitude, StateVector};
use dcplab::interferometer::{self, InterferometerConfig, SweepResult};
use dcplab::numfmt::sig17;
use dcplab::phase;
use dcplab::wave::{self, SampledWave};
use dcplab::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::manifest::{Run, RunManifest};
use crate::svg::{Plot, Series, Style};

pub const QUANTUM_TOLERANCE: f64 = 1e-6;
pub const WAVE_TOLERANCE: f64 = 1e-10;
pub const ACTION_TOLERANCE: f64 = 1e-9;

/// Whether every contract checked during the run held.
#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn execute(manifest: &RunManifest, out: &Path) -> anyhow::Result<Outcome> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let seed = manifest.rng_seed;
    let svg = manifest.format.svg();
    let outcome = match &manifest.run {
        Run::QuantumLoop {
            alpha,
            beta,
            dim,
            trials,
        } => quantum_loop(
            Complex64::new(alpha[0], alpha[1]),
            Complex64::new(beta[0], beta[1]),
            *dim,
            *trials,
            seed,
            out,
        )?,
        Run::WaveLoop {
            shifts,
            wavenumbers,
            length,
            samples,
            wave,
        } => wave_loop(shifts, wavenumbers, *length, *samples, wave, seed, out)?,
        Run::ActionLoop { vertices, hbar, .. } => action_loop(vertices, *hbar, svg, out)?,
        Run::Interferometer {
            config, dump_fringes, ..
        } => interferometer_run(config, *dump_fringes, svg, out)?,
    };
    manifest.write(out)?;
    Ok(outcome)
}

pub fn quantum_loop(
    alpha: Complex64,
    beta: Complex64,
    dim: usize,
    trials: usize,
    seed: u64,
    out: &Path,
) -> anyhow::Result<Outcome> {
    let a = DisplacementAmplitude::from(alpha);
    let b = DisplacementAmplitude::from(beta);
    for leg in [a, b, a + b] {
        leg.check_guard(dim)?;
    }
    if dim < 16 {
        bail!("dim = {dim} is too small; need dim >= 16");
    }
    if trials == 0 {
        bail!("trials must be at least 1");
    }

    // `+ 0.0` turns a negative zero into zero for the CSV.
    let analytic = 2.0 * (alpha.conj() * beta).im + 0.0;
    let support = fock::reliable_block(dim, alpha.norm() + beta.norm());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let loop_op = fock::loop_operator(a, b, dim)?;

    let mut outcome = Outcome::default();
    let mut w = create(out, "quantum_loop.csv")?;
    writeln!(w, "trial,phase_rad,analytic_rad,discrepancy_rad")?;
    for trial in 0..trials {
        let state = StateVector::random(dim, support, &mut rng)?;
        let overlap = state.inner(&loop_op.apply(&state));
        if overlap.norm() < fock::MIN_LOOP_OVERLAP {
            return Err(dcplab::Error::TruncationCorruption {
                overlap: overlap.norm(),
                dim,
            }
            .into());
        }
        let phi = phase::wrap(overlap.arg());
        let discrepancy = phase::distance(phi, analytic);
        writeln!(w, "{trial},{},{},{}", sig17(phi), sig17(analytic), sig17(discrepancy))?;
        if discrepancy > QUANTUM_TOLERANCE {
            outcome.fail(format!("trial {trial}: loop phase off by {discrepancy:e} rad"));
        }
    }
    w.flush()?;
    Ok(outcome)
}

/// Builds the test wave from a spec: `const`, `plane:M`, `sine:M` or
/// `random:B` (Gaussian coefficients on modes `|n| <= B`).
pub fn build_wave(spec: &str, length: f64, samples: usize, seed: u64) -> anyhow::Result<SampledWave> {
    let (kind, arg) = match spec.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (spec, None),
    };
    let mode = |default: i64| -> anyhow::Result<i64> {
        arg.map(|a| a.parse::<i64>().with_context(|| format!("bad mode in wave spec {spec:?}")))
            .unwrap_or(Ok(default))
    };
    let tau_over_l = std::f64::consts::TAU / length;
    let wave = match kind {
        "const" => SampledWave::from_fn(length, samples, |_| Complex64::new(1.0, 0.0))?,
        "plane" => {
            let m = mode(1)? as f64;
            SampledWave::from_fn(length, samples, |x| Complex64::from_polar(1.0, tau_over_l * m * x))?
        }
        "sine" => {
            let m = mode(1)? as f64;
            SampledWave::from_fn(length, samples, |x| Complex64::new((tau_over_l * m * x).sin(), 0.0))?
        }
        "random" => {
            let band = mode(8)?;
            if band < 0 {
                bail!("band limit in {spec:?} must be non-negative");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            SampledWave::random_band_limited(length, samples, band as usize, &mut rng)?
        }
        _ => bail!("unknown wave spec {spec:?}; expected const, plane:M, sine:M or random:B"),
    };
    Ok(wave)
}

pub fn wave_loop(
    shifts: &[f64],
    wavenumbers: &[f64],
    length: f64,
    samples: usize,
    spec: &str,
    seed: u64,
    out: &Path,
) -> anyhow::Result<Outcome> {
    if shifts.is_empty() || wavenumbers.is_empty() {
        bail!("need at least one X and one K");
    }
    let wave = build_wave(spec, length, samples, seed)?;
    wave.write_csv(create(out, "wave.csv")?)?;

    let mut outcome = Outcome::default();
    let mut w = create(out, "wave_loop.csv")?;
    writeln!(w, "X,K,phi,residual")?;
    for &k in wavenumbers {
        for &x in shifts {
            let r = wave::loop_phase(&wave, x, k)?;
            writeln!(w, "{},{},{},{}", sig17(x), sig17(k), sig17(r.phi), sig17(r.residual))?;
            let err = phase::distance(r.phi, x * k);
            if err > WAVE_TOLERANCE || r.residual > WAVE_TOLERANCE {
                outcome.fail(format!(
                    "X = {x}, K = {k}: phase error {err:e}, residual {:e}",
                    r.residual
                ));
            }
        }
    }
    w.flush()?;
    Ok(outcome)
}

pub fn path_from_rows(rows: &[[f64; 3]]) -> dcplab::Result<PolygonPath> {
    let vertices = rows.iter().map(|r| PhasePoint::new(r[0], r[1])).collect();
    let durations = rows.iter().map(|r| r[2]).collect();
    PolygonPath::new(vertices, durations, true)
}

pub fn action_loop(rows: &[[f64; 3]], hbar: f64, svg: bool, out: &Path) -> anyhow::Result<Outcome> {
    if !(hbar.is_finite() && hbar > 0.0) {
        bail!("hbar must be positive, got {hbar}");
    }
    let path = path_from_rows(rows)?;
    let actions = action::segment_actions(&path);
    let total = action::loop_action(&path)?;
    let area = action::shoelace_area(&path)?;
    let phase = total / hbar;

    let mut w = create(out, "action_segments.csv")?;
    writeln!(w, "segment,x_start,p_start,x_end,p_end,duration,action")?;
    for (i, ((s, e, d), act)) in path.segments().zip(&actions).enumerate() {
        writeln!(
            w,
            "{i},{},{},{},{},{},{}",
            sig17(s.x),
            sig17(s.p),
            sig17(e.x),
            sig17(e.p),
            sig17(d),
            sig17(*act)
        )?;
    }
    w.flush()?;

    let mut w = create(out, "action_loop.csv")?;
    writeln!(w, "total_action,shoelace_area,hbar,phase_rad")?;
    writeln!(w, "{},{},{},{}", sig17(total), sig17(area), sig17(hbar), sig17(phase))?;
    w.flush()?;

    if svg {
        let mut pts: Vec<(f64, f64)> = path.vertices().iter().map(|v| (v.x, v.p)).collect();
        pts.push(pts[0]);
        let plot = Plot {
            title: format!("closed loop, action = {total:.6}"),
            x_label: "x".into(),
            y_label: "p".into(),
            series: vec![
                Series {
                    label: "path".into(),
                    points: pts.clone(),
                    style: Style::Line,
                    color: "steelblue",
                },
                Series {
                    label: "vertices".into(),
                    points: pts,
                    style: Style::Markers,
                    color: "black",
                },
            ],
        };
        std::fs::write(out.join("action_loop.svg"), plot.render())?;
    }

    let mut outcome = Outcome::default();
    // Relative to the area; an area of exactly zero needs a total of zero,
    // up to rounding on the scale of the individual segment actions.
    let scale = area.abs().max(1e-6 * actions.iter().map(|a| a.abs()).sum::<f64>());
    if (total - area).abs() > ACTION_TOLERANCE * scale {
        outcome.fail(format!("total action {total} differs from enclosed area {area}"));
    }
    Ok(outcome)
}

fn sweep_plot(result: &SweepResult, config: &InterferometerConfig) -> Plot {
    let mhz = |r: f64| r / std::f64::consts::TAU / 1e6;
    let fitted = result.rows.iter().map(|r| (mhz(r.delta_rf), r.fitted_phase)).collect();
    let (lo, hi) = (result.rows[0].delta_rf, result.rows[result.rows.len() - 1].delta_rf);
    let theory = (0..=64)
        .map(|i| {
            let rf = lo + (hi - lo) * i as f64 / 64.0;
            (mhz(rf), interferometer::differential_phase(config, rf))
        })
        .collect();
    Plot {
        title: format!("fiber {} m, n_eff {}", config.fiber_length, config.n_eff),
        x_label: "rf offset (MHz)".into(),
        y_label: "phase (rad)".into(),
        series: vec![
            Series {
                label: "measured".into(),
                points: fitted,
                style: Style::Markers,
                color: "crimson",
            },
            Series {
                label: "theory".into(),
                points: theory,
                style: Style::Line,
                color: "black",
            },
        ],
    }
}

pub fn interferometer_run(
    config: &InterferometerConfig,
    dump_fringes: bool,
    svg: bool,
    out: &Path,
) -> anyhow::Result<Outcome> {
    config.validate()?;
    let step = config.max_phase_step();
    if step >= std::f64::consts::PI {
        eprintln!(
            "warning: sweep phase step {step:.3} rad reaches pi; unwrapping along the sweep is ambiguous"
        );
    }

    let result = interferometer::sweep_experiment(config)?;
    result.write_csv(create(out, "sweep.csv")?)?;

    let mut w = create(out, "sweep_summary.csv")?;
    writeln!(
        w,
        "optical_path_m,fitted_slope_m,slope_uncertainty_m,slope_residual_rad,slope_tolerance_m,unwrap_ok,slope_ok"
    )?;
    writeln!(
        w,
        "{},{},{},{},{},{},{}",
        sig17(result.optical_path),
        sig17(result.fitted_slope),
        sig17(result.slope_uncertainty),
        sig17(result.slope_residual),
        sig17(result.slope_tolerance()),
        result.unwrap_ok,
        result.slope_ok()
    )?;
    w.flush()?;

    if dump_fringes {
        for i in 0..config.rf_sweep.len() {
            let image = interferometer::sweep_frame(config, i);
            image.write_csv(create(out, &format!("fringes_{i}.csv"))?)?;
        }
    }
    if svg {
        std::fs::write(out.join("sweep.svg"), sweep_plot(&result, config).render())?;
    }

    let mut outcome = Outcome::default();
    if !result.slope_ok() {
        outcome.fail(format!(
            "fitted slope {} m deviates from n_eff*L = {} m by more than {} m",
            result.fitted_slope,
            result.optical_path,
            result.slope_tolerance()
        ));
    }
    if !result.unwrap_ok {
        outcome.fail("a sweep step reached pi; unwrapped phases are unreliable".into());
    }
    Ok(outcome)
}
