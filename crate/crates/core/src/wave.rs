//! Position and spatial-frequency displacements of a sampled periodic wave.
//!
//! A wave is held as `n_samples` complex values on the uniform periodic grid
//! `x_j = j·L/n_samples`. Its Fourier series `f(x_j) = Σ c_n e^{i2πn x_j/L}`
//! uses modes `n ∈ [−N/2, N/2)`.
//!
//! * `D_p(X) f = f(x − X)`: every coefficient picks up `e^{−i2πnX/L}`, which is
//!   exact band-limited interpolation for off-grid shifts.
//! * `D_f(K) f = e^{iKx} f`: with `K = 2πm/L` this moves the spectrum by `m`
//!   modes. Non-commensurate `K` would break periodicity and is rejected.

use std::f64::consts::TAU;
use std::io::{self, Write};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::numfmt::sig17;
use crate::phase;

const MIN_SAMPLES: usize = 8;
const COMMENSURATE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SampledWave {
    length: f64,
    values: Vec<Complex64>,
}

impl SampledWave {
    pub fn new(length: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "period length must be positive, got {length}"
            )));
        }
        let n = values.len();
        if n < MIN_SAMPLES || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "sample count must be a power of two >= {MIN_SAMPLES}, got {n}"
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("wave samples"));
        }
        Ok(Self { length, values })
    }

    /// Samples `f` on the grid.
    pub fn from_fn<F: Fn(f64) -> Complex64>(length: f64, n_samples: usize, f: F) -> Result<Self> {
        let dx = length / n_samples as f64;
        let values = (0..n_samples).map(|j| f(j as f64 * dx)).collect();
        Self::new(length, values)
    }

    /// Random wave with Gaussian coefficients on modes `|n| ≤ max_mode`.
    pub fn random_band_limited<R: Rng + ?Sized>(
        length: f64,
        n_samples: usize,
        max_mode: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if max_mode >= n_samples / 2 {
            return Err(Error::InvalidParameter(format!(
                "band limit {max_mode} must be below n_samples/2 = {}",
                n_samples / 2
            )));
        }
        let half = (n_samples / 2) as i64;
        let m = max_mode as i64;
        let coeffs = (-half..half)
            .map(|n| {
                if n.abs() <= m {
                    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        FourierCoefficients::new(length, coeffs)?.to_wave()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_samples(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_samples() as f64
    }

    /// Grid position of sample `j`.
    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Σ conj(self_j) other_j`.
    pub fn inner(&self, other: &SampledWave) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest per-sample deviation.
    pub fn max_abs_diff(&self, other: &SampledWave) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> SampledWave {
        SampledWave {
            length: self.length,
            values: self.values.iter().map(|z| z * s).collect(),
        }
    }

    /// Writes `x,re,im` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,re,im")?;
        for (j, z) in self.values.iter().enumerate() {
            writeln!(w, "{},{},{}", sig17(self.x(j)), sig17(z.re), sig17(z.im))?;
        }
        Ok(())
    }
}

/// Fourier-series coefficients ordered by mode, `−N/2 … N/2−1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoefficients {
    length: f64,
    coeffs: Vec<Complex64>,
}

impl FourierCoefficients {
    pub fn new(length: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        let n = coeffs.len();
        if n < MIN_SAMPLES || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "coefficient count must be a power of two >= {MIN_SAMPLES}, got {n}"
            )));
        }
        Ok(Self { length, coeffs })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_mode(&self) -> i64 {
        -((self.len() / 2) as i64)
    }

    pub fn max_mode(&self) -> i64 {
        (self.len() / 2) as i64 - 1
    }

    /// Coefficient of mode `n`, or zero outside the representable band.
    pub fn coeff(&self, n: i64) -> Complex64 {
        if n < self.min_mode() || n > self.max_mode() {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(n - self.min_mode()) as usize]
    }

    /// `(mode, c_n)` pairs in ascending mode order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let lo = self.min_mode();
        self.coeffs.iter().enumerate().map(move |(i, &c)| (lo + i as i64, c))
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Evaluates the series back on the sample grid.
    pub fn to_wave(&self) -> Result<SampledWave> {
        let n = self.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (mode, c) in self.modes() {
            buf[mode.rem_euclid(n as i64) as usize] = c;
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        SampledWave::new(self.length, buf)
    }
}

/// Discrete Fourier coefficients normalized so that the series reproduces the
/// samples.
pub fn fourier_series(wave: &SampledWave) -> FourierCoefficients {
    let n = wave.n_samples();
    let mut buf = wave.values.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let scale = 1.0 / n as f64;
    let coeffs = (0..n)
        .map(|i| buf[(i + half) % n] * scale)
        .collect();
    FourierCoefficients {
        length: wave.length,
        coeffs,
    }
}

/// `f(x) → f(x − X)` by multiplying each coefficient by `e^{−i2πnX/L}`.
pub fn position_displace(wave: &SampledWave, shift: f64) -> Result<SampledWave> {
    if !shift.is_finite() {
        return Err(Error::NonFinite("position shift"));
    }
    let spectrum = fourier_series(wave);
    // Reduce X/L first so that whole periods cost no precision.
    let frac = (shift / wave.length).rem_euclid(1.0);
    let coeffs = spectrum
        .modes()
        .map(|(n, c)| c * Complex64::from_polar(1.0, -TAU * n as f64 * frac))
        .collect();
    FourierCoefficients {
        length: wave.length,
        coeffs,
    }
    .to_wave()
}

/// Mode count `m` with `K = 2πm/L`, or an error naming the nearest valid `K`.
pub fn commensurate_mode(wave: &SampledWave, k: f64) -> Result<i64> {
    if !k.is_finite() {
        return Err(Error::NonFinite("spatial-frequency shift"));
    }
    let m = k * wave.length / TAU;
    let rounded = m.round();
    if (m - rounded).abs() > COMMENSURATE_TOL * rounded.abs().max(1.0) {
        return Err(Error::Commensurability {
            k,
            nearest: TAU * rounded / wave.length,
        });
    }
    let m = rounded as i64;
    let max = (wave.n_samples() / 4) as i64;
    if m.abs() > max {
        return Err(Error::Aliasing { modes: m, max });
    }
    Ok(m)
}

/// `f(x) → e^{iKx} f(x)`.
pub fn frequency_displace(wave: &SampledWave, k: f64) -> Result<SampledWave> {
    let m = commensurate_mode(wave, k)?;
    let n = wave.n_samples() as i64;
    // e^{iK x_j} = e^{i2π m j / N}; index the phase by (m·j mod N) so it is
    // periodic to the last bit.
    let values = wave
        .values
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let idx = (m * j as i64).rem_euclid(n);
            z * Complex64::from_polar(1.0, TAU * idx as f64 / n as f64)
        })
        .collect();
    SampledWave::new(wave.length, values)
}

/// Result of transporting a wave around a position/frequency loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveLoopPhase {
    /// `arg⟨f, g⟩` in (−π, π].
    pub phi: f64,
    /// `‖g − e^{iφ} f‖ / ‖f‖`.
    pub residual: f64,
}

/// Applies `D_f(−K) D_p(−X) D_f(K) D_p(X)` to `wave` and reads off the phase.
///
/// The result is `e^{iXK} f` exactly when the shifted spectrum stays inside
/// the Nyquist band, i.e. every occupied mode `n` has `n + m` in `[−N/2, N/2)`;
/// otherwise `residual` reports the aliasing damage.
pub fn loop_phase(wave: &SampledWave, shift: f64, k: f64) -> Result<WaveLoopPhase> {
    let norm = wave.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateInput("zero-norm wave".into()));
    }
    let g = position_displace(wave, shift)?;
    let g = frequency_displace(&g, k)?;
    let g = position_displace(&g, -shift)?;
    let g = frequency_displace(&g, -k)?;

    let phi = phase::wrap(wave.inner(&g).arg());
    let rotated = wave.scale(Complex64::from_polar(1.0, phi));
    let residual = g
        .values
        .iter()
        .zip(&rotated.values)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / norm;
    Ok(WaveLoopPhase { phi, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    const L: f64 = 2.5;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sine(n: usize) -> SampledWave {
        SampledWave::from_fn(L, n, |x| c((TAU * x / L).sin(), 0.0)).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SampledWave::new(1.0, vec![c(1.0, 0.0); 4]).is_err());
        assert!(SampledWave::new(1.0, vec![c(1.0, 0.0); 12]).is_err());
        assert!(SampledWave::new(0.0, vec![c(1.0, 0.0); 16]).is_err());
    }

    #[test]
    fn constant_has_only_dc() {
        let w = SampledWave::from_fn(L, 16, |_| c(1.0, 0.0)).unwrap();
        let s = fourier_series(&w);
        for (n, cn) in s.modes() {
            let e = if n == 0 { 1.0 } else { 0.0 };
            assert!((cn - c(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn sine_coefficients() {
        let s = fourier_series(&sine(32));
        assert!((s.coeff(1) - c(1.0, 0.0) / c(0.0, 2.0)).norm() < 1e-15);
        assert!((s.coeff(-1) + c(1.0, 0.0) / c(0.0, 2.0)).norm() < 1e-15);
        assert_eq!(s.coeff(99), c(0.0, 0.0));
    }

    #[test]
    fn round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let values: Vec<_> = (0..256)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let w = SampledWave::new(L, values).unwrap();
        let back = fourier_series(&w).to_wave().unwrap();
        let err: f64 = w
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err / w.norm() < 1e-12);
    }

    #[test]
    fn position_shift_cases() {
        let w = sine(64);
        assert!(position_displace(&w, 0.0).unwrap().max_abs_diff(&w) < 1e-15);
        assert!(position_displace(&w, L).unwrap().max_abs_diff(&w) < 1e-12);
        let shifted = position_displace(&w, L / 4.0).unwrap();
        let expect = SampledWave::from_fn(L, 64, |x| c((TAU * (x - L / 4.0) / L).sin(), 0.0)).unwrap();
        assert!(shifted.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn off_grid_shift_interpolates() {
        // Band-limited wave, shift by a fraction of a grid step.
        let f = |x: f64| c((TAU * 3.0 * x / L).cos(), (TAU * 5.0 * x / L).sin());
        let w = SampledWave::from_fn(L, 64, f).unwrap();
        let s = 0.123_456 * w.dx();
        let got = position_displace(&w, s).unwrap();
        let expect = SampledWave::from_fn(L, 64, |x| f(x - s)).unwrap();
        assert!(got.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn frequency_shift_cases() {
        let w = sine(64);
        assert_eq!(frequency_displace(&w, 0.0).unwrap(), w);

        let one = SampledWave::from_fn(L, 32, |_| c(1.0, 0.0)).unwrap();
        let s = fourier_series(&frequency_displace(&one, TAU / L).unwrap());
        assert!((s.coeff(1) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(s.coeff(0).norm() < 1e-15);

        // Fig. 1b: spectrum moves by m, the origin sample is untouched.
        let shifted = frequency_displace(&w, TAU * 3.0 / L).unwrap();
        assert_eq!(shifted.values()[0], w.values()[0]);
        let (a, b) = (fourier_series(&w), fourier_series(&shifted));
        for n in -10..10 {
            assert!((b.coeff(n + 3) - a.coeff(n)).norm() < 1e-14);
        }
    }

    #[test]
    fn frequency_shift_errors() {
        let w = sine(32);
        match frequency_displace(&w, 1.3 * TAU / L) {
            Err(Error::Commensurability { nearest, .. }) => {
                assert!((nearest - TAU / L).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            frequency_displace(&w, 9.0 * TAU / L),
            Err(Error::Aliasing { modes: 9, max: 8 })
        );
    }

    #[test]
    fn loop_phase_examples() {
        let w = sine(64);
        let r = loop_phase(&w, 0.0, TAU * 2.0 / L).unwrap();
        assert!(r.phi.abs() < 1e-12 && r.residual < 1e-12);

        let r = loop_phase(&w, L / 4.0, TAU / L).unwrap();
        assert!((r.phi - FRAC_PI_2).abs() < 1e-10);
        assert!(r.residual < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = SampledWave::random_band_limited(L, 128, 20, &mut rng).unwrap();
        let r = loop_phase(&w, 0.7 * L, TAU * 3.0 / L).unwrap();
        let expect = phase::wrap(TAU * 3.0 * 0.7);
        assert!((r.phi - expect).abs() < 1e-10);
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn loop_phase_direct_per_sample() {
        // g_j = e^{iXK} f_j, checked sample by sample.
        let w = sine(32);
        let (x, k) = (L / 4.0, TAU / L);
        let g = frequency_displace(
            &position_displace(
                &frequency_displace(&position_displace(&w, x).unwrap(), k).unwrap(),
                -x,
            )
            .unwrap(),
            -k,
        )
        .unwrap();
        let factor = Complex64::from_polar(1.0, x * k);
        for (a, b) in w.values().iter().zip(g.values()) {
            assert!((a * factor - b).norm() < 1e-12);
        }
        assert!((x * k - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn loop_phase_zero_wave() {
        let w = SampledWave::new(L, vec![c(0.0, 0.0); 16]).unwrap();
        assert!(matches!(loop_phase(&w, 0.1, 0.0), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        sine(8).write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("x,re,im\n0.0000000000000000e0,"));
        assert_eq!(s.lines().count(), 9);
    }
}
