//! Truncated Fock-space operators for the quantum harmonic oscillator.
//!
//! All operators are dense `dim × dim` complex matrices over the number basis
//! `|0⟩ … |dim−1⟩`. Truncation makes `[a, a†]` wrong in its last diagonal
//! entry, so every quantity that should be exact in infinite dimension is read
//! off a low-index "reliable block" of the basis (see [`reliable_block`]).

use std::io::{self, Write};
use std::ops::Mul;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::expm;
use crate::numfmt::sig17;
use crate::phase;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Overlap magnitude below which a loop result is treated as corrupted.
pub const MIN_LOOP_OVERLAP: f64 = 0.99;

/// A normalized pure state over a truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Normalizes `amplitudes` into a state.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("state amplitudes"));
        }
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::DegenerateInput("zero state vector".into()));
        }
        Ok(Self {
            amplitudes: v.unscale(norm),
        })
    }

    /// Number state `|n⟩`.
    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        check_dim(dim)?;
        if n >= dim {
            return Err(Error::InvalidParameter(format!(
                "Fock index {n} outside dimension {dim}"
            )));
        }
        let mut v = DVector::zeros(dim);
        v[n] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    /// Gaussian-random state supported on `|0⟩ … |support−1⟩`.
    pub fn random<R: Rng + ?Sized>(dim: usize, support: usize, rng: &mut R) -> Result<Self> {
        check_dim(dim)?;
        if support == 0 || support > dim {
            return Err(Error::InvalidParameter(format!(
                "support {support} must lie in 1..={dim}"
            )));
        }
        let amps = (0..dim)
            .map(|n| {
                if n < support {
                    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Self::new(amps)
    }

    fn from_raw(amplitudes: DVector<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amplitudes.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `Σ n |c_n|²`.
    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum()
    }

    /// Writes `n,re,im` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,re,im")?;
        for (n, c) in self.amplitudes.iter().enumerate() {
            writeln!(w, "{n},{},{}", sig17(c.re), sig17(c.im))?;
        }
        Ok(())
    }
}

/// Dense square complex operator on the truncated basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix(DMatrix<Complex64>);

impl OperatorMatrix {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidParameter(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        StateVector::from_raw(&self.0 * &state.amplitudes)
    }

    /// Copy of the top-left `block × block` corner.
    pub fn leading_block(&self, block: usize) -> DMatrix<Complex64> {
        let b = block.min(self.dim());
        self.0.view((0, 0), (b, b)).into_owned()
    }

    /// Spectral norm of `(self − other)` restricted to the leading block.
    pub fn block_distance(&self, other: &OperatorMatrix, block: usize) -> f64 {
        let d = self.leading_block(block) - other.leading_block(block);
        spectral_norm(d)
    }

    /// Largest entry magnitude of `(self − other)` within the leading block.
    pub fn block_max_abs_diff(&self, other: &OperatorMatrix, block: usize) -> f64 {
        let d = self.leading_block(block) - other.leading_block(block);
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Writes `row,col,re,im` rows in row-major order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "row,col,re,im")?;
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                let z = self.0[(r, c)];
                writeln!(w, "{r},{c},{},{}", sig17(z.re), sig17(z.im))?;
            }
        }
        Ok(())
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

/// Spectral (largest singular value) norm.
pub fn spectral_norm(m: DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Complex coherent-state index α: real part `X/x₀`, imaginary part `P/p₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisplacementAmplitude(Complex64);

impl DisplacementAmplitude {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    pub fn from_phase_space(x: f64, p: f64, scales: &OscillatorScales) -> Self {
        Self::new(x / scales.x0(), p / scales.p0())
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn norm_sqr(self) -> f64 {
        self.0.norm_sqr()
    }

    /// Smallest truncation that admits this amplitude.
    pub fn min_dim(self) -> usize {
        ((4.0 * self.norm_sqr()).ceil() as usize).max(2)
    }

    /// Enforces `|α|² ≤ dim/4`.
    pub fn check_guard(self, dim: usize) -> Result<()> {
        if !self.0.re.is_finite() || !self.0.im.is_finite() {
            return Err(Error::NonFinite("displacement amplitude"));
        }
        if self.norm_sqr() > dim as f64 / 4.0 {
            return Err(Error::Truncation {
                alpha_sq: self.norm_sqr(),
                dim,
                min_dim: self.min_dim(),
            });
        }
        Ok(())
    }
}

impl From<Complex64> for DisplacementAmplitude {
    fn from(z: Complex64) -> Self {
        Self(z)
    }
}

impl std::ops::Add for DisplacementAmplitude {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl std::ops::Neg for DisplacementAmplitude {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

/// Length and momentum scales of an oscillator of given mass and frequency.
///
/// `x₀ = √(2ħ/(mω₀))`, `p₀ = √(2ħmω₀)`, hence `x₀·p₀ = 2ħ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatorScales {
    mass: f64,
    omega0: f64,
    hbar: f64,
}

impl OscillatorScales {
    pub fn new(mass: f64, omega0: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("omega0", omega0), ("hbar", hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { mass, omega0, hbar })
    }

    /// `m = ω₀ = ħ = 1`.
    pub fn natural() -> Self {
        Self {
            mass: 1.0,
            omega0: 1.0,
            hbar: 1.0,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn x0(&self) -> f64 {
        (2.0 * self.hbar / (self.mass * self.omega0)).sqrt()
    }

    pub fn p0(&self) -> f64 {
        (2.0 * self.hbar * self.mass * self.omega0).sqrt()
    }
}

impl Default for OscillatorScales {
    fn default() -> Self {
        Self::natural()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, min: 2 });
    }
    Ok(())
}

/// Lowering `a` and raising `a†` with `a[n−1, n] = √n`.
pub fn ladder_operators(dim: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    check_dim(dim)?;
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let lowering = OperatorMatrix(a);
    let raising = lowering.adjoint();
    Ok((lowering, raising))
}

pub fn matrix_exponential(m: &OperatorMatrix) -> Result<OperatorMatrix> {
    expm::expm(&m.0).map(OperatorMatrix)
}

/// Number of low basis indices whose matrix elements are unaffected by
/// truncation, to working precision, for displacements up to `max_shift`.
///
/// A number state `|n⟩` displaced by `γ` spreads out to radius `√n + |γ|` in
/// the `√(photon number)` picture; an entry `⟨m|…|n⟩` with both `m` and `n`
/// below `(√dim − |γ|)² / 2` stays clear of the cut-off. The result is
/// clamped to `1..=dim/2`.
pub fn reliable_block(dim: usize, max_shift: f64) -> usize {
    let room = ((dim as f64).sqrt() - max_shift).max(0.0);
    let block = (room * room / 2.0).floor() as usize;
    block.clamp(1, (dim / 2).max(1))
}

/// `D(α) = exp(α a† − α* a)`.
pub fn displacement_operator(alpha: DisplacementAmplitude, dim: usize) -> Result<OperatorMatrix> {
    check_dim(dim)?;
    alpha.check_guard(dim)?;
    let (a, ad) = ladder_operators(dim)?;
    let z = alpha.value();
    let generator = OperatorMatrix(&ad.0 * z - &a.0 * z.conj());
    let mut d = matrix_exponential(&generator)?;
    // Keep D(−α) = D(α)† exact: average the two routes to the adjoint.
    if z != Complex64::new(0.0, 0.0) {
        let neg = matrix_exponential(&generator.scale(Complex64::new(-1.0, 0.0)))?;
        d = OperatorMatrix((d.0 + neg.0.adjoint()) * Complex64::new(0.5, 0.0));
    }
    Ok(d)
}

/// Analytic coherent state `c_n = e^{−|α|²/2} αⁿ/√(n!)`, renormalized over the
/// truncated basis.
pub fn coherent_state(alpha: DisplacementAmplitude, dim: usize) -> Result<StateVector> {
    check_dim(dim)?;
    alpha.check_guard(dim)?;
    let z = alpha.value();
    let prefactor = (-alpha.norm_sqr() / 2.0).exp();
    let mut amps = Vec::with_capacity(dim);
    // c_n = c_{n−1} · α / √n
    let mut c = Complex64::new(prefactor, 0.0);
    for n in 0..dim {
        if n > 0 {
            c = c * z / (n as f64).sqrt();
        }
        amps.push(c);
    }
    StateVector::new(amps)
}

/// The complex scalar λ in `D(β) D(α) = λ D(α+β)`, read from the trace of
/// `D(α+β)† D(β) D(α)` over the reliable block.
pub fn composition_scalar(
    alpha: DisplacementAmplitude,
    beta: DisplacementAmplitude,
    dim: usize,
) -> Result<Complex64> {
    let sum = alpha + beta;
    sum.check_guard(dim)?;
    let da = displacement_operator(alpha, dim)?;
    let db = displacement_operator(beta, dim)?;
    let ds = displacement_operator(sum, dim)?;
    let product = &(&ds.adjoint() * &db) * &da;

    let shift = alpha.value().norm().max(beta.value().norm()).max(sum.value().norm());
    let block = reliable_block(dim, shift);
    let trace: Complex64 = (0..block).map(|n| product.0[(n, n)]).sum();
    Ok(trace / block as f64)
}

/// Phase θ of `D(β) D(α) = e^{iθ} D(α+β)`; equals `Im(α* β)` mod 2π.
pub fn composition_phase(
    alpha: DisplacementAmplitude,
    beta: DisplacementAmplitude,
    dim: usize,
) -> Result<f64> {
    composition_scalar(alpha, beta, dim).map(|l| phase::wrap(l.arg()))
}

/// The loop operator `D(−β) D(−α) D(β) D(α)`.
pub fn loop_operator(
    alpha: DisplacementAmplitude,
    beta: DisplacementAmplitude,
    dim: usize,
) -> Result<OperatorMatrix> {
    let da = displacement_operator(alpha, dim)?;
    let db = displacement_operator(beta, dim)?;
    // D(−γ) = D(γ)†
    Ok(&(&(&db.adjoint() * &da.adjoint()) * &db) * &da)
}

/// `⟨ψ| D(−β) D(−α) D(β) D(α) |ψ⟩`.
pub fn loop_overlap(
    alpha: DisplacementAmplitude,
    beta: DisplacementAmplitude,
    state: &StateVector,
) -> Result<Complex64> {
    let dim = state.dim();
    let lo = loop_operator(alpha, beta, dim)?;
    let moved = lo.apply(state);
    Ok(state.inner(&moved))
}

/// Closed-loop phase `φ_c = 2 Im(α* β)` in (−π, π], read from the overlap of
/// the transported state with the original.
pub fn loop_phase(
    alpha: DisplacementAmplitude,
    beta: DisplacementAmplitude,
    state: &StateVector,
) -> Result<f64> {
    let overlap = loop_overlap(alpha, beta, state)?;
    if overlap.norm() < MIN_LOOP_OVERLAP {
        return Err(Error::TruncationCorruption {
            overlap: overlap.norm(),
            dim: state.dim(),
        });
    }
    Ok(phase::wrap(overlap.arg()))
}

/// `x̂ = x₀ (a + a†) / 2`.
pub fn position_operator(dim: usize, scales: &OscillatorScales) -> Result<OperatorMatrix> {
    let (a, ad) = ladder_operators(dim)?;
    Ok(OperatorMatrix((a.0 + ad.0) * Complex64::new(scales.x0() / 2.0, 0.0)))
}

/// `p̂ = p₀ (a − a†) / (2i)`.
pub fn momentum_operator(dim: usize, scales: &OscillatorScales) -> Result<OperatorMatrix> {
    let (a, ad) = ladder_operators(dim)?;
    Ok(OperatorMatrix((a.0 - ad.0) * (scales.p0() / (2.0 * I))))
}

/// Quantized displacement Hamiltonian `Ĥ = (p̂ X − x̂ P) / T`.
pub fn displacement_hamiltonian_operator(
    x: f64,
    p: f64,
    duration: f64,
    scales: &OscillatorScales,
    dim: usize,
) -> Result<OperatorMatrix> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidDuration(duration));
    }
    let xo = position_operator(dim, scales)?;
    let po = momentum_operator(dim, scales)?;
    let h = (po.0 * Complex64::new(x, 0.0) - xo.0 * Complex64::new(p, 0.0)) / Complex64::new(duration, 0.0);
    Ok(OperatorMatrix(h))
}

/// `exp(−i Ĥ T / ħ)` for the quantized displacement Hamiltonian; agrees with
/// `D(X/x₀ + i P/p₀)` for every `T`.
pub fn displacement_from_hamiltonian(
    x: f64,
    p: f64,
    duration: f64,
    scales: &OscillatorScales,
    dim: usize,
) -> Result<OperatorMatrix> {
    if !x.is_finite() || !p.is_finite() {
        return Err(Error::NonFinite("displacement (X, P)"));
    }
    let h = displacement_hamiltonian_operator(x, p, duration, scales, dim)?;
    DisplacementAmplitude::from_phase_space(x, p, scales).check_guard(dim)?;
    let exponent = h.scale(-I * duration / scales.hbar());
    matrix_exponential(&exponent)
}
