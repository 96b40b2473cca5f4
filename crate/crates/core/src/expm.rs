//! Matrix exponential by scaling and squaring with diagonal Padé cores.
//!
//! Follows Higham's 2005 selection of Padé degree from the 1-norm: degrees
//! 3, 5, 7, 9 are used when the norm is already small enough, otherwise the
//! matrix is scaled by 2^-s until the degree-13 approximant is accurate and
//! the result is squared back s times.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

type CMatrix = DMatrix<Complex64>;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Maximum absolute column sum.
pub fn norm1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled(m: &CMatrix, s: f64) -> CMatrix {
    m * Complex64::new(s, 0.0)
}

fn add_identity(m: &mut CMatrix, s: f64) {
    for i in 0..m.nrows() {
        m[(i, i)] += s;
    }
}

/// Solves `(V − U) R = (V + U)` for the [m/m] approximant.
fn pade_quotient(u: CMatrix, v: CMatrix) -> Result<CMatrix> {
    let p = &v + &u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::DegenerateInput("singular Padé denominator".into()))
}

fn pade_low(a: &CMatrix, coeffs: &[f64]) -> Result<CMatrix> {
    let n = a.nrows();
    let a2 = a * a;
    // Even powers A^0, A^2, A^4, ...
    let mut pow = CMatrix::identity(n, n);
    let mut u = CMatrix::zeros(n, n);
    let mut v = CMatrix::zeros(n, n);
    for k in 0..coeffs.len() / 2 {
        if k > 0 {
            pow = &pow * &a2;
        }
        u += scaled(&pow, coeffs[2 * k + 1]);
        v += scaled(&pow, coeffs[2 * k]);
    }
    let u = a * u;
    pade_quotient(u, v)
}

fn pade13(a: &CMatrix) -> Result<CMatrix> {
    let b = &B13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let mut inner_u = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    inner_u = &a6 * inner_u;
    inner_u += scaled(&a6, b[7]) + scaled(&a4, b[5]) + scaled(&a2, b[3]);
    add_identity(&mut inner_u, b[1]);
    let u = a * inner_u;

    let mut v = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    v = &a6 * v;
    v += scaled(&a6, b[6]) + scaled(&a4, b[4]) + scaled(&a2, b[2]);
    add_identity(&mut v, b[0]);

    pade_quotient(u, v)
}

/// Computes `exp(m)` for a square complex matrix.
pub fn expm(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::InvalidParameter(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix exponential argument"));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }

    let norm = norm1(m);
    if norm == 0.0 {
        return Ok(CMatrix::identity(n, n));
    }
    for &(degree, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match degree {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(m, coeffs);
        }
    }

    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let a = scaled(m, 2f64.powi(-s));
    let mut r = pade13(&a)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}
