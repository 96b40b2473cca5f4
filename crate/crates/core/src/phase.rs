//! Phase conventions shared by every engine.

use std::f64::consts::{PI, TAU};

/// Reduces an angle to the half-open interval (−π, π].
pub fn wrap(phi: f64) -> f64 {
    let r = (phi + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Smallest signed distance between two angles, in (−π, π].
pub fn distance(a: f64, b: f64) -> f64 {
    wrap(a - b)
}

/// Continues `phases` so that no adjacent pair differs by more than π.
///
/// The first element is kept as-is; each following element is shifted by the
/// multiple of 2π that brings it nearest to its predecessor.
pub fn unwrap(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut prev: Option<f64> = None;
    for &p in phases {
        let v = match prev {
            None => p,
            Some(q) => q + wrap(p - q),
        };
        out.push(v);
        prev = Some(v);
    }
    out
}
