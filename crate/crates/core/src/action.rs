//! Classical action along polygonal phase-space paths.
//!
//! A straight segment from `(x, p)` to `(x + ΔX, p + ΔP)` is the flow of the
//! linear Hamiltonian `H = (p ΔX − x ΔP) / T` for a time `T`. Integrating
//! `∫ p dx − H dt` along that flow gives
//!
//! ```text
//! S = ΔX (p + ΔP/2) − (p ΔX − x ΔP) = x ΔP + ΔX ΔP / 2
//! ```
//!
//! independent of `T`. Summed around a closed polygon this is the trapezoid
//! rule for `∮ x dp`, i.e. the signed enclosed area.

use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};
use crate::numfmt::sig17;
use crate::phase;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint { x: 0.0, p: 0.0 };

    pub fn new(x: f64, p: f64) -> Self {
        Self { x, p }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.p.is_finite()
    }

    pub fn translated(self, dx: f64, dp: f64) -> Self {
        Self::new(self.x + dx, self.p + dp)
    }
}

/// `H(x, p) = coeff_p · p + coeff_x · x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearHamiltonian {
    pub coeff_p: f64,
    pub coeff_x: f64,
}

impl LinearHamiltonian {
    pub fn new(coeff_p: f64, coeff_x: f64) -> Self {
        Self { coeff_p, coeff_x }
    }

    pub fn value(&self, at: PhasePoint) -> f64 {
        self.coeff_p * at.p + self.coeff_x * at.x
    }

    /// `(ẋ, ṗ) = (∂H/∂p, −∂H/∂x)`; constant for a linear `H`.
    pub fn velocity(&self) -> (f64, f64) {
        (self.coeff_p, -self.coeff_x)
    }

    /// Exact flow for time `t`.
    pub fn flow(&self, start: PhasePoint, t: f64) -> PhasePoint {
        let (vx, vp) = self.velocity();
        PhasePoint::new(start.x + vx * t, start.p + vp * t)
    }
}

/// Hamiltonian whose flow moves every point by `(dx, dp)` in time `duration`.
pub fn displacement_hamiltonian(dx: f64, dp: f64, duration: f64) -> Result<LinearHamiltonian> {
    check_duration(duration)?;
    Ok(LinearHamiltonian::new(dx / duration, -dp / duration))
}

fn check_duration(duration: f64) -> Result<()> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidDuration(duration));
    }
    Ok(())
}

/// Closed-form action of the displacement flow from `start` to `end`.
pub fn segment_action(start: PhasePoint, end: PhasePoint) -> f64 {
    let dx = end.x - start.x;
    let dp = end.p - start.p;
    start.x * dp + dx * dp / 2.0
}

/// Ordered phase-space vertices joined by straight displacement segments.
///
/// Closed paths carry one duration per vertex, the last one for the implicit
/// segment back to `vertices[0]`. Open paths carry one fewer.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonPath {
    vertices: Vec<PhasePoint>,
    durations: Vec<f64>,
    closed: bool,
}

impl PolygonPath {
    pub fn new(vertices: Vec<PhasePoint>, durations: Vec<f64>, closed: bool) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::DegeneratePath {
                vertices: vertices.len(),
            });
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("path vertex"));
        }
        let segments = if closed { vertices.len() } else { vertices.len() - 1 };
        if durations.len() != segments {
            return Err(Error::InvalidParameter(format!(
                "{} durations for {segments} segments",
                durations.len()
            )));
        }
        for &d in &durations {
            check_duration(d)?;
        }
        Ok(Self {
            vertices,
            durations,
            closed,
        })
    }

    /// Closed loop with every segment lasting one time unit.
    pub fn closed_loop(vertices: Vec<PhasePoint>) -> Result<Self> {
        let n = vertices.len();
        Self::new(vertices, vec![1.0; n], true)
    }

    /// Counter-clockwise rectangle `A → B → C → D` starting at `corner`.
    pub fn rectangle(corner: PhasePoint, width: f64, height: f64) -> Result<Self> {
        Self::closed_loop(vec![
            corner,
            corner.translated(width, 0.0),
            corner.translated(width, height),
            corner.translated(0.0, height),
        ])
    }

    pub fn vertices(&self) -> &[PhasePoint] {
        &self.vertices
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// `(start, end, duration)` for every segment, closing segment included.
    pub fn segments(&self) -> impl Iterator<Item = (PhasePoint, PhasePoint, f64)> + '_ {
        let n = self.vertices.len();
        self.durations
            .iter()
            .enumerate()
            .map(move |(i, &d)| (self.vertices[i], self.vertices[(i + 1) % n], d))
    }

    /// Same loop traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let mut durations = self.durations.clone();
        if self.closed {
            // Segment i of the reversed loop retraces old segment n−2−i.
            let n = durations.len();
            durations = (0..n).map(|i| self.durations[(2 * n - 2 - i) % n]).collect();
        } else {
            durations.reverse();
        }
        Self {
            vertices,
            durations,
            closed: self.closed,
        }
    }

    pub fn translated(&self, dx: f64, dp: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v.translated(dx, dp)).collect(),
            durations: self.durations.clone(),
            closed: self.closed,
        }
    }

    pub fn with_scaled_durations(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.vertices.clone(),
            self.durations.iter().map(|d| d * factor).collect(),
            self.closed,
        )
    }

    /// Reads a closed loop from `x,p,duration` rows. A non-numeric first data
    /// row is taken as a header; blank lines and `#` comments are skipped.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut durations = Vec::new();
        let mut first = true;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let header_allowed = std::mem::take(&mut first);
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> =
                fields.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) if v.len() == 3 => {
                    vertices.push(PhasePoint::new(v[0], v[1]));
                    durations.push(v[2]);
                }
                Err(_) if header_allowed => continue,
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: expected x,p,duration, got {line:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(vertices, durations, true)
    }

    /// Writes `x,p,duration` rows; the duration of an open path's last vertex
    /// is left empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,p,duration")?;
        for (i, v) in self.vertices.iter().enumerate() {
            let d = self.durations.get(i).map(|&d| sig17(d)).unwrap_or_default();
            writeln!(w, "{},{},{d}", sig17(v.x), sig17(v.p))?;
        }
        Ok(())
    }
}

fn require_closed(path: &PolygonPath) -> Result<()> {
    if !path.closed {
        return Err(Error::NotClosed);
    }
    Ok(())
}

/// Closed-form action of every segment, in order.
pub fn segment_actions(path: &PolygonPath) -> Vec<f64> {
    path.segments().map(|(a, b, _)| segment_action(a, b)).collect()
}

/// Total action around a closed path.
///
/// The sum is taken with coordinates relative to the first vertex. For a
/// closed loop `Σ ΔP = 0`, so the shift leaves the exact total unchanged
/// while avoiding cancellation for small loops far from the origin.
pub fn loop_action(path: &PolygonPath) -> Result<f64> {
    require_closed(path)?;
    let o = path.vertices[0];
    let local = |v: PhasePoint| PhasePoint::new(v.x - o.x, v.p - o.p);
    Ok(path
        .segments()
        .map(|(a, b, _)| segment_action(local(a), local(b)))
        .sum())
}

/// Signed polygon area in the `(x, p)` plane, positive counter-clockwise.
pub fn shoelace_area(path: &PolygonPath) -> Result<f64> {
    require_closed(path)?;
    let v = &path.vertices;
    if v.len() < 3 {
        return Err(Error::DegeneratePath { vertices: v.len() });
    }
    let n = v.len();
    let o = v[0];
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            (a.x - o.x) * (b.p - o.p) - (b.x - o.x) * (a.p - o.p)
        })
        .sum();
    Ok(twice / 2.0)
}

/// `e^{iS/ħ}` phase of a closed loop, in (−π, π].
pub fn quantum_phase_of_loop(path: &PolygonPath, hbar: f64) -> Result<f64> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
    }
    Ok(phase::wrap(loop_action(path)? / hbar))
}

/// Output of a fixed-step integration.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub end: PhasePoint,
    /// `∫ (p ẋ − H) dt`.
    pub action: f64,
    /// Every step boundary, `start` and `end` included.
    pub waypoints: Vec<PhasePoint>,
}

/// Classical fourth-order Runge–Kutta on `(x, p, S)` with
/// `Ṡ = p ẋ − H(x, p)`.
pub fn integrate_trajectory(
    h: &LinearHamiltonian,
    start: PhasePoint,
    duration: f64,
    steps: usize,
) -> Result<Trajectory> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "duration must be positive, got {duration}"
        )));
    }
    if steps < 10 {
        return Err(Error::InvalidParameter(format!(
            "need at least 10 steps, got {steps}"
        )));
    }
    if !start.is_finite() {
        return Err(Error::NonFinite("trajectory start"));
    }

    let rhs = |s: [f64; 3]| -> [f64; 3] {
        let at = PhasePoint::new(s[0], s[1]);
        let (vx, vp) = h.velocity();
        [vx, vp, at.p * vx - h.value(at)]
    };
    let axpy = |s: [f64; 3], k: [f64; 3], a: f64| [s[0] + a * k[0], s[1] + a * k[1], s[2] + a * k[2]];

    let dt = duration / steps as f64;
    let mut state = [start.x, start.p, 0.0];
    let mut waypoints = Vec::with_capacity(steps + 1);
    waypoints.push(start);
    for _ in 0..steps {
        let k1 = rhs(state);
        let k2 = rhs(axpy(state, k1, dt / 2.0));
        let k3 = rhs(axpy(state, k2, dt / 2.0));
        let k4 = rhs(axpy(state, k3, dt));
        for i in 0..3 {
            state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        waypoints.push(PhasePoint::new(state[0], state[1]));
    }
    Ok(Trajectory {
        end: PhasePoint::new(state[0], state[1]),
        action: state[2],
        waypoints,
    })
}

/// Loop action obtained by integrating each segment's displacement flow.
pub fn integrate_loop(path: &PolygonPath, steps: usize) -> Result<f64> {
    require_closed(path)?;
    let mut total = 0.0;
    for (a, b, t) in path.segments() {
        let h = displacement_hamiltonian(b.x - a.x, b.p - a.p, t)?;
        total += integrate_trajectory(&h, a, t, steps)?.action;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pt(x: f64, p: f64) -> PhasePoint {
        PhasePoint::new(x, p)
    }

    #[test]
    fn hamiltonian_legs() {
        let zero = displacement_hamiltonian(0.0, 0.0, 3.0).unwrap();
        assert_eq!(zero.flow(pt(1.0, 2.0), 3.0), pt(1.0, 2.0));

        // A → B: H = pX/T
        let h = displacement_hamiltonian(2.0, 0.0, 4.0).unwrap();
        assert_eq!(h, LinearHamiltonian::new(0.5, 0.0));
        assert_eq!(h.value(pt(7.0, 3.0)), 3.0 * 2.0 / 4.0);

        // B → C: H = −xP/T
        let h = displacement_hamiltonian(0.0, 3.0, 2.0).unwrap();
        assert_eq!(h.value(pt(5.0, 1.0)), -5.0 * 3.0 / 2.0);
        assert_eq!(h.flow(pt(5.0, 1.0), 2.0), pt(5.0, 4.0));

        assert_eq!(
            displacement_hamiltonian(1.0, 1.0, 0.0),
            Err(Error::InvalidDuration(0.0))
        );
    }

    #[test]
    fn rectangle_leg_actions() {
        let (x0, p0, x, p) = (0.7, -1.3, 2.0, 0.5);
        let a = pt(x0, p0);
        let b = pt(x0 + x, p0);
        let c = pt(x0 + x, p0 + p);
        let d = pt(x0, p0 + p);
        assert_eq!(segment_action(a, b), 0.0);
        assert!((segment_action(b, c) - (x0 + x) * p).abs() < 1e-15);
        assert_eq!(segment_action(c, d), 0.0);
        assert!((segment_action(d, a) + x0 * p).abs() < 1e-15);
    }

    #[test]
    fn loop_action_examples() {
        let rect = PolygonPath::rectangle(pt(0.3, 0.4), 2.0, 1.5).unwrap();
        assert!((loop_action(&rect).unwrap() - 3.0).abs() < 1e-12 * 3.0);

        let back = PolygonPath::closed_loop(vec![pt(0.0, 0.0), pt(1.0, 1.0), pt(0.0, 0.0)]).unwrap();
        assert_eq!(loop_action(&back).unwrap(), 0.0);

        let tri = PolygonPath::closed_loop(vec![pt(0.0, 0.0), pt(2.0, 0.0), pt(2.0, 3.0)]).unwrap();
        assert!((loop_action(&tri).unwrap() - 3.0).abs() < 1e-15);
        assert!((shoelace_area(&tri).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn open_path_is_rejected() {
        let open = PolygonPath::new(vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0)], vec![1.0, 1.0], false).unwrap();
        assert_eq!(loop_action(&open), Err(Error::NotClosed));
        assert_eq!(quantum_phase_of_loop(&open, 1.0), Err(Error::NotClosed));
    }

    #[test]
    fn shoelace_examples() {
        let sq = PolygonPath::rectangle(pt(0.0, 0.0), 1.0, 1.0).unwrap();
        assert_eq!(shoelace_area(&sq).unwrap(), 1.0);
        assert_eq!(shoelace_area(&sq.reversed()).unwrap(), -1.0);

        let hex: Vec<_> = (0..6)
            .map(|k| {
                let t = PI / 3.0 * k as f64;
                pt(t.cos(), t.sin())
            })
            .collect();
        let hex = PolygonPath::closed_loop(hex).unwrap();
        assert!((shoelace_area(&hex).unwrap() - 3.0 * 3f64.sqrt() / 2.0).abs() < 1e-12);

        let two = PolygonPath::closed_loop(vec![pt(0.0, 0.0), pt(1.0, 0.0)]).unwrap();
        assert_eq!(shoelace_area(&two), Err(Error::DegeneratePath { vertices: 2 }));
    }

    #[test]
    fn integrator_examples() {
        let zero = LinearHamiltonian::new(0.0, 0.0);
        let t = integrate_trajectory(&zero, pt(1.0, 2.0), 5.0, 10).unwrap();
        assert_eq!(t.end, pt(1.0, 2.0));
        assert_eq!(t.action, 0.0);

        let (x0, p0, x) = (0.4, 1.7, 2.5);
        let h = displacement_hamiltonian(x, 0.0, 3.0).unwrap();
        let t = integrate_trajectory(&h, pt(x0, p0), 3.0, 100).unwrap();
        assert!((t.end.x - (x0 + x)).abs() < 1e-12 && (t.end.p - p0).abs() < 1e-12);
        assert!(t.action.abs() < 1e-12);
        assert_eq!(t.waypoints.len(), 101);
    }

    #[test]
    fn integrator_rejects_bad_parameters() {
        let h = LinearHamiltonian::new(1.0, 1.0);
        assert!(integrate_trajectory(&h, PhasePoint::ORIGIN, 0.0, 100).is_err());
        assert!(integrate_trajectory(&h, PhasePoint::ORIGIN, 1.0, 9).is_err());
    }

    #[test]
    fn reversed_closed_keeps_segment_durations() {
        let path = PolygonPath::new(
            vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0)],
            vec![1.0, 2.0, 3.0],
            true,
        )
        .unwrap();
        let r = path.reversed();
        let fwd: Vec<_> = path.segments().map(|(a, b, d)| ((b, a), d)).collect();
        for (a, b, d) in r.segments() {
            assert!(fwd.contains(&((a, b), d)));
        }
    }

    #[test]
    fn quantum_phase_quarter_turn() {
        let hbar = 0.25;
        let rect = PolygonPath::rectangle(pt(-1.0, 2.0), 1.0, hbar * PI / 2.0).unwrap();
        assert!((quantum_phase_of_loop(&rect, hbar).unwrap() - PI / 2.0).abs() < 1e-12);
        let flat = PolygonPath::closed_loop(vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0)]).unwrap();
        assert_eq!(quantum_phase_of_loop(&flat, hbar).unwrap(), 0.0);
    }

    #[test]
    fn csv_round_trip_and_header() {
        let text = "x,p,duration\n0,0,1\n# comment\n2,0,0.5\n\n2,3,2\n";
        let path = PolygonPath::read_csv(text.as_bytes()).unwrap();
        assert_eq!(path.vertices().len(), 3);
        assert_eq!(path.durations(), &[1.0, 0.5, 2.0]);
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let back = PolygonPath::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, path);

        let commented = "# leading comment\n\nx,p,duration\n0,0,1\n1,0,1\n0,1,1\n";
        assert_eq!(PolygonPath::read_csv(commented.as_bytes()).unwrap().vertices().len(), 3);
        assert!(PolygonPath::read_csv("0,0,1\nx,p,duration\n1,0,1\n".as_bytes()).is_err());
        assert!(PolygonPath::read_csv("0,0,1\n1,x,1\n".as_bytes()).is_err());
        assert!(PolygonPath::read_csv("0,0,1\n1,1,0\n".as_bytes()).is_err());
    }
}
