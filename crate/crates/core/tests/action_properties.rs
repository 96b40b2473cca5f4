use dcplab::action::{
    displacement_hamiltonian, integrate_loop, integrate_trajectory, loop_action, segment_action,
    shoelace_area,
};
use dcplab::{LinearHamiltonian, PhasePoint, PolygonPath};
use proptest::prelude::*;

/// Star-shaped, hence simple, counter-clockwise polygon. Vertex `i` sits at
/// angle `2π(i + jitter_i)/n` with `jitter_i < 1/2`, so every angular gap is
/// below π and the center stays inside.
fn star_polygon(jitter: &[f64], radii: &[f64], center: (f64, f64)) -> PolygonPath {
    let n = jitter.len() as f64;
    let vertices = jitter
        .iter()
        .zip(radii)
        .enumerate()
        .map(|(i, (&u, &r))| {
            let t = std::f64::consts::TAU * (i as f64 + u) / n;
            PhasePoint::new(center.0 + r * t.cos(), center.1 + r * t.sin())
        })
        .collect();
    PolygonPath::closed_loop(vertices).unwrap()
}

fn polygon() -> impl Strategy<Value = PolygonPath> {
    (3usize..=12).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..0.5, n),
            prop::collection::vec(0.2f64..3.0, n),
            (-5.0f64..5.0, -5.0f64..5.0),
        )
            .prop_map(|(a, r, c)| star_polygon(&a, &r, c))
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oblique_segment_matches_integration(
        x0 in -5.0f64..5.0, p0 in -5.0f64..5.0, dx in -5.0f64..5.0, dp in -5.0f64..5.0, t in 0.01f64..100.0
    ) {
        let h = displacement_hamiltonian(dx, dp, t).unwrap();
        let start = PhasePoint::new(x0, p0);
        let traj = integrate_trajectory(&h, start, t, 100).unwrap();
        prop_assert!((traj.end.x - (x0 + dx)).abs() < 1e-10 && (traj.end.p - (p0 + dp)).abs() < 1e-10);
        let closed = segment_action(start, traj.end);
        prop_assert!((traj.action - closed).abs() <= 1e-10 * closed.abs().max(1.0));
    }

    #[test]
    fn energy_is_conserved(cp in -3.0f64..3.0, cx in -3.0f64..3.0, x0 in -2.0f64..2.0, p0 in -2.0f64..2.0) {
        let h = LinearHamiltonian::new(cp, cx);
        let traj = integrate_trajectory(&h, PhasePoint::new(x0, p0), 2.5, 50).unwrap();
        let e0 = h.value(traj.waypoints[0]);
        for w in &traj.waypoints {
            prop_assert!((h.value(*w) - e0).abs() <= 1e-10 * e0.abs().max(1.0));
        }
    }

    #[test]
    fn action_equals_area(path in polygon()) {
        let area = shoelace_area(&path).unwrap();
        prop_assert!(area > 0.0);
        prop_assert!(rel(loop_action(&path).unwrap(), area) < 1e-12);
    }

    #[test]
    fn orientation_flips_sign(path in polygon()) {
        let fwd = loop_action(&path).unwrap();
        let back = loop_action(&path.reversed()).unwrap();
        prop_assert!(rel(-back, fwd) < 1e-12);
    }

    #[test]
    fn translation_invariant(path in polygon(), dx in -10.0f64..10.0, dp in -10.0f64..10.0) {
        let a = loop_action(&path).unwrap();
        let b = loop_action(&path.translated(dx, dp)).unwrap();
        prop_assert!(rel(b, a) < 1e-11);
    }

    #[test]
    fn durations_cancel(path in polygon(), factor in 1e-3f64..1e3) {
        let a = integrate_loop(&path, 100).unwrap();
        let b = integrate_loop(&path.with_scaled_durations(factor).unwrap(), 100).unwrap();
        let area = shoelace_area(&path).unwrap();
        prop_assert!(rel(a, area) < 1e-10);
        prop_assert!(rel(b, area) < 1e-10);
    }
}

#[test]
fn two_rectangles_tile_their_union() {
    // Dyadic sides keep every product exact.
    let corner = PhasePoint::new(-0.4, 1.1);
    let (w1, w2, h) = (0.75, 1.5, 2.25);
    let left = PolygonPath::rectangle(corner, w1, h).unwrap();
    let right = PolygonPath::rectangle(corner.translated(w1, 0.0), w2, h).unwrap();
    let whole = PolygonPath::rectangle(corner, w1 + w2, h).unwrap();
    let sum = loop_action(&left).unwrap() + loop_action(&right).unwrap();
    assert_eq!(sum, loop_action(&whole).unwrap());
}
