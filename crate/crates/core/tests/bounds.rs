use isoembed::bounds::{
    c2bound_report, guanli_report, second_deriv_report, support_floor, weyl_report, Sample,
};
use isoembed::intrinsic::{diameter, GeodesicGraph};
use isoembed::surfaces::{sample_points, ChartGrid, Family};
use std::f64::consts::PI;

fn sphere_sample(dim: usize, radius: f64) -> Sample {
    let grid = ChartGrid::new(dim, 7, 1.8).unwrap();
    Sample::evaluate(&Family::sphere(dim, radius), &grid.points(), Some(7)).unwrap()
}

#[test]
fn weyl_is_sharp_on_the_round_two_sphere() {
    let w = weyl_report(&sphere_sample(2, 1.0)).unwrap();
    assert!((w.lhs - 4.0).abs() <= 1e-9 && (w.rhs - 4.0).abs() <= 1e-9);
    assert!(w.pass);
}

#[test]
fn round_three_sphere_reference_values() {
    let s = sphere_sample(3, 1.0);
    let w = weyl_report(&s).unwrap();
    assert!((w.lhs - 9.0).abs() <= 1e-9 && (w.rhs - 12.0).abs() <= 1e-9 && w.pass);

    // H = 3, R = 6, ΔR = 0, C = e^{1/2}:
    // C π² (2·36 + 4·6/(64π²)) = e^{1/2}(72π² + 3/8).
    let g = guanli_report(&s, PI).unwrap();
    let expect = 0.5f64.exp() * (72.0 * PI * PI + 0.375);
    assert!((g.rhs - expect).abs() <= 1e-9 * expect);
    assert!((g.rhs - 1172.2).abs() < 0.1);
    assert!((g.lhs - 9.0).abs() <= 1e-9 && g.pass);

    // χ = g: ‖χ‖ = √3; |Ric| = √12, κ = 1, C₃ = 3/(2√2).
    let c = c2bound_report(&s).unwrap();
    assert!((c.lhs - 3f64.sqrt()).abs() <= 1e-9);
    assert!((c.rhs - 3.0 / (2.0 * 2f64.sqrt()) * 12f64.sqrt()).abs() <= 1e-9);
    assert!((c.rhs - 3.674).abs() < 1e-3 && c.pass);
}

#[test]
fn guanli_with_graph_diameter_is_close_to_exact() {
    let s = sphere_sample(3, 1.0);
    let d = diameter(&GeodesicGraph::build(&Family::sphere(3, 1.0), 17, 1.8).unwrap()).unwrap().value;
    let (exact, est) = (guanli_report(&s, PI).unwrap(), guanli_report(&s, d).unwrap());
    assert!(est.rhs >= exact.rhs);
    assert!((est.rhs - exact.rhs) / exact.rhs <= 0.25);
}

#[test]
fn all_bounds_hold_on_ellipsoids() {
    for axes in [[1.0, 1.2, 0.9, 1.05], [1.0, 1.3, 0.8, 1.1], [0.9, 1.0, 1.4, 1.2]] {
        let f = Family::ellipsoid(&axes);
        let grid = ChartGrid::new(3, 7, 1.8).unwrap();
        let s = Sample::evaluate(&f, &grid.points(), Some(7)).unwrap();
        let d = diameter(&GeodesicGraph::build(&f, 9, 1.8).unwrap()).unwrap().value;
        for r in [
            weyl_report(&s).unwrap(),
            guanli_report(&s, d).unwrap(),
            c2bound_report(&s).unwrap(),
            second_deriv_report(&s).unwrap(),
        ] {
            assert!(r.pass, "{} fails on {axes:?}: {} > {}", r.name, r.lhs, r.rhs);
        }
        assert!(support_floor(&s, None).unwrap().value > 0.0);
    }
}

#[test]
fn scaling_the_sphere_rescales_the_bounds() {
    let c = 1.5;
    let (a, b) = (sphere_sample(3, 1.0), sphere_sample(3, c));
    let (wa, wb) = (weyl_report(&a).unwrap(), weyl_report(&b).unwrap());
    assert!((wb.lhs * c * c - wa.lhs).abs() <= 1e-9 && (wb.rhs * c * c - wa.rhs).abs() <= 1e-9);
    // ‖χ‖ scales like c⁻¹.
    let (ca, cb) = (c2bound_report(&a).unwrap(), c2bound_report(&b).unwrap());
    assert!((cb.lhs * c - ca.lhs).abs() <= 1e-9 && (cb.rhs * c - ca.rhs).abs() <= 1e-9);
}

#[test]
fn random_samples_match_grid_extremes_on_the_sphere() {
    let f = Family::sphere(3, 1.0);
    let s = Sample::evaluate(&f, &sample_points(3, 50, 1.8, 3), None).unwrap();
    let w = weyl_report(&s).unwrap();
    assert!((w.lhs - 9.0).abs() <= 1e-9 && w.resolution.is_none() && w.samples == 50);
}
