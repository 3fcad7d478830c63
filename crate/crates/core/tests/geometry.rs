use isoembed::intrinsic::{
    covariant_antisym, curvature, diameter, max_abs, sampled_sectional_extremes, GeodesicGraph, MetricSource,
    Scaled,
};
use isoembed::jets::JetMatrix;
use isoembed::surfaces::{
    codazzi_residual, evaluate, gauss_residual, sample_points, support_identities, Chart, ChartPoint, Family,
    Profile, RoundMetric,
};
use nalgebra::DMatrix;
use std::f64::consts::PI;

const ELLIPSOID: [f64; 4] = [1.0, 1.3, 0.8, 1.1];

fn radial_test_family() -> Family {
    // u = 1 + 0.2·x̂₁ − 0.1·x̂₄ + ½·x̂ᵀMx̂ with small M keeps χ positive.
    Family::radial(
        3,
        Profile::Quadratic {
            c0: 1.0,
            b: vec![0.2, 0.0, 0.0, -0.1],
            m: vec![
                vec![0.3, 0.05, 0.0, 0.0],
                vec![0.05, -0.1, 0.0, 0.0],
                vec![0.0, 0.0, 0.2, 0.0],
                vec![0.0, 0.0, 0.0, 0.0],
            ],
        },
    )
}

#[test]
fn embedded_identities_on_ellipsoid_samples() {
    let f = Family::ellipsoid(&ELLIPSOID);
    for p in sample_points(3, 50, 1.8, 11) {
        let sp = evaluate(&f, &p).unwrap();
        assert!(gauss_residual(&sp).unwrap() <= 1e-8, "gauss at {p:?}");
        assert!(codazzi_residual(&sp).unwrap() <= 1e-8, "codazzi at {p:?}");
        let s = support_identities(&sp).unwrap();
        assert!(s.max() <= 1e-8, "support identities {s:?} at {p:?}");
        assert!(s.in_gamma2);
        assert!(sp.normal_identity_residual().unwrap() <= 1e-10);
        assert!(sp.isometry_residual() <= 1e-12);
        assert!(sp.normal_length_error() <= 1e-12);
        assert!(sp.support > 0.0);
    }
}

#[test]
fn radial_graph_identities() {
    let f = radial_test_family();
    for p in sample_points(3, 40, 1.8, 5) {
        let sp = evaluate(&f, &p).unwrap();
        assert!(sp.principal_curvatures().unwrap()[0] > 0.0);
        assert!(gauss_residual(&sp).unwrap() <= 1e-7);
        assert!(codazzi_residual(&sp).unwrap() <= 1e-7);
        assert!(support_identities(&sp).unwrap().max() <= 1e-7);
        // The closed-form metric agrees with the pullback of the embedding,
        // and the closed-form χ with −∂ᵢ∂ⱼX·N.
        assert!(sp.isometry_residual() <= 1e-12);
        assert!(sp.normal_identity_residual().unwrap() <= 1e-10);
    }
}

#[test]
fn ellipsoid_two_parametrizations_agree() {
    let direct = Family::ellipsoid(&ELLIPSOID);
    let graph = Family::radial(3, Profile::EllipsoidGauge { axes: ELLIPSOID.to_vec() });
    for p in sample_points(3, 30, 1.5, 3) {
        let a = evaluate(&direct, &p).unwrap();
        let x = a.position();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dir: Vec<f64> = x.iter().map(|v| v / r).collect();
        let chart = if dir[3] >= 0.0 { Chart::North } else { Chart::South };
        let b = evaluate(&graph, &ChartPoint::from_sphere(chart, &dir)).unwrap();
        for (u, v) in a.position().iter().zip(b.position()) {
            assert!((u - v).abs() < 1e-12);
        }
        assert!((a.mean_curvature() - b.mean_curvature()).abs() < 1e-10);
        assert!((a.support - b.support).abs() < 1e-12);
        let (ra, rb) = (a.curvature().unwrap().scalar, b.curvature().unwrap().scalar);
        assert!((ra - rb).abs() < 1e-9, "{ra} vs {rb}");
    }
}

#[test]
fn chart_overlap_consistency() {
    let f = Family::ellipsoid(&[1.0, 1.2, 0.9, 1.05]);
    for coords in [[0.9, 0.5, -0.3], [-0.7, 0.8, 0.4], [0.2, -1.0, 0.6]] {
        let p = ChartPoint::north(&coords);
        let (a, b) = (evaluate(&f, &p).unwrap(), evaluate(&f, &p.transition()).unwrap());
        let (ca, cb) = (a.curvature().unwrap(), b.curvature().unwrap());
        assert!((a.mean_curvature() - b.mean_curvature()).abs() < 1e-10);
        assert!((ca.scalar - cb.scalar).abs() < 1e-10);
        assert!((a.support - b.support).abs() < 1e-10);
        assert!((a.rho.value() - b.rho.value()).abs() < 1e-10);
        assert!((ca.laplacian_scalar.unwrap() - cb.laplacian_scalar.unwrap()).abs() < 1e-8);
    }
}

#[test]
fn intrinsic_scalar_matches_gauss_contraction() {
    let f = Family::ellipsoid(&ELLIPSOID);
    for p in sample_points(3, 40, 1.8, 8) {
        let sp = evaluate(&f, &p).unwrap();
        let cs = sp.curvature().unwrap();
        let h = sp.mean_curvature();
        assert!(cs.scalar > 0.0);
        assert!((cs.scalar - (h * h - sp.chi_norm_sq())).abs() < 1e-8);
        // Ric = Hχ − χ g⁻¹ χ
        let g = sp.metric_value();
        let chi = sp.chi_value();
        let expect = &chi * h - &chi * g.try_inverse().unwrap() * &chi;
        assert!((cs.ricci.to_dense() - expect).abs().max() < 1e-8);
        assert!(cs.bianchi_residual() < 1e-10);
    }
}

#[test]
fn ricci_eigenvalues_are_sums_of_frame_sectional_curvatures() {
    let f = Family::ellipsoid(&ELLIPSOID);
    let sp = evaluate(&f, &ChartPoint::north(&[0.4, -0.2, 0.7])).unwrap();
    let cs = sp.curvature().unwrap();
    let g = sp.metric_value();
    // Eigenvectors of g⁻¹Ric in a g-orthonormal frame.
    let frame = isoembed::intrinsic::orthonormal_frame(&g).unwrap();
    let ric = frame.transpose() * cs.ricci.to_dense() * &frame;
    let eig = ((&ric + ric.transpose()) * 0.5).symmetric_eigen();
    let basis = &frame * &eig.eigenvectors;
    for i in 0..3 {
        let mut sum = 0.0;
        for j in 0..3 {
            if i != j {
                let (u, v) = (basis.column(i).into_owned(), basis.column(j).into_owned());
                sum += isoembed::intrinsic::sectional_curvature(&cs, u.as_slice(), v.as_slice());
            }
        }
        assert!((sum - eig.eigenvalues[i]).abs() < 1e-10);
    }
}

#[test]
fn anisotropic_metric_has_distinct_sectional_extremes() {
    let f = Family::ellipsoid(&[1.0, 1.6, 0.7, 1.2]);
    let cs = evaluate(&f, &ChartPoint::north(&[0.3, 0.2, -0.1])).unwrap().curvature().unwrap();
    assert!(cs.sectional_exact);
    assert!(cs.sectional_min < cs.sectional_max - 1e-3);
    let (lo, hi) = sampled_sectional_extremes(&cs, 2000, 9).unwrap();
    assert!((lo - cs.sectional_min).abs() < 1e-6);
    assert!((hi - cs.sectional_max).abs() < 1e-6);
}

#[test]
fn codazzi_defect_of_perturbed_tensor() {
    let f = Family::ellipsoid(&ELLIPSOID);
    for coords in [[0.5, 0.3, 0.2], [-0.6, 0.4, 0.9], [0.8, -0.5, -0.3]] {
        let p = ChartPoint::north(&coords);
        let sp = evaluate(&f, &p).unwrap();
        let chi = sp.chi.truncate(1);
        assert!(max_abs(&covariant_antisym(&sp.metric, &chi).unwrap()) <= 1e-8);
        let x0 = isoembed::jets::Jet::lift(&coords, 0, 1).unwrap();
        let perturbed = JetMatrix::from_fn(3, 3, |i, j| {
            let base = *chi.get(i, j);
            if i == 0 && j == 0 {
                base + x0.scale(0.1)
            } else {
                base
            }
        });
        let defect = max_abs(&covariant_antisym(&sp.metric, &perturbed).unwrap());
        assert!(defect > 1e-3, "defect {defect} at {coords:?}");
    }
}

#[test]
fn round_three_sphere_diameter() {
    let gg = GeodesicGraph::build(&RoundMetric { dim: 3, radius: 1.0 }, 17, 1.8).unwrap();
    assert!(gg.is_connected());
    let d = diameter(&gg).unwrap();
    assert!(d.value >= PI && d.value <= 1.10 * PI, "diameter {}", d.value);
    assert_eq!(d.sources, 64);
}

#[test]
fn round_two_sphere_diameter_and_scaling() {
    let round = RoundMetric { dim: 2, radius: 2.0 };
    let gg = GeodesicGraph::build(&round, 33, 1.8).unwrap();
    let d = diameter(&gg).unwrap().value;
    assert!((2.0 * PI..=1.10 * 2.0 * PI).contains(&d), "diameter {d}");
    let c = 1.7;
    let scaled = Scaled { inner: &round, c2: c * c };
    let ds = diameter(&GeodesicGraph::build(&scaled, 33, 1.8).unwrap()).unwrap().value;
    assert!((ds - c * d).abs() <= 1e-12 * ds, "{ds} vs {}", c * d);
}

#[test]
fn diameter_does_not_grow_under_refinement() {
    let round = RoundMetric { dim: 2, radius: 1.0 };
    let coarse = diameter(&GeodesicGraph::build(&round, 9, 1.8).unwrap()).unwrap().value;
    let fine = diameter(&GeodesicGraph::build(&round, 17, 1.8).unwrap()).unwrap().value;
    assert!(fine <= coarse + 1e-12, "coarse {coarse}, fine {fine}");
    assert!(fine >= PI);
}

#[test]
fn scaling_law_on_round_sphere() {
    let p = ChartPoint::north(&[0.3, 0.1, -0.4]);
    let base = RoundMetric { dim: 3, radius: 1.0 };
    let c = 1.3;
    let a = curvature(&base.metric_jet(&p, 4).unwrap()).unwrap();
    let b = curvature(&Scaled { inner: &base, c2: c * c }.metric_jet(&p, 4).unwrap()).unwrap();
    assert!((b.scalar * c * c - a.scalar).abs() < 1e-10 * a.scalar);
    assert!((b.laplacian_scalar.unwrap() * c.powi(4) - a.laplacian_scalar.unwrap()).abs() < 1e-10);
}

#[test]
fn metric_value_from_family_matches_surface_point() {
    let f = Family::ellipsoid(&ELLIPSOID);
    let p = ChartPoint::new(Chart::South, vec![0.2, -0.9, 0.5]);
    let a: DMatrix<f64> = f.metric_value(&p).unwrap();
    let b = evaluate(&f, &p).unwrap().metric_value();
    assert!((a - b).abs().max() < 1e-14);
}
