use std::f64::consts::PI;

use proptest::prelude::*;
use spectral_ch::diagnostics::*;
use spectral_ch::geometry::Shape;
use spectral_ch::initial;
use spectral_ch::physics::{self, optimal_profile};
use spectral_ch::spectral::SpectralField;
use spectral_ch::Grid;

#[test]
fn flat_interface_energy_is_c_w() {
    let c_w = physics::asymptotic_constants().c_w;
    assert!((c_w - 1.0 / 6.0).abs() < 1e-8);
    let g = Grid::uniform(1, 1024, 1.0).unwrap();
    for eps in [1.0 / 64.0, 1.0 / 128.0] {
        // a slab has two interfaces
        let slab = Shape::Slab { axis: 0, center: 0.5, half: 0.25 };
        let u: Vec<f64> = slab.sample(&g).iter().map(|d| optimal_profile(d / eps)).collect();
        let e = phase_energy(&g, &mut SpectralField::new(u), eps) / 2.0;
        assert!((e / c_w - 1.0).abs() < 0.02, "{eps}: {e}");
    }
}

#[test]
fn disc_construction_matches_profile() {
    let g = Grid::uniform(2, 128, 1.0).unwrap();
    let eps = 2.0 / 128.0;
    let disc = Shape::ball(&[0.5, 0.5], 0.25);
    let phases = initial::shapes(&g, eps, &[vec![disc.clone()]]).unwrap();
    let dist = disc.sample(&g);
    assert!(profile_error(&phases[0], &dist, eps) < 1e-3);
    // the remainder carries the reversed profile
    let outside: Vec<f64> = dist.iter().map(|d| -d).collect();
    assert!(profile_error(&phases[1], &outside, eps) < 1e-3);
    let geo = level_set_geometry(&g, &phases[0], 0.5).unwrap();
    assert!((geo.isoperimetric_ratio - 1.0).abs() < 0.01);
}

#[test]
fn tube_volumes() {
    let g = Grid::uniform(3, 64, 1.0).unwrap();
    let smoothed = |shape: &Shape, eps: f64| -> f64 {
        g.integrate(&shape.sample(&g).iter().map(|d| optimal_profile(d / eps)).collect::<Vec<_>>())
    };
    let capped = Shape::Tube {
        center: vec![0.5, 0.5, 0.5],
        axis: 0,
        radius: 0.2,
        half_length: Some(0.3),
    };
    let exact = capped.measure(&g).unwrap();
    assert!((exact - PI * 0.2 * 0.2 * 0.6).abs() < 1e-12);
    let volume = smoothed(&capped, 1.0 / 128.0);
    assert!((volume / exact - 1.0).abs() < 0.02, "{volume} vs {exact}");

    // a periodic tube gains (pi^2 / 3) (eps / R)^2 of its volume from the profile
    let infinite = Shape::Tube {
        center: vec![0.5, 0.5, 0.5],
        axis: 0,
        radius: 0.2,
        half_length: None,
    };
    let eps = 1.0 / 64.0;
    let expected = infinite.measure(&g).unwrap() * (1.0 + PI * PI / 3.0 * (eps / 0.2f64).powi(2));
    let volume = smoothed(&infinite, eps);
    assert!((volume / expected - 1.0).abs() < 5e-3, "{volume} vs {expected}");
}

#[test]
fn equivalent_ball_of_wrapped_disc() {
    let g = Grid::uniform(2, 128, 1.0).unwrap();
    let eps = 1.0 / 64.0;
    let u: Vec<f64> = Shape::ball(&[0.02, 0.97], 0.2)
        .sample(&g)
        .iter()
        .map(|d| optimal_profile(d / eps))
        .collect();
    match equivalent_ball(&g, &u) {
        Shape::Ball { center, radius } => {
            let dx = g.wrap(0, center[0] - 0.02);
            let dy = g.wrap(1, center[1] - 0.97);
            assert!(dx.hypot(dy) < 1e-3, "{center:?}");
            // the diffuse profile adds O(eps^2) to the enclosed area
            assert!((radius - 0.2).abs() < 3e-3, "{radius}");
        }
        other => panic!("{other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn disc_area_is_recovered(cx in 0.0f64..1.0, cy in 0.0f64..1.0, r in 0.1f64..0.3) {
        let g = Grid::uniform(2, 64, 1.0).unwrap();
        let eps = 1.0 / 64.0;
        let u: Vec<f64> = Shape::ball(&[cx, cy], r)
            .sample(&g)
            .iter()
            .map(|d| optimal_profile(d / eps))
            .collect();
        let geo = level_set_geometry(&g, &u, 0.5).unwrap();
        prop_assert!((geo.area / (PI * r * r) - 1.0).abs() < 0.01);
        prop_assert!((geo.isoperimetric_ratio - 1.0).abs() < 0.02);
    }

    #[test]
    fn slope_of_power_laws(p in 0.5f64..3.0, c in 0.1f64..10.0) {
        let eps = [1.0f64 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
        let metric: Vec<f64> = eps.iter().map(|e| c * e.powf(p)).collect();
        prop_assert!((fit_slope(&eps, &metric).unwrap() - p).abs() < 1e-10);
    }

    #[test]
    fn energy_is_translation_invariant(shift in 0.0f64..1.0) {
        let g = Grid::uniform(1, 256, 1.0).unwrap();
        let eps = 1.0 / 32.0;
        let field = |c: f64| -> Vec<f64> {
            Shape::Slab { axis: 0, center: c, half: 0.25 }
                .sample(&g)
                .iter()
                .map(|d| optimal_profile(d / eps))
                .collect()
        };
        let a = phase_energy(&g, &mut SpectralField::new(field(0.5)), eps);
        let b = phase_energy(&g, &mut SpectralField::new(field(shift)), eps);
        prop_assert!((a - b).abs() < 1e-6 * a);
    }
}
