use ehd_core::field::{quad, ScalarField};
use ehd_core::geom::{normalize_angle, Vec2};
use ehd_core::profiles::{Phase, PiecewiseProfile};
use proptest::prelude::*;
use std::f64::consts::PI;

fn catalog() -> Vec<PiecewiseProfile> {
    let mut v = PiecewiseProfile::corner_catalog();
    v.push(PiecewiseProfile::w(2));
    v.push(PiecewiseProfile::w(3));
    v.push(PiecewiseProfile::linear());
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // eval(lambda rho, theta) = lambda^kappa eval(rho, theta) for every
    // piece exponent, up to rounding.
    #[test]
    fn eval_is_homogeneous(
        idx in 0usize..8,
        rho in 1e-3f64..3.0,
        theta in -PI..PI,
        lambda in 1e-2f64..10.0,
    ) {
        let profiles = catalog();
        let prof = &profiles[idx % profiles.len()];
        let theta = normalize_angle(theta);
        let direct = prof.eval(lambda * rho, theta);
        // Pieces may have different exponents only in principle; the
        // catalog entries are single-exponent, so scale by the exponent of
        // the piece that contains theta.
        let kappa = prof
            .pieces()
            .iter()
            .find(|p| p.contains(theta))
            .map(|p| p.exponent);
        if let Some(kappa) = kappa {
            let scaled = lambda.powf(kappa) * prof.eval(rho, theta);
            let tol = 1e-12 * (1.0 + direct.abs().max(scaled.abs()));
            prop_assert!((direct - scaled).abs() <= tol, "{direct} vs {scaled}");
        } else {
            prop_assert_eq!(direct, 0.0);
        }
    }

    // The sign of a piece value agrees with its declared phase throughout
    // the open sector.
    #[test]
    fn piece_sign_agrees(
        idx in 0usize..8,
        rho in 1e-3f64..2.0,
        frac in 1e-3f64..0.999,
    ) {
        let profiles = catalog();
        let prof = &profiles[idx % profiles.len()];
        for piece in prof.pieces() {
            let theta = piece.theta_lo + frac * (piece.theta_hi - piece.theta_lo);
            let v = piece.value(rho, theta);
            match piece.sign {
                Phase::Negative => prop_assert!(v <= 1e-12 * rho.powf(piece.exponent)),
                Phase::Positive => prop_assert!(v >= -1e-12 * rho.powf(piece.exponent)),
            }
        }
    }

    // Disk quadrature is linear in the integrand and monotone on
    // nonnegative integrands.
    #[test]
    fn ball_quadrature_linear_and_monotone(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        cx in -0.2f64..0.2,
        cy in -0.2f64..0.2,
        r in 0.3f64..0.9,
    ) {
        let spec = quad::BallQuad::with_n_theta(128);
        let c = Vec2::new(cx, cy);
        let f = |p: Vec2| (p.x - cx).cos() + 0.3 * p.y;
        let g = |p: Vec2| (p.y + 1.9).sqrt();
        let ia = quad::ball(f, c, r, 0.02, &spec);
        let ib = quad::ball(g, c, r, 0.02, &spec);
        let combo = quad::ball(|p| a * f(p) + b * g(p), c, r, 0.02, &spec);
        prop_assert!((combo - (a * ia + b * ib)).abs() <= 1e-9 * (1.0 + combo.abs()));
        prop_assert!(ib >= 0.0);
    }

    // Rescaling twice composes with the product of the radii.
    #[test]
    fn rescale_composes(r1 in 0.3f64..0.6, r2 in 0.3f64..0.6) {
        let prof = PiecewiseProfile::a4_right();
        let field = ScalarField::from_profile(&prof, 1.0, 1.0 / 96.0, 0.0).unwrap();
        let once = field.rescale(Vec2::ZERO, r1, 1.5).unwrap();
        let twice = once.rescale(Vec2::ZERO, r2, 1.5).unwrap();
        let direct = field.rescale(Vec2::ZERO, r1 * r2, 1.5).unwrap();
        for &p in &[Vec2::new(0.3, -0.4), Vec2::new(-0.5, -0.2), Vec2::new(0.1, 0.55)] {
            let a = twice.sample(p).unwrap();
            let b = direct.sample(p).unwrap();
            prop_assert!((a - b).abs() <= 0.08 * (1.0 + a.abs().max(b.abs())), "{a} vs {b}");
        }
    }

    // Field records survive the text round trip bit for bit.
    #[test]
    fn field_text_round_trip(seedx in -1.0f64..1.0, seedy in -1.0f64..1.0) {
        let f = ScalarField::centered(0.4, 0.05, seedy, |p| {
            (3.0 * (p.x + seedx)).sin() * (2.0 * p.y).cos()
        })
        .unwrap();
        let text = f.to_text();
        let g = ScalarField::read_text(&mut text.as_bytes()).unwrap();
        prop_assert_eq!(f.values(), g.values());
        prop_assert_eq!(f.to_text(), g.to_text());
    }
}
