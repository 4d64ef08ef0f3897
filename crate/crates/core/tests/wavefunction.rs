use invharm_core::wavefunction::residual::ModeField;
use invharm_core::wavefunction::{
    assemble_psi, assemble_psi_with, convention_scan, convention_scan_in_order, normalize_on_disk, residual_ladder,
    xy_from_theta, CartesianGrid, ConventionFlags, Grid, LadderKind, ModeSpec, ResidualSettings, ThetaPath,
};
use invharm_core::*;
use proptest::prelude::*;

fn static_coeffs(b: f64, c: f64) -> CoefficientSet {
    CoefficientSet::constant(1.0, 1.0, b, 1.0, c, Span::new(0.0, 1.0).unwrap()).unwrap()
}

fn trajectory(c: &CoefficientSet, branch: Sign) -> Result<TransformTrajectory, WaveError> {
    Ok(TransformTrajectory::solve(
        c,
        c.span(),
        1.0,
        &ChainOptions::default().with_branch(branch),
        &IntegratorConfig::default(),
    )?)
}

fn gaussian_mode(n: i64, c: f64) -> ModeSpec {
    ModeSpec::new(1.0, n, c, ConventionFlags::gaussian()).unwrap()
}

fn grid() -> CartesianGrid {
    CartesianGrid::square(6.0, 96, 0.4, 6.0).unwrap()
}

#[test]
fn spatial_ladder_is_fourth_order() {
    let c = static_coeffs(1.0, 1.5);
    let mode = gaussian_mode(1, 1.5);
    let traj = trajectory(&c, ConventionFlags::gaussian().alpha_branch).unwrap();
    let settings = ResidualSettings { dt: 1e-4, stencil_step: Some(0.2), levels: 3, kind: LadderKind::Spatial };
    let rep = residual_ladder(&ModeField::new(&mode, &traj), &c, &grid(), &[0.5], &settings).unwrap();
    let r = rep.residuals();
    assert!(rep.is_monotone(), "{r:?}");
    for w in r.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 16.0).abs() <= 0.3 * 16.0, "ratio {ratio} in {r:?}");
    }
}

#[test]
fn corrupted_exponent_is_detected() {
    let c = static_coeffs(1.0, 1.5);
    let mode = gaussian_mode(1, 1.5);
    let traj = trajectory(&c, ConventionFlags::gaussian().alpha_branch).unwrap();
    let settings = ResidualSettings::single(0.002, Some(0.0125));
    let good = residual_ladder(&ModeField::new(&mode, &traj), &c, &grid(), &[0.5], &settings).unwrap();

    let h = mode.conventions.exponent_factor();
    let corrupted = |x: f64, y: f64, t: f64| -> Result<Complex64, WaveError> {
        let psi = assemble_psi(&mode, &traj, x, y, t)?;
        // alpha -> 1.01 alpha in the Gaussian factor only
        let alpha = traj.alpha(t)?;
        Ok(psi * (alpha * (0.01 * h * (x * x + y * y))).exp())
    };
    let bad = residual_ladder(&corrupted, &c, &grid(), &[0.5], &settings).unwrap();
    let growth = bad.finest().max_rel() / good.finest().max_rel();
    println!("good {:.3e}, corrupted {:.3e}", good.finest().max_rel(), bad.finest().max_rel());
    assert!(growth >= 100.0, "growth {growth}");
}

#[test]
fn scan_picks_gaussian_convention_by_wide_margin() {
    let c = static_coeffs(1.0, 1.5);
    let template = ModeSpec::new(1.0, 1, 1.5, ConventionFlags::as_written()).unwrap();
    let settings = ResidualSettings::single(0.0025, None);
    let scan = convention_scan(&template, |b| trajectory(&c, b), &c, &grid(), &[0.5], &settings).unwrap();
    assert_eq!(scan.winner, ConventionFlags::gaussian());
    let literal = scan.table.iter().find(|r| r.flags == ConventionFlags::as_written()).unwrap();
    assert!(literal.max_rel >= 10.0 * scan.best, "literal {} vs best {}", literal.max_rel, scan.best);
}

#[test]
fn scan_winner_ignores_enumeration_order() {
    let c = static_coeffs(1.0, 1.5);
    let template = ModeSpec::new(1.0, 1, 1.5, ConventionFlags::as_written()).unwrap();
    let settings = ResidualSettings::single(0.0025, None);
    let forward = ConventionFlags::all();
    let mut reversed = forward;
    reversed.reverse();
    let mut interleaved = forward;
    interleaved.swap(0, 5);
    interleaved.swap(2, 7);
    let winners: Vec<_> = [&forward, &reversed, &interleaved]
        .iter()
        .map(|order| {
            convention_scan_in_order(&template, |b| trajectory(&c, b), &c, &grid(), &[0.5], &settings, &order[..])
                .unwrap()
                .winner
        })
        .collect();
    assert!(winners.windows(2).all(|w| w[0] == w[1]), "{winners:?}");
}

#[test]
fn normalization_is_idempotent() {
    let c = static_coeffs(1.0, 1.5);
    let mode = gaussian_mode(1, 1.5);
    let traj = trajectory(&c, ConventionFlags::gaussian().alpha_branch).unwrap();
    let field = WaveField::sample(&mode, &traj, Grid::Cartesian(grid()), &[0.0, 0.5]).unwrap();
    let (once, n0) = normalize_on_disk(&field, 6.0).unwrap();
    let (twice, n1) = normalize_on_disk(&once, 6.0).unwrap();
    assert!(n0 > 0.0);
    assert!((n1 - 1.0).abs() < 1e-12, "{n1}");
    for (a, b) in once.values.iter().flatten().zip(twice.values.iter().flatten()) {
        assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
    }
}

#[test]
fn field_rotation_path_matches_unrotated_without_field() {
    let c = static_coeffs(0.0, 1.5);
    let mode = gaussian_mode(2, 1.5);
    let traj = trajectory(&c, ConventionFlags::gaussian().alpha_branch).unwrap();
    let dom = EvalDomain::default();
    for &(x, y, t) in &[(0.7, -1.2, 0.0), (2.0, 0.3, 0.4), (-1.1, -0.9, 1.0)] {
        let a = assemble_psi_with(&mode, &traj, x, y, t, &dom, ThetaPath::Rotated).unwrap();
        let b = assemble_psi_with(&mode, &traj, x, y, t, &dom, ThetaPath::Unrotated).unwrap();
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn angular_dependence_is_a_pure_phase(
        rho in 0.2f64..4.0,
        theta in -3.0f64..3.0,
        delta in -3.0f64..3.0,
        t in 0.0f64..1.0,
        n in -3i64..=3,
        flip in any::<bool>(),
    ) {
        let c = static_coeffs(1.0, 1.5);
        let sign = if flip { Sign::Minus } else { Sign::Plus };
        let mode = gaussian_mode(n, 1.5).with_angular_sign(sign);
        let traj = trajectory(&c, ConventionFlags::gaussian().alpha_branch).unwrap();
        let beta = traj.beta(t).unwrap();
        let (x1, y1) = xy_from_theta(rho, theta, beta);
        let (x2, y2) = xy_from_theta(rho, theta + delta, beta);
        let a = assemble_psi(&mode, &traj, x1, y1, t).unwrap();
        let b = assemble_psi(&mode, &traj, x2, y2, t).unwrap();
        let expected = a * Complex64::new(0.0, sign.value() * n as f64 * delta).exp();
        prop_assert!((b - expected).norm() <= 1e-10 * a.norm());
    }

    #[test]
    fn amplitudes_superpose(
        a1 in (-2.0f64..2.0, -2.0f64..2.0),
        a2 in (-2.0f64..2.0, -2.0f64..2.0),
        b1 in (-2.0f64..2.0, -2.0f64..2.0),
        b2 in (-2.0f64..2.0, -2.0f64..2.0),
        x in 0.3f64..3.0,
        y in -3.0f64..3.0,
    ) {
        let c = static_coeffs(1.0, 1.5);
        let traj = trajectory(&c, ConventionFlags::gaussian().alpha_branch).unwrap();
        let base = gaussian_mode(1, 1.5);
        let cx = |p: (f64, f64)| Complex64::new(p.0, p.1);
        let (a1, a2, b1, b2) = (cx(a1), cx(a2), cx(b1), cx(b2));
        // at t = 0 mu is real, so the second-kind term is available
        let psi = |a: Complex64, b: Complex64| assemble_psi(&base.with_amplitudes(a, b), &traj, x, y, 0.0).unwrap();
        let sum = psi(a1 + a2, b1 + b2);
        let parts = psi(a1, b1) + psi(a2, b2);
        let scale = psi(a1, b1).norm() + psi(a2, b2).norm();
        prop_assert!((sum - parts).norm() <= 1e-14 * scale);
    }
}
