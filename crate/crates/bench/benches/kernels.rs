use criterion::{black_box, criterion_group, criterion_main, Criterion};
use invharm_core::bessel::{bessel_j, bessel_j_series, bessel_n};
use invharm_core::oracle::{analytic_slice, propagate};
use invharm_core::wavefunction::residual::ModeField;
use invharm_core::wavefunction::{residual_ladder, CartesianGrid, ResidualSettings};
use invharm_core::*;

fn static_coeffs() -> CoefficientSet {
    CoefficientSet::constant(1.0, 1.0, 1.0, 1.0, 1.5, Span::new(0.0, 1.0).unwrap()).unwrap()
}

fn trajectory(c: &CoefficientSet) -> TransformTrajectory {
    let opts = ChainOptions::default().with_branch(ConventionFlags::gaussian().alpha_branch);
    TransformTrajectory::solve(c, c.span(), 1.0, &opts, &IntegratorConfig::default()).unwrap()
}

fn bessel(c: &mut Criterion) {
    let z = Complex64::new(7.3, 0.4);
    let nu = BesselOrder::new(2.5).unwrap();
    let dom = EvalDomain::default();
    c.bench_function("j_series nu=2.5 |z|=7.3", |b| b.iter(|| bessel_j_series(black_box(2.5), black_box(z))));
    c.bench_function("j asymptotic x=45", |b| b.iter(|| bessel_j(nu, black_box(Complex64::new(45.0, 0.0)), &dom)));
    c.bench_function("n integer order x=1", |b| {
        let n1 = BesselOrder::new(1.0).unwrap();
        b.iter(|| bessel_n(n1, black_box(1.0)))
    });
}

fn riccati(c: &mut Criterion) {
    let s = Span::new(0.0, 1.0).unwrap();
    let ramp = CoefficientSet::new(
        TimeFunction::new(Family::Linear { value: 1.0, slope: 0.1 }, s).unwrap(),
        TimeFunction::constant(1.0, s).unwrap(),
        TimeFunction::new(Family::Sinusoidal { offset: 0.0, amplitude: 1.0, freq: 1.0, phase: 0.0 }, s).unwrap(),
        1.0,
        1.5,
    )
    .unwrap();
    c.bench_function("chain solve (mass ramp, cos field)", |b| b.iter(|| trajectory(black_box(&ramp))));
}

fn crank_nicolson(c: &mut Criterion) {
    let coeffs = static_coeffs();
    let traj = trajectory(&coeffs);
    let mode = ModeSpec::new(1.0, 1, 1.5, ConventionFlags::gaussian()).unwrap();
    // 100 steps on 1024 points
    let mut p = RadialProblem::new(coeffs, mode.lab_angular_number(), 12.0, 1024, 1e-3, Span::new(0.0, 0.1).unwrap());
    p.samples = 2;
    let u0 = analytic_slice(&mode, &traj, &p.nodes(), 0.0).unwrap();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(20);
    g.bench_function("propagate 100 steps, 1024 points", |b| b.iter(|| propagate(&p, black_box(&u0)).unwrap()));
    g.finish();
}

fn residual(c: &mut Criterion) {
    let coeffs = static_coeffs();
    let traj = trajectory(&coeffs);
    let mode = ModeSpec::new(1.0, 1, 1.5, ConventionFlags::gaussian()).unwrap();
    let grid = CartesianGrid::square(6.0, 64, 0.4, 6.0).unwrap();
    let settings = ResidualSettings::single(0.0025, None);
    let mut g = c.benchmark_group("residual");
    g.sample_size(10);
    g.bench_function("single level 64x64", |b| {
        b.iter(|| residual_ladder(&ModeField::new(&mode, &traj), &coeffs, &grid, &[0.5], &settings).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bessel, riccati, crank_nicolson, residual);
criterion_main!(benches);
