//! The five subcommands. Each returns the lines of its human-readable summary;
//! failures carry their own exit class in [`CliError`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use invharm_core::bessel::{bessel_j, bessel_n, wronskian_check};
use invharm_core::config::ConfigError;
use invharm_core::export::{push_row, read_header, sha256_hex};
use invharm_core::oracle::{analytic_slice, propagate_with_reference};
use invharm_core::wavefunction::residual::ModeField;
use invharm_core::wavefunction::{convention_scan, CartesianGrid, Grid, ResidualSettings, ScanOutcome};
use invharm_core::{
    BesselOrder, Complex64, ConventionFlags, EvalDomain, ModeSpec, OracleError, RadialProblem, TransformTrajectory,
    WaveError, WaveField,
};

use crate::error::CliError;
use crate::output::OutputDir;
use crate::settings::RunConfig;

pub const OUT_ENV: &str = "INVHARM_OUT";
pub const DEFAULT_OUT: &str = "invharm-out";

/// Options shared by every command.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub flags: Option<ConventionFlags>,
}

/// A loaded config together with where it came from.
pub struct Run {
    pub path: PathBuf,
    pub cfg: RunConfig,
    pub flags_override: Option<ConventionFlags>,
}

impl Run {
    pub fn load(opts: &Options) -> Result<Self, CliError> {
        let path = opts.config.clone().ok_or_else(|| CliError::Usage("--config is required".into()))?;
        let text = fs::read_to_string(&path).map_err(CliError::io(&path))?;
        let cfg = RunConfig::parse(&text)
            .map_err(|source| CliError::Config { path: path.clone(), source: Box::new(source) })?;
        Ok(Self { path, cfg, flags_override: opts.flags })
    }

    fn config_err(&self, source: ConfigError) -> CliError {
        CliError::Config { path: self.path.clone(), source: Box::new(source) }
    }

    /// `--out`, then `[output] dir`, then the environment, then the default.
    pub fn out_dir(&self, opts: &Options) -> PathBuf {
        resolve_out(opts, self.cfg.output_dir.as_deref())
    }

    fn trajectory(&self, branch: invharm_core::Sign) -> Result<TransformTrajectory, WaveError> {
        let c = &self.cfg;
        let opts = c.chain.with_branch(branch);
        Ok(TransformTrajectory::solve(&c.coeffs, c.coeffs.span(), c.mode.k, &opts, &c.integrator)?)
    }

    fn mode(&self, flags: ConventionFlags) -> Result<ModeSpec, CliError> {
        let m = &self.cfg.mode;
        Ok(ModeSpec::new(m.k, m.n, self.cfg.coeffs.coupling(), flags)?
            .with_amplitudes(Complex64::new(m.amp_first, 0.0), Complex64::new(m.amp_second, 0.0))
            .with_angular_sign(m.angular_sign))
    }

    /// The convention scan; the inner error keeps the table of an inconclusive scan.
    fn try_scan(&self) -> Result<Result<ScanOutcome, WaveError>, CliError> {
        let g = self.cfg.require_grid().map_err(|e| self.config_err(e))?;
        let s = &self.cfg.scan;
        let grid = CartesianGrid::square(g.half_width, s.points, g.rho_min, g.rho_max)?;
        let template = self.mode(ConventionFlags::as_written())?;
        let settings = ResidualSettings::single(s.dt, s.stencil);
        Ok(convention_scan(&template, |b| self.trajectory(b), &self.cfg.coeffs, &grid, &[s.time], &settings))
    }

    fn scan(&self) -> Result<ScanOutcome, CliError> {
        Ok(self.try_scan()??)
    }

    /// `--flags`, then `[mode] flags`, then a convention scan.
    fn conventions(&self) -> Result<(ConventionFlags, &'static str, Option<ScanOutcome>), CliError> {
        if let Some(f) = self.flags_override {
            return Ok((f, "command line", None));
        }
        if let Some(f) = self.cfg.mode.flags {
            return Ok((f, "config", None));
        }
        let scan = self.scan()?;
        Ok((scan.winner, "scan", Some(scan)))
    }

    fn meta(&self, command: &str) -> Vec<(&'static str, String)> {
        vec![("config_digest", self.cfg.digest.clone()), ("command", command.to_string())]
    }
}

pub fn resolve_out(opts: &Options, from_config: Option<&Path>) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| from_config.map(Path::to_path_buf))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn scan_lines(scan: &ScanOutcome) -> Vec<String> {
    let mut lines = vec![format!(
        "scan winner {} (residual {:.3e}, runner-up {:.3e}, separation {:.1}x)",
        scan.winner,
        scan.best,
        scan.runner_up,
        scan.separation()
    )];
    for r in &scan.table {
        lines.push(format!(
            "  {:<22} {:.3e}{}",
            r.flags.to_string(),
            r.max_rel,
            if r.flags == scan.winner { "  <" } else { "" }
        ));
    }
    lines
}

fn write_scan(out: &mut OutputDir, run: &Run, scan: &ScanOutcome) -> Result<(), CliError> {
    let mut meta = run.meta("scan");
    meta.push(("winner", scan.winner.to_string()));
    meta.push(("separation", format!("{:e}", scan.separation())));
    out.write("scan.csv", &meta, &scan.to_csv())?;
    Ok(())
}

pub fn solve(opts: &Options) -> Result<Vec<String>, CliError> {
    let run = Run::load(opts)?;
    let grid = run.cfg.require_grid().map_err(|e| run.config_err(e))?;
    let mut out = OutputDir::acquire(&run.out_dir(opts))?;
    let (flags, source, scan) = run.conventions()?;
    let mut lines = Vec::new();
    if let Some(scan) = &scan {
        write_scan(&mut out, &run, scan)?;
        lines.extend(scan_lines(scan));
    }
    let traj = run.trajectory(flags.alpha_branch)?;
    let mode = run.mode(flags)?;
    let mut meta = run.meta("solve");
    meta.push(("flags", flags.to_string()));
    meta.push(("flags_source", source.into()));
    meta.push(("nu", format!("{:e}", mode.nu)));
    meta.push(("trajectory_digest", traj.digest()));

    out.write("trajectory.csv", &meta, &traj.to_csv(run.cfg.integrator.dense_points)?)?;
    let export = CartesianGrid::square(grid.half_width, run.cfg.field_points, grid.rho_min, grid.rho_max)?;
    let field = WaveField::sample(&mode, &traj, Grid::Cartesian(export), &grid.times)?;
    out.write("field.csv", &meta, &field.to_csv())?;

    let stats = traj.achieved();
    let consistency = traj.chain_consistency()?;
    let riccati = traj.riccati_residual()?;
    lines.push(format!("flags {flags} ({source})"));
    lines.push(format!("nu {}", mode.nu));
    lines.push(format!(
        "integrator rel_tol {:e} abs_tol {:e}: {} accepted, {} rejected, worst error ratio {:.3}",
        stats.rel_tol, stats.abs_tol, stats.accepted, stats.rejected, stats.max_error_ratio
    ));
    lines.push(format!("chain consistency {consistency:.3e}, riccati residual {riccati:.3e}"));

    let mut summary = String::new();
    for (k, v) in &meta {
        let _ = writeln!(summary, "{k}: {v}");
    }
    for l in &lines {
        let _ = writeln!(summary, "{l}");
    }
    out.write("summary.txt", &[], &summary)?;
    lines.extend(out.written().iter().map(|p| format!("wrote {}", p.display())));
    Ok(lines)
}

/// Refuses to proceed when `trajectory.csv` in the output directory was
/// produced from a different config or a different trajectory.
fn check_existing(out: &OutputDir, run: &Run, traj: &TransformTrajectory) -> Result<(), CliError> {
    let path = out.path("trajectory.csv");
    let Ok(text) = fs::read_to_string(&path) else {
        return Ok(());
    };
    let header = read_header(&text);
    let get = |key: &str| header.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone()).unwrap_or_default();
    let found = get("config_digest");
    if found != run.cfg.digest {
        return Err(CliError::DigestMismatch { path, what: "config digest", found, expected: run.cfg.digest.clone() });
    }
    let found = get("trajectory_digest");
    if found != traj.digest() {
        return Err(CliError::DigestMismatch { path, what: "trajectory digest", found, expected: traj.digest() });
    }
    Ok(())
}

pub fn verify(opts: &Options) -> Result<Vec<String>, CliError> {
    let run = Run::load(opts)?;
    let grid = run.cfg.require_grid().map_err(|e| run.config_err(e))?;
    let v = run.cfg.require_verification().map_err(|e| run.config_err(e))?;
    let mut out = OutputDir::acquire(&run.out_dir(opts))?;
    let (flags, source, scan) = run.conventions()?;
    let mut lines = scan.as_ref().map(scan_lines).unwrap_or_default();
    let traj = run.trajectory(flags.alpha_branch)?;
    check_existing(&out, &run, &traj)?;
    let mode = run.mode(flags)?;

    let report = invharm_core::wavefunction::residual_ladder(
        &ModeField::new(&mode, &traj),
        &run.cfg.coeffs,
        &grid.cartesian()?,
        &grid.times,
        &v.ladder,
    )?;
    let mut meta = run.meta("verify");
    meta.push(("flags", flags.to_string()));
    meta.push(("flags_source", source.into()));
    meta.push(("trajectory_digest", traj.digest()));
    meta.push(("summary", report.summary_line()));
    out.write("ladder.csv", &meta, &report.to_csv())?;

    lines.push(format!("flags {flags} ({source})"));
    lines.push(format!("{:>5} {:>12} {:>12}", "level", report.kind.name(), "max_rel"));
    for (i, l) in report.levels.iter().enumerate() {
        lines.push(format!("{i:>5} {:>12.4e} {:>12.4e}", l.step(report.kind), l.max_rel()));
    }
    let finest = report.finest().max_rel();
    let order = report.order();
    lines.push(match order {
        Some(o) => format!("empirical order {o:.3} (expected {} +- {})", v.order, v.order_tol),
        None => "empirical order unavailable".into(),
    });
    let table = lines.join("\n");

    // A residual above the tolerance is a failure whatever the ladder looks like.
    if report.levels.len() < 2 {
        return Err(CliError::GridTooCoarse(format!("{table}\nladder needs at least 2 levels to estimate an order")));
    }
    if !(finest < v.max_residual) {
        return Err(CliError::VerifyFailed(format!("{table}\nfinest residual {finest:.3e} >= {:e}", v.max_residual)));
    }
    if !report.is_monotone() {
        return Err(CliError::GridTooCoarse(format!("{table}\nresiduals do not decrease: grid too coarse")));
    }
    match order {
        Some(o) if (o - v.order).abs() <= v.order_tol => {}
        _ => return Err(CliError::VerifyFailed(format!("{table}\norder outside {} +- {}", v.order, v.order_tol))),
    }
    lines.push(format!("pass: finest residual {finest:.3e} < {:e}", v.max_residual));
    Ok(lines)
}

pub fn oracle(opts: &Options) -> Result<Vec<String>, CliError> {
    let run = Run::load(opts)?;
    let o = run.cfg.require_oracle().map_err(|e| run.config_err(e))?;
    let mut out = OutputDir::acquire(&run.out_dir(opts))?;
    let (flags, source, scan) = run.conventions()?;
    let mut lines = scan.as_ref().map(scan_lines).unwrap_or_default();
    let traj = run.trajectory(flags.alpha_branch)?;
    let mode = run.mode(flags)?;

    let span = run.cfg.coeffs.span();
    let mut p = RadialProblem::new(run.cfg.coeffs.clone(), mode.lab_angular_number(), o.rho_max, o.n_rho, o.dt, span);
    p.samples = o.samples;
    p.drift_tol = o.drift_tol;
    p.probe_tol = o.probe_tol;
    let rho = p.nodes();
    let u0 = analytic_slice(&mode, &traj, &rho, span.t0)?;
    let reference = |t: f64| -> Result<Vec<Complex64>, OracleError> { analytic_slice(&mode, &traj, &rho, t) };
    let res = propagate_with_reference(&p, &u0, Some(reference))?;

    let mut meta = run.meta("oracle");
    meta.push(("flags", flags.to_string()));
    meta.push(("flags_source", source.into()));
    meta.push(("nu", format!("{:e}", mode.nu)));
    meta.push(("n_lab", mode.lab_angular_number().to_string()));
    meta.push(("trajectory_digest", traj.digest()));
    meta.push(("n_rho", o.n_rho.to_string()));
    meta.push(("dt", format!("{:e}", o.dt)));
    out.write("fidelity.csv", &meta, &res.to_csv())?;
    let last = res.snapshots.len() - 1;
    let mut snap_meta = meta.clone();
    snap_meta.push(("t", format!("{:e}", res.times[last])));
    out.write("snapshot.csv", &snap_meta, &res.snapshot_csv(last))?;

    let min_f = res.min_fidelity().unwrap_or(f64::NAN);
    lines.push(format!("flags {flags} ({source}), nu {}", mode.nu));
    lines.push(format!(
        "{} steps, max step drift {:.3e}, min fidelity {min_f:.12} (1 - F = {:.3e})",
        res.steps,
        res.max_step_drift,
        1.0 - min_f
    ));
    if !(min_f >= o.min_fidelity) {
        return Err(CliError::VerifyFailed(format!("{}\nmin fidelity {min_f} < {}", lines.join("\n"), o.min_fidelity)));
    }
    lines.push(format!("pass: min fidelity >= {}", o.min_fidelity));
    Ok(lines)
}

pub fn scan(opts: &Options) -> Result<Vec<String>, CliError> {
    let run = Run::load(opts)?;
    let mut out = OutputDir::acquire(&run.out_dir(opts))?;
    match run.try_scan()? {
        Ok(scan) => {
            write_scan(&mut out, &run, &scan)?;
            Ok(scan_lines(&scan))
        }
        Err(WaveError::Inconclusive { best, runner_up, table }) => {
            let winner = table.iter().find(|r| r.max_rel == best).map_or(ConventionFlags::as_written(), |r| r.flags);
            let outcome = ScanOutcome { winner, best, runner_up, table };
            let mut meta = run.meta("scan");
            meta.push(("winner", "inconclusive".into()));
            out.write("scan.csv", &meta, &outcome.to_csv())?;
            let rows = scan_lines(&outcome)[1..].join("\n");
            Err(CliError::Inconclusive(format!(
                "convention scan inconclusive: best {best:.3e} vs runner-up {runner_up:.3e}\n{rows}"
            )))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableArgs {
    pub orders: Vec<f64>,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl TableArgs {
    fn digest(&self) -> String {
        let orders: Vec<String> = self.orders.iter().map(|o| format!("{o:e}")).collect();
        sha256_hex(
            format!("orders={};x={:e}..{:e};points={}", orders.join(","), self.x_min, self.x_max, self.points)
                .as_bytes(),
        )
    }
}

/// `nu, x, J, N` and the scaled Wronskian defect on an even grid in `x`.
pub fn bessel_table(opts: &Options, args: &TableArgs) -> Result<Vec<String>, CliError> {
    if !(args.x_min > 0.0 && args.x_max >= args.x_min) || args.points == 0 || args.orders.is_empty() {
        return Err(CliError::Usage("need orders, 0 < x-min <= x-max and points >= 1".into()));
    }
    let mut out = OutputDir::acquire(&resolve_out(opts, None))?;
    let dom = EvalDomain::default();
    let mut body = String::from("nu,x,j,n,wronskian_defect\n");
    let mut worst = 0.0f64;
    for &nu in &args.orders {
        let order = BesselOrder::new(nu)?;
        for i in 0..args.points {
            let x = if args.points == 1 {
                args.x_min
            } else {
                args.x_min + (args.x_max - args.x_min) * i as f64 / (args.points - 1) as f64
            };
            let j = bessel_j(order, Complex64::new(x, 0.0), &dom)?.re;
            let n = bessel_n(order, x)?;
            let defect = wronskian_check(order, x)?.abs() * std::f64::consts::FRAC_PI_2 * x;
            worst = worst.max(defect);
            push_row(&mut body, &[nu, x, j, n, defect]);
        }
    }
    let path =
        out.write("bessel_table.csv", &[("args_digest", args.digest()), ("command", "bessel-table".into())], &body)?;
    Ok(vec![format!("worst scaled wronskian defect {worst:.3e}"), format!("wrote {}", path.display())])
}
