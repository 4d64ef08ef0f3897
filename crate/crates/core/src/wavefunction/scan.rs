//! Exhaustive search over the eight exponent conventions.

use super::field::CartesianGrid;
use super::residual::{residual_ladder, ModeField, ResidualSettings};
use super::{ConventionFlags, ModeSpec, WaveError};
use crate::export;
use crate::ode::TransformTrajectory;
use crate::params::CoefficientSet;
use crate::Sign;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub flags: ConventionFlags,
    /// `‖R‖∞ / ‖HΨ‖∞`; infinite when the evaluation failed.
    pub max_rel: f64,
    pub l2_rel: f64,
    /// `Re(s h alpha) < 0` at every sampled time.
    pub envelope_decays: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutcome {
    pub winner: ConventionFlags,
    pub best: f64,
    pub runner_up: f64,
    /// Rows in evaluation order.
    pub table: Vec<ScanRow>,
}

impl ScanOutcome {
    /// `runner_up / best`.
    pub fn separation(&self) -> f64 {
        self.runner_up / self.best
    }

    pub fn winner_row(&self) -> &ScanRow {
        self.table.iter().find(|r| r.flags == self.winner).expect("winner is in the table")
    }

    /// Rows whose residual is at least `factor` times smaller than every other row.
    pub fn dominant_rows(&self, factor: f64) -> Vec<&ScanRow> {
        self.table
            .iter()
            .filter(|r| self.table.iter().all(|o| o.flags == r.flags || o.max_rel >= factor * r.max_rel))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("flags,max_rel,l2_rel,envelope_decays,winner,error\n");
        for r in &self.table {
            let mut nums = String::new();
            export::push_row(&mut nums, &[r.max_rel, r.l2_rel]);
            out.push_str(&format!(
                "\"{}\",{},{},{},{}\n",
                r.flags,
                nums.trim_end(),
                r.envelope_decays,
                r.flags == self.winner,
                r.error.as_deref().unwrap_or("").replace(',', ";")
            ));
        }
        out
    }
}

/// [`convention_scan_in_order`] over [`ConventionFlags::all`].
pub fn convention_scan<T>(
    template: &ModeSpec,
    traj_factory: T,
    coeffs: &CoefficientSet,
    grid: &CartesianGrid,
    times: &[f64],
    settings: &ResidualSettings,
) -> Result<ScanOutcome, WaveError>
where
    T: Fn(Sign) -> Result<TransformTrajectory, WaveError>,
{
    convention_scan_in_order(template, traj_factory, coeffs, grid, times, settings, &ConventionFlags::all())
}

/// Evaluates the single-level residual of `template` under each flag set in
/// `order`, re-solving the trajectory per alpha branch. The winner is the
/// smallest residual, ties broken by flag order, so the result does not depend
/// on `order`. Fails with [`WaveError::Inconclusive`] when the runner-up is
/// within a factor 2 of the winner.
pub fn convention_scan_in_order<T>(
    template: &ModeSpec,
    traj_factory: T,
    coeffs: &CoefficientSet,
    grid: &CartesianGrid,
    times: &[f64],
    settings: &ResidualSettings,
    order: &[ConventionFlags],
) -> Result<ScanOutcome, WaveError>
where
    T: Fn(Sign) -> Result<TransformTrajectory, WaveError>,
{
    if order.len() < 2 {
        return Err(WaveError::InvalidMode("scan needs at least two flag sets".into()));
    }
    let single = ResidualSettings { levels: 1, ..*settings };
    let plus = traj_factory(Sign::Plus);
    let minus = traj_factory(Sign::Minus);

    let mut table = Vec::with_capacity(order.len());
    for &flags in order {
        let mode = template.with_conventions(flags);
        let traj = match flags.alpha_branch {
            Sign::Plus => &plus,
            Sign::Minus => &minus,
        };
        let row = match traj {
            Err(e) => failed(flags, e),
            Ok(traj) => match evaluate(&mode, traj, coeffs, grid, times, &single) {
                Ok(row) => row,
                Err(e) => failed(flags, &e),
            },
        };
        table.push(row);
    }

    let mut ranked: Vec<&ScanRow> = table.iter().collect();
    ranked.sort_by(|a, b| a.max_rel.total_cmp(&b.max_rel).then(a.flags.cmp(&b.flags)));
    let (best, runner_up, winner) = (ranked[0].max_rel, ranked[1].max_rel, ranked[0].flags);
    if !best.is_finite() || !(runner_up >= 2.0 * best) {
        return Err(WaveError::Inconclusive { best, runner_up, table });
    }
    Ok(ScanOutcome { winner, best, runner_up, table })
}

fn failed(flags: ConventionFlags, e: &WaveError) -> ScanRow {
    ScanRow { flags, max_rel: f64::INFINITY, l2_rel: f64::INFINITY, envelope_decays: false, error: Some(e.to_string()) }
}

fn evaluate(
    mode: &ModeSpec,
    traj: &TransformTrajectory,
    coeffs: &CoefficientSet,
    grid: &CartesianGrid,
    times: &[f64],
    settings: &ResidualSettings,
) -> Result<ScanRow, WaveError> {
    let report = residual_ladder(&ModeField::new(mode, traj), coeffs, grid, times, settings)?;
    let factor = mode.conventions.exponent_factor();
    let mut envelope_decays = true;
    for &t in times {
        envelope_decays &= (traj.alpha(t)? * factor).re < 0.0;
    }
    let level = report.finest();
    let (max_rel, l2_rel) = (level.max_rel(), level.l2_rel());
    let max_rel = if max_rel.is_nan() { f64::INFINITY } else { max_rel };
    Ok(ScanRow { flags: mode.conventions, max_rel, l2_rel, envelope_decays, error: None })
}
