//! Run configuration: the coefficient sections plus the numerical settings of
//! each command.
//!
//! ```text
//! [mode] k=1 n=1                        # flags=s=-1,h=1/2,branch=+ to skip the scan
//! [grid] half_width=8 points=256 rho_min=0.4 rho_max=8 times=0.5
//! [verification] dt=0.008 stencil=0.0125 levels=3 kind=temporal max_residual=1e-5
//! [oracle] n_rho=2048 rho_max=12 dt=1e-4 min_fidelity=0.999
//! ```
//!
//! Physics inputs have no defaults; numerical settings do.

use std::path::PathBuf;

use invharm_core::config::{read_coefficients, ConfigError, RawConfig, Section};
use invharm_core::export::sha256_hex;
use invharm_core::ode::{RotationRule, ScaleRule};
use invharm_core::wavefunction::{CartesianGrid, LadderKind, ResidualSettings};
use invharm_core::{ChainOptions, CoefficientSet, Complex64, ConventionFlags, IntegratorConfig, Sign, Span, WaveError};

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSettings {
    pub k: f64,
    pub n: i64,
    pub amp_first: f64,
    pub amp_second: f64,
    pub angular_sign: Sign,
    pub flags: Option<ConventionFlags>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSettings {
    pub half_width: f64,
    pub points: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub times: Vec<f64>,
}

impl GridSettings {
    pub fn cartesian(&self) -> Result<CartesianGrid, WaveError> {
        CartesianGrid::square(self.half_width, self.points, self.rho_min, self.rho_max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationSettings {
    pub ladder: ResidualSettings,
    pub max_residual: f64,
    /// Expected empirical order; 2 for temporal ladders, 4 for spatial ones.
    pub order: f64,
    pub order_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSettings {
    pub n_rho: usize,
    pub rho_max: f64,
    pub dt: f64,
    pub samples: usize,
    pub min_fidelity: f64,
    pub drift_tol: f64,
    pub probe_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSettings {
    pub dt: f64,
    pub stencil: Option<f64>,
    pub time: f64,
    /// Samples per axis of the (coarser) scan grid.
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// SHA-256 of the config text.
    pub digest: String,
    pub coeffs: CoefficientSet,
    pub mode: ModeSettings,
    pub chain: ChainOptions,
    pub integrator: IntegratorConfig,
    pub grid: Option<GridSettings>,
    pub verification: Option<VerificationSettings>,
    pub oracle: Option<OracleSettings>,
    pub scan: ScanSettings,
    pub output_dir: Option<PathBuf>,
    /// Samples per axis of the exported field.
    pub field_points: usize,
}

fn invalid(section: &Section, key: &str, message: impl Into<String>) -> ConfigError {
    match section.raw(key) {
        Ok(e) => ConfigError::InvalidValue {
            section: section.name.clone(),
            key: key.into(),
            value: e.value.clone(),
            line: e.line,
            message: message.into(),
        },
        Err(err) => err,
    }
}

fn positive(section: &Section, key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(section, key, "must be positive"))
    }
}

fn parse_with<T>(
    section: &Section,
    key: &str,
    f: impl Fn(&str) -> Result<T, String>,
) -> Result<Option<T>, ConfigError> {
    match section.get_opt::<String>(key)? {
        None => Ok(None),
        Some(v) => f(&v).map(Some).map_err(|m| invalid(section, key, m)),
    }
}

fn read_mode(cfg: &RawConfig) -> Result<ModeSettings, ConfigError> {
    let s = cfg.section("mode")?;
    s.expect_keys(&["k", "n", "amp_first", "amp_second", "angular_sign", "flags"])?;
    let k = positive(s, "k", s.get("k")?)?;
    Ok(ModeSettings {
        k,
        n: s.get("n")?,
        amp_first: s.get_or("amp_first", 1.0)?,
        amp_second: s.get_or("amp_second", 0.0)?,
        angular_sign: s.get_or("angular_sign", Sign::Plus)?,
        flags: parse_with(s, "flags", |v| v.parse::<ConventionFlags>())?,
    })
}

fn read_chain(cfg: &RawConfig) -> Result<ChainOptions, ConfigError> {
    let mut opts = ChainOptions::default();
    let Some(s) = cfg.optional("chain") else {
        return Ok(opts);
    };
    s.expect_keys(&["alpha0_re", "alpha0_im", "mu0_re", "mu0_im", "rotation", "scaling", "blowup_factor"])?;
    if s.has("alpha0_re") || s.has("alpha0_im") {
        opts.alpha0 = Some(Complex64::new(s.get_or("alpha0_re", 0.0)?, s.get_or("alpha0_im", 0.0)?));
    }
    opts.mu0 = Complex64::new(s.get_or("mu0_re", 1.0)?, s.get_or("mu0_im", 0.0)?);
    if let Some(r) = parse_with(s, "rotation", |v| match v {
        "larmor" => Ok(RotationRule::Larmor),
        "literal" => Ok(RotationRule::Literal),
        _ => Err("expected larmor or literal".into()),
    })? {
        opts.rotation = r;
    }
    if let Some(r) = parse_with(s, "scaling", |v| match v {
        "consistent" => Ok(ScaleRule::Consistent),
        "literal" => Ok(ScaleRule::Literal),
        _ => Err("expected consistent or literal".into()),
    })? {
        opts.scaling = r;
    }
    opts.blowup_factor = positive(s, "blowup_factor", s.get_or("blowup_factor", opts.blowup_factor)?)?;
    Ok(opts)
}

fn read_integrator(cfg: &RawConfig) -> Result<IntegratorConfig, ConfigError> {
    let mut ic = IntegratorConfig::default();
    let Some(s) = cfg.optional("integrator") else {
        return Ok(ic);
    };
    s.expect_keys(&["abs_tol", "rel_tol", "max_step", "dense_points", "max_steps"])?;
    ic.abs_tol = positive(s, "abs_tol", s.get_or("abs_tol", ic.abs_tol)?)?;
    ic.rel_tol = positive(s, "rel_tol", s.get_or("rel_tol", ic.rel_tol)?)?;
    ic.max_step = s.get_opt("max_step")?;
    ic.dense_points = s.get_or("dense_points", ic.dense_points)?;
    ic.max_steps = s.get_or("max_steps", ic.max_steps)?;
    ic.validate().map_err(|e| ConfigError::Syntax { line: s.line, message: e.to_string() })?;
    Ok(ic)
}

fn read_grid(cfg: &RawConfig) -> Result<Option<GridSettings>, ConfigError> {
    let Some(s) = cfg.optional("grid") else {
        return Ok(None);
    };
    s.expect_keys(&["half_width", "points", "rho_min", "rho_max", "times"])?;
    let half_width = positive(s, "half_width", s.get("half_width")?)?;
    let rho_max = positive(s, "rho_max", s.get_or("rho_max", half_width)?)?;
    let rho_min = s.get_or("rho_min", 0.05 * rho_max)?;
    let times = s.list("times")?;
    if times.is_empty() {
        return Err(invalid(s, "times", "need at least one time"));
    }
    Ok(Some(GridSettings { half_width, points: s.get("points")?, rho_min, rho_max, times }))
}

fn read_verification(cfg: &RawConfig) -> Result<Option<VerificationSettings>, ConfigError> {
    let Some(s) = cfg.optional("verification") else {
        return Ok(None);
    };
    s.expect_keys(&["dt", "stencil", "levels", "kind", "max_residual", "order", "order_tol"])?;
    let kind = parse_with(s, "kind", |v| match v {
        "temporal" => Ok(LadderKind::Temporal),
        "spatial" => Ok(LadderKind::Spatial),
        _ => Err("expected temporal or spatial".into()),
    })?
    .unwrap_or(LadderKind::Temporal);
    let levels: usize = s.get_or("levels", 3)?;
    if levels == 0 {
        return Err(invalid(s, "levels", "must be at least 1"));
    }
    let ladder =
        ResidualSettings { dt: positive(s, "dt", s.get("dt")?)?, stencil_step: s.get_opt("stencil")?, levels, kind };
    let default_order = match kind {
        LadderKind::Temporal => 2.0,
        LadderKind::Spatial => 4.0,
    };
    Ok(Some(VerificationSettings {
        ladder,
        max_residual: positive(s, "max_residual", s.get_or("max_residual", 1e-5)?)?,
        order: s.get_or("order", default_order)?,
        order_tol: s.get_or("order_tol", 0.3)?,
    }))
}

fn read_oracle(cfg: &RawConfig) -> Result<Option<OracleSettings>, ConfigError> {
    let Some(s) = cfg.optional("oracle") else {
        return Ok(None);
    };
    s.expect_keys(&["n_rho", "rho_max", "dt", "samples", "min_fidelity", "drift_tol", "probe_tol"])?;
    let probe_tol = parse_with(s, "probe_tol", |v| match v {
        "off" => Ok(None),
        v => v.parse::<f64>().map(Some).map_err(|e| e.to_string()),
    })?
    .unwrap_or(Some(1e-6));
    Ok(Some(OracleSettings {
        n_rho: s.get("n_rho")?,
        rho_max: positive(s, "rho_max", s.get("rho_max")?)?,
        dt: positive(s, "dt", s.get("dt")?)?,
        samples: s.get_or("samples", 11)?,
        min_fidelity: s.get_or("min_fidelity", 0.999)?,
        drift_tol: positive(s, "drift_tol", s.get_or("drift_tol", 1e-6)?)?,
        probe_tol,
    }))
}

fn read_scan(cfg: &RawConfig, span: Span) -> Result<ScanSettings, ConfigError> {
    let mid = 0.5 * (span.t0 + span.t1);
    let mut out = ScanSettings { dt: 0.0025, stencil: None, time: mid, points: 96 };
    let Some(s) = cfg.optional("scan") else {
        return Ok(out);
    };
    s.expect_keys(&["dt", "stencil", "time", "points"])?;
    out.dt = positive(s, "dt", s.get_or("dt", out.dt)?)?;
    out.stencil = s.get_opt("stencil")?;
    out.time = s.get_or("time", mid)?;
    if !span.contains(out.time) {
        return Err(invalid(s, "time", "outside [time]"));
    }
    out.points = s.get_or("points", out.points)?;
    Ok(out)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        const KNOWN: [&str; 13] = [
            "time",
            "mass",
            "frequency",
            "magnetic_field",
            "constants",
            "mode",
            "chain",
            "integrator",
            "grid",
            "verification",
            "oracle",
            "scan",
            "output",
        ];
        let raw = RawConfig::parse(text)?;
        if let Some(s) = raw.sections.iter().find(|s| !KNOWN.contains(&s.name.as_str())) {
            return Err(ConfigError::Syntax { line: s.line, message: format!("unknown section [{}]", s.name) });
        }
        let coeffs = read_coefficients(&raw)?;
        let grid = read_grid(&raw)?;
        let span = coeffs.span();
        if let Some(g) = &grid {
            if let Some(t) = g.times.iter().find(|t| !span.contains(**t)) {
                let s = raw.section("grid")?;
                return Err(invalid(s, "times", format!("t = {t} outside [time]")));
            }
        }
        let (output_dir, field_points) = match raw.optional("output") {
            Some(s) => {
                s.expect_keys(&["dir", "field_points"])?;
                let points: usize = s.get_or("field_points", 64)?;
                if points % 2 == 1 {
                    // an odd count puts a sample on the singular origin
                    return Err(invalid(s, "field_points", "must be even"));
                }
                (s.get_opt::<String>("dir")?.map(PathBuf::from), points)
            }
            None => (None, 64),
        };
        Ok(Self {
            digest: sha256_hex(text.as_bytes()),
            coeffs,
            mode: read_mode(&raw)?,
            chain: read_chain(&raw)?,
            integrator: read_integrator(&raw)?,
            scan: read_scan(&raw, span)?,
            grid,
            verification: read_verification(&raw)?,
            oracle: read_oracle(&raw)?,
            output_dir,
            field_points,
        })
    }

    pub fn require_grid(&self) -> Result<&GridSettings, ConfigError> {
        self.grid.as_ref().ok_or_else(|| ConfigError::MissingSection { section: "grid".into() })
    }

    pub fn require_verification(&self) -> Result<&VerificationSettings, ConfigError> {
        self.verification.as_ref().ok_or_else(|| ConfigError::MissingSection { section: "verification".into() })
    }

    pub fn require_oracle(&self) -> Result<&OracleSettings, ConfigError> {
        self.oracle.as_ref().ok_or_else(|| ConfigError::MissingSection { section: "oracle".into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "\
[time] t0=0 t1=1
[mass] family=constant m0=1
[frequency] family=constant w0=1
[magnetic_field] family=constant b0=1
[constants] q=1 C=1.5
[mode] k=1 n=1
";

    #[test]
    fn minimal_config_uses_numerical_defaults() {
        let rc = RunConfig::parse(BASE).unwrap();
        assert_eq!(rc.mode.n, 1);
        assert_eq!(rc.mode.flags, None);
        assert_eq!(rc.integrator, IntegratorConfig::default());
        assert!(rc.grid.is_none() && rc.oracle.is_none());
        assert_eq!(rc.digest.len(), 64);
    }

    #[test]
    fn mode_is_required() {
        let text = BASE.replace("[mode] k=1 n=1\n", "");
        assert_eq!(RunConfig::parse(&text).unwrap_err(), ConfigError::MissingSection { section: "mode".into() });
    }

    #[test]
    fn flags_and_grid_defaults() {
        let text = format!("{BASE}[grid] half_width=4 points=64 times=0.25,0.5\n")
            .replace("n=1", "n=1 flags=s=-1,h=1/2,branch=+");
        let rc = RunConfig::parse(&text).unwrap();
        assert_eq!(rc.mode.flags, Some(ConventionFlags::gaussian()));
        let g = rc.grid.unwrap();
        assert_eq!((g.rho_max, g.rho_min), (4.0, 0.2));
        assert_eq!(rc.scan.time, 0.5);
    }

    #[test]
    fn bad_values_report_lines() {
        let text = format!("{BASE}[verification] dt=0.01 kind=sideways\n");
        match RunConfig::parse(&text).unwrap_err() {
            ConfigError::InvalidValue { key, line, .. } => assert_eq!((key.as_str(), line), ("kind", 7)),
            other => panic!("{other:?}"),
        }
        let text = format!("{BASE}[extras] a=1\n");
        assert!(matches!(RunConfig::parse(&text), Err(ConfigError::Syntax { line: 7, .. })));
    }

    #[test]
    fn digest_tracks_text() {
        let a = RunConfig::parse(BASE).unwrap();
        let b = RunConfig::parse(&format!("{BASE}# note\n")).unwrap();
        assert_ne!(a.digest, b.digest);
    }
}
