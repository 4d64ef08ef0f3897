//! Exact solution of the time-dependent charged harmonic plus inverse-harmonic
//! oscillator in a time-dependent magnetic field, with the numerical machinery
//! to check it.
//!
//! The solution is built from a chain of scalar time functions (rotation angle
//! beta, Gaussian parameter alpha, scale mu and phase f, see [`ode`]) and Bessel
//! functions of real order ([`bessel`]). [`wavefunction`] assembles Psi(x, y, t)
//! and measures the Schrödinger residual on a grid; [`oracle`] propagates the
//! same initial data with a radial Crank-Nicolson scheme as an independent check.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod config;
pub mod export;
pub mod ode;
pub mod oracle;
pub mod params;
pub mod wavefunction;

use std::fmt;
use std::str::FromStr;

pub use num_complex::Complex64;

pub use bessel::{BesselError, BesselOrder, EvalDomain};
pub use ode::{ChainOptions, IntegratorConfig, OdeError, RotationRule, ScaleRule, TransformTrajectory};
pub use oracle::{OracleError, PropagationResult, RadialProblem};
pub use params::{CoefficientSet, Family, ParamError, Span, TimeFunction};
pub use wavefunction::{ConventionFlags, ModeSpec, ResidualReport, WaveError, WaveField};

/// A binary sign choice (`+1` or `-1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+" | "+1" | "1" | "plus" => Ok(Sign::Plus),
            "-" | "-1" | "minus" => Ok(Sign::Minus),
            other => Err(format!("expected + or -, got '{other}'")),
        }
    }
}
