//! Central tolerance record.
//!
//! Every numerical threshold used by the solvers and decision procedures is
//! read from one [`Tolerances`] value. A process may install an override once
//! (the CLI does this from `SHARPKIT_TOL`); otherwise the defaults apply.

use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Positive semidefiniteness, relative to the largest eigenvalue magnitude.
    pub psd: f64,
    /// Entrywise completeness residual of a POVM.
    pub completeness: f64,
    /// Largest Hermiticity violation silently symmetrized at construction.
    pub hermiticity: f64,
    /// Slack on the unit eigenvalue when testing sharpness.
    pub sharp: f64,
    /// Threshold for the trivial/projective/rank-one predicates.
    pub classify: f64,
    /// Relative duality gap accepted as optimal.
    pub gap: f64,
    /// Primal/dual residual accepted as feasible.
    pub feas: f64,
    /// Below this phase-1 violation a problem counts as feasible.
    pub feasible_below: f64,
    /// At or above this phase-1 violation a problem counts as infeasible.
    pub margin: f64,
    /// Smallest verified witness margin.
    pub witness_margin: f64,
    /// Interior-point iteration cap.
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd: 1e-9,
            completeness: 1e-9,
            hermiticity: 1e-8,
            sharp: 1e-7,
            classify: 1e-8,
            gap: 1e-8,
            feas: 1e-8,
            feasible_below: 1e-9,
            margin: 1e-7,
            witness_margin: 1e-8,
            max_iter: 200,
        }
    }
}

static INSTALLED: OnceLock<Tolerances> = OnceLock::new();

impl Tolerances {
    /// The active record: the installed override, or the defaults.
    pub fn current() -> &'static Tolerances {
        INSTALLED.get_or_init(Tolerances::default)
    }

    /// Installs a process-wide override. Fails if a record is already active.
    pub fn install(t: Tolerances) -> Result<()> {
        INSTALLED
            .set(t)
            .map_err(|_| Error::InvalidInput("tolerances already installed".into()))
    }
}

/// Parses `key=value` pairs separated by commas, starting from the defaults,
/// e.g. `gap=1e-9,margin=1e-6`.
impl FromStr for Tolerances {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut t = Tolerances::default();
        for pair in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("expected key=value, got `{pair}`")))?;
            let key = key.trim();
            let value = value.trim();
            let bad = || Error::InvalidInput(format!("bad value for `{key}`: `{value}`"));
            if key == "max_iter" {
                t.max_iter = value.parse().map_err(|_| bad())?;
                continue;
            }
            let v: f64 = value.parse().map_err(|_| bad())?;
            if !(v.is_finite() && v > 0.0) {
                return Err(bad());
            }
            let slot = match key {
                "psd" => &mut t.psd,
                "completeness" => &mut t.completeness,
                "hermiticity" => &mut t.hermiticity,
                "sharp" => &mut t.sharp,
                "classify" => &mut t.classify,
                "gap" => &mut t.gap,
                "feas" => &mut t.feas,
                "feasible_below" => &mut t.feasible_below,
                "margin" => &mut t.margin,
                "witness_margin" => &mut t.witness_margin,
                _ => return Err(Error::InvalidInput(format!("unknown tolerance `{key}`"))),
            };
            *slot = v;
        }
        if t.feasible_below >= t.margin {
            return Err(Error::InvalidInput(
                "feasible_below must be smaller than margin".into(),
            ));
        }
        Ok(t)
    }
}
