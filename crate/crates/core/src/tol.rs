//! Numerical tolerances used throughout the engine.
//!
//! Relative tolerances are scaled by a norm of the object they apply to at
//! the point of use (noted per field). Defaults assume IEEE double precision
//! and dense factorizations; every value can be overridden, e.g. from the CLI
//! config.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Eigenvalues within `zero_rel * norm(S)` of 0 count as the zero mode.
    pub zero_rel: f64,
    /// All non-zero eigenvalues must satisfy Re(lambda) < -gap_rel * norm(S).
    pub gap_rel: f64,
    /// Constrained solves must reach residual <= residual_rel * norm(rhs).
    pub residual_rel: f64,
    /// Hermiticity defects are accepted up to herm_rel * norm(X).
    pub herm_rel: f64,
    /// Positive-semidefiniteness decisions: min eigenvalue >= -psd_rel * norm.
    pub psd_rel: f64,
    /// Absolute deviation allowed between the numeric steady state and the
    /// truncated-renormalized analytic thermal state (cutoff diagnostic).
    pub thermal_abs: f64,
    /// Steady-state occupation of the top Fock levels must stay below this.
    pub tail_abs: f64,
    /// Maximum condition number of (I + G) accepted in gauge transformations.
    pub gauge_cond_max: f64,
    /// Warn when the timescale separation eps = |g|/gamma reaches this value.
    pub eps_warn: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero_rel: 1e-9,
            gap_rel: 1e-9,
            residual_rel: 1e-8,
            herm_rel: 1e-10,
            psd_rel: 1e-10,
            thermal_abs: 1e-6,
            tail_abs: 1e-8,
            gauge_cond_max: 1e6,
            eps_warn: 0.3,
        }
    }
}
