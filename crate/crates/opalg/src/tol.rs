use serde::{Deserialize, Serialize};

/// Numerical tolerances used throughout the library.
///
/// * `rank_rel` / `rank_abs`: cutoffs for deciding the numerical rank of a
///   Gram or nullspace eigenvalue spectrum (relative to the largest
///   eigenvalue, with an absolute floor).
/// * `verify`: tolerance for structural verifications (self-adjointness,
///   automorphism checks, idempotence of projections, ...).
/// * `report`: tolerance at which derived quantities are reported as equal
///   (dimension cross-checks, seminorm/kernel agreement, ...).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ToleranceProfile {
    pub rank_rel: f64,
    pub rank_abs: f64,
    pub verify: f64,
    pub report: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        ToleranceProfile {
            rank_rel: 1e-9,
            rank_abs: 1e-12,
            verify: 1e-10,
            report: 1e-7,
        }
    }
}

impl ToleranceProfile {
    /// Eigenvalue cutoff used for rank decisions given the largest
    /// eigenvalue `max_ev` of a positive semidefinite matrix.
    pub fn rank_cutoff(&self, max_ev: f64) -> f64 {
        (self.rank_rel * max_ev.abs()).max(self.rank_abs)
    }
}
