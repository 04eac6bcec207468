//! Independent reference implementations of the limit objects.
//!
//! Everything the lattice experiments converge *to* is built here a second
//! time, from scratch, out of conditioned simple random walks: the Brownian
//! meander (rejection on the minimum), the normalized excursion (exact
//! cycle transform), the shifted/killed process obtained by composing a
//! last-τ-rise time shift with killing at zero, closed-form reference laws
//! (Rayleigh, the excursion-maximum theta series, the Airy-type
//! excursion-area tail), and Monte Carlo tail tables with the quadratures
//! that turn them into cluster-statistic limit constants. None of this code touches the
//! lattice model, which is the point: agreement between the two stacks is
//! evidence for both.

pub mod pwl;
pub mod refs;
pub mod table;
pub mod walk;

pub use pwl::{kill_at_zero, sample_w_plus_tau, shifted_area_exceeds, t_tau_plus, Killed, PiecewiseLinear};
pub use refs::{
    ref_excursion_area_tail_asym, ref_excursion_max_cdf, ref_excursion_max_pdf, ref_rayleigh_sf,
    ref_xi_mean,
};
pub use table::{hack_limit_integral, shifted_area_integral, FunctionalTable, IntegralKind};
pub use walk::{
    first_return_time, sample_excursion, sample_excursion_rejection, sample_meander, sample_srw,
    WalkPath,
};

/// Errors from the oracle layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("argument {0} outside the valid domain")]
    DomainError(f64),
    #[error("need at least {need} samples, got {got}")]
    InsufficientSamples { need: u64, got: u64 },
    #[error("no tail table supplied for {0}")]
    TableMissing(String),
    #[error("no τ-rise point within the {domain}-step search domain; resample")]
    WalkTooShort { domain: usize },
    #[error("malformed table file: {0}")]
    TableFormat(String),
    #[error("table io: {0}")]
    Io(String),
}

/// Which scalar functional a sample or tail table describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FunctionalKind {
    /// ∫₀¹ of the meander.
    MeanderArea,
    /// Meander value at time 1.
    MeanderEndpoint,
    /// ∫₀¹ of the excursion.
    ExcursionArea,
    /// Maximum of the excursion.
    ExcursionMax,
    /// ∫₀^∞ of the shifted/killed process.
    ShiftedArea,
}

impl FunctionalKind {
    /// Stable tag used in table files and artifact names.
    pub fn tag(self) -> &'static str {
        match self {
            FunctionalKind::MeanderArea => "meander_area",
            FunctionalKind::MeanderEndpoint => "meander_endpoint",
            FunctionalKind::ExcursionArea => "excursion_area",
            FunctionalKind::ExcursionMax => "excursion_max",
            FunctionalKind::ShiftedArea => "shifted_area",
        }
    }

    /// Inverse of [`FunctionalKind::tag`].
    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "meander_area" => FunctionalKind::MeanderArea,
            "meander_endpoint" => FunctionalKind::MeanderEndpoint,
            "excursion_area" => FunctionalKind::ExcursionArea,
            "excursion_max" => FunctionalKind::ExcursionMax,
            "shifted_area" => FunctionalKind::ShiftedArea,
            _ => return None,
        })
    }
}

impl std::fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// One scalar draw of a path functional; values are nonnegative by
/// construction of every functional above.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FunctionalSample {
    pub kind: FunctionalKind,
    pub value: f64,
}
