//! Pathwise maximal inequalities for processes observed at finitely many
//! times: the dominating pathwise functional, the marginal upper-bound
//! functional, exact simulation of the extremal (iterated Azema-Yor type)
//! martingales, and sharp Doob-type constants.

pub mod boundary;
pub mod bounds;
pub mod doob;
pub mod embedding;
pub mod error;
pub mod pathwise;
pub mod phi;
pub mod rng;
pub mod stats;
pub mod types;

pub use boundary::{
    check_integrability, evaluate_boundary, BoundaryFn, BoundaryVector, IntegrabilityCheck,
    StoppingBoundaryVector,
};
pub use bounds::{
    compare_orderings, empirical_max_functional, optimize_zeta_single, optimize_zeta_vector,
    ub_at_level, ub_functional, zero_tail_level, CompareConfig, CompareReport, QuadratureGrid,
    QuadratureRule, TailRule, UbOptions, ZetaFamily,
};
pub use doob::{
    alpha_hat, alpha_hat_l1, doob_l1_classical, doob_l1_refined, doob_lp_classical,
    doob_lp_refined, doob_small_p, improved_l1, strictness_diagnostics, MomentProvenance,
    MomentSummary, StrictnessFlags, StrictnessMode,
};
pub use embedding::{
    exact_ensemble, extremal_moments, sample_iterated_ay_exact, sample_iterated_ay_walk,
    survival_single, walk_ensemble, ExtremalMoments, WalkEnsemble,
};
pub use error::{Error, Result};
pub use pathwise::{upsilon, verify_inequality, zeta_from_xi, UpsilonBreakdown, VerifyReport};
pub use phi::PhiSpec;
pub use rng::{path_rng, GENERATOR_ID};
pub use types::{
    BoundReport, ExtReal, GridDescription, MarginalSnapshot, MonteCarloEnsemble, TimeGrid,
};
