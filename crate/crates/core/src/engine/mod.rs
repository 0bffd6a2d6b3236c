//! Resilience computations: the fixpoint on finite arenas, a brute-force
//! oracle, the height and value bounds, and the algorithm for the initial
//! vertex of a pushdown game.

pub mod algorithm;
pub mod bounds;
pub mod fixpoint;
pub mod oracle;

pub use algorithm::{
    auto_height, check_alpha, check_omega_plus_one, player1_wins_counter_game, resilience_initial,
    AlphaCheck, AnalysisOptions, EngineError, KSearch, OmegaCheck, Outcome, ResilienceReport,
};
pub use bounds::{bounds_for, compute_bounds, format_magnitude, height_bound, Bounds};
pub use fixpoint::{d_boundary, extract_optimal_strategy, resilience_fixpoint, ResilienceTable};
pub use oracle::{brute_force_resilience, survival_table, OracleValue};
