//! Resilience of pushdown and one-counter safety games against intermittent
//! disturbances.
//!
//! Games are described symbolically by a [`PushdownGameSpec`] and analysed on
//! finite truncations of their configuration graphs. The [`engine`] computes
//! resilience values, [`rigging`] hands the disturbances to Player 1,
//! [`strategy_graph`] certifies Player-1 wins on one-counter games and
//! [`reach`] derives reachability-optimal values.

pub mod arena;
pub mod engine;
pub mod format;
pub mod generators;
pub mod model;
pub mod normalize;
pub mod play;
pub mod reach;
pub mod rigging;
pub mod solver;
pub mod strategy_graph;
pub mod value;

pub use arena::{expand_truncated, ExplicitArena, FrontierMode, VertexId, VertexSet};
pub use engine::{resilience_initial, AnalysisOptions, Outcome, ResilienceReport};
pub use model::{Configuration, Player, PushdownGameSpec, SpecBuilder, Top};
pub use play::{Play, PositionalStrategy};
pub use strategy_graph::StrategyGraph;
pub use value::{Certificate, Resilience, ResilienceValue};
