//! Safety games and sparse positional winning strategies.
//!
//! The crate solves explicit two-player safety games, computes the most
//! permissive winning strategy and extracts positional strategies that keep
//! few player-0 positions reachable. Extraction methods range from seeded
//! heuristics to exact branch and bound and SAT-based minimization.

pub mod format;
pub mod game;
pub mod generators;
pub mod harness;
pub mod heuristics;
pub mod ilp;
pub mod lp;
pub mod mealy;
pub mod oracle;
pub mod rng;
pub mod sat;
pub mod solve;

pub use format::{parse_game, parse_strategy, serialize_game, serialize_strategy, ParseError};
pub use game::{
    ActionId, GameBuilder, GameError, MostPermissiveStrategy, Owner, PlayWitness, PositionId,
    PositionSet, PositionalStrategy, SafetyGame, ValidationVerdict,
};
pub use rng::RngSeed;
pub use solve::{
    compute_winning_region, density, most_permissive, prune_reachable, search_space_bits, solve,
    validate_strategy, SolveError,
};
