//! Exact pure Nash equilibria for congestion games whose strategy spaces are
//! integral polymatroid base polyhedra.
//!
//! Rank functions live in [`polymatroid`], games and cost tables in [`game`],
//! the greedy best-response machinery in [`best_response`], the equilibrium
//! algorithm in [`solver`], an independent brute-force checker in [`oracle`],
//! instance families in [`generators`] and the JSON formats in [`io`].

pub mod best_response;
pub mod error;
pub mod game;
pub mod generators;
pub mod io;
pub mod oracle;
pub mod polymatroid;
pub mod solver;

pub use error::{Error, ErrorClass, Result};
pub use game::{CostTable, GameInstance, Player, Profile, WeightedGround};
pub use oracle::{verify_pne, OracleCaps, VerificationReport};
pub use polymatroid::{Element, Ideal, RankFunction};
pub use solver::{compute_pne, PlayerSelection, Solution, SolverPolicy, Trace};
