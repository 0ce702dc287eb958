//! Game-agnostic temporal-difference training of evaluation functions used
//! inside fixed-depth minimax and expectiminimax search.
//!
//! The crate is organized around five pieces:
//!
//! - [`game`]: the two-player game interface and four reference games sized
//!   for exhaustive verification (tic-tac-toe, 5x4 connect-4, 5x5 material
//!   minichess and a stochastic dice race), plus an exact solver.
//! - [`eval`]: linear evaluation functions with analytic gradients, an
//!   optional tanh squash, and the plain-text weight-file format.
//! - [`search`]: fixed-depth minimax with optional alpha-beta pruning and
//!   expectiminimax for stochastic games, returning the principal variation,
//!   its leaf and the leaf gradient.
//! - [`td`]: the TD(lambda), TD-directed(lambda) and TDLeaf(lambda) update
//!   rules over recorded game trajectories.
//! - [`harness`]: agents, match play, training regimes, opponent pools and
//!   rating tracking.

pub mod eval;
pub mod game;
pub mod harness;
pub mod search;
pub mod td;

pub use eval::{evaluate, grad_check, material_init, pawn_equal_init, EvalResult, ParamVector, SquashConfig, WeightFile};
pub use game::{
    visit_game, ChanceEvent, FeatureVector, Game, GameError, GameVisitor, PieceKind, Player,
    Reward,
};
pub use search::{
    alphabeta, expectiminimax, minimax, select_action, ChanceHandling, Pruning, PvStep,
    SearchConfig, SearchResult,
};
pub use td::{
    lambda_sum, td_update, tdleaf_update, temporal_differences, Algorithm, AlphaSchedule,
    GameTrajectory, TrajectoryRecord, UpdateConfig, UpdateReport,
};
