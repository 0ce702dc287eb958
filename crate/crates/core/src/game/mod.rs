//! Two-player zero-sum game interface and the reference games.
//!
//! Every game is expressed from a fixed *Learner* perspective: features and
//! rewards always describe how good a state is for the Learner, no matter
//! whose turn it is. The side to move is carried separately in each state,
//! which makes opponent decision nodes a literal `min` during search.
//!
//! Stochastic games model chance as a distribution over outcomes of a
//! (state, action) pair: the mover commits to an action, then a
//! [`ChanceEvent`] drawn from [`Game::chance_events`] decides the successor.
//! Deterministic games use the single unit event.

use std::fmt;

use thiserror::Error;

pub mod connect4;
pub mod dicerace;
pub mod minichess;
pub mod playout;
pub mod solver;
pub mod tictactoe;
pub mod tree;

pub use connect4::Connect4;
pub use dicerace::DiceRace;
pub use minichess::MiniChess;
pub use solver::{solve_exact, ExactSolver, SolveError};
pub use tictactoe::TicTacToe;
pub use tree::TreeGame;

/// Which of the two players a state or piece belongs to.
///
/// `Learner` is the side whose reward the evaluation function predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Learner,
    Opponent,
}

impl Player {
    pub fn flip(self) -> Player {
        match self {
            Player::Learner => Player::Opponent,
            Player::Opponent => Player::Learner,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Learner => write!(f, "L"),
            Player::Opponent => write!(f, "O"),
        }
    }
}

/// Terminal outcome from the Learner's perspective: +1 win, -1 loss, 0 draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reward(f64);

impl Reward {
    pub const WIN: Reward = Reward(1.0);
    pub const LOSS: Reward = Reward(-1.0);
    pub const DRAW: Reward = Reward(0.0);

    /// Wraps a scalar reward, rejecting anything outside [-1, 1].
    pub fn new(value: f64) -> Result<Reward, GameError> {
        if !value.is_finite() || value.abs() > 1.0 {
            return Err(GameError::InvalidReward(value));
        }
        Ok(Reward(value))
    }

    /// The winning reward for `side`.
    pub fn win_for(side: Player) -> Reward {
        match side {
            Player::Learner => Reward::WIN,
            Player::Opponent => Reward::LOSS,
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// One outcome of a chance node, identified by index into the canonical
/// outcome list of a (state, action) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChanceEvent {
    pub id: usize,
    pub probability: f64,
}

impl ChanceEvent {
    /// The single certain outcome used by deterministic games.
    pub const UNIT: ChanceEvent = ChanceEvent { id: 0, probability: 1.0 };

    pub fn new(id: usize, probability: f64) -> ChanceEvent {
        ChanceEvent { id, probability }
    }
}

/// Feature values extracted from a state, always from the Learner's
/// fixed perspective. Length is constant per game.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> FeatureVector {
        FeatureVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for FeatureVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Piece kinds a game may expose for material-based weight initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PieceKind {
    Pawn,
    Knight,
    Bishop,
    Rook,
    Queen,
    King,
}

impl PieceKind {
    /// The conventional computer values: pawn 1, knight 4, bishop 4,
    /// rook 6, queen 12. The king carries no material weight.
    pub fn material_value(self) -> f64 {
        match self {
            PieceKind::Pawn => 1.0,
            PieceKind::Knight => 4.0,
            PieceKind::Bishop => 4.0,
            PieceKind::Rook => 6.0,
            PieceKind::Queen => 12.0,
            PieceKind::King => 0.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("illegal action {action} in state {state}")]
    IllegalAction { action: String, state: String },
    #[error("reward undefined before termination (state {state})")]
    RewardBeforeTermination { state: String },
    #[error("invalid reward value {0}")]
    InvalidReward(f64),
    #[error("unknown chance event id {id} for action {action}")]
    UnknownChanceEvent { id: usize, action: String },
    #[error("cannot decode {game} state from {text:?}: {reason}")]
    Decode {
        game: String,
        text: String,
        reason: String,
    },
    #[error("unknown game id {0:?}")]
    UnknownGame(String),
}

/// A two-player (optionally stochastic) zero-sum game.
///
/// All operations are pure functions of their inputs; implementations hold
/// only immutable rule tables and may be shared freely across threads.
pub trait Game {
    type State: Clone + PartialEq + fmt::Debug;
    type Action: Clone + PartialEq + fmt::Debug;

    /// Stable identifier used in file headers and CLI configs.
    fn id(&self) -> &str;

    /// Number of features, constant for the lifetime of the game.
    fn feature_len(&self) -> usize;

    /// One stable name per feature, used in weight files.
    fn feature_names(&self) -> Vec<String>;

    /// Starting position with `first_mover` to move.
    fn initial_state(&self, first_mover: Player) -> Self::State;

    fn side_to_move(&self, state: &Self::State) -> Player;

    fn is_terminal(&self, state: &Self::State) -> bool;

    /// Legal actions in canonical order. Empty exactly when the state is
    /// terminal; repeated calls return the identical list.
    fn legal_actions(&self, state: &Self::State) -> Vec<Self::Action>;

    /// Outcome distribution of playing `action` in `state`, in canonical
    /// event order. Deterministic games return the unit event.
    fn chance_events(&self, _state: &Self::State, _action: &Self::Action) -> Vec<ChanceEvent> {
        vec![ChanceEvent::UNIT]
    }

    /// Successor of `state` under `action` and chance outcome `event`.
    fn apply(
        &self,
        state: &Self::State,
        action: &Self::Action,
        event: &ChanceEvent,
    ) -> Result<Self::State, GameError>;

    /// Terminal reward from the Learner's perspective. Errors on
    /// non-terminal states.
    fn terminal_reward(&self, state: &Self::State) -> Result<Reward, GameError>;

    /// Feature vector of `state`, Learner perspective, length `feature_len`.
    fn features(&self, state: &Self::State) -> FeatureVector;

    /// Single-line textual encoding. `decode_state(encode_state(s)) == s`.
    fn encode_state(&self, state: &Self::State) -> String;

    fn decode_state(&self, text: &str) -> Result<Self::State, GameError>;

    /// Canonical action name as recorded in game records.
    fn action_name(&self, action: &Self::Action) -> String;

    /// Whether any (state, action) pair has more than one chance outcome.
    fn is_stochastic(&self) -> bool {
        false
    }

    /// Feature indices that count material, for material initialization.
    fn material_features(&self) -> Option<Vec<(usize, PieceKind)>> {
        None
    }

    /// Fixed weights of a reasonable hand-tuned evaluator, used to grade
    /// opponent-pool members.
    fn heuristic_weights(&self) -> Vec<f64>;

    /// Looks up an action by its canonical name among the legal actions.
    fn action_by_name(&self, state: &Self::State, name: &str) -> Result<Self::Action, GameError> {
        self.legal_actions(state)
            .into_iter()
            .find(|a| self.action_name(a) == name)
            .ok_or_else(|| GameError::IllegalAction {
                action: name.to_string(),
                state: self.encode_state(state),
            })
    }
}

/// Ids of the games the CLI and harness can name.
pub const GAME_IDS: [&str; 4] = ["tictactoe", "connect4", "minichess", "dicerace"];

/// Monomorphizing dispatch from a runtime game id.
pub trait GameVisitor {
    type Output;
    fn visit<G: Game>(self, game: G) -> Self::Output;
}

/// Runs `visitor` with the game named by `id`.
pub fn visit_game<V: GameVisitor>(id: &str, visitor: V) -> Result<V::Output, GameError> {
    match id {
        "tictactoe" => Ok(visitor.visit(TicTacToe::new())),
        "connect4" => Ok(visitor.visit(Connect4::new())),
        "minichess" => Ok(visitor.visit(MiniChess::new())),
        "dicerace" => Ok(visitor.visit(DiceRace::new())),
        other => Err(GameError::UnknownGame(other.to_string())),
    }
}
