//! Exhaustive game solving by full-depth minimax / expectiminimax with
//! memoization on the textual state encoding.
//!
//! Only usable on games whose state graph is a finite DAG (each reference
//! game guarantees this, through either the board filling up or a ply
//! counter). A state cap guards against feeding it something too large.

use std::collections::HashMap;

use thiserror::Error;

use super::{Game, GameError, Player};

pub const DEFAULT_STATE_CAP: usize = 5_000_000;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("exact solve exceeded the state cap of {cap} states")]
    StateCapExceeded { cap: usize },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Memoized exact solver. Reusable across queries; the memo persists.
pub struct ExactSolver<'g, G: Game> {
    game: &'g G,
    memo: HashMap<String, f64>,
    cap: usize,
}

impl<'g, G: Game> ExactSolver<'g, G> {
    pub fn new(game: &'g G) -> ExactSolver<'g, G> {
        Self::with_cap(game, DEFAULT_STATE_CAP)
    }

    pub fn with_cap(game: &'g G, cap: usize) -> ExactSolver<'g, G> {
        ExactSolver {
            game,
            memo: HashMap::new(),
            cap,
        }
    }

    /// Number of distinct states solved so far.
    pub fn states_seen(&self) -> usize {
        self.memo.len()
    }

    /// Exact game-theoretic value of `state` from the Learner's perspective.
    pub fn value(&mut self, state: &G::State) -> Result<f64, SolveError> {
        let key = self.game.encode_state(state);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let value = if self.game.is_terminal(state) {
            self.game.terminal_reward(state)?.value()
        } else {
            let maximizing = self.game.side_to_move(state) == Player::Learner;
            let mut best: Option<f64> = None;
            for action in self.game.legal_actions(state) {
                let v = self.action_value(state, &action)?;
                best = Some(match best {
                    None => v,
                    Some(b) if (maximizing && v > b) || (!maximizing && v < b) => v,
                    Some(b) => b,
                });
            }
            best.expect("non-terminal state has at least one legal action")
        };
        if self.memo.len() >= self.cap {
            return Err(SolveError::StateCapExceeded { cap: self.cap });
        }
        self.memo.insert(key, value);
        Ok(value)
    }

    /// Expected value of playing `action` in `state`: the chance-weighted
    /// mean over the action's outcome distribution.
    pub fn action_value(&mut self, state: &G::State, action: &G::Action) -> Result<f64, SolveError> {
        let mut total = 0.0;
        for event in self.game.chance_events(state, action) {
            let child = self.game.apply(state, action, &event)?;
            total += event.probability * self.value(&child)?;
        }
        Ok(total)
    }

    /// All optimal actions in canonical order (exact value ties kept).
    pub fn optimal_actions(&mut self, state: &G::State) -> Result<Vec<G::Action>, SolveError> {
        let maximizing = self.game.side_to_move(state) == Player::Learner;
        let actions = self.game.legal_actions(state);
        let mut values = Vec::with_capacity(actions.len());
        for action in &actions {
            values.push(self.action_value(state, action)?);
        }
        let best = values
            .iter()
            .copied()
            .reduce(|a, b| if (maximizing && b > a) || (!maximizing && b < a) { b } else { a })
            .unwrap_or(0.0);
        Ok(actions
            .into_iter()
            .zip(values)
            .filter(|(_, v)| *v == best)
            .map(|(a, _)| a)
            .collect())
    }
}

/// One-shot exact solve of `state` with the default state cap.
pub fn solve_exact<G: Game>(game: &G, state: &G::State) -> Result<f64, SolveError> {
    ExactSolver::new(game).value(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{DiceRace, Player, TicTacToe};

    #[test]
    fn tictactoe_from_empty_is_a_draw() {
        let game = TicTacToe::new();
        let value = solve_exact(&game, &game.initial_state(Player::Learner)).unwrap();
        assert_eq!(value, 0.0);
    }

    #[test]
    fn immediate_win_solves_to_one() {
        let game = TicTacToe::new();
        // Learner to move with two in a row and the third cell open.
        let s = game.decode_state("LL..OO...;L").unwrap();
        assert_eq!(solve_exact(&game, &s).unwrap(), 1.0);
    }

    #[test]
    fn dicerace_value_is_mean_of_optimal_action_children() {
        let game = DiceRace::new();
        let mut solver = ExactSolver::new(&game);
        let s = game.decode_state("6 7 L 14").unwrap();
        let value = solver.value(&s).unwrap();
        let best = solver.optimal_actions(&s).unwrap()[0];
        let mut mean = 0.0;
        for event in game.chance_events(&s, &best) {
            let child = game.apply(&s, &best, &event).unwrap();
            mean += event.probability * solver.value(&child).unwrap();
        }
        assert!((value - mean).abs() < 1e-12);
    }

    #[test]
    fn state_cap_is_reported() {
        let game = TicTacToe::new();
        let mut solver = ExactSolver::with_cap(&game, 10);
        let err = solver.value(&game.initial_state(Player::Learner)).unwrap_err();
        assert!(err.to_string().contains("10"));
    }
}
