//! Tic-tac-toe on the 3x3 board, small enough to solve exhaustively.
//!
//! State encoding: nine cells row-major from the top-left (`L`, `O` or `.`),
//! a semicolon, then the side to move, e.g. `L...O....;L`. Actions are named
//! by square, files `a`-`c` left to right and ranks `1`-`3` bottom to top.

use super::{ChanceEvent, FeatureVector, Game, GameError, Player, Reward};

const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

const CORNERS: [usize; 4] = [0, 2, 6, 8];
const CENTER: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    cells: [Option<Player>; 9],
    to_move: Player,
}

impl State {
    pub fn cell(&self, index: usize) -> Option<Player> {
        self.cells[index]
    }

    /// Owner of a completed line, if any.
    fn winner(&self) -> Option<Player> {
        LINES.iter().find_map(|line| {
            let first = self.cells[line[0]]?;
            if line.iter().all(|&c| self.cells[c] == Some(first)) {
                Some(first)
            } else {
                None
            }
        })
    }

    fn is_full(&self) -> bool {
        self.cells.iter().all(|c| c.is_some())
    }
}

/// A move onto an empty cell, indexed row-major from the top-left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move(pub usize);

#[derive(Debug, Clone, Copy, Default)]
pub struct TicTacToe;

impl TicTacToe {
    pub fn new() -> TicTacToe {
        TicTacToe
    }

    /// Lines holding exactly `count` marks of `side` and none of the other
    /// player, counted by scanning every line.
    fn open_lines(state: &State, side: Player, count: usize) -> usize {
        LINES
            .iter()
            .filter(|line| {
                let mine = line.iter().filter(|&&c| state.cells[c] == Some(side)).count();
                let theirs = line
                    .iter()
                    .filter(|&&c| state.cells[c] == Some(side.flip()))
                    .count();
                mine == count && theirs == 0
            })
            .count()
    }

    fn mark_char(cell: Option<Player>) -> char {
        match cell {
            Some(Player::Learner) => 'L',
            Some(Player::Opponent) => 'O',
            None => '.',
        }
    }
}

impl Game for TicTacToe {
    type State = State;
    type Action = Move;

    fn id(&self) -> &str {
        "tictactoe"
    }

    fn feature_len(&self) -> usize {
        6
    }

    fn feature_names(&self) -> Vec<String> {
        ["lines1", "lines2", "lines3", "center", "corners", "to_move"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn initial_state(&self, first_mover: Player) -> State {
        State {
            cells: [None; 9],
            to_move: first_mover,
        }
    }

    fn side_to_move(&self, state: &State) -> Player {
        state.to_move
    }

    fn is_terminal(&self, state: &State) -> bool {
        state.winner().is_some() || state.is_full()
    }

    fn legal_actions(&self, state: &State) -> Vec<Move> {
        if self.is_terminal(state) {
            return Vec::new();
        }
        (0..9).filter(|&c| state.cells[c].is_none()).map(Move).collect()
    }

    fn apply(&self, state: &State, action: &Move, _event: &ChanceEvent) -> Result<State, GameError> {
        if self.is_terminal(state) || action.0 >= 9 || state.cells[action.0].is_some() {
            return Err(GameError::IllegalAction {
                action: self.action_name(action),
                state: self.encode_state(state),
            });
        }
        let mut next = state.clone();
        next.cells[action.0] = Some(state.to_move);
        next.to_move = state.to_move.flip();
        Ok(next)
    }

    fn terminal_reward(&self, state: &State) -> Result<Reward, GameError> {
        if !self.is_terminal(state) {
            return Err(GameError::RewardBeforeTermination {
                state: self.encode_state(state),
            });
        }
        Ok(match state.winner() {
            Some(side) => Reward::win_for(side),
            None => Reward::DRAW,
        })
    }

    fn features(&self, state: &State) -> FeatureVector {
        let diff = |count| {
            (Self::open_lines(state, Player::Learner, count) as f64
                - Self::open_lines(state, Player::Opponent, count) as f64)
                / 8.0
        };
        let occupancy = |cell: Option<Player>| match cell {
            Some(Player::Learner) => 1.0,
            Some(Player::Opponent) => -1.0,
            None => 0.0,
        };
        let corners: f64 = CORNERS.iter().map(|&c| occupancy(state.cells[c])).sum();
        let to_move = if state.to_move == Player::Learner { 1.0 } else { -1.0 };
        FeatureVector::new(vec![
            diff(1),
            diff(2),
            diff(3),
            occupancy(state.cells[CENTER]),
            corners / 4.0,
            to_move,
        ])
    }

    fn encode_state(&self, state: &State) -> String {
        let mut out = String::with_capacity(11);
        for cell in &state.cells {
            out.push(Self::mark_char(*cell));
        }
        out.push(';');
        out.push_str(&state.to_move.to_string());
        out
    }

    fn decode_state(&self, text: &str) -> Result<State, GameError> {
        let err = |reason: &str| GameError::Decode {
            game: self.id().to_string(),
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let (board, stm) = text.split_once(';').ok_or_else(|| err("missing ';'"))?;
        let chars: Vec<char> = board.chars().collect();
        if chars.len() != 9 {
            return Err(err("board must have 9 cells"));
        }
        let mut cells = [None; 9];
        for (i, ch) in chars.iter().enumerate() {
            cells[i] = match ch {
                'L' => Some(Player::Learner),
                'O' => Some(Player::Opponent),
                '.' => None,
                _ => return Err(err("cells must be L, O or .")),
            };
        }
        let to_move = match stm {
            "L" => Player::Learner,
            "O" => Player::Opponent,
            _ => return Err(err("side to move must be L or O")),
        };
        Ok(State { cells, to_move })
    }

    fn action_name(&self, action: &Move) -> String {
        let file = (b'a' + (action.0 % 3) as u8) as char;
        let rank = 3 - action.0 / 3;
        format!("{file}{rank}")
    }

    fn heuristic_weights(&self) -> Vec<f64> {
        vec![0.3, 1.0, 2.0, 0.4, 0.2, 0.0]
    }
}
