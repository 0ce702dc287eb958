//! Connect-4 reduced to a 5x4 board (5 columns, 4 rows, four in a row wins).
//!
//! State encoding: five columns bottom to top separated by `/`, `-` for an
//! empty column, then `;` and the side to move, e.g. `LO/-/L/-/-;O`.
//! Actions are drops named by column letter `a`-`e`.

use std::sync::OnceLock;

use super::{ChanceEvent, FeatureVector, Game, GameError, Player, Reward};

pub const COLS: usize = 5;
pub const ROWS: usize = 4;
const CONNECT: usize = 4;
const CENTER_COL: usize = 2;

fn lines() -> &'static Vec<[(usize, usize); CONNECT]> {
    static LINES: OnceLock<Vec<[(usize, usize); CONNECT]>> = OnceLock::new();
    LINES.get_or_init(|| {
        let mut all = Vec::new();
        let dirs = [(1i32, 0i32), (0, 1), (1, 1), (1, -1)];
        for col in 0..COLS as i32 {
            for row in 0..ROWS as i32 {
                for (dc, dr) in dirs {
                    let end = (col + dc * (CONNECT as i32 - 1), row + dr * (CONNECT as i32 - 1));
                    if end.0 < 0 || end.0 >= COLS as i32 || end.1 < 0 || end.1 >= ROWS as i32 {
                        continue;
                    }
                    let mut line = [(0usize, 0usize); CONNECT];
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = (
                            (col + dc * i as i32) as usize,
                            (row + dr * i as i32) as usize,
                        );
                    }
                    all.push(line);
                }
            }
        }
        all
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    // cells[col][row], row 0 at the bottom
    cells: [[Option<Player>; ROWS]; COLS],
    to_move: Player,
}

impl State {
    fn height(&self, col: usize) -> usize {
        self.cells[col].iter().take_while(|c| c.is_some()).count()
    }

    fn winner(&self) -> Option<Player> {
        lines().iter().find_map(|line| {
            let first = self.cells[line[0].0][line[0].1]?;
            if line.iter().all(|&(c, r)| self.cells[c][r] == Some(first)) {
                Some(first)
            } else {
                None
            }
        })
    }

    fn is_full(&self) -> bool {
        (0..COLS).all(|c| self.height(c) == ROWS)
    }
}

/// A drop into a non-full column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Drop(pub usize);

#[derive(Debug, Clone, Copy, Default)]
pub struct Connect4;

impl Connect4 {
    pub fn new() -> Connect4 {
        Connect4
    }

    fn open_lines(state: &State, side: Player, count: usize) -> usize {
        lines()
            .iter()
            .filter(|line| {
                let mut mine = 0;
                let mut theirs = 0;
                for &(c, r) in line.iter() {
                    match state.cells[c][r] {
                        Some(p) if p == side => mine += 1,
                        Some(_) => theirs += 1,
                        None => {}
                    }
                }
                mine == count && theirs == 0
            })
            .count()
    }
}

impl Game for Connect4 {
    type State = State;
    type Action = Drop;

    fn id(&self) -> &str {
        "connect4"
    }

    fn feature_len(&self) -> usize {
        5
    }

    fn feature_names(&self) -> Vec<String> {
        ["lines1", "lines2", "lines3", "center_col", "to_move"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn initial_state(&self, first_mover: Player) -> State {
        State {
            cells: [[None; ROWS]; COLS],
            to_move: first_mover,
        }
    }

    fn side_to_move(&self, state: &State) -> Player {
        state.to_move
    }

    fn is_terminal(&self, state: &State) -> bool {
        state.winner().is_some() || state.is_full()
    }

    fn legal_actions(&self, state: &State) -> Vec<Drop> {
        if self.is_terminal(state) {
            return Vec::new();
        }
        (0..COLS).filter(|&c| state.height(c) < ROWS).map(Drop).collect()
    }

    fn apply(&self, state: &State, action: &Drop, _event: &ChanceEvent) -> Result<State, GameError> {
        if self.is_terminal(state) || action.0 >= COLS || state.height(action.0) >= ROWS {
            return Err(GameError::IllegalAction {
                action: self.action_name(action),
                state: self.encode_state(state),
            });
        }
        let mut next = state.clone();
        let row = state.height(action.0);
        next.cells[action.0][row] = Some(state.to_move);
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
        let total = lines().len() as f64;
        let diff = |count| {
            (Self::open_lines(state, Player::Learner, count) as f64
                - Self::open_lines(state, Player::Opponent, count) as f64)
                / total
        };
        let center: f64 = (0..ROWS)
            .map(|r| match state.cells[CENTER_COL][r] {
                Some(Player::Learner) => 1.0,
                Some(Player::Opponent) => -1.0,
                None => 0.0,
            })
            .sum();
        let to_move = if state.to_move == Player::Learner { 1.0 } else { -1.0 };
        FeatureVector::new(vec![
            diff(1),
            diff(2),
            diff(3),
            center / ROWS as f64,
            to_move,
        ])
    }

    fn encode_state(&self, state: &State) -> String {
        let mut cols = Vec::with_capacity(COLS);
        for col in 0..COLS {
            let h = state.height(col);
            if h == 0 {
                cols.push("-".to_string());
            } else {
                cols.push(
                    (0..h)
                        .map(|r| match state.cells[col][r] {
                            Some(Player::Learner) => 'L',
                            Some(Player::Opponent) => 'O',
                            None => unreachable!("height counts contiguous stones"),
                        })
                        .collect(),
                );
            }
        }
        format!("{};{}", cols.join("/"), state.to_move)
    }

    fn decode_state(&self, text: &str) -> Result<State, GameError> {
        let err = |reason: &str| GameError::Decode {
            game: self.id().to_string(),
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let (board, stm) = text.split_once(';').ok_or_else(|| err("missing ';'"))?;
        let cols: Vec<&str> = board.split('/').collect();
        if cols.len() != COLS {
            return Err(err("expected 5 columns"));
        }
        let mut cells = [[None; ROWS]; COLS];
        for (c, col) in cols.iter().enumerate() {
            if *col == "-" {
                continue;
            }
            if col.len() > ROWS {
                return Err(err("column too tall"));
            }
            for (r, ch) in col.chars().enumerate() {
                cells[c][r] = match ch {
                    'L' => Some(Player::Learner),
                    'O' => Some(Player::Opponent),
                    _ => return Err(err("stones must be L or O")),
                };
            }
        }
        let to_move = match stm {
            "L" => Player::Learner,
            "O" => Player::Opponent,
            _ => return Err(err("side to move must be L or O")),
        };
        Ok(State { cells, to_move })
    }

    fn action_name(&self, action: &Drop) -> String {
        ((b'a' + action.0 as u8) as char).to_string()
    }

    fn heuristic_weights(&self) -> Vec<f64> {
        vec![0.2, 0.8, 2.0, 0.3, 0.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game() -> Connect4 {
        Connect4
    }

    #[test]
    fn seventeen_lines_on_the_reduced_board() {
        assert_eq!(lines().len(), 17);
    }

    /// Independent generator: brute-force every drop sequence of a fixed
    /// prefix and confirm the non-full columns by recounting stones.
    #[test]
    fn full_column_removes_exactly_one_action() {
        let mut s = game().initial_state(Player::Learner);
        // Fill column c (index 2) with four alternating stones.
        for _ in 0..2 {
            s = game().apply(&s, &Drop(2), &ChanceEvent::UNIT).unwrap();
            s = game().apply(&s, &Drop(2), &ChanceEvent::UNIT).unwrap();
        }
        assert!(!game().is_terminal(&s));
        let actions = game().legal_actions(&s);
        let expected: Vec<Drop> = (0..COLS)
            .filter(|&c| {
                let stones = (0..ROWS).filter(|&r| s.cells[c][r].is_some()).count();
                stones < ROWS
            })
            .map(Drop)
            .collect();
        assert_eq!(actions, expected);
        assert_eq!(actions.len(), 4);
    }

    #[test]
    fn drop_lands_on_top_of_stack() {
        let g = game();
        let s0 = g.initial_state(Player::Learner);
        let s1 = g.apply(&s0, &Drop(1), &ChanceEvent::UNIT).unwrap();
        let s2 = g.apply(&s1, &Drop(1), &ChanceEvent::UNIT).unwrap();
        assert_eq!(s2.cells[1][0], Some(Player::Learner));
        assert_eq!(s2.cells[1][1], Some(Player::Opponent));
        assert_eq!(g.side_to_move(&s2), Player::Learner);
    }

    #[test]
    fn vertical_four_ends_the_game() {
        let g = game();
        let mut s = g.initial_state(Player::Learner);
        // L stacks column a while O stacks column b; L completes first.
        for col in [0, 1, 0, 1, 0, 1] {
            s = g.apply(&s, &Drop(col), &ChanceEvent::UNIT).unwrap();
        }
        s = g.apply(&s, &Drop(0), &ChanceEvent::UNIT).unwrap();
        assert!(g.is_terminal(&s));
        assert_eq!(g.terminal_reward(&s).unwrap().value(), 1.0);
        assert!(g.legal_actions(&s).is_empty());
    }

    #[test]
    fn encoding_round_trips() {
        let g = game();
        let mut s = g.initial_state(Player::Opponent);
        for col in [2, 2, 0, 4, 4] {
            s = g.apply(&s, &Drop(col), &ChanceEvent::UNIT).unwrap();
        }
        let text = g.encode_state(&s);
        assert_eq!(g.decode_state(&text).unwrap(), s);
        assert_eq!(text, "O/-/OL/-/LO;L");
    }

    #[test]
    fn role_swap_negates_features() {
        let g = game();
        let text = "L/-/OL/-/OL;O";
        let swapped = "O/-/LO/-/LO;L";
        let f = g.features(&g.decode_state(text).unwrap());
        let h = g.features(&g.decode_state(swapped).unwrap());
        for i in 0..f.len() {
            assert_eq!(f[i], -h[i]);
        }
    }
}
