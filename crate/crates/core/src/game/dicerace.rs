//! Dice race: the minimal stochastic game.
//!
//! Each player owns one token on a 12-cell track (cells 0 through 11). On
//! your turn you pick one of two fair dice — `d2` rolling 1..2 or `d3`
//! rolling 1..3 — and advance your token by the roll. Landing exactly on
//! cell 11 wins; a roll that would overshoot leaves the token where it is.
//! The die choice is the whole decision: `d3` is faster on the open track,
//! `d2` is the better shot at an exact landing. Games reaching the 40-ply
//! cap are drawn, which also keeps the state graph acyclic for the exact
//! solver.
//!
//! State encoding: `<learner pos> <opponent pos> <side to move> <ply>`,
//! e.g. `3 7 L 12`. Actions are named `d2` and `d3` in that canonical
//! order; chance outcome `id` maps to a roll of `id + 1` pips.

use super::{ChanceEvent, FeatureVector, Game, GameError, Player, Reward};

pub const HOME: u8 = 11;
pub const PLY_CAP: u16 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct State {
    learner_pos: u8,
    opponent_pos: u8,
    to_move: Player,
    ply: u16,
}

impl State {
    pub fn position(&self, side: Player) -> u8 {
        match side {
            Player::Learner => self.learner_pos,
            Player::Opponent => self.opponent_pos,
        }
    }

    pub fn ply(&self) -> u16 {
        self.ply
    }
}

/// Which die to roll this turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Die {
    D2,
    D3,
}

impl Die {
    pub fn faces(self) -> usize {
        match self {
            Die::D2 => 2,
            Die::D3 => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DiceRace;

impl DiceRace {
    pub fn new() -> DiceRace {
        DiceRace
    }
}

impl Game for DiceRace {
    type State = State;
    type Action = Die;

    fn id(&self) -> &str {
        "dicerace"
    }

    fn feature_len(&self) -> usize {
        3
    }

    fn feature_names(&self) -> Vec<String> {
        ["lead", "near_home", "to_move"].iter().map(|s| s.to_string()).collect()
    }

    fn initial_state(&self, first_mover: Player) -> State {
        State {
            learner_pos: 0,
            opponent_pos: 0,
            to_move: first_mover,
            ply: 0,
        }
    }

    fn side_to_move(&self, state: &State) -> Player {
        state.to_move
    }

    fn is_terminal(&self, state: &State) -> bool {
        state.learner_pos == HOME || state.opponent_pos == HOME || state.ply >= PLY_CAP
    }

    fn legal_actions(&self, state: &State) -> Vec<Die> {
        if self.is_terminal(state) {
            return Vec::new();
        }
        vec![Die::D2, Die::D3]
    }

    fn chance_events(&self, _state: &State, action: &Die) -> Vec<ChanceEvent> {
        let faces = action.faces();
        (0..faces)
            .map(|id| ChanceEvent::new(id, 1.0 / faces as f64))
            .collect()
    }

    fn apply(&self, state: &State, action: &Die, event: &ChanceEvent) -> Result<State, GameError> {
        if self.is_terminal(state) {
            return Err(GameError::IllegalAction {
                action: self.action_name(action),
                state: self.encode_state(state),
            });
        }
        if event.id >= action.faces() {
            return Err(GameError::UnknownChanceEvent {
                id: event.id,
                action: self.action_name(action),
            });
        }
        let roll = event.id as u8 + 1;
        let mut next = *state;
        let pos = next.position(state.to_move);
        let landed = pos + roll;
        let new_pos = if landed <= HOME { landed } else { pos };
        match state.to_move {
            Player::Learner => next.learner_pos = new_pos,
            Player::Opponent => next.opponent_pos = new_pos,
        }
        next.to_move = state.to_move.flip();
        next.ply = state.ply + 1;
        Ok(next)
    }

    fn terminal_reward(&self, state: &State) -> Result<Reward, GameError> {
        if state.learner_pos == HOME {
            Ok(Reward::WIN)
        } else if state.opponent_pos == HOME {
            Ok(Reward::LOSS)
        } else if state.ply >= PLY_CAP {
            Ok(Reward::DRAW)
        } else {
            Err(GameError::RewardBeforeTermination {
                state: self.encode_state(state),
            })
        }
    }

    fn features(&self, state: &State) -> FeatureVector {
        let near = |pos: u8| if pos >= 9 { 1.0 } else { 0.0 };
        FeatureVector::new(vec![
            (state.learner_pos as f64 - state.opponent_pos as f64) / HOME as f64,
            near(state.learner_pos) - near(state.opponent_pos),
            if state.to_move == Player::Learner { 1.0 } else { -1.0 },
        ])
    }

    fn encode_state(&self, state: &State) -> String {
        format!(
            "{} {} {} {}",
            state.learner_pos, state.opponent_pos, state.to_move, state.ply
        )
    }

    fn decode_state(&self, text: &str) -> Result<State, GameError> {
        let err = |reason: &str| GameError::Decode {
            game: self.id().to_string(),
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err("expected 4 fields"));
        }
        let learner_pos: u8 = fields[0].parse().map_err(|_| err("bad learner position"))?;
        let opponent_pos: u8 = fields[1].parse().map_err(|_| err("bad opponent position"))?;
        if learner_pos > HOME || opponent_pos > HOME {
            return Err(err("position beyond home"));
        }
        let to_move = match fields[2] {
            "L" => Player::Learner,
            "O" => Player::Opponent,
            _ => return Err(err("side to move must be L or O")),
        };
        let ply: u16 = fields[3].parse().map_err(|_| err("bad ply count"))?;
        Ok(State { learner_pos, opponent_pos, to_move, ply })
    }

    fn action_name(&self, action: &Die) -> String {
        match action {
            Die::D2 => "d2".to_string(),
            Die::D3 => "d3".to_string(),
        }
    }

    fn is_stochastic(&self) -> bool {
        true
    }

    fn heuristic_weights(&self) -> Vec<f64> {
        vec![1.0, 0.4, 0.1]
    }
}
