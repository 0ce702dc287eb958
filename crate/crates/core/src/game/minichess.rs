//! Material minichess: chess on the 5x5 Gardner layout with capture-the-king
//! rules and material-count features.
//!
//! Rules kept deliberately small: pieces move as in chess (no castling, no
//! double pawn step, no en passant), pawns auto-promote to queens, there is
//! no notion of check — the game ends when a king is captured. A side with
//! no moves, or a game reaching the 80-ply cap, is a draw.
//!
//! State encoding is FEN-like: ranks 5 down to 1 separated by `/`, uppercase
//! for Learner pieces and lowercase for Opponent pieces, digits for runs of
//! empty squares, then side to move (`L`/`O`), the Learner's pawn direction
//! (`u` toward rank 5, `d` toward rank 1) and the ply count, e.g.
//! `rnbqk/ppppp/5/PPPPP/RNBQK L u 0`. Actions are named from-square to
//! to-square, e.g. `b1c3`.

use super::{ChanceEvent, FeatureVector, Game, GameError, PieceKind, Player, Reward};

pub const SIZE: usize = 5;
const SQUARES: usize = SIZE * SIZE;
pub const PLY_CAP: u16 = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Piece {
    pub kind: PieceKind,
    pub owner: Player,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    board: [Option<Piece>; SQUARES],
    to_move: Player,
    /// +1 if Learner pawns advance toward rank 5, -1 toward rank 1.
    learner_dir: i8,
    ply: u16,
}

impl State {
    pub fn piece_at(&self, square: usize) -> Option<Piece> {
        self.board[square]
    }

    pub fn ply(&self) -> u16 {
        self.ply
    }

    fn dir_of(&self, side: Player) -> i8 {
        if side == Player::Learner {
            self.learner_dir
        } else {
            -self.learner_dir
        }
    }

    fn king_square(&self, side: Player) -> Option<usize> {
        self.board.iter().position(|p| {
            matches!(p, Some(piece) if piece.kind == PieceKind::King && piece.owner == side)
        })
    }
}

/// A from-square/to-square move; promotion to queen is implied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Move {
    pub from: u8,
    pub to: u8,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MiniChess;

const KNIGHT_JUMPS: [(i32, i32); 8] = [
    (-2, -1),
    (-2, 1),
    (-1, -2),
    (-1, 2),
    (1, -2),
    (1, 2),
    (2, -1),
    (2, 1),
];
const ROOK_DIRS: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const BISHOP_DIRS: [(i32, i32); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
const KING_DIRS: [(i32, i32); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];
const BACK_RANK: [PieceKind; SIZE] = [
    PieceKind::Rook,
    PieceKind::Knight,
    PieceKind::Bishop,
    PieceKind::Queen,
    PieceKind::King,
];

fn square(file: i32, rank: i32) -> Option<usize> {
    if (0..SIZE as i32).contains(&file) && (0..SIZE as i32).contains(&rank) {
        Some((rank * SIZE as i32 + file) as usize)
    } else {
        None
    }
}

fn file_rank(sq: usize) -> (i32, i32) {
    ((sq % SIZE) as i32, (sq / SIZE) as i32)
}

fn square_name(sq: usize) -> String {
    let (file, rank) = file_rank(sq);
    format!("{}{}", (b'a' + file as u8) as char, rank + 1)
}

fn parse_square(text: &str) -> Option<usize> {
    let mut chars = text.chars();
    let file = chars.next()? as i32 - 'a' as i32;
    let rank = chars.next()?.to_digit(10)? as i32 - 1;
    if chars.next().is_some() {
        return None;
    }
    square(file, rank)
}

impl MiniChess {
    pub fn new() -> MiniChess {
        MiniChess
    }

    /// Pseudo-legal destinations of the piece on `from`; empty when the
    /// square is empty or owned by the side not on move.
    fn piece_targets(&self, state: &State, from: usize) -> Vec<usize> {
        let piece = match state.board[from] {
            Some(p) if p.owner == state.to_move => p,
            _ => return Vec::new(),
        };
        let (file, rank) = file_rank(from);
        let mut targets = Vec::new();
        let mut push_if = |sq: Option<usize>, capture_ok: bool, quiet_ok: bool| {
            if let Some(sq) = sq {
                match state.board[sq] {
                    None if quiet_ok => targets.push(sq),
                    Some(p) if capture_ok && p.owner != piece.owner => targets.push(sq),
                    _ => {}
                }
            }
        };
        match piece.kind {
            PieceKind::Pawn => {
                let dir = state.dir_of(piece.owner) as i32;
                push_if(square(file, rank + dir), false, true);
                push_if(square(file - 1, rank + dir), true, false);
                push_if(square(file + 1, rank + dir), true, false);
            }
            PieceKind::Knight => {
                for (df, dr) in KNIGHT_JUMPS {
                    push_if(square(file + df, rank + dr), true, true);
                }
            }
            PieceKind::King => {
                for (df, dr) in KING_DIRS {
                    push_if(square(file + df, rank + dr), true, true);
                }
            }
            PieceKind::Rook | PieceKind::Bishop | PieceKind::Queen => {
                let dirs: &[(i32, i32)] = match piece.kind {
                    PieceKind::Rook => &ROOK_DIRS,
                    PieceKind::Bishop => &BISHOP_DIRS,
                    _ => &[
                        (1, 0),
                        (-1, 0),
                        (0, 1),
                        (0, -1),
                        (1, 1),
                        (1, -1),
                        (-1, 1),
                        (-1, -1),
                    ],
                };
                for &(df, dr) in dirs {
                    let mut step = 1;
                    while let Some(sq) = square(file + df * step, rank + dr * step) {
                        match state.board[sq] {
                            None => targets.push(sq),
                            Some(p) => {
                                if p.owner != piece.owner {
                                    targets.push(sq);
                                }
                                break;
                            }
                        }
                        step += 1;
                    }
                }
            }
        }
        targets
    }

    fn has_any_move(&self, state: &State) -> bool {
        (0..SQUARES).any(|from| !self.piece_targets(state, from).is_empty())
    }

    fn count(state: &State, side: Player, kind: PieceKind) -> usize {
        state
            .board
            .iter()
            .filter(|p| matches!(p, Some(piece) if piece.owner == side && piece.kind == kind))
            .count()
    }

    fn piece_char(piece: Piece) -> char {
        let ch = match piece.kind {
            PieceKind::Pawn => 'p',
            PieceKind::Knight => 'n',
            PieceKind::Bishop => 'b',
            PieceKind::Rook => 'r',
            PieceKind::Queen => 'q',
            PieceKind::King => 'k',
        };
        if piece.owner == Player::Learner {
            ch.to_ascii_uppercase()
        } else {
            ch
        }
    }

    fn piece_from_char(ch: char) -> Option<Piece> {
        let kind = match ch.to_ascii_lowercase() {
            'p' => PieceKind::Pawn,
            'n' => PieceKind::Knight,
            'b' => PieceKind::Bishop,
            'r' => PieceKind::Rook,
            'q' => PieceKind::Queen,
            'k' => PieceKind::King,
            _ => return None,
        };
        let owner = if ch.is_ascii_uppercase() {
            Player::Learner
        } else {
            Player::Opponent
        };
        Some(Piece { kind, owner })
    }
}

impl Game for MiniChess {
    type State = State;
    type Action = Move;

    fn id(&self) -> &str {
        "minichess"
    }

    fn feature_len(&self) -> usize {
        5
    }

    fn feature_names(&self) -> Vec<String> {
        ["pawns", "knights", "bishops", "rooks", "queens"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn initial_state(&self, first_mover: Player) -> State {
        let mut board = [None; SQUARES];
        for (file, &kind) in BACK_RANK.iter().enumerate() {
            board[file] = Some(Piece { kind, owner: first_mover });
            board[SIZE + file] = Some(Piece { kind: PieceKind::Pawn, owner: first_mover });
            let second = first_mover.flip();
            board[(SIZE - 1) * SIZE + file] = Some(Piece { kind, owner: second });
            board[(SIZE - 2) * SIZE + file] = Some(Piece { kind: PieceKind::Pawn, owner: second });
        }
        State {
            board,
            to_move: first_mover,
            learner_dir: if first_mover == Player::Learner { 1 } else { -1 },
            ply: 0,
        }
    }

    fn side_to_move(&self, state: &State) -> Player {
        state.to_move
    }

    fn is_terminal(&self, state: &State) -> bool {
        state.king_square(Player::Learner).is_none()
            || state.king_square(Player::Opponent).is_none()
            || state.ply >= PLY_CAP
            || !self.has_any_move(state)
    }

    fn legal_actions(&self, state: &State) -> Vec<Move> {
        if state.king_square(Player::Learner).is_none()
            || state.king_square(Player::Opponent).is_none()
            || state.ply >= PLY_CAP
        {
            return Vec::new();
        }
        let mut moves = Vec::new();
        for from in 0..SQUARES {
            for to in self.piece_targets(state, from) {
                moves.push(Move { from: from as u8, to: to as u8 });
            }
        }
        moves.sort_unstable();
        moves
    }

    fn apply(&self, state: &State, action: &Move, _event: &ChanceEvent) -> Result<State, GameError> {
        let from = action.from as usize;
        let to = action.to as usize;
        let legal = from < SQUARES
            && to < SQUARES
            && !self.is_terminal(state)
            && self.piece_targets(state, from).contains(&to);
        if !legal {
            return Err(GameError::IllegalAction {
                action: self.action_name(action),
                state: self.encode_state(state),
            });
        }
        let mut next = state.clone();
        let mut piece = next.board[from].expect("validated non-empty origin");
        let (_, to_rank) = file_rank(to);
        let last_rank = if state.dir_of(piece.owner) > 0 { SIZE as i32 - 1 } else { 0 };
        if piece.kind == PieceKind::Pawn && to_rank == last_rank {
            piece.kind = PieceKind::Queen;
        }
        next.board[from] = None;
        next.board[to] = Some(piece);
        next.to_move = state.to_move.flip();
        next.ply = state.ply + 1;
        Ok(next)
    }

    fn terminal_reward(&self, state: &State) -> Result<Reward, GameError> {
        if state.king_square(Player::Learner).is_none() {
            return Ok(Reward::LOSS);
        }
        if state.king_square(Player::Opponent).is_none() {
            return Ok(Reward::WIN);
        }
        if state.ply >= PLY_CAP || !self.has_any_move(state) {
            return Ok(Reward::DRAW);
        }
        Err(GameError::RewardBeforeTermination {
            state: self.encode_state(state),
        })
    }

    fn features(&self, state: &State) -> FeatureVector {
        let kinds = [
            PieceKind::Pawn,
            PieceKind::Knight,
            PieceKind::Bishop,
            PieceKind::Rook,
            PieceKind::Queen,
        ];
        FeatureVector::new(
            kinds
                .iter()
                .map(|&kind| {
                    Self::count(state, Player::Learner, kind) as f64
                        - Self::count(state, Player::Opponent, kind) as f64
                })
                .collect(),
        )
    }

    fn encode_state(&self, state: &State) -> String {
        let mut ranks = Vec::with_capacity(SIZE);
        for rank in (0..SIZE).rev() {
            let mut text = String::new();
            let mut empties = 0;
            for file in 0..SIZE {
                match state.board[rank * SIZE + file] {
                    None => empties += 1,
                    Some(piece) => {
                        if empties > 0 {
                            text.push_str(&empties.to_string());
                            empties = 0;
                        }
                        text.push(Self::piece_char(piece));
                    }
                }
            }
            if empties > 0 {
                text.push_str(&empties.to_string());
            }
            ranks.push(text);
        }
        format!(
            "{} {} {} {}",
            ranks.join("/"),
            state.to_move,
            if state.learner_dir > 0 { 'u' } else { 'd' },
            state.ply
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
        let ranks: Vec<&str> = fields[0].split('/').collect();
        if ranks.len() != SIZE {
            return Err(err("expected 5 ranks"));
        }
        let mut board = [None; SQUARES];
        for (i, rank_text) in ranks.iter().enumerate() {
            let rank = SIZE - 1 - i;
            let mut file = 0usize;
            for ch in rank_text.chars() {
                if let Some(run) = ch.to_digit(10) {
                    file += run as usize;
                } else {
                    let piece = Self::piece_from_char(ch).ok_or_else(|| err("bad piece letter"))?;
                    if file >= SIZE {
                        return Err(err("rank overflows 5 files"));
                    }
                    board[rank * SIZE + file] = Some(piece);
                    file += 1;
                }
            }
            if file != SIZE {
                return Err(err("rank does not cover 5 files"));
            }
        }
        let to_move = match fields[1] {
            "L" => Player::Learner,
            "O" => Player::Opponent,
            _ => return Err(err("side to move must be L or O")),
        };
        let learner_dir = match fields[2] {
            "u" => 1,
            "d" => -1,
            _ => return Err(err("direction must be u or d")),
        };
        let ply: u16 = fields[3].parse().map_err(|_| err("bad ply count"))?;
        Ok(State { board, to_move, learner_dir, ply })
    }

    fn action_name(&self, action: &Move) -> String {
        format!("{}{}", square_name(action.from as usize), square_name(action.to as usize))
    }

    fn material_features(&self) -> Option<Vec<(usize, PieceKind)>> {
        Some(vec![
            (0, PieceKind::Pawn),
            (1, PieceKind::Knight),
            (2, PieceKind::Bishop),
            (3, PieceKind::Rook),
            (4, PieceKind::Queen),
        ])
    }

    fn heuristic_weights(&self) -> Vec<f64> {
        vec![1.0, 4.0, 4.0, 6.0, 12.0]
    }

    fn action_by_name(&self, state: &State, name: &str) -> Result<Move, GameError> {
        if name.len() == 4 {
            if let (Some(from), Some(to)) = (parse_square(&name[..2]), parse_square(&name[2..])) {
                let action = Move { from: from as u8, to: to as u8 };
                if self.piece_targets(state, from).contains(&to) {
                    return Ok(action);
                }
            }
        }
        Err(GameError::IllegalAction {
            action: name.to_string(),
            state: self.encode_state(state),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game() -> MiniChess {
        MiniChess
    }

    #[test]
    fn initial_position_encodes_like_fen() {
        let s = game().initial_state(Player::Learner);
        assert_eq!(game().encode_state(&s), "rnbqk/ppppp/5/PPPPP/RNBQK L u 0");
        let o = game().initial_state(Player::Opponent);
        assert_eq!(game().encode_state(&o), "RNBQK/PPPPP/5/ppppp/rnbqk O d 0");
    }

    #[test]
    fn encoding_round_trips() {
        let g = game();
        let mut s = g.initial_state(Player::Learner);
        for name in ["b1c3", "b5c3", "a2a3", "c3a2"] {
            let action = g.action_by_name(&s, name).unwrap();
            s = g.apply(&s, &action, &ChanceEvent::UNIT).unwrap();
        }
        let text = g.encode_state(&s);
        assert_eq!(g.decode_state(&text).unwrap(), s);
    }

    #[test]
    fn initial_features_are_all_zero() {
        let f = game().features(&game().initial_state(Player::Learner));
        assert_eq!(f.values(), &[0.0; 5]);
    }

    /// Independent material recount from the raw board, used as the oracle
    /// for capture bookkeeping.
    fn recount(state: &State) -> Vec<f64> {
        let mut counts = [0f64; 5];
        for sq in 0..SQUARES {
            if let Some(piece) = state.piece_at(sq) {
                let slot = match piece.kind {
                    PieceKind::Pawn => 0,
                    PieceKind::Knight => 1,
                    PieceKind::Bishop => 2,
                    PieceKind::Rook => 3,
                    PieceKind::Queen => 4,
                    PieceKind::King => continue,
                };
                counts[slot] += if piece.owner == Player::Learner { 1.0 } else { -1.0 };
            }
        }
        counts.to_vec()
    }

    #[test]
    fn capture_updates_material_against_recount() {
        let g = game();
        let mut s = g.initial_state(Player::Learner);
        // Learner knight jumps to c3 and the b4 pawn takes it.
        for name in ["b1c3", "b4c3"] {
            let action = g.action_by_name(&s, name).unwrap();
            s = g.apply(&s, &action, &ChanceEvent::UNIT).unwrap();
        }
        let f = g.features(&s);
        assert_eq!(f.values(), recount(&s).as_slice());
        // Learner lost the knight to the pawn: knights -1, pawns even.
        assert_eq!(f[1], -1.0);
        assert_eq!(f[0], 0.0);
    }

    #[test]
    fn king_capture_ends_the_game() {
        let g = game();
        // Learner queen on the king's file.
        let s = g.decode_state("4k/5/4Q/5/K4 L u 10").unwrap();
        let action = g.action_by_name(&s, "e3e5").unwrap();
        let next = g.apply(&s, &action, &ChanceEvent::UNIT).unwrap();
        assert!(g.is_terminal(&next));
        assert_eq!(g.terminal_reward(&next).unwrap().value(), 1.0);
    }

    #[test]
    fn ply_cap_is_a_draw() {
        let g = game();
        let s = g.decode_state("4k/5/5/5/K4 L u 80").unwrap();
        assert!(g.is_terminal(&s));
        assert_eq!(g.terminal_reward(&s).unwrap().value(), 0.0);
        assert!(g.legal_actions(&s).is_empty());
    }

    #[test]
    fn pawn_promotes_to_queen() {
        let g = game();
        let s = g.decode_state("4k/P4/5/5/K4 L u 10").unwrap();
        let action = g.action_by_name(&s, "a4a5").unwrap();
        let next = g.apply(&s, &action, &ChanceEvent::UNIT).unwrap();
        assert_eq!(
            next.piece_at(20),
            Some(Piece { kind: PieceKind::Queen, owner: Player::Learner })
        );
        assert_eq!(g.features(&next)[4], 1.0);
    }

    #[test]
    fn moves_are_sorted_and_stable() {
        let g = game();
        let s = g.initial_state(Player::Learner);
        let moves = g.legal_actions(&s);
        let mut sorted = moves.clone();
        sorted.sort_unstable();
        assert_eq!(moves, sorted);
        assert_eq!(moves, g.legal_actions(&s));
        // Gardner start: 5 pawn pushes + 2 knight jumps.
        assert_eq!(moves.len(), 7);
    }

    #[test]
    fn illegal_move_is_rejected() {
        let g = game();
        let s = g.initial_state(Player::Learner);
        let err = g.apply(&s, &Move { from: 0, to: 12 }, &ChanceEvent::UNIT).unwrap_err();
        assert!(err.to_string().contains("a1c3"));
    }

    #[test]
    fn role_swap_negates_features() {
        let g = game();
        let text = "rnbqk/ppppp/2N2/PPPP1/R1BQK L u 6";
        let swapped = "RNBQK/PPPPP/2n2/pppp1/r1bqk O d 6";
        let f = g.features(&g.decode_state(text).unwrap());
        let h = g.features(&g.decode_state(swapped).unwrap());
        for i in 0..f.len() {
            assert_eq!(f[i], -h[i]);
        }
    }
}
