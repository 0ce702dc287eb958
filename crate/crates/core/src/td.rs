//! The TD(lambda) family of batch updates over recorded game trajectories.
//!
//! A trajectory stores one record per Learner decision point: the root
//! state, its one-ply evaluation, and the search result from it. The three
//! update rules differ only in which numbers they read:
//!
//! - TD(lambda): play is guided by one-ply lookahead; values and gradients
//!   come from the root evaluations.
//! - TD-directed(lambda): play is guided by depth-`d` search; values and
//!   gradients still come from the root evaluations.
//! - TDLeaf(lambda): play is guided by depth-`d` search; values are the
//!   backed-up search values and gradients are the principal-variation leaf
//!   gradients.
//!
//! All rules compute `delta_w = alpha * sum_t grad_t * sum_{j>=t}
//! lambda^(j-t) d_j` with `d_t` the forward temporal differences and the
//! final difference taken against the terminal reward. Updates are applied
//! once per game, after termination; the caller owns applying `delta_w`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::eval::{encode_f64, EvalError, EvalResult};
use crate::game::{Game, GameError, Player};
use crate::search::{PvStep, SearchError, SearchResult};

#[derive(Debug, Error)]
pub enum TdError {
    #[error("temporal differences need at least one value")]
    EmptyValues,
    #[error("{got:?} update applied with config algorithm {expected:?}")]
    WrongAlgorithm { expected: Algorithm, got: Algorithm },
    #[error("non-finite gradient in trajectory record {move_index}")]
    NonFiniteGradient { move_index: usize },
    #[error("trajectory record {move_index} has no search result")]
    MissingSearch { move_index: usize },
    #[error("invalid update config: {0}")]
    BadConfig(String),
    #[error("trajectory line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Td,
    TdDirected,
    TdLeaf,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Td => "td",
            Algorithm::TdDirected => "td-directed",
            Algorithm::TdLeaf => "tdleaf",
        }
    }

    pub fn parse(text: &str) -> Option<Algorithm> {
        match text {
            "td" => Some(Algorithm::Td),
            "td-directed" => Some(Algorithm::TdDirected),
            "tdleaf" => Some(Algorithm::TdLeaf),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaSchedule {
    Constant,
    /// Effective learning rate `alpha / game_index` (1-based).
    OneOverGames,
}

impl AlphaSchedule {
    pub fn name(self) -> &'static str {
        match self {
            AlphaSchedule::Constant => "constant",
            AlphaSchedule::OneOverGames => "one-over-games",
        }
    }

    pub fn parse(text: &str) -> Option<AlphaSchedule> {
        match text {
            "constant" => Some(AlphaSchedule::Constant),
            "one-over-games" => Some(AlphaSchedule::OneOverGames),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateConfig {
    pub algorithm: Algorithm,
    pub lambda: f64,
    pub alpha: f64,
    pub alpha_schedule: AlphaSchedule,
    /// Search depth guiding play (and, for TDLeaf, the recorded values).
    pub depth: u32,
}

impl UpdateConfig {
    pub fn validate(&self) -> Result<(), TdError> {
        if !(0.0..=1.0).contains(&self.lambda) || !self.lambda.is_finite() {
            return Err(TdError::BadConfig(format!(
                "lambda must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        // alpha = 0 is the degenerate no-learning configuration.
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(TdError::BadConfig(format!(
                "alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Learning rate in effect for the 1-based `game_index`.
    pub fn effective_alpha(&self, game_index: u64) -> f64 {
        match self.alpha_schedule {
            AlphaSchedule::Constant => self.alpha,
            AlphaSchedule::OneOverGames => self.alpha / game_index.max(1) as f64,
        }
    }

    /// Depth used to pick moves: plain TD always plays one-ply lookahead.
    pub fn play_depth(&self) -> u32 {
        match self.algorithm {
            Algorithm::Td => 1,
            _ => self.depth.max(1),
        }
    }
}

/// One Learner decision point.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord<G: Game> {
    /// Ply index of the game at which the decision was taken.
    pub move_index: usize,
    pub root: G::State,
    pub side_to_move: Player,
    /// One-ply evaluation of the root.
    pub root_eval: EvalResult,
    /// Depth-`d` search from the root, when one was run.
    pub search: Option<SearchResult<G>>,
}

/// Decision records of one finished game plus its terminal reward.
#[derive(Debug, Clone)]
pub struct GameTrajectory<G: Game> {
    pub records: Vec<TrajectoryRecord<G>>,
    pub reward: f64,
}

impl<G: Game> GameTrajectory<G> {
    /// Game length `N` in the decision-point convention: the records are
    /// `x_1 .. x_{N-1}` and the terminal state is `x_N`.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Result of one update computation. The weights themselves are untouched;
/// the caller applies `delta_w`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateReport {
    pub delta_w: Vec<f64>,
    /// Forward temporal differences `d_t`.
    pub temporal_diffs: Vec<f64>,
    /// Lambda-weighted error terms `sum_{j>=t} lambda^(j-t) d_j` per `t`.
    pub lambda_errors: Vec<f64>,
}

/// Forward temporal differences of a value sequence against the final
/// reward: `d_t = values[t+1] - values[t]`, with the last difference
/// `reward - values[last]`.
pub fn temporal_differences(values: &[f64], reward: f64) -> Result<Vec<f64>, TdError> {
    if values.is_empty() {
        return Err(TdError::EmptyValues);
    }
    let mut diffs = Vec::with_capacity(values.len());
    for t in 0..values.len() - 1 {
        diffs.push(values[t + 1] - values[t]);
    }
    diffs.push(reward - values[values.len() - 1]);
    Ok(diffs)
}

/// Lambda-weighted suffix sums `out[t] = sum_{j>=t} lambda^(j-t) d[j]`,
/// computed by the backward recurrence `out[t] = d[t] + lambda * out[t+1]`.
pub fn lambda_sum(diffs: &[f64], lambda: f64) -> Vec<f64> {
    let mut out = vec![0.0; diffs.len()];
    if diffs.is_empty() {
        return out;
    }
    let last = diffs.len() - 1;
    out[last] = diffs[last];
    for t in (0..last).rev() {
        out[t] = diffs[t] + lambda * out[t + 1];
    }
    out
}

fn accumulate(
    values: &[f64],
    gradients: &[&[f64]],
    reward: f64,
    lambda: f64,
    alpha: f64,
    width: usize,
) -> Result<UpdateReport, TdError> {
    for (move_index, gradient) in gradients.iter().enumerate() {
        if gradient.iter().any(|g| !g.is_finite()) {
            return Err(TdError::NonFiniteGradient { move_index });
        }
    }
    let temporal_diffs = temporal_differences(values, reward)?;
    let lambda_errors = lambda_sum(&temporal_diffs, lambda);
    let mut delta_w = vec![0.0; width];
    for (gradient, error) in gradients.iter().zip(&lambda_errors) {
        for (d, g) in delta_w.iter_mut().zip(*gradient) {
            *d += alpha * g * error;
        }
    }
    Ok(UpdateReport {
        delta_w,
        temporal_diffs,
        lambda_errors,
    })
}

/// TD(lambda) / TD-directed(lambda) update: values and gradients taken at
/// the trajectory's root states.
pub fn td_update<G: Game>(
    traj: &GameTrajectory<G>,
    cfg: &UpdateConfig,
) -> Result<UpdateReport, TdError> {
    cfg.validate()?;
    if cfg.algorithm == Algorithm::TdLeaf {
        return Err(TdError::WrongAlgorithm {
            expected: Algorithm::TdLeaf,
            got: Algorithm::Td,
        });
    }
    if traj.is_empty() {
        return Err(TdError::EmptyValues);
    }
    let values: Vec<f64> = traj.records.iter().map(|r| r.root_eval.value).collect();
    let gradients: Vec<&[f64]> = traj
        .records
        .iter()
        .map(|r| r.root_eval.gradient.as_slice())
        .collect();
    let width = gradients[0].len();
    accumulate(&values, &gradients, traj.reward, cfg.lambda, cfg.alpha, width)
}

/// TDLeaf(lambda) update: values are the backed-up search values and
/// gradients the principal-variation leaf gradients. With depth-0 searches
/// this reproduces [`td_update`] bit for bit.
pub fn tdleaf_update<G: Game>(
    traj: &GameTrajectory<G>,
    cfg: &UpdateConfig,
) -> Result<UpdateReport, TdError> {
    cfg.validate()?;
    if cfg.algorithm != Algorithm::TdLeaf {
        return Err(TdError::WrongAlgorithm {
            expected: cfg.algorithm,
            got: Algorithm::TdLeaf,
        });
    }
    if traj.is_empty() {
        return Err(TdError::EmptyValues);
    }
    let mut values = Vec::with_capacity(traj.len());
    let mut gradients: Vec<&[f64]> = Vec::with_capacity(traj.len());
    for record in &traj.records {
        let search = record.search.as_ref().ok_or(TdError::MissingSearch {
            move_index: record.move_index,
        })?;
        values.push(search.value);
        gradients.push(&search.leaf_gradient);
    }
    let width = gradients[0].len();
    accumulate(&values, &gradients, traj.reward, cfg.lambda, cfg.alpha, width)
}

fn fmt_gap(gap: f64) -> String {
    if gap == f64::INFINITY {
        "inf".to_string()
    } else {
        encode_f64(gap)
    }
}

/// Serializes a trajectory to the documented structured-text format: a
/// header, then per record its move index, side, root state, root
/// evaluation, search depth/value, principal variation, leaf state and
/// gradient vector, and finally the terminal reward.
pub fn dump_trajectory<G: Game>(game: &G, traj: &GameTrajectory<G>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tdlab-trajectory v1");
    let _ = writeln!(out, "game {}", game.id());
    let _ = writeln!(out, "records {}", traj.records.len());
    for record in &traj.records {
        let _ = writeln!(out, "record {}", record.move_index);
        let _ = writeln!(out, "side {}", record.side_to_move);
        let _ = writeln!(out, "root {}", game.encode_state(&record.root));
        let _ = writeln!(out, "root_value {}", encode_f64(record.root_eval.value));
        let gradient: Vec<String> = record.root_eval.gradient.iter().map(|g| encode_f64(*g)).collect();
        let _ = writeln!(out, "root_gradient {}", gradient.join(" "));
        if let Some(search) = &record.search {
            let _ = writeln!(out, "depth {}", search.depth);
            let _ = writeln!(out, "value {}", encode_f64(search.value));
            let pv: Vec<String> = search
                .pv
                .iter()
                .map(|step| match step {
                    PvStep::Move(a) => game.action_name(a),
                    PvStep::Chance(e) => format!("%{}", e.id),
                })
                .collect();
            let _ = writeln!(out, "pv {}", pv.join(" "));
            let _ = writeln!(out, "leaf {}", game.encode_state(&search.leaf));
            let gradient: Vec<String> = search.leaf_gradient.iter().map(|g| encode_f64(*g)).collect();
            let _ = writeln!(out, "leaf_gradient {}", gradient.join(" "));
            let _ = writeln!(out, "nodes {}", search.nodes_visited);
            let _ = writeln!(out, "gap {}", fmt_gap(search.min_decision_gap));
        } else {
            let _ = writeln!(out, "no_search");
        }
    }
    let _ = writeln!(out, "reward {}", encode_f64(traj.reward));
    out
}

/// Parses a dumped trajectory, replaying each principal variation from its
/// root to reconstruct the actions and verify the recorded leaf.
pub fn parse_trajectory<G: Game>(game: &G, text: &str) -> Result<GameTrajectory<G>, TdError> {
    struct Reader<'t> {
        lines: std::iter::Enumerate<std::str::Lines<'t>>,
        peeked: Option<(usize, &'t str)>,
    }
    impl<'t> Reader<'t> {
        fn next(&mut self) -> Option<(usize, &'t str)> {
            self.peeked.take().or_else(|| self.lines.next())
        }
        fn peek(&mut self) -> Option<(usize, &'t str)> {
            if self.peeked.is_none() {
                self.peeked = self.lines.next();
            }
            self.peeked
        }
        fn expect(&mut self, key: &str) -> Result<(usize, String), TdError> {
            let (no, line) = self.next().ok_or(TdError::Parse {
                line: 0,
                reason: format!("missing {key} line"),
            })?;
            if line == key {
                return Ok((no + 1, String::new()));
            }
            match line.split_once(' ') {
                Some((k, v)) if k == key => Ok((no + 1, v.to_string())),
                _ => Err(TdError::Parse {
                    line: no + 1,
                    reason: format!("expected {key}, found {line:?}"),
                }),
            }
        }
    }
    let fail = |line: usize, reason: String| TdError::Parse { line, reason };
    let mut reader = Reader {
        lines: text.lines().enumerate(),
        peeked: None,
    };
    let (no, _) = reader.expect("tdlab-trajectory v1").map_err(|_| TdError::Parse {
        line: 1,
        reason: "not a tdlab-trajectory v1 file".to_string(),
    })?;
    let _ = no;
    let (no, game_id) = reader.expect("game")?;
    if game_id != game.id() {
        return Err(fail(no, format!("trajectory is for {game_id:?}, not {:?}", game.id())));
    }
    let (no, count) = reader.expect("records")?;
    let count: usize = count.parse().map_err(|_| fail(no, "bad record count".to_string()))?;
    let parse_f64 = |no: usize, text: &str| -> Result<f64, TdError> {
        text.parse::<f64>().map_err(|_| fail(no, format!("bad float {text:?}")))
    };
    let parse_vec = |no: usize, text: &str| -> Result<Vec<f64>, TdError> {
        text.split(' ')
            .filter(|t| !t.is_empty())
            .map(|t| parse_f64(no, t))
            .collect()
    };
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let (no, move_index) = reader.expect("record")?;
        let move_index: usize = move_index.parse().map_err(|_| fail(no, "bad move index".to_string()))?;
        let (no, side) = reader.expect("side")?;
        let side_to_move = match side.as_str() {
            "L" => Player::Learner,
            "O" => Player::Opponent,
            _ => return Err(fail(no, "side must be L or O".to_string())),
        };
        let (no, root_text) = reader.expect("root")?;
        let root = game.decode_state(&root_text).map_err(|e| fail(no, e.to_string()))?;
        let (no, value) = reader.expect("root_value")?;
        let root_value = parse_f64(no, &value)?;
        let (no, gradient) = reader.expect("root_gradient")?;
        let root_gradient = parse_vec(no, &gradient)?;
        let search = match reader.peek() {
            Some((_, line)) if line == "no_search" => {
                reader.next();
                None
            }
            _ => {
                let (no, depth) = reader.expect("depth")?;
                let depth: u32 = depth.parse().map_err(|_| fail(no, "bad depth".to_string()))?;
                let (no, value) = reader.expect("value")?;
                let value = parse_f64(no, &value)?;
                let (pv_no, pv_text) = reader.expect("pv")?;
                let (leaf_no, leaf_text) = reader.expect("leaf")?;
                let (no, gradient) = reader.expect("leaf_gradient")?;
                let leaf_gradient = parse_vec(no, &gradient)?;
                let (no, nodes) = reader.expect("nodes")?;
                let nodes_visited: u64 =
                    nodes.parse().map_err(|_| fail(no, "bad node count".to_string()))?;
                let (no, gap) = reader.expect("gap")?;
                let min_decision_gap = if gap == "inf" { f64::INFINITY } else { parse_f64(no, &gap)? };

                // Replay the principal variation to recover typed actions.
                let mut pv = Vec::new();
                let mut state = root.clone();
                let mut pending: Option<G::Action> = None;
                for token in pv_text.split(' ').filter(|t| !t.is_empty()) {
                    if let Some(id_text) = token.strip_prefix('%') {
                        let action = pending.take().ok_or_else(|| {
                            fail(pv_no, "chance step without a preceding move".to_string())
                        })?;
                        let id: usize = id_text
                            .parse()
                            .map_err(|_| fail(pv_no, "bad chance id".to_string()))?;
                        let events = game.chance_events(&state, &action);
                        let event = *events
                            .get(id)
                            .ok_or_else(|| fail(pv_no, format!("chance id {id} out of range")))?;
                        state = game.apply(&state, &action, &event).map_err(|e| fail(pv_no, e.to_string()))?;
                        pv.push(PvStep::Move(action));
                        pv.push(PvStep::Chance(event));
                    } else {
                        if let Some(action) = pending.take() {
                            state = game
                                .apply(&state, &action, &crate::game::ChanceEvent::UNIT)
                                .map_err(|e| fail(pv_no, e.to_string()))?;
                            pv.push(PvStep::Move(action));
                        }
                        pending = Some(
                            game.action_by_name(&state, token)
                                .map_err(|e| fail(pv_no, e.to_string()))?,
                        );
                    }
                }
                if let Some(action) = pending.take() {
                    state = game
                        .apply(&state, &action, &crate::game::ChanceEvent::UNIT)
                        .map_err(|e| fail(pv_no, e.to_string()))?;
                    pv.push(PvStep::Move(action));
                }
                if game.encode_state(&state) != leaf_text {
                    return Err(fail(
                        leaf_no,
                        format!(
                            "replayed leaf {:?} does not match recorded {leaf_text:?}",
                            game.encode_state(&state)
                        ),
                    ));
                }
                Some(SearchResult {
                    value,
                    pv,
                    leaf: state,
                    leaf_gradient,
                    nodes_visited,
                    depth,
                    min_decision_gap,
                })
            }
        };
        records.push(TrajectoryRecord {
            move_index,
            root,
            side_to_move,
            root_eval: EvalResult {
                value: root_value,
                gradient: root_gradient,
            },
            search,
        });
    }
    let (no, reward) = reader.expect("reward")?;
    let reward = parse_f64(no, &reward)?;
    Ok(GameTrajectory { records, reward })
}
