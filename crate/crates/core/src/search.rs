//! Fixed-depth game-tree search returning the backed-up value, the principal
//! variation, its leaf state and the gradient of the search value.
//!
//! Learner nodes maximize and Opponent nodes minimize; terminal nodes are
//! scored by their true reward at any remaining depth. Ties between siblings
//! are broken toward the first candidate in canonical order, and an incumbent
//! is only replaced on strict improvement, so searches are reproducible and
//! alpha-beta backs up the identical line.
//!
//! Chance nodes (stochastic games) take the probability-weighted mean of
//! their children. The reported gradient is then the probability-weighted
//! combination of the principal-variation leaf gradients across chance
//! branches — the exact gradient of the expectiminimax value away from
//! ties — while the `leaf` field follows the most probable chance path.
//! Alpha-beta windows are reset below chance nodes; pruning within each
//! deterministic branch stays sound because the branch value is exact.

use thiserror::Error;

use crate::eval::{evaluate, EvalError, ParamVector, SquashConfig};
use crate::game::{ChanceEvent, Game, GameError, Player};

/// Chance distributions must sum to one within this tolerance.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("chance node reached with chance handling set to forbid (action {action})")]
    ChanceForbidden { action: String },
    #[error("chance probabilities for action {action} sum to {sum}, not 1")]
    BadDistribution { action: String, sum: f64 },
    #[error("cannot select an action in a terminal state {state}")]
    TerminalRoot { state: String },
    #[error("action selection needs depth >= 1")]
    DepthZeroSelection,
    #[error("{expected:?} pruning required, config has {got:?}")]
    WrongPruning { expected: Pruning, got: Pruning },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pruning {
    None,
    AlphaBeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChanceHandling {
    Forbid,
    Expectiminimax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Search depth in plies; one ply is one mover's action together with
    /// its chance outcome.
    pub depth: u32,
    pub pruning: Pruning,
    pub chance: ChanceHandling,
}

impl SearchConfig {
    pub fn minimax(depth: u32) -> SearchConfig {
        SearchConfig {
            depth,
            pruning: Pruning::None,
            chance: ChanceHandling::Forbid,
        }
    }

    pub fn alphabeta(depth: u32) -> SearchConfig {
        SearchConfig {
            depth,
            pruning: Pruning::AlphaBeta,
            chance: ChanceHandling::Forbid,
        }
    }

    pub fn expectiminimax(depth: u32) -> SearchConfig {
        SearchConfig {
            depth,
            pruning: Pruning::None,
            chance: ChanceHandling::Expectiminimax,
        }
    }

    /// Pruned search that also accepts chance nodes.
    pub fn standard(depth: u32) -> SearchConfig {
        SearchConfig {
            depth,
            pruning: Pruning::AlphaBeta,
            chance: ChanceHandling::Expectiminimax,
        }
    }
}

/// One step of a principal variation: a mover's action, or the chance
/// outcome that followed it in a stochastic game.
#[derive(Debug, Clone, PartialEq)]
pub enum PvStep<A> {
    Move(A),
    Chance(ChanceEvent),
}

#[derive(Debug, Clone)]
pub struct SearchResult<G: Game> {
    /// Backed-up depth-`d` value from the Learner's perspective.
    pub value: f64,
    pub pv: Vec<PvStep<G::Action>>,
    /// Final state of the principal variation (most probable chance path).
    pub leaf: G::State,
    /// Gradient of the search value with respect to the weights.
    pub leaf_gradient: Vec<f64>,
    pub nodes_visited: u64,
    pub depth: u32,
    /// Smallest margin seen in any sibling comparison; 0 on an exact tie.
    /// Infinity when no decision node compared two candidates.
    pub min_decision_gap: f64,
}

impl<G: Game> SearchResult<G> {
    /// True when every sibling comparison was strict, i.e. the principal
    /// variation is unique and the gradient is single-valued.
    pub fn unique_pv(&self) -> bool {
        self.min_decision_gap > 0.0
    }
}

/// One line of a search trace: remaining depth, FNV-1a hash of the encoded
/// state, the alpha-beta window at entry and the backed-up value.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub depth: u32,
    pub state_hash: u64,
    pub alpha: f64,
    pub beta: f64,
    pub value: f64,
}

impl TraceEntry {
    /// Stable one-line format: `depth hash alpha beta value`, hash as 16 hex
    /// digits, infinite bounds as `-inf`/`inf`.
    pub fn to_line(&self) -> String {
        let bound = |b: f64| {
            if b == f64::NEG_INFINITY {
                "-inf".to_string()
            } else if b == f64::INFINITY {
                "inf".to_string()
            } else {
                format!("{b}")
            }
        };
        format!(
            "{} {:016x} {} {} {}",
            self.depth,
            self.state_hash,
            bound(self.alpha),
            bound(self.beta),
            self.value
        )
    }
}

fn fnv1a64(text: &str) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

struct NodeEval<G: Game> {
    value: f64,
    pv: Vec<PvStep<G::Action>>,
    leaf: G::State,
    grad: Vec<f64>,
    min_gap: f64,
}

struct Ctx<'a, G: Game> {
    game: &'a G,
    w: &'a ParamVector,
    squash: SquashConfig,
    prune: bool,
    chance: ChanceHandling,
    nodes: u64,
    trace: Option<&'a mut Vec<TraceEntry>>,
}

impl<'a, G: Game> Ctx<'a, G> {
    fn record(&mut self, state: &G::State, depth: u32, alpha: f64, beta: f64, value: f64) {
        if let Some(trace) = self.trace.as_deref_mut() {
            trace.push(TraceEntry {
                depth,
                state_hash: fnv1a64(&self.game.encode_state(state)),
                alpha,
                beta,
                value,
            });
        }
    }

    fn node(
        &mut self,
        state: &G::State,
        depth: u32,
        mut alpha: f64,
        mut beta: f64,
    ) -> Result<NodeEval<G>, SearchError> {
        self.nodes += 1;
        let (alpha_in, beta_in) = (alpha, beta);
        if self.game.is_terminal(state) || depth == 0 {
            let eval = evaluate(self.game, state, self.w, self.squash)?;
            self.record(state, depth, alpha_in, beta_in, eval.value);
            return Ok(NodeEval {
                value: eval.value,
                pv: Vec::new(),
                leaf: state.clone(),
                grad: eval.gradient,
                min_gap: f64::INFINITY,
            });
        }
        let maximizing = self.game.side_to_move(state) == Player::Learner;
        let mut best: Option<NodeEval<G>> = None;
        let mut min_gap = f64::INFINITY;
        for action in self.game.legal_actions(state) {
            let events = self.game.chance_events(state, &action);
            let candidate = if events.len() == 1 {
                let child = self.game.apply(state, &action, &events[0])?;
                let sub = self.node(&child, depth - 1, alpha, beta)?;
                let mut pv = Vec::with_capacity(sub.pv.len() + 1);
                pv.push(PvStep::Move(action.clone()));
                pv.extend(sub.pv);
                NodeEval {
                    value: sub.value,
                    pv,
                    leaf: sub.leaf,
                    grad: sub.grad,
                    min_gap: sub.min_gap,
                }
            } else {
                self.chance_value(state, &action, events, depth)?
            };
            min_gap = min_gap.min(candidate.min_gap);
            match &best {
                Some(incumbent) => {
                    let gap = (candidate.value - incumbent.value).abs();
                    min_gap = min_gap.min(gap);
                    let improves = if maximizing {
                        candidate.value > incumbent.value
                    } else {
                        candidate.value < incumbent.value
                    };
                    if improves {
                        best = Some(candidate);
                    }
                }
                None => best = Some(candidate),
            }
            if self.prune {
                let value = best.as_ref().expect("just set").value;
                if maximizing {
                    alpha = alpha.max(value);
                } else {
                    beta = beta.min(value);
                }
                if alpha >= beta {
                    break;
                }
            }
        }
        let mut best = best.expect("non-terminal state has at least one legal action");
        best.min_gap = min_gap;
        self.record(state, depth, alpha_in, beta_in, best.value);
        Ok(best)
    }

    /// Expands the chance node that follows playing `action`: value and
    /// gradient are probability-weighted over outcomes, the reported line
    /// follows the most probable outcome (first in canonical order on a
    /// probability tie).
    fn chance_value(
        &mut self,
        state: &G::State,
        action: &G::Action,
        events: Vec<ChanceEvent>,
        depth: u32,
    ) -> Result<NodeEval<G>, SearchError> {
        if self.chance == ChanceHandling::Forbid {
            return Err(SearchError::ChanceForbidden {
                action: self.game.action_name(action),
            });
        }
        let sum: f64 = events.iter().map(|e| e.probability).sum();
        if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(SearchError::BadDistribution {
                action: self.game.action_name(action),
                sum,
            });
        }
        let mut value = 0.0;
        let mut grad = vec![0.0; self.w.len()];
        let mut principal: Option<(ChanceEvent, NodeEval<G>)> = None;
        let mut min_gap = f64::INFINITY;
        for event in events {
            let child = self.game.apply(state, action, &event)?;
            // Bounds from the decision layer above do not apply inside a
            // weighted average, so each branch restarts with an open window.
            let sub = self.node(&child, depth - 1, f64::NEG_INFINITY, f64::INFINITY)?;
            value += event.probability * sub.value;
            for (g, s) in grad.iter_mut().zip(&sub.grad) {
                *g += event.probability * s;
            }
            min_gap = min_gap.min(sub.min_gap);
            let replace = match &principal {
                Some((lead, _)) => event.probability > lead.probability,
                None => true,
            };
            if replace {
                principal = Some((event, sub));
            }
        }
        let (event, sub) = principal.expect("chance distribution is non-empty");
        let mut pv = Vec::with_capacity(sub.pv.len() + 2);
        pv.push(PvStep::Move(action.clone()));
        pv.push(PvStep::Chance(event));
        pv.extend(sub.pv);
        Ok(NodeEval {
            value,
            pv,
            leaf: sub.leaf,
            grad,
            min_gap,
        })
    }
}

fn run<G: Game>(
    game: &G,
    state: &G::State,
    w: &ParamVector,
    squash: SquashConfig,
    cfg: &SearchConfig,
    trace: Option<&mut Vec<TraceEntry>>,
) -> Result<SearchResult<G>, SearchError> {
    let mut ctx = Ctx {
        game,
        w,
        squash,
        prune: cfg.pruning == Pruning::AlphaBeta,
        chance: cfg.chance,
        nodes: 0,
        trace,
    };
    let out = ctx.node(state, cfg.depth, f64::NEG_INFINITY, f64::INFINITY)?;
    Ok(SearchResult {
        value: out.value,
        pv: out.pv,
        leaf: out.leaf,
        leaf_gradient: out.grad,
        nodes_visited: ctx.nodes,
        depth: cfg.depth,
        min_decision_gap: out.min_gap,
    })
}

/// Depth-`d` search honoring whatever `cfg` asks for.
pub fn search<G: Game>(
    game: &G,
    state: &G::State,
    w: &ParamVector,
    squash: SquashConfig,
    cfg: &SearchConfig,
) -> Result<SearchResult<G>, SearchError> {
    run(game, state, w, squash, cfg, None)
}

/// As [`search`], also appending one [`TraceEntry`] per visited node.
pub fn search_with_trace<G: Game>(
    game: &G,
    state: &G::State,
    w: &ParamVector,
    squash: SquashConfig,
    cfg: &SearchConfig,
    trace: &mut Vec<TraceEntry>,
) -> Result<SearchResult<G>, SearchError> {
    run(game, state, w, squash, cfg, Some(trace))
}

/// Exact full-width minimax; `cfg.pruning` must be `None`.
pub fn minimax<G: Game>(
    game: &G,
    state: &G::State,
    w: &ParamVector,
    squash: SquashConfig,
    cfg: &SearchConfig,
) -> Result<SearchResult<G>, SearchError> {
    if cfg.pruning != Pruning::None {
        return Err(SearchError::WrongPruning {
            expected: Pruning::None,
            got: cfg.pruning,
        });
    }
    run(game, state, w, squash, cfg, None)
}

/// Alpha-beta search; identical value, principal variation and leaf to
/// [`minimax`] at the same depth, visiting no more nodes.
pub fn alphabeta<G: Game>(
    game: &G,
    state: &G::State,
    w: &ParamVector,
    squash: SquashConfig,
    cfg: &SearchConfig,
) -> Result<SearchResult<G>, SearchError> {
    if cfg.pruning != Pruning::AlphaBeta {
        return Err(SearchError::WrongPruning {
            expected: Pruning::AlphaBeta,
            got: cfg.pruning,
        });
    }
    run(game, state, w, squash, cfg, None)
}

/// Search with chance nodes expanded as probability-weighted means.
pub fn expectiminimax<G: Game>(
    game: &G,
    state: &G::State,
    w: &ParamVector,
    squash: SquashConfig,
    cfg: &SearchConfig,
) -> Result<SearchResult<G>, SearchError> {
    let cfg = SearchConfig {
        chance: ChanceHandling::Expectiminimax,
        ..*cfg
    };
    run(game, state, w, squash, &cfg, None)
}

/// Picks the first action of the principal variation; with `epsilon > 0`
/// plays a uniformly random legal action that often instead.
pub fn select_action<G: Game, R: rand::Rng>(
    game: &G,
    state: &G::State,
    w: &ParamVector,
    squash: SquashConfig,
    cfg: &SearchConfig,
    epsilon: f64,
    rng: &mut R,
) -> Result<G::Action, SearchError> {
    if game.is_terminal(state) {
        return Err(SearchError::TerminalRoot {
            state: game.encode_state(state),
        });
    }
    if cfg.depth == 0 {
        return Err(SearchError::DepthZeroSelection);
    }
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        let actions = game.legal_actions(state);
        return Ok(actions[rng.random_range(0..actions.len())].clone());
    }
    let result = run(game, state, w, squash, cfg, None)?;
    match result.pv.first() {
        Some(PvStep::Move(action)) => Ok(action.clone()),
        _ => unreachable!("depth >= 1 search from a non-terminal root starts with a move"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{evaluate, ParamVector, SquashConfig};
    use crate::game::tree::{TreeAction, TreeNode};
    use crate::game::{Game, Player, TreeGame};
    use rand::SeedableRng as _;
    use rand_chacha::ChaCha8Rng;

    fn demo() -> (TreeGame, ParamVector) {
        let (game, weights) = TreeGame::minimax_demo();
        let w = ParamVector::from_vec(weights).unwrap();
        (game, w)
    }

    fn pv_names(game: &TreeGame, result: &SearchResult<TreeGame>) -> Vec<String> {
        result
            .pv
            .iter()
            .map(|step| match step {
                PvStep::Move(a) => game.action_name(a),
                PvStep::Chance(e) => format!("%{}", e.id),
            })
            .collect()
    }

    #[test]
    fn demo_tree_backs_up_four_along_the_principal_variation() {
        let (game, w) = demo();
        let root = game.initial_state(Player::Learner);
        let result = minimax(&game, &root, &w, SquashConfig::off(), &SearchConfig::minimax(3)).unwrap();
        assert_eq!(result.value, 4.0);
        assert_eq!(pv_names(&game, &result), ["c", "f", "l"]);
        assert_eq!(game.encode_state(&result.leaf), "L");
        // The root gradient is exactly the leaf evaluation gradient.
        let leaf_eval = evaluate(&game, &result.leaf, &w, SquashConfig::off()).unwrap();
        assert_eq!(result.leaf_gradient, leaf_eval.gradient);
        assert_eq!(result.value, leaf_eval.value);
        assert!(result.unique_pv());
    }

    #[test]
    fn alphabeta_matches_minimax_on_the_demo_tree() {
        let (game, w) = demo();
        let root = game.initial_state(Player::Learner);
        let plain = minimax(&game, &root, &w, SquashConfig::off(), &SearchConfig::minimax(3)).unwrap();
        let pruned =
            alphabeta(&game, &root, &w, SquashConfig::off(), &SearchConfig::alphabeta(3)).unwrap();
        assert_eq!(pruned.value, plain.value);
        assert_eq!(pv_names(&game, &pruned), pv_names(&game, &plain));
        assert_eq!(pruned.leaf, plain.leaf);
        // With the strong branch searched last no interior cutoff saves a
        // node on this tree; the counts merely may not grow.
        assert_eq!(plain.nodes_visited, 15);
        assert!(pruned.nodes_visited <= plain.nodes_visited);
    }

    #[test]
    fn alphabeta_prunes_when_the_strong_branch_comes_first() {
        // Mirror of the demo tree with A's children swapped: searching the
        // value-4 branch first lets alpha-beta cut the E subtree.
        let k = 8;
        let one_hot = |i: usize| {
            let mut f = vec![0.0; k];
            f[i] = 1.0;
            f
        };
        let leaf = |name: &str, i: usize| {
            TreeNode::decision(name, Player::Opponent, one_hot(i), vec![TreeAction::to("z", "Z")])
        };
        let game = TreeGame::new(
            "mirror",
            k,
            vec![
                TreeNode::decision(
                    "A",
                    Player::Learner,
                    vec![0.0; k],
                    vec![TreeAction::to("c", "C"), TreeAction::to("b", "B")],
                ),
                TreeNode::decision(
                    "B",
                    Player::Opponent,
                    vec![0.0; k],
                    vec![TreeAction::to("d", "D"), TreeAction::to("e", "E")],
                ),
                TreeNode::decision(
                    "C",
                    Player::Opponent,
                    vec![0.0; k],
                    vec![TreeAction::to("f", "F"), TreeAction::to("g", "G")],
                ),
                TreeNode::decision(
                    "D",
                    Player::Learner,
                    vec![0.0; k],
                    vec![TreeAction::to("h", "H"), TreeAction::to("i", "I")],
                ),
                TreeNode::decision(
                    "E",
                    Player::Learner,
                    vec![0.0; k],
                    vec![TreeAction::to("j", "J"), TreeAction::to("k", "K")],
                ),
                TreeNode::decision(
                    "F",
                    Player::Learner,
                    vec![0.0; k],
                    vec![TreeAction::to("l", "L"), TreeAction::to("m", "M")],
                ),
                TreeNode::decision(
                    "G",
                    Player::Learner,
                    vec![0.0; k],
                    vec![TreeAction::to("n", "N"), TreeAction::to("o", "O")],
                ),
                leaf("H", 0),
                leaf("I", 1),
                leaf("J", 2),
                leaf("K", 3),
                leaf("L", 4),
                leaf("M", 5),
                leaf("N", 6),
                leaf("O", 7),
                TreeNode::terminal("Z", 0.0, k),
            ],
            "A",
        )
        .unwrap();
        let w = ParamVector::from_vec(vec![3.0, -9.0, -5.0, -6.0, 4.0, 2.0, -9.0, 5.0]).unwrap();
        let root = game.initial_state(Player::Learner);
        let plain = minimax(&game, &root, &w, SquashConfig::off(), &SearchConfig::minimax(3)).unwrap();
        let pruned =
            alphabeta(&game, &root, &w, SquashConfig::off(), &SearchConfig::alphabeta(3)).unwrap();
        assert_eq!(plain.value, 4.0);
        assert_eq!(pruned.value, 4.0);
        assert_eq!(pruned.leaf, plain.leaf);
        assert!(pruned.nodes_visited < plain.nodes_visited);
    }

    #[test]
    fn depth_zero_degenerates_to_the_static_evaluation() {
        let (game, w) = demo();
        let root = game.initial_state(Player::Learner);
        let result = minimax(&game, &root, &w, SquashConfig::off(), &SearchConfig::minimax(0)).unwrap();
        assert_eq!(result.value, 0.0);
        assert!(result.pv.is_empty());
        assert_eq!(result.leaf, root);
        assert_eq!(result.nodes_visited, 1);
    }

    #[test]
    fn select_action_takes_the_pv_edge() {
        let (game, w) = demo();
        let root = game.initial_state(Player::Learner);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let action = select_action(
            &game,
            &root,
            &w,
            SquashConfig::off(),
            &SearchConfig::alphabeta(3),
            0.0,
            &mut rng,
        )
        .unwrap();
        assert_eq!(game.action_name(&action), "c");
    }

    #[test]
    fn select_action_rejects_terminal_roots_and_depth_zero() {
        let (game, w) = demo();
        let z = game.decode_state("Z").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            select_action(&game, &z, &w, SquashConfig::off(), &SearchConfig::minimax(1), 0.0, &mut rng),
            Err(SearchError::TerminalRoot { .. })
        ));
        let root = game.initial_state(Player::Learner);
        assert!(matches!(
            select_action(&game, &root, &w, SquashConfig::off(), &SearchConfig::minimax(0), 0.0, &mut rng),
            Err(SearchError::DepthZeroSelection)
        ));
    }

    #[test]
    fn single_legal_action_is_chosen_regardless_of_weights() {
        let game = TreeGame::new(
            "forced",
            1,
            vec![
                TreeNode::decision(
                    "root",
                    Player::Learner,
                    vec![0.0],
                    vec![TreeAction::to("only", "end")],
                ),
                TreeNode::terminal("end", -1.0, 1),
            ],
            "root",
        )
        .unwrap();
        let root = game.initial_state(Player::Learner);
        for weight in [-5.0, 0.0, 5.0] {
            let w = ParamVector::from_vec(vec![weight]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            let action = select_action(
                &game,
                &root,
                &w,
                SquashConfig::off(),
                &SearchConfig::alphabeta(2),
                0.0,
                &mut rng,
            )
            .unwrap();
            assert_eq!(game.action_name(&action), "only");
        }
    }

    #[test]
    fn terminal_nodes_inside_the_tree_score_by_reward() {
        // Learner can move to a won terminal or to a juicy-looking eval node;
        // the terminal reward must win at any depth.
        let game = TreeGame::new(
            "cutoff",
            1,
            vec![
                TreeNode::decision(
                    "root",
                    Player::Learner,
                    vec![0.0],
                    vec![TreeAction::to("win", "won"), TreeAction::to("shiny", "bait")],
                ),
                TreeNode::terminal("won", 1.0, 1),
                TreeNode::decision(
                    "bait",
                    Player::Opponent,
                    vec![9.0],
                    vec![TreeAction::to("z", "lost")],
                ),
                TreeNode::terminal("lost", -1.0, 1),
            ],
            "root",
        )
        .unwrap();
        let w = ParamVector::from_vec(vec![1.0]).unwrap();
        let root = game.initial_state(Player::Learner);
        let result = minimax(&game, &root, &w, SquashConfig::off(), &SearchConfig::minimax(3)).unwrap();
        assert_eq!(result.value, 1.0);
        assert_eq!(game.encode_state(&result.leaf), "won");
        assert_eq!(result.leaf_gradient, vec![0.0]);
    }

    fn coin_game(p_heads: f64, heads: f64, tails: f64) -> TreeGame {
        TreeGame::new(
            "coin",
            2,
            vec![
                TreeNode::decision(
                    "root",
                    Player::Learner,
                    vec![0.0, 0.0],
                    vec![TreeAction::chance("flip", &[(p_heads, "heads"), (1.0 - p_heads, "tails")])],
                ),
                TreeNode::decision(
                    "heads",
                    Player::Opponent,
                    vec![heads, 0.0],
                    vec![TreeAction::to("z", "end")],
                ),
                TreeNode::decision(
                    "tails",
                    Player::Opponent,
                    vec![0.0, tails],
                    vec![TreeAction::to("z", "end")],
                ),
                TreeNode::terminal("end", 0.0, 2),
            ],
            "root",
        )
        .unwrap()
    }

    #[test]
    fn fair_two_outcome_chance_takes_the_mean() {
        let game = coin_game(0.5, 0.2, 0.6);
        let w = ParamVector::from_vec(vec![1.0, 1.0]).unwrap();
        let root = game.initial_state(Player::Learner);
        let result =
            expectiminimax(&game, &root, &w, SquashConfig::off(), &SearchConfig::expectiminimax(1))
                .unwrap();
        assert!((result.value - 0.4).abs() < 1e-15);
        // Gradient is the probability-weighted mix of the two leaf gradients.
        assert_eq!(result.leaf_gradient, vec![0.1, 0.3]);
        // Equal probabilities: the principal path takes the first event.
        assert_eq!(game.encode_state(&result.leaf), "heads");
        assert!(matches!(result.pv[1], PvStep::Chance(e) if e.id == 0));
    }

    #[test]
    fn degenerate_single_outcome_reduces_to_minimax() {
        let game = coin_game(1.0, 0.7, 0.0);
        // A probability-zero branch still participates in the weighted sum
        // but the value equals plain minimax of the certain branch.
        let w = ParamVector::from_vec(vec![1.0, 1.0]).unwrap();
        let root = game.initial_state(Player::Learner);
        let result =
            expectiminimax(&game, &root, &w, SquashConfig::off(), &SearchConfig::expectiminimax(1))
                .unwrap();
        assert_eq!(result.value, 0.7);
        assert_eq!(game.encode_state(&result.leaf), "heads");
    }

    #[test]
    fn bad_distribution_is_rejected() {
        let game = TreeGame::new(
            "skewed",
            1,
            vec![
                TreeNode::decision(
                    "root",
                    Player::Learner,
                    vec![0.0],
                    vec![TreeAction::chance("flip", &[(0.5, "end"), (0.3, "end")])],
                ),
                TreeNode::terminal("end", 0.0, 1),
            ],
            "root",
        )
        .unwrap();
        let w = ParamVector::from_vec(vec![1.0]).unwrap();
        let root = game.initial_state(Player::Learner);
        let err =
            expectiminimax(&game, &root, &w, SquashConfig::off(), &SearchConfig::expectiminimax(2))
                .unwrap_err();
        assert!(matches!(err, SearchError::BadDistribution { .. }));
    }

    #[test]
    fn forbid_mode_errors_on_chance_nodes() {
        let game = coin_game(0.5, 0.2, 0.6);
        let w = ParamVector::from_vec(vec![1.0, 1.0]).unwrap();
        let root = game.initial_state(Player::Learner);
        let err = minimax(&game, &root, &w, SquashConfig::off(), &SearchConfig::minimax(1)).unwrap_err();
        assert!(matches!(err, SearchError::ChanceForbidden { .. }));
    }

    #[test]
    fn pruning_mismatch_is_reported() {
        let (game, w) = demo();
        let root = game.initial_state(Player::Learner);
        assert!(minimax(&game, &root, &w, SquashConfig::off(), &SearchConfig::alphabeta(2)).is_err());
        assert!(alphabeta(&game, &root, &w, SquashConfig::off(), &SearchConfig::minimax(2)).is_err());
    }

    #[test]
    fn trace_covers_every_visited_node() {
        let (game, w) = demo();
        let root = game.initial_state(Player::Learner);
        let mut trace = Vec::new();
        let result = search_with_trace(
            &game,
            &root,
            &w,
            SquashConfig::off(),
            &SearchConfig::alphabeta(3),
            &mut trace,
        )
        .unwrap();
        assert_eq!(trace.len() as u64, result.nodes_visited);
        let root_line = trace.last().unwrap();
        assert_eq!(root_line.depth, 3);
        assert_eq!(root_line.value, 4.0);
        assert_eq!(root_line.to_line().split(' ').count(), 5);
        assert!(root_line.to_line().ends_with("-inf inf 4"));
    }

    #[test]
    fn search_value_is_continuous_across_a_tie() {
        // Two leaves with features e0 and e1: at w = (c, c) both score c and
        // the max has a tie. Approaching the tie point from either side the
        // value converges to the tie value.
        let game = TreeGame::new(
            "tie",
            2,
            vec![
                TreeNode::decision(
                    "root",
                    Player::Learner,
                    vec![0.0, 0.0],
                    vec![TreeAction::to("p", "P"), TreeAction::to("q", "Q")],
                ),
                TreeNode::decision(
                    "P",
                    Player::Opponent,
                    vec![1.0, 0.0],
                    vec![TreeAction::to("z", "end")],
                ),
                TreeNode::decision(
                    "Q",
                    Player::Opponent,
                    vec![0.0, 1.0],
                    vec![TreeAction::to("z", "end")],
                ),
                TreeNode::terminal("end", 0.0, 2),
            ],
            "root",
        )
        .unwrap();
        let root = game.initial_state(Player::Learner);
        let value_at = |delta: f64| {
            let w = ParamVector::from_vec(vec![0.5 + delta, 0.5 - delta]).unwrap();
            minimax(&game, &root, &w, SquashConfig::off(), &SearchConfig::minimax(1))
                .unwrap()
                .value
        };
        let tie = value_at(0.0);
        assert_eq!(tie, 0.5);
        let mut previous = f64::INFINITY;
        for delta in [1e-2, 1e-4, 1e-6, 1e-8] {
            let spread = (value_at(delta) - tie).abs().max((value_at(-delta) - tie).abs());
            assert!(spread <= delta + 1e-15);
            assert!(spread <= previous);
            previous = spread;
        }
        // At the tie point the gap tracker flags the non-unique PV.
        let w = ParamVector::from_vec(vec![0.5, 0.5]).unwrap();
        let result = minimax(&game, &root, &w, SquashConfig::off(), &SearchConfig::minimax(1)).unwrap();
        assert!(!result.unique_pv());
    }
}
