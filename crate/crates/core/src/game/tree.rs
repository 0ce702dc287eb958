//! A game defined by an explicit node table, used for search fixtures.
//!
//! Every node names its mover, its feature vector and either a terminal
//! reward or a list of actions; each action carries a distribution over
//! child nodes (a single certain child for deterministic tables). States
//! encode as the node name.

use std::collections::HashMap;

use super::{ChanceEvent, FeatureVector, Game, GameError, Player, Reward};

#[derive(Debug, Clone)]
pub struct TreeAction {
    pub name: String,
    /// (probability, child node name) in canonical event order.
    pub outcomes: Vec<(f64, String)>,
}

impl TreeAction {
    /// Deterministic edge to `child`.
    pub fn to(name: &str, child: &str) -> TreeAction {
        TreeAction {
            name: name.to_string(),
            outcomes: vec![(1.0, child.to_string())],
        }
    }

    /// Chance edge over `(probability, child)` outcomes.
    pub fn chance(name: &str, outcomes: &[(f64, &str)]) -> TreeAction {
        TreeAction {
            name: name.to_string(),
            outcomes: outcomes.iter().map(|(p, c)| (*p, c.to_string())).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub name: String,
    pub to_move: Player,
    pub features: Vec<f64>,
    pub reward: Option<f64>,
    pub actions: Vec<TreeAction>,
}

impl TreeNode {
    pub fn decision(name: &str, to_move: Player, features: Vec<f64>, actions: Vec<TreeAction>) -> TreeNode {
        TreeNode {
            name: name.to_string(),
            to_move,
            features,
            reward: None,
            actions,
        }
    }

    pub fn terminal(name: &str, reward: f64, feature_len: usize) -> TreeNode {
        TreeNode {
            name: name.to_string(),
            to_move: Player::Learner,
            features: vec![0.0; feature_len],
            reward: Some(reward),
            actions: Vec::new(),
        }
    }
}

/// State of a [`TreeGame`]: an index into the node table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(pub usize);

/// Action of a [`TreeGame`]: the `index`-th edge out of node `node`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub node: usize,
    pub index: usize,
}

#[derive(Debug, Clone)]
pub struct TreeGame {
    id: String,
    feature_len: usize,
    nodes: Vec<TreeNode>,
    by_name: HashMap<String, usize>,
    root: usize,
    stochastic: bool,
}

impl TreeGame {
    pub fn new(
        id: &str,
        feature_len: usize,
        nodes: Vec<TreeNode>,
        root: &str,
    ) -> Result<TreeGame, GameError> {
        let err = |reason: String| GameError::Decode {
            game: id.to_string(),
            text: root.to_string(),
            reason,
        };
        let mut by_name = HashMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if by_name.insert(node.name.clone(), i).is_some() {
                return Err(err(format!("duplicate node {}", node.name)));
            }
            if node.features.len() != feature_len {
                return Err(err(format!("node {} has wrong feature length", node.name)));
            }
            if node.reward.is_some() != node.actions.is_empty() {
                return Err(err(format!(
                    "node {} must be terminal exactly when it has no actions",
                    node.name
                )));
            }
        }
        for node in &nodes {
            for action in &node.actions {
                for (_, child) in &action.outcomes {
                    if !by_name.contains_key(child) {
                        return Err(err(format!("unknown child {child}")));
                    }
                }
            }
        }
        let root = *by_name.get(root).ok_or_else(|| err("unknown root".to_string()))?;
        let stochastic = nodes
            .iter()
            .flat_map(|n| &n.actions)
            .any(|a| a.outcomes.len() > 1);
        Ok(TreeGame {
            id: id.to_string(),
            feature_len,
            nodes,
            by_name,
            root,
            stochastic,
        })
    }

    pub fn node(&self, state: NodeId) -> &TreeNode {
        &self.nodes[state.0]
    }

    /// The canonical three-ply, eight-leaf minimax demonstration tree,
    /// together with the weight vector that scores its leaves
    /// (3, -9, -5, -6, 4, 2, -9, 5). Searching it to depth 3 backs up a
    /// root value of 4 along A -> C -> F -> L.
    pub fn minimax_demo() -> (TreeGame, Vec<f64>) {
        let k = 8;
        let weights = vec![3.0, -9.0, -5.0, -6.0, 4.0, 2.0, -9.0, 5.0];
        let one_hot = |i: usize| {
            let mut f = vec![0.0; k];
            f[i] = 1.0;
            f
        };
        let zeros = vec![0.0; k];
        let leaf = |name: &str, i: usize| {
            TreeNode::decision(
                name,
                Player::Opponent,
                one_hot(i),
                vec![TreeAction::to("z", "Z")],
            )
        };
        let nodes = vec![
            TreeNode::decision(
                "A",
                Player::Learner,
                zeros.clone(),
                vec![TreeAction::to("b", "B"), TreeAction::to("c", "C")],
            ),
            TreeNode::decision(
                "B",
                Player::Opponent,
                zeros.clone(),
                vec![TreeAction::to("d", "D"), TreeAction::to("e", "E")],
            ),
            TreeNode::decision(
                "C",
                Player::Opponent,
                zeros.clone(),
                vec![TreeAction::to("f", "F"), TreeAction::to("g", "G")],
            ),
            TreeNode::decision(
                "D",
                Player::Learner,
                zeros.clone(),
                vec![TreeAction::to("h", "H"), TreeAction::to("i", "I")],
            ),
            TreeNode::decision(
                "E",
                Player::Learner,
                zeros.clone(),
                vec![TreeAction::to("j", "J"), TreeAction::to("k", "K")],
            ),
            TreeNode::decision(
                "F",
                Player::Learner,
                zeros.clone(),
                vec![TreeAction::to("l", "L"), TreeAction::to("m", "M")],
            ),
            TreeNode::decision(
                "G",
                Player::Learner,
                zeros.clone(),
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
        ];
        let game = TreeGame::new("tree-demo", k, nodes, "A").expect("demo table is well formed");
        (game, weights)
    }
}

impl Game for TreeGame {
    type State = NodeId;
    type Action = Edge;

    fn id(&self) -> &str {
        &self.id
    }

    fn feature_len(&self) -> usize {
        self.feature_len
    }

    fn feature_names(&self) -> Vec<String> {
        (0..self.feature_len).map(|i| format!("f{i}")).collect()
    }

    /// The node table fixes each node's mover, so `first_mover` is ignored.
    fn initial_state(&self, _first_mover: Player) -> NodeId {
        NodeId(self.root)
    }

    fn side_to_move(&self, state: &NodeId) -> Player {
        self.nodes[state.0].to_move
    }

    fn is_terminal(&self, state: &NodeId) -> bool {
        self.nodes[state.0].reward.is_some()
    }

    fn legal_actions(&self, state: &NodeId) -> Vec<Edge> {
        (0..self.nodes[state.0].actions.len())
            .map(|index| Edge { node: state.0, index })
            .collect()
    }

    fn chance_events(&self, state: &NodeId, action: &Edge) -> Vec<ChanceEvent> {
        self.nodes[state.0].actions[action.index]
            .outcomes
            .iter()
            .enumerate()
            .map(|(id, (p, _))| ChanceEvent::new(id, *p))
            .collect()
    }

    fn apply(&self, state: &NodeId, action: &Edge, event: &ChanceEvent) -> Result<NodeId, GameError> {
        let node = &self.nodes[state.0];
        if action.node != state.0 || action.index >= node.actions.len() {
            return Err(GameError::IllegalAction {
                action: self.action_name(action),
                state: self.encode_state(state),
            });
        }
        let outcomes = &node.actions[action.index].outcomes;
        let (_, child) = outcomes.get(event.id).ok_or(GameError::UnknownChanceEvent {
            id: event.id,
            action: self.action_name(action),
        })?;
        Ok(NodeId(self.by_name[child]))
    }

    fn terminal_reward(&self, state: &NodeId) -> Result<Reward, GameError> {
        match self.nodes[state.0].reward {
            Some(r) => Reward::new(r),
            None => Err(GameError::RewardBeforeTermination {
                state: self.encode_state(state),
            }),
        }
    }

    fn features(&self, state: &NodeId) -> FeatureVector {
        FeatureVector::new(self.nodes[state.0].features.clone())
    }

    fn encode_state(&self, state: &NodeId) -> String {
        self.nodes[state.0].name.clone()
    }

    fn decode_state(&self, text: &str) -> Result<NodeId, GameError> {
        self.by_name.get(text).map(|&i| NodeId(i)).ok_or_else(|| GameError::Decode {
            game: self.id.clone(),
            text: text.to_string(),
            reason: "unknown node name".to_string(),
        })
    }

    fn action_name(&self, action: &Edge) -> String {
        self.nodes[action.node].actions[action.index].name.clone()
    }

    fn is_stochastic(&self) -> bool {
        self.stochastic
    }

    fn heuristic_weights(&self) -> Vec<f64> {
        vec![0.0; self.feature_len]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_tree_shape() {
        let (game, weights) = TreeGame::minimax_demo();
        assert_eq!(weights.len(), game.feature_len());
        let root = game.initial_state(Player::Learner);
        assert_eq!(game.encode_state(&root), "A");
        assert_eq!(game.legal_actions(&root).len(), 2);
        assert!(!game.is_stochastic());
        let leaf = game.decode_state("L").unwrap();
        // Weight dot one-hot feature reproduces the tabulated leaf score.
        let f = game.features(&leaf);
        let value: f64 = (0..8).map(|i| weights[i] * f[i]).sum();
        assert_eq!(value, 4.0);
    }

    #[test]
    fn malformed_tables_are_rejected() {
        let bad = TreeGame::new(
            "bad",
            1,
            vec![TreeNode::decision(
                "A",
                Player::Learner,
                vec![0.0],
                vec![TreeAction::to("x", "MISSING")],
            )],
            "A",
        );
        assert!(bad.is_err());
    }

    #[test]
    fn wrong_node_action_is_rejected() {
        let (game, _) = TreeGame::minimax_demo();
        let root = game.initial_state(Player::Learner);
        let foreign = Edge { node: 3, index: 0 };
        assert!(game.apply(&root, &foreign, &ChanceEvent::UNIT).is_err());
    }
}
