//! Parameterized evaluation functions with analytic gradients.
//!
//! The evaluator is linear in the features, optionally squashed through
//! `tanh(beta * raw)` so predictions stay inside the reward range. Terminal
//! states always evaluate to their true reward with a zero gradient, making
//! terminal values parameter-independent.
//!
//! Weight files are plain text: a header with the game id, feature count and
//! squash configuration, then one `name value` line per feature. Values are
//! written with 17 significant digits so the round trip is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::game::{Game, GameError};

/// Relative-error denominators in gradient checks are floored here.
pub const GRAD_CHECK_FLOOR: f64 = 1e-8;

/// Default central-difference step for gradient checks.
pub const GRAD_CHECK_STEP: f64 = 1e-6;

/// Default squash scale: one pawn of raw score maps to a quarter of the
/// reward range, `tanh(default_beta() * 1.0) == 0.25`.
pub fn default_beta() -> f64 {
    0.25f64.atanh()
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("weight vector has {got} entries but the game has {expected} features")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite weight {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("delta vector has {got} entries, expected {expected}")]
    DeltaLength { expected: usize, got: usize },
    #[error("game {0} exposes no material features")]
    NoMaterialFeatures(String),
    #[error("squash beta must be positive, got {0}")]
    InvalidBeta(f64),
    #[error("weight file line {line}: {reason}")]
    WeightFile { line: usize, reason: String },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The `k` coefficients of the evaluation function, plus an update counter.
///
/// Entries are guaranteed finite: construction and every applied delta
/// re-check them.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    weights: Vec<f64>,
    update_count: u64,
}

impl ParamVector {
    pub fn zeros(len: usize) -> ParamVector {
        ParamVector {
            weights: vec![0.0; len],
            update_count: 0,
        }
    }

    pub fn from_vec(weights: Vec<f64>) -> Result<ParamVector, EvalError> {
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(EvalError::NonFinite { index, value });
            }
        }
        Ok(ParamVector {
            weights,
            update_count: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    pub fn dot(&self, features: &[f64]) -> f64 {
        self.weights.iter().zip(features).map(|(w, f)| w * f).sum()
    }

    /// Adds `delta` in place, rejecting the whole update if any resulting
    /// entry is NaN or infinite.
    pub fn apply_delta(&mut self, delta: &[f64]) -> Result<(), EvalError> {
        if delta.len() != self.weights.len() {
            return Err(EvalError::DeltaLength {
                expected: self.weights.len(),
                got: delta.len(),
            });
        }
        for (index, (&w, &d)) in self.weights.iter().zip(delta).enumerate() {
            let value = w + d;
            if !value.is_finite() {
                return Err(EvalError::NonFinite { index, value });
            }
        }
        for (w, d) in self.weights.iter_mut().zip(delta) {
            *w += d;
        }
        self.update_count += 1;
        Ok(())
    }

    /// Restores the update counter when loading from a weight file.
    fn with_update_count(mut self, count: u64) -> ParamVector {
        self.update_count = count;
        self
    }
}

/// Optional bounded transform of the raw linear score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquashConfig {
    pub enabled: bool,
    pub beta: f64,
}

impl SquashConfig {
    pub fn off() -> SquashConfig {
        SquashConfig {
            enabled: false,
            beta: default_beta(),
        }
    }

    pub fn on(beta: f64) -> Result<SquashConfig, EvalError> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(EvalError::InvalidBeta(beta));
        }
        Ok(SquashConfig { enabled: true, beta })
    }

    pub fn on_default() -> SquashConfig {
        SquashConfig {
            enabled: true,
            beta: default_beta(),
        }
    }
}

/// Value and gradient of the evaluation at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// Evaluates `state` under weights `w`.
///
/// Terminal states return `(terminal reward, zero gradient)`. Non-terminal
/// states return `s(w . f(x))` with `s` the identity or `tanh(beta * .)`,
/// and the chain-rule gradient.
pub fn evaluate<G: Game>(
    game: &G,
    state: &G::State,
    w: &ParamVector,
    squash: SquashConfig,
) -> Result<EvalResult, EvalError> {
    if w.len() != game.feature_len() {
        return Err(EvalError::DimensionMismatch {
            expected: game.feature_len(),
            got: w.len(),
        });
    }
    if game.is_terminal(state) {
        return Ok(EvalResult {
            value: game.terminal_reward(state)?.value(),
            gradient: vec![0.0; w.len()],
        });
    }
    let features = game.features(state);
    let raw = w.dot(features.values());
    if squash.enabled {
        let value = (squash.beta * raw).tanh();
        let chain = (1.0 - value * value) * squash.beta;
        Ok(EvalResult {
            value,
            gradient: features.values().iter().map(|f| chain * f).collect(),
        })
    } else {
        Ok(EvalResult {
            value: raw,
            gradient: features.into_vec(),
        })
    }
}

/// Compares the analytic gradient to central finite differences of the
/// value, component by component, and returns the maximum relative error
/// (denominator floored at [`GRAD_CHECK_FLOOR`]).
pub fn grad_check<G: Game>(
    game: &G,
    state: &G::State,
    w: &ParamVector,
    squash: SquashConfig,
    step: f64,
) -> Result<f64, EvalError> {
    assert!(step > 0.0, "finite-difference step must be positive");
    let analytic = evaluate(game, state, w, squash)?.gradient;
    let mut worst = 0.0f64;
    let mut probe = w.weights().to_vec();
    for i in 0..probe.len() {
        let original = probe[i];
        let hi = original + step;
        let lo = original - step;
        probe[i] = hi;
        let plus = evaluate(game, state, &ParamVector::from_vec(probe.clone())?, squash)?.value;
        probe[i] = lo;
        let minus = evaluate(game, state, &ParamVector::from_vec(probe.clone())?, squash)?.value;
        probe[i] = original;
        // Divide by the realized perturbation, not the nominal one, so the
        // rounding of `original + step` does not pollute the quotient.
        let numeric = if plus == minus { 0.0 } else { (plus - minus) / (hi - lo) };
        let denom = analytic[i].abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    Ok(worst)
}

/// Weights set to the conventional computer values on the game's material
/// features (pawn 1, knight 4, bishop 4, rook 6, queen 12) and zero
/// elsewhere. Under the default squash scale one pawn then maps to a
/// quarter of the reward range.
pub fn material_init<G: Game>(game: &G) -> Result<ParamVector, EvalError> {
    let features = game
        .material_features()
        .ok_or_else(|| EvalError::NoMaterialFeatures(game.id().to_string()))?;
    let mut weights = vec![0.0; game.feature_len()];
    for (index, kind) in features {
        weights[index] = kind.material_value();
    }
    ParamVector::from_vec(weights)
}

/// Every coefficient set to the value of a pawn.
pub fn pawn_equal_init<G: Game>(game: &G) -> ParamVector {
    ParamVector {
        weights: vec![1.0; game.feature_len()],
        update_count: 0,
    }
}

/// Formats a float with 17 significant digits; parsing the result recovers
/// the exact bit pattern of any finite `f64`.
pub fn encode_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Parsed contents of a weight file.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFile {
    pub game_id: String,
    pub names: Vec<String>,
    pub params: ParamVector,
    pub squash: SquashConfig,
}

impl WeightFile {
    pub fn new<G: Game>(game: &G, params: &ParamVector, squash: SquashConfig) -> WeightFile {
        WeightFile {
            game_id: game.id().to_string(),
            names: game.feature_names(),
            params: params.clone(),
            squash,
        }
    }

    /// Validates the file against `game` and surrenders the weights.
    pub fn into_params_for<G: Game>(self, game: &G) -> Result<(ParamVector, SquashConfig), EvalError> {
        if self.game_id != game.id() {
            return Err(EvalError::WeightFile {
                line: 2,
                reason: format!("weights are for {:?}, not {:?}", self.game_id, game.id()),
            });
        }
        if self.params.len() != game.feature_len() {
            return Err(EvalError::DimensionMismatch {
                expected: game.feature_len(),
                got: self.params.len(),
            });
        }
        Ok((self.params, self.squash))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tdlab-weights v1");
        let _ = writeln!(out, "game {}", self.game_id);
        let _ = writeln!(out, "features {}", self.params.len());
        let _ = writeln!(out, "squash {}", if self.squash.enabled { "on" } else { "off" });
        let _ = writeln!(out, "beta {}", encode_f64(self.squash.beta));
        let _ = writeln!(out, "updates {}", self.params.update_count());
        for (name, value) in self.names.iter().zip(self.params.weights()) {
            let _ = writeln!(out, "{name} {}", encode_f64(*value));
        }
        out
    }

    pub fn parse(text: &str) -> Result<WeightFile, EvalError> {
        let fail = |line: usize, reason: &str| EvalError::WeightFile {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let version = lines.next().ok_or_else(|| fail(0, "empty file"))?;
        if version.1 != "tdlab-weights v1" {
            return Err(fail(1, "not a tdlab-weights v1 file"));
        }
        let mut header = |key: &str| -> Result<String, EvalError> {
            let (no, line) = lines
                .next()
                .ok_or_else(|| fail(0, "unexpected end of file"))?;
            let (k, v) = line
                .split_once(' ')
                .ok_or_else(|| fail(no + 1, "expected 'key value'"))?;
            if k != key {
                return Err(fail(no + 1, &format!("expected key {key:?}, found {k:?}")));
            }
            Ok(v.to_string())
        };
        let game_id = header("game")?;
        let count: usize = header("features")?
            .parse()
            .map_err(|_| fail(3, "bad feature count"))?;
        let enabled = match header("squash")?.as_str() {
            "on" => true,
            "off" => false,
            _ => return Err(fail(4, "squash must be on or off")),
        };
        let beta: f64 = header("beta")?.parse().map_err(|_| fail(5, "bad beta"))?;
        let updates: u64 = header("updates")?.parse().map_err(|_| fail(6, "bad update count"))?;
        let mut names = Vec::with_capacity(count);
        let mut values = Vec::with_capacity(count);
        for (no, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (name, value) = line
                .split_once(' ')
                .ok_or_else(|| fail(no + 1, "expected 'name value'"))?;
            names.push(name.to_string());
            values.push(value.parse::<f64>().map_err(|_| fail(no + 1, "bad value"))?);
        }
        if names.len() != count {
            return Err(fail(0, "feature count does not match header"));
        }
        let squash = SquashConfig {
            enabled,
            beta,
        };
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(EvalError::InvalidBeta(beta));
        }
        Ok(WeightFile {
            game_id,
            names,
            params: ParamVector::from_vec(values)?.with_update_count(updates),
            squash,
        })
    }

    pub fn write_to(&self, path: &Path) -> Result<(), EvalError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<WeightFile, EvalError> {
        let text = fs::read_to_string(path)?;
        WeightFile::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{minichess::MiniChess, tictactoe::TicTacToe, Game, Player};
    use rand::Rng as _;
    use rand::SeedableRng as _;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_give_zero_value_and_feature_gradient() {
        let game = TicTacToe::new();
        let s = game.decode_state("L...O....;L").unwrap();
        let w = ParamVector::zeros(game.feature_len());
        let r = evaluate(&game, &s, &w, SquashConfig::off()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.gradient, game.features(&s).into_vec());
    }

    #[test]
    fn terminal_states_return_reward_with_zero_gradient() {
        let game = TicTacToe::new();
        let s = game.decode_state("LLL.OO...;O").unwrap();
        let w = ParamVector::from_vec(vec![0.3, -2.0, 1.0, 0.5, 0.1, -0.4]).unwrap();
        for squash in [SquashConfig::off(), SquashConfig::on_default()] {
            let r = evaluate(&game, &s, &w, squash).unwrap();
            assert_eq!(r.value, 1.0);
            assert!(r.gradient.iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn tanh_squash_matches_closed_form_and_finite_differences() {
        let game = TicTacToe::new();
        let s = game.decode_state("....L....;O").unwrap();
        // Center feature is 1, to_move is -1; choose w so the raw score is 0.5.
        let f = game.features(&s);
        assert_eq!(f[3], 1.0);
        assert_eq!(f[5], -1.0);
        let w = ParamVector::from_vec(vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.5]).unwrap();
        let squash = SquashConfig::on(1.0).unwrap();
        let r = evaluate(&game, &s, &w, squash).unwrap();
        let expect = 0.5f64.tanh();
        assert_eq!(r.value, expect);
        for (g, f) in r.gradient.iter().zip(f.values()) {
            assert_eq!(*g, (1.0 - expect * expect) * f);
        }
        let err = grad_check(&game, &s, &w, squash, GRAD_CHECK_STEP).unwrap();
        assert!(err <= 1e-6, "finite differences disagree: {err}");
    }

    #[test]
    fn grad_check_is_tight_for_the_linear_evaluator() {
        let game = TicTacToe::new();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let states =
            crate::game::playout::sample_states(&game, &mut rng, 20).unwrap();
        for s in states {
            let w = ParamVector::from_vec(
                (0..game.feature_len()).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let err = grad_check(&game, &s, &w, SquashConfig::off(), GRAD_CHECK_STEP).unwrap();
            assert!(err <= 1e-10, "linear grad check too loose: {err}");
        }
    }

    #[test]
    fn zero_feature_vector_checks_exactly() {
        // The demo tree's internal nodes have all-zero features.
        let (game, _) = crate::game::TreeGame::minimax_demo();
        let root = game.initial_state(Player::Learner);
        let w = ParamVector::from_vec(vec![0.5; 8]).unwrap();
        let err = grad_check(&game, &root, &w, SquashConfig::on_default(), GRAD_CHECK_STEP).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn squash_keeps_values_inside_the_reward_range() {
        let game = MiniChess::new();
        let w = material_init(&game).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let states = crate::game::playout::sample_states(&game, &mut rng, 100).unwrap();
        for s in states {
            let r = evaluate(&game, &s, &w, SquashConfig::on_default()).unwrap();
            assert!(r.value.abs() < 1.0);
        }
    }

    #[test]
    fn material_init_uses_computer_values() {
        let game = MiniChess::new();
        let w = material_init(&game).unwrap();
        assert_eq!(w.weights(), &[1.0, 4.0, 4.0, 6.0, 12.0]);
        assert!(material_init(&TicTacToe::new()).is_err());
        let pawn = pawn_equal_init(&game);
        assert_eq!(pawn.weights(), &[1.0; 5]);
    }

    #[test]
    fn pawn_maps_to_a_quarter_of_the_reward_range() {
        let game = MiniChess::new();
        let w = material_init(&game).unwrap();
        // Up one pawn, all else equal.
        let s = game.decode_state("rnbqk/1pppp/5/PPPPP/RNBQK L u 2").unwrap();
        let r = evaluate(&game, &s, &w, SquashConfig::on_default()).unwrap();
        assert!((r.value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn nan_delta_is_rejected_and_leaves_weights_intact() {
        let mut w = ParamVector::from_vec(vec![1.0, 2.0]).unwrap();
        let err = w.apply_delta(&[f64::NAN, 0.0]).unwrap_err();
        assert!(matches!(err, EvalError::NonFinite { index: 0, .. }));
        assert_eq!(w.weights(), &[1.0, 2.0]);
        assert_eq!(w.update_count(), 0);
        w.apply_delta(&[0.5, -0.5]).unwrap();
        assert_eq!(w.update_count(), 1);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let game = TicTacToe::new();
        let s = game.initial_state(Player::Learner);
        let w = ParamVector::zeros(3);
        assert!(matches!(
            evaluate(&game, &s, &w, SquashConfig::off()),
            Err(EvalError::DimensionMismatch { expected: 6, got: 3 })
        ));
    }

    #[test]
    fn weight_file_round_trips_through_text() {
        let game = MiniChess::new();
        let mut params = material_init(&game).unwrap();
        params.apply_delta(&[1e-13, -0.25, 0.125, std::f64::consts::PI, -1.0 / 3.0]).unwrap();
        let file = WeightFile::new(&game, &params, SquashConfig::on_default());
        let parsed = WeightFile::parse(&file.to_text()).unwrap();
        assert_eq!(parsed, file);
        let (restored, squash) = parsed.into_params_for(&game).unwrap();
        assert_eq!(restored.weights(), params.weights());
        assert_eq!(restored.update_count(), 1);
        assert_eq!(squash, SquashConfig::on_default());
    }

    #[test]
    fn weight_file_rejects_wrong_game() {
        let game = MiniChess::new();
        let file = WeightFile::new(&game, &material_init(&game).unwrap(), SquashConfig::off());
        let err = file.into_params_for(&TicTacToe::new()).unwrap_err();
        assert!(err.to_string().contains("minichess"));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// With squash off the evaluator is linear in the weights.
            #[test]
            fn linearity_in_the_weights(
                a in -3.0f64..3.0,
                b in -3.0f64..3.0,
                w1 in proptest::collection::vec(-2.0f64..2.0, 6),
                w2 in proptest::collection::vec(-2.0f64..2.0, 6),
                seed in 0u64..500,
            ) {
                let game = TicTacToe::new();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s = crate::game::playout::sample_states(&game, &mut rng, 1).unwrap().remove(0);
                let combo: Vec<f64> = w1.iter().zip(&w2).map(|(x, y)| a * x + b * y).collect();
                let eval = |w: Vec<f64>| {
                    evaluate(&game, &s, &ParamVector::from_vec(w).unwrap(), SquashConfig::off())
                        .unwrap()
                        .value
                };
                let lhs = eval(combo);
                let rhs = a * eval(w1) + b * eval(w2);
                prop_assert!((lhs - rhs).abs() < 1e-12);
            }

            /// 17-significant-digit text recovers any finite f64 exactly.
            #[test]
            fn float_encoding_round_trips(bits in any::<u64>()) {
                let value = f64::from_bits(bits);
                prop_assume!(value.is_finite());
                let text = encode_f64(value);
                let back: f64 = text.parse().unwrap();
                prop_assert_eq!(back.to_bits(), value.to_bits());
            }
        }
    }
}
