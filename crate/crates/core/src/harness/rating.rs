//! Elo-style incremental rating with a shrinking uncertainty estimate.
//!
//! A desk-scale surrogate for online server ratings: the learner's rating
//! moves by `K * (result - expected)` against fixed, pre-calibrated opponent
//! ratings. The absolute scale is arbitrary and not comparable to any public
//! rating pool.

/// Fixed K-factor of the incremental update.
pub const K_FACTOR: f64 = 32.0;

/// Rating every tracked learner starts from.
pub const BASE_RATING: f64 = 1000.0;

/// Uncertainty model: `sigma = SIGMA_SCALE / sqrt(games + 1)`.
pub const SIGMA_SCALE: f64 = 350.0;

/// Expected score of a rated player against an opponent, by the logistic
/// curve with the conventional 400-point scale.
pub fn expected_score(rating: f64, opponent: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((opponent - rating) / 400.0))
}

/// One point of a learning curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingPoint {
    pub game_index: u64,
    pub rating: f64,
    pub sigma: f64,
    pub result: f64,
}

/// Running rating estimate of a learner against calibrated opponents.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingTrack {
    rating: f64,
    games: u64,
    history: Vec<RatingPoint>,
}

impl Default for RatingTrack {
    fn default() -> Self {
        Self::new()
    }
}

impl RatingTrack {
    pub fn new() -> RatingTrack {
        RatingTrack {
            rating: BASE_RATING,
            games: 0,
            history: Vec::new(),
        }
    }

    pub fn rating(&self) -> f64 {
        self.rating
    }

    pub fn games(&self) -> u64 {
        self.games
    }

    pub fn sigma(&self) -> f64 {
        SIGMA_SCALE / ((self.games + 1) as f64).sqrt()
    }

    pub fn history(&self) -> &[RatingPoint] {
        &self.history
    }

    /// First game index at which the rating reached `threshold`, if any.
    pub fn games_to_reach(&self, threshold: f64) -> Option<u64> {
        self.history
            .iter()
            .find(|p| p.rating >= threshold)
            .map(|p| p.game_index)
    }
}

/// Records `result` (0 loss, 0.5 draw, 1 win) against an opponent of the
/// given rating and returns the updated track.
pub fn rating_update(track: &RatingTrack, result: f64, opponent_rating: f64) -> RatingTrack {
    debug_assert!(result == 0.0 || result == 0.5 || result == 1.0);
    let expected = expected_score(track.rating, opponent_rating);
    let rating = track.rating + K_FACTOR * (result - expected);
    let games = track.games + 1;
    let mut history = track.history.clone();
    let sigma = SIGMA_SCALE / ((games + 1) as f64).sqrt();
    history.push(RatingPoint {
        game_index: games,
        rating,
        sigma,
        result,
    });
    RatingTrack {
        rating,
        games,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn win_against_equal_opponent_gains_half_k() {
        let track = RatingTrack::new();
        let updated = rating_update(&track, 1.0, BASE_RATING);
        assert_eq!(updated.rating(), BASE_RATING + 16.0);
    }

    #[test]
    fn exactly_expected_result_leaves_rating_unchanged() {
        let track = RatingTrack::new();
        // Draw against an equal opponent: expected score is exactly 0.5.
        let updated = rating_update(&track, 0.5, BASE_RATING);
        assert_eq!(updated.rating(), BASE_RATING);
    }

    #[test]
    fn sigma_shrinks_with_game_count() {
        let mut track = RatingTrack::new();
        let mut last = track.sigma();
        for _ in 0..10 {
            track = rating_update(&track, 1.0, BASE_RATING);
            assert!(track.sigma() < last);
            last = track.sigma();
        }
    }

    #[test]
    fn expected_scores_are_symmetric() {
        let a = expected_score(1200.0, 1000.0);
        let b = expected_score(1000.0, 1200.0);
        assert!((a + b - 1.0).abs() < 1e-12);
        assert!(a > 0.7);
    }
}
