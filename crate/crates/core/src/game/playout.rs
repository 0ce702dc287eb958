//! Random-playout helpers shared by the harness and the test suites.

use rand::Rng;

use super::{ChanceEvent, Game, GameError, Player};

/// Draws one outcome from a chance distribution.
pub fn draw_event<R: Rng>(events: &[ChanceEvent], rng: &mut R) -> ChanceEvent {
    debug_assert!(!events.is_empty());
    if events.len() == 1 {
        return events[0];
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for event in events {
        acc += event.probability;
        if u < acc {
            return *event;
        }
    }
    *events.last().expect("non-empty distribution")
}

/// Plays uniformly random legal moves from the initial position for at most
/// `max_plies` plies and returns the final state reached.
pub fn random_playout<G: Game, R: Rng>(
    game: &G,
    rng: &mut R,
    max_plies: usize,
    first_mover: Player,
) -> Result<G::State, GameError> {
    let mut state = game.initial_state(first_mover);
    for _ in 0..max_plies {
        if game.is_terminal(&state) {
            break;
        }
        let actions = game.legal_actions(&state);
        let action = &actions[rng.random_range(0..actions.len())];
        let events = game.chance_events(&state, action);
        let event = draw_event(&events, rng);
        state = game.apply(&state, action, &event)?;
    }
    Ok(state)
}

/// Collects `count` non-terminal states reachable by random play. States are
/// drawn from fresh playouts truncated at random depths, alternating the
/// first mover, so early and late positions both appear.
pub fn sample_states<G: Game, R: Rng>(
    game: &G,
    rng: &mut R,
    count: usize,
) -> Result<Vec<G::State>, GameError> {
    let mut states = Vec::with_capacity(count);
    let mut side = Player::Learner;
    while states.len() < count {
        let mut state = game.initial_state(side);
        side = side.flip();
        let cutoff = rng.random_range(0..200usize);
        let mut ply = 0;
        while !game.is_terminal(&state) && ply < cutoff {
            let actions = game.legal_actions(&state);
            let action = &actions[rng.random_range(0..actions.len())];
            let events = game.chance_events(&state, action);
            let event = draw_event(&events, rng);
            state = game.apply(&state, action, &event)?;
            ply += 1;
        }
        if !game.is_terminal(&state) {
            states.push(state);
        }
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{DiceRace, TicTacToe};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn playouts_reach_legal_states() {
        let game = TicTacToe::new();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let s = random_playout(&game, &mut rng, 9, Player::Learner).unwrap();
            assert!(game.is_terminal(&s) || !game.legal_actions(&s).is_empty());
        }
    }

    #[test]
    fn sampled_states_are_non_terminal() {
        let game = DiceRace::new();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let states = sample_states(&game, &mut rng, 50).unwrap();
        assert_eq!(states.len(), 50);
        assert!(states.iter().all(|s| !game.is_terminal(s)));
    }

    #[test]
    fn event_draw_respects_support() {
        let events = vec![ChanceEvent::new(0, 0.5), ChanceEvent::new(1, 0.5)];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let e = draw_event(&events, &mut rng);
            assert!(e.id < 2);
        }
    }
}
