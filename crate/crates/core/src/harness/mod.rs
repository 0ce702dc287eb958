//! Agents, match play, training regimes and rating tracking.

pub mod rating;
