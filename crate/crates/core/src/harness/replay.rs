//! Re-execute a transcript through the rules engine and compare outcomes.

use std::fmt;

use thiserror::Error;

use super::runner::{MatchError, MatchResult, Referee};
use super::transcript::{Outcome, Transcript};
use crate::board::{GameState, Move, Player};

/// First disagreement between a transcript and its replay. `t` is `None` for
/// problems with the header or the outcome record.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ReplayMismatch {
    pub t: Option<u32>,
    pub reason: String,
    /// The mismatch is an illegal or over-budget move.
    pub illegal: bool,
}

impl fmt::Display for ReplayMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.t {
            Some(t) => write!(f, "mismatch at t={t}: {}", self.reason),
            None => write!(f, "mismatch: {}", self.reason),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Replay {
    pub result: MatchResult,
    pub state: GameState,
}

fn mismatch(t: Option<u32>, reason: impl Into<String>) -> ReplayMismatch {
    ReplayMismatch { t, reason: reason.into(), illegal: false }
}

/// Replay every move, checking turn order, budgets, legality, that nothing
/// follows a win, and that the recorded outcome is the one the engine reaches.
pub fn replay_verify(transcript: &Transcript) -> Result<Replay, ReplayMismatch> {
    let h = &transcript.header;
    let mode = h.mode().map_err(|e| mismatch(None, e.to_string()))?;
    let (m, b) = h.schedules().map_err(|e| mismatch(None, e.to_string()))?;
    let mut referee = Referee::new(mode, m, b, h.line_threshold, h.directed_occupies)
        .map_err(|e| mismatch(None, e.to_string()))?;
    let mut won = false;
    let mut expected = (1u32, Player::Maker);
    for rec in &transcript.moves {
        let t = rec.t;
        if won {
            return Err(mismatch(Some(t), "move recorded after Maker already won"));
        }
        if (rec.t, rec.player) != expected {
            return Err(mismatch(
                Some(t),
                format!("expected a {:?} move at t={}, found {:?} at t={}", expected.1, expected.0, rec.player, rec.t),
            ));
        }
        if t > h.max_steps {
            return Err(mismatch(Some(t), format!("move beyond max_steps = {}", h.max_steps)));
        }
        let applied = match (&rec.mv, rec.player) {
            (Move::Maker(pts), Player::Maker) => referee.maker_turn(t, pts, &h.maker).map(|w| won = w),
            (Move::Breaker(marks), Player::Breaker) => referee.breaker_turn(t, marks, &h.breaker),
            _ => return Err(mismatch(Some(t), "move kind does not match its player")),
        };
        if let Err(e) = applied {
            let illegal = matches!(e, MatchError::IllegalMove { .. } | MatchError::BudgetOverrun { .. });
            return Err(ReplayMismatch { t: Some(t), reason: e.to_string(), illegal });
        }
        expected = match rec.player {
            Player::Maker => (t, Player::Breaker),
            Player::Breaker => (t + 1, Player::Maker),
        };
    }
    let computed = referee.outcome();
    if let Outcome::Survived { steps } = computed {
        if steps != h.max_steps || expected != (steps + 1, Player::Maker) {
            return Err(mismatch(None, format!("transcript stops after t={steps} without a win, max_steps = {}", h.max_steps)));
        }
    }
    if computed != transcript.outcome {
        return Err(mismatch(
            None,
            format!("recorded outcome {:?} but the replay reaches {:?}", transcript.outcome, computed),
        ));
    }
    let state = referee.state.clone();
    Ok(Replay { result: referee.into_result(), state })
}
