//! Simulation toolkit for the generalized n-in-a-row Maker-Breaker game on the
//! integer lattice: lattice-line geometry, a rules engine, Maker and Breaker
//! strategies, the weighted bin game, incidence bounds and a match harness.

pub mod bingame;
pub mod board;
pub mod geometry;
pub mod harness;
pub mod incidence;
pub mod num;
pub mod schedule;
pub mod strategies;

pub use board::{BoardError, BreakerMark, GameMode, GameState, Move, Player, Segment, Variant};
pub use geometry::{Direction, GeometryError, GridPoint, LineKey};
pub use schedule::Schedule;
