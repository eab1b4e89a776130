//! Socially-aware 2D navigation library.
//!
//! The crate simulates a differential-drive robot moving through small indoor
//! scenes with people. Each control tick it clusters a simulated laser scan
//! into person tracks, classifies the surrounding social context (hallway,
//! art gallery, queue, O-formation, ...), picks the objective set that matters
//! for that context, and selects a velocity command with a Pareto-front based
//! multi-objective local planner.

pub mod context;
pub mod error;
pub mod geom;
pub mod paccet;
pub mod perception;
pub mod planner;
pub mod sim;
pub mod social;
pub mod world;

pub use error::Error;

/// Convenient result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
