//! Noncommutative probability toolkit: conditioning operations on
//! projection and classical models, a decentralized sequential testing
//! simulator, order-effect statistics, and binary detection with
//! projection-valued and positive-operator-valued measurements.

pub mod decentralized_sim;
pub mod detection;
pub mod empirics;
pub mod error;
pub mod event_state;
pub mod linalg;
pub mod report;
pub mod sampling;

pub use error::{Error, Result};
