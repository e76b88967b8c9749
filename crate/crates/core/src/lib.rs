//! Distributed-CSI joint precoding across a line of cooperating
//! transmitters.
//!
//! Each transmitter holds its own quantized estimate of the multiuser
//! channel, computes a zero-forcing precoder locally and applies only its own
//! row. The crate provides the channel models, the feedback-bit allocation
//! policies, the local estimate and precoder construction, and a
//! deterministic Monte Carlo evaluator.

pub mod allocation;
pub mod channel;
pub mod error;
pub mod evaluator;
pub mod experiment;
pub mod numerics;
pub mod precoder;
pub mod quantizer;

pub use error::{Error, Result};
pub use numerics::ComplexMatrix;
