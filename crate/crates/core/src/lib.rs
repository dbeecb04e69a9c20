//! Geometric shell shaping for 4D optical constellations.
//!
//! The crate builds shell- and symmetry-constrained 4D constellations,
//! simulates a single-span dual-polarization fiber link with transceiver
//! noise loading, estimates MI / BMD rates from Monte-Carlo symbols, decodes
//! the inner (128,119) Hamming code, and drives a pattern search over the
//! constellation parameters.

pub mod airmetrics;
pub mod constellation;
pub mod fec;
pub mod fiberlink;
pub mod optimizer;
pub(crate) mod rng;

pub use airmetrics::{AirReport, LlrFrame, SymbolRecord};
pub use constellation::{Constellation, GssParameters};
pub use fiberlink::{DualPolWaveform, FiberConfig, ImpairmentConfig};
