//! Simulation, mitigation and benchmarking of mutual interference in
//! chirp-sequence (CS) automotive radar.
//!
//! The crate is organised bottom-up:
//!
//! - [`radar`] synthesizes clean and interfered beat-signal frames from
//!   randomized scenes.
//! - [`spectral`] turns frames into range / range-Doppler spectra, detects
//!   peaks and scores frames with the SRINR metric.
//! - [`mitigation`] holds the interchangeable mitigation strategies
//!   (passthrough, time-domain thresholding, envelope suppression and the
//!   GRU network) behind a single trait and a by-name registry.
//! - [`nn`] is a from-scratch residual bidirectional GRU with exact
//!   backpropagation through time, Adam and gradient clipping.
//! - [`train`] drives batching, epochs, validation and checkpoint selection.
//! - [`io`] implements the dataset, checkpoint, config, CSV and report formats.

pub mod error;
pub mod io;
pub mod mitigation;
pub mod nn;
pub mod radar;
pub mod spectral;
pub mod train;

pub use error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Fixed frame length fed to the network and the range FFT.
pub const FRAME_LEN: usize = 416;

/// Number of chirps in one coherent frame.
pub const NUM_CHIRPS: usize = 75;
