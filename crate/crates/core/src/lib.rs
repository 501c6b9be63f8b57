//! JPEG-domain adaptive steganography lab.
//!
//! The pipeline works on the luminance plane of 8-bit grayscale images:
//!
//! * [`jpeg`] compresses to rounded and non-rounded quantized DCT planes.
//! * [`coding`] converts between costs and Gibbs change probabilities and
//!   solves for the multiplier that hits a payload in bits per non-zero AC.
//! * [`costs`] smooths costs and biases them with true or estimated rounding
//!   errors (side-information).
//! * [`simulate`] turns probabilities and noise into ±1 modifications.
//! * [`sideinfo`] estimates the precover when only the JPEG is available.
//! * [`objectives`] evaluates adversarial and capacity losses for a
//!   generator trained elsewhere.
//! * [`steganalysis`] is a Gabor-residual linear detector used to compare
//!   embedding variants.
//!
//! Everything is deterministic given its inputs and seeds.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coding;
pub mod commands;
pub mod corpus;
pub mod costs;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod io;
pub mod jpeg;
pub mod metrics;
pub mod objectives;
pub mod sideinfo;
pub mod simulate;
pub mod steganalysis;

pub use error::{Error, Result};
pub use grid::Grid;
