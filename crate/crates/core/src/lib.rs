//! Feature coding for machines.
//!
//! Compresses a time series of multi-scale neural feature tensors into a
//! self-describing container and restores them:
//!
//! ```text
//! FeatureSequence -> temporal downsample -> reduce -> channel adjust
//!   -> pack -> normalize/quantize -> inner codec -> container
//! ```
//!
//! and the mirror image on decode. [`pipeline::encode`] and
//! [`pipeline::decode`] are the entry points; every stage is also usable on
//! its own. [`eval`] has BD-rate, fidelity and complexity helpers.

pub mod bitstream;
pub mod channel;
pub mod codec;
pub mod config;
pub mod conversion;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod stats;
pub mod temporal;
pub mod tensor;
pub mod transform;
mod wire;

pub use error::{Error, ErrorKind, Result};
pub use pipeline::{decode, encode, EncoderConfig};
pub use tensor::{FeatureLayer, FeatureSequence, FeatureSet, LayerShape};
