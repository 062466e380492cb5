//! Synthesis, likelihood classification and evaluation of single and
//! co-channel mixed digitally modulated symbol sequences.
//!
//! Signal-level code is generic over the sample type (`f32` or `f64`, see
//! [`Real`]); the aliases below fix the common double-precision choice.

pub mod alrt;
pub mod channel;
pub mod cli;
pub mod constellation;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod format;
pub mod labelset;
pub mod rng;
pub mod scalar;
pub mod sequence;

pub use channel::{ChannelParams, ChannelResponse, IqArray, MixSpec, PowerRatio};
pub use constellation::{Constellation, Scheme};
pub use dataset::{Dataset, Example};
pub use error::{Error, FormatError, Result};
pub use eval::{AccuracyCurve, ConfusionMatrix};
pub use labelset::LabelSet;
pub use rng::RandomSource;
pub use scalar::Real;
pub use sequence::SymbolSequence;

pub type Constellation64 = Constellation<f64>;
pub type Constellation32 = Constellation<f32>;
pub type SymbolSequence64 = SymbolSequence<f64>;
pub type SymbolSequence32 = SymbolSequence<f32>;
pub type ChannelParams64 = ChannelParams<f64>;
pub type IqArray32 = IqArray<f32>;
pub type Hypothesis64 = alrt::Hypothesis<f64>;
pub type AlrtConfig64 = alrt::AlrtConfig<f64>;
pub type AlrtClassifier64 = alrt::AlrtClassifier<f64>;
