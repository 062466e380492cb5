//! Monte Carlo dataset generation.
//!
//! Examples are laid out class-major. Training pools hold `n_sample`
//! sequences per class with the last tenth of each class reserved for
//! validation; test sets hold `n_per_class` sequences for every
//! (class, SNR) pair, SNR-major within a class.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{add_awgn, mix, preprocess, reconstruct, IqArray, PowerRatio};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::labelset::{ClassDesc, LabelSet};
use crate::rng::{Domain, RandomSource};
use crate::scalar::Real;
use crate::sequence::SymbolSequence;

pub const DEFAULT_SEQ_LEN: usize = 100;
pub const DEFAULT_N_PER_CLASS: usize = 1000;
pub const GENERATOR_VERSION: &str = concat!("mixamc/", env!("CARGO_PKG_VERSION"));

/// The standard −10:2:20 dB test grid.
pub fn default_snr_grid() -> Vec<f64> {
    (0..16).map(|i| -10.0 + 2.0 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum SnrPolicy {
    /// Per-sequence SNR uniform on `[lo, hi]` dB.
    Uniform { lo: f64, hi: f64 },
    /// Fixed test grid in dB.
    Grid { points: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Split {
    TrainValidation { train_per_class: usize, validation_per_class: usize },
    Test { per_class_per_snr: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub generator_version: String,
    pub snr_policy: SnrPolicy,
}

/// Everything stored in the file's JSON header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub labelset: LabelSet,
    pub seq_len: usize,
    pub n_examples: usize,
    pub class_counts: Vec<usize>,
    pub split: Split,
    pub provenance: Provenance,
}

/// One preprocessed example as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub class: u16,
    pub snr_db: f32,
    /// Strong:weak ratio used, 0 for single-signal classes.
    pub ratio: f32,
    /// `2·L` values, in-phase row then quadrature row.
    pub iq: Vec<f32>,
}

impl Example {
    pub fn iq_array(&self) -> IqArray<f32> {
        IqArray::from_flat(self.iq.len() / 2, self.iq.clone()).expect("even length")
    }

    pub fn sequence<T: Real>(&self) -> SymbolSequence<T> {
        reconstruct(&self.iq_array()).cast()
    }

    /// The stored power ratio, if the example is a mixture.
    pub fn power_ratio(&self) -> Option<f64> {
        (self.ratio > 0.0).then_some(f64::from(self.ratio))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: Header,
    pub examples: Vec<Example>,
}

/// A freshly synthesized sequence with its noise-free component kept for
/// calibration checks.
#[derive(Debug, Clone)]
pub struct Synthesized<T> {
    pub class: usize,
    pub snr_db: f64,
    pub ratio: Option<PowerRatio>,
    pub clean: SymbolSequence<T>,
    pub noisy: SymbolSequence<T>,
}

impl<T: Real> Synthesized<T> {
    fn into_example(self) -> Example {
        Example {
            class: self.class as u16,
            snr_db: self.snr_db as f32,
            ratio: self.ratio.map_or(0.0, |r| r.to_f64() as f32),
            iq: preprocess(&self.noisy.cast::<f32>()).to_flat(),
        }
    }
}

/// Draws symbols for one class (strong then weak), mixes and adds noise.
pub fn synthesize<T: Real, R: Rng + ?Sized>(
    labelset: &LabelSet,
    class: usize,
    seq_len: usize,
    snr_db: f64,
    rng: &mut R,
) -> Synthesized<T> {
    let desc = labelset.classes()[class];
    let draw = |scheme, rng: &mut R| {
        let k = Constellation::<T>::new(scheme);
        let idx: Vec<usize> = (0..seq_len).map(|_| rng.random_range(0..k.order())).collect();
        k.modulate(&idx).expect("indices in range")
    };
    let (clean, ratio) = match desc {
        ClassDesc::Single { scheme } => (draw(scheme, rng), None),
        ClassDesc::Mixed { ratio: policy, .. } => {
            let ratio = policy.draw(rng);
            let spec = desc.mix_spec(ratio).expect("mixed class");
            let a = draw(spec.strong(), rng);
            let b = draw(spec.weak(), rng);
            (mix(&a, &b, &spec).expect("equal lengths"), Some(ratio))
        }
    };
    let noisy = add_awgn(&clean, snr_db, rng);
    Synthesized { class, snr_db, ratio, clean, noisy }
}

/// Training-pool example `index` (global, class-major) as a pure function
/// of the seed.
pub fn training_example<T: Real>(
    labelset: &LabelSet,
    n_sample: usize,
    seq_len: usize,
    snr: (f64, f64),
    master_seed: u64,
    index: usize,
) -> Synthesized<T> {
    let mut rng = RandomSource::child(master_seed, Domain::Training, index as u64);
    let (lo, hi) = snr;
    let snr_db = if lo == hi { lo } else { rng.random_range(lo..=hi) };
    synthesize(labelset, index / n_sample, seq_len, snr_db, &mut rng)
}

/// Test example `index` (global: class, then SNR point, then repetition).
pub fn test_example<T: Real>(
    labelset: &LabelSet,
    snr_grid: &[f64],
    n_per_class: usize,
    seq_len: usize,
    master_seed: u64,
    index: usize,
) -> Synthesized<T> {
    let mut rng = RandomSource::child(master_seed, Domain::Test, index as u64);
    let per_class = snr_grid.len() * n_per_class;
    let class = index / per_class;
    let snr_db = snr_grid[(index % per_class) / n_per_class];
    synthesize(labelset, class, seq_len, snr_db, &mut rng)
}

/// Options shared by both generators.
#[derive(Debug, Clone, Copy)]
pub struct GenOptions {
    pub seq_len: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self { seq_len: DEFAULT_SEQ_LEN }
    }
}

pub fn gen_training(
    labelset: &LabelSet,
    n_sample: usize,
    snr_lo: f64,
    snr_hi: f64,
    master_seed: u64,
    opts: GenOptions,
) -> Result<Dataset> {
    if n_sample < 10 {
        return Err(Error::Config(format!("n_sample = {n_sample} leaves an empty validation split (need >= 10)")));
    }
    if !(snr_lo.is_finite() && snr_hi.is_finite()) || snr_lo > snr_hi {
        return Err(Error::Config(format!("invalid SNR interval [{snr_lo}, {snr_hi}]")));
    }
    check_len(opts.seq_len)?;
    let total = n_sample * labelset.len();
    let examples: Vec<Example> = (0..total)
        .into_par_iter()
        .map(|i| {
            training_example::<f64>(labelset, n_sample, opts.seq_len, (snr_lo, snr_hi), master_seed, i)
                .into_example()
        })
        .collect();
    let validation = n_sample / 10;
    Ok(Dataset {
        header: Header {
            labelset: labelset.clone(),
            seq_len: opts.seq_len,
            n_examples: total,
            class_counts: vec![n_sample; labelset.len()],
            split: Split::TrainValidation { train_per_class: n_sample - validation, validation_per_class: validation },
            provenance: Provenance {
                master_seed,
                generator_version: GENERATOR_VERSION.into(),
                snr_policy: SnrPolicy::Uniform { lo: snr_lo, hi: snr_hi },
            },
        },
        examples,
    })
}

pub fn gen_test(
    labelset: &LabelSet,
    snr_grid: &[f64],
    n_per_class: usize,
    master_seed: u64,
    opts: GenOptions,
) -> Result<Dataset> {
    check_grid(snr_grid)?;
    if n_per_class == 0 {
        return Err(Error::Config("n_per_class must be positive".into()));
    }
    check_len(opts.seq_len)?;
    let per_class = snr_grid.len() * n_per_class;
    let total = per_class * labelset.len();
    let examples: Vec<Example> = (0..total)
        .into_par_iter()
        .map(|i| test_example::<f64>(labelset, snr_grid, n_per_class, opts.seq_len, master_seed, i).into_example())
        .collect();
    Ok(Dataset {
        header: Header {
            labelset: labelset.clone(),
            seq_len: opts.seq_len,
            n_examples: total,
            class_counts: vec![per_class; labelset.len()],
            split: Split::Test { per_class_per_snr: n_per_class },
            provenance: Provenance {
                master_seed,
                generator_version: GENERATOR_VERSION.into(),
                snr_policy: SnrPolicy::Grid { points: snr_grid.to_vec() },
            },
        },
        examples,
    })
}

pub(crate) fn check_grid(snr_grid: &[f64]) -> Result<()> {
    if snr_grid.is_empty() {
        return Err(Error::Config("SNR grid is empty".into()));
    }
    if let Some(bad) = snr_grid.iter().find(|s| !s.is_finite()) {
        return Err(Error::Config(format!("non-finite SNR grid point {bad}")));
    }
    Ok(())
}

fn check_len(seq_len: usize) -> Result<()> {
    if seq_len == 0 {
        return Err(Error::Config("sequence length must be positive".into()));
    }
    Ok(())
}

impl Dataset {
    pub fn labelset(&self) -> &LabelSet {
        &self.header.labelset
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Global indices of the training part; the whole set for test files.
    pub fn train_indices(&self) -> Vec<usize> {
        self.split_indices(false)
    }

    /// Global indices of the validation part; empty for test files.
    pub fn validation_indices(&self) -> Vec<usize> {
        self.split_indices(true)
    }

    fn split_indices(&self, validation: bool) -> Vec<usize> {
        match self.header.split {
            Split::TrainValidation { train_per_class, validation_per_class } => {
                let per_class = train_per_class + validation_per_class;
                let range = if validation { train_per_class..per_class } else { 0..train_per_class };
                (0..self.header.labelset.len())
                    .flat_map(|c| range.clone().map(move |i| c * per_class + i))
                    .collect()
            }
            Split::Test { .. } if validation => Vec::new(),
            Split::Test { .. } => (0..self.examples.len()).collect(),
        }
    }

    /// Checks header/payload consistency.
    pub fn validate(&self) -> Result<()> {
        let h = &self.header;
        h.labelset.validate()?;
        if h.n_examples != self.examples.len() {
            return Err(Error::Config(format!("header counts {} examples, payload has {}", h.n_examples, self.examples.len())));
        }
        if h.class_counts.len() != h.labelset.len() || h.class_counts.iter().sum::<usize>() != h.n_examples {
            return Err(Error::Config("class counts do not match label set".into()));
        }
        let classes = h.labelset.len();
        for e in &self.examples {
            if usize::from(e.class) >= classes {
                return Err(Error::LabelOutOfRange { label: e.class.into(), classes });
            }
            if e.iq.len() != 2 * h.seq_len {
                return Err(Error::Shape { expected: 2 * h.seq_len, actual: e.iq.len() });
            }
        }
        Ok(())
    }
}
