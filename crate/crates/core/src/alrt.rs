//! Average likelihood ratio test under known noise variance.
//!
//! Each hypothesis is a finite point set (a constellation, or every
//! superposition `√E_s p + √E_w q` of a mixed pair). With unit-probability
//! symbols the per-symbol likelihood is the average of complex Gaussian
//! densities centred on those points, and the sequence likelihood is their
//! product. Everything is evaluated in the log domain with a per-symbol
//! max-shifted log-sum-exp.

use std::collections::BTreeMap;

use num_complex::Complex;
use rayon::prelude::*;

use crate::channel::{noise_variance, MixSpec, PowerRatio};
use crate::constellation::{Constellation, Scheme};
use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::eval::{Evaluation, Prediction};
use crate::labelset::{ClassDesc, LabelSet, LabelSetKind, RatioPolicy};
use crate::scalar::Real;
use crate::sequence::SymbolSequence;

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis<T> {
    class: usize,
    points: Vec<Complex<T>>,
}

impl<T: Real> Hypothesis<T> {
    pub fn from_points(class: usize, points: Vec<Complex<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("hypothesis has no points".into()));
        }
        Ok(Self { class, points })
    }

    pub fn single(class: usize, scheme: Scheme) -> Self {
        Self { class, points: Constellation::new(scheme).points().to_vec() }
    }

    /// All superpositions of the mixed pair, strong-major.
    pub fn composite(class: usize, spec: &MixSpec) -> Self {
        Self { class, points: composite_points(spec) }
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn cardinality(&self) -> usize {
        self.points.len()
    }

    pub fn mean_power(&self) -> T {
        let sum = self.points.iter().fold(T::zero(), |acc, p| acc + p.norm_sqr());
        sum / T::from_usize(self.points.len()).unwrap()
    }
}

/// `√E_s p + √E_w q` for every strong point `p` and weak point `q`, with
/// `p` varying slowest.
pub fn composite_points<T: Real>(spec: &MixSpec) -> Vec<Complex<T>> {
    let (gs, gw) = spec.amplitudes::<T>();
    let strong = Constellation::<T>::new(spec.strong());
    let weak = Constellation::<T>::new(spec.weak());
    let mut out = Vec::with_capacity(strong.order() * weak.order());
    for p in strong.points() {
        for q in weak.points() {
            out.push(p * gs + q * gw);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Priors<T> {
    Uniform,
    /// One weight per hypothesis, in hypothesis-list order.
    Weights(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlrtConfig<T> {
    sigma2: T,
    priors: Priors<T>,
}

impl<T: Real> AlrtConfig<T> {
    pub fn new(sigma2: T) -> Result<Self> {
        if !(sigma2 > T::zero() && sigma2.is_finite()) {
            return Err(Error::Config(format!("noise variance must be positive and finite, got {sigma2}")));
        }
        Ok(Self { sigma2, priors: Priors::Uniform })
    }

    /// Noise variance for a unit-power signal at `snr_db`.
    pub fn from_snr_db(snr_db: T) -> Result<Self> {
        Self::new(noise_variance(snr_db))
    }

    pub fn with_priors(mut self, weights: Vec<T>) -> Result<Self> {
        if weights.iter().any(|w| w.is_sign_negative() || !w.is_finite()) {
            return Err(Error::Config("priors must be finite and non-negative".into()));
        }
        let sum = weights.iter().fold(T::zero(), |a, &w| a + w);
        if (sum - T::one()).abs() > T::lit(1e-9).max(T::epsilon() * T::lit(8.0)) {
            return Err(Error::Config(format!("priors sum to {sum}, expected 1")));
        }
        self.priors = Priors::Weights(weights);
        Ok(self)
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    pub fn priors(&self) -> &Priors<T> {
        &self.priors
    }

    fn log_prior(&self, position: usize, count: usize) -> Result<T> {
        match &self.priors {
            Priors::Uniform => Ok(-T::from_usize(count).unwrap().ln()),
            Priors::Weights(w) if w.len() == count => Ok(w[position].ln()),
            Priors::Weights(w) => Err(Error::Shape { expected: count, actual: w.len() }),
        }
    }
}

/// `Σ_n ln( (1/M) Σ_ℓ exp(-|r(n) - s_ℓ|²/σ²) / (πσ²) )`.
pub fn log_likelihood<T: Real>(r: &SymbolSequence<T>, h: &Hypothesis<T>, cfg: &AlrtConfig<T>) -> Result<T> {
    if r.is_empty() {
        return Err(Error::Domain("log-likelihood of an empty sequence".into()));
    }
    let inv = cfg.sigma2.recip();
    let mut scratch = vec![T::zero(); h.points.len()];
    let mut acc = T::zero();
    for x in r.samples() {
        let mut max = T::neg_infinity();
        for (d, s) in scratch.iter_mut().zip(&h.points) {
            *d = -(x - s).norm_sqr() * inv;
            if *d > max {
                max = *d;
            }
        }
        let sum = scratch.iter().fold(T::zero(), |a, &d| a + (d - max).exp());
        acc = acc + max + sum.ln();
    }
    let len = T::from_usize(r.len()).unwrap();
    let per_symbol_norm = T::from_usize(h.points.len()).unwrap().ln() + (T::PI() * cfg.sigma2).ln();
    Ok(acc - len * per_symbol_norm)
}

/// Maximum a-posteriori decision `argmax_i ln κ_i + ln f(r|H_i)`; ties go
/// to the lowest class id.
pub fn classify<T: Real>(r: &SymbolSequence<T>, hypotheses: &[Hypothesis<T>], cfg: &AlrtConfig<T>) -> Result<usize> {
    Ok(scores(r, hypotheses, cfg)?.0)
}

/// The decision plus the per-hypothesis log posterior scores (unnormalized).
pub fn scores<T: Real>(r: &SymbolSequence<T>, hypotheses: &[Hypothesis<T>], cfg: &AlrtConfig<T>) -> Result<(usize, Vec<T>)> {
    if hypotheses.len() < 2 {
        return Err(Error::Config(format!("need at least two hypotheses, got {}", hypotheses.len())));
    }
    let mut best: Option<(T, usize)> = None;
    let mut all = Vec::with_capacity(hypotheses.len());
    for (i, h) in hypotheses.iter().enumerate() {
        let lp = cfg.log_prior(i, hypotheses.len())?;
        // A zero prior rules the hypothesis out without evaluating it.
        let score = if lp == T::neg_infinity() { lp } else { lp + log_likelihood(r, h, cfg)? };
        all.push(score);
        best = match best {
            None => Some((score, h.class)),
            Some((b, id)) if score > b || (score == b && h.class < id) => Some((score, h.class)),
            keep => keep,
        };
    }
    Ok((best.expect("non-empty").1, all))
}

/// Hypothesis tables for every class of a label set. Random-ratio sets are
/// evaluated conditioned on each example's true ratio, so a table is kept
/// per admissible ratio.
#[derive(Debug, Clone)]
pub struct AlrtClassifier<T> {
    labelset: LabelSet,
    fixed: Option<Vec<Hypothesis<T>>>,
    by_ratio: BTreeMap<PowerRatio, Vec<Hypothesis<T>>>,
}

impl<T: Real> AlrtClassifier<T> {
    pub fn new(labelset: &LabelSet) -> Self {
        let table = |ratio: Option<PowerRatio>| -> Vec<Hypothesis<T>> {
            labelset
                .classes()
                .iter()
                .enumerate()
                .map(|(i, c)| match (c, ratio) {
                    (ClassDesc::Single { scheme }, _) => Hypothesis::single(i, *scheme),
                    (ClassDesc::Mixed { ratio: RatioPolicy::Fixed { ratio }, .. }, None) => {
                        Hypothesis::composite(i, &c.mix_spec(*ratio).unwrap())
                    }
                    (_, Some(r)) => Hypothesis::composite(i, &c.mix_spec(r).unwrap()),
                    (ClassDesc::Mixed { .. }, None) => unreachable!("random ratio needs a draw"),
                })
                .collect()
        };
        match labelset.kind() {
            LabelSetKind::Omega6Random => {
                let (lo, hi) = match labelset.classes()[0] {
                    ClassDesc::Mixed { ratio: RatioPolicy::UniformInteger { lo, hi }, .. } => (lo, hi),
                    _ => unreachable!(),
                };
                let by_ratio = (lo..=hi)
                    .map(|k| {
                        let r = PowerRatio::integer(k).unwrap();
                        (r, table(Some(r)))
                    })
                    .collect();
                Self { labelset: labelset.clone(), fixed: None, by_ratio }
            }
            _ => Self { labelset: labelset.clone(), fixed: Some(table(None)), by_ratio: BTreeMap::new() },
        }
    }

    pub fn labelset(&self) -> &LabelSet {
        &self.labelset
    }

    /// Hypotheses to test; `ratio` is the conditioning ratio for
    /// random-ratio sets and ignored otherwise.
    pub fn hypotheses(&self, ratio: Option<f64>) -> Result<&[Hypothesis<T>]> {
        if let Some(h) = &self.fixed {
            return Ok(h);
        }
        let r = ratio.ok_or_else(|| Error::Config("random-ratio label set needs the per-example ratio".into()))?;
        let key = PowerRatio::integer(r.round() as u32)
            .ok()
            .filter(|_| (r - r.round()).abs() < 1e-6)
            .ok_or_else(|| Error::Config(format!("ratio {r} is not an integer")))?;
        self.by_ratio
            .get(&key)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Config(format!("ratio {r} outside the label set's range")))
    }

    pub fn classify(&self, r: &SymbolSequence<T>, sigma2: T, ratio: Option<f64>) -> Result<usize> {
        classify(r, self.hypotheses(ratio)?, &AlrtConfig::new(sigma2)?)
    }
}

/// How the noise variance is chosen for stored examples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaPolicy {
    /// From each example's stored nominal SNR.
    NominalSnr,
    /// A single known variance for every example.
    Fixed(f64),
}

/// Classifies every example of a stored dataset.
pub fn classify_dataset(dataset: &Dataset, policy: SigmaPolicy) -> Result<Vec<Prediction>> {
    let clf = AlrtClassifier::<f64>::new(dataset.labelset());
    dataset
        .examples
        .par_iter()
        .enumerate()
        .map(|(index, e)| {
            let snr = f64::from(e.snr_db);
            let sigma2 = match policy {
                SigmaPolicy::Fixed(s) => s,
                SigmaPolicy::NominalSnr if snr.is_finite() => noise_variance(snr),
                SigmaPolicy::NominalSnr => {
                    return Err(Error::Config(format!("example {index} has no SNR; supply a noise variance")))
                }
            };
            let predicted = clf.classify(&e.sequence(), sigma2, e.power_ratio())?;
            Ok(Prediction { index, truth: usize::from(e.class), predicted, snr_db: snr })
        })
        .collect()
}

/// Accuracy bound on freshly generated test data, using the nominal SNR of
/// each bucket as the known noise variance. The sequences are exactly those
/// of [`dataset::gen_test`] with the same arguments, before `f32` storage.
pub fn evaluate_bound(
    labelset: &LabelSet,
    snr_grid: &[f64],
    n_per_class: usize,
    master_seed: u64,
    seq_len: usize,
) -> Result<Evaluation> {
    dataset::check_grid(snr_grid)?;
    if n_per_class == 0 || seq_len == 0 {
        return Err(Error::Config("n_per_class and sequence length must be positive".into()));
    }
    let clf = AlrtClassifier::<f64>::new(labelset);
    let total = labelset.len() * snr_grid.len() * n_per_class;
    let predictions = (0..total)
        .into_par_iter()
        .map(|index| {
            let s = dataset::test_example::<f64>(labelset, snr_grid, n_per_class, seq_len, master_seed, index);
            let predicted = clf.classify(&s.noisy, noise_variance(s.snr_db), s.ratio.map(PowerRatio::to_f64))?;
            Ok(Prediction { index, truth: s.class, predicted, snr_db: s.snr_db })
        })
        .collect::<Result<Vec<_>>>()?;
    Evaluation::from_predictions(&predictions, &labelset.class_names())
}
