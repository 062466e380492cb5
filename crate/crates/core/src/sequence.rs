use std::ops::Index;

use num_complex::Complex;

use crate::scalar::Real;

/// A complex baseband symbol-rate sequence, one sample per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSequence<T> {
    samples: Vec<Complex<T>>,
}

impl<T: Real> SymbolSequence<T> {
    pub fn new(samples: Vec<Complex<T>>) -> Self {
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.samples
    }

    /// Sum of |r(n)|² over the sequence.
    pub fn energy(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, s| acc + s.norm_sqr())
    }

    /// Mean of |r(n)|², zero for an empty sequence.
    pub fn mean_power(&self) -> T {
        if self.samples.is_empty() {
            return T::zero();
        }
        self.energy() / T::from_usize(self.samples.len()).unwrap()
    }

    /// Multiplies every sample by a real gain.
    pub fn scaled(&self, gain: T) -> Self {
        Self::new(self.samples.iter().map(|s| s * gain).collect())
    }

    /// Converts the sample type, e.g. `f64` to `f32`.
    pub fn cast<U: Real>(&self) -> SymbolSequence<U> {
        SymbolSequence::new(
            self.samples
                .iter()
                .map(|s| Complex::new(U::from(s.re).unwrap(), U::from(s.im).unwrap()))
                .collect(),
        )
    }
}

impl<T> Index<usize> for SymbolSequence<T> {
    type Output = Complex<T>;

    fn index(&self, i: usize) -> &Complex<T> {
        &self.samples[i]
    }
}

impl<T: Real> FromIterator<Complex<T>> for SymbolSequence<T> {
    fn from_iter<I: IntoIterator<Item = Complex<T>>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}
