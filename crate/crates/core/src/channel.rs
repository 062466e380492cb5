//! Symbol-rate channel model, co-channel mixing, AWGN and the real-valued
//! classifier input layout.

use std::fmt;
use std::str::FromStr;

use ndarray::Array3;
use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::constellation::Scheme;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sequence::SymbolSequence;

/// Complex channel response, either one coefficient for the whole sequence
/// or one per symbol.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelResponse<T> {
    Scalar(Complex<T>),
    PerSymbol(Vec<Complex<T>>),
}

/// Parameters of `r(n) = exp(j(2π f0T n + θ(n))) s(n) h(n)`.
///
/// The default is the identity channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams<T> {
    /// Normalized frequency offset in cycles per symbol.
    pub freq_offset: T,
    /// Per-symbol phase jitter in radians; empty means zero.
    pub phase_jitter: Vec<T>,
    pub response: ChannelResponse<T>,
    /// Timing offset in symbols. Without pulse shaping a fractional offset
    /// has no symbol-rate representation, so only zero is accepted.
    pub timing_offset: T,
}

impl<T: Real> Default for ChannelParams<T> {
    fn default() -> Self {
        Self {
            freq_offset: T::zero(),
            phase_jitter: Vec::new(),
            response: ChannelResponse::Scalar(Complex::new(T::one(), T::zero())),
            timing_offset: T::zero(),
        }
    }
}

impl<T: Real> ChannelParams<T> {
    pub fn is_identity(&self) -> bool {
        self.freq_offset.is_zero()
            && self.phase_jitter.iter().all(|t| t.is_zero())
            && self.timing_offset.is_zero()
            && match &self.response {
                ChannelResponse::Scalar(h) => *h == Complex::new(T::one(), T::zero()),
                ChannelResponse::PerSymbol(hs) => hs.iter().all(|h| *h == Complex::new(T::one(), T::zero())),
            }
    }
}

/// Applies frequency offset, phase jitter and channel response.
pub fn apply_channel<T: Real>(seq: &SymbolSequence<T>, params: &ChannelParams<T>) -> Result<SymbolSequence<T>> {
    let len = seq.len();
    if !params.timing_offset.is_zero() {
        return Err(Error::Config("non-zero timing offset is not representable at symbol rate".into()));
    }
    if !params.phase_jitter.is_empty() && params.phase_jitter.len() < len {
        return Err(Error::Shape { expected: len, actual: params.phase_jitter.len() });
    }
    if let ChannelResponse::PerSymbol(hs) = &params.response {
        if hs.len() < len {
            return Err(Error::Shape { expected: len, actual: hs.len() });
        }
    }
    if params.is_identity() {
        return Ok(seq.clone());
    }

    let two_pi = T::TAU();
    let mut out = Vec::with_capacity(len);
    for (n, s) in seq.samples().iter().enumerate() {
        let h = match &params.response {
            ChannelResponse::Scalar(h) => *h,
            ChannelResponse::PerSymbol(hs) => hs[n],
        };
        if h.is_zero() {
            return Err(Error::DegenerateChannel { position: n });
        }
        let jitter = params.phase_jitter.get(n).copied().unwrap_or_else(T::zero);
        // Reduce the frequency term mod 1 cycle before scaling by 2π.
        let cycles = (params.freq_offset * T::from_usize(n).unwrap()).fract();
        let rotation = Complex::from_polar(T::one(), two_pi * cycles + jitter);
        out.push(rotation * s * h);
    }
    Ok(SymbolSequence::new(out))
}

/// Strong-to-weak power ratio `k:1`, kept as an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PowerRatio(Ratio<u32>);

impl PowerRatio {
    pub const EQUAL: PowerRatio = PowerRatio(Ratio::new_raw(1, 1));

    pub fn new(numer: u32, denom: u32) -> Result<Self> {
        if numer == 0 || denom == 0 {
            return Err(Error::Config(format!("power ratio {numer}/{denom} must be positive")));
        }
        Ok(Self(Ratio::new(numer, denom)))
    }

    pub fn integer(k: u32) -> Result<Self> {
        Self::new(k, 1)
    }

    pub fn as_ratio(self) -> Ratio<u32> {
        self.0
    }

    pub fn is_equal_power(self) -> bool {
        self.0 == Ratio::from_integer(1)
    }

    /// Exact `(E_strong, E_weak)` with `E_strong + E_weak = 1` and
    /// `E_strong / E_weak = k`.
    pub fn powers_exact(self) -> (Ratio<u64>, Ratio<u64>) {
        let k = Ratio::new(u64::from(*self.0.numer()), u64::from(*self.0.denom()));
        let one = Ratio::from_integer(1u64);
        let weak = one / (k + one);
        (k * weak, weak)
    }

    pub fn powers<T: Real>(self) -> (T, T) {
        let (s, w) = self.powers_exact();
        (ratio_to_real(s), ratio_to_real(w))
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap()
    }

    /// Filename-safe form: `2`, `5_2`.
    pub fn slug(self) -> String {
        if self.0.is_integer() {
            self.0.numer().to_string()
        } else {
            format!("{}_{}", self.0.numer(), self.0.denom())
        }
    }
}

fn ratio_to_real<T: Real>(r: Ratio<u64>) -> T {
    T::from_u64(*r.numer()).unwrap() / T::from_u64(*r.denom()).unwrap()
}

impl fmt::Display for PowerRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for PowerRatio {
    type Err = Error;

    /// Accepts `k`, `p/q` and `k:1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid power ratio '{s}'"));
        let s = s.trim();
        let (num, den) = if let Some((a, b)) = s.split_once('/') {
            (a, b)
        } else if let Some((a, b)) = s.split_once(':') {
            (a, b)
        } else {
            (s, "1")
        };
        let num: u32 = num.trim().parse().map_err(|_| bad())?;
        let den: u32 = den.trim().parse().map_err(|_| bad())?;
        PowerRatio::new(num, den)
    }
}

impl Serialize for PowerRatio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PowerRatio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An ordered (strong, weak) pair of schemes at a fixed power ratio, with
/// the total received signal power normalized to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MixSpec {
    strong: Scheme,
    weak: Scheme,
    ratio: PowerRatio,
}

impl MixSpec {
    pub fn new(strong: Scheme, weak: Scheme, ratio: PowerRatio) -> Result<Self> {
        if strong == weak {
            return Err(Error::Config(format!("mixed pair {strong}+{weak} repeats a scheme")));
        }
        Ok(Self { strong, weak, ratio })
    }

    pub fn strong(&self) -> Scheme {
        self.strong
    }

    pub fn weak(&self) -> Scheme {
        self.weak
    }

    pub fn ratio(&self) -> PowerRatio {
        self.ratio
    }

    /// `(E_strong, E_weak)`.
    pub fn powers<T: Real>(&self) -> (T, T) {
        self.ratio.powers()
    }

    /// `(√E_strong, √E_weak)`.
    pub fn amplitudes<T: Real>(&self) -> (T, T) {
        let (s, w) = self.powers::<T>();
        (s.sqrt(), w.sqrt())
    }
}

/// Superimposes two co-channel sequences: `√E_s a(n) + √E_w b(n)`.
pub fn mix<T: Real>(a: &SymbolSequence<T>, b: &SymbolSequence<T>, spec: &MixSpec) -> Result<SymbolSequence<T>> {
    if a.len() != b.len() {
        return Err(Error::Shape { expected: a.len(), actual: b.len() });
    }
    let (ga, gb) = spec.amplitudes::<T>();
    Ok(a.samples().iter().zip(b.samples()).map(|(x, y)| x * ga + y * gb).collect())
}

/// Complex noise variance for a unit-power signal at `snr_db`.
pub fn noise_variance<T: Real>(snr_db: T) -> T {
    T::lit(10.0).powf(-snr_db / T::lit(10.0))
}

/// Draws one circularly symmetric complex Gaussian sample with total
/// variance `variance`.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex<T> {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(T::lit(re * scale), T::lit(im * scale))
}

/// Adds i.i.d. CN(0, σ²) noise with σ² = 10^(-snr_db/10), i.e. SNR measured
/// against a unit total signal power.
pub fn add_awgn<T: Real, R: Rng + ?Sized>(seq: &SymbolSequence<T>, snr_db: f64, rng: &mut R) -> SymbolSequence<T> {
    let variance = noise_variance(snr_db);
    seq.samples().iter().map(|s| s + complex_gaussian::<T, R>(rng, variance)).collect()
}

/// Real-valued classifier input of shape `2 × L × 1`: row 0 holds the
/// in-phase parts, row 1 the quadrature parts.
#[derive(Debug, Clone, PartialEq)]
pub struct IqArray<T>(Array3<T>);

impl<T: Real> IqArray<T> {
    /// Builds from a flat `[re_0..re_{L-1}, im_0..im_{L-1}]` buffer.
    pub fn from_flat(len: usize, flat: Vec<T>) -> Result<Self> {
        if flat.len() != 2 * len {
            return Err(Error::Shape { expected: 2 * len, actual: flat.len() });
        }
        Ok(Self(Array3::from_shape_vec((2, len, 1), flat).expect("checked shape")))
    }

    pub fn shape(&self) -> [usize; 3] {
        let s = self.0.shape();
        [s[0], s[1], s[2]]
    }

    pub fn seq_len(&self) -> usize {
        self.0.shape()[1]
    }

    pub fn view(&self) -> &Array3<T> {
        &self.0
    }

    /// Flat standard-layout values (real row then imaginary row).
    pub fn to_flat(&self) -> Vec<T> {
        self.0.iter().copied().collect()
    }

    pub fn norm_sqr(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, &x| acc + x * x)
    }
}

pub fn preprocess<T: Real>(seq: &SymbolSequence<T>) -> IqArray<T> {
    let len = seq.len();
    let mut arr = Array3::zeros((2, len, 1));
    for (n, s) in seq.samples().iter().enumerate() {
        arr[[0, n, 0]] = s.re;
        arr[[1, n, 0]] = s.im;
    }
    IqArray(arr)
}

/// Inverse of [`preprocess`].
pub fn reconstruct<T: Real>(arr: &IqArray<T>) -> SymbolSequence<T> {
    let a = &arr.0;
    (0..arr.seq_len()).map(|n| Complex::new(a[[0, n, 0]], a[[1, n, 0]])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::modulate;
    use crate::rng::RandomSource;
    use proptest::prelude::*;

    fn ones(len: usize) -> SymbolSequence<f64> {
        SymbolSequence::new(vec![Complex::new(1.0, 0.0); len])
    }

    #[test]
    fn identity_channel_is_noop() {
        let seq = modulate::<f64>(Scheme::Qam16, &[0, 5, 9, 15]).unwrap();
        assert_eq!(apply_channel(&seq, &ChannelParams::default()).unwrap(), seq);
    }

    #[test]
    fn quarter_cycle_offset() {
        let params = ChannelParams { freq_offset: 0.25, ..Default::default() };
        let out = apply_channel(&ones(4), &params).unwrap();
        let expected: Vec<Complex<f64>> =
            (0..4).map(|n| Complex::from_polar(1.0, std::f64::consts::FRAC_PI_2 * n as f64)).collect();
        for (o, e) in out.samples().iter().zip(&expected) {
            assert!((o - e).norm() < 1e-15);
        }
    }

    #[test]
    fn scalar_gain() {
        let params = ChannelParams { response: ChannelResponse::Scalar(Complex::new(2.0, 0.0)), ..Default::default() };
        let out = apply_channel(&ones(3), &params).unwrap();
        assert!(out.samples().iter().all(|s| *s == Complex::new(2.0, 0.0)));
    }

    #[test]
    fn zero_response_is_degenerate() {
        let hs = vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)];
        let params = ChannelParams { response: ChannelResponse::PerSymbol(hs), ..Default::default() };
        assert!(matches!(apply_channel(&ones(3), &params), Err(Error::DegenerateChannel { position: 1 })));
    }

    #[test]
    fn short_response_is_shape_error() {
        let params = ChannelParams {
            response: ChannelResponse::PerSymbol(vec![Complex::new(1.0, 0.0)]),
            ..Default::default()
        };
        assert!(matches!(apply_channel(&ones(3), &params), Err(Error::Shape { .. })));
    }

    #[test]
    fn phase_jitter_rotates() {
        let params = ChannelParams { phase_jitter: vec![0.0, std::f64::consts::PI], ..Default::default() };
        let out = apply_channel(&ones(2), &params).unwrap();
        assert!((out[1] - Complex::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn power_split_exact() {
        use num_rational::Ratio;
        let cases = [(1, (1, 2), (1, 2)), (2, (2, 3), (1, 3)), (5, (5, 6), (1, 6)), (8, (8, 9), (1, 9))];
        for (k, s, w) in cases {
            let (es, ew) = PowerRatio::integer(k).unwrap().powers_exact();
            assert_eq!(es, Ratio::new(s.0, s.1));
            assert_eq!(ew, Ratio::new(w.0, w.1));
            assert_eq!(es + ew, Ratio::from_integer(1));
        }
        let (es, ew) = PowerRatio::integer(2).unwrap().powers::<f64>();
        assert_eq!(es, 2.0 / 3.0);
        assert_eq!(ew, 1.0 / 3.0);
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!("2".parse::<PowerRatio>().unwrap(), PowerRatio::integer(2).unwrap());
        assert_eq!("4/2".parse::<PowerRatio>().unwrap(), PowerRatio::integer(2).unwrap());
        assert_eq!("5:2".parse::<PowerRatio>().unwrap().to_string(), "5/2");
        assert!("0".parse::<PowerRatio>().is_err());
        assert!("x".parse::<PowerRatio>().is_err());
    }

    #[test]
    fn mix_rejects_same_scheme_and_length_mismatch() {
        assert!(MixSpec::new(Scheme::Bpsk, Scheme::Bpsk, PowerRatio::EQUAL).is_err());
        let spec = MixSpec::new(Scheme::Bpsk, Scheme::Qam4, PowerRatio::EQUAL).unwrap();
        assert!(matches!(mix(&ones(3), &ones(2), &spec), Err(Error::Shape { .. })));
    }

    #[test]
    fn noise_variance_values() {
        assert_eq!(noise_variance(0.0f64), 1.0);
        assert!((noise_variance(10.0f64) - 0.1).abs() < 1e-16);
    }

    #[test]
    fn awgn_is_seed_reproducible() {
        let seq = modulate::<f64>(Scheme::Psk8, &[1, 2, 3, 4]).unwrap();
        let a = add_awgn(&seq, 5.0, &mut RandomSource::from_seed(11));
        let b = add_awgn(&seq, 5.0, &mut RandomSource::from_seed(11));
        assert_eq!(a, b);
        let c = add_awgn(&seq, 5.0, &mut RandomSource::from_seed(12));
        assert_ne!(a, c);
    }

    #[test]
    fn awgn_empirical_snr_20db() {
        let n = 1_000_000;
        let seq = SymbolSequence::new(vec![Complex::new(0.0f64, 0.0); n]);
        let noise = add_awgn(&seq, 20.0, &mut RandomSource::from_seed(5));
        let measured = 10.0 * (1.0 / noise.mean_power()).log10();
        assert!((measured - 20.0).abs() < 0.1, "measured {measured}");
    }

    #[test]
    fn preprocess_layout() {
        let seq = SymbolSequence::new(vec![Complex::new(1.0f64, 2.0)]);
        let arr = preprocess(&seq);
        assert_eq!(arr.shape(), [2, 1, 1]);
        assert_eq!(arr.to_flat(), vec![1.0, 2.0]);
        let seq = ones(100);
        assert_eq!(preprocess(&seq).shape(), [2, 100, 1]);
    }

    proptest! {
        #[test]
        fn preprocess_round_trips_and_keeps_norm(v in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..64)) {
            let seq: SymbolSequence<f64> = v.iter().map(|&(a, b)| Complex::new(a, b)).collect();
            let arr = preprocess(&seq);
            prop_assert_eq!(reconstruct(&arr), seq.clone());
            prop_assert!((arr.norm_sqr() - seq.energy()).abs() <= 1e-12 * seq.energy().max(1.0));
            let flat = IqArray::from_flat(seq.len(), arr.to_flat()).unwrap();
            prop_assert_eq!(flat, arr);
        }

        #[test]
        fn mix_is_linear(
            strong in 0u8..4, weak in 0u8..4, k in 1u32..10,
            idx in prop::collection::vec((0usize..16, 0usize..16), 1..32),
        ) {
            prop_assume!(strong != weak);
            let (s, w) = (Scheme::from_code(strong).unwrap(), Scheme::from_code(weak).unwrap());
            let spec = MixSpec::new(s, w, PowerRatio::integer(k).unwrap()).unwrap();
            let ia: Vec<usize> = idx.iter().map(|p| p.0 % s.order()).collect();
            let ib: Vec<usize> = idx.iter().map(|p| p.1 % w.order()).collect();
            let a = modulate::<f64>(s, &ia).unwrap();
            let b = modulate::<f64>(w, &ib).unwrap();
            let r = mix(&a, &b, &spec).unwrap();
            let (ga, gb) = spec.amplitudes::<f64>();
            for n in 0..r.len() {
                let residual = r[n] - b[n] * gb;
                // one rounding in the sum and one in the subtraction
                prop_assert!((residual - a[n] * ga).norm() <= 4.0 * f64::EPSILON);
            }
        }
    }

    #[test]
    fn mixed_power_is_unity() {
        use rand::Rng;
        for k in [1u32, 2, 5, 8] {
            let spec = MixSpec::new(Scheme::Qam4, Scheme::Qam16, PowerRatio::integer(k).unwrap()).unwrap();
            let mut rng = RandomSource::from_seed(u64::from(k));
            let n = 100_000;
            let ia: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
            let ib: Vec<usize> = (0..n).map(|_| rng.random_range(0..16)).collect();
            let r = mix(&modulate::<f64>(Scheme::Qam4, &ia).unwrap(), &modulate(Scheme::Qam16, &ib).unwrap(), &spec).unwrap();
            assert!((r.mean_power() - 1.0).abs() < 0.01, "ratio {k}: {}", r.mean_power());
        }
    }
}
