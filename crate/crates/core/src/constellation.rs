//! Modulation alphabets.
//!
//! Every alphabet is normalized to unit average power so that a received
//! sequence's SNR is fully determined by the noise variance. Point order is
//! fixed and is part of the on-disk contract (symbol draws index into it):
//!
//! - BPSK: `+1, -1`
//! - 4QAM: `(1+j)/√2` then counterclockwise in steps of 90°
//! - 8PSK: counterclockwise from angle 0 in steps of 45°
//! - 16QAM: index `k` maps to `(a + jb)/√10` with `a = LEVELS[k % 4]`,
//!   `b = LEVELS[k / 4]` and `LEVELS = [-3, -1, 1, 3]` (row-major, rows by
//!   ascending imaginary part)

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sequence::SymbolSequence;

/// Supported digital modulation schemes. The discriminant is the stable
/// integer code used in label files and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Scheme {
    #[serde(rename = "BPSK")]
    Bpsk = 0,
    #[serde(rename = "4QAM")]
    Qam4 = 1,
    #[serde(rename = "8PSK")]
    Psk8 = 2,
    #[serde(rename = "16QAM")]
    Qam16 = 3,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Bpsk, Scheme::Qam4, Scheme::Psk8, Scheme::Qam16];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Scheme> {
        Self::ALL.get(code as usize).copied()
    }

    /// Number of constellation points.
    pub fn order(self) -> usize {
        match self {
            Scheme::Bpsk => 2,
            Scheme::Qam4 => 4,
            Scheme::Psk8 => 8,
            Scheme::Qam16 => 16,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Bpsk => "BPSK",
            Scheme::Qam4 => "4QAM",
            Scheme::Psk8 => "8PSK",
            Scheme::Qam16 => "16QAM",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scheme> {
        match s.to_ascii_uppercase().as_str() {
            "BPSK" | "0" => Ok(Scheme::Bpsk),
            "4QAM" | "QAM4" | "QPSK" | "1" => Ok(Scheme::Qam4),
            "8PSK" | "PSK8" | "2" => Ok(Scheme::Psk8),
            "16QAM" | "QAM16" | "3" => Ok(Scheme::Qam16),
            _ => Err(Error::Config(format!("unknown modulation scheme '{s}'"))),
        }
    }
}

/// A unit-average-power alphabet with a fixed point order.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<T> {
    scheme: Scheme,
    points: Vec<Complex<T>>,
}

const QAM16_LEVELS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];

impl<T: Real> Constellation<T> {
    pub fn new(scheme: Scheme) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let raw: Vec<(f64, f64)> = match scheme {
            Scheme::Bpsk => vec![(1.0, 0.0), (-1.0, 0.0)],
            Scheme::Qam4 => vec![(h, h), (-h, h), (-h, -h), (h, -h)],
            // Axis points are written out so they carry no cos/sin rounding.
            Scheme::Psk8 => vec![
                (1.0, 0.0),
                (h, h),
                (0.0, 1.0),
                (-h, h),
                (-1.0, 0.0),
                (-h, -h),
                (0.0, -1.0),
                (h, -h),
            ],
            Scheme::Qam16 => {
                let scale = 10f64.sqrt().recip();
                (0..16)
                    .map(|k| (QAM16_LEVELS[k % 4] * scale, QAM16_LEVELS[k / 4] * scale))
                    .collect()
            }
        };
        let points = raw
            .into_iter()
            .map(|(re, im)| Complex::new(T::lit(re), T::lit(im)))
            .collect();
        Self { scheme, points }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, index: usize) -> Result<Complex<T>> {
        self.points.get(index).copied().ok_or(Error::InvalidSymbol {
            index,
            order: self.points.len(),
        })
    }

    /// Mean of |s|² over the alphabet.
    pub fn mean_power(&self) -> T {
        let sum = self.points.iter().fold(T::zero(), |acc, p| acc + p.norm_sqr());
        sum / T::from_usize(self.points.len()).unwrap()
    }

    /// Maps symbol indices to constellation points.
    pub fn modulate(&self, indices: &[usize]) -> Result<SymbolSequence<T>> {
        indices.iter().map(|&i| self.point(i)).collect::<Result<Vec<_>>>().map(SymbolSequence::new)
    }
}

/// Shorthand for `Constellation::new(scheme).modulate(indices)`.
pub fn modulate<T: Real>(scheme: Scheme, indices: &[usize]) -> Result<SymbolSequence<T>> {
    Constellation::new(scheme).modulate(indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sha2::{Digest, Sha256};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn bpsk_points() {
        let k = Constellation::<f64>::new(Scheme::Bpsk);
        assert_eq!(k.points(), &[c(1.0, 0.0), c(-1.0, 0.0)]);
    }

    #[test]
    fn qam4_points_and_power() {
        let k = Constellation::<f64>::new(Scheme::Qam4);
        let h = 0.5f64.sqrt();
        assert_eq!(k.points()[0], c(h, h));
        // independent average over the (±1±j)/√2 grid
        let mut sum = 0.0;
        for a in [-1.0f64, 1.0] {
            for b in [-1.0f64, 1.0] {
                assert!(k.points().contains(&c(a * h, b * h)));
                sum += (a * a + b * b) / 2.0;
            }
        }
        assert!((sum / 4.0 - 1.0).abs() < 1e-12);
        assert!((k.mean_power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qam16_grid_scale() {
        let mut grid_energy = 0.0;
        for a in QAM16_LEVELS {
            for b in QAM16_LEVELS {
                grid_energy += a * a + b * b;
            }
        }
        assert_eq!(grid_energy / 16.0, 10.0);
        let k = Constellation::<f64>::new(Scheme::Qam16);
        let s = 10f64.sqrt();
        assert_eq!(k.points()[0], c(-3.0 / s, -3.0 / s));
        assert_eq!(k.points()[1], c(-1.0 / s, -3.0 / s));
        assert_eq!(k.points()[15], c(3.0 / s, 3.0 / s));
        assert!((k.mean_power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psk8_phase_steps() {
        let seq = modulate::<f64>(Scheme::Psk8, &[0, 1, 2, 3, 4, 5, 6, 7]).unwrap();
        for (k, s) in seq.samples().iter().enumerate() {
            let expected = Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 8.0);
            assert!((s - expected).norm() < 1e-15, "point {k}");
            assert!((s.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn all_alphabets_unit_power_and_distinct() {
        for scheme in Scheme::ALL {
            let k = Constellation::<f64>::new(scheme);
            assert_eq!(k.order(), scheme.order());
            assert!((k.mean_power() - 1.0).abs() < 1e-12, "{scheme}");
            for (i, p) in k.points().iter().enumerate() {
                for q in &k.points()[i + 1..] {
                    assert!((p - q).norm() > 0.0);
                }
            }
            let k32 = Constellation::<f32>::new(scheme);
            assert!((k32.mean_power() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn modulate_examples() {
        let seq = modulate::<f64>(Scheme::Bpsk, &[0, 1, 0]).unwrap();
        assert_eq!(seq.samples(), &[c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let seq = modulate::<f64>(Scheme::Qam4, &[0, 0]).unwrap();
        assert_eq!(seq.samples(), &[c(h, h), c(h, h)]);
    }

    #[test]
    fn modulate_rejects_out_of_range() {
        let err = modulate::<f64>(Scheme::Qam4, &[0, 4]).unwrap_err();
        assert!(matches!(err, Error::InvalidSymbol { index: 4, order: 4 }));
    }

    #[test]
    fn codes_round_trip() {
        for scheme in Scheme::ALL {
            assert_eq!(Scheme::from_code(scheme.code()), Some(scheme));
            assert_eq!(scheme.name().parse::<Scheme>().unwrap(), scheme);
        }
        assert_eq!(Scheme::from_code(4), None);
        assert_eq!(
            Scheme::ALL.map(Scheme::code),
            [0, 1, 2, 3]
        );
    }

    #[test]
    fn point_order_fixture() {
        let mut hasher = Sha256::new();
        for scheme in Scheme::ALL {
            for p in Constellation::<f64>::new(scheme).points() {
                hasher.update(p.re.to_le_bytes());
                hasher.update(p.im.to_le_bytes());
            }
        }
        let digest = hex::encode(hasher.finalize());
        assert_eq!(digest, POINT_TABLE_SHA256);
    }

    const POINT_TABLE_SHA256: &str = "d7b69aa10fc9a73e3fda98d9f9ac6abd18294ea283a39035236f49bc489463b6";
}
