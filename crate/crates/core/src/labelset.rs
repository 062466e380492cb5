//! Class label sets for single and co-channel mixed experiments.
//!
//! Class order is part of the file contract: singles by scheme code, mixed
//! pairs lexicographic by `(strong code, weak code)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{MixSpec, PowerRatio};
use crate::constellation::Scheme;
use crate::error::{Error, Result};

/// How a mixed class picks its power ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum RatioPolicy {
    Fixed { ratio: PowerRatio },
    /// Integer ratio `k:1` drawn uniformly from `lo..=hi` per sequence.
    UniformInteger { lo: u32, hi: u32 },
}

impl RatioPolicy {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> PowerRatio {
        match *self {
            RatioPolicy::Fixed { ratio } => ratio,
            RatioPolicy::UniformInteger { lo, hi } => {
                PowerRatio::integer(rng.random_range(lo..=hi)).expect("lo >= 1")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassDesc {
    Single { scheme: Scheme },
    Mixed { strong: Scheme, weak: Scheme, ratio: RatioPolicy },
}

impl ClassDesc {
    /// The mixing spec for a concrete ratio draw; `None` for single classes.
    pub fn mix_spec(&self, ratio: PowerRatio) -> Option<MixSpec> {
        match *self {
            ClassDesc::Single { .. } => None,
            ClassDesc::Mixed { strong, weak, .. } => Some(MixSpec::new(strong, weak, ratio).expect("validated pair")),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ClassDesc::Single { scheme } => scheme.to_string(),
            ClassDesc::Mixed { strong, weak, .. } => format!("{strong}+{weak}"),
        }
    }
}

/// The experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LabelSetKind {
    /// The four single schemes.
    Omega4,
    /// Six unordered equal-power pairs over the four schemes.
    Omega6Equal,
    /// Six ordered pairs over {BPSK, 4QAM, 8PSK} at a fixed ratio.
    Omega6Ratio { ratio: PowerRatio },
    /// Twelve ordered pairs over the four schemes at a fixed ratio.
    Omega12Ratio { ratio: PowerRatio },
    /// Six ordered pairs over {BPSK, 4QAM, 8PSK}, ratio uniform on 1..=9.
    Omega6Random,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    kind: LabelSetKind,
    classes: Vec<ClassDesc>,
}

const OMEGA3: [Scheme; 3] = [Scheme::Bpsk, Scheme::Qam4, Scheme::Psk8];

fn ordered_pairs(base: &[Scheme], ratio: RatioPolicy) -> Vec<ClassDesc> {
    let mut out = Vec::new();
    for &strong in base {
        for &weak in base {
            if strong != weak {
                out.push(ClassDesc::Mixed { strong, weak, ratio });
            }
        }
    }
    out
}

impl LabelSet {
    pub fn new(kind: LabelSetKind) -> Result<Self> {
        let classes = match kind {
            LabelSetKind::Omega4 => Scheme::ALL.iter().map(|&scheme| ClassDesc::Single { scheme }).collect(),
            LabelSetKind::Omega6Equal => {
                let ratio = RatioPolicy::Fixed { ratio: PowerRatio::EQUAL };
                let mut out = Vec::new();
                for (i, &strong) in Scheme::ALL.iter().enumerate() {
                    for &weak in &Scheme::ALL[i + 1..] {
                        out.push(ClassDesc::Mixed { strong, weak, ratio });
                    }
                }
                out
            }
            LabelSetKind::Omega6Ratio { ratio } | LabelSetKind::Omega12Ratio { ratio } => {
                if ratio.is_equal_power() {
                    return Err(Error::Config(
                        "ordered pairs need a ratio above 1:1; use the equal-power omega6 set".into(),
                    ));
                }
                if ratio.as_ratio() < num_rational::Ratio::from_integer(1) {
                    return Err(Error::Config(format!("ratio {ratio} must be at least 1 (strong:weak)")));
                }
                let base: &[Scheme] = if matches!(kind, LabelSetKind::Omega6Ratio { .. }) { &OMEGA3 } else { &Scheme::ALL };
                ordered_pairs(base, RatioPolicy::Fixed { ratio })
            }
            LabelSetKind::Omega6Random => ordered_pairs(&OMEGA3, RatioPolicy::UniformInteger { lo: 1, hi: 9 }),
        };
        Ok(Self { kind, classes })
    }

    pub fn omega4() -> Self {
        Self::new(LabelSetKind::Omega4).unwrap()
    }

    pub fn omega6_equal() -> Self {
        Self::new(LabelSetKind::Omega6Equal).unwrap()
    }

    pub fn omega6_ratio(ratio: PowerRatio) -> Result<Self> {
        Self::new(LabelSetKind::Omega6Ratio { ratio })
    }

    pub fn omega12_ratio(ratio: PowerRatio) -> Result<Self> {
        Self::new(LabelSetKind::Omega12Ratio { ratio })
    }

    pub fn omega6_random() -> Self {
        Self::new(LabelSetKind::Omega6Random).unwrap()
    }

    /// Resolves a command-line family name plus optional ratio argument.
    ///
    /// `omega6` without a ratio (or with `1`) is the equal-power set;
    /// `--ratio random` selects the random 1:1..9:1 set.
    pub fn from_args(family: &str, ratio: Option<&str>) -> Result<Self> {
        let ratio = ratio.map(str::trim);
        match (family.to_ascii_lowercase().as_str(), ratio) {
            ("omega4", None) => Ok(Self::omega4()),
            ("omega4", Some(_)) => Err(Error::Config("omega4 holds single signals and takes no ratio".into())),
            ("omega6", None) => Ok(Self::omega6_equal()),
            ("omega6", Some(r)) if r.eq_ignore_ascii_case("random") => Ok(Self::omega6_random()),
            ("omega6", Some(r)) => {
                let ratio: PowerRatio = r.parse()?;
                if ratio.is_equal_power() {
                    Ok(Self::omega6_equal())
                } else {
                    Self::omega6_ratio(ratio)
                }
            }
            ("omega12", Some(r)) if !r.eq_ignore_ascii_case("random") => Self::omega12_ratio(r.parse()?),
            ("omega12", _) => Err(Error::Config("omega12 needs a fixed ratio above 1, e.g. --ratio 2".into())),
            (other, _) => Err(Error::Config(format!("unknown label set '{other}' (omega4, omega6, omega12)"))),
        }
    }

    pub fn kind(&self) -> LabelSetKind {
        self.kind
    }

    pub fn classes(&self) -> &[ClassDesc] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(ClassDesc::name).collect()
    }

    /// Filename-safe identifier, e.g. `omega6-r2`.
    pub fn slug(&self) -> String {
        match self.kind {
            LabelSetKind::Omega4 => "omega4".into(),
            LabelSetKind::Omega6Equal => "omega6".into(),
            LabelSetKind::Omega6Ratio { ratio } => format!("omega6-r{}", ratio.slug()),
            LabelSetKind::Omega12Ratio { ratio } => format!("omega12-r{}", ratio.slug()),
            LabelSetKind::Omega6Random => "omega6-random".into(),
        }
    }

    /// Checks that a deserialized set matches its family definition.
    pub fn validate(&self) -> Result<()> {
        let canonical = Self::new(self.kind)?;
        if canonical.classes != self.classes {
            return Err(Error::Config(format!("class list does not match label set {}", self.slug())));
        }
        Ok(())
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.slug())
    }
}

impl FromStr for LabelSet {
    type Err = Error;

    /// Parses a slug as produced by [`LabelSet::slug`].
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.split_once('-') {
            None => LabelSet::from_args(&s, None),
            Some((family, "random")) => LabelSet::from_args(family, Some("random")),
            Some((family, rest)) => {
                let r = rest
                    .strip_prefix('r')
                    .ok_or_else(|| Error::Config(format!("unknown label set '{s}'")))?
                    .replace('_', "/");
                LabelSet::from_args(family, Some(&r))
            }
        }
    }
}
