//! Suite configuration: command-line flags layered over an optional JSON
//! file, then per-suite defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use prismatic_core::scalar::{is_prime, max_prec};
use prismatic_core::text::parse_laurent;
use prismatic_core::{DeltaStructure, Modulus};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed config {path}: {source}")]
    Malformed { path: PathBuf, source: serde_json::Error },
    #[error("no suite given (use --suite or the `suite` key)")]
    MissingSuite,
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    WittLaws,
    DeltaCongruence,
    EnvelopeKeyProp,
    StratificationEquivalence,
    ComparisonIso,
    CohomologyCompare,
    HtSections,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::WittLaws => "witt-laws",
            Suite::DeltaCongruence => "delta-congruence",
            Suite::EnvelopeKeyProp => "envelope-key-prop",
            Suite::StratificationEquivalence => "stratification-equivalence",
            Suite::ComparisonIso => "comparison-iso",
            Suite::CohomologyCompare => "cohomology-compare",
            Suite::HtSections => "ht-sections",
        }
    }
}

/// Run one verification suite and write a JSON report.
#[derive(Debug, Default, Parser)]
#[command(name = "prismatic", version)]
pub struct Args {
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Residue characteristic, a prime at most 7.
    #[arg(long)]
    pub p: Option<u32>,
    /// Coefficients are computed mod p^precision.
    #[arg(long)]
    pub precision: Option<u32>,
    /// Divided-power degree bound.
    #[arg(long)]
    pub pd_bound: Option<u32>,
    /// Axis weight window [-W, W] for the cohomology complexes.
    #[arg(long)]
    pub t_window: Option<u32>,
    /// Cosimplicial depth.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random cases per parameter combination.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// JSON file with any of the keys of the report's `config` block.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// The file form: every key optional.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub suite: Option<Suite>,
    pub p: Option<u32>,
    pub precision: Option<u32>,
    pub pd_bound: Option<u32>,
    pub t_window: Option<u32>,
    pub depth: Option<usize>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub delta1: Option<Images>,
    pub delta2: Option<Images>,
}

/// delta(T_i) keyed by variable name, e.g. {"T1": "2*T1^2"}.
pub type Images = BTreeMap<String, String>;

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Malformed {
            path: path.to_owned(),
            source,
        })
    }
}

/// A fully resolved configuration; echoed verbatim in every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SuiteConfig {
    pub suite: Suite,
    pub p: u32,
    pub precision: u32,
    pub pd_bound: u32,
    pub t_window: u32,
    pub depth: usize,
    pub seed: u64,
    pub samples: usize,
    /// Explicit images delta_1(T_i), delta_2(T_i), checked alongside the random cases.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta1: Option<Images>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta2: Option<Images>,
}

struct Defaults {
    precision: u32,
    pd_bound: u32,
    t_window: u32,
    depth: usize,
    samples: usize,
}

fn defaults(suite: Suite, p: u32) -> Defaults {
    let base = Defaults {
        precision: 5,
        pd_bound: 2 * p * p,
        t_window: 3,
        depth: 2,
        samples: 10,
    };
    match suite {
        Suite::WittLaws => Defaults { samples: 40, ..base },
        Suite::DeltaCongruence | Suite::HtSections => Defaults { precision: 6, ..base },
        Suite::EnvelopeKeyProp => Defaults { samples: 5, ..base },
        Suite::StratificationEquivalence => Defaults { precision: 3, ..base },
        Suite::ComparisonIso => Defaults { precision: 3, samples: 5, ..base },
        Suite::CohomologyCompare => Defaults {
            precision: 2,
            pd_bound: 2,
            samples: 4,
            ..base
        },
    }
}

impl SuiteConfig {
    /// Flags win over the file, the file over the defaults.
    pub fn resolve(args: &Args, file: FileConfig) -> Result<Self, ConfigError> {
        let suite = args.suite.or(file.suite).ok_or(ConfigError::MissingSuite)?;
        let p = args.p.or(file.p).unwrap_or(2);
        let def = defaults(suite, p);
        let cfg = Self {
            suite,
            p,
            precision: args.precision.or(file.precision).unwrap_or(def.precision),
            pd_bound: args.pd_bound.or(file.pd_bound).unwrap_or(def.pd_bound),
            t_window: args.t_window.or(file.t_window).unwrap_or(def.t_window),
            depth: args.depth.or(file.depth).unwrap_or(def.depth),
            seed: args.seed.or(file.seed).unwrap_or(0),
            samples: args.samples.or(file.samples).unwrap_or(def.samples),
            delta1: file.delta1,
            delta2: file.delta2,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_args(args: &Args) -> Result<Self, ConfigError> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::resolve(args, file)
    }

    pub fn modulus(&self) -> Modulus {
        Modulus::new(self.p, self.precision).expect("validated")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if !is_prime(self.p) || self.p > 7 {
            return bad(format!("p = {} must be a prime at most 7", self.p));
        }
        if self.precision == 0 || self.precision > 10 {
            return bad(format!("precision {} must lie in 1..=10", self.precision));
        }
        if self.precision > max_prec(self.p) {
            return bad(format!("precision {} exceeds the residue range for p = {}", self.precision, self.p));
        }
        if self.depth == 0 {
            return bad("depth must be at least 1".into());
        }
        if self.delta1.is_some() != self.delta2.is_some() {
            return bad("delta1 and delta2 must be given together".into());
        }
        self.explicit_pair().map(|_| ())
    }

    /// The pair given by `delta1`/`delta2`, if any.
    pub fn explicit_pair(&self) -> Result<Option<(DeltaStructure, DeltaStructure)>, ConfigError> {
        let (Some(a), Some(b)) = (&self.delta1, &self.delta2) else {
            return Ok(None);
        };
        let d = a.len();
        let names: Vec<String> = (1..=d).map(|i| format!("T{i}")).collect();
        let keyed = |m: &Images| m.keys().eq(names.iter());
        if !(1..=2).contains(&d) || !keyed(a) || !keyed(b) {
            return Err(ConfigError::Invalid(
                "delta1 and delta2 must both give images of T1 (and T2 when d = 2)".into(),
            ));
        }
        let md = self.modulus();
        let parse = |images: &Images| {
            let polys = images
                .values()
                .map(|s| parse_laurent(s, md, d))
                .collect::<prismatic_core::Result<Vec<_>>>()?;
            DeltaStructure::new(polys)
        };
        let pair = parse(a)
            .and_then(|d1| Ok((d1, parse(b)?)))
            .map_err(|e| ConfigError::Invalid(format!("delta images: {e}")))?;
        Ok(Some(pair))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(suite: Suite) -> Args {
        Args {
            suite: Some(suite),
            ..Args::default()
        }
    }

    fn images(s: &str) -> Images {
        [("T1".to_string(), s.to_string())].into()
    }

    #[test]
    fn flags_win_over_the_file() {
        let mut a = args(Suite::WittLaws);
        a.p = Some(3);
        let file = FileConfig {
            p: Some(5),
            seed: Some(9),
            ..FileConfig::default()
        };
        let cfg = SuiteConfig::resolve(&a, file).unwrap();
        assert_eq!((cfg.p, cfg.seed), (3, 9));
    }

    #[test]
    fn rejects_bad_primes_and_precisions() {
        for (p, n) in [(4, 2), (11, 2), (2, 0), (2, 11)] {
            let mut a = args(Suite::WittLaws);
            a.p = Some(p);
            a.precision = Some(n);
            assert!(matches!(
                SuiteConfig::resolve(&a, FileConfig::default()),
                Err(ConfigError::Invalid(_))
            ));
        }
    }

    #[test]
    fn explicit_images_are_parsed() {
        let file = FileConfig {
            delta1: Some(images("0")),
            delta2: Some(images("2*T1^2")),
            ..FileConfig::default()
        };
        let cfg = SuiteConfig::resolve(&args(Suite::DeltaCongruence), file).unwrap();
        assert!(cfg.explicit_pair().unwrap().is_some());
        let file = FileConfig {
            delta1: Some(images("T1 +")),
            delta2: Some(images("0")),
            ..FileConfig::default()
        };
        assert!(SuiteConfig::resolve(&args(Suite::DeltaCongruence), file).is_err());
    }
}
