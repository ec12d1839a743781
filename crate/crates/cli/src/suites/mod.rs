//! The verification suites. Each one appends check records to a
//! `Recorder`; random cases come from a ChaCha stream seeded by the config.

use prismatic_core::envelope::Verdict;
use prismatic_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{Suite, SuiteConfig};
use crate::report::{Check, Report, Status};

mod cohomology;
mod crystals;
mod delta;
mod envelope;
mod witt;

/// Result of one check before it becomes a record.
pub(crate) struct Outcome {
    status: Status,
    witness: Value,
}

impl Outcome {
    pub(crate) fn holds(ok: bool, witness: Value) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Self { status, witness }
    }

    pub(crate) fn verdict(v: Verdict, witness: Value) -> Self {
        let status = match v {
            Verdict::Pass => Status::Pass,
            Verdict::Fail => Status::Fail,
            Verdict::Inconclusive => Status::Inconclusive,
        };
        Self { status, witness }
    }

    pub(crate) fn inconclusive(reason: impl Into<String>) -> Self {
        Self {
            status: Status::Inconclusive,
            witness: json!({ "reason": reason.into() }),
        }
    }
}

/// Errors that reflect a truncation limit rather than a refutation.
fn is_truncation(e: &Error) -> bool {
    matches!(
        e,
        Error::Inconclusive(_) | Error::WindowTooSmall(_) | Error::PrecisionExhausted { .. }
    )
}

pub(crate) struct Recorder {
    prefix: &'static str,
    checks: Vec<Check>,
}

impl Recorder {
    pub(crate) fn record(&mut self, id: impl AsRef<str>, anchor: &str, outcome: prismatic_core::Result<Outcome>) {
        let outcome = match outcome {
            Ok(o) => o,
            Err(e) if is_truncation(&e) => Outcome::inconclusive(e.to_string()),
            Err(e) => Outcome {
                status: Status::Fail,
                witness: json!({ "error": e.to_string() }),
            },
        };
        self.checks.push(Check {
            id: format!("{}/{}", self.prefix, id.as_ref()),
            anchor: anchor.to_string(),
            status: outcome.status,
            witness: outcome.witness,
        });
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rec = Recorder {
        prefix: cfg.suite.name(),
        checks: Vec::new(),
    };
    match cfg.suite {
        Suite::WittLaws => witt::run(cfg, &mut rng, &mut rec),
        Suite::DeltaCongruence => delta::congruence(cfg, &mut rng, &mut rec),
        Suite::HtSections => delta::sections(cfg, &mut rng, &mut rec),
        Suite::EnvelopeKeyProp => envelope::run(cfg, &mut rng, &mut rec),
        Suite::StratificationEquivalence => crystals::equivalence(cfg, &mut rng, &mut rec),
        Suite::ComparisonIso => crystals::comparison(cfg, &mut rng, &mut rec),
        Suite::CohomologyCompare => cohomology::run(cfg, &mut rng, &mut rec),
    }
    Report::new(cfg.clone(), rec.checks)
}
