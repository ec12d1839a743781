use prismatic_core::crystals::{
    cocycle_check, fmt_matrix, from_connection, to_connection, verify_descent, PConnection,
};
use prismatic_core::envelope::EnvelopeRing;
use prismatic_core::random::{congruent_pair, corrupt, nilpotent_connection, perturb, Corruption};
use prismatic_core::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{Outcome, Recorder};
use crate::config::SuiteConfig;

fn describe(c: &PConnection) -> Value {
    json!({
        "phi": c.phi().iter().map(fmt_matrix).collect::<Vec<_>>(),
        "nilpotence_order": c.order(),
    })
}

fn corruption_name(kind: Corruption) -> &'static str {
    match kind {
        Corruption::Unit => "unit",
        Corruption::SecondOrder => "second-order",
        Corruption::NotNilpotent => "not-nilpotent",
    }
}

pub(crate) fn equivalence(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, rec: &mut Recorder) {
    let md = cfg.modulus();
    for s in 0..cfg.samples {
        let (rank, d) = (1 + s % 3, 1 + (s / 3) % 2);
        let id = format!("case{s:03}");
        let c = match nilpotent_connection(rng, md, rank, d, s % 2 == 1) {
            Ok(c) => c,
            Err(e) => {
                rec.record(id, "random commuting nilpotent connection", Err(e));
                continue;
            }
        };
        let strat = from_connection(&c);
        rec.record(format!("{id}/cocycle"), "stratification of a p-connection is a cocycle", {
            cocycle_check(&strat, None).map(|r| {
                let mut w = describe(&c);
                w["mismatch"] = json!(r.witness);
                Outcome::holds(r.holds(), w)
            })
        });
        rec.record(format!("{id}/round-trip"), "connection to stratification and back", {
            let back = to_connection(&strat);
            back.map(|b| {
                let mut w = describe(&c);
                w["recovered"] = describe(&b)["phi"].clone();
                Outcome::holds(b == c, w)
            })
        });
        for kind in Corruption::ALL {
            let name = format!("{id}/reject-{}", corruption_name(kind));
            rec.record(name, "a non-exponential stratification is rejected", rejection(rng, &c, kind));
        }
    }
}

fn rejection(rng: &mut ChaCha8Rng, c: &PConnection, kind: Corruption) -> Result<Outcome> {
    let bad = corrupt(rng, c, kind)?;
    let refused = match to_connection(&bad) {
        Err(Error::NotACrystal(why)) => Some(why),
        Err(e) => return Err(e),
        Ok(_) => None,
    };
    let cocycle = cocycle_check(&bad, None)?;
    let mut w = describe(c);
    w["to_connection"] = json!(refused);
    w["cocycle_holds"] = json!(cocycle.holds());
    Ok(Outcome::holds(refused.is_some(), w))
}

pub(crate) fn comparison(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, rec: &mut Recorder) {
    let md = cfg.modulus();
    for s in 0..cfg.samples {
        let id = format!("case{s:03}");
        let rank = rng.gen_range(1..=3);
        let setup = congruent_pair(rng, md, 1, 1).and_then(|(d1, d2)| {
            let d3 = perturb(rng, &d2, 1)?;
            let c2 = nilpotent_connection(rng, md, rank, 1, s % 2 == 1)?;
            Ok((EnvelopeRing::new(d1, d2, None)?, d3, c2))
        });
        let (env, d3, c2) = match setup {
            Ok(x) => x,
            Err(e) => {
                rec.record(id, "random comparison instance", Err(e));
                continue;
            }
        };
        let report = match verify_descent(&env, &c2, Some(&d3)) {
            Ok(r) => r,
            Err(e) => {
                rec.record(format!("{id}/descent"), "comparison isomorphism", Err(e));
                continue;
            }
        };
        let mut w = describe(&c2);
        w["delta1"] = json!(env.delta1().images()[0].to_string());
        w["delta2"] = json!(env.delta2().images()[0].to_string());
        w["delta3"] = json!(d3.images()[0].to_string());
        for (name, anchor, ok) in [
            ("diagram", "comparison map is compatible with descent data", report.diagram),
            ("inverse", "comparison map is invertible", report.inverse),
            ("phi-match", "comparison map recovers the connection", report.phi_match),
            ("triple", "comparison maps compose for three structures", report.triple == Some(true)),
        ] {
            rec.record(format!("{id}/{name}"), anchor, Ok(Outcome::holds(ok, w.clone())));
        }
    }
}
