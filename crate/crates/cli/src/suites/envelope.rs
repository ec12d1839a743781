use prismatic_core::cosimplicial::{verify_cosimplicial_identities, Flavor};
use prismatic_core::envelope::{delta_diff_in_j, AxisIterate, EnvelopeRing, Membership};
use prismatic_core::random::congruent_pair;
use prismatic_core::{DeltaStructure, Result};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{Outcome, Recorder};
use crate::config::SuiteConfig;

fn membership(m: &Membership) -> Value {
    match m {
        Membership::Member => json!("member"),
        Membership::NotMember {
            index,
            valuation,
            threshold,
        } => json!({ "index": index, "valuation": valuation, "threshold": threshold }),
        Membership::Inconclusive { index, reason } => json!({ "index": index, "reason": reason }),
    }
}

fn axis(a: &AxisIterate) -> Value {
    json!({
        "axis": a.axis,
        "top_coefficient": a.top_coeff.as_ref().map(|c| c.to_string()),
        "expected": a.expected.to_string(),
        "top_holds": a.top_holds,
        "remainder": membership(&a.remainder),
    })
}

fn envelope_checks(rec: &mut Recorder, cfg: &SuiteConfig, id: &str, d1: DeltaStructure, d2: DeltaStructure) {
    for (name, d) in [("delta1", &d1), ("delta2", &d2)] {
        rec.record(format!("{id}/{name}-diff-in-j"), "delta(T) - delta(S) lies in the ideal of T - S", {
            delta_diff_in_j(d).map(|ok| Outcome::holds(ok, json!({ "images": d.images().iter().map(|g| g.to_string()).collect::<Vec<_>>() })))
        });
    }
    let env = match EnvelopeRing::new(d1, d2, Some(cfg.pd_bound)) {
        Ok(env) => env,
        Err(e) => return rec.record(format!("{id}/envelope"), "envelope ring of a congruent pair", Err(e)),
    };
    rec.record(format!("{id}/phi-y"), "Frobenius of Y is p times z0", {
        let phi_y = env.phi(&env.y(0));
        phi_y.and_then(|phi_y| {
            let pz0 = env.z0(0).mul_p_pow(1)?;
            Ok(Outcome::holds(
                phi_y == pz0,
                json!({ "z0": env.z0(0).to_string(), "phi_y": phi_y.to_string() }),
            ))
        })
    });
    let p = cfg.p;
    for n in 1..=2u32 {
        let name = format!("{id}/iterate-n{n}");
        let anchor = "closed form for the iterated delta of Y";
        if p.pow(n) > cfg.pd_bound {
            rec.record(name, anchor, Ok(Outcome::inconclusive(format!("pd-degree bound below p^{n}"))));
            continue;
        }
        rec.record(name, anchor, iterate(&env, n));
    }
}

fn iterate(env: &EnvelopeRing, n: u32) -> Result<Outcome> {
    let report = env.verify_iterate_formula(n)?;
    let delta_n = env.delta_iter(&env.y(0), n)?;
    let axes: Vec<Value> = report.axes.iter().map(axis).collect();
    Ok(Outcome::verdict(
        report.verdict(),
        json!({ "delta_n_y": delta_n.to_string(), "axes": axes }),
    ))
}

pub(crate) fn run(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, rec: &mut Recorder) {
    let md = cfg.modulus();
    for s in 0..cfg.samples {
        let id = format!("case{s:03}");
        match congruent_pair(rng, md, 1, 1) {
            Ok((d1, d2)) => envelope_checks(rec, cfg, &id, d1, d2),
            Err(e) => rec.record(id, "random congruent pair", Err(e)),
        }
    }
    if let Some((d1, d2)) = cfg.explicit_pair().expect("validated") {
        envelope_checks(rec, cfg, "explicit", d1, d2);
    }
    for (name, flavor) in [
        ("plain", Flavor::Plain),
        ("tilde", Flavor::Tilde),
        ("sigma2", Flavor::Sigma { h: 2 }),
    ] {
        rec.record(format!("cosimplicial/{name}"), "cosimplicial identities to depth 3", {
            verify_cosimplicial_identities(flavor, 3, md, 1)
                .map(|r| Outcome::holds(r.holds(), json!({ "depth": 3, "failures": r.failures })))
        });
    }
}
