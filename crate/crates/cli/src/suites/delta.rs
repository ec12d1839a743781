use prismatic_core::delta::{
    congruence_order, sections_agree, verify_high_congruence, verify_joyal_congruence,
};
use prismatic_core::random::{congruent_pair, laurent, PolyShape};
use prismatic_core::{DeltaStructure, LaurentPoly, Modulus, Result};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{Outcome, Recorder};
use crate::config::SuiteConfig;

fn images(d: &DeltaStructure) -> Vec<String> {
    d.images().iter().map(|g| g.to_string()).collect()
}

fn elements(rng: &mut ChaCha8Rng, md: Modulus, d: usize, n: usize) -> Vec<LaurentPoly> {
    let shape = PolyShape::default();
    let mut out = vec![LaurentPoly::var(md, d, 0)];
    out.extend((1..n).map(|_| laurent(rng, md, d, &shape)));
    out
}

/// The congruence checks and section agreement for one pair of order m.
fn congruence_checks(
    rec: &mut Recorder,
    id: &str,
    pair: &(DeltaStructure, DeltaStructure),
    m: u32,
    r: &LaurentPoly,
    samples: &[LaurentPoly],
) {
    let (d1, d2) = pair;
    rec.record(format!("{id}/order"), "congruence order of two delta-structures", {
        congruence_order(d1, d2, &[]).map(|got| {
            Outcome::holds(
                got >= m,
                json!({ "delta1": images(d1), "delta2": images(d2), "expected": m, "order": got }),
            )
        })
    });
    rec.record(format!("{id}/high-congruence"), "iterated delta of congruent structures", {
        verify_high_congruence(d1, d2, r, m, m).map(|h| {
            let residuals: Vec<Value> = h
                .residuals
                .iter()
                .map(|s| json!({ "l": s.l, "modulus_exponent": s.required_valuation, "residual": s.residual.to_string() }))
                .collect();
            Outcome::holds(h.holds(), json!({ "r": r.to_string(), "x": h.x.to_string(), "residuals": residuals }))
        })
    });
    rec.record(format!("{id}/joyal-congruence"), "Joyal coordinates of congruent structures", {
        verify_joyal_congruence(d1, d2, r, m).map(|j| {
            Outcome::holds(
                j.holds(),
                json!({
                    "r": r.to_string(),
                    "x": j.x.to_string(),
                    "top_index": m + 1,
                    "top_residual": j.top.residual.to_string(),
                    "index_m_variant_holds": j.index_m_variant_holds,
                }),
            )
        })
    });
    section_check(rec, &format!("{id}/sections-agree"), pair, m as usize, samples, true);
}

fn section_check(
    rec: &mut Recorder,
    id: &str,
    (d1, d2): &(DeltaStructure, DeltaStructure),
    m: usize,
    samples: &[LaurentPoly],
    expect_agree: bool,
) {
    let anchor = if expect_agree {
        "Hodge-Tate sections of congruent structures agree"
    } else {
        "Hodge-Tate sections of structures not congruent mod p differ"
    };
    rec.record(id, anchor, {
        sections_agree(d1, d2, m, samples).map(|s| {
            let shown: Vec<String> = samples.iter().map(|x| x.to_string()).collect();
            Outcome::holds(
                s.agree == expect_agree,
                json!({ "m": m, "samples": shown, "first_disagreement": s.first_disagreement }),
            )
        })
    });
}

/// delta(T) = c T^2 at p = 2: phi(T) = b T^2 with b = 1 + 2c, so
/// delta^2(T) = (c b^2 - c^2)/2 T^4 and the second Joyal coordinate is
/// (b^3 - 1 - 2 c^2)/4 T^4.
fn worked_values(c: i128) -> (i128, i128) {
    let b = 1 + 2 * c;
    ((c * b * b - c * c) / 2, (b * b * b - 1 - 2 * c * c) / 4)
}

fn worked(rec: &mut Recorder, rng: &mut ChaCha8Rng, md: Modulus) -> Result<()> {
    let t = LaurentPoly::var(md, 1, 0);
    let d1 = DeltaStructure::new(vec![LaurentPoly::zero(md, 1)])?;
    let d2 = DeltaStructure::new(vec![t.pow(2).scale(2)])?;
    let (iterate, joyal) = worked_values(2);
    let t4 = |c: i128| LaurentPoly::monomial(md, 1, [4, 0, 0, 0], c);
    rec.record("worked/delta-iterate", "second delta iterate of T", {
        d2.delta_iter(&t, 2).map(|got| {
            let want = t4(iterate).truncate(got.prec()).expect("lower precision");
            Outcome::holds(got == want, json!({ "got": got.to_string(), "expected": want.to_string() }))
        })
    });
    rec.record("worked/joyal", "second Joyal coordinate of T", {
        d2.joyal_coords(&t, 1).map(|j| {
            let got = &j.entries[2];
            let want = t4(joyal).truncate(got.prec()).expect("lower precision");
            Outcome::holds(*got == want, json!({ "got": got.to_string(), "expected": want.to_string() }))
        })
    });
    let samples = elements(rng, md, 1, 10);
    congruence_checks(rec, "worked", &(d1, d2), 1, &t, &samples);
    Ok(())
}

/// Order of an explicit pair, capped where the Joyal solve still has precision.
fn explicit_order(cfg: &SuiteConfig, pair: &(DeltaStructure, DeltaStructure)) -> Result<u32> {
    let m = congruence_order(&pair.0, &pair.1, &[])?;
    Ok(m.min(cfg.precision.saturating_sub(2)))
}

const NO_CLAIM: &str = "pair is not congruent mod p at an order the precision supports";

pub(crate) fn congruence(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, rec: &mut Recorder) {
    let md = cfg.modulus();
    for m in (1..=3).filter(|m| m + 2 <= cfg.precision) {
        for s in 0..cfg.samples {
            let id = format!("m{m}/case{s:03}");
            let pair = match congruent_pair(rng, md, 1, m) {
                Ok(pair) => pair,
                Err(e) => {
                    rec.record(id, "random congruent pair", Err(e));
                    continue;
                }
            };
            let samples = elements(rng, md, 1, 10);
            let r = samples[s % samples.len()].clone();
            congruence_checks(rec, &id, &pair, m, &r, &samples);
        }
    }
    if cfg.p == 2 && cfg.precision >= 4 {
        if let Err(e) = worked(rec, rng, md) {
            rec.record("worked", "worked instance", Err(e));
        }
    }
    if let Some(pair) = cfg.explicit_pair().expect("validated") {
        let d = pair.0.d();
        match explicit_order(cfg, &pair) {
            Ok(0) => rec.record(
                "explicit/order",
                "congruence order of two delta-structures",
                Ok(Outcome::inconclusive(NO_CLAIM)),
            ),
            Ok(m) => {
                let samples = elements(rng, md, d, 10);
                congruence_checks(rec, "explicit", &pair, m, &samples[0], &samples);
            }
            Err(e) => rec.record("explicit/order", "congruence order of two delta-structures", Err(e)),
        }
    }
}

pub(crate) fn sections(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, rec: &mut Recorder) {
    let md = cfg.modulus();
    for m in (1..=3).filter(|m| m + 2 <= cfg.precision) {
        for s in 0..cfg.samples {
            let id = format!("order{m}/case{s:03}");
            match congruent_pair(rng, md, 1, m) {
                Ok(pair) => {
                    let samples = elements(rng, md, 1, 10);
                    for level in 1..=m as usize {
                        section_check(rec, &format!("{id}/level{level}"), &pair, level, &samples, true);
                    }
                }
                Err(e) => rec.record(id, "random congruent pair", Err(e)),
            }
        }
    }
    if cfg.precision < 3 {
        return;
    }
    let samples = elements(rng, md, 1, 10);
    let same = prismatic_core::random::delta_structure(rng, md, 1).map(|d| (d.clone(), d));
    match same {
        Ok(pair) => section_check(rec, "control/identical", &pair, 1, &samples, true),
        Err(e) => rec.record("control/identical", "random delta-structure", Err(e)),
    }
    // delta_2 = delta_1 + T differs at Joyal index 1 by T, which is not a p-th power
    let t = LaurentPoly::var(md, 1, 0);
    let shifted = prismatic_core::random::delta_structure(rng, md, 1).and_then(|d1| {
        let d2 = DeltaStructure::new(vec![d1.images()[0].add(&t)])?;
        Ok((d1, d2))
    });
    match shifted {
        Ok(pair) => section_check(rec, "control/order0", &pair, 1, &samples[..1], false),
        Err(e) => rec.record("control/order0", "random delta-structure", Err(e)),
    }
    if let Some(pair) = cfg.explicit_pair().expect("validated") {
        let samples = elements(rng, md, pair.0.d(), 10);
        match explicit_order(cfg, &pair) {
            Ok(0) => rec.record("explicit", "Hodge-Tate sections of congruent structures agree", {
                Ok(Outcome::inconclusive(NO_CLAIM))
            }),
            Ok(m) => {
                for level in 1..=m as usize {
                    section_check(rec, &format!("explicit/level{level}"), &pair, level, &samples, true);
                }
            }
            Err(e) => rec.record("explicit", "congruence order of two delta-structures", Err(e)),
        }
    }
}
