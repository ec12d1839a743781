use prismatic_core::cohomology::{compare_rho, Params, RhoRun};
use prismatic_core::crystals::{fmt_matrix, from_connection, PConnection};
use prismatic_core::random::nilpotent_connection;
use prismatic_core::Result;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{Outcome, Recorder};
use crate::config::SuiteConfig;

fn run_json(r: &RhoRun) -> Value {
    let degrees: Vec<Value> = r
        .degrees
        .iter()
        .map(|d| {
            json!({
                "degree": d.degree,
                "cech_alexander": d.cech_alexander.0,
                "total": d.total.0,
                "de_rham": d.de_rham.0,
                "edge_isos": [d.ca_iso, d.dr_iso],
            })
        })
        .collect();
    json!({
        "t_window": r.params.window.t,
        "pd_bound": r.params.window.pd,
        "bicomplex_laws": r.bicomplex.holds(),
        "chain_maps": r.chain_maps,
        "degrees": degrees,
    })
}

fn compare(c: &PConnection, params: &Params) -> Result<(Outcome, Vec<Value>)> {
    let report = compare_rho(&from_connection(c), c, params)?;
    let witness = json!({
        "phi": fmt_matrix(&c.phi()[0]),
        "base": run_json(&report.base),
        "enlarged": run_json(&report.enlarged),
        "stable": report.stable(),
    });
    let divisors = report.base.degrees.iter().map(|d| json!(d.de_rham.0)).collect();
    Ok((Outcome::verdict(report.verdict(), witness), divisors))
}

pub(crate) fn run(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, rec: &mut Recorder) {
    let md = cfg.modulus();
    let params = Params::new(cfg.t_window, cfg.pd_bound, cfg.depth);
    let anchor = "Cech-Alexander, total and de Rham cohomology agree";
    let trivial = PConnection::zero(md, 1, 1, 1);
    let ht = trivial.and_then(|c| compare(&c, &params));
    match ht {
        Ok((outcome, divisors)) => {
            rec.record("trivial/compare", anchor, Ok(outcome));
            if cfg.precision == 1 {
                // Hodge-Tate case: H^0 and H^1 are both the windowed ring
                let window = vec![1u32; 2 * cfg.t_window as usize + 1];
                let ok = divisors.len() == 2 && divisors.iter().all(|d| *d == json!(window));
                rec.record(
                    "trivial/windowed-ring",
                    "Hodge-Tate cohomology of the trivial crystal",
                    Ok(Outcome::holds(ok, json!({ "divisors": divisors, "window_rank": window.len() }))),
                );
            }
        }
        Err(e) => rec.record("trivial/compare", anchor, Err(e)),
    }
    for s in 0..cfg.samples {
        let rank = 1 + s % 2;
        let outcome = nilpotent_connection(rng, md, rank, 1, true).and_then(|c| compare(&c, &params));
        rec.record(format!("case{s:03}/compare"), anchor, outcome.map(|(o, _)| o));
    }
}
