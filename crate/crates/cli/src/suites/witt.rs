use std::fmt::Display;

use prismatic_core::random::{laurent, PolyShape};
use prismatic_core::ring::ExactInt;
use prismatic_core::{Modulus, PadicRing, Result, WittVec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{Outcome, Recorder};
use crate::config::SuiteConfig;

type Law<R> = fn(&[WittVec<R>; 3]) -> Result<(Vec<R>, Vec<R>)>;

fn laws<R: PadicRing>() -> Vec<(&'static str, &'static str, Law<R>)> {
    fn e<R: PadicRing>(w: WittVec<R>) -> Vec<R> {
        w.entries().to_vec()
    }
    fn sum<R: PadicRing>(x: &[R], y: &[R]) -> Vec<R> {
        x.iter().zip(y).map(|(a, b)| a.add(b)).collect()
    }
    fn prod<R: PadicRing>(x: &[R], y: &[R]) -> Vec<R> {
        x.iter().zip(y).map(|(a, b)| a.mul(b)).collect()
    }
    vec![
        ("add-commutative", "Witt addition is commutative", |[a, b, _]| {
            Ok((e(a.add(b)?), e(b.add(a)?)))
        }),
        ("add-associative", "Witt addition is associative", |[a, b, c]| {
            Ok((e(a.add(b)?.add(c)?), e(a.add(&b.add(c)?)?)))
        }),
        ("additive-inverse", "Witt negation is an additive inverse", |[a, _, _]| {
            Ok((e(a.add(&a.neg()?)?), e(a.zero_like())))
        }),
        ("mul-commutative", "Witt multiplication is commutative", |[a, b, _]| {
            Ok((e(a.mul(b)?), e(b.mul(a)?)))
        }),
        ("mul-associative", "Witt multiplication is associative", |[a, b, c]| {
            Ok((e(a.mul(b)?.mul(c)?), e(a.mul(&b.mul(c)?)?)))
        }),
        ("mul-unit", "the Witt unit is neutral", |[a, _, _]| Ok((e(a.mul(&a.one_like())?), e(a.clone())))),
        ("distributive", "Witt multiplication distributes over addition", |[a, b, c]| {
            Ok((e(a.mul(&b.add(c)?)?), e(a.mul(b)?.add(&a.mul(c)?)?)))
        }),
        ("ghost-additive", "ghost components are additive", |[a, b, _]| {
            Ok((a.add(b)?.ghost(), sum(&a.ghost(), &b.ghost())))
        }),
        ("ghost-multiplicative", "ghost components are multiplicative", |[a, b, _]| {
            Ok((a.mul(b)?.ghost(), prod(&a.ghost(), &b.ghost())))
        }),
    ]
}

fn show<R: Display>(v: &[R]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn check_laws<R: PadicRing + Display>(rec: &mut Recorder, ring: &str, len: usize, cases: &[[WittVec<R>; 3]]) {
    for (name, anchor, law) in laws::<R>() {
        let mut outcome = Ok(Outcome::holds(true, json!({ "samples": cases.len() })));
        for (i, case) in cases.iter().enumerate() {
            match law(case) {
                Ok((lhs, rhs)) if lhs == rhs => {}
                Ok((lhs, rhs)) => {
                    let inputs: Vec<Vec<String>> = case.iter().map(|w| show(w.entries())).collect();
                    outcome = Ok(Outcome::holds(
                        false,
                        json!({ "sample": i, "inputs": inputs, "lhs": show(&lhs), "rhs": show(&rhs) }),
                    ));
                    break;
                }
                Err(err) => {
                    outcome = Err(err);
                    break;
                }
            }
        }
        rec.record(format!("{ring}/L{len}/{name}"), anchor, outcome);
    }
}

pub(crate) fn run(cfg: &SuiteConfig, rng: &mut ChaCha8Rng, rec: &mut Recorder) {
    let p = cfg.p;
    let md = Modulus::new(p, 1).expect("validated prime");
    let shape = PolyShape::default();
    for len in 1..=3 {
        let ints: Vec<[WittVec<ExactInt>; 3]> = (0..cfg.samples)
            .map(|_| {
                std::array::from_fn(|_| {
                    let v = (0..len).map(|_| ExactInt::new(p, rng.gen_range(-20i64..=20))).collect();
                    WittVec::new(p, v).expect("nonempty")
                })
            })
            .collect();
        check_laws(rec, "Z", len, &ints);
        let polys: Vec<[WittVec<_>; 3]> = (0..cfg.samples)
            .map(|_| {
                std::array::from_fn(|_| {
                    let v = (0..len).map(|_| laurent(rng, md, 1, &shape)).collect();
                    WittVec::new(p, v).expect("nonempty")
                })
            })
            .collect();
        check_laws(rec, "FpT", len, &polys);
    }
}
