//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use prismatic_core::cohomology::{
    build_bicomplex, build_de_rham, compare_rho, sigma_compare, sigma_restriction, CochainComplex,
    Params,
};
use prismatic_core::cosimplicial::{verify_cosimplicial_identities, Flavor};
use prismatic_core::crystals::{
    cocycle_check, from_connection, sigma_base_change, sigma_cocycle_check, to_connection,
    verify_descent, PConnection, SigmaConnection,
};
use prismatic_core::delta::{
    congruence_order, sections_agree, verify_high_congruence, verify_joyal_congruence,
};
use prismatic_core::envelope::{delta_diff_in_j, EnvelopeRing, Verdict};
use prismatic_core::linalg::Divisors;
use prismatic_core::random::{
    congruent_pair, corrupt, delta_structure, laurent, nilpotent_connection, perturb,
    sigma_connection, Corruption, PolyShape,
};
use prismatic_core::ring::ExactInt;
use prismatic_core::{DeltaStructure, Error, LaurentPoly, Modulus, WittVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn modulus(p: u32, prec: u32) -> Modulus {
    Modulus::new(p, prec).expect("small prime and precision")
}

// ---------- 1: Witt vector laws ----------

/// Ghost components straight from the definition on integers.
fn ghost_oracle(p: u32, a: &[BigInt]) -> Vec<BigInt> {
    (0..a.len())
        .map(|n| {
            (0..=n)
                .map(|i| BigInt::from(p).pow(i as u32) * a[i].pow(p.pow((n - i) as u32)))
                .sum()
        })
        .collect()
}

fn int_values(v: &WittVec<ExactInt>) -> Vec<BigInt> {
    v.entries().iter().map(|x| x.value.clone()).collect()
}

fn ring_laws<R>(a: &WittVec<R>, b: &WittVec<R>, c: &WittVec<R>) -> std::result::Result<(), String>
where
    R: prismatic_core::PadicRing + PartialEq + std::fmt::Debug,
{
    let e = |r: prismatic_core::Result<WittVec<R>>| r.map_err(err);
    let ab = e(a.add(b))?;
    ensure(ab == e(b.add(a))?, || "addition is not commutative".into())?;
    ensure(e(ab.add(c))? == e(a.add(&e(b.add(c))?))?, || "addition is not associative".into())?;
    let m = e(a.mul(b))?;
    ensure(m == e(b.mul(a))?, || "multiplication is not commutative".into())?;
    ensure(e(m.mul(c))? == e(a.mul(&e(b.mul(c))?))?, || "multiplication is not associative".into())?;
    let lhs = e(a.mul(&e(b.add(c))?))?;
    ensure(lhs == e(m.add(&e(a.mul(c))?))?, || "distributivity fails".into())?;
    ensure(e(a.add(&e(a.neg())?))? == a.zero_like(), || "a + (-a) is not zero".into())?;
    ensure(e(a.one_like().mul(a))? == *a, || "1 is not a unit".into())?;
    Ok(())
}

fn witt_laws(rng: &mut ChaCha8Rng) -> Outcome {
    let mut vectors = 0;
    for p in [2u32, 3] {
        for s in 0..120 {
            let len = 1 + s % 3;
            let draw = |rng: &mut ChaCha8Rng| -> Vec<BigInt> {
                (0..len).map(|_| BigInt::from(rng.gen_range(-20i64..=20))).collect()
            };
            let (xa, xb, xc) = (draw(rng), draw(rng), draw(rng));
            let wrap = |x: &[BigInt]| {
                WittVec::new(p, x.iter().map(|v| ExactInt::new(p, v.clone())).collect()).map_err(err)
            };
            let (a, b, c) = (wrap(&xa)?, wrap(&xb)?, wrap(&xc)?);
            ring_laws(&a, &b, &c).map_err(|m| format!("Z, p={p}, {xa:?} {xb:?} {xc:?}: {m}"))?;
            let (ga, gb) = (ghost_oracle(p, &xa), ghost_oracle(p, &xb));
            let sum = ghost_oracle(p, &int_values(&a.add(&b).map_err(err)?));
            let prod = ghost_oracle(p, &int_values(&a.mul(&b).map_err(err)?));
            for n in 0..len {
                ensure(sum[n] == &ga[n] + &gb[n], || format!("ghost not additive at p={p}, {xa:?}, {xb:?}"))?;
                ensure(prod[n] == &ga[n] * &gb[n], || format!("ghost not multiplicative at p={p}, {xa:?}, {xb:?}"))?;
            }

            let md = modulus(p, 1);
            let shape = PolyShape::default();
            let mut draw_fp = || -> std::result::Result<WittVec<LaurentPoly>, String> {
                WittVec::new(p, (0..len).map(|_| laurent(rng, md, 1, &shape)).collect()).map_err(err)
            };
            let (a, b, c) = (draw_fp()?, draw_fp()?, draw_fp()?);
            ring_laws(&a, &b, &c).map_err(|m| format!("F_p[T], p={p}, {:?}: {m}", a.entries()))?;
            let (ga, gb) = (a.ghost(), b.ghost());
            let gs = a.add(&b).map_err(err)?.ghost();
            let gm = a.mul(&b).map_err(err)?.ghost();
            for n in 0..len {
                ensure(gs[n] == ga[n].add(&gb[n]) && gm[n] == ga[n].mul(&gb[n]), || {
                    format!("ghost map fails over F_p[T] at p={p}")
                })?;
            }
            vectors += 6;
        }
    }
    Ok(format!("{vectors} vectors over Z and F_p[T^±1], p in {{2,3}}, length 1..3"))
}

// ---------- 2: Joyal coordinates ----------

/// phi by substituting T -> T^p + p g into each monomial, inverting phi(T)
/// as T^-p times a truncated geometric series.
fn phi_oracle(g: &LaurentPoly, f: &LaurentPoly) -> LaurentPoly {
    let (md, p) = (f.modulus(), f.p());
    let t = LaurentPoly::var(md, 1, 0);
    let image = t.pow(p as u64).add(&g.scale(p as i128));
    let t_neg_p = LaurentPoly::monomial(md, 1, [-(p as i32), 0, 0, 0], 1);
    let u = g.mul(&t_neg_p).scale(-(p as i128));
    let mut series = LaurentPoly::constant(md, 1, 1);
    let mut term = series.clone();
    for _ in 1..md.prec() {
        term = term.mul(&u);
        series = series.add(&term);
    }
    let inverse = t_neg_p.mul(&series);
    let mut out = LaurentPoly::zero(md, 1);
    for (e, c) in f.terms() {
        let base = if e[0] >= 0 { &image } else { &inverse };
        out = out.add(&base.pow(e[0].unsigned_abs() as u64).scale(*c));
    }
    out
}

fn joyal(rng: &mut ChaCha8Rng) -> Outcome {
    let shape = PolyShape::default();
    let mut samples = 0;
    for s in 0..120 {
        let p = [2u32, 3][s % 2];
        let m = 1 + (s / 2) % 2;
        let md = modulus(p, 5);
        let d = delta_structure(rng, md, 1).map_err(err)?;
        let g = &d.images()[0];
        let (x, y) = (laurent(rng, md, 1, &shape), laurent(rng, md, 1, &shape));
        let coords = d.joyal_coords(&x, m).map_err(err)?;
        let mut orbit = x.clone();
        for (n, _) in coords.entries.iter().enumerate() {
            // ghost component n from entries lifted back to precision 5
            let mut w = LaurentPoly::zero(md, 1);
            for (i, e) in coords.entries[..=n].iter().enumerate() {
                let lifted = LaurentPoly::from_terms(md, 1, e.terms().map(|(k, c)| (*k, *c)));
                w = w.add(&lifted.pow((p as u64).pow((n - i) as u32)).scale((p as i128).pow(i as u32)));
            }
            ensure(w == orbit, || format!("ghost {n} of Joyal coordinates of {x} under {g} is not phi^{n}(x)"))?;
            orbit = phi_oracle(g, &orbit);
        }
        let phi = |f: &LaurentPoly| d.phi_of(f).map_err(err);
        ensure(phi(&x)? == phi_oracle(g, &x), || format!("phi({x}) disagrees with substitution"))?;
        ensure(phi(&x.add(&y))? == phi(&x)?.add(&phi(&y)?), || format!("phi not additive on {x}, {y}"))?;
        ensure(phi(&x.mul(&y))? == phi(&x)?.mul(&phi(&y)?), || format!("phi not multiplicative on {x}, {y}"))?;
        ensure(phi(&x)?.mod_p() == x.pow(p as u64).mod_p(), || format!("phi({x}) is not x^p mod p"))?;
        samples += 1;
    }
    Ok(format!("{samples} samples, ghost = Frobenius orbit, phi a ring map lifting x^p"))
}

// ---------- 3: congruent delta-structures ----------

/// delta(T) = 2T^2 at p = 2 on integer coefficients of T^4: phi(T^k) = 5^k T^2k.
fn worked_oracle() -> (BigInt, BigInt) {
    let five = BigInt::from(5);
    // delta(2T^2) = (phi(2T^2) - 4T^4)/2
    let delta2 = (BigInt::from(2) * five.pow(2) - 4) / 2;
    // x_2 = (phi^2(T) - T^4 - 2 delta(T)^2)/4 with phi^2(T) = 5 phi(T)^2 = 125 T^4
    let x2 = (five.pow(3) - 1 - BigInt::from(2) * 4) / 4;
    (delta2, x2)
}

fn worked_instance() -> std::result::Result<(), String> {
    let md = modulus(2, 5);
    let t = LaurentPoly::var(md, 1, 0);
    let d = DeltaStructure::new(vec![t.pow(2).scale(2)]).map_err(err)?;
    let (delta2, x2) = worked_oracle();
    ensure(delta2 == BigInt::from(23) && x2 == BigInt::from(29), || "integer oracle is off".into())?;
    let t4 = |c: &BigInt| LaurentPoly::monomial(md, 1, [4, 0, 0, 0], md.reduce_big(c));
    let got = d.delta_iter(&t, 2).map_err(err)?;
    ensure(got == t4(&delta2).truncate(got.prec()).map_err(err)?, || format!("delta^2(T) = {got}"))?;
    let coords = d.joyal_coords(&t, 1).map_err(err)?;
    let got = &coords.entries[2];
    ensure(*got == t4(&x2).truncate(got.prec()).map_err(err)?, || format!("x_2 = {got}"))?;
    Ok(())
}

fn congruence(rng: &mut ChaCha8Rng) -> Outcome {
    let shape = PolyShape::default();
    let (mut pairs, mut index_m) = (0, 0);
    for p in [2u32, 3] {
        let md = modulus(p, 6);
        for m in 1..=3u32 {
            for _ in 0..9 {
                let (d1, d2) = congruent_pair(rng, md, 1, m).map_err(err)?;
                let show = || format!("p={p} m={m} delta1={} delta2={}", d1.images()[0], d2.images()[0]);
                let mut samples = vec![LaurentPoly::var(md, 1, 0)];
                samples.extend((1..10).map(|_| laurent(rng, md, 1, &shape)));
                let r = &samples[rng.gen_range(0..samples.len())];
                ensure(congruence_order(&d1, &d2, &[]).map_err(err)? >= m, || format!("{}: order", show()))?;
                let high = verify_high_congruence(&d1, &d2, r, m, m).map_err(err)?;
                ensure(high.holds(), || format!("{}: iterated delta congruence fails at r={r}", show()))?;
                let j = verify_joyal_congruence(&d1, &d2, r, m).map_err(err)?;
                ensure(j.holds(), || format!("{}: Joyal congruence fails at r={r}", show()))?;
                index_m += usize::from(j.index_m_variant_holds);
                let agree = sections_agree(&d1, &d2, m as usize, &samples).map_err(err)?;
                ensure(agree.agree, || format!("{}: sections differ at {:?}", show(), agree.first_disagreement))?;
                pairs += 1;
            }
        }
    }
    worked_instance()?;
    Ok(format!(
        "{pairs} pairs, sections on 10 samples each, 23 T^4 / 29 T^4 match; index-m reading held on {index_m}/{pairs}"
    ))
}

// ---------- 4: envelope ----------

fn envelope(rng: &mut ChaCha8Rng) -> Outcome {
    let mut pairs = 0;
    for p in [2u32, 3] {
        let md = modulus(p, 5);
        for _ in 0..20 {
            let (d1, d2) = congruent_pair(rng, md, 1, 1).map_err(err)?;
            let show = format!("p={p} delta1={} delta2={}", d1.images()[0], d2.images()[0]);
            ensure(delta_diff_in_j(&d1).map_err(err)? && delta_diff_in_j(&d2).map_err(err)?, || {
                format!("{show}: delta(T) - delta(S) outside J")
            })?;
            let env = EnvelopeRing::new(d1, d2, Some(2 * p * p)).map_err(err)?;
            let phi_y = env.phi(&env.y(0)).map_err(err)?;
            ensure(phi_y == env.z0(0).mul_p_pow(1).map_err(err)?, || format!("{show}: phi(Y) = {phi_y}"))?;
            for n in 1..=2 {
                let v = env.verify_iterate_formula(n).map_err(err)?.verdict();
                ensure(v == Verdict::Pass, || format!("{show}: iterate formula n={n} gave {v:?}"))?;
            }
            pairs += 1;
        }
        for flavor in [Flavor::Plain, Flavor::Tilde, Flavor::Sigma { h: 2 }] {
            let r = verify_cosimplicial_identities(flavor, 3, md, 1).map_err(err)?;
            ensure(r.holds(), || format!("{flavor:?} at p={p}: {:?}", r.failures))?;
        }
    }
    Ok(format!("{pairs} pairs, n in {{1,2}}; cosimplicial identities to depth 3 in 3 flavors"))
}

// ---------- 5: stratifications ----------

fn stratification(rng: &mut ChaCha8Rng) -> Outcome {
    let (mut tuples, mut rejected) = (0, 0);
    for s in 0..120usize {
        let p = [2u32, 3][s % 2];
        let n = (s / 2 % 3) as u32;
        let (rank, d) = (1 + s / 6 % 3, 1 + s / 18 % 2);
        let md = modulus(p, n + 1);
        let c = nilpotent_connection(rng, md, rank, d, s % 4 < 2).map_err(err)?;
        let show = format!("p={p} n={n} rank={rank} d={d}");
        let strat = from_connection(&c);
        ensure(cocycle_check(&strat, None).map_err(err)?.holds(), || format!("{show}: cocycle fails"))?;
        ensure(to_connection(&strat).map_err(err)? == c, || format!("{show}: round trip changes phi"))?;
        tuples += 1;
        if s % 5 == 0 {
            for kind in Corruption::ALL {
                let bad = corrupt(rng, &c, kind).map_err(err)?;
                match to_connection(&bad) {
                    Err(Error::NotACrystal(_)) => rejected += 1,
                    Err(e) => return Err(format!("{show}: {kind:?} gave {e}")),
                    Ok(_) => return Err(format!("{show}: {kind:?} corruption accepted")),
                }
            }
        }
    }
    Ok(format!("{tuples} tuples round-trip; {rejected} corrupted stratifications rejected"))
}

// ---------- 6: comparison isomorphism ----------

fn comparison(rng: &mut ChaCha8Rng) -> Outcome {
    let mut instances = 0;
    for p in [2u32, 3] {
        for n in 1..=2u32 {
            let md = modulus(p, n + 1);
            for s in 0..20 {
                let (d1, d2) = congruent_pair(rng, md, 1, 1).map_err(err)?;
                let d3 = perturb(rng, &d2, 1).map_err(err)?;
                let rank = rng.gen_range(1..=3);
                let c2 = nilpotent_connection(rng, md, rank, 1, s % 2 == 1).map_err(err)?;
                let env = EnvelopeRing::new(d1, d2, None).map_err(err)?;
                let r = verify_descent(&env, &c2, Some(&d3)).map_err(err)?;
                ensure(r.diagram && r.inverse && r.phi_match && r.triple == Some(true), || {
                    format!("p={p} n={n} rank={rank}: {r:?}")
                })?;
                instances += 1;
            }
        }
    }
    Ok(format!("{instances} instances over (p, n) in {{2,3}} x {{1,2}}"))
}

// ---------- 7: cohomology comparison ----------

/// Rank over F_p of differential i by Gaussian elimination on residues.
fn rank_mod_p(cx: &CochainComplex, i: usize, p: u64) -> usize {
    let a = cx.diff(i);
    let mut m: Vec<Vec<u64>> = (0..a.rows()).map(|r| (0..a.cols()).map(|c| a.get(r, c) % p).collect()).collect();
    let mut rank = 0;
    for col in 0..a.cols() {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else { continue };
        m.swap(rank, piv);
        let inv = (1..p).find(|x| x * m[rank][col] % p == 1).expect("p is prime");
        for r in 0..m.len() {
            if r != rank && m[r][col] != 0 {
                let f = m[r][col] * inv % p;
                let pivot = m[rank].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot) {
                    *x = (*x + p * p - f * y % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn hodge_tate(p: u32, b: u32) -> std::result::Result<(), String> {
    let md = modulus(p, 1);
    let c = PConnection::zero(md, 1, 1, 1).map_err(err)?;
    let params = Params::new(b, 2, 2);
    let r = compare_rho(&from_connection(&c), &c, &params).map_err(err)?;
    ensure(r.verdict() == Verdict::Pass, || format!("trivial crystal at p={p} B_T={b}: {:?}", r.verdict()))?;
    let window = 2 * b as usize + 1;
    for d in &r.base.degrees {
        ensure(d.de_rham == Divisors(vec![1; window]), || format!("H^{} = {:?}", d.degree, d.de_rham))?;
    }
    let dr = build_de_rham(&c, &params).map_err(err)?;
    let r0 = rank_mod_p(&dr, 0, p as u64);
    ensure(dr.dim(0) - r0 == window && dr.dim(1) - r0 == window, || {
        format!("de Rham kernel/cokernel over F_{p} differ from the window at B_T={b}")
    })?;
    let ca = build_bicomplex(&from_connection(&c), &c, &params).map_err(err)?.cech_alexander().map_err(err)?;
    let (c0, c1) = (rank_mod_p(&ca, 0, p as u64), rank_mod_p(&ca, 1, p as u64));
    ensure(ca.dim(0) - c0 == window && ca.dim(1) - c0 - c1 == window, || {
        format!("Cech-Alexander cohomology over F_{p} differs from the window at B_T={b}")
    })
}

fn cohomology(rng: &mut ChaCha8Rng) -> Outcome {
    let mut runs = 0;
    for p in [2u32, 3] {
        for n in 0..=1u32 {
            let md = modulus(p, n + 1);
            for rank in 1..=2 {
                for b in [3u32, 5] {
                    for _ in 0..2 {
                        let c = nilpotent_connection(rng, md, rank, 1, true).map_err(err)?;
                        let r = compare_rho(&from_connection(&c), &c, &Params::new(b, 2, 2)).map_err(err)?;
                        ensure(r.verdict() == Verdict::Pass && r.stable(), || {
                            format!("p={p} n={n} rank={rank} B_T={b} phi={:?}: {:?}", c.phi()[0], r.verdict())
                        })?;
                        runs += 1;
                    }
                }
            }
        }
        for b in [3u32, 5] {
            hodge_tate(p, b)?;
        }
    }
    Ok(format!("{runs} grid runs stable under window growth; Hodge-Tate case matches F_p elimination"))
}

// ---------- 8: several delta-structures ----------

fn sigma(rng: &mut ChaCha8Rng) -> Outcome {
    let mut instances = 0;
    for s in 0..12usize {
        let (p, n, rank) = ([2u32, 3][s % 2], (s / 2 % 2) as u32, 1 + s / 4 % 2);
        let md = modulus(p, n + 1);
        let show = format!("p={p} n={n} rank={rank}");
        let sc = sigma_connection(rng, md, rank).map_err(err)?;
        ensure(sigma_cocycle_check(&sc, None).map_err(err)?.holds(), || format!("{show}: cocycle fails"))?;
        let single = SigmaConnection::from_connection(&sigma_restriction(&sc).map_err(err)?);
        let wider = sigma_base_change(&single, 1).map_err(err)?;
        ensure(sigma_cocycle_check(&wider, None).map_err(err)?.holds(), || format!("{show}: base change cocycle"))?;
        for (what, x) in [("h=2", &sc), ("base change", &wider)] {
            let v = sigma_compare(x, &Params::new(3, 2, 2)).map_err(err)?.verdict();
            ensure(v == Verdict::Pass, || format!("{show}: {what} comparison gave {v:?}"))?;
        }
        instances += 1;
    }
    Ok(format!("{instances} instances with h = 2; restriction base-changed back to h = 2 also passes"))
}

struct Criterion {
    number: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn(&mut ChaCha8Rng) -> Outcome,
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { number: 1, name: "Witt vector laws", budget: secs(10), run: witt_laws },
        Criterion { number: 2, name: "Joyal coordinates", budget: None, run: joyal },
        Criterion { number: 3, name: "congruent delta-structures", budget: secs(30), run: congruence },
        Criterion { number: 4, name: "prismatic envelope", budget: secs(120), run: envelope },
        Criterion { number: 5, name: "stratifications", budget: secs(60), run: stratification },
        Criterion { number: 6, name: "comparison isomorphism", budget: None, run: comparison },
        Criterion { number: 7, name: "cohomology comparison", budget: secs(300), run: cohomology },
        Criterion { number: 8, name: "several delta-structures", budget: None, run: sigma },
    ];
    let mut failed = 0;
    for c in &criteria {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed + c.number as u64);
        let start = Instant::now();
        let outcome = (c.run)(&mut rng);
        let took = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(_), Some(b)) if took > b => Err(format!("took {took:.1?}, over the {b:?} budget")),
            (o, _) => o,
        };
        let budget = c.budget.map(|b| format!(" / {b:?}")).unwrap_or_default();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({}) [{took:.2?}{budget}]: {detail}", c.number, c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {} ({}) [{took:.2?}{budget}]: {why}", c.number, c.name);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
