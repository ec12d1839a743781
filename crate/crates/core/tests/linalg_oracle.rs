use std::collections::HashSet;

use prismatic_core::linalg::{homology, Divisors, ModMatrix};
use prismatic_core::Modulus;
use proptest::prelude::*;

fn all_vectors(q: i128, len: usize) -> Vec<Vec<i128>> {
    (0..q.pow(len as u32))
        .map(|mut x| {
            (0..len)
                .map(|_| {
                    let c = x % q;
                    x /= q;
                    c
                })
                .collect()
        })
        .collect()
}

fn apply(rows: &[Vec<i128>], x: &[i128], q: i128) -> Vec<i128> {
    rows.iter()
        .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum::<i128>().rem_euclid(q))
        .collect()
}

/// Divisors of ker/im from the sizes of its p^k-torsion, by enumeration.
fn oracle(p: i128, n: u32, b: usize, d_in: &[Vec<i128>], a: usize, d_out: &[Vec<i128>]) -> Divisors {
    let q = p.pow(n);
    let image: HashSet<Vec<i128>> = all_vectors(q, a).iter().map(|x| apply(d_in, x, q)).collect();
    let kernel: Vec<Vec<i128>> = all_vectors(q, b)
        .into_iter()
        .filter(|x| d_out.is_empty() || apply(d_out, x, q).iter().all(|&c| c == 0))
        .collect();
    let torsion = |k: u32| {
        let pk = p.pow(k);
        let hits = kernel
            .iter()
            .filter(|x| image.contains(&x.iter().map(|c| (c * pk).rem_euclid(q)).collect::<Vec<_>>()))
            .count();
        hits / image.len()
    };
    let logp = |mut x: usize| {
        let mut e = 0;
        while x > 1 {
            x /= p as usize;
            e += 1;
        }
        e
    };
    let mut out = Vec::new();
    let mut prev = 1;
    let mut at_least = Vec::new();
    for k in 1..=n {
        let t = torsion(k);
        at_least.push(logp(t / prev));
        prev = t;
    }
    for k in 0..n as usize {
        let next = at_least.get(k + 1).copied().unwrap_or(0);
        out.extend(std::iter::repeat_n(k as u32 + 1, at_least[k] - next));
    }
    out.sort_unstable();
    Divisors(out)
}

fn matrix(md: Modulus, rows: usize, cols: usize, data: &[Vec<i128>]) -> ModMatrix {
    let mut m = ModMatrix::zeros(md, rows, cols);
    for (i, r) in data.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            m.set(i, j, v);
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homology_matches_enumeration(
        (p, n) in prop_oneof![Just((2i128, 2u32)), Just((3, 2)), Just((2, 3))],
        a in 1usize..3, b in 1usize..4,
        seed in prop::collection::vec(0i128..27, 9),
        pick in prop::collection::vec(any::<prop::sample::Index>(), 0..3),
    ) {
        let q = p.pow(n);
        let d_in: Vec<Vec<i128>> = (0..b).map(|i| (0..a).map(|j| seed[i * 3 + j] % q).collect()).collect();
        // rows of d_out come from the left kernel of d_in, so the pair composes
        let left: Vec<Vec<i128>> = all_vectors(q, b)
            .into_iter()
            .filter(|w| (0..a).all(|j| (0..b).map(|i| w[i] * d_in[i][j]).sum::<i128>().rem_euclid(q) == 0))
            .collect();
        let d_out: Vec<Vec<i128>> = pick.iter().map(|ix| ix.get(&left).clone()).collect();
        let md = Modulus::new(p as u32, n).unwrap();
        let h = homology(&matrix(md, b, a, &d_in), &matrix(md, d_out.len(), b, &d_out)).unwrap();
        prop_assert_eq!(h.divisors, oracle(p, n, b, &d_in, a, &d_out));
    }
}
