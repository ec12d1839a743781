use prismatic_core::delta::{
    congruence_order, sections_agree, verify_high_congruence, verify_joyal_congruence,
};
use prismatic_core::laurent::Mono;
use prismatic_core::witt::{good_equivalent, Good};
use prismatic_core::{DeltaStructure, LaurentPoly, Modulus};
use proptest::prelude::*;

type Terms = Vec<(i32, i64)>;

fn poly(p: u32, n: u32, terms: &Terms) -> LaurentPoly {
    let md = Modulus::new(p, n).unwrap();
    let mut f = LaurentPoly::zero(md, 1);
    for &(e, c) in terms {
        let m: Mono = [e, 0, 0, 0];
        f.add_term(m, c as i128);
    }
    f
}

fn terms(max: usize) -> impl Strategy<Value = Terms> {
    prop::collection::vec((-2i32..3, -4i64..5), 0..max)
}

fn prime() -> impl Strategy<Value = u32> {
    prop_oneof![Just(2u32), Just(3u32)]
}

/// C(p, i) / p as an integer.
fn binom_over_p(p: u32, i: u32) -> i128 {
    let num: i128 = (0..i).map(|j| (p - j) as i128).product();
    let den: i128 = (1..=i).map(|j| j as i128).product();
    num / den / p as i128
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn frobenius_is_a_ring_map_lifting_pth_power(p in prime(), g in terms(3), a in terms(3), b in terms(3)) {
        let n = 5;
        let d = DeltaStructure::new(vec![poly(p, n, &g)]).unwrap();
        let (a, b) = (poly(p, n, &a), poly(p, n, &b));
        let (fa, fb) = (d.phi_of(&a).unwrap(), d.phi_of(&b).unwrap());
        prop_assert_eq!(d.phi_of(&a.mul(&b)).unwrap(), fa.mul(&fb));
        prop_assert_eq!(d.phi_of(&a.add(&b)).unwrap(), fa.add(&fb));
        prop_assert_eq!(fa.mod_p(), a.pow(p as u64).mod_p());
        // delta_of cross-checks the structural computation internally
        let da = d.delta_of(&a).unwrap();
        prop_assert_eq!(da.mul_p_pow(1).unwrap(), fa.sub(&a.pow(p as u64)).truncate(n).unwrap());
    }

    #[test]
    fn joyal_ghost_is_frobenius_orbit(p in prime(), g in terms(2), x in terms(3), m in 1usize..=2) {
        let n = 5;
        let d = DeltaStructure::new(vec![poly(p, n, &g)]).unwrap();
        let x = poly(p, n, &x);
        let j = d.joyal_coords(&x, m).unwrap();
        prop_assert_eq!(j.entries.len(), m + 2);
        prop_assert_eq!(&j.entries[1], &d.delta_of(&x).unwrap());
        let ghost = j.ghost(p).unwrap();
        for (k, w) in ghost.iter().enumerate() {
            prop_assert_eq!(w, &d.phi_iter(&x, k as u32).unwrap());
        }
    }

    #[test]
    fn delta_preserves_good_elements(p in prime(), g in terms(2), b in terms(3), c in terms(3)) {
        let n = 4;
        let d = DeltaStructure::new(vec![poly(p, n, &g)]).unwrap();
        let a = poly(p, n, &b).pow(p as u64).add(&poly(p, n, &c).scale(p as i128));
        prop_assert!(d.delta_of(&a).unwrap().mod_p().is_good());
    }

    #[test]
    fn delta_of_perturbed_sum(p in prime(), g in terms(2), a in terms(3), b in terms(2), c in terms(2)) {
        let n = 4;
        let d = DeltaStructure::new(vec![poly(p, n, &g)]).unwrap();
        let (a, b, c) = (poly(p, n, &a), poly(p, n, &b), poly(p, n, &c));
        let lhs = d.delta_of(&a.add(&b.scale(p as i128)).add(&c.pow(p as u64))).unwrap();
        let mut rhs = d.delta_of(&a).unwrap();
        for i in 1..p {
            let t = a.pow(i as u64).mul(&c.pow((p * (p - i)) as u64)).scale(binom_over_p(p, i));
            rhs = rhs.sub(&t.truncate(n - 1).unwrap());
        }
        prop_assert!(good_equivalent(&lhs.mod_p(), &rhs.mod_p()));
    }

    #[test]
    fn congruent_structures_satisfy_the_congruences(
        p in prime(),
        g in terms(2),
        h in terms(2),
        r in terms(2),
        m in 1u32..=2,
    ) {
        let n = m + 3;
        let g = poly(p, n, &g);
        let h = poly(p, n, &h).mul_p_pow(m).unwrap();
        let (d1, d2) = (
            DeltaStructure::new(vec![g.clone()]).unwrap(),
            DeltaStructure::new(vec![g.add(&h)]).unwrap(),
        );
        let r = poly(p, n, &r);
        prop_assert!(congruence_order(&d1, &d2, std::slice::from_ref(&r)).unwrap() >= m);
        let hc = verify_high_congruence(&d1, &d2, &r, m, m).unwrap();
        prop_assert!(hc.holds(), "{:?}", hc);
        let jc = verify_joyal_congruence(&d1, &d2, &r, m).unwrap();
        prop_assert!(jc.holds(), "{:?}", jc);
        let s = sections_agree(&d1, &d2, m as usize, &[r]).unwrap();
        prop_assert!(s.agree);
    }
}

#[test]
fn order_zero_pair_has_different_sections() {
    let d1 = DeltaStructure::frobenius_monomial(2, 4, 1).unwrap();
    let d2 = DeltaStructure::new(vec![poly(2, 4, &vec![(1, 1)])]).unwrap();
    assert_eq!(congruence_order(&d1, &d2, &[]).unwrap(), 0);
    let t = poly(2, 4, &vec![(1, 1)]);
    let s = sections_agree(&d1, &d2, 1, &[t]).unwrap();
    assert!(!s.agree);
    assert_eq!(s.first_disagreement, Some((0, 1)));
}

#[test]
fn joyal_needs_enough_precision() {
    let d = DeltaStructure::frobenius_monomial(3, 3, 1).unwrap();
    let x = poly(3, 3, &vec![(1, 1)]);
    assert!(d.joyal_coords(&x, 2).is_err());
    assert!(d.joyal_coords(&x, 1).is_ok());
}
