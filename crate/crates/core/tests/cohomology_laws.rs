use prismatic_core::cohomology::{
    build_bicomplex, build_de_rham, compare_rho, sigma_compare, CochainComplex, Params,
};
use prismatic_core::crystals::{from_connection, sigma_base_change, PConnection, SigmaConnection};
use prismatic_core::envelope::Verdict;
use prismatic_core::linalg::Divisors;
use prismatic_core::{LaurentPoly, Mat, Modulus};
use proptest::prelude::*;

fn constant_matrix(md: Modulus, rows: &[[i128; 2]], r: usize) -> Mat<LaurentPoly> {
    Mat::from_fn(r, r, |i, j| LaurentPoly::constant(md, 1, rows[i][j]))
}

/// g U g^-1 + p A with U strictly upper triangular, nilpotent mod p.
fn nilpotent(md: Modulus, r: usize, u: i128, s: i128, a: [i128; 4]) -> PConnection {
    let p = md.p() as i128;
    let rows = if r == 1 {
        [[p * a[0], 0], [0, 0]]
    } else {
        // g = [[1, 0], [s, 1]], g U g^-1 = [[-s u, u], [-s^2 u, s u]]
        [
            [-s * u + p * a[0], u + p * a[1]],
            [-s * s * u + p * a[2], s * u + p * a[3]],
        ]
    };
    PConnection::new(vec![constant_matrix(md, &rows, r)]).unwrap()
}

fn rank_mod_p(cx: &CochainComplex, i: usize, p: u64) -> usize {
    let a = cx.diff(i);
    let mut m: Vec<Vec<u64>> = (0..a.rows()).map(|r| (0..a.cols()).map(|c| a.get(r, c) % p).collect()).collect();
    let mut rank = 0;
    for col in 0..a.cols() {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else { continue };
        m.swap(rank, piv);
        let inv = (1..p).find(|x| x * m[rank][col] % p == 1).unwrap();
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

#[test]
fn hodge_tate_case_gives_windowed_ring() {
    for p in [2u32, 3] {
        let md = Modulus::new(p, 1).unwrap();
        for b in [3u32, 5] {
            let c = PConnection::zero(md, 1, 1, 1).unwrap();
            let params = Params::new(b, 2, 2);
            let r = compare_rho(&from_connection(&c), &c, &params).unwrap();
            assert_eq!(r.verdict(), Verdict::Pass);
            let window = vec![1; 2 * b as usize + 1];
            for d in &r.base.degrees {
                assert_eq!(d.de_rham, Divisors(window.clone()));
                assert_eq!(d.cech_alexander, Divisors(window.clone()));
            }
            // kernel and cokernel over F_p by elimination
            let dr = build_de_rham(&c, &params).unwrap();
            let r0 = rank_mod_p(&dr, 0, p as u64);
            assert_eq!(dr.dim(0) - r0, window.len());
            assert_eq!(dr.dim(1) - r0, window.len());
            let bic = build_bicomplex(&from_connection(&c), &c, &params).unwrap();
            let ca = bic.cech_alexander().unwrap();
            let (c0, c1) = (rank_mod_p(&ca, 0, p as u64), rank_mod_p(&ca, 1, p as u64));
            assert_eq!(ca.dim(0) - c0, window.len());
            assert_eq!(ca.dim(1) - c0 - c1, window.len());
        }
    }
}

#[test]
fn first_form_column_is_acyclic_in_low_degrees() {
    let md = Modulus::new(2, 2).unwrap();
    let c = nilpotent(md, 2, 1, 1, [0, 1, 0, 0]);
    let bic = build_bicomplex(&from_connection(&c), &c, &Params::new(3, 2, 3)).unwrap();
    let diffs: Vec<_> = (0..2).map(|m| bic.d1(m, 1).unwrap().clone()).collect();
    let dims = vec![diffs[0].cols(), diffs[1].cols(), diffs[1].rows()];
    let column = CochainComplex::new(md, dims, diffs, 1).unwrap();
    assert!(column.divisors(0).unwrap().0.is_empty());
    assert!(column.divisors(1).unwrap().0.is_empty());
}

#[test]
fn direct_sums_add() {
    let md = Modulus::new(2, 2).unwrap();
    let params = Params::new(3, 2, 2);
    let a = nilpotent(md, 1, 0, 0, [1, 0, 0, 0]);
    let b = PConnection::zero(md, 1, 1, 1).unwrap();
    let sum = PConnection::new(vec![constant_matrix(md, &[[2, 0], [0, 0]], 2)]).unwrap();
    for i in 0..=1 {
        let da = build_de_rham(&a, &params).unwrap().divisors(i).unwrap();
        let db = build_de_rham(&b, &params).unwrap().divisors(i).unwrap();
        let ds = build_de_rham(&sum, &params).unwrap().divisors(i).unwrap();
        assert_eq!(ds, da.direct_sum(&db));
    }
}

fn grid_case(p: u32, n: u32, r: usize, b: u32, u: i128, s: i128, a: [i128; 4]) {
    let md = Modulus::new(p, n + 1).unwrap();
    let c = nilpotent(md, r, u, s, a);
    let rep = compare_rho(&from_connection(&c), &c, &Params::new(b, 2, 2)).unwrap();
    assert_eq!(rep.verdict(), Verdict::Pass, "{rep:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn three_complexes_agree(
        p in prop_oneof![Just(2u32), Just(3)], n in 0u32..2, r in 1usize..3,
        u in -2i128..3, s in -2i128..3, a in prop::array::uniform4(-2i128..3),
    ) {
        grid_case(p, n, r, 3, u, s, a);
    }

    #[test]
    fn bicomplex_laws(p in prop_oneof![Just(2u32), Just(3)], u in -2i128..3, s in -2i128..3, a in prop::array::uniform4(-2i128..3)) {
        let md = Modulus::new(p, 2).unwrap();
        let c = nilpotent(md, 2, u, s, a);
        let bic = build_bicomplex(&from_connection(&c), &c, &Params::new(2, 2, 3)).unwrap();
        prop_assert!(bic.checks().unwrap().holds());
        prop_assert!(bic.totalize().unwrap().is_complex().unwrap());
    }

    #[test]
    fn devissage_euler_lengths(p in prop_oneof![Just(2u32), Just(3)], r in 1usize..3, u in -2i128..3, s in -2i128..3, a in prop::array::uniform4(-2i128..3)) {
        // 0 -> pM -> M -> M/p -> 0 with pM = M mod p^(N-1)
        let params = Params::new(3, 2, 2);
        let euler = |prec: u32| {
            let md = Modulus::new(p, prec).unwrap();
            build_de_rham(&nilpotent(md, r, u, s, a), &params).unwrap().euler_length().unwrap()
        };
        prop_assert_eq!(euler(2), euler(1) + euler(1));
    }

    #[test]
    fn sigma_base_change_preserves_cohomology(p in prop_oneof![Just(2u32), Just(3)], n in 0u32..2, u in -2i128..3, a in prop::array::uniform4(-2i128..3)) {
        let md = Modulus::new(p, n + 1).unwrap();
        let c = nilpotent(md, 2, u, 0, a);
        let sc = sigma_base_change(&SigmaConnection::from_connection(&c), 1).unwrap();
        let r = sigma_compare(&sc, &Params::new(3, 2, 2)).unwrap();
        prop_assert_eq!(r.verdict(), Verdict::Pass, "{:?}", r);
    }
}

#[test]
fn wider_window_grid() {
    for p in [2u32, 3] {
        for n in 0..2 {
            grid_case(p, n, 2, 5, 1, 1, [1, 0, 1, 1]);
        }
    }
}

#[test]
fn two_nonzero_structures() {
    let md = Modulus::new(2, 2).unwrap();
    let f = constant_matrix(md, &[[2, 0], [0, 0]], 1);
    let sc = SigmaConnection::new(vec![vec![f.clone()], vec![f]]).unwrap();
    let r = sigma_compare(&sc, &Params::new(3, 2, 2)).unwrap();
    assert_eq!(r.verdict(), Verdict::Pass, "{r:?}");
}

#[test]
fn mismatched_stratification_is_caught() {
    let md = Modulus::new(2, 2).unwrap();
    let c = nilpotent(md, 1, 0, 0, [1, 0, 0, 0]);
    let other = PConnection::zero(md, 1, 1, 1).unwrap();
    let r = compare_rho(&from_connection(&other), &c, &Params::new(3, 2, 2)).unwrap();
    assert!(!r.base.bicomplex.commute);
    assert_eq!(r.verdict(), Verdict::Fail);
}
