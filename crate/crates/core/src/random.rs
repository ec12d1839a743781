//! Seedable generators for test instances: Laurent polynomials, congruent
//! pairs of delta-structures, commuting nilpotent connections and
//! deliberately broken stratifications.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cosimplicial::Flavor;
use crate::crystals::{from_connection, Matrix, PConnection, SigmaConnection, Stratification};
use crate::delta::DeltaStructure;
use crate::error::Result;
use crate::laurent::{LaurentPoly, Mono};
use crate::ring::Mat;
use crate::scalar::Modulus;

/// Shape of a random Laurent polynomial.
#[derive(Clone, Debug)]
pub struct PolyShape {
    pub max_terms: usize,
    pub exponents: RangeInclusive<i32>,
    pub coeffs: RangeInclusive<i64>,
}

impl Default for PolyShape {
    fn default() -> Self {
        Self {
            max_terms: 3,
            exponents: -1..=2,
            coeffs: -3..=3,
        }
    }
}

pub fn laurent<R: Rng + ?Sized>(rng: &mut R, md: Modulus, nvars: usize, shape: &PolyShape) -> LaurentPoly {
    let mut f = LaurentPoly::zero(md, nvars);
    for _ in 0..rng.gen_range(0..=shape.max_terms) {
        let mut e: Mono = [0; 4];
        for x in e.iter_mut().take(nvars) {
            *x = rng.gen_range(shape.exponents.clone());
        }
        f.add_term(e, rng.gen_range(shape.coeffs.clone()) as i128);
    }
    f
}

/// Like `laurent`, but with a unit constant term so the result is nonzero mod p.
pub fn laurent_unit<R: Rng + ?Sized>(rng: &mut R, md: Modulus, nvars: usize, shape: &PolyShape) -> LaurentPoly {
    let p = md.p() as i128;
    let f = laurent(rng, md, nvars, shape);
    let c0 = f.constant_term().residue();
    let unit = rng.gen_range(1..p);
    f.add(&LaurentPoly::constant(md, nvars, unit - c0))
}

pub fn delta_structure<R: Rng + ?Sized>(rng: &mut R, md: Modulus, d: usize) -> Result<DeltaStructure> {
    let shape = PolyShape::default();
    DeltaStructure::new((0..d).map(|_| laurent(rng, md, d, &shape)).collect())
}

/// delta_2 = delta_1 + p^m u with u a unit mod p on the first generator, so
/// the pair is congruent to order exactly m (for m below the precision).
pub fn congruent_pair<R: Rng + ?Sized>(
    rng: &mut R,
    md: Modulus,
    d: usize,
    m: u32,
) -> Result<(DeltaStructure, DeltaStructure)> {
    let d1 = delta_structure(rng, md, d)?;
    let d2 = perturb(rng, &d1, m)?;
    Ok((d1, d2))
}

/// A structure congruent to `ds` to order exactly m.
pub fn perturb<R: Rng + ?Sized>(rng: &mut R, ds: &DeltaStructure, m: u32) -> Result<DeltaStructure> {
    let shape = PolyShape::default();
    let d = ds.d();
    let images = ds
        .images()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let md = g.modulus();
            let h = if i == 0 {
                laurent_unit(rng, md, d, &shape)
            } else {
                laurent(rng, md, d, &shape)
            };
            h.mul_p_pow(m).map(|h| g.add(&h))
        })
        .collect::<Result<Vec<_>>>()?;
    DeltaStructure::new(images)
}

/// Unit lower triangular g and its inverse, for rank at most 3.
fn conjugator<R: Rng + ?Sized>(rng: &mut R, md: Modulus, nvars: usize, r: usize) -> (Matrix, Matrix) {
    let one = LaurentPoly::constant(md, nvars, 1);
    let l = Mat::from_fn(r, r, |i, j| {
        let c = if i > j { rng.gen_range(-2..=2) } else { 0 };
        LaurentPoly::constant(md, nvars, c)
    });
    let id = Mat::identity(r, &one);
    let l2 = l.mul(&l);
    (id.add(&l), id.sub(&l).add(&l2))
}

/// Entries of a random matrix: constants, or a + b T_1 when `constant` is false.
fn entry<R: Rng + ?Sized>(rng: &mut R, md: Modulus, nvars: usize, constant: bool) -> LaurentPoly {
    let a = LaurentPoly::constant(md, nvars, rng.gen_range(-3..=3));
    if constant {
        return a;
    }
    a.add(&LaurentPoly::var(md, nvars, 0).scale(rng.gen_range(-2..=2)))
}

/// A commuting nilpotent tuple over Z/p^N[T^{+-1}] in d variables:
/// phi_1 = g U g^-1 + p A with U strictly upper triangular, and
/// phi_i = c_i phi_1 + p b_i for i > 1.
pub fn nilpotent_connection<R: Rng + ?Sized>(
    rng: &mut R,
    md: Modulus,
    rank: usize,
    d: usize,
    constant: bool,
) -> Result<PConnection> {
    let p = md.p() as i128;
    let (g, g_inv) = conjugator(rng, md, d, rank);
    let u = Mat::from_fn(rank, rank, |i, j| {
        if j > i {
            entry(rng, md, d, constant)
        } else {
            LaurentPoly::zero(md, d)
        }
    });
    let a = Mat::from_fn(rank, rank, |_, _| entry(rng, md, d, constant).scale(p));
    let phi1 = g.mul(&u).mul(&g_inv).add(&a);
    let one = LaurentPoly::constant(md, d, 1);
    let mut phi = vec![phi1.clone()];
    for _ in 1..d {
        let c = LaurentPoly::constant(md, d, rng.gen_range(-2..=2));
        let b = LaurentPoly::constant(md, d, p * rng.gen_range(-2..=2));
        phi.push(phi1.scale(&c).add(&Mat::identity(rank, &one).scale(&b)));
    }
    PConnection::new(phi)
}

/// Two structures, each a multiple of one nilpotent phi.
pub fn sigma_connection<R: Rng + ?Sized>(rng: &mut R, md: Modulus, rank: usize) -> Result<SigmaConnection> {
    let c = nilpotent_connection(rng, md, rank, 1, true)?;
    let p = md.p() as i128;
    let one = LaurentPoly::constant(md, 1, 1);
    let id = Mat::identity(rank, &one);
    let phis = (0..2)
        .map(|_| {
            let s = LaurentPoly::constant(md, 1, rng.gen_range(-2..=2));
            let b = LaurentPoly::constant(md, 1, p * rng.gen_range(-1..=1));
            vec![c.phi()[0].scale(&s).add(&id.scale(&b))]
        })
        .collect();
    SigmaConnection::new(phis)
}

/// Ways of breaking the stratification of a valid connection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corruption {
    /// theta_0 moved off the identity.
    Unit,
    /// A second-order term that is not the square of a first-order one.
    SecondOrder,
    /// A unit added to a first-order term, which is then not nilpotent mod p.
    NotNilpotent,
}

impl Corruption {
    pub const ALL: [Corruption; 3] = [Corruption::Unit, Corruption::SecondOrder, Corruption::NotNilpotent];
}

/// The stratification of `c` with one coefficient altered by a unit matrix unit.
pub fn corrupt<R: Rng + ?Sized>(rng: &mut R, c: &PConnection, kind: Corruption) -> Result<Stratification> {
    let s = from_connection(c);
    let (d, r) = (c.d(), c.rank());
    let md = c.modulus();
    let nvars = c.phi()[0].get(0, 0).nvars();
    let zero = LaurentPoly::zero(md, nvars);
    let mut theta: BTreeMap<Vec<u32>, Matrix> = s.terms().map(|(m, t)| (m.clone(), t.clone())).collect();
    let axis = rng.gen_range(0..d);
    let mut idx = vec![0u32; d];
    match kind {
        Corruption::Unit => {}
        Corruption::SecondOrder => idx[axis] = 2,
        Corruption::NotNilpotent => idx[axis] = 1,
    }
    let (i, j) = (rng.gen_range(0..r), rng.gen_range(0..r));
    let unit = *[1i128, -1].choose(rng).expect("nonempty");
    let mut bump = Mat::zeros(r, r, &zero);
    let kick = if kind == Corruption::NotNilpotent { (i, i) } else { (i, j) };
    bump.set(kick.0, kick.1, LaurentPoly::constant(md, nvars, unit));
    let slot = theta.entry(idx).or_insert_with(|| Mat::zeros(r, r, &zero));
    *slot = slot.add(&bump);
    Stratification::new(Flavor::Plain, d, theta)
}
