//! p-typical Witt vectors of finite length over the coefficient rings of
//! this crate. Ring operations evaluate the cached universal polynomials, so
//! they work verbatim in characteristic p where the ghost map is not injective.

use std::fmt;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::ring::{ExactInt, PadicRing, Ring};
use crate::scalar::{Modulus, PadicScalar};
use crate::universal::{universal, MPoly, WittOp, MAX_WITT_INDEX};

#[derive(Clone, Debug, PartialEq)]
pub struct WittVec<R> {
    p: u32,
    entries: Vec<R>,
}

impl<R: PadicRing> WittVec<R> {
    pub fn new(p: u32, entries: Vec<R>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("Witt vector of length 0".into()));
        }
        if entries.len() > MAX_WITT_INDEX + 1 {
            return Err(Error::LengthTooLarge {
                len: entries.len(),
                max: MAX_WITT_INDEX + 1,
            });
        }
        Ok(Self { p, entries })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entries(&self) -> &[R] {
        &self.entries
    }

    pub fn zero_like(&self) -> Self {
        let z = self.entries[0].zero_like();
        Self {
            p: self.p,
            entries: vec![z; self.len()],
        }
    }

    pub fn one_like(&self) -> Self {
        let mut w = self.zero_like();
        w.entries[0] = self.entries[0].one_like();
        w
    }

    /// Teichmuller representative [x] = (x, 0, ..., 0).
    pub fn teichmuller(p: u32, x: R, len: usize) -> Result<Self> {
        let z = x.zero_like();
        let mut entries = vec![z; len];
        entries[0] = x;
        Self::new(p, entries)
    }

    /// w_n = sum_i p^i a_i^{p^{n-i}}.
    pub fn ghost(&self) -> Vec<R> {
        ghost_of(self.p, &self.entries)
    }

    /// Inverse of the ghost map for p-torsion-free coefficients.
    pub fn from_ghost(p: u32, g: &[R]) -> Result<Self> {
        let mut a: Vec<R> = Vec::with_capacity(g.len());
        for (n, gn) in g.iter().enumerate() {
            let mut rest = gn.clone();
            for (i, ai) in a.iter().enumerate() {
                let t = ai.pow((p as u64).pow((n - i) as u32));
                rest = rest.sub(&t.mul(&t.bigint_like(&BigInt::from(p).pow(i as u32))));
            }
            let an = rest.div_p_pow(n as u32).map_err(|e| match e {
                Error::NotDivisible { .. } => Error::NonIntegral { index: n },
                other => other,
            })?;
            a.push(an);
        }
        Self::new(p, a)
    }

    fn check_compatible(&self, o: &Self) -> Result<()> {
        if self.p != o.p || self.len() != o.len() {
            return Err(Error::Mismatch(format!(
                "Witt vectors of length {} (p = {}) and {} (p = {})",
                self.len(),
                self.p,
                o.len(),
                o.p
            )));
        }
        Ok(())
    }

    fn binary(&self, o: &Self, op: WittOp) -> Result<Self> {
        self.check_compatible(o)?;
        let polys = universal(self.p, op, self.len())?;
        let vars: Vec<R> = self.entries.iter().chain(&o.entries).cloned().collect();
        let mut ev = Evaluator::new(&vars);
        Ok(Self {
            p: self.p,
            entries: polys.iter().map(|f| ev.eval(f)).collect(),
        })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.binary(o, WittOp::Sum)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.binary(o, WittOp::Product)
    }

    pub fn neg(&self) -> Result<Self> {
        let polys = universal(self.p, WittOp::Negation, self.len())?;
        let mut ev = Evaluator::new(&self.entries);
        Ok(Self {
            p: self.p,
            entries: polys.iter().map(|f| ev.eval(f)).collect(),
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg()?)
    }

    /// F: W_{L+1} -> W_L, characterized by ghost(F w)_n = ghost(w)_{n+1}.
    pub fn frobenius(&self) -> Result<Self> {
        if self.len() < 2 {
            return Err(Error::InvalidParameter("Frobenius needs length at least 2".into()));
        }
        let polys = universal(self.p, WittOp::Frobenius, self.len())?;
        let mut ev = Evaluator::new(&self.entries);
        Ok(Self {
            p: self.p,
            entries: polys.iter().map(|f| ev.eval(f)).collect(),
        })
    }

    /// V(a_0, a_1, ...) = (0, a_0, a_1, ...).
    pub fn verschiebung(&self) -> Result<Self> {
        let mut entries = vec![self.entries[0].zero_like()];
        entries.extend(self.entries.iter().cloned());
        Self::new(self.p, entries)
    }

    /// Restriction to the first `len` entries.
    pub fn restrict(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::InvalidParameter(format!(
                "cannot restrict length {} to {len}",
                self.len()
            )));
        }
        Self::new(self.p, self.entries[..len].to_vec())
    }

    /// Multiplication by an integer through repeated Witt addition.
    pub fn scalar_mul(&self, n: u32) -> Result<Self> {
        let mut acc = self.zero_like();
        for _ in 0..n {
            acc = acc.add(self)?;
        }
        Ok(acc)
    }
}

pub fn ghost_of<R: Ring>(p: u32, a: &[R]) -> Vec<R> {
    (0..a.len())
        .map(|n| {
            let mut w = a[0].zero_like();
            for (i, ai) in a.iter().enumerate().take(n + 1) {
                let t = ai.pow((p as u64).pow((n - i) as u32));
                w = w.add(&t.mul(&t.bigint_like(&BigInt::from(p).pow(i as u32))));
            }
            w
        })
        .collect()
}

/// Evaluates universal polynomials with cached powers of the inputs.
struct Evaluator<'a, R> {
    vars: &'a [R],
    powers: Vec<Vec<R>>,
}

impl<'a, R: Ring> Evaluator<'a, R> {
    fn new(vars: &'a [R]) -> Self {
        Self {
            vars,
            powers: vars.iter().map(|v| vec![v.one_like()]).collect(),
        }
    }

    fn power(&mut self, i: usize, e: u32) -> &R {
        while self.powers[i].len() <= e as usize {
            let next = self.powers[i].last().unwrap().mul(&self.vars[i]);
            self.powers[i].push(next);
        }
        &self.powers[i][e as usize]
    }

    fn eval(&mut self, f: &MPoly) -> R {
        let proto = self.vars[0].clone();
        let mut acc = proto.zero_like();
        for (e, c) in &f.terms {
            let c = proto.bigint_like(c);
            if c.is_zero() {
                continue;
            }
            let mut t = c;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    let pw = self.power(i, k).clone();
                    t = t.mul(&pw);
                    if t.is_zero() {
                        break;
                    }
                }
            }
            acc = acc.add(&t);
        }
        acc
    }
}

impl WittVec<LaurentPoly> {
    /// Equality in W(S)/{(0, a_1^p, a_2^p, ...)} for S = F_p[T^{+-1}].
    pub fn modp_class_equal(&self, o: &Self) -> Result<bool> {
        for x in self.entries.iter().chain(&o.entries) {
            if x.prec() != 1 {
                return Err(Error::NotReducedRing);
            }
        }
        let d = self.sub_by_lifting(o)?;
        Ok(d.entries[0].is_zero() && d.entries[1..].iter().all(|x| x.is_pth_power_mod_p()))
    }

    /// self - o over F_p[T^{+-1}], computed on lifts to Z/p^L[T^{+-1}]
    /// through ghost components. Entry n of the difference only depends
    /// on the inputs mod p, and solving the ghost equation for it divides
    /// by p^n, so precision L leaves it known mod p.
    pub fn sub_by_lifting(&self, o: &Self) -> Result<Self> {
        self.check_compatible(o)?;
        let len = self.len();
        let lift_md = Modulus::new(self.p, len as u32)?;
        let lift = |x: &LaurentPoly| LaurentPoly::from_terms(lift_md, x.nvars(), x.terms().map(|(e, c)| (*e, *c)));
        let a: Vec<LaurentPoly> = self.entries.iter().map(lift).collect();
        let b: Vec<LaurentPoly> = o.entries.iter().map(lift).collect();
        let w: Vec<LaurentPoly> = ghost_of(self.p, &a)
            .iter()
            .zip(ghost_of(self.p, &b))
            .map(|(x, y)| x.sub(&y))
            .collect();
        let p = self.p as u64;
        let mut c: Vec<LaurentPoly> = Vec::with_capacity(len);
        for (n, wn) in w.iter().enumerate() {
            let mut rest = wn.clone();
            for (i, ci) in c.iter().enumerate() {
                rest = rest.sub(&ci.pow(p.pow((n - i) as u32)).mul_p_pow(i as u32)?);
            }
            let cn = rest.exact_div_p(n as u32)?.mod_p();
            c.push(lift(&cn));
        }
        Self::new(self.p, c.iter().map(LaurentPoly::mod_p).collect())
    }
}

/// Whether the reduction mod p lies in the image of Frobenius.
pub trait Good {
    fn is_good(&self) -> bool;
}

impl Good for ExactInt {
    fn is_good(&self) -> bool {
        true
    }
}

impl Good for PadicScalar {
    fn is_good(&self) -> bool {
        true
    }
}

impl Good for LaurentPoly {
    fn is_good(&self) -> bool {
        self.is_pth_power_mod_p()
    }
}

/// a ~ b iff a - b is good.
pub fn good_equivalent<R: Ring + Good>(a: &R, b: &R) -> bool {
    a.sub(b).is_good()
}

impl<R: fmt::Display> fmt::Display for WittVec<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Display for ExactInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(p: u32, xs: &[i64]) -> WittVec<ExactInt> {
        WittVec::new(p, xs.iter().map(|&x| ExactInt::new(p, x)).collect()).unwrap()
    }

    #[test]
    fn ghost_and_inverse() {
        let w = ints(2, &[2, 3]);
        assert_eq!(w.ghost(), vec![ExactInt::new(2, 2), ExactInt::new(2, 10)]);
        let g = vec![ExactInt::new(2, 2), ExactInt::new(2, 2)];
        assert_eq!(WittVec::from_ghost(2, &g).unwrap(), ints(2, &[2, -1]));
        let bad = vec![ExactInt::new(2, 0), ExactInt::new(2, 1)];
        assert_eq!(
            WittVec::from_ghost(2, &bad),
            Err(Error::NonIntegral { index: 1 })
        );
    }

    #[test]
    fn small_sums_and_products() {
        assert_eq!(ints(2, &[1, 0]).add(&ints(2, &[1, 0])).unwrap(), ints(2, &[2, -1]));
        assert_eq!(ints(2, &[0, 1]).mul(&ints(2, &[0, 1])).unwrap(), ints(2, &[0, 2]));
    }

    #[test]
    fn frobenius_and_verschiebung() {
        assert_eq!(ints(3, &[1, 1]).frobenius().unwrap(), ints(3, &[4]));
        let v5 = ints(2, &[5]).verschiebung().unwrap();
        assert_eq!(v5.frobenius().unwrap(), ints(2, &[10]));
    }

    #[test]
    fn quotient_class_over_f2() {
        let md = Modulus::new(2, 1).unwrap();
        let t = LaurentPoly::var(md, 1, 0);
        let z = t.zero_like();
        let a = WittVec::new(2, vec![t.clone(), z.clone()]).unwrap();
        let b = WittVec::new(2, vec![t.clone(), t.mul(&t)]).unwrap();
        let c = WittVec::new(2, vec![t.clone(), t.clone()]).unwrap();
        assert!(a.modp_class_equal(&b).unwrap());
        assert!(!a.modp_class_equal(&c).unwrap());
        assert!(a.modp_class_equal(&a).unwrap());
        let md3 = Modulus::new(2, 3).unwrap();
        let t3 = LaurentPoly::var(md3, 1, 0);
        let w = WittVec::new(2, vec![t3.clone(), t3]).unwrap();
        assert_eq!(w.modp_class_equal(&w), Err(Error::NotReducedRing));
    }

    #[test]
    fn good_elements() {
        let md = Modulus::new(2, 1).unwrap();
        let t = LaurentPoly::var(md, 1, 0);
        assert!(!t.is_good());
        assert!(t.pow(4).add(&t.pow(2)).is_good());
        assert!(ExactInt::new(2, 7).is_good());
    }
}
