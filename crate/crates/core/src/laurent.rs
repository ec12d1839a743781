//! Sparse Laurent polynomials over Z/p^N in at most `MAX_VARS` variables.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::ring::{PadicRing, Ring};
use crate::scalar::{Modulus, PadicScalar};

pub const MAX_VARS: usize = 4;

/// Exponent vector; entries past `nvars` are zero.
pub type Mono = [i32; MAX_VARS];

pub fn mono_add(a: &Mono, b: &Mono) -> Mono {
    let mut c = *a;
    for (x, y) in c.iter_mut().zip(b) {
        *x += y;
    }
    c
}

pub fn unit_mono(i: usize) -> Mono {
    let mut m = [0; MAX_VARS];
    m[i] = 1;
    m
}

#[derive(Clone, Debug)]
pub struct LaurentPoly {
    md: Modulus,
    nvars: usize,
    terms: BTreeMap<Mono, i128>,
}

impl LaurentPoly {
    pub fn zero(md: Modulus, nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} Laurent variables");
        Self {
            md,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn new(p: u32, prec: u32, nvars: usize) -> Result<Self> {
        if nvars > MAX_VARS {
            return Err(Error::InvalidParameter(format!(
                "{nvars} variables (at most {MAX_VARS})"
            )));
        }
        Ok(Self::zero(Modulus::new(p, prec)?, nvars))
    }

    pub fn constant(md: Modulus, nvars: usize, c: i128) -> Self {
        Self::monomial(md, nvars, [0; MAX_VARS], c)
    }

    pub fn monomial(md: Modulus, nvars: usize, exp: Mono, c: i128) -> Self {
        let mut f = Self::zero(md, nvars);
        f.add_term(exp, c);
        f
    }

    /// The variable T_{i+1}.
    pub fn var(md: Modulus, nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        Self::monomial(md, nvars, unit_mono(i), 1)
    }

    pub fn from_terms(md: Modulus, nvars: usize, terms: impl IntoIterator<Item = (Mono, i128)>) -> Self {
        let mut f = Self::zero(md, nvars);
        for (e, c) in terms {
            f.add_term(e, c);
        }
        f
    }

    pub fn add_term(&mut self, exp: Mono, c: i128) {
        debug_assert!(exp[self.nvars..].iter().all(|&e| e == 0));
        let c = self.md.reduce(c);
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(exp).or_insert(0);
        *entry = self.md.add(*entry, c);
        if *entry == 0 {
            self.terms.remove(&exp);
        }
    }

    pub fn p(&self) -> u32 {
        self.md.p()
    }

    pub fn prec(&self) -> u32 {
        self.md.prec()
    }

    pub fn modulus(&self) -> Modulus {
        self.md
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &i128)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exp: &Mono) -> PadicScalar {
        PadicScalar::from_modulus(self.md, self.terms.get(exp).copied().unwrap_or(0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| *e == [0; MAX_VARS])
    }

    pub fn constant_term(&self) -> PadicScalar {
        self.coeff(&[0; MAX_VARS])
    }

    fn common(&self, o: &Self) -> Modulus {
        assert_eq!(self.md.p(), o.md.p(), "polynomials over different primes");
        assert_eq!(self.nvars, o.nvars, "polynomials in different variables");
        if self.md.prec() <= o.md.prec() {
            self.md
        } else {
            o.md
        }
    }

    fn with_modulus(&self, md: Modulus) -> Self {
        if md == self.md {
            return self.clone();
        }
        Self::from_terms(md, self.nvars, self.terms.iter().map(|(e, c)| (*e, *c)))
    }

    pub fn add(&self, o: &Self) -> Self {
        let md = self.common(o);
        let mut out = self.with_modulus(md);
        for (e, c) in &o.terms {
            out.add_term(*e, *c);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let md = self.common(o);
        let mut out = self.with_modulus(md);
        for (e, c) in &o.terms {
            out.add_term(*e, -*c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self::from_terms(self.md, self.nvars, self.terms.iter().map(|(e, c)| (*e, -*c)))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let md = self.common(o);
        let mut acc: BTreeMap<Mono, i128> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let c = md.mul(*c1, *c2);
                if c == 0 {
                    continue;
                }
                let slot = acc.entry(mono_add(e1, e2)).or_insert(0);
                *slot = md.add(*slot, c);
            }
        }
        acc.retain(|_, c| *c != 0);
        Self {
            md,
            nvars: self.nvars,
            terms: acc,
        }
    }

    pub fn scale(&self, c: i128) -> Self {
        Self::from_terms(
            self.md,
            self.nvars,
            self.terms.iter().map(|(e, x)| (*e, self.md.mul(*x, self.md.reduce(c)))),
        )
    }

    pub fn scale_scalar(&self, c: &PadicScalar) -> Self {
        let md = if c.prec() < self.prec() { c.modulus() } else { self.md };
        let f = self.with_modulus(md);
        f.scale(c.residue())
    }

    /// Multiply by the monomial T^exp.
    pub fn shift(&self, exp: &Mono) -> Self {
        Self {
            md: self.md,
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (mono_add(e, exp), *c)).collect(),
        }
    }

    pub fn pow(&self, e: u64) -> Self {
        Ring::pow(self, e)
    }

    /// Reduce to a lower precision (no-op if already lower).
    pub fn truncate(&self, prec: u32) -> Result<Self> {
        if prec >= self.prec() {
            return Ok(self.clone());
        }
        Ok(self.with_modulus(self.md.with_prec(prec)?))
    }

    pub fn mod_p(&self) -> Self {
        self.truncate(1).expect("precision 1 is always valid")
    }

    /// Multiply by p^k; the precision grows by k.
    pub fn mul_p_pow(&self, k: u32) -> Result<Self> {
        let md = self.md.with_prec(self.prec() + k)?;
        let pk = (self.p() as i128).pow(k);
        Ok(Self::from_terms(md, self.nvars, self.terms.iter().map(|(e, c)| (*e, c * pk))))
    }

    /// Exact division by p^k; the precision drops by k.
    pub fn exact_div_p(&self, k: u32) -> Result<Self> {
        if k >= self.prec() {
            return Err(Error::PrecisionExhausted {
                what: format!("dividing a p^{} polynomial by p^{k}", self.prec()),
            });
        }
        let pk = (self.p() as i128).pow(k);
        if self.terms.values().any(|c| c % pk != 0) {
            return Err(Error::NotDivisible { k });
        }
        let md = self.md.with_prec(self.prec() - k)?;
        Ok(Self::from_terms(md, self.nvars, self.terms.iter().map(|(e, c)| (*e, c / pk))))
    }

    /// Minimum coefficient valuation, equal to the precision for zero.
    pub fn valuation(&self) -> u32 {
        self.terms
            .values()
            .map(|c| self.md.val(*c))
            .min()
            .unwrap_or(self.prec())
    }

    /// Partial derivative with respect to T_{i+1}.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.md, self.nvars);
        for (e, c) in &self.terms {
            if e[i] != 0 {
                let mut e2 = *e;
                e2[i] -= 1;
                out.add_term(e2, c * e[i] as i128);
            }
        }
        out
    }

    /// Inverse of an element whose reduction mod p is a unit times a monomial.
    pub fn invert(&self) -> Result<Self> {
        let lead: Vec<_> = self.terms.iter().filter(|(_, c)| *c % self.p() as i128 != 0).collect();
        if lead.len() != 1 {
            return Err(Error::NotUnit(self.to_string()));
        }
        let (exp, c) = (*lead[0].0, *lead[0].1);
        let cinv = self.md.inv(c).expect("unit coefficient");
        let neg_exp = exp.map(|x| -x);
        // f = c T^e (1 + h) with h = 0 mod p
        let u = self.shift(&neg_exp).scale(cinv);
        let h = u.sub(&Self::constant(self.md, self.nvars, 1));
        let mut acc = Self::constant(self.md, self.nvars, 1);
        let mut term = acc.clone();
        for _ in 1..self.prec() {
            term = term.mul(&h).neg();
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        Ok(acc.shift(&neg_exp).scale(cinv))
    }

    /// Ring homomorphism T_i -> images[i]; negative exponents use inverses.
    pub fn substitute(&self, images: &[LaurentPoly]) -> Result<LaurentPoly> {
        assert_eq!(images.len(), self.nvars);
        let proto = images.first().map(|g| g.one_like()).unwrap_or_else(|| self.one_like());
        let mut cache = PowerCache::new(images)?;
        let mut out = proto.zero_like();
        for (e, c) in &self.terms {
            let mut t = proto.scale(*c);
            for (i, &k) in e.iter().take(self.nvars).enumerate() {
                if k != 0 {
                    t = t.mul(cache.power(i, k));
                }
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Every monomial with a unit coefficient has all exponents divisible by p.
    pub fn is_pth_power_mod_p(&self) -> bool {
        let p = self.p() as i32;
        self.terms
            .iter()
            .filter(|(_, c)| *c % p as i128 != 0)
            .all(|(e, _)| e.iter().all(|x| x % p == 0))
    }

    /// Largest and smallest exponent of each variable among the terms.
    pub fn exponent_range(&self, i: usize) -> Option<(i32, i32)> {
        let lo = self.terms.keys().map(|e| e[i]).min()?;
        let hi = self.terms.keys().map(|e| e[i]).max()?;
        Some((lo, hi))
    }
}

/// Positive and negative powers of a list of substitution images.
pub struct PowerCache<'a> {
    images: &'a [LaurentPoly],
    inverses: Vec<Option<LaurentPoly>>,
    pos: Vec<Vec<LaurentPoly>>,
    neg: Vec<Vec<LaurentPoly>>,
}

impl<'a> PowerCache<'a> {
    pub fn new(images: &'a [LaurentPoly]) -> Result<Self> {
        Ok(Self {
            images,
            inverses: vec![None; images.len()],
            pos: images.iter().map(|g| vec![g.one_like()]).collect(),
            neg: images.iter().map(|g| vec![g.one_like()]).collect(),
        })
    }

    pub fn power(&mut self, i: usize, k: i32) -> &LaurentPoly {
        if k >= 0 {
            while self.pos[i].len() <= k as usize {
                let next = self.pos[i].last().unwrap().mul(&self.images[i]);
                self.pos[i].push(next);
            }
            &self.pos[i][k as usize]
        } else {
            if self.inverses[i].is_none() {
                self.inverses[i] = Some(self.images[i].invert().expect("substitution image must be invertible"));
            }
            let inv = self.inverses[i].clone().unwrap();
            let k = (-k) as usize;
            while self.neg[i].len() <= k {
                let next = self.neg[i].last().unwrap().mul(&inv);
                self.neg[i].push(next);
            }
            &self.neg[i][k]
        }
    }
}

impl PartialEq for LaurentPoly {
    /// Equality of values at the common precision.
    fn eq(&self, o: &Self) -> bool {
        if self.p() != o.p() || self.nvars != o.nvars {
            return false;
        }
        self.sub(o).is_zero()
    }
}

impl Ring for LaurentPoly {
    fn zero_like(&self) -> Self {
        Self::zero(self.md, self.nvars)
    }
    fn one_like(&self) -> Self {
        Self::constant(self.md, self.nvars, 1)
    }
    fn bigint_like(&self, c: &BigInt) -> Self {
        Self::constant(self.md, self.nvars, self.md.reduce_big(c))
    }
    fn add(&self, o: &Self) -> Self {
        LaurentPoly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        LaurentPoly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        LaurentPoly::mul(self, o)
    }
    fn neg(&self) -> Self {
        LaurentPoly::neg(self)
    }
    fn is_zero(&self) -> bool {
        LaurentPoly::is_zero(self)
    }
}

impl PadicRing for LaurentPoly {
    fn prime(&self) -> u32 {
        self.p()
    }
    fn mul_p_pow(&self, k: u32) -> Result<Self> {
        LaurentPoly::mul_p_pow(self, k)
    }
    fn div_p_pow(&self, k: u32) -> Result<Self> {
        self.exact_div_p(k)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| format_term(self.md.signed(*c), &laurent_factors(e, self.nvars)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

pub(crate) fn laurent_factors(e: &Mono, nvars: usize) -> Vec<String> {
    (0..nvars)
        .filter(|&i| e[i] != 0)
        .map(|i| {
            if e[i] == 1 {
                format!("T{}", i + 1)
            } else {
                format!("T{}^{}", i + 1, e[i])
            }
        })
        .collect()
}

pub(crate) fn format_term(c: i128, factors: &[String]) -> String {
    if factors.is_empty() {
        c.to_string()
    } else {
        format!("{}*{}", c, factors.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn md(p: u32, n: u32) -> Modulus {
        Modulus::new(p, n).unwrap()
    }

    #[test]
    fn inverse_of_t_plus_p() {
        let m = md(3, 6);
        let t = LaurentPoly::var(m, 1, 0);
        let f = t.add(&LaurentPoly::constant(m, 1, 3));
        let g = f.invert().unwrap();
        assert_eq!(f.mul(&g), f.one_like());
        assert!(t.add(&LaurentPoly::constant(m, 1, 1)).invert().is_err());
    }

    #[test]
    fn division_keeps_precision_honest() {
        let m = md(2, 5);
        let f = LaurentPoly::from_terms(m, 1, [(unit_mono(0), 4), ([0; MAX_VARS], 8)]);
        let g = f.exact_div_p(2).unwrap();
        assert_eq!(g.prec(), 3);
        assert_eq!(g.to_string(), "2 + 1*T1");
        assert_eq!(f.exact_div_p(3), Err(Error::NotDivisible { k: 3 }));
    }

    #[test]
    fn substitution_with_negative_powers() {
        let m = md(5, 4);
        let t = LaurentPoly::var(m, 1, 0);
        let tinv = LaurentPoly::monomial(m, 1, [-1, 0, 0, 0], 1);
        let f = t.add(&tinv);
        // T -> T^5 + 5
        let img = t.pow(5).add(&LaurentPoly::constant(m, 1, 5));
        let g = f.substitute(std::slice::from_ref(&img)).unwrap();
        assert_eq!(g.sub(&img).mul(&img), img.one_like());
    }

    #[test]
    fn derivative_of_laurent_monomial() {
        let m = md(7, 3);
        let f = LaurentPoly::monomial(m, 2, [-2, 3, 0, 0], 1);
        let d = f.derivative(0);
        assert_eq!(d, LaurentPoly::monomial(m, 2, [-3, 3, 0, 0], -2));
    }
}
