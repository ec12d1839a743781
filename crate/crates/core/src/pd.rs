//! Divided-power polynomials R[Y_1, ..., Y_k]_pd over a Laurent ring R, with
//! basis Y^[k] = Y^k / k! and an optional total pd-degree bound.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::laurent::{format_term, laurent_factors, LaurentPoly, Mono, MAX_VARS};
use crate::ring::{PadicRing, Ring};
use crate::scalar::{binom_mod, Modulus};

/// Whether a pd-degree bound was in force and whether it discarded anything.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    Exact,
    Within(u32),
    Truncated(u32),
}

impl Truncation {
    pub fn bound(&self) -> Option<u32> {
        match self {
            Truncation::Exact => None,
            Truncation::Within(b) | Truncation::Truncated(b) => Some(*b),
        }
    }

    pub fn is_truncated(&self) -> bool {
        matches!(self, Truncation::Truncated(_))
    }

    fn combine(self, o: Truncation) -> Truncation {
        let bound = match (self.bound(), o.bound()) {
            (None, b) | (b, None) => b,
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        match bound {
            None => Truncation::Exact,
            Some(b) if self.is_truncated() || o.is_truncated() => Truncation::Truncated(b),
            Some(b) => Truncation::Within(b),
        }
    }

    fn mark(&mut self) {
        if let Truncation::Within(b) = *self {
            *self = Truncation::Truncated(b);
        }
    }
}

pub type PdIndex = Vec<u32>;

pub fn pd_degree(k: &[u32]) -> u32 {
    k.iter().sum()
}

#[derive(Clone, Debug)]
pub struct PdPoly {
    md: Modulus,
    nvars: usize,
    vars: Arc<Vec<String>>,
    trunc: Truncation,
    terms: BTreeMap<PdIndex, LaurentPoly>,
}

impl PdPoly {
    pub fn zero(md: Modulus, nvars: usize, vars: Arc<Vec<String>>, bound: Option<u32>) -> Self {
        assert!(nvars <= MAX_VARS);
        Self {
            md,
            nvars,
            vars,
            trunc: bound.map_or(Truncation::Exact, Truncation::Within),
            terms: BTreeMap::new(),
        }
    }

    /// Same ring, no terms.
    pub fn zero_of(&self) -> Self {
        Self {
            md: self.md,
            nvars: self.nvars,
            vars: self.vars.clone(),
            trunc: self.trunc.bound().map_or(Truncation::Exact, Truncation::Within),
            terms: BTreeMap::new(),
        }
    }

    /// Embed a Laurent polynomial as a pd-degree-0 element of this ring.
    pub fn from_laurent(&self, f: &LaurentPoly) -> Self {
        let mut out = self.zero_of();
        out.md = if f.prec() < self.prec() { f.modulus() } else { self.md };
        out.add_term(vec![0; self.vars.len()], f.clone());
        out
    }

    pub fn laurent_var(&self, i: usize) -> Self {
        self.from_laurent(&LaurentPoly::var(self.md, self.nvars, i))
    }

    pub fn constant(&self, c: i128) -> Self {
        self.from_laurent(&LaurentPoly::constant(self.md, self.nvars, c))
    }

    /// Y_j^[k].
    pub fn pd_power(&self, j: usize, k: u32) -> Self {
        let mut idx = vec![0; self.vars.len()];
        idx[j] = k;
        let mut out = self.zero_of();
        out.add_term(idx, LaurentPoly::constant(self.md, self.nvars, 1));
        out
    }

    pub fn pd_var(&self, j: usize) -> Self {
        self.pd_power(j, 1)
    }

    pub fn pd_var_named(&self, name: &str) -> Option<Self> {
        self.var_index(name).map(|j| self.pd_var(j))
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn add_term(&mut self, k: PdIndex, c: LaurentPoly) {
        debug_assert_eq!(k.len(), self.vars.len());
        if c.is_zero() {
            return;
        }
        if let Some(b) = self.trunc.bound() {
            if pd_degree(&k) > b {
                let c = c.truncate(self.prec()).expect("valid precision");
                if !c.is_zero() {
                    self.trunc.mark();
                }
                return;
            }
        }
        let c = if c.prec() > self.prec() { c.truncate(self.prec()).unwrap() } else { c };
        match self.terms.get_mut(&k) {
            Some(slot) => {
                *slot = slot.add(&c);
                if slot.is_zero() {
                    self.terms.remove(&k);
                }
            }
            None => {
                if !c.is_zero() {
                    self.terms.insert(k, c);
                }
            }
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

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn bound(&self) -> Option<u32> {
        self.trunc.bound()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PdIndex, &LaurentPoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, k: &[u32]) -> LaurentPoly {
        self.terms
            .get(k)
            .cloned()
            .unwrap_or_else(|| LaurentPoly::zero(self.md, self.nvars))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The pd-degree-0 part, if that is all there is.
    pub fn as_laurent(&self) -> Option<LaurentPoly> {
        if self.terms.keys().all(|k| pd_degree(k) == 0) {
            Some(self.coeff(&vec![0; self.vars.len()]))
        } else {
            None
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|k| pd_degree(k)).max().unwrap_or(0)
    }

    fn check_same_ring(&self, o: &Self) {
        assert_eq!(self.p(), o.p(), "pd polynomials over different primes");
        assert_eq!(self.nvars, o.nvars, "different Laurent variables");
        assert!(
            Arc::ptr_eq(&self.vars, &o.vars) || self.vars == o.vars,
            "different pd variables: {:?} vs {:?}",
            self.vars,
            o.vars
        );
    }

    fn empty_like(&self, o: &Self) -> Self {
        self.check_same_ring(o);
        Self {
            md: if self.prec() <= o.prec() { self.md } else { o.md },
            nvars: self.nvars,
            vars: self.vars.clone(),
            trunc: self.trunc.combine(o.trunc),
            terms: BTreeMap::new(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.empty_like(o);
        for (k, c) in self.terms.iter().chain(o.terms.iter()) {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.empty_like(o);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.clone());
        }
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.zero_of();
        out.trunc = self.trunc;
        out.md = self.md;
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.neg());
        }
        out
    }

    /// Product using Y^[a] Y^[b] = C(a+b, a) Y^[a+b].
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = self.empty_like(o);
        let md = out.md;
        let bound = out.bound();
        for (k1, c1) in &self.terms {
            for (k2, c2) in &o.terms {
                let k: PdIndex = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                let mut factor = md.reduce(1);
                for (a, b) in k1.iter().zip(k2) {
                    if *a > 0 && *b > 0 {
                        factor = md.mul(factor, binom_mod((a + b) as u64, *a as u64, &md));
                    }
                }
                if factor == 0 {
                    continue;
                }
                if let Some(b) = bound {
                    if pd_degree(&k) > b {
                        if !c1.mul(c2).scale(factor).is_zero() {
                            out.trunc.mark();
                        }
                        continue;
                    }
                }
                out.add_term(k, c1.mul(c2).scale(factor));
            }
        }
        out
    }

    pub fn scale(&self, c: i128) -> Self {
        let mut out = self.zero_of();
        out.trunc = self.trunc;
        for (k, x) in &self.terms {
            out.add_term(k.clone(), x.scale(c));
        }
        out
    }

    pub fn scale_laurent(&self, c: &LaurentPoly) -> Self {
        self.mul(&self.from_laurent(c))
    }

    pub fn pow(&self, e: u64) -> Self {
        Ring::pow(self, e)
    }

    pub fn truncate(&self, prec: u32) -> Result<Self> {
        if prec >= self.prec() {
            return Ok(self.clone());
        }
        let mut out = self.zero_of();
        out.md = self.md.with_prec(prec)?;
        out.trunc = self.trunc;
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.truncate(prec)?);
        }
        Ok(out)
    }

    pub fn mul_p_pow(&self, k: u32) -> Result<Self> {
        let mut out = self.zero_of();
        out.md = self.md.with_prec(self.prec() + k)?;
        out.trunc = self.trunc;
        for (idx, c) in &self.terms {
            out.add_term(idx.clone(), c.mul_p_pow(k)?);
        }
        Ok(out)
    }

    pub fn exact_div_p(&self, k: u32) -> Result<Self> {
        if k >= self.prec() {
            return Err(Error::PrecisionExhausted {
                what: format!("dividing a p^{} pd polynomial by p^{k}", self.prec()),
            });
        }
        let mut out = self.zero_of();
        out.md = self.md.with_prec(self.prec() - k)?;
        out.trunc = self.trunc;
        for (idx, c) in &self.terms {
            out.add_term(idx.clone(), c.exact_div_p(k)?);
        }
        Ok(out)
    }

    pub fn valuation(&self) -> u32 {
        self.terms.values().map(|c| c.valuation()).min().unwrap_or(self.prec())
    }

    /// d/dY_j, sending Y_j^[k] to Y_j^[k-1].
    pub fn pd_derivative(&self, j: usize) -> Self {
        let mut out = self.zero_of();
        out.trunc = self.trunc;
        out.md = self.md;
        for (k, c) in &self.terms {
            if k[j] > 0 {
                let mut k2 = k.clone();
                k2[j] -= 1;
                out.add_term(k2, c.clone());
            }
        }
        out
    }

    /// d/dT_i applied to the coefficients.
    pub fn laurent_derivative(&self, i: usize) -> Self {
        let mut out = self.zero_of();
        out.trunc = self.trunc;
        out.md = self.md;
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.derivative(i));
        }
        out
    }

    /// Inverse of an element that is a unit times a T-monomial mod p.
    pub fn invert(&self) -> Result<Self> {
        let p = self.p() as i128;
        let mut lead = None;
        for (k, c) in &self.terms {
            for (e, x) in c.terms() {
                if x % p != 0 {
                    if lead.is_some() || pd_degree(k) != 0 {
                        return Err(Error::NotUnit(self.to_string()));
                    }
                    lead = Some((*e, *x));
                }
            }
        }
        let (exp, c) = lead.ok_or_else(|| Error::NotUnit(self.to_string()))?;
        let cinv = self.md.inv(c).expect("unit");
        let neg_exp: Mono = exp.map(|x| -x);
        let mono_inv = self.from_laurent(&LaurentPoly::monomial(self.md, self.nvars, neg_exp, cinv));
        let h = self.mul(&mono_inv).sub(&self.constant(1));
        let mut acc = self.constant(1);
        let mut term = acc.clone();
        for _ in 1..self.prec() {
            term = term.mul(&h).neg();
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        Ok(acc.mul(&mono_inv))
    }

    /// Ring homomorphism into the ring of `a.target`.
    pub fn substitute(&self, a: &PdAssignment) -> Result<PdPoly> {
        if a.laurent.len() != self.nvars || a.pd.len() != self.vars.len() {
            return Err(Error::UnsupportedSubstitution(format!(
                "assignment covers {} + {} variables, ring has {} + {}",
                a.laurent.len(),
                a.pd.len(),
                self.nvars,
                self.vars.len()
            )));
        }
        a.validate()?;
        let target = a.target.zero_of();
        let mut lcache = PdPowerCache::new(&a.laurent);
        let mut pdcache: BTreeMap<(usize, u32), PdPoly> = BTreeMap::new();
        let mut out = target.clone();
        out.md = if self.prec() < target.prec() { self.md } else { target.md };
        out.trunc = out.trunc.combine(self.trunc);
        for (k, c) in &self.terms {
            let mut img = target.zero_of();
            for (e, x) in c.terms() {
                let mut t = target.constant(*x);
                for (i, &ei) in e.iter().take(self.nvars).enumerate() {
                    if ei != 0 {
                        t = t.mul(lcache.power(i, ei)?);
                    }
                }
                img = img.add(&t);
            }
            for (j, &kj) in k.iter().enumerate() {
                if kj == 0 {
                    continue;
                }
                let f = pdcache
                    .entry((j, kj))
                    .or_insert_with(|| signed_sum_pd_power(&target, &a.pd[j], kj));
                img = img.mul(f);
            }
            out = out.add(&img);
        }
        Ok(out)
    }

    /// Re-express in a ring with more pd variables, matching by name.
    pub fn embed(&self, vars: &Arc<Vec<String>>, bound: Option<u32>) -> Result<PdPoly> {
        let pos: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::Mismatch(format!("variable {v} missing from target ring")))
            })
            .collect::<Result<_>>()?;
        let mut out = PdPoly::zero(self.md, self.nvars, vars.clone(), bound);
        if self.trunc.is_truncated() {
            out.trunc.mark();
        }
        for (k, c) in &self.terms {
            let mut k2 = vec![0; vars.len()];
            for (j, &kj) in k.iter().enumerate() {
                k2[pos[j]] = kj;
            }
            out.add_term(k2, c.clone());
        }
        Ok(out)
    }

    /// Change the pd-degree bound, keeping the truncation flag honest.
    pub fn with_bound(&self, bound: Option<u32>) -> Self {
        let mut out = PdPoly::zero(self.md, self.nvars, self.vars.clone(), bound);
        if self.trunc.is_truncated() {
            out.trunc.mark();
        }
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

/// (sum_t eps_t Z_t)^[k] = sum over |a| = k of prod eps_t^{a_t} Z_t^[a_t].
fn signed_sum_pd_power(target: &PdPoly, sum: &[(usize, i64)], k: u32) -> PdPoly {
    if sum.is_empty() {
        return if k == 0 { target.constant(1) } else { target.zero_of() };
    }
    // Multiply the pd-powers one summand at a time: (a + b)^[k] = sum a^[i] b^[k-i].
    let mut partial: Vec<PdPoly> = (0..=k).map(|i| target.pd_power(sum[0].0, i).scale(sign_pow(sum[0].1, i))).collect();
    for &(t, eps) in &sum[1..] {
        let next: Vec<PdPoly> = (0..=k)
            .map(|n| {
                let mut s = target.zero_of();
                for i in 0..=n {
                    let b = target.pd_power(t, n - i).scale(sign_pow(eps, n - i));
                    s = s.add(&partial[i as usize].mul(&b));
                }
                s
            })
            .collect();
        partial = next;
    }
    partial.swap_remove(k as usize)
}

fn sign_pow(eps: i64, k: u32) -> i128 {
    (eps as i128).pow(k)
}

/// Assignment for a pd-ring homomorphism: Laurent variables go to arbitrary
/// elements of the target, pd variables to signed sums of target pd variables.
#[derive(Clone, Debug)]
pub struct PdAssignment {
    pub target: PdPoly,
    pub laurent: Vec<PdPoly>,
    pub pd: Vec<Vec<(usize, i64)>>,
}

impl PdAssignment {
    fn validate(&self) -> Result<()> {
        for s in &self.pd {
            for &(t, eps) in s {
                if eps != 1 && eps != -1 {
                    return Err(Error::UnsupportedSubstitution(format!(
                        "pd variable image has coefficient {eps}"
                    )));
                }
                if t >= self.target.vars().len() {
                    return Err(Error::UnsupportedSubstitution(format!("no target pd variable {t}")));
                }
            }
        }
        Ok(())
    }
}

struct PdPowerCache<'a> {
    images: &'a [PdPoly],
    pos: Vec<Vec<PdPoly>>,
    neg: Vec<Vec<PdPoly>>,
}

impl<'a> PdPowerCache<'a> {
    fn new(images: &'a [PdPoly]) -> Self {
        Self {
            images,
            pos: images.iter().map(|g| vec![g.constant(1)]).collect(),
            neg: images.iter().map(|g| vec![g.constant(1)]).collect(),
        }
    }

    fn power(&mut self, i: usize, k: i32) -> Result<&PdPoly> {
        if k >= 0 {
            while self.pos[i].len() <= k as usize {
                let next = self.pos[i].last().unwrap().mul(&self.images[i]);
                self.pos[i].push(next);
            }
            Ok(&self.pos[i][k as usize])
        } else {
            if self.neg[i].len() == 1 {
                let inv = self.images[i].invert()?;
                self.neg[i].push(inv);
            }
            let k = (-k) as usize;
            while self.neg[i].len() <= k {
                let next = self.neg[i].last().unwrap().mul(&self.neg[i][1]);
                self.neg[i].push(next);
            }
            Ok(&self.neg[i][k])
        }
    }
}

impl PartialEq for PdPoly {
    /// Equality of values at the common precision, ignoring truncation flags.
    fn eq(&self, o: &Self) -> bool {
        if self.p() != o.p() || self.nvars != o.nvars || self.vars != o.vars {
            return false;
        }
        self.sub(o).is_zero()
    }
}

impl Ring for PdPoly {
    fn zero_like(&self) -> Self {
        self.zero_of()
    }
    fn one_like(&self) -> Self {
        self.constant(1)
    }
    fn bigint_like(&self, c: &BigInt) -> Self {
        self.constant(self.md.reduce_big(c))
    }
    fn add(&self, o: &Self) -> Self {
        PdPoly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        PdPoly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        PdPoly::mul(self, o)
    }
    fn neg(&self) -> Self {
        PdPoly::neg(self)
    }
    fn is_zero(&self) -> bool {
        PdPoly::is_zero(self)
    }
}

impl PadicRing for PdPoly {
    fn prime(&self) -> u32 {
        self.p()
    }
    fn mul_p_pow(&self, k: u32) -> Result<Self> {
        PdPoly::mul_p_pow(self, k)
    }
    fn div_p_pow(&self, k: u32) -> Result<Self> {
        self.exact_div_p(k)
    }
}

impl fmt::Display for PdPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (k, c) in &self.terms {
            let pd: Vec<String> = k
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, e)| format!("{}[{}]", self.vars[j], e))
                .collect();
            for (e, x) in c.terms() {
                let mut factors = laurent_factors(e, self.nvars);
                factors.extend(pd.iter().cloned());
                parts.push(format_term(self.md.signed(*x), &factors));
            }
        }
        write!(f, "{}", parts.join(" + "))
    }
}

pub fn var_names<S: AsRef<str>>(names: &[S]) -> Arc<Vec<String>> {
    Arc::new(names.iter().map(|s| s.as_ref().to_string()).collect())
}
