//! Universal Witt polynomials over Z, computed once per (p, n) by inverting
//! the ghost map symbolically and cached for the lifetime of the process.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Multivariate polynomial over Z with dense exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, BigInt>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut f = Self::zero(nvars);
        f.terms.insert(e, BigInt::one());
        f
    }

    pub fn constant(nvars: usize, c: BigInt) -> Self {
        let mut f = Self::zero(nvars);
        if !c.is_zero() {
            f.terms.insert(vec![0; nvars], c);
        }
        f
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            let slot = out.terms.entry(e.clone()).or_insert_with(BigInt::zero);
            *slot += c;
            if slot.is_zero() {
                out.terms.remove(e);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&BigInt::from(-1)))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut acc: HashMap<Vec<u32>, BigInt> = HashMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        Self {
            nvars: self.nvars,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::constant(self.nvars, BigInt::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact division of every coefficient by d.
    pub fn div_exact(&self, d: &BigInt) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            terms.insert(e.clone(), q);
        }
        Some(Self {
            nvars: self.nvars,
            terms,
        })
    }

    /// Highest exponent of each variable.
    pub fn max_exponents(&self) -> Vec<u32> {
        let mut m = vec![0; self.nvars];
        for e in self.terms.keys() {
            for (x, y) in m.iter_mut().zip(e) {
                *x = (*x).max(*y);
            }
        }
        m
    }
}

pub const MAX_WITT_INDEX: usize = 6;

/// Given ghost-component targets g_0..g_n, the unique integral a_0..a_n with
/// sum_i p^i a_i^{p^{n-i}} = g_n.
fn solve_ghost(p: u32, ghosts: &[MPoly]) -> Vec<MPoly> {
    let pb = BigInt::from(p);
    let mut out: Vec<MPoly> = Vec::with_capacity(ghosts.len());
    for (n, g) in ghosts.iter().enumerate() {
        let mut rest = g.clone();
        for (i, a) in out.iter().enumerate() {
            let e = (p as u64).pow((n - i) as u32);
            rest = rest.sub(&a.pow(e).scale(&pb.pow(i as u32)));
        }
        let a = rest
            .div_exact(&pb.pow(n as u32))
            .expect("universal Witt polynomials are integral");
        out.push(a);
    }
    out
}

/// w_n of the variables x_{offset}, ..., x_{offset+n}.
fn ghost_poly(p: u32, nvars: usize, offset: usize, n: usize) -> MPoly {
    let mut w = MPoly::zero(nvars);
    for i in 0..=n {
        let e = (p as u64).pow((n - i) as u32);
        w = w.add(&MPoly::var(nvars, offset + i).pow(e).scale(&BigInt::from(p).pow(i as u32)));
    }
    w
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WittOp {
    Sum,
    Product,
    Negation,
    Frobenius,
}

/// Variables are a_0..a_L followed (for binary ops) by b_0..b_L.
pub fn universal(p: u32, op: WittOp, len: usize) -> Result<Arc<Vec<MPoly>>> {
    if len > MAX_WITT_INDEX + 1 {
        return Err(Error::LengthTooLarge {
            len,
            max: MAX_WITT_INDEX + 1,
        });
    }
    type Cache = Mutex<HashMap<(u32, WittOp, usize), Arc<Vec<MPoly>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&(p, op, len)) {
        return Ok(v.clone());
    }
    // Computed outside the lock; a racing thread computes the same value.
    let polys = Arc::new(compute(p, op, len));
    let mut guard = cache.lock().unwrap();
    Ok(guard.entry((p, op, len)).or_insert(polys).clone())
}

fn compute(p: u32, op: WittOp, len: usize) -> Vec<MPoly> {
    let n_out = if op == WittOp::Frobenius { len - 1 } else { len };
    let ghosts: Vec<MPoly> = match op {
        WittOp::Sum | WittOp::Product => {
            let nv = 2 * len;
            (0..n_out)
                .map(|n| {
                    let a = ghost_poly(p, nv, 0, n);
                    let b = ghost_poly(p, nv, len, n);
                    if op == WittOp::Sum {
                        a.add(&b)
                    } else {
                        a.mul(&b)
                    }
                })
                .collect()
        }
        WittOp::Negation => (0..n_out)
            .map(|n| ghost_poly(p, len, 0, n).scale(&BigInt::from(-1)))
            .collect(),
        WittOp::Frobenius => (0..n_out).map(|n| ghost_poly(p, len, 0, n + 1)).collect(),
    };
    solve_ghost(p, &ghosts)
}
