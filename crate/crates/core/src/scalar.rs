//! Residues of Z_p modulo p^N, where N is the absolute precision.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// Largest precision N with p^N below 2^62, so that products of two
/// residues fit comfortably in an `i128`.
pub fn max_prec(p: u32) -> u32 {
    let mut n = 0;
    let mut m: i128 = 1;
    while m * p as i128 <= (1i128 << 62) {
        m *= p as i128;
        n += 1;
    }
    n
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Arithmetic context for Z / p^prec.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    p: u32,
    prec: u32,
    m: i128,
}

impl Modulus {
    pub fn new(p: u32, prec: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not prime")));
        }
        if prec == 0 {
            return Err(Error::PrecisionExhausted {
                what: "absolute precision 0".into(),
            });
        }
        if prec > max_prec(p) {
            return Err(Error::PrecisionTooLarge { p, prec });
        }
        Ok(Self {
            p,
            prec,
            m: (p as i128).pow(prec),
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn modulus(&self) -> i128 {
        self.m
    }

    pub fn reduce(&self, x: i128) -> i128 {
        x.rem_euclid(self.m)
    }

    pub fn reduce_big(&self, x: &BigInt) -> i128 {
        let r = x.mod_floor(&BigInt::from(self.m));
        r.to_i128().expect("residue fits")
    }

    pub fn add(&self, a: i128, b: i128) -> i128 {
        (a + b).rem_euclid(self.m)
    }

    pub fn sub(&self, a: i128, b: i128) -> i128 {
        (a - b).rem_euclid(self.m)
    }

    pub fn mul(&self, a: i128, b: i128) -> i128 {
        (a * b).rem_euclid(self.m)
    }

    pub fn pow(&self, a: i128, mut e: u64) -> i128 {
        let mut base = self.reduce(a);
        let mut acc = self.reduce(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Symmetric representative in (-m/2, m/2].
    pub fn signed(&self, x: i128) -> i128 {
        let r = self.reduce(x);
        if r > self.m / 2 {
            r - self.m
        } else {
            r
        }
    }

    /// p-adic valuation of a residue, capped at the precision.
    pub fn val(&self, x: i128) -> u32 {
        let mut r = self.reduce(x);
        if r == 0 {
            return self.prec;
        }
        let mut v = 0;
        while r % self.p as i128 == 0 {
            r /= self.p as i128;
            v += 1;
        }
        v
    }

    pub fn inv(&self, x: i128) -> Option<i128> {
        let a = self.reduce(x);
        if a % self.p as i128 == 0 {
            return None;
        }
        let (g, s, _) = ext_gcd(a, self.m);
        debug_assert_eq!(g, 1);
        Some(self.reduce(s))
    }

    /// Same prime at a different precision.
    pub fn with_prec(&self, prec: u32) -> Result<Self> {
        Self::new(self.p, prec)
    }
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, s, t) = ext_gcd(b, a.rem_euclid(b));
        (g, t, s - (a.div_euclid(b)) * t)
    }
}

/// v_p(n!) by Legendre's formula.
pub fn val_factorial(p: u32, n: u64) -> u64 {
    let mut v = 0;
    let mut q = n;
    while q > 0 {
        q /= p as u64;
        v += q;
    }
    v
}

/// k! with every factor of p removed, reduced into the modulus (a unit).
pub fn factorial_unit(k: u64, md: &Modulus) -> i128 {
    let p = md.p() as u64;
    (1..=k).fold(md.reduce(1), |acc, mut i| {
        while i % p == 0 {
            i /= p;
        }
        md.mul(acc, i as i128)
    })
}

/// Binomial coefficient reduced into the given modulus.
pub fn binom_mod(n: u64, k: u64, md: &Modulus) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    if n <= 120 {
        let mut c: u128 = 1;
        for i in 0..k {
            c = c * (n - i) as u128 / (i + 1) as u128;
        }
        md.reduce((c % md.modulus() as u128) as i128)
    } else {
        let c = num_integer::binomial(BigInt::from(n), BigInt::from(k));
        md.reduce_big(&c)
    }
}

/// p^k / k! as an element of Z_p, reduced into the modulus. Always integral.
pub fn p_pow_over_factorial(k: u64, md: &Modulus) -> i128 {
    let p = md.p();
    let v = val_factorial(p, k);
    let shift = k - v;
    if shift >= md.prec() as u64 {
        return 0;
    }
    // unit part of k!
    let mut u: i128 = 1;
    for mut i in 1..=k {
        while i % p as u64 == 0 {
            i /= p as u64;
        }
        u = md.mul(u, i as i128);
    }
    let uinv = md.inv(u).expect("unit part of a factorial is a unit");
    md.mul(md.pow(p as i128, shift), uinv)
}

/// An element of Z_p known modulo p^prec.
#[derive(Clone, Copy, Debug)]
pub struct PadicScalar {
    md: Modulus,
    value: i128,
}

impl PadicScalar {
    pub fn new(p: u32, prec: u32, value: i128) -> Result<Self> {
        let md = Modulus::new(p, prec)?;
        Ok(Self::from_modulus(md, value))
    }

    pub fn from_modulus(md: Modulus, value: i128) -> Self {
        Self {
            md,
            value: md.reduce(value),
        }
    }

    pub fn from_bigint(p: u32, prec: u32, value: &BigInt) -> Result<Self> {
        let md = Modulus::new(p, prec)?;
        Ok(Self {
            md,
            value: md.reduce_big(value),
        })
    }

    pub fn p(&self) -> u32 {
        self.md.p
    }

    pub fn prec(&self) -> u32 {
        self.md.prec
    }

    pub fn modulus(&self) -> Modulus {
        self.md
    }

    /// Residue in [0, p^prec).
    pub fn residue(&self) -> i128 {
        self.value
    }

    pub fn signed(&self) -> i128 {
        self.md.signed(self.value)
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn valuation(&self) -> u32 {
        self.md.val(self.value)
    }

    pub fn is_unit(&self) -> bool {
        self.value % self.md.p as i128 != 0
    }

    fn common(&self, o: &Self) -> Modulus {
        assert_eq!(self.md.p, o.md.p, "scalars over different primes");
        if self.md.prec <= o.md.prec {
            self.md
        } else {
            o.md
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_modulus(self.common(o), self.value + o.value)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_modulus(self.common(o), self.value - o.value)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let md = self.common(o);
        Self::from_modulus(md, md.mul(md.reduce(self.value), md.reduce(o.value)))
    }

    pub fn neg(&self) -> Self {
        Self::from_modulus(self.md, -self.value)
    }

    pub fn pow(&self, e: u64) -> Self {
        Self::from_modulus(self.md, self.md.pow(self.value, e))
    }

    pub fn inv(&self) -> Result<Self> {
        self.md
            .inv(self.value)
            .map(|v| Self::from_modulus(self.md, v))
            .ok_or_else(|| Error::NotUnit(self.to_string()))
    }

    /// Reduce to a lower precision.
    pub fn truncate(&self, prec: u32) -> Result<Self> {
        let md = self.md.with_prec(prec.min(self.md.prec))?;
        Ok(Self::from_modulus(md, self.value))
    }

    /// Multiply by p^k; the precision grows by k.
    pub fn mul_p_pow(&self, k: u32) -> Result<Self> {
        let md = self.md.with_prec(self.md.prec + k)?;
        Ok(Self::from_modulus(
            md,
            self.value * (self.md.p as i128).pow(k),
        ))
    }

    /// Exact division by p^k; the precision drops by k.
    pub fn exact_div_p(&self, k: u32) -> Result<Self> {
        if k >= self.md.prec {
            return Err(Error::PrecisionExhausted {
                what: format!("dividing a p^{} residue by p^{k}", self.md.prec),
            });
        }
        let pk = (self.md.p as i128).pow(k);
        if self.value % pk != 0 {
            return Err(Error::NotDivisible { k });
        }
        let md = self.md.with_prec(self.md.prec - k)?;
        Ok(Self::from_modulus(md, self.value / pk))
    }

    /// delta(c) = (c - c^p) / p for the canonical delta-structure on Z_p.
    pub fn delta(&self) -> Result<Self> {
        let cp = self.md.pow(self.value, self.md.p as u64);
        let diff = Self::from_modulus(self.md, self.value - cp);
        diff.exact_div_p(1)
    }
}

impl PartialEq for PadicScalar {
    /// Equality of values at the common precision.
    fn eq(&self, o: &Self) -> bool {
        let md = self.common(o);
        md.reduce(self.value) == md.reduce(o.value)
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({}^{})", self.signed(), self.md.p, self.md.prec)
    }
}
