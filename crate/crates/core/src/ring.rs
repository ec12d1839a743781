//! A minimal commutative-ring interface and dense matrices over it.

use std::fmt::Debug;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::scalar::PadicScalar;

/// Operations shared by the coefficient rings. Constants are produced
/// "like" an existing element so that context (prime, precision,
/// variables) carries over.
pub trait Ring: Clone + PartialEq + Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn bigint_like(&self, c: &BigInt) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;

    fn i64_like(&self, c: i64) -> Self {
        self.bigint_like(&BigInt::from(c))
    }

    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
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
}

/// Rings where multiplication and exact division by powers of p are
/// meaningful, with precision bookkeeping where relevant.
pub trait PadicRing: Ring {
    fn prime(&self) -> u32;
    fn mul_p_pow(&self, k: u32) -> Result<Self>;
    fn div_p_pow(&self, k: u32) -> Result<Self>;
}

/// Exact integers carry the prime separately.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactInt {
    pub p: u32,
    pub value: BigInt,
}

impl ExactInt {
    pub fn new(p: u32, value: impl Into<BigInt>) -> Self {
        Self {
            p,
            value: value.into(),
        }
    }
}

impl Ring for ExactInt {
    fn zero_like(&self) -> Self {
        Self::new(self.p, 0)
    }
    fn one_like(&self) -> Self {
        Self::new(self.p, 1)
    }
    fn bigint_like(&self, c: &BigInt) -> Self {
        Self::new(self.p, c.clone())
    }
    fn add(&self, o: &Self) -> Self {
        Self::new(self.p, &self.value + &o.value)
    }
    fn sub(&self, o: &Self) -> Self {
        Self::new(self.p, &self.value - &o.value)
    }
    fn mul(&self, o: &Self) -> Self {
        Self::new(self.p, &self.value * &o.value)
    }
    fn neg(&self) -> Self {
        Self::new(self.p, -&self.value)
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(&self.value)
    }
}

impl PadicRing for ExactInt {
    fn prime(&self) -> u32 {
        self.p
    }
    fn mul_p_pow(&self, k: u32) -> Result<Self> {
        Ok(Self::new(self.p, &self.value * BigInt::from(self.p).pow(k)))
    }
    fn div_p_pow(&self, k: u32) -> Result<Self> {
        let pk = BigInt::from(self.p).pow(k);
        let r = &self.value % &pk;
        if !num_traits::Zero::is_zero(&r) {
            return Err(Error::NotDivisible { k });
        }
        Ok(Self::new(self.p, &self.value / pk))
    }
}

impl Ring for PadicScalar {
    fn zero_like(&self) -> Self {
        PadicScalar::from_modulus(self.modulus(), 0)
    }
    fn one_like(&self) -> Self {
        PadicScalar::from_modulus(self.modulus(), 1)
    }
    fn bigint_like(&self, c: &BigInt) -> Self {
        PadicScalar::from_modulus(self.modulus(), self.modulus().reduce_big(c))
    }
    fn add(&self, o: &Self) -> Self {
        PadicScalar::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        PadicScalar::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        PadicScalar::mul(self, o)
    }
    fn neg(&self) -> Self {
        PadicScalar::neg(self)
    }
    fn is_zero(&self) -> bool {
        PadicScalar::is_zero(self)
    }
}

impl PadicRing for PadicScalar {
    fn prime(&self) -> u32 {
        self.p()
    }
    fn mul_p_pow(&self, k: u32) -> Result<Self> {
        PadicScalar::mul_p_pow(self, k)
    }
    fn div_p_pow(&self, k: u32) -> Result<Self> {
        self.exact_div_p(k)
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Ring> Mat<R> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize, proto: &R) -> Self {
        let z = proto.zero_like();
        Self::from_fn(rows, cols, |_, _| z.clone())
    }

    pub fn identity(n: usize, proto: &R) -> Self {
        let (z, o) = (proto.zero_like(), proto.one_like());
        Self::from_fn(n, n, |i, j| if i == j { o.clone() } else { z.clone() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = &R> {
        self.data.iter()
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> Mat<S> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<S: Ring>(&self, f: impl Fn(&R) -> Result<S>) -> Result<Mat<S>> {
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.neg())
    }

    pub fn scale(&self, c: &R) -> Self {
        self.map(|a| c.mul(a))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matrix shapes do not compose");
        let z = self.data.first().or(o.data.first()).map(|x| x.zero_like());
        let mut out = Vec::with_capacity(self.rows * o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = z.clone().expect("nonempty matrix");
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(o.get(k, j)));
                }
                out.push(acc);
            }
        }
        Mat {
            rows: self.rows,
            cols: o.cols,
            data: out,
        }
    }

    pub fn mul_vec(&self, v: &[R]) -> Vec<R> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = v[0].zero_like();
                for (k, x) in v.iter().enumerate() {
                    acc = acc.add(&self.get(i, k).mul(x));
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, e: u64) -> Self {
        assert_eq!(self.rows, self.cols);
        let proto = self.data[0].clone();
        let mut acc = Self::identity(self.rows, &proto);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Ring::is_zero)
    }

    pub fn commutes_with(&self, o: &Self) -> bool {
        self.mul(o) == o.mul(self)
    }
}
