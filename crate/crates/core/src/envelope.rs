//! The ring D = R<Y> over the identity chart, where S = T - pY, with the
//! Frobenius lift induced by delta_1 on T and delta_2 on S.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::delta::DeltaStructure;
use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, MAX_VARS};
use crate::pd::{var_names, PdAssignment, PdIndex, PdPoly};
use crate::scalar::{factorial_unit, val_factorial};

#[derive(Debug)]
pub struct EnvelopeRing {
    d1: DeltaStructure,
    d2: DeltaStructure,
    zero: PdPoly,
    s: Vec<PdPoly>,
    b: Vec<PdPoly>,
    z0: Vec<PdPoly>,
    /// phi(Y_j^[k]) keyed by (j, k).
    phi_pd: Mutex<HashMap<(usize, u32), PdPoly>>,
}

impl EnvelopeRing {
    /// Requires delta_1 = delta_2 mod p on the generators.
    pub fn new(d1: DeltaStructure, d2: DeltaStructure, bound: Option<u32>) -> Result<Self> {
        if d1.p() != d2.p() || d1.d() != d2.d() || d1.prec() != d2.prec() {
            return Err(Error::Mismatch("delta-structures on different rings".into()));
        }
        for (i, (g1, g2)) in d1.images().iter().zip(d2.images()).enumerate() {
            if !g1.sub(g2).mod_p().is_zero() {
                return Err(Error::AssumptionViolated(format!(
                    "delta_1(T{0}) - delta_2(T{0}) = {1} is not divisible by p",
                    i + 1,
                    g1.sub(g2)
                )));
            }
        }
        let d = d1.d();
        let md = d1.images()[0].modulus();
        let zero = PdPoly::zero(md, d, envelope_vars(d), bound);
        let p = d1.p() as i128;
        let s: Vec<PdPoly> = (0..d)
            .map(|i| zero.laurent_var(i).sub(&zero.pd_var(i).scale(p)))
            .collect();
        let mut env = Self {
            d1,
            d2,
            zero,
            s,
            b: Vec::new(),
            z0: Vec::new(),
            phi_pd: Mutex::new(HashMap::new()),
        };
        for i in 0..d {
            let b = env.delta2_of_s(i)?;
            let b = env.zero.from_laurent(&env.d1.images()[i]).sub(&b);
            env.b.push(b.exact_div_p(1)?);
        }
        for i in 0..d {
            let z = env.z0_formula(i);
            env.z0.push(z);
        }
        for i in 0..d {
            let direct = env.phi_y_direct(i)?;
            if env.z0[i].mul_p_pow(1)? != direct {
                return Err(Error::CrossCheck(format!(
                    "phi(Y{}) = {} but p z0 = {}",
                    i + 1,
                    direct,
                    env.z0[i].mul_p_pow(1)?
                )));
            }
        }
        Ok(env)
    }

    pub fn p(&self) -> u32 {
        self.d1.p()
    }

    pub fn prec(&self) -> u32 {
        self.d1.prec()
    }

    pub fn d(&self) -> usize {
        self.d1.d()
    }

    pub fn bound(&self) -> Option<u32> {
        self.zero.bound()
    }

    pub fn delta1(&self) -> &DeltaStructure {
        &self.d1
    }

    pub fn delta2(&self) -> &DeltaStructure {
        &self.d2
    }

    pub fn zero(&self) -> &PdPoly {
        &self.zero
    }

    pub fn y(&self, i: usize) -> PdPoly {
        self.zero.pd_var(i)
    }

    pub fn t(&self, i: usize) -> PdPoly {
        self.zero.laurent_var(i)
    }

    /// S_i = T_i - p Y_i.
    pub fn s(&self, i: usize) -> &PdPoly {
        &self.s[i]
    }

    /// b_i = (delta_1(T_i) - delta_2(S_i)) / p.
    pub fn b(&self, i: usize) -> &PdPoly {
        &self.b[i]
    }

    /// A Laurent polynomial in T evaluated at S.
    pub fn at_s(&self, f: &LaurentPoly) -> Result<PdPoly> {
        let a = PdAssignment {
            target: self.zero.clone(),
            laurent: self.s.clone(),
            pd: (0..self.d()).map(|j| vec![(j, 1)]).collect(),
        };
        self.zero.from_laurent(f).substitute(&a)
    }

    fn delta2_of_s(&self, i: usize) -> Result<PdPoly> {
        self.at_s(&self.d2.images()[i])
    }

    /// z_{i,0} = b_i + Y_i S_i^{p-1} + Y_i^2 sum_k (T_i^k - S_i^k)/(T_i - S_i) S_i^{p-1-k}.
    fn z0_formula(&self, i: usize) -> PdPoly {
        let p = self.p();
        let (t, s, y) = (self.t(i), &self.s[i], self.y(i));
        let one = self.zero.constant(1);
        let s_pow: Vec<PdPoly> = (0..p).scan(one.clone(), |acc, _| {
            let cur = acc.clone();
            *acc = acc.mul(s);
            Some(cur)
        }).collect();
        let t_pow: Vec<PdPoly> = (0..p).scan(one, |acc, _| {
            let cur = acc.clone();
            *acc = acc.mul(&t);
            Some(cur)
        }).collect();
        let mut sum = self.zero.clone();
        for k in 1..p as usize {
            // (T^k - S^k)/(T - S) = sum_{a+b=k-1} T^a S^b
            let mut q = self.zero.clone();
            for a in 0..k {
                q = q.add(&t_pow[a].mul(&s_pow[k - 1 - a]));
            }
            sum = sum.add(&q.mul(&s_pow[p as usize - 1 - k]));
        }
        self.b[i]
            .add(&y.mul(&s_pow[p as usize - 1]))
            .add(&y.mul(&y).mul(&sum))
    }

    /// phi(Y_i) = delta_1(T_i) - delta_2(S_i) + (T_i^p - S_i^p)/p, computed
    /// from the generators without the closed formula.
    fn phi_y_direct(&self, i: usize) -> Result<PdPoly> {
        let p = self.p() as u64;
        let phi_t = self.zero.from_laurent(&self.d1.phi_images()[i]);
        let phi_s = self.s[i].pow(p).add(&self.delta2_of_s(i)?.scale(p as i128));
        phi_t.sub(&phi_s).exact_div_p(1)
    }

    pub fn z0(&self, i: usize) -> &PdPoly {
        &self.z0[i]
    }

    fn check_elem(&self, f: &PdPoly) -> Result<()> {
        if f.p() != self.p() || f.nvars() != self.d() || f.vars() != self.zero.vars() {
            return Err(Error::Mismatch("element is not in the envelope ring".into()));
        }
        if f.truncation().is_truncated() {
            return Err(Error::Inconclusive(
                "Frobenius of an element known only modulo the pd-degree bound".into(),
            ));
        }
        Ok(())
    }

    /// phi(Y_j^[k]) = phi(Y_j)^k / k! = (p^k / k!) z0_j^k.
    fn phi_pd_power(&self, j: usize, k: u32) -> Result<PdPoly> {
        if let Some(v) = self.phi_pd.lock().unwrap().get(&(j, k)) {
            return Ok(v.clone());
        }
        let md = self.zero.modulus();
        let n = md.prec();
        let v = k - val_factorial(self.p(), k as u64) as u32;
        let out = if v >= n {
            self.zero.clone()
        } else {
            let zk = self.z0[j].truncate(n - v)?.pow(k as u64);
            let u = md.inv(factorial_unit(k as u64, &md)).expect("factorial unit part is a unit");
            zk.mul_p_pow(v)?.scale(u)
        };
        self.phi_pd.lock().unwrap().insert((j, k), out.clone());
        Ok(out)
    }

    pub fn phi(&self, f: &PdPoly) -> Result<PdPoly> {
        self.check_elem(f)?;
        let mut out = self.zero.zero_of().truncate(f.prec())?;
        for (k, c) in f.terms() {
            let mut img = self.zero.from_laurent(&self.d1.phi_of(c)?);
            for (j, &kj) in k.iter().enumerate() {
                if kj > 0 {
                    img = img.mul(&self.phi_pd_power(j, kj)?);
                }
            }
            out = out.add(&img);
        }
        out.truncate(f.prec())
    }

    /// (phi(f) - f^p) / p.
    pub fn delta(&self, f: &PdPoly) -> Result<PdPoly> {
        let fp = f.pow(self.p() as u64);
        self.phi(f)?.sub(&fp).exact_div_p(1)
    }

    pub fn delta_iter(&self, f: &PdPoly, n: u32) -> Result<PdPoly> {
        let mut x = f.clone();
        for _ in 0..n {
            x = self.delta(&x)?;
        }
        Ok(x)
    }

    /// Checks the closed form for delta^n(Y_i): the coefficient of
    /// Y_i^[p^n] is (-1)^n u_n to the required order, and the rest lies in
    /// the span allowed at level n - 1.
    pub fn verify_iterate_formula(&self, n: u32) -> Result<IterateReport> {
        if n == 0 {
            return Err(Error::InvalidParameter("iterate level must be at least 1".into()));
        }
        let p = self.p();
        let top = p.pow(n);
        if let Some(b) = self.bound() {
            if b < top {
                return Err(Error::InvalidParameter(format!(
                    "pd-degree bound {b} is below p^n = {top}"
                )));
            }
        }
        let mut axes = Vec::new();
        for i in 0..self.d() {
            let x = match self.delta_iter(&self.y(i), n) {
                Ok(x) => x,
                Err(Error::Inconclusive(why)) => {
                    axes.push(AxisIterate {
                        axis: i,
                        top_coeff: None,
                        expected: 0,
                        top_holds: None,
                        remainder: Membership::Inconclusive { index: None, reason: why },
                    });
                    continue;
                }
                Err(e) => return Err(e),
            };
            let md = x.modulus();
            let u = md.signed(factorial_unit(top as u64, &md));
            let expected = if n.is_multiple_of(2) { u } else { -u };
            let mut idx = vec![0; self.d()];
            idx[i] = top;
            let c = x.coeff(&idx);
            let need = val_factorial(p, top as u64) as i64 - gn(p, n - 1, top) as i64;
            let diff = c.sub(&LaurentPoly::constant(md, self.d(), expected));
            let top_holds = known_vanishing(&diff, need.max(0) as u32);
            let rem = x.sub(&self.zero.pd_power(i, top).scale(expected).truncate(x.prec())?);
            axes.push(AxisIterate {
                axis: i,
                top_coeff: Some(c),
                expected,
                top_holds,
                remainder: lambda_membership(&rem, n - 1),
            });
        }
        Ok(IterateReport { n, axes })
    }
}

/// Some(true/false) when decidable at the known precision, None otherwise.
fn known_vanishing(f: &LaurentPoly, k: u32) -> Option<bool> {
    if k == 0 {
        return Some(true);
    }
    if !f.is_zero() {
        return Some(f.valuation() >= k);
    }
    (f.prec() >= k).then_some(true)
}

/// Largest exponent e such that Y^k / p^e is a product of Y and the
/// generators Y^{p^m} / p^{1 + p + ... + p^{m-1}} for 1 <= m <= n.
pub fn gn(p: u32, n: u32, k: u32) -> u32 {
    let pn = p.pow(n);
    let (q, mut r) = (k / pn, k % pn);
    let mut s = q;
    while r > 0 {
        s += r % p;
        r /= p;
    }
    (k - s) / (p - 1)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Membership {
    Member,
    NotMember {
        index: PdIndex,
        valuation: u32,
        threshold: u32,
    },
    Inconclusive {
        index: Option<PdIndex>,
        reason: String,
    },
}

/// Whether x = sum c_k Y^[k] lies in the D-span allowed at level n:
/// v_p(c_k) >= sum_i v_p(k_i!) - g_n(k_i) for every k.
pub fn lambda_membership(x: &PdPoly, n: u32) -> Membership {
    if x.truncation().is_truncated() {
        return Membership::Inconclusive {
            index: None,
            reason: "terms above the pd-degree bound were discarded".into(),
        };
    }
    let p = x.p();
    let mut pending = None;
    for (k, c) in x.terms() {
        let need: i64 = k
            .iter()
            .map(|&ki| val_factorial(p, ki as u64) as i64 - gn(p, n, ki) as i64)
            .sum();
        if need <= 0 {
            continue;
        }
        match known_vanishing(c, need as u32) {
            Some(true) => {}
            Some(false) => {
                return Membership::NotMember {
                    index: k.clone(),
                    valuation: c.valuation(),
                    threshold: need as u32,
                }
            }
            None => pending = Some(k.clone()),
        }
    }
    match pending {
        None => Membership::Member,
        Some(k) => Membership::Inconclusive {
            index: Some(k),
            reason: "coefficient known to fewer digits than the threshold".into(),
        },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxisIterate {
    pub axis: usize,
    pub top_coeff: Option<LaurentPoly>,
    /// (-1)^n u_n as a signed residue.
    pub expected: i128,
    pub top_holds: Option<bool>,
    pub remainder: Membership,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterateReport {
    pub n: u32,
    pub axes: Vec<AxisIterate>,
}

/// Outcome of a check that may be undecidable at the available precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl IterateReport {
    pub fn verdict(&self) -> Verdict {
        let mut v = Verdict::Pass;
        for a in &self.axes {
            match (&a.top_holds, &a.remainder) {
                (Some(false), _) | (_, Membership::NotMember { .. }) => return Verdict::Fail,
                (None, _) | (_, Membership::Inconclusive { .. }) => v = Verdict::Inconclusive,
                _ => {}
            }
        }
        v
    }
}

/// Whether delta(T_i) - delta(S_i), read in two sets of variables, vanishes
/// after identifying S with T.
pub fn delta_diff_in_j(ds: &DeltaStructure) -> Result<bool> {
    let d = ds.d();
    if 2 * d > MAX_VARS {
        return Err(Error::InvalidParameter(format!("{d} variables need {} Laurent slots", 2 * d)));
    }
    let md = ds.images()[0].modulus();
    let var = |i| LaurentPoly::var(md, 2 * d, i);
    let as_t: Vec<LaurentPoly> = (0..d).map(var).collect();
    let as_s: Vec<LaurentPoly> = (d..2 * d).map(var).collect();
    let collapse: Vec<LaurentPoly> = (0..2 * d).map(|i| var(i % d)).collect();
    for g in ds.images() {
        let diff = g.substitute(&as_t)?.sub(&g.substitute(&as_s)?);
        if !diff.substitute(&collapse)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Names of the pd variables of the envelope ring.
pub fn envelope_vars(d: usize) -> Arc<Vec<String>> {
    let names: Vec<String> = (1..=d).map(|i| format!("Y{i}")).collect();
    var_names(&names)
}
