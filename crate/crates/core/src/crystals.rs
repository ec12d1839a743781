//! Stratifications and p-connections on free modules of finite rank over
//! R_n = Z/p^{n+1}[T^{+-1}], and the comparison isomorphisms between the
//! evaluations at two delta-structures.
//!
//! The matrices theta_m act as operators on M: face maps move the pd
//! variables and leave matrix entries untouched.

use std::collections::BTreeMap;

use crate::cosimplicial::{CosimplicialLevel, Flavor};
use crate::delta::DeltaStructure;
use crate::envelope::EnvelopeRing;
use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::pd::{var_names, PdAssignment, PdIndex, PdPoly};
use crate::ring::{Mat, Ring};
use crate::scalar::Modulus;

pub type Matrix = Mat<LaurentPoly>;

fn check_square(ms: &[Matrix]) -> Result<(usize, Modulus, usize)> {
    let first = ms
        .first()
        .ok_or_else(|| Error::InvalidParameter("no matrices given".into()))?;
    let r = first.rows();
    let proto = first.get(0, 0);
    let (md, nv) = (proto.modulus(), proto.nvars());
    for m in ms {
        if m.rows() != r || m.cols() != r {
            return Err(Error::Mismatch("matrices of different shapes".into()));
        }
        if m.entries().any(|x| x.p() != md.p() || x.prec() != md.prec() || x.nvars() != nv) {
            return Err(Error::Mismatch("matrix entries over different rings".into()));
        }
    }
    Ok((r, md, nv))
}

/// phi^m for a commuting family.
fn monomial(phi: &[Matrix], m: &[u32], proto: &LaurentPoly) -> Matrix {
    let r = phi[0].rows();
    let mut acc = Mat::identity(r, proto);
    for (f, &k) in phi.iter().zip(m) {
        for _ in 0..k {
            acc = acc.mul(f);
        }
    }
    acc
}

/// All multi-indices of length `len` with entries summing to `total`.
fn indices_of_degree(len: usize, total: u32) -> Vec<PdIndex> {
    if len == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in indices_of_degree(len - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// A commuting, nilpotent family phi_1, ..., phi_k of r x r matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct PConnection {
    phi: Vec<Matrix>,
    /// Smallest K with every degree-K product zero.
    order: u32,
}

impl PConnection {
    pub fn new(phi: Vec<Matrix>) -> Result<Self> {
        let (r, md, _) = check_square(&phi)?;
        for (i, a) in phi.iter().enumerate() {
            for b in &phi[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(Error::NotCommuting);
                }
            }
        }
        let cap = (r as u32) * md.prec() * phi.len() as u32;
        let proto = phi[0].get(0, 0).clone();
        let mut order = None;
        for k in 0..=cap {
            let all_zero = indices_of_degree(phi.len(), k)
                .iter()
                .all(|m| monomial(&phi, m, &proto).is_zero());
            if all_zero {
                order = Some(k);
                break;
            }
        }
        let order = order.ok_or(Error::NotNilpotent { bound: cap as usize })?;
        Ok(Self { phi, order })
    }

    pub fn zero(md: Modulus, nvars: usize, rank: usize, d: usize) -> Result<Self> {
        let z = LaurentPoly::zero(md, nvars);
        Self::new(vec![Mat::zeros(rank, rank, &z); d])
    }

    pub fn phi(&self) -> &[Matrix] {
        &self.phi
    }

    pub fn rank(&self) -> usize {
        self.phi[0].rows()
    }

    pub fn d(&self) -> usize {
        self.phi.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn modulus(&self) -> Modulus {
        self.proto().modulus()
    }

    fn proto(&self) -> &LaurentPoly {
        self.phi[0].get(0, 0)
    }

    pub fn monomial(&self, m: &[u32]) -> Matrix {
        monomial(&self.phi, m, self.proto())
    }

    /// nabla(y) = -sum_i phi_i(y) dT_i/p + p d(y), returned as the d
    /// coordinate vectors along dT_1/p, ..., dT_d/p. The matrices give the
    /// action on the basis; coordinates are differentiated by Leibniz.
    pub fn nabla(&self, y: &[LaurentPoly]) -> Result<Vec<Vec<LaurentPoly>>> {
        if y.len() != self.rank() {
            return Err(Error::Mismatch(format!("vector of length {} for rank {}", y.len(), self.rank())));
        }
        let p = self.modulus().p() as i128;
        Ok(self
            .phi
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let fy = f.mul_vec(y);
                fy.iter()
                    .zip(y)
                    .map(|(a, yj)| yj.derivative(i).scale(p).sub(a))
                    .collect()
            })
            .collect())
    }

    /// phi_i on M1 (x) M2 is phi_i (x) 1 + 1 (x) phi_i.
    pub fn tensor(&self, o: &Self) -> Result<Self> {
        if self.d() != o.d() {
            return Err(Error::Mismatch("connections in different numbers of directions".into()));
        }
        let (ia, ib) = (
            Mat::identity(self.rank(), self.proto()),
            Mat::identity(o.rank(), o.proto()),
        );
        let phi = self
            .phi
            .iter()
            .zip(&o.phi)
            .map(|(a, b)| kron(a, &ib).add(&kron(&ia, b)))
            .collect();
        Self::new(phi)
    }
}

pub fn kron<R: Ring>(a: &Mat<R>, b: &Mat<R>) -> Mat<R> {
    Mat::from_fn(a.rows() * b.rows(), a.cols() * b.cols(), |i, j| {
        let (ai, bi) = (i / b.rows(), i % b.rows());
        let (aj, bj) = (j / b.cols(), j % b.cols());
        a.get(ai, aj).mul(b.get(bi, bj))
    })
}

/// nabla(f x) for a function f and a coordinate vector x.
pub fn apply_connection(c: &PConnection, f: &LaurentPoly, x: &[LaurentPoly]) -> Result<Vec<Vec<LaurentPoly>>> {
    let y: Vec<LaurentPoly> = x.iter().map(|xj| f.mul(xj)).collect();
    c.nabla(&y)
}

/// epsilon = sum_m theta_m X_1^[m], one pd variable per axis and per
/// structure; missing indices are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Stratification {
    pub flavor: Flavor,
    pub d: usize,
    theta: BTreeMap<PdIndex, Matrix>,
    rank: usize,
    proto: LaurentPoly,
}

impl Stratification {
    /// `flavor` is Plain for a single structure or Sigma{h}; indices have
    /// length d times the number of structures.
    pub fn new(flavor: Flavor, d: usize, theta: BTreeMap<PdIndex, Matrix>) -> Result<Self> {
        let ms: Vec<Matrix> = theta.values().cloned().collect();
        let (rank, _, _) = check_square(&ms)?;
        let len = d * blocks(flavor);
        if theta.keys().any(|k| k.len() != len) {
            return Err(Error::Mismatch(format!("theta indices must have length {len}")));
        }
        let proto = ms[0].get(0, 0).zero_like();
        let theta = theta.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        Ok(Self {
            flavor,
            d,
            theta,
            rank,
            proto,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn theta(&self, m: &[u32]) -> Matrix {
        self.theta
            .get(m)
            .cloned()
            .unwrap_or_else(|| Mat::zeros(self.rank, self.rank, &self.proto))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PdIndex, &Matrix)> {
        self.theta.iter()
    }

    /// One more than the largest |m| with theta_m nonzero.
    pub fn support(&self) -> u32 {
        self.theta.keys().map(|k| k.iter().sum::<u32>() + 1).max().unwrap_or(0)
    }

    fn index_len(&self) -> usize {
        self.d * blocks(self.flavor)
    }

    /// theta_m = theta'_a (x) theta''_b summed over a + b = m with binomial
    /// weights, i.e. the product of the two exponentials.
    pub fn tensor(&self, o: &Self) -> Result<Self> {
        if self.flavor != o.flavor || self.d != o.d {
            return Err(Error::Mismatch("stratifications over different rings".into()));
        }
        let md = self.proto.modulus();
        let mut out: BTreeMap<PdIndex, Matrix> = BTreeMap::new();
        for (a, ta) in &self.theta {
            for (b, tb) in &o.theta {
                let m: PdIndex = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let w = a
                    .iter()
                    .zip(b)
                    .fold(1i128, |acc, (&x, &y)| md.mul(acc, crate::scalar::binom_mod((x + y) as u64, x as u64, &md)));
                let t = kron(ta, tb).map(|e| e.scale(w));
                let slot = out.entry(m).or_insert_with(|| Mat::zeros(t.rows(), t.cols(), &self.proto));
                *slot = slot.add(&t);
            }
        }
        Self::new(self.flavor, self.d, out)
    }
}

fn blocks(flavor: Flavor) -> usize {
    match flavor {
        Flavor::Sigma { h } => h,
        _ => 1,
    }
}

/// epsilon = exp(sum phi_i X_{1,i}), i.e. theta_m = phi^m.
pub fn from_connection(c: &PConnection) -> Stratification {
    exp_stratification(c, Flavor::Plain, c.d())
}

fn exp_stratification(c: &PConnection, flavor: Flavor, d: usize) -> Stratification {
    let mut theta = BTreeMap::new();
    for k in 0..c.order() {
        for m in indices_of_degree(c.phi.len(), k) {
            theta.insert(m.clone(), c.monomial(&m));
        }
    }
    if theta.is_empty() {
        // rank-r module over the zero ring
        theta.insert(vec![0; c.phi.len()], Mat::zeros(c.rank(), c.rank(), c.proto()));
    }
    Stratification::new(flavor, d, theta).expect("shapes come from a valid connection")
}

/// phi_i = theta_{e_i}, after checking theta_0 = 1 and theta_m = phi^m.
pub fn to_connection(s: &Stratification) -> Result<PConnection> {
    let len = s.index_len();
    let id = Mat::identity(s.rank, &s.proto);
    if s.theta(&vec![0; len]) != id {
        return Err(Error::NotACrystal("theta_0 is not the identity".into()));
    }
    let phi: Vec<Matrix> = (0..len)
        .map(|i| {
            let mut e = vec![0; len];
            e[i] = 1;
            s.theta(&e)
        })
        .collect();
    let c = PConnection::new(phi).map_err(|e| Error::NotACrystal(format!("first-order terms: {e}")))?;
    let top = s.support().max(c.order());
    for k in 2..top {
        for m in indices_of_degree(len, k) {
            if s.theta(&m) != c.monomial(&m) {
                return Err(Error::NotACrystal(format!(
                    "theta at {m:?} differs from the product of first-order terms"
                )));
            }
        }
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CocycleReport {
    pub cocycle: bool,
    pub degeneracy: bool,
    /// First mismatching level-2 coefficient, if any.
    pub witness: Option<String>,
}

impl CocycleReport {
    pub fn holds(&self) -> bool {
        self.cocycle && self.degeneracy
    }
}

type Expansion = BTreeMap<PdIndex, Matrix>;

fn accumulate(acc: &mut Expansion, q: &PdPoly, a: &Matrix) {
    for (idx, c) in q.terms() {
        let t = a.map(|x| x.mul(c));
        match acc.get_mut(idx) {
            Some(slot) => *slot = slot.add(&t),
            None => {
                acc.insert(idx.clone(), t);
            }
        }
    }
}

fn nonzero(e: Expansion) -> Expansion {
    e.into_iter().filter(|(_, m)| !m.is_zero()).collect()
}

/// Expands p_2^*(eps) p_0^*(eps) and p_1^*(eps) over the level-2 ring and
/// compares them coefficientwise; also checks sigma_0^*(eps) = 1.
pub fn cocycle_check(s: &Stratification, bound: Option<u32>) -> Result<CocycleReport> {
    if let Some(b) = bound {
        if 2 * s.support() > b + 1 {
            return Err(Error::Inconclusive(format!(
                "support {} needs pd-degree bound {}",
                s.support(),
                2 * s.support() - 1
            )));
        }
    }
    let md = s.proto.modulus();
    let level1 = CosimplicialLevel::new(s.flavor, 1, md, s.d)?;
    let zero = level1.zero().clone();
    let mono = |m: &PdIndex| {
        let mut idx = vec![0; zero.vars().len()];
        for l in 0..blocks(s.flavor) {
            for i in 0..s.d {
                idx[level1.x_index(1, l, i)] = m[l * s.d + i];
            }
        }
        let mut x = zero.zero_of();
        x.add_term(idx, LaurentPoly::constant(md, s.d, 1));
        x
    };
    let (f0, f1, f2) = (level1.face(0)?, level1.face(1)?, level1.face(2)?);
    let pulled = |a: &PdAssignment| -> Result<Vec<(Matrix, PdPoly)>> {
        s.terms()
            .map(|(m, t)| Ok((t.clone(), mono(m).substitute(a)?)))
            .collect()
    };
    let (p0, p1, p2) = (pulled(&f0)?, pulled(&f1)?, pulled(&f2)?);
    let mut lhs = Expansion::new();
    for (tk, qk) in &p2 {
        for (tm, qm) in &p0 {
            accumulate(&mut lhs, &qk.mul(qm), &tk.mul(tm));
        }
    }
    let mut rhs = Expansion::new();
    for (tm, qm) in &p1 {
        accumulate(&mut rhs, qm, tm);
    }
    let (lhs, rhs) = (nonzero(lhs), nonzero(rhs));
    let witness = lhs
        .keys()
        .chain(rhs.keys())
        .find(|k| lhs.get(*k) != rhs.get(*k))
        .map(|k| {
            let show = |e: &Expansion| e.get(k).map_or("0".to_string(), fmt_matrix);
            format!("coefficient {k:?}: {} vs {}", show(&lhs), show(&rhs))
        });
    let sigma = level1.degeneracy(0)?;
    let mut deg = Expansion::new();
    for (m, t) in s.terms() {
        accumulate(&mut deg, &mono(m).substitute(&sigma)?, t);
    }
    let deg = nonzero(deg);
    let base_len = CosimplicialLevel::new(s.flavor, 0, md, s.d)?.zero().vars().len();
    let mut id = Expansion::new();
    id.insert(vec![0; base_len], Mat::identity(s.rank, &s.proto));
    Ok(CocycleReport {
        cocycle: witness.is_none(),
        degeneracy: deg == nonzero(id),
        witness,
    })
}

pub fn fmt_matrix(m: &Matrix) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            let cols: Vec<String> = (0..m.cols()).map(|j| m.get(i, j).to_string()).collect();
            format!("[{}]", cols.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

/// exp(sign * sum_i phi_i Y_{v_i}) over a pd ring, where `vars[i]` is the pd
/// variable paired with phi_i.
pub(crate) fn exp_matrix(c: &PConnection, ring: &PdPoly, vars: &[usize], sign: i128) -> Mat<PdPoly> {
    let r = c.rank();
    let mut out = Mat::zeros(r, r, ring);
    for k in 0..c.order() {
        for m in indices_of_degree(c.d(), k) {
            let mut idx = vec![0; ring.vars().len()];
            for (i, &v) in vars.iter().enumerate() {
                idx[v] = m[i];
            }
            let mut mono = ring.zero_of();
            let s = if k % 2 == 1 { sign } else { 1 };
            mono.add_term(idx, LaurentPoly::constant(ring.modulus(), ring.nvars(), s));
            let coeff = c.monomial(&m).map(|x| ring.from_laurent(x).mul(&mono));
            out = out.add(&coeff);
        }
    }
    out
}

/// iota_12 = exp(-sum_i phi_{2,i} Y_i) over the envelope ring.
pub fn comparison_iso(e: &EnvelopeRing, c2: &PConnection) -> Result<Mat<PdPoly>> {
    check_compatible(e, c2)?;
    let vars: Vec<usize> = (0..e.d()).collect();
    Ok(exp_matrix(c2, &e.zero().with_bound(None), &vars, -1))
}

fn check_compatible(e: &EnvelopeRing, c: &PConnection) -> Result<()> {
    if c.d() != e.d() || c.modulus().p() != e.p() {
        return Err(Error::Mismatch("connection and envelope over different rings".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescentReport {
    /// p_1^*(iota) = eps_N p_0^*(iota) over the level-1 tilde ring.
    pub diagram: bool,
    /// iota_21 iota_12 = 1.
    pub inverse: bool,
    /// The connection read off iota_12 equals the one it was built from.
    pub phi_match: bool,
    /// iota_13 = iota_23 iota_12, when a third structure is supplied.
    pub triple: Option<bool>,
}

impl DescentReport {
    pub fn holds(&self) -> bool {
        self.diagram && self.inverse && self.phi_match && self.triple != Some(false)
    }

    pub fn check(&self) -> Result<()> {
        if self.holds() {
            return Ok(());
        }
        let what = if !self.diagram {
            "descent square"
        } else if !self.inverse {
            "inverse"
        } else if !self.phi_match {
            "extracted connection"
        } else {
            "triple composite"
        };
        Err(Error::DiagramViolated(what.into()))
    }
}

fn mat_sub(a: &Mat<PdPoly>, f: &PdAssignment) -> Result<Mat<PdPoly>> {
    a.try_map(|x| x.substitute(f))
}

/// Checks the comparison isomorphism built from `c2`.
pub fn verify_descent(e: &EnvelopeRing, c2: &PConnection, third: Option<&DeltaStructure>) -> Result<DescentReport> {
    check_compatible(e, c2)?;
    let md = e.zero().modulus();
    let d = e.d();
    let r = c2.rank();
    let vars: Vec<usize> = (0..d).collect();

    // iota over level 0 of the tilde ring, whose pd variables are Y
    let l0 = CosimplicialLevel::new(Flavor::Tilde, 0, md, d)?;
    let l1 = CosimplicialLevel::new(Flavor::Tilde, 1, md, d)?;
    let iota0 = exp_matrix(c2, l0.zero(), &vars, -1);
    let up0 = mat_sub(&iota0, &l0.face(0)?)?;
    let up1 = mat_sub(&iota0, &l0.face(1)?)?;
    let zvars: Vec<usize> = (0..d).map(|i| l1.x_index(1, 0, i)).collect();
    let eps = exp_matrix(c2, l1.zero(), &zvars, 1);
    let diagram = up1 == eps.mul(&up0);

    let iota = comparison_iso(e, c2)?;
    let ring = iota.get(0, 0).zero_of();
    let lin: Vec<Matrix> = (0..d)
        .map(|i| {
            let mut idx = vec![0; d];
            idx[i] = 1;
            iota.map(|x| x.coeff(&idx).neg())
        })
        .collect();
    let phi_match = lin.as_slice() == c2.phi();
    let c1 = PConnection::new(lin)?;
    let back = exp_matrix(&c1, &ring, &vars, 1);
    let inverse = back.mul(&iota) == Mat::identity(r, &ring);

    let triple = match third {
        None => None,
        Some(d3) => {
            let g2 = e.delta2().images();
            for (a, b) in g2.iter().zip(d3.images()) {
                if !a.sub(b).mod_p().is_zero() {
                    return Err(Error::AssumptionViolated("third structure not congruent mod p".into()));
                }
            }
            Some(triple_holds(c2, md, d)?)
        }
    };
    Ok(DescentReport {
        diagram,
        inverse,
        phi_match,
        triple,
    })
}

/// With Y_13 = Y_12 + Y_23, exp(-phi Y_13) = exp(-phi Y_23) exp(-phi Y_12).
fn triple_holds(c: &PConnection, md: Modulus, d: usize) -> Result<bool> {
    let names: Vec<String> = ["Y12", "Y23"]
        .iter()
        .flat_map(|b| (1..=d).map(move |i| format!("{b}_{i}")))
        .collect();
    let ring = PdPoly::zero(md, d, var_names(&names), None);
    let v12: Vec<usize> = (0..d).collect();
    let v23: Vec<usize> = (d..2 * d).collect();
    let single_names: Vec<String> = (1..=d).map(|i| format!("Y13_{i}")).collect();
    let single = PdPoly::zero(md, d, var_names(&single_names), None);
    let i13 = exp_matrix(c, &single, &v12, -1);
    let sum = PdAssignment {
        target: ring.clone(),
        laurent: (0..d).map(|i| ring.laurent_var(i)).collect(),
        pd: (0..d).map(|i| vec![(i, 1), (d + i, 1)]).collect(),
    };
    let lhs = mat_sub(&i13, &sum)?;
    let rhs = exp_matrix(c, &ring, &v23, -1).mul(&exp_matrix(c, &ring, &v12, -1));
    Ok(lhs == rhs)
}

/// h structures with matrices phi_i^(t) along dT_i^(t)/p.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaConnection {
    pub h: usize,
    pub d: usize,
    inner: PConnection,
}

impl SigmaConnection {
    /// `phi[t][i]` is phi_i^(t).
    pub fn new(phi: Vec<Vec<Matrix>>) -> Result<Self> {
        let h = phi.len();
        if h == 0 || h > 2 {
            return Err(Error::InvalidParameter(format!("{h} structures (supported: 1 or 2)")));
        }
        let d = phi[0].len();
        if phi.iter().any(|v| v.len() != d) {
            return Err(Error::Mismatch("structures with different numbers of directions".into()));
        }
        let inner = PConnection::new(phi.into_iter().flatten().collect())?;
        Ok(Self { h, d, inner })
    }

    pub fn from_connection(c: &PConnection) -> Self {
        Self {
            h: 1,
            d: c.d(),
            inner: c.clone(),
        }
    }

    pub fn phi(&self, t: usize, i: usize) -> &Matrix {
        &self.inner.phi[t * self.d + i]
    }

    pub fn as_connection(&self) -> &PConnection {
        &self.inner
    }

    pub fn flavor(&self) -> Flavor {
        if self.h == 1 {
            Flavor::Plain
        } else {
            Flavor::Sigma { h: self.h }
        }
    }
}

/// exp(sum_t sum_i phi_i^(t) X_{1,i}^(t)).
pub fn sigma_stratification(sc: &SigmaConnection) -> Stratification {
    exp_stratification(&sc.inner, sc.flavor(), sc.d)
}

pub fn sigma_cocycle_check(sc: &SigmaConnection, bound: Option<u32>) -> Result<CocycleReport> {
    cocycle_check(&sigma_stratification(sc), bound)
}

/// Extends a connection over Sigma to Sigma' with `extra` further
/// structures: the new directions only see the derivation, so their
/// matrices are zero.
pub fn sigma_base_change(sc: &SigmaConnection, extra: usize) -> Result<SigmaConnection> {
    let zero = Mat::zeros(sc.inner.rank(), sc.inner.rank(), sc.inner.proto());
    let mut phi: Vec<Vec<Matrix>> = (0..sc.h)
        .map(|t| (0..sc.d).map(|i| sc.phi(t, i).clone()).collect())
        .collect();
    phi.extend((0..extra).map(|_| vec![zero.clone(); sc.d]));
    SigmaConnection::new(phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn md(p: u32, n: u32) -> Modulus {
        Modulus::new(p, n).unwrap()
    }

    fn mat(md: Modulus, rows: &[&[i128]]) -> Matrix {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| LaurentPoly::constant(md, 1, rows[i][j]))
    }

    #[test]
    fn small_stratifications() {
        let m = md(2, 2);
        let c = PConnection::new(vec![mat(m, &[&[0, 2], &[0, 0]])]).unwrap();
        let s = from_connection(&c);
        assert_eq!(s.support(), 2);
        assert_eq!(s.theta(&[1]), mat(m, &[&[0, 2], &[0, 0]]));
        let c = PConnection::new(vec![mat(m, &[&[2]])]).unwrap();
        assert_eq!(c.order(), 2);
        assert_eq!(from_connection(&c).theta(&[1]), mat(m, &[&[2]]));
        let r = PConnection::new(vec![mat(m, &[&[0, 1], &[0, 0]]), mat(m, &[&[0, 0], &[1, 0]])]);
        assert_eq!(r, Err(Error::NotCommuting));
        let r = PConnection::new(vec![mat(m, &[&[1]])]);
        assert!(matches!(r, Err(Error::NotNilpotent { .. })));
    }

    #[test]
    fn missing_second_order_term() {
        let m = md(3, 2);
        let j = mat(m, &[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
        let mut theta = BTreeMap::new();
        theta.insert(vec![0], Mat::identity(3, &LaurentPoly::constant(m, 1, 0)));
        theta.insert(vec![1], j);
        let s = Stratification::new(Flavor::Plain, 1, theta).unwrap();
        assert!(matches!(to_connection(&s), Err(Error::NotACrystal(_))));
        let rep = cocycle_check(&s, None).unwrap();
        assert!(!rep.cocycle);
        assert!(rep.degeneracy);
    }

    #[test]
    fn bad_identity_term() {
        let m = md(3, 2);
        let mut theta = BTreeMap::new();
        theta.insert(vec![0], mat(m, &[&[2]]));
        let s = Stratification::new(Flavor::Plain, 1, theta).unwrap();
        assert!(!cocycle_check(&s, None).unwrap().degeneracy);
    }

    #[test]
    fn trivial_stratification_gives_zero_connection() {
        let m = md(5, 2);
        let mut theta = BTreeMap::new();
        theta.insert(vec![0], mat(m, &[&[1]]));
        let s = Stratification::new(Flavor::Plain, 1, theta).unwrap();
        let c = to_connection(&s).unwrap();
        assert!(c.phi()[0].is_zero());
    }

    #[test]
    fn leibniz_instances() {
        let m = md(3, 3);
        let c = PConnection::new(vec![mat(m, &[&[0, 3], &[0, 0]])]).unwrap();
        let t = LaurentPoly::var(m, 1, 0);
        let one = LaurentPoly::constant(m, 1, 1);
        let x = vec![LaurentPoly::constant(m, 1, 2), LaurentPoly::constant(m, 1, 1)];
        let nt = apply_connection(&c, &t, &x).unwrap();
        let n1 = apply_connection(&c, &one, &x).unwrap();
        let diff: Vec<LaurentPoly> = nt[0].iter().zip(&n1[0]).map(|(a, b)| a.sub(&t.mul(b))).collect();
        assert_eq!(diff, x.iter().map(|v| v.scale(3)).collect::<Vec<_>>());
        assert_eq!(n1[0], c.phi()[0].mul_vec(&x).iter().map(|v| v.neg()).collect::<Vec<_>>());
    }

    #[test]
    fn comparison_for_worked_pair() {
        let m = md(2, 3);
        let d1 = DeltaStructure::frobenius_monomial(2, 3, 1).unwrap();
        let d2 = DeltaStructure::new(vec![LaurentPoly::var(m, 1, 0).pow(2).scale(2)]).unwrap();
        let e = EnvelopeRing::new(d1, d2.clone(), None).unwrap();
        let c = PConnection::new(vec![mat(m, &[&[2]])]).unwrap();
        let r = verify_descent(&e, &c, Some(&d2)).unwrap();
        assert!(r.holds(), "{r:?}");
        let zero = PConnection::zero(m, 1, 2, 1).unwrap();
        let iota = comparison_iso(&e, &zero).unwrap();
        assert_eq!(iota, Mat::identity(2, iota.get(0, 0)));
    }

    #[test]
    fn sigma_cases() {
        let m = md(2, 2);
        let f = mat(m, &[&[0, 2], &[0, 0]]);
        let sc = SigmaConnection::new(vec![vec![f.clone()], vec![f.clone()]]).unwrap();
        assert!(sigma_cocycle_check(&sc, Some(8)).unwrap().holds());
        let c = PConnection::new(vec![f.clone()]).unwrap();
        let single = SigmaConnection::from_connection(&c);
        assert_eq!(sigma_stratification(&single), from_connection(&c));
        let bc = sigma_base_change(&single, 1).unwrap();
        assert_eq!(bc.phi(0, 0), &f);
        assert!(bc.phi(1, 0).is_zero());
        assert!(sigma_cocycle_check(&bc, None).unwrap().holds());
    }
}
