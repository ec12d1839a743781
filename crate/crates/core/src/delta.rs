//! delta-structures on Z_p[T_1^{+-1}, ..., T_d^{+-1}] determined by the images
//! delta(T_i), with phi(x) = x^p + p delta(x).
//!
//! Precision: delta divides by p, so delta(f) is known to one digit less than f.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, Mono, MAX_VARS};
use crate::scalar::PadicScalar;
use crate::witt::WittVec;

/// C(p, k) / p for 0 < k < p.
fn binom_over_p(p: u32, k: u32) -> i128 {
    let mut c: i128 = 1;
    for i in 0..k {
        c = c * (p - i) as i128 / (i + 1) as i128;
    }
    c / p as i128
}

#[derive(Debug)]
pub struct DeltaStructure {
    images: Vec<LaurentPoly>,
    phi_t: Vec<LaurentPoly>,
    /// delta(T_i^k) for single variables, keyed by (i, k).
    monomials: Mutex<HashMap<(usize, i32), LaurentPoly>>,
}

impl Clone for DeltaStructure {
    fn clone(&self) -> Self {
        Self::new(self.images.clone()).expect("already validated")
    }
}

impl PartialEq for DeltaStructure {
    fn eq(&self, o: &Self) -> bool {
        self.images == o.images
    }
}

impl DeltaStructure {
    /// `images[i]` is delta(T_{i+1}); all images share p, precision and d.
    pub fn new(images: Vec<LaurentPoly>) -> Result<Self> {
        let d = images.len();
        if d == 0 || d > MAX_VARS {
            return Err(Error::InvalidParameter(format!("{d} variables")));
        }
        let (p, prec) = (images[0].p(), images[0].prec());
        if images.iter().any(|g| g.p() != p || g.prec() != prec || g.nvars() != d) {
            return Err(Error::Mismatch("delta images over different rings".into()));
        }
        let phi_t = images
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let t = LaurentPoly::var(g.modulus(), d, i);
                t.pow(p as u64).add(&g.scale(p as i128))
            })
            .collect();
        Ok(Self {
            images,
            phi_t,
            monomials: Mutex::new(HashMap::new()),
        })
    }

    /// delta(T_i) = 0, so phi(T_i) = T_i^p.
    pub fn frobenius_monomial(p: u32, prec: u32, d: usize) -> Result<Self> {
        let z = LaurentPoly::new(p, prec, d)?;
        Self::new(vec![z; d])
    }

    pub fn p(&self) -> u32 {
        self.images[0].p()
    }

    pub fn prec(&self) -> u32 {
        self.images[0].prec()
    }

    pub fn d(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[LaurentPoly] {
        &self.images
    }

    pub fn phi_images(&self) -> &[LaurentPoly] {
        &self.phi_t
    }

    pub fn var(&self, i: usize) -> LaurentPoly {
        LaurentPoly::var(self.images[0].modulus(), self.d(), i)
    }

    fn check_ring(&self, f: &LaurentPoly) -> Result<()> {
        if f.p() != self.p() || f.nvars() != self.d() {
            return Err(Error::Mismatch(format!(
                "element over p = {} in {} variables, structure over p = {} in {}",
                f.p(),
                f.nvars(),
                self.p(),
                self.d()
            )));
        }
        if f.prec() > self.prec() {
            return Err(Error::Mismatch(format!(
                "element known to p^{}, structure only to p^{}",
                f.prec(),
                self.prec()
            )));
        }
        Ok(())
    }

    /// phi(f) by substituting T_i -> T_i^p + p delta(T_i).
    pub fn phi_of(&self, f: &LaurentPoly) -> Result<LaurentPoly> {
        self.check_ring(f)?;
        let imgs: Vec<LaurentPoly> = self
            .phi_t
            .iter()
            .map(|g| g.truncate(f.prec()))
            .collect::<Result<_>>()?;
        f.substitute(&imgs)
    }

    /// (phi(f) - f^p) / p.
    pub fn delta_direct(&self, f: &LaurentPoly) -> Result<LaurentPoly> {
        let diff = self.phi_of(f)?.sub(&f.pow(self.p() as u64));
        diff.exact_div_p(1)
    }

    /// delta(f) from the additivity defect, the product rule and the
    /// generator images, cross-checked against (phi(f) - f^p)/p.
    pub fn delta_of(&self, f: &LaurentPoly) -> Result<LaurentPoly> {
        let s = self.delta_structural(f)?;
        let direct = self.delta_direct(f)?;
        if s != direct {
            return Err(Error::CrossCheck(format!(
                "structural delta {s} differs from (phi(f) - f^p)/p = {direct}"
            )));
        }
        Ok(s)
    }

    pub fn delta_structural(&self, f: &LaurentPoly) -> Result<LaurentPoly> {
        self.check_ring(f)?;
        let n = f.prec();
        if n < 2 {
            return Err(Error::PrecisionExhausted {
                what: "delta of an element known only mod p".into(),
            });
        }
        let md = f.modulus();
        let p = self.p();
        let mut sum = LaurentPoly::zero(md, self.d());
        let mut delta = LaurentPoly::zero(md.with_prec(n - 1)?, self.d());
        for (e, c) in f.terms() {
            let t = LaurentPoly::monomial(md, self.d(), *e, *c);
            let dt = self.delta_term(*e, PadicScalar::from_modulus(md, *c))?;
            // delta(a + b) = delta(a) + delta(b) - sum_k C(p,k)/p a^k b^(p-k)
            let mut defect = LaurentPoly::zero(md, self.d());
            if !sum.is_zero() {
                let mut ak = sum.clone();
                for k in 1..p {
                    let c = binom_over_p(p, k);
                    defect = defect.add(&ak.mul(&t.pow((p - k) as u64)).scale(c));
                    ak = ak.mul(&sum);
                }
            }
            delta = delta.add(&dt).sub(&defect);
            sum = sum.add(&t);
        }
        delta.truncate(n - 1)
    }

    /// delta(c T^e) = c^p delta(T^e) + T^{pe} delta(c) + p delta(c) delta(T^e).
    fn delta_term(&self, e: Mono, c: PadicScalar) -> Result<LaurentPoly> {
        let md = c.modulus();
        let d = self.d();
        let dm = self.delta_monomial(e)?.truncate(md.prec())?;
        let dc = c.delta()?;
        let pe: Mono = e.map(|x| x * self.p() as i32);
        let dc_lift = dc.residue();
        let a = dm.scale(c.pow(self.p() as u64).residue());
        let b = LaurentPoly::monomial(md, d, pe, dc_lift);
        let cross = dm.scale(dc_lift * self.p() as i128);
        a.add(&b).add(&cross).truncate(md.prec() - 1)
    }

    /// delta(T^e) by the product rule across variables.
    fn delta_monomial(&self, e: Mono) -> Result<LaurentPoly> {
        let md = self.images[0].modulus();
        let d = self.d();
        let mut x = LaurentPoly::constant(md, d, 1);
        let mut dx = LaurentPoly::zero(md, d);
        for (i, &k) in e.iter().take(d).enumerate() {
            if k == 0 {
                continue;
            }
            let mut m = [0; MAX_VARS];
            m[i] = k;
            let y = LaurentPoly::monomial(md, d, m, 1);
            let dy = self.delta_power(i, k)?;
            dx = self.product_rule(&x, &dx, &y, &dy);
            x = x.mul(&y);
        }
        Ok(dx)
    }

    /// delta(xy) = x^p delta(y) + y^p delta(x) + p delta(x) delta(y).
    fn product_rule(&self, x: &LaurentPoly, dx: &LaurentPoly, y: &LaurentPoly, dy: &LaurentPoly) -> LaurentPoly {
        let p = self.p() as u64;
        x.pow(p)
            .mul(dy)
            .add(&y.pow(p).mul(dx))
            .add(&dx.mul(dy).scale(p as i128))
    }

    /// delta(T_i^k) for k in Z by square-and-multiply on the product rule.
    fn delta_power(&self, i: usize, k: i32) -> Result<LaurentPoly> {
        if let Some(v) = self.monomials.lock().unwrap().get(&(i, k)) {
            return Ok(v.clone());
        }
        let md = self.images[0].modulus();
        let d = self.d();
        let v = if k == 1 {
            self.images[i].clone()
        } else if k == -1 {
            // 0 = delta(T T^-1) gives delta(T^-1) = -T^-p delta(T) / phi(T)
            let mut m = [0; MAX_VARS];
            m[i] = -(self.p() as i32);
            let tp = LaurentPoly::monomial(md, d, m, 1);
            tp.mul(&self.images[i]).mul(&self.phi_t[i].invert()?).neg()
        } else {
            let unit = k.signum();
            let half = k / 2;
            let rest = k - 2 * half;
            let mut mh = [0; MAX_VARS];
            mh[i] = half;
            let xh = LaurentPoly::monomial(md, d, mh, 1);
            let dh = self.delta_power(i, half)?;
            let dx = self.product_rule(&xh, &dh, &xh, &dh);
            if rest == 0 {
                dx
            } else {
                let mut mu = [0; MAX_VARS];
                mu[i] = unit;
                let y = LaurentPoly::monomial(md, d, mu, 1);
                let dy = self.delta_power(i, unit)?;
                self.product_rule(&xh.mul(&xh), &dx, &y, &dy)
            }
        };
        self.monomials.lock().unwrap().insert((i, k), v.clone());
        Ok(v)
    }

    /// n-fold iterate of delta.
    pub fn delta_iter(&self, f: &LaurentPoly, n: u32) -> Result<LaurentPoly> {
        let mut x = f.clone();
        for _ in 0..n {
            x = self.delta_of(&x)?;
        }
        Ok(x)
    }

    pub fn phi_iter(&self, f: &LaurentPoly, n: u32) -> Result<LaurentPoly> {
        let mut x = f.clone();
        for _ in 0..n {
            x = self.phi_of(&x)?;
        }
        Ok(x)
    }

    /// Witt coordinates (x, delta_1(x), ..., delta_{m+1}(x)) of the canonical
    /// lift, solved from ghost(.)_n = phi^n(x). Entry n is known mod p^{N-n}.
    pub fn joyal_coords(&self, x: &LaurentPoly, m: usize) -> Result<JoyalVector> {
        self.check_ring(x)?;
        let w = x.prec();
        if (w as usize) < m + 2 {
            return Err(Error::PrecisionExhausted {
                what: format!("Joyal coordinates up to index {} need precision {}", m + 1, m + 2),
            });
        }
        let p = self.p() as u64;
        let mut entries = vec![x.clone()];
        let mut phin = x.clone();
        for n in 1..=m + 1 {
            phin = self.phi_of(&phin)?;
            let mut rest = phin.clone();
            for (i, a) in entries.iter().enumerate() {
                let t = a.pow(p.pow((n - i) as u32)).mul_p_pow(i as u32)?;
                rest = rest.sub(&t);
            }
            let dn = rest.exact_div_p(n as u32).map_err(|e| match e {
                Error::NotDivisible { .. } => Error::NonIntegral { index: n },
                other => other,
            })?;
            entries.push(dn);
        }
        Ok(JoyalVector { m, entries })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JoyalVector {
    pub m: usize,
    pub entries: Vec<LaurentPoly>,
}

impl JoyalVector {
    /// Ghost components with each entry lifted back to full precision.
    pub fn ghost(&self, p: u32) -> Result<Vec<LaurentPoly>> {
        (0..self.entries.len())
            .map(|n| {
                let mut w = self.entries[0].pow((p as u64).pow(n as u32));
                for i in 1..=n {
                    let t = self.entries[i].pow((p as u64).pow((n - i) as u32)).mul_p_pow(i as u32)?;
                    w = w.add(&t);
                }
                Ok(w)
            })
            .collect()
    }

    pub fn mod_p(&self, p: u32) -> Result<WittVec<LaurentPoly>> {
        WittVec::new(p, self.entries.iter().map(|e| e.mod_p()).collect())
    }
}

/// Largest m with delta_1 = delta_2 mod p^m on the generators and on every
/// sample whose difference is nonzero at its precision, capped at N.
pub fn congruence_order(d1: &DeltaStructure, d2: &DeltaStructure, samples: &[LaurentPoly]) -> Result<u32> {
    if d1.d() != d2.d() || d1.p() != d2.p() {
        return Err(Error::Mismatch("delta-structures on different rings".into()));
    }
    let cap = d1.prec().min(d2.prec());
    let mut m = cap;
    for (a, b) in d1.images().iter().zip(d2.images()) {
        m = m.min(a.sub(b).valuation());
    }
    for s in samples {
        let diff = d1.delta_of(s)?.sub(&d2.delta_of(s)?);
        if !diff.is_zero() {
            m = m.min(diff.valuation());
        }
    }
    Ok(m)
}

/// delta_1(r) - delta_2(r) = p^m x; returns x.
fn congruence_witness(d1: &DeltaStructure, d2: &DeltaStructure, r: &LaurentPoly, m: u32) -> Result<LaurentPoly> {
    let diff = d1.delta_of(r)?.sub(&d2.delta_of(r)?);
    if m == 0 {
        return Ok(diff);
    }
    diff.exact_div_p(m).map_err(|e| match e {
        Error::NotDivisible { .. } => Error::AssumptionViolated(format!(
            "delta_1(r) - delta_2(r) = {diff} is not divisible by p^{m}"
        )),
        other => other,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub l: u32,
    /// The difference that must vanish to the stated order.
    pub residual: LaurentPoly,
    pub required_valuation: u32,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HighCongruenceReport {
    pub m: u32,
    pub x: LaurentPoly,
    pub residuals: Vec<Residual>,
}

impl HighCongruenceReport {
    pub fn holds(&self) -> bool {
        self.residuals.iter().all(|r| r.holds)
    }

    pub fn check(&self) -> Result<()> {
        match self.residuals.iter().find(|r| !r.holds) {
            None => Ok(()),
            Some(r) => Err(Error::LemmaViolated {
                l: r.l,
                detail: r.residual.to_string(),
            }),
        }
    }
}

fn vanishes_to(f: &LaurentPoly, k: u32) -> Result<bool> {
    if k == 0 {
        return Ok(true);
    }
    if f.prec() < k {
        return Err(Error::PrecisionExhausted {
            what: format!("residual known mod p^{}, need p^{k}", f.prec()),
        });
    }
    Ok(f.truncate(k)?.is_zero())
}

/// delta_1^{1+l}(r) = delta_2^{1+l}(r) + p^{m-l} x^{p^l} mod p^{m+1-l}.
pub fn verify_high_congruence(
    d1: &DeltaStructure,
    d2: &DeltaStructure,
    r: &LaurentPoly,
    m: u32,
    l_max: u32,
) -> Result<HighCongruenceReport> {
    let x = congruence_witness(d1, d2, r, m)?;
    let p = d1.p() as u64;
    let mut residuals = Vec::new();
    let (mut a, mut b) = (d1.delta_of(r)?, d2.delta_of(r)?);
    for l in 0..=l_max.min(m) {
        if l > 0 {
            a = d1.delta_of(&a)?;
            b = d2.delta_of(&b)?;
        }
        let corr = x.pow(p.pow(l)).mul_p_pow(m - l)?;
        let res = a.sub(&b).sub(&corr);
        let need = m + 1 - l;
        let holds = vanishes_to(&res, need)?;
        residuals.push(Residual {
            l,
            residual: res,
            required_valuation: need,
            holds,
        });
    }
    Ok(HighCongruenceReport { m, x, residuals })
}

#[derive(Clone, Debug, PartialEq)]
pub struct JoyalCongruenceReport {
    pub m: u32,
    pub x: LaurentPoly,
    /// delta_{1,1+l} - delta_{2,1+l} for 0 <= l < m, required to vanish mod p^{m-l}.
    pub lower: Vec<Residual>,
    /// delta_{1,m+1} - delta_{2,m+1} - x^{p^m}, required to vanish mod p.
    pub top: Residual,
    /// Whether the same identity also holds one index lower, at index m.
    pub index_m_variant_holds: bool,
}

impl JoyalCongruenceReport {
    pub fn holds(&self) -> bool {
        self.lower.iter().all(|r| r.holds) && self.top.holds
    }

    pub fn check(&self) -> Result<()> {
        match self.lower.iter().chain([&self.top]).find(|r| !r.holds) {
            None => Ok(()),
            Some(r) => Err(Error::LemmaViolated {
                l: r.l,
                detail: r.residual.to_string(),
            }),
        }
    }
}

pub fn verify_joyal_congruence(
    d1: &DeltaStructure,
    d2: &DeltaStructure,
    r: &LaurentPoly,
    m: u32,
) -> Result<JoyalCongruenceReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("congruence order must be at least 1".into()));
    }
    let x = congruence_witness(d1, d2, r, m)?;
    let j1 = d1.joyal_coords(r, m as usize)?;
    let j2 = d2.joyal_coords(r, m as usize)?;
    let p = d1.p() as u64;
    let mut lower = Vec::new();
    for l in 0..m {
        let i = (1 + l) as usize;
        let res = j1.entries[i].sub(&j2.entries[i]);
        let need = m - l;
        lower.push(Residual {
            l,
            holds: vanishes_to(&res, need)?,
            residual: res,
            required_valuation: need,
        });
    }
    let xp = x.pow(p.pow(m)).mod_p();
    let top_idx = (m + 1) as usize;
    let top_res = j1.entries[top_idx].sub(&j2.entries[top_idx]).mod_p().sub(&xp);
    let top = Residual {
        l: m,
        holds: top_res.is_zero(),
        residual: top_res,
        required_valuation: 1,
    };
    let idx_m = m as usize;
    let variant = j1.entries[idx_m].sub(&j2.entries[idx_m]).mod_p().sub(&xp);
    Ok(JoyalCongruenceReport {
        m,
        x,
        lower,
        top,
        index_m_variant_holds: variant.is_zero(),
    })
}

/// Class of the length-(m+2) Joyal vector of x in W(F_p[T^{+-1}]) modulo
/// the p-th powers in positive degrees.
pub fn ht_section(d: &DeltaStructure, m: usize, x: &LaurentPoly) -> Result<WittVec<LaurentPoly>> {
    if m == 0 {
        return Err(Error::InvalidParameter("sections need m >= 1".into()));
    }
    d.joyal_coords(x, m)?.mod_p(d.p())
}

/// Outcome of comparing two sections on a list of samples.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionComparison {
    pub agree: bool,
    /// First sample whose classes differ, with the first differing index.
    pub first_disagreement: Option<(usize, usize)>,
}

pub fn sections_agree(
    d1: &DeltaStructure,
    d2: &DeltaStructure,
    m: usize,
    samples: &[LaurentPoly],
) -> Result<SectionComparison> {
    for (s, x) in samples.iter().enumerate() {
        let a = ht_section(d1, m, x)?;
        let b = ht_section(d2, m, x)?;
        if !a.modp_class_equal(&b)? {
            let diff = a.sub_by_lifting(&b)?;
            let idx = diff
                .entries()
                .iter()
                .enumerate()
                .position(|(i, e)| if i == 0 { !e.is_zero() } else { !e.is_pth_power_mod_p() })
                .unwrap_or(0);
            return Ok(SectionComparison {
                agree: false,
                first_disagreement: Some((s, idx)),
            });
        }
    }
    Ok(SectionComparison {
        agree: true,
        first_disagreement: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Modulus;
    use crate::text::parse_laurent;

    fn poly(s: &str, p: u32, n: u32) -> LaurentPoly {
        parse_laurent(s, Modulus::new(p, n).unwrap(), 1).unwrap()
    }

    fn ds(s: &str, p: u32, n: u32) -> DeltaStructure {
        DeltaStructure::new(vec![poly(s, p, n)]).unwrap()
    }

    #[test]
    fn delta_of_simple_elements() {
        let d = ds("0", 2, 8);
        assert_eq!(d.delta_of(&poly("T1 + 1", 2, 8)).unwrap(), poly("-1*T1", 2, 7));
        assert_eq!(d.delta_of(&poly("5", 2, 8)).unwrap(), poly("-10", 2, 7));
        assert!(d.delta_of(&poly("T1^2", 2, 8)).unwrap().is_zero());
    }

    #[test]
    fn frobenius_and_second_delta() {
        let d = ds("2*T1^2", 2, 8);
        assert_eq!(d.phi_of(&poly("T1", 2, 8)).unwrap(), poly("5*T1^2", 2, 8));
        assert_eq!(d.delta_iter(&poly("T1", 2, 8), 2).unwrap(), poly("23*T1^4", 2, 6));
        let j = d.joyal_coords(&poly("T1", 2, 8), 1).unwrap();
        assert_eq!(j.entries[2], poly("29*T1^4", 2, 6));
    }

    #[test]
    fn joyal_of_integer() {
        let d = ds("0", 2, 8);
        let j = d.joyal_coords(&poly("2", 2, 8), 1).unwrap();
        assert_eq!(j.entries, vec![poly("2", 2, 8), poly("-1", 2, 7), poly("-4", 2, 6)]);
    }

    #[test]
    fn negative_exponents_match_direct_formula() {
        let d = ds("1 + 3*T1^-1", 3, 6);
        let f = poly("2*T1^-2 + T1 + 4", 3, 6);
        assert_eq!(d.delta_structural(&f).unwrap(), d.delta_direct(&f).unwrap());
    }

    #[test]
    fn congruence_orders() {
        let (a, b, c) = (ds("0", 2, 8), ds("2*T1^2", 2, 8), ds("4*T1", 2, 8));
        assert_eq!(congruence_order(&a, &b, &[]).unwrap(), 1);
        assert_eq!(congruence_order(&a, &a, &[]).unwrap(), 8);
        assert_eq!(congruence_order(&a, &c, &[]).unwrap(), 2);
    }

    #[test]
    fn worked_congruences() {
        let (a, b) = (ds("0", 2, 8), ds("2*T1^2", 2, 8));
        let t = poly("T1", 2, 8);
        let hc = verify_high_congruence(&a, &b, &t, 1, 1).unwrap();
        assert!(hc.holds());
        let jc = verify_joyal_congruence(&a, &b, &t, 1).unwrap();
        assert!(jc.holds());
        assert!(!jc.index_m_variant_holds);
        let s = sections_agree(&a, &b, 1, std::slice::from_ref(&t)).unwrap();
        assert!(s.agree);
        let c = ds("T1", 2, 8);
        let s = sections_agree(&a, &c, 1, &[t]).unwrap();
        assert_eq!(s.first_disagreement, Some((0, 1)));
    }
}
