//! Cosimplicial pd-rings over R = Z_p[T^{+-1}]: level m adjoins
//! pd-variables X_1, ..., X_m (one block per axis and per structure), plus
//! the fixed variables of the base.

use crate::error::{Error, Result};
use crate::pd::{var_names, PdAssignment, PdPoly};
use crate::scalar::Modulus;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    /// R<X_1, ..., X_m> with p_0(T) = T - p X_1.
    Plain,
    /// R<Y, Z_1, ..., Z_m>, linear over R, with p_0(Y) = Y + Z_1.
    Tilde,
    /// R<Y_1, ..., Y_{h-1}, X_j^(l)> for h structures, with
    /// p_0(Y_k) = Y_k - X_1^(1) + X_1^(k+1).
    Sigma { h: usize },
}

impl Flavor {
    fn blocks(&self) -> usize {
        match self {
            Flavor::Plain | Flavor::Tilde => 1,
            Flavor::Sigma { h } => *h,
        }
    }

    fn statics(&self) -> usize {
        match self {
            Flavor::Plain => 0,
            Flavor::Tilde => 1,
            Flavor::Sigma { h } => h - 1,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Flavor::Plain => "plain".into(),
            Flavor::Tilde => "tilde".into(),
            Flavor::Sigma { h } => format!("sigma{h}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CosimplicialLevel {
    pub flavor: Flavor,
    pub depth: usize,
    pub d: usize,
    zero: PdPoly,
}

impl CosimplicialLevel {
    pub fn new(flavor: Flavor, depth: usize, md: Modulus, d: usize) -> Result<Self> {
        if let Flavor::Sigma { h } = flavor {
            if h < 2 {
                return Err(Error::InvalidParameter("sigma flavor needs h >= 2".into()));
            }
        }
        let mut names = Vec::new();
        let axis = |i: usize| if d > 1 { format!("_{}", i + 1) } else { String::new() };
        for k in 0..flavor.statics() {
            for i in 0..d {
                let base = if flavor == Flavor::Tilde { "Y".to_string() } else { format!("Y{}", k + 1) };
                names.push(format!("{base}{}", axis(i)));
            }
        }
        for j in 1..=depth {
            for l in 0..flavor.blocks() {
                for i in 0..d {
                    let name = match flavor {
                        Flavor::Plain => format!("X{j}"),
                        Flavor::Tilde => format!("Z{j}"),
                        Flavor::Sigma { .. } => format!("X{j}_s{}", l + 1),
                    };
                    names.push(format!("{name}{}", axis(i)));
                }
            }
        }
        Ok(Self {
            flavor,
            depth,
            d,
            zero: PdPoly::zero(md, d, var_names(&names), None),
        })
    }

    pub fn zero(&self) -> &PdPoly {
        &self.zero
    }

    fn static_index(&self, k: usize, i: usize) -> usize {
        k * self.d + i
    }

    /// Index of the pd variable X_j (j >= 1) in block l along axis i.
    pub fn x_index(&self, j: usize, l: usize, i: usize) -> usize {
        let base = self.flavor.statics() * self.d;
        base + ((j - 1) * self.flavor.blocks() + l) * self.d + i
    }

    fn at(&self, depth: usize) -> Self {
        Self::new(self.flavor, depth, self.zero.modulus(), self.d).expect("validated flavor")
    }

    /// Generators: Laurent variables then pd variables.
    pub fn generators(&self) -> Vec<PdPoly> {
        let mut g: Vec<PdPoly> = (0..self.d).map(|i| self.zero.laurent_var(i)).collect();
        g.extend((0..self.zero.vars().len()).map(|j| self.zero.pd_var(j)));
        g
    }

    /// p_i from this level to the next, for 0 <= i <= depth + 1.
    pub fn face(&self, i: usize) -> Result<PdAssignment> {
        if i > self.depth + 1 {
            return Err(Error::InvalidParameter(format!("no face map p_{i} at depth {}", self.depth)));
        }
        let next = self.at(self.depth + 1);
        let p = self.zero.p() as i128;
        let laurent = (0..self.d)
            .map(|a| {
                let t = next.zero.laurent_var(a);
                if i == 0 && self.flavor != Flavor::Tilde {
                    t.sub(&next.zero.pd_var(next.x_index(1, 0, a)).scale(p))
                } else {
                    t
                }
            })
            .collect();
        let mut pd = Vec::new();
        for k in 0..self.flavor.statics() {
            for a in 0..self.d {
                let y = (self.static_index(k, a), 1);
                pd.push(match (i, self.flavor) {
                    (0, Flavor::Tilde) => vec![y, (next.x_index(1, 0, a), 1)],
                    (0, _) => vec![y, (next.x_index(1, 0, a), -1), (next.x_index(1, k + 1, a), 1)],
                    _ => vec![y],
                });
            }
        }
        for j in 1..=self.depth {
            for l in 0..self.flavor.blocks() {
                for a in 0..self.d {
                    pd.push(if i == 0 {
                        vec![(next.x_index(j + 1, l, a), 1), (next.x_index(1, l, a), -1)]
                    } else if i <= j {
                        vec![(next.x_index(j + 1, l, a), 1)]
                    } else {
                        vec![(next.x_index(j, l, a), 1)]
                    });
                }
            }
        }
        Ok(PdAssignment {
            target: next.zero,
            laurent,
            pd,
        })
    }

    /// sigma_i from this level to the previous one, for 0 <= i < depth.
    pub fn degeneracy(&self, i: usize) -> Result<PdAssignment> {
        if i >= self.depth {
            return Err(Error::InvalidParameter(format!("no degeneracy sigma_{i} at depth {}", self.depth)));
        }
        let prev = self.at(self.depth - 1);
        let laurent = (0..self.d).map(|a| prev.zero.laurent_var(a)).collect();
        let mut pd = Vec::new();
        for k in 0..self.flavor.statics() {
            for a in 0..self.d {
                pd.push(vec![(self.static_index(k, a), 1)]);
            }
        }
        for j in 1..=self.depth {
            for l in 0..self.flavor.blocks() {
                for a in 0..self.d {
                    pd.push(if i == 0 && j == 1 {
                        vec![]
                    } else if i < j {
                        vec![(prev.x_index(j - 1, l, a), 1)]
                    } else {
                        vec![(prev.x_index(j, l, a), 1)]
                    });
                }
            }
        }
        Ok(PdAssignment {
            target: prev.zero,
            laurent,
            pd,
        })
    }
}

/// A map between levels, described by the level it starts from.
#[derive(Clone, Copy, Debug)]
enum Arrow {
    Face(usize),
    Degeneracy(usize),
}

impl Arrow {
    fn apply(&self, level: &CosimplicialLevel, f: &PdPoly) -> Result<(CosimplicialLevel, PdPoly)> {
        match *self {
            Arrow::Face(i) => Ok((level.at(level.depth + 1), f.substitute(&level.face(i)?)?)),
            Arrow::Degeneracy(i) => Ok((level.at(level.depth - 1), f.substitute(&level.degeneracy(i)?)?)),
        }
    }

    fn label(&self) -> String {
        match self {
            Arrow::Face(i) => format!("p{i}"),
            Arrow::Degeneracy(i) => format!("s{i}"),
        }
    }
}

/// Applies the arrows left to right (the first listed acts first).
fn run(level: &CosimplicialLevel, arrows: &[Arrow], g: &PdPoly) -> Result<PdPoly> {
    let mut cur = (level.clone(), g.clone());
    for a in arrows {
        cur = a.apply(&cur.0, &cur.1)?;
    }
    Ok(cur.1)
}

fn chain(arrows: &[Arrow]) -> String {
    arrows.iter().rev().map(Arrow::label).collect::<Vec<_>>().join("∘")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CosimplicialReport {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl CosimplicialReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn check(&self) -> Result<()> {
        match self.failures.first() {
            None => Ok(()),
            Some(f) => Err(Error::IdentityViolated(f.clone())),
        }
    }
}

/// Checks every face/face, degeneracy/degeneracy and mixed identity whose
/// source level is at most `depth`, on all generators.
pub fn verify_cosimplicial_identities(
    flavor: Flavor,
    depth: usize,
    md: Modulus,
    d: usize,
) -> Result<CosimplicialReport> {
    use Arrow::*;
    let mut rep = CosimplicialReport::default();
    for m in 0..=depth {
        let level = CosimplicialLevel::new(flavor, m, md, d)?;
        let mut pairs: Vec<(Vec<Arrow>, Vec<Arrow>)> = Vec::new();
        // p_{j+1} p_i = p_i p_j for i <= j
        for j in 0..=m + 1 {
            for i in 0..=j {
                pairs.push((vec![Face(i), Face(j + 1)], vec![Face(j), Face(i)]));
            }
        }
        // s_j s_i = s_i s_{j+1} for i <= j
        for j in 0..m.saturating_sub(1) {
            for i in 0..=j {
                pairs.push((vec![Degeneracy(i), Degeneracy(j)], vec![Degeneracy(j + 1), Degeneracy(i)]));
            }
        }
        for j in 0..=m {
            for i in 0..=m + 1 {
                let lhs = vec![Face(i), Degeneracy(j)];
                let rhs = if i < j {
                    vec![Degeneracy(j - 1), Face(i)]
                } else if i == j || i == j + 1 {
                    vec![]
                } else {
                    vec![Degeneracy(j), Face(i - 1)]
                };
                pairs.push((lhs, rhs));
            }
        }
        for g in level.generators() {
            for (lhs, rhs) in &pairs {
                rep.checks += 1;
                let (a, b) = (run(&level, lhs, &g)?, run(&level, rhs, &g)?);
                if a != b {
                    rep.failures.push(format!(
                        "{} flavor, level {m}: {}({g}) = {a} but {}({g}) = {b}",
                        flavor.name(),
                        chain(lhs),
                        if rhs.is_empty() { "id".into() } else { chain(rhs) }
                    ));
                }
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn md() -> Modulus {
        Modulus::new(3, 4).unwrap()
    }

    #[test]
    fn first_face_and_degeneracy() {
        let l0 = CosimplicialLevel::new(Flavor::Plain, 0, md(), 1).unwrap();
        let t = l0.zero().laurent_var(0);
        let img = t.substitute(&l0.face(0).unwrap()).unwrap();
        let l1 = CosimplicialLevel::new(Flavor::Plain, 1, md(), 1).unwrap();
        let expect = l1.zero().laurent_var(0).sub(&l1.zero().pd_var(0).scale(3));
        assert_eq!(img, expect);
        let x1 = l1.zero().pd_var(0);
        assert!(x1.substitute(&l1.degeneracy(0).unwrap()).unwrap().is_zero());
        // p1 p0 (T) = p0 p0 (T) = T - p X2
        let a = run(&l0, &[Arrow::Face(0), Arrow::Face(1)], &t).unwrap();
        let b = run(&l0, &[Arrow::Face(0), Arrow::Face(0)], &t).unwrap();
        let l2 = CosimplicialLevel::new(Flavor::Plain, 2, md(), 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, l2.zero().laurent_var(0).sub(&l2.zero().pd_var(1).scale(3)));
    }

    #[test]
    fn identities_hold_for_every_flavor() {
        for flavor in [Flavor::Plain, Flavor::Tilde, Flavor::Sigma { h: 2 }, Flavor::Sigma { h: 3 }] {
            let r = verify_cosimplicial_identities(flavor, 2, md(), 1).unwrap();
            assert!(r.holds(), "{:?}", r.failures);
            assert!(r.checks > 0);
        }
        let r = verify_cosimplicial_identities(Flavor::Plain, 1, md(), 2).unwrap();
        assert!(r.holds(), "{:?}", r.failures);
    }

    #[test]
    fn a_wrong_face_is_caught() {
        // swapping the sign in p_0(X_j) breaks p_1 p_0 = p_0 p_0
        let l1 = CosimplicialLevel::new(Flavor::Plain, 1, md(), 1).unwrap();
        let mut bad = l1.face(0).unwrap();
        bad.pd[0] = vec![(1, 1), (0, 1)];
        let x = l1.zero().pd_var(0);
        let a = x.substitute(&bad).unwrap();
        let good = x.substitute(&l1.face(0).unwrap()).unwrap();
        assert_ne!(a, good);
    }
}
