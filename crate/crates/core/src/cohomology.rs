//! Windowed de Rham, Cech-Alexander and total complexes of a
//! constant-coefficient p-connection, and their cohomology over Z/p^N.
//!
//! Every basis element e_r T^t X^[k] w (w a wedge of dT_a/p and dX_v) has
//! a weight on each axis a: t_a plus the pd degree and the number of form
//! factors along a. All differentials are non-decreasing in each weight and
//! in pd degree (dX counted once), so the span of the basis elements above
//! the window is a subcomplex. A windowed complex is the quotient by that
//! span, restricted to weights >= -B_T; an image term below -B_T is an
//! error rather than a silent truncation.
//!
//! Total complex sign: d = d_1 + (-1)^m d_2 on the block (m, j).

use std::collections::{BTreeMap, HashMap};

use crate::cosimplicial::{CosimplicialLevel, Flavor};
use crate::crystals::{exp_matrix, Matrix, PConnection, SigmaConnection, Stratification};
use crate::envelope::Verdict;
use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, Mono};
use crate::linalg::{homology, induces_iso, Divisors, Homology, ModMatrix};
use crate::pd::{PdAssignment, PdIndex, PdPoly};
use crate::ring::Mat;
use crate::scalar::Modulus;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    /// Axis weights range over [-t, t].
    pub t: u32,
    pub pd: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Params {
    pub window: Window,
    /// Cosimplicial depth K.
    pub depth: usize,
}

impl Params {
    pub fn new(t: u32, pd: u32, depth: usize) -> Self {
        Self {
            window: Window { t, pd },
            depth,
        }
    }

    /// Bounds used by the stability gate.
    pub fn enlarged(&self, p: u32) -> Self {
        Self::new(self.window.t + 2, self.window.pd + p, self.depth)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub r: usize,
    pub t: Vec<i32>,
    pub k: PdIndex,
    /// Bit g: generator g, where g < d is dT_g/p and g = d + v is dX_v.
    pub forms: u32,
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |g| mask >> g & 1 == 1)
}

impl Cell {
    fn d(&self) -> usize {
        self.t.len()
    }

    pub fn weights(&self) -> Vec<i64> {
        let d = self.d();
        let mut w: Vec<i64> = self.t.iter().map(|&x| x as i64).collect();
        for (v, &kv) in self.k.iter().enumerate() {
            w[v % d] += kv as i64;
        }
        for g in bits(self.forms) {
            w[if g < d { g } else { (g - d) % d }] += 1;
        }
        w
    }

    pub fn pd_degree(&self) -> u32 {
        self.k.iter().sum::<u32>() + (self.forms >> self.d()).count_ones()
    }
}

type Chain = HashMap<Cell, i128>;
type FormSum = Vec<(u32, i128)>;

fn add(chain: &mut Chain, cell: Cell, c: i128) {
    *chain.entry(cell).or_insert(0) += c;
}

/// Sign of w_a ^ w_b relative to the sorted wedge, or None if they overlap.
fn wedge_sign(a: u32, b: u32) -> Option<i128> {
    if a & b != 0 {
        return None;
    }
    let inversions: u32 = bits(b).map(|y| (a >> (y + 1)).count_ones()).sum();
    Some(if inversions.is_multiple_of(2) { 1 } else { -1 })
}

fn wedge_sums(x: &FormSum, y: &FormSum) -> FormSum {
    let mut acc: BTreeMap<u32, i128> = BTreeMap::new();
    for &(a, ca) in x {
        for &(b, cb) in y {
            if let Some(s) = wedge_sign(a, b) {
                *acc.entry(a | b).or_insert(0) += s * ca * cb;
            }
        }
    }
    acc.into_iter().filter(|&(_, c)| c != 0).collect()
}

fn form_image(images: &[FormSum], forms: u32) -> FormSum {
    bits(forms).fold(vec![(0, 1)], |acc, g| wedge_sums(&acc, &images[g]))
}

fn pd_indices(nv: usize, max: u32) -> Vec<PdIndex> {
    if nv == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..=max {
        for mut rest in pd_indices(nv - 1, max - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn weight_grid(d: usize, b: i32) -> Vec<Vec<i32>> {
    (0..d).fold(vec![vec![]], |acc, _| {
        acc.into_iter()
            .flat_map(|w| (-b..=b).map(move |x| [w.clone(), vec![x]].concat()))
            .collect()
    })
}

/// Basis of one term: form degree j over a ring with d axes and nv pd
/// variables, for a module of the given rank.
#[derive(Clone, Debug, Default)]
struct Block {
    cells: Vec<Cell>,
    index: HashMap<Cell, usize>,
}

impl Block {
    fn new(d: usize, nv: usize, rank: usize, j: usize, w: Window) -> Self {
        let mut cells = Vec::new();
        for forms in (0u32..1 << (d + nv)).filter(|m| m.count_ones() as usize == j) {
            let dx = (forms >> d).count_ones();
            if dx > w.pd {
                continue;
            }
            for k in pd_indices(nv, w.pd - dx) {
                let base = Cell {
                    r: 0,
                    t: vec![0; d],
                    k: k.clone(),
                    forms,
                }
                .weights();
                for wt in weight_grid(d, w.t as i32) {
                    let t: Vec<i32> = wt.iter().zip(&base).map(|(&x, &b)| x - b as i32).collect();
                    for r in 0..rank {
                        cells.push(Cell {
                            r,
                            t: t.clone(),
                            k: k.clone(),
                            forms,
                        });
                    }
                }
            }
        }
        let index = cells.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        Self { cells, index }
    }

    fn len(&self) -> usize {
        self.cells.len()
    }

    /// Position of an image term, None if it lies in the discarded part.
    fn place(&self, cell: &Cell, w: Window) -> Result<Option<usize>> {
        let ws = cell.weights();
        if ws.iter().any(|&x| x < -(w.t as i64)) {
            return Err(Error::WindowTooSmall(format!(
                "image term T^{:?} has weight {:?} below -{}",
                cell.t, ws, w.t
            )));
        }
        if ws.iter().any(|&x| x > w.t as i64) || cell.pd_degree() > w.pd {
            return Ok(None);
        }
        self.index
            .get(cell)
            .map(|&i| Some(i))
            .ok_or_else(|| Error::Mismatch(format!("term {cell:?} is not in the target basis")))
    }
}

fn to_matrix(
    md: Modulus,
    src: &Block,
    tgt: &Block,
    w: Window,
    mut image: impl FnMut(&Cell) -> Result<Chain>,
) -> Result<ModMatrix> {
    let mut a = ModMatrix::zeros(md, tgt.len(), src.len());
    for (col, cell) in src.cells.iter().enumerate() {
        for (c, x) in image(cell)? {
            if md.reduce(x) == 0 {
                continue;
            }
            if let Some(row) = tgt.place(&c, w)? {
                a.add_to(row, col, x);
            }
        }
    }
    Ok(a)
}

/// Entries of a connection form: the matrix multiplying each generator.
type ConnForm = Vec<(usize, Matrix)>;

fn connection_form(c: &PConnection) -> ConnForm {
    c.phi().iter().enumerate().map(|(a, f)| (a, f.map(|x| x.neg()))).collect()
}

/// nabla(x) ^ w + x d(w) for x = e_r T^t X^[k].
fn d_two(cell: &Cell, conn: &ConnForm, rank: usize, p: i128) -> Chain {
    let mut out = Chain::new();
    let d = cell.d();
    for (g, a) in conn {
        let Some(sign) = wedge_sign(1 << g, cell.forms) else { continue };
        for s in 0..rank {
            for (mono, c) in a.get(s, cell.r).terms() {
                let t = cell.t.iter().enumerate().map(|(i, &x)| x + mono[i]).collect();
                add(
                    &mut out,
                    Cell {
                        r: s,
                        t,
                        k: cell.k.clone(),
                        forms: cell.forms | 1 << g,
                    },
                    sign * c,
                );
            }
        }
    }
    for a in 0..d {
        if cell.t[a] == 0 {
            continue;
        }
        let Some(sign) = wedge_sign(1 << a, cell.forms) else { continue };
        let mut t = cell.t.clone();
        t[a] -= 1;
        let c = Cell {
            r: cell.r,
            t,
            k: cell.k.clone(),
            forms: cell.forms | 1 << a,
        };
        add(&mut out, c, sign * p * cell.t[a] as i128);
    }
    for v in 0..cell.k.len() {
        if cell.k[v] == 0 {
            continue;
        }
        let Some(sign) = wedge_sign(1 << (d + v), cell.forms) else { continue };
        let mut k = cell.k.clone();
        k[v] -= 1;
        let c = Cell {
            r: cell.r,
            t: cell.t.clone(),
            k,
            forms: cell.forms | 1 << (d + v),
        };
        add(&mut out, c, sign);
    }
    out
}

fn function_of(zero: &PdPoly, cell: &Cell) -> PdPoly {
    let mut mono: Mono = [0; 4];
    mono[..cell.d()].copy_from_slice(&cell.t);
    let mut f = zero.zero_of();
    f.add_term(cell.k.clone(), LaurentPoly::monomial(zero.modulus(), cell.d(), mono, 1));
    f
}

fn emit(out: &mut Chain, f: &PdPoly, forms: &FormSum, r: usize, d: usize) {
    for (k, coeff) in f.terms() {
        for (mono, c) in coeff.terms() {
            for &(mask, fc) in forms {
                let cell = Cell {
                    r,
                    t: mono[..d].to_vec(),
                    k: k.clone(),
                    forms: mask,
                };
                add(out, cell, c * fc);
            }
        }
    }
}

/// A simplicial structure map between two levels, acting on functions,
/// forms, and (for p_0) on the module through epsilon.
struct LevelMap {
    src_zero: PdPoly,
    assign: PdAssignment,
    forms: Vec<FormSum>,
    module: Option<Mat<PdPoly>>,
}

impl LevelMap {
    fn apply(&self, cell: &Cell) -> Result<Chain> {
        let d = cell.d();
        let f = function_of(&self.src_zero, cell).substitute(&self.assign)?;
        let fs = form_image(&self.forms, cell.forms);
        let mut out = Chain::new();
        match &self.module {
            None => emit(&mut out, &f, &fs, cell.r, d),
            Some(eps) => {
                for s in 0..eps.rows() {
                    emit(&mut out, &eps.get(s, cell.r).mul(&f), &fs, s, d);
                }
            }
        }
        Ok(out)
    }
}

fn plain_level(md: Modulus, d: usize, m: usize, w: Window) -> Result<(CosimplicialLevel, PdPoly)> {
    let level = CosimplicialLevel::new(Flavor::Plain, m, md, d)?;
    let zero = level.zero().with_bound(Some(w.pd));
    Ok((level, zero))
}

fn bounded(mut a: PdAssignment, w: Window) -> PdAssignment {
    a.target = a.target.with_bound(Some(w.pd));
    a
}

fn pd_form_images(a: &PdAssignment, d: usize) -> Vec<FormSum> {
    a.pd
        .iter()
        .map(|img| img.iter().map(|&(t, s)| (1u32 << (d + t), s as i128)).collect())
        .collect()
}

/// p_i from level m to m+1 of the plain ring; `eps` is the stratification
/// used on the module factor of p_0.
fn face_map(md: Modulus, d: usize, m: usize, i: usize, w: Window, eps: Option<&Stratification>) -> Result<LevelMap> {
    let (level, src_zero) = plain_level(md, d, m, w)?;
    let (next, tgt_zero) = plain_level(md, d, m + 1, w)?;
    let assign = bounded(level.face(i)?, w);
    let mut forms: Vec<FormSum> = (0..d)
        .map(|a| {
            let mut f = vec![(1u32 << a, 1)];
            if i == 0 {
                f.push((1 << (d + next.x_index(1, 0, a)), -1));
            }
            f
        })
        .collect();
    forms.extend(pd_form_images(&assign, d));
    let module = match (i, eps) {
        (0, Some(s)) => Some(epsilon_matrix(s, &next, &tgt_zero)),
        _ => None,
    };
    Ok(LevelMap {
        src_zero,
        assign,
        forms,
        module,
    })
}

fn degeneracy_map(md: Modulus, d: usize, m: usize, i: usize, w: Window) -> Result<LevelMap> {
    let (level, src_zero) = plain_level(md, d, m, w)?;
    let assign = bounded(level.degeneracy(i)?, w);
    let mut forms: Vec<FormSum> = (0..d).map(|a| vec![(1u32 << a, 1)]).collect();
    forms.extend(pd_form_images(&assign, d));
    Ok(LevelMap {
        src_zero,
        assign,
        forms,
        module: None,
    })
}

/// sum_mu theta_mu X_1^[mu] over the given level.
fn epsilon_matrix(s: &Stratification, level: &CosimplicialLevel, zero: &PdPoly) -> Mat<PdPoly> {
    let r = s.rank();
    let mut out = Mat::zeros(r, r, zero);
    for (mu, theta) in s.terms() {
        let mut idx = vec![0; zero.vars().len()];
        for (a, &e) in mu.iter().enumerate() {
            idx[level.x_index(1, 0, a)] = e;
        }
        let term = theta.map(|x| {
            let mut y = zero.zero_of();
            y.add_term(idx.clone(), x.clone());
            y
        });
        out = out.add(&term);
    }
    out
}

fn require_constant(ms: impl IntoIterator<Item = Matrix>, what: &str) -> Result<()> {
    for m in ms {
        if m.entries().any(|x| !x.is_constant()) {
            return Err(Error::InvalidParameter(format!("{what} must have constant entries")));
        }
    }
    Ok(())
}

/// A finite cochain complex of free Z/p^N-modules.
#[derive(Clone, Debug)]
pub struct CochainComplex {
    md: Modulus,
    dims: Vec<usize>,
    diffs: Vec<ModMatrix>,
    /// Highest degree whose cohomology is not affected by truncation.
    exact_through: usize,
}

impl CochainComplex {
    pub fn new(md: Modulus, dims: Vec<usize>, diffs: Vec<ModMatrix>, exact_through: usize) -> Result<Self> {
        for (i, a) in diffs.iter().enumerate() {
            if a.cols() != dims[i] || a.rows() != dims.get(i + 1).copied().unwrap_or(0) {
                return Err(Error::Mismatch(format!("differential {i} has the wrong shape")));
            }
        }
        Ok(Self {
            md,
            dims,
            diffs,
            exact_through,
        })
    }

    pub fn modulus(&self) -> Modulus {
        self.md
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, i: usize) -> usize {
        self.dims.get(i).copied().unwrap_or(0)
    }

    /// The differential out of degree i (zero past the last term).
    pub fn diff(&self, i: usize) -> ModMatrix {
        self.diffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| ModMatrix::zeros(self.md, self.dim(i + 1), self.dim(i)))
    }

    /// The differential into degree i.
    pub fn diff_in(&self, i: usize) -> ModMatrix {
        match i {
            0 => ModMatrix::zeros(self.md, self.dim(0), 0),
            _ => self.diff(i - 1),
        }
    }

    pub fn exact_through(&self) -> usize {
        self.exact_through
    }

    /// d o d = 0 on every pair of consecutive differentials.
    pub fn is_complex(&self) -> Result<bool> {
        for w in self.diffs.windows(2) {
            if !w[1].mul(&w[0])?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn cohomology(&self, i: usize) -> Result<Homology> {
        if i > self.exact_through {
            return Err(Error::Inconclusive(format!(
                "degree {i} is past the truncation (exact through {})",
                self.exact_through
            )));
        }
        homology(&self.diff_in(i), &self.diff(i))
    }

    pub fn divisors(&self, i: usize) -> Result<Divisors> {
        Ok(self.cohomology(i)?.divisors)
    }

    /// sum (-1)^i length(H^i), over a complex with no truncation.
    pub fn euler_length(&self) -> Result<i64> {
        (0..self.dims.len())
            .map(|i| Ok(if i % 2 == 0 { 1 } else { -1 } * self.divisors(i)?.length() as i64))
            .sum()
    }
}

fn check_params(params: &Params, md: Modulus) -> Result<()> {
    if params.window.t == 0 && params.window.pd == 0 {
        return Err(Error::WindowTooSmall("empty window".into()));
    }
    if md.prec() > 10 {
        return Err(Error::InvalidParameter("precision above 10".into()));
    }
    Ok(())
}

/// The de Rham complex of a connection form over a level with `nv` pd
/// variables, all form degrees.
fn de_rham_over(
    md: Modulus,
    d: usize,
    nv: usize,
    rank: usize,
    conn: &ConnForm,
    w: Window,
) -> Result<(Vec<Block>, CochainComplex)> {
    let top = d + nv;
    let blocks: Vec<Block> = (0..=top).map(|j| Block::new(d, nv, rank, j, w)).collect();
    let p = md.p() as i128;
    let diffs = (0..top)
        .map(|j| to_matrix(md, &blocks[j], &blocks[j + 1], w, |c| Ok(d_two(c, conn, rank, p))))
        .collect::<Result<Vec<_>>>()?;
    let dims = blocks.iter().map(Block::len).collect();
    let cx = CochainComplex::new(md, dims, diffs, top)?;
    Ok((blocks, cx))
}

/// DR(M, nabla) on the basis dT_i/p, windowed.
pub fn build_de_rham(c: &PConnection, params: &Params) -> Result<CochainComplex> {
    let md = c.modulus();
    check_params(params, md)?;
    if c.d() > 2 {
        return Err(Error::InvalidParameter("de Rham complexes need d <= 2".into()));
    }
    Ok(de_rham_over(md, c.d(), 0, c.rank(), &connection_form(c), params.window)?.1)
}

/// d_R from form degree j to j+1 at level m, on the trivial rank-1 module.
pub fn build_d_r(md: Modulus, d: usize, m: usize, j: usize, w: Window) -> Result<ModMatrix> {
    let src = Block::new(d, m * d, 1, j, w);
    let tgt = Block::new(d, m * d, 1, j + 1, w);
    let p = md.p() as i128;
    to_matrix(md, &src, &tgt, w, |c| Ok(d_two(c, &vec![], 1, p)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormsReport {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl FormsReport {
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

fn normalize(md: Modulus, chain: Chain, w: Window) -> Result<BTreeMap<Cell, i128>> {
    let mut out = BTreeMap::new();
    for (c, x) in chain {
        let x = md.reduce(x);
        if x == 0 {
            continue;
        }
        let ws = c.weights();
        if ws.iter().any(|&v| v < -(w.t as i64)) {
            return Err(Error::WindowTooSmall(format!("term {c:?} below the window")));
        }
        if ws.iter().all(|&v| v <= w.t as i64) && c.pd_degree() <= w.pd {
            out.insert(c, x);
        }
    }
    Ok(out)
}

fn apply_chain(f: &LevelMap, chain: &Chain) -> Result<Chain> {
    let mut out = Chain::new();
    for (c, &x) in chain {
        for (c2, y) in f.apply(c)? {
            add(&mut out, c2, x * y);
        }
    }
    Ok(out)
}

fn d_r_chain(chain: &Chain, p: i128) -> Chain {
    let mut out = Chain::new();
    for (c, &x) in chain {
        for (c2, y) in d_two(c, &vec![], 1, p) {
            add(&mut out, c2, x * y);
        }
    }
    out
}

/// f o d_R = d_R o f for every face and degeneracy between levels up to
/// `depth`, on up to `samples` basis elements per level and form degree.
pub fn verify_d_r_cosimplicial(md: Modulus, d: usize, depth: usize, w: Window, samples: usize) -> Result<FormsReport> {
    let p = md.p() as i128;
    let mut report = FormsReport {
        checks: 0,
        failures: Vec::new(),
    };
    for m in 0..=depth {
        let mut maps: Vec<(String, LevelMap)> = Vec::new();
        if m < depth {
            for i in 0..=m + 1 {
                maps.push((format!("p_{i} at level {m}"), face_map(md, d, m, i, w, None)?));
            }
        }
        for i in 0..m {
            maps.push((format!("sigma_{i} at level {m}"), degeneracy_map(md, d, m, i, w)?));
        }
        for j in 0..=(m + 1) * d {
            let block = Block::new(d, m * d, 1, j, w);
            let step = (block.len() / samples.max(1)).max(1);
            for cell in block.cells.iter().step_by(step).take(samples) {
                let x: Chain = [(cell.clone(), 1)].into_iter().collect();
                for (name, f) in &maps {
                    let lhs = normalize(md, apply_chain(f, &d_r_chain(&x, p))?, w)?;
                    let rhs = normalize(md, d_r_chain(&apply_chain(f, &x)?, p), w)?;
                    report.checks += 1;
                    if lhs != rhs {
                        report.failures.push(format!("{name} on {cell:?}"));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Laws of a bicomplex, checked on the retained blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiComplexChecks {
    pub d1_squared: bool,
    pub d2_squared: bool,
    pub commute: bool,
}

impl BiComplexChecks {
    pub fn holds(&self) -> bool {
        self.d1_squared && self.d2_squared && self.commute
    }
}

/// Blocks C^{m,j} = M(R^m) (x) Omega^j for m + j <= K.
#[derive(Clone, Debug)]
pub struct BiComplex {
    md: Modulus,
    pub params: Params,
    blocks: BTreeMap<(usize, usize), Block>,
    d1: BTreeMap<(usize, usize), ModMatrix>,
    d2: BTreeMap<(usize, usize), ModMatrix>,
}

fn check_pair(s: &Stratification, c: &PConnection) -> Result<()> {
    if s.flavor != Flavor::Plain {
        return Err(Error::InvalidParameter("Cech-Alexander complexes use the plain flavor".into()));
    }
    if s.d != c.d() || s.rank() != c.rank() {
        return Err(Error::Mismatch("stratification and connection of different shapes".into()));
    }
    require_constant(s.terms().map(|(_, m)| m.clone()), "stratification")?;
    require_constant(c.phi().iter().cloned(), "connection")
}

/// Builds the bicomplex with d_1 from `s` and d_2 from `c`.
pub fn build_bicomplex(s: &Stratification, c: &PConnection, params: &Params) -> Result<BiComplex> {
    check_pair(s, c)?;
    let md = c.modulus();
    check_params(params, md)?;
    let (d, rank, k, w) = (c.d(), c.rank(), params.depth, params.window);
    if k < 1 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let mut blocks = BTreeMap::new();
    for m in 0..=k {
        for j in 0..=k - m {
            blocks.insert((m, j), Block::new(d, m * d, rank, j, w));
        }
    }
    let conn = connection_form(c);
    let p = md.p() as i128;
    let mut d1 = BTreeMap::new();
    let mut d2 = BTreeMap::new();
    for m in 0..k {
        let faces = (0..=m + 1)
            .map(|i| face_map(md, d, m, i, w, Some(s)))
            .collect::<Result<Vec<_>>>()?;
        for j in 0..k - m {
            let src = &blocks[&(m, j)];
            let a = to_matrix(md, src, &blocks[&(m + 1, j)], w, |cell| {
                let mut out = Chain::new();
                for (i, f) in faces.iter().enumerate() {
                    let sign = if i % 2 == 0 { 1 } else { -1 };
                    for (c2, y) in f.apply(cell)? {
                        add(&mut out, c2, sign * y);
                    }
                }
                Ok(out)
            })?;
            d1.insert((m, j), a);
            let b = to_matrix(md, src, &blocks[&(m, j + 1)], w, |cell| Ok(d_two(cell, &conn, rank, p)))?;
            d2.insert((m, j), b);
        }
    }
    Ok(BiComplex {
        md,
        params: *params,
        blocks,
        d1,
        d2,
    })
}

impl BiComplex {
    pub fn depth(&self) -> usize {
        self.params.depth
    }

    pub fn d1(&self, m: usize, j: usize) -> Option<&ModMatrix> {
        self.d1.get(&(m, j))
    }

    pub fn d2(&self, m: usize, j: usize) -> Option<&ModMatrix> {
        self.d2.get(&(m, j))
    }

    fn dim(&self, m: usize, j: usize) -> usize {
        self.blocks.get(&(m, j)).map_or(0, Block::len)
    }

    pub fn checks(&self) -> Result<BiComplexChecks> {
        let mut out = BiComplexChecks {
            d1_squared: true,
            d2_squared: true,
            commute: true,
        };
        for (&(m, j), a) in &self.d1 {
            if let Some(b) = self.d1.get(&(m + 1, j)) {
                out.d1_squared &= b.mul(a)?.is_zero();
            }
            if let (Some(x), Some(y), Some(z)) = (self.d2.get(&(m + 1, j)), self.d2.get(&(m, j)), self.d1.get(&(m, j + 1))) {
                out.commute &= x.mul(a)? == z.mul(y)?;
            }
        }
        for (&(m, j), a) in &self.d2 {
            if let Some(b) = self.d2.get(&(m, j + 1)) {
                out.d2_squared &= b.mul(a)?.is_zero();
            }
        }
        Ok(out)
    }

    fn offsets(&self, n: usize) -> Vec<usize> {
        let mut acc = 0;
        (0..=n)
            .map(|m| {
                let o = acc;
                acc += self.dim(m, n - m);
                o
            })
            .collect()
    }

    /// Tot^n = sum over m + j = n, d = d_1 + (-1)^m d_2, for n <= K.
    pub fn totalize(&self) -> Result<CochainComplex> {
        let k = self.depth();
        let dims: Vec<usize> = (0..=k).map(|n| (0..=n).map(|m| self.dim(m, n - m)).sum()).collect();
        let mut diffs = Vec::new();
        for n in 0..k {
            let (src, tgt) = (self.offsets(n), self.offsets(n + 1));
            let mut a = ModMatrix::zeros(self.md, dims[n + 1], dims[n]);
            for m in 0..=n {
                let j = n - m;
                let sign = if m % 2 == 0 { 1 } else { -1 };
                for (block, row0, s) in [(&self.d1[&(m, j)], tgt[m + 1], 1), (&self.d2[&(m, j)], tgt[m], sign)] {
                    for r in 0..block.rows() {
                        for c in 0..block.cols() {
                            let x = block.get(r, c);
                            if x != 0 {
                                a.set(row0 + r, src[m] + c, s * x as i128);
                            }
                        }
                    }
                }
            }
            diffs.push(a);
        }
        CochainComplex::new(self.md, dims, diffs, k - 1)
    }

    /// Column j = 0 with d_1.
    pub fn cech_alexander(&self) -> Result<CochainComplex> {
        let k = self.depth();
        let dims = (0..=k).map(|m| self.dim(m, 0)).collect();
        let diffs = (0..k).map(|m| self.d1[&(m, 0)].clone()).collect();
        CochainComplex::new(self.md, dims, diffs, k - 1)
    }

    /// Row m = 0 with d_2, as far as the blocks reach.
    pub fn de_rham_row(&self) -> Result<CochainComplex> {
        let k = self.depth();
        let dims = (0..=k).map(|j| self.dim(0, j)).collect();
        let diffs = (0..k).map(|j| self.d2[&(0, j)].clone()).collect();
        CochainComplex::new(self.md, dims, diffs, k - 1)
    }

    fn projection(&self, n: usize, m: usize) -> ModMatrix {
        let off = self.offsets(n)[m];
        let len = self.dim(m, n - m);
        let total: usize = (0..=n).map(|x| self.dim(x, n - x)).sum();
        let mut a = ModMatrix::zeros(self.md, len, total);
        for i in 0..len {
            a.set(i, off + i, 1);
        }
        a
    }

    /// Tot^n -> C^{n,0}.
    pub fn edge_cech_alexander(&self, n: usize) -> ModMatrix {
        self.projection(n, n)
    }

    /// Tot^n -> C^{0,n}.
    pub fn edge_de_rham(&self, n: usize) -> ModMatrix {
        self.projection(n, 0)
    }
}

fn is_chain_map(f: &dyn Fn(usize) -> ModMatrix, src: &CochainComplex, tgt: &CochainComplex, top: usize) -> Result<bool> {
    for n in 0..top {
        if tgt.diff(n).mul(&f(n))? != f(n + 1).mul(&src.diff(n))? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeComparison {
    pub degree: usize,
    pub cech_alexander: Divisors,
    pub total: Divisors,
    pub de_rham: Divisors,
    /// The edge projections induce isomorphisms in this degree.
    pub ca_iso: bool,
    pub dr_iso: bool,
}

impl DegreeComparison {
    pub fn agrees(&self) -> bool {
        self.cech_alexander == self.total && self.total == self.de_rham && self.ca_iso && self.dr_iso
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoRun {
    pub params: Params,
    pub bicomplex: BiComplexChecks,
    pub chain_maps: bool,
    pub degrees: Vec<DegreeComparison>,
}

impl RhoRun {
    pub fn agrees(&self) -> bool {
        self.bicomplex.holds()
            && self.chain_maps
            && !self.degrees.is_empty()
            && self.degrees.iter().all(DegreeComparison::agrees)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoReport {
    pub base: RhoRun,
    pub enlarged: RhoRun,
}

impl RhoReport {
    /// Both runs must reach the same conclusion.
    pub fn stable(&self) -> bool {
        self.base.agrees() == self.enlarged.agrees()
    }

    pub fn verdict(&self) -> Verdict {
        match (self.stable(), self.base.agrees()) {
            (false, _) => Verdict::Inconclusive,
            (true, true) => Verdict::Pass,
            (true, false) => Verdict::Fail,
        }
    }

    pub fn check(&self) -> Result<()> {
        match self.verdict() {
            Verdict::Pass => Ok(()),
            Verdict::Inconclusive => Err(Error::Inconclusive("results change with the bounds".into())),
            Verdict::Fail => {
                let d = self.base.degrees.iter().find(|d| !d.agrees());
                Err(Error::ComparisonFailed(match d {
                    Some(d) => format!("degree {}: {d:?}", d.degree),
                    None => "bicomplex laws or chain maps".into(),
                }))
            }
        }
    }
}

fn rho_run(s: &Stratification, c: &PConnection, params: &Params) -> Result<RhoRun> {
    let bic = build_bicomplex(s, c, params)?;
    let checks = bic.checks()?;
    if !checks.holds() {
        return Ok(RhoRun {
            params: *params,
            bicomplex: checks,
            chain_maps: false,
            degrees: Vec::new(),
        });
    }
    let tot = bic.totalize()?;
    let ca = bic.cech_alexander()?;
    let dr = build_de_rham(c, params)?;
    let k = params.depth;
    let chain_maps = is_chain_map(&|n| bic.edge_cech_alexander(n), &tot, &ca, k)?
        && is_chain_map(&|n| bic.edge_de_rham(n), &tot, &dr, k)?;
    let mut degrees = Vec::new();
    for i in 0..=1 {
        let (ht, hc, hd) = (tot.cohomology(i)?, ca.cohomology(i)?, dr.cohomology(i)?);
        degrees.push(DegreeComparison {
            degree: i,
            ca_iso: induces_iso(&bic.edge_cech_alexander(i), &ht, &hc, &ca.diff_in(i))?,
            dr_iso: induces_iso(&bic.edge_de_rham(i), &ht, &hd, &dr.diff_in(i))?,
            cech_alexander: hc.divisors,
            total: ht.divisors,
            de_rham: hd.divisors,
        });
    }
    Ok(RhoRun {
        params: *params,
        bicomplex: checks,
        chain_maps,
        degrees,
    })
}

/// Compares H^0 and H^1 of the Cech-Alexander, total and de Rham
/// complexes at the given bounds and at the enlarged ones.
pub fn compare_rho(s: &Stratification, c: &PConnection, params: &Params) -> Result<RhoReport> {
    if params.depth < 2 {
        return Err(Error::InvalidParameter("H^1 needs depth K >= 2".into()));
    }
    let w = params.window;
    if (w.t as usize) < params.depth || (w.pd as usize) < params.depth {
        // below this the level-K divided powers are cut before they reach the diagonal
        return Err(Error::WindowTooSmall(format!(
            "bounds B_T={} B_pd={} must be at least the depth {}",
            w.t, w.pd, params.depth
        )));
    }
    Ok(RhoReport {
        base: rho_run(s, c, params)?,
        enlarged: rho_run(s, c, &params.enlarged(c.modulus().p()))?,
    })
}

fn sigma_level(md: Modulus, sc: &SigmaConnection) -> Result<CosimplicialLevel> {
    let flavor = sc.flavor();
    CosimplicialLevel::new(flavor, 0, md, sc.d)
}

/// nabla along dT^(t)/p = dT/p - dY_{t-1}.
fn sigma_form(sc: &SigmaConnection) -> ConnForm {
    let d = sc.d;
    let mut conn = Vec::new();
    for a in 0..d {
        let total = (1..sc.h).fold(sc.phi(0, a).clone(), |acc, t| acc.add(sc.phi(t, a)));
        conn.push((a, total.map(|x| x.neg())));
        for t in 1..sc.h {
            conn.push((d + (t - 1) * d + a, sc.phi(t, a).clone()));
        }
    }
    conn
}

/// DR(M_Sigma, nabla_Sigma): h structures give (h-1)d pd variables Y and
/// forms dT/p, dY.
pub fn sigma_de_rham(sc: &SigmaConnection, params: &Params) -> Result<CochainComplex> {
    let c = sc.as_connection();
    let md = c.modulus();
    check_params(params, md)?;
    if sc.h == 1 {
        return build_de_rham(c, params);
    }
    require_constant(c.phi().iter().cloned(), "connection")?;
    let nv = (sc.h - 1) * sc.d;
    Ok(de_rham_over(md, sc.d, nv, c.rank(), &sigma_form(sc), params.window)?.1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaDegree {
    pub degree: usize,
    pub single: Divisors,
    pub sigma: Divisors,
    pub iso: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaRun {
    pub params: Params,
    pub chain_map: bool,
    pub degrees: Vec<SigmaDegree>,
}

impl SigmaRun {
    pub fn agrees(&self) -> bool {
        self.chain_map && self.degrees.iter().all(|d| d.iso && d.single == d.sigma)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaReport {
    pub base: SigmaRun,
    pub enlarged: SigmaRun,
}

impl SigmaReport {
    pub fn stable(&self) -> bool {
        self.base.agrees() == self.enlarged.agrees()
    }

    pub fn verdict(&self) -> Verdict {
        match (self.stable(), self.base.agrees()) {
            (false, _) => Verdict::Inconclusive,
            (true, true) => Verdict::Pass,
            (true, false) => Verdict::Fail,
        }
    }
}

/// The connection on the single structure obtained by setting Y = 0.
pub fn sigma_restriction(sc: &SigmaConnection) -> Result<PConnection> {
    let phi = (0..sc.d)
        .map(|a| (1..sc.h).fold(sc.phi(0, a).clone(), |acc, t| acc.add(sc.phi(t, a))))
        .collect();
    PConnection::new(phi)
}

fn sigma_run(sc: &SigmaConnection, params: &Params) -> Result<SigmaRun> {
    let c = sc.as_connection();
    let md = c.modulus();
    let (d, rank, w) = (sc.d, c.rank(), params.window);
    let single = sigma_restriction(sc)?;
    let dr = build_de_rham(&single, params)?;
    let nv = (sc.h - 1) * d;
    let (sblocks, sdr) = de_rham_over(md, d, nv, rank, &sigma_form(sc), w)?;
    let level = sigma_level(md, sc)?;
    let zero = level.zero().with_bound(Some(w.pd));
    // e -> exp(-sum phi^(t+1) Y_t) e keeps nabla: the Y-components cancel
    let gauge = if sc.h == 1 {
        Mat::identity(rank, &zero.constant(1))
    } else {
        let phis: Vec<Matrix> = (1..sc.h).flat_map(|t| (0..d).map(move |a| sc.phi(t, a).clone())).collect();
        exp_matrix(&PConnection::new(phis)?, &zero, &(0..nv).collect::<Vec<_>>(), -1)
    };
    let iota = |n: usize| -> Result<ModMatrix> {
        let src = Block::new(d, 0, rank, n, w);
        let tgt = sblocks.get(n).cloned().unwrap_or_default();
        to_matrix(md, &src, &tgt, w, |cell| {
            let f = function_of(&zero, &Cell { k: vec![0; nv], ..cell.clone() });
            let mut out = Chain::new();
            for s in 0..rank {
                emit(&mut out, &gauge.get(s, cell.r).mul(&f), &vec![(cell.forms, 1)], s, d);
            }
            Ok(out)
        })
    };
    let maps = (0..=d + 1).map(iota).collect::<Result<Vec<_>>>()?;
    let chain_map = is_chain_map(&|n| maps[n].clone(), &dr, &sdr, d + 1)?;
    let mut degrees = Vec::new();
    for (i, map) in maps.iter().enumerate().take(2) {
        let (h1, h2) = (dr.cohomology(i)?, sdr.cohomology(i)?);
        degrees.push(SigmaDegree {
            degree: i,
            iso: induces_iso(map, &h1, &h2, &sdr.diff_in(i))?,
            single: h1.divisors,
            sigma: h2.divisors,
        });
    }
    Ok(SigmaRun {
        params: *params,
        chain_map,
        degrees,
    })
}

/// H^0 and H^1 of DR(M) on the single structure and of DR(M_Sigma),
/// compared through the base-change map, with the stability gate.
pub fn sigma_compare(sc: &SigmaConnection, params: &Params) -> Result<SigmaReport> {
    let c = sc.as_connection();
    require_constant(c.phi().iter().cloned(), "connection")?;
    check_params(params, c.modulus())?;
    Ok(SigmaReport {
        base: sigma_run(sc, params)?,
        enlarged: sigma_run(sc, &params.enlarged(c.modulus().p()))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystals::from_connection;

    fn md(p: u32, n: u32) -> Modulus {
        Modulus::new(p, n).unwrap()
    }

    fn scalar_conn(m: Modulus, c: i128) -> PConnection {
        PConnection::new(vec![Mat::from_fn(1, 1, |_, _| LaurentPoly::constant(m, 1, c))]).unwrap()
    }

    #[test]
    fn trivial_connection_mod_p_has_zero_differential() {
        let m = md(3, 1);
        let cx = build_de_rham(&scalar_conn(m, 0), &Params::new(2, 2, 2)).unwrap();
        assert_eq!(cx.dims(), &[5, 5]);
        assert!(cx.diff(0).is_zero());
        assert_eq!(cx.divisors(0).unwrap(), Divisors(vec![1; 5]));
        assert_eq!(cx.divisors(1).unwrap(), Divisors(vec![1; 5]));
    }

    #[test]
    fn rank_one_differential() {
        // f -> p f' - p f on the dT/p basis
        let m = md(2, 2);
        let cx = build_de_rham(&scalar_conn(m, 2), &Params::new(1, 1, 2)).unwrap();
        let a = cx.diff(0);
        // source T^0, target weight 0 is T^-1 dT/p and weight 1 is T^0 dT/p
        let src = Block::new(1, 0, 1, 0, Window { t: 1, pd: 1 });
        let tgt = Block::new(1, 0, 1, 1, Window { t: 1, pd: 1 });
        let one = src.index[&Cell { r: 0, t: vec![0], k: vec![], forms: 0 }];
        let t = src.index[&Cell { r: 0, t: vec![1], k: vec![], forms: 0 }];
        let dt = |e: i32| tgt.index[&Cell { r: 0, t: vec![e], k: vec![], forms: 1 }];
        assert_eq!(a.get(dt(0), one), 2);
        assert_eq!(a.get(dt(0), t), 2);
        assert_eq!(a.get(dt(-1), one), 0);
    }

    #[test]
    fn d_r_small_values() {
        let m = md(3, 2);
        let w = Window { t: 3, pd: 3 };
        // d_R(T) = p dT/p at level 0
        let x = Cell { r: 0, t: vec![1], k: vec![], forms: 0 };
        let img = d_two(&x, &vec![], 1, 3);
        assert_eq!(img[&Cell { r: 0, t: vec![0], k: vec![], forms: 1 }], 3);
        // d_R(X_1^[2]) = X_1 dX_1
        let x = Cell { r: 0, t: vec![0], k: vec![2], forms: 0 };
        let img = d_two(&x, &vec![], 1, 3);
        assert_eq!(img.len(), 1);
        assert_eq!(img[&Cell { r: 0, t: vec![0], k: vec![1], forms: 2 }], 1);
        assert!(verify_d_r_cosimplicial(m, 1, 2, w, 12).unwrap().holds());
    }

    #[test]
    fn forms_pull_back_along_p0() {
        // p_0(p dT/p) = p dT/p - p dX_1 = d_R(T - p X_1)
        let m = md(2, 3);
        let w = Window { t: 3, pd: 2 };
        let f = face_map(m, 1, 0, 0, w, None).unwrap();
        let x = Cell { r: 0, t: vec![0], k: vec![], forms: 1 };
        let img = normalize(m, f.apply(&x).unwrap(), w).unwrap();
        let mut want = BTreeMap::new();
        want.insert(Cell { r: 0, t: vec![0], k: vec![0], forms: 1 }, 1);
        want.insert(Cell { r: 0, t: vec![0], k: vec![0], forms: 2 }, m.reduce(-1));
        assert_eq!(img, want);
        let t = Cell { r: 0, t: vec![1], k: vec![], forms: 0 };
        let lhs = normalize(m, d_r_chain(&f.apply(&t).unwrap(), 2), w).unwrap();
        let scaled: BTreeMap<Cell, i128> = want.into_iter().map(|(c, x)| (c, m.reduce(2 * x))).collect();
        assert_eq!(lhs, scaled);
    }

    #[test]
    fn cech_alexander_degree_zero_kernel() {
        let m = md(2, 1);
        let c = scalar_conn(m, 0);
        let s = from_connection(&c);
        let bic = build_bicomplex(&s, &c, &Params::new(2, 2, 2)).unwrap();
        assert!(bic.checks().unwrap().holds());
        let ca = bic.cech_alexander().unwrap();
        assert_eq!(ca.divisors(0).unwrap(), Divisors(vec![1; 5]));
        assert_eq!(bic.de_rham_row().unwrap().diff(0), build_de_rham(&c, &Params::new(2, 2, 2)).unwrap().diff(0));
    }

    #[test]
    fn comparison_for_small_cases() {
        for (p, n, phi) in [(2, 1, 0), (2, 2, 2), (3, 2, 3)] {
            let c = scalar_conn(md(p, n), phi);
            let r = compare_rho(&from_connection(&c), &c, &Params::new(2, 2, 2)).unwrap();
            assert_eq!(r.verdict(), Verdict::Pass, "p={p} n={n}: {r:?}");
        }
    }

    #[test]
    fn comparison_needs_a_window_as_deep_as_the_complex() {
        let c = scalar_conn(md(2, 1), 0);
        let r = compare_rho(&from_connection(&c), &c, &Params::new(1, 8, 2));
        assert!(matches!(r, Err(Error::WindowTooSmall(_))));
    }

    #[test]
    fn negative_powers_escape_the_window() {
        let m = md(3, 2);
        let phi = LaurentPoly::monomial(m, 1, [-2, 0, 0, 0], 3);
        let c = PConnection::new(vec![Mat::from_fn(1, 1, |_, _| phi.clone())]).unwrap();
        let r = build_de_rham(&c, &Params::new(3, 2, 2));
        assert!(matches!(r, Err(Error::WindowTooSmall(_))));
    }

    #[test]
    fn sigma_matches_single_structure() {
        let m = md(2, 2);
        let c = scalar_conn(m, 2);
        let single = SigmaConnection::from_connection(&c);
        let a = sigma_de_rham(&single, &Params::new(2, 2, 2)).unwrap();
        assert_eq!(a.diff(0), build_de_rham(&c, &Params::new(2, 2, 2)).unwrap().diff(0));
        let two = crate::crystals::sigma_base_change(&single, 1).unwrap();
        let r = sigma_compare(&two, &Params::new(2, 2, 2)).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass, "{r:?}");
    }
}
