//! Dense linear algebra over Z/p^N: Smith normal form with transforms,
//! kernels, and homology of a pair of composable maps.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Modulus;

/// Matrix over Z/p^N acting on column vectors.
#[derive(Clone, PartialEq, Eq)]
pub struct ModMatrix {
    md: Modulus,
    m: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModMatrix({}x{} mod {})", self.rows, self.cols, self.m)
    }
}

impl ModMatrix {
    pub fn zeros(md: Modulus, rows: usize, cols: usize) -> Self {
        Self {
            md,
            m: md.modulus() as u64,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(md: Modulus, n: usize) -> Self {
        let mut a = Self::zeros(md, n, n);
        for i in 0..n {
            a.data[i * n + i] = 1 % a.m;
        }
        a
    }

    pub fn from_rows(md: Modulus, rows: &[Vec<i128>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut a = Self::zeros(md, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                a.set(i, j, v);
            }
        }
        a
    }

    pub fn modulus(&self) -> Modulus {
        self.md
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i128) {
        self.data[i * self.cols + j] = self.md.reduce(v) as u64;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: i128) {
        let cur = self.get(i, j) as i128;
        self.set(i, j, cur + v);
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    fn mulmod(&self, a: u64, b: u64) -> u64 {
        if self.m < 1 << 32 {
            a * b % self.m
        } else {
            ((a as u128 * b as u128) % self.m as u128) as u64
        }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::Mismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = Self::zeros(self.md, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b != 0 {
                        let idx = i * o.cols + j;
                        out.data[idx] = (out.data[idx] + self.mulmod(a, b)) % self.m;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&o.data) {
            *x = (*x + self.m - y) % self.m;
        }
        out
    }

    /// Columns of `self` followed by the columns of `o`.
    pub fn hcat(&self, o: &Self) -> Self {
        let rows = self.rows.max(o.rows);
        let mut out = Self::zeros(self.md, rows, self.cols + o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i * out.cols + j] = self.get(i, j);
            }
        }
        for i in 0..o.rows {
            for j in 0..o.cols {
                out.data[i * out.cols + self.cols + j] = o.get(i, j);
            }
        }
        out
    }

    fn val(&self, x: u64) -> u32 {
        self.md.val(x as i128)
    }

    fn row_axpy(&mut self, dst: usize, src: usize, q: u64) {
        // row_dst -= q * row_src
        let c = self.cols;
        for j in 0..c {
            let s = self.data[src * c + j];
            if s != 0 {
                let t = self.mulmod(q, s);
                self.data[dst * c + j] = (self.data[dst * c + j] + self.m - t) % self.m;
            }
        }
    }

    fn col_axpy(&mut self, dst: usize, src: usize, q: u64) {
        // col_dst -= q * col_src
        for i in 0..self.rows {
            let s = self.data[i * self.cols + src];
            if s != 0 {
                let t = self.mulmod(q, s);
                let idx = i * self.cols + dst;
                self.data[idx] = (self.data[idx] + self.m - t) % self.m;
            }
        }
    }

    fn row_axpy_add(&mut self, dst: usize, src: usize, q: u64) {
        let neg = (self.m - q % self.m) % self.m;
        self.row_axpy(dst, src, neg);
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    fn scale_row(&mut self, i: usize, u: u64) {
        for j in 0..self.cols {
            let idx = i * self.cols + j;
            self.data[idx] = self.mulmod(self.data[idx], u);
        }
    }
}

/// U A V = diag(p^{vals[0]}, ..., p^{vals[s-1]}, 0, ...).
#[derive(Clone, Debug)]
pub struct Smith {
    pub vals: Vec<u32>,
    /// Present when transforms were requested.
    pub v: Option<ModMatrix>,
    pub v_inv: Option<ModMatrix>,
}

pub fn smith(a: &ModMatrix, transforms: bool) -> Smith {
    let mut a = a.clone();
    let (r, c) = (a.rows, a.cols);
    let mut v = transforms.then(|| ModMatrix::identity(a.md, c));
    let mut vi = transforms.then(|| ModMatrix::identity(a.md, c));
    let n = a.md.prec();
    let mut vals = Vec::new();
    for t in 0..r.min(c) {
        let mut best: Option<(u32, usize, usize)> = None;
        'search: for i in t..r {
            for j in t..c {
                let x = a.get(i, j);
                if x != 0 {
                    let vx = a.val(x);
                    if best.is_none_or(|b| vx < b.0) {
                        best = Some((vx, i, j));
                        if vx == 0 {
                            break 'search;
                        }
                    }
                }
            }
        }
        let Some((pv, pi, pj)) = best else { break };
        a.swap_rows(t, pi);
        a.swap_cols(t, pj);
        if let (Some(v), Some(vi)) = (v.as_mut(), vi.as_mut()) {
            v.swap_cols(t, pj);
            vi.swap_rows(t, pj);
        }
        let x = a.get(t, t);
        let pow = (a.md.p() as u64).pow(pv);
        let unit = x / pow;
        let uinv = a.md.inv(unit as i128).expect("unit part is invertible") as u64;
        a.scale_row(t, uinv);
        for i in t + 1..r {
            let y = a.get(i, t);
            if y != 0 {
                a.row_axpy(i, t, y / pow);
            }
        }
        for j in t + 1..c {
            let y = a.get(t, j);
            if y != 0 {
                let q = y / pow;
                a.data[t * c + j] = 0;
                if let (Some(v), Some(vi)) = (v.as_mut(), vi.as_mut()) {
                    v.col_axpy(j, t, q);
                    vi.row_axpy_add(t, j, q);
                }
            }
        }
        debug_assert!(pv < n);
        vals.push(pv);
    }
    Smith { vals, v, v_inv: vi }
}

/// Length of the submodule spanned by the columns.
pub fn span_length(a: &ModMatrix) -> u32 {
    let n = a.md.prec();
    smith(a, false).vals.iter().map(|v| n - v).sum()
}

/// Finite module over Z/p^N, as the sorted exponents e of its cyclic
/// summands Z/p^e.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Divisors(pub Vec<u32>);

impl Divisors {
    pub fn length(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Orders p^e of the cyclic summands.
    pub fn orders(&self, p: u32) -> Vec<u64> {
        self.0.iter().map(|&e| (p as u64).pow(e)).collect()
    }

    pub fn direct_sum(&self, o: &Self) -> Self {
        let mut v: Vec<u32> = self.0.iter().chain(&o.0).copied().collect();
        v.sort_unstable();
        Self(v)
    }
}

/// Divisors of the cokernel of a presentation matrix.
pub fn cokernel(a: &ModMatrix) -> Divisors {
    let n = a.md.prec();
    let s = smith(a, false);
    let mut out: Vec<u32> = s.vals.iter().copied().filter(|&v| v > 0).collect();
    out.extend(std::iter::repeat_n(n, a.rows - s.vals.len()));
    out.sort_unstable();
    Divisors(out)
}

/// ker(d_out) / im(d_in) together with generators of ker(d_out).
#[derive(Clone, Debug)]
pub struct Homology {
    pub divisors: Divisors,
    /// Columns generate the cycles.
    pub cycles: ModMatrix,
}

/// Homology at the middle term of A --d_in--> B --d_out--> C.
pub fn homology(d_in: &ModMatrix, d_out: &ModMatrix) -> Result<Homology> {
    let b = d_out.cols;
    if d_in.rows != b {
        return Err(Error::Mismatch(format!("maps do not compose: {} vs {}", d_in.rows, b)));
    }
    if !d_out.mul(d_in)?.is_zero() {
        return Err(Error::IdentityViolated("composite of the differentials is nonzero".into()));
    }
    let md = d_out.md;
    let n = md.prec();
    let p = md.p() as u64;
    let s = smith(d_out, true);
    let (v, vi) = (s.v.expect("requested"), s.v_inv.expect("requested"));
    // exponent a_k of the k-th cyclic piece of the kernel
    let orders: Vec<u32> = (0..b).map(|k| s.vals.get(k).copied().unwrap_or(n)).collect();
    let keep: Vec<usize> = (0..b).filter(|&k| orders[k] > 0).collect();
    let y = vi.mul(d_in)?;
    let mut pres = ModMatrix::zeros(md, keep.len(), d_in.cols + keep.len());
    let mut cycles = ModMatrix::zeros(md, b, keep.len());
    for (row, &k) in keep.iter().enumerate() {
        let c = n - orders[k];
        let pc = p.pow(c);
        for j in 0..d_in.cols {
            let x = y.get(k, j);
            if x % pc != 0 {
                return Err(Error::IdentityViolated(format!(
                    "boundary outside the cycles (coordinate {k})"
                )));
            }
            pres.set(row, j, (x / pc) as i128);
        }
        pres.set(row, d_in.cols + row, p.pow(orders[k]) as i128);
        for i in 0..b {
            cycles.set(i, row, v.get(i, k) as i128 * pc as i128);
        }
    }
    Ok(Homology {
        divisors: cokernel(&pres),
        cycles,
    })
}

/// Whether a chain map f induces an isomorphism between the homology at
/// the source and at the target; `tgt_in` is the incoming differential at
/// the target.
pub fn induces_iso(f: &ModMatrix, src: &Homology, tgt: &Homology, tgt_in: &ModMatrix) -> Result<bool> {
    let image = f.mul(&src.cycles)?;
    let len = span_length(&image.hcat(tgt_in)) - span_length(tgt_in);
    Ok(len == src.divisors.length() && len == tgt.divisors.length())
}
