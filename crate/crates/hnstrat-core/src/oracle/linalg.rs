//! Dense linear algebra over a small prime field, sized for exhaustive
//! searches: canonical reduced-echelon subspaces, full subspace enumeration
//! by pivot pattern, and Gaussian-binomial counting for budget checks.

use crate::error::Error;
use serde::{Deserialize, Serialize};

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Inverse in F_p for prime p and a not divisible by p.
fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

pub fn is_small_prime(p: u64) -> bool {
    matches!(p, 2 | 3 | 5 | 7 | 11 | 13)
}

/// Row-major matrix over F_p. Entries are kept reduced mod p.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatFp {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<u64>,
}

impl MatFp {
    pub fn zero(p: u64, rows: usize, cols: usize) -> Self {
        MatFp {
            p,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = MatFp::zero(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(p: u64, cols: usize, data: &[Vec<u64>]) -> Result<Self, Error> {
        let mut m = MatFp::zero(p, data.len(), cols);
        for (r, row) in data.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::InvalidInput(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        Ok(m)
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.entries[r * self.cols + c] = v % self.p;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    pub fn mul(&self, rhs: &MatFp) -> MatFp {
        assert_eq!(self.p, rhs.p);
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = MatFp::zero(self.p, self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    let v = (out.get(r, c) + a * rhs.get(k, c)) % self.p;
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    /// Matrix times column vector.
    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0u64, |acc, (&a, &x)| (acc + a * x) % self.p)
            })
            .collect()
    }

    pub fn transpose(&self) -> MatFp {
        let mut out = MatFp::zero(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// Reduced row-echelon form and the pivot columns.
    pub fn rref(&self) -> (MatFp, Vec<usize>) {
        let p = self.p;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            let Some(src) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if src != r {
                for k in 0..m.cols {
                    let (a, b) = (m.get(r, k), m.get(src, k));
                    m.set(r, k, b);
                    m.set(src, k, a);
                }
            }
            let inv = inv_mod(m.get(r, c), p);
            for k in 0..m.cols {
                m.set(r, k, m.get(r, k) * inv % p);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c);
                if f == 0 {
                    continue;
                }
                for k in 0..m.cols {
                    let v = (m.get(i, k) + (p - f) * m.get(r, k)) % p;
                    m.set(i, k, v);
                }
            }
            pivots.push(c);
            r += 1;
            if r == m.rows {
                break;
            }
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Null space, as a canonical subspace of the domain.
    pub fn kernel(&self) -> Subspace {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![0u64; self.cols];
            v[f] = 1;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = (self.p - r.get(row, f)) % self.p;
            }
            basis.push(v);
        }
        Subspace::from_span(self.p, self.cols, &basis)
    }

    /// Column space, as a canonical subspace of the codomain.
    pub fn column_space(&self) -> Subspace {
        let t = self.transpose();
        let rows: Vec<Vec<u64>> = (0..t.rows).map(|r| t.row(r).to_vec()).collect();
        Subspace::from_span(self.p, self.rows, &rows)
    }
}

/// Subspace of F_p^ambient held by its unique reduced-echelon basis, so
/// subspace equality is structural equality.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    pub p: u64,
    pub ambient: usize,
    pub basis: Vec<Vec<u64>>,
}

impl Subspace {
    pub fn zero(p: u64, ambient: usize) -> Self {
        Subspace {
            p,
            ambient,
            basis: vec![],
        }
    }

    pub fn full(p: u64, ambient: usize) -> Self {
        let rows: Vec<Vec<u64>> = (0..ambient)
            .map(|i| {
                let mut v = vec![0; ambient];
                v[i] = 1;
                v
            })
            .collect();
        Subspace {
            p,
            ambient,
            basis: rows,
        }
    }

    pub fn from_span(p: u64, ambient: usize, vecs: &[Vec<u64>]) -> Self {
        let m = MatFp::from_rows(p, ambient, vecs).expect("span rows have ambient width");
        let (r, pivots) = m.rref();
        let basis = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        Subspace { p, ambient, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// Residual of v after eliminating against the echelon basis.
    fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let mut w = v.to_vec();
        for row in &self.basis {
            let pc = row.iter().position(|&x| x != 0).expect("no zero basis rows");
            let f = w[pc];
            if f == 0 {
                continue;
            }
            for (wi, &bi) in w.iter_mut().zip(row) {
                *wi = (*wi + (self.p - f) * bi) % self.p;
            }
        }
        w
    }

    pub fn contains_vec(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains_vec(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Subspace::from_span(self.p, self.ambient, &rows)
    }

    /// Image under a linear map out of this ambient space.
    pub fn image_under(&self, m: &MatFp) -> Subspace {
        assert_eq!(m.cols, self.ambient);
        let rows: Vec<Vec<u64>> = self.basis.iter().map(|v| m.apply(v)).collect();
        Subspace::from_span(self.p, m.rows, &rows)
    }

    /// All members, including zero; p^dim of them.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![0; self.ambient]];
        for row in &self.basis {
            let mut next = Vec::with_capacity(out.len() * self.p as usize);
            for v in &out {
                for c in 0..self.p {
                    let w: Vec<u64> = v
                        .iter()
                        .zip(row)
                        .map(|(&a, &b)| (a + c * b) % self.p)
                        .collect();
                    next.push(w);
                }
            }
            out = next;
        }
        out
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return vec![];
    }
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every subspace of F_p^d, one canonical echelon basis per pivot pattern
/// and filling of the free entries.
pub fn enumerate_subspaces(p: u64, d: usize) -> Vec<Subspace> {
    let mut out = Vec::new();
    for k in 0..=d {
        for pivots in combinations(d, k) {
            // free slots: to the right of each pivot, excluding pivot columns
            let mut free = Vec::new();
            for (r, &pc) in pivots.iter().enumerate() {
                for c in pc + 1..d {
                    if !pivots.contains(&c) {
                        free.push((r, c));
                    }
                }
            }
            let mut fill = vec![0u64; free.len()];
            loop {
                let mut basis = vec![vec![0u64; d]; k];
                for (r, &pc) in pivots.iter().enumerate() {
                    basis[r][pc] = 1;
                }
                for (&(r, c), &v) in free.iter().zip(&fill) {
                    basis[r][c] = v;
                }
                out.push(Subspace {
                    p,
                    ambient: d,
                    basis,
                });
                // mixed-radix increment
                let mut i = 0;
                loop {
                    if i == fill.len() {
                        break;
                    }
                    fill[i] += 1;
                    if fill[i] < p {
                        break;
                    }
                    fill[i] = 0;
                    i += 1;
                }
                if i == fill.len() {
                    break;
                }
            }
        }
    }
    out
}

/// Number of subspaces of F_p^d, by the Gaussian-binomial recurrence
/// [n,k] = [n-1,k-1] + p^k [n-1,k]; None on u128 overflow.
pub fn subspace_count(p: u64, d: usize) -> Option<u128> {
    let mut row = vec![1u128];
    for _ in 1..=d {
        let mut next = vec![1u128; row.len() + 1];
        for k in 1..row.len() {
            let pk = (p as u128).checked_pow(k as u32)?;
            next[k] = row[k - 1].checked_add(pk.checked_mul(row[k])?)?;
        }
        row = next;
    }
    let mut total = 0u128;
    for v in row {
        total = total.checked_add(v)?;
    }
    Some(total)
}
