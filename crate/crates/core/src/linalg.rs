//! Exact linear algebra over a prime field `F_p`.
//!
//! Vectors are rows and act on the right: `v ↦ v·g`. The commutator of a
//! vector with a matrix is written additively, `[v, g] = v(g − 1)`.
//!
//! Matrices are dense and small. Entries are residues stored as bytes, so the
//! modulus must be below 256; the row-major byte string of a matrix is its
//! canonical key and orders elements everywhere downstream.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An odd prime modulus below 256.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct FieldSpec {
    p: u32,
}

impl FieldSpec {
    pub fn new(p: u32) -> Result<Self> {
        if p == 2 {
            return Err(Error::InvalidField("p = 2 is not supported; p must be odd".into()));
        }
        if p < 2 || !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if p > 251 {
            return Err(Error::InvalidField(format!("{p} exceeds the largest supported prime 251")));
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn p(self) -> u32 {
        self.p
    }

    /// Several results need `p ≥ 5`; `p = 3` computations run but carry a flag.
    pub fn below_five(self) -> bool {
        self.p < 5
    }

    #[inline]
    pub fn reduce(self, x: i64) -> u8 {
        x.rem_euclid(self.p as i64) as u8
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        ((a as u32 + b as u32) % self.p) as u8
    }

    #[inline]
    pub fn sub(self, a: u8, b: u8) -> u8 {
        ((a as u32 + self.p - b as u32) % self.p) as u8
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        ((a as u32 * b as u32) % self.p) as u8
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        ((self.p - a as u32) % self.p) as u8
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(self, a: u8) -> u8 {
        assert!(!a.is_multiple_of(self.p as u8), "zero has no inverse");
        self.pow(a, self.p as u64 - 2)
    }

    pub fn pow(self, a: u8, mut e: u64) -> u8 {
        let mut base = a as u32 % self.p;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % self.p;
            }
            base = base * base % self.p;
            e >>= 1;
        }
        acc as u8
    }
}

impl TryFrom<u32> for FieldSpec {
    type Error = Error;
    fn try_from(p: u32) -> Result<Self> {
        Self::new(p)
    }
}

impl From<FieldSpec> for u32 {
    fn from(f: FieldSpec) -> u32 {
        f.p
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Square matrix over `F_p`, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    field: FieldSpec,
    dim: usize,
    entries: Vec<u8>,
}

impl PartialOrd for FpMatrix {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FpMatrix {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then_with(|| self.entries.cmp(&other.entries))
            .then_with(|| self.field.cmp(&other.field))
    }
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.chunks(self.dim.max(1)).enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "] mod {}", self.field.p)
    }
}

impl FpMatrix {
    pub fn zero(field: FieldSpec, dim: usize) -> Self {
        Self { field, dim, entries: vec![0; dim * dim] }
    }

    pub fn identity(field: FieldSpec, dim: usize) -> Self {
        let mut m = Self::zero(field, dim);
        for i in 0..dim {
            m.entries[i * dim + i] = 1;
        }
        m
    }

    /// The matrix unit `E_ij` (zero-based indices).
    pub fn unit(field: FieldSpec, dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zero(field, dim);
        m.entries[i * dim + j] = 1;
        m
    }

    /// `I + E_ij` (zero-based indices).
    pub fn transvection(field: FieldSpec, dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::identity(field, dim);
        m.entries[i * dim + j] = field.add(m.entries[i * dim + j], 1);
        m
    }

    /// Builds a matrix from integer rows, reducing every entry mod p.
    pub fn from_rows<R: AsRef<[i64]>>(field: FieldSpec, rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: row.len() });
            }
            entries.extend(row.iter().map(|&x| field.reduce(x)));
        }
        Ok(Self { field, dim, entries })
    }

    /// Builds a matrix from residues already in `[0, p)`.
    pub fn from_entries(field: FieldSpec, dim: usize, entries: Vec<u8>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { left: dim * dim, right: entries.len() });
        }
        if entries.iter().any(|&x| x as u32 >= field.p) {
            return Err(Error::InvalidField("entry out of range".into()));
        }
        Ok(Self { field, dim, entries })
    }

    #[inline]
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Canonical row-major byte encoding.
    #[inline]
    pub fn key(&self) -> &[u8] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: u8) {
        self.entries[i * self.dim + j] = value % self.field.p as u8;
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.entries.chunks(self.dim.max(1)).map(|r| r.iter().map(|&x| x as u32).collect()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0)
    }

    pub fn is_identity(&self) -> bool {
        let n = self.dim;
        self.entries.iter().enumerate().all(|(k, &x)| x == u8::from(k / n == k % n))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ModulusMismatch { left: self.field.p, right: other.field.p });
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    /// Product without compatibility checks; callers guarantee matching shape.
    pub fn mul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        debug_assert_eq!(self.field, rhs.field);
        let n = self.dim;
        let p = self.field.p;
        let mut acc = vec![0u32; n * n];
        for i in 0..n {
            let out = &mut acc[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.entries[i * n + k] as u32;
                if a == 0 {
                    continue;
                }
                let row = &rhs.entries[k * n..(k + 1) * n];
                for (o, &b) in out.iter_mut().zip(row) {
                    *o += a * b as u32;
                }
            }
        }
        Self { field: self.field, dim: n, entries: acc.into_iter().map(|x| (x % p) as u8).collect() }
    }

    /// `self · rhs == rhs · self`, computed row by row without allocating.
    pub fn commutes_with(&self, rhs: &Self) -> bool {
        let n = self.dim;
        if n > 64 {
            return self.mul(rhs) == rhs.mul(self);
        }
        let p = self.field.p;
        let row_of = |a: &Self, b: &Self, i: usize, out: &mut [u32; 64]| {
            out[..n].fill(0);
            for k in 0..n {
                let x = a.entries[i * n + k] as u32;
                if x == 0 {
                    continue;
                }
                for (o, &y) in out[..n].iter_mut().zip(&b.entries[k * n..(k + 1) * n]) {
                    *o += x * y as u32;
                }
            }
        };
        let (mut r1, mut r2) = ([0u32; 64], [0u32; 64]);
        (0..n).all(|i| {
            row_of(self, rhs, i, &mut r1);
            row_of(rhs, self, i, &mut r2);
            r1[..n].iter().zip(&r2[..n]).all(|(a, b)| a % p == b % p)
        })
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let f = self.field;
        let entries = self.entries.iter().zip(&rhs.entries).map(|(&a, &b)| f.add(a, b)).collect();
        Self { field: f, dim: self.dim, entries }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let f = self.field;
        let entries = self.entries.iter().zip(&rhs.entries).map(|(&a, &b)| f.sub(a, b)).collect();
        Self { field: f, dim: self.dim, entries }
    }

    pub fn scale(&self, c: u8) -> Self {
        let f = self.field;
        Self { field: f, dim: self.dim, entries: self.entries.iter().map(|&a| f.mul(a, c)).collect() }
    }

    pub fn neg(&self) -> Self {
        self.scale(self.field.neg(1))
    }

    /// `self − I`.
    pub fn minus_identity(&self) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            let k = i * self.dim + i;
            m.entries[k] = self.field.sub(m.entries[k], 1);
        }
        m
    }

    /// `self + I`.
    pub fn plus_identity(&self) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            let k = i * self.dim + i;
            m.entries[k] = self.field.add(m.entries[k], 1);
        }
        m
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.field, self.dim);
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

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zero(self.field, n);
        for i in 0..n {
            for j in 0..n {
                m.entries[j * n + i] = self.entries[i * n + j];
            }
        }
        m
    }

    /// Lie bracket `XY − YX`.
    pub fn bracket(&self, rhs: &Self) -> Self {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    /// Inverse by Gauss–Jordan elimination.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.dim;
        let f = self.field;
        let mut a = self.entries.clone();
        let mut inv = Self::identity(f, n).entries;
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r * n + col] != 0)?;
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                    inv.swap(pivot * n + j, col * n + j);
                }
            }
            let s = f.inv(a[col * n + col]);
            for j in 0..n {
                a[col * n + j] = f.mul(a[col * n + j], s);
                inv[col * n + j] = f.mul(inv[col * n + j], s);
            }
            for r in 0..n {
                let c = a[r * n + col];
                if r == col || c == 0 {
                    continue;
                }
                for j in 0..n {
                    a[r * n + j] = f.sub(a[r * n + j], f.mul(c, a[col * n + j]));
                    inv[r * n + j] = f.sub(inv[r * n + j], f.mul(c, inv[col * n + j]));
                }
            }
        }
        Some(Self { field: f, dim: n, entries: inv })
    }

    pub fn rank(&self) -> usize {
        row_space(self).dim()
    }

    /// Conjugate `h⁻¹ · self · h`, given `h⁻¹`.
    pub fn conjugate_by(&self, h: &Self, h_inv: &Self) -> Self {
        h_inv.mul(self).mul(h)
    }
}

/// Checked matrix product.
pub fn mat_mul(a: &FpMatrix, b: &FpMatrix) -> Result<FpMatrix> {
    a.check_compatible(b)?;
    Ok(a.mul(b))
}

/// Row vector times matrix.
pub fn vec_mat(field: FieldSpec, v: &[u8], m: &FpMatrix) -> Vec<u8> {
    let n = m.dim;
    let mut acc = vec![0u32; n];
    for (i, &a) in v.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (o, &b) in acc.iter_mut().zip(m.row(i)) {
            *o += a as u32 * b as u32;
        }
    }
    acc.into_iter().map(|x| (x % field.p) as u8).collect()
}

/// Reduced row echelon form; zero rows dropped. Returns rows and pivot columns.
fn rref(field: FieldSpec, width: usize, mut rows: Vec<Vec<u8>>) -> (Vec<Vec<u8>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let s = field.inv(rows[r][col]);
        for x in rows[r].iter_mut() {
            *x = field.mul(*x, s);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            let c = row[col];
            if i == r || c == 0 {
                continue;
            }
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = field.sub(*x, field.mul(c, y));
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// `{x : B xᵀ = 0}` for the rows `B`.
pub(crate) fn null_space(field: FieldSpec, width: usize, rows: Vec<Vec<u8>>) -> Vec<Vec<u8>> {
    let (rows, pivots) = rref(field, width, rows);
    let free: Vec<usize> = (0..width).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut x = vec![0u8; width];
            x[fc] = 1;
            for (row, &pc) in rows.iter().zip(&pivots) {
                x[pc] = field.neg(row[fc]);
            }
            x
        })
        .collect()
}

/// Subspace of `F_p^n`, stored by its reduced row echelon basis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    field: FieldSpec,
    ambient_dim: usize,
    basis: Vec<Vec<u8>>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in F_{}^{}: {:?})", self.dim(), self.field.p, self.ambient_dim, self.basis)
    }
}

impl Subspace {
    pub fn zero(field: FieldSpec, ambient_dim: usize) -> Self {
        Self { field, ambient_dim, basis: Vec::new() }
    }

    pub fn full(field: FieldSpec, ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                let mut v = vec![0u8; ambient_dim];
                v[i] = 1;
                v
            })
            .collect();
        Self { field, ambient_dim, basis }
    }

    pub fn span<I, V>(field: FieldSpec, ambient_dim: usize, vectors: I) -> Self
    where
        I: IntoIterator<Item = V>,
        V: AsRef<[u8]>,
    {
        let rows: Vec<Vec<u8>> = vectors
            .into_iter()
            .map(|v| v.as_ref().iter().map(|&x| x % field.p as u8).collect::<Vec<u8>>())
            .inspect(|v| assert_eq!(v.len(), ambient_dim, "vector length"))
            .collect();
        let (basis, _) = rref(field, ambient_dim, rows);
        Self { field, ambient_dim, basis }
    }

    #[inline]
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u8>] {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.ambient_dim
    }

    /// `|U| = p^dim`, saturating.
    pub fn order(&self) -> u128 {
        (self.field.p as u128).saturating_pow(self.dim() as u32)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ModulusMismatch { left: self.field.p, right: other.field.p });
        }
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch { left: self.ambient_dim, right: other.ambient_dim });
        }
        Ok(())
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        // Reduce v against the echelon basis.
        let f = self.field;
        let mut w = v.to_vec();
        for row in &self.basis {
            let pc = row.iter().position(|&x| x != 0).expect("basis rows are nonzero");
            let c = w[pc];
            if c != 0 {
                for (x, &y) in w.iter_mut().zip(row) {
                    *x = f.sub(*x, f.mul(c, y));
                }
            }
        }
        w.iter().all(|&x| x == 0)
    }

    pub fn is_subspace_of(&self, other: &Self) -> bool {
        self.basis.iter().all(|v| other.contains(v))
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self::span(self.field, self.ambient_dim, self.basis.iter().chain(&other.basis)))
    }

    /// Orthogonal complement under the standard dot product.
    pub fn perp(&self) -> Self {
        let basis = null_space(self.field, self.ambient_dim, self.basis.clone());
        Self::span(self.field, self.ambient_dim, basis)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.perp().sum(&other.perp())?.perp())
    }

    /// Image `U·M`.
    pub fn image(&self, m: &FpMatrix) -> Self {
        let f = self.field;
        Self::span(f, self.ambient_dim, self.basis.iter().map(|v| vec_mat(f, v, m)))
    }

    /// All vectors of the subspace, in lexicographic coefficient order.
    pub fn vectors(&self) -> Vec<Vec<u8>> {
        let f = self.field;
        let mut out = vec![vec![0u8; self.ambient_dim]];
        for b in &self.basis {
            let mut next = Vec::with_capacity(out.len() * f.p as usize);
            for v in &out {
                for c in 0..f.p as u8 {
                    next.push(v.iter().zip(b).map(|(&x, &y)| f.add(x, f.mul(c, y))).collect());
                }
            }
            out = next;
        }
        out
    }
}

/// Left kernel `{v : v·M = 0}`.
pub fn kernel(m: &FpMatrix) -> Subspace {
    let t = m.transpose();
    let rows: Vec<Vec<u8>> = (0..m.dim).map(|i| t.row(i).to_vec()).collect();
    let basis = null_space(m.field, m.dim, rows);
    Subspace::span(m.field, m.dim, basis)
}

/// Row space of `M`, which is the image `V·M`.
pub fn row_space(m: &FpMatrix) -> Subspace {
    Subspace::span(m.field, m.dim, (0..m.dim).map(|i| m.row(i).to_vec()))
}

/// Preimage `{v : v·M ∈ U}`.
pub fn preimage(m: &FpMatrix, u: &Subspace) -> Subspace {
    let f = m.field;
    let mt = m.transpose();
    let rows: Vec<Vec<u8>> = u.perp().basis.iter().map(|w| vec_mat(f, w, &mt)).collect();
    let basis = null_space(f, m.dim, rows);
    Subspace::span(f, m.dim, basis)
}

/// Smallest `d ≥ 1` with `(g − I)^d = 0`: the degree of the minimum polynomial
/// `(x − 1)^d` of a unipotent matrix.
pub fn unipotent_index(g: &FpMatrix) -> Result<usize> {
    let n = g.minus_identity();
    let mut power = n.clone();
    for d in 1..=g.dim.max(1) {
        if power.is_zero() {
            return Ok(d);
        }
        power = power.mul(&n);
    }
    Err(Error::NotUnipotent)
}

/// Nilpotence index of `x`: smallest `d ≥ 1` with `x^d = 0`.
fn nilpotence_index(x: &FpMatrix) -> Option<usize> {
    let mut power = x.clone();
    for d in 1..=x.dim.max(1) {
        if power.is_zero() {
            return Some(d);
        }
        power = power.mul(x);
    }
    None
}

/// Truncated logarithm `Σ_{k<p} (−1)^{k+1} N^k / k` with `N = g − I`.
pub fn matrix_log(g: &FpMatrix) -> Result<FpMatrix> {
    let f = g.field;
    let p = f.p as usize;
    let n = g.minus_identity();
    let index = nilpotence_index(&n).ok_or(Error::NotUnipotent)?;
    if index > p {
        return Err(Error::LogDomain { index, p: f.p });
    }
    let mut acc = FpMatrix::zero(f, g.dim);
    let mut power = n.clone();
    for k in 1..index {
        let coeff = f.inv(k as u8);
        let coeff = if k % 2 == 1 { coeff } else { f.neg(coeff) };
        acc = acc.add(&power.scale(coeff));
        power = power.mul(&n);
    }
    Ok(acc)
}

/// Truncated exponential `Σ_{k<p} x^k / k!`.
pub fn matrix_exp(x: &FpMatrix) -> Result<FpMatrix> {
    let f = x.field;
    let p = f.p as usize;
    let index = nilpotence_index(x).ok_or(Error::NotUnipotent)?;
    if index > p {
        return Err(Error::LogDomain { index, p: f.p });
    }
    let mut acc = FpMatrix::identity(f, x.dim);
    let mut power = x.clone();
    let mut fact: u8 = 1;
    for k in 1..index {
        fact = f.mul(fact, k as u8);
        acc = acc.add(&power.scale(f.inv(fact)));
        power = power.mul(x);
    }
    Ok(acc)
}
