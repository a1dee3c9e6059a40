use super::{position_cmp, Q};
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_traits::{One, Zero};

/// Dense row-major matrix over the rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", super::fmt_q(self.get(i, j)))?;
            }
        }
        write!(f, "]")
    }
}

pub struct Rref {
    pub reduced: RatMatrix,
    pub pivots: Vec<usize>,
    /// Invertible `T` with `T * M == reduced`.
    pub transform: RatMatrix,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Q::one();
        }
        m
    }

    pub fn scalar(n: usize, c: &Q) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        RatMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| super::q(x)).collect()).collect())
    }

    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.set(i, j, Q::one());
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Q>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[Q] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| *self.get(i, j) == if i == j { Q::one() } else { Q::zero() }))
    }

    pub fn nonzeros(&self) -> impl Iterator<Item = ((usize, usize), &Q)> + '_ {
        let c = self.cols;
        self.data.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(move |(k, v)| ((k / c, k % c), v))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.shape(), o.shape(), "shape mismatch in add");
        RatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.shape(), o.shape(), "shape mismatch in sub");
        RatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: &Q) -> Self {
        RatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn neg(&self) -> Self {
        RatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a).collect() }
    }

    pub fn add_assign_scaled(&mut self, o: &Self, c: &Q) {
        assert_eq!(self.shape(), o.shape());
        if c.is_zero() {
            return;
        }
        for (a, b) in self.data.iter_mut().zip(&o.data) {
            if !b.is_zero() {
                *a += b * c;
            }
        }
    }

    /// Product skipping zero entries; fast on the sparse matrices that
    /// dominate reductions.
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch in mul");
        let mut out = Self::zeros(self.rows, o.cols);
        let onz: Vec<Vec<usize>> = (0..o.rows).map(|k| (0..o.cols).filter(|&j| !o.get(k, j).is_zero()).collect()).collect();
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for &j in &onz[k] {
                    let p = a * o.get(k, j);
                    *out.get_mut(i, j) += p;
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        assert!(self.is_square());
        let mut r = Self::identity(self.rows);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        let mut m = Self::zeros(nr, nc);
        for i in 0..nr {
            for j in 0..nc {
                m.set(i, j, self.get(r0 + i, c0 + j).clone());
            }
        }
        m
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j).clone());
            }
        }
    }

    pub fn add_block(&mut self, r0: usize, c0: usize, b: &Self, c: &Q) {
        if c.is_zero() {
            return;
        }
        for ((i, j), v) in b.nonzeros() {
            *self.get_mut(r0 + i, c0 + j) += v * c;
        }
    }

    pub fn direct_sum(blocks: &[Self]) -> Self {
        let r = blocks.iter().map(|b| b.rows).sum();
        let c = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(r, c);
        let (mut i, mut j) = (0, 0);
        for b in blocks {
            m.set_block(i, j, b);
            i += b.rows;
            j += b.cols;
        }
        m
    }

    pub fn hstack(blocks: &[Self]) -> Self {
        let r = blocks.first().map_or(0, |b| b.rows);
        let c = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(r, c);
        let mut j = 0;
        for b in blocks {
            assert_eq!(b.rows, r);
            m.set_block(0, j, b);
            j += b.cols;
        }
        m
    }

    pub fn column(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_columns(rows: usize, cols: &[Vec<Q>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, v) in c.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut s = Q::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        s += a * b;
                    }
                }
                s
            })
            .collect()
    }

    /// Reduced row echelon form with the recorded row transform.
    pub fn rref(&self) -> Rref {
        let mut r = self.clone();
        let mut t = Self::identity(self.rows);
        let pivots = rref_in_place(&mut r, Some(&mut t));
        Rref { reduced: r, pivots, transform: t }
    }

    pub fn rank(&self) -> usize {
        let mut r = self.clone();
        rref_in_place(&mut r, None).len()
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let rr = self.rref();
        if rr.pivots.len() == self.rows {
            Some(rr.transform)
        } else {
            None
        }
    }

    /// Basis of the right kernel, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        let mut r = self.clone();
        let pivots = rref_in_place(&mut r, None);
        let mut out = Vec::new();
        for free in 0..self.cols {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = vec![Q::zero(); self.cols];
            v[free] = Q::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r.get(row, free).clone();
            }
            out.push(v);
        }
        out
    }

    /// The ⪯-least nonzero position with its value.
    pub fn leading_entry(&self) -> Option<((usize, usize), Q)> {
        for i in (0..self.rows).rev() {
            for j in 0..self.cols {
                let v = self.get(i, j);
                if !v.is_zero() {
                    return Some(((i, j), v.clone()));
                }
            }
        }
        None
    }

    pub fn trace(&self) -> Q {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).fold(Q::zero(), |a, b| a + b)
    }
}

/// Gauss–Jordan elimination; returns the pivot columns.
pub(crate) fn rref_in_place(m: &mut RatMatrix, mut t: Option<&mut RatMatrix>) -> Vec<usize> {
    let (rows, cols) = m.shape();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
        if p != r {
            swap_rows(m, p, r);
            if let Some(t) = t.as_deref_mut() {
                swap_rows(t, p, r);
            }
        }
        let inv = m.get(r, c).recip();
        scale_row(m, r, &inv);
        if let Some(t) = t.as_deref_mut() {
            scale_row(t, r, &inv);
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = m.get(i, c).clone();
            if f.is_zero() {
                continue;
            }
            axpy_row(m, i, r, &f);
            if let Some(t) = t.as_deref_mut() {
                axpy_row(t, i, r, &f);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn swap_rows(m: &mut RatMatrix, a: usize, b: usize) {
    for j in 0..m.cols {
        m.data.swap(a * m.cols + j, b * m.cols + j);
    }
}

fn scale_row(m: &mut RatMatrix, r: usize, c: &Q) {
    for j in 0..m.cols {
        let v = m.get_mut(r, j);
        if !v.is_zero() {
            *v *= c;
        }
    }
}

/// row[i] -= f * row[r]
fn axpy_row(m: &mut RatMatrix, i: usize, r: usize, f: &Q) {
    for j in 0..m.cols {
        let s = m.get(r, j).clone();
        if !s.is_zero() {
            *m.get_mut(i, j) -= f * s;
        }
    }
}

pub type NormalizedBasis = Vec<(RatMatrix, (usize, usize))>;

/// The unique normalized basis of the span: unit leading entries, each
/// basis matrix vanishing at the other leading positions, ordered by ⪯.
pub fn normalized_basis(span: &[RatMatrix]) -> NormalizedBasis {
    let Some(first) = span.first() else { return Vec::new() };
    let (r, c) = first.shape();
    let mut positions: Vec<(usize, usize)> = (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).collect();
    positions.sort_by(|a, b| position_cmp(*a, *b));
    let mut coords = RatMatrix::zeros(span.len(), positions.len());
    for (k, m) in span.iter().enumerate() {
        assert_eq!(m.shape(), (r, c), "normalized_basis needs a common shape");
        for (col, &(i, j)) in positions.iter().enumerate() {
            coords.set(k, col, m.get(i, j).clone());
        }
    }
    let pivots = rref_in_place(&mut coords, None);
    pivots
        .iter()
        .enumerate()
        .map(|(row, &pc)| {
            let mut m = RatMatrix::zeros(r, c);
            for (col, &(i, j)) in positions.iter().enumerate() {
                m.set(i, j, coords.get(row, col).clone());
            }
            (m, positions[pc])
        })
        .collect()
}

/// Incrementally maintained echelon form of sparse rows; used for large
/// homogeneous systems where most equations are short.
#[derive(Clone, Debug, Default)]
pub struct SparseEchelon {
    rows: BTreeMap<usize, BTreeMap<usize, Q>>,
}

impl SparseEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored pivots (pivot = least variable).
    pub fn reduce(&self, mut v: BTreeMap<usize, Q>) -> BTreeMap<usize, Q> {
        v.retain(|_, c| !c.is_zero());
        let mut out = BTreeMap::new();
        while let Some((&k, _)) = v.iter().next() {
            let c = v.remove(&k).unwrap();
            match self.rows.get(&k) {
                Some(row) => {
                    for (j, a) in row.iter().skip(1) {
                        let e = v.entry(*j).or_insert_with(Q::zero);
                        *e -= &c * a;
                        if e.is_zero() {
                            v.remove(j);
                        }
                    }
                }
                None => {
                    out.insert(k, c);
                }
            }
        }
        out
    }

    /// Adds a row; returns false when it was dependent on earlier rows.
    pub fn insert(&mut self, v: BTreeMap<usize, Q>) -> bool {
        let r = self.reduce(v);
        let Some((&p, c)) = r.iter().next() else { return false };
        let inv = c.recip();
        let row: BTreeMap<usize, Q> = r.iter().map(|(k, x)| (*k, x * &inv)).collect();
        self.rows.insert(p, row);
        true
    }

    /// Basis of the solution space of the homogeneous system in `n` variables.
    pub fn nullspace(&self, n: usize) -> Vec<Vec<Q>> {
        // back-substitute to fully reduced form
        let mut full: BTreeMap<usize, BTreeMap<usize, Q>> = BTreeMap::new();
        for (&p, row) in self.rows.iter().rev() {
            let mut r: BTreeMap<usize, Q> = BTreeMap::new();
            for (j, a) in row.iter().skip(1) {
                if let Some(other) = full.get(j) {
                    for (k, b) in other {
                        let e = r.entry(*k).or_insert_with(Q::zero);
                        *e -= a * b;
                    }
                } else {
                    let e = r.entry(*j).or_insert_with(Q::zero);
                    *e += a;
                }
            }
            r.retain(|_, c| !c.is_zero());
            full.insert(p, r);
        }
        let mut out = Vec::new();
        for free in (0..n).filter(|j| !full.contains_key(j)) {
            let mut v = vec![Q::zero(); n];
            v[free] = Q::one();
            for (&p, r) in &full {
                if let Some(a) = r.get(&free) {
                    v[p] = -a.clone();
                }
            }
            out.push(v);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;

    #[test]
    fn leading_entries() {
        let m = RatMatrix::from_i64(&[&[0, 1], &[0, 0]]);
        assert_eq!(m.leading_entry(), Some(((0, 1), q(1))));
        assert_eq!(RatMatrix::zeros(2, 2).leading_entry(), None);
        let m = RatMatrix::from_i64(&[&[1, 0], &[1, 0]]);
        assert_eq!(m.leading_entry(), Some(((1, 0), q(1))));
    }

    #[test]
    fn normalized_full_space() {
        let span: Vec<RatMatrix> = (0..2).flat_map(|i| (0..2).map(move |j| RatMatrix::unit(2, 2, i, j))).collect();
        let b = normalized_basis(&span);
        let leads: Vec<_> = b.iter().map(|x| x.1).collect();
        assert_eq!(leads, [(1, 0), (1, 1), (0, 0), (0, 1)]);
        assert!(b.iter().all(|(m, (i, j))| *m == RatMatrix::unit(2, 2, *i, *j)));
    }

    #[test]
    fn normalized_small_span() {
        let span = [RatMatrix::from_i64(&[&[1, 1], &[0, 0]]), RatMatrix::from_i64(&[&[0, 1], &[0, 0]])];
        let b = normalized_basis(&span);
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].0, RatMatrix::unit(2, 2, 0, 0));
        assert_eq!(b[1].0, RatMatrix::unit(2, 2, 0, 1));
        assert!(normalized_basis(&[]).is_empty());
    }

    #[test]
    fn rref_examples() {
        let m = RatMatrix::from_i64(&[&[2, 4], &[1, 2]]);
        let r = m.rref();
        assert_eq!(r.reduced, RatMatrix::from_i64(&[&[1, 2], &[0, 0]]));
        assert_eq!(r.pivots, [0]);
        assert_eq!(r.transform.mul(&m), r.reduced);
        assert!(r.transform.inverse().is_some());
        let i = RatMatrix::identity(3);
        assert_eq!(i.rref().reduced, i);
        assert_eq!(i.rref().pivots, [0, 1, 2]);
        assert!(RatMatrix::zeros(2, 3).rref().pivots.is_empty());
    }

    #[test]
    fn sparse_echelon_nullspace() {
        let mut e = SparseEchelon::new();
        // x0 + x1 = 0, x1 - x2 = 0
        assert!(e.insert([(0, q(1)), (1, q(1))].into_iter().collect()));
        assert!(e.insert([(1, q(1)), (2, q(-1))].into_iter().collect()));
        assert!(!e.insert([(0, q(1)), (2, q(1))].into_iter().collect()));
        let ns = e.nullspace(3);
        assert_eq!(ns, [vec![q(-1), q(1), q(1)]]);
    }
}
