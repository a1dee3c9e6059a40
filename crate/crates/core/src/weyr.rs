//! Jordan data and Weyr canonical forms with similarity certificates.

use crate::exact::{RatMatrix, SparseEchelon, UniPoly, Q};
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_bigint::BigInt;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeyrError {
    NotSquare,
    /// Product of the characteristic-polynomial factors without rational roots.
    NonSplitSpectrum(UniPoly),
}

impl fmt::Display for WeyrError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeyrError::NotSquare => write!(f, "matrix is not square"),
            WeyrError::NonSplitSpectrum(p) => write!(f, "spectrum does not split over the rationals: {}", p.fmt_vars(&["x"])),
        }
    }
}

/// Per eigenvalue (ascending), `counts[j-1]` = number of Jordan blocks of size `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JordanData {
    pub eigen: Vec<(Q, Vec<usize>)>,
}

impl JordanData {
    pub fn new(mut eigen: Vec<(Q, Vec<usize>)>) -> Self {
        for (_, c) in &mut eigen {
            while c.last() == Some(&0) {
                c.pop();
            }
        }
        eigen.retain(|(_, c)| !c.is_empty());
        eigen.sort_by(|a, b| a.0.cmp(&b.0));
        JordanData { eigen }
    }

    /// One eigenvalue with the given block sizes.
    pub fn from_blocks(lambda: Q, sizes: &[usize]) -> Self {
        let d = sizes.iter().copied().max().unwrap_or(0);
        let mut c = vec![0; d];
        for &s in sizes {
            if s > 0 {
                c[s - 1] += 1;
            }
        }
        Self::new(vec![(lambda, c)])
    }

    pub fn size(&self) -> usize {
        self.eigen.iter().map(|(_, c)| c.iter().enumerate().map(|(j, e)| (j + 1) * e).sum::<usize>()).sum()
    }

    /// `m_j = e_d + … + e_j` for each eigenvalue.
    pub fn m_sequences(&self) -> Vec<(Q, Vec<usize>)> {
        self.eigen.iter().map(|(l, c)| (l.clone(), m_sequence(c))).collect()
    }

    pub fn jordan_matrix(&self) -> RatMatrix {
        let mut blocks = Vec::new();
        for (l, c) in &self.eigen {
            for (j, &e) in c.iter().enumerate().rev() {
                for _ in 0..e {
                    let n = j + 1;
                    let mut b = RatMatrix::scalar(n, l);
                    for i in 0..n - 1 {
                        b.set(i, i + 1, Q::one());
                    }
                    blocks.push(b);
                }
            }
        }
        RatMatrix::direct_sum(&blocks)
    }
}

pub fn m_sequence(counts: &[usize]) -> Vec<usize> {
    let d = counts.len();
    (0..d).map(|j| counts[j..].iter().sum()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeyrForm {
    /// Eigenvalue with its weakly decreasing `m_1 ≥ m_2 ≥ …`.
    pub eigen: Vec<(Q, Vec<usize>)>,
    pub matrix: RatMatrix,
}

impl WeyrForm {
    pub fn eigenvalues(&self) -> Vec<Q> {
        self.eigen.iter().map(|e| e.0.clone()).collect()
    }

    /// Number of `1` entries in the superdiagonal identity blocks.
    pub fn link_count(&self) -> usize {
        self.eigen.iter().map(|(_, m)| m.iter().skip(1).sum::<usize>()).sum()
    }
}

/// The Weyr block of one eigenvalue: `λ I_{m_j}` on the diagonal and
/// `(I_{m_{j+1}}; 0)` in block position `(j, j+1)`.
pub fn weyr_block(lambda: &Q, m: &[usize]) -> RatMatrix {
    let n: usize = m.iter().sum();
    let mut w = RatMatrix::scalar(n, lambda);
    let mut off = 0;
    for j in 0..m.len().saturating_sub(1) {
        let next = off + m[j];
        for k in 0..m[j + 1] {
            w.set(off + k, next + k, Q::one());
        }
        off = next;
    }
    w
}

pub fn weyr_matrix(j: &JordanData) -> WeyrForm {
    let eigen = j.m_sequences();
    let blocks: Vec<RatMatrix> = eigen.iter().map(|(l, m)| weyr_block(l, m)).collect();
    WeyrForm { eigen, matrix: RatMatrix::direct_sum(&blocks) }
}

/// Characteristic polynomial `det(xI - A)` by Faddeev–LeVerrier.
pub fn char_poly(a: &RatMatrix) -> UniPoly {
    let n = a.rows();
    let mut c = vec![Q::zero(); n + 1];
    c[n] = Q::one();
    let mut m = RatMatrix::zeros(n, n);
    for k in 1..=n {
        m = a.mul(&m).add(&RatMatrix::scalar(n, &c[n + 1 - k]));
        let t = a.mul(&m).trace();
        c[n - k] = -t / Q::from_integer(BigInt::from(k));
    }
    UniPoly::from_coeffs(&c)
}

pub fn jordan_data(a: &RatMatrix) -> Result<JordanData, WeyrError> {
    if !a.is_square() {
        return Err(WeyrError::NotSquare);
    }
    let n = a.rows();
    let p = char_poly(a);
    let mut rest = p.clone();
    let mut mult = Vec::new();
    for l in p.rational_roots() {
        let f = UniPoly::x_minus(&l);
        let mut k = 0;
        loop {
            let (qt, r) = rest.div_rem(&f);
            if !r.is_zero() {
                break;
            }
            rest = qt;
            k += 1;
        }
        mult.push((l, k));
    }
    if rest.degree().unwrap_or(0) > 0 {
        return Err(WeyrError::NonSplitSpectrum(rest.monic()));
    }
    let mut eigen = Vec::new();
    for (l, alg) in mult {
        let nm = a.sub(&RatMatrix::scalar(n, &l));
        // nullities of powers until they reach the algebraic multiplicity
        let mut null = vec![0usize];
        let mut pw = RatMatrix::identity(n);
        while *null.last().unwrap() < alg {
            pw = pw.mul(&nm);
            null.push(n - pw.rank());
        }
        let d = null.len() - 1;
        let ge: Vec<usize> = (1..=d).map(|j| null[j] - null[j - 1]).collect();
        let counts: Vec<usize> = (0..d).map(|j| ge[j] - ge.get(j + 1).copied().unwrap_or(0)).collect();
        eigen.push((l, counts));
    }
    Ok(JordanData::new(eigen))
}

/// `(W, S)` with `S⁻¹ A S = W`.
pub fn weyr_canonical(a: &RatMatrix) -> Result<(WeyrForm, RatMatrix), WeyrError> {
    let jd = jordan_data(a)?;
    let n = a.rows();
    let mut cols: Vec<Vec<Q>> = Vec::new();
    for (l, counts) in &jd.eigen {
        let nm = a.sub(&RatMatrix::scalar(n, l));
        let d = counts.len();
        let mut powers = vec![RatMatrix::identity(n)];
        for _ in 0..d {
            let p = powers.last().unwrap().mul(&nm);
            powers.push(p);
        }
        let kernels: Vec<Vec<Vec<Q>>> = powers.iter().map(|p| p.kernel()).collect();
        // chains[k] = vectors from the eigenvector (level 1) to the top
        let mut chains: Vec<Vec<Vec<Q>>> = Vec::new();
        for j in (1..=d).rev() {
            let mut span = SparseEchelon::new();
            for v in &kernels[j - 1] {
                span.insert(to_sparse(v));
            }
            for ch in &chains {
                span.insert(to_sparse(&ch[j - 1]));
            }
            let mut tops = Vec::new();
            for w in &kernels[j] {
                if span.insert(to_sparse(w)) {
                    tops.push(w.clone());
                }
            }
            debug_assert_eq!(tops.len(), counts[j - 1]);
            for top in tops {
                let mut ch = vec![top];
                for _ in 1..j {
                    let next = nm.mul_vec(ch.last().unwrap());
                    ch.push(next);
                }
                ch.reverse();
                chains.push(ch);
            }
        }
        for level in 0..d {
            for ch in chains.iter().filter(|c| c.len() > level) {
                cols.push(ch[level].clone());
            }
        }
    }
    let s = RatMatrix::from_columns(n, &cols);
    Ok((weyr_matrix(&jd), s))
}

fn to_sparse(v: &[Q]) -> BTreeMap<usize, Q> {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
}

/// True iff no eigenvalue is a root of a forbidden polynomial.
pub fn is_regular(w: &WeyrForm, forbidden: &[UniPoly]) -> bool {
    w.eigen.iter().all(|(l, _)| forbidden.iter().all(|f| !f.eval(l).is_zero()))
}

/// Whether `w` is already a Weyr matrix (its own canonical form).
pub fn is_weyr_matrix(w: &RatMatrix) -> bool {
    match weyr_canonical(w) {
        Ok((f, _)) => f.matrix == *w,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;

    #[test]
    fn jordan_examples() {
        let j = jordan_data(&RatMatrix::from_i64(&[&[0, 1], &[0, 0]])).unwrap();
        assert_eq!(j.eigen, [(q(0), vec![0, 1])]);
        let j = jordan_data(&RatMatrix::scalar(2, &q(2))).unwrap();
        assert_eq!(j.eigen, [(q(2), vec![2])]);
        let e = jordan_data(&RatMatrix::from_i64(&[&[0, 1], &[-1, 0]])).unwrap_err();
        assert_eq!(e, WeyrError::NonSplitSpectrum(UniPoly::from_coeffs(&[q(1), q(0), q(1)])));
    }

    #[test]
    fn weyr_template() {
        let jd = JordanData::from_blocks(q(0), &[2, 1]);
        let w = weyr_matrix(&jd);
        assert_eq!(w.eigen, [(q(0), vec![2, 1])]);
        assert_eq!(w.matrix, RatMatrix::from_i64(&[&[0, 0, 1], &[0, 0, 0], &[0, 0, 0]]));
        assert_eq!(w.link_count(), 1);
        let single = weyr_matrix(&JordanData::from_blocks(q(3), &[3]));
        assert_eq!(single.matrix, JordanData::from_blocks(q(3), &[3]).jordan_matrix());
        assert_eq!(weyr_matrix(&JordanData::from_blocks(q(4), &[1, 1])).matrix, RatMatrix::scalar(2, &q(4)));
    }

    #[test]
    fn canonical_examples() {
        let a = RatMatrix::from_i64(&[&[1, 1], &[0, 1]]);
        let (w, s) = weyr_canonical(&a).unwrap();
        assert_eq!(w.matrix, a);
        assert_eq!(s.inverse().unwrap().mul(&a).mul(&s), w.matrix);
        let d = RatMatrix::from_i64(&[&[3, 0], &[0, 2]]);
        let (w, s) = weyr_canonical(&d).unwrap();
        assert_eq!(w.matrix, RatMatrix::from_i64(&[&[2, 0], &[0, 3]]));
        assert_eq!(s.inverse().unwrap().mul(&d).mul(&s), w.matrix);
        let s0 = RatMatrix::from_i64(&[&[1, 2, 0], &[0, 1, 3], &[1, 0, 1]]);
        let j = JordanData::from_blocks(q(0), &[2, 1]).jordan_matrix();
        let a = s0.mul(&j).mul(&s0.inverse().unwrap());
        let (w, s) = weyr_canonical(&a).unwrap();
        assert_eq!(w.matrix, RatMatrix::from_i64(&[&[0, 0, 1], &[0, 0, 0], &[0, 0, 0]]));
        assert_eq!(s.inverse().unwrap().mul(&a).mul(&s), w.matrix);
    }

    #[test]
    fn regularity() {
        let w = weyr_matrix(&JordanData::from_blocks(q(2), &[1]));
        assert!(is_regular(&w, &[UniPoly::var(0)]));
        let w0 = weyr_matrix(&JordanData::from_blocks(q(0), &[1]));
        assert!(!is_regular(&w0, &[UniPoly::var(0)]));
        let w13 = weyr_matrix(&JordanData::new(vec![(q(1), vec![1]), (q(3), vec![1])]));
        assert!(!is_regular(&w13, &[UniPoly::x_minus(&q(1))]));
    }
}
