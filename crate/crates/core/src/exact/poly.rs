use super::{fmt_q, RatMatrix, Q};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Sparse polynomial in `N` commuting variables over the rationals.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Poly<const N: usize> {
    terms: BTreeMap<[u32; N], Q>,
}

pub type UniPoly = Poly<1>;
/// Element of `R_X ⊗ R_Y`: variable 0 acts on the left, variable 1 on the right.
pub type BiPoly = Poly<2>;
/// Coefficients of bilinear terms: left, middle and right variables.
pub type TriPoly = Poly<3>;

impl<const N: usize> Poly<N> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial([0; N], c)
    }

    pub fn monomial(e: [u32; N], c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Poly { terms }
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0; N];
        e[i] = 1;
        Self::monomial(e, Q::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&d| d == 0))
    }

    /// The value when the polynomial is constant.
    pub fn as_constant(&self) -> Option<Q> {
        if self.is_constant() {
            Some(self.coeff(&[0; N]))
        } else {
            None
        }
    }

    pub fn coeff(&self, e: &[u32; N]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&[u32; N], &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, e: [u32; N], c: &Q) {
        if c.is_zero() {
            return;
        }
        let v = self.terms.entry(e).or_insert_with(Q::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, c);
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, &-c);
        }
        r
    }

    pub fn neg(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly { terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let mut e = *e1;
                for k in 0..N {
                    e[k] += e2[k];
                }
                r.add_term(e, &(c1 * c2));
            }
        }
        r
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::one();
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[i]).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e[i] > 0)
    }

    /// Re-index variables: variable `i` becomes variable `map[i]` of the result.
    pub fn embed<const M: usize>(&self, map: [usize; N]) -> Poly<M> {
        let mut r = Poly::<M>::zero();
        for (e, c) in &self.terms {
            let mut f = [0u32; M];
            for i in 0..N {
                f[map[i]] += e[i];
            }
            r.add_term(f, c);
        }
        r
    }

    pub fn eval_all(&self, vals: &[Q; N]) -> Q {
        let mut s = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for k in 0..N {
                for _ in 0..e[k] {
                    t *= &vals[k];
                }
            }
            s += t;
        }
        s
    }

    /// Substitute a constant for variable `i`.
    pub fn subst_const(&self, i: usize, v: &Q) -> Self {
        let mut r = Self::zero();
        for (e, c) in &self.terms {
            let mut f = *e;
            let mut t = c.clone();
            for _ in 0..e[i] {
                t *= v;
            }
            f[i] = 0;
            r.add_term(f, &t);
        }
        r
    }

    /// Exact division by a univariate polynomial in variable `i`.
    pub fn div_uni(&self, i: usize, g: &UniPoly) -> Option<Self> {
        let dg = g.degree()?;
        let lg = g.lead();
        let mut rem = self.clone();
        let mut quo = Self::zero();
        loop {
            let Some(d) = rem.degree_in(i) else { return Some(quo) };
            if (d as usize) < dg {
                return None;
            }
            let top: Vec<([u32; N], Q)> = rem.terms.iter().filter(|(e, _)| e[i] == d).map(|(e, c)| (*e, c / &lg)).collect();
            for (mut e, c) in top {
                e[i] = d - dg as u32;
                quo.add_term(e, &c);
                for (ge, gc) in &g.terms {
                    let mut f = e;
                    f[i] += ge[0];
                    rem.add_term(f, &-(&c * gc));
                }
            }
        }
    }

    /// Scale so the greatest term has coefficient one.
    pub fn normalize_lead(&self) -> Self {
        match self.terms.iter().next_back() {
            Some((_, c)) => self.scale(&c.recip()),
            None => Self::zero(),
        }
    }

    pub fn fmt_vars(&self, names: &[&str; N]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let is_const = e.iter().all(|&d| d == 0);
            if !a.is_one() || is_const {
                if a.denom().is_one() || is_const {
                    s.push_str(&fmt_q(&a));
                } else {
                    let _ = write!(s, "({})", fmt_q(&a));
                }
            }
            for v in 0..N {
                if e[v] > 0 {
                    s.push_str(names[v]);
                    if e[v] > 1 {
                        s.push_str(&superscript(e[v] as usize));
                    }
                }
            }
        }
        s
    }
}

pub fn superscript(n: usize) -> String {
    const D: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    alloc::format!("{n}").chars().map(|c| D[c.to_digit(10).unwrap() as usize]).collect()
}

pub fn subscript(n: usize) -> String {
    const D: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    alloc::format!("{n}").chars().map(|c| D[c.to_digit(10).unwrap() as usize]).collect()
}

impl UniPoly {
    /// Coefficients from low to high degree.
    pub fn from_coeffs(cs: &[Q]) -> Self {
        let mut p = Self::zero();
        for (i, c) in cs.iter().enumerate() {
            p.add_term([i as u32], c);
        }
        p
    }

    pub fn coeffs(&self) -> Vec<Q> {
        let Some(d) = self.degree() else { return Vec::new() };
        (0..=d).map(|i| self.coeff(&[i as u32])).collect()
    }

    /// `x - c`
    pub fn x_minus(c: &Q) -> Self {
        Self::from_coeffs(&[-c.clone(), Q::one()])
    }

    pub fn degree(&self) -> Option<usize> {
        self.degree_in(0).map(|d| d as usize)
    }

    pub fn lead(&self) -> Q {
        self.terms.iter().next_back().map(|(_, c)| c.clone()).unwrap_or_else(Q::zero)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        self.scale(&self.lead().recip())
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by zero polynomial");
        let ld = d.lead();
        let mut r = self.clone();
        let mut quo = Self::zero();
        while let Some(dr) = r.degree() {
            if dr < dd {
                break;
            }
            let c = r.lead() / &ld;
            let t = Self::monomial([(dr - dd) as u32], c);
            r = r.sub(&t.mul(d));
            quo = quo.add(&t);
        }
        (quo, r)
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        let mut r = Self::zero();
        for (e, c) in &self.terms {
            if e[0] > 0 {
                r.add_term([e[0] - 1], &(c * Q::from_integer(BigInt::from(e[0]))));
            }
        }
        r
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.eval_all(&[x.clone()])
    }

    pub fn eval_matrix(&self, m: &RatMatrix) -> RatMatrix {
        let n = m.rows();
        let mut acc = RatMatrix::zeros(n, n);
        // Horner from the top degree
        for c in self.coeffs().iter().rev() {
            acc = acc.mul(m).add(&RatMatrix::scalar(n, c));
        }
        acc
    }

    /// Distinct rational roots in ascending order.
    pub fn rational_roots(&self) -> Vec<Q> {
        if self.is_zero() {
            return Vec::new();
        }
        let sf = {
            let g = self.gcd(&self.derivative());
            if g.degree().unwrap_or(0) > 0 {
                self.div_rem(&g).0
            } else {
                self.clone()
            }
        };
        let mut roots = Vec::new();
        let mut p = sf.clone();
        // zero root
        while p.coeff(&[0]).is_zero() && p.degree().unwrap_or(0) > 0 {
            roots.push(Q::zero());
            p = p.div_rem(&Self::x_minus(&Q::zero())).0;
        }
        // clear denominators
        let den = p.coeffs().iter().fold(BigInt::one(), |a, c| a.lcm(c.denom()));
        let ints: Vec<BigInt> = p.coeffs().iter().map(|c| (c * Q::from_integer(den.clone())).to_integer()).collect();
        if ints.len() > 1 {
            let a0 = ints[0].abs();
            let an = ints[ints.len() - 1].abs();
            let (dn, dd) = (divisors(&a0), divisors(&an));
            for num in &dn {
                for de in &dd {
                    for sgn in [1i32, -1] {
                        let cand = Q::new(num * BigInt::from(sgn), de.clone());
                        if !roots.contains(&cand) && p.eval(&cand).is_zero() {
                            roots.push(cand);
                        }
                    }
                }
            }
        }
        roots.sort();
        roots
    }
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    if n.is_zero() {
        return out;
    }
    // desk-scale inputs: trial division
    if let Some(v) = n.to_u64() {
        let mut i = 1u64;
        while i * i <= v {
            if v % i == 0 {
                out.push(BigInt::from(i));
                if i * i != v {
                    out.push(BigInt::from(v / i));
                }
            }
            i += 1;
        }
    } else {
        let mut i = BigInt::one();
        while &i * &i <= *n {
            if (n % &i).is_zero() {
                out.push(i.clone());
                out.push(n / &i);
            }
            i += 1;
        }
    }
    out.sort();
    out.dedup();
    out
}

impl BiPoly {
    /// `f(v, y)` as a polynomial in the right variable.
    pub fn eval_left(&self, v: &Q) -> UniPoly {
        self.subst_const(0, v).embed([0, 0])
    }

    /// `f(x, v)` as a polynomial in the left variable.
    pub fn eval_right(&self, v: &Q) -> UniPoly {
        self.subst_const(1, v).embed([0, 0])
    }

    /// `Σ α_ij L^i V R^j` for `f = Σ α_ij x^i y^j`.
    pub fn apply(&self, left: &RatMatrix, v: &RatMatrix, right: &RatMatrix) -> RatMatrix {
        assert!(left.is_square() && right.is_square(), "substitution needs square matrices");
        assert_eq!((left.rows(), right.rows()), v.shape(), "dimension mismatch");
        let mut out = RatMatrix::zeros(v.rows(), v.cols());
        let mut lp: Vec<RatMatrix> = vec![RatMatrix::identity(left.rows())];
        let mut rp: Vec<RatMatrix> = vec![RatMatrix::identity(right.rows())];
        for (e, c) in &self.terms {
            while lp.len() <= e[0] as usize {
                let n = lp.last().unwrap().mul(left);
                lp.push(n);
            }
            while rp.len() <= e[1] as usize {
                let n = rp.last().unwrap().mul(right);
                rp.push(n);
            }
            let t = lp[e[0] as usize].mul(v).mul(&rp[e[1] as usize]);
            out.add_assign_scaled(&t, c);
        }
        out
    }

    fn x_coeffs(&self) -> Vec<UniPoly> {
        let d = self.degree_in(0).unwrap_or(0) as usize;
        let mut v = vec![UniPoly::zero(); d + 1];
        for (e, c) in &self.terms {
            v[e[0] as usize].add_term([e[1]], c);
        }
        v
    }

    fn from_x_coeffs(cs: &[UniPoly]) -> Self {
        let mut r = Self::zero();
        for (i, p) in cs.iter().enumerate() {
            for (e, c) in p.terms() {
                r.add_term([i as u32, e[0]], c);
            }
        }
        r
    }
}

fn content(cs: &[UniPoly]) -> UniPoly {
    cs.iter().fold(UniPoly::zero(), |g, c| g.gcd(c))
}

fn prim(cs: &[UniPoly]) -> Vec<UniPoly> {
    let c = content(cs);
    if c.is_zero() {
        return cs.to_vec();
    }
    cs.iter().map(|p| p.div_rem(&c).0).collect()
}

fn trim(mut v: Vec<UniPoly>) -> Vec<UniPoly> {
    while v.len() > 1 && v.last().unwrap().is_zero() {
        v.pop();
    }
    v
}

fn xdeg(v: &[UniPoly]) -> Option<usize> {
    (0..v.len()).rev().find(|&i| !v[i].is_zero())
}

/// Pseudo-remainder in the left variable over `Q[y]`.
fn prem(a: &[UniPoly], b: &[UniPoly]) -> Vec<UniPoly> {
    let db = xdeg(b).unwrap();
    let lb = b[db].clone();
    let mut r = a.to_vec();
    while let Some(dr) = xdeg(&r) {
        if dr < db {
            break;
        }
        let lr = r[dr].clone();
        let shift = dr - db;
        let mut next: Vec<UniPoly> = r.iter().map(|c| c.mul(&lb)).collect();
        for (i, c) in b.iter().enumerate() {
            next[i + shift] = next[i + shift].sub(&c.mul(&lr));
        }
        r = trim(next);
    }
    r
}

/// Greatest common divisor in `Q[x, y]`, scaled so its greatest term is monic.
pub fn bipoly_gcd(f: &BiPoly, g: &BiPoly) -> BiPoly {
    if f.is_zero() {
        return g.normalize_lead();
    }
    if g.is_zero() {
        return f.normalize_lead();
    }
    let (fc, gc) = (f.x_coeffs(), g.x_coeffs());
    let c = content(&fc).gcd(&content(&gc));
    let (mut a, mut b) = (prim(&fc), prim(&gc));
    if xdeg(&a) < xdeg(&b) {
        core::mem::swap(&mut a, &mut b);
    }
    while xdeg(&b).is_some_and(|d| d > 0) {
        let r = prem(&a, &b);
        a = b;
        b = if xdeg(&r).is_none() { vec![UniPoly::zero()] } else { prim(&r) };
        if xdeg(&b).is_none() {
            break;
        }
    }
    let core_part = if xdeg(&b) == Some(0) { vec![UniPoly::one()] } else { prim(&a) };
    let c2: Vec<UniPoly> = core_part.iter().map(|p| p.mul(&c)).collect();
    BiPoly::from_x_coeffs(&c2).normalize_lead()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qf};

    fn xy(i: u32, j: u32, c: i64) -> BiPoly {
        BiPoly::monomial([i, j], q(c))
    }

    #[test]
    fn bipoly_evaluation() {
        let f = xy(1, 0, 1).add(&xy(0, 1, -1));
        assert!(f.eval_all(&[q(3), q(3)]).is_zero());
        assert_eq!(xy(1, 1, 1).eval_all(&[q(2), q(3)]), q(6));
        assert_eq!(f.eval_left(&q(2)), UniPoly::from_coeffs(&[q(2), q(-1)]));
        let lam = q(5);
        let j2 = RatMatrix::from_rows(vec![vec![lam.clone(), q(1)], vec![q(0), lam.clone()]]);
        let right = RatMatrix::scalar(2, &lam);
        let v = RatMatrix::from_i64(&[&[1, 2], &[3, 4]]);
        let nil = RatMatrix::from_i64(&[&[0, 1], &[0, 0]]);
        assert_eq!(f.apply(&j2, &v, &right), nil.mul(&v));
    }

    #[test]
    fn univariate() {
        // (x-1)^2 (x+2) (x^2+1)
        let p = UniPoly::x_minus(&q(1))
            .pow(2)
            .mul(&UniPoly::x_minus(&q(-2)))
            .mul(&UniPoly::from_coeffs(&[q(1), q(0), q(1)]));
        assert_eq!(p.rational_roots(), [q(-2), q(1)]);
        let p2 = UniPoly::x_minus(&qf(1, 2)).mul(&UniPoly::x_minus(&q(0)));
        assert_eq!(p2.rational_roots(), [q(0), qf(1, 2)]);
        let m = RatMatrix::from_i64(&[&[0, 1], &[0, 0]]);
        assert!(UniPoly::var(0).pow(2).eval_matrix(&m).is_zero());
        assert_eq!(p.fmt_vars(&["x"]).chars().next(), Some('x'));
        assert_eq!(UniPoly::x_minus(&q(1)).fmt_vars(&["x"]), "x - 1");
    }

    #[test]
    fn bivariate_gcd() {
        let f = xy(1, 0, 1).add(&xy(0, 1, -1)); // x - y
        let g = xy(1, 0, 1).add(&xy(0, 0, 1)); // x + 1
        let h = xy(0, 1, 1).add(&xy(0, 0, 2)); // y + 2
        let a = f.mul(&g).mul(&h);
        let b = f.mul(&h).mul(&xy(2, 0, 1).add(&xy(0, 0, 3)));
        assert_eq!(bipoly_gcd(&a, &b), f.mul(&h).normalize_lead());
        assert_eq!(bipoly_gcd(&g, &h), BiPoly::one());
        assert_eq!(bipoly_gcd(&f.scale(&q(3)), &BiPoly::zero()), f);
        assert_eq!(f.fmt_vars(&["x", "x̄"]), "x - x̄");
    }

    #[test]
    fn exact_division() {
        let f = xy(1, 1, 1).add(&xy(0, 1, -1)); // (x-1) y
        assert_eq!(f.div_uni(0, &UniPoly::x_minus(&q(1))), Some(xy(0, 1, 1)));
        assert_eq!(f.div_uni(1, &UniPoly::x_minus(&q(1))), None);
    }
}
