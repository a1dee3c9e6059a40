//! Exact rationals, dense matrices, sparse polynomials and localized fractions.

mod frac;
mod matrix;
mod poly;

pub use frac::{Frac, LocalizedElem, TriFrac};
pub use matrix::{normalized_basis, NormalizedBasis, RatMatrix, Rref, SparseEchelon};
pub use poly::{subscript, superscript};
pub use poly::{bipoly_gcd, BiPoly, Poly, TriPoly, UniPoly};

use alloc::string::{String, ToString};
use core::cmp::Ordering;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// The base field.
pub type Q = num_rational::BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        let mut s = x.numer().to_string();
        s.push('/');
        s.push_str(&x.denom().to_string());
        s
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

pub fn is_negative(x: &Q) -> bool {
    x.is_negative()
}

/// Position order on matrix entries: `(i,j) ⪯ (i',j')` iff `i > i'`, or
/// `i == i'` and `j <= j'`. Positions are 0-based.
pub fn position_cmp(a: (usize, usize), b: (usize, usize)) -> Ordering {
    b.0.cmp(&a.0).then(a.1.cmp(&b.1))
}

pub fn position_leq(a: (usize, usize), b: (usize, usize)) -> bool {
    position_cmp(a, b) != Ordering::Greater
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn grid_order() {
        let mut v: Vec<(usize, usize)> = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                v.push((i, j));
            }
        }
        v.sort_by(|a, b| position_cmp(*a, *b));
        assert_eq!(v, [(1, 0), (1, 1), (0, 0), (0, 1)]);
        assert!(position_leq((1, 0), (0, 0)));
        assert!(position_leq((0, 0), (0, 1)));
        assert!(!position_leq((0, 1), (0, 0)));
    }

    #[test]
    fn rational_strings() {
        assert_eq!(fmt_q(&qf(6, 4)), "3/2");
        assert_eq!(fmt_q(&q(-7)), "-7");
        assert_eq!(parse_q("-3/6"), Some(qf(-1, 2)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(parse_q("x"), None);
    }
}
