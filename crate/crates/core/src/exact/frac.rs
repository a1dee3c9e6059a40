use super::{Poly, RatMatrix, UniPoly, Q};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Zero;

/// Polynomial numerator over a product of univariate denominator factors,
/// one factor list per variable. Factors are monic irreducibles taken from
/// the forbidden lists of the owning rings.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Frac<const N: usize> {
    num: Poly<N>,
    den: [BTreeMap<UniPoly, u32>; N],
}

/// Element of a localized `R_X ⊗ R_Y`.
pub type LocalizedElem = Frac<2>;
pub type TriFrac = Frac<3>;

impl<const N: usize> From<Poly<N>> for Frac<N> {
    fn from(p: Poly<N>) -> Self {
        Frac { num: p, den: core::array::from_fn(|_| BTreeMap::new()) }
    }
}

impl<const N: usize> Frac<N> {
    pub fn zero() -> Self {
        Poly::zero().into()
    }

    pub fn one() -> Self {
        Poly::one().into()
    }

    pub fn constant(c: Q) -> Self {
        Poly::constant(c).into()
    }

    pub fn num(&self) -> &Poly<N> {
        &self.num
    }

    pub fn den(&self, slot: usize) -> &BTreeMap<UniPoly, u32> {
        &self.den[slot]
    }

    pub fn has_den(&self) -> bool {
        self.den.iter().any(|d| !d.is_empty())
    }

    pub fn as_poly(&self) -> Option<&Poly<N>> {
        if self.has_den() {
            None
        } else {
            Some(&self.num)
        }
    }

    pub fn as_constant(&self) -> Option<Q> {
        self.as_poly().and_then(|p| p.as_constant())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.num.uses_var(i) || !self.den[i].is_empty()
    }

    fn normalize(mut self) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        for slot in 0..N {
            let facs: Vec<UniPoly> = self.den[slot].keys().cloned().collect();
            for f in facs {
                loop {
                    let e = self.den[slot][&f];
                    if e == 0 {
                        break;
                    }
                    match self.num.div_uni(slot, &f) {
                        Some(q) => {
                            self.num = q;
                            *self.den[slot].get_mut(&f).unwrap() -= 1;
                        }
                        None => break,
                    }
                }
            }
            self.den[slot].retain(|_, e| *e > 0);
        }
        self
    }

    fn lift(f: &UniPoly, slot: usize) -> Poly<N> {
        let mut map = [0usize; 1];
        map[0] = slot;
        f.embed::<N>(map)
    }

    pub fn with_den(mut self, slot: usize, f: &UniPoly, e: u32) -> Self {
        *self.den[slot].entry(f.monic()).or_insert(0) += e;
        self.normalize()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut den: [BTreeMap<UniPoly, u32>; N] = core::array::from_fn(|_| BTreeMap::new());
        let mut a = self.num.clone();
        let mut b = o.num.clone();
        for slot in 0..N {
            let keys: alloc::collections::BTreeSet<&UniPoly> = self.den[slot].keys().chain(o.den[slot].keys()).collect();
            for f in keys {
                let ea = self.den[slot].get(f).copied().unwrap_or(0);
                let eb = o.den[slot].get(f).copied().unwrap_or(0);
                let e = ea.max(eb);
                let lf = Self::lift(f, slot);
                a = a.mul(&lf.pow(e - ea));
                b = b.mul(&lf.pow(e - eb));
                den[slot].insert(f.clone(), e);
            }
        }
        Frac { num: a.add(&b), den }.normalize()
    }

    pub fn neg(&self) -> Self {
        Frac { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Q) -> Self {
        Frac { num: self.num.scale(c), den: self.den.clone() }.normalize()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut den = self.den.clone();
        for slot in 0..N {
            for (f, e) in &o.den[slot] {
                *den[slot].entry(f.clone()).or_insert(0) += e;
            }
        }
        Frac { num: self.num.mul(&o.num), den }.normalize()
    }

    pub fn mul_poly(&self, p: &Poly<N>) -> Self {
        Frac { num: self.num.mul(p), den: self.den.clone() }.normalize()
    }

    pub fn embed<const M: usize>(&self, map: [usize; N]) -> Frac<M> {
        let mut den: [BTreeMap<UniPoly, u32>; M] = core::array::from_fn(|_| BTreeMap::new());
        for i in 0..N {
            for (f, e) in &self.den[i] {
                *den[map[i]].entry(f.clone()).or_insert(0) += e;
            }
        }
        Frac { num: self.num.embed(map), den }.normalize()
    }

    /// Divides out forbidden factors; returns the residual numerator and
    /// the factor powers removed, per slot.
    pub fn strip_units(&self, forbidden: &[&[UniPoly]; N]) -> (Poly<N>, [BTreeMap<UniPoly, u32>; N]) {
        let mut num = self.num.clone();
        let mut removed: [BTreeMap<UniPoly, u32>; N] = core::array::from_fn(|_| BTreeMap::new());
        for slot in 0..N {
            for f in forbidden[slot] {
                let f = f.monic();
                while let Some(q) = num.div_uni(slot, &f) {
                    if q.is_zero() {
                        break;
                    }
                    num = q;
                    *removed[slot].entry(f.clone()).or_insert(0) += 1;
                }
            }
        }
        (num, removed)
    }

    /// Invertible in the localized ring iff the numerator is a nonzero
    /// constant times forbidden factors.
    pub fn is_invertible(&self, forbidden: &[&[UniPoly]; N]) -> bool {
        !self.is_zero() && self.strip_units(forbidden).0.is_constant()
    }

    pub fn inverse(&self, forbidden: &[&[UniPoly]; N]) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let (rest, removed) = self.strip_units(forbidden);
        let c = rest.as_constant()?;
        let mut num = Poly::constant(c.recip());
        for slot in 0..N {
            for (f, e) in &self.den[slot] {
                num = num.mul(&Self::lift(f, slot).pow(*e));
            }
        }
        Some(Frac { num, den: removed }.normalize())
    }

    pub fn fmt_vars(&self, names: &[&str; N]) -> String {
        if !self.has_den() {
            return self.num.fmt_vars(names);
        }
        let mut d = Vec::new();
        for slot in 0..N {
            for (f, e) in &self.den[slot] {
                let mut one = [""; 1];
                one[0] = names[slot];
                let s = format!("({})", f.fmt_vars(&one));
                d.push(if *e > 1 { format!("{s}{}", super::poly::superscript(*e as usize)) } else { s });
            }
        }
        format!("({})/{}", self.num.fmt_vars(names), d.join(""))
    }
}

impl LocalizedElem {
    /// `f(L, R) V` with the left variable acting through `left` and the
    /// right variable through `right`; `None` when a denominator is singular.
    pub fn apply(&self, left: &RatMatrix, v: &RatMatrix, right: &RatMatrix) -> Option<RatMatrix> {
        let mut out = self.num.apply(left, v, right);
        for (f, e) in &self.den[0] {
            let inv = f.eval_matrix(left).inverse()?;
            for _ in 0..*e {
                out = inv.mul(&out);
            }
        }
        for (f, e) in &self.den[1] {
            let inv = f.eval_matrix(right).inverse()?;
            for _ in 0..*e {
                out = out.mul(&inv);
            }
        }
        Some(out)
    }

    pub fn eval_scalar(&self, l: &Q, r: &Q) -> Option<Q> {
        let mut v = self.num.eval_all(&[l.clone(), r.clone()]);
        for (f, e) in &self.den[0] {
            let d = f.eval(l);
            if d.is_zero() {
                return None;
            }
            for _ in 0..*e {
                v /= &d;
            }
        }
        for (f, e) in &self.den[1] {
            let d = f.eval(r);
            if d.is_zero() {
                return None;
            }
            for _ in 0..*e {
                v /= &d;
            }
        }
        Some(v)
    }
}
