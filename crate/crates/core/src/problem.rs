//! Matrix bimodule problems: vertex classes, dotted and solid bases, the
//! derivation matrix `H`, differentials, representations and morphisms.

use crate::exact::{fmt_q, subscript, superscript, LocalizedElem, RatMatrix, SparseEchelon, TriFrac, UniPoly, Q};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    Trivial,
    /// `k[x, φ(x)⁻¹]` with monic irreducible forbidden factors.
    Param { var: String, forbidden: Vec<UniPoly> },
}

impl Ring {
    pub fn param(var: &str) -> Self {
        Ring::Param { var: var.into(), forbidden: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, Ring::Trivial)
    }

    pub fn forbidden(&self) -> &[UniPoly] {
        match self {
            Ring::Trivial => &[],
            Ring::Param { forbidden, .. } => forbidden,
        }
    }

    pub fn var(&self) -> &str {
        match self {
            Ring::Trivial => "",
            Ring::Param { var, .. } => var,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexClass {
    pub name: String,
    pub ring: Ring,
}

/// Display name of a generator: stem, optional original index and the
/// slot pairs picked up by successive splits (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub stem: String,
    pub index: Option<String>,
    pub splits: Vec<(usize, usize)>,
}

impl Label {
    pub fn new(stem: &str) -> Self {
        Label { stem: stem.into(), index: None, splits: Vec::new() }
    }

    pub fn indexed(stem: &str, i: usize) -> Self {
        Label { stem: stem.into(), index: Some(i.to_string()), splits: Vec::new() }
    }

    pub fn split(&self, p: usize, q: usize) -> Self {
        let mut l = self.clone();
        l.splits.push((p, q));
        l
    }

    fn script(s: &str, sup: bool) -> String {
        s.chars()
            .map(|c| match c.to_digit(10) {
                Some(d) if sup => superscript(d as usize),
                Some(d) => subscript(d as usize),
                None => c.to_string(),
            })
            .collect()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.stem)?;
        if self.splits.is_empty() {
            if let Some(i) = &self.index {
                f.write_str(&Self::script(i, false))?;
            }
            return Ok(());
        }
        if let Some(i) = &self.index {
            f.write_str(&Self::script(i, true))?;
        }
        let parts: Vec<String> = self.splits.iter().map(|(p, q)| format!("{}{}", subscript(*p), subscript(*q))).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dotted {
    pub label: Label,
    pub source: usize,
    pub target: usize,
    pub entries: BTreeMap<(usize, usize), LocalizedElem>,
}

impl Dotted {
    pub fn is_scalar(&self) -> bool {
        self.entries.values().all(|e| e.as_constant().is_some())
    }

    pub fn scalar_matrix(&self, t: usize) -> Option<RatMatrix> {
        let mut m = RatMatrix::zeros(t, t);
        for (&(i, j), e) in &self.entries {
            m.set(i, j, e.as_constant()?);
        }
        Some(m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Solid {
    pub label: Label,
    pub source: usize,
    pub target: usize,
    pub entries: BTreeMap<(usize, usize), Q>,
    pub lead: (usize, usize),
}

impl Solid {
    /// Builds a solid generator; source/target classes and the lead are
    /// read off the entries. Panics on an empty pattern.
    pub fn new(label: Label, entries: BTreeMap<(usize, usize), Q>, class_of: &[usize]) -> Self {
        let lead = *entries
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(p, _)| p)
            .min_by(|a, b| crate::exact::position_cmp(**a, **b))
            .expect("solid generator with no entries");
        Solid { label, source: class_of[lead.0], target: class_of[lead.1], entries, lead }
    }

    pub fn matrix(&self, t: usize) -> RatMatrix {
        let mut m = RatMatrix::zeros(t, t);
        for (&(i, j), v) in &self.entries {
            m.set(i, j, v.clone());
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Problem {
    pub classes: Vec<VertexClass>,
    pub class_of: Vec<usize>,
    pub dotted: Vec<Dotted>,
    pub solid: Vec<Solid>,
    /// Nonzero entries of `H`, each inside one class block.
    pub h: BTreeMap<(usize, usize), UniPoly>,
    /// Index of the root problem each index descends from.
    pub origin: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProblemError {
    SizeMismatch(String),
    NotRegular { class: usize },
    ClosureFailure { left: usize, right: usize },
    Unsupported(&'static str),
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::SizeMismatch(s) => write!(f, "size mismatch: {s}"),
            ProblemError::NotRegular { class } => write!(f, "Weyr part of class {class} is not regular"),
            ProblemError::ClosureFailure { left, right } => write!(f, "product of dotted generators {left} and {right} leaves the span"),
            ProblemError::Unsupported(s) => write!(f, "unsupported: {s}"),
        }
    }
}

/// One failed axiom with its witnesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub axiom: &'static str,
    pub detail: String,
}

impl Problem {
    pub fn t(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_indices(&self, c: usize) -> Vec<usize> {
        (0..self.t()).filter(|&i| self.class_of[i] == c).collect()
    }

    pub fn is_minimal(&self) -> bool {
        self.solid.is_empty()
    }

    pub fn all_trivial(&self) -> bool {
        self.classes.iter().all(|c| c.ring.is_trivial())
    }

    pub fn forbidden(&self, c: usize) -> &[UniPoly] {
        self.classes[c].ring.forbidden()
    }

    pub fn var_of(&self, c: usize) -> &str {
        self.classes[c].ring.var()
    }

    pub fn class_by_name(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    /// Row offsets of each index in the partitioned matrix at `sizes`.
    pub fn offsets(&self, sizes: &[usize]) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.t() + 1);
        let mut acc = 0;
        for i in 0..self.t() {
            off.push(acc);
            acc += sizes[self.class_of[i]];
        }
        off.push(acc);
        off
    }

    /// `H(W)`: constants become scalar blocks, class variables become the Weyr parts.
    pub fn h_matrix(&self, sizes: &[usize], weyr: &BTreeMap<usize, RatMatrix>) -> RatMatrix {
        let off = self.offsets(sizes);
        let n = off[self.t()];
        let mut m = RatMatrix::zeros(n, n);
        for (&(r, c), p) in &self.h {
            let cl = self.class_of[r];
            let sz = sizes[cl];
            let b = match weyr.get(&cl) {
                Some(w) => p.eval_matrix(w),
                None => RatMatrix::scalar(sz, &p.as_constant().unwrap_or_else(Q::zero)),
            };
            m.add_block(off[r], off[c], &b, &Q::one());
        }
        m
    }

    /// `d(V_j)[p][q] = (V_j H − H V_j)[p][q]`.
    fn dv_entry(&self, j: usize, p: usize, q: usize, rows: &BTreeMap<usize, Vec<(usize, usize)>>, cols: &BTreeMap<usize, Vec<(usize, usize)>>) -> LocalizedElem {
        let mut s = LocalizedElem::zero();
        let v = &self.dotted[j];
        if let Some(list) = rows.get(&p) {
            for &(jj, k) in list {
                if jj != j {
                    continue;
                }
                if let Some(h) = self.h.get(&(k, q)) {
                    s = s.add(&v.entries[&(p, k)].mul_poly(&h.embed([1])));
                }
            }
        }
        if let Some(list) = cols.get(&q) {
            for &(jj, k) in list {
                if jj != j {
                    continue;
                }
                if let Some(h) = self.h.get(&(p, k)) {
                    s = s.sub(&v.entries[&(k, q)].mul_poly(&h.embed([0])));
                }
            }
        }
        s
    }

    fn dotted_index(&self) -> (BTreeMap<usize, Vec<(usize, usize)>>, BTreeMap<usize, Vec<(usize, usize)>>) {
        // row -> (generator, col), col -> (generator, row)
        let mut rows: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        let mut cols: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (j, v) in self.dotted.iter().enumerate() {
            for &(r, c) in v.entries.keys() {
                rows.entry(r).or_default().push((j, c));
                cols.entry(c).or_default().push((j, r));
            }
        }
        (rows, cols)
    }

    /// Linear part of `δ(a_l)`: coefficient of each dotted generator.
    pub fn linear_part(&self, l: usize) -> Vec<(usize, LocalizedElem)> {
        let (rows, cols) = self.dotted_index();
        let (p, q) = self.solid[l].lead;
        let mut cands: BTreeSet<usize> = BTreeSet::new();
        if let Some(list) = rows.get(&p) {
            cands.extend(list.iter().filter(|(_, k)| self.h.contains_key(&(*k, q))).map(|x| x.0));
        }
        if let Some(list) = cols.get(&q) {
            cands.extend(list.iter().filter(|(_, k)| self.h.contains_key(&(p, *k))).map(|x| x.0));
        }
        cands
            .into_iter()
            .map(|j| (j, self.dv_entry(j, p, q, &rows, &cols)))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    pub fn differentials(&self) -> DifferentialTable {
        let (rows, cols) = self.dotted_index();
        // solid entries indexed by row and by column
        let mut arow: BTreeMap<usize, Vec<(usize, usize, &Q)>> = BTreeMap::new();
        let mut acol: BTreeMap<usize, Vec<(usize, usize, &Q)>> = BTreeMap::new();
        for (i, a) in self.solid.iter().enumerate() {
            for (&(r, c), v) in &a.entries {
                arow.entry(r).or_default().push((i, c, v));
                acol.entry(c).or_default().push((i, r, v));
            }
        }
        let mut out = Vec::new();
        for l in 0..self.solid.len() {
            let (p, q) = self.solid[l].lead;
            let linear = self.linear_part(l).into_iter().map(|(dotted, coeff)| LinearTerm { dotted, coeff }).collect();
            let mut bil: BTreeMap<(bool, usize, usize), TriFrac> = BTreeMap::new();
            // Π Θ: v_j(p,k) a_i(k,q)
            if let Some(list) = rows.get(&p) {
                for &(j, k) in list {
                    if let Some(al) = arow.get(&k) {
                        for &(i, c, v) in al {
                            if c == q {
                                let t: TriFrac = self.dotted[j].entries[&(p, k)].embed([0, 1]).scale(v);
                                let e = bil.entry((true, j, i)).or_insert_with(TriFrac::zero);
                                *e = e.add(&t);
                            }
                        }
                    }
                }
            }
            // − Θ Π: a_i(p,k) v_j(k,q)
            if let Some(list) = cols.get(&q) {
                for &(j, k) in list {
                    if let Some(al) = acol.get(&k) {
                        for &(i, r, v) in al {
                            if r == p {
                                let t: TriFrac = self.dotted[j].entries[&(k, q)].embed([1, 2]).scale(&-v.clone());
                                let e = bil.entry((false, j, i)).or_insert_with(TriFrac::zero);
                                *e = e.add(&t);
                            }
                        }
                    }
                }
            }
            let bilinear = bil
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|((dotted_first, dotted, solid), coeff)| BilinearTerm { dotted, solid, coeff, dotted_first })
                .collect();
            out.push(Differential { solid: l, linear, bilinear });
        }
        DifferentialTable { rows: out }
    }

    /// Formal products `Υ = Σ e_X E_X`, `Π = Σ v_j V_j`, `Θ = Σ a_i A_i` as
    /// sparse symbol matrices.
    pub fn formal_products(&self) -> FormalProducts {
        let mut upsilon: BTreeMap<(usize, usize), Vec<(Symbol, LocalizedElem)>> = BTreeMap::new();
        for i in 0..self.t() {
            upsilon.entry((i, i)).or_default().push((Symbol::Idempotent(self.class_of[i]), LocalizedElem::one()));
        }
        let mut pi: BTreeMap<(usize, usize), Vec<(Symbol, LocalizedElem)>> = BTreeMap::new();
        for (j, v) in self.dotted.iter().enumerate() {
            for (&p, e) in &v.entries {
                pi.entry(p).or_default().push((Symbol::Dotted(j), e.clone()));
            }
        }
        let mut theta: BTreeMap<(usize, usize), Vec<(Symbol, LocalizedElem)>> = BTreeMap::new();
        for (i, a) in self.solid.iter().enumerate() {
            for (&p, e) in &a.entries {
                theta.entry(p).or_default().push((Symbol::Solid(i), LocalizedElem::constant(e.clone())));
            }
        }
        FormalProducts { upsilon, pi, theta }
    }

    /// Structure constants: `V_i V_j = Σ_l γ_ijl V_l`. Only for dotted bases
    /// with scalar entries.
    pub fn mu11(&self) -> Result<BTreeMap<(usize, usize), Vec<(usize, Q)>>, ProblemError> {
        let mats: Vec<BTreeMap<(usize, usize), Q>> = self
            .dotted
            .iter()
            .map(|v| v.entries.iter().map(|(p, e)| e.as_constant().map(|c| (*p, c))).collect::<Option<_>>())
            .collect::<Option<_>>()
            .ok_or(ProblemError::Unsupported("structure constants for polynomial dotted entries"))?;
        let m = mats.len();
        let t = self.t();
        // positions first, then one tag column per generator
        let pos = |(i, j): (usize, usize)| i * t + j;
        let tag = |k: usize| t * t + k;
        let mut ech = SparseEchelon::new();
        for (k, x) in mats.iter().enumerate() {
            let mut v: BTreeMap<usize, Q> = x.iter().map(|(p, c)| (pos(*p), c.clone())).collect();
            v.insert(tag(k), Q::one());
            ech.insert(v);
        }
        let mut out = BTreeMap::new();
        for i in 0..m {
            for j in 0..m {
                let mut prod: BTreeMap<usize, Q> = BTreeMap::new();
                for (&(r, k), a) in &mats[i] {
                    for (&(_, c), b) in mats[j].range((k, 0)..(k + 1, 0)) {
                        *prod.entry(pos((r, c))).or_insert_with(Q::zero) += a * b;
                    }
                }
                prod.retain(|_, c| !c.is_zero());
                if prod.is_empty() {
                    continue;
                }
                let rest = ech.reduce(prod);
                if rest.keys().any(|&k| k < t * t) {
                    return Err(ProblemError::ClosureFailure { left: i, right: j });
                }
                let g: Vec<(usize, Q)> = rest.into_iter().map(|(k, c)| (k - t * t, -c)).collect();
                out.insert((i, j), g);
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        validate(self)
    }

    /// Names of the class variables for positional rendering.
    pub fn render_differential(&self, d: &Differential) -> String {
        render_differential(self, d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Symbol {
    Idempotent(usize),
    Dotted(usize),
    Solid(usize),
}

#[derive(Clone, Debug)]
pub struct FormalProducts {
    pub upsilon: BTreeMap<(usize, usize), Vec<(Symbol, LocalizedElem)>>,
    pub pi: BTreeMap<(usize, usize), Vec<(Symbol, LocalizedElem)>>,
    pub theta: BTreeMap<(usize, usize), Vec<(Symbol, LocalizedElem)>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearTerm {
    pub dotted: usize,
    /// Left variable: class of the row; right variable: class of the column.
    pub coeff: LocalizedElem,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearTerm {
    pub dotted: usize,
    pub solid: usize,
    /// Variables: left, middle (between the two symbols), right.
    pub coeff: TriFrac,
    /// `v ⊗ a` when true, `a ⊗ v` otherwise.
    pub dotted_first: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Differential {
    pub solid: usize,
    pub linear: Vec<LinearTerm>,
    pub bilinear: Vec<BilinearTerm>,
}

impl Differential {
    pub fn is_zero(&self) -> bool {
        self.linear.is_empty() && self.bilinear.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialTable {
    pub rows: Vec<Differential>,
}

fn push_term(out: &mut String, coeff: &Q, body: &str) {
    let neg = coeff.is_negative();
    let a = coeff.abs();
    if out.is_empty() {
        if neg {
            out.push('−');
        }
    } else {
        out.push(if neg { '−' } else { '+' });
    }
    if !a.is_one() {
        if a.denom().is_one() {
            out.push_str(&fmt_q(&a));
        } else {
            out.push_str(&format!("({})", fmt_q(&a)));
        }
    }
    out.push_str(body);
}

fn var_power(name: &str, e: u32) -> String {
    match e {
        0 => String::new(),
        1 => name.into(),
        _ => format!("{name}{}", superscript(e as usize)),
    }
}

/// `δ(a)=…` in positional notation: `x v` puts the left variable before
/// the symbol, `v x` after it.
pub fn render_differential(p: &Problem, d: &Differential) -> String {
    let a = &p.solid[d.solid];
    let mut body = String::new();
    push_linear(p, &mut body, d.linear.iter().map(|t| (t.dotted, &t.coeff)));
    let mut bil: Vec<&BilinearTerm> = d.bilinear.iter().collect();
    bil.sort_by_key(|t| (!t.dotted_first, t.dotted, t.solid));
    for t in bil {
        let v = &p.dotted[t.dotted];
        let s = &p.solid[t.solid];
        let (first, second, xl, xm, xr) = if t.dotted_first {
            (v.label.to_string(), s.label.to_string(), p.var_of(v.source), p.var_of(v.target), p.var_of(s.target))
        } else {
            (s.label.to_string(), v.label.to_string(), p.var_of(s.source), p.var_of(s.target), p.var_of(v.target))
        };
        render_coeff_terms(&mut body, &t.coeff, |e| format!("{}{first}{}{second}{}", var_power(xl, e[0]), var_power(xm, e[1]), var_power(xr, e[2])));
    }
    if body.is_empty() {
        body.push('0');
    }
    format!("δ({})={}", a.label, body)
}

fn push_linear<'a>(p: &Problem, body: &mut String, terms: impl Iterator<Item = (usize, &'a LocalizedElem)>) {
    for (j, c) in terms {
        let v = &p.dotted[j];
        let (xl, xr) = (p.var_of(v.source), p.var_of(v.target));
        render_coeff_terms(body, c, |e| format!("{}{}{}", var_power(xl, e[0]), v.label, var_power(xr, e[1])));
    }
}

/// `Σ c_j v_j` in the notation of the differentials; `0` when empty.
pub fn render_linear(p: &Problem, terms: &[(usize, LocalizedElem)]) -> String {
    let mut body = String::new();
    push_linear(p, &mut body, terms.iter().map(|(j, c)| (*j, c)));
    if body.is_empty() {
        body.push('0');
    }
    body
}

fn render_coeff_terms<const N: usize>(out: &mut String, c: &crate::exact::Frac<N>, body: impl Fn(&[u32; N]) -> String) {
    if c.has_den() {
        let names: [&str; N] = core::array::from_fn(|i| ["x", "y", "z"][i.min(2)]);
        push_term(out, &Q::one(), &format!("[{}]·{}", c.fmt_vars(&names), body(&[0; N])));
        return;
    }
    for (e, q) in c.num().terms().rev() {
        push_term(out, q, &body(e));
    }
}

fn validate(p: &Problem) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let t = p.t();
    macro_rules! diag {
        ($a:expr, $d:expr) => {
            out.push(Diagnostic { axiom: $a, detail: $d })
        };
    }
    if p.origin.len() != t {
        diag!("partition", format!("origin map has {} entries for {} indices", p.origin.len(), t));
    }
    for (i, &c) in p.class_of.iter().enumerate() {
        if c >= p.classes.len() {
            diag!("partition", format!("index {} has unknown class {}", i + 1, c));
        }
    }
    if out.iter().any(|d| d.axiom == "partition") {
        return out;
    }
    for (c, cl) in p.classes.iter().enumerate() {
        if p.class_indices(c).is_empty() {
            diag!("partition", format!("class {} is empty", cl.name));
        }
        for f in cl.ring.forbidden() {
            if f.degree().unwrap_or(0) == 0 || f.lead() != Q::one() {
                diag!("ring", format!("forbidden factor {} of class {} is not monic nonconstant", f.fmt_vars(&["x"]), cl.name));
            } else if f.degree().unwrap() <= 3 && f.degree().unwrap() > 1 && !f.rational_roots().is_empty() {
                diag!("ring", format!("forbidden factor {} of class {} is reducible", f.fmt_vars(&["x"]), cl.name));
            }
        }
    }
    let allowed = |c: usize, slot_poly_uses: bool, den: &BTreeMap<UniPoly, u32>| -> bool {
        if p.classes[c].ring.is_trivial() {
            !slot_poly_uses && den.is_empty()
        } else {
            den.keys().all(|f| p.forbidden(c).contains(f))
        }
    };
    for (j, v) in p.dotted.iter().enumerate() {
        if v.entries.is_empty() {
            diag!("dotted-shape", format!("{} has no entries", v.label));
        }
        for (&(r, c), e) in &v.entries {
            if r >= c {
                diag!("dotted-shape", format!("{} has entry at ({},{}) not strictly upper", v.label, r + 1, c + 1));
            }
            if p.class_of[r] != v.source || p.class_of[c] != v.target {
                diag!("dotted-shape", format!("{} entry ({},{}) outside its class pair", v.label, r + 1, c + 1));
            }
            if e.is_zero() {
                diag!("dotted-shape", format!("{} stores a zero at ({},{})", v.label, r + 1, c + 1));
            }
            if !allowed(v.source, e.num().uses_var(0), e.den(0)) || !allowed(v.target, e.num().uses_var(1), e.den(1)) {
                diag!("dotted-ring", format!("{} entry ({},{}) not in R_X ⊗ R_Y", v.label, r + 1, c + 1));
            }
        }
        let _ = j;
    }
    for a in &p.solid {
        for (&(r, c), v) in &a.entries {
            if v.is_zero() {
                diag!("solid-shape", format!("{} stores a zero at ({},{})", a.label, r + 1, c + 1));
            }
            if p.class_of[r] != a.source || p.class_of[c] != a.target {
                diag!("solid-shape", format!("{} entry ({},{}) outside its class pair", a.label, r + 1, c + 1));
            }
        }
    }
    // normalized basis (1.1-8)
    for (i, a) in p.solid.iter().enumerate() {
        let first = a.entries.iter().filter(|(_, v)| !v.is_zero()).min_by(|x, y| crate::exact::position_cmp(*x.0, *y.0));
        match first {
            Some((pos, v)) if *pos == a.lead && v.is_one() => {}
            _ => diag!("normalized-basis", format!("{}: lead ({},{}) is not a unit leading entry", a.label, a.lead.0 + 1, a.lead.1 + 1)),
        }
        for (j, b) in p.solid.iter().enumerate() {
            if i != j && b.entries.get(&a.lead).is_some_and(|v| !v.is_zero()) {
                diag!("normalized-basis", format!("{} is nonzero at the leading position of {}", b.label, a.label));
            }
        }
        if i > 0 && crate::exact::position_cmp(p.solid[i - 1].lead, a.lead) != core::cmp::Ordering::Less {
            diag!("lead-order", format!("leads of {} and {} not strictly increasing", p.solid[i - 1].label, a.label));
        }
    }
    for (&(r, c), h) in &p.h {
        if p.class_of[r] != p.class_of[c] {
            diag!("h-shape", format!("H has an entry at ({},{}) across classes", r + 1, c + 1));
        } else {
            let cl = p.class_of[r];
            if p.classes[cl].ring.is_trivial() && !h.is_constant() {
                diag!("h-shape", format!("H entry ({},{}) is not a constant in a trivial class", r + 1, c + 1));
            }
            if h.degree().unwrap_or(0) > 1 {
                diag!("h-degree", format!("H entry ({},{}) has degree above one", r + 1, c + 1));
            }
        }
    }
    // derivation law and triangularity
    let leads: Vec<(usize, usize)> = p.solid.iter().map(|a| a.lead).collect();
    let expand2 = |m: &BTreeMap<(usize, usize), LocalizedElem>| -> Result<Vec<(usize, LocalizedElem)>, String> {
        let mut m = m.clone();
        let mut coeffs = Vec::new();
        for (l, a) in p.solid.iter().enumerate() {
            let Some(c) = m.get(&a.lead).cloned() else { continue };
            if c.is_zero() {
                continue;
            }
            for (pos, v) in &a.entries {
                let e = m.entry(*pos).or_insert_with(LocalizedElem::zero);
                *e = e.sub(&c.scale(v));
            }
            coeffs.push((l, c));
        }
        m.retain(|_, v| !v.is_zero());
        match m.keys().next() {
            Some(&(r, c)) => Err(format!("residual entry at ({},{})", r + 1, c + 1)),
            None => Ok(coeffs),
        }
    };
    for (j, v) in p.dotted.iter().enumerate() {
        let mut dv: BTreeMap<(usize, usize), LocalizedElem> = BTreeMap::new();
        for (&(r, k), e) in &v.entries {
            for (&(k2, c), h) in p.h.range((k, 0)..(k + 1, 0)) {
                debug_assert_eq!(k2, k);
                let x = dv.entry((r, c)).or_insert_with(LocalizedElem::zero);
                *x = x.add(&e.mul_poly(&h.embed([1])));
            }
        }
        for (&(r, k), h) in &p.h {
            for (&(k2, c), e) in v.entries.range((k, 0)..(k + 1, 0)) {
                debug_assert_eq!(k2, k);
                let x = dv.entry((r, c)).or_insert_with(LocalizedElem::zero);
                *x = x.sub(&e.mul_poly(&h.embed([0])));
            }
        }
        if let Err(e) = expand2(&dv) {
            diag!("derivation", format!("d({}) is not in the solid span: {}", v.label, e));
        }
        let _ = j;
    }
    for (i, a) in p.solid.iter().enumerate() {
        for v in &p.dotted {
            for left in [true, false] {
                let mut prod: BTreeMap<(usize, usize), TriFrac> = BTreeMap::new();
                if left {
                    for (&(r, k), e) in &v.entries {
                        for (&(_, c), x) in a.entries.range((k, 0)..(k + 1, 0)) {
                            let y = prod.entry((r, c)).or_insert_with(TriFrac::zero);
                            *y = y.add(&e.embed([0, 1]).scale(x));
                        }
                    }
                } else {
                    for (&(r, k), x) in &a.entries {
                        for (&(_, c), e) in v.entries.range((k, 0)..(k + 1, 0)) {
                            let y = prod.entry((r, c)).or_insert_with(TriFrac::zero);
                            *y = y.add(&e.embed([1, 2]).scale(x));
                        }
                    }
                }
                prod.retain(|_, y| !y.is_zero());
                if prod.is_empty() {
                    continue;
                }
                for (l, lead) in leads.iter().enumerate().take(i + 1) {
                    if prod.get(lead).is_some_and(|y| !y.is_zero()) {
                        let (x, y) = if left { (v.label.to_string(), a.label.to_string()) } else { (a.label.to_string(), v.label.to_string()) };
                        diag!("triangularity", format!("{x}·{y} has a component along {} (index {} ≤ {})", p.solid[l].label, l + 1, i + 1));
                    }
                }
                // residual after expansion over later solid generators
                for (l, b) in p.solid.iter().enumerate().skip(i + 1) {
                    let Some(c) = prod.get(&b.lead).cloned() else { continue };
                    for (pos, x) in &b.entries {
                        let y = prod.entry(*pos).or_insert_with(TriFrac::zero);
                        *y = y.sub(&c.scale(x));
                    }
                    let _ = l;
                }
                prod.retain(|_, y| !y.is_zero());
                if let Some(&(r, c)) = prod.keys().next() {
                    let (x, y) = if left { (v.label.to_string(), a.label.to_string()) } else { (a.label.to_string(), v.label.to_string()) };
                    diag!("bimodule", format!("{x}·{y} leaves the solid span at ({},{})", r + 1, c + 1));
                }
            }
        }
    }
    match p.mu11() {
        Err(ProblemError::ClosureFailure { left, right }) => {
            diag!("closure", format!("{}·{} leaves the dotted span", p.dotted[left].label, p.dotted[right].label))
        }
        _ => {}
    }
    out
}

/// Sizes per class, Weyr parts of the nontrivial classes, and one matrix
/// per solid generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Representation {
    pub sizes: Vec<usize>,
    pub weyr: BTreeMap<usize, RatMatrix>,
    pub blocks: Vec<RatMatrix>,
}

impl Representation {
    pub fn zero(p: &Problem, sizes: &[usize]) -> Self {
        let blocks = p.solid.iter().map(|a| RatMatrix::zeros(sizes[a.source], sizes[a.target])).collect();
        Representation { sizes: sizes.to_vec(), weyr: BTreeMap::new(), blocks }
    }

    pub fn check(&self, p: &Problem) -> Result<(), ProblemError> {
        if self.sizes.len() != p.classes.len() {
            return Err(ProblemError::SizeMismatch(format!("{} sizes for {} classes", self.sizes.len(), p.classes.len())));
        }
        if self.blocks.len() != p.solid.len() {
            return Err(ProblemError::SizeMismatch(format!("{} blocks for {} solid generators", self.blocks.len(), p.solid.len())));
        }
        for (a, b) in p.solid.iter().zip(&self.blocks) {
            if b.shape() != (self.sizes[a.source], self.sizes[a.target]) {
                return Err(ProblemError::SizeMismatch(format!("block of {} is {}x{}", a.label, b.rows(), b.cols())));
            }
        }
        for (c, cl) in p.classes.iter().enumerate() {
            match (&cl.ring, self.weyr.get(&c)) {
                (Ring::Trivial, None) => {}
                (Ring::Trivial, Some(_)) => return Err(ProblemError::SizeMismatch(format!("Weyr part given for trivial class {}", cl.name))),
                (Ring::Param { forbidden, .. }, w) => {
                    let n = self.sizes[c];
                    let w = match w {
                        Some(w) => w.clone(),
                        None if n == 0 => RatMatrix::zeros(0, 0),
                        None => return Err(ProblemError::SizeMismatch(format!("missing Weyr part for class {}", cl.name))),
                    };
                    if w.shape() != (n, n) {
                        return Err(ProblemError::SizeMismatch(format!("Weyr part of class {} has wrong size", cl.name)));
                    }
                    if forbidden.iter().any(|f| f.eval_matrix(&w).inverse().is_none()) {
                        return Err(ProblemError::NotRegular { class: c });
                    }
                }
            }
        }
        Ok(())
    }

    fn weyr_or_id(&self, c: usize) -> RatMatrix {
        self.weyr.get(&c).cloned().unwrap_or_else(|| RatMatrix::identity(self.sizes[c]))
    }
}

/// `Σ H_X(W_X) + Σ P(a_i) ∗ A_i`.
pub fn rep_matrix(p: &Problem, rep: &Representation) -> Result<RatMatrix, ProblemError> {
    rep.check(p)?;
    let off = p.offsets(&rep.sizes);
    let mut m = p.h_matrix(&rep.sizes, &rep.weyr);
    for (a, b) in p.solid.iter().zip(&rep.blocks) {
        for (&(r, c), v) in &a.entries {
            m.add_block(off[r], off[c], b, v);
        }
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub classes: Vec<RatMatrix>,
    pub dotted: Vec<RatMatrix>,
}

impl Morphism {
    pub fn identity(p: &Problem, sizes: &[usize]) -> Self {
        Morphism {
            classes: sizes.iter().map(|&n| RatMatrix::identity(n)).collect(),
            dotted: p.dotted.iter().map(|v| RatMatrix::zeros(sizes[v.source], sizes[v.target])).collect(),
        }
    }
}

/// `Σ f_X ∗ E_X + Σ f(v_j) ∗ V_j` between the representations `from` and `to`.
pub fn morphism_matrix(p: &Problem, from: &Representation, to: &Representation, f: &Morphism) -> Result<RatMatrix, ProblemError> {
    if f.classes.len() != p.classes.len() || f.dotted.len() != p.dotted.len() {
        return Err(ProblemError::SizeMismatch("morphism component counts".into()));
    }
    for (c, m) in f.classes.iter().enumerate() {
        if m.shape() != (from.sizes[c], to.sizes[c]) {
            return Err(ProblemError::SizeMismatch(format!("class component {c} has the wrong shape")));
        }
    }
    for (v, m) in p.dotted.iter().zip(&f.dotted) {
        if m.shape() != (from.sizes[v.source], to.sizes[v.target]) {
            return Err(ProblemError::SizeMismatch(format!("component of {} has the wrong shape", v.label)));
        }
    }
    let ro = p.offsets(&from.sizes);
    let co = p.offsets(&to.sizes);
    let mut big = RatMatrix::zeros(ro[p.t()], co[p.t()]);
    for i in 0..p.t() {
        big.add_block(ro[i], co[i], &f.classes[p.class_of[i]], &Q::one());
    }
    for (v, m) in p.dotted.iter().zip(&f.dotted) {
        if m.is_zero() {
            continue;
        }
        let (wl, wr) = (from.weyr_or_id(v.source), to.weyr_or_id(v.target));
        for (&(r, c), e) in &v.entries {
            let b = e.apply(&wl, m, &wr).ok_or(ProblemError::Unsupported("singular denominator in morphism"))?;
            big.add_block(ro[r], co[c], &b, &Q::one());
        }
    }
    Ok(big)
}

pub fn is_morphism(p: &Problem, from: &Representation, to: &Representation, f: &Morphism) -> Result<bool, ProblemError> {
    from.check(p)?;
    to.check(p)?;
    for (&c, w) in &from.weyr {
        let w2 = to.weyr_or_id(c);
        if w.mul(&f.classes[c]) != f.classes[c].mul(&w2) {
            return Ok(false);
        }
    }
    let fm = morphism_matrix(p, from, to, f)?;
    Ok(rep_matrix(p, from)?.mul(&fm) == fm.mul(&rep_matrix(p, to)?))
}

/// Composite `g ∘ f` read back from the product of partitioned matrices.
pub fn compose(p: &Problem, a: &Representation, b: &Representation, c: &Representation, f: &Morphism, g: &Morphism) -> Result<Morphism, ProblemError> {
    let prod = morphism_matrix(p, a, b, f)?.mul(&morphism_matrix(p, b, c, g)?);
    if !p.all_trivial() {
        return Err(ProblemError::Unsupported("composition read-back needs trivial classes"));
    }
    let ro = p.offsets(&a.sizes);
    let co = p.offsets(&c.sizes);
    let classes = (0..p.classes.len()).map(|x| f.classes[x].mul(&g.classes[x])).collect();
    // dotted parts: subtract the class part and read coordinates at a pivot per generator
    let mut rest = prod;
    for i in 0..p.t() {
        let x = p.class_of[i];
        let m: RatMatrix = f.classes[x].mul(&g.classes[x]);
        rest.add_block(ro[i], co[i], &m, &-Q::one());
    }
    let t = p.t();
    let mats: Vec<RatMatrix> = p.dotted.iter().map(|v| v.scalar_matrix(t).unwrap()).collect();
    let nb = crate::exact::normalized_basis(&mats);
    // express each normalized element in the original generators
    let mut dotted: Vec<RatMatrix> = p.dotted.iter().map(|v| RatMatrix::zeros(a.sizes[v.source], c.sizes[v.target])).collect();
    if nb.len() != mats.len() {
        return Err(ProblemError::Unsupported("dependent dotted generators"));
    }
    // coordinates: V_j = Σ T_jk N_k with T from leads
    let tmat = RatMatrix::from_rows(mats.iter().map(|m| nb.iter().map(|(_, (i, j))| m.get(*i, *j).clone()).collect()).collect());
    let tinv = tmat.inverse().ok_or(ProblemError::Unsupported("dependent dotted generators"))?;
    for (k, (_, (i, j))) in nb.iter().enumerate() {
        let block = rest.block(ro[*i], co[*j], a.sizes[p.class_of[*i]], c.sizes[p.class_of[*j]]);
        for (jj, d) in dotted.iter_mut().enumerate() {
            let coef = tinv.get(k, jj);
            if !coef.is_zero() {
                d.add_assign_scaled(&block, coef);
            }
        }
    }
    Ok(Morphism { classes, dotted })
}

/// Trivial vertex classes, one per entry of `names`, with `class_of` given.
pub fn trivial_classes(names: &[&str]) -> Vec<VertexClass> {
    names.iter().map(|n| VertexClass { name: (*n).into(), ring: Ring::Trivial }).collect()
}
