//! Reductions of a matrix bimodule problem at its first solid generator.
//!
//! Every reduction except regularization is an induction along a slot
//! layout: each old class `X` is replaced by an ordered list of slots, each
//! slot naming a new class. The layout also fixes how the class variable of
//! a parameter class acts on its slots, and (optionally) the value assigned
//! to the first solid generator, which is then dropped.

use crate::exact::{fmt_q, position_cmp, LocalizedElem, Poly, RatMatrix, SparseEchelon, UniPoly, Q};
use crate::problem::{rep_matrix, Dotted, Label, Problem, ProblemError, Representation, Ring, Solid, VertexClass};
use crate::weyr::JordanData;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_traits::{One, Zero};

/// Sparse matrix over slots; entry `(p, q)` is a polynomial in the variable
/// of the (common) class of slots `p` and `q`.
pub type SlotMat = BTreeMap<(usize, usize), UniPoly>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReduceError {
    Precondition(String),
    /// No linear coefficient of `δ(a_1)` is invertible.
    NotRegularizable { coeffs: Vec<(usize, LocalizedElem)> },
    NonRegularEigenvalue(Q),
    /// A matrix did not have the shape of the induced problem.
    NotInForm(String),
    Problem(ProblemError),
    Unsupported(&'static str),
}

impl From<ProblemError> for ReduceError {
    fn from(e: ProblemError) -> Self {
        ReduceError::Problem(e)
    }
}

impl fmt::Display for ReduceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReduceError::Precondition(s) => write!(f, "precondition failed: {s}"),
            ReduceError::NotRegularizable { coeffs } => write!(f, "first differential has no invertible coefficient ({} terms)", coeffs.len()),
            ReduceError::NonRegularEigenvalue(l) => write!(f, "eigenvalue {} is not regular", fmt_q(l)),
            ReduceError::NotInForm(s) => write!(f, "matrix is not in induced form: {s}"),
            ReduceError::Problem(e) => write!(f, "{e}"),
            ReduceError::Unsupported(s) => write!(f, "unsupported: {s}"),
        }
    }
}

fn pre(s: &str) -> ReduceError {
    ReduceError::Precondition(s.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepKind {
    Localization(UniPoly),
    LoopMutation,
    Deletion,
    Unraveling { eigenvalues: Vec<Q>, depth: usize, keep_parameter: bool },
    EdgeReduction(EdgeCase),
    LoopReduction(JordanData),
    ZeroArrow,
    IdentityArrow,
    Regularization,
}

impl StepKind {
    pub fn name(&self) -> &'static str {
        match self {
            StepKind::Localization(_) => "localization",
            StepKind::LoopMutation => "loop-mutation",
            StepKind::Deletion => "deletion",
            StepKind::Unraveling { .. } => "unraveling",
            StepKind::EdgeReduction(_) => "edge",
            StepKind::LoopReduction(_) => "loop",
            StepKind::ZeroArrow => "zero",
            StepKind::IdentityArrow => "identity",
            StepKind::Regularization => "regularization",
        }
    }
}

/// Shapes of the composite edge reduction, by rank against the two sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeCase {
    /// `r = 0`: middle class deleted.
    Zero,
    /// `m_X = r = m_Y`: outer classes deleted.
    Full,
    /// `m_X = r < m_Y`: first outer class deleted.
    LeftFull,
    /// `m_X > r = m_Y`: last outer class deleted.
    RightFull,
    General,
}

impl EdgeCase {
    pub fn from_sizes(mx: usize, my: usize, r: usize) -> Self {
        if r == 0 {
            EdgeCase::Zero
        } else if mx == r && my == r {
            EdgeCase::Full
        } else if mx == r {
            EdgeCase::LeftFull
        } else if my == r {
            EdgeCase::RightFull
        } else {
            EdgeCase::General
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FLabels {
    /// `v`, or `v₁, v₂, …` when there are several.
    Loop,
    /// `f_{pq}` from a numeric tag per new class.
    Edge(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub classes: Vec<VertexClass>,
    /// Per old class, the new class of each slot.
    pub slots: Vec<Vec<usize>>,
    /// Action of the variable of an old parameter class on its slots.
    pub lx: BTreeMap<usize, SlotMat>,
    /// Value of the first solid generator; it is dropped when present.
    pub la1: Option<SlotMat>,
    pub f_labels: FLabels,
}

/// One reduction with the data needed to move sizes and representations
/// back to the problem it was applied to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionStep {
    pub kind: StepKind,
    /// `None` for regularization.
    pub layout: Option<Layout>,
    /// Dotted generator removed by regularization, with its coefficient.
    pub pivot: Option<(usize, LocalizedElem)>,
    /// Substitution recorded by regularization: pivot = Σ c_j v_j (indices
    /// in the problem before the step).
    pub relation: Vec<(usize, LocalizedElem)>,
    pub localized: Vec<(usize, UniPoly)>,
}

impl ReductionStep {
    /// Concrete value given to `a_1` at the induced sizes, or `None` for
    /// regularization.
    pub fn b_matrix(&self, p_new: &Problem, sizes: &[usize], weyr: &BTreeMap<usize, RatMatrix>, src: usize, tgt: usize) -> Option<RatMatrix> {
        let lay = self.layout.as_ref()?;
        let la1 = lay.la1.as_ref()?;
        Some(slot_eval(la1, &lay.slots[src], &lay.slots[tgt], sizes, weyr, &p_new.classes))
    }

    /// `m_X = Σ_{slots p of X} m'_{class(p)}`; regularization keeps sizes.
    pub fn transport_size(&self, sizes: &[usize]) -> Vec<usize> {
        match &self.layout {
            None => sizes.to_vec(),
            Some(l) => transport_size(l, sizes),
        }
    }
}

pub fn transport_size(lay: &Layout, sizes: &[usize]) -> Vec<usize> {
    lay.slots.iter().map(|s| s.iter().map(|&z| sizes[z]).sum()).collect()
}

fn var() -> UniPoly {
    Poly::var(0)
}

fn constant(c: Q) -> UniPoly {
    Poly::constant(c)
}

fn slot_identity(n: usize) -> SlotMat {
    (0..n).map(|i| ((i, i), UniPoly::one())).collect()
}

fn slot_mul(a: &SlotMat, b: &SlotMat) -> SlotMat {
    let mut out: SlotMat = BTreeMap::new();
    for (&(i, k), x) in a {
        for (&(k2, j), y) in b.range((k, 0)..(k + 1, 0)) {
            debug_assert_eq!(k, k2);
            let e = out.entry((i, j)).or_insert_with(UniPoly::zero);
            *e = e.add(&x.mul(y));
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn slot_poly(h: &UniPoly, l: &SlotMat, n: usize) -> SlotMat {
    // Horner
    let mut out: SlotMat = BTreeMap::new();
    for c in h.coeffs().iter().rev() {
        out = slot_mul(&out, l);
        if !c.is_zero() {
            for i in 0..n {
                let e = out.entry((i, i)).or_insert_with(UniPoly::zero);
                *e = e.add(&constant(c.clone()));
            }
        }
        out.retain(|_, v| !v.is_zero());
    }
    out
}

/// `f(g)` for univariate polynomials.
pub fn compose_uni(f: &UniPoly, g: &UniPoly) -> UniPoly {
    let mut out = UniPoly::zero();
    for c in f.coeffs().iter().rev() {
        out = out.mul(g).add(&constant(c.clone()));
    }
    out
}

/// Block matrix of a slot matrix at the given class sizes and Weyr parts.
pub fn slot_eval(m: &SlotMat, rows: &[usize], cols: &[usize], sizes: &[usize], weyr: &BTreeMap<usize, RatMatrix>, classes: &[VertexClass]) -> RatMatrix {
    let ro: Vec<usize> = offsets(rows.iter().map(|&z| sizes[z]));
    let co: Vec<usize> = offsets(cols.iter().map(|&z| sizes[z]));
    let mut out = RatMatrix::zeros(ro[rows.len()], co[cols.len()]);
    for (&(p, q), h) in m {
        let z = rows[p];
        let n = sizes[z];
        if n == 0 {
            continue;
        }
        let b = match (&classes[z].ring, weyr.get(&z)) {
            (Ring::Param { .. }, Some(w)) => h.eval_matrix(w),
            _ => RatMatrix::scalar(n, &h.as_constant().unwrap_or_else(Q::zero)),
        };
        out.add_block(ro[p], co[q], &b, &Q::one());
    }
    out
}

fn offsets(it: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v = vec![0];
    for n in it {
        let last = *v.last().unwrap();
        v.push(last + n);
    }
    v
}

/// The identity layout of `p`.
pub fn identity_layout(p: &Problem) -> Layout {
    Layout {
        classes: p.classes.clone(),
        slots: (0..p.classes.len()).map(|c| vec![c]).collect(),
        lx: BTreeMap::new(),
        la1: None,
        f_labels: FLabels::Loop,
    }
}

fn unique_name(taken: &[VertexClass], base: &str) -> String {
    let mut n = base.to_string();
    while taken.iter().any(|c| c.name == n) {
        n.push('\'');
    }
    n
}

/// Replaces the old classes in `gone` by `fresh`, placed at the first of them.
fn splice(p: &Problem, gone: &[usize], fresh: Vec<VertexClass>) -> (Vec<VertexClass>, Vec<Option<usize>>, usize) {
    let mut classes = Vec::new();
    let mut map = vec![None; p.classes.len()];
    let mut start = 0;
    let mut placed = false;
    for (c, cl) in p.classes.iter().enumerate() {
        if gone.contains(&c) {
            if !placed {
                start = classes.len();
                classes.extend(fresh.iter().cloned());
                placed = true;
            }
        } else {
            map[c] = Some(classes.len());
            classes.push(cl.clone());
        }
    }
    (classes, map, start)
}

fn first_arrow(p: &Problem) -> Result<&Solid, ReduceError> {
    p.solid.first().ok_or_else(|| pre("problem is minimal"))
}

fn require_delta_zero(p: &Problem) -> Result<(), ReduceError> {
    if p.linear_part(0).is_empty() {
        Ok(())
    } else {
        Err(pre("the first differential is not zero"))
    }
}

pub fn localization_layout(p: &Problem, class: usize, c: &UniPoly) -> Result<Layout, ReduceError> {
    let cl = p.classes.get(class).ok_or_else(|| pre("unknown class"))?;
    let Ring::Param { var: v, forbidden } = &cl.ring else { return Err(pre("localization needs a parameter class")) };
    if c.degree().unwrap_or(0) == 0 {
        return Err(pre("localizing polynomial must be nonconstant"));
    }
    let mut forbidden = forbidden.clone();
    for f in irreducible_factors(c) {
        if !forbidden.contains(&f) {
            forbidden.push(f);
        }
    }
    let mut lay = identity_layout(p);
    lay.classes[class].ring = Ring::Param { var: v.clone(), forbidden };
    lay.lx.insert(class, BTreeMap::from([((0, 0), var())]));
    Ok(lay)
}

/// Monic factors: the rational linear factors and the remaining cofactor.
pub fn irreducible_factors(c: &UniPoly) -> Vec<UniPoly> {
    let mut rest = c.monic();
    let mut out = Vec::new();
    for r in c.rational_roots() {
        let f = UniPoly::x_minus(&r);
        while rest.degree().unwrap_or(0) > 0 {
            let (qt, rm) = rest.div_rem(&f);
            if !rm.is_zero() {
                break;
            }
            rest = qt;
        }
        out.push(f);
    }
    if rest.degree().unwrap_or(0) > 0 {
        out.push(rest.monic());
    }
    out
}

pub fn loop_mutation_layout(p: &Problem) -> Result<Layout, ReduceError> {
    let a = first_arrow(p)?;
    if a.source != a.target || !p.classes[a.source].ring.is_trivial() {
        return Err(pre("loop mutation needs a loop at a trivial class"));
    }
    require_delta_zero(p)?;
    let mut lay = identity_layout(p);
    lay.classes[a.source].ring = Ring::param("x");
    lay.la1 = Some(BTreeMap::from([((0, 0), var())]));
    Ok(lay)
}

pub fn deletion_layout(p: &Problem, keep: &[bool]) -> Result<Layout, ReduceError> {
    if keep.len() != p.classes.len() {
        return Err(pre("keep mask has the wrong length"));
    }
    let mut classes = Vec::new();
    let mut slots = Vec::new();
    let mut lx = BTreeMap::new();
    for (c, cl) in p.classes.iter().enumerate() {
        if keep[c] {
            slots.push(vec![classes.len()]);
            if !cl.ring.is_trivial() {
                lx.insert(c, BTreeMap::from([((0, 0), var())]));
            }
            classes.push(cl.clone());
        } else {
            slots.push(Vec::new());
        }
    }
    Ok(Layout { classes, slots, lx, la1: None, f_labels: FLabels::Loop })
}

/// Slots `(i, j, l)` ordered by eigenvalue, then level `l`, then block size
/// descending; `jordan[i]` gives the multiplicity `e_ij` of blocks of size `j`.
fn weyr_slots(jordan: &[(Q, Vec<usize>)], keep_zero: bool) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for (i, (_, counts)) in jordan.iter().enumerate() {
        let d = counts.len();
        for l in 1..=d {
            for j in (l..=d).rev() {
                if keep_zero || counts[j - 1] > 0 {
                    out.push((i, j, l));
                }
            }
        }
    }
    out
}

/// New classes `Z_ij` for the given slots, and the slot matrix `W̄`.
fn weyr_layout_parts(p: &Problem, jordan: &[(Q, Vec<usize>)], slots: &[(usize, usize, usize)], gone: &[usize]) -> (Vec<VertexClass>, Vec<(usize, usize)>, SlotMat) {
    let mut ij: Vec<(usize, usize)> = slots.iter().map(|s| (s.0, s.1)).collect::<BTreeSet<_>>().into_iter().collect();
    ij.sort();
    let taken: Vec<VertexClass> = p.classes.iter().enumerate().filter(|(c, _)| !gone.contains(c)).map(|x| x.1.clone()).collect();
    let mut fresh: Vec<VertexClass> = Vec::new();
    for &(i, j) in &ij {
        let mut all = taken.clone();
        all.extend(fresh.iter().cloned());
        let base = if ij.len() == 1 { "Z".to_string() } else { format!("Z{}{}", i + 1, j) };
        fresh.push(VertexClass { name: unique_name(&all, &base), ring: Ring::Trivial });
    }
    let mut w: SlotMat = BTreeMap::new();
    for (s, &(i, j, l)) in slots.iter().enumerate() {
        if !jordan[i].0.is_zero() {
            w.insert((s, s), constant(jordan[i].0.clone()));
        }
        if let Some(t) = slots.iter().position(|&x| x == (i, j, l + 1)) {
            w.insert((s, t), UniPoly::one());
        }
    }
    (fresh, ij, w)
}

/// Loop mutation, unraveling and deletion in one step: the loop `a_1` at a
/// trivial class takes the Weyr matrix of `jd`.
pub fn loop_reduction_layout(p: &Problem, jd: &JordanData) -> Result<Layout, ReduceError> {
    let a = first_arrow(p)?;
    let x = a.source;
    if a.source != a.target || !p.classes[x].ring.is_trivial() {
        return Err(pre("loop reduction needs a loop at a trivial class"));
    }
    require_delta_zero(p)?;
    if jd.eigen.is_empty() {
        return Err(pre("empty Jordan data"));
    }
    let slots = weyr_slots(&jd.eigen, false);
    let (fresh, ij, w) = weyr_layout_parts(p, &jd.eigen, &slots, &[x]);
    let (classes, map, start) = splice(p, &[x], fresh);
    let slot_lists = (0..p.classes.len())
        .map(|c| {
            if c == x {
                slots.iter().map(|s| start + ij.iter().position(|k| *k == (s.0, s.1)).unwrap()).collect()
            } else {
                vec![map[c].unwrap()]
            }
        })
        .collect();
    let lx = param_identity(p, &map);
    Ok(Layout { classes, slots: slot_lists, lx, la1: Some(w), f_labels: FLabels::Loop })
}

fn param_identity(p: &Problem, map: &[Option<usize>]) -> BTreeMap<usize, SlotMat> {
    (0..p.classes.len())
        .filter(|&c| map[c].is_some() && !p.classes[c].ring.is_trivial())
        .map(|c| (c, BTreeMap::from([((0, 0), var())])))
        .collect()
}

/// Unraveling of a parameter class at the eigenvalues `lambdas` up to
/// block size `depth`; with `keep` the generic part survives as a class
/// with the eigenvalues made forbidden.
pub fn unraveling_layout(p: &Problem, class: usize, lambdas: &[Q], depth: usize, keep: bool) -> Result<Layout, ReduceError> {
    let cl = p.classes.get(class).ok_or_else(|| pre("unknown class"))?;
    let Ring::Param { var: v, forbidden } = &cl.ring else { return Err(pre("unraveling needs a parameter class")) };
    if depth == 0 || lambdas.is_empty() {
        return Err(pre("unraveling needs eigenvalues and a positive depth"));
    }
    let mut ls: Vec<Q> = lambdas.to_vec();
    ls.sort();
    ls.dedup();
    for l in &ls {
        if forbidden.iter().any(|f| f.eval(l).is_zero()) {
            return Err(ReduceError::NonRegularEigenvalue(l.clone()));
        }
    }
    let jordan: Vec<(Q, Vec<usize>)> = ls.iter().map(|l| (l.clone(), vec![1; depth])).collect();
    let slots = weyr_slots(&jordan, true);
    let (mut fresh, ij, mut w) = weyr_layout_parts(p, &jordan, &slots, &[class]);
    let n_ij = fresh.len();
    let mut slot_classes: Vec<usize> = slots.iter().map(|s| ij.iter().position(|k| *k == (s.0, s.1)).unwrap()).collect();
    if keep {
        let mut f = forbidden.clone();
        for l in &ls {
            let g = UniPoly::x_minus(l);
            if !f.contains(&g) {
                f.push(g);
            }
        }
        let mut all = p.classes.clone();
        all.extend(fresh.iter().cloned());
        fresh.push(VertexClass { name: unique_name(&all, "Z0"), ring: Ring::Param { var: v.clone(), forbidden: f } });
        w.insert((slots.len(), slots.len()), var());
        slot_classes.push(n_ij);
    }
    let (classes, map, start) = splice(p, &[class], fresh);
    let slot_lists = (0..p.classes.len()).map(|c| if c == class { slot_classes.iter().map(|z| start + z).collect() } else { vec![map[c].unwrap()] }).collect();
    let mut lx = param_identity(p, &map);
    lx.insert(class, w);
    Ok(Layout { classes, slots: slot_lists, lx, la1: None, f_labels: FLabels::Loop })
}

/// Edge reduction with the deletions dictated by `case`.
pub fn edge_layout(p: &Problem, case: EdgeCase) -> Result<Layout, ReduceError> {
    let a = first_arrow(p)?;
    let (x, y) = (a.source, a.target);
    if x == y || !p.classes[x].ring.is_trivial() || !p.classes[y].ring.is_trivial() {
        return Err(pre("edge reduction needs an arrow between distinct trivial classes"));
    }
    require_delta_zero(p)?;
    // which of Z1, Z2, Z3 survive
    let present = match case {
        EdgeCase::Zero => [true, false, true],
        EdgeCase::Full => [false, true, false],
        EdgeCase::LeftFull => [false, true, true],
        EdgeCase::RightFull => [true, true, false],
        EdgeCase::General => [true, true, true],
    };
    let taken: Vec<VertexClass> = p.classes.iter().enumerate().filter(|(c, _)| *c != x && *c != y).map(|x| x.1.clone()).collect();
    let mut fresh = Vec::new();
    let mut tag_of = Vec::new();
    let mut pos = [usize::MAX; 3];
    for k in 0..3 {
        if present[k] {
            let base = if case == EdgeCase::Full { "Z".to_string() } else { format!("Z{}", k + 1) };
            let mut all = taken.clone();
            all.extend(fresh.iter().cloned());
            pos[k] = fresh.len();
            fresh.push(VertexClass { name: unique_name(&all, &base), ring: Ring::Trivial });
            tag_of.push(k + 1);
        }
    }
    let (classes, map, start) = splice(p, &[x, y], fresh);
    let z = |k: usize| start + pos[k];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    if present[1] {
        xs.push(z(1));
    }
    if present[0] {
        xs.push(z(0));
    }
    if present[2] {
        ys.push(z(2));
    }
    if present[1] {
        ys.push(z(1));
    }
    let mut la1 = BTreeMap::new();
    if present[1] {
        la1.insert((0, ys.len() - 1), UniPoly::one());
    }
    let mut tags = vec![0; classes.len()];
    for (k, t) in tag_of.iter().enumerate() {
        tags[start + k] = *t;
    }
    let slots = (0..p.classes.len())
        .map(|c| if c == x { xs.clone() } else if c == y { ys.clone() } else { vec![map[c].unwrap()] })
        .collect();
    Ok(Layout { classes, slots, lx: param_identity(p, &map), la1: Some(la1), f_labels: FLabels::Edge(tags) })
}

/// `a_1 ↦ 0`.
pub fn zero_arrow_layout(p: &Problem) -> Result<Layout, ReduceError> {
    first_arrow(p)?;
    require_delta_zero(p)?;
    let mut lay = identity_layout(p);
    let map: Vec<Option<usize>> = (0..p.classes.len()).map(Some).collect();
    lay.lx = param_identity(p, &map);
    lay.la1 = Some(BTreeMap::new());
    Ok(lay)
}

/// `a_1 ↦ (1)`, merging its two end classes. With a parameter class at
/// either end, `experimental` must be set.
pub fn identity_arrow_layout(p: &Problem, experimental: bool) -> Result<Layout, ReduceError> {
    let a = first_arrow(p)?;
    let (x, y) = (a.source, a.target);
    if x == y {
        return Err(pre("identity reduction needs distinct end classes"));
    }
    require_delta_zero(p)?;
    let (tx, ty) = (p.classes[x].ring.is_trivial(), p.classes[y].ring.is_trivial());
    if tx != ty {
        return Err(ReduceError::Unsupported("identity reduction between a trivial and a parameter class"));
    }
    if !tx && !experimental {
        return Err(pre("identity reduction at parameter classes is experimental"));
    }
    if !tx && p.classes[x].ring != p.classes[y].ring {
        return Err(pre("identity reduction needs equal rings at both ends"));
    }
    let taken: Vec<VertexClass> = p.classes.iter().enumerate().filter(|(c, _)| *c != x && *c != y).map(|x| x.1.clone()).collect();
    let fresh = vec![VertexClass { name: unique_name(&taken, "Z"), ring: p.classes[x].ring.clone() }];
    let (classes, map, start) = splice(p, &[x, y], fresh);
    let slots = (0..p.classes.len()).map(|c| if c == x || c == y { vec![start] } else { vec![map[c].unwrap()] }).collect();
    let mut lx = param_identity(p, &map);
    if !tx {
        lx.insert(x, BTreeMap::from([((0, 0), var())]));
        lx.insert(y, BTreeMap::from([((0, 0), var())]));
    }
    Ok(Layout { classes, slots, lx, la1: Some(BTreeMap::from([((0, 0), UniPoly::one())])), f_labels: FLabels::Loop })
}

fn split_label(l: &Label, np: usize, nq: usize, p: usize, q: usize) -> Label {
    if np == 1 && nq == 1 {
        l.clone()
    } else {
        l.split(p + 1, q + 1)
    }
}

/// The induced problem along a layout.
pub fn induce(p: &Problem, lay: &Layout) -> Result<Problem, ReduceError> {
    let nc = p.classes.len();
    if lay.slots.len() != nc {
        return Err(pre("layout has the wrong number of classes"));
    }
    if lay.slots.iter().flatten().any(|&z| z >= lay.classes.len()) {
        return Err(pre("slot refers to an unknown class"));
    }
    let a1 = if lay.la1.is_some() { Some(first_arrow(p)?.clone()) } else { None };
    // variable action per old parameter class
    let mut lx: BTreeMap<usize, SlotMat> = BTreeMap::new();
    for c in 0..nc {
        if p.classes[c].ring.is_trivial() {
            continue;
        }
        match lay.lx.get(&c) {
            Some(m) => {
                lx.insert(c, m.clone());
            }
            None if lay.slots[c].len() == 1 && !lay.classes[lay.slots[c][0]].ring.is_trivial() => {
                lx.insert(c, BTreeMap::from([((0, 0), var())]));
            }
            None if lay.slots[c].is_empty() => {
                lx.insert(c, BTreeMap::new());
            }
            None => return Err(pre("parameter class without a variable action")),
        }
    }
    let trivial_slot = |c: usize, s: usize| lay.classes[lay.slots[c][s]].ring.is_trivial();

    let mut idx: Vec<Vec<usize>> = vec![Vec::new(); p.t()];
    let mut class_of = Vec::new();
    let mut origin = Vec::new();
    for i in 0..p.t() {
        for &z in &lay.slots[p.class_of[i]] {
            idx[i].push(class_of.len());
            class_of.push(z);
            origin.push(p.origin[i]);
        }
    }

    // F': strictly upper slot endomorphisms commuting with the layout
    let mut vars: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    for c in 0..nc {
        let n = lay.slots[c].len();
        for s in 0..n {
            for t in s + 1..n {
                if trivial_slot(c, s) && trivial_slot(c, t) {
                    let k = vars.len();
                    vars.insert((c, s, t), k);
                }
            }
        }
    }
    let constant_at = |m: &SlotMat, i: usize, j: usize| -> Q { m.get(&(i, j)).and_then(|x| x.as_constant()).unwrap_or_else(Q::zero) };
    let mut eqs = SparseEchelon::new();
    let mut relations: Vec<(usize, usize, &SlotMat)> = lx.iter().map(|(c, m)| (*c, *c, m)).collect();
    if let (Some(l), Some(a)) = (&lay.la1, &a1) {
        relations.push((a.source, a.target, l));
    }
    for (cx, cy, l) in relations {
        let (nx, ny) = (lay.slots[cx].len(), lay.slots[cy].len());
        for s in 0..nx {
            for t in 0..ny {
                if !trivial_slot(cx, s) || !trivial_slot(cy, t) {
                    continue;
                }
                let mut row: BTreeMap<usize, Q> = BTreeMap::new();
                // (F_X L − L F_Y)(s, t)
                for k in 0..nx {
                    if let Some(&v) = vars.get(&(cx, s, k)) {
                        let c = constant_at(l, k, t);
                        if !c.is_zero() {
                            *row.entry(v).or_insert_with(Q::zero) += c;
                        }
                    }
                }
                for k in 0..ny {
                    if let Some(&v) = vars.get(&(cy, k, t)) {
                        let c = constant_at(l, s, k);
                        if !c.is_zero() {
                            *row.entry(v).or_insert_with(Q::zero) -= c;
                        }
                    }
                }
                eqs.insert(row);
            }
        }
    }
    let null = eqs.nullspace(vars.len());
    let var_list: Vec<(usize, usize, usize)> = {
        let mut v: Vec<_> = vars.iter().map(|(k, i)| (*i, *k)).collect();
        v.sort();
        v.into_iter().map(|x| x.1).collect()
    };
    let pair_of = |&(c, s, t): &(usize, usize, usize)| (lay.slots[c][s], lay.slots[c][t]);
    let pairs: BTreeSet<(usize, usize)> = var_list.iter().map(pair_of).collect();
    let mut f_gens: Vec<((usize, usize), Vec<Q>)> = Vec::new();
    for pair in pairs {
        let cols: Vec<usize> = (0..var_list.len()).filter(|&k| pair_of(&var_list[k]) == pair).collect();
        let rows: Vec<Vec<Q>> = null.iter().map(|v| cols.iter().map(|&k| v[k].clone()).collect::<Vec<Q>>()).filter(|r| r.iter().any(|x| !x.is_zero())).collect();
        if rows.is_empty() {
            continue;
        }
        let rr = RatMatrix::from_rows(rows).rref();
        for r in 0..rr.pivots.len() {
            let mut full = vec![Q::zero(); var_list.len()];
            for (k, &col) in cols.iter().enumerate() {
                full[col] = rr.reduced.get(r, k).clone();
            }
            f_gens.push((pair, full));
        }
    }
    let mut dotted = Vec::new();
    let total_f = f_gens.len();
    for (n, ((zs, zt), coeffs)) in f_gens.into_iter().enumerate() {
        let mut entries = BTreeMap::new();
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (cl, s, t) = var_list[k];
            for i in p.class_indices(cl) {
                entries.insert((idx[i][s], idx[i][t]), LocalizedElem::constant(c.clone()));
            }
        }
        let label = match &lay.f_labels {
            FLabels::Loop if total_f == 1 => Label::new("v"),
            FLabels::Loop => Label::indexed("v", n + 1),
            FLabels::Edge(tags) => Label { stem: "f".into(), index: Some(format!("{}{}", tags[zs], tags[zt])), splits: Vec::new() },
        };
        dotted.push(Dotted { label, source: zs, target: zt, entries });
    }

    // U': splits of the old dotted generators
    let mut powers: BTreeMap<usize, Vec<SlotMat>> = BTreeMap::new();
    let mut power = |c: usize, k: usize| -> SlotMat {
        let n = lay.slots[c].len();
        let list = powers.entry(c).or_insert_with(|| vec![slot_identity(n)]);
        while list.len() <= k {
            let next = slot_mul(list.last().unwrap(), &lx[&c]);
            list.push(next);
        }
        list[k].clone()
    };
    for v in &p.dotted {
        let (cx, cy) = (v.source, v.target);
        let (nx, ny) = (lay.slots[cx].len(), lay.slots[cy].len());
        for s in 0..nx {
            for t in 0..ny {
                let mut entries: BTreeMap<(usize, usize), LocalizedElem> = BTreeMap::new();
                for (&(r, c), e) in &v.entries {
                    let block = substitute(e, cx, cy, s, t, lay, &lx, &mut power)?;
                    for ((s2, t2), x) in block {
                        entries.insert((idx[r][s2], idx[c][t2]), x);
                    }
                }
                if entries.is_empty() {
                    continue;
                }
                dotted.push(Dotted { label: split_label(&v.label, nx, ny, s, t), source: lay.slots[cx][s], target: lay.slots[cy][t], entries });
            }
        }
    }

    // M': splits of the remaining solid generators
    let mut solid = Vec::new();
    let skip = usize::from(a1.is_some());
    for a in p.solid.iter().skip(skip) {
        let (nx, ny) = (lay.slots[a.source].len(), lay.slots[a.target].len());
        for s in 0..nx {
            for t in 0..ny {
                let entries: BTreeMap<(usize, usize), Q> = a.entries.iter().map(|(&(r, c), x)| ((idx[r][s], idx[c][t]), x.clone())).collect();
                solid.push(Solid::new(split_label(&a.label, nx, ny, s, t), entries, &class_of));
            }
        }
    }
    solid.sort_by(|a, b| position_cmp(a.lead, b.lead));

    // H' = Σ H_X(L_X(x)) + L(a_1) ∗ A_1
    let mut h: BTreeMap<(usize, usize), UniPoly> = BTreeMap::new();
    let add = |h: &mut BTreeMap<(usize, usize), UniPoly>, pos: (usize, usize), x: UniPoly| {
        let e = h.entry(pos).or_insert_with(UniPoly::zero);
        *e = e.add(&x);
    };
    for (&(r, c), x) in &p.h {
        let cl = p.class_of[r];
        let n = lay.slots[cl].len();
        let block = match lx.get(&cl) {
            Some(l) => slot_poly(x, l, n),
            None => {
                let k = x.as_constant().ok_or_else(|| pre("polynomial H entry at a trivial class"))?;
                (0..n).map(|s| ((s, s), constant(k.clone()))).collect()
            }
        };
        for ((s, t), y) in block {
            add(&mut h, (idx[r][s], idx[c][t]), y);
        }
    }
    if let (Some(l), Some(a)) = (&lay.la1, &a1) {
        for (&(r, c), x) in &a.entries {
            for (&(s, t), y) in l {
                add(&mut h, (idx[r][s], idx[c][t]), y.scale(x));
            }
        }
    }
    h.retain(|_, x| !x.is_zero());

    Ok(Problem { classes: lay.classes.clone(), class_of, dotted, solid, h, origin })
}

/// Block of `e(L_X, L_Y)` applied to the slot unit `E_st`.
fn substitute(
    e: &LocalizedElem,
    cx: usize,
    cy: usize,
    s: usize,
    t: usize,
    lay: &Layout,
    lx: &BTreeMap<usize, SlotMat>,
    power: &mut impl FnMut(usize, usize) -> SlotMat,
) -> Result<Vec<((usize, usize), LocalizedElem)>, ReduceError> {
    if let Some(c) = e.as_constant() {
        return Ok(vec![((s, t), LocalizedElem::constant(c))]);
    }
    let mut out: BTreeMap<(usize, usize), LocalizedElem> = BTreeMap::new();
    for (exp, coef) in e.num().terms() {
        let left = if exp[0] > 0 { power(cx, exp[0] as usize) } else { slot_identity(lay.slots[cx].len()) };
        let right = if exp[1] > 0 { power(cy, exp[1] as usize) } else { slot_identity(lay.slots[cy].len()) };
        for (&(s2, k), a) in &left {
            if k != s {
                continue;
            }
            for (&(k2, t2), b) in &right {
                if k2 != t {
                    continue;
                }
                let term: LocalizedElem = a.embed::<2>([0]).mul(&b.embed::<2>([1])).scale(coef).into();
                let x = out.entry((s2, t2)).or_insert_with(LocalizedElem::zero);
                *x = x.add(&term);
            }
        }
    }
    // denominators: only through a one-slot action
    for (slot, c) in [(0usize, cx), (1usize, cy)] {
        for (f, k) in e.den(slot) {
            let l = &lx[&c];
            if lay.slots[c].len() != 1 {
                return Err(ReduceError::Unsupported("denominator through a multi-slot action"));
            }
            let g = l.get(&(0, 0)).cloned().unwrap_or_else(UniPoly::zero);
            let fg = compose_uni(f, &g);
            if fg.degree().unwrap_or(0) == 0 {
                return Err(ReduceError::Unsupported("denominator collapses to a constant"));
            }
            for x in out.values_mut() {
                *x = x.clone().with_den(slot, &fg, *k);
            }
        }
    }
    Ok(out.into_iter().filter(|(_, x)| !x.is_zero()).collect())
}

/// Result of regularization at the first solid generator.
#[derive(Clone, Debug)]
pub struct Regularized {
    pub problem: Problem,
    pub step: ReductionStep,
    /// Dotted generator (before the step) whose image clears `a_1`, already
    /// divided by its pivot coefficient.
    pub clearing: Dotted,
}

/// Removes `a_1` and the pivot dotted generator when the linear part of
/// `δ(a_1)` has an invertible coefficient.
pub fn regularize(p: &Problem) -> Result<Regularized, ReduceError> {
    first_arrow(p)?;
    let lin = p.linear_part(0);
    if lin.is_empty() {
        return Err(pre("the first differential is zero"));
    }
    let forb = |j: usize| [p.forbidden(p.dotted[j].source), p.forbidden(p.dotted[j].target)];
    let Some((j0, f0)) = lin.iter().find(|(j, f)| f.is_invertible(&forb(*j))).cloned() else {
        return Err(ReduceError::NotRegularizable { coeffs: lin });
    };
    let inv = f0.inverse(&forb(j0)).ok_or(ReduceError::Unsupported("pivot inverse"))?;
    let pivot = &p.dotted[j0];
    let mut dotted = Vec::new();
    let mut relation = Vec::new();
    for (j, v) in p.dotted.iter().enumerate() {
        if j == j0 {
            continue;
        }
        let Some((_, fj)) = lin.iter().find(|(k, _)| *k == j) else {
            dotted.push(v.clone());
            continue;
        };
        let ratio = fj.mul(&inv);
        relation.push((j, ratio.neg()));
        let mut entries = v.entries.clone();
        for (pos, e) in &pivot.entries {
            let x = entries.entry(*pos).or_insert_with(LocalizedElem::zero);
            *x = x.sub(&ratio.mul(e));
        }
        entries.retain(|_, x| !x.is_zero());
        dotted.push(Dotted { entries, ..v.clone() });
    }
    let clearing = Dotted { entries: pivot.entries.iter().map(|(k, e)| (*k, e.mul(&inv))).collect(), ..pivot.clone() };
    let problem = Problem { dotted, solid: p.solid[1..].to_vec(), ..p.clone() };
    let step = ReductionStep { kind: StepKind::Regularization, layout: None, pivot: Some((j0, f0)), relation, localized: Vec::new() };
    Ok(Regularized { problem, step, clearing })
}

/// Regularization, first localizing the end class of a pivot whose
/// coefficient is a univariate polynomial in a parameter variable.
pub fn regularize_localizing(p: &Problem) -> Result<(Vec<ReductionStep>, Regularized), ReduceError> {
    match regularize(p) {
        Err(ReduceError::NotRegularizable { coeffs }) => {
            for (j, f) in &coeffs {
                let v = &p.dotted[*j];
                let num = f.num();
                let class = if !num.uses_var(1) { v.source } else if !num.uses_var(0) { v.target } else { continue };
                if p.classes[class].ring.is_trivial() {
                    continue;
                }
                let uni: UniPoly = num.embed::<1>([0, 0]);
                let uni = if uni.degree().unwrap_or(0) == 0 { continue } else { uni };
                let lay = localization_layout(p, class, &uni)?;
                let lp = induce(p, &lay)?;
                let mut reg = regularize(&lp)?;
                let factors: Vec<(usize, UniPoly)> = irreducible_factors(&uni).into_iter().map(|u| (class, u)).collect();
                reg.step.localized = factors.clone();
                let step = ReductionStep { kind: StepKind::Localization(uni.monic()), layout: Some(lay), pivot: None, relation: Vec::new(), localized: factors };
                return Ok((vec![step], reg));
            }
            Err(ReduceError::NotRegularizable { coeffs })
        }
        other => other.map(|r| (Vec::new(), r)),
    }
}

/// Changes the dotted basis by a constant invertible matrix `F`: new
/// dotted symbols `v' = vF`, new matrices `V' = V F^{-T}`.
pub fn base_change_dotted(p: &Problem, f: &RatMatrix) -> Result<Problem, ReduceError> {
    let n = p.dotted.len();
    if f.shape() != (n, n) {
        return Err(pre("transform has the wrong shape"));
    }
    let g = f.inverse().ok_or_else(|| pre("transform is not invertible"))?.transpose();
    let mut dotted = Vec::new();
    for k in 0..n {
        // V'_k = Σ_j V_j g[j][k]
        let mut entries: BTreeMap<(usize, usize), LocalizedElem> = BTreeMap::new();
        let mut ends = None;
        for j in 0..n {
            let c = g.get(j, k);
            if c.is_zero() {
                continue;
            }
            let v = &p.dotted[j];
            match ends {
                None => ends = Some((v.source, v.target)),
                Some(e) if e != (v.source, v.target) => return Err(pre("transform mixes class pairs")),
                _ => {}
            }
            for (pos, e) in &v.entries {
                let x = entries.entry(*pos).or_insert_with(LocalizedElem::zero);
                *x = x.add(&e.scale(c));
            }
        }
        entries.retain(|_, x| !x.is_zero());
        let (source, target) = ends.unwrap();
        let label = if f.column(k).iter().enumerate().all(|(j, x)| x.is_zero() || j == k) && f.get(k, k).is_one() { p.dotted[k].label.clone() } else { Label { stem: format!("{}'", p.dotted[k].label.stem), ..p.dotted[k].label.clone() } };
        dotted.push(Dotted { label, source, target, entries });
    }
    Ok(Problem { dotted, ..p.clone() })
}

/// Reads a matrix at the given sizes back as a representation of `p`,
/// checking that it has the form `H(W) + Σ X_i ∗ A_i`.
pub fn read_rep(p: &Problem, sizes: &[usize], weyr: &BTreeMap<usize, RatMatrix>, big: &RatMatrix) -> Result<Representation, ReduceError> {
    let off = p.offsets(sizes);
    if big.shape() != (off[p.t()], off[p.t()]) {
        return Err(ReduceError::NotInForm(format!("expected order {}", off[p.t()])));
    }
    let rest = big.sub(&p.h_matrix(sizes, weyr));
    let blocks = p.solid.iter().map(|a| rest.block(off[a.lead.0], off[a.lead.1], sizes[a.source], sizes[a.target])).collect();
    let rep = Representation { sizes: sizes.to_vec(), weyr: weyr.clone(), blocks };
    if rep_matrix(p, &rep)? != *big {
        return Err(ReduceError::NotInForm("entries outside the solid span".into()));
    }
    Ok(rep)
}

/// Transports a representation of the induced problem back along the step.
pub fn transport_rep(old: &Problem, new: &Problem, step: &ReductionStep, rep: &Representation) -> Result<Representation, ReduceError> {
    let big = rep_matrix(new, rep)?;
    let Some(lay) = &step.layout else {
        // regularization: the same matrix with a zero block at a_1
        return read_rep(old, &rep.sizes, &rep.weyr, &big);
    };
    let sizes = transport_size(lay, &rep.sizes);
    let mut weyr = BTreeMap::new();
    for (c, cl) in old.classes.iter().enumerate() {
        if cl.ring.is_trivial() {
            continue;
        }
        let l = lay.lx.get(&c).cloned().unwrap_or_else(|| BTreeMap::from([((0, 0), var())]));
        weyr.insert(c, slot_eval(&l, &lay.slots[c], &lay.slots[c], &rep.sizes, &rep.weyr, &new.classes));
    }
    read_rep(old, &sizes, &weyr, &big)
}

/// Summary of the defining system of a problem reached from `root`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefiningSystem {
    pub variables: usize,
    pub equations: usize,
    /// Nullity of the equations at positions before the first lead.
    pub solution_dim: usize,
    /// Number of classes plus dotted generators of the current problem.
    pub expected_dim: usize,
    /// Whether the equation at the first lead depends on the earlier ones.
    pub lead_dependent: bool,
}

/// Sizes of the root classes read off the origin map of a descendant.
pub fn root_sizes(root: &Problem, cur: &Problem) -> Vec<usize> {
    (0..root.classes.len())
        .map(|c| {
            let i = root.class_indices(c)[0];
            cur.origin.iter().filter(|&&o| o == i).count()
        })
        .collect()
}

/// Builds `Φ H(k) ≡ H(k) Φ` at the positions before the lead of the first
/// solid generator of `cur`, with `Φ` ranging over the dotted span of
/// `root` at the sizes `cur` induces.
pub fn solve_defining_system(root: &Problem, cur: &Problem) -> Result<DefiningSystem, ReduceError> {
    if !root.all_trivial() || !cur.all_trivial() {
        return Err(ReduceError::Unsupported("defining systems with parameter classes"));
    }
    let sizes = root_sizes(root, cur);
    let off = root.offsets(&sizes);
    let n = cur.t();
    if off[root.t()] != n {
        return Err(pre("problem does not descend from the root"));
    }
    let hm = cur.h_matrix(&vec![1; cur.classes.len()], &BTreeMap::new());
    // Φ entries as sparse linear forms
    let mut phi: BTreeMap<(usize, usize), BTreeMap<usize, Q>> = BTreeMap::new();
    let mut nv = 0;
    let mut class_var: BTreeMap<usize, usize> = BTreeMap::new();
    for (c, &m) in sizes.iter().enumerate() {
        class_var.insert(c, nv);
        nv += m * m;
    }
    for i in 0..root.t() {
        let c = root.class_of[i];
        let m = sizes[c];
        for a in 0..m {
            for b in 0..m {
                phi.entry((off[i] + a, off[i] + b)).or_default().insert(class_var[&c] + a * m + b, Q::one());
            }
        }
    }
    for v in &root.dotted {
        let (ms, mt) = (sizes[v.source], sizes[v.target]);
        let base = nv;
        nv += ms * mt;
        for (&(r, c), e) in &v.entries {
            let k = e.as_constant().ok_or(ReduceError::Unsupported("polynomial dotted entries at the root"))?;
            for a in 0..ms {
                for b in 0..mt {
                    let x = phi.entry((off[r] + a, off[c] + b)).or_default().entry(base + a * mt + b).or_insert_with(Q::zero);
                    *x += &k;
                }
            }
        }
    }
    let hnz: Vec<((usize, usize), Q)> = hm.nonzeros().map(|(p, x)| (p, x.clone())).collect();
    let equation = |p: usize, q: usize| -> BTreeMap<usize, Q> {
        let mut row: BTreeMap<usize, Q> = BTreeMap::new();
        for ((k, c), x) in &hnz {
            if *c == q {
                if let Some(f) = phi.get(&(p, *k)) {
                    for (v, a) in f {
                        *row.entry(*v).or_insert_with(Q::zero) += a * x;
                    }
                }
            }
            if *k == p {
                if let Some(f) = phi.get(&(*c, q)) {
                    for (v, a) in f {
                        *row.entry(*v).or_insert_with(Q::zero) -= a * x;
                    }
                }
            }
        }
        row.retain(|_, x| !x.is_zero());
        row
    };
    let lead = cur.solid.first().map(|a| a.lead);
    // refinement can move an already reduced block past the new lead, so
    // every position outside the remaining solid support stays in the system
    let open: BTreeSet<(usize, usize)> = cur.solid.iter().flat_map(|a| a.entries.keys().copied()).collect();
    let mut ech = SparseEchelon::new();
    let mut count = 0;
    for p in 0..n {
        for q in 0..n {
            let before = match lead {
                Some(l) => !open.contains(&(p, q)) || position_cmp((p, q), l) == core::cmp::Ordering::Less,
                None => true,
            };
            if before {
                count += 1;
                ech.insert(equation(p, q));
            }
        }
    }
    let lead_dependent = match lead {
        Some((p, q)) => ech.reduce(equation(p, q)).is_empty(),
        None => true,
    };
    Ok(DefiningSystem {
        variables: nv,
        equations: count,
        solution_dim: nv - ech.rank(),
        expected_dim: cur.classes.len() + cur.dotted.len(),
        lead_dependent,
    })
}

/// Applies a layout step and records it.
pub fn apply_layout(p: &Problem, kind: StepKind, lay: Layout) -> Result<(ReductionStep, Problem), ReduceError> {
    let q = induce(p, &lay)?;
    Ok((ReductionStep { kind, layout: Some(lay), pivot: None, relation: Vec::new(), localized: Vec::new() }, q))
}

pub fn edge_reduction(p: &Problem, case: EdgeCase) -> Result<(ReductionStep, Problem), ReduceError> {
    apply_layout(p, StepKind::EdgeReduction(case), edge_layout(p, case)?)
}

pub fn loop_reduction(p: &Problem, jd: &JordanData) -> Result<(ReductionStep, Problem), ReduceError> {
    apply_layout(p, StepKind::LoopReduction(jd.clone()), loop_reduction_layout(p, jd)?)
}

pub fn loop_mutation(p: &Problem) -> Result<(ReductionStep, Problem), ReduceError> {
    apply_layout(p, StepKind::LoopMutation, loop_mutation_layout(p)?)
}

pub fn localization(p: &Problem, class: usize, c: &UniPoly) -> Result<(ReductionStep, Problem), ReduceError> {
    apply_layout(p, StepKind::Localization(c.monic()), localization_layout(p, class, c)?)
}

pub fn deletion(p: &Problem, keep: &[bool]) -> Result<(ReductionStep, Problem), ReduceError> {
    apply_layout(p, StepKind::Deletion, deletion_layout(p, keep)?)
}

pub fn unraveling(p: &Problem, class: usize, lambdas: &[Q], depth: usize, keep: bool) -> Result<(ReductionStep, Problem), ReduceError> {
    let kind = StepKind::Unraveling { eigenvalues: lambdas.to_vec(), depth, keep_parameter: keep };
    apply_layout(p, kind, unraveling_layout(p, class, lambdas, depth, keep)?)
}

pub fn zero_arrow_reduction(p: &Problem) -> Result<(ReductionStep, Problem), ReduceError> {
    apply_layout(p, StepKind::ZeroArrow, zero_arrow_layout(p)?)
}

pub fn identity_arrow_reduction(p: &Problem, experimental: bool) -> Result<(ReductionStep, Problem), ReduceError> {
    apply_layout(p, StepKind::IdentityArrow, identity_arrow_layout(p, experimental)?)
}

/// Rendering of a regularization substitution, e.g. `u²₂₁=xv`.
pub fn render_relation(p: &Problem, step: &ReductionStep) -> Option<String> {
    let (j0, _) = step.pivot.as_ref()?;
    let terms: Vec<(usize, LocalizedElem)> = step.relation.clone();
    Some(format!("{}={}", p.dotted[*j0].label, crate::problem::render_linear(p, &terms)))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::algebra::{build_based_algebra, build_bipartite_problem, parse_presentation, tests::TWOLOOP};
    use crate::exact::q;
    use alloc::string::ToString;

    pub(crate) fn twoloop() -> Problem {
        build_bipartite_problem(&build_based_algebra(&parse_presentation(TWOLOOP).unwrap()).unwrap())
    }

    fn unit(p: &Problem) -> RatMatrix {
        p.h_matrix(&vec![1; p.classes.len()], &BTreeMap::new())
    }

    fn diffs(p: &Problem) -> Vec<String> {
        let t = p.differentials();
        t.rows.iter().map(|d| p.render_differential(d)).collect()
    }

    fn term_set(s: &str) -> BTreeSet<String> {
        let body = s.split_once('=').unwrap().1;
        let mut out = BTreeSet::new();
        let mut cur = String::new();
        for ch in body.chars() {
            if (ch == '+' || ch == '−') && !cur.is_empty() {
                out.insert(core::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        out.insert(cur);
        out.into_iter().map(|t| if t.starts_with('+') || t.starts_with('−') { t } else { format!("+{t}") }).collect()
    }

    /// Steps (i)-(iii) of the worked local example.
    pub(crate) fn chain() -> Vec<Problem> {
        let p0 = twoloop();
        let (_, p1) = edge_reduction(&p0, EdgeCase::Full).unwrap();
        let (_, p2) = loop_reduction(&p1, &JordanData::from_blocks(q(0), &[2])).unwrap();
        let (_, p3) = loop_mutation(&p2).unwrap();
        vec![p0, p1, p2, p3]
    }

    #[test]
    fn edge_step_h1() {
        let c = chain();
        assert!(c[1].validate().is_empty(), "{:?}", c[1].validate());
        assert_eq!(c[1].classes.len(), 1);
        assert_eq!(c[1].classes[0].name, "Z");
        assert_eq!(unit(&c[1]), c[0].solid[0].matrix(10));
        let labels: Vec<String> = c[1].solid.iter().map(|a| a.label.to_string()).collect();
        assert_eq!(labels, ["b", "c", "d"]);
    }

    #[test]
    fn loop_step_h2() {
        let c = chain();
        assert!(c[2].validate().is_empty(), "{:?}", c[2].validate());
        let a = &c[0].solid[0];
        let b = &c[0].solid[1];
        let mut want = RatMatrix::zeros(20, 20);
        let n = RatMatrix::from_i64(&[&[0, 1], &[0, 0]]);
        for (&(r, s), x) in &a.entries {
            want.add_block(2 * r, 2 * s, &RatMatrix::identity(2), x);
        }
        for (&(r, s), x) in &b.entries {
            want.add_block(2 * r, 2 * s, &n, x);
        }
        assert_eq!(unit(&c[2]), want);
        let labels: Vec<String> = c[2].solid.iter().map(|a| a.label.to_string()).collect();
        assert_eq!(labels[..4], ["c₂₁", "c₂₂", "c₁₁", "c₁₂"]);
        assert_eq!(c[2].dotted[0].label.to_string(), "v");
        assert_eq!(c[2].dotted.iter().filter(|v| v.label.stem == "v" && v.label.index.is_none()).count(), 1);
    }

    #[test]
    fn mutation_and_regularizations() {
        let mut cur = chain().pop().unwrap();
        assert!(cur.validate().is_empty(), "{:?}", cur.validate());
        assert!(!cur.classes[0].ring.is_trivial());
        let mut rels = Vec::new();
        for _ in 0..3 {
            let r = regularize(&cur).unwrap();
            rels.push(render_relation(&cur, &r.step).unwrap());
            cur = r.problem;
            assert!(cur.validate().is_empty(), "{:?}", cur.validate());
        }
        assert_eq!(rels, ["u²₂₁=xv", "v²₂₁=vx", "u²₁₁=v²₂₂"]);
        let got: Vec<BTreeSet<String>> = diffs(&cur).iter().take(4).map(|s| term_set(s)).collect();
        // the displayed third line still uses u²₁₁, eliminated by u²₁₁ = v²₂₂
        let want = [
            "δ(d₂₁)=xv−vx",
            "δ(d₂₂)=u¹₂₁+u²₂₂−v²₂₂−d₂₁v",
            "δ(d₁₁)=v²₂₂−v²₁₁−v¹₂₁+vd₂₁",
            "δ(d₁₂)=u¹₁₁+u²₁₂−v²₁₂−v¹₂₂−d₁₁v+vd₂₂",
        ];
        for (g, w) in got.iter().zip(want) {
            assert_eq!(*g, term_set(w), "{w}");
        }
    }

    #[test]
    fn defining_system_agrees() {
        let c = chain();
        for p in &c[..3] {
            let ds = solve_defining_system(&c[0], p).unwrap();
            assert_eq!(ds.solution_dim, ds.expected_dim);
            assert_eq!(ds.lead_dependent, p.linear_part(0).is_empty());
        }
    }

    #[test]
    fn size_maps() {
        let p0 = twoloop();
        let lay = edge_layout(&p0, EdgeCase::General).unwrap();
        // classes Z1, Z2, Z3 in that order
        assert_eq!(transport_size(&lay, &[1, 1, 0]), [2, 1]);
        let (_, p1) = edge_reduction(&p0, EdgeCase::Full).unwrap();
        let lay = loop_reduction_layout(&p1, &JordanData::from_blocks(q(0), &[2])).unwrap();
        assert_eq!(transport_size(&lay, &[1]), [2]);
        let lay = deletion_layout(&p0, &[true, false]).unwrap();
        assert_eq!(transport_size(&lay, &[3]), [3, 0]);
    }

    #[test]
    fn deletion_of_nothing_is_identity() {
        let p0 = twoloop();
        let (_, p) = deletion(&p0, &[true, true]).unwrap();
        assert_eq!(p, p0);
    }

    #[test]
    fn edge_transport_of_unit() {
        let p0 = twoloop();
        for case in [EdgeCase::Zero, EdgeCase::Full, EdgeCase::LeftFull, EdgeCase::RightFull, EdgeCase::General] {
            let (step, p1) = edge_reduction(&p0, case).unwrap();
            assert!(p1.validate().is_empty(), "{case:?}: {:?}", p1.validate());
            let sizes = vec![1; p1.classes.len()];
            let back = transport_rep(&p0, &p1, &step, &Representation::zero(&p1, &sizes)).unwrap();
            let a1 = &p0.solid[0];
            let b = step.b_matrix(&p1, &sizes, &BTreeMap::new(), a1.source, a1.target).unwrap();
            assert_eq!(back.blocks[0], b, "{case:?}");
            assert!(back.blocks[1..].iter().all(|m| m.is_zero()));
        }
    }

    #[test]
    fn unraveling_with_parameter() {
        let p3 = chain().pop().unwrap();
        let (step, p) = unraveling(&p3, 0, &[q(0), q(1)], 2, true).unwrap();
        assert!(p.validate().is_empty(), "{:?}", p.validate());
        let z0 = p.classes.iter().position(|c| !c.ring.is_trivial()).unwrap();
        assert_eq!(p.classes[z0].ring.forbidden().len(), 2);
        // two eigenvalues, blocks of size 1 and 2 each, plus the generic class
        let mut sizes = vec![1; p.classes.len()];
        sizes[z0] = 0;
        assert_eq!(step.transport_size(&sizes), [2 * (1 + 2)]);
        assert!(matches!(unraveling(&p3, 0, &[q(0)], 0, false), Err(ReduceError::Precondition(_))));
    }

    #[test]
    fn localization_adds_factor() {
        let p3 = chain().pop().unwrap();
        let (_, p) = localization(&p3, 0, &UniPoly::x_minus(&q(1))).unwrap();
        assert_eq!(p.classes[0].ring.forbidden(), [UniPoly::x_minus(&q(1))]);
        assert!(p.validate().is_empty());
    }

    #[test]
    fn base_changes() {
        let p3 = chain().pop().unwrap();
        let n = p3.dotted.len();
        assert_eq!(base_change_dotted(&p3, &RatMatrix::identity(n)).unwrap(), p3);
        let mut sw = RatMatrix::identity(n);
        sw.set(1, 1, q(0));
        sw.set(2, 2, q(0));
        sw.set(1, 2, q(1));
        sw.set(2, 1, q(1));
        let p = base_change_dotted(&p3, &sw).unwrap();
        assert_eq!(p.dotted[1].entries, p3.dotted[2].entries);
        assert_eq!(p.dotted[2].entries, p3.dotted[1].entries);
    }

    #[test]
    fn regularization_refuses_non_unit() {
        // after the three regularizations δ(d₂₁) = (x − y)v has no unit coefficient
        let mut cur = chain().pop().unwrap();
        for _ in 0..3 {
            cur = regularize(&cur).unwrap().problem;
        }
        match regularize(&cur) {
            Err(ReduceError::NotRegularizable { coeffs }) => {
                assert_eq!(coeffs.len(), 1);
                let f = coeffs[0].1.num();
                assert_eq!(*f, Poly::var(0).sub(&Poly::var(1)));
            }
            other => panic!("{other:?}"),
        }
        assert!(regularize_localizing(&cur).is_err());
    }
}
