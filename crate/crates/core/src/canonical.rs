//! Canonical forms of representations of problems with trivial classes,
//! and the isomorphism and indecomposability tests built on them.

use crate::exact::{RatMatrix, Q};
use crate::problem::{is_morphism, rep_matrix, Morphism, Problem, Representation};
use crate::reduce::{self, read_rep, transport_rep, EdgeCase, ReduceError, ReductionStep, StepKind};
use crate::weyr::{jordan_data, weyr_canonical, WeyrError};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CanonicalError {
    Weyr(WeyrError),
    Reduce(ReduceError),
    Precondition(String),
    Unreachable,
}

impl From<WeyrError> for CanonicalError {
    fn from(e: WeyrError) -> Self {
        CanonicalError::Weyr(e)
    }
}

impl From<ReduceError> for CanonicalError {
    fn from(e: ReduceError) -> Self {
        CanonicalError::Reduce(e)
    }
}

impl From<crate::problem::ProblemError> for CanonicalError {
    fn from(e: crate::problem::ProblemError) -> Self {
        CanonicalError::Reduce(ReduceError::Problem(e))
    }
}

impl fmt::Display for CanonicalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalError::Weyr(e) => write!(f, "{e}"),
            CanonicalError::Reduce(e) => write!(f, "{e}"),
            CanonicalError::Precondition(s) => write!(f, "precondition failed: {s}"),
            CanonicalError::Unreachable => write!(f, "target problem is not reached by the reduction sequence"),
        }
    }
}

/// A step as taken on a concrete representation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TracedStep {
    pub step: ReductionStep,
    /// Label of the solid generator reduced; `None` for deletions.
    pub arrow: Option<String>,
    /// Value given to that generator at the sizes after the step.
    pub b: Option<RatMatrix>,
    /// Class sizes after the step.
    pub sizes: Vec<usize>,
    pub links: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReductionTrace {
    pub steps: Vec<TracedStep>,
    /// The problem before each step, then the last one.
    pub problems: Vec<Problem>,
}

impl ReductionTrace {
    pub fn kinds(&self) -> Vec<&'static str> {
        self.steps.iter().map(|s| s.step.kind.name()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub trace: ReductionTrace,
    /// `P^∞` as a representation of the original problem.
    pub rep: Representation,
    pub matrix: RatMatrix,
    pub links: usize,
    pub terminal: Problem,
}

/// Output of one automatic step.
#[derive(Clone, Debug)]
pub struct AutoStep {
    pub traced: TracedStep,
    pub problem: Problem,
    pub rep: Representation,
    /// Isomorphism from the input to the transport of `rep`.
    pub iso: Morphism,
}

fn block_diag_iso(p: &Problem, sizes: &[usize], parts: &BTreeMap<usize, RatMatrix>) -> (RatMatrix, Morphism) {
    let off = p.offsets(sizes);
    let mut f = RatMatrix::identity(off[p.t()]);
    for i in 0..p.t() {
        if let Some(m) = parts.get(&p.class_of[i]) {
            f.set_block(off[i], off[i], m);
        }
    }
    let mut iso = Morphism::identity(p, sizes);
    for (c, m) in parts {
        iso.classes[*c] = m.clone();
    }
    (f, iso)
}

/// `(f_X, f_Y)` with `f_X⁻¹ X f_Y = (0 I_r; 0 0)`.
fn rank_normal_form(x: &RatMatrix) -> (RatMatrix, RatMatrix, usize) {
    let (mx, my) = x.shape();
    let kernel = x.kernel();
    let r = my - kernel.len();
    let mut ycols: Vec<Vec<Q>> = kernel.clone();
    let mut images: Vec<Vec<Q>> = Vec::new();
    let mut span = crate::exact::SparseEchelon::new();
    for v in &kernel {
        span.insert(sparse(v));
    }
    for j in 0..my {
        if ycols.len() == my {
            break;
        }
        let mut e = vec![Q::zero(); my];
        e[j] = Q::one();
        if span.insert(sparse(&e)) {
            images.push(x.mul_vec(&e));
            ycols.push(e);
        }
    }
    let mut xcols = images;
    let mut span = crate::exact::SparseEchelon::new();
    for v in &xcols {
        span.insert(sparse(v));
    }
    for i in 0..mx {
        if xcols.len() == mx {
            break;
        }
        let mut e = vec![Q::zero(); mx];
        e[i] = Q::one();
        if span.insert(sparse(&e)) {
            xcols.push(e);
        }
    }
    (RatMatrix::from_columns(mx, &xcols), RatMatrix::from_columns(my, &ycols), r)
}

fn sparse(v: &[Q]) -> BTreeMap<usize, Q> {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
}

/// Sizes of the induced classes: classes away from `reduced` keep their
/// size, the new ones take `fresh` in increasing order.
pub(crate) fn induced_sizes(lay: &reduce::Layout, sizes: &[usize], reduced: &[usize], fresh: &[usize]) -> Vec<usize> {
    let mut out = vec![usize::MAX; lay.classes.len()];
    for (c, s) in lay.slots.iter().enumerate() {
        if !reduced.contains(&c) {
            out[s[0]] = sizes[c];
        }
    }
    let mut k = 0;
    for x in out.iter_mut() {
        if *x == usize::MAX {
            *x = fresh[k];
            k += 1;
        }
    }
    out
}

/// One step of the canonical-form algorithm at a sincere representation.
pub fn reduce_step_auto(p: &Problem, rep: &Representation) -> Result<AutoStep, CanonicalError> {
    if !p.all_trivial() {
        return Err(CanonicalError::Precondition("classes must be trivial".into()));
    }
    if rep.sizes.iter().any(|&n| n == 0) {
        return Err(CanonicalError::Precondition("representation is not sincere".into()));
    }
    let a1 = p.solid.first().ok_or_else(|| CanonicalError::Precondition("problem is minimal".into()))?;
    let arrow = Some(a1.label.to_string());
    let big = rep_matrix(p, rep)?;
    let x = rep.blocks[0].clone();
    let sizes = &rep.sizes;
    if !p.linear_part(0).is_empty() {
        let reg = reduce::regularize(p)?;
        let off = p.offsets(sizes);
        let mut f = RatMatrix::identity(off[p.t()]);
        for (&(r, c), e) in &reg.clearing.entries {
            let k = e.as_constant().ok_or(ReduceError::Unsupported("polynomial dotted entry"))?;
            f.add_block(off[r], off[c], &x, &k);
        }
        let inv = f.inverse().expect("unipotent");
        let moved = inv.mul(&big).mul(&f);
        let rep2 = read_rep(&reg.problem, sizes, &BTreeMap::new(), &moved)?;
        let (j0, f0) = reg.step.pivot.clone().unwrap();
        let mut iso = Morphism::identity(p, sizes);
        iso.dotted[j0] = x.scale(&f0.as_constant().unwrap().recip());
        let traced = TracedStep { step: reg.step, arrow, b: None, sizes: sizes.clone(), links: 0 };
        return Ok(AutoStep { traced, problem: reg.problem, rep: rep2, iso });
    }
    let (cx, cy) = (a1.source, a1.target);
    let mut parts = BTreeMap::new();
    let (step, p2, new_sizes, links, b) = if cx != cy {
        let (fx, fy, r) = rank_normal_form(&x);
        let (mx, my) = (sizes[cx], sizes[cy]);
        let case = EdgeCase::from_sizes(mx, my, r);
        let (step, p2) = reduce::edge_reduction(p, case)?;
        let fresh: Vec<usize> = [mx - r, r, my - r].into_iter().filter(|&n| n > 0).collect();
        let ns = induced_sizes(step.layout.as_ref().unwrap(), sizes, &[cx, cy], &fresh);
        parts.insert(cx, fx);
        parts.insert(cy, fy);
        let b = step.b_matrix(&p2, &ns, &BTreeMap::new(), cx, cy).unwrap();
        (step, p2, ns, r, b)
    } else {
        let jd = jordan_data(&x)?;
        let (w, s) = weyr_canonical(&x)?;
        let (step, p2) = reduce::loop_reduction(p, &jd)?;
        let mut fresh = Vec::new();
        for (_, counts) in &jd.eigen {
            for &e in counts.iter() {
                if e > 0 {
                    fresh.push(e);
                }
            }
        }
        let ns = induced_sizes(step.layout.as_ref().unwrap(), sizes, &[cx], &fresh);
        parts.insert(cx, s);
        (step, p2, ns, w.link_count(), w.matrix)
    };
    let (f, iso) = block_diag_iso(p, sizes, &parts);
    let moved = f.inverse().expect("invertible change of basis").mul(&big).mul(&f);
    let rep2 = read_rep(&p2, &new_sizes, &BTreeMap::new(), &moved)?;
    let traced = TracedStep { step, arrow, b: Some(b), sizes: new_sizes, links };
    Ok(AutoStep { traced, problem: p2, rep: rep2, iso })
}

fn deletion_if_needed(p: &Problem, rep: &Representation) -> Result<Option<AutoStep>, CanonicalError> {
    if rep.sizes.iter().all(|&n| n > 0) {
        return Ok(None);
    }
    let keep: Vec<bool> = rep.sizes.iter().map(|&n| n > 0).collect();
    let (step, p2) = reduce::deletion(p, &keep)?;
    let sizes: Vec<usize> = rep.sizes.iter().copied().filter(|&n| n > 0).collect();
    let big = rep_matrix(p, rep)?;
    let rep2 = read_rep(&p2, &sizes, &BTreeMap::new(), &big)?;
    let iso = Morphism::identity(p, &rep.sizes);
    Ok(Some(AutoStep { traced: TracedStep { step, arrow: None, b: None, sizes, links: 0 }, problem: p2, rep: rep2, iso }))
}

/// Runs the algorithm to a minimal problem, keeping the problems met.
fn run(p: &Problem, rep: &Representation, stop: impl Fn(&Problem, &Representation) -> bool) -> Result<(Vec<Problem>, Vec<TracedStep>, Representation), CanonicalError> {
    if !p.all_trivial() {
        return Err(CanonicalError::Precondition("classes must be trivial".into()));
    }
    rep.check(p)?;
    let mut problems = vec![p.clone()];
    let mut steps = Vec::new();
    let mut cur = rep.clone();
    loop {
        let last = problems.last().unwrap();
        if stop(last, &cur) {
            break;
        }
        let next = match deletion_if_needed(last, &cur)? {
            Some(s) => s,
            None if last.is_minimal() => break,
            None => reduce_step_auto(last, &cur)?,
        };
        steps.push(next.traced);
        problems.push(next.problem);
        cur = next.rep;
    }
    Ok((problems, steps, cur))
}

/// Transports a representation of the last problem back to the first.
pub fn transport_back(problems: &[Problem], steps: &[TracedStep], rep: &Representation) -> Result<Representation, CanonicalError> {
    let mut r = rep.clone();
    for k in (0..steps.len()).rev() {
        r = transport_rep(&problems[k], &problems[k + 1], &steps[k].step, &r)?;
    }
    Ok(r)
}

pub fn canonical_form(p: &Problem, rep: &Representation) -> Result<CanonicalForm, CanonicalError> {
    if !p.h.is_empty() {
        return Err(CanonicalError::Precondition("H must be zero".into()));
    }
    let (problems, steps, last) = run(p, rep, |_, _| false)?;
    let terminal = problems.last().unwrap().clone();
    let zero = Representation { sizes: last.sizes.clone(), weyr: BTreeMap::new(), blocks: Vec::new() };
    let back = transport_back(&problems, &steps, &zero)?;
    let matrix = rep_matrix(p, &back)?;
    let links = steps.iter().map(|s| s.links).sum();
    Ok(CanonicalForm { trace: ReductionTrace { steps, problems }, rep: back, matrix, links, terminal })
}

pub fn links(cf: &CanonicalForm) -> usize {
    cf.links
}

pub fn isomorphic(p: &Problem, a: &Representation, b: &Representation) -> Result<bool, CanonicalError> {
    if a.sizes != b.sizes {
        a.check(p)?;
        b.check(p)?;
        return Ok(false);
    }
    Ok(canonical_form(p, a)?.rep == canonical_form(p, b)?.rep)
}

/// Dimension of a representation: the sum of its class sizes.
pub fn dimension(rep: &Representation) -> usize {
    rep.sizes.iter().sum()
}

pub fn indecomposable(p: &Problem, rep: &Representation) -> Result<bool, CanonicalError> {
    let d = dimension(rep);
    if d == 0 {
        return Err(CanonicalError::Precondition("representation is zero".into()));
    }
    Ok(canonical_form(p, rep)?.links == d - 1)
}

/// The reduction sequence from `p` to a descendant `target` with trivial
/// classes, read off the algorithm run on the transport of `H'(k)`.
pub fn replay_sequence(p: &Problem, target: &Problem) -> Result<ReductionTrace, CanonicalError> {
    if !target.all_trivial() {
        return Err(CanonicalError::Precondition("target classes must be trivial".into()));
    }
    let sizes = reduce::root_sizes(p, target);
    let big = target.h_matrix(&vec![1; target.classes.len()], &BTreeMap::new());
    let rep = read_rep(p, &sizes, &BTreeMap::new(), &big).map_err(|_| CanonicalError::Unreachable)?;
    let same = |q: &Problem, r: &Representation| {
        q.class_of == target.class_of && q.h == target.h && q.solid.iter().map(|a| &a.entries).eq(target.solid.iter().map(|a| &a.entries)) && r.sizes.iter().all(|&n| n == 1)
    };
    let (problems, steps, _) = run(p, &rep, same)?;
    if !same(problems.last().unwrap(), &transport_last(&problems, &steps, &rep)) {
        return Err(CanonicalError::Unreachable);
    }
    Ok(ReductionTrace { steps, problems })
}

fn transport_last(problems: &[Problem], steps: &[TracedStep], rep: &Representation) -> Representation {
    match steps.last() {
        Some(s) => Representation { sizes: s.sizes.clone(), weyr: BTreeMap::new(), blocks: Representation::zero(problems.last().unwrap(), &s.sizes).blocks },
        None => rep.clone(),
    }
}

/// Checks the certificate of one automatic step.
pub fn certify(p: &Problem, rep: &Representation, s: &AutoStep) -> Result<bool, CanonicalError> {
    let back = transport_rep(p, &s.problem, &s.traced.step, &s.rep)?;
    Ok(is_morphism(p, rep, &back, &s.iso)? && morphism_invertible(p, rep, &back, &s.iso)?)
}

fn morphism_invertible(p: &Problem, a: &Representation, b: &Representation, f: &Morphism) -> Result<bool, CanonicalError> {
    Ok(crate::problem::morphism_matrix(p, a, b, f)?.inverse().is_some())
}

/// Indecomposability by brute force: a nontrivial idempotent in the
/// endomorphism algebra, found from the minimal polynomial of generic
/// elements of a spanning set.
pub fn indecomposable_oracle(p: &Problem, rep: &Representation) -> Result<bool, CanonicalError> {
    let basis = endomorphisms(p, rep)?;
    // local iff every basis element and every pairwise sum has a single
    // eigenvalue and the non-invertible ones form an ideal: checked by
    // the dimension of the radical (nilpotent elements) being dim − 1
    let n = basis.first().map(|m| m.rows()).unwrap_or(0);
    if n == 0 {
        return Err(CanonicalError::Precondition("representation is zero".into()));
    }
    // trace form: the radical of an algebra over Q is the kernel of (a, b) ↦ tr(ab)
    let k = basis.len();
    let mut gram = RatMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram.set(i, j, basis[i].mul(&basis[j]).trace());
        }
    }
    let rad = k - gram.rank();
    Ok(k - rad == 1)
}

/// Basis of the endomorphisms of `rep` as matrices over the whole index set.
pub fn endomorphisms(p: &Problem, rep: &Representation) -> Result<Vec<RatMatrix>, CanonicalError> {
    if !p.all_trivial() {
        return Err(CanonicalError::Precondition("classes must be trivial".into()));
    }
    let m = rep_matrix(p, rep)?;
    let off = p.offsets(&rep.sizes);
    let n = off[p.t()];
    // unknowns: class blocks then dotted blocks
    let mut gens: Vec<RatMatrix> = Vec::new();
    for (c, &s) in rep.sizes.iter().enumerate() {
        for a in 0..s {
            for b in 0..s {
                let mut g = RatMatrix::zeros(n, n);
                for i in p.class_indices(c) {
                    g.set(off[i] + a, off[i] + b, Q::one());
                }
                gens.push(g);
            }
        }
    }
    for v in &p.dotted {
        let (s, t) = (rep.sizes[v.source], rep.sizes[v.target]);
        for a in 0..s {
            for b in 0..t {
                let mut g = RatMatrix::zeros(n, n);
                for (&(r, c), e) in &v.entries {
                    let k = e.as_constant().ok_or(ReduceError::Unsupported("polynomial dotted entry"))?;
                    *g.get_mut(off[r] + a, off[c] + b) += k;
                }
                gens.push(g);
            }
        }
    }
    // M F − F M = 0, linear in the coefficients
    let cols: Vec<Vec<Q>> = gens.iter().map(|g| m.mul(g).sub(&g.mul(&m)).entries().to_vec()).collect();
    let sys = RatMatrix::from_columns(n * n, &cols);
    let kernel = sys.kernel();
    Ok(kernel
        .iter()
        .map(|v| {
            let mut f = RatMatrix::zeros(n, n);
            for (g, c) in gens.iter().zip(v) {
                if !c.is_zero() {
                    f.add_assign_scaled(g, c);
                }
            }
            f
        })
        .collect())
}

/// Describes the steps of a trace in one line each.
pub fn describe(trace: &ReductionTrace) -> Vec<String> {
    trace
        .steps
        .iter()
        .map(|s| {
            let what = match &s.step.kind {
                StepKind::EdgeReduction(c) => format!("edge {:?}", c),
                StepKind::LoopReduction(j) => format!("loop {}", j.size()),
                k => k.name().to_string(),
            };
            match &s.arrow {
                Some(a) => format!("{a}: {what}"),
                None => what,
            }
        })
        .collect()
}

/// The representation `f⁻¹ P f` for an invertible `f` at the sizes of `rep`;
/// `f` is then an isomorphism from `rep` to the result.
pub fn act(p: &Problem, rep: &Representation, f: &Morphism) -> Result<Representation, CanonicalError> {
    let big = rep_matrix(p, rep)?;
    let m = crate::problem::morphism_matrix(p, rep, rep, f)?;
    let inv = m.inverse().ok_or_else(|| CanonicalError::Precondition("morphism is not invertible".into()))?;
    Ok(read_rep(p, &rep.sizes, &rep.weyr, &inv.mul(&big).mul(&m))?)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::algebra::{quiver_problem, Arrow, Quiver};
    use crate::exact::q;
    use proptest::prelude::*;

    pub(crate) fn quiver(n: usize, arrows: &[(usize, usize)]) -> Problem {
        let vertices = (1..=n).map(|i| i.to_string()).collect();
        let arrows = arrows.iter().enumerate().map(|(k, &(s, t))| Arrow { name: format!("a{}", k + 1), source: s, target: t }).collect();
        quiver_problem(&Quiver { vertices, arrows }).unwrap()
    }

    fn mat(rows: &[&[i64]]) -> RatMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = RatMatrix::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                m.set(i, j, q(rows[i][j]));
            }
        }
        m
    }

    fn rep(sizes: &[usize], blocks: Vec<RatMatrix>) -> Representation {
        Representation { sizes: sizes.to_vec(), weyr: BTreeMap::new(), blocks }
    }

    #[test]
    fn edge_rank_form() {
        let p = quiver(2, &[(0, 1)]);
        let r = rep(&[2, 3], vec![mat(&[&[1, 2, 3], &[2, 4, 6]])]);
        let cf = canonical_form(&p, &r).unwrap();
        assert_eq!(cf.rep.blocks[0], mat(&[&[0, 0, 1], &[0, 0, 0]]));
        assert_eq!(cf.links, 1);
        assert!(!indecomposable(&p, &r).unwrap());
        assert!(indecomposable(&p, &rep(&[1, 1], vec![mat(&[&[5]])])).unwrap());
        assert!(!indecomposable(&p, &rep(&[1, 1], vec![mat(&[&[0]])])).unwrap());
    }

    #[test]
    fn loops_give_weyr_forms() {
        let p = quiver(1, &[(0, 0)]);
        let j2 = rep(&[2], vec![mat(&[&[0, 1], &[0, 0]])]);
        assert!(indecomposable(&p, &j2).unwrap());
        let j21 = rep(&[3], vec![mat(&[&[0, 0, 1], &[0, 0, 0], &[0, 0, 0]])]);
        let cf = canonical_form(&p, &j21).unwrap();
        assert_eq!(cf.rep.blocks[0], mat(&[&[0, 0, 1], &[0, 0, 0], &[0, 0, 0]]));
        assert!(!indecomposable(&p, &j21).unwrap());
        let two = rep(&[2], vec![mat(&[&[1, 0], &[0, 2]])]);
        assert!(!indecomposable(&p, &two).unwrap());
    }

    #[test]
    fn steps_are_certified() {
        let p = crate::reduce::tests::twoloop();
        let mut blocks = Vec::new();
        for k in 0..p.solid.len() {
            blocks.push(mat(&[&[k as i64 + 1, 1], &[0, 2 - k as i64]]));
        }
        let mut cur = rep(&[2, 2], blocks);
        let mut prob = p.clone();
        let mut n = 0;
        while !prob.is_minimal() {
            if let Some(d) = deletion_if_needed(&prob, &cur).unwrap() {
                prob = d.problem;
                cur = d.rep;
                continue;
            }
            let s = reduce_step_auto(&prob, &cur).unwrap();
            assert!(certify(&prob, &cur, &s).unwrap(), "step {n}: {:?}", s.traced.step.kind.name());
            prob = s.problem;
            cur = s.rep;
            n += 1;
        }
        assert!(n > 3);
    }

    #[test]
    fn counting_edge_reps() {
        let p = quiver(2, &[(0, 1)]);
        for (m, n) in [(1, 1), (2, 3), (3, 2), (3, 3)] {
            let mut seen = Vec::new();
            for r in 0..=m.min(n) {
                let mut x = RatMatrix::zeros(m, n);
                for k in 0..r {
                    x.set(k, n - 1 - k, q(k as i64 + 2));
                }
                let cf = canonical_form(&p, &rep(&[m, n], vec![x])).unwrap();
                if !seen.contains(&cf.rep) {
                    seen.push(cf.rep);
                }
            }
            assert_eq!(seen.len(), m.min(n) + 1);
        }
    }

    #[test]
    fn replay_twoloop() {
        let c = crate::reduce::tests::chain();
        let t = replay_sequence(&c[0], &c[2]).unwrap();
        assert_eq!(t.kinds(), ["edge", "loop"]);
        assert!(replay_sequence(&c[0], &quiver(2, &[(0, 1)])).is_err());
    }

    fn small() -> impl Strategy<Value = i64> {
        -2i64..=2
    }

    fn rand_mat(r: usize, c: usize) -> impl Strategy<Value = RatMatrix> {
        proptest::collection::vec(small(), r * c).prop_map(move |v| {
            let mut m = RatMatrix::zeros(r, c);
            for (k, x) in v.into_iter().enumerate() {
                m.set(k / c.max(1), k % c.max(1), q(x));
            }
            m
        })
    }

    fn invertible(n: usize) -> impl Strategy<Value = RatMatrix> {
        // unit lower times unit upper, times a diagonal
        (rand_mat(n, n), rand_mat(n, n), proptest::collection::vec(1i64..=3, n)).prop_map(move |(l, u, d)| {
            let mut a = RatMatrix::identity(n);
            let mut b = RatMatrix::identity(n);
            for i in 0..n {
                for j in 0..n {
                    if i > j {
                        a.set(i, j, l.get(i, j).clone());
                    } else if i < j {
                        b.set(i, j, u.get(i, j).clone());
                    } else {
                        b.set(i, j, q(d[i]));
                    }
                }
            }
            a.mul(&b)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn loop_canonical_is_conjugation_invariant(m in rand_mat(3, 3), s in invertible(3)) {
            let p = quiver(1, &[(0, 0)]);
            let a = rep(&[3], vec![m.clone()]);
            let b = rep(&[3], vec![s.inverse().unwrap().mul(&m).mul(&s)]);
            match (canonical_form(&p, &a), canonical_form(&p, &b)) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x.rep, y.rep),
                (Err(CanonicalError::Weyr(_)), Err(CanonicalError::Weyr(_))) => {}
                (x, y) => prop_assert!(false, "{:?} {:?}", x.err(), y.err()),
            }
        }

        #[test]
        fn twoloop_iso_invariance(bl in proptest::collection::vec(rand_mat(2, 2), 4), fx in invertible(2), fy in invertible(2), z in proptest::collection::vec(rand_mat(2, 2), 8)) {
            let p = crate::reduce::tests::twoloop();
            let a = rep(&[2, 2], bl);
            let mut f = Morphism::identity(&p, &[2, 2]);
            f.classes = vec![fx, fy];
            for (d, m) in f.dotted.iter_mut().zip(z) {
                *d = m;
            }
            let b = act(&p, &a, &f).unwrap();
            let (x, y) = (canonical_form(&p, &a), canonical_form(&p, &b));
            match (x, y) {
                (Ok(x), Ok(y)) => {
                    prop_assert_eq!(&x.rep, &y.rep);
                    prop_assert_eq!(indecomposable_oracle(&p, &a).unwrap(), x.links + 1 == 4);
                }
                (Err(CanonicalError::Weyr(_)), Err(CanonicalError::Weyr(_))) => {}
                (x, y) => prop_assert!(false, "{:?} {:?}", x.err(), y.err()),
            }
        }
    }
}
