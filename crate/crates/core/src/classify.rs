//! Wild configurations of the first arrow, and exploration of all
//! reduction sequences at a fixed size vector.

use crate::canonical::{induced_sizes, transport_back, TracedStep};
use crate::exact::{bipoly_gcd, BiPoly, LocalizedElem, Q};
use crate::problem::{render_linear, Problem, Representation};
use crate::reduce::{self, EdgeCase, ReduceError, ReductionStep};
use crate::weyr::JordanData;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WildCase {
    Case1,
    Case2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WildReport {
    pub case: WildCase,
    /// Number of steps taken before the configuration was met.
    pub step: usize,
    pub arrow: String,
    pub source: String,
    pub target: String,
    /// Case 2: the common factor of the linear part, units removed.
    pub f: Option<BiPoly>,
    pub f_text: Option<String>,
    /// Case 2: dotted generator of the first coefficient.
    pub pivot: Option<String>,
    /// Forbidden factors of the source and target rings.
    pub forbidden: (Vec<String>, Vec<String>),
    /// `MW1`, `MW2` or `local-case-2-unresolved`.
    pub tag: Option<String>,
    /// Tameness of the induced local problems is not decided here.
    pub tame_infinite: Option<bool>,
    /// Rendered linear part of the first differential.
    pub raw: String,
}

fn bar(v: &str) -> String {
    format!("{v}\u{304}")
}

fn right_names(p: &Problem, x: usize, y: usize) -> [String; 2] {
    let (vx, vy) = (p.var_of(x).to_string(), p.var_of(y).to_string());
    if x == y || vx == vy {
        let r = bar(&vx);
        [vx, r]
    } else {
        [vx, vy]
    }
}

/// Inspects the first solid generator for the two configurations that
/// certify wildness.
pub fn detect_wild_config(p: &Problem) -> Option<WildReport> {
    let a = p.solid.first()?;
    let (x, y) = (a.source, a.target);
    let (px, py) = (!p.classes[x].ring.is_trivial(), !p.classes[y].ring.is_trivial());
    let lin = p.linear_part(0);
    let base = |case| WildReport {
        case,
        step: 0,
        arrow: a.label.to_string(),
        source: p.classes[x].name.clone(),
        target: p.classes[y].name.clone(),
        f: None,
        f_text: None,
        pivot: None,
        forbidden: (p.forbidden(x).iter().map(|f| f.fmt_vars(&[p.var_of(x)])).collect(), p.forbidden(y).iter().map(|f| f.fmt_vars(&[p.var_of(y)])).collect()),
        tag: None,
        tame_infinite: None,
        raw: render_linear(p, &lin),
    };
    if lin.is_empty() && px != py {
        let mut r = base(WildCase::Case1);
        if p.classes.len() == 2 && x != y {
            r.tag = Some("MW1".into());
        }
        return Some(r);
    }
    if !(px && py) {
        return None;
    }
    let f = common_factor(p, x, y, &lin);
    if !f.is_zero() && f.is_constant() {
        return None;
    }
    let mut r = base(WildCase::Case2);
    let names = right_names(p, x, y);
    r.f_text = Some(f.fmt_vars(&[&names[0], &names[1]]).replace(" - ", "\u{2212}").replace(" + ", "+"));
    r.f = Some(f);
    r.pivot = lin.first().map(|(j, _)| p.dotted[*j].label.to_string());
    r.tag = if x == y && p.classes.len() == 1 {
        Some("local-case-2-unresolved".into())
    } else if x != y && p.classes.len() == 2 {
        Some("MW2".into())
    } else {
        None
    };
    Some(r)
}

/// Greatest common factor of the coefficients after removing forbidden
/// factors; zero for an empty linear part.
fn common_factor(p: &Problem, x: usize, y: usize, lin: &[(usize, LocalizedElem)]) -> BiPoly {
    let forb = [p.forbidden(x), p.forbidden(y)];
    let mut g = BiPoly::zero();
    for (_, c) in lin {
        let (num, _) = c.strip_units(&forb);
        g = bipoly_gcd(&g, &num);
        if g.is_constant() {
            return BiPoly::one();
        }
    }
    g
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BranchChoice {
    /// Forced steps: deletion of empty classes, regularization.
    Forced,
    Rank(usize),
    Jordan(JordanData),
    /// The loop kept as a parameter.
    Parameter,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Children(Vec<TreeNode>),
    /// A minimal problem; `canonical` is the canonical form it stands for
    /// when all its classes are trivial.
    Minimal { canonical: Option<Representation> },
    Wild(WildReport),
    Truncated,
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub choice: BranchChoice,
    /// Step that produced this node; `None` at the root.
    pub step: Option<&'static str>,
    pub classes: Vec<String>,
    pub sizes: Vec<usize>,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeOptions {
    pub eigenvalues: Vec<Q>,
    pub depth: usize,
    pub parameter_branch: bool,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions { eigenvalues: vec![Q::zero()], depth: 64, parameter_branch: false }
    }
}

/// Result of the exploration; it is sampled over the eigenvalues given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTree {
    pub sampled: bool,
    pub root: Option<TreeNode>,
}

impl ReductionTree {
    pub fn leaves(&self) -> Vec<&TreeNode> {
        fn walk<'a>(n: &'a TreeNode, out: &mut Vec<&'a TreeNode>) {
            match &n.outcome {
                Outcome::Children(c) => c.iter().for_each(|k| walk(k, out)),
                _ => out.push(n),
            }
        }
        let mut out = Vec::new();
        if let Some(r) = &self.root {
            walk(r, &mut out);
        }
        out
    }
}

struct Explorer<'a> {
    opts: &'a TreeOptions,
    /// Problems and steps from the root to the current node.
    problems: Vec<Problem>,
    steps: Vec<TracedStep>,
    transportable: bool,
}

pub fn reduction_tree(p: &Problem, sizes: &[usize], opts: &TreeOptions) -> Result<ReductionTree, ReduceError> {
    if !p.all_trivial() || !p.h.is_empty() {
        return Err(ReduceError::Precondition("the tree starts from trivial classes and zero H".into()));
    }
    if sizes.len() != p.classes.len() {
        return Err(ReduceError::Precondition("size vector has the wrong length".into()));
    }
    if sizes.iter().all(|&n| n == 0) {
        return Ok(ReductionTree { sampled: true, root: None });
    }
    let mut e = Explorer { opts, problems: vec![p.clone()], steps: Vec::new(), transportable: true };
    let root = e.node(BranchChoice::Forced, None, sizes.to_vec());
    Ok(ReductionTree { sampled: true, root: Some(root) })
}

fn traced(step: ReductionStep, sizes: &[usize]) -> TracedStep {
    TracedStep { step, arrow: None, b: None, sizes: sizes.to_vec(), links: 0 }
}

impl Explorer<'_> {
    fn node(&mut self, choice: BranchChoice, step: Option<&'static str>, sizes: Vec<usize>) -> TreeNode {
        let p = self.problems.last().unwrap().clone();
        let outcome = self.outcome(&p, &sizes);
        TreeNode { choice, step, classes: p.classes.iter().map(|c| c.name.clone()).collect(), sizes, outcome }
    }

    fn child(&mut self, choice: BranchChoice, step: ReductionStep, problem: Problem, sizes: Vec<usize>, localized: bool) -> TreeNode {
        let name = step.kind.name();
        let saved = self.transportable;
        self.transportable &= !localized;
        self.steps.push(traced(step, &sizes));
        self.problems.push(problem);
        let n = self.node(choice, Some(name), sizes);
        self.problems.pop();
        self.steps.pop();
        self.transportable = saved;
        n
    }

    fn outcome(&mut self, p: &Problem, sizes: &[usize]) -> Outcome {
        if self.steps.len() >= self.opts.depth {
            return Outcome::Truncated;
        }
        if sizes.iter().any(|&n| n == 0) {
            let keep: Vec<bool> = sizes.iter().map(|&n| n > 0).collect();
            return match reduce::deletion(p, &keep) {
                Ok((s, q)) => {
                    let ns: Vec<usize> = sizes.iter().copied().filter(|&n| n > 0).collect();
                    Outcome::Children(vec![self.child(BranchChoice::Forced, s, q, ns, false)])
                }
                Err(e) => Outcome::Failed(e.to_string()),
            };
        }
        if p.is_minimal() {
            let canonical = if self.transportable && p.all_trivial() {
                let zero = Representation { sizes: sizes.to_vec(), weyr: BTreeMap::new(), blocks: Vec::new() };
                transport_back(&self.problems, &self.steps, &zero).ok()
            } else {
                None
            };
            return Outcome::Minimal { canonical };
        }
        if let Some(mut w) = detect_wild_config(p) {
            w.step = self.steps.len();
            return Outcome::Wild(w);
        }
        if !p.linear_part(0).is_empty() {
            return match reduce::regularize_localizing(p) {
                Ok((locs, reg)) => {
                    let localized = !locs.is_empty();
                    Outcome::Children(vec![self.child(BranchChoice::Forced, reg.step, reg.problem, sizes.to_vec(), localized)])
                }
                Err(e) => Outcome::Failed(e.to_string()),
            };
        }
        let a = &p.solid[0];
        let (x, y) = (a.source, a.target);
        let mut kids = Vec::new();
        if x != y {
            let (mx, my) = (sizes[x], sizes[y]);
            for r in 0..=mx.min(my) {
                let case = EdgeCase::from_sizes(mx, my, r);
                match reduce::edge_reduction(p, case) {
                    Ok((s, q)) => {
                        let fresh: Vec<usize> = [mx - r, r, my - r].into_iter().filter(|&n| n > 0).collect();
                        let ns = induced_sizes(s.layout.as_ref().unwrap(), sizes, &[x, y], &fresh);
                        kids.push(self.child(BranchChoice::Rank(r), s, q, ns, false));
                    }
                    Err(e) => return Outcome::Failed(e.to_string()),
                }
            }
        } else {
            for jd in jordan_choices(sizes[x], &self.opts.eigenvalues) {
                match reduce::loop_reduction(p, &jd) {
                    Ok((s, q)) => {
                        let fresh: Vec<usize> = jd.eigen.iter().flat_map(|(_, c)| c.iter().copied().filter(|&e| e > 0).collect::<Vec<_>>()).collect();
                        let ns = induced_sizes(s.layout.as_ref().unwrap(), sizes, &[x], &fresh);
                        kids.push(self.child(BranchChoice::Jordan(jd), s, q, ns, false));
                    }
                    Err(e) => return Outcome::Failed(e.to_string()),
                }
            }
            if self.opts.parameter_branch {
                match reduce::loop_mutation(p) {
                    Ok((s, q)) => kids.push(self.child(BranchChoice::Parameter, s, q, sizes.to_vec(), true)),
                    Err(e) => return Outcome::Failed(e.to_string()),
                }
            }
        }
        Outcome::Children(kids)
    }
}

/// Partitions of `n`, largest first in lexicographic order, which extends
/// the dominance order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for k in (1..=n.min(max)).rev() {
            cur.push(k);
            go(n - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Jordan data of size `n` with eigenvalues among `samples`, in field
/// order of the eigenvalues and dominance order of the partitions.
pub fn jordan_choices(n: usize, samples: &[Q]) -> Vec<JordanData> {
    let mut ev: Vec<Q> = samples.to_vec();
    ev.sort();
    ev.dedup();
    fn go(n: usize, ev: &[Q], cur: &mut Vec<(Q, Vec<usize>)>, out: &mut Vec<JordanData>) {
        if n == 0 {
            out.push(JordanData::new(cur.clone()));
            return;
        }
        let Some((l, rest)) = ev.split_first() else { return };
        for k in (0..=n).rev() {
            if k == 0 {
                go(n, rest, cur, out);
                continue;
            }
            for part in partitions(k) {
                let jd = JordanData::from_blocks(l.clone(), &part);
                cur.push(jd.eigen[0].clone());
                go(n - k, rest, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, &ev, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{canonical_form, isomorphic};
    use crate::exact::{q, Poly, RatMatrix};
    use crate::reduce::tests::{chain, twoloop};

    fn kind_path(n: &TreeNode, out: &mut Vec<String>) {
        if let Some(s) = n.step {
            out.push(s.to_string());
        }
    }

    #[test]
    fn case_two_on_the_worked_example() {
        let mut cur = chain().pop().unwrap();
        for _ in 0..3 {
            cur = reduce::regularize(&cur).unwrap().problem;
        }
        let w = detect_wild_config(&cur).unwrap();
        assert_eq!(w.case, WildCase::Case2);
        assert_eq!(w.f_text.as_deref(), Some("x\u{2212}x\u{304}"));
        assert_eq!(w.f, Some(Poly::var(0).sub(&Poly::var(1))));
        assert_eq!(w.tag.as_deref(), Some("local-case-2-unresolved"));
        match reduce::regularize(&cur) {
            Err(ReduceError::NotRegularizable { coeffs }) => {
                assert_eq!(coeffs[0].1.num().normalize_lead(), w.f.clone().unwrap());
            }
            other => panic!("{other:?}"),
        }
        // earlier states are not wild
        for p in chain() {
            assert!(detect_wild_config(&p).is_none());
        }
    }

    #[test]
    fn case_one_shape() {
        // parameter loop class with an arrow into a trivial class, δ = 0
        let p = crate::canonical::tests::quiver(2, &[(0, 0), (0, 1)]);
        let (_, m) = reduce::loop_mutation(&p).unwrap();
        let w = detect_wild_config(&m).unwrap();
        assert_eq!(w.case, WildCase::Case1);
        assert_eq!(w.tag.as_deref(), Some("MW1"));
    }

    #[test]
    fn jordan_choice_order() {
        assert_eq!(partitions(4), [vec![4], vec![3, 1], vec![2, 2], vec![2, 1, 1], vec![1, 1, 1, 1]]);
        let c = jordan_choices(2, &[q(1), q(0)]);
        assert_eq!(c.len(), 5);
        assert_eq!(c[0], JordanData::from_blocks(q(0), &[2]));
        assert_eq!(c[4], JordanData::from_blocks(q(1), &[1, 1]));
    }

    #[test]
    fn small_trees() {
        let p = crate::canonical::tests::quiver(2, &[(0, 1)]);
        let t = reduction_tree(&p, &[1, 1], &TreeOptions::default()).unwrap();
        assert_eq!(t.leaves().len(), 2);
        assert!(reduction_tree(&p, &[0, 0], &TreeOptions::default()).unwrap().root.is_none());
        assert_eq!(t, reduction_tree(&p, &[1, 1], &TreeOptions::default()).unwrap());
    }

    #[test]
    fn worked_example_reaches_case_two() {
        let opts = TreeOptions { eigenvalues: vec![q(0)], depth: 64, parameter_branch: true };
        let t = reduction_tree(&twoloop(), &[2, 2], &opts).unwrap();
        let wild: Vec<_> = t.leaves().into_iter().filter_map(|n| if let Outcome::Wild(w) = &n.outcome { Some(w) } else { None }).collect();
        assert!(wild.iter().any(|w| w.case == WildCase::Case2 && w.f_text.as_deref() == Some("x\u{2212}x\u{304}")));
        let mut v = Vec::new();
        kind_path(t.root.as_ref().unwrap(), &mut v);
        assert!(v.is_empty());
    }

    #[test]
    fn edge_tree_is_complete() {
        let p = crate::canonical::tests::quiver(2, &[(0, 1)]);
        for (m, n) in [(1, 2), (2, 2), (3, 2), (3, 3)] {
            let t = reduction_tree(&p, &[m, n], &TreeOptions::default()).unwrap();
            let leaves: Vec<Representation> = t
                .leaves()
                .into_iter()
                .map(|l| match &l.outcome {
                    Outcome::Minimal { canonical: Some(r) } => r.clone(),
                    o => panic!("{o:?}"),
                })
                .collect();
            // brute force over 0/1 matrices
            let mut forms: Vec<Representation> = Vec::new();
            for bits in 0u32..(1 << (m * n)) {
                let mut x = RatMatrix::zeros(m, n);
                for k in 0..m * n {
                    if bits >> k & 1 == 1 {
                        x.set(k / n, k % n, q(1));
                    }
                }
                let r = Representation { sizes: vec![m, n], weyr: BTreeMap::new(), blocks: vec![x] };
                if !forms.iter().any(|f| isomorphic(&p, f, &r).unwrap()) {
                    forms.push(r);
                }
            }
            let mut canon: Vec<Representation> = forms.iter().map(|r| canonical_form(&p, r).unwrap().rep).collect();
            canon.sort_by_key(|r| format!("{r:?}"));
            let mut leaves = leaves;
            leaves.sort_by_key(|r| format!("{r:?}"));
            assert_eq!(canon, leaves);
        }
    }
}
