//! The `mbp-1` JSON schemas: rationals as `"p/q"` strings, matrices as
//! row-major nested arrays, problems as sparse entry lists.

use mbp_core::canonical::{CanonicalForm, TracedStep};
use mbp_core::classify::{BranchChoice, Outcome, ReductionTree, TreeNode, WildCase, WildReport};
use mbp_core::exact::{fmt_q, parse_q, LocalizedElem, Poly, RatMatrix, UniPoly, Q};
use mbp_core::problem::{Dotted, Label, Problem, Representation, Ring, Solid, VertexClass};
use mbp_core::reduce::{ReductionStep, StepKind};
use mbp_core::weyr::WeyrForm;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::fmt;

pub const VERSION: &str = "mbp-1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError(pub String);

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for FormatError {}

type Res<T> = Result<T, FormatError>;

fn err<T>(msg: impl Into<String>) -> Res<T> {
    Err(FormatError(msg.into()))
}

pub fn q_to_json(x: &Q) -> Value {
    Value::String(fmt_q(x))
}

pub fn q_from_json(v: &Value) -> Res<Q> {
    match v {
        Value::String(s) => parse_q(s).ok_or_else(|| FormatError(format!("bad rational `{s}`"))),
        Value::Number(n) => match n.as_i64() {
            Some(k) => Ok(Q::from_integer(k.into())),
            None => err(format!("non-integer number {n}; write rationals as strings")),
        },
        _ => err("expected a rational"),
    }
}

pub fn matrix_to_json(m: &RatMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array((0..m.cols()).map(|j| q_to_json(m.get(i, j))).collect())).collect())
}

/// Reads a matrix; `shape` fixes the size of empty matrices.
pub fn matrix_from_json(v: &Value, shape: Option<(usize, usize)>) -> Res<RatMatrix> {
    let rows = v.as_array().ok_or_else(|| FormatError("matrix must be an array of rows".into()))?;
    let cols = match (rows.first(), shape) {
        (Some(r), _) => r.as_array().ok_or_else(|| FormatError("matrix row must be an array".into()))?.len(),
        (None, Some((_, c))) => c,
        (None, None) => 0,
    };
    if let Some((r, c)) = shape {
        if r != rows.len() || (r > 0 && c != cols) {
            return err(format!("expected a {r}×{c} matrix, got {}×{cols}", rows.len()));
        }
    }
    let mut m = RatMatrix::zeros(rows.len(), cols);
    for (i, r) in rows.iter().enumerate() {
        let r = r.as_array().ok_or_else(|| FormatError("matrix row must be an array".into()))?;
        if r.len() != cols {
            return err("ragged matrix");
        }
        for (j, x) in r.iter().enumerate() {
            m.set(i, j, q_from_json(x)?);
        }
    }
    Ok(m)
}

fn uni_to_json(p: &UniPoly) -> Value {
    Value::Array(p.coeffs().iter().map(q_to_json).collect())
}

fn uni_from_json(v: &Value) -> Res<UniPoly> {
    let cs = v.as_array().ok_or_else(|| FormatError("polynomial must be a coefficient array".into()))?;
    Ok(UniPoly::from_coeffs(&cs.iter().map(q_from_json).collect::<Res<Vec<_>>>()?))
}

fn elem_to_json(e: &LocalizedElem) -> Value {
    if !e.has_den() {
        if let Some(c) = e.as_constant() {
            return q_to_json(&c);
        }
    }
    let num: Vec<Value> = e.num().terms().map(|(x, c)| json!({"x": x[0], "y": x[1], "c": fmt_q(c)})).collect();
    let den = |slot| -> Vec<Value> { e.den(slot).iter().map(|(f, k)| json!({"factor": uni_to_json(f), "power": k})).collect() };
    json!({"num": num, "den_left": den(0), "den_right": den(1)})
}

fn elem_from_json(v: &Value) -> Res<LocalizedElem> {
    if !v.is_object() {
        return Ok(LocalizedElem::constant(q_from_json(v)?));
    }
    let mut num = Poly::<2>::zero();
    for t in field(v, "num")?.as_array().ok_or_else(|| FormatError("num must be an array".into()))? {
        num.add_term([usize_of(t, "x")? as u32, usize_of(t, "y")? as u32], &q_from_json(field(t, "c")?)?);
    }
    let mut e = LocalizedElem::from(num);
    for (slot, key) in [(0, "den_left"), (1, "den_right")] {
        if let Some(list) = v.get(key).and_then(Value::as_array) {
            for d in list {
                e = e.with_den(slot, &uni_from_json(field(d, "factor")?)?, usize_of(d, "power")? as u32);
            }
        }
    }
    Ok(e)
}

fn field<'a>(v: &'a Value, k: &str) -> Res<&'a Value> {
    v.get(k).ok_or_else(|| FormatError(format!("missing field `{k}`")))
}

fn usize_of(v: &Value, k: &str) -> Res<usize> {
    field(v, k)?.as_u64().map(|x| x as usize).ok_or_else(|| FormatError(format!("field `{k}` must be a nonnegative integer")))
}

fn str_of<'a>(v: &'a Value, k: &str) -> Res<&'a str> {
    field(v, k)?.as_str().ok_or_else(|| FormatError(format!("field `{k}` must be a string")))
}

fn array_of<'a>(v: &'a Value, k: &str) -> Res<&'a Vec<Value>> {
    field(v, k)?.as_array().ok_or_else(|| FormatError(format!("field `{k}` must be an array")))
}

fn label_to_json(l: &Label) -> Value {
    json!({"stem": l.stem, "index": l.index, "splits": l.splits, "display": l.to_string()})
}

fn label_from_json(v: &Value) -> Res<Label> {
    if let Some(s) = v.as_str() {
        return Ok(Label::new(s));
    }
    let index = match v.get("index") {
        None | Some(Value::Null) => None,
        Some(x) => Some(x.as_str().ok_or_else(|| FormatError("label index must be a string".into()))?.to_string()),
    };
    let mut splits = Vec::new();
    if let Some(list) = v.get("splits").and_then(Value::as_array) {
        for s in list {
            let pair = s.as_array().filter(|a| a.len() == 2).ok_or_else(|| FormatError("split must be a pair".into()))?;
            let n = |x: &Value| x.as_u64().map(|k| k as usize).ok_or_else(|| FormatError("split index".into()));
            splits.push((n(&pair[0])?, n(&pair[1])?));
        }
    }
    Ok(Label { stem: str_of(v, "stem")?.to_string(), index, splits })
}

fn class_to_json(c: &VertexClass) -> Value {
    match &c.ring {
        Ring::Trivial => json!({"name": c.name, "ring": "trivial"}),
        Ring::Param { var, forbidden } => json!({"name": c.name, "ring": {"var": var, "forbidden": forbidden.iter().map(uni_to_json).collect::<Vec<_>>()}}),
    }
}

fn class_from_json(v: &Value) -> Res<VertexClass> {
    let name = str_of(v, "name")?.to_string();
    let ring = match field(v, "ring")? {
        Value::String(s) if s == "trivial" => Ring::Trivial,
        r @ Value::Object(_) => Ring::Param {
            var: str_of(r, "var")?.to_string(),
            forbidden: r.get("forbidden").and_then(Value::as_array).map(|l| l.iter().map(uni_from_json).collect::<Res<Vec<_>>>()).transpose()?.unwrap_or_default(),
        },
        _ => return err("ring must be \"trivial\" or {var, forbidden}"),
    };
    Ok(VertexClass { name, ring })
}

fn entry(p: &Problem, (r, c): (usize, usize), coeff: Value) -> Value {
    json!({"row": r, "col": c, "left_class": p.classes[p.class_of[r]].name, "right_class": p.classes[p.class_of[c]].name, "coeff": coeff})
}

pub fn problem_to_json(p: &Problem) -> Value {
    let dotted: Vec<Value> = p
        .dotted
        .iter()
        .map(|v| json!({"label": label_to_json(&v.label), "entries": v.entries.iter().map(|(&pos, e)| entry(p, pos, elem_to_json(e))).collect::<Vec<_>>()}))
        .collect();
    let solid: Vec<Value> = p
        .solid
        .iter()
        .map(|a| json!({"label": label_to_json(&a.label), "entries": a.entries.iter().map(|(&pos, e)| entry(p, pos, q_to_json(e))).collect::<Vec<_>>()}))
        .collect();
    let h: Vec<Value> = p.h.iter().map(|(&(r, c), f)| json!({"row": r, "col": c, "coeff": uni_to_json(f)})).collect();
    json!({
        "version": VERSION,
        "classes": p.classes.iter().map(class_to_json).collect::<Vec<_>>(),
        "class_of": p.class_of,
        "origin": p.origin,
        "dotted": dotted,
        "solid": solid,
        "h": h,
    })
}

fn check_version(v: &Value) -> Res<()> {
    match v.get("version").and_then(Value::as_str) {
        Some(VERSION) => Ok(()),
        Some(other) => err(format!("unsupported version `{other}`")),
        None => err("missing version"),
    }
}

fn entries_of<T>(p_classes: &[VertexClass], class_of: &[usize], v: &Value, read: impl Fn(&Value) -> Res<T>) -> Res<BTreeMap<(usize, usize), T>> {
    let t = class_of.len();
    let mut out = BTreeMap::new();
    for e in array_of(v, "entries")? {
        let (r, c) = (usize_of(e, "row")?, usize_of(e, "col")?);
        if r >= t || c >= t {
            return err(format!("entry ({r}, {c}) outside the index range"));
        }
        for (k, i) in [("left_class", r), ("right_class", c)] {
            if let Some(name) = e.get(k).and_then(Value::as_str) {
                if p_classes[class_of[i]].name != name {
                    return err(format!("entry ({r}, {c}): {k} is `{name}`, expected `{}`", p_classes[class_of[i]].name));
                }
            }
        }
        out.insert((r, c), read(field(e, "coeff")?)?);
    }
    Ok(out)
}

fn usizes(v: &Value, k: &str) -> Res<Vec<usize>> {
    array_of(v, k)?.iter().map(|x| x.as_u64().map(|n| n as usize).ok_or_else(|| FormatError(format!("`{k}` must hold nonnegative integers")))).collect()
}

pub fn problem_from_json(v: &Value) -> Res<Problem> {
    check_version(v)?;
    let classes = array_of(v, "classes")?.iter().map(class_from_json).collect::<Res<Vec<_>>>()?;
    let class_of = usizes(v, "class_of")?;
    if class_of.iter().any(|&c| c >= classes.len()) {
        return err("class_of refers to an unknown class");
    }
    let origin = match v.get("origin") {
        Some(_) => usizes(v, "origin")?,
        None => (0..class_of.len()).collect(),
    };
    let mut dotted = Vec::new();
    for d in array_of(v, "dotted")? {
        let entries = entries_of(&classes, &class_of, d, elem_from_json)?;
        let &(r, c) = entries.keys().next().ok_or_else(|| FormatError("dotted generator with no entries".into()))?;
        dotted.push(Dotted { label: label_from_json(field(d, "label")?)?, source: class_of[r], target: class_of[c], entries });
    }
    let mut solid = Vec::new();
    for a in array_of(v, "solid")? {
        let entries = entries_of(&classes, &class_of, a, q_from_json)?;
        if entries.values().all(|x| x == &Q::from_integer(0.into())) {
            return err("solid generator with no nonzero entries");
        }
        solid.push(Solid::new(label_from_json(field(a, "label")?)?, entries, &class_of));
    }
    let mut h = BTreeMap::new();
    for e in v.get("h").and_then(Value::as_array).map(Vec::as_slice).unwrap_or(&[]) {
        h.insert((usize_of(e, "row")?, usize_of(e, "col")?), uni_from_json(field(e, "coeff")?)?);
    }
    Ok(Problem { classes, class_of, dotted, solid, h, origin })
}

pub fn rep_to_json(p: &Problem, r: &Representation) -> Value {
    let weyr: Vec<Value> = r.weyr.iter().map(|(c, m)| json!({"class": p.classes[*c].name, "matrix": matrix_to_json(m)})).collect();
    let blocks: Vec<Value> = p.solid.iter().zip(&r.blocks).map(|(a, m)| json!({"arrow": a.label.to_string(), "matrix": matrix_to_json(m)})).collect();
    json!({"version": VERSION, "sizes": r.sizes, "weyr": weyr, "blocks": blocks})
}

pub fn rep_from_json(p: &Problem, v: &Value) -> Res<Representation> {
    check_version(v)?;
    let sizes = usizes(v, "sizes")?;
    if sizes.len() != p.classes.len() {
        return err(format!("{} sizes for {} classes", sizes.len(), p.classes.len()));
    }
    let mut weyr = BTreeMap::new();
    for w in v.get("weyr").and_then(Value::as_array).map(Vec::as_slice).unwrap_or(&[]) {
        let name = str_of(w, "class")?;
        let c = p.class_by_name(name).ok_or_else(|| FormatError(format!("unknown class `{name}`")))?;
        weyr.insert(c, matrix_from_json(field(w, "matrix")?, Some((sizes[c], sizes[c])))?);
    }
    let list = array_of(v, "blocks")?;
    if list.len() != p.solid.len() {
        return err(format!("{} blocks for {} solid generators", list.len(), p.solid.len()));
    }
    let mut blocks = Vec::new();
    for (a, b) in p.solid.iter().zip(list) {
        if let Some(name) = b.get("arrow").and_then(Value::as_str) {
            if name != a.label.to_string() {
                return err(format!("block `{name}` given where `{}` is expected", a.label));
            }
        }
        let m = b.get("matrix").unwrap_or(b);
        blocks.push(matrix_from_json(m, Some((sizes[a.source], sizes[a.target])))?);
    }
    let r = Representation { sizes, weyr, blocks };
    r.check(p).map_err(|e| FormatError(e.to_string()))?;
    Ok(r)
}

pub fn weyr_to_json(w: &WeyrForm, s: &RatMatrix) -> Value {
    let mut m = Map::new();
    for (l, seq) in &w.eigen {
        m.insert(fmt_q(l), json!(seq));
    }
    json!({
        "eigenvalues": w.eigenvalues().iter().map(q_to_json).collect::<Vec<_>>(),
        "m_sequences": m,
        "weyr": matrix_to_json(&w.matrix),
        "transform": matrix_to_json(s),
    })
}

fn kind_json(k: &StepKind) -> Value {
    match k {
        StepKind::Localization(f) => json!({"name": k.name(), "factor": uni_to_json(f)}),
        StepKind::Unraveling { eigenvalues, depth, keep_parameter } => {
            json!({"name": k.name(), "eigenvalues": eigenvalues.iter().map(q_to_json).collect::<Vec<_>>(), "depth": depth, "keep_parameter": keep_parameter})
        }
        StepKind::EdgeReduction(c) => json!({"name": k.name(), "case": format!("{c:?}")}),
        StepKind::LoopReduction(j) => {
            json!({"name": k.name(), "jordan": j.eigen.iter().map(|(l, c)| json!({"eigenvalue": fmt_q(l), "counts": c})).collect::<Vec<_>>()})
        }
        _ => json!({"name": k.name()}),
    }
}

/// `{kind, B, G, size_map, localized_factors}` plus the arrow, sizes and
/// link count when the step was taken on a representation.
pub fn step_to_json(before: &Problem, after: &Problem, s: &ReductionStep, traced: Option<&TracedStep>) -> Value {
    let mut o = Map::new();
    o.insert("kind".into(), kind_json(&s.kind));
    let g = s.layout.as_ref().and_then(|l| l.la1.as_ref()).map(|m| {
        m.iter().map(|(&(i, j), f)| json!({"row": i, "col": j, "value": f.fmt_vars(&["x"])})).collect::<Vec<_>>()
    });
    o.insert("G".into(), json!(g));
    let size_map = s.layout.as_ref().map(|l| {
        let mut m = Map::new();
        for (c, slots) in l.slots.iter().enumerate() {
            m.insert(before.classes[c].name.clone(), json!(slots.iter().map(|&k| after.classes[k].name.clone()).collect::<Vec<_>>()));
        }
        Value::Object(m)
    });
    o.insert("size_map".into(), json!(size_map));
    o.insert(
        "localized_factors".into(),
        Value::Array(s.localized.iter().map(|(c, f)| json!({"class": before.classes[*c].name, "factor": uni_to_json(f)})).collect()),
    );
    if let Some(rel) = mbp_core::reduce::render_relation(before, s) {
        o.insert("relation".into(), json!(rel));
    }
    if let Some(t) = traced {
        o.insert("arrow".into(), json!(t.arrow));
        o.insert("B".into(), json!(t.b.as_ref().map(matrix_to_json)));
        o.insert("sizes".into(), json!(t.sizes));
        o.insert("links".into(), json!(t.links));
    } else {
        o.insert("B".into(), Value::Null);
    }
    Value::Object(o)
}

/// Trace steps; `problems[k]` is the problem before step `k`.
pub fn trace_to_json(problems: &[Problem], steps: &[TracedStep]) -> Value {
    Value::Array(steps.iter().enumerate().map(|(k, t)| step_to_json(&problems[k], &problems[k + 1], &t.step, Some(t))).collect())
}

pub fn canonical_to_json(p: &Problem, cf: &CanonicalForm) -> Value {
    json!({
        "version": VERSION,
        "links": cf.links,
        "dimension": cf.rep.sizes.iter().sum::<usize>(),
        "canonical": rep_to_json(p, &cf.rep),
        "terminal_classes": cf.terminal.classes.iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
        "steps": cf.trace.steps.len(),
    })
}

pub fn wild_to_json(w: &WildReport) -> Value {
    json!({
        "case": match w.case { WildCase::Case1 => "Case1", WildCase::Case2 => "Case2" },
        "step": w.step,
        "arrow": w.arrow,
        "source": w.source,
        "target": w.target,
        "f": w.f_text,
        "pivot": w.pivot,
        "forbidden": {"source": w.forbidden.0, "target": w.forbidden.1},
        "tag": w.tag,
        "tame_infinite": w.tame_infinite,
        "differential": w.raw,
    })
}

fn choice_json(c: &BranchChoice) -> Value {
    match c {
        BranchChoice::Forced => json!("forced"),
        BranchChoice::Rank(r) => json!({"rank": r}),
        BranchChoice::Jordan(j) => json!({"jordan": j.eigen.iter().map(|(l, c)| json!({"eigenvalue": fmt_q(l), "counts": c})).collect::<Vec<_>>()}),
        BranchChoice::Parameter => json!("parameter"),
    }
}

fn node_json(p: &Problem, n: &TreeNode) -> Value {
    let outcome = match &n.outcome {
        Outcome::Children(c) => json!({"children": c.iter().map(|k| node_json(p, k)).collect::<Vec<_>>()}),
        Outcome::Minimal { canonical } => json!({"minimal": {"canonical": canonical.as_ref().map(|r| rep_to_json(p, r))}}),
        Outcome::Wild(w) => json!({"wild": wild_to_json(w)}),
        Outcome::Truncated => json!("truncated"),
        Outcome::Failed(s) => json!({"failed": s}),
    };
    json!({"choice": choice_json(&n.choice), "step": n.step, "classes": n.classes, "sizes": n.sizes, "outcome": outcome})
}

pub fn tree_to_json(p: &Problem, t: &ReductionTree) -> Value {
    json!({"version": VERSION, "sampled": t.sampled, "root": t.root.as_ref().map(|r| node_json(p, r))})
}

fn choice_text(c: &BranchChoice) -> String {
    match c {
        BranchChoice::Forced => String::new(),
        BranchChoice::Rank(r) => format!("r={r}"),
        BranchChoice::Jordan(j) => j
            .eigen
            .iter()
            .map(|(l, c)| {
                let parts: Vec<String> = c.iter().enumerate().rev().flat_map(|(k, &e)| std::iter::repeat_n((k + 1).to_string(), e)).collect();
                format!("{}:({})", fmt_q(l), parts.join(","))
            })
            .collect::<Vec<_>>()
            .join(" "),
        BranchChoice::Parameter => "x".into(),
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

/// Static graph description of a tree.
pub fn tree_to_dot(t: &ReductionTree) -> String {
    fn walk(n: &TreeNode, id: &mut usize, out: &mut String) -> usize {
        let me = *id;
        *id += 1;
        let classes: Vec<String> = n.classes.iter().zip(&n.sizes).map(|(c, s)| format!("{c}:{s}")).collect();
        let (label, shape) = match &n.outcome {
            Outcome::Children(_) => (classes.join(" "), "ellipse"),
            Outcome::Minimal { .. } => (format!("minimal\n{}", classes.join(" ")), "box"),
            Outcome::Wild(w) => (format!("wild {:?} at {}\n{}", w.case, w.arrow, w.f_text.clone().unwrap_or_default()), "octagon"),
            Outcome::Truncated => ("truncated".into(), "plaintext"),
            Outcome::Failed(s) => (format!("failed: {s}"), "plaintext"),
        };
        out.push_str(&format!("  n{me} [label=\"{}\", shape={shape}];\n", dot_escape(&label)));
        if let Outcome::Children(kids) = &n.outcome {
            for k in kids {
                let c = walk(k, id, out);
                let lbl = format!("{} {}", k.step.unwrap_or(""), choice_text(&k.choice));
                out.push_str(&format!("  n{me} -> n{c} [label=\"{}\"];\n", dot_escape(lbl.trim())));
            }
        }
        me
    }
    let mut out = String::from("digraph reduction_tree {\n  label=\"sampled exploration\";\n");
    if let Some(r) = &t.root {
        walk(r, &mut 0, &mut out);
    }
    out.push_str("}\n");
    out
}

/// Indented text rendering of a tree.
pub fn tree_to_text(t: &ReductionTree) -> String {
    fn walk(n: &TreeNode, depth: usize, out: &mut String) {
        let head = match (n.step, choice_text(&n.choice)) {
            (None, _) => "root".to_string(),
            (Some(s), c) if c.is_empty() => s.to_string(),
            (Some(s), c) => format!("{s} {c}"),
        };
        let classes: Vec<String> = n.classes.iter().zip(&n.sizes).map(|(c, s)| format!("{c}:{s}")).collect();
        let tail = match &n.outcome {
            Outcome::Children(_) => String::new(),
            Outcome::Minimal { .. } => " minimal".into(),
            Outcome::Wild(w) => format!(" wild {:?} {}{}", w.case, w.arrow, w.f_text.as_ref().map(|f| format!(" f={f}")).unwrap_or_default()),
            Outcome::Truncated => " truncated".into(),
            Outcome::Failed(s) => format!(" failed: {s}"),
        };
        out.push_str(&format!("{}{head} [{}]{tail}\n", "  ".repeat(depth), classes.join(" ")));
        if let Outcome::Children(kids) = &n.outcome {
            for k in kids {
                walk(k, depth + 1, out);
            }
        }
    }
    let mut out = String::from("# sampled exploration\n");
    if let Some(r) = &t.root {
        walk(r, 0, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use mbp_core::algebra::{build_based_algebra, build_bipartite_problem, parse_presentation};

    #[test]
    fn rationals() {
        let x = parse_q("-3/6").unwrap();
        assert_eq!(q_to_json(&x), json!("-1/2"));
        assert_eq!(q_from_json(&json!("4/2")).unwrap(), parse_q("2").unwrap());
        assert_eq!(q_from_json(&json!(7)).unwrap(), parse_q("7").unwrap());
        assert!(q_from_json(&json!(0.5)).is_err());
        assert!(q_from_json(&json!("1/0")).is_err());
    }

    #[test]
    fn problem_round_trip() {
        let text = "vertices: 1\narrow a: 1 -> 1\narrow b: 1 -> 1\nrelation: a*a\nrelation: b*a - a*b\nrelation: a*b*b\nrelation: b*b*b\nnilpotency: 3\nbasis: d=a*b c=b*b b a\n";
        let p = build_bipartite_problem(&build_based_algebra(&parse_presentation(text).unwrap()).unwrap());
        let v = problem_to_json(&p);
        let back = problem_from_json(&v).unwrap();
        assert_eq!(back, p);
        assert_eq!(serde_json::to_string(&problem_to_json(&back)).unwrap(), serde_json::to_string(&v).unwrap());
    }

    #[test]
    fn empty_matrices_keep_shape() {
        let m = matrix_from_json(&json!([]), Some((0, 3))).unwrap();
        assert_eq!(m.shape(), (0, 3));
        assert!(matrix_from_json(&json!([["1"], ["1", "2"]]), None).is_err());
    }
}
