//! Quivers with relations, their based quotient algebras, left regular
//! representations and the bipartite problems built from them.

use crate::exact::{normalized_basis, parse_q, q, LocalizedElem, RatMatrix, Q};
use crate::problem::{trivial_classes, Dotted, Label, Problem, Solid, VertexClass};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub source: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quiver {
    pub vertices: Vec<String>,
    pub arrows: Vec<Arrow>,
}

/// Linear combination of paths; a path is its arrow sequence, composed
/// left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub terms: Vec<(Q, Vec<usize>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraPresentation {
    pub quiver: Quiver,
    pub relations: Vec<Relation>,
    pub nilpotency: usize,
    /// Optional radical basis in listing order (deepest layer first):
    /// display name and representing path.
    pub basis: Option<Vec<(String, Vec<usize>)>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraError {
    Parse { line: usize, col: usize, msg: String },
    UnknownArrow { line: usize, col: usize, name: String },
    NotParallel { line: usize },
    NotAdmissible { relation: usize, reason: &'static str },
    NotFiniteDimensional { path: String },
    BadBasis(String),
    Unsupported(&'static str),
}

impl fmt::Display for AlgebraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraError::Parse { line, col, msg } => write!(f, "{line}:{col}: {msg}"),
            AlgebraError::UnknownArrow { line, col, name } => write!(f, "{line}:{col}: unknown arrow `{name}`"),
            AlgebraError::NotParallel { line } => write!(f, "{line}: relation terms are not parallel paths"),
            AlgebraError::NotAdmissible { relation, reason } => write!(f, "relation {}: {reason}", relation + 1),
            AlgebraError::NotFiniteDimensional { path } => write!(f, "path {path} survives at the nilpotency bound"),
            AlgebraError::BadBasis(s) => write!(f, "bad basis directive: {s}"),
            AlgebraError::Unsupported(s) => write!(f, "unsupported: {s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(Q),
    Plus,
    Minus,
    Star,
    Eq,
}

fn tokenize(s: &str, line: usize, col0: usize) -> Result<Vec<(Tok, usize)>, AlgebraError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push((Tok::Ident(chars[st..i].iter().collect()), col));
        } else if c.is_ascii_digit() {
            let st = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '/') {
                i += 1;
            }
            let txt: String = chars[st..i].iter().collect();
            let v = parse_q(&txt).ok_or_else(|| AlgebraError::Parse { line, col, msg: format!("bad number `{txt}`") })?;
            out.push((Tok::Num(v), col));
        } else {
            let t = match c {
                '+' => Tok::Plus,
                '-' | '−' => Tok::Minus,
                '*' => Tok::Star,
                '=' => Tok::Eq,
                _ => return Err(AlgebraError::Parse { line, col, msg: format!("unexpected character `{c}`") }),
            };
            out.push((t, col));
            i += 1;
        }
    }
    Ok(out)
}

struct Ctx<'a> {
    vertices: &'a [String],
    arrows: &'a [Arrow],
    line: usize,
}

impl Ctx<'_> {
    fn arrow(&self, name: &str, col: usize) -> Result<Vec<usize>, AlgebraError> {
        if let Some(i) = self.arrows.iter().position(|a| a.name == name) {
            return Ok(vec![i]);
        }
        // juxtaposed single-letter arrows, e.g. `ab`
        let mut out = Vec::new();
        for ch in name.chars() {
            let mut buf = [0u8; 4];
            let s: &str = ch.encode_utf8(&mut buf);
            match self.arrows.iter().position(|a| a.name == s) {
                Some(i) => out.push(i),
                None => return Err(AlgebraError::UnknownArrow { line: self.line, col, name: name.into() }),
            }
        }
        Ok(out)
    }

    /// `ident (* ident)*`, starting at `toks[*k]`.
    fn path(&self, toks: &[(Tok, usize)], k: &mut usize) -> Result<Vec<usize>, AlgebraError> {
        let mut out = Vec::new();
        loop {
            match toks.get(*k) {
                Some((Tok::Ident(n), c)) => {
                    out.extend(self.arrow(n, *c)?);
                    *k += 1;
                }
                Some((_, c)) => return Err(AlgebraError::Parse { line: self.line, col: *c, msg: "expected an arrow".into() }),
                None => return Err(AlgebraError::Parse { line: self.line, col: 0, msg: "expected an arrow".into() }),
            }
            if matches!(toks.get(*k), Some((Tok::Star, _))) && matches!(toks.get(*k + 1), Some((Tok::Ident(_), _))) {
                *k += 1;
            } else {
                return Ok(out);
            }
        }
    }

    fn endpoints(&self, p: &[usize]) -> Option<(usize, usize)> {
        for w in p.windows(2) {
            if self.arrows[w[0]].target != self.arrows[w[1]].source {
                return None;
            }
        }
        Some((self.arrows[p[0]].source, self.arrows[*p.last()?].target))
    }

    fn vertex(&self, name: &str, col: usize) -> Result<usize, AlgebraError> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| AlgebraError::Parse { line: self.line, col, msg: format!("unknown vertex `{name}`") })
    }
}

/// Parses the line-oriented quiver format:
///
/// ```text
/// vertices: 1 2
/// arrow a: 1 -> 2
/// relation: a*b - b*a
/// nilpotency: 3
/// basis: d=a*b c=b*b b a
/// ```
///
/// `#` starts a comment and `;` separates statements on one line.
pub fn parse_presentation(text: &str) -> Result<AlgebraPresentation, AlgebraError> {
    let mut vertices: Option<Vec<String>> = None;
    let mut arrows: Vec<Arrow> = Vec::new();
    let mut rel_src: Vec<(usize, usize, String)> = Vec::new();
    let mut basis_src: Option<(usize, usize, String)> = None;
    let mut nilpotency = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut offset = 0;
        for stmt in body.split(';') {
            let start = offset;
            offset += stmt.chars().count() + 1;
            let lead = stmt.chars().take_while(|c| c.is_whitespace()).count();
            let st = stmt.trim();
            if st.is_empty() {
                continue;
            }
            let col = start + lead + 1;
            let Some((key, rest)) = st.split_once(':') else {
                return Err(AlgebraError::Parse { line, col, msg: "expected `key: value`".into() });
            };
            let rest_col = col + key.chars().count() + 1;
            let key = key.trim();
            let mut words = key.split_whitespace();
            match words.next() {
                Some("vertices") => {
                    let names: Vec<String> = rest.split_whitespace().map(String::from).collect();
                    if names.is_empty() {
                        return Err(AlgebraError::Parse { line, col: rest_col, msg: "no vertices".into() });
                    }
                    vertices = Some(match names.as_slice() {
                        [n] if n.parse::<usize>().is_ok_and(|k| k > 1) => (1..=n.parse::<usize>().unwrap()).map(|i| i.to_string()).collect(),
                        _ => names,
                    });
                }
                Some("arrow") | Some("arrows") => {
                    let vs = vertices.as_deref().ok_or(AlgebraError::Parse { line, col, msg: "arrow before vertices".into() })?;
                    // `arrow a: 1 -> 2` or `arrows: a: 1 -> 2`
                    let (name, spec, spec_col) = match words.next() {
                        Some(n) => (n.to_string(), rest, rest_col),
                        None => {
                            let (n, s) = rest.split_once(':').ok_or(AlgebraError::Parse { line, col: rest_col, msg: "expected `name: src -> tgt`".into() })?;
                            (n.trim().to_string(), s, rest_col + n.chars().count() + 1)
                        }
                    };
                    let Some((s, t)) = spec.split_once("->") else {
                        return Err(AlgebraError::Parse { line, col: spec_col, msg: "expected `src -> tgt`".into() });
                    };
                    let (s, t) = (s.trim(), t.trim());
                    let tcol = spec_col + spec.find("->").unwrap() + 2;
                    if s.is_empty() {
                        return Err(AlgebraError::Parse { line, col: spec_col, msg: "missing source vertex".into() });
                    }
                    if t.is_empty() {
                        return Err(AlgebraError::Parse { line, col: tcol, msg: "missing target vertex".into() });
                    }
                    if arrows.iter().any(|a| a.name == name) {
                        return Err(AlgebraError::Parse { line, col, msg: format!("duplicate arrow `{name}`") });
                    }
                    let ctx = Ctx { vertices: vs, arrows: &arrows, line };
                    let a = Arrow { name, source: ctx.vertex(s, spec_col)?, target: ctx.vertex(t, tcol)? };
                    arrows.push(a);
                }
                Some("relation") | Some("relations") => rel_src.push((line, rest_col, rest.into())),
                Some("basis") => basis_src = Some((line, rest_col, rest.into())),
                Some("nilpotency") => {
                    let n = rest.trim().parse::<usize>().map_err(|_| AlgebraError::Parse { line, col: rest_col, msg: "expected a positive integer".into() })?;
                    if n == 0 {
                        return Err(AlgebraError::Parse { line, col: rest_col, msg: "nilpotency must be positive".into() });
                    }
                    nilpotency = Some(n);
                }
                _ => return Err(AlgebraError::Parse { line, col, msg: format!("unknown key `{key}`") }),
            }
        }
    }
    let vertices = vertices.ok_or(AlgebraError::Parse { line: 1, col: 1, msg: "missing `vertices:`".into() })?;
    let mut relations = Vec::new();
    for (line, col, src) in rel_src {
        let ctx = Ctx { vertices: &vertices, arrows: &arrows, line };
        let toks = tokenize(&src, line, col)?;
        // a comma-free list: several relations on one line are separated by `,` in the source
        let mut terms: Vec<(Q, Vec<usize>)> = Vec::new();
        let mut k = 0;
        while k < toks.len() {
            let mut sign = Q::one();
            let mut saw_sign = false;
            while let Some((t @ (Tok::Plus | Tok::Minus), _)) = toks.get(k) {
                if *t == Tok::Minus {
                    sign = -sign;
                }
                saw_sign = true;
                k += 1;
            }
            if !terms.is_empty() && !saw_sign {
                return Err(AlgebraError::Parse { line, col: toks[k].1, msg: "expected `+` or `-`".into() });
            }
            let mut c = sign;
            if let Some((Tok::Num(v), _)) = toks.get(k) {
                c *= v;
                k += 1;
                if matches!(toks.get(k), Some((Tok::Star, _))) {
                    k += 1;
                }
            }
            let p = ctx.path(&toks, &mut k)?;
            terms.push((c, p));
        }
        if terms.is_empty() {
            return Err(AlgebraError::Parse { line, col, msg: "empty relation".into() });
        }
        let ends: Vec<Option<(usize, usize)>> = terms.iter().map(|(_, p)| ctx.endpoints(p)).collect();
        if ends.iter().any(|e| e.is_none() || *e != ends[0]) {
            return Err(AlgebraError::NotParallel { line });
        }
        relations.push(Relation { terms });
    }
    let basis = match basis_src {
        None => None,
        Some((line, col, src)) => {
            let ctx = Ctx { vertices: &vertices, arrows: &arrows, line };
            let mut items = Vec::new();
            let mut cur_col = col;
            for word in src.split_whitespace() {
                let wcol = cur_col + src[cur_col - col..].find(word).unwrap_or(0);
                cur_col = wcol + word.len();
                let toks = tokenize(word, line, wcol)?;
                let (name, mut k) = match (toks.first(), toks.get(1)) {
                    (Some((Tok::Ident(n), _)), Some((Tok::Eq, _))) => (Some(n.clone()), 2),
                    _ => (None, 0),
                };
                let p = ctx.path(&toks, &mut k)?;
                if k != toks.len() {
                    return Err(AlgebraError::Parse { line, col: toks[k].1, msg: "trailing input in basis entry".into() });
                }
                if ctx.endpoints(&p).is_none() {
                    return Err(AlgebraError::Parse { line, col: wcol, msg: "basis entry is not a path".into() });
                }
                let name = name.unwrap_or_else(|| p.iter().map(|&a| arrows[a].name.as_str()).collect());
                items.push((name, p));
            }
            Some(items)
        }
    };
    let nilpotency = nilpotency.ok_or(AlgebraError::Parse { line: 1, col: 1, msg: "missing `nilpotency:`".into() })?;
    Ok(AlgebraPresentation { quiver: Quiver { vertices, arrows }, relations, nilpotency, basis })
}

/// Path with explicit endpoints; the empty path at a vertex is its idempotent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Path {
    source: usize,
    arrows: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasedAlgebra {
    pub quiver: Quiver,
    /// Basis in listing order: radical `a_n, …, a_1`, then `e_1, …, e_h`.
    pub names: Vec<String>,
    pub radical_dim: usize,
    /// Radical layer per basis element, 0 for idempotents.
    pub layer: Vec<usize>,
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    /// `table[i][j]`: product of basis elements `i·j` as sparse coordinates.
    pub table: Vec<Vec<Vec<(usize, Q)>>>,
}

impl BasedAlgebra {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Listing position of the radical element `a_i` (1-based `i`).
    pub fn radical_position(&self, i: usize) -> usize {
        self.radical_dim - i
    }

    pub fn idempotent_position(&self, v: usize) -> usize {
        self.radical_dim + v
    }

    pub fn product(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.dim()];
        for (i, xi) in x.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            for (j, yj) in y.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                for (k, c) in &self.table[i][j] {
                    out[*k] += xi * yj * c;
                }
            }
        }
        out
    }

    /// Left multiplication by basis element `k` as a matrix in the ordered basis.
    pub fn left_mult(&self, k: usize) -> RatMatrix {
        let n = self.dim();
        let mut m = RatMatrix::zeros(n, n);
        for j in 0..n {
            for (i, c) in &self.table[k][j] {
                m.set(*i, j, c.clone());
            }
        }
        m
    }
}

fn path_name(q: &Quiver, p: &Path) -> String {
    if p.arrows.is_empty() {
        return format!("e{}", q.vertices[p.source]);
    }
    p.arrows.iter().map(|&a| q.arrows[a].name.as_str()).collect::<Vec<_>>().join("*")
}

fn path_target(q: &Quiver, p: &Path) -> usize {
    p.arrows.last().map_or(p.source, |&a| q.arrows[a].target)
}

fn all_paths(q: &Quiver, max_len: usize) -> Vec<Path> {
    let mut out: Vec<Path> = (0..q.vertices.len()).map(|v| Path { source: v, arrows: vec![] }).collect();
    let mut frontier = out.clone();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for p in &frontier {
            let t = path_target(q, p);
            for (i, a) in q.arrows.iter().enumerate() {
                if a.source == t {
                    let mut np = p.clone();
                    np.arrows.push(i);
                    next.push(np);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Builds the ordered basis and multiplication table of `kQ/I`.
pub fn build_based_algebra(p: &AlgebraPresentation) -> Result<BasedAlgebra, AlgebraError> {
    let q = &p.quiver;
    let n = p.nilpotency;
    for (ri, r) in p.relations.iter().enumerate() {
        if r.terms.iter().any(|(_, path)| path.len() < 2) {
            return Err(AlgebraError::NotAdmissible { relation: ri, reason: "relation has a term of length below two" });
        }
        let src = |path: &Vec<usize>| (q.arrows[path[0]].source, q.arrows[*path.last().unwrap()].target);
        if r.terms.iter().any(|(_, path)| src(path) != src(&r.terms[0].1)) {
            return Err(AlgebraError::NotAdmissible { relation: ri, reason: "terms are not parallel" });
        }
    }
    // columns: largest path first (length, then spelling)
    let mut paths = all_paths(q, n);
    paths.sort_by(|a, b| b.arrows.len().cmp(&a.arrows.len()).then(b.arrows.cmp(&a.arrows)).then(b.source.cmp(&a.source)));
    let index: BTreeMap<Path, usize> = paths.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let np = paths.len();
    // generators u·ρ·w, truncated above the bound
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for r in &p.relations {
        let s = q.arrows[r.terms[0].1[0]].source;
        let t = q.arrows[*r.terms[0].1.last().unwrap()].target;
        let minlen = r.terms.iter().map(|(_, x)| x.len()).min().unwrap();
        for u in paths.iter().filter(|u| path_target(q, u) == s && u.arrows.len() + minlen <= n) {
            for w in paths.iter().filter(|w| w.source == t && u.arrows.len() + minlen + w.arrows.len() <= n) {
                let mut row = vec![Q::zero(); np];
                for (c, mid) in &r.terms {
                    let mut arrows = u.arrows.clone();
                    arrows.extend(mid);
                    arrows.extend(&w.arrows);
                    if arrows.len() > n {
                        continue;
                    }
                    let src = if u.arrows.is_empty() { s } else { u.source };
                    row[index[&Path { source: src, arrows }]] += c;
                }
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    let (reduced, pivots) = if rows.is_empty() {
        (RatMatrix::zeros(0, np), Vec::new())
    } else {
        let rr = RatMatrix::from_rows(rows).rref();
        (rr.reduced, rr.pivots)
    };
    let pivot_row: BTreeMap<usize, usize> = pivots.iter().enumerate().map(|(r, &c)| (c, r)).collect();
    let standard: Vec<usize> = (0..np).filter(|c| !pivot_row.contains_key(c)).collect();
    if let Some(&c) = standard.iter().find(|&&c| paths[c].arrows.len() >= n) {
        return Err(AlgebraError::NotFiniteDimensional { path: path_name(q, &paths[c]) });
    }
    let spos: BTreeMap<usize, usize> = standard.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let ns = standard.len();
    // normal form of a path in standard-monomial coordinates
    let nf = |path: &Path| -> Vec<Q> {
        let mut v = vec![Q::zero(); ns];
        if path.arrows.len() > n {
            return v;
        }
        let c = index[path];
        match pivot_row.get(&c) {
            None => v[spos[&c]] = Q::one(),
            Some(&r) => {
                for (k, &sc) in standard.iter().enumerate() {
                    let x = reduced.get(r, sc);
                    if !x.is_zero() {
                        v[k] = -x.clone();
                    }
                }
            }
        }
        v
    };
    // layer filtration: W_i = span of normal forms of paths of length >= i
    let span_from = |i: usize| -> crate::exact::SparseEchelon {
        let mut e = crate::exact::SparseEchelon::new();
        for path in paths.iter().filter(|x| x.arrows.len() >= i) {
            e.insert(to_sparse(&nf(path)));
        }
        e
    };
    let layers: Vec<crate::exact::SparseEchelon> = (0..=n + 1).map(span_from).collect();
    let layer_of = |v: &[Q]| -> usize {
        let s = to_sparse(v);
        (1..=n).rev().find(|&i| layers[i].reduce(s.clone()).is_empty()).unwrap_or(0)
    };
    // radical basis in a-order (a_1 first)
    let mut radical: Vec<(String, Path, Vec<Q>, usize)> = Vec::new();
    match &p.basis {
        None => {
            for i in 1..n {
                let mut cand: Vec<&Path> = paths.iter().filter(|x| x.arrows.len() == i).collect();
                let key = |x: &Path| (x.source, path_target(q, x), path_name(q, x));
                cand.sort_by_key(|x| key(x));
                let mut ech = layers[i + 1].clone();
                for c in cand {
                    let v = nf(c);
                    if ech.insert(to_sparse(&v)) {
                        radical.push((path_name(q, c).replace('*', ""), c.clone(), v, i));
                    }
                }
            }
        }
        Some(items) => {
            let mut ech: BTreeMap<usize, crate::exact::SparseEchelon> = BTreeMap::new();
            for (name, arrows) in items.iter().rev() {
                let path = Path { source: q.arrows[arrows[0]].source, arrows: arrows.clone() };
                let v = nf(&path);
                let l = layer_of(&v);
                if l == 0 || l != path.arrows.len() {
                    return Err(AlgebraError::BadBasis(format!("`{name}` does not represent a layer-{} element", path.arrows.len())));
                }
                if radical.last().is_some_and(|x| x.3 > l) {
                    return Err(AlgebraError::BadBasis("entries must be listed from the deepest layer down".into()));
                }
                let e = ech.entry(l).or_insert_with(|| layers[l + 1].clone());
                if !e.insert(to_sparse(&v)) {
                    return Err(AlgebraError::BadBasis(format!("`{name}` is dependent on earlier entries")));
                }
                radical.push((name.clone(), path, v, l));
            }
        }
    }
    let nrad = ns - q.vertices.len();
    if radical.len() != nrad {
        return Err(AlgebraError::BadBasis(format!("{} radical elements given, dimension is {}", radical.len(), nrad)));
    }
    radical.reverse();
    let mut names = Vec::new();
    let mut layer = Vec::new();
    let mut source = Vec::new();
    let mut target = Vec::new();
    let mut vecs: Vec<Vec<Q>> = Vec::new();
    let mut reps: Vec<Path> = Vec::new();
    for (name, path, v, l) in radical {
        names.push(name);
        layer.push(l);
        source.push(path.source);
        target.push(path_target(q, &path));
        vecs.push(v);
        reps.push(path);
    }
    for v in 0..q.vertices.len() {
        let path = Path { source: v, arrows: vec![] };
        names.push(if q.vertices.len() == 1 { "e".into() } else { format!("e{}", q.vertices[v]) });
        layer.push(0);
        source.push(v);
        target.push(v);
        vecs.push(nf(&path));
        reps.push(path);
    }
    let basis_mat = RatMatrix::from_rows(vecs.clone());
    let inv = basis_mat.inverse().ok_or(AlgebraError::BadBasis("basis is not independent".into()))?;
    let dim = names.len();
    // product of standard monomials, then coordinates in the chosen basis
    let mono_prod = |a: usize, b: usize| -> Vec<Q> {
        let (pa, pb) = (&paths[standard[a]], &paths[standard[b]]);
        if path_target(q, pa) != pb.source {
            return vec![Q::zero(); ns];
        }
        let mut arrows = pa.arrows.clone();
        arrows.extend(&pb.arrows);
        if arrows.len() > n {
            return vec![Q::zero(); ns];
        }
        nf(&Path { source: pa.source, arrows })
    };
    let mut table = vec![vec![Vec::new(); dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = vec![Q::zero(); ns];
            for (a, x) in vecs[i].iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                for (b, y) in vecs[j].iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                    for (k, z) in mono_prod(a, b).into_iter().enumerate() {
                        if !z.is_zero() {
                            acc[k] += x * y * z;
                        }
                    }
                }
            }
            // row vector times inverse basis matrix
            let mut coords = vec![Q::zero(); dim];
            for (k, z) in acc.iter().enumerate().filter(|(_, z)| !z.is_zero()) {
                for (l, c) in coords.iter_mut().enumerate() {
                    let w = inv.get(k, l);
                    if !w.is_zero() {
                        *c += z * w;
                    }
                }
            }
            table[i][j] = coords.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        }
    }
    let _ = reps;
    Ok(BasedAlgebra { quiver: q.clone(), names, radical_dim: nrad, layer, source, target, table })
}

fn to_sparse(v: &[Q]) -> BTreeMap<usize, Q> {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
}

/// Left regular representation: the generic element `Σ x_k b_k` acting on
/// the ordered basis. `entries[(i, j)]` lists `(k, coeff)` with the
/// coefficient of `b_i` in `b_k · b_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularRep {
    pub size: usize,
    pub names: Vec<String>,
    pub entries: BTreeMap<(usize, usize), Vec<(usize, Q)>>,
}

impl RegularRep {
    /// Symbolic grid, `"0"` for empty entries.
    pub fn pattern(&self) -> Vec<Vec<String>> {
        let mut g = vec![vec![String::from("0"); self.size]; self.size];
        for (&(i, j), terms) in &self.entries {
            let parts: Vec<String> = terms
                .iter()
                .map(|(k, c)| if c.is_one() { self.names[*k].clone() } else { format!("{}{}", crate::exact::fmt_q(c), self.names[*k]) })
                .collect();
            g[i][j] = parts.join("+");
        }
        g
    }

    pub fn matrix_of(&self, k: usize) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.size, self.size);
        for (&(i, j), terms) in &self.entries {
            for (kk, c) in terms {
                if *kk == k {
                    m.set(i, j, c.clone());
                }
            }
        }
        m
    }
}

pub fn regular_representation(a: &BasedAlgebra) -> RegularRep {
    let mut entries: BTreeMap<(usize, usize), Vec<(usize, Q)>> = BTreeMap::new();
    for k in 0..a.dim() {
        for j in 0..a.dim() {
            for (i, c) in &a.table[k][j] {
                entries.entry((*i, j)).or_default().push((k, c.clone()));
            }
        }
    }
    RegularRep { size: a.dim(), names: a.names.clone(), entries }
}

fn class_names(a: &BasedAlgebra) -> (Vec<String>, Vec<String>) {
    let h = a.quiver.vertices.len();
    if h == 1 {
        (vec!["X".into()], vec!["Y".into()])
    } else {
        (a.quiver.vertices.iter().map(|v| format!("X{v}")).collect(), a.quiver.vertices.iter().map(|v| format!("Y{v}")).collect())
    }
}

/// The bipartite problem of an algebra: two copies of the regular
/// representation on the diagonal, the radical in the off-diagonal block.
/// The left copy acts on the rows of the radical block.
pub fn build_bipartite_problem(a: &BasedAlgebra) -> Problem {
    let d = a.dim();
    let h = a.quiver.vertices.len();
    let t = 2 * d;
    let (xn, yn) = class_names(a);
    let mut classes: Vec<VertexClass> = Vec::new();
    for n in xn.iter().chain(&yn) {
        classes.push(trivial_classes(&[n.as_str()]).remove(0));
    }
    let class_of: Vec<usize> = (0..t).map(|i| if i < d { a.source[i] } else { h + a.source[i - d] }).collect();
    let reg = regular_representation(a);
    let n = a.radical_dim;
    let mats: Vec<RatMatrix> = (1..=n).map(|i| reg.matrix_of(a.radical_position(i))).collect();
    let mut dotted = Vec::new();
    for (side, stem, off) in [(0usize, "u", 0usize), (1, "v", d)] {
        for (i, m) in mats.iter().enumerate() {
            let entries: BTreeMap<(usize, usize), LocalizedElem> = m.nonzeros().map(|((r, c), v)| ((r + off, c + off), LocalizedElem::constant(v.clone()))).collect();
            let k = a.radical_position(i + 1);
            dotted.push(Dotted { label: Label::indexed(stem, i + 1), source: side * h + a.source[k], target: side * h + a.target[k], entries });
        }
    }
    let placed: Vec<RatMatrix> = mats
        .iter()
        .map(|m| {
            let mut big = RatMatrix::zeros(t, t);
            big.set_block(0, d, m);
            big
        })
        .collect();
    let mut solid = Vec::new();
    for (m, (r, _)) in normalized_basis(&placed) {
        let entries: BTreeMap<(usize, usize), Q> = m.nonzeros().map(|(p, v)| (p, v.clone())).collect();
        solid.push(Solid::new(Label::new(&a.names[r]), entries, &class_of));
    }
    Problem { classes, class_of, dotted, solid, h: BTreeMap::new(), origin: (0..t).collect() }
}

/// Representations of a quiver as a matrix problem: one trivial class and
/// one index per vertex, one solid generator `E_{s,t}` per arrow, no dotted
/// part. Relations are not imposed.
pub fn quiver_problem(quiver: &Quiver) -> Result<Problem, AlgebraError> {
    let t = quiver.vertices.len();
    let mut seen = BTreeMap::new();
    for a in &quiver.arrows {
        if seen.insert((a.source, a.target), ()).is_some() {
            return Err(AlgebraError::Unsupported("parallel arrows share a leading position"));
        }
    }
    let names: Vec<&str> = quiver.vertices.iter().map(String::as_str).collect();
    let class_of: Vec<usize> = (0..t).collect();
    let mut solid: Vec<Solid> = quiver.arrows.iter().map(|a| Solid::new(Label::new(&a.name), [((a.source, a.target), q(1))].into_iter().collect(), &class_of)).collect();
    solid.sort_by(|x, y| crate::exact::position_cmp(x.lead, y.lead));
    Ok(Problem { classes: trivial_classes(&names), class_of, dotted: vec![], solid, h: BTreeMap::new(), origin: (0..t).collect() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RdccReport {
    pub distinct_rows: bool,
    pub concentrated: bool,
    /// Pairs of solid generators sharing a leading row; generators whose
    /// leading column is not the main column of their target class.
    pub row_clashes: Vec<(usize, usize)>,
    pub off_main: Vec<usize>,
}

impl RdccReport {
    pub fn holds(&self) -> bool {
        self.distinct_rows && self.concentrated
    }
}

pub fn check_rdcc(p: &Problem) -> RdccReport {
    let mut row_clashes = Vec::new();
    for i in 0..p.solid.len() {
        for j in i + 1..p.solid.len() {
            if p.solid[i].lead.0 == p.solid[j].lead.0 {
                row_clashes.push((i, j));
            }
        }
    }
    let off_main: Vec<usize> = (0..p.solid.len())
        .filter(|&i| {
            let a = &p.solid[i];
            p.class_indices(a.target).into_iter().max() != Some(a.lead.1)
        })
        .collect();
    RdccReport { distinct_rows: row_clashes.is_empty(), concentrated: off_main.is_empty(), row_clashes, off_main }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const TWOLOOP: &str = "vertices: 1\narrow a: 1 -> 1\narrow b: 1 -> 1\nrelation: a*a\nrelation: b*a - a*b\nrelation: a*b*b\nrelation: b*b*b\nnilpotency: 3\nbasis: d=a*b c=b*b b a\n";

    #[test]
    fn parses_and_builds_the_two_loop_algebra() {
        let p = parse_presentation(TWOLOOP).unwrap();
        assert_eq!(p.quiver.arrows.len(), 2);
        assert_eq!(p.relations.len(), 4);
        let a = build_based_algebra(&p).unwrap();
        assert_eq!(a.names, ["d", "c", "b", "a", "e"]);
        assert_eq!(a.layer, [2, 2, 1, 1, 0]);
        let reg = regular_representation(&a);
        let pat = reg.pattern();
        assert_eq!(pat[0], ["e", "0", "a", "b", "d"]);
        assert_eq!(pat[1], ["0", "e", "b", "0", "c"]);
        assert_eq!(pat[2], ["0", "0", "e", "0", "b"]);
        assert_eq!(pat[3], ["0", "0", "0", "e", "a"]);
        // associativity on basis triples
        let d = a.dim();
        let unit = |i: usize| (0..d).map(|k| if k == i { q(1) } else { Q::zero() }).collect::<Vec<_>>();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let l = a.product(&a.product(&unit(i), &unit(j)), &unit(k));
                    let r = a.product(&unit(i), &a.product(&unit(j), &unit(k)));
                    assert_eq!(l, r);
                }
            }
        }
    }

    #[test]
    fn default_basis_order_is_lexicographic_per_layer() {
        let text = TWOLOOP.replace("basis: d=a*b c=b*b b a\n", "");
        let a = build_based_algebra(&parse_presentation(&text).unwrap()).unwrap();
        assert_eq!(a.names, ["bb", "ab", "b", "a", "e"]);
    }

    #[test]
    fn bipartite_problem_of_the_two_loop_algebra() {
        let a = build_based_algebra(&parse_presentation(TWOLOOP).unwrap()).unwrap();
        let p = build_bipartite_problem(&a);
        assert!(p.validate().is_empty(), "{:?}", p.validate());
        let labels: Vec<String> = p.solid.iter().map(|s| s.label.to_string()).collect();
        assert_eq!(labels, ["a", "b", "c", "d"]);
        assert!(check_rdcc(&p).holds());
        let diffs = p.differentials();
        let lines: Vec<String> = diffs.rows.iter().map(|d| p.render_differential(d)).collect();
        assert_eq!(lines, ["δ(a)=0", "δ(b)=0", "δ(c)=u₂b−bv₂", "δ(d)=u₁b+u₂a−bv₁−av₂"]);
    }

    #[test]
    fn small_algebras() {
        let a2 = build_based_algebra(&parse_presentation("vertices: 1 2\narrow al: 1 -> 2\nnilpotency: 2").unwrap()).unwrap();
        assert_eq!(a2.dim(), 3);
        assert_eq!(a2.names, ["al", "e1", "e2"]);
        let reg = regular_representation(&a2);
        assert_eq!(reg.entries.iter().filter(|((i, j), _)| i != j).count(), 1);
        let p = build_bipartite_problem(&a2);
        assert!(p.validate().is_empty());
        assert_eq!(p.solid.len(), 1);
        assert!(p.differentials().rows[0].is_zero());
        let loop_ = build_based_algebra(&parse_presentation("vertices: 1; arrow a: 1 -> 1; relation: a*a; nilpotency: 2").unwrap()).unwrap();
        assert_eq!(loop_.names, ["a", "e"]);
        let ss = build_based_algebra(&parse_presentation("vertices: 1 2\nnilpotency: 1").unwrap()).unwrap();
        assert_eq!(ss.dim(), 2);
        assert!(build_bipartite_problem(&ss).is_minimal());
        assert_eq!(regular_representation(&ss).pattern(), [["e1", "0"], ["0", "e2"]]);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_presentation("vertices: 1\narrow a: 1 ->\nnilpotency: 2"), Err(AlgebraError::Parse { line: 2, .. })));
        assert!(matches!(parse_presentation("vertices: 1\narrow a: 1 -> 1\nrelation: a*z\nnilpotency: 2"), Err(AlgebraError::UnknownArrow { line: 3, .. })));
        assert!(matches!(parse_presentation("vertices: 1 2\narrow a: 1 -> 2\narrow b: 1 -> 1\nrelation: a - b*b\nnilpotency: 2"), Err(AlgebraError::NotParallel { line: 4 })));
        let free_loop = parse_presentation("vertices: 1\narrow a: 1 -> 1\nnilpotency: 3").unwrap();
        assert!(matches!(build_based_algebra(&free_loop), Err(AlgebraError::NotFiniteDimensional { .. })));
        let short = parse_presentation("vertices: 1\narrow a: 1 -> 1\nrelation: a\nnilpotency: 3").unwrap();
        assert!(matches!(build_based_algebra(&short), Err(AlgebraError::NotAdmissible { .. })));
    }

    #[test]
    fn quiver_problems_and_rdcc() {
        let qv = parse_presentation("vertices: 1 2 3\narrow al: 1 -> 2\narrow be: 2 -> 3\nnilpotency: 3").unwrap().quiver;
        let p = quiver_problem(&qv).unwrap();
        assert!(p.validate().is_empty());
        assert_eq!(p.solid[0].label.to_string(), "be");
        let mut bad = p.clone();
        bad.solid[1] = Solid::new(Label::new("x"), [((1, 0), q(1))].into_iter().collect(), &bad.class_of);
        assert!(!check_rdcc(&bad).distinct_rows);
        let mut empty = p;
        empty.solid.clear();
        assert!(check_rdcc(&empty).holds());
    }
}
