//! Finite rooted non-planar trees: construction, comparison, canonical
//! codes, automorphism groups, a text format and DOT output.
//!
//! A tree is a finite set of named edges together with vertices. Every
//! vertex has one output edge (towards the root) and an unordered set of
//! input edges (away from the root). The tree with one edge and no
//! vertices is a valid value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of an edge inside a particular [`Tree`].
///
/// Identifiers are local to their tree; relating edges of two trees is
/// only done through explicit maps such as [`TreeIso`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

/// Index of a vertex inside a particular [`Tree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl EdgeId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl VertexId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub output: EdgeId,
    /// Input edges, stored sorted by id. The order carries no meaning.
    pub inputs: Vec<EdgeId>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("duplicate edge name `{0}`")]
    DuplicateEdgeName(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edge `{0}` is the output of more than one vertex")]
    DoubleOutput(String),
    #[error("edge `{0}` is the input of more than one vertex")]
    DoubleInput(String),
    #[error("expected exactly one root, found {0}")]
    RootCount(usize),
    #[error("tree is not connected or contains a cycle")]
    NotConnected,
    #[error("edge `{0}` is not a leaf")]
    NotALeaf(String),
    #[error("edge `{0}` is not an inner edge")]
    NotInner(String),
    #[error("vertex with output `{0}` is not a unary top vertex")]
    NotUnaryTop(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// A finite rooted non-planar tree.
#[derive(Debug, Clone)]
pub struct Tree {
    names: Vec<String>,
    root: EdgeId,
    vertices: Vec<Vertex>,
    /// Per edge, the vertex of which it is the output (the vertex above).
    above: Vec<Option<VertexId>>,
    /// Per edge, the vertex of which it is an input (the vertex below).
    below: Vec<Option<VertexId>>,
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.root == other.root
            && self.vertices == other.vertices
    }
}

impl Eq for Tree {}

impl Tree {
    /// Builds a tree from edge names and vertices given as
    /// `(output name, input names)` pairs. Checks all structural
    /// invariants.
    pub fn build(
        edge_names: &[&str],
        vertices: &[(&str, Vec<&str>)],
    ) -> Result<Tree, TreeError> {
        let names: Vec<String> = edge_names.iter().map(|s| s.to_string()).collect();
        let mut index: BTreeMap<&str, EdgeId> = BTreeMap::new();
        for (i, n) in edge_names.iter().enumerate() {
            if index.insert(n, EdgeId(i as u32)).is_some() {
                return Err(TreeError::DuplicateEdgeName(n.to_string()));
            }
        }
        let lookup = |n: &str| -> Result<EdgeId, TreeError> {
            index
                .get(n)
                .copied()
                .ok_or_else(|| TreeError::UnknownEdge(n.to_string()))
        };
        let mut vs = Vec::new();
        for (out, ins) in vertices {
            let output = lookup(out)?;
            let mut inputs = ins.iter().map(|n| lookup(n)).collect::<Result<Vec<_>, _>>()?;
            inputs.sort();
            vs.push(Vertex { output, inputs });
        }
        Tree::assemble(names, vs)
    }

    /// Builds a tree from owned parts, checking all invariants.
    pub fn build_from_parts(names: Vec<String>, vertices: Vec<Vertex>) -> Result<Tree, TreeError> {
        Tree::assemble(names, vertices)
    }

    fn assemble(names: Vec<String>, vertices: Vec<Vertex>) -> Result<Tree, TreeError> {
        let n = names.len();
        let mut uniq = BTreeSet::new();
        for name in &names {
            if !uniq.insert(name) {
                return Err(TreeError::DuplicateEdgeName(name.clone()));
            }
        }
        let mut above = vec![None; n];
        let mut below = vec![None; n];
        for (vi, v) in vertices.iter().enumerate() {
            let vid = VertexId(vi as u32);
            if above[v.output.idx()].replace(vid).is_some() {
                return Err(TreeError::DoubleOutput(names[v.output.idx()].clone()));
            }
            for &e in &v.inputs {
                if below[e.idx()].replace(vid).is_some() {
                    return Err(TreeError::DoubleInput(names[e.idx()].clone()));
                }
            }
        }
        let roots: Vec<EdgeId> = (0..n)
            .filter(|&i| below[i].is_none())
            .map(|i| EdgeId(i as u32))
            .collect();
        if roots.len() != 1 {
            return Err(TreeError::RootCount(roots.len()));
        }
        let tree = Tree {
            names,
            root: roots[0],
            vertices,
            above,
            below,
        };
        // Connectivity: walking up from the root must reach every edge.
        let mut seen = vec![false; n];
        let mut stack = vec![tree.root];
        while let Some(e) = stack.pop() {
            if seen[e.idx()] {
                return Err(TreeError::NotConnected);
            }
            seen[e.idx()] = true;
            if let Some(v) = tree.above[e.idx()] {
                stack.extend(tree.vertices[v.idx()].inputs.iter().copied());
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(TreeError::NotConnected);
        }
        Ok(tree)
    }

    /// The linear tree with `n` unary vertices and `n + 1` edges, edges
    /// named `0` (top leaf) through `n` (root). `linear(0)` is the
    /// one-edge tree.
    pub fn linear(n: usize) -> Tree {
        let names: Vec<String> = (0..=n).map(|i| i.to_string()).collect();
        let vertices = (0..n)
            .map(|i| Vertex {
                output: EdgeId(i as u32 + 1),
                inputs: vec![EdgeId(i as u32)],
            })
            .collect();
        Tree::assemble(names, vertices).expect("linear tree is well formed")
    }

    /// The corolla with one `n`-ary vertex: root `a` and leaves
    /// `a1, ..., an`.
    pub fn corolla(n: usize) -> Tree {
        let mut names = vec!["a".to_string()];
        names.extend((1..=n).map(|i| format!("a{i}")));
        let vertices = vec![Vertex {
            output: EdgeId(0),
            inputs: (1..=n).map(|i| EdgeId(i as u32)).collect(),
        }];
        Tree::assemble(names, vertices).expect("corolla is well formed")
    }

    /// The one-edge tree with the given edge name.
    pub fn eta(name: &str) -> Tree {
        Tree::assemble(vec![name.to_string()], vec![]).expect("eta is well formed")
    }

    pub fn edge_count(&self) -> usize {
        self.names.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn root(&self) -> EdgeId {
        self.root
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.names.len()).map(|i| EdgeId(i as u32))
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).map(|i| VertexId(i as u32))
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.idx()]
    }

    pub fn name(&self, e: EdgeId) -> &str {
        &self.names[e.idx()]
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.names.iter().position(|n| n == name).map(|i| EdgeId(i as u32))
    }

    /// The vertex of which `e` is the output (directly above `e`).
    pub fn vertex_above(&self, e: EdgeId) -> Option<VertexId> {
        self.above[e.idx()]
    }

    /// The vertex of which `e` is an input (directly below `e`).
    pub fn vertex_below(&self, e: EdgeId) -> Option<VertexId> {
        self.below[e.idx()]
    }

    pub fn is_leaf(&self, e: EdgeId) -> bool {
        self.above[e.idx()].is_none()
    }

    pub fn is_inner(&self, e: EdgeId) -> bool {
        self.above[e.idx()].is_some() && self.below[e.idx()].is_some()
    }

    pub fn leaves(&self) -> Vec<EdgeId> {
        self.edges().filter(|&e| self.is_leaf(e)).collect()
    }

    pub fn inner_edges(&self) -> Vec<EdgeId> {
        self.edges().filter(|&e| self.is_inner(e)).collect()
    }

    /// A top vertex has only leaves as inputs (nullary vertices count).
    pub fn is_top_vertex(&self, v: VertexId) -> bool {
        self.vertices[v.idx()].inputs.iter().all(|&e| self.is_leaf(e))
    }

    /// A unary top vertex with a leaf input; the horn at such a vertex is
    /// an end extension.
    pub fn is_unary_top_vertex(&self, v: VertexId) -> bool {
        let vx = &self.vertices[v.idx()];
        vx.inputs.len() == 1 && self.is_leaf(vx.inputs[0])
    }

    /// The vertex above the root edge, when the tree has any vertex.
    pub fn root_vertex(&self) -> Option<VertexId> {
        self.above[self.root.idx()]
    }

    /// All edges incident to `v`: its output followed by its inputs.
    pub fn incident(&self, v: VertexId) -> Vec<EdgeId> {
        let vx = &self.vertices[v.idx()];
        let mut es = vec![vx.output];
        es.extend(vx.inputs.iter().copied());
        es
    }

    /// All edges of the full subtree above and including `e`.
    pub fn edges_above(&self, e: EdgeId) -> Vec<EdgeId> {
        let mut out = Vec::new();
        let mut stack = vec![e];
        while let Some(x) = stack.pop() {
            out.push(x);
            if let Some(v) = self.above[x.idx()] {
                stack.extend(self.vertices[v.idx()].inputs.iter().copied());
            }
        }
        out.sort();
        out
    }

    /// The full subtree above and including `e`, as its own tree with the
    /// same edge names.
    pub fn subtree_at(&self, e: EdgeId) -> Tree {
        let edges = self.edges_above(e);
        let names: Vec<String> = edges.iter().map(|&x| self.name(x).to_string()).collect();
        let reindex: BTreeMap<EdgeId, EdgeId> = edges
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, EdgeId(i as u32)))
            .collect();
        let vertices = self
            .vertices
            .iter()
            .filter(|v| edges.contains(&v.output))
            .map(|v| {
                let mut inputs: Vec<EdgeId> = v.inputs.iter().map(|i| reindex[i]).collect();
                inputs.sort();
                Vertex {
                    output: reindex[&v.output],
                    inputs,
                }
            })
            .collect();
        Tree::assemble(names, vertices).expect("subtree is well formed")
    }

    /// Grafts `top` onto the leaf `leaf` of `base`, identifying the root
    /// of `top` with that leaf. Clashing edge names from `top` are primed
    /// until fresh.
    pub fn graft(base: &Tree, leaf: EdgeId, top: &Tree) -> Result<Tree, TreeError> {
        if !base.is_leaf(leaf) {
            return Err(TreeError::NotALeaf(base.name(leaf).to_string()));
        }
        let mut names = base.names.clone();
        let mut taken: BTreeSet<String> = names.iter().cloned().collect();
        // top edge -> new id
        let mut map: Vec<EdgeId> = Vec::with_capacity(top.edge_count());
        for e in top.edges() {
            if e == top.root {
                map.push(leaf);
            } else {
                let mut n = top.name(e).to_string();
                while taken.contains(&n) {
                    n.push('\'');
                }
                taken.insert(n.clone());
                map.push(EdgeId(names.len() as u32));
                names.push(n);
            }
        }
        let mut vertices = base.vertices.clone();
        for v in &top.vertices {
            let mut inputs: Vec<EdgeId> = v.inputs.iter().map(|&e| map[e.idx()]).collect();
            inputs.sort();
            vertices.push(Vertex {
                output: map[v.output.idx()],
                inputs,
            });
        }
        Tree::assemble(names, vertices)
    }

    /// Renames every edge through `f`. Fails on resulting duplicates.
    pub fn rename<F: Fn(&str) -> String>(&self, f: F) -> Result<Tree, TreeError> {
        let names: Vec<String> = self.names.iter().map(|n| f(n)).collect();
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.clone()) {
                return Err(TreeError::DuplicateEdgeName(n.clone()));
            }
        }
        Ok(Tree {
            names,
            root: self.root,
            vertices: self.vertices.clone(),
            above: self.above.clone(),
            below: self.below.clone(),
        })
    }
}

/// Code uniquely determined by the isomorphism class of a tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode(pub String);

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Tree {
    fn edge_code(&self, e: EdgeId, with_names: bool) -> String {
        match self.above[e.idx()] {
            None => {
                if with_names {
                    format!("*{}", self.name(e))
                } else {
                    "*".to_string()
                }
            }
            Some(v) => {
                let mut parts: Vec<String> = self.vertices[v.idx()]
                    .inputs
                    .iter()
                    .map(|&i| self.edge_code(i, with_names))
                    .collect();
                parts.sort();
                if with_names {
                    format!("({}{})", self.name(e), parts.concat())
                } else {
                    format!("({})", parts.concat())
                }
            }
        }
    }

    /// AHU-style code; equal codes exactly when the trees are isomorphic.
    pub fn canonical_code(&self) -> CanonicalCode {
        CanonicalCode(self.edge_code(self.root, false))
    }

    /// Code that also involves the edge names; equal exactly when there is
    /// a name-preserving isomorphism. Used for label-rigid comparisons.
    pub fn named_code(&self) -> CanonicalCode {
        CanonicalCode(self.edge_code(self.root, true))
    }
}

/// An isomorphism of trees given as an edge bijection source -> target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeIso {
    /// `map[e.idx()]` is the image of source edge `e` in the target.
    pub map: Vec<EdgeId>,
}

impl TreeIso {
    pub fn identity(t: &Tree) -> TreeIso {
        TreeIso {
            map: t.edges().collect(),
        }
    }

    pub fn apply(&self, e: EdgeId) -> EdgeId {
        self.map[e.idx()]
    }

    /// `self: A -> B` then `other: B -> C`.
    pub fn then(&self, other: &TreeIso) -> TreeIso {
        TreeIso {
            map: self.map.iter().map(|&e| other.map[e.idx()]).collect(),
        }
    }

    pub fn inverse(&self) -> TreeIso {
        let mut map = vec![EdgeId(0); self.map.len()];
        for (i, &e) in self.map.iter().enumerate() {
            map[e.idx()] = EdgeId(i as u32);
        }
        TreeIso { map }
    }

    /// Checks that the map is a structure-preserving edge bijection.
    pub fn is_valid(&self, source: &Tree, target: &Tree) -> bool {
        if source.edge_count() != target.edge_count() || self.map.len() != source.edge_count() {
            return false;
        }
        let mut hit = vec![false; target.edge_count()];
        for &e in &self.map {
            if hit[e.idx()] {
                return false;
            }
            hit[e.idx()] = true;
        }
        if self.apply(source.root()) != target.root() {
            return false;
        }
        let mut target_vertices: BTreeSet<(EdgeId, Vec<EdgeId>)> = BTreeSet::new();
        for v in &target.vertices {
            target_vertices.insert((v.output, v.inputs.clone()));
        }
        if source.vertex_count() != target.vertex_count() {
            return false;
        }
        for v in &source.vertices {
            let mut inputs: Vec<EdgeId> = v.inputs.iter().map(|&e| self.apply(e)).collect();
            inputs.sort();
            if !target_vertices.contains(&(self.apply(v.output), inputs)) {
                return false;
            }
        }
        true
    }
}

/// All structure-preserving bijections of the subtrees above `se`/`te`.
fn subtree_isos(
    source: &Tree,
    target: &Tree,
    se: EdgeId,
    te: EdgeId,
) -> Vec<BTreeMap<EdgeId, EdgeId>> {
    if source.edge_code(se, false) != target.edge_code(te, false) {
        return Vec::new();
    }
    let base: BTreeMap<EdgeId, EdgeId> = [(se, te)].into_iter().collect();
    match (source.vertex_above(se), target.vertex_above(te)) {
        (None, None) => vec![base],
        (Some(sv), Some(tv)) => {
            let sins = source.vertices[sv.idx()].inputs.clone();
            let tins = target.vertices[tv.idx()].inputs.clone();
            let mut results = Vec::new();
            fn rec(
                source: &Tree,
                target: &Tree,
                sins: &[EdgeId],
                tins: &[EdgeId],
                k: usize,
                used: &mut Vec<bool>,
                acc: BTreeMap<EdgeId, EdgeId>,
                results: &mut Vec<BTreeMap<EdgeId, EdgeId>>,
            ) {
                if k == sins.len() {
                    results.push(acc);
                    return;
                }
                let se = sins[k];
                let code = source.edge_code(se, false);
                for (j, &te) in tins.iter().enumerate() {
                    if used[j] || target.edge_code(te, false) != code {
                        continue;
                    }
                    used[j] = true;
                    for sub in subtree_isos(source, target, se, te) {
                        let mut next = acc.clone();
                        next.extend(sub);
                        rec(source, target, sins, tins, k + 1, used, next, results);
                    }
                    used[j] = false;
                }
            }
            let mut used = vec![false; tins.len()];
            rec(
                source, target, &sins, &tins, 0, &mut used, base, &mut results,
            );
            results
        }
        _ => Vec::new(),
    }
}

/// All isomorphisms from `source` to `target`; empty when none exist.
pub fn isomorphisms(source: &Tree, target: &Tree) -> Vec<TreeIso> {
    let maps = subtree_isos(source, target, source.root(), target.root());
    maps.into_iter()
        .map(|m| TreeIso {
            map: source.edges().map(|e| m[&e]).collect(),
        })
        .collect()
}

/// The automorphism group of `t`, computed exactly.
pub fn automorphisms(t: &Tree) -> Vec<TreeIso> {
    isomorphisms(t, t)
}

/// Returns a witness isomorphism when the two trees are isomorphic.
pub fn is_isomorphic(source: &Tree, target: &Tree) -> Option<TreeIso> {
    if source.canonical_code() != target.canonical_code() {
        return None;
    }
    isomorphisms(source, target).into_iter().next()
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

/// Grammar: `expr := NAME | '(' NAME expr* ')'`. A bare name is an edge
/// with nothing above it; `(e ...)` is an edge `e` whose upper vertex has
/// the listed expressions as inputs, so `(e)` puts a nullary vertex above
/// `e`.
pub fn parse_tree(input: &str) -> Result<Tree, TreeError> {
    let tokens = tokenize(input)?;
    let mut pos = 0usize;
    let mut names: Vec<String> = Vec::new();
    let mut vertices: Vec<Vertex> = Vec::new();
    let root = parse_expr(&tokens, &mut pos, &mut names, &mut vertices)?;
    if pos != tokens.len() {
        return Err(TreeError::Parse(format!(
            "trailing input after expression: `{}`",
            tokens[pos..].join(" ")
        )));
    }
    let _ = root;
    Tree::assemble(names, vertices)
}

fn tokenize(input: &str) -> Result<Vec<String>, TreeError> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for c in input.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
                tokens.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    if tokens.is_empty() {
        return Err(TreeError::Parse("empty input".to_string()));
    }
    Ok(tokens)
}

fn parse_expr(
    tokens: &[String],
    pos: &mut usize,
    names: &mut Vec<String>,
    vertices: &mut Vec<Vertex>,
) -> Result<EdgeId, TreeError> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| TreeError::Parse("unexpected end of input".to_string()))?;
    if tok == ")" {
        return Err(TreeError::Parse("unexpected `)`".to_string()));
    }
    if tok == "(" {
        *pos += 1;
        let name = tokens
            .get(*pos)
            .ok_or_else(|| TreeError::Parse("missing edge name after `(`".to_string()))?;
        if name == "(" || name == ")" {
            return Err(TreeError::Parse("missing edge name after `(`".to_string()));
        }
        let id = EdgeId(names.len() as u32);
        names.push(name.clone());
        *pos += 1;
        let mut inputs = Vec::new();
        while tokens.get(*pos).map(|t| t.as_str()) != Some(")") {
            if *pos >= tokens.len() {
                return Err(TreeError::Parse("missing `)`".to_string()));
            }
            inputs.push(parse_expr(tokens, pos, names, vertices)?);
        }
        *pos += 1; // consume ')'
        inputs.sort();
        vertices.push(Vertex { output: id, inputs });
        Ok(id)
    } else {
        let id = EdgeId(names.len() as u32);
        names.push(tok.clone());
        *pos += 1;
        Ok(id)
    }
}

impl Tree {
    fn print_edge(&self, e: EdgeId, out: &mut String) {
        match self.above[e.idx()] {
            None => out.push_str(self.name(e)),
            Some(v) => {
                out.push('(');
                out.push_str(self.name(e));
                let mut inputs: Vec<EdgeId> = self.vertices[v.idx()].inputs.clone();
                inputs.sort_by_key(|&i| (self.edge_code(i, true), i));
                for i in inputs {
                    out.push(' ');
                    self.print_edge(i, out);
                }
                out.push(')');
            }
        }
    }

    /// Deterministic expression form; `parse_tree` accepts it back.
    pub fn to_expr(&self) -> String {
        let mut s = String::new();
        self.print_edge(self.root, &mut s);
        s
    }

    /// DOT output with one node per edge and one node per vertex.
    pub fn to_dot(&self, vertex_fill: impl Fn(VertexId) -> &'static str) -> String {
        let mut s = String::new();
        s.push_str("digraph tree {\n  rankdir=BT;\n");
        for e in self.edges() {
            s.push_str(&format!(
                "  e{} [label=\"{}\", shape=none];\n",
                e.0,
                self.name(e)
            ));
        }
        for v in self.vertex_ids() {
            s.push_str(&format!(
                "  v{} [label=\"\", shape=circle, style=filled, fillcolor={}, width=0.18, fixedsize=true];\n",
                v.0,
                vertex_fill(v)
            ));
        }
        for v in self.vertex_ids() {
            let vx = self.vertex(v);
            s.push_str(&format!("  v{} -> e{};\n", v.0, vx.output.0));
            for &i in &vx.inputs {
                s.push_str(&format!("  e{} -> v{};\n", i.0, v.0));
            }
        }
        s.push_str("}\n");
        s
    }
}

// ---------------------------------------------------------------------------
// Enumeration of small trees
// ---------------------------------------------------------------------------

/// All trees with at most `max_vertices` vertices and `max_edges` edges,
/// one per isomorphism class, deterministically ordered.
pub fn all_trees(max_vertices: usize, max_edges: usize) -> Vec<Tree> {
    let mut by_size: Vec<Vec<Tree>> = vec![Vec::new(); max_edges + 1];
    if max_edges >= 1 {
        by_size[1].push(Tree::eta("e0"));
        by_size[1].push(Tree::corolla(0));
    }
    for edges in 2..=max_edges {
        // Root vertex with a multiset of children subtrees, total edge
        // count edges - 1, children taken from smaller sizes.
        let mut found: BTreeMap<CanonicalCode, Tree> = BTreeMap::new();
        let smaller: Vec<(CanonicalCode, Tree)> = by_size
            .iter()
            .flatten()
            .map(|t| (t.canonical_code(), t.clone()))
            .collect();
        // children chosen with non-decreasing index to enumerate multisets
        fn rec(
            smaller: &[(CanonicalCode, Tree)],
            start: usize,
            remaining: usize,
            chosen: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if remaining == 0 {
                out.push(chosen.clone());
                return;
            }
            for i in start..smaller.len() {
                let sz = smaller[i].1.edge_count();
                if sz <= remaining {
                    chosen.push(i);
                    rec(smaller, i, remaining - sz, chosen, out);
                    chosen.pop();
                }
            }
        }
        let mut combos = Vec::new();
        let mut buf = Vec::new();
        rec(&smaller, 0, edges - 1, &mut buf, &mut combos);
        for combo in combos {
            let total: usize = combo.iter().map(|&i| smaller[i].1.edge_count()).sum();
            if total != edges - 1 {
                continue;
            }
            let mut t = Tree::corolla(combo.len());
            // graft each chosen subtree onto leaf `a{k+1}`
            let mut ok = true;
            for (k, &ci) in combo.iter().enumerate() {
                let leaf = t.edge_by_name(&format!("a{}", k + 1)).unwrap();
                let renamed = smaller[ci]
                    .1
                    .rename(|n| format!("c{}.{}", k + 1, n))
                    .unwrap();
                match Tree::graft(&t, leaf, &renamed) {
                    Ok(next) => t = next,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                found.entry(t.canonical_code()).or_insert(t);
            }
        }
        by_size[edges] = found.into_values().collect();
    }
    let mut out: Vec<Tree> = by_size
        .into_iter()
        .flatten()
        .filter(|t| t.vertex_count() <= max_vertices)
        .collect();
    out.sort_by_key(|t| (t.edge_count(), t.canonical_code()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;

    /// Oracle: all structure-preserving edge bijections, by brute force
    /// over every permutation of the edge set.
    fn brute_force_isos(source: &Tree, target: &Tree) -> Vec<TreeIso> {
        if source.edge_count() != target.edge_count() {
            return Vec::new();
        }
        let n = source.edge_count();
        let mut out = Vec::new();
        for perm in (0..n).permutations(n) {
            let iso = TreeIso {
                map: perm.iter().map(|&i| EdgeId(i as u32)).collect(),
            };
            if iso.is_valid(source, target) {
                out.push(iso);
            }
        }
        out
    }

    #[test]
    fn linear_tree_shapes() {
        let t0 = Tree::linear(0);
        assert_eq!(t0.edge_count(), 1);
        assert_eq!(t0.vertex_count(), 0);
        let t2 = Tree::linear(2);
        assert_eq!(t2.edge_count(), 3);
        assert_eq!(t2.vertex_count(), 2);
        let t5 = Tree::linear(5);
        assert_eq!(t5.edge_count(), 6);
        assert_eq!(t5.vertex_count(), 5);
        assert_eq!(t5.leaves().len(), 1);
    }

    #[test]
    fn corolla_shapes() {
        let c2 = Tree::corolla(2);
        assert_eq!(c2.vertex_count(), 1);
        assert_eq!(c2.edge_count(), 3);
        assert_eq!(c2.leaves().len(), 2);
        let c0 = Tree::corolla(0);
        assert_eq!(c0.vertex_count(), 1);
        assert_eq!(c0.edge_count(), 1);
        assert!(c0.leaves().is_empty());
        assert!(is_isomorphic(&Tree::corolla(1), &Tree::linear(1)).is_some());
    }

    #[test]
    fn graft_counts_and_identity() {
        let c2 = Tree::corolla(2);
        let a1 = c2.edge_by_name("a1").unwrap();
        let g = Tree::graft(&c2, a1, &Tree::corolla(2)).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 5);
        assert_eq!(g.inner_edges().len(), 1);

        let t = Tree::linear(3);
        let leaf = t.leaves()[0];
        let g2 = Tree::graft(&t, leaf, &Tree::eta("x")).unwrap();
        assert_eq!(g2.canonical_code(), t.canonical_code());

        let l1 = Tree::linear(1);
        let g3 = Tree::graft(&l1, l1.leaves()[0], &Tree::linear(1)).unwrap();
        assert!(is_isomorphic(&g3, &Tree::linear(2)).is_some());
    }

    #[test]
    fn graft_rejects_non_leaf() {
        let c2 = Tree::corolla(2);
        let root = c2.root();
        assert!(Tree::graft(&c2, root, &Tree::corolla(1)).is_err());
    }

    fn binary_depth2() -> Tree {
        let c2 = Tree::corolla(2);
        let mut t = c2.clone();
        for leaf_name in ["a1", "a2"] {
            let leaf = t.edge_by_name(leaf_name).unwrap();
            let top = Tree::corolla(2)
                .rename(|n| format!("{leaf_name}.{n}"))
                .unwrap();
            t = Tree::graft(&t, leaf, &top).unwrap();
        }
        t
    }

    #[test]
    fn automorphism_orders() {
        for n in 0..5 {
            assert_eq!(automorphisms(&Tree::linear(n)).len(), 1, "chain {n}");
        }
        // Frozen from the brute-force oracle below.
        assert_eq!(automorphisms(&Tree::corolla(3)).len(), 6);
        assert_eq!(automorphisms(&binary_depth2()).len(), 8);
    }

    #[test]
    fn automorphisms_match_brute_force() {
        for n in 0..=5 {
            let c = Tree::corolla(n);
            let brute = brute_force_isos(&c, &c);
            assert_eq!(brute.len(), (1..=n).product::<usize>().max(1));
            assert_eq!(automorphisms(&c).len(), brute.len());
        }
        let b = binary_depth2();
        assert_eq!(brute_force_isos(&b, &b).len(), 8);
        for t in all_trees(3, 5) {
            let fast: BTreeSet<Vec<EdgeId>> =
                automorphisms(&t).into_iter().map(|i| i.map).collect();
            let brute: BTreeSet<Vec<EdgeId>> =
                brute_force_isos(&t, &t).into_iter().map(|i| i.map).collect();
            assert_eq!(fast, brute, "tree {}", t.to_expr());
        }
    }

    #[test]
    fn canonical_code_matches_brute_force_on_small_trees() {
        let trees = all_trees(6, 6);
        for a in &trees {
            for b in &trees {
                let code_eq = a.canonical_code() == b.canonical_code();
                let brute = !brute_force_isos(a, b).is_empty();
                assert_eq!(
                    code_eq,
                    brute,
                    "{} vs {}",
                    a.to_expr(),
                    b.to_expr()
                );
                if code_eq {
                    let w = is_isomorphic(a, b).expect("witness");
                    assert!(w.is_valid(a, b));
                }
            }
        }
    }

    #[test]
    fn codes_ignore_input_order() {
        let t1 = Tree::build(&["r", "x", "y"], &[("r", vec!["x", "y"])]).unwrap();
        let t2 = Tree::build(&["r", "x", "y"], &[("r", vec!["y", "x"])]).unwrap();
        assert_eq!(t1.canonical_code(), t2.canonical_code());
        assert_ne!(
            Tree::corolla(2).canonical_code(),
            Tree::linear(2).canonical_code()
        );
        assert!(is_isomorphic(&Tree::corolla(2), &Tree::linear(2)).is_none());
    }

    #[test]
    fn permuted_tree_has_witness() {
        // The depth-2 binary tree presented with edges scrambled.
        let perm = Tree::build(
            &["z2", "z1", "r", "w1", "w2", "p", "o"],
            &[
                ("r", vec!["p", "o"]),
                ("p", vec!["z1", "z2"]),
                ("o", vec!["w2", "w1"]),
            ],
        )
        .unwrap();
        let b = binary_depth2();
        assert_eq!(perm.canonical_code(), b.canonical_code());
        let w = is_isomorphic(&perm, &b).unwrap();
        assert!(w.is_valid(&perm, &b));
    }

    #[test]
    fn graft_at_disjoint_leaves_commutes() {
        let c3 = Tree::corolla(3);
        let t1 = {
            let l = c3.edge_by_name("a1").unwrap();
            let g = Tree::graft(&c3, l, &Tree::corolla(2).rename(|n| format!("p.{n}")).unwrap())
                .unwrap();
            let l2 = g.edge_by_name("a3").unwrap();
            Tree::graft(&g, l2, &Tree::linear(1).rename(|n| format!("q.{n}")).unwrap()).unwrap()
        };
        let t2 = {
            let l2 = c3.edge_by_name("a3").unwrap();
            let g = Tree::graft(&c3, l2, &Tree::linear(1).rename(|n| format!("q.{n}")).unwrap())
                .unwrap();
            let l = g.edge_by_name("a1").unwrap();
            Tree::graft(&g, l, &Tree::corolla(2).rename(|n| format!("p.{n}")).unwrap()).unwrap()
        };
        assert_eq!(t1.canonical_code(), t2.canonical_code());
        assert!(is_isomorphic(&t1, &t2).is_some());
    }

    #[test]
    fn parse_and_print_round_trip() {
        for expr in [
            "e",
            "(root e0 (v1 e1 e2))",
            "(r)",
            "(0 (1 (2)))",
            "(a (b x y) c)",
        ] {
            let t = parse_tree(expr).unwrap();
            let printed = t.to_expr();
            let back = parse_tree(&printed).unwrap();
            assert_eq!(back.named_code(), t.named_code(), "{expr}");
        }
        assert!(parse_tree("(a").is_err());
        assert!(parse_tree("a b").is_err());
        assert!(parse_tree("(a a)").is_err());
    }

    #[test]
    fn tree_invariants_rejected() {
        // two roots
        assert!(Tree::build(&["a", "b"], &[]).is_err());
        // cycle-ish: an edge input to the vertex it outputs
        assert!(Tree::build(&["a", "b"], &[("a", vec!["b"]), ("b", vec!["a"])]).is_err());
    }

    #[test]
    fn enumeration_counts() {
        // Rooted non-planar trees by edge count, vertices unbounded.
        let trees = all_trees(10, 4);
        let mut by_edges = BTreeMap::new();
        for t in &trees {
            *by_edges.entry(t.edge_count()).or_insert(0usize) += 1;
        }
        // 1 edge: eta and the single nullary vertex.
        assert_eq!(by_edges[&1], 2);
        assert!(trees
            .iter()
            .any(|t| t.edge_count() == 2 && t.vertex_count() == 2));
        // eta appears exactly once
        assert_eq!(
            trees
                .iter()
                .filter(|t| t.vertex_count() == 0)
                .count(),
            1
        );
        // all distinct codes
        let codes: BTreeSet<_> = trees.iter().map(|t| t.canonical_code()).collect();
        assert_eq!(codes.len(), trees.len());
    }
}
