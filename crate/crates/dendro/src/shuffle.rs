//! Percolation schemes of a tensor of two representables, their move
//! order, labeled faces, and the standard tensor subcomplexes.
//!
//! A scheme is a tree whose edges are labeled by pairs (edge of S, edge
//! of T); the label is stored as the edge name `s|t`. Labels are rigid:
//! two labeled trees are identified exactly when there is a
//! name-preserving isomorphism, so the named code is a complete key.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::face::{all_faces, compose, shape_of, Face};
use crate::tree::{EdgeId, Tree, Vertex, VertexId};

pub const LABEL_SEP: char = '|';

pub fn make_label(s: &str, t: &str) -> String {
    format!("{s}{LABEL_SEP}{t}")
}

pub fn split_label(name: &str) -> (&str, &str) {
    let mut it = name.splitn(2, LABEL_SEP);
    let s = it.next().unwrap_or("");
    let t = it.next().unwrap_or("");
    (s, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexColour {
    /// Vertex coming from the first factor.
    White,
    /// Vertex coming from the second factor.
    Black,
}

/// A percolation scheme: a labeled tree with vertex colours.
#[derive(Debug, Clone)]
pub struct LabeledTree {
    pub shape: Tree,
    pub colours: Vec<VertexColour>,
}

impl LabeledTree {
    pub fn key(&self) -> String {
        self.shape.named_code().0
    }

    pub fn label(&self, e: EdgeId) -> (&str, &str) {
        split_label(self.shape.name(e))
    }

    pub fn colour(&self, v: VertexId) -> VertexColour {
        self.colours[v.idx()]
    }

    pub fn black_vertices(&self) -> Vec<VertexId> {
        self.shape
            .vertex_ids()
            .filter(|&v| self.colours[v.idx()] == VertexColour::Black)
            .collect()
    }

    pub fn to_dot(&self) -> String {
        self.shape.to_dot(|v| match self.colours[v.idx()] {
            VertexColour::White => "white",
            VertexColour::Black => "black",
        })
    }
}

/// The first scheme: a copy of the second factor stacked on top of each
/// leaf of the first.
pub fn initial_scheme(s: &Tree, t: &Tree) -> LabeledTree {
    let t_root = t.name(t.root());
    let base = s.rename(|n| make_label(n, t_root)).unwrap();
    let mut shape = base;
    let mut colours = vec![VertexColour::White; s.vertex_count()];
    for leaf in s.leaves() {
        let leaf_name = s.name(leaf).to_string();
        let copy = t.rename(|n| make_label(&leaf_name, n)).unwrap();
        let at = shape
            .edge_by_name(&make_label(&leaf_name, t_root))
            .unwrap();
        shape = Tree::graft(&shape, at, &copy).unwrap();
        colours.extend(std::iter::repeat(VertexColour::Black).take(t.vertex_count()));
    }
    LabeledTree { shape, colours }
}

/// One percolation move: a black vertex drops below a white one. Returns
/// every scheme reachable in a single move.
pub fn moves(s: &Tree, t: &Tree, scheme: &LabeledTree) -> Vec<LabeledTree> {
    let mut out = Vec::new();
    for w in scheme.shape.vertex_ids() {
        if scheme.colour(w) != VertexColour::White {
            continue;
        }
        let wx = scheme.shape.vertex(w).clone();
        let (s_out, t_level) = {
            let (a, b) = scheme.label(wx.output);
            (a.to_string(), b.to_string())
        };
        // the factor vertex to percolate through: the one above t_level
        let t_edge = match t.edge_by_name(&t_level) {
            Some(e) => e,
            None => continue,
        };
        let Some(vt) = t.vertex_above(t_edge) else {
            continue;
        };
        let t_inputs: Vec<String> = t
            .vertex(vt)
            .inputs
            .iter()
            .map(|&i| t.name(i).to_string())
            .collect();
        // every input of w must carry a black copy of that vertex
        let mut black_copies = Vec::new();
        let mut ok = true;
        for &i in &wx.inputs {
            let (si, ti) = scheme.label(i);
            if ti != t_level {
                ok = false;
                break;
            }
            let Some(b) = scheme.shape.vertex_above(i) else {
                ok = false;
                break;
            };
            if scheme.colour(b) != VertexColour::Black {
                ok = false;
                break;
            }
            let bx = scheme.shape.vertex(b);
            let mut expect: Vec<String> =
                t_inputs.iter().map(|tj| make_label(si, tj)).collect();
            expect.sort();
            let mut got: Vec<String> = bx
                .inputs
                .iter()
                .map(|&e| scheme.shape.name(e).to_string())
                .collect();
            got.sort();
            if expect != got {
                ok = false;
                break;
            }
            black_copies.push(b);
        }
        if !ok {
            continue;
        }
        // build the rewritten scheme
        let old = &scheme.shape;
        let removed_vertices: BTreeSet<VertexId> = black_copies
            .iter()
            .copied()
            .chain([w])
            .collect();
        let removed_edges: BTreeSet<EdgeId> = wx.inputs.iter().copied().collect();
        let mut names: Vec<String> = Vec::new();
        let mut keep_map: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();
        for e in old.edges() {
            if !removed_edges.contains(&e) {
                keep_map.insert(e, EdgeId(names.len() as u32));
                names.push(old.name(e).to_string());
            }
        }
        // new edges (s_out, t_j)
        let mut new_edge: BTreeMap<String, EdgeId> = BTreeMap::new();
        for tj in &t_inputs {
            let name = make_label(&s_out, tj);
            new_edge.insert(tj.clone(), EdgeId(names.len() as u32));
            names.push(name);
        }
        let mut vertices: Vec<Vertex> = Vec::new();
        let mut colours: Vec<VertexColour> = Vec::new();
        for v in old.vertex_ids() {
            if removed_vertices.contains(&v) {
                continue;
            }
            let vx = old.vertex(v);
            let mut inputs: Vec<EdgeId> = vx.inputs.iter().map(|i| keep_map[i]).collect();
            inputs.sort();
            vertices.push(Vertex {
                output: keep_map[&vx.output],
                inputs,
            });
            colours.push(scheme.colour(v));
        }
        // the black vertex below
        {
            let mut inputs: Vec<EdgeId> = t_inputs.iter().map(|tj| new_edge[tj]).collect();
            inputs.sort();
            vertices.push(Vertex {
                output: keep_map[&wx.output],
                inputs,
            });
            colours.push(VertexColour::Black);
        }
        // one white copy per t_j, re-attaching the subtrees that hung
        // above the black copies' inputs
        for tj in &t_inputs {
            let mut inputs: Vec<EdgeId> = wx
                .inputs
                .iter()
                .map(|&i| {
                    let (si, _) = scheme.label(i);
                    let name = make_label(si, tj);
                    keep_map[&old.edge_by_name(&name).unwrap()]
                })
                .collect();
            inputs.sort();
            vertices.push(Vertex {
                output: new_edge[tj],
                inputs,
            });
            colours.push(VertexColour::White);
        }
        let shape = Tree::build_from_parts(names, vertices).expect("move produces a tree");
        out.push(LabeledTree { shape, colours });
    }
    let _ = s;
    out
}

/// All percolation schemes with their single-move relation and the
/// induced partial order.
pub struct Shuffles {
    pub s: Tree,
    pub t: Tree,
    pub schemes: Vec<LabeledTree>,
    /// directed single moves (from, to)
    pub move_edges: Vec<(usize, usize)>,
    /// reach[i] bit j set when scheme j is reachable from scheme i
    /// (reflexive)
    reach: Vec<u128>,
}

pub fn shuffles(s: &Tree, t: &Tree) -> Shuffles {
    let first = initial_scheme(s, t);
    let mut schemes: Vec<LabeledTree> = vec![first.clone()];
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    index.insert(first.key(), 0);
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    let mut move_edges = Vec::new();
    while let Some(i) = queue.pop_front() {
        let scheme = schemes[i].clone();
        for next in moves(s, t, &scheme) {
            let key = next.key();
            let j = match index.get(&key) {
                Some(&j) => j,
                None => {
                    let j = schemes.len();
                    assert!(j < 128, "scheme count exceeds the order bitmap");
                    index.insert(key, j);
                    schemes.push(next);
                    queue.push_back(j);
                    j
                }
            };
            move_edges.push((i, j));
        }
    }
    // reflexive-transitive closure
    let n = schemes.len();
    let mut reach: Vec<u128> = (0..n).map(|i| 1u128 << i).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in &move_edges {
            let merged = reach[a] | reach[b];
            if merged != reach[a] {
                reach[a] = merged;
                changed = true;
            }
        }
    }
    Shuffles {
        s: s.clone(),
        t: t.clone(),
        schemes,
        move_edges,
        reach,
    }
}

impl Shuffles {
    pub fn len(&self) -> usize {
        self.schemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemes.is_empty()
    }

    /// scheme i precedes scheme j in the move order
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.reach[i] & (1 << j) != 0
    }

    /// Indices in a linear order extending the move order, ties broken by
    /// the labeled code.
    pub fn linear_order(&self) -> Vec<usize> {
        let n = self.schemes.len();
        let mut order: Vec<usize> = (0..n).collect();
        // count of predecessors is a monotone height proxy; sort by
        // (number of schemes that reach it, code)
        let height = |j: usize| (0..n).filter(|&i| i != j && self.leq(i, j)).count();
        order.sort_by_key(|&j| (height(j), self.schemes[j].key()));
        order
    }

    /// The scheme with no successors; for a tensor with a linear second
    /// factor this is the stacking of the first factor on top of it.
    pub fn maximum(&self) -> Option<usize> {
        let n = self.schemes.len();
        let maxima: Vec<usize> = (0..n)
            .filter(|&i| (0..n).all(|j| !self.leq(i, j) || i == j))
            .collect();
        if maxima.len() == 1 {
            Some(maxima[0])
        } else {
            None
        }
    }

    pub fn minimum(&self) -> Option<usize> {
        let n = self.schemes.len();
        let minima: Vec<usize> = (0..n)
            .filter(|&j| (0..n).all(|i| !self.leq(i, j) || i == j))
            .collect();
        if minima.len() == 1 {
            Some(minima[0])
        } else {
            None
        }
    }
}

/// Independent enumeration for a linear second factor: a scheme is a
/// monotone level assignment of the white vertices.
pub fn count_level_assignments(s: &Tree, n_levels: usize) -> usize {
    let vs: Vec<VertexId> = s.vertex_ids().collect();
    let k = vs.len();
    if k == 0 {
        return 1;
    }
    let mut count = 0usize;
    let mut levels = vec![0usize; k];
    loop {
        let monotone = vs.iter().enumerate().all(|(i, &v)| {
            match s.vertex_below(s.vertex(v).output) {
                None => true,
                Some(w) => {
                    let wi = vs.iter().position(|&x| x == w).unwrap();
                    levels[i] <= levels[wi]
                }
            }
        });
        if monotone {
            count += 1;
        }
        // odometer
        let mut i = 0;
        loop {
            if i == k {
                return count;
            }
            levels[i] += 1;
            if levels[i] <= n_levels {
                break;
            }
            levels[i] = 0;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Tensor subcomplexes: sets of labeled faces identified by their codes
// ---------------------------------------------------------------------------

/// Member arithmetic for subobjects of a tensor of two representables.
/// Members are labeled trees up to label-preserving isomorphism, keyed by
/// their named codes.
pub struct TensorComplex {
    pub shuffles: Shuffles,
    /// member key -> representative labeled tree
    reps: BTreeMap<String, Tree>,
    /// member key -> keys of all its labeled faces
    closures: BTreeMap<String, BTreeSet<String>>,
}

impl TensorComplex {
    pub fn new(shuffles: Shuffles) -> TensorComplex {
        TensorComplex {
            shuffles,
            reps: BTreeMap::new(),
            closures: BTreeMap::new(),
        }
    }

    pub fn intern(&mut self, labeled: &Tree) -> String {
        let key = labeled.named_code().0;
        self.reps.entry(key.clone()).or_insert_with(|| labeled.clone());
        key
    }

    pub fn representative(&self, key: &str) -> Option<&Tree> {
        self.reps.get(key)
    }

    /// All labeled faces of a member, including itself.
    pub fn member_closure(&mut self, key: &str) -> BTreeSet<String> {
        if let Some(c) = self.closures.get(key) {
            return c.clone();
        }
        let rep = self
            .reps
            .get(key)
            .unwrap_or_else(|| panic!("unknown member {key}"))
            .clone();
        let mut set = BTreeSet::new();
        for f in all_faces(&rep) {
            let sd = shape_of(&rep, &f);
            set.insert(self.intern(&sd.tree));
        }
        self.closures.insert(key.to_string(), set.clone());
        set
    }

    /// The faces of one member along a face of its shape.
    pub fn restrict(&mut self, key: &str, f: &Face) -> String {
        let rep = self.reps.get(key).expect("member").clone();
        let sd = shape_of(&rep, f);
        self.intern(&sd.tree)
    }

    pub fn scheme_key(&mut self, i: usize) -> String {
        let t = self.shuffles.schemes[i].shape.clone();
        self.intern(&t)
    }

    /// Union of the closures of all schemes: every labeled face of the
    /// tensor.
    pub fn whole(&mut self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for i in 0..self.shuffles.len() {
            let k = self.scheme_key(i);
            out.extend(self.member_closure(&k));
        }
        out
    }

    /// Member keys of the maximal schemes: those not occurring as a face
    /// of another scheme.
    pub fn maximal_scheme_keys(&mut self) -> Vec<String> {
        let keys: Vec<String> = (0..self.shuffles.len())
            .map(|i| self.scheme_key(i))
            .collect();
        let mut out = Vec::new();
        for (i, k) in keys.iter().enumerate() {
            let redundant = keys.iter().enumerate().any(|(j, kj)| {
                i != j && kj != k && self.member_closure(kj).contains(k)
            });
            if !redundant {
                out.push(k.clone());
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Does a labeled tree miss some first-factor colour entirely?
    pub fn misses_first_colour(&self, labeled: &Tree) -> bool {
        let used: BTreeSet<&str> = labeled
            .edges()
            .map(|e| split_label(labeled.name(e)).0)
            .collect();
        self.shuffles.s.edges().any(|e| !used.contains(self.shuffles.s.name(e)))
    }

    /// Does a labeled tree miss some second-factor colour entirely?
    pub fn misses_second_colour(&self, labeled: &Tree) -> bool {
        let used: BTreeSet<&str> = labeled
            .edges()
            .map(|e| split_label(labeled.name(e)).1)
            .collect();
        self.shuffles.t.edges().any(|e| !used.contains(self.shuffles.t.name(e)))
    }

    /// Every label has the given second coordinate.
    pub fn constant_second(&self, labeled: &Tree, level: &str) -> bool {
        labeled
            .edges()
            .all(|e| split_label(labeled.name(e)).1 == level)
    }

    /// The boundary-cylinder subobject at an end level: faces that miss a
    /// first-factor colour, together with the whole first factor at the
    /// given constant level.
    pub fn cylinder_end_subcomplex(&mut self, level: &str) -> BTreeSet<String> {
        let whole = self.whole();
        whole
            .into_iter()
            .filter(|k| {
                let rep = self.reps[k].clone();
                self.misses_first_colour(&rep) || self.constant_second(&rep, level)
            })
            .collect()
    }
}

/// The spine of a black vertex in a scheme: the minimal external face
/// containing the vertex and the root edge. Returns the face and its
/// characteristic edge (the output edge of the black vertex).
pub fn spine(scheme: &LabeledTree, black: VertexId) -> (Face, EdgeId) {
    let shape = &scheme.shape;
    let mut ret = crate::face::EdgeSet::singleton(shape.root());
    // walk from the black vertex down to the root, keeping every incident
    // edge of the vertices on the way
    let mut v = black;
    loop {
        for e in shape.incident(v) {
            ret.insert(e);
        }
        match shape.vertex_below(shape.vertex(v).output) {
            None => break,
            Some(w) => v = w,
        }
    }
    let face = Face::new(shape, ret, crate::face::EdgeSet::EMPTY, crate::face::EdgeSet::EMPTY)
        .expect("spine is a face");
    (face, shape.vertex(black).output)
}

/// Positions `k+1 < N`: spines of a non-maximal scheme, one per black
/// vertex, in deterministic order.
pub fn spines(scheme: &LabeledTree) -> Vec<(Face, EdgeId)> {
    let mut out: Vec<(Face, EdgeId)> = scheme
        .black_vertices()
        .into_iter()
        .map(|b| spine(scheme, b))
        .collect();
    out.sort_by_key(|(f, _)| *f);
    out
}

/// Initial segments of a scheme: faces obtained by successively chopping
/// top vertices, each with its spine count (number of black vertices
/// kept).
pub fn initial_segments(scheme: &LabeledTree) -> Vec<(Face, usize)> {
    let shape = &scheme.shape;
    let nv = shape.vertex_count();
    let mut out = Vec::new();
    for mask in 0u64..(1 << nv) {
        let keep = |v: VertexId| mask & (1 << v.0) != 0;
        // down-closed vertex set: every kept vertex's lower vertex kept
        let mut ok = true;
        for v in shape.vertex_ids() {
            if keep(v) {
                if let Some(w) = shape.vertex_below(shape.vertex(v).output) {
                    if !keep(w) {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if !ok {
            continue;
        }
        let mut ret = crate::face::EdgeSet::singleton(shape.root());
        let mut capped = crate::face::EdgeSet::EMPTY;
        for v in shape.vertex_ids() {
            if keep(v) {
                for e in shape.incident(v) {
                    ret.insert(e);
                }
                if shape.vertex(v).inputs.is_empty() {
                    capped.insert(shape.vertex(v).output);
                }
            }
        }
        let face = Face::new(shape, ret, crate::face::EdgeSet::EMPTY, capped)
            .expect("initial segment is a face");
        let blacks = shape
            .vertex_ids()
            .filter(|&v| keep(v) && scheme.colour(v) == VertexColour::Black)
            .count();
        out.push((face, blacks));
    }
    out.sort();
    out.dedup();
    out
}


/// Every common labeled face of two distinct schemes lies in a scheme
/// preceding both.
pub fn common_face_bound(tc: &mut TensorComplex, i: usize, j: usize) -> bool {
    let ki = tc.scheme_key(i);
    let kj = tc.scheme_key(j);
    let ci = tc.member_closure(&ki);
    let cj = tc.member_closure(&kj);
    let common: Vec<String> = ci.intersection(&cj).cloned().collect();
    let n = tc.shuffles.len();
    let preds: Vec<usize> = (0..n)
        .filter(|&k| tc.shuffles.leq(k, i) && tc.shuffles.leq(k, j))
        .collect();
    let mut pred_union: BTreeSet<String> = BTreeSet::new();
    for k in preds {
        let kk = tc.scheme_key(k);
        pred_union.extend(tc.member_closure(&kk));
    }
    common.iter().all(|c| pred_union.contains(c))
}
