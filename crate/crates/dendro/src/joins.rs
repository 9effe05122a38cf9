//! Join constructions: a forest joined over a new vertex onto a linear
//! chain, a chain grafted above a leaf through a new unary vertex,
//! admissible edge sets, and the forests obtained by deleting them.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::face::{crown_edges, EdgeSet, Face, FaceError};
use crate::tree::{is_isomorphic, parse_tree, EdgeId, Tree, TreeError, VertexId};

/// A finite unordered collection of trees; kept sorted by canonical code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forest {
    trees: Vec<Tree>,
}

impl Forest {
    pub fn new(mut trees: Vec<Tree>) -> Forest {
        trees.sort_by_key(|t| t.canonical_code());
        Forest { trees }
    }

    pub fn empty() -> Forest {
        Forest { trees: Vec::new() }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.trees.iter().map(|t| t.edge_count()).sum()
    }

    /// Code of the multiset of member codes.
    pub fn canonical_code(&self) -> String {
        let mut codes: Vec<String> = self.trees.iter().map(|t| t.canonical_code().0).collect();
        codes.sort();
        codes.join("+")
    }

    pub fn is_isomorphic(&self, other: &Forest) -> bool {
        self.canonical_code() == other.canonical_code()
    }

    /// Semicolon-separated tree expressions; `()` denotes the empty
    /// forest.
    pub fn parse(input: &str) -> Result<Forest, TreeError> {
        let trimmed = input.trim();
        if trimmed.is_empty() || trimmed == "()" {
            return Ok(Forest::empty());
        }
        let trees = trimmed
            .split(';')
            .map(|s| parse_tree(s.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Forest::new(trees))
    }

    pub fn to_expr(&self) -> String {
        if self.trees.is_empty() {
            "()".to_string()
        } else {
            self.trees
                .iter()
                .map(|t| t.to_expr())
                .collect::<Vec<_>>()
                .join("; ")
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JoinError {
    #[error("edge set is not admissible")]
    NotAdmissible,
    #[error("component index {0} out of range")]
    BadComponent(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Face(#[from] FaceError),
}

/// The tree obtained by joining a forest over a new vertex whose output
/// heads a chain of `n` unary vertices, together with the bookkeeping
/// needed to locate forest edges and chain edges in the result.
#[derive(Debug, Clone)]
pub struct JoinHost {
    pub tree: Tree,
    pub n: usize,
    /// `chain[k]` is the host edge named `k`; `chain[0]` is the output of
    /// the join vertex, `chain[n]` the root.
    pub chain: Vec<EdgeId>,
    /// Per forest component, the map from component edge to host edge.
    pub components: Vec<BTreeMap<EdgeId, EdgeId>>,
    /// The join vertex.
    pub join_vertex: VertexId,
}

/// Builds the join of a forest with the `n`-chain. Component edges are
/// renamed `t{i}.{name}` (roots become `j.a{i}`); chain edges are named
/// `0` (top) through `n` (root).
pub fn forest_star(forest: &Forest, n: usize) -> JoinHost {
    let chain_tree = Tree::linear(n);
    let k = forest.len();
    let top = chain_tree.leaves()[0];
    let star = Tree::corolla(k).rename(|s| format!("j.{s}")).unwrap();
    let mut host = Tree::graft(&chain_tree, top, &star).unwrap();
    for (i, t) in forest.trees().iter().enumerate() {
        let renamed = t.rename(|s| format!("t{}.{}", i + 1, s)).unwrap();
        let leaf = host.edge_by_name(&format!("j.a{}", i + 1)).unwrap();
        host = Tree::graft(&host, leaf, &renamed).unwrap();
    }
    let components: Vec<BTreeMap<EdgeId, EdgeId>> = forest
        .trees()
        .iter()
        .enumerate()
        .map(|(i, t)| {
            t.edges()
                .map(|e| {
                    let name = if e == t.root() {
                        format!("j.a{}", i + 1)
                    } else {
                        format!("t{}.{}", i + 1, t.name(e))
                    };
                    (e, host.edge_by_name(&name).unwrap())
                })
                .collect()
        })
        .collect();
    let chain: Vec<EdgeId> = (0..=n)
        .map(|i| host.edge_by_name(&i.to_string()).unwrap())
        .collect();
    let join_vertex = host.vertex_above(chain[0]).unwrap();
    JoinHost {
        tree: host,
        n,
        chain,
        components,
        join_vertex,
    }
}

/// The chain grafted above the leaf `e` of `base` through a new unary
/// vertex. Chain edges are named `0` (top) through `n`; base edges are
/// prefixed `t.`.
#[derive(Debug, Clone)]
pub struct LeafJoinHost {
    pub tree: Tree,
    pub n: usize,
    pub chain: Vec<EdgeId>,
    /// base edge -> host edge
    pub base: BTreeMap<EdgeId, EdgeId>,
    /// The new unary vertex between the chain and the leaf.
    pub join_vertex: VertexId,
    /// The host edge that was the designated leaf of the base.
    pub leaf_edge: EdgeId,
}

pub fn leaf_star(n: usize, base: &Tree, leaf: EdgeId) -> Result<LeafJoinHost, JoinError> {
    if !base.is_leaf(leaf) {
        return Err(JoinError::Tree(TreeError::NotALeaf(
            base.name(leaf).to_string(),
        )));
    }
    let renamed = base.rename(|s| format!("t.{s}")).unwrap();
    let host_leaf = renamed
        .edge_by_name(&format!("t.{}", base.name(leaf)))
        .unwrap();
    // A chain with n + 1 vertices: its root is identified with the leaf,
    // so the bottom chain vertex becomes the new unary join vertex with
    // output `leaf` and input the chain edge `n`.
    let chain = Tree::linear(n + 1);
    let host = Tree::graft(&renamed, host_leaf, &chain).unwrap();
    let base_map: BTreeMap<EdgeId, EdgeId> = base
        .edges()
        .map(|e| {
            (
                e,
                host.edge_by_name(&format!("t.{}", base.name(e))).unwrap(),
            )
        })
        .collect();
    let leaf_edge = base_map[&leaf];
    let chain_edges: Vec<EdgeId> = (0..=n)
        .map(|i| host.edge_by_name(&i.to_string()).unwrap())
        .collect();
    let join_vertex = host.vertex_above(leaf_edge).unwrap();
    Ok(LeafJoinHost {
        tree: host,
        n,
        chain: chain_edges,
        base: base_map,
        join_vertex,
        leaf_edge,
    })
}

/// Recovers the unique forest with `t` isomorphic to its join with the
/// 1-chain: defined when `t` has at least two vertices and a unary root
/// vertex.
pub fn has_unary_root_join(t: &Tree) -> Option<Forest> {
    if t.vertex_count() < 2 {
        return None;
    }
    let r = t.root_vertex()?;
    if t.vertex(r).inputs.len() != 1 {
        return None;
    }
    let e0 = t.vertex(r).inputs[0];
    let v = t.vertex_above(e0)?;
    let trees: Vec<Tree> = t
        .vertex(v)
        .inputs
        .iter()
        .map(|&i| t.subtree_at(i))
        .collect();
    Some(Forest::new(trees))
}

/// Writes `t` as a forest joined with a chain, taking the longest unary
/// chain up from the root. Defined for every tree with at least one
/// vertex.
pub fn decompose_join(t: &Tree) -> Option<(Forest, usize)> {
    t.root_vertex()?;
    let mut n = 0usize;
    let mut edge = t.root();
    loop {
        let v = t.vertex_above(edge).unwrap();
        let vx = t.vertex(v);
        if vx.inputs.len() != 1 {
            // v is the join vertex
            let trees: Vec<Tree> = vx.inputs.iter().map(|&i| t.subtree_at(i)).collect();
            return Some((Forest::new(trees), n));
        }
        let input = vx.inputs[0];
        if t.is_leaf(input) || t.vertex_above(input).is_none() {
            // pure chain: the top unary vertex is the join vertex over (eta)
            return Some((Forest::new(vec![Tree::eta("e")]), n));
        }
        n += 1;
        edge = input;
    }
}

/// Admissibility: for every leaf `e` and vertex `v`, if the set contains
/// the full path of edges from `e` down to `v` then it contains every
/// edge above `v`.
pub fn is_admissible(t: &Tree, a: EdgeSet) -> bool {
    for leaf in t.leaves() {
        let mut cur = leaf;
        loop {
            if !a.contains(cur) {
                break;
            }
            let Some(v) = t.vertex_below(cur) else { break };
            // the path from `leaf` to `v` lies in `a`
            for &i in &t.vertex(v).inputs {
                for e in t.edges_above(i) {
                    if !a.contains(e) {
                        return false;
                    }
                }
            }
            cur = t.vertex(v).output;
        }
    }
    true
}

/// All admissible subsets of the edges of `t`.
pub fn admissible_sets(t: &Tree) -> Vec<EdgeSet> {
    let n = t.edge_count();
    (0u64..(1 << n))
        .map(EdgeSet)
        .filter(|&a| is_admissible(t, a))
        .collect()
}

/// Edges deleted outright (rather than contracted) when an admissible set
/// is removed.
///
/// A deleted input edge dooms the vertex below it, taking everything
/// above that vertex along; this propagates downward through the set. An
/// edge whose crown survives (a branch outside the set, or a nullary
/// vertex) is contracted instead. `boundary` marks the vertex at which
/// propagation stops (the join vertex when working inside a join host);
/// edges sitting directly on the boundary are deleted when crowned.
pub fn pruned_edges(t: &Tree, a: EdgeSet, boundary: Option<VertexId>) -> EdgeSet {
    // crowned(e): e in `a` and everything strictly above e is deleted,
    // ending at leaves
    let mut crowned_memo: BTreeMap<EdgeId, bool> = BTreeMap::new();
    fn crowned(t: &Tree, a: EdgeSet, e: EdgeId, memo: &mut BTreeMap<EdgeId, bool>) -> bool {
        if let Some(&c) = memo.get(&e) {
            return c;
        }
        let c = a.contains(e)
            && match t.vertex_above(e) {
                None => true,
                Some(w) => {
                    let vx = t.vertex(w);
                    !vx.inputs.is_empty()
                        && vx.inputs.iter().all(|&i| crowned(t, a, i, memo))
                }
            };
        memo.insert(e, c);
        c
    }
    let mut pruned = EdgeSet::EMPTY;
    for v in t.vertex_ids() {
        if Some(v) == boundary {
            continue;
        }
        let vx = t.vertex(v);
        let doomed = vx
            .inputs
            .iter()
            .any(|&i| crowned(t, a, i, &mut crowned_memo));
        if doomed {
            for &i in &vx.inputs {
                for e in t.edges_above(i) {
                    pruned.insert(e);
                }
            }
        }
    }
    // edges at the boundary (component roots, or the root of a
    // standalone tree) are deleted when crowned
    for e in a.iter() {
        let at_boundary = match t.vertex_below(e) {
            None => true,
            Some(v) => Some(v) == boundary,
        };
        if at_boundary && crowned(t, a, e, &mut crowned_memo) {
            pruned.insert(e);
        }
    }
    pruned
}

/// The forest left after deleting an admissible edge set, computed by the
/// stepwise recursion. `order` picks which applicable deletion to run
/// first, for checking that the result does not depend on it.
pub fn boundary_forest_ordered(
    t: &Tree,
    a: EdgeSet,
    order: &dyn Fn(&Tree, &[EdgeId]) -> usize,
) -> Result<Forest, JoinError> {
    if !is_admissible(t, a) {
        return Err(JoinError::NotAdmissible);
    }
    fn go(t: &Tree, a: EdgeSet, order: &dyn Fn(&Tree, &[EdgeId]) -> usize) -> Vec<Tree> {
        if a.is_empty() {
            return vec![t.clone()];
        }
        let candidates: Vec<EdgeId> = a.iter().collect();
        let pick = candidates[order(t, &candidates) % candidates.len()];
        if pick == t.root() {
            // delete the root and the vertex above it
            match t.vertex_above(pick) {
                None => Vec::new(),
                Some(v) => {
                    let mut out = Vec::new();
                    for &i in &t.vertex(v).inputs {
                        let sub = t.subtree_at(i);
                        let sub_a = EdgeSet::from_iter(
                            sub.edges()
                                .filter(|&e| {
                                    let host_edge = t.edge_by_name(sub.name(e)).unwrap();
                                    a.contains(host_edge)
                                }),
                        );
                        out.extend(go(&sub, sub_a, order));
                    }
                    out
                }
            }
        } else if t.is_leaf(pick) {
            // prune the vertex below and everything above it
            let v = t.vertex_below(pick).unwrap();
            let removed: Vec<EdgeId> = t
                .vertex(v)
                .inputs
                .iter()
                .flat_map(|&i| t.edges_above(i))
                .collect();
            let keep: Vec<EdgeId> = t
                .edges()
                .filter(|e| !removed.contains(e))
                .collect();
            let names: Vec<String> = keep.iter().map(|&e| t.name(e).to_string()).collect();
            let reindex: BTreeMap<EdgeId, EdgeId> = keep
                .iter()
                .enumerate()
                .map(|(i, &e)| (e, EdgeId(i as u32)))
                .collect();
            let vertices = t
                .vertex_ids()
                .filter(|&w| w != v && reindex.contains_key(&t.vertex(w).output))
                .map(|w| {
                    let vx = t.vertex(w);
                    crate::tree::Vertex {
                        output: reindex[&vx.output],
                        inputs: vx.inputs.iter().map(|i| reindex[i]).collect(),
                    }
                })
                .collect();
            let pruned = Tree::build_from_parts(names, vertices).expect("pruned tree valid");
            let rest = EdgeSet::from_iter(
                pruned
                    .edges()
                    .filter(|&e| a.contains(t.edge_by_name(pruned.name(e)).unwrap())),
            );
            go(&pruned, rest, order)
        } else {
            // inner edge (possibly capped by a nullary vertex): contract
            let f = Face::spanned(
                t,
                EdgeSet::all(t.edge_count()),
                EdgeSet::singleton(pick),
            )
            .expect("inner contraction is a face");
            let sd = crate::face::shape_of(t, &f);
            let rest = EdgeSet::from_iter(
                sd.tree
                    .edges()
                    .filter(|&e| a.contains(t.edge_by_name(sd.tree.name(e)).unwrap())),
            );
            go(&sd.tree, rest, order)
        }
    }
    Ok(Forest::new(go(t, a, order)))
}

/// The forest left after deleting an admissible edge set.
pub fn boundary_forest(t: &Tree, a: EdgeSet) -> Result<Forest, JoinError> {
    boundary_forest_ordered(t, a, &|_, _| 0)
}

/// An admissible subset of edges of a forest: one admissible set per
/// component.
pub type ForestAdmissible = Vec<EdgeSet>;

/// All admissible subsets of a forest, as component tuples.
pub fn forest_admissible_sets(forest: &Forest) -> Vec<ForestAdmissible> {
    let per: Vec<Vec<EdgeSet>> = forest.trees().iter().map(admissible_sets).collect();
    let mut out: Vec<ForestAdmissible> = vec![Vec::new()];
    for options in per {
        let mut next = Vec::new();
        for partial in &out {
            for &opt in &options {
                let mut p = partial.clone();
                p.push(opt);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Applies the deletion componentwise.
pub fn forest_boundary(forest: &Forest, a: &ForestAdmissible) -> Result<Forest, JoinError> {
    let mut trees = Vec::new();
    for (t, &set) in forest.trees().iter().zip(a.iter()) {
        trees.extend(boundary_forest(t, set)?.trees.into_iter());
    }
    Ok(Forest::new(trees))
}

/// The face of the join host given by deleting an admissible set from the
/// forest and restricting the chain to the marks in `u` (a non-empty
/// sorted subset of `0..=n`). Returns None when the deletion removes the
/// whole forest of a non-empty join, which leaves no valid subtree.
pub fn join_face(host: &JoinHost, a: &ForestAdmissible, u: &[usize]) -> Option<Face> {
    debug_assert!(!u.is_empty());
    debug_assert!(u.windows(2).all(|w| w[0] < w[1]));
    // forest part, in host coordinates
    let a_host: EdgeSet = host
        .components
        .iter()
        .zip(a.iter())
        .fold(EdgeSet::EMPTY, |acc, (map, &set)| {
            acc.union(EdgeSet::from_iter(set.iter().map(|e| map[&e])))
        });
    let pruned = pruned_edges(&host.tree, a_host, Some(host.join_vertex));
    let mut all_pruned = !host.components.is_empty();
    let mut ret = EdgeSet::EMPTY;
    for map in &host.components {
        let comp_edges = EdgeSet::from_iter(map.values().copied());
        let kept = comp_edges.minus(pruned);
        if !kept.is_empty() {
            all_pruned = false;
        }
        ret = ret.union(kept);
    }
    if all_pruned {
        return None;
    }
    let mut con = a_host.minus(pruned);
    // chain part
    let u_max = *u.last().unwrap();
    for k in 0..=u_max {
        ret.insert(host.chain[k]);
        if !u.contains(&k) {
            con.insert(host.chain[k]);
        }
    }
    let capped = crown_edges(&host.tree, ret);
    // A deletion that wipes out one component of a larger forest leaves
    // the join vertex with a partial input set, which is not a subtree;
    // such joins are simply not faces of the host.
    Face::new(&host.tree, ret, con, capped).ok()
}

/// The image of the chain inside the join host, as a face.
pub fn chain_face(host: &JoinHost) -> Face {
    let ret = EdgeSet::from_iter(host.chain.iter().copied());
    Face::new(&host.tree, ret, EdgeSet::EMPTY, EdgeSet::EMPTY).expect("chain is a face")
}

/// The admissible face over `a` with the full chain.
pub fn admissible_face(host: &JoinHost, a: &ForestAdmissible) -> Option<Face> {
    let u: Vec<usize> = (0..=host.n).collect();
    join_face(host, a, &u)
}

/// Faces of the base tree whose retained set contains the designated
/// leaf.
pub fn e_admissible_faces(t: &Tree, leaf: EdgeId) -> Vec<Face> {
    crate::face::all_faces(t)
        .into_iter()
        .filter(|f| f.retained.contains(leaf))
        .collect()
}

/// The face of the leaf join given by an e-admissible face of the base
/// and a chain restriction `u` (non-empty sorted subset of `0..=n`):
/// chain edges above the first mark are chopped, unmarked edges from the
/// first mark down merge into the join vertex.
pub fn leaf_join_face(host: &LeafJoinHost, base_face: &Face, u: &[usize]) -> Face {
    debug_assert!(!u.is_empty());
    debug_assert!(u.windows(2).all(|w| w[0] < w[1]));
    let map = |s: EdgeSet| EdgeSet::from_iter(s.iter().map(|e| host.base[&e]));
    let mut ret = map(base_face.retained);
    let mut con = map(base_face.contracted);
    let capped = map(base_face.capped);
    let u_min = u[0];
    for k in u_min..=host.n {
        ret.insert(host.chain[k]);
        if !u.contains(&k) {
            con.insert(host.chain[k]);
        }
    }
    Face::new(&host.tree, ret, con, capped).expect("leaf join face is valid")
}

/// The image of the chain inside the leaf join host: the edges `0..=n`,
/// with the join vertex left outside.
pub fn leaf_chain_face(host: &LeafJoinHost) -> Face {
    let ret = EdgeSet::from_iter(host.chain.iter().copied());
    Face::new(&host.tree, ret, EdgeSet::EMPTY, EdgeSet::EMPTY).expect("chain is a face")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::face::shape_of;

    #[test]
    fn forest_star_shapes() {
        // empty forest: nullary vertex + n unary vertices
        for n in 0..=4 {
            let h = forest_star(&Forest::empty(), n);
            assert_eq!(h.tree.edge_count(), n + 1);
            assert_eq!(h.tree.vertex_count(), n + 1);
            let v = h.join_vertex;
            assert!(h.tree.vertex(v).inputs.is_empty());
        }
        // single corolla over 0-chain: 2 vertices, 4 edges
        let h = forest_star(&Forest::new(vec![Tree::corolla(2)]), 0);
        assert_eq!(h.tree.vertex_count(), 2);
        assert_eq!(h.tree.edge_count(), 4);
        // (eta) * 1 is the 2-chain
        let h = forest_star(&Forest::new(vec![Tree::eta("e")]), 1);
        assert!(is_isomorphic(&h.tree, &Tree::linear(2)).is_some());
    }

    #[test]
    fn unary_root_join_inverse() {
        // linear(2) = (eta) * 1
        let f = has_unary_root_join(&Tree::linear(2)).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.trees()[0].canonical_code(), Tree::eta("x").canonical_code());
        // corolla(2): root vertex not unary
        assert!(has_unary_root_join(&Tree::corolla(2)).is_none());
        // ( ) * 1: empty forest
        let t = parse_tree("(1 (0))").unwrap();
        let f = has_unary_root_join(&t).unwrap();
        assert!(f.is_empty());
        // round trip over all small forests
        for trees in [
            vec![],
            vec![Tree::eta("e")],
            vec![Tree::eta("e"), Tree::corolla(2)],
            vec![Tree::linear(1), Tree::linear(1)],
        ] {
            let forest = Forest::new(trees);
            let h = forest_star(&forest, 1);
            let back = has_unary_root_join(&h.tree).unwrap();
            assert!(back.is_isomorphic(&forest), "{}", forest.to_expr());
        }
    }

    #[test]
    fn every_tree_decomposes_as_a_join() {
        for t in crate::tree::all_trees(4, 6) {
            if t.vertex_count() == 0 {
                assert!(decompose_join(&t).is_none());
                continue;
            }
            let (forest, n) = decompose_join(&t).unwrap();
            let h = forest_star(&forest, n);
            assert!(
                is_isomorphic(&h.tree, &t).is_some(),
                "{} decomposed as {} * {}",
                t.to_expr(),
                forest.to_expr(),
                n
            );
        }
    }

    fn paper_example_tree() -> Tree {
        // root a under vertex v with inputs b and e; b carries a vertex
        // with inputs c and d
        Tree::build(
            &["a", "b", "c", "d", "e"],
            &[("a", vec!["b", "e"]), ("b", vec!["c", "d"])],
        )
        .unwrap()
    }

    #[test]
    fn admissibility_examples() {
        let t = paper_example_tree();
        let set = |names: &[&str]| {
            EdgeSet::from_iter(names.iter().map(|n| t.edge_by_name(n).unwrap()))
        };
        assert!(!is_admissible(&t, set(&["b", "c"])));
        assert!(is_admissible(&t, set(&["b", "c", "d", "e"])));
        assert!(is_admissible(&t, EdgeSet::EMPTY));
        // a lone input edge cannot be deleted without its siblings
        assert!(!is_admissible(&t, set(&["c"])));
        assert!(is_admissible(&t, set(&["a"])));
        // {c, d} prunes the upper vertex; admissible
        assert!(is_admissible(&t, set(&["c", "d"])));
        // {b, c, d} reaches the root vertex through c, b and so also
        // needs e
        assert!(!is_admissible(&t, set(&["b", "c", "d"])));
        assert!(is_admissible(&t, set(&["c", "d", "b", "e"])));
    }

    #[test]
    fn boundary_forest_examples() {
        // empty set: the tree itself
        let t = Tree::corolla(2);
        let f = boundary_forest(&t, EdgeSet::EMPTY).unwrap();
        assert_eq!(f.len(), 1);

        // corolla(2) minus the root edge: two etas
        let root = t.root();
        let f = boundary_forest(&t, EdgeSet::singleton(root)).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.trees().iter().all(|x| x.edge_count() == 1 && x.vertex_count() == 0));

        // linear(1) minus both edges: empty forest
        let l1 = Tree::linear(1);
        let f = boundary_forest(&l1, EdgeSet::all(2)).unwrap();
        assert!(f.is_empty());

        // non-admissible set rejected
        let p = paper_example_tree();
        let bad = EdgeSet::from_iter(
            ["b", "c"].iter().map(|n| p.edge_by_name(n).unwrap()),
        );
        assert!(boundary_forest(&p, bad).is_err());
    }

    #[test]
    fn boundary_forest_is_confluent() {
        // all admissible sets on all trees with <= 5 edges, three orders
        let orders: Vec<Box<dyn Fn(&Tree, &[EdgeId]) -> usize>> = vec![
            Box::new(|_, _| 0),
            Box::new(|_, c: &[EdgeId]| c.len() - 1),
            Box::new(|_, c: &[EdgeId]| c.len() / 2),
        ];
        for t in crate::tree::all_trees(5, 5) {
            if t.vertex_count() == 0 {
                continue;
            }
            for a in admissible_sets(&t) {
                let results: Vec<Forest> = orders
                    .iter()
                    .map(|o| boundary_forest_ordered(&t, a, o).unwrap())
                    .collect();
                for r in &results[1..] {
                    assert!(
                        r.is_isomorphic(&results[0]),
                        "tree {} set {:?}",
                        t.to_expr(),
                        a
                    );
                }
            }
        }
    }

    #[test]
    fn join_faces_realize_deletions() {
        // deletion through the face route matches the recursive route
        let forests = [
            Forest::new(vec![Tree::corolla(2)]),
            Forest::new(vec![Tree::linear(1)]),
            Forest::new(vec![Tree::eta("e"), Tree::corolla(2)]),
            Forest::new(vec![paper_example_tree()]),
        ];
        for forest in &forests {
            for n in 1..=2 {
                let h = forest_star(forest, n);
                for a in forest_admissible_sets(forest) {
                    let expected = forest_boundary(forest, &a).unwrap();
                    match admissible_face(&h, &a) {
                        None => {
                            // only happens when a whole component is
                            // deleted down to its leaves
                            let some_component_gone = forest
                                .trees()
                                .iter()
                                .zip(a.iter())
                                .any(|(t, &s)| {
                                    boundary_forest(t, s).unwrap().is_empty()
                                });
                            assert!(some_component_gone, "forest {} {:?}", forest.to_expr(), a);
                        }
                        Some(face) => {
                            let sd = shape_of(&h.tree, &face);
                            // the shape should be the join of the reduced
                            // forest with the same chain
                            let rebuilt = forest_star(&expected, n);
                            assert!(
                                is_isomorphic(&sd.tree, &rebuilt.tree).is_some(),
                                "forest {} set {:?} n {}: got {}, want {}",
                                forest.to_expr(),
                                a,
                                n,
                                sd.tree.to_expr(),
                                rebuilt.tree.to_expr()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn admissible_join_faces_nest() {
        // A ⊆ B gives faces with the B-face factoring through the A-face
        let forest = Forest::new(vec![paper_example_tree()]);
        let h = forest_star(&forest, 1);
        let sets = forest_admissible_sets(&forest);
        for a in &sets {
            for b in &sets {
                if !a[0].is_subset(b[0]) {
                    continue;
                }
                let (Some(fa), Some(fb)) = (admissible_face(&h, a), admissible_face(&h, b))
                else {
                    continue;
                };
                // the B face's members lie inside the A face's closure
                let mut table = crate::subcomplex::FaceTable::new(h.tree.clone());
                assert!(
                    table.closure(&fa).contains(&fb),
                    "A {:?} B {:?}",
                    a,
                    b
                );
            }
        }
    }

    #[test]
    fn leaf_star_shapes() {
        let c2 = Tree::corolla(2);
        let leaf = c2.edge_by_name("a1").unwrap();
        let h = leaf_star(1, &c2, leaf).unwrap();
        assert_eq!(h.tree.vertex_count(), 3);
        assert_eq!(h.tree.edge_count(), 5);
        // 1 *_e T has a unary top vertex
        assert!(h
            .tree
            .vertex_ids()
            .any(|v| h.tree.is_unary_top_vertex(v)));

        let h0 = leaf_star(0, &c2, leaf).unwrap();
        assert_eq!(h0.tree.vertex_count(), 2);
        assert_eq!(h0.tree.edge_count(), 4);

        let root = c2.root();
        assert!(leaf_star(1, &c2, root).is_err());
    }

    #[test]
    fn leaf_star_inverse_search() {
        // any tree with a unary top vertex v arises as the 0-chain joined
        // above the leaf of the chopped tree; with two stacked unary
        // vertices it is the 1-chain join
        for t in crate::tree::all_trees(4, 6) {
            if t.vertex_count() < 2 {
                continue;
            }
            for v in t.vertex_ids() {
                if !t.is_unary_top_vertex(v) {
                    continue;
                }
                // remove v and its input to recover the base
                let f = crate::face::elementary_faces(&t)
                    .into_iter()
                    .find(|(fc, k)| {
                        *k == crate::face::FaceKind::Outer
                            && !fc.retained.contains(t.vertex(v).inputs[0])
                            && fc.retained.contains(t.vertex(v).output)
                    });
                let (face, _) = f.expect("top chop exists");
                let sd = shape_of(&t, &face);
                let base = sd.tree;
                let leaf_name = t.name(t.vertex(v).output).to_string();
                let leaf = base.edge_by_name(&leaf_name).unwrap();
                let rebuilt = leaf_star(0, &base, leaf).unwrap();
                assert!(
                    is_isomorphic(&rebuilt.tree, &t).is_some(),
                    "{}",
                    t.to_expr()
                );
            }
        }
        // the stacked case: 1 *_e corolla(2) has itself as a 1-chain join
        let c2 = Tree::corolla(2);
        let h = leaf_star(1, &c2, c2.edge_by_name("a1").unwrap()).unwrap();
        let s = &h.tree;
        let top = s
            .vertex_ids()
            .find(|&v| s.is_unary_top_vertex(v))
            .unwrap();
        let below = s.vertex_below(s.vertex(top).output).unwrap();
        assert_eq!(s.vertex(below).inputs.len(), 1);
    }

    #[test]
    fn e_admissible_faces_examples() {
        let c2 = Tree::corolla(2);
        let leaf = c2.edge_by_name("a1").unwrap();
        let faces = e_admissible_faces(&c2, leaf);
        // identity and the eta on the leaf; not the eta on the other leaf
        assert!(faces.contains(&Face::identity(&c2)));
        assert!(faces
            .iter()
            .any(|f| f.retained == EdgeSet::singleton(leaf)));
        assert_eq!(faces.len(), 2);

        let t = {
            let g = Tree::graft(
                &c2,
                c2.edge_by_name("a2").unwrap(),
                &Tree::corolla(1).rename(|s| format!("p{s}")).unwrap(),
            )
            .unwrap();
            g
        };
        let leaf = t.edge_by_name("a1").unwrap();
        let faces = e_admissible_faces(&t, leaf);
        for f in &faces {
            assert!(f.retained.contains(leaf));
            // the leaf stays a leaf of every shape
            let sd = shape_of(&t, f);
            let se = sd.host_to_edge[&leaf];
            assert!(sd.tree.is_leaf(se));
        }
        // the top chop dropping the leaf is excluded
        let chop = crate::face::elementary_faces(&t)
            .into_iter()
            .find(|(f, _)| !f.retained.contains(leaf))
            .unwrap()
            .0;
        assert!(!faces.contains(&chop));
    }

    #[test]
    fn leaf_join_chain_restrictions() {
        let c2 = Tree::corolla(2);
        let leaf = c2.edge_by_name("a1").unwrap();
        let h = leaf_star(1, &c2, leaf).unwrap();
        let id = Face::identity(&c2);
        // full: the identity of the host
        let full = leaf_join_face(&h, &id, &[0, 1]);
        assert!(full.is_identity(&h.tree));
        // u = {0}: contract the chain remnant below the top edge
        let f0 = leaf_join_face(&h, &id, &[0]);
        let sd = shape_of(&h.tree, &f0);
        assert_eq!(sd.tree.edge_count(), h.tree.edge_count() - 1);
        // u = {1}: chop the top edge
        let f1 = leaf_join_face(&h, &id, &[1]);
        let sd = shape_of(&h.tree, &f1);
        assert_eq!(sd.tree.edge_count(), h.tree.edge_count() - 1);
        assert_ne!(f0, f1);
    }
}
