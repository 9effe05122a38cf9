//! Faces of a tree: monomorphisms into a host tree, encoded as a triple
//! (retained edges, contracted edges, capped edges).
//!
//! The retained set spans a subtree (outer faces chop everything else
//! away); the contracted set is a subset of the subtree's inner edges.
//! A vertex with at least one input belongs to the subtree exactly when
//! all its incident edges are retained, so retained and contracted
//! determine it. A nullary vertex has a single incident edge and needs
//! one extra bit: `capped` lists the retained edges that keep their
//! nullary vertex. Composites and identities of faces are faces, and
//! every monomorphism normalizes to exactly one such triple.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::{EdgeId, Tree, TreeError, Vertex, VertexId};

/// Set of edges of one host tree, as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct EdgeSet(pub u64);

impl EdgeSet {
    pub const EMPTY: EdgeSet = EdgeSet(0);

    pub fn singleton(e: EdgeId) -> EdgeSet {
        EdgeSet(1 << e.0)
    }

    pub fn from_iter<I: IntoIterator<Item = EdgeId>>(iter: I) -> EdgeSet {
        let mut s = EdgeSet::EMPTY;
        for e in iter {
            s.insert(e);
        }
        s
    }

    pub fn all(n: usize) -> EdgeSet {
        debug_assert!(n <= 64);
        if n == 64 {
            EdgeSet(u64::MAX)
        } else {
            EdgeSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, e: EdgeId) -> bool {
        self.0 & (1 << e.0) != 0
    }

    pub fn insert(&mut self, e: EdgeId) {
        self.0 |= 1 << e.0;
    }

    pub fn remove(&mut self, e: EdgeId) {
        self.0 &= !(1 << e.0);
    }

    pub fn union(self, other: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 | other.0)
    }

    pub fn intersect(self, other: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 & other.0)
    }

    pub fn minus(self, other: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: EdgeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = EdgeId> {
        (0..64u32)
            .filter(move |i| self.0 & (1 << i) != 0)
            .map(EdgeId)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FaceError {
    #[error("retained set is empty")]
    EmptyRetained,
    #[error("retained set is not a subtree: vertex with output `{0}` keeps some but not all incident edges")]
    PartialVertex(String),
    #[error("retained set is not connected")]
    Disconnected,
    #[error("contracted edge `{0}` is not an inner edge of the retained subtree")]
    BadContraction(String),
    #[error("capped edge `{0}` has no nullary vertex above it or is not retained")]
    BadCap(String),
    #[error("face does not belong to this host")]
    HostMismatch,
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// A monomorphism into a host tree, identified by its image data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Face {
    pub retained: EdgeSet,
    pub contracted: EdgeSet,
    /// Retained edges whose nullary vertex belongs to the subtree.
    pub capped: EdgeSet,
}

/// Retained edges that carry a nullary vertex, i.e. the edges for which
/// the `capped` bit is meaningful.
pub fn crown_edges(host: &Tree, retained: EdgeSet) -> EdgeSet {
    EdgeSet::from_iter(retained.iter().filter(|&e| {
        matches!(host.vertex_above(e), Some(v) if host.vertex(v).inputs.is_empty())
    }))
}

/// Vertices of the host belonging to the face's subtree: a vertex with
/// inputs is inside when all its incident edges are retained; a nullary
/// vertex is inside when its output edge is capped.
pub fn inside_vertices(host: &Tree, retained: EdgeSet, capped: EdgeSet) -> Vec<VertexId> {
    host.vertex_ids()
        .filter(|&v| {
            let vx = host.vertex(v);
            if vx.inputs.is_empty() {
                capped.contains(vx.output)
            } else {
                host.incident(v).iter().all(|&e| retained.contains(e))
            }
        })
        .collect()
}

/// Inner edges of the face's subtree: retained edges whose upper and
/// lower host vertices are both inside.
pub fn subtree_inner_edges(host: &Tree, retained: EdgeSet, capped: EdgeSet) -> EdgeSet {
    let mut inside = vec![false; host.vertex_count()];
    for w in inside_vertices(host, retained, capped) {
        inside[w.idx()] = true;
    }
    EdgeSet::from_iter(retained.iter().filter(|&e| {
        matches!(host.vertex_above(e), Some(v) if inside[v.idx()])
            && matches!(host.vertex_below(e), Some(v) if inside[v.idx()])
    }))
}

/// Checks that `retained` spans a subtree: non-empty, every host vertex
/// with inputs keeps none, one, or all of its incident edges, and the
/// retained edges are connected through inside vertices.
pub fn check_subtree(host: &Tree, retained: EdgeSet, capped: EdgeSet) -> Result<(), FaceError> {
    if retained.is_empty() {
        return Err(FaceError::EmptyRetained);
    }
    if !capped.is_subset(crown_edges(host, retained)) {
        let bad = capped.minus(crown_edges(host, retained)).iter().next().unwrap();
        return Err(FaceError::BadCap(host.name(bad).to_string()));
    }
    for v in host.vertex_ids() {
        let inc = host.incident(v);
        if inc.len() == 1 {
            continue; // nullary: in or out, decided by capped
        }
        let kept = inc.iter().filter(|&&e| retained.contains(e)).count();
        if kept != 0 && kept != 1 && kept != inc.len() {
            return Err(FaceError::PartialVertex(
                host.name(host.vertex(v).output).to_string(),
            ));
        }
    }
    // connectivity through inside vertices
    let inside = inside_vertices(host, retained, capped);
    let start = retained.iter().next().unwrap();
    let mut seen = EdgeSet::singleton(start);
    let mut stack = vec![start];
    while let Some(e) = stack.pop() {
        for &v in &inside {
            let inc = host.incident(v);
            if inc.contains(&e) {
                for &f in &inc {
                    if retained.contains(f) && !seen.contains(f) {
                        seen.insert(f);
                        stack.push(f);
                    }
                }
            }
        }
    }
    if seen != retained {
        return Err(FaceError::Disconnected);
    }
    Ok(())
}

impl Face {
    /// The identity face: everything retained, all nullary vertices kept.
    pub fn identity(host: &Tree) -> Face {
        let retained = EdgeSet::all(host.edge_count());
        Face {
            retained,
            contracted: EdgeSet::EMPTY,
            capped: crown_edges(host, retained),
        }
    }

    pub fn new(
        host: &Tree,
        retained: EdgeSet,
        contracted: EdgeSet,
        capped: EdgeSet,
    ) -> Result<Face, FaceError> {
        check_subtree(host, retained, capped)?;
        let inner = subtree_inner_edges(host, retained, capped);
        if !contracted.is_subset(inner) {
            let bad = contracted.minus(inner).iter().next().unwrap();
            return Err(FaceError::BadContraction(host.name(bad).to_string()));
        }
        Ok(Face {
            retained,
            contracted,
            capped,
        })
    }

    /// A full-subtree face: the given retained set with every nullary
    /// vertex kept and the given contractions.
    pub fn spanned(host: &Tree, retained: EdgeSet, contracted: EdgeSet) -> Result<Face, FaceError> {
        Face::new(host, retained, contracted, crown_edges(host, retained))
    }

    pub fn is_identity(&self, host: &Tree) -> bool {
        *self == Face::identity(host)
    }

    /// Edges of the host in the image of the monomorphism.
    pub fn image(&self) -> EdgeSet {
        self.retained.minus(self.contracted)
    }
}

/// The shape of a face together with the correspondence back to the host.
#[derive(Debug, Clone)]
pub struct ShapeData {
    pub tree: Tree,
    /// shape edge -> host edge
    pub edge_to_host: Vec<EdgeId>,
    /// host edge (retained, not contracted) -> shape edge
    pub host_to_edge: BTreeMap<EdgeId, EdgeId>,
    /// contracted host edge -> the shape vertex its endpoints merge into
    pub con_class: BTreeMap<EdgeId, VertexId>,
    /// inside host vertex -> shape vertex
    pub vertex_class: BTreeMap<VertexId, VertexId>,
}

/// Builds the shape tree of a face: the retained subtree with contracted
/// edges collapsed. Shape edges reuse host edge names.
pub fn shape_of(host: &Tree, face: &Face) -> ShapeData {
    let image = face.image();
    let inside = inside_vertices(host, face.retained, face.capped);

    // Union-find over inside vertices, merging across contracted edges.
    let mut parent: BTreeMap<VertexId, VertexId> = inside.iter().map(|&v| (v, v)).collect();
    fn find(parent: &mut BTreeMap<VertexId, VertexId>, v: VertexId) -> VertexId {
        let p = parent[&v];
        if p == v {
            v
        } else {
            let r = find(parent, p);
            parent.insert(v, r);
            r
        }
    }
    for e in face.contracted.iter() {
        let a = host.vertex_above(e).expect("contracted edge has a vertex above");
        let b = host.vertex_below(e).expect("contracted edge has a vertex below");
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent.insert(ra, rb);
        }
    }

    let mut edge_to_host: Vec<EdgeId> = image.iter().collect();
    edge_to_host.sort();
    let host_to_edge: BTreeMap<EdgeId, EdgeId> = edge_to_host
        .iter()
        .enumerate()
        .map(|(i, &h)| (h, EdgeId(i as u32)))
        .collect();
    let names: Vec<String> = edge_to_host
        .iter()
        .map(|&h| host.name(h).to_string())
        .collect();

    // Group inside vertices into classes; order classes by their output
    // edge so the shape is identical however it is computed.
    let mut classes: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for &v in &inside {
        let r = find(&mut parent, v);
        classes.entry(r).or_default().push(v);
    }
    let mut built: Vec<(EdgeId, VertexId, Vertex)> = Vec::new();
    for (root, members) in &classes {
        let mut output = None;
        let mut inputs = Vec::new();
        for &m in members {
            let vx = host.vertex(m);
            if !face.contracted.contains(vx.output) {
                debug_assert!(output.is_none());
                output = Some(host_to_edge[&vx.output]);
            }
            for &i in &vx.inputs {
                if !face.contracted.contains(i) {
                    inputs.push(host_to_edge[&i]);
                }
            }
        }
        inputs.sort();
        let output = output.expect("every merged class has an uncontracted output");
        built.push((output, *root, Vertex { output, inputs }));
    }
    built.sort_by_key(|(out, _, _)| *out);
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut class_vertex: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for (_, root, vx) in built {
        class_vertex.insert(root, VertexId(vertices.len() as u32));
        vertices.push(vx);
    }
    let con_class: BTreeMap<EdgeId, VertexId> = face
        .contracted
        .iter()
        .map(|e| {
            let a = host.vertex_above(e).unwrap();
            let r = find(&mut parent, a);
            (e, class_vertex[&r])
        })
        .collect();
    let vertex_class: BTreeMap<VertexId, VertexId> = inside
        .iter()
        .map(|&v| {
            let r = find(&mut parent, v);
            (v, class_vertex[&r])
        })
        .collect();

    let tree = Tree::build_from_parts(names, vertices).expect("face shape is a valid tree");
    ShapeData {
        tree,
        edge_to_host,
        host_to_edge,
        con_class,
        vertex_class,
    }
}

/// Composes `f` (a face of `host`) with `g`, a face of `f`'s shape,
/// yielding a face of the host. `sd` must be `shape_of(host, f)`.
pub fn compose(host: &Tree, f: &Face, g: &Face, sd: &ShapeData) -> Face {
    let lift = |s: EdgeSet| EdgeSet::from_iter(s.iter().map(|e| sd.edge_to_host[e.idx()]));
    // A shape vertex is inside g's subtree per the same rule as on hosts.
    let inside_class = |w: VertexId| -> bool {
        let vx = sd.tree.vertex(w);
        if vx.inputs.is_empty() {
            g.capped.contains(vx.output)
        } else {
            sd.tree.incident(w).iter().all(|&se| g.retained.contains(se))
        }
    };
    let mut ret = lift(g.retained);
    let mut con = lift(g.contracted);
    for (&host_edge, &class) in &sd.con_class {
        if inside_class(class) {
            ret.insert(host_edge);
            con.insert(host_edge);
        }
    }
    let mut capped = EdgeSet::EMPTY;
    for host_edge in f.capped.iter() {
        let nv = host
            .vertex_above(host_edge)
            .expect("capped edge has a nullary vertex above");
        if inside_class(sd.vertex_class[&nv]) {
            capped.insert(host_edge);
        }
    }
    Face {
        retained: ret,
        contracted: con,
        capped,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaceKind {
    Inner,
    Outer,
}

/// All elementary faces of the host with their kinds.
///
/// For a corolla the outer faces are its single-edge subtrees, one per
/// edge. The one-edge tree has no elementary faces.
pub fn elementary_faces(host: &Tree) -> Vec<(Face, FaceKind)> {
    let mut out = Vec::new();
    let everything = EdgeSet::all(host.edge_count());
    let all_crowns = crown_edges(host, everything);
    for e in host.inner_edges() {
        out.push((
            Face {
                retained: everything,
                contracted: EdgeSet::singleton(e),
                capped: all_crowns,
            },
            FaceKind::Inner,
        ));
    }
    if host.vertex_count() == 1 {
        for e in host.edges() {
            out.push((
                Face {
                    retained: EdgeSet::singleton(e),
                    contracted: EdgeSet::EMPTY,
                    capped: EdgeSet::EMPTY,
                },
                FaceKind::Outer,
            ));
        }
    } else if host.vertex_count() >= 2 {
        for v in host.vertex_ids() {
            if host.is_top_vertex(v) {
                let mut ret = everything;
                for &i in &host.vertex(v).inputs {
                    ret.remove(i);
                }
                let mut capped = crown_edges(host, ret);
                capped.remove(host.vertex(v).output);
                out.push((
                    Face {
                        retained: ret,
                        contracted: EdgeSet::EMPTY,
                        capped,
                    },
                    FaceKind::Outer,
                ));
            }
        }
        let r = host.root_vertex().expect("a tree with vertices has a root vertex");
        let non_leaf_inputs: Vec<EdgeId> = host
            .vertex(r)
            .inputs
            .iter()
            .copied()
            .filter(|&e| !host.is_leaf(e))
            .collect();
        if non_leaf_inputs.len() == 1 {
            let mut ret = everything;
            ret.remove(host.root());
            for &i in &host.vertex(r).inputs {
                if host.is_leaf(i) {
                    ret.remove(i);
                }
            }
            out.push((
                Face {
                    retained: ret,
                    contracted: EdgeSet::EMPTY,
                    capped: crown_edges(host, ret),
                },
                FaceKind::Outer,
            ));
        }
    }
    out.sort();
    out
}

/// All faces of the host, by direct enumeration of valid triples.
/// Includes the identity face.
pub fn all_faces(host: &Tree) -> Vec<Face> {
    let n = host.edge_count();
    debug_assert!(n <= 26, "face enumeration over 2^{n} subsets");
    let mut out = Vec::new();
    for mask in 1u64..(1 << n) {
        let retained = EdgeSet(mask);
        if check_subtree(host, retained, EdgeSet::EMPTY).is_err() {
            continue;
        }
        let crowns: Vec<EdgeId> = crown_edges(host, retained).iter().collect();
        for capmask in 0u64..(1 << crowns.len()) {
            let mut capped = EdgeSet::EMPTY;
            for (i, &e) in crowns.iter().enumerate() {
                if capmask & (1 << i) != 0 {
                    capped.insert(e);
                }
            }
            let inner_edges: Vec<EdgeId> =
                subtree_inner_edges(host, retained, capped).iter().collect();
            for cmask in 0u64..(1 << inner_edges.len()) {
                let mut contracted = EdgeSet::EMPTY;
                for (i, &e) in inner_edges.iter().enumerate() {
                    if cmask & (1 << i) != 0 {
                        contracted.insert(e);
                    }
                }
                out.push(Face {
                    retained,
                    contracted,
                    capped,
                });
            }
        }
    }
    out.sort();
    out
}

/// Serializes a face as (retained, contracted, capped) edge-name lists.
pub fn face_to_names(host: &Tree, face: &Face) -> (Vec<String>, Vec<String>, Vec<String>) {
    let list = |s: EdgeSet| s.iter().map(|e| host.name(e).to_string()).collect();
    (
        list(face.retained),
        list(face.contracted),
        list(face.capped),
    )
}

/// Parses a face from edge-name lists.
pub fn face_from_names(
    host: &Tree,
    retained: &[String],
    contracted: &[String],
    capped: &[String],
) -> Result<Face, FaceError> {
    let set = |names: &[String]| -> Result<EdgeSet, FaceError> {
        let mut s = EdgeSet::EMPTY;
        for n in names {
            s.insert(
                host.edge_by_name(n)
                    .ok_or_else(|| TreeError::UnknownEdge(n.clone()))?,
            );
        }
        Ok(s)
    };
    Face::new(host, set(retained)?, set(contracted)?, set(capped)?)
}
