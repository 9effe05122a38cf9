//! Bounded dendroidal sets, dendrex restriction, inner-Kan checking,
//! horn lifting, weak invertibility and normality.
//!
//! Two backends are materialized: nerves of finite operads, and
//! subcomplexes of representables (whose dendrices are tree maps into
//! the host). Both expose their dendrex sets at trees within a bound
//! with the restriction action along faces.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::face::{all_faces, compose, shape_of, Face, FaceKind};
use crate::operad::{FiniteOperad, OpId, OperadMorphism};
use crate::subcomplex::Subcomplex;
use crate::tree::{EdgeId, Tree, TreeIso, VertexId};

#[derive(Debug, Error)]
pub enum KanError {
    #[error("operad error: {0}")]
    Operad(#[from] crate::operad::OperadError),
    #[error("the tree exceeds the materialization bound")]
    Bound,
    #[error("{0}")]
    Other(String),
}

// ---------------------------------------------------------------------------
// Dendrices
// ---------------------------------------------------------------------------

/// A dendrex of a nerve: an edge colouring plus one operation per vertex,
/// inputs read in the vertex's stored order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Dendrex {
    pub colours: Vec<usize>,
    pub ops: Vec<OpId>,
}

/// A map from a tree into a host tree: an edge map together with one
/// region of the host per vertex (the operation it lands on). Regions
/// are external faces of the host: a retained set plus kept nullary
/// crowns.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TreeMap {
    pub edge_map: Vec<EdgeId>,
    /// per vertex: (region edges, capped crowns) of the host
    pub regions: Vec<(crate::face::EdgeSet, crate::face::EdgeSet)>,
}

/// A dendrex of a bounded dendroidal set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Dx {
    Nerve(Dendrex),
    Map(TreeMap),
}

/// A bounded dendroidal set.
#[derive(Clone)]
pub enum DendSet {
    /// The nerve of a finite operad: dendrices are operad maps from the
    /// tree's free operad.
    Nerve(FiniteOperad),
    /// A subcomplex of a representable: dendrices are tree maps whose
    /// image face belongs to the member set.
    Sub { host: Tree, members: Subcomplex },
}

impl DendSet {
    pub fn nerve(p: FiniteOperad) -> DendSet {
        DendSet::Nerve(p)
    }

    pub fn representable(host: &Tree) -> DendSet {
        DendSet::Sub {
            host: host.clone(),
            members: crate::subcomplex::full(host),
        }
    }

    pub fn subcomplex(host: &Tree, members: Subcomplex) -> DendSet {
        DendSet::Sub {
            host: host.clone(),
            members,
        }
    }

    pub fn label(&self) -> String {
        match self {
            DendSet::Nerve(p) => format!("nerve({})", p.label),
            DendSet::Sub { host, .. } => format!("sub({})", host.to_expr()),
        }
    }

    /// The objects: dendrices at the one-edge tree.
    pub fn objects(&self) -> Vec<Dx> {
        self.dendrices(&Tree::eta("e"))
    }

    /// All dendrices at a tree.
    pub fn dendrices(&self, tree: &Tree) -> Vec<Dx> {
        match self {
            DendSet::Nerve(p) => nerve_dendrices(p, tree).into_iter().map(Dx::Nerve).collect(),
            DendSet::Sub { host, members } => tree_maps(host, tree)
                .into_iter()
                .filter(|m| members.contains(&image_face(host, tree, m)))
                .map(Dx::Map)
                .collect(),
        }
    }

    /// Restriction along a face of the dendrex's tree.
    pub fn restrict(&self, tree: &Tree, x: &Dx, face: &Face) -> Dx {
        match (self, x) {
            (DendSet::Nerve(p), Dx::Nerve(d)) => {
                Dx::Nerve(restrict_dendrex(p, tree, d, face))
            }
            (DendSet::Sub { .. }, Dx::Map(m)) => Dx::Map(restrict_tree_map(tree, m, face)),
            _ => panic!("dendrex does not belong to this dendroidal set"),
        }
    }

    /// Pullback along an isomorphism of trees, transporting a dendrex at
    /// the target to one at the source.
    pub fn pullback_iso(&self, source: &Tree, target: &Tree, iso: &TreeIso, x: &Dx) -> Dx {
        match (self, x) {
            (DendSet::Nerve(p), Dx::Nerve(d)) => {
                Dx::Nerve(pullback_dendrex(p, source, target, iso, d))
            }
            (DendSet::Sub { .. }, Dx::Map(m)) => {
                Dx::Map(pullback_tree_map(source, target, iso, m))
            }
            _ => panic!("dendrex does not belong to this dendroidal set"),
        }
    }

    /// The degenerate edge on an object.
    pub fn degenerate_edge(&self, object: &Dx) -> Dx {
        match (self, object) {
            (DendSet::Nerve(p), Dx::Nerve(d)) => {
                let c = d.colours[0];
                Dx::Nerve(Dendrex {
                    colours: vec![c, c],
                    ops: vec![p.unit(c)],
                })
            }
            (DendSet::Sub { .. }, Dx::Map(m)) => {
                let e = m.edge_map[0];
                Dx::Map(TreeMap {
                    edge_map: vec![e, e],
                    regions: vec![(
                        crate::face::EdgeSet::singleton(e),
                        crate::face::EdgeSet::EMPTY,
                    )],
                })
            }
            _ => panic!("object does not belong to this dendroidal set"),
        }
    }

    /// The two objects of an edge dendrex (top colour, root colour).
    pub fn edge_objects(&self, x: &Dx) -> (Dx, Dx) {
        match (self, x) {
            (DendSet::Nerve(_), Dx::Nerve(d)) => (
                Dx::Nerve(Dendrex {
                    colours: vec![d.colours[0]],
                    ops: vec![],
                }),
                Dx::Nerve(Dendrex {
                    colours: vec![d.colours[1]],
                    ops: vec![],
                }),
            ),
            (DendSet::Sub { .. }, Dx::Map(m)) => (
                Dx::Map(TreeMap {
                    edge_map: vec![m.edge_map[0]],
                    regions: vec![],
                }),
                Dx::Map(TreeMap {
                    edge_map: vec![m.edge_map[1]],
                    regions: vec![],
                }),
            ),
            _ => panic!("dendrex does not belong to this dendroidal set"),
        }
    }
}

/// All dendrices of a nerve at a tree: colourings with matching
/// operations.
pub fn nerve_dendrices(p: &FiniteOperad, tree: &Tree) -> Vec<Dendrex> {
    let ncol = p.colour_count();
    let ne = tree.edge_count();
    let mut out = Vec::new();
    let mut colours = vec![0usize; ne];
    loop {
        // operations per vertex under this colouring
        let mut op_choices: Vec<Vec<OpId>> = Vec::with_capacity(tree.vertex_count());
        let mut feasible = true;
        for v in tree.vertex_ids() {
            let vx = tree.vertex(v);
            let inputs: Vec<usize> = vx.inputs.iter().map(|e| colours[e.idx()]).collect();
            let ops = p.profile_ops(&inputs, colours[vx.output.idx()]);
            if ops.is_empty() {
                feasible = false;
                break;
            }
            op_choices.push(ops.to_vec());
        }
        if feasible {
            let mut pick = vec![0usize; op_choices.len()];
            loop {
                out.push(Dendrex {
                    colours: colours.clone(),
                    ops: pick
                        .iter()
                        .enumerate()
                        .map(|(i, &k)| op_choices[i][k])
                        .collect(),
                });
                let mut i = 0;
                loop {
                    if i == pick.len() {
                        break;
                    }
                    pick[i] += 1;
                    if pick[i] < op_choices[i].len() {
                        break;
                    }
                    pick[i] = 0;
                    i += 1;
                }
                if pick.iter().all(|&k| k == 0) {
                    break;
                }
            }
        }
        // next colouring
        let mut i = 0;
        loop {
            if i == ne {
                out.sort();
                return out;
            }
            colours[i] += 1;
            if colours[i] < ncol {
                break;
            }
            colours[i] = 0;
            i += 1;
        }
    }
}

/// The composite operation of a dendrex over one merged class of a face's
/// shape.
fn class_composite(
    p: &FiniteOperad,
    host: &Tree,
    x: &Dendrex,
    face: &Face,
    class_members: &[VertexId],
) -> Result<(OpId, Vec<EdgeId>), KanError> {
    // bottom member: the one whose output is not contracted
    let bottom = class_members
        .iter()
        .copied()
        .find(|&v| !face.contracted.contains(host.vertex(v).output))
        .expect("class has a bottom");
    let mut op = x.ops[bottom.idx()];
    let mut dangling: Vec<EdgeId> = host.vertex(bottom).inputs.clone();
    loop {
        let Some(pos) = dangling
            .iter()
            .position(|&d| face.contracted.contains(d) && {
                let u = host.vertex_above(d).expect("contracted edge has a vertex above");
                class_members.contains(&u)
            })
        else {
            break;
        };
        let d = dangling[pos];
        let u = host.vertex_above(d).unwrap();
        // gamma(op; units ... x.ops[u] at pos ... units)
        let args: Vec<OpId> = dangling
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                if i == pos {
                    x.ops[u.idx()]
                } else {
                    p.unit(x.colours[e.idx()])
                }
            })
            .collect();
        op = p.compose(op, &args)?;
        let mut next = Vec::with_capacity(dangling.len() + host.vertex(u).inputs.len());
        next.extend_from_slice(&dangling[..pos]);
        next.extend(host.vertex(u).inputs.iter().copied());
        next.extend_from_slice(&dangling[pos + 1..]);
        dangling = next;
    }
    Ok((op, dangling))
}

/// Restricts a nerve dendrex along a face of its tree.
pub fn restrict_dendrex(p: &FiniteOperad, host: &Tree, x: &Dendrex, face: &Face) -> Dendrex {
    let sd = shape_of(host, face);
    let colours: Vec<usize> = sd
        .edge_to_host
        .iter()
        .map(|h| x.colours[h.idx()])
        .collect();
    // members per shape vertex
    let mut members: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for (&hv, &sv) in &sd.vertex_class {
        members.entry(sv).or_default().push(hv);
    }
    let mut ops = Vec::with_capacity(sd.tree.vertex_count());
    for sv in sd.tree.vertex_ids() {
        let (op, dangling) = class_composite(p, host, x, face, &members[&sv])
            .expect("restriction stays within the arity bound");
        // reorder the dangling inputs to the shape vertex's stored order
        let target: Vec<EdgeId> = sd.tree.vertex(sv)
            .inputs
            .iter()
            .map(|&se| sd.edge_to_host[se.idx()])
            .collect();
        let perm: Vec<usize> = target
            .iter()
            .map(|t| dangling.iter().position(|d| d == t).expect("input present"))
            .collect();
        ops.push(p.act(op, &perm).expect("action within bound"));
    }
    Dendrex { colours, ops }
}

/// Transports a dendrex at `target` to one at `source` along an
/// isomorphism `source -> target`.
pub fn pullback_dendrex(
    p: &FiniteOperad,
    source: &Tree,
    target: &Tree,
    iso: &TreeIso,
    x: &Dendrex,
) -> Dendrex {
    let colours: Vec<usize> = source
        .edges()
        .map(|e| x.colours[iso.apply(e).idx()])
        .collect();
    let mut ops = Vec::with_capacity(source.vertex_count());
    for v in source.vertex_ids() {
        let vx = source.vertex(v);
        let w = target
            .vertex_above(iso.apply(vx.output))
            .expect("iso preserves vertices");
        let wx = target.vertex(w);
        let perm: Vec<usize> = vx
            .inputs
            .iter()
            .map(|&i| {
                let im = iso.apply(i);
                wx.inputs.iter().position(|&e| e == im).expect("input image")
            })
            .collect();
        ops.push(p.act(x.ops[w.idx()], &perm).expect("action within bound"));
    }
    Dendrex { colours, ops }
}

// ---------------------------------------------------------------------------
// Tree maps (dendrices of representables)
// ---------------------------------------------------------------------------

/// Regions of the host rooted at an edge: external faces (retained,
/// capped) with that root and no contraction, indexed by their boundary
/// input set.
fn regions_rooted_at(host: &Tree, root: EdgeId) -> Vec<(crate::face::EdgeSet, crate::face::EdgeSet, Vec<EdgeId>)> {
    let mut out = Vec::new();
    for f in all_faces(host) {
        if !f.contracted.is_empty() {
            continue;
        }
        let inside = crate::face::inside_vertices(host, f.retained, f.capped);
        // region root: the retained edge with no inside vertex below it
        let r = f
            .retained
            .iter()
            .find(|&e| match host.vertex_below(e) {
                None => true,
                Some(v) => !inside.contains(&v),
            })
            .expect("face has a root");
        if r != root {
            continue;
        }
        // input slots: edges with no inside vertex above them. For the
        // bare single edge this is the edge itself (the unit, arity one);
        // a capped single edge is a nullary operation.
        let boundary: Vec<EdgeId> = f
            .retained
            .iter()
            .filter(|&e| match host.vertex_above(e) {
                None => true,
                Some(v) => !inside.contains(&v),
            })
            .collect();
        out.push((f.retained, f.capped, boundary));
    }
    out
}

/// All maps from `tree` into the host: edge maps with one region per
/// vertex whose boundary matches the vertex inputs.
pub fn tree_maps(host: &Tree, tree: &Tree) -> Vec<TreeMap> {
    // regions by root edge
    let regions: Vec<Vec<(crate::face::EdgeSet, crate::face::EdgeSet, Vec<EdgeId>)>> = host
        .edges()
        .map(|e| regions_rooted_at(host, e))
        .collect();
    let mut out = Vec::new();
    // assign host edges in a root-down traversal
    let order: Vec<VertexId> = {
        let mut o = Vec::new();
        let mut stack = vec![tree.root()];
        while let Some(e) = stack.pop() {
            if let Some(v) = tree.vertex_above(e) {
                o.push(v);
                stack.extend(tree.vertex(v).inputs.iter().copied());
            }
        }
        o
    };
    fn rec(
        host: &Tree,
        tree: &Tree,
        regions: &[Vec<(crate::face::EdgeSet, crate::face::EdgeSet, Vec<EdgeId>)>],
        order: &[VertexId],
        k: usize,
        edge_map: &mut Vec<Option<EdgeId>>,
        chosen: &mut BTreeMap<VertexId, (crate::face::EdgeSet, crate::face::EdgeSet)>,
        out: &mut Vec<TreeMap>,
    ) {
        if k == order.len() {
            let map = TreeMap {
                edge_map: edge_map.iter().map(|o| o.unwrap()).collect(),
                regions: tree
                    .vertex_ids()
                    .map(|v| chosen[&v])
                    .collect(),
            };
            out.push(map);
            return;
        }
        let v = order[k];
        let vx = tree.vertex(v).clone();
        let root_img = edge_map[vx.output.idx()].expect("output already assigned");
        for (ret, capped, boundary) in &regions[root_img.idx()] {
            if boundary.len() != vx.inputs.len() {
                continue;
            }
            // all bijections inputs -> boundary
            let perms = crate::operad::permutations(vx.inputs.len());
            for perm in perms {
                for (i, &input) in vx.inputs.iter().enumerate() {
                    edge_map[input.idx()] = Some(boundary[perm[i]]);
                }
                chosen.insert(v, (*ret, *capped));
                rec(host, tree, regions, order, k + 1, edge_map, chosen, out);
                chosen.remove(&v);
                for &input in &vx.inputs {
                    edge_map[input.idx()] = None;
                }
            }
        }
    }
    for r in host.edges() {
        let mut edge_map = vec![None; tree.edge_count()];
        edge_map[tree.root().idx()] = Some(r);
        let mut chosen = BTreeMap::new();
        rec(
            host, tree, &regions, &order, 0, &mut edge_map, &mut chosen, &mut out,
        );
    }
    out.sort();
    out.dedup();
    out
}

/// The image face of a tree map.
pub fn image_face(host: &Tree, tree: &Tree, m: &TreeMap) -> Face {
    let mut ret = crate::face::EdgeSet::from_iter(m.edge_map.iter().copied());
    let mut capped = crate::face::EdgeSet::EMPTY;
    for (r, c) in &m.regions {
        ret = ret.union(*r);
        capped = capped.union(*c);
    }
    let image = crate::face::EdgeSet::from_iter(m.edge_map.iter().copied());
    let con = ret.minus(image);
    let _ = tree;
    Face::new(host, ret, con, capped).expect("image of a tree map is a face")
}

/// Restricts a tree map along a face of its tree.
pub fn restrict_tree_map(tree: &Tree, m: &TreeMap, face: &Face) -> TreeMap {
    let sd = shape_of(tree, face);
    let edge_map: Vec<EdgeId> = sd
        .edge_to_host
        .iter()
        .map(|t| m.edge_map[t.idx()])
        .collect();
    // per shape vertex: union of member regions
    let mut members: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for (&tv, &sv) in &sd.vertex_class {
        members.entry(sv).or_default().push(tv);
    }
    let regions: Vec<(crate::face::EdgeSet, crate::face::EdgeSet)> = sd
        .tree
        .vertex_ids()
        .map(|sv| {
            let mut ret = crate::face::EdgeSet::EMPTY;
            let mut capped = crate::face::EdgeSet::EMPTY;
            for &tv in &members[&sv] {
                let (r, c) = m.regions[tv.idx()];
                ret = ret.union(r);
                capped = capped.union(c);
            }
            (ret, capped)
        })
        .collect();
    TreeMap { edge_map, regions }
}

fn pullback_tree_map(source: &Tree, target: &Tree, iso: &TreeIso, m: &TreeMap) -> TreeMap {
    let edge_map: Vec<EdgeId> = source
        .edges()
        .map(|e| m.edge_map[iso.apply(e).idx()])
        .collect();
    let regions: Vec<(crate::face::EdgeSet, crate::face::EdgeSet)> = source
        .vertex_ids()
        .map(|v| {
            let w = target
                .vertex_above(iso.apply(source.vertex(v).output))
                .expect("iso preserves vertices");
            m.regions[w.idx()]
        })
        .collect();
    TreeMap { edge_map, regions }
}

// ---------------------------------------------------------------------------
// Horn problems
// ---------------------------------------------------------------------------

/// An assignment of dendrices to the maximal faces of a horn, compatible
/// on overlaps.
pub type HornAssignment = BTreeMap<Face, Dx>;

/// The elementary faces forming the horn at a marker: all of them except
/// the missing one.
pub fn horn_faces(tree: &Tree, marker: &crate::anodyne::Marker) -> Result<Vec<Face>, KanError> {
    use crate::anodyne::Marker;
    let els = crate::face::elementary_faces(tree);
    let keep: Vec<Face> = match marker {
        Marker::Inner { edge } => {
            let e = tree
                .edge_by_name(edge)
                .ok_or_else(|| KanError::Other(format!("unknown edge {edge}")))?;
            if !tree.is_inner(e) {
                return Err(KanError::Other(format!("edge {edge} is not inner")));
            }
            els.into_iter()
                .filter(|(f, k)| !(*k == FaceKind::Inner && f.contracted.contains(e)))
                .map(|(f, _)| f)
                .collect()
        }
        Marker::End { edge } => {
            let e = tree
                .edge_by_name(edge)
                .ok_or_else(|| KanError::Other(format!("unknown edge {edge}")))?;
            let v = tree
                .vertex_above(e)
                .ok_or_else(|| KanError::Other(format!("no vertex above {edge}")))?;
            if !tree.is_unary_top_vertex(v) {
                return Err(KanError::Other(format!("{edge} is not under a unary top vertex")));
            }
            let input = tree.vertex(v).inputs[0];
            els.into_iter()
                .filter(|(f, k)| !(*k == FaceKind::Outer && !f.retained.contains(input)))
                .map(|(f, _)| f)
                .collect()
        }
        Marker::Root => {
            if crate::subcomplex::root_horn(tree).is_err() {
                return Err(KanError::Other("no root horn".to_string()));
            }
            els.into_iter()
                .filter(|(f, k)| {
                    !(*k == FaceKind::Outer && !f.retained.contains(tree.root()))
                })
                .map(|(f, _)| f)
                .collect()
        }
    };
    Ok(keep)
}

/// All compatible assignments on the horn's maximal faces.
pub fn horn_assignments(
    x: &DendSet,
    tree: &Tree,
    marker: &crate::anodyne::Marker,
) -> Result<Vec<HornAssignment>, KanError> {
    let faces = horn_faces(tree, marker)?;
    let mut out: Vec<HornAssignment> = vec![BTreeMap::new()];
    for f in &faces {
        let sd = shape_of(tree, f);
        let options = x.dendrices(&sd.tree);
        let mut next = Vec::new();
        for partial in &out {
            'opt: for opt in &options {
                // compatibility with earlier assignments on common faces
                for (g, val) in partial.iter() {
                    if !compatible(x, tree, f, opt, g, val) {
                        continue 'opt;
                    }
                }
                let mut p = partial.clone();
                p.insert(*f, opt.clone());
                next.push(p);
            }
        }
        out = next;
        if out.is_empty() {
            break;
        }
    }
    Ok(out)
}

/// Two assigned dendrices agree on every common face of their images.
fn compatible(x: &DendSet, tree: &Tree, f: &Face, xf: &Dx, g: &Face, xg: &Dx) -> bool {
    let sdf = shape_of(tree, f);
    let sdg = shape_of(tree, g);
    let faces_f = all_faces(&sdf.tree);
    // common members: composites of f with faces of its shape that also
    // factor through g
    for hf in &faces_f {
        let h = compose(tree, f, hf, &sdf);
        // does h factor through g?
        let Some(hg) = factor_through(tree, &h, g, &sdg) else {
            continue;
        };
        let rf = x.restrict(&sdf.tree, xf, hf);
        let rg = x.restrict(&sdg.tree, xg, &hg);
        if rf != rg {
            return false;
        }
    }
    true
}

/// When `h` factors through `g`, the face of g's shape realizing it.
pub fn factor_through(
    tree: &Tree,
    h: &Face,
    g: &Face,
    sdg: &crate::face::ShapeData,
) -> Option<Face> {
    if !h.retained.is_subset(g.retained) {
        return None;
    }
    // contracted edges of g inside h must stay contracted
    if !h.contracted.is_subset(g.retained) {
        return None;
    }
    let lift_ret: Vec<EdgeId> = h
        .image()
        .iter()
        .map(|e| sdg.host_to_edge.get(&e).copied())
        .collect::<Option<Vec<_>>>()?;
    let ret = crate::face::EdgeSet::from_iter(lift_ret.iter().copied());
    let con = crate::face::EdgeSet::from_iter(
        h.contracted
            .minus(g.contracted)
            .iter()
            .filter_map(|e| sdg.host_to_edge.get(&e).copied()),
    );
    if h.contracted.minus(g.contracted).iter().any(|e| !sdg.host_to_edge.contains_key(&e)) {
        return None;
    }
    // capped crowns of h visible in the shape
    let mut capped = crate::face::EdgeSet::EMPTY;
    for e in h.capped.iter() {
        if let Some(&se) = sdg.host_to_edge.get(&e) {
            if sdg.tree.vertex_above(se).map_or(false, |v| sdg.tree.vertex(v).inputs.is_empty()) {
                capped.insert(se);
            }
        }
    }
    let candidate = Face::new(&sdg.tree, ret, con, capped).ok()?;
    let back = compose(tree, g, &candidate, sdg);
    if back == *h {
        Some(candidate)
    } else {
        None
    }
}

/// All fillers of a horn problem: dendrices on the whole tree restricting
/// to the assignment, and mapping to the base when a map is given.
pub fn horn_fillers(
    x: &DendSet,
    tree: &Tree,
    assignment: &HornAssignment,
    map: Option<(&OperadMorphism, &DendSet, &Dx)>,
) -> Vec<Dx> {
    let mut out = Vec::new();
    'next: for cand in x.dendrices(tree) {
        for (f, val) in assignment.iter() {
            if &x.restrict(tree, &cand, f) != val {
                continue 'next;
            }
        }
        if let Some((m, _y, base)) = map {
            let Dx::Nerve(d) = &cand else {
                continue 'next;
            };
            let mapped = Dendrex {
                colours: d.colours.iter().map(|&c| m.colour_map[c]).collect(),
                ops: d.ops.iter().map(|&o| m.apply(o)).collect(),
            };
            if &Dx::Nerve(mapped) != base {
                continue 'next;
            }
        }
        out.push(cand);
    }
    out
}

/// A counterexample to a Kan condition: the tree, the marker, and the
/// unfillable assignment.
#[derive(Debug, Clone)]
pub struct HornWitness {
    pub tree: Tree,
    pub marker: crate::anodyne::Marker,
    pub assignment: HornAssignment,
}

/// Checks inner horn filling for every tree in the list and every inner
/// edge. With `unique` also requires fillers to be unique.
pub fn is_inner_kan(
    x: &DendSet,
    trees: &[Tree],
    unique: bool,
) -> Result<(), Box<HornWitness>> {
    for t in trees {
        for e in t.inner_edges() {
            let marker = crate::anodyne::Marker::Inner {
                edge: t.name(e).to_string(),
            };
            let assignments = horn_assignments(x, t, &marker).expect("inner marker");
            for a in assignments {
                let fillers = horn_fillers(x, t, &a, None);
                if fillers.is_empty() || (unique && fillers.len() > 1) {
                    return Err(Box::new(HornWitness {
                        tree: t.clone(),
                        marker,
                        assignment: a,
                    }));
                }
            }
        }
    }
    Ok(())
}

/// Checks that a nerve map has fillers for all inner horn problems over
/// the listed trees (the right lifting property against inner horns).
pub fn is_inner_kan_fibration(
    p: &OperadMorphism,
    x: &DendSet,
    y: &DendSet,
    trees: &[Tree],
) -> bool {
    for t in trees {
        for e in t.inner_edges() {
            let marker = crate::anodyne::Marker::Inner {
                edge: t.name(e).to_string(),
            };
            let assignments = horn_assignments(x, t, &marker).expect("inner marker");
            for a in assignments {
                // bases: dendrices of Y on all of T compatible with the
                // mapped assignment
                let mapped: HornAssignment = a
                    .iter()
                    .map(|(f, v)| {
                        let Dx::Nerve(d) = v else { panic!("nerve map") };
                        (
                            *f,
                            Dx::Nerve(Dendrex {
                                colours: d.colours.iter().map(|&c| p.colour_map[c]).collect(),
                                ops: d.ops.iter().map(|&o| p.apply(o)).collect(),
                            }),
                        )
                    })
                    .collect();
                for base in horn_fillers(y, t, &mapped, None) {
                    if horn_fillers(x, t, &a, Some((p, y, &base))).is_empty() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Weak invertibility
// ---------------------------------------------------------------------------

/// Decides weak invertibility of an edge by searching for an inverse edge
/// together with one two-cell witness per composite identity.
pub fn weakly_invertible(x: &DendSet, f: &Dx) -> bool {
    let i1 = Tree::linear(1);
    let i2 = Tree::linear(2);
    let (a, b) = x.edge_objects(f);
    let id_a = x.degenerate_edge(&a);
    let id_b = x.degenerate_edge(&b);
    let d0 = top_chop_face(&i2); // edge 1 -> 2
    let d2 = root_chop_face(&i2); // edge 0 -> 1
    let d1 = contract_face(&i2); // edge 0 -> 2
    for g in x.dendrices(&i1) {
        let (ga, gb) = x.edge_objects(&g);
        if ga != b || gb != a {
            continue;
        }
        let left = x.dendrices(&i2).into_iter().any(|t| {
            x.restrict(&i2, &t, &d2) == *f
                && x.restrict(&i2, &t, &d0) == g
                && x.restrict(&i2, &t, &d1) == id_a
        });
        if !left {
            continue;
        }
        let right = x.dendrices(&i2).into_iter().any(|t| {
            x.restrict(&i2, &t, &d2) == g
                && x.restrict(&i2, &t, &d0) == *f
                && x.restrict(&i2, &t, &d1) == id_b
        });
        if right {
            return true;
        }
    }
    false
}

fn top_chop_face(i2: &Tree) -> Face {
    let e0 = i2.edge_by_name("0").unwrap();
    let mut ret = crate::face::EdgeSet::all(3);
    ret.remove(e0);
    Face::new(i2, ret, crate::face::EdgeSet::EMPTY, crate::face::EdgeSet::EMPTY).unwrap()
}

fn root_chop_face(i2: &Tree) -> Face {
    let e2 = i2.edge_by_name("2").unwrap();
    let mut ret = crate::face::EdgeSet::all(3);
    ret.remove(e2);
    Face::new(i2, ret, crate::face::EdgeSet::EMPTY, crate::face::EdgeSet::EMPTY).unwrap()
}

fn contract_face(i2: &Tree) -> Face {
    let e1 = i2.edge_by_name("1").unwrap();
    Face::new(
        i2,
        crate::face::EdgeSet::all(3),
        crate::face::EdgeSet::singleton(e1),
        crate::face::EdgeSet::EMPTY,
    )
    .unwrap()
}

/// The weakly invertible edges of a bounded dendroidal set.
pub fn k_edges(x: &DendSet) -> Vec<Dx> {
    x.dendrices(&Tree::linear(1))
        .into_iter()
        .filter(|f| weakly_invertible(x, f))
        .collect()
}

// ---------------------------------------------------------------------------
// Normality
// ---------------------------------------------------------------------------

/// True when the automorphism group of every listed tree acts freely on
/// the dendrex set. Returns the witness (tree, dendrex) otherwise.
pub fn is_normal(x: &DendSet, trees: &[Tree]) -> Result<(), (Tree, Dx)> {
    for t in trees {
        let autos = crate::tree::automorphisms(t);
        if autos.len() <= 1 {
            continue;
        }
        for d in x.dendrices(t) {
            for a in &autos {
                if a.map == TreeIso::identity(t).map {
                    continue;
                }
                if x.pullback_iso(t, t, a, &d) == d {
                    return Err((t.clone(), d));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Marked-horn theorems
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// The hypothesis held and a filler was found.
    Filler,
    /// The hypothesis held but exhaustive search found no filler.
    HypothesisMetNoFiller,
    /// The marked edge is not weakly invertible; the search outcome is
    /// reported alongside.
    HypothesisNotMet { filler_found: bool },
}

/// The 1-dendrex at the horn vertex of a marked problem: for a root
/// marker, the restriction to the linear face spanning the root vertex;
/// for an end marker, the face spanning the unary top vertex.
pub fn marked_edge(
    x: &DendSet,
    tree: &Tree,
    marker: &crate::anodyne::Marker,
    assignment: &HornAssignment,
) -> Option<Dx> {
    use crate::anodyne::Marker;
    let (lo, hi) = match marker {
        Marker::Root => {
            let r = tree.root_vertex()?;
            let input = tree
                .vertex(r)
                .inputs
                .iter()
                .copied()
                .find(|&e| !tree.is_leaf(e))
                .or_else(|| tree.vertex(r).inputs.first().copied())?;
            (input, tree.root())
        }
        Marker::End { edge } => {
            let e = tree.edge_by_name(edge)?;
            let v = tree.vertex_above(e)?;
            (tree.vertex(v).inputs[0], e)
        }
        Marker::Inner { .. } => return None,
    };
    let seg = Face::new(
        tree,
        crate::face::EdgeSet::from_iter([lo, hi]),
        crate::face::EdgeSet::EMPTY,
        crate::face::EdgeSet::EMPTY,
    )
    .ok()?;
    // find an assignment face the segment factors through
    for (g, val) in assignment {
        let sdg = shape_of(tree, g);
        if let Some(hg) = factor_through(tree, &seg, g, &sdg) {
            return Some(x.restrict(&sdg.tree, val, &hg));
        }
    }
    None
}

/// Checks a marked root-horn (or end-horn) lifting instance: verifies the
/// fibration hypothesis on the given trees, decides weak invertibility of
/// the marked edge, and searches for a filler exhaustively.
pub fn marked_horn_check(
    x: &DendSet,
    tree: &Tree,
    marker: &crate::anodyne::Marker,
    assignment: &HornAssignment,
    map: Option<(&OperadMorphism, &DendSet, &Dx)>,
) -> Result<Verdict, KanError> {
    let edge = marked_edge(x, tree, marker, assignment)
        .ok_or_else(|| KanError::Other("the marked edge is not determined".to_string()))?;
    let invertible = weakly_invertible(x, &edge);
    let fillers = horn_fillers(x, tree, assignment, map);
    Ok(if invertible {
        if fillers.is_empty() {
            Verdict::HypothesisMetNoFiller
        } else {
            Verdict::Filler
        }
    } else {
        Verdict::HypothesisNotMet {
            filler_found: !fillers.is_empty(),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anodyne::Marker;
    use crate::operad::samples;

    fn small_trees() -> Vec<Tree> {
        crate::tree::all_trees(4, 6)
    }

    #[test]
    fn nerve_dendrex_counts() {
        let comm = DendSet::nerve(samples::comm(4));
        assert_eq!(comm.dendrices(&Tree::eta("e")).len(), 1);
        assert_eq!(comm.dendrices(&Tree::corolla(2)).len(), 1);

        let ass = DendSet::nerve(samples::ass(4));
        assert_eq!(ass.dendrices(&Tree::corolla(2)).len(), 2);
        assert_eq!(ass.dendrices(&Tree::eta("e")).len(), 1);

        let iso2 = DendSet::nerve(samples::iso2(3));
        assert_eq!(iso2.dendrices(&Tree::eta("e")).len(), 2);
        // every colouring supports exactly one operation
        assert_eq!(iso2.dendrices(&Tree::corolla(2)).len(), 8);
    }

    #[test]
    fn ass_dendrices_count_planar_structures() {
        // the nerve of the associative operad counts planar structures
        let ass = DendSet::nerve(samples::ass(4));
        for t in crate::tree::all_trees(4, 6) {
            if t.vertex_ids().any(|v| t.vertex(v).inputs.len() > 4) {
                continue; // beyond the tabulated arities
            }
            let planar: usize = t
                .vertex_ids()
                .map(|v| (1..=t.vertex(v).inputs.len()).product::<usize>().max(1))
                .product();
            assert_eq!(
                ass.dendrices(&t).len(),
                planar,
                "tree {}",
                t.to_expr()
            );
        }
    }

    #[test]
    fn restriction_is_functorial() {
        // restriction along a composite equals the composite of
        // restrictions
        for p in [samples::ass(4), samples::iso2(3)] {
            let x = DendSet::nerve(p);
            for t in crate::tree::all_trees(3, 5) {
                let faces = all_faces(&t);
                for f in &faces {
                    let sd = shape_of(&t, f);
                    for g in all_faces(&sd.tree) {
                        let composite = compose(&t, f, &g, &sd);
                        for d in x.dendrices(&t) {
                            let one = x.restrict(&t, &d, &composite);
                            let via_f = x.restrict(&t, &d, f);
                            let two = x.restrict(&sd.tree, &via_f, &g);
                            assert_eq!(one, two, "tree {} face {f:?} then {g:?}", t.to_expr());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn representable_dendrices_are_tree_maps() {
        // eta dendrices of a representable are its edges
        let host = Tree::corolla(2);
        let x = DendSet::representable(&host);
        assert_eq!(x.dendrices(&Tree::eta("e")).len(), 3);
        // corolla dendrices: the vertex with either input order
        assert_eq!(x.dendrices(&Tree::corolla(2)).len(), 2);
        // the 1-chain: three units plus nothing else for a corolla host
        assert_eq!(x.dendrices(&Tree::linear(1)).len(), 3);
    }

    #[test]
    fn nerves_are_inner_kan_with_unique_fillers() {
        let trees = small_trees();
        for p in [samples::comm(4), samples::ass(4), samples::iso2(3)] {
            let label = p.label.clone();
            let x = DendSet::nerve(p);
            is_inner_kan(&x, &trees, true).unwrap_or_else(|w| {
                panic!("{label}: unfillable horn at {}", w.tree.to_expr())
            });
        }
    }

    #[test]
    fn representables_are_inner_kan() {
        for host in [Tree::linear(2), Tree::corolla(2), Tree::linear(3)] {
            let x = DendSet::representable(&host);
            is_inner_kan(&x, &small_trees(), false)
                .unwrap_or_else(|w| panic!("horn at {}", w.tree.to_expr()));
        }
    }

    #[test]
    fn a_horn_is_not_inner_kan() {
        // the inner horn of the 2-chain fails its own filling problem
        let t = Tree::linear(2);
        let e = t.edge_by_name("1").unwrap();
        let horn = crate::subcomplex::inner_horn(&t, e).unwrap();
        let x = DendSet::subcomplex(&t, horn);
        let witness = is_inner_kan(&x, &[t.clone()], false).unwrap_err();
        assert_eq!(witness.tree.canonical_code(), t.canonical_code());
    }

    #[test]
    fn weak_invertibility_examples() {
        let z2 = DendSet::nerve(samples::cyclic2());
        let edges = z2.dendrices(&Tree::linear(1));
        assert_eq!(edges.len(), 2);
        for f in &edges {
            assert!(weakly_invertible(&z2, f), "{f:?}");
        }
        assert_eq!(k_edges(&z2).len(), 2);

        let fm = DendSet::nerve(samples::free_monoid(2));
        let edges = fm.dendrices(&Tree::linear(1));
        assert_eq!(edges.len(), 3);
        let invertible = k_edges(&fm);
        assert_eq!(invertible.len(), 1); // only the degenerate edge

        // degenerate edges are always invertible
        let objects = fm.objects();
        let degen = fm.degenerate_edge(&objects[0]);
        assert!(weakly_invertible(&fm, &degen));
    }

    #[test]
    fn two_out_of_three_for_invertible_edges() {
        for p in [samples::cyclic2(), samples::free_monoid(2), samples::ass(3)] {
            let x = DendSet::nerve(p);
            let i2 = Tree::linear(2);
            let d0 = top_chop_face(&i2);
            let d2 = root_chop_face(&i2);
            let d1 = contract_face(&i2);
            for t in x.dendrices(&i2) {
                let e01 = x.restrict(&i2, &t, &d2);
                let e12 = x.restrict(&i2, &t, &d0);
                let e02 = x.restrict(&i2, &t, &d1);
                let inv = [
                    weakly_invertible(&x, &e01),
                    weakly_invertible(&x, &e12),
                    weakly_invertible(&x, &e02),
                ];
                let count = inv.iter().filter(|b| **b).count();
                assert_ne!(count, 2, "exactly two invertible edges in a triangle");
            }
        }
    }

    #[test]
    fn normality_examples() {
        let trees: Vec<Tree> = crate::tree::all_trees(6, 5);
        // representables are normal
        for host in crate::tree::all_trees(6, 5) {
            let x = DendSet::representable(&host);
            assert!(
                is_normal(&x, &trees).is_ok(),
                "representable {}",
                host.to_expr()
            );
        }
        // the terminal-style nerve is not: the corolla swap fixes its
        // unique dendrex
        let comm = DendSet::nerve(samples::comm(4));
        let (t, _) = is_normal(&comm, &trees).unwrap_err();
        assert!(t.vertex_count() >= 1);
        let c2 = Tree::corolla(2);
        assert!(is_normal(&comm, &[c2]).is_err());
        // the associative nerve is normal at this bound
        let ass = DendSet::nerve(samples::ass(4));
        assert!(is_normal(&ass, &trees).is_ok());
    }

    #[test]
    fn marked_root_horn_with_pointed_group() {
        // host: the join of the empty forest with the 1-chain; the horn
        // at the root vertex has a nullary face and a linear face
        let host = crate::tree::parse_tree("(1 (0))").unwrap();
        let x = DendSet::nerve(samples::cyclic2_pointed());
        let marker = Marker::Root;
        let assignments = horn_assignments(&x, &host, &marker).unwrap();
        assert!(!assignments.is_empty());
        let mut found_nontrivial = false;
        for a in assignments {
            let edge = marked_edge(&x, &host, &marker, &a).unwrap();
            let Dx::Nerve(d) = &edge else { panic!() };
            let p = samples::cyclic2_pointed();
            let is_g = p.op(d.ops[0]).name == "g";
            let verdict = marked_horn_check(&x, &host, &marker, &a, None).unwrap();
            assert_eq!(verdict, Verdict::Filler);
            if is_g {
                found_nontrivial = true;
            }
        }
        assert!(found_nontrivial);
    }

    #[test]
    fn marked_root_horn_free_monoid_has_no_filler() {
        // the 2-chain root horn with a non-invertible marked edge
        let host = Tree::linear(2);
        let x = DendSet::nerve(samples::free_monoid(2));
        let marker = Marker::Root;
        let mut saw_unfillable = false;
        for a in horn_assignments(&x, &host, &marker).unwrap() {
            let verdict = marked_horn_check(&x, &host, &marker, &a, None).unwrap();
            match verdict {
                Verdict::Filler => {}
                Verdict::HypothesisNotMet { filler_found } => {
                    if !filler_found {
                        saw_unfillable = true;
                    }
                }
                Verdict::HypothesisMetNoFiller => {
                    panic!("an invertible marked edge must have a filler")
                }
            }
        }
        assert!(saw_unfillable, "some non-invertible horn must be unfillable");
    }

    #[test]
    fn marked_horn_against_quotient_fibration() {
        let (p, q, m) = samples::cyclic4_to_cyclic2();
        let x = DendSet::nerve(p);
        let y = DendSet::nerve(q);
        let trees = vec![Tree::linear(2), Tree::linear(3)];
        assert!(is_inner_kan_fibration(&m, &x, &y, &trees));
        // root horn of the 2-chain: marked edges are group elements,
        // always invertible; fillers exist over any base
        let host = Tree::linear(2);
        for a in horn_assignments(&x, &host, &Marker::Root).unwrap() {
            let mapped: HornAssignment = a
                .iter()
                .map(|(f, v)| {
                    let Dx::Nerve(d) = v else { panic!() };
                    (
                        *f,
                        Dx::Nerve(Dendrex {
                            colours: d.colours.iter().map(|&c| m.colour_map[c]).collect(),
                            ops: d.ops.iter().map(|&o| m.apply(o)).collect(),
                        }),
                    )
                })
                .collect();
            for base in horn_fillers(&y, &host, &mapped, None) {
                let verdict =
                    marked_horn_check(&x, &host, &Marker::Root, &a, Some((&m, &y, &base)))
                        .unwrap();
                assert_eq!(verdict, Verdict::Filler);
            }
        }
    }

    #[test]
    fn marked_end_horn_examples() {
        // end horn at the unary top vertex of the 2-chain
        let host = Tree::linear(2);
        let x = DendSet::nerve(samples::cyclic2());
        let marker = Marker::End {
            edge: "1".to_string(),
        };
        for a in horn_assignments(&x, &host, &marker).unwrap() {
            let verdict = marked_horn_check(&x, &host, &marker, &a, None).unwrap();
            assert_eq!(verdict, Verdict::Filler);
        }
        // free monoid: the non-invertible marked edge at the top
        let fm = DendSet::nerve(samples::free_monoid(2));
        let mut saw_unfillable = false;
        for a in horn_assignments(&fm, &host, &marker).unwrap() {
            match marked_horn_check(&fm, &host, &marker, &a, None).unwrap() {
                Verdict::HypothesisNotMet { filler_found: false } => saw_unfillable = true,
                Verdict::HypothesisMetNoFiller => panic!("invertible but unfillable"),
                _ => {}
            }
        }
        assert!(saw_unfillable);
    }

    #[test]
    fn marked_end_horn_on_branching_tree() {
        // the end horn at the unary top vertex of 1 *_e corolla(2),
        // against a sign-style nerve with invertible unaries
        let c2 = Tree::corolla(2);
        let leaf = c2.edge_by_name("a1").unwrap();
        let lh = crate::joins::leaf_star(1, &c2, leaf).unwrap();
        let host = lh.tree.clone();
        let top = host
            .vertex_ids()
            .find(|&v| host.is_unary_top_vertex(v))
            .unwrap();
        let marker = Marker::End {
            edge: host.name(host.vertex(top).output).to_string(),
        };
        let x = DendSet::nerve(samples::sign(4));
        let assignments = horn_assignments(&x, &host, &marker).unwrap();
        assert!(!assignments.is_empty());
        for a in assignments.into_iter().take(8) {
            let verdict = marked_horn_check(&x, &host, &marker, &a, None).unwrap();
            assert_eq!(verdict, Verdict::Filler);
        }
    }
}
