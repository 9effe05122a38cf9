//! Subobjects of a representable: downward-closed sets of faces.
//!
//! A subobject of the representable at a host tree is determined by its
//! set of non-degenerate dendrices, i.e. faces. Boundaries, inner horns
//! and end horns are the basic examples.

use std::collections::{BTreeMap, BTreeSet};

use crate::face::{
    all_faces, compose, elementary_faces, shape_of, Face, FaceError, FaceKind, ShapeData,
};
use crate::tree::{EdgeId, Tree, VertexId};

/// Memoizing context for face computations over a single host tree.
pub struct FaceTable {
    host: Tree,
    shapes: BTreeMap<Face, ShapeData>,
    closures: BTreeMap<Face, BTreeSet<Face>>,
    faces: Option<Vec<Face>>,
}

impl FaceTable {
    pub fn new(host: Tree) -> FaceTable {
        FaceTable {
            host,
            shapes: BTreeMap::new(),
            closures: BTreeMap::new(),
            faces: None,
        }
    }

    pub fn host(&self) -> &Tree {
        &self.host
    }

    pub fn shape(&mut self, f: &Face) -> &ShapeData {
        if !self.shapes.contains_key(f) {
            let sd = shape_of(&self.host, f);
            self.shapes.insert(*f, sd);
        }
        &self.shapes[f]
    }

    pub fn all_faces(&mut self) -> &[Face] {
        if self.faces.is_none() {
            self.faces = Some(all_faces(&self.host));
        }
        self.faces.as_deref().unwrap()
    }

    /// All faces factoring through `f`, including `f` itself.
    pub fn closure(&mut self, f: &Face) -> &BTreeSet<Face> {
        if !self.closures.contains_key(f) {
            let sd = self.shape(f).clone();
            let subs = all_faces(&sd.tree);
            let set: BTreeSet<Face> = subs
                .iter()
                .map(|g| compose(&self.host, f, g, &sd))
                .collect();
            self.closures.insert(*f, set);
        }
        &self.closures[f]
    }

    pub fn close(&mut self, faces: &[Face]) -> Subcomplex {
        let mut members = BTreeSet::new();
        for f in faces {
            members.extend(self.closure(f).iter().copied());
        }
        Subcomplex {
            host: self.host.clone(),
            members,
        }
    }
}

/// A downward-closed set of faces of one host tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subcomplex {
    host: Tree,
    members: BTreeSet<Face>,
}

impl Subcomplex {
    pub fn empty(host: &Tree) -> Subcomplex {
        Subcomplex {
            host: host.clone(),
            members: BTreeSet::new(),
        }
    }

    pub fn host(&self) -> &Tree {
        &self.host
    }

    pub fn members(&self) -> &BTreeSet<Face> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, f: &Face) -> bool {
        self.members.contains(f)
    }

    fn check_host(&self, other: &Subcomplex) -> Result<(), FaceError> {
        if self.host == other.host {
            Ok(())
        } else {
            Err(FaceError::HostMismatch)
        }
    }

    pub fn union(&self, other: &Subcomplex) -> Result<Subcomplex, FaceError> {
        self.check_host(other)?;
        Ok(Subcomplex {
            host: self.host.clone(),
            members: self.members.union(&other.members).copied().collect(),
        })
    }

    pub fn intersect(&self, other: &Subcomplex) -> Result<Subcomplex, FaceError> {
        self.check_host(other)?;
        Ok(Subcomplex {
            host: self.host.clone(),
            members: self.members.intersection(&other.members).copied().collect(),
        })
    }

    pub fn is_subset(&self, other: &Subcomplex) -> bool {
        self.host == other.host && self.members.is_subset(&other.members)
    }

    pub fn insert_closed(&mut self, table: &mut FaceTable, f: &Face) {
        debug_assert!(table.host() == &self.host);
        self.members.extend(table.closure(f).iter().copied());
    }
}

/// Downward closure of a set of faces.
pub fn close(host: &Tree, faces: &[Face]) -> Subcomplex {
    FaceTable::new(host.clone()).close(faces)
}

/// The full representable as a subcomplex: closure of the identity.
pub fn full(host: &Tree) -> Subcomplex {
    close(host, &[Face::identity(host)])
}

/// The boundary: union of all elementary faces. Empty for the one-edge
/// tree.
pub fn boundary(host: &Tree) -> Subcomplex {
    let faces: Vec<Face> = elementary_faces(host).into_iter().map(|(f, _)| f).collect();
    close(host, &faces)
}

/// The inner horn at an inner edge `e`: all elementary faces except the
/// one contracting `e`.
pub fn inner_horn(host: &Tree, e: EdgeId) -> Result<Subcomplex, FaceError> {
    if !host.is_inner(e) {
        return Err(FaceError::Tree(crate::tree::TreeError::NotInner(
            host.name(e).to_string(),
        )));
    }
    let faces: Vec<Face> = elementary_faces(host)
        .into_iter()
        .filter(|(f, k)| !(*k == FaceKind::Inner && f.contracted.contains(e)))
        .map(|(f, _)| f)
        .collect();
    Ok(close(host, &faces))
}

/// The end horn at a unary top vertex `v`: all elementary faces except
/// the outer face chopping `v`.
pub fn end_horn(host: &Tree, v: VertexId) -> Result<Subcomplex, FaceError> {
    if !host.is_unary_top_vertex(v) {
        return Err(FaceError::Tree(crate::tree::TreeError::NotUnaryTop(
            host.name(host.vertex(v).output).to_string(),
        )));
    }
    let input = host.vertex(v).inputs[0];
    let faces: Vec<Face> = elementary_faces(host)
        .into_iter()
        .filter(|(f, k)| !(*k == FaceKind::Outer && !f.retained.contains(input)))
        .map(|(f, _)| f)
        .collect();
    Ok(close(host, &faces))
}

/// The horn at the root vertex, defined when the root vertex admits an
/// outer face (all inputs but one are leaves): all elementary faces
/// except that root chop.
pub fn root_horn(host: &Tree) -> Result<Subcomplex, FaceError> {
    let r = host
        .root_vertex()
        .ok_or(FaceError::Tree(crate::tree::TreeError::RootCount(0)))?;
    if host.vertex_count() < 2 {
        return Err(FaceError::Tree(crate::tree::TreeError::NotUnaryTop(
            host.name(host.root()).to_string(),
        )));
    }
    let non_leaf: Vec<EdgeId> = host
        .vertex(r)
        .inputs
        .iter()
        .copied()
        .filter(|&e| !host.is_leaf(e))
        .collect();
    if non_leaf.len() != 1 {
        return Err(FaceError::Tree(crate::tree::TreeError::NotUnaryTop(
            host.name(host.root()).to_string(),
        )));
    }
    let faces: Vec<Face> = elementary_faces(host)
        .into_iter()
        .filter(|(f, k)| !(*k == FaceKind::Outer && !f.retained.contains(host.root())))
        .map(|(f, _)| f)
        .collect();
    Ok(close(host, &faces))
}
