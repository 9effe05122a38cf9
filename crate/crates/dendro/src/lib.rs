//! Combinatorics of finite rooted non-planar trees and the structures
//! built on them: faces and horns of representables, joins, tensor
//! shuffles, anodyne-extension certificates, finite coloured operads and
//! their nerves, inner-Kan and lifting checks, and corolla mapping
//! spaces.

pub mod anodyne;
pub mod face;
pub mod joins;
pub mod kan;
pub mod operad;
pub mod shuffle;
pub mod subcomplex;
pub mod tree;

pub use kan::{
    horn_assignments, horn_fillers, is_inner_kan, is_inner_kan_fibration, is_normal, k_edges,
    marked_horn_check, nerve_dendrices, tree_maps, weakly_invertible, DendSet, Dendrex, Dx,
    HornAssignment, HornWitness, KanError, TreeMap, Verdict,
};
pub use operad::{
    is_equivalence, is_operadic_fibration, samples, FiniteOperad, OpData, OpId, OperadBuilder,
    OperadDoc, OperadError, OperadMorphism,
};
pub use shuffle::{
    common_face_bound, count_level_assignments, initial_segments, initial_scheme, moves,
    shuffles, spine, spines, LabeledTree, Shuffles, TensorComplex, VertexColour,
};
pub use joins::{
    admissible_face, admissible_sets, boundary_forest, chain_face, decompose_join,
    e_admissible_faces, forest_star, has_unary_root_join, is_admissible, join_face,
    leaf_join_face, leaf_star, Forest, JoinError, JoinHost, LeafJoinHost,
};
pub use subcomplex::{boundary, close, end_horn, full, inner_horn, root_horn, FaceTable, Subcomplex};
pub use anodyne::{
    certify_search, horn_members, join_filtration, leaf_join_filtration,
    left_cylinder_filtration, right_cylinder_filtration, verify, CertError, Certificate,
    CertificateDoc, FiltrationError, Host, HornKind, JoinFiltration, LeafJoinFiltration,
    LeftCylinderReport, Marker, Member, RightCylinderReport, Step,
};
pub use face::{
    all_faces, compose, elementary_faces, face_from_names, face_to_names, shape_of, EdgeSet,
    Face, FaceError, FaceKind, ShapeData,
};
pub use tree::{
    all_trees, automorphisms, is_isomorphic, isomorphisms, parse_tree, CanonicalCode, EdgeId,
    Tree, TreeError, TreeIso, Vertex, VertexId,
};
