//! Directed structure theory at desk scale: directed separations, tangles
//! and brambles, tangle tree-labellings, directed tree-decompositions,
//! cylindrical walls, and a half-integral disjoint paths solver.

pub mod bramble;
pub mod decomposition;
pub mod digraph;
pub mod error;
pub mod exact;
pub mod flow;
pub mod generators;
pub mod labelling;
pub mod patterns;
pub mod separation;
pub mod set;
pub mod solver;
pub mod tangle;
pub mod walls;

pub type Vertex = usize;

pub use digraph::{ComponentDag, Digraph};
pub use error::{Error, Result};
pub use separation::{DirectedSeparation, Dir};
pub use set::VertexSet;
pub use tangle::Tangle;
pub use bramble::Bramble;
