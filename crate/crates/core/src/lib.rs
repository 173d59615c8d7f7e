//! Combinatorial machinery for free groups and mapping tori of free-group
//! endomorphisms: Stallings-graph algorithms, graph-pair tightening, finite
//! presentations of finitely generated subgroups of M(ψ), sub-mapping-torus
//! detection, and the primitivity-rank classification of one-relator groups.

pub mod error;
pub mod graph_pair;
pub mod mapping_torus;
pub mod one_relator;
pub mod stallings;
pub mod text;
pub mod words;

pub use error::{Error, Result};
pub use graph_pair::{ComplementFactor, FoldKind, GraphPair, Minimized, Trace};
pub use mapping_torus::{
    MTElement, MTLetter, MappingTorus, MappingTorusPresentation, Presentation, SubMTCertificate,
};
pub use one_relator::{Classification, OneRelatorClass, PrimRankResult};
pub use stallings::{Edge, GraphMorphism, Pullback, StallingsGraph};
pub use words::{Endomorphism, Letter, Word};
