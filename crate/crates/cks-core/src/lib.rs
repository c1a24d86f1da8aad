//! Community key-member search (CKS) over k-truss communities.
//!
//! Given an undirected simple graph and one or more query nodes, the crate
//! finds the densest truss community containing the query and ranks its
//! key members, either exactly (truss decomposition, TCP index) or
//! approximately (cohesiveness-weighted random walks with optional
//! neighbor-count refinement). A statistics module fits a Bayesian
//! key-membership model over node cohesiveness features and verifies the
//! coarse Markov-chain abstraction of the walk.

pub mod analysis;
pub mod chain;
pub mod error;
pub mod features;
#[doc(hidden)]
pub mod fixtures;
pub mod gen;
pub mod graph;
pub mod metrics;
pub mod refine;
pub mod tcp;
pub mod truss;
pub mod walk;

pub use analysis::{JointDensityModel, MixtureModel, Posterior};
pub use chain::{ChainCheck, Correlation, HyperChainParams};
pub use error::{Error, Result};
pub use features::NodeCohesionFeatures;
pub use graph::{Graph, NodeId, NodeIdMap, SupportMap};
pub use tcp::TcpIndex;
pub use truss::{Direction, KeyMemberResult, TrussnessMap};
pub use walk::{QueryResult, StationaryDistribution, TransitionMatrix, Variant, WalkParams};
