//! Maximum-entropy multi-relational hypergraphons under subgraph-density
//! constraints, computed over finitely parameterized step functions.

pub mod cut;
pub mod density;
pub mod error;
pub mod index;
pub mod logic;
pub mod model;
pub mod objective;
pub mod sampler;
pub mod solver;
pub mod stepfn;

pub use error::{Error, Result};
pub use model::{LabeledMultiHypergraph, MultiHypergraph, QuantumGraph, QuantumTerm, Signature};
pub use stepfn::{Mode, StepFunction};
