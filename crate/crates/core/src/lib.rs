//! Exact computations with genus-0 tropical stable maps to complete simplicial fans:
//! moduli cone complexes, their fan embeddings, and curve counts via lattice indices.

pub mod exactmath;
pub mod curves;
pub mod counting;
pub mod maps;
pub mod moduli;
pub mod polyhedral;

/// Version tag written into every JSON document.
pub const SCHEMA: &str = "tropcount/1";
