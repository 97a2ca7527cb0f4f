pub mod counter;
pub mod decomposer;
pub mod formats;
pub mod hypergraph;
pub mod pqtree;
pub mod testkit;
