//! DAG and CPDAG representations, equivalence-class conversion, structural
//! Hamming distance, and the text file format.

mod cpdag;
mod dag;
pub mod io;

pub use cpdag::{dag_to_cpdag, shd_cpdag, Cpdag, PairStatus};
pub use dag::Dag;
pub use io::{read_cpdag, read_edge_list, read_graph, write_graph, ToGraphText};
