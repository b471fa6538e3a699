//! Score-based structure learning for linear additive noise models.
//!
//! The learner searches over topological orders of DAGs. Every order is
//! turned into a DAG by warm-started grow-shrink parent selection, scored
//! with a decomposable Gaussian BIC whose conditional variances come from
//! incrementally updated Cholesky factors, and improved by best-reinsertion
//! moves inside an iterated local search. The result is reported as a CPDAG.
//!
//! ```no_run
//! use flop::{search::{flop, SearchConfig}, simulate::{sample_instance, AnmParams, GraphSpec}};
//!
//! let inst = sample_instance(&GraphSpec::Er { p: 20, degree: 4.0 }, &AnmParams::default(), 7).unwrap();
//! let fit = flop(&inst.data, &SearchConfig::with_restarts(20)).unwrap();
//! println!("shd = {}", flop::graph::shd_cpdag(&fit.cpdag, &inst.truth_cpdag).unwrap());
//! ```

pub mod error;
pub mod exact;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod scoring;
pub mod search;
pub mod simulate;

pub use error::{Error, Result};
