//! Std companion to `treepi-core`: JSON serialization of terms, trees,
//! verdicts and audit reports, DOT export of transition graphs, and the
//! plumbing shared by the command-line tool and the integration tests.

pub mod dot;
pub mod json;

pub use dot::graph_dot;
