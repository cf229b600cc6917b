// negated float comparisons deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binning;
pub mod corpus;
pub mod docembed;
pub mod embed;
pub mod error;
pub mod eval;
pub mod features;
pub mod graph;
pub mod neural;
pub mod pipeline;
pub mod synthetic;

pub use error::{Error, ErrorKind, Result};

/// Code blocks of the guide in `book/`, compiled and run as doc-tests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    pub mod data {}
    #[doc = include_str!("../../../book/src/binning.md")]
    pub mod binning {}
    #[doc = include_str!("../../../book/src/graph.md")]
    pub mod graph {}
    #[doc = include_str!("../../../book/src/embeddings.md")]
    pub mod embeddings {}
    #[doc = include_str!("../../../book/src/documents.md")]
    pub mod documents {}
    #[doc = include_str!("../../../book/src/networks.md")]
    pub mod networks {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    pub mod evaluation {}
}
