#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bnf;
pub mod canonical;
pub mod error;
pub mod flow;
pub mod fourier;
pub mod gevrey;
pub mod jet;
pub mod multi_index;
pub mod par;
pub mod presets;
pub mod series;
pub mod special;
pub mod suites;

pub use error::{Error, Result};
