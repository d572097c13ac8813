//! The mdbook guide cannot run its own code fences, so each chapter is
//! included here as a doc comment and `cargo test --doc` exercises every
//! snippet. One module per chapter keeps failures attributable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/hyperbolic-crosses.md")]
pub mod hyperbolic_crosses {}

#[doc = include_str!("../../../book/src/bases-and-sampling.md")]
pub mod bases_and_sampling {}

#[doc = include_str!("../../../book/src/subsampling.md")]
pub mod subsampling {}

#[doc = include_str!("../../../book/src/recovery.md")]
pub mod recovery {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
