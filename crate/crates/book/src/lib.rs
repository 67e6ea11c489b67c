//! Runs the code listings in `book/` as doctests.
//!
//! mdbook cannot link listings against workspace crates, so each chapter is
//! pulled in as the docs of an empty module and `cargo test --doc` does the
//! rest. A failing doctest is reported under its chapter's module name.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/rationals.md")]
pub mod rationals {}
#[doc = include_str!("../../../book/src/crn.md")]
pub mod crn {}
#[doc = include_str!("../../../book/src/machine.md")]
pub mod machine {}
#[doc = include_str!("../../../book/src/analysis.md")]
pub mod analysis {}
#[doc = include_str!("../../../book/src/cover.md")]
pub mod cover {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
