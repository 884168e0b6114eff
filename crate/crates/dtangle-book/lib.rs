//! The guide's chapters as modules, so their listings run as doc-tests.

#[doc = include_str!("../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../book/src/digraphs.md")]
pub mod digraphs {}
#[doc = include_str!("../../book/src/separations.md")]
pub mod separations {}
#[doc = include_str!("../../book/src/tangles.md")]
pub mod tangles {}
#[doc = include_str!("../../book/src/labellings.md")]
pub mod labellings {}
#[doc = include_str!("../../book/src/decompositions.md")]
pub mod decompositions {}
#[doc = include_str!("../../book/src/walls.md")]
pub mod walls {}
#[doc = include_str!("../../book/src/disjoint-paths.md")]
pub mod disjoint_paths {}
#[doc = include_str!("../../book/src/cli.md")]
pub mod cli {}
