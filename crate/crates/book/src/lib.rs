//! The guide under `book/src`, one module per chapter so `cargo test`
//! runs every snippet.

#[doc = include_str!("../../../book/src/overview.md")]
pub mod overview {}
#[doc = include_str!("../../../book/src/domains.md")]
pub mod domains {}
#[doc = include_str!("../../../book/src/green.md")]
pub mod green {}
#[doc = include_str!("../../../book/src/fields.md")]
pub mod fields {}
#[doc = include_str!("../../../book/src/walks.md")]
pub mod walks {}
#[doc = include_str!("../../../book/src/levels.md")]
pub mod levels {}
#[doc = include_str!("../../../book/src/continuum.md")]
pub mod continuum {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
