// mdbook cannot run listings that depend on an external crate, so every
// chapter is pulled in as a module doc and `cargo test --doc` runs them.
// One module per chapter keeps failures traceable to their source file.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/conventions.md")]
pub mod conventions {}
#[doc = include_str!("src/spectrum.md")]
pub mod spectrum {}
#[doc = include_str!("src/separability.md")]
pub mod separability {}
#[doc = include_str!("src/protocol.md")]
pub mod protocol {}
#[doc = include_str!("src/montecarlo.md")]
pub mod montecarlo {}
#[doc = include_str!("src/sweeps.md")]
pub mod sweeps {}
