// mdbook cannot link external crates when testing snippets, so every
// chapter is pulled in here as module docs and `cargo test --doc` runs the
// code blocks against the real library. One module per chapter keeps
// failures traceable to their page.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}
#[doc = include_str!("../../../book/src/ground-state.md")]
pub mod ground_state {}
#[doc = include_str!("../../../book/src/entanglement.md")]
pub mod entanglement {}
#[doc = include_str!("../../../book/src/factorization.md")]
pub mod factorization {}
#[doc = include_str!("../../../book/src/free-fermions.md")]
pub mod free_fermions {}
#[doc = include_str!("../../../book/src/sweeps.md")]
pub mod sweeps {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
