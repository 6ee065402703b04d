//! Data-race analysis for a minimal OpenCL-style kernel language.
//!
//! The crate has two engines that answer the same question from opposite
//! directions:
//!
//! * [`concrete`] runs a kernel under its small-step interleaving semantics,
//!   exhaustively at small thread counts, and classifies it as racy or
//!   race-free. It is exact but only works on concrete inputs at desk scale.
//! * [`symexec`] runs the kernel once, symbolically, over separation-logic
//!   heaps ([`symheap`]) with a generic thread id, and checks at every
//!   barrier that any two distinct thread instantiations agree on the shared
//!   state. It scales but is an over-approximation in one direction and is
//!   knowingly unsound in another (branches that depend on array reads).
//!
//! [`prover`] is the incomplete entailment engine behind the symbolic side,
//! [`lang`] is the shared frontend, and [`ops`] glues everything into the
//! run/report workflow used by the CLI and the HTTP service.

pub mod concrete;
pub mod inputs;
pub mod lang;
pub mod ops;
pub mod prover;
pub mod report;
pub mod symexec;
pub mod symheap;
