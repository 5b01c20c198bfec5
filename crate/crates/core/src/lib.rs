//! Explicit weight-placement constructions for permutation-invariant contexts.
//!
//! The crate compiles exact Wasserstein-1 networks over quantized discrete
//! measures, piecewise-constant in-context approximators built from retracted
//! Voronoi cells, and the conversion of any compiled MLP into a multi-head
//! transformer with identical input-output behaviour. Every construction is
//! paired with an independent combinatorial oracle in [`measures`].
//!
//! Module map:
//!
//! * [`measures`]: contexts, weights on the contextualized simplex, W1 / quotient / KR oracles.
//! * [`netbuilder`]: the trainable activation, layered networks and exact gadgets.
//! * [`w1net`]: exact W1 networks (uniform, fixed weights, all contextual weights).
//! * [`partition`]: packings, retracted Voronoi cells, indicator networks and the assembled approximator.
//! * [`transformer`]: multi-head attention and the MLP-to-transformer converter.

pub mod assignment;
pub mod budget;
pub mod error;
pub mod measures;
pub mod netbuilder;
pub mod partition;
pub mod simplex;
pub mod sparse;
pub mod transformer;
pub mod w1net;

pub use error::{Error, Result};
