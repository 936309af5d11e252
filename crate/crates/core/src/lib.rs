//! Coevolutionary replicator model of migrant assimilation and native
//! human-capital formation.
//!
//! Migrants choose whether to assimilate (share `p`), natives whether to
//! become high-skill (share `q`). Both choices are driven by income net of
//! costs and by relative deprivation within each agent's comparison group.
//! The crate evaluates the model, enumerates and classifies its steady
//! states, integrates the dynamics, and compares welfare with and without an
//! assimilation allowance `A`.
//!
//! ```
//! use assimdyn::{equilibria, params::{Admissible, ModelParams}};
//!
//! let params = Admissible::new(ModelParams::example()).unwrap();
//! let th = equilibria::thresholds(&params);
//! assert!((th.a_star - 263.0 / 2200.0).abs() < 1e-12);
//! ```

// `!(x > y)` is used on purpose so NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod model;
pub mod output;
pub mod params;
pub mod sampling;
pub mod welfare;

pub use error::{Error, ParseError, Result};
pub use model::State;
pub use params::{Admissible, ModelParams};
