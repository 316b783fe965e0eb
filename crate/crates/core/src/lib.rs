//! Variable-ordering selection for cylindrical algebraic decomposition.
//!
//! The crate is organised bottom-up:
//!
//! - [`poly`]: exact multivariate polynomials, resultants, GCDs and the Lazard
//!   projection operator.
//! - [`features`]: degree-list features of polynomial systems (`v_i`, `sv_i`,
//!   `sg`, nested `max`/`sum`/`avg`).
//! - [`heuristics`]: greedy feature-chain heuristics (Brown, gmods, triples)
//!   and the exhaustive `mods` heuristic.
//! - [`xai_rank`]: aggregation of per-model SHAP tables into merged feature
//!   rankings and Dowdall / Borda voting.
//! - [`evalharness`]: accuracy, total time, markup and completion metrics over
//!   per-ordering timing tables, plus survival curves.
//! - [`cli`]: the `cadorder` command-line front end.

pub mod cli;
pub mod error;
pub mod evalharness;
pub mod features;
pub mod heuristics;
pub mod poly;
pub mod xai_rank;

pub use error::{Error, Result};
pub use poly::{PolySystem, Polynomial};
