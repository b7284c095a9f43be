//! Simulation kernels for the stubborn voter model on the complete graph
//! with heavy-tailed update rates, its dual system of coalescing random
//! walks, and the limiting walk on the slow sites.
//!
//! Everything is quenched: operations take an explicit environment (a
//! ranked weight landscape or its extreme-value limit) plus an explicit
//! random stream, and are deterministic given both.

pub mod alias;
pub mod dense;
pub mod env;
pub mod fenwick;
pub mod stats;
pub mod stream;

pub mod dual;
pub mod graphical;
pub mod limitwalk;
pub mod voter;

pub use env::{Environment, LimitEnvironment, RankedVector, TailFamily, TailLaw};
pub use stream::{derive_stream, Stream};
