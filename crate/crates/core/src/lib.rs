//! Monotone growth dynamics on the square lattice driven by a Young-diagram
//! zero-set and a cross neighborhood of range `rho`.
//!
//! * [`zeroset`]: zero-sets, minimal counts, validated rules.
//! * [`grid`]: bit-packed occupancy boxes with zero or periodic boundary.
//! * [`engine`]: the synchronous update, its naive reference, and the
//!   saturated-line comparison dynamics.
//! * [`observables`]: first-occupation time, spanning, critical length.
//! * [`theory`]: exact critical powers and bounds.
//! * [`harness`]: experiments, CSV/JSON output, rendering, self-checks.

pub mod engine;
pub mod error;
pub mod grid;
pub mod harness;
pub mod observables;
pub mod seeding;
pub mod theory;
pub mod zeroset;

pub use error::{Error, Result};
pub use grid::{Boundary, Configuration, CrossCounts, Orientation};
pub use zeroset::{MinimalCount, Rule, Width, WidthPolicy, ZeroSet};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/zero-sets.md")]
    mod zero_sets {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/observables.md")]
    mod observables {}
    #[doc = include_str!("../../../book/src/theory.md")]
    mod theory {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
