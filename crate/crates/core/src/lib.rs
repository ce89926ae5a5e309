//! Model checking of CTL+Sync over one-counter automata (OCAs).
//!
//! The crate is organized bottom-up:
//!
//! - [`oca`]: automata, configurations, successor computation and level sets.
//! - [`formula`]: the CTL+Sync syntax tree and its concrete-syntax parser.
//! - [`upset`]: ultimately periodic subsets of ℕ, the shape of per-state
//!   satisfaction sets.
//! - [`lps`]: linear path schemes, slopes and cycle-combination arithmetic.
//! - [`periodicity`]: threshold/period constants for CTL and `UA` operators.
//! - [`mc`]: unfolding into finite Kripke structures and the labeling checker.
//! - [`oracle`]: brute-force three-valued ground truth used to validate the rest.
//!
//! Data-parallel loops go through [`exec::Exec`]; with the `parallel` feature
//! disabled every loop runs sequentially.

pub mod arith;
pub mod exec;
pub mod formula;
pub mod lps;
pub mod mc;
pub mod oca;
pub mod oracle;
pub mod periodicity;
pub mod quantity;
pub mod upset;

pub use exec::Exec;
pub use formula::Formula;
pub use oca::{Configuration, Oca};
pub use quantity::Quantity;
pub use upset::UpSet;
