//! Brute-force ground truth: bounded three-valued evaluation, empirical
//! period mining, differential checking against [`crate::mc`], and the
//! level-set implications behind the `UA` constants.

pub mod cross;
pub mod eval;
pub mod lemma11;
pub mod mine;

pub use cross::{all_inits, cross_check, CrossReport, CrossStatus};
pub use eval::{eval_bounded, eval_tables, Caps, OracleError, Tables, Truth};
pub use lemma11::{check_lemma11, Lemma11Report, LemmaSamples};
pub use mine::{mine_period, mine_total_pair, MineCaps, MinedPeriod};
