//! Deterministic toolkit for social discount rates, PFI/PSC appraisal,
//! welfare positioning and PPP debt monitoring.
//!
//! The library is organized around five subject areas plus a CLI front
//! end:
//!
//! - [`rates`]: STPR and SOC rate construction, declining term
//!   structures, built-in reference rates.
//! - [`cashflow`]: dated amounts, discount factors, net present value.
//! - [`appraisal`]: PFI vs PSC comparison tables, verdicts, breakeven
//!   search, annuity fitting.
//! - [`welfare`]: inequality statistics, social welfare functions over a
//!   utility frontier, rate-to-regime classification.
//! - [`fiscal`]: liability registers, recognition bases, debt-to-GDP
//!   ratios and the danger-zone alert.
//!
//! Every operation is a pure function over immutable values, safe for
//! unrestricted concurrent use.

pub mod appraisal;
pub mod cashflow;
pub mod cli;
pub mod error;
pub mod fiscal;
pub mod money;
pub mod rates;
pub mod welfare;

pub use error::{Error, Result};
