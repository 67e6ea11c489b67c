//! Exact constructive analysis on the unit interval.
//!
//! * [`rational`]: canonical exact fractions, the only number type.
//! * [`crn`]: constructive reals as approximation sequence plus regulator.
//! * [`machine`]: a step-counted counter machine and a dovetailing enumerator.
//! * [`analysis`]: waiting sequences, the halting reduction, and bisection
//!   towards a point where a discrete-valued map changes value.
//! * [`cover`]: Lebesgue numbers, ε-nets, finite subcover extraction and
//!   certificate checking.
//! * [`cli`]: the `constructive` command-line tool.

pub mod analysis;
pub mod cli;
pub mod cover;
pub mod crn;
pub mod machine;
pub mod rational;

pub use crn::Crn;
pub use rational::Rational;
