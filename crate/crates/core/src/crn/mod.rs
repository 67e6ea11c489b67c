//! Constructive real numbers.
//!
//! A [`Crn`] pairs an approximation sequence `alpha: N -> Q` with a regulator
//! `beta: N -> N`. The pair is a real number exactly when the regulator law
//! holds: for every precision level `n` and all indices `i, j >= beta(n)`,
//! `|alpha(i) - alpha(j)| < 2^-n`.
//!
//! Nothing here ever decides equality of two reals. The decidable surrogates
//! are [`approx_to`], which returns a rational within `2^-(n+1)` of the limit,
//! and [`compare_apart`], which either certifies a strict order or certifies
//! that the two values are within `2^-n` of each other.
//!
//! ```
//! use constructive::crn::{approx_to, Crn};
//! use constructive::Rational;
//!
//! let third = Crn::from_rational(Rational::frac(1, 3));
//! let sixth = Crn::from_rational(Rational::frac(1, 6));
//! let half = third.add(&sixth);
//! assert_eq!(approx_to(&half, 30).unwrap(), Rational::frac(1, 2));
//! ```

pub mod expr;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::rational::Rational;

/// Precision level `n`, standing for the tolerance `2^-n`.
pub type Level = u32;

/// Position in an approximation sequence.
pub type Index = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrnError {
    #[error("step budget of {budget} exceeded while evaluating index {index}")]
    BudgetExceeded { index: Index, budget: u64 },
    #[error("regulator validation needs at least 2 probes per level, got {0}")]
    TooFewProbes(usize),
}

/// The approximation sequence `alpha`.
///
/// Implementations must be deterministic: the same index always yields the
/// same rational. They may fail only by running out of a step budget.
pub trait Approximator: Send + Sync + fmt::Debug {
    fn term(&self, index: Index) -> Result<Rational, CrnError>;
}

/// The regulator `beta`. Monotonicity is not assumed anywhere.
pub trait Regulator: Send + Sync + fmt::Debug {
    fn index_for(&self, level: Level) -> Index;
}

/// A constructive real: an approximator plus its regulator.
#[derive(Clone)]
pub struct Crn {
    alpha: Arc<dyn Approximator>,
    beta: Arc<dyn Regulator>,
}

impl fmt::Debug for Crn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Crn")
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .finish()
    }
}

impl Crn {
    /// Pairs an arbitrary approximator with a regulator. The regulator law is
    /// the caller's promise; [`validate_regulator`] samples it.
    pub fn new(alpha: impl Approximator + 'static, beta: impl Regulator + 'static) -> Self {
        Crn {
            alpha: Arc::new(alpha),
            beta: Arc::new(beta),
        }
    }

    pub fn from_parts(alpha: Arc<dyn Approximator>, beta: Arc<dyn Regulator>) -> Self {
        Crn { alpha, beta }
    }

    /// The constant sequence `q` with regulator `beta = 0`.
    pub fn from_rational(q: Rational) -> Self {
        Crn::new(Constant(q), ConstantIndex(0))
    }

    pub fn alpha(&self) -> &Arc<dyn Approximator> {
        &self.alpha
    }

    pub fn beta(&self) -> &Arc<dyn Regulator> {
        &self.beta
    }

    pub fn term(&self, index: Index) -> Result<Rational, CrnError> {
        self.alpha.term(index)
    }

    pub fn index_for(&self, level: Level) -> Index {
        self.beta.index_for(level)
    }

    pub fn add(&self, other: &Crn) -> Crn {
        self.combine(other, BinOp::Add, 1)
    }

    pub fn sub(&self, other: &Crn) -> Crn {
        self.combine(other, BinOp::Sub, 1)
    }

    /// Product of two reals.
    ///
    /// With `B = |approx_to(z, 0)| + 1`, every term past `beta(1)` has
    /// magnitude at most `B`, so shifting both regulators by the least `k`
    /// with `2^k >= B_x + B_y + 1` keeps the product gap below `2^-n`.
    pub fn mul(&self, other: &Crn) -> Result<Crn, CrnError> {
        let bound = |z: &Crn| -> Result<Rational, CrnError> {
            Ok(approx_to(z, 0)?.abs() + Rational::one())
        };
        let target = bound(self)? + bound(other)? + Rational::one();
        let mut shift = 0u32;
        while Rational::pow2(shift) < target {
            shift += 1;
        }
        Ok(self.combine(other, BinOp::Mul, shift))
    }

    fn combine(&self, other: &Crn, op: BinOp, shift: Level) -> Crn {
        Crn::new(
            Combination {
                op,
                lhs: self.clone(),
                rhs: other.clone(),
            },
            ShiftedMax {
                lhs: self.clone(),
                rhs: other.clone(),
                shift,
            },
        )
    }
}

/// `alpha(beta(n + 1))`, a rational within `2^-(n+1)` of the limit.
pub fn approx_to(x: &Crn, level: Level) -> Result<Rational, CrnError> {
    x.term(x.index_for(level.saturating_add(1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Apartness {
    /// `x < y`, certified.
    Less,
    /// `x > y`, certified.
    Greater,
    /// `|x - y| <= 2^-n`.
    Indistinguishable,
}

/// Decidable comparison at precision `2^-n`.
pub fn compare_apart(x: &Crn, y: &Crn, level: Level) -> Result<Apartness, CrnError> {
    let a = approx_to(x, level.saturating_add(2))?;
    let b = approx_to(y, level.saturating_add(2))?;
    let gap = Rational::pow2_neg(level.saturating_add(1));
    Ok(if &b - &a > gap {
        Apartness::Less
    } else if &a - &b > gap {
        Apartness::Greater
    } else {
        Apartness::Indistinguishable
    })
}

/// One observed breach of the regulator law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub level: Level,
    pub i: Index,
    pub j: Index,
    pub difference: Rational,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub pairs_checked: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Offsets `0, 1, 2, 4, 8, ...` past `beta(n)`, truncated to `count` entries.
pub fn probe_offsets(count: usize) -> Vec<Index> {
    let mut offsets = Vec::with_capacity(count);
    let mut next = 0u64;
    while offsets.len() < count {
        offsets.push(next);
        next = if next == 0 { 1 } else { next.saturating_mul(2) };
    }
    offsets
}

/// Samples the regulator law on a fixed probe schedule and reports every
/// violating pair `(n, i, j, |alpha(i) - alpha(j)|)`.
pub fn validate_regulator(
    x: &Crn,
    levels: impl IntoIterator<Item = Level>,
    probes_per_level: usize,
) -> Result<ValidationReport, CrnError> {
    if probes_per_level < 2 {
        return Err(CrnError::TooFewProbes(probes_per_level));
    }
    let offsets = probe_offsets(probes_per_level);
    let mut report = ValidationReport::default();
    for level in levels {
        let start = x.index_for(level);
        let tolerance = Rational::pow2_neg(level);
        let probes = offsets
            .iter()
            .map(|off| {
                let i = start.saturating_add(*off);
                x.term(i).map(|v| (i, v))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (a, (i, vi)) in probes.iter().enumerate() {
            for (j, vj) in &probes[a + 1..] {
                report.pairs_checked += 1;
                let difference = (vi - vj).abs();
                if difference >= tolerance {
                    report.violations.push(Violation {
                        level,
                        i: *i,
                        j: *j,
                        difference,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// The constant sequence.
#[derive(Debug, Clone)]
pub struct Constant(pub Rational);

impl Approximator for Constant {
    fn term(&self, _index: Index) -> Result<Rational, CrnError> {
        Ok(self.0.clone())
    }
}

/// `beta(n) = c` for every level.
#[derive(Debug, Clone, Copy)]
pub struct ConstantIndex(pub Index);

impl Regulator for ConstantIndex {
    fn index_for(&self, _level: Level) -> Index {
        self.0
    }
}

/// `beta(n) = n + offset`.
#[derive(Debug, Clone, Copy)]
pub struct LinearIndex {
    pub offset: Index,
}

impl Regulator for LinearIndex {
    fn index_for(&self, level: Level) -> Index {
        Index::from(level).saturating_add(self.offset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug)]
struct Combination {
    op: BinOp,
    lhs: Crn,
    rhs: Crn,
}

impl Approximator for Combination {
    fn term(&self, index: Index) -> Result<Rational, CrnError> {
        let a = self.lhs.term(index)?;
        let b = self.rhs.term(index)?;
        Ok(match self.op {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
        })
    }
}

/// `beta(n) = max(lhs.beta(n + shift), rhs.beta(n + shift))`.
#[derive(Debug)]
struct ShiftedMax {
    lhs: Crn,
    rhs: Crn,
    shift: Level,
}

impl Regulator for ShiftedMax {
    fn index_for(&self, level: Level) -> Index {
        let level = level.saturating_add(self.shift);
        self.lhs.index_for(level).max(self.rhs.index_for(level))
    }
}

/// Approximator backed by a closure, mostly for tests and experiments.
pub struct FnApproximator<F> {
    name: &'static str,
    f: F,
}

impl<F> FnApproximator<F>
where
    F: Fn(Index) -> Rational + Send + Sync,
{
    pub fn new(name: &'static str, f: F) -> Self {
        FnApproximator { name, f }
    }
}

impl<F> fmt::Debug for FnApproximator<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnApproximator({})", self.name)
    }
}

impl<F> Approximator for FnApproximator<F>
where
    F: Fn(Index) -> Rational + Send + Sync,
{
    fn term(&self, index: Index) -> Result<Rational, CrnError> {
        Ok((self.f)(index))
    }
}
