//! Waiting sequences, the halting reduction, and discontinuity bisection.
//!
//! A *waiting* CRN follows a convergent target sequence `x_i` while a
//! monitored counter-machine run is still going, and freezes at `x_k` once
//! the run halts at step `k`. Its limit is therefore `x` or `x_k` depending on
//! whether the program halts, which is why a total computable map that could
//! tell those limits apart would decide halting.
//!
//! The bisection engine takes a discrete-valued map `f` and two rationals
//! with different labels, and halves the interval while keeping the labels at
//! the two ends different. The left endpoints form a CRN converging to a
//! point where `f` changes value.
//!
//! ```
//! use constructive::analysis::{bisect_to_precision, DiscreteMap};
//! use constructive::Rational;
//!
//! let f: DiscreteMap = "step@1/3".parse().unwrap();
//! let (_, transcript) = bisect_to_precision(&f, &Rational::zero(), &Rational::one(), 40).unwrap();
//! let last = transcript.last();
//! assert_eq!(&last.q - &last.p, Rational::pow2_neg(40));
//! assert!(last.p < Rational::frac(1, 3) && Rational::frac(1, 3) <= last.q);
//! ```

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::crn::expr::{Builtins, ExprError};
use crate::crn::{
    self, Approximator, Crn, CrnError, FnApproximator, Index, Level, LinearIndex, Regulator,
    ValidationReport,
};
use crate::machine::{run_for, Program, RunOutcome};
use crate::rational::{Rational, RationalError};

/// Evaluating a waiting CRN at index `i` runs the program for `i` steps;
/// indices above this limit fail with `BudgetExceeded`.
pub const DEFAULT_STEP_LIMIT: u64 = 10_000_000;

/// Bisection limits refuse to extend more than this many steps past the
/// precomputed transcript.
pub const MAX_BISECTION_EXTENSION: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("f({p}) = f({q}) = {label}; the endpoints are not separated")]
    NotSeparated {
        p: Rational,
        q: Rational,
        label: Label,
    },
    #[error("interval [{lo}, {hi}] is empty or reversed")]
    InvalidInterval { lo: Rational, hi: Rational },
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("target sequence breaks the regulator law ({} violations)", .0.violations.len())]
    InvalidTargets(ValidationReport),
    #[error("cannot parse map {input:?}: expected step@c, stair:c1,...,cm or const:k")]
    BadMap { input: String },
    #[error("unknown target sequence {0:?} (only `geometric` is built in)")]
    UnknownTargets(String),
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error(transparent)]
    Crn(#[from] CrnError),
}

/// The convergent sequence `x_n -> x` a waiting CRN tracks.
#[derive(Debug, Clone)]
pub struct TargetSequence {
    crn: Crn,
}

impl TargetSequence {
    /// `x_i = 1 - 2^-i` with `beta(n) = n`; the limit is 1.
    pub fn geometric() -> Self {
        TargetSequence {
            crn: Crn::new(
                FnApproximator::new("1 - 2^-i", |i| {
                    Rational::one() - Rational::pow2_neg(u32::try_from(i).unwrap_or(u32::MAX))
                }),
                LinearIndex { offset: 0 },
            ),
        }
    }

    /// Wraps an arbitrary CRN after checking its regulator on levels 1..=16.
    pub fn new(crn: Crn) -> Result<Self, AnalysisError> {
        let report = crn::validate_regulator(&crn, 1..=16, 4)?;
        if !report.is_clean() {
            return Err(AnalysisError::InvalidTargets(report));
        }
        Ok(TargetSequence { crn })
    }

    pub fn as_crn(&self) -> &Crn {
        &self.crn
    }

    pub fn term(&self, index: Index) -> Result<Rational, CrnError> {
        self.crn.term(index)
    }

    pub fn index_for(&self, level: Level) -> Index {
        self.crn.index_for(level)
    }
}

impl FromStr for TargetSequence {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "geometric" => Ok(TargetSequence::geometric()),
            other => Err(AnalysisError::UnknownTargets(other.to_string())),
        }
    }
}

#[derive(Debug)]
struct Waiting {
    program: Program,
    input: u64,
    targets: TargetSequence,
    step_limit: u64,
}

impl Approximator for Waiting {
    fn term(&self, index: Index) -> Result<Rational, CrnError> {
        if index > self.step_limit {
            return Err(CrnError::BudgetExceeded {
                index,
                budget: self.step_limit,
            });
        }
        match run_for(&self.program, self.input, index) {
            RunOutcome::Halted { steps } => self.targets.term(steps),
            RunOutcome::StillRunning { .. } => self.targets.term(index),
        }
    }
}

#[derive(Debug)]
struct TargetRegulator(TargetSequence);

impl Regulator for TargetRegulator {
    fn index_for(&self, level: Level) -> Index {
        self.0.index_for(level)
    }
}

/// The waiting CRN for `program` on `input`, with the default step limit.
///
/// Entry `i` is `x_i` while the run is still going after `i` steps and `x_k`
/// once it has halted at step `k`. The regulator is the target's own.
pub fn waiting_crn(program: &Program, input: u64, targets: &TargetSequence) -> Crn {
    waiting_crn_with_limit(program, input, targets, DEFAULT_STEP_LIMIT)
}

pub fn waiting_crn_with_limit(
    program: &Program,
    input: u64,
    targets: &TargetSequence,
    step_limit: u64,
) -> Crn {
    Crn::new(
        Waiting {
            program: program.clone(),
            input,
            targets: targets.clone(),
            step_limit,
        },
        TargetRegulator(targets.clone()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The probed run halted at this step.
    HaltsAt { steps: u64 },
    /// The probe forced this many steps and the run had not halted.
    NoHaltWithin { steps: u64 },
}

/// The outcome of probing a waiting CRN at finite precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub verdict: Verdict,
    /// `approx_to(waiting, precision)`.
    pub approximation: Rational,
    /// The probe's label on that approximation.
    pub label: Label,
}

/// Runs the halting reduction honestly at a finite precision.
///
/// Querying the waiting CRN at `precision` evaluates it at index
/// `s = beta(precision + 1)`, which runs the program for `s` steps. The
/// verdict reports what that run showed and nothing more.
pub fn halting_reduction(
    program: &Program,
    input: u64,
    targets: &TargetSequence,
    probe: &DiscreteMap,
    precision: Level,
) -> Result<Reduction, CrnError> {
    let waiting = waiting_crn(program, input, targets);
    let approximation = crn::approx_to(&waiting, precision)?;
    let label = probe.label(&approximation);
    let probed = targets.index_for(precision.saturating_add(1));
    let verdict = match run_for(program, input, probed) {
        RunOutcome::Halted { steps } => Verdict::HaltsAt { steps },
        RunOutcome::StillRunning { budget } => Verdict::NoHaltWithin { steps: budget },
    };
    Ok(Reduction {
        verdict,
        approximation,
        label,
    })
}

/// A value in the finite label alphabet of a [`DiscreteMap`].
pub type Label = u32;

/// A total map from rationals to labels with decidable equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiscreteMap {
    /// Label 0 below the threshold, 1 at and above it.
    Step(Rational),
    /// Number of thresholds `<= t`. Thresholds are kept sorted.
    Stair(Vec<Rational>),
    Constant(Label),
}

impl DiscreteMap {
    pub fn step(threshold: Rational) -> Self {
        DiscreteMap::Step(threshold)
    }

    pub fn stair(mut thresholds: Vec<Rational>) -> Self {
        thresholds.sort();
        DiscreteMap::Stair(thresholds)
    }

    pub fn label(&self, t: &Rational) -> Label {
        match self {
            DiscreteMap::Step(c) => Label::from(t >= c),
            DiscreteMap::Stair(cs) => cs.partition_point(|c| c <= t) as Label,
            DiscreteMap::Constant(k) => *k,
        }
    }
}

impl FromStr for DiscreteMap {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AnalysisError::BadMap {
            input: s.to_string(),
        };
        if let Some(c) = s.strip_prefix("step@") {
            Ok(DiscreteMap::step(c.parse()?))
        } else if let Some(cs) = s.strip_prefix("stair:") {
            let thresholds = cs
                .split(',')
                .map(|c| c.trim().parse::<Rational>())
                .collect::<Result<Vec<_>, _>>()?;
            Ok(DiscreteMap::stair(thresholds))
        } else if let Some(k) = s.strip_prefix("const:") {
            Ok(DiscreteMap::Constant(k.parse().map_err(|_| bad())?))
        } else {
            Err(bad())
        }
    }
}

impl fmt::Display for DiscreteMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiscreteMap::Step(c) => write!(f, "step@{c}"),
            DiscreteMap::Stair(cs) => {
                f.write_str("stair:")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            DiscreteMap::Constant(k) => write!(f, "const:{k}"),
        }
    }
}

/// Which half a bisection step kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Row 0: the starting pair.
    Initial,
    /// Kept `(mid, q)`.
    Upper,
    /// Kept `(p, mid)`.
    Lower,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Initial => "init",
            Branch::Upper => "upper",
            Branch::Lower => "lower",
        })
    }
}

/// One halving of a separated pair.
///
/// Keeps `(mid, q)` whenever `f(mid) != f(q)`, which includes the case where
/// `mid` differs from both ends; otherwise `f(mid) = f(q) != f(p)` and the
/// step keeps `(p, mid)`.
pub fn bisect_step(
    p: &Rational,
    q: &Rational,
    f: &DiscreteMap,
) -> Result<(Rational, Rational, Branch), AnalysisError> {
    let (fp, fq) = (f.label(p), f.label(q));
    if fp == fq {
        return Err(AnalysisError::NotSeparated {
            p: p.clone(),
            q: q.clone(),
            label: fp,
        });
    }
    let mid = p.midpoint(q);
    if f.label(&mid) != fq {
        Ok((mid, q.clone(), Branch::Upper))
    } else {
        Ok((p.clone(), mid, Branch::Lower))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptRow {
    pub index: u64,
    pub p: Rational,
    pub q: Rational,
    pub branch: Branch,
}

/// Every pair produced by a bisection run, starting with the initial pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisectionTranscript {
    rows: Vec<TranscriptRow>,
}

impl BisectionTranscript {
    pub fn rows(&self) -> &[TranscriptRow] {
        &self.rows
    }

    pub fn last(&self) -> &TranscriptRow {
        self.rows.last().expect("transcripts always hold the initial pair")
    }

    /// Tab-separated `i  p_i  q_i  branch`, one row per line.
    pub fn to_tsv(&self) -> String {
        self.rows
            .iter()
            .map(|r| format!("{}\t{}\t{}\t{}\n", r.index, r.p, r.q, r.branch))
            .collect()
    }
}

#[derive(Debug)]
struct BisectionLimit {
    map: DiscreteMap,
    lefts: Vec<Rational>,
    last: (Rational, Rational),
}

impl Approximator for BisectionLimit {
    fn term(&self, index: Index) -> Result<Rational, CrnError> {
        if let Some(p) = usize::try_from(index).ok().and_then(|i| self.lefts.get(i)) {
            return Ok(p.clone());
        }
        let known = self.lefts.len() as u64 - 1;
        let extra = index - known;
        if extra > MAX_BISECTION_EXTENSION {
            return Err(CrnError::BudgetExceeded {
                index,
                budget: known + MAX_BISECTION_EXTENSION,
            });
        }
        let (mut p, mut q) = self.last.clone();
        for _ in 0..extra {
            let (np, nq, _) =
                bisect_step(&p, &q, &self.map).expect("separation is preserved by every step");
            p = np;
            q = nq;
        }
        Ok(p)
    }
}

/// `beta(m)` = least `i` with `width * 2^-i < 2^-m`.
#[derive(Debug)]
struct HalvingRegulator {
    width: Rational,
}

impl Regulator for HalvingRegulator {
    fn index_for(&self, level: Level) -> Index {
        let scaled = &self.width * &Rational::pow2(level);
        let mut i = 0u32;
        while Rational::pow2(i) <= scaled {
            i += 1;
        }
        Index::from(i)
    }
}

/// Runs `steps` bisection steps from `(p0, q0)` and returns the limit CRN
/// together with the transcript.
///
/// The CRN's terms are the left endpoints `p_i`; indices past `steps` keep
/// bisecting on demand.
pub fn bisect_to_precision(
    f: &DiscreteMap,
    p0: &Rational,
    q0: &Rational,
    steps: u64,
) -> Result<(Crn, BisectionTranscript), AnalysisError> {
    if p0 >= q0 {
        return Err(AnalysisError::InvalidInterval {
            lo: p0.clone(),
            hi: q0.clone(),
        });
    }
    let (fp, fq) = (f.label(p0), f.label(q0));
    if fp == fq {
        return Err(AnalysisError::NotSeparated {
            p: p0.clone(),
            q: q0.clone(),
            label: fp,
        });
    }
    let mut rows = vec![TranscriptRow {
        index: 0,
        p: p0.clone(),
        q: q0.clone(),
        branch: Branch::Initial,
    }];
    let (mut p, mut q) = (p0.clone(), q0.clone());
    for index in 1..=steps {
        let (np, nq, branch) = bisect_step(&p, &q, f)?;
        p = np;
        q = nq;
        rows.push(TranscriptRow {
            index,
            p: p.clone(),
            q: q.clone(),
            branch,
        });
    }
    let limit = Crn::new(
        BisectionLimit {
            map: f.clone(),
            lefts: rows.iter().map(|r| r.p.clone()).collect(),
            last: (p, q),
        },
        HalvingRegulator { width: q0 - p0 },
    );
    Ok((limit, BisectionTranscript { rows }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constancy {
    NoWitness,
    /// Adjacent grid points with different labels.
    Witness { p: Rational, q: Rational },
}

/// Looks for two grid points in `[lo, hi]` with different labels.
///
/// The grid is `lo + i (hi - lo) / (samples - 1)`; the first adjacent pair
/// that differs is returned.
pub fn constancy_check(
    f: &DiscreteMap,
    lo: &Rational,
    hi: &Rational,
    samples: usize,
) -> Result<Constancy, AnalysisError> {
    if lo >= hi {
        return Err(AnalysisError::InvalidInterval {
            lo: lo.clone(),
            hi: hi.clone(),
        });
    }
    if samples < 2 {
        return Err(AnalysisError::TooFewSamples(samples));
    }
    let stride = (hi - lo).div_int(samples as u64 - 1);
    let mut prev = lo.clone();
    let mut prev_label = f.label(&prev);
    for i in 1..samples {
        let next = if i == samples - 1 {
            hi.clone()
        } else {
            lo + &(&stride * &Rational::from(i as u64))
        };
        let label = f.label(&next);
        if label != prev_label {
            return Ok(Constancy::Witness { p: prev, q: next });
        }
        prev = next;
        prev_label = label;
    }
    Ok(Constancy::NoWitness)
}

/// Resolves `waiting(FILE, N[, targets])` and `bisect_limit(MAP, LO, HI)`
/// inside CRN expressions. Program paths are relative to `base_dir`.
#[derive(Debug, Clone, Default)]
pub struct AnalysisBuiltins {
    pub base_dir: PathBuf,
}

impl AnalysisBuiltins {
    pub fn new(base_dir: impl Into<PathBuf>) -> Self {
        AnalysisBuiltins {
            base_dir: base_dir.into(),
        }
    }
}

impl Builtins for AnalysisBuiltins {
    fn call(&self, name: &str, args: &[&str]) -> Result<Crn, ExprError> {
        let bad = |message: String| ExprError::BadArguments {
            function: name.to_string(),
            message,
        };
        match name {
            "waiting" => {
                let (path, input, targets) = match args {
                    [path, input] => (path, input, "geometric"),
                    [path, input, targets] => (path, input, *targets),
                    _ => return Err(bad("expected (program-file, input[, targets])".into())),
                };
                let input: u64 = input
                    .parse()
                    .map_err(|_| bad(format!("input {input:?} is not a natural number")))?;
                let text = fs::read_to_string(self.base_dir.join(path))
                    .map_err(|e| bad(format!("cannot read {path:?}: {e}")))?;
                let program: Program = text.parse().map_err(|e| bad(format!("{e}")))?;
                let targets: TargetSequence = targets.parse().map_err(|e| bad(format!("{e}")))?;
                Ok(waiting_crn(&program, input, &targets))
            }
            "bisect_limit" => {
                // the map itself may contain commas (stair:a,b,c)
                let [map @ .., lo, hi] = args else {
                    return Err(bad("expected (map, lo, hi)".into()));
                };
                if map.is_empty() {
                    return Err(bad("expected (map, lo, hi)".into()));
                }
                let map: DiscreteMap = map.join(",").parse().map_err(|e| bad(format!("{e}")))?;
                let lo: Rational = lo.parse()?;
                let hi: Rational = hi.parse()?;
                let (limit, _) =
                    bisect_to_precision(&map, &lo, &hi, 0).map_err(|e| bad(format!("{e}")))?;
                Ok(limit)
            }
            other => Err(ExprError::UnknownFunction(other.to_string())),
        }
    }
}
