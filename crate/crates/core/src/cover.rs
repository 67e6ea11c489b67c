//! Finite subcovers of `[0,1]` from a uniform containment radius.
//!
//! A cover is a finite list of open intervals of the real line. A *nice
//! modulus* assigns each point `x` a radius `r` such that `(x - r, x + r)`
//! lies inside a single cover element. Once that radius is the same at every
//! point, a finite subcover falls out directly:
//!
//! 1. take the grid `0, r, 2r, ...` (plus `1`) as an `r`-net of `[0,1]`;
//! 2. for each net point pick the first element containing its `r`-ball;
//! 3. the picked elements cover `[0,1]`.
//!
//! The result is a [`SubcoverCertificate`] that [`verify_certificate`] can
//! re-check from scratch with exact arithmetic.
//!
//! Ball containment is full-line containment, so a cover must strictly
//! overhang both `0` and `1`.
//!
//! ```
//! use constructive::cover::{extract_finite_subcover, verify_subcover, Coverage, CoverList, NiceModulus};
//! use constructive::Rational;
//!
//! let cover: CoverList = "-0.1 0.6\n0.4 1.1\n".parse().unwrap();
//! let cert = extract_finite_subcover(&cover, &NiceModulus::lebesgue(&cover)).unwrap();
//! assert_eq!(cert.r, Rational::frac(1, 10));
//! assert_eq!(cert.selected, vec![0, 1]);
//! assert_eq!(verify_subcover(&cover, &cert.selected).unwrap(), Coverage::Covered);
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::rational::{Rational, RationalError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error("not a cover: the point {x} has no element around it (best margin {margin})")]
    NotACover { x: Rational, margin: Rational },
    #[error("modulus is not constant: E({p}) = {radius_p} but E({q}) = {radius_q}")]
    NotNiceCover {
        p: Rational,
        q: Rational,
        radius_p: Rational,
        radius_q: Rational,
    },
    #[error("radius {0} is not positive")]
    NonpositiveRadius(Rational),
    #[error("no cover element contains the ball of radius {radius} around {center}")]
    NoContainingElement { center: Rational, radius: Rational },
    #[error("the cover has no elements")]
    EmptyCover,
    #[error("({a}, {b}) is empty")]
    EmptyInterval { a: Rational, b: Rational },
    #[error("no sample points")]
    NoSamples,
    #[error("sample point {0} lies outside [0,1]")]
    SampleOutOfRange(Rational),
    #[error("element index {index} out of range (cover has {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Rational(#[from] RationalError),
}

/// The open interval `(a, b)` with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpenInterval {
    a: Rational,
    b: Rational,
}

impl OpenInterval {
    pub fn new(a: Rational, b: Rational) -> Result<Self, CoverError> {
        if a >= b {
            return Err(CoverError::EmptyInterval { a, b });
        }
        Ok(OpenInterval { a, b })
    }

    pub fn left(&self) -> &Rational {
        &self.a
    }

    pub fn right(&self) -> &Rational {
        &self.b
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.a < x && x < &self.b
    }

    /// `(center - r, center + r) ⊆ (a, b)`.
    pub fn contains_ball(&self, center: &Rational, radius: &Rational) -> bool {
        self.a <= center - radius && &(center + radius) <= &self.b
    }

    /// `min(x - a, b - x)`: the largest radius whose ball at `x` fits, when
    /// positive.
    pub fn margin(&self, x: &Rational) -> Rational {
        (x - &self.a).min(&self.b - x)
    }
}

impl fmt::Display for OpenInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// A finite, ordered list of cover elements. Positions are element ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoverList {
    elements: Vec<OpenInterval>,
}

impl CoverList {
    pub fn new(elements: Vec<OpenInterval>) -> Self {
        CoverList { elements }
    }

    /// Convenience for literal covers; panics on an empty interval.
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        CoverList::new(
            pairs
                .into_iter()
                .map(|(a, b)| OpenInterval::new(a, b).expect("non-empty interval"))
                .collect(),
        )
    }

    pub fn elements(&self) -> &[OpenInterval] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, index: usize) -> Result<&OpenInterval, CoverError> {
        self.elements.get(index).ok_or(CoverError::IndexOutOfRange {
            index,
            len: self.elements.len(),
        })
    }

    /// `max_j min(x - a_j, b_j - x)`, the best containment margin at `x`.
    pub fn envelope(&self, x: &Rational) -> Option<Rational> {
        self.elements.iter().map(|e| e.margin(x)).max()
    }
}

impl FromStr for CoverList {
    type Err = CoverError;

    /// One `a b` pair per line; `#` starts a comment.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut elements = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| CoverError::Parse {
                line: lineno + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [a, b] = fields.as_slice() else {
                return Err(parse_err(format!(
                    "expected two rationals `a b`, found {} field(s)",
                    fields.len()
                )));
            };
            let a: Rational = a.parse().map_err(|e| parse_err(format!("{e}")))?;
            let b: Rational = b.parse().map_err(|e| parse_err(format!("{e}")))?;
            elements.push(OpenInterval::new(a, b).map_err(|e| parse_err(format!("{e}")))?);
        }
        Ok(CoverList { elements })
    }
}

impl fmt::Display for CoverList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.elements {
            writeln!(f, "{} {}", e.a, e.b)?;
        }
        Ok(())
    }
}

/// Points where the envelope of a cover can attain its minimum on `[0,1]`.
///
/// Every margin function is a tent with slopes `+1` and `-1`, so the minimum
/// of their upper envelope sits at `0`, `1`, or where a rising piece
/// `x - a_j` meets a falling piece `b_k - x`, i.e. at `(a_j + b_k) / 2`.
/// Endpoints inside `[0,1]` are included as well.
fn lebesgue_candidates(cover: &CoverList) -> BTreeSet<Rational> {
    let unit = |x: &Rational| !x.is_negative() && x <= &Rational::one();
    let mut points = BTreeSet::from([Rational::zero(), Rational::one()]);
    for e in &cover.elements {
        points.extend([e.a.clone(), e.b.clone()].into_iter().filter(unit));
        for other in &cover.elements {
            let mid = e.a.midpoint(&other.b);
            if unit(&mid) {
                points.insert(mid);
            }
        }
    }
    points
}

/// The exact Lebesgue number of `cover` on `[0,1]`:
/// `min over x in [0,1] of max_j min(x - a_j, b_j - x)`.
///
/// Fails with `NotACover` when that minimum is not positive, reporting the
/// minimizing point.
pub fn lebesgue_number(cover: &CoverList) -> Result<Rational, CoverError> {
    lebesgue_point(cover).map(|(_, margin)| margin)
}

/// Like [`lebesgue_number`], but also returns the leftmost candidate point
/// attaining the minimum.
pub fn lebesgue_point(cover: &CoverList) -> Result<(Rational, Rational), CoverError> {
    if cover.is_empty() {
        return Err(CoverError::EmptyCover);
    }
    let (x, margin) = lebesgue_candidates(cover)
        .into_iter()
        .map(|x| {
            let m = cover.envelope(&x).expect("cover is non-empty");
            (x, m)
        })
        .min_by(|(x1, m1), (x2, m2)| m1.cmp(m2).then_with(|| x1.cmp(x2)))
        .expect("candidate set always holds 0 and 1");
    if !margin.is_positive() {
        return Err(CoverError::NotACover { x, margin });
    }
    Ok((x, margin))
}

/// A user-supplied radius oracle, used to exercise rejection of moduli that
/// are not constant.
#[derive(Clone)]
pub struct SampledOracle {
    name: String,
    f: Arc<dyn Fn(&Rational) -> Rational + Send + Sync>,
}

impl SampledOracle {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Rational) -> Rational + Send + Sync + 'static,
    ) -> Self {
        SampledOracle {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        (self.f)(x)
    }
}

impl fmt::Debug for SampledOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SampledOracle({})", self.name)
    }
}

/// The radius-choosing procedure `E` of a nice cover.
#[derive(Debug, Clone)]
pub enum NiceModulus {
    Constant(Rational),
    /// The exact Lebesgue number of the given cover, at every point.
    LebesgueDerived(CoverList),
    SampledOracle(SampledOracle),
}

impl NiceModulus {
    pub fn lebesgue(cover: &CoverList) -> Self {
        NiceModulus::LebesgueDerived(cover.clone())
    }

    pub fn radius_at(&self, x: &Rational) -> Result<Rational, CoverError> {
        match self {
            NiceModulus::Constant(r) => Ok(r.clone()),
            NiceModulus::LebesgueDerived(cover) => lebesgue_number(cover),
            NiceModulus::SampledOracle(oracle) => Ok(oracle.eval(x)),
        }
    }
}

/// `0`, `1/2`, `1`.
pub fn default_samples() -> Vec<Rational> {
    vec![Rational::zero(), Rational::frac(1, 2), Rational::one()]
}

/// Evaluates the modulus at every sample and returns the common radius.
///
/// Two samples with different radii mean the modulus is not the constant
/// function a total computable modulus must be; the first disagreeing pair
/// (against the first sample) is reported.
pub fn extract_constant_radius(
    modulus: &NiceModulus,
    samples: &[Rational],
) -> Result<Rational, CoverError> {
    let Some(first) = samples.first() else {
        return Err(CoverError::NoSamples);
    };
    if let Some(bad) = samples
        .iter()
        .find(|x| x.is_negative() || *x > &Rational::one())
    {
        return Err(CoverError::SampleOutOfRange(bad.clone()));
    }
    if let NiceModulus::LebesgueDerived(cover) = modulus {
        // identical at every point by construction
        let r = lebesgue_number(cover)?;
        return if r.is_positive() {
            Ok(r)
        } else {
            Err(CoverError::NonpositiveRadius(r))
        };
    }
    let r = modulus.radius_at(first)?;
    for q in &samples[1..] {
        let rq = modulus.radius_at(q)?;
        if rq != r {
            return Err(CoverError::NotNiceCover {
                p: first.clone(),
                q: q.clone(),
                radius_p: r,
                radius_q: rq,
            });
        }
    }
    if !r.is_positive() {
        return Err(CoverError::NonpositiveRadius(r));
    }
    Ok(r)
}

/// The grid `0, eps, 2 eps, ..., floor(1/eps) eps`, with `1` appended when
/// it is not already on the grid. Every point of `[0,1]` lies within
/// `eps / 2` of the net.
pub fn build_eps_net(eps: &Rational) -> Result<Vec<Rational>, CoverError> {
    if !eps.is_positive() {
        return Err(CoverError::NonpositiveRadius(eps.clone()));
    }
    let one = Rational::one();
    let mut net = Vec::new();
    let mut point = Rational::zero();
    while point <= one {
        net.push(point.clone());
        point = point + eps;
    }
    if net.last() != Some(&one) {
        net.push(one);
    }
    Ok(net)
}

/// Smallest index whose element contains the ball `(center - r, center + r)`.
pub fn find_containing_element(
    cover: &CoverList,
    center: &Rational,
    radius: &Rational,
) -> Result<usize, CoverError> {
    if !radius.is_positive() {
        return Err(CoverError::NonpositiveRadius(radius.clone()));
    }
    cover
        .elements
        .iter()
        .position(|e| e.contains_ball(center, radius))
        .ok_or_else(|| CoverError::NoContainingElement {
            center: center.clone(),
            radius: radius.clone(),
        })
}

/// Radius, net, per-point element choices, and the resulting subcover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubcoverCertificate {
    pub r: Rational,
    pub net: Vec<Rational>,
    /// `(net index, element index)`, one per net point in net order.
    pub assignments: Vec<(usize, usize)>,
    /// Sorted, deduplicated element indices.
    pub selected: Vec<usize>,
}

/// Runs the full pipeline with the default constancy samples.
pub fn extract_finite_subcover(
    cover: &CoverList,
    modulus: &NiceModulus,
) -> Result<SubcoverCertificate, CoverError> {
    extract_finite_subcover_with_samples(cover, modulus, &default_samples())
}

pub fn extract_finite_subcover_with_samples(
    cover: &CoverList,
    modulus: &NiceModulus,
    samples: &[Rational],
) -> Result<SubcoverCertificate, CoverError> {
    if cover.is_empty() {
        return Err(CoverError::EmptyCover);
    }
    let r = extract_constant_radius(modulus, samples)?;
    let net = build_eps_net(&r)?;
    let assignments = net
        .iter()
        .enumerate()
        .map(|(i, c)| find_containing_element(cover, c, &r).map(|j| (i, j)))
        .collect::<Result<Vec<_>, _>>()?;
    let selected: BTreeSet<usize> = assignments.iter().map(|&(_, j)| j).collect();
    Ok(SubcoverCertificate {
        r,
        net,
        assignments,
        selected: selected.into_iter().collect(),
    })
}

impl fmt::Display for SubcoverCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "r={}", self.r)?;
        for &(i, j) in &self.assignments {
            writeln!(f, "net {} -> element {}", self.net[i], j)?;
        }
        let selected: Vec<String> = self.selected.iter().map(usize::to_string).collect();
        writeln!(f, "selected {}", selected.join(","))
    }
}

/// Parses a comma-separated list of element indices such as `0,2,5`.
pub fn parse_index_list(text: &str) -> Result<Vec<usize>, CoverError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| CoverError::Parse {
                line: 1,
                message: format!("bad element index {s:?}"),
            })
        })
        .collect()
}

impl FromStr for SubcoverCertificate {
    type Err = CoverError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut r = None;
        let mut net = Vec::new();
        let mut assignments = Vec::new();
        let mut selected = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            let err = |message: String| CoverError::Parse {
                line: lineno + 1,
                message,
            };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(value) = line.strip_prefix("r=") {
                if r.is_some() {
                    return Err(err("duplicate radius line".into()));
                }
                r = Some(value.parse::<Rational>().map_err(|e| err(format!("{e}")))?);
            } else if let Some(rest) = line.strip_prefix("net ") {
                let Some((c, j)) = rest.split_once(" -> element ") else {
                    return Err(err("expected `net <c> -> element <j>`".into()));
                };
                let c: Rational = c.trim().parse().map_err(|e| err(format!("{e}")))?;
                let j: usize = j
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad element index {j:?}")))?;
                assignments.push((net.len(), j));
                net.push(c);
            } else if let Some(list) = line.strip_prefix("selected") {
                if selected.is_some() {
                    return Err(err("duplicate selected line".into()));
                }
                selected = Some(parse_index_list(list).map_err(|e| err(format!("{e}")))?);
            } else {
                return Err(err(format!("unrecognized line {line:?}")));
            }
        }
        let r = r.ok_or(CoverError::Parse {
            line: 0,
            message: "missing `r=` header".into(),
        })?;
        let selected = selected.ok_or(CoverError::Parse {
            line: 0,
            message: "missing `selected` line".into(),
        })?;
        Ok(SubcoverCertificate {
            r,
            net,
            assignments,
            selected,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coverage {
    Covered,
    /// A point of `[0,1]` in none of the intervals.
    Uncovered { x: Rational },
}

/// Sweeps `[0,1]` left to right over open intervals.
///
/// `need` is the leftmost point not yet shown to be covered. Each round takes
/// the furthest right end among intervals starting strictly left of `need`;
/// if that does not pass `need`, then `need` itself is uncovered.
fn sweep(mut intervals: Vec<(Rational, Rational)>) -> Coverage {
    intervals.sort();
    let one = Rational::one();
    let mut need = Rational::zero();
    let mut next = 0;
    let mut reach: Option<Rational> = None;
    while need <= one {
        while next < intervals.len() && intervals[next].0 < need {
            let b = &intervals[next].1;
            if reach.as_ref().is_none_or(|r| b > r) {
                reach = Some(b.clone());
            }
            next += 1;
        }
        match &reach {
            Some(r) if r > &need => need = r.clone(),
            _ => return Coverage::Uncovered { x: need },
        }
    }
    Coverage::Covered
}

/// Checks exactly whether the selected elements cover `[0,1]`.
pub fn verify_subcover(cover: &CoverList, selected: &[usize]) -> Result<Coverage, CoverError> {
    let intervals = selected
        .iter()
        .map(|&j| cover.get(j).map(|e| (e.a.clone(), e.b.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(sweep(intervals))
}

/// A reason a certificate does not prove what it claims.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertificateDefect {
    NonpositiveRadius,
    EmptyNet,
    ElementOutOfRange { net_index: usize, element: usize },
    BallNotContained { net_index: usize, element: usize },
    /// A point of `[0,1]` farther than `r` from every net point.
    NetGap { x: Rational },
    /// `selected` differs from the deduplicated assigned elements.
    SelectionMismatch,
    Uncovered { x: Rational },
}

impl fmt::Display for CertificateDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertificateDefect::NonpositiveRadius => write!(f, "radius is not positive"),
            CertificateDefect::EmptyNet => write!(f, "net is empty"),
            CertificateDefect::ElementOutOfRange { net_index, element } => {
                write!(f, "net point {net_index} names missing element {element}")
            }
            CertificateDefect::BallNotContained { net_index, element } => {
                write!(f, "ball at net point {net_index} is not inside element {element}")
            }
            CertificateDefect::NetGap { x } => write!(f, "net gap at {x}"),
            CertificateDefect::SelectionMismatch => {
                write!(f, "selected list differs from the assigned elements")
            }
            CertificateDefect::Uncovered { x } => write!(f, "uncovered {x}"),
        }
    }
}

/// Re-checks every claim in a certificate against the cover. An empty result
/// means the certificate is valid.
pub fn verify_certificate(cover: &CoverList, cert: &SubcoverCertificate) -> Vec<CertificateDefect> {
    let mut defects = Vec::new();
    if !cert.r.is_positive() {
        defects.push(CertificateDefect::NonpositiveRadius);
    }
    if cert.net.is_empty() {
        defects.push(CertificateDefect::EmptyNet);
    }
    for &(i, j) in &cert.assignments {
        match (cert.net.get(i), cover.elements.get(j)) {
            (_, None) => defects.push(CertificateDefect::ElementOutOfRange {
                net_index: i,
                element: j,
            }),
            (Some(c), Some(e)) => {
                if !e.contains_ball(c, &cert.r) {
                    defects.push(CertificateDefect::BallNotContained {
                        net_index: i,
                        element: j,
                    });
                }
            }
            (None, Some(_)) => defects.push(CertificateDefect::SelectionMismatch),
        }
    }
    if cert.r.is_positive() && !cert.net.is_empty() {
        let balls = cert
            .net
            .iter()
            .map(|c| (c - &cert.r, c + &cert.r))
            .collect();
        if let Coverage::Uncovered { x } = sweep(balls) {
            defects.push(CertificateDefect::NetGap { x });
        }
    }
    let assigned: BTreeSet<usize> = cert.assignments.iter().map(|&(_, j)| j).collect();
    let claimed: BTreeSet<usize> = cert.selected.iter().copied().collect();
    if assigned != claimed || claimed.len() != cert.selected.len() {
        defects.push(CertificateDefect::SelectionMismatch);
    }
    match verify_subcover(cover, &cert.selected) {
        Ok(Coverage::Covered) => {}
        Ok(Coverage::Uncovered { x }) => defects.push(CertificateDefect::Uncovered { x }),
        Err(CoverError::IndexOutOfRange { index, .. }) => {
            defects.push(CertificateDefect::ElementOutOfRange {
                net_index: usize::MAX,
                element: index,
            })
        }
        Err(_) => defects.push(CertificateDefect::SelectionMismatch),
    }
    defects
}
