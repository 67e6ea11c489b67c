//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.
//!
//! Expected values come from oracles written here, independent of the
//! library code paths they check: exact rational evaluation of expression
//! trees, a hand-coded counter-machine simulator, a direct label function for
//! step maps, and a brute-force grid for Lebesgue numbers.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use constructive::analysis::{bisect_to_precision, waiting_crn, DiscreteMap, TargetSequence};
use constructive::cover::{
    extract_finite_subcover, lebesgue_number, lebesgue_point, verify_subcover, CoverError,
    CoverList, Coverage, NiceModulus, SampledOracle,
};
use constructive::crn::{approx_to, validate_regulator, Crn};
use constructive::machine::{dovetail, Instruction, Program};
use constructive::Rational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const COUNTDOWN: &str = "L: JZ 0 end; DEC 0; GOTO L; end: HALT";
const LOOPER: &str = "L: GOTO L";

fn prog(text: &str) -> Program {
    text.parse().expect("test program parses")
}

fn q(n: i64, d: i64) -> Rational {
    Rational::frac(n, d)
}

fn pow2_neg(n: u32) -> Rational {
    Rational::pow2_neg(n)
}

/// `1 - 2^-i`, the geometric target entry.
fn target(i: u64) -> Rational {
    Rational::one() - pow2_neg(i as u32)
}

/// Hand-coded counter-machine semantics, written separately from the
/// library interpreter. Returns the halting step, or `None` if the run is
/// still going after `cap` steps.
fn oracle_halting_step(program: &Program, input: u64, cap: u64) -> Option<u64> {
    let code = program.instructions();
    let mut regs = vec![0u128; program.registers()];
    regs[0] = input as u128;
    let mut pc = 0usize;
    for step in 1..=cap {
        if pc >= code.len() {
            return Some(step);
        }
        match code[pc] {
            Instruction::Halt => return Some(step),
            Instruction::Inc(r) => {
                regs[r] += 1;
                pc += 1;
            }
            Instruction::Dec(r) => {
                if regs[r] > 0 {
                    regs[r] -= 1;
                }
                pc += 1;
            }
            Instruction::Jz(r, t) => pc = if regs[r] == 0 { t } else { pc + 1 },
            Instruction::Goto(t) => pc = t,
        }
    }
    None
}

/// Closed form for the countdown loop: JZ, DEC, GOTO per unit, then JZ, HALT.
fn countdown_steps(input: u64) -> u64 {
    let mut r = input;
    let mut steps = 0;
    loop {
        steps += 1; // JZ
        if r == 0 {
            return steps + 1; // HALT
        }
        r -= 1;
        steps += 2; // DEC, GOTO
    }
}

fn bisection_leaf(c: &Rational) -> Crn {
    let f = DiscreteMap::step(c.clone());
    let (limit, _) = bisect_to_precision(&f, &(c - &Rational::one()), &(c + &Rational::one()), 24)
        .expect("c - 1 and c + 1 are separated by step@c");
    limit
}

/// A library-built CRN together with its exact limit.
#[derive(Clone)]
struct Leaf {
    crn: Crn,
    value: Rational,
}

fn random_leaf(rng: &mut ChaCha8Rng) -> Leaf {
    let c = q(rng.gen_range(-40..=40), rng.gen_range(1..=20));
    match rng.gen_range(0..4) {
        0 => Leaf {
            crn: Crn::from_rational(c.clone()),
            value: c,
        },
        1 => Leaf {
            crn: bisection_leaf(&c),
            value: c,
        },
        2 => Leaf {
            crn: waiting_crn(&prog(LOOPER), 0, &TargetSequence::geometric()),
            value: Rational::one(),
        },
        _ => {
            let input = rng.gen_range(0..=5);
            Leaf {
                crn: waiting_crn(&prog(COUNTDOWN), input, &TargetSequence::geometric()),
                value: target(countdown_steps(input)),
            }
        }
    }
}

/// Random `+ - *` tree of the given depth; the exact value is evaluated
/// alongside with plain rational arithmetic.
fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Leaf {
    if depth == 0 {
        return random_leaf(rng);
    }
    let a = random_expr(rng, depth - 1);
    let b = random_expr(rng, depth - 1);
    match rng.gen_range(0..3) {
        0 => Leaf {
            crn: a.crn.add(&b.crn),
            value: &a.value + &b.value,
        },
        1 => Leaf {
            crn: a.crn.sub(&b.crn),
            value: &a.value - &b.value,
        },
        _ => Leaf {
            crn: a.crn.mul(&b.crn).expect("no step budget is hit at level 0"),
            value: &a.value * &b.value,
        },
    }
}

fn regulator_law_suite() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut crns: Vec<(String, Crn)> = Vec::new();
    for (n, d) in [(0, 1), (1, 1), (-7, 3), (1, 3), (123_456_789, 1000)] {
        crns.push((format!("embed {n}/{d}"), Crn::from_rational(q(n, d))));
    }
    for input in 0..=5 {
        crns.push((
            format!("waiting countdown({input})"),
            waiting_crn(&prog(COUNTDOWN), input, &TargetSequence::geometric()),
        ));
    }
    crns.push((
        "waiting looper".into(),
        waiting_crn(&prog(LOOPER), 0, &TargetSequence::geometric()),
    ));
    for map in ["step@1/3", "step@1/7", "step@9/10", "stair:1/4,3/4"] {
        let f: DiscreteMap = map.parse().unwrap();
        let (limit, _) = bisect_to_precision(&f, &Rational::zero(), &Rational::one(), 40).unwrap();
        crns.push((format!("bisect {map}"), limit));
    }
    for k in 0..12 {
        crns.push((format!("depth-4 tree #{k}"), random_expr(&mut rng, 4).crn));
    }
    for (name, crn) in &crns {
        let report = validate_regulator(crn, 1..=32, 4).map_err(|e| format!("{name}: {e}"))?;
        ensure!(
            report.is_clean(),
            "{name}: {} violations, first {:?}",
            report.violations.len(),
            report.violations[0]
        );
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}, limit 10 s");
    Ok(format!("{} CRNs, levels 1..=32, 4 probes, zero violations", crns.len()))
}

fn approximation_accuracy() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checks = 0;
    for e in 0..100 {
        let depth = rng.gen_range(1..=3);
        let expr = random_expr(&mut rng, depth);
        for n in [8, 16, 32, 64] {
            let approx = approx_to(&expr.crn, n).map_err(|err| format!("expr {e}: {err}"))?;
            let error = (&approx - &expr.value).abs();
            ensure!(
                error <= pow2_neg(n),
                "expr {e} at level {n}: |{approx} - {}| = {error} > 2^-{n}",
                expr.value
            );
            checks += 1;
        }
    }
    Ok(format!("100 expressions, {checks} exact bound checks"))
}

fn waiting_dichotomy() -> Check {
    let countdown = prog(COUNTDOWN);
    let targets = TargetSequence::geometric();
    for input in 0..=5 {
        let k = oracle_halting_step(&countdown, input, 10_000).ok_or("countdown must halt")?;
        ensure!(k == countdown_steps(input), "simulators disagree on input {input}");
        let w = waiting_crn(&countdown, input, &targets);
        for i in 0..=64u64 {
            let got = w.term(i).map_err(|e| e.to_string())?;
            ensure!(
                got == target(i.min(k)),
                "countdown({input}) index {i}: {got} != x_{}",
                i.min(k)
            );
        }
    }
    let looper = prog(LOOPER);
    ensure!(oracle_halting_step(&looper, 0, 10_000).is_none(), "looper halted");
    let w = waiting_crn(&looper, 0, &targets);
    for i in 0..=64u64 {
        ensure!(w.term(i).map_err(|e| e.to_string())? == target(i), "looper index {i}");
    }
    Ok("countdown inputs 0..=5 and looper, indices 0..=64".into())
}

fn bisection() -> Check {
    let start = Instant::now();
    for c in [q(1, 3), q(1, 7), q(9, 10)] {
        let f = DiscreteMap::step(c.clone());
        let label = |t: &Rational| u32::from(*t >= c);
        let (_, transcript) =
            bisect_to_precision(&f, &Rational::zero(), &Rational::one(), 40).map_err(|e| e.to_string())?;
        let last = transcript.last();
        ensure!(last.index == 40, "c = {c}: transcript ends at {}", last.index);
        ensure!(&last.q - &last.p == pow2_neg(40), "c = {c}: width {}", &last.q - &last.p);
        ensure!((&last.p - &c).abs() < pow2_neg(40), "c = {c}: p_40 = {}", last.p);
        ensure!((&last.q - &c).abs() < pow2_neg(40), "c = {c}: q_40 = {}", last.q);
        for row in transcript.rows() {
            ensure!(
                label(&row.p) != label(&row.q),
                "c = {c}: row {} not separated",
                row.index
            );
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}, limit 1 s");
    Ok("step@1/3, step@1/7, step@9/10: width 2^-40, endpoints within 2^-40".into())
}

/// A shuffled cover of 3..=10 intervals: a chain of overlapping pieces that
/// overhangs 0 and 1, plus random extra intervals.
fn random_cover(rng: &mut ChaCha8Rng, den: i64) -> CoverList {
    let total = rng.gen_range(3..=10usize);
    let chain = rng.gen_range(1..=total);
    let mut cuts: Vec<i64> = (1..den).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<i64> = cuts.into_iter().take(chain - 1).collect();
    cuts.sort();
    let mut points = vec![Rational::zero()];
    points.extend(cuts.iter().map(|&k| q(k, den)));
    points.push(Rational::one());
    let mut pairs = Vec::new();
    for w in points.windows(2) {
        let left = &w[0] - &q(rng.gen_range(1..=6), den);
        let right = &w[1] + &q(rng.gen_range(1..=6), den);
        pairs.push((left, right));
    }
    while pairs.len() < total {
        let a = rng.gen_range(-2 * den / 10..den);
        let b = rng.gen_range(a + 1..=den + 2 * den / 10);
        pairs.push((q(a, den), q(b, den)));
    }
    pairs.shuffle(rng);
    CoverList::from_pairs(pairs)
}

fn generated_covers() -> Vec<CoverList> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..50)
        .map(|i| {
            // even covers live on a grid of hundredths, odd ones on a prime grid
            let den = if i % 2 == 0 { 100 } else { [7, 13, 37, 61, 97][i % 5] };
            random_cover(&mut rng, den)
        })
        .collect()
}

/// Envelope minimum over x = k/1000, evaluated directly.
fn grid_minimum(cover: &CoverList) -> Rational {
    (0..=1000)
        .map(|k| {
            let x = q(k, 1000);
            cover
                .elements()
                .iter()
                .map(|e| std::cmp::min(&x - e.left(), e.right() - &x))
                .max()
                .expect("non-empty cover")
        })
        .min()
        .expect("non-empty grid")
}

fn on_grid(x: &Rational) -> bool {
    (x * &Rational::integer(1000)).denom() == Rational::one().denom()
}

fn lebesgue_oracle() -> Check {
    let fixed = CoverList::from_pairs([(q(-1, 10), q(6, 10)), (q(4, 10), q(11, 10))]);
    let fixed_l = lebesgue_number(&fixed).map_err(|e| e.to_string())?;
    ensure!(fixed_l == q(1, 10), "fixed example gave {fixed_l}");
    ensure!(grid_minimum(&fixed) == q(1, 10), "grid oracle disagrees on fixed example");

    let (mut equal, mut strict) = (0, 0);
    for (i, cover) in generated_covers().iter().enumerate() {
        let (x, exact) = lebesgue_point(cover).map_err(|e| format!("cover {i}: {e}"))?;
        let grid = grid_minimum(cover);
        ensure!(grid >= exact, "cover {i}: grid {grid} < exact {exact}");
        if on_grid(&x) {
            ensure!(grid == exact, "cover {i}: minimizer {x} on grid but {grid} != {exact}");
            equal += 1;
        } else {
            strict += 1;
        }
    }
    Ok(format!(
        "fixed example = 1/10; 50 covers: {equal} with on-grid minimizer (equal), {strict} off-grid (grid >= exact)"
    ))
}

fn subcover_end_to_end() -> Check {
    let start = Instant::now();
    let mut drops = 0;
    let mut witnesses = 0;
    for (i, cover) in generated_covers().iter().enumerate() {
        let cert = extract_finite_subcover(cover, &NiceModulus::lebesgue(cover))
            .map_err(|e| format!("cover {i}: {e}"))?;
        let verdict = verify_subcover(cover, &cert.selected).map_err(|e| e.to_string())?;
        ensure!(verdict == Coverage::Covered, "cover {i}: certificate gives {verdict:?}");
        for drop in &cert.selected {
            let rest: Vec<usize> = cert.selected.iter().copied().filter(|j| j != drop).collect();
            drops += 1;
            match verify_subcover(cover, &rest).map_err(|e| e.to_string())? {
                Coverage::Covered => {}
                Coverage::Uncovered { x } => {
                    witnesses += 1;
                    ensure!(
                        !x.is_negative() && x <= Rational::one(),
                        "cover {i}: witness {x} outside [0,1]"
                    );
                    for &j in &rest {
                        let e = &cover.elements()[j];
                        ensure!(
                            !(e.left() < &x && &x < e.right()),
                            "cover {i}: witness {x} lies in element {j}"
                        );
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}, limit 5 s");
    Ok(format!("50 certificates verified; {drops} single drops, {witnesses} exact gap witnesses"))
}

fn adversarial_rejection() -> Check {
    let cover = CoverList::from_pairs([(q(-1, 10), q(6, 10)), (q(4, 10), q(11, 10))]);
    let oracle = |x: &Rational| if *x < q(1, 2) { q(1, 10) } else { q(1, 20) };
    let modulus = NiceModulus::SampledOracle(SampledOracle::new("split at 1/2", oracle));
    match extract_finite_subcover(&cover, &modulus) {
        Err(CoverError::NotNiceCover {
            p,
            q: qq,
            radius_p,
            radius_q,
        }) => {
            ensure!(radius_p == oracle(&p), "reported E(p) is wrong");
            ensure!(radius_q == oracle(&qq), "reported E(q) is wrong");
            ensure!(oracle(&p) != oracle(&qq), "witness pair agrees");
        }
        other => return Err(format!("expected NotNiceCover, got {other:?}")),
    }
    let gap = CoverList::from_pairs([(q(0, 1), q(1, 2)), (q(1, 2), q(1, 1))]);
    match lebesgue_number(&gap) {
        Err(CoverError::NotACover { .. }) => {}
        other => return Err(format!("expected NotACover, got {other:?}")),
    }
    Ok("non-constant oracle -> NotNiceCover; {(0,1/2),(1/2,1)} -> NotACover".into())
}

fn dovetailer() -> Check {
    let suite = [
        "HALT",
        "INC 0; INC 0; INC 0; L: JZ 0 end; DEC 0; GOTO L; end: HALT",
        "INC 1; INC 1; INC 1",
        "DEC 0; DEC 0; JZ 0 end; L: GOTO L; end: HALT",
        "INC 0; INC 0; INC 0; INC 0; INC 0; L: JZ 0 end; DEC 0; GOTO L; end: HALT",
        "INC 0; INC 0; L: JZ 0 end; DEC 0; INC 1; GOTO L; end: HALT",
        "L: GOTO L",
        "L: INC 0; GOTO L",
        "JZ 0 spin; HALT; spin: GOTO spin",
        "L: INC 1; JZ 1 end; GOTO L; end: HALT",
    ];
    let programs: Vec<Program> = suite.iter().map(|s| prog(s)).collect();
    let known: Vec<Option<u64>> = programs
        .iter()
        .map(|p| oracle_halting_step(p, 0, 100_000))
        .collect();
    let halting = known.iter().filter(|k| k.is_some()).count();
    ensure!(halting == 6, "oracle says {halting} programs halt, suite needs 6");
    let max_k = known.iter().flatten().copied().max().unwrap_or(0);

    let mut expected: Vec<(u64, usize)> = known
        .iter()
        .enumerate()
        .filter_map(|(job, k)| k.map(|k| (k, job)))
        .collect();
    expected.sort();

    let jobs: Vec<(&Program, u64)> = programs.iter().map(|p| (p, 0)).collect();
    let emitted: Vec<(u64, usize)> = dovetail(&jobs, 10 * max_k)
        .into_iter()
        .map(|e| (e.steps, e.job))
        .collect();
    ensure!(
        emitted == expected,
        "emitted {emitted:?}, expected {expected:?} (steps, job)"
    );
    Ok(format!(
        "10 programs, 6 halt (max {max_k} steps), budget {}: exact pairs in (steps, job) order",
        10 * max_k
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("regulator law on library-built CRNs", regulator_law_suite),
        ("approximation accuracy", approximation_accuracy),
        ("waiting-sequence dichotomy", waiting_dichotomy),
        ("bisection to a step discontinuity", bisection),
        ("Lebesgue number vs brute-force grid", lebesgue_oracle),
        ("finite subcover end to end", subcover_end_to_end),
        ("adversarial modulus and non-cover rejection", adversarial_rejection),
        ("dovetailing enumerator", dovetailer),
    ];
    let mut failures = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        match result {
            Ok(detail) => println!("[PASS] {}. {name}: {detail} ({elapsed:.2?})", n + 1),
            Err(why) => {
                failures += 1;
                println!("[FAIL] {}. {name}: {why} ({elapsed:.2?})", n + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
