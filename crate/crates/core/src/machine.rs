//! A step-counted counter machine.
//!
//! Programs use five instructions over unbounded natural registers:
//!
//! | instruction   | effect                                                |
//! |---------------|-------------------------------------------------------|
//! | `INC r`       | `r += 1`                                              |
//! | `DEC r`       | `r -= 1`, no-op on zero                               |
//! | `JZ r label`  | jump to `label` if `r == 0`, else fall through        |
//! | `GOTO label`  | jump to `label`                                       |
//! | `HALT`        | stop                                                  |
//!
//! Every executed instruction costs exactly one step. Running off the end of
//! the program behaves like an implicit trailing `HALT` and also costs one
//! step. The input is placed in register 0; every other register starts at 0.
//!
//! Source text has one instruction per line (`;` also separates
//! instructions), `name:` label prefixes and `#` comments. An optional
//! `.registers N` directive declares the register count; without it the
//! count is one more than the highest register mentioned.
//!
//! ```
//! use constructive::machine::{run_for, Program, RunOutcome};
//!
//! let countdown: Program = "L: JZ 0 end; DEC 0; GOTO L; end: HALT".parse().unwrap();
//! assert_eq!(run_for(&countdown, 2, 100), RunOutcome::Halted { steps: 8 });
//! assert_eq!(run_for(&countdown, 2, 7), RunOutcome::StillRunning { budget: 7 });
//! ```

use std::collections::HashMap;
use std::ops::RangeInclusive;
use std::str::FromStr;

use thiserror::Error;

/// Upper bound on declared or referenced registers.
pub const MAX_REGISTERS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("invalid program at line {line}: {message}")]
    InvalidProgram { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instruction {
    Inc(usize),
    Dec(usize),
    /// Jump to the instruction index if the register is zero.
    Jz(usize, usize),
    Goto(usize),
    Halt,
}

/// A label-resolved counter-machine program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    instructions: Vec<Instruction>,
    registers: usize,
}

impl Program {
    /// Builds a program from resolved instructions, checking every jump
    /// target and register index.
    pub fn new(instructions: Vec<Instruction>, registers: usize) -> Result<Self, MachineError> {
        if registers == 0 || registers > MAX_REGISTERS {
            return Err(MachineError::InvalidProgram {
                line: 0,
                message: format!("register count must be in 1..={MAX_REGISTERS}"),
            });
        }
        for (at, inst) in instructions.iter().enumerate() {
            let (reg, target) = match *inst {
                Instruction::Inc(r) | Instruction::Dec(r) => (Some(r), None),
                Instruction::Jz(r, t) => (Some(r), Some(t)),
                Instruction::Goto(t) => (None, Some(t)),
                Instruction::Halt => (None, None),
            };
            if reg.is_some_and(|r| r >= registers) {
                return Err(MachineError::InvalidProgram {
                    line: at + 1,
                    message: format!("register index out of range (have {registers})"),
                });
            }
            if target.is_some_and(|t| t >= instructions.len()) {
                return Err(MachineError::InvalidProgram {
                    line: at + 1,
                    message: "jump target is not an instruction".into(),
                });
            }
        }
        Ok(Program {
            instructions,
            registers,
        })
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn registers(&self) -> usize {
        self.registers
    }

    /// Prepares an execution with `input` in register 0.
    pub fn start(&self, input: u64) -> Execution<'_> {
        let mut registers = vec![0u128; self.registers];
        registers[0] = u128::from(input);
        Execution {
            program: self,
            pc: 0,
            registers,
            steps: 0,
            halted: false,
        }
    }
}

struct RawLine<'a> {
    line: usize,
    mnemonic: &'a str,
    operands: Vec<&'a str>,
}

impl FromStr for Program {
    type Err = MachineError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let invalid = |line: usize, message: String| MachineError::InvalidProgram { line, message };
        let mut labels: HashMap<&str, usize> = HashMap::new();
        let mut raw: Vec<RawLine<'_>> = Vec::new();
        let mut declared: Option<usize> = None;

        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.split('#').next().unwrap_or("");
            for stmt in line.split(';') {
                let mut stmt = stmt.trim();
                while let Some((label, rest)) = stmt.split_once(':') {
                    let label = label.trim();
                    if label.is_empty()
                        || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                    {
                        return Err(invalid(lineno, format!("bad label {label:?}")));
                    }
                    if labels.insert(label, raw.len()).is_some() {
                        return Err(invalid(lineno, format!("duplicate label {label:?}")));
                    }
                    stmt = rest.trim();
                }
                if stmt.is_empty() {
                    continue;
                }
                let mut words = stmt.split_whitespace();
                let mnemonic = words.next().unwrap_or_default();
                let operands: Vec<&str> = words.collect();
                if mnemonic == ".registers" {
                    let [n] = operands.as_slice() else {
                        return Err(invalid(lineno, ".registers takes one count".into()));
                    };
                    let n = n
                        .parse()
                        .map_err(|_| invalid(lineno, format!("bad register count {n:?}")))?;
                    declared = Some(n);
                    continue;
                }
                raw.push(RawLine {
                    line: lineno,
                    mnemonic,
                    operands,
                });
            }
        }

        if let Some((label, _)) = labels.iter().find(|(_, &at)| at >= raw.len()) {
            return Err(invalid(
                raw.last().map_or(1, |r| r.line),
                format!("label {label:?} is not attached to an instruction"),
            ));
        }

        let mut highest = 0usize;
        let mut instructions = Vec::with_capacity(raw.len());
        for r in &raw {
            let reg = |s: &str| -> Result<usize, MachineError> {
                let idx: usize = s
                    .parse()
                    .map_err(|_| invalid(r.line, format!("bad register {s:?}")))?;
                if idx >= MAX_REGISTERS {
                    return Err(invalid(r.line, format!("register {idx} exceeds limit")));
                }
                Ok(idx)
            };
            let target = |s: &str| -> Result<usize, MachineError> {
                labels
                    .get(s)
                    .copied()
                    .ok_or_else(|| invalid(r.line, format!("undefined label {s:?}")))
            };
            let inst = match (r.mnemonic.to_ascii_uppercase().as_str(), r.operands.as_slice()) {
                ("INC", [a]) => Instruction::Inc(reg(a)?),
                ("DEC", [a]) => Instruction::Dec(reg(a)?),
                ("JZ", [a, l]) => Instruction::Jz(reg(a)?, target(l)?),
                ("GOTO", [l]) => Instruction::Goto(target(l)?),
                ("HALT", []) => Instruction::Halt,
                (m, ops) => {
                    return Err(invalid(
                        r.line,
                        format!("cannot parse {m} with {} operand(s)", ops.len()),
                    ))
                }
            };
            if let Instruction::Inc(x) | Instruction::Dec(x) | Instruction::Jz(x, _) = inst {
                highest = highest.max(x);
            }
            instructions.push(inst);
        }

        let registers = match declared {
            Some(n) if n <= highest => {
                return Err(invalid(
                    0,
                    format!("register {highest} used but only {n} declared"),
                ))
            }
            Some(n) => n,
            None => highest + 1,
        };
        Program::new(instructions, registers)
    }
}

/// An in-progress run that can be advanced one step at a time.
#[derive(Debug, Clone)]
pub struct Execution<'p> {
    program: &'p Program,
    pc: usize,
    // input + steps bounds every register, so u128 never overflows
    registers: Vec<u128>,
    steps: u64,
    halted: bool,
}

impl Execution<'_> {
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    pub fn registers(&self) -> &[u128] {
        &self.registers
    }

    /// Executes one instruction. Returns `true` if this step halted the run;
    /// stepping a halted run does nothing.
    pub fn step(&mut self) -> bool {
        if self.halted {
            return false;
        }
        self.steps += 1;
        match self.program.instructions.get(self.pc) {
            None | Some(Instruction::Halt) => {
                self.halted = true;
                return true;
            }
            Some(&Instruction::Inc(r)) => {
                self.registers[r] += 1;
                self.pc += 1;
            }
            Some(&Instruction::Dec(r)) => {
                self.registers[r] = self.registers[r].saturating_sub(1);
                self.pc += 1;
            }
            Some(&Instruction::Jz(r, target)) => {
                self.pc = if self.registers[r] == 0 {
                    target
                } else {
                    self.pc + 1
                };
            }
            Some(&Instruction::Goto(target)) => self.pc = target,
        }
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunOutcome {
    /// The run stopped on its `steps`-th step.
    Halted { steps: u64 },
    /// No halt within `budget` steps.
    StillRunning { budget: u64 },
}

impl RunOutcome {
    pub fn halting_steps(&self) -> Option<u64> {
        match *self {
            RunOutcome::Halted { steps } => Some(steps),
            RunOutcome::StillRunning { .. } => None,
        }
    }
}

/// Runs `program` on `input` for at most `budget` steps.
pub fn run_for(program: &Program, input: u64, budget: u64) -> RunOutcome {
    let mut exec = program.start(input);
    while exec.steps < budget {
        if exec.step() {
            return RunOutcome::Halted { steps: exec.steps };
        }
    }
    RunOutcome::StillRunning { budget }
}

/// A job that halted during dovetailing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emission {
    /// Position of the job in the list passed to [`dovetail`].
    pub job: usize,
    pub steps: u64,
}

/// Round-robin interleaving of many runs.
///
/// Each sweep gives every still-running job one more step, in list order.
/// A job is emitted the moment it halts, and the whole schedule stops once
/// `total_budget` steps have been executed across all jobs.
pub fn dovetail(jobs: &[(&Program, u64)], total_budget: u64) -> Vec<Emission> {
    let mut pending: Vec<(usize, Execution<'_>)> = jobs
        .iter()
        .enumerate()
        .map(|(job, (program, input))| (job, program.start(*input)))
        .collect();
    let mut emitted = Vec::new();
    let mut spent = 0u64;
    while !pending.is_empty() && spent < total_budget {
        let mut halted_now = Vec::new();
        for (slot, (job, exec)) in pending.iter_mut().enumerate() {
            if spent >= total_budget {
                break;
            }
            spent += 1;
            if exec.step() {
                emitted.push(Emission {
                    job: *job,
                    steps: exec.steps(),
                });
                halted_now.push(slot);
            }
        }
        for slot in halted_now.into_iter().rev() {
            pending.remove(slot);
        }
    }
    emitted
}

/// Enumerates `(input, halting_steps)` for every input in the range that
/// halts within the shared budget, in emission order.
pub fn dovetail_enumerate(
    program: &Program,
    inputs: RangeInclusive<u64>,
    total_budget: u64,
) -> Vec<(u64, u64)> {
    let jobs: Vec<(&Program, u64)> = inputs.map(|i| (program, i)).collect();
    dovetail(&jobs, total_budget)
        .into_iter()
        .map(|e| (jobs[e.job].1, e.steps))
        .collect()
}
