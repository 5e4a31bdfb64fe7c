//! The twin mode the machine was designed for but never cabled: two
//! identical machines execute the same program in lockstep and their
//! results are compared after every instruction. On a disagreement both
//! machines enter the idle state and an operator policy decides how to
//! continue: repeat the instruction, insert the correct value, or switch
//! off. A fault-injection harness flips single bits to exercise the
//! comparison.
//!
//! Compared observables are architectural: the written register value
//! (bitwise, as a 39-bit row), the printed line, the next program counter,
//! and the halt flag. With the `parallel` feature the two machines advance
//! concurrently between comparison barriers; results are bit-identical to
//! the sequential A-then-B execution because the machines share nothing.

use thiserror::Error;

use crate::control::{self, TraceRecord};
use crate::image::PlugboardImage;
use crate::machine::{self, MachineState, Mode, Row27};
use crate::numeric::{format_number, OpremaNumber, Row39};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    A,
    B,
}

/// A single-bit fault location inside one machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultLocation {
    /// Bit 1..=39 of a register row.
    Register { reg: u8, bit: u8 },
    /// Bit 1..=27 of an occupied program row.
    ProgramRow { row: u16, bit: u8 },
    /// Bit 1..=39 of a plugged cyclic row.
    CyclicRow { unit: u8, row: u16, bit: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Persistence {
    /// The flip is visible for exactly one instruction evaluation; a retry
    /// sees the original bits again.
    Transient,
    /// The bit is stuck at its flipped value from the trigger on, writes
    /// notwithstanding.
    Stuck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaultSpec {
    pub machine: Which,
    /// Lockstep execution index at which the fault appears.
    pub trigger_step: u64,
    pub location: FaultLocation,
    pub persistence: Persistence,
}

#[derive(Debug, Clone)]
struct ArmedFault {
    spec: FaultSpec,
    fired: bool,
    /// Stuck value once triggered.
    stuck: Option<bool>,
    /// Original bit to restore after a transient evaluation.
    restore: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TwinError {
    #[error("machines disagree on the program counter outside a comparison ({a} vs {b})")]
    DesyncedPc { a: u16, b: u16 },
    #[error("session is not holding a mismatch")]
    NotInMismatch,
    #[error("fault targets an invalid location: {0}")]
    InvalidLocation(String),
    #[error("session has terminated")]
    Terminated,
    /// Both machines failed identically: the program is broken, the
    /// comparison is not.
    #[error("program error on both machines: {0}")]
    Program(machine::DecodeError),
}

/// What the comparator saw from one machine in one step.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Observables {
    written: Option<(u8, Row39)>,
    printed: Option<String>,
    next_pc: u16,
    halted: bool,
    decode_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MismatchDetails {
    pub step: u64,
    pub pc: u16,
    /// Name of the first differing observable.
    pub observable: String,
    pub a_value: String,
    pub b_value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MismatchRecord {
    pub details: MismatchDetails,
    pub resolution: String,
}

/// Operator continuation choices after a mismatch.
#[derive(Debug, Clone, PartialEq)]
pub enum MismatchPolicy {
    /// Rewind both machines to the mismatching instruction and re-execute.
    RepeatInstruction { max_retries: u32 },
    /// Write the supplied value into the same register of both machines and
    /// continue at the next instruction.
    InsertValue { register: u8, value: OpremaNumber },
    /// Switch the machines off.
    Halt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Phase {
    Running,
    Mismatch(MismatchDetails),
    Terminated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LockstepResult {
    Agree(TraceRecord),
    Mismatch(MismatchDetails),
}

/// Two machines, their plugboard copies (faults may diverge them), the
/// armed faults, and the mismatch log.
#[derive(Debug, Clone)]
pub struct TwinSession {
    machine_a: MachineState,
    machine_b: MachineState,
    image_a: PlugboardImage,
    image_b: PlugboardImage,
    faults: Vec<ArmedFault>,
    pub log: Vec<MismatchRecord>,
    execution_index: u64,
    phase: Phase,
    snapshot: Option<(MachineState, MachineState)>,
}

impl TwinSession {
    /// Both machines plugged with the same image, started at the same
    /// control-desk configuration.
    pub fn new(image: &PlugboardImage) -> TwinSession {
        let mut a = MachineState::new(image);
        let mut b = MachineState::new(image);
        control::start(&mut a);
        control::start(&mut b);
        TwinSession {
            machine_a: a,
            machine_b: b,
            image_a: image.clone(),
            image_b: image.clone(),
            faults: Vec::new(),
            log: Vec::new(),
            execution_index: 0,
            phase: Phase::Running,
            snapshot: None,
        }
    }

    pub fn machine(&self, which: Which) -> &MachineState {
        match which {
            Which::A => &self.machine_a,
            Which::B => &self.machine_b,
        }
    }

    pub fn in_mismatch(&self) -> bool {
        matches!(self.phase, Phase::Mismatch(_))
    }

    pub fn terminated(&self) -> bool {
        self.phase == Phase::Terminated
    }

    pub fn both_halted(&self) -> bool {
        self.machine_a.mode == Mode::Idle
            && self.machine_b.mode == Mode::Idle
            && !self.in_mismatch()
    }

    pub fn executions(&self) -> u64 {
        self.execution_index
    }

    /// Arms a fault. It stays transparent until its trigger step; a trigger
    /// beyond the program's halt never fires.
    pub fn inject_fault(&mut self, spec: FaultSpec) -> Result<(), TwinError> {
        let image = match spec.machine {
            Which::A => &self.image_a,
            Which::B => &self.image_b,
        };
        match spec.location {
            FaultLocation::Register { reg, bit } => {
                if reg >= 32 || !(1..=39).contains(&bit) {
                    return Err(TwinError::InvalidLocation(format!(
                        "register {reg} bit {bit}"
                    )));
                }
            }
            FaultLocation::ProgramRow { row, bit } => {
                if image.program_row(row).is_none() || !(1..=27).contains(&bit) {
                    return Err(TwinError::InvalidLocation(format!(
                        "program row {row} bit {bit}"
                    )));
                }
            }
            FaultLocation::CyclicRow { unit, row, bit } => {
                if unit >= 4 || row as usize >= image.cyclic(unit).len() || !(1..=39).contains(&bit)
                {
                    return Err(TwinError::InvalidLocation(format!(
                        "cyclic Y{unit} row {row} bit {bit}"
                    )));
                }
            }
        }
        self.faults.push(ArmedFault {
            spec,
            fired: false,
            stuck: None,
            restore: None,
        });
        Ok(())
    }

    fn location_bit(&self, spec: &FaultSpec) -> bool {
        let (state, image) = match spec.machine {
            Which::A => (&self.machine_a, &self.image_a),
            Which::B => (&self.machine_b, &self.image_b),
        };
        match spec.location {
            FaultLocation::Register { reg, bit } => state.register_row(reg).bit(bit),
            FaultLocation::ProgramRow { row, bit } => {
                image.program_row(row).unwrap_or(Row27::ZERO).bit(bit)
            }
            FaultLocation::CyclicRow { unit, row, bit } => image.cyclic(unit).row(row).bit(bit),
        }
    }

    fn set_location_bit(&mut self, spec: &FaultSpec, value: bool) {
        let (state, image) = match spec.machine {
            Which::A => (&mut self.machine_a, &mut self.image_a),
            Which::B => (&mut self.machine_b, &mut self.image_b),
        };
        match spec.location {
            FaultLocation::Register { reg, bit } => {
                let mut row = state.register_row(reg);
                row.set_bit(bit, value);
                state.set_register_row(reg, row);
            }
            FaultLocation::ProgramRow { row, bit } => {
                if let Some(r) = image.program_row_mut(row) {
                    let mut bits = *r;
                    if bits.bit(bit) != value {
                        bits.flip_bit(bit);
                    }
                    *r = bits;
                }
            }
            FaultLocation::CyclicRow { unit, row, bit } => {
                image.cyclic_mut(unit).row_mut(row).set_bit(bit, value);
            }
        }
    }

    /// Fires due faults and re-asserts stuck bits before an execution.
    fn apply_faults_pre(&mut self) {
        for i in 0..self.faults.len() {
            let fault = self.faults[i].clone();
            if !fault.fired && fault.spec.trigger_step == self.execution_index {
                let original = self.location_bit(&fault.spec);
                self.set_location_bit(&fault.spec, !original);
                let f = &mut self.faults[i];
                f.fired = true;
                match fault.spec.persistence {
                    Persistence::Transient => f.restore = Some(original),
                    Persistence::Stuck => f.stuck = Some(!original),
                }
            } else if let Some(v) = fault.stuck {
                self.set_location_bit(&fault.spec, v);
            }
        }
    }

    /// Clears transient flips and re-asserts stuck bits after an execution,
    /// before the comparison. A transient register flip that the
    /// instruction overwrote stays overwritten.
    fn apply_faults_post(&mut self, written_a: Option<u8>, written_b: Option<u8>) {
        for i in 0..self.faults.len() {
            let fault = self.faults[i].clone();
            if let Some(original) = fault.restore {
                let overwritten = match fault.spec.location {
                    FaultLocation::Register { reg, .. } => {
                        let written = match fault.spec.machine {
                            Which::A => written_a,
                            Which::B => written_b,
                        };
                        written == Some(reg)
                    }
                    _ => false,
                };
                if !overwritten {
                    self.set_location_bit(&fault.spec, original);
                }
                self.faults[i].restore = None;
            } else if let Some(v) = fault.stuck {
                self.set_location_bit(&fault.spec, v);
            }
        }
    }

    /// Advances both machines one instruction and compares the results.
    /// On disagreement both machines enter the idle state and the session
    /// holds the mismatch until [`TwinSession::resolve`].
    pub fn lockstep_step(&mut self) -> Result<LockstepResult, TwinError> {
        match &self.phase {
            Phase::Running => {}
            Phase::Mismatch(d) => return Ok(LockstepResult::Mismatch(d.clone())),
            Phase::Terminated => return Err(TwinError::Terminated),
        }
        if self.machine_a.pc != self.machine_b.pc {
            return Err(TwinError::DesyncedPc {
                a: self.machine_a.pc,
                b: self.machine_b.pc,
            });
        }
        let pc = self.machine_a.pc;
        self.snapshot = Some((self.machine_a.clone(), self.machine_b.clone()));
        self.apply_faults_pre();

        let (outcome_a, outcome_b) = execute_pair(
            &mut self.machine_a,
            &self.image_a,
            &mut self.machine_b,
            &self.image_b,
        );

        let written_a = outcome_a
            .as_ref()
            .ok()
            .and_then(|o| o.written.map(|(r, _)| r));
        let written_b = outcome_b
            .as_ref()
            .ok()
            .and_then(|o| o.written.map(|(r, _)| r));
        self.apply_faults_post(written_a, written_b);
        self.execution_index += 1;

        let obs_a = observe(&outcome_a, &self.machine_a);
        let obs_b = observe(&outcome_b, &self.machine_b);
        if let Some((name, av, bv)) = first_difference(&obs_a, &obs_b) {
            self.machine_a.mode = Mode::Idle;
            self.machine_b.mode = Mode::Idle;
            let details = MismatchDetails {
                step: self.execution_index - 1,
                pc,
                observable: name,
                a_value: av,
                b_value: bv,
            };
            self.phase = Phase::Mismatch(details.clone());
            return Ok(LockstepResult::Mismatch(details));
        }
        match outcome_a {
            Ok(outcome) => Ok(LockstepResult::Agree(TraceRecord::from_outcome(
                &outcome,
                &self.machine_a,
            ))),
            // both machines failed identically: a program error, not a
            // disagreement
            Err(e) => {
                self.phase = Phase::Terminated;
                self.machine_a.mode = Mode::Idle;
                self.machine_b.mode = Mode::Idle;
                Err(TwinError::Program(e))
            }
        }
    }

    /// Applies one continuation choice to a held mismatch.
    pub fn resolve(&mut self, action: &MismatchPolicy) -> Result<(), TwinError> {
        let details = match &self.phase {
            Phase::Mismatch(d) => d.clone(),
            _ => return Err(TwinError::NotInMismatch),
        };
        let resolution = match action {
            MismatchPolicy::RepeatInstruction { .. } => {
                let (a, b) = self
                    .snapshot
                    .take()
                    .expect("mismatch without a pre-step snapshot");
                self.machine_a = a;
                self.machine_b = b;
                "repeat".to_string()
            }
            MismatchPolicy::InsertValue { register, value } => {
                self.machine_a.write_register(*register, value);
                self.machine_b.write_register(*register, value);
                // continue from machine A's view of the next instruction
                self.machine_b.pc = self.machine_a.pc;
                format!("insert R{register}={}", format_number(value))
            }
            MismatchPolicy::Halt => {
                self.phase = Phase::Terminated;
                self.log.push(MismatchRecord {
                    details,
                    resolution: "halt".to_string(),
                });
                return Ok(());
            }
        };
        self.log.push(MismatchRecord {
            details,
            resolution,
        });
        self.machine_a.mode = Mode::Running;
        self.machine_b.mode = Mode::Running;
        self.phase = Phase::Running;
        Ok(())
    }
}

/// Advance both machines; with the `parallel` feature they run concurrently
/// between the comparison barriers.
#[cfg(feature = "parallel")]
fn execute_pair(
    a: &mut MachineState,
    image_a: &PlugboardImage,
    b: &mut MachineState,
    image_b: &PlugboardImage,
) -> (
    Result<machine::StepOutcome, machine::DecodeError>,
    Result<machine::StepOutcome, machine::DecodeError>,
) {
    rayon::join(
        || machine::execute_at_pc(a, image_a),
        || machine::execute_at_pc(b, image_b),
    )
}

#[cfg(not(feature = "parallel"))]
fn execute_pair(
    a: &mut MachineState,
    image_a: &PlugboardImage,
    b: &mut MachineState,
    image_b: &PlugboardImage,
) -> (
    Result<machine::StepOutcome, machine::DecodeError>,
    Result<machine::StepOutcome, machine::DecodeError>,
) {
    (
        machine::execute_at_pc(a, image_a),
        machine::execute_at_pc(b, image_b),
    )
}

fn observe(
    outcome: &Result<machine::StepOutcome, machine::DecodeError>,
    state: &MachineState,
) -> Observables {
    match outcome {
        Ok(o) => Observables {
            // the stored row, bit for bit, after any stuck enforcement
            written: o.written.map(|(reg, _)| (reg, state.register_row(reg))),
            printed: o.printed.clone(),
            next_pc: o.next_pc,
            halted: o.halted,
            decode_error: None,
        },
        Err(e) => Observables {
            written: None,
            printed: None,
            next_pc: state.pc,
            halted: false,
            decode_error: Some(e.to_string()),
        },
    }
}

fn first_difference(a: &Observables, b: &Observables) -> Option<(String, String, String)> {
    if a.decode_error != b.decode_error {
        return Some((
            "decode".into(),
            a.decode_error.clone().unwrap_or_else(|| "ok".into()),
            b.decode_error.clone().unwrap_or_else(|| "ok".into()),
        ));
    }
    if a.written != b.written {
        let show = |w: &Option<(u8, Row39)>| match w {
            Some((reg, row)) => format!("R{reg}:{}", row.hex()),
            None => "none".to_string(),
        };
        return Some(("written".into(), show(&a.written), show(&b.written)));
    }
    if a.printed != b.printed {
        let show = |p: &Option<String>| p.clone().unwrap_or_else(|| "none".into());
        return Some(("printed".into(), show(&a.printed), show(&b.printed)));
    }
    if a.next_pc != b.next_pc {
        return Some((
            "next_pc".into(),
            a.next_pc.to_string(),
            b.next_pc.to_string(),
        ));
    }
    if a.halted != b.halted {
        return Some(("halted".into(), a.halted.to_string(), b.halted.to_string()));
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwinOutcome {
    /// Program ran to its STOP on both machines (mismatches, if any, were
    /// resolved along the way).
    Completed,
    /// Policy halted the session, or the retry budget ran out.
    HaltedOnMismatch,
    StepLimit,
}

#[derive(Debug, Clone)]
pub struct TwinReport {
    pub outcome: TwinOutcome,
    pub steps: u64,
    pub mismatches: Vec<MismatchRecord>,
    pub output: Vec<String>,
}

/// Runs the session under a single scripted policy until both machines
/// halt, the policy gives up, or the step limit is reached.
pub fn run_twin(
    session: &mut TwinSession,
    policy: &MismatchPolicy,
    max_steps: u64,
) -> Result<TwinReport, TwinError> {
    let mut steps = 0u64;
    let mut retries_here = 0u32;
    let mut retry_pc = None;
    let outcome = loop {
        if steps >= max_steps {
            break TwinOutcome::StepLimit;
        }
        match session.lockstep_step()? {
            LockstepResult::Agree(_) => {
                retries_here = 0;
                retry_pc = None;
                steps += 1;
                if session.both_halted() {
                    break TwinOutcome::Completed;
                }
            }
            LockstepResult::Mismatch(details) => {
                steps += 1;
                match policy {
                    MismatchPolicy::Halt => {
                        session.resolve(&MismatchPolicy::Halt)?;
                        break TwinOutcome::HaltedOnMismatch;
                    }
                    MismatchPolicy::RepeatInstruction { max_retries } => {
                        if retry_pc == Some(details.pc) {
                            retries_here += 1;
                        } else {
                            retry_pc = Some(details.pc);
                            retries_here = 1;
                        }
                        if retries_here > *max_retries {
                            session.resolve(&MismatchPolicy::Halt)?;
                            break TwinOutcome::HaltedOnMismatch;
                        }
                        session.resolve(policy)?;
                    }
                    MismatchPolicy::InsertValue { .. } => {
                        session.resolve(policy)?;
                    }
                }
            }
        }
    };
    Ok(TwinReport {
        outcome,
        steps,
        mismatches: session.log.clone(),
        output: session.machine(Which::A).output.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{apply_socket_bits, PlugboardImage};
    use crate::numeric::{encode_row, parse_decimal};

    fn num(text: &str) -> OpremaNumber {
        parse_decimal(text).unwrap()
    }

    /// C0 + C1 -> R0 [P]; R0 + C1 -> R1; STOP
    fn small_image() -> PlugboardImage {
        let mut image = PlugboardImage::new();
        image.set_constant(0, encode_row(&num("3"))).unwrap();
        image.set_constant(1, encode_row(&num("4"))).unwrap();
        image
            .set_program_row(0, Row27::fields(0, 0x20, 1, 0, 0))
            .unwrap();
        image
            .set_program_row(1, Row27::fields(32, 0, 1, 1, 0))
            .unwrap();
        image
            .set_program_row(2, Row27::fields(0, 24, 0, 0, 0))
            .unwrap();
        apply_socket_bits(&mut image);
        image
    }

    #[test]
    fn zero_fault_runs_agree() {
        let image = small_image();
        let mut session = TwinSession::new(&image);
        let report = run_twin(&mut session, &MismatchPolicy::Halt, 100).unwrap();
        assert_eq!(report.outcome, TwinOutcome::Completed);
        assert!(report.mismatches.is_empty());
        assert_eq!(report.output, vec!["+0.70000000e+01"]);
        assert_eq!(
            session.machine(Which::A).output,
            session.machine(Which::B).output
        );
    }

    #[test]
    fn transient_register_fault_repeat_converges() {
        let image = small_image();
        let mut session = TwinSession::new(&image);
        // corrupt B's R0 before step 1 uses it
        session
            .inject_fault(FaultSpec {
                machine: Which::B,
                trigger_step: 1,
                location: FaultLocation::Register { reg: 0, bit: 3 },
                persistence: Persistence::Transient,
            })
            .unwrap();
        let report = run_twin(
            &mut session,
            &MismatchPolicy::RepeatInstruction { max_retries: 10 },
            100,
        )
        .unwrap();
        assert_eq!(report.outcome, TwinOutcome::Completed);
        assert_eq!(report.mismatches.len(), 1);
        assert_eq!(report.mismatches[0].details.step, 1);
        assert_eq!(report.mismatches[0].resolution, "repeat");
        // results agree after the retry
        assert_eq!(
            session.machine(Which::A).register(1),
            session.machine(Which::B).register(1)
        );
    }

    #[test]
    fn stuck_instruction_fault_never_converges_under_repeat() {
        let image = small_image();
        let mut session = TwinSession::new(&image);
        // flip an operand-address bit of row 1 in B, stuck
        session
            .inject_fault(FaultSpec {
                machine: Which::B,
                trigger_step: 1,
                location: FaultLocation::ProgramRow { row: 1, bit: 22 },
                persistence: Persistence::Stuck,
            })
            .unwrap();
        let report = run_twin(
            &mut session,
            &MismatchPolicy::RepeatInstruction { max_retries: 10 },
            1000,
        )
        .unwrap();
        assert_eq!(report.outcome, TwinOutcome::HaltedOnMismatch);
        // initial mismatch plus ten failed retries
        assert_eq!(
            report
                .mismatches
                .iter()
                .filter(|m| m.resolution == "repeat")
                .count(),
            10
        );
    }

    #[test]
    fn stuck_fault_resolved_by_insert() {
        let image = small_image();
        let mut session = TwinSession::new(&image);
        session
            .inject_fault(FaultSpec {
                machine: Which::B,
                trigger_step: 0,
                location: FaultLocation::ProgramRow { row: 0, bit: 22 },
                persistence: Persistence::Stuck,
            })
            .unwrap();
        let report = run_twin(
            &mut session,
            &MismatchPolicy::InsertValue {
                register: 0,
                value: num("7"),
            },
            100,
        )
        .unwrap();
        assert_eq!(report.outcome, TwinOutcome::Completed);
        assert!(!report.mismatches.is_empty());
        assert_eq!(session.machine(Which::B).register(1), num("11"));
    }

    #[test]
    fn trigger_beyond_halt_is_clean() {
        let image = small_image();
        let mut session = TwinSession::new(&image);
        session
            .inject_fault(FaultSpec {
                machine: Which::A,
                trigger_step: 100,
                location: FaultLocation::Register { reg: 0, bit: 1 },
                persistence: Persistence::Transient,
            })
            .unwrap();
        let report = run_twin(&mut session, &MismatchPolicy::Halt, 100).unwrap();
        assert_eq!(report.outcome, TwinOutcome::Completed);
        assert!(report.mismatches.is_empty());
    }

    #[test]
    fn fault_symmetry() {
        let run_with = |which: Which| {
            let image = small_image();
            let mut session = TwinSession::new(&image);
            session
                .inject_fault(FaultSpec {
                    machine: which,
                    trigger_step: 1,
                    location: FaultLocation::Register { reg: 0, bit: 3 },
                    persistence: Persistence::Transient,
                })
                .unwrap();
            let report = run_twin(&mut session, &MismatchPolicy::Halt, 100).unwrap();
            report.mismatches
        };
        let a = run_with(Which::A);
        let b = run_with(Which::B);
        assert_eq!(a.len(), 1);
        assert_eq!(b.len(), 1);
        assert_eq!(a[0].details.step, b[0].details.step);
        assert_eq!(a[0].details.observable, b[0].details.observable);
        // mirror image: the differing values swap sides
        assert_eq!(a[0].details.a_value, b[0].details.b_value);
        assert_eq!(a[0].details.b_value, b[0].details.a_value);
    }

    #[test]
    fn invalid_locations_rejected() {
        let image = small_image();
        let mut session = TwinSession::new(&image);
        for bad in [
            FaultLocation::Register { reg: 32, bit: 1 },
            FaultLocation::Register { reg: 0, bit: 40 },
            FaultLocation::ProgramRow { row: 250, bit: 1 },
            FaultLocation::CyclicRow {
                unit: 0,
                row: 0,
                bit: 1,
            },
        ] {
            assert!(matches!(
                session.inject_fault(FaultSpec {
                    machine: Which::A,
                    trigger_step: 0,
                    location: bad,
                    persistence: Persistence::Transient,
                }),
                Err(TwinError::InvalidLocation(_))
            ));
        }
    }

    #[test]
    fn resolve_requires_mismatch() {
        let image = small_image();
        let mut session = TwinSession::new(&image);
        assert_eq!(
            session.resolve(&MismatchPolicy::Halt),
            Err(TwinError::NotInMismatch)
        );
    }

    #[test]
    fn determinism_across_sessions() {
        let image = small_image();
        let spec = FaultSpec {
            machine: Which::B,
            trigger_step: 1,
            location: FaultLocation::Register { reg: 0, bit: 7 },
            persistence: Persistence::Stuck,
        };
        let run_once = || {
            let mut session = TwinSession::new(&image);
            session.inject_fault(spec).unwrap();
            let report = run_twin(&mut session, &MismatchPolicy::Halt, 100).unwrap();
            (report.outcome.clone(), report.mismatches.clone())
        };
        assert_eq!(run_once(), run_once());
    }
}
