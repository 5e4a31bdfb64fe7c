//! The run loop and the pulse-count timing model.
//!
//! The relay control sequences advanced one relay per clock pulse, a new
//! pulse every 6⅔ ms (150 relays per second). The emulator abstracts the
//! relay chains to a pulse charge per instruction, chosen so that the four
//! published operation times come out exactly: addition 120 ms,
//! multiplication 800 ms, division 800 ms, square root 1200 ms. The pulse
//! charges for MOV, the jumps and STOP are not documented anywhere and are
//! artifact estimates. Trace timing is kept in exact rational milliseconds
//! (pulses × 20/3) so long traces cannot drift.

use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::image::PlugboardImage;
use crate::machine::{self, DecodeError, MachineState, Mode, OpcodeKind, StepOutcome};
use crate::numeric::format_number;

/// Pulse period in milliseconds, exactly 20/3: one pulse every 6⅔ ms.
pub fn pulse_period_ms() -> Ratio<u64> {
    Ratio::new(20, 3)
}

/// Pulses charged per operation.
pub fn pulse_cost(kind: &OpcodeKind) -> u32 {
    match kind {
        OpcodeKind::Add(..) => 18,
        OpcodeKind::Mul => 120,
        OpcodeKind::Div => 120,
        OpcodeKind::SqrtPos | OpcodeKind::SqrtNeg => 180,
        // Undocumented; estimates, excluded from the timing checks.
        OpcodeKind::Mov => 18,
        OpcodeKind::Jgt | OpcodeKind::Jze | OpcodeKind::Jinf => 6,
        OpcodeKind::Stop => 6,
    }
}

pub fn pulses_to_ms(pulses: u64) -> Ratio<u64> {
    Ratio::from_integer(pulses) * pulse_period_ms()
}

/// Fixed 4-decimal rendering of an exact rational millisecond count.
pub fn format_ms(ms: Ratio<u64>) -> String {
    let scaled = ms * Ratio::from_integer(10_000u64);
    // round half away from zero at the 4th decimal
    let rounded = (scaled.numer() * 2 + scaled.denom()) / (scaled.denom() * 2);
    format!("{}.{:04}", rounded / 10_000, rounded % 10_000)
}

/// One executed instruction in the trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub step: u64,
    pub pc: u16,
    pub mnemonic: String,
    pub operands: String,
    pub result: String,
    pub cumulative_pulses: u64,
    pub cumulative_ms: Ratio<u64>,
}

impl TraceRecord {
    pub(crate) fn from_outcome(outcome: &StepOutcome, state: &MachineState) -> TraceRecord {
        let operands = outcome
            .operands
            .iter()
            .map(|(addr, v)| format!("{}={}", machine::operand_name(*addr), format_number(v)))
            .collect::<Vec<_>>()
            .join(" ");
        let result = match (&outcome.written, outcome.halted) {
            (Some((reg, v)), _) => format!("R{reg}={}", format_number(v)),
            (None, true) => "halt".to_string(),
            (None, false) => format!("pc={}", outcome.next_pc),
        };
        TraceRecord {
            step: state.steps_executed,
            pc: outcome.pc,
            mnemonic: outcome.instruction.to_string(),
            operands,
            result,
            cumulative_pulses: state.pulse_count,
            cumulative_ms: pulses_to_ms(state.pulse_count),
        }
    }

    /// Tab-separated line: step, pc, mnemonic, operands, result, pulses, ms.
    pub fn line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.step,
            self.pc,
            self.mnemonic,
            self.operands,
            self.result,
            self.cumulative_pulses,
            format_ms(self.cumulative_ms)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("machine is idle; press start first")]
    Idle,
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Press the start button: an idle machine resumes at its current program
/// counter. Running machines are unaffected.
pub fn start(state: &mut MachineState) {
    state.mode = Mode::Running;
}

/// Press the stop button: the machine finishes the instruction in flight
/// and then circulates in the idle chain. Idempotent.
pub fn stop_button(state: &mut MachineState) {
    if state.mode == Mode::Running {
        state.stop_latch = true;
    }
}

/// Executes exactly one instruction and returns its trace record.
pub fn step(state: &mut MachineState, image: &PlugboardImage) -> Result<TraceRecord, StepError> {
    if state.mode != Mode::Running {
        return Err(StepError::Idle);
    }
    let outcome = machine::execute_at_pc(state, image)?;
    Ok(TraceRecord::from_outcome(&outcome, state))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunLimits {
    pub max_steps: u64,
    pub max_pulses: u64,
}

impl Default for RunLimits {
    fn default() -> RunLimits {
        RunLimits {
            max_steps: 1_000_000,
            max_pulses: u64::MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Halted,
    StepLimit,
    PulseLimit,
}

impl fmt::Display for RunOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunOutcome::Halted => write!(f, "halted"),
            RunOutcome::StepLimit => write!(f, "step limit reached"),
            RunOutcome::PulseLimit => write!(f, "pulse limit reached"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcome: RunOutcome,
    pub trace: Vec<TraceRecord>,
    pub steps: u64,
    pub total_pulses: u64,
    pub total_ms: Ratio<u64>,
}

/// Starts the machine and repeats `step` until STOP or a limit. Limits are
/// reported in-band, not as failures. Deterministic: the same state and
/// image always produce the same trace, byte for byte.
pub fn run(
    state: &mut MachineState,
    image: &PlugboardImage,
    limits: RunLimits,
) -> Result<RunReport, StepError> {
    let first_pulse = state.pulse_count;
    let mut trace = Vec::new();
    let mut steps = 0u64;
    start(state);
    let outcome = loop {
        if steps >= limits.max_steps {
            break RunOutcome::StepLimit;
        }
        if state.pulse_count - first_pulse >= limits.max_pulses {
            break RunOutcome::PulseLimit;
        }
        let record = step(state, image)?;
        trace.push(record);
        steps += 1;
        if state.mode == Mode::Idle {
            break RunOutcome::Halted;
        }
    };
    let total_pulses = state.pulse_count - first_pulse;
    Ok(RunReport {
        outcome,
        trace,
        steps,
        total_pulses,
        total_ms: pulses_to_ms(total_pulses),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{apply_socket_bits, PlugboardImage};
    use crate::machine::Row27;

    fn stop_only_image() -> PlugboardImage {
        let mut image = PlugboardImage::new();
        image
            .set_program_row(0, Row27::fields(0, 24, 0, 0, 0))
            .unwrap();
        image
    }

    #[test]
    fn timing_table_is_exact() {
        // pulse period × 150 = 1 s
        assert_eq!(
            pulse_period_ms() * Ratio::from_integer(150),
            Ratio::from_integer(1000)
        );
        use crate::alu::Transform::Identity;
        assert_eq!(
            pulses_to_ms(pulse_cost(&OpcodeKind::Add(Identity, Identity)) as u64),
            Ratio::from_integer(120)
        );
        assert_eq!(
            pulses_to_ms(pulse_cost(&OpcodeKind::Mul) as u64),
            Ratio::from_integer(800)
        );
        assert_eq!(
            pulses_to_ms(pulse_cost(&OpcodeKind::Div) as u64),
            Ratio::from_integer(800)
        );
        assert_eq!(
            pulses_to_ms(pulse_cost(&OpcodeKind::SqrtPos) as u64),
            Ratio::from_integer(1200)
        );
    }

    #[test]
    fn ms_formatting() {
        assert_eq!(format_ms(pulses_to_ms(18)), "120.0000");
        assert_eq!(format_ms(pulses_to_ms(1)), "6.6667");
    }

    #[test]
    fn stop_program_halts_in_one_step() {
        let image = stop_only_image();
        let mut state = MachineState::new(&image);
        let report = run(&mut state, &image, RunLimits::default()).unwrap();
        assert_eq!(report.outcome, RunOutcome::Halted);
        assert_eq!(report.steps, 1);
        // start after STOP resumes at the following row
        assert_eq!(state.pc, 1);
    }

    #[test]
    fn self_loop_hits_step_limit() {
        let mut image = PlugboardImage::new();
        image.set_program_row(0, Row27::ZERO).unwrap();
        image.add_uncond_wire(0, 0).unwrap();
        apply_socket_bits(&mut image);
        let mut state = MachineState::new(&image);
        let report = run(
            &mut state,
            &image,
            RunLimits {
                max_steps: 1000,
                max_pulses: u64::MAX,
            },
        )
        .unwrap();
        assert_eq!(report.outcome, RunOutcome::StepLimit);
        assert_eq!(report.steps, 1000);
    }

    #[test]
    fn idle_machine_refuses_to_step() {
        let image = stop_only_image();
        let mut state = MachineState::new(&image);
        assert_eq!(step(&mut state, &image), Err(StepError::Idle));
        start(&mut state);
        step(&mut state, &image).unwrap();
        // STOP put it back into the idle chain
        assert_eq!(step(&mut state, &image), Err(StepError::Idle));
    }

    #[test]
    fn stop_button_latches_until_instruction_boundary() {
        let mut image = PlugboardImage::new();
        image.set_program_row(0, Row27::ZERO).unwrap();
        image.set_program_row(1, Row27::ZERO).unwrap();
        let mut state = MachineState::new(&image);
        start(&mut state);
        stop_button(&mut state);
        // the in-flight instruction still completes
        let record = step(&mut state, &image).unwrap();
        assert_eq!(record.pc, 0);
        assert_eq!(state.mode, Mode::Idle);
        // and start resumes where it stopped
        start(&mut state);
        assert_eq!(step(&mut state, &image).unwrap().pc, 1);
    }

    #[test]
    fn stop_button_on_idle_machine_is_a_no_op() {
        let image = stop_only_image();
        let mut state = MachineState::new(&image);
        stop_button(&mut state);
        assert!(!state.stop_latch);
        start(&mut state);
        assert_eq!(state.mode, Mode::Running);
    }

    #[test]
    fn runs_are_deterministic_byte_for_byte() {
        let mut image = PlugboardImage::new();
        image
            .set_program_row(0, Row27::fields(1, 16, 2, 0, 0))
            .unwrap();
        image
            .set_program_row(1, Row27::fields(32, 32, 3, 1, 0))
            .unwrap();
        image
            .set_program_row(2, Row27::fields(0, 24, 0, 0, 0))
            .unwrap();
        let run_once = || {
            let mut state = MachineState::new(&image);
            let report = run(&mut state, &image, RunLimits::default()).unwrap();
            report
                .trace
                .iter()
                .map(|r| r.line())
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(run_once(), run_once());
    }

    #[test]
    fn trace_ms_is_exact_rational_of_pulses() {
        let image = stop_only_image();
        let mut state = MachineState::new(&image);
        let report = run(&mut state, &image, RunLimits::default()).unwrap();
        let rec = &report.trace[0];
        assert_eq!(rec.cumulative_ms, pulses_to_ms(rec.cumulative_pulses));
        assert!(rec.line().contains('\t'));
    }
}
