//! The machine model: instruction rows, opcode table, the 64-entry operand
//! address space, 32 relay registers, four cyclic memories with post-read
//! advance, and single-instruction semantics.
//!
//! Registers are stored bit-exact as 39-bit rows, the way the relays held
//! them; reads decode the row, and writes store a normalized number. The
//! operand space partitions as addresses 0–27 constants, 28–31 the cyclic
//! registers Y0–Y3, 32–63 the internal registers R0–R31.

use std::fmt;

use thiserror::Error;

use crate::alu::{self, Transform};
use crate::control;
use crate::image::PlugboardImage;
use crate::numeric::{decode_row, encode_row, format_number, OpremaNumber, Row39, Special};

pub const PROGRAM_ROWS: u16 = 300;
pub const CONSTANT_ROWS: u8 = 28;
pub const CYCLIC_UNITS: u8 = 4;
pub const CYCLIC_ROWS_PER_UNIT: u16 = 80;
pub const REGISTERS: u8 = 32;

/// One 27-bit instruction row: `Adr1(6) Op(6) Adr2(6) Adr3(5) Adr4(4)`,
/// Adr1 in the most significant bits. For packing, bit 1 of the row is the
/// least significant bit of the value (the low end of the Adr4 nibble).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Row27(u32);

impl Row27 {
    pub const ZERO: Row27 = Row27(0);
    const MASK: u32 = (1 << 27) - 1;

    pub fn from_bits(bits: u32) -> Row27 {
        assert!(bits <= Self::MASK, "more than 27 bits");
        Row27(bits)
    }

    pub fn bits(&self) -> u32 {
        self.0
    }

    pub fn bit(&self, i: u8) -> bool {
        assert!((1..=27).contains(&i));
        self.0 >> (i - 1) & 1 == 1
    }

    pub fn flip_bit(&mut self, i: u8) {
        assert!((1..=27).contains(&i));
        self.0 ^= 1 << (i - 1);
    }

    pub fn to_bytes(&self) -> [u8; 4] {
        self.0.to_le_bytes()
    }

    pub fn from_bytes(bytes: [u8; 4]) -> Result<Row27, DecodeError> {
        let bits = u32::from_le_bytes(bytes);
        if bits > Self::MASK {
            return Err(DecodeError::PaddingBitSet);
        }
        Ok(Row27(bits))
    }

    pub fn fields(adr1: u8, op: u8, adr2: u8, adr3: u8, adr4: u8) -> Row27 {
        assert!(adr1 < 64 && op < 64 && adr2 < 64 && adr3 < 32 && adr4 < 16);
        Row27(
            (adr1 as u32) << 21
                | (op as u32) << 15
                | (adr2 as u32) << 9
                | (adr3 as u32) << 4
                | adr4 as u32,
        )
    }

    pub fn adr1(&self) -> u8 {
        (self.0 >> 21) as u8 & 0x3f
    }

    pub fn op_field(&self) -> u8 {
        (self.0 >> 15) as u8 & 0x3f
    }

    pub fn adr2(&self) -> u8 {
        (self.0 >> 9) as u8 & 0x3f
    }

    pub fn adr3(&self) -> u8 {
        (self.0 >> 4) as u8 & 0x1f
    }

    pub fn adr4(&self) -> u8 {
        self.0 as u8 & 0x0f
    }

    /// Replaces the Adr4 socket nibble, which is derived from the wiring.
    pub fn with_adr4(&self, adr4: u8) -> Row27 {
        assert!(adr4 < 16);
        Row27(self.0 & !0x0f | adr4 as u32)
    }
}

/// Adr4 socket bits: two for conditional jumps, two for unconditional. The
/// left socket of a pair marks an outgoing cable on this row, the right
/// socket an incoming cable (targeting the next row).
pub const ADR4_COND_LEFT: u8 = 0b1000;
pub const ADR4_COND_RIGHT: u8 = 0b0100;
pub const ADR4_UNCOND_LEFT: u8 = 0b0010;
pub const ADR4_UNCOND_RIGHT: u8 = 0b0001;

/// The operation proper: five bits select one of the 25 used operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpcodeKind {
    /// Codes 0–15: the sixteen additions, two transform bits per operand.
    Add(Transform, Transform),
    /// 16: `Adr3 := (Adr1) × (Adr2)`
    Mul,
    /// 17: `Adr3 := (Adr1) / (Adr2)`
    Div,
    /// 18: `Adr3 := +√(Adr2)`
    SqrtPos,
    /// 19: `Adr3 := -√(Adr2)`
    SqrtNeg,
    /// 20: `if (Adr1) > 0 then goto Adr4c`
    Jgt,
    /// 21: `if (Adr1) = 0 then goto Adr4c`
    Jze,
    /// 22: `if (Adr1) = ∞ then goto Adr4c`
    Jinf,
    /// 23: `Adr3 := (Adr1)`
    Mov,
    /// 24: end of computation (loop stop)
    Stop,
}

impl OpcodeKind {
    pub fn code(&self) -> u8 {
        match self {
            OpcodeKind::Add(t1, t2) => t1.code() * 4 + t2.code(),
            OpcodeKind::Mul => 16,
            OpcodeKind::Div => 17,
            OpcodeKind::SqrtPos => 18,
            OpcodeKind::SqrtNeg => 19,
            OpcodeKind::Jgt => 20,
            OpcodeKind::Jze => 21,
            OpcodeKind::Jinf => 22,
            OpcodeKind::Mov => 23,
            OpcodeKind::Stop => 24,
        }
    }

    pub fn from_code(code: u8) -> Result<OpcodeKind, DecodeError> {
        Ok(match code {
            0..=15 => OpcodeKind::Add(
                Transform::from_code(code / 4),
                Transform::from_code(code % 4),
            ),
            16 => OpcodeKind::Mul,
            17 => OpcodeKind::Div,
            18 => OpcodeKind::SqrtPos,
            19 => OpcodeKind::SqrtNeg,
            20 => OpcodeKind::Jgt,
            21 => OpcodeKind::Jze,
            22 => OpcodeKind::Jinf,
            23 => OpcodeKind::Mov,
            24 => OpcodeKind::Stop,
            _ => return Err(DecodeError::InvalidOpcode(code)),
        })
    }

    /// Operations that store a result into a register.
    pub fn writes(&self) -> bool {
        matches!(
            self,
            OpcodeKind::Add(..)
                | OpcodeKind::Mul
                | OpcodeKind::Div
                | OpcodeKind::SqrtPos
                | OpcodeKind::SqrtNeg
                | OpcodeKind::Mov
        )
    }

    pub fn is_jump(&self) -> bool {
        matches!(self, OpcodeKind::Jgt | OpcodeKind::Jze | OpcodeKind::Jinf)
    }
}

/// Five opcode bits plus the print bit (bit 6 of the op field).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Opcode {
    pub kind: OpcodeKind,
    pub print: bool,
}

impl Opcode {
    pub fn op_field(&self) -> u8 {
        self.kind.code() | (self.print as u8) << 5
    }

    pub fn from_op_field(field: u8) -> Result<Opcode, DecodeError> {
        Ok(Opcode {
            kind: OpcodeKind::from_code(field & 0x1f)?,
            print: field & 0x20 != 0,
        })
    }
}

/// A decoded instruction with its jump targets resolved from the wiring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Instruction {
    pub adr1: u8,
    pub opcode: Opcode,
    pub adr2: u8,
    pub adr3: u8,
    pub cond_target: Option<u16>,
    pub uncond_target: Option<u16>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("opcode {0} is not one of the 25 used operations")]
    InvalidOpcode(u8),
    #[error("row {row}: Adr4 socket bits do not match the jumper cables ({detail})")]
    WiringMismatch { row: u16, detail: String },
    #[error("row {row}: Adr3 (register {reg}) aliases an input address of a writing operation")]
    WriteConflict { row: u16, reg: u8 },
    #[error("padding bits beyond bit 27 are set")]
    PaddingBitSet,
}

/// The jumper cables touching one program row, as resolved from the image's
/// wiring lists.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RowWiring {
    /// Outgoing conditional cable from this row.
    pub cond_target: Option<u16>,
    /// Outgoing unconditional cable from this row.
    pub uncond_target: Option<u16>,
    /// This row's right conditional socket holds an incoming cable.
    pub cond_incoming: bool,
    /// This row's right unconditional socket holds an incoming cable.
    pub uncond_incoming: bool,
}

impl RowWiring {
    pub fn adr4(&self) -> u8 {
        let mut bits = 0;
        if self.cond_target.is_some() {
            bits |= ADR4_COND_LEFT;
        }
        if self.cond_incoming {
            bits |= ADR4_COND_RIGHT;
        }
        if self.uncond_target.is_some() {
            bits |= ADR4_UNCOND_LEFT;
        }
        if self.uncond_incoming {
            bits |= ADR4_UNCOND_RIGHT;
        }
        bits
    }
}

/// Decodes a 27-bit row, checking the socket bits against the actual cables
/// and rejecting a result address that aliases an input of a writing
/// operation.
pub fn decode_instruction(
    row: Row27,
    row_index: u16,
    wiring: &RowWiring,
) -> Result<Instruction, DecodeError> {
    let opcode = Opcode::from_op_field(row.op_field())?;
    if row.adr4() != wiring.adr4() {
        return Err(DecodeError::WiringMismatch {
            row: row_index,
            detail: format!("sockets {:04b}, cables {:04b}", row.adr4(), wiring.adr4()),
        });
    }
    let instr = Instruction {
        adr1: row.adr1(),
        opcode,
        adr2: row.adr2(),
        adr3: row.adr3(),
        cond_target: wiring.cond_target,
        uncond_target: wiring.uncond_target,
    };
    if opcode.kind.writes() {
        let dest = instr.adr3 + 32;
        if dest == instr.adr1 || dest == instr.adr2 {
            return Err(DecodeError::WriteConflict {
                row: row_index,
                reg: instr.adr3,
            });
        }
    }
    Ok(instr)
}

/// Where an operand address points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperandSource {
    Constant(u8),
    Cyclic(u8),
    Register(u8),
}

/// Total and disjoint over 0..=63: 28 constants + 4 cyclic + 32 registers.
pub fn operand_source(addr: u8) -> OperandSource {
    assert!(addr < 64);
    match addr {
        0..=27 => OperandSource::Constant(addr),
        28..=31 => OperandSource::Cyclic(addr - 28),
        _ => OperandSource::Register(addr - 32),
    }
}

pub fn operand_name(addr: u8) -> String {
    match operand_source(addr) {
        OperandSource::Constant(i) => format!("C{i}"),
        OperandSource::Cyclic(i) => format!("Y{i}"),
        OperandSource::Register(i) => format!("R{i}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Running,
    Idle,
}

/// The full mutable state of one machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineState {
    pub pc: u16,
    registers: [Row39; 32],
    pub cyclic_pos: [usize; 4],
    pub mode: Mode,
    pub pulse_count: u64,
    pub steps_executed: u64,
    pub output: Vec<String>,
    pub stop_latch: bool,
}

impl MachineState {
    /// Fresh machine positioned by the image's start configuration; the
    /// registers power up holding the special zero.
    pub fn new(image: &PlugboardImage) -> MachineState {
        MachineState {
            pc: image.start.pc,
            registers: [encode_row(&OpremaNumber::zero()); 32],
            cyclic_pos: image.start.positions.map(|p| p as usize),
            mode: Mode::Idle,
            pulse_count: 0,
            steps_executed: 0,
            output: Vec::new(),
            stop_latch: false,
        }
    }

    pub fn register_row(&self, i: u8) -> Row39 {
        self.registers[i as usize]
    }

    pub fn set_register_row(&mut self, i: u8, row: Row39) {
        self.registers[i as usize] = row;
    }

    /// Decoded register content; a corrupted, undecodable row reads as
    /// indeterminate.
    pub fn register(&self, i: u8) -> OpremaNumber {
        decode_row(self.registers[i as usize]).unwrap_or_else(|_| OpremaNumber::indeterminate())
    }

    /// Stores a value, normalized, as every register write on the machine
    /// was.
    pub fn write_register(&mut self, i: u8, value: &OpremaNumber) {
        let normalized = alu::normalize_number(value).value;
        self.registers[i as usize] = encode_row(&normalized);
    }
}

/// Everything one instruction did, for tracing and for the twin comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub pc: u16,
    pub instruction: Instruction,
    /// Register written and the value stored there.
    pub written: Option<(u8, OpremaNumber)>,
    pub printed: Option<String>,
    /// Operands read, in read order, as `(address, value)`.
    pub operands: Vec<(u8, OpremaNumber)>,
    pub next_pc: u16,
    pub halted: bool,
    pub pulses: u32,
    pub warnings: Vec<String>,
}

/// Reads one operand. Constants and cyclic rows decode and normalize on the
/// way in; a cyclic read advances its unit afterwards, following any
/// cycle-shortening jump; register reads are verbatim and side-effect free.
/// An unplugged row reads as the special zero, a corrupted row as
/// indeterminate, each with a diagnostic.
///
/// The advance happens per read access: an instruction addressing the same
/// cyclic unit through both Adr1 and Adr2 consumes two cells.
pub fn read_operand(
    state: &mut MachineState,
    image: &PlugboardImage,
    addr: u8,
    warnings: &mut Vec<String>,
) -> OpremaNumber {
    match operand_source(addr) {
        OperandSource::Constant(i) => match image.constant(i) {
            Some(row) => decode_normalized(row, &format!("C{i}"), warnings),
            None => {
                warnings.push(format!("C{i}: unplugged constant row reads as zero"));
                OpremaNumber::zero()
            }
        },
        OperandSource::Cyclic(unit) => {
            let table = image.cyclic(unit);
            if table.is_empty() {
                warnings.push(format!("Y{unit}: empty cyclic memory reads as zero"));
                return OpremaNumber::zero();
            }
            let pos = state.cyclic_pos[unit as usize] % table.len();
            let value =
                decode_normalized(table.row(pos as u16), &format!("Y{unit}[{pos}]"), warnings);
            state.cyclic_pos[unit as usize] = table.next_position(pos);
            value
        }
        OperandSource::Register(i) => match decode_row(state.register_row(i)) {
            Ok(n) => n,
            Err(e) => {
                warnings.push(format!("R{i}: corrupted row ({e}) reads as indet"));
                OpremaNumber::indeterminate()
            }
        },
    }
}

fn decode_normalized(row: Row39, what: &str, warnings: &mut Vec<String>) -> OpremaNumber {
    match decode_row(row) {
        Ok(n) => {
            let normalized = alu::normalize_number(&n);
            // a deeply unnormalized row can leave the exponent range while
            // shifting up; reads folding to zero deserve a note
            if normalized.status.exp_underflow {
                warnings.push(format!("{what}: normalization underflowed to zero"));
            }
            normalized.value
        }
        Err(e) => {
            warnings.push(format!("{what}: corrupted row ({e}) reads as indet"));
            OpremaNumber::indeterminate()
        }
    }
}

fn successor(pc: u16) -> u16 {
    // instruction 299 is followed by instruction 0
    (pc + 1) % PROGRAM_ROWS
}

/// Executes one decoded instruction and applies every effect to the state:
/// the register write, the printed line, the program-counter update, the
/// pulse charge, and the idle transition on STOP.
pub fn execute_instruction(
    state: &mut MachineState,
    image: &PlugboardImage,
    instr: &Instruction,
) -> StepOutcome {
    let pc = state.pc;
    let mut warnings = Vec::new();
    let mut operands = Vec::new();
    let mut written = None;
    let mut printed = None;
    let mut halted = false;
    let mut jump_taken = false;

    let fallthrough = instr.uncond_target.unwrap_or_else(|| successor(pc));

    let read = |state: &mut MachineState,
                addr: u8,
                warnings: &mut Vec<String>,
                operands: &mut Vec<(u8, OpremaNumber)>| {
        let v = read_operand(state, image, addr, warnings);
        operands.push((addr, v));
        v
    };

    match instr.opcode.kind {
        OpcodeKind::Add(t1, t2) => {
            let a = read(state, instr.adr1, &mut warnings, &mut operands);
            let b = read(state, instr.adr2, &mut warnings, &mut operands);
            let r = alu::add_variant_full(&a, &b, t1, t2);
            note_status(&r, &mut warnings);
            state.write_register(instr.adr3, &r.value);
            written = Some((instr.adr3, state.register(instr.adr3)));
        }
        OpcodeKind::Mul => {
            let a = read(state, instr.adr1, &mut warnings, &mut operands);
            let b = read(state, instr.adr2, &mut warnings, &mut operands);
            let r = alu::multiply_full(&a, &b);
            note_status(&r, &mut warnings);
            state.write_register(instr.adr3, &r.value);
            written = Some((instr.adr3, state.register(instr.adr3)));
        }
        OpcodeKind::Div => {
            let a = read(state, instr.adr1, &mut warnings, &mut operands);
            let b = read(state, instr.adr2, &mut warnings, &mut operands);
            let r = alu::divide_full(&a, &b);
            note_status(&r, &mut warnings);
            state.write_register(instr.adr3, &r.value);
            written = Some((instr.adr3, state.register(instr.adr3)));
        }
        OpcodeKind::SqrtPos | OpcodeKind::SqrtNeg => {
            let a = read(state, instr.adr2, &mut warnings, &mut operands);
            let r = alu::sqrt_full(&a, instr.opcode.kind == OpcodeKind::SqrtNeg);
            note_status(&r, &mut warnings);
            state.write_register(instr.adr3, &r.value);
            written = Some((instr.adr3, state.register(instr.adr3)));
        }
        OpcodeKind::Mov => {
            let a = read(state, instr.adr1, &mut warnings, &mut operands);
            state.write_register(instr.adr3, &a);
            written = Some((instr.adr3, state.register(instr.adr3)));
        }
        OpcodeKind::Jgt | OpcodeKind::Jze | OpcodeKind::Jinf => {
            let a = read(state, instr.adr1, &mut warnings, &mut operands);
            let take = match instr.opcode.kind {
                OpcodeKind::Jgt => a.is_finite() && !a.sign().is_minus(),
                OpcodeKind::Jze => a.special_kind() == Some(Special::Zero),
                OpcodeKind::Jinf => a.special_kind() == Some(Special::Infinite),
                _ => unreachable!(),
            };
            jump_taken = take && instr.cond_target.is_some();
        }
        OpcodeKind::Stop => {
            halted = true;
        }
    }

    if instr.opcode.print {
        // Writing operations print the stored result; jumps print the value
        // they tested; STOP prints its Adr1 operand.
        let value = match (&written, operands.first()) {
            (Some((_, v)), _) => *v,
            (None, Some((_, v))) => *v,
            (None, None) => read(state, instr.adr1, &mut warnings, &mut operands),
        };
        let line = format_number(&value);
        state.output.push(line.clone());
        printed = Some(line);
    }

    let next_pc = if jump_taken {
        instr.cond_target.unwrap()
    } else {
        fallthrough
    };
    let pulses = control::pulse_cost(&instr.opcode.kind);

    state.pc = next_pc;
    state.pulse_count += pulses as u64;
    state.steps_executed += 1;
    if halted || state.stop_latch {
        state.mode = Mode::Idle;
        state.stop_latch = false;
    }

    StepOutcome {
        pc,
        instruction: *instr,
        written,
        printed,
        operands,
        next_pc,
        halted,
        pulses,
        warnings,
    }
}

fn note_status(r: &alu::AluResult, warnings: &mut Vec<String>) {
    if r.status.exp_overflow {
        warnings.push("exponent overflow: result is infinite".to_string());
    }
    if r.status.exp_underflow {
        warnings.push("exponent underflow: result is zero".to_string());
    }
}

/// Fetches, decodes and executes the instruction at the current program
/// counter. An unoccupied program row executes as an all-zero row whose
/// socket bits reflect the cables actually plugged around it.
pub fn execute_at_pc(
    state: &mut MachineState,
    image: &PlugboardImage,
) -> Result<StepOutcome, DecodeError> {
    let pc = state.pc;
    let row = image.fetch_program_row(pc);
    let wiring = image.row_wiring(pc);
    let instr = decode_instruction(row, pc, &wiring)?;
    Ok(execute_instruction(state, image, &instr))
}

impl fmt::Display for Instruction {
    /// Trace-oriented rendering with numeric jump targets.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dest = format!("R{}", self.adr3);
        let a1 = operand_name(self.adr1);
        let a2 = operand_name(self.adr2);
        match self.opcode.kind {
            OpcodeKind::Add(t1, t2) => write!(
                f,
                "ADD {} {} -> {}",
                t1.mnemonic(&a1),
                t2.mnemonic(&a2),
                dest
            )?,
            OpcodeKind::Mul => write!(f, "MUL {a1} {a2} -> {dest}")?,
            OpcodeKind::Div => write!(f, "DIV {a1} {a2} -> {dest}")?,
            OpcodeKind::SqrtPos => write!(f, "SQR {a2} -> {dest}")?,
            OpcodeKind::SqrtNeg => write!(f, "SQRN {a2} -> {dest}")?,
            OpcodeKind::Jgt => write!(f, "JGT {a1}, {}", target(self.cond_target))?,
            OpcodeKind::Jze => write!(f, "JZE {a1}, {}", target(self.cond_target))?,
            OpcodeKind::Jinf => write!(f, "JINF {a1}, {}", target(self.cond_target))?,
            OpcodeKind::Mov => write!(f, "MOV {a1} -> {dest}")?,
            OpcodeKind::Stop => write!(f, "STOP")?,
        }
        if self.opcode.print {
            write!(f, " [P]")?;
        }
        if let Some(t) = self.uncond_target {
            write!(f, " GOTO {t}")?;
        }
        Ok(())
    }
}

fn target(t: Option<u16>) -> String {
    match t {
        Some(t) => t.to_string(),
        None => "-".to_string(),
    }
}
