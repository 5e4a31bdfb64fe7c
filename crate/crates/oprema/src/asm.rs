//! Assembler and disassembler between the textual program format and the
//! plugboard image.
//!
//! A source file has four kinds of sections. `.const` plugs named numbers
//! into the constant board (names of the form `C<n>` pin a slot, other
//! names take the next free one). `.cyclic k` plugs the rows of cyclic
//! memory `k` in order; a `@jump label` line wires a cycle-shortening jump
//! out of the row above it. `.prog` holds labeled instructions; a
//! standalone `GOTO label` attaches an unconditional jumper cable to the
//! instruction above it, mirroring the physical cable, and consumes no row.
//! `.start` sets the control-desk configuration. Comments run from `;` to
//! the end of the line.
//!
//! The full grammar is spelled out in `docs/formats.md`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::alu::Transform;
use crate::image::{apply_socket_bits, ImageError, PlugboardImage, StartConfig};
use crate::machine::{operand_name, Opcode, OpcodeKind, Row27, CONSTANT_ROWS, PROGRAM_ROWS};
use crate::numeric::{decode_row, encode_row, format_number, parse_plugged, Row39};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsmError {
    #[error("line {line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("line {line}: undefined label `{label}`")]
    UndefinedLabel { line: usize, label: String },
    #[error("line {line}: duplicate label `{label}`")]
    DuplicateLabel { line: usize, label: String },
    #[error("line {line}: {section} capacity exceeded by {over}")]
    CapacityExceeded {
        line: usize,
        section: String,
        over: usize,
    },
    #[error("line {line}: result register R{reg} aliases an input address")]
    WriteConflict { line: usize, reg: u8 },
    #[error("line {line}: row already holds a cable on that socket pair")]
    DuplicateJump { line: usize },
    #[error("image: {0}")]
    Image(#[from] ImageError),
    #[error("row {row}: number row does not decode ({msg})")]
    InvalidNumberRow { row: String, msg: String },
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> AsmError {
    AsmError::Syntax {
        line,
        col,
        msg: msg.into(),
    }
}

/// A token and its 1-based column.
#[derive(Debug, Clone)]
struct Tok {
    text: String,
    col: usize,
}

/// Whitespace tokenizer; `,` separates silently, `=` separates and is kept
/// as a token, and a `;` comment runs to the end of the line.
fn tokenize(line: &str) -> Vec<Tok> {
    let line = match line.find(';') {
        Some(p) => &line[..p],
        None => line,
    };
    let mut toks = Vec::new();
    let mut cur = String::new();
    let mut start = 0usize;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() || c == ',' || c == '=' {
            if !cur.is_empty() {
                toks.push(Tok {
                    text: std::mem::take(&mut cur),
                    col: start + 1,
                });
            }
            if c == '=' {
                toks.push(Tok {
                    text: c.to_string(),
                    col: i + 1,
                });
            }
        } else {
            if cur.is_empty() {
                start = i;
            }
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        toks.push(Tok {
            text: cur,
            col: start + 1,
        });
    }
    toks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Const,
    Cyclic(u8),
    Prog,
    Start,
}

/// One laid-out program row awaiting label resolution.
#[derive(Debug, Clone)]
struct PendingRow {
    line: usize,
    row: u16,
    bits: Row27,
    /// label of a conditional target, with the line for diagnostics
    cond_label: Option<String>,
}

#[derive(Debug, Default)]
struct Layout {
    const_slots: BTreeMap<String, u8>,
    const_rows: Vec<(u8, Row39)>,
    cyclic_rows: [Vec<Row39>; 4],
    cyclic_labels: BTreeMap<(u8, String), u16>,
    cyclic_jumps: [Vec<(u16, String, usize)>; 4],
    prog_labels: BTreeMap<String, u16>,
    rows: Vec<PendingRow>,
    gotos: Vec<(u16, String, usize)>,
    start_pc: Option<(String, usize)>,
    start_positions: Option<[u16; 4]>,
}

/// Assembles source text into a plugboard image.
pub fn assemble(source: &str) -> Result<PlugboardImage, AsmError> {
    let mut layout = Layout::default();
    let mut section = Section::None;
    let mut next_row: u16 = 0;
    let mut used_rows = vec![false; PROGRAM_ROWS as usize];
    let mut prev_row: Option<u16> = None;

    for (idx, raw_line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let mut toks = tokenize(raw_line);
        if toks.is_empty() {
            continue;
        }

        // section switches
        let head = toks[0].text.to_ascii_lowercase();
        match head.as_str() {
            ".const" => {
                section = Section::Const;
                continue;
            }
            ".cyclic" => {
                let unit = toks
                    .get(1)
                    .and_then(|t| t.text.parse::<u8>().ok())
                    .filter(|&u| u < 4)
                    .ok_or_else(|| syntax(line_no, toks[0].col, ".cyclic needs a unit 0..=3"))?;
                section = Section::Cyclic(unit);
                continue;
            }
            ".prog" => {
                section = Section::Prog;
                continue;
            }
            ".start" => {
                section = Section::Start;
                continue;
            }
            _ => {}
        }

        match section {
            Section::None => {
                return Err(syntax(
                    line_no,
                    toks[0].col,
                    "statement outside any section",
                ))
            }
            Section::Const => parse_const_line(&mut layout, line_no, &toks)?,
            Section::Cyclic(unit) => parse_cyclic_line(&mut layout, unit, line_no, &toks)?,
            Section::Prog => {
                // leading label
                if toks[0].text.ends_with(':') {
                    let label = toks[0].text.trim_end_matches(':').to_string();
                    if label.is_empty() {
                        return Err(syntax(line_no, toks[0].col, "empty label"));
                    }
                    if layout.prog_labels.insert(label.clone(), next_row).is_some() {
                        return Err(AsmError::DuplicateLabel {
                            line: line_no,
                            label,
                        });
                    }
                    toks.remove(0);
                    if toks.is_empty() {
                        continue;
                    }
                }
                parse_prog_line(
                    &mut layout,
                    line_no,
                    &toks,
                    &mut next_row,
                    &mut used_rows,
                    &mut prev_row,
                )?;
            }
            Section::Start => parse_start_line(&mut layout, line_no, &toks)?,
        }
    }

    build_image(layout)
}

fn parse_const_line(layout: &mut Layout, line: usize, toks: &[Tok]) -> Result<(), AsmError> {
    // NAME = literal
    if toks.len() != 3 || toks[1].text != "=" {
        return Err(syntax(line, toks[0].col, "expected `NAME = number`"));
    }
    let name = toks[0].text.clone();
    if layout.const_slots.contains_key(&name) {
        return Err(AsmError::DuplicateLabel { line, label: name });
    }
    let slot = if let Some(n) = parse_ref(&name, 'C') {
        if n >= CONSTANT_ROWS as usize {
            return Err(AsmError::CapacityExceeded {
                line,
                section: "constants".into(),
                over: n + 1 - CONSTANT_ROWS as usize,
            });
        }
        n as u8
    } else {
        // next free slot
        let taken: Vec<u8> = layout.const_rows.iter().map(|&(s, _)| s).collect();
        match (0..CONSTANT_ROWS).find(|s| !taken.contains(s)) {
            Some(s) => s,
            None => {
                return Err(AsmError::CapacityExceeded {
                    line,
                    section: "constants".into(),
                    over: 1,
                })
            }
        }
    };
    if layout.const_rows.iter().any(|&(s, _)| s == slot) {
        return Err(syntax(
            line,
            toks[0].col,
            format!("constant slot C{slot} already plugged"),
        ));
    }
    let value =
        parse_plugged(&toks[2].text).map_err(|e| syntax(line, toks[2].col, e.to_string()))?;
    layout.const_slots.insert(name, slot);
    layout.const_rows.push((slot, encode_row(&value)));
    Ok(())
}

fn parse_cyclic_line(
    layout: &mut Layout,
    unit: u8,
    line: usize,
    toks: &[Tok],
) -> Result<(), AsmError> {
    let mut toks = toks.to_vec();
    if toks[0].text.eq_ignore_ascii_case("@jump") {
        if toks.len() != 2 {
            return Err(syntax(line, toks[0].col, "expected `@jump label`"));
        }
        let table = &layout.cyclic_rows[unit as usize];
        if table.is_empty() {
            return Err(syntax(line, toks[0].col, "@jump needs a row above it"));
        }
        let from = table.len() as u16 - 1;
        if layout.cyclic_jumps[unit as usize]
            .iter()
            .any(|&(f, _, _)| f == from)
        {
            return Err(AsmError::DuplicateJump { line });
        }
        layout.cyclic_jumps[unit as usize].push((from, toks[1].text.clone(), line));
        return Ok(());
    }
    if toks[0].text.ends_with(':') {
        let label = toks[0].text.trim_end_matches(':').to_string();
        let row = layout.cyclic_rows[unit as usize].len() as u16;
        if layout
            .cyclic_labels
            .insert((unit, label.clone()), row)
            .is_some()
        {
            return Err(AsmError::DuplicateLabel { line, label });
        }
        toks.remove(0);
        if toks.is_empty() {
            return Ok(());
        }
    }
    if toks.len() != 1 {
        return Err(syntax(
            line,
            toks[0].col,
            "expected one number per cyclic row",
        ));
    }
    if layout.cyclic_rows[unit as usize].len() >= 80 {
        return Err(AsmError::CapacityExceeded {
            line,
            section: format!("cyclic memory Y{unit}"),
            over: 1,
        });
    }
    let value =
        parse_plugged(&toks[0].text).map_err(|e| syntax(line, toks[0].col, e.to_string()))?;
    layout.cyclic_rows[unit as usize].push(encode_row(&value));
    Ok(())
}

fn parse_start_line(layout: &mut Layout, line: usize, toks: &[Tok]) -> Result<(), AsmError> {
    if toks.len() < 3 || toks[1].text != "=" {
        return Err(syntax(
            line,
            toks[0].col,
            "expected `pc = ...` or `positions = a,b,c,d`",
        ));
    }
    match toks[0].text.to_ascii_lowercase().as_str() {
        "pc" => {
            layout.start_pc = Some((toks[2].text.clone(), line));
            Ok(())
        }
        "positions" => {
            let values: Vec<&Tok> = toks[2..].iter().collect();
            if values.len() != 4 {
                return Err(syntax(line, toks[0].col, "positions needs four values"));
            }
            let mut out = [0u16; 4];
            for (slot, tok) in out.iter_mut().zip(values) {
                *slot = tok
                    .text
                    .parse()
                    .map_err(|_| syntax(line, tok.col, "position must be an integer"))?;
            }
            layout.start_positions = Some(out);
            Ok(())
        }
        other => Err(syntax(
            line,
            toks[0].col,
            format!("unknown start setting `{other}`"),
        )),
    }
}

/// `C3` -> Some(3) for prefix 'C', etc.
fn parse_ref(text: &str, prefix: char) -> Option<usize> {
    let rest = text.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

fn parse_prog_line(
    layout: &mut Layout,
    line: usize,
    toks: &[Tok],
    next_row: &mut u16,
    used_rows: &mut [bool],
    prev_row: &mut Option<u16>,
) -> Result<(), AsmError> {
    let head = toks[0].text.to_ascii_uppercase();

    if head == ".ORG" {
        let row: u16 = toks
            .get(1)
            .and_then(|t| t.text.parse().ok())
            .ok_or_else(|| syntax(line, toks[0].col, ".org needs a row number"))?;
        if row >= PROGRAM_ROWS {
            return Err(AsmError::CapacityExceeded {
                line,
                section: "program".into(),
                over: row as usize + 1 - PROGRAM_ROWS as usize,
            });
        }
        *next_row = row;
        return Ok(());
    }

    if head == "GOTO" {
        if toks.len() != 2 {
            return Err(syntax(line, toks[0].col, "expected `GOTO label`"));
        }
        let from = prev_row
            .ok_or_else(|| syntax(line, toks[0].col, "GOTO needs an instruction above it"))?;
        if layout.gotos.iter().any(|&(f, _, _)| f == from) {
            return Err(AsmError::DuplicateJump { line });
        }
        layout.gotos.push((from, toks[1].text.clone(), line));
        return Ok(());
    }

    // everything else occupies a row
    let row = *next_row;
    if row >= PROGRAM_ROWS {
        return Err(AsmError::CapacityExceeded {
            line,
            section: "program".into(),
            over: row as usize + 1 - PROGRAM_ROWS as usize,
        });
    }
    if used_rows[row as usize] {
        return Err(syntax(
            line,
            toks[0].col,
            format!("row {row} plugged twice (.org overlap)"),
        ));
    }

    // strip suffixes: [P] and @cond label, in any order at the end
    let mut print = false;
    let mut cond_label: Option<String> = None;
    let mut body: Vec<Tok> = toks.to_vec();
    loop {
        let n = body.len();
        if n >= 1 && body[n - 1].text.eq_ignore_ascii_case("[P]") {
            print = true;
            body.pop();
        } else if n >= 2 && body[n - 2].text.eq_ignore_ascii_case("@cond") {
            cond_label = Some(body[n - 1].text.clone());
            body.pop();
            body.pop();
        } else {
            break;
        }
    }

    let bits = if head == ".RAW" {
        let text = body
            .get(1)
            .ok_or_else(|| syntax(line, toks[0].col, ".raw needs a 27-bit hex value"))?;
        let hex = text.text.trim_start_matches("0x").trim_start_matches("0X");
        let bits = u32::from_str_radix(hex, 16).map_err(|_| syntax(line, text.col, "bad hex"))?;
        if bits >= 1 << 27 {
            return Err(syntax(line, text.col, "more than 27 bits"));
        }
        // the Adr4 nibble is derived from the wiring
        Row27::from_bits(bits).with_adr4(0)
    } else {
        let (fields, jump_label) = parse_statement(layout, line, &body, print)?;
        if cond_label.is_some() && jump_label.is_some() {
            return Err(AsmError::DuplicateJump { line });
        }
        if let Some(l) = jump_label {
            cond_label = Some(l);
        }
        fields
    };

    layout.rows.push(PendingRow {
        line,
        row,
        bits,
        cond_label,
    });
    used_rows[row as usize] = true;
    *prev_row = Some(row);
    *next_row = row + 1;
    Ok(())
}

/// Parses one mnemonic statement into a field row; returns the conditional
/// target label for jump mnemonics.
fn parse_statement(
    layout: &Layout,
    line: usize,
    toks: &[Tok],
    print: bool,
) -> Result<(Row27, Option<String>), AsmError> {
    let head = toks[0].text.to_ascii_uppercase();
    let opcode = |kind: OpcodeKind| Opcode { kind, print }.op_field();

    let resolve = |tok: &Tok| -> Result<u8, AsmError> { resolve_operand(layout, line, tok) };
    let dest = |at: usize| -> Result<u8, AsmError> {
        if toks.len() != at + 2 || toks[at].text != "->" {
            return Err(syntax(line, toks[0].col, "expected `-> Rk`"));
        }
        match parse_ref(&toks[at + 1].text, 'R') {
            Some(r) if r < 32 => Ok(r as u8),
            _ => Err(syntax(
                line,
                toks[at + 1].col,
                "result must be a register R0..R31",
            )),
        }
    };
    let check_conflict = |adr1: u8, adr2: u8, adr3: u8| -> Result<(), AsmError> {
        if adr3 + 32 == adr1 || adr3 + 32 == adr2 {
            Err(AsmError::WriteConflict { line, reg: adr3 })
        } else {
            Ok(())
        }
    };

    match head.as_str() {
        "ADD" => {
            if toks.len() != 5 {
                return Err(syntax(line, toks[0].col, "expected `ADD form form -> Rk`"));
            }
            let (t1, a1) = parse_form(layout, line, &toks[1])?;
            let (t2, a2) = parse_form(layout, line, &toks[2])?;
            let adr3 = dest(3)?;
            check_conflict(a1, a2, adr3)?;
            Ok((
                Row27::fields(a1, opcode(OpcodeKind::Add(t1, t2)), a2, adr3, 0),
                None,
            ))
        }
        "MUL" | "DIV" => {
            if toks.len() != 5 {
                return Err(syntax(
                    line,
                    toks[0].col,
                    format!("expected `{head} src src -> Rk`"),
                ));
            }
            let a1 = resolve(&toks[1])?;
            let a2 = resolve(&toks[2])?;
            let adr3 = dest(3)?;
            check_conflict(a1, a2, adr3)?;
            let kind = if head == "MUL" {
                OpcodeKind::Mul
            } else {
                OpcodeKind::Div
            };
            Ok((Row27::fields(a1, opcode(kind), a2, adr3, 0), None))
        }
        "SQR" | "SQRN" => {
            if toks.len() != 4 {
                return Err(syntax(
                    line,
                    toks[0].col,
                    format!("expected `{head} src -> Rk`"),
                ));
            }
            let a2 = resolve(&toks[1])?;
            let adr3 = dest(2)?;
            check_conflict(0, a2, adr3)?;
            let kind = if head == "SQR" {
                OpcodeKind::SqrtPos
            } else {
                OpcodeKind::SqrtNeg
            };
            Ok((Row27::fields(0, opcode(kind), a2, adr3, 0), None))
        }
        "MOV" => {
            if toks.len() != 4 {
                return Err(syntax(line, toks[0].col, "expected `MOV src -> Rk`"));
            }
            let a1 = resolve(&toks[1])?;
            let adr3 = dest(2)?;
            check_conflict(a1, 0, adr3)?;
            Ok((Row27::fields(a1, opcode(OpcodeKind::Mov), 0, adr3, 0), None))
        }
        "JGT" | "JZE" | "JINF" => {
            if toks.len() != 3 {
                return Err(syntax(
                    line,
                    toks[0].col,
                    format!("expected `{head} src, label`"),
                ));
            }
            let a1 = resolve(&toks[1])?;
            let kind = match head.as_str() {
                "JGT" => OpcodeKind::Jgt,
                "JZE" => OpcodeKind::Jze,
                _ => OpcodeKind::Jinf,
            };
            let label = if toks[2].text == "-" {
                None
            } else {
                Some(toks[2].text.clone())
            };
            Ok((Row27::fields(a1, opcode(kind), 0, 0, 0), label))
        }
        "STOP" => {
            if toks.len() != 1 {
                return Err(syntax(line, toks[0].col, "STOP takes no operands"));
            }
            Ok((Row27::fields(0, opcode(OpcodeKind::Stop), 0, 0, 0), None))
        }
        other => Err(syntax(
            line,
            toks[0].col,
            format!("unknown mnemonic `{other}`"),
        )),
    }
}

/// `+X`, `-X`, `+|X|`, `-|X|`.
fn parse_form(layout: &Layout, line: usize, tok: &Tok) -> Result<(Transform, u8), AsmError> {
    let t = &tok.text;
    let (transform, inner) = if let Some(rest) = t.strip_prefix("+|") {
        (Transform::Abs, rest.strip_suffix('|'))
    } else if let Some(rest) = t.strip_prefix("-|") {
        (Transform::NegAbs, rest.strip_suffix('|'))
    } else if let Some(rest) = t.strip_prefix('+') {
        (Transform::Identity, Some(rest))
    } else if let Some(rest) = t.strip_prefix('-') {
        (Transform::Negate, Some(rest))
    } else {
        return Err(syntax(
            line,
            tok.col,
            "operand form must be +x, -x, +|x| or -|x|",
        ));
    };
    let inner = inner.ok_or_else(|| syntax(line, tok.col, "unclosed |…|"))?;
    let addr = resolve_operand(
        layout,
        line,
        &Tok {
            text: inner.to_string(),
            col: tok.col,
        },
    )?;
    Ok((transform, addr))
}

fn resolve_operand(layout: &Layout, line: usize, tok: &Tok) -> Result<u8, AsmError> {
    let t = &tok.text;
    if let Some(n) = parse_ref(t, 'R') {
        if n < 32 {
            return Ok(n as u8 + 32);
        }
    } else if let Some(n) = parse_ref(t, 'Y') {
        if n < 4 {
            return Ok(n as u8 + 28);
        }
    } else if let Some(n) = parse_ref(t, 'C') {
        if n < 28 {
            return Ok(n as u8);
        }
    } else if let Some(&slot) = layout.const_slots.get(t) {
        return Ok(slot);
    }
    Err(syntax(
        line,
        tok.col,
        format!("`{t}` is not a constant name, Cn, Yn or Rn"),
    ))
}

fn build_image(layout: Layout) -> Result<PlugboardImage, AsmError> {
    let mut image = PlugboardImage::new();
    for &(slot, row) in &layout.const_rows {
        image.set_constant(slot, row)?;
    }
    for unit in 0..4u8 {
        for &row in &layout.cyclic_rows[unit as usize] {
            image.push_cyclic_row(unit, row)?;
        }
        for (from, label, line) in &layout.cyclic_jumps[unit as usize] {
            let target = layout
                .cyclic_labels
                .get(&(unit, label.clone()))
                .ok_or_else(|| AsmError::UndefinedLabel {
                    line: *line,
                    label: label.clone(),
                })?;
            image.add_cyclic_wire(unit, *from, *target)?;
        }
    }
    let resolve_prog = |label: &str, line: usize| -> Result<u16, AsmError> {
        if let Some(&row) = layout.prog_labels.get(label) {
            return Ok(row);
        }
        label
            .parse::<u16>()
            .ok()
            .filter(|&r| r < PROGRAM_ROWS)
            .ok_or(AsmError::UndefinedLabel {
                line,
                label: label.to_string(),
            })
    };
    for pending in &layout.rows {
        image.set_program_row(pending.row, pending.bits)?;
    }
    for pending in &layout.rows {
        if let Some(label) = &pending.cond_label {
            let target = resolve_prog(label, pending.line)?;
            image.add_cond_wire(pending.row, target)?;
        }
    }
    for (from, label, line) in &layout.gotos {
        let target = resolve_prog(label, *line)?;
        image.add_uncond_wire(*from, target)?;
    }
    apply_socket_bits(&mut image);
    let pc = match &layout.start_pc {
        Some((label, line)) => resolve_prog(label, *line)?,
        None => 0,
    };
    image.start = StartConfig {
        positions: layout.start_positions.unwrap_or([0; 4]),
        pc,
    };
    image.validate()?;
    Ok(image)
}

/// How full each section of an image is, for the assembler's summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Usage {
    pub instructions: usize,
    pub constants: usize,
    pub cyclic: [usize; 4],
}

pub fn usage(image: &PlugboardImage) -> Usage {
    Usage {
        instructions: image.program_len(),
        constants: image.constants_len(),
        cyclic: [
            image.cyclic(0).len(),
            image.cyclic(1).len(),
            image.cyclic(2).len(),
            image.cyclic(3).len(),
        ],
    }
}

/// Disassembles an image to source text that reassembles to a bit-identical
/// image. Rows whose opcode is not one of the 25 used operations come out
/// as `.raw` rows preserving their bits.
pub fn disassemble(image: &PlugboardImage) -> Result<String, AsmError> {
    let mut out = String::new();

    let constants: Vec<(u8, Row39)> = image.occupied_constants().collect();
    if !constants.is_empty() {
        out.push_str(".const\n");
        for (slot, row) in constants {
            let n = decode_row(row).map_err(|e| AsmError::InvalidNumberRow {
                row: format!("C{slot}"),
                msg: e.to_string(),
            })?;
            let _ = writeln!(out, "C{slot} = {}", format_number(&n));
        }
    }

    for unit in 0..4u8 {
        let table = image.cyclic(unit);
        if table.is_empty() {
            continue;
        }
        let _ = writeln!(out, ".cyclic {unit}");
        let targets: Vec<u16> = table.wiring().iter().map(|&(_, t)| t).collect();
        for (i, row) in table.rows().iter().enumerate() {
            let n = decode_row(*row).map_err(|e| AsmError::InvalidNumberRow {
                row: format!("Y{unit}[{i}]"),
                msg: e.to_string(),
            })?;
            if targets.contains(&(i as u16)) {
                let _ = write!(out, "y{unit}r{i}: ");
            }
            let _ = writeln!(out, "{}", format_number(&n));
            if let Some(&(_, t)) = table.wiring().iter().find(|&&(f, _)| f == i as u16) {
                let _ = writeln!(out, "@jump y{unit}r{t}");
            }
        }
    }

    // canonical program labels for every jump target, ascending
    let mut target_rows: Vec<u16> = image
        .cond_wiring()
        .iter()
        .chain(image.uncond_wiring())
        .map(|&(_, t)| t)
        .collect();
    target_rows.sort_unstable();
    target_rows.dedup();
    let label_of = |row: u16| -> Option<String> {
        target_rows
            .binary_search(&row)
            .ok()
            .map(|i| format!("L{i}"))
    };

    let rows: Vec<(u16, Row27)> = image.occupied_program_rows().collect();
    if !rows.is_empty() {
        out.push_str(".prog\n");
        let mut expected = 0u16;
        for (row_index, row) in rows {
            if row_index != expected {
                let _ = writeln!(out, ".org {row_index}");
            }
            expected = row_index + 1;
            if let Some(label) = label_of(row_index) {
                let _ = writeln!(out, "{label}:");
            }
            let wiring = image.row_wiring(row_index);
            let _ = writeln!(out, "{}", format_row(row, &wiring, &label_of));
            if let Some(t) = wiring.uncond_target {
                let _ = writeln!(out, "GOTO {}", label_of(t).unwrap());
            }
        }
    }

    out.push_str(".start\n");
    let _ = writeln!(out, "pc = {}", image.start.pc);
    let _ = writeln!(
        out,
        "positions = {},{},{},{}",
        image.start.positions[0],
        image.start.positions[1],
        image.start.positions[2],
        image.start.positions[3]
    );
    Ok(out)
}

fn format_row(
    row: Row27,
    wiring: &crate::machine::RowWiring,
    label_of: &dyn Fn(u16) -> Option<String>,
) -> String {
    let print_suffix = |print: bool| if print { " [P]" } else { "" };
    let cond = wiring.cond_target.map(|t| label_of(t).unwrap());
    match Opcode::from_op_field(row.op_field()) {
        Ok(op) => {
            let a1 = operand_name(row.adr1());
            let a2 = operand_name(row.adr2());
            let dest = format!("R{}", row.adr3());
            let p = print_suffix(op.print);
            let base = match op.kind {
                OpcodeKind::Add(t1, t2) => {
                    format!("ADD {} {} -> {dest}{p}", t1.mnemonic(&a1), t2.mnemonic(&a2))
                }
                OpcodeKind::Mul => format!("MUL {a1} {a2} -> {dest}{p}"),
                OpcodeKind::Div => format!("DIV {a1} {a2} -> {dest}{p}"),
                OpcodeKind::SqrtPos => format!("SQR {a2} -> {dest}{p}"),
                OpcodeKind::SqrtNeg => format!("SQRN {a2} -> {dest}{p}"),
                OpcodeKind::Mov => format!("MOV {a1} -> {dest}{p}"),
                OpcodeKind::Jgt | OpcodeKind::Jze | OpcodeKind::Jinf => {
                    let mn = match op.kind {
                        OpcodeKind::Jgt => "JGT",
                        OpcodeKind::Jze => "JZE",
                        _ => "JINF",
                    };
                    let target = cond.clone().unwrap_or_else(|| "-".to_string());
                    return format!("{mn} {a1}, {target}{p}");
                }
                OpcodeKind::Stop => format!("STOP{p}"),
            };
            match cond {
                // conditional wiring on a non-jump row
                Some(label) => format!("{base} @cond {label}"),
                None => base,
            }
        }
        Err(_) => {
            let base = format!(".raw {:#09x}", row.bits());
            match cond {
                Some(label) => format!("{base} @cond {label}"),
                None => base,
            }
        }
    }
}
