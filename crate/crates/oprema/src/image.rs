//! The bit-exact content of one machine's plugboards: up to 300 instruction
//! rows with their jumper-cable wiring, 28 constant rows, four cyclic
//! memories of up to 80 rows each with their own cycle-shortening jumps,
//! and the control-desk start configuration. Also the `.opimg` binary file
//! format that "unplugs" an image to bytes and back.
//!
//! File layout (all integers little-endian, rows packed with bit 1 as the
//! least significant bit of their first byte):
//!
//! ```text
//! magic "OPIMG\0" | version u16 | start pc u16 | 4 × start position u16
//! program occupancy bitmap (38 bytes, row i at byte i/8 bit i%8)
//! occupied program rows ascending, 4 bytes each (27 bits + 5 zero bits)
//! cond wiring:  count u16, then (from u16, to u16) pairs
//! uncond wiring: likewise
//! constants occupancy bitmap (4 bytes, 28 bits)
//! occupied constant rows ascending, 5 bytes each (39 bits + 1 zero bit)
//! 4 × cyclic table: row count u16, rows (5 bytes each),
//!                   jump count u16, (after u16, next u16) pairs
//! ```

use thiserror::Error;

use crate::machine::{
    Row27, RowWiring, CONSTANT_ROWS, CYCLIC_ROWS_PER_UNIT, CYCLIC_UNITS, PROGRAM_ROWS, REGISTERS,
};
use crate::numeric::Row39;

const MAGIC: &[u8; 6] = b"OPIMG\0";
const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageError {
    #[error("not an image file (bad magic)")]
    BadMagic,
    #[error("unsupported image version {0}")]
    VersionUnsupported(u16),
    #[error("file truncated at offset {offset}")]
    Truncated { offset: usize },
    #[error("{section} capacity exceeded by {over} rows")]
    CapacityExceeded { section: String, over: usize },
    #[error("inconsistent wiring: {0}")]
    InconsistentWiring(String),
    #[error("malformed image at offset {offset}: {what}")]
    Malformed { offset: usize, what: String },
}

/// One cyclic memory's plugboard side: the number rows and the jump wiring
/// that shortens the cycle. At most one outgoing jump per row.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CyclicTable {
    rows: Vec<Row39>,
    wiring: Vec<(u16, u16)>,
}

impl CyclicTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: u16) -> Row39 {
        self.rows[i as usize]
    }

    pub fn row_mut(&mut self, i: u16) -> &mut Row39 {
        &mut self.rows[i as usize]
    }

    pub fn rows(&self) -> &[Row39] {
        &self.rows
    }

    pub fn wiring(&self) -> &[(u16, u16)] {
        &self.wiring
    }

    /// Position after reading `pos`: the jump if one is plugged, otherwise
    /// the next row, wrapping at the end of the plugged table.
    pub fn next_position(&self, pos: usize) -> usize {
        for &(after, next) in &self.wiring {
            if after as usize == pos {
                return next as usize;
            }
        }
        (pos + 1) % self.rows.len().max(1)
    }
}

/// Which numbers sit in the cyclic registers when execution starts, and the
/// initial program row. Both were settings at the control desk.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StartConfig {
    pub positions: [u16; 4],
    pub pc: u16,
}

/// The complete plugging of one machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlugboardImage {
    program: Vec<Option<Row27>>,
    cond_wiring: Vec<(u16, u16)>,
    uncond_wiring: Vec<(u16, u16)>,
    constants: Vec<Option<Row39>>,
    cyclic: [CyclicTable; 4],
    pub start: StartConfig,
}

impl Default for PlugboardImage {
    fn default() -> Self {
        Self::new()
    }
}

impl PlugboardImage {
    pub fn new() -> PlugboardImage {
        PlugboardImage {
            program: vec![None; PROGRAM_ROWS as usize],
            cond_wiring: Vec::new(),
            uncond_wiring: Vec::new(),
            constants: vec![None; CONSTANT_ROWS as usize],
            cyclic: Default::default(),
            start: StartConfig::default(),
        }
    }

    pub fn set_program_row(&mut self, index: u16, row: Row27) -> Result<(), ImageError> {
        if index >= PROGRAM_ROWS {
            return Err(ImageError::CapacityExceeded {
                section: "program".into(),
                over: index as usize + 1 - PROGRAM_ROWS as usize,
            });
        }
        self.program[index as usize] = Some(row);
        Ok(())
    }

    pub fn program_row(&self, index: u16) -> Option<Row27> {
        self.program.get(index as usize).copied().flatten()
    }

    pub fn program_row_mut(&mut self, index: u16) -> Option<&mut Row27> {
        self.program.get_mut(index as usize)?.as_mut()
    }

    /// The row as the control unit fetches it: an unoccupied row reads as
    /// all-zero fields, but its Adr4 sockets still show the cables that are
    /// physically plugged around it.
    pub fn fetch_program_row(&self, index: u16) -> Row27 {
        match self.program_row(index) {
            Some(row) => row,
            None => Row27::ZERO.with_adr4(self.row_wiring(index).adr4()),
        }
    }

    pub fn occupied_program_rows(&self) -> impl Iterator<Item = (u16, Row27)> + '_ {
        self.program
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.map(|row| (i as u16, row)))
    }

    pub fn program_len(&self) -> usize {
        self.program.iter().filter(|r| r.is_some()).count()
    }

    pub fn add_cond_wire(&mut self, from: u16, to: u16) -> Result<(), ImageError> {
        Self::add_wire(&mut self.cond_wiring, "conditional", from, to)
    }

    pub fn add_uncond_wire(&mut self, from: u16, to: u16) -> Result<(), ImageError> {
        Self::add_wire(&mut self.uncond_wiring, "unconditional", from, to)
    }

    fn add_wire(
        list: &mut Vec<(u16, u16)>,
        kind: &str,
        from: u16,
        to: u16,
    ) -> Result<(), ImageError> {
        if from >= PROGRAM_ROWS || to >= PROGRAM_ROWS {
            return Err(ImageError::InconsistentWiring(format!(
                "{kind} cable {from}->{to} leaves the 300-row program space"
            )));
        }
        if list.iter().any(|&(f, _)| f == from) {
            return Err(ImageError::InconsistentWiring(format!(
                "row {from} already holds an outgoing {kind} cable"
            )));
        }
        list.push((from, to));
        list.sort_unstable();
        Ok(())
    }

    pub fn cond_wiring(&self) -> &[(u16, u16)] {
        &self.cond_wiring
    }

    pub fn uncond_wiring(&self) -> &[(u16, u16)] {
        &self.uncond_wiring
    }

    pub fn row_wiring(&self, index: u16) -> RowWiring {
        let find = |list: &[(u16, u16)]| list.iter().find(|&&(f, _)| f == index).map(|&(_, t)| t);
        // An incoming cable to target t plugs the right socket of row t-1.
        let incoming = |list: &[(u16, u16)]| {
            list.iter()
                .any(|&(_, t)| (t + PROGRAM_ROWS - 1) % PROGRAM_ROWS == index)
        };
        RowWiring {
            cond_target: find(&self.cond_wiring),
            uncond_target: find(&self.uncond_wiring),
            cond_incoming: incoming(&self.cond_wiring),
            uncond_incoming: incoming(&self.uncond_wiring),
        }
    }

    pub fn set_constant(&mut self, index: u8, row: Row39) -> Result<(), ImageError> {
        if index >= CONSTANT_ROWS {
            return Err(ImageError::CapacityExceeded {
                section: "constants".into(),
                over: index as usize + 1 - CONSTANT_ROWS as usize,
            });
        }
        self.constants[index as usize] = Some(row);
        Ok(())
    }

    pub fn constant(&self, index: u8) -> Option<Row39> {
        self.constants.get(index as usize).copied().flatten()
    }

    pub fn constants_len(&self) -> usize {
        self.constants.iter().filter(|r| r.is_some()).count()
    }

    pub fn occupied_constants(&self) -> impl Iterator<Item = (u8, Row39)> + '_ {
        self.constants
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.map(|row| (i as u8, row)))
    }

    pub fn push_cyclic_row(&mut self, unit: u8, row: Row39) -> Result<u16, ImageError> {
        let table = &mut self.cyclic[unit as usize];
        if table.rows.len() >= CYCLIC_ROWS_PER_UNIT as usize {
            return Err(ImageError::CapacityExceeded {
                section: format!("cyclic memory Y{unit}"),
                over: 1,
            });
        }
        table.rows.push(row);
        Ok(table.rows.len() as u16 - 1)
    }

    pub fn add_cyclic_wire(&mut self, unit: u8, after: u16, next: u16) -> Result<(), ImageError> {
        let table = &mut self.cyclic[unit as usize];
        let len = table.rows.len() as u16;
        if after >= len || next >= len {
            return Err(ImageError::InconsistentWiring(format!(
                "cyclic Y{unit} jump {after}->{next} points outside the plugged rows"
            )));
        }
        if table.wiring.iter().any(|&(a, _)| a == after) {
            return Err(ImageError::InconsistentWiring(format!(
                "cyclic Y{unit} row {after} already holds a jump cable"
            )));
        }
        table.wiring.push((after, next));
        table.wiring.sort_unstable();
        Ok(())
    }

    pub fn cyclic(&self, unit: u8) -> &CyclicTable {
        &self.cyclic[unit as usize]
    }

    pub fn cyclic_mut(&mut self, unit: u8) -> &mut CyclicTable {
        &mut self.cyclic[unit as usize]
    }

    /// Checks the global wiring invariants: cables only between occupied
    /// rows and at most one outgoing cable per row and kind, and every
    /// occupied row's Adr4 socket bits agreeing with the cables.
    pub fn validate(&self) -> Result<(), ImageError> {
        for (kind, list) in [
            ("conditional", &self.cond_wiring),
            ("unconditional", &self.uncond_wiring),
        ] {
            for &(from, to) in list {
                if self.program_row(from).is_none() {
                    return Err(ImageError::InconsistentWiring(format!(
                        "{kind} cable from empty row {from}"
                    )));
                }
                if self.program_row(to).is_none() {
                    return Err(ImageError::InconsistentWiring(format!(
                        "{kind} cable to empty row {to}"
                    )));
                }
            }
        }
        for (i, row) in self.occupied_program_rows() {
            let expected = self.row_wiring(i).adr4();
            if row.adr4() != expected {
                return Err(ImageError::InconsistentWiring(format!(
                    "row {i}: Adr4 sockets {:04b} but cables give {expected:04b}",
                    row.adr4()
                )));
            }
        }
        for (unit, table) in self.cyclic.iter().enumerate() {
            let p = self.start.positions[unit] as usize;
            if p != 0 && p >= table.len() {
                return Err(ImageError::InconsistentWiring(format!(
                    "start position {p} outside the {} plugged rows of Y{unit}",
                    table.len()
                )));
            }
        }
        Ok(())
    }

    /// The storage accounting of one machine at full capacity, in bits:
    /// 300 instruction rows of 27 sockets, 320 cyclic rows of 41 sockets,
    /// 28 constant rows of 39 sockets, and the 32 registers of 39 relays.
    pub fn storage_bits_full_capacity() -> u32 {
        let program = PROGRAM_ROWS as u32 * 27;
        let cyclic = CYCLIC_UNITS as u32 * CYCLIC_ROWS_PER_UNIT as u32 * 41;
        let constants = CONSTANT_ROWS as u32 * 39;
        let registers = REGISTERS as u32 * 39;
        program + cyclic + constants + registers
    }

    pub fn save(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.start.pc.to_le_bytes());
        for p in self.start.positions {
            out.extend_from_slice(&p.to_le_bytes());
        }
        // program occupancy + rows
        let mut bitmap = [0u8; 38];
        for (i, row) in self.program.iter().enumerate() {
            if row.is_some() {
                bitmap[i / 8] |= 1 << (i % 8);
            }
        }
        out.extend_from_slice(&bitmap);
        for (_, row) in self.occupied_program_rows() {
            out.extend_from_slice(&row.to_bytes());
        }
        for list in [&self.cond_wiring, &self.uncond_wiring] {
            let mut sorted = list.clone();
            sorted.sort_unstable();
            out.extend_from_slice(&(sorted.len() as u16).to_le_bytes());
            for (from, to) in sorted {
                out.extend_from_slice(&from.to_le_bytes());
                out.extend_from_slice(&to.to_le_bytes());
            }
        }
        // constants
        let mut cbitmap = [0u8; 4];
        for (i, row) in self.constants.iter().enumerate() {
            if row.is_some() {
                cbitmap[i / 8] |= 1 << (i % 8);
            }
        }
        out.extend_from_slice(&cbitmap);
        for (_, row) in self.occupied_constants() {
            out.extend_from_slice(&row.to_bytes());
        }
        // cyclic tables
        for table in &self.cyclic {
            out.extend_from_slice(&(table.rows.len() as u16).to_le_bytes());
            for row in &table.rows {
                out.extend_from_slice(&row.to_bytes());
            }
            let mut sorted = table.wiring.clone();
            sorted.sort_unstable();
            out.extend_from_slice(&(sorted.len() as u16).to_le_bytes());
            for (after, next) in sorted {
                out.extend_from_slice(&after.to_le_bytes());
                out.extend_from_slice(&next.to_le_bytes());
            }
        }
        out
    }

    pub fn load(bytes: &[u8]) -> Result<PlugboardImage, ImageError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(6)? != MAGIC {
            return Err(ImageError::BadMagic);
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(ImageError::VersionUnsupported(version));
        }
        let pc = r.u16()?;
        if pc >= PROGRAM_ROWS {
            return Err(r.malformed("start pc outside 0..=299"));
        }
        let mut positions = [0u16; 4];
        for p in positions.iter_mut() {
            *p = r.u16()?;
        }
        let mut image = PlugboardImage::new();
        image.start = StartConfig { positions, pc };

        let bitmap = r.take(38)?.to_vec();
        for tail_bit in 300..304 {
            if bitmap[tail_bit / 8] & 1 << (tail_bit % 8) != 0 {
                return Err(r.malformed("program bitmap has bits beyond row 299"));
            }
        }
        for i in 0..PROGRAM_ROWS as usize {
            if bitmap[i / 8] & 1 << (i % 8) != 0 {
                let raw: [u8; 4] = r.take(4)?.try_into().unwrap();
                let row = Row27::from_bytes(raw)
                    .map_err(|_| r.malformed("program row padding bits set"))?;
                image.program[i] = Some(row);
            }
        }
        for kind in 0..2 {
            let count = r.u16()? as usize;
            for _ in 0..count {
                let from = r.u16()?;
                let to = r.u16()?;
                let res = if kind == 0 {
                    image.add_cond_wire(from, to)
                } else {
                    image.add_uncond_wire(from, to)
                };
                res?;
            }
        }
        let cbitmap = r.take(4)?.to_vec();
        for tail_bit in 28..32 {
            if cbitmap[tail_bit / 8] & 1 << (tail_bit % 8) != 0 {
                return Err(r.malformed("constant bitmap has bits beyond row 27"));
            }
        }
        for i in 0..CONSTANT_ROWS as usize {
            if cbitmap[i / 8] & 1 << (i % 8) != 0 {
                let raw: [u8; 5] = r.take(5)?.try_into().unwrap();
                let row = Row39::from_bytes(raw)
                    .map_err(|_| r.malformed("constant row padding bit set"))?;
                image.constants[i] = Some(row);
            }
        }
        for unit in 0..CYCLIC_UNITS {
            let count = r.u16()? as usize;
            if count > CYCLIC_ROWS_PER_UNIT as usize {
                return Err(ImageError::CapacityExceeded {
                    section: format!("cyclic memory Y{unit}"),
                    over: count - CYCLIC_ROWS_PER_UNIT as usize,
                });
            }
            for _ in 0..count {
                let raw: [u8; 5] = r.take(5)?.try_into().unwrap();
                let row = Row39::from_bytes(raw)
                    .map_err(|_| r.malformed("cyclic row padding bit set"))?;
                image.cyclic[unit as usize].rows.push(row);
            }
            let jumps = r.u16()? as usize;
            for _ in 0..jumps {
                let after = r.u16()?;
                let next = r.u16()?;
                image.add_cyclic_wire(unit, after, next)?;
            }
        }
        if r.pos != bytes.len() {
            return Err(r.malformed("trailing bytes after image"));
        }
        image.validate()?;
        Ok(image)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ImageError> {
        if self.pos + n > self.bytes.len() {
            return Err(ImageError::Truncated { offset: self.pos });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u16(&mut self) -> Result<u16, ImageError> {
        let raw: [u8; 2] = self.take(2)?.try_into().unwrap();
        Ok(u16::from_le_bytes(raw))
    }

    fn malformed(&self, what: &str) -> ImageError {
        ImageError::Malformed {
            offset: self.pos,
            what: what.to_string(),
        }
    }
}

/// Sets the derived Adr4 socket bits on every occupied row from the wiring
/// lists. The assembler calls this after laying out rows and cables.
pub fn apply_socket_bits(image: &mut PlugboardImage) {
    let indices: Vec<u16> = image.occupied_program_rows().map(|(i, _)| i).collect();
    for i in indices {
        let adr4 = image.row_wiring(i).adr4();
        if let Some(row) = image.program_row_mut(i) {
            *row = row.with_adr4(adr4);
        }
    }
}
