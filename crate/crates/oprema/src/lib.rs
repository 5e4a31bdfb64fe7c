//! Emulator for the Oprema, the 1954/55 relay computer built at Carl Zeiss
//! Jena: its excess-3 decimal floating point, the four-address instruction
//! set with plugboard program storage and jumper-cable jumps, the cyclic
//! index memories, the pulse-based timing of the relay control sequences,
//! and the twin-machine lockstep comparison the design provided for.
//!
//! The crate splits into the machine proper ([`numeric`], [`alu`],
//! [`machine`], [`control`], [`twin`]), the program tooling ([`asm`],
//! [`image`]), and an exact-arithmetic reference ([`oracle`], [`verify`])
//! used to check every algorithm against independent computation.

pub mod alu;
pub mod asm;
pub mod control;
pub mod image;
pub mod machine;
pub mod numeric;
pub mod oracle;
pub mod twin;
pub mod verify;
