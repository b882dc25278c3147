//! Fixed 32-bit encoding of the toy ISA.
//!
//! ```text
//!  31      26 25  22 21  18 17  14 13            0
//! +----------+------+------+------+---------------+
//! |  opcode  |  rd  |  rs1 |  rs2 |  imm (signed) |
//! +----------+------+------+------+---------------+
//! ```

use serde::{Deserialize, Serialize};

pub const OPCODE_SHIFT: u32 = 26;
pub const RD_SHIFT: u32 = 22;
pub const RS1_SHIFT: u32 = 18;
pub const RS2_SHIFT: u32 = 14;
pub const OPCODE_MASK: u32 = 0x3F;
pub const REG_MASK: u32 = 0xF;
pub const IMM_MASK: u32 = 0x3FFF;
pub const IMM_BITS: u32 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Opcode {
    Add = 0,
    Sub = 1,
    And = 2,
    Or = 3,
    Xor = 4,
    Slt = 5,
    Addi = 6,
    Andi = 7,
    Ori = 8,
    Lui = 9,
    Lw = 10,
    Sw = 11,
    Beq = 12,
    Bne = 13,
    Jal = 14,
    Csrrw = 15,
    Ebreak = 16,
    FenceI = 17,
}

impl Opcode {
    /// Every legal opcode, in decode order.
    pub const ALL: [Opcode; 18] = [
        Opcode::Add,
        Opcode::Sub,
        Opcode::And,
        Opcode::Or,
        Opcode::Xor,
        Opcode::Slt,
        Opcode::Addi,
        Opcode::Andi,
        Opcode::Ori,
        Opcode::Lui,
        Opcode::Lw,
        Opcode::Sw,
        Opcode::Beq,
        Opcode::Bne,
        Opcode::Jal,
        Opcode::Csrrw,
        Opcode::Ebreak,
        Opcode::FenceI,
    ];

    pub fn from_bits(bits: u32) -> Option<Opcode> {
        Opcode::ALL.get(bits as usize).copied()
    }

    pub fn bits(self) -> u32 {
        self as u32
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Add => "add",
            Opcode::Sub => "sub",
            Opcode::And => "and",
            Opcode::Or => "or",
            Opcode::Xor => "xor",
            Opcode::Slt => "slt",
            Opcode::Addi => "addi",
            Opcode::Andi => "andi",
            Opcode::Ori => "ori",
            Opcode::Lui => "lui",
            Opcode::Lw => "lw",
            Opcode::Sw => "sw",
            Opcode::Beq => "beq",
            Opcode::Bne => "bne",
            Opcode::Jal => "jal",
            Opcode::Csrrw => "csrrw",
            Opcode::Ebreak => "ebreak",
            Opcode::FenceI => "fence.i",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub opcode: Opcode,
    pub rd: u8,
    pub rs1: u8,
    pub rs2: u8,
    /// Sign-extended 14-bit immediate.
    pub imm: i32,
}

impl Instruction {
    pub fn new(opcode: Opcode, rd: u8, rs1: u8, rs2: u8, imm: i32) -> Self {
        Instruction {
            opcode,
            rd,
            rs1,
            rs2,
            imm,
        }
    }

    pub fn encode(&self) -> u32 {
        encode_fields(
            self.opcode.bits(),
            self.rd as u32,
            self.rs1 as u32,
            self.rs2 as u32,
            self.imm as u32,
        )
    }
}

/// Packs raw field values; each is masked to its width.
pub fn encode_fields(opcode: u32, rd: u32, rs1: u32, rs2: u32, imm: u32) -> u32 {
    (opcode & OPCODE_MASK) << OPCODE_SHIFT
        | (rd & REG_MASK) << RD_SHIFT
        | (rs1 & REG_MASK) << RS1_SHIFT
        | (rs2 & REG_MASK) << RS2_SHIFT
        | (imm & IMM_MASK)
}

pub fn opcode_bits(word: u32) -> u32 {
    (word >> OPCODE_SHIFT) & OPCODE_MASK
}

pub fn sign_extend_imm(word: u32) -> i32 {
    ((word << (32 - IMM_BITS)) as i32) >> (32 - IMM_BITS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoded {
    Legal(Instruction),
    Illegal { word: u32 },
}

/// Plain table decode, without instrumentation or bugs.
pub fn decode(word: u32) -> Decoded {
    match Opcode::from_bits(opcode_bits(word)) {
        Some(opcode) => Decoded::Legal(Instruction {
            opcode,
            rd: ((word >> RD_SHIFT) & REG_MASK) as u8,
            rs1: ((word >> RS1_SHIFT) & REG_MASK) as u8,
            rs2: ((word >> RS2_SHIFT) & REG_MASK) as u8,
            imm: sign_extend_imm(word),
        }),
        None => Decoded::Illegal { word },
    }
}

/// A named bit range of an instruction word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    Opcode,
    Rd,
    Rs1,
    Rs2,
    Imm,
}

impl Field {
    pub const ALL: [Field; 5] = [Field::Opcode, Field::Rd, Field::Rs1, Field::Rs2, Field::Imm];

    pub fn shift(self) -> u32 {
        match self {
            Field::Opcode => OPCODE_SHIFT,
            Field::Rd => RD_SHIFT,
            Field::Rs1 => RS1_SHIFT,
            Field::Rs2 => RS2_SHIFT,
            Field::Imm => 0,
        }
    }

    pub fn width(self) -> u32 {
        match self {
            Field::Opcode => 6,
            Field::Rd | Field::Rs1 | Field::Rs2 => 4,
            Field::Imm => IMM_BITS,
        }
    }

    /// The field's bits in place within a word.
    pub fn mask(self) -> u32 {
        ((1u32 << self.width()) - 1) << self.shift()
    }
}
