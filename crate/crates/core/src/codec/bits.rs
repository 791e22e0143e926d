//! MSB-first bit I/O with order-0 Exp-Golomb codes.

use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    used: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `n` bits of `value`, most significant first. `n <= 32`.
    pub fn write_bits(&mut self, value: u32, n: u32) {
        debug_assert!(n <= 32);
        if n == 0 {
            return;
        }
        self.acc = (self.acc << n) | (value as u64 & ((1u64 << n) - 1));
        self.used += n;
        while self.used >= 8 {
            self.used -= 8;
            self.bytes.push((self.acc >> self.used) as u8);
        }
        self.acc &= (1u64 << self.used) - 1;
    }

    /// Order-0 Exp-Golomb: `len-1` zeros, then `value + 1` in `len` bits.
    pub fn write_ue(&mut self, value: u32) {
        let v = value as u64 + 1;
        let len = 64 - v.leading_zeros();
        self.write_bits(0, len - 1);
        if len > 32 {
            self.write_bits((v >> 32) as u32, len - 32);
            self.write_bits(v as u32, 32);
        } else {
            self.write_bits(v as u32, len);
        }
    }

    /// Pads with zero bits to the next byte boundary.
    pub fn align(&mut self) {
        if self.used > 0 {
            let pad = 8 - self.used;
            self.write_bits(0, pad);
        }
    }

    pub fn bit_len(&self) -> u64 {
        self.bytes.len() as u64 * 8 + self.used as u64
    }

    pub fn finish(mut self) -> Vec<u8> {
        self.align();
        self.bytes
    }
}

pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    fn bit(&mut self) -> Result<u32> {
        let byte = (self.pos / 8) as usize;
        let b = *self
            .bytes
            .get(byte)
            .ok_or_else(|| Error::CorruptPayload("bitstream ended early".into()))?;
        let bit = (b >> (7 - (self.pos % 8))) & 1;
        self.pos += 1;
        Ok(bit as u32)
    }

    pub fn read_bits(&mut self, n: u32) -> Result<u32> {
        debug_assert!(n <= 32);
        let mut v = 0u32;
        for _ in 0..n {
            v = (v << 1) | self.bit()?;
        }
        Ok(v)
    }

    pub fn read_ue(&mut self) -> Result<u32> {
        let mut zeros = 0u32;
        while self.bit()? == 0 {
            zeros += 1;
            if zeros > 32 {
                return Err(Error::CorruptPayload("Exp-Golomb prefix too long".into()));
            }
        }
        let rest = if zeros == 32 {
            // value + 1 == 2^32 + rest, only rest == 0 fits in u32
            let r = self.read_bits(32)? as u64;
            (1u64 << 32) + r
        } else {
            (1u64 << zeros) | self.read_bits(zeros)? as u64
        };
        u32::try_from(rest - 1).map_err(|_| Error::CorruptPayload("Exp-Golomb value overflows".into()))
    }

    pub fn align(&mut self) {
        self.pos = self.pos.div_ceil(8) * 8;
    }

    pub fn byte_pos(&self) -> usize {
        self.pos.div_ceil(8) as usize
    }
}

/// Exp-Golomb code length of `value` in bits.
pub fn ue_len(value: u32) -> u32 {
    let v = value as u64 + 1;
    2 * (64 - v.leading_zeros()) - 1
}

pub fn zigzag(r: i32) -> u32 {
    ((r << 1) ^ (r >> 31)) as u32
}

pub fn unzigzag(u: u32) -> i32 {
    ((u >> 1) as i32) ^ -((u & 1) as i32)
}
