//! Bit strings and message symbols shared across the protocol layers.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Server message symbol. `Plus` encodes as bit 0, `Minus` as bit 1
/// everywhere a bit stands for a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MessageBit {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl MessageBit {
    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(MessageBit::Plus),
            1 => Ok(MessageBit::Minus),
            other => Err(Error::InvalidBits(format!(
                "message bit must be 0 or 1, got {other}"
            ))),
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            MessageBit::Plus => 0,
            MessageBit::Minus => 1,
        }
    }

    pub fn index(self) -> usize {
        self.bit() as usize
    }
}

impl fmt::Display for MessageBit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MessageBit::Plus => "+",
            MessageBit::Minus => "-",
        })
    }
}

/// Ordered sequence of bits. Round 1 sits at position 0; integer
/// encodings are big-endian (first bit most significant).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    /// Wraps a vector whose entries must all be 0 or 1.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidBits(format!("entry {bad} is not a bit")));
        }
        Ok(BitString { bits })
    }

    pub fn zeros(len: usize) -> Self {
        BitString { bits: vec![0; len] }
    }

    pub fn ones(len: usize) -> Self {
        BitString { bits: vec![1; len] }
    }

    /// Parses a string of '0'/'1' characters.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidBits(format!(
                    "unexpected character {other:?}"
                ))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(|bits| BitString { bits })
    }

    /// Big-endian decoding of `value` into `width` bits.
    /// Requires `value < 2^width`.
    pub fn from_index(value: usize, width: usize) -> Result<Self> {
        if width < usize::BITS as usize && value >> width != 0 {
            return Err(Error::InvalidBits(format!(
                "{value} does not fit in {width} bits"
            )));
        }
        let bits = (0..width)
            .map(|i| ((value >> (width - 1 - i)) & 1) as u8)
            .collect();
        Ok(BitString { bits })
    }

    /// Big-endian integer encoding. Requires length below the word size.
    pub fn to_index(&self) -> usize {
        assert!(
            self.len() < usize::BITS as usize,
            "bit string too long to index"
        );
        self.bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn push(&mut self, bit: u8) {
        debug_assert!(bit <= 1);
        self.bits.push(bit);
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.bits.iter().copied()
    }

    /// Positions holding `bit`.
    pub fn positions_of(&self, bit: u8) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b == bit)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                context: "xor of bit strings",
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(BitString {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    /// Packs into bytes MSB-first (bit 0 of the string is the top bit of
    /// byte 0) and renders lowercase hex. A trailing partial byte is
    /// zero-padded on the right.
    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.len().div_ceil(8)];
        for (i, b) in self.bits.iter().enumerate() {
            bytes[i / 8] |= b << (7 - (i % 8));
        }
        hex::encode(bytes)
    }

    /// Inverse of [`to_hex`](Self::to_hex) given the original bit length.
    pub fn from_hex(s: &str, bit_len: usize) -> Result<Self> {
        let bytes =
            hex::decode(s.trim()).map_err(|e| Error::InvalidBits(format!("bad hex: {e}")))?;
        if bytes.len() != bit_len.div_ceil(8) {
            return Err(Error::DimensionMismatch {
                context: "hex payload bytes",
                expected: bit_len.div_ceil(8),
                got: bytes.len(),
            });
        }
        let bits = (0..bit_len)
            .map(|i| (bytes[i / 8] >> (7 - (i % 8))) & 1)
            .collect();
        // Padding bits past bit_len must be zero for a canonical encoding.
        for i in bit_len..bytes.len() * 8 {
            if (bytes[i / 8] >> (7 - (i % 8))) & 1 != 0 {
                return Err(Error::InvalidBits(
                    "nonzero padding bits in hex payload".into(),
                ));
            }
        }
        Ok(BitString { bits })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// Number of positions in `x` equal to `bit`.
pub fn count_bits(x: &BitString, bit: u8) -> usize {
    x.iter().filter(|&b| b == bit).count()
}
