use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Longest supported string; indices must fit comfortably in `usize`.
pub const MAX_BITS: usize = 40;

/// Fixed-length bit string. Bit 0 is the leftmost character and the most
/// significant bit of [`BitString::value`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    value: usize,
    len: usize,
}

impl BitString {
    pub fn new(value: usize, len: usize) -> Result<Self> {
        if len > MAX_BITS {
            return Err(Error::Domain(format!("bit strings longer than {MAX_BITS} are unsupported")));
        }
        if value >> len != 0 {
            return Err(Error::Domain(format!("value {value} does not fit in {len} bits")));
        }
        Ok(BitString { value, len })
    }

    pub fn value(&self) -> usize {
        self.value
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len);
        (self.value >> (self.len - 1 - i)) & 1 == 1
    }

    /// The first `k` bits as a string of length `k`.
    pub fn prefix(&self, k: usize) -> BitString {
        assert!(k <= self.len);
        BitString {
            value: self.value >> (self.len - k),
            len: k,
        }
    }

    /// All strings of length `len` in increasing numeric order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len <= MAX_BITS);
        (0..1usize << len).map(move |value| BitString { value, len })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return Ok(());
        }
        write!(f, "{:0width$b}", self.value, width = self.len)
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut value = 0usize;
        for ch in s.chars() {
            value = match ch {
                '0' => value << 1,
                '1' => (value << 1) | 1,
                _ => return Err(Error::Domain(format!("'{s}' is not a bit string"))),
            };
            if s.len() > MAX_BITS {
                break;
            }
        }
        BitString::new(value, s.len())
    }
}
