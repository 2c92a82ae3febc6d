//! Gray-coded square QAM mapping.
//!
//! QPSK uses one Gray bit per rail (levels ±1), 16-QAM two (levels ±1, ±3).
//! Both are scaled to unit average energy. The first half of a symbol's bits
//! selects the in-phase level and the second half the quadrature level.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Data constellation carried on Data cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(try_from = "u32", into = "u32")]
pub enum Modulation {
    #[default]
    Qpsk,
    Qam16,
}

impl Modulation {
    /// Bits carried per constellation point (the "modulation order" in config files).
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
        }
    }

    fn bits_per_rail(self) -> usize {
        self.bits_per_symbol() / 2
    }

    fn scale(self) -> f64 {
        match self {
            Modulation::Qpsk => std::f64::consts::FRAC_1_SQRT_2,
            // mean of {1, 9} per rail is 5, two rails give 10
            Modulation::Qam16 => 1.0 / 10f64.sqrt(),
        }
    }

    /// Maps `bits` (length `bits_per_symbol`, values 0/1) to a constellation point.
    pub fn map(self, bits: &[u8]) -> Complex64 {
        debug_assert_eq!(bits.len(), self.bits_per_symbol());
        let m = self.bits_per_rail();
        let i = gray_level(&bits[..m]);
        let q = gray_level(&bits[m..]);
        Complex64::new(i, q) * self.scale()
    }

    /// Hard decision to the nearest point, appending its bits to `out`.
    pub fn demap_into(self, value: Complex64, out: &mut Vec<u8>) {
        let v = value / self.scale();
        let m = self.bits_per_rail();
        push_level_bits(v.re, m, out);
        push_level_bits(v.im, m, out);
    }

    pub fn demap(self, value: Complex64) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.bits_per_symbol());
        self.demap_into(value, &mut out);
        out
    }

    /// Every point of the alphabet together with the bits that generate it.
    pub fn alphabet(self) -> Vec<(Vec<u8>, Complex64)> {
        let b = self.bits_per_symbol();
        (0..1usize << b)
            .map(|word| {
                let bits: Vec<u8> = (0..b).map(|j| ((word >> (b - 1 - j)) & 1) as u8).collect();
                let point = self.map(&bits);
                (bits, point)
            })
            .collect()
    }
}

impl TryFrom<u32> for Modulation {
    type Error = String;

    fn try_from(order: u32) -> Result<Self, Self::Error> {
        match order {
            2 => Ok(Modulation::Qpsk),
            4 => Ok(Modulation::Qam16),
            other => Err(format!(
                "modulation_order must be 2 (QPSK) or 4 (16-QAM), got {other}"
            )),
        }
    }
}

impl From<Modulation> for u32 {
    fn from(m: Modulation) -> u32 {
        m.bits_per_symbol() as u32
    }
}

// Per-rail Gray code: 0 -> -1, 1 -> +1 for one bit;
// 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3 for two bits.
fn gray_level(bits: &[u8]) -> f64 {
    match bits {
        [b] => {
            if *b == 0 {
                -1.0
            } else {
                1.0
            }
        }
        [b0, b1] => match (b0, b1) {
            (0, 0) => -3.0,
            (0, 1) => -1.0,
            (1, 1) => 1.0,
            _ => 3.0,
        },
        _ => unreachable!("unsupported rail width"),
    }
}

fn push_level_bits(x: f64, bits_per_rail: usize, out: &mut Vec<u8>) {
    match bits_per_rail {
        1 => out.push(u8::from(x >= 0.0)),
        2 => {
            let (b0, b1) = if x < -2.0 {
                (0, 0)
            } else if x < 0.0 {
                (0, 1)
            } else if x < 2.0 {
                (1, 1)
            } else {
                (1, 0)
            };
            out.push(b0);
            out.push(b1);
        }
        _ => unreachable!("unsupported rail width"),
    }
}
