//! Scalar arithmetic over the prime fields F_p for small odd p.
//!
//! Every container in this crate carries its modulus as a [`Prime`], and all
//! arithmetic is exact: scalars are residues in `0..p` stored as `u32`.
//! Only odd primes where the 2-nilpotent theory is implemented are accepted;
//! see [`Prime::SUPPORTED`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A validated odd prime modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Prime(u32);

/// Errors from scalar-level operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    /// The requested modulus is not one of the supported odd primes.
    #[error("unsupported modulus {0}: expected one of 3, 5, 7, 11")]
    UnsupportedModulus(u32),
}

impl Prime {
    /// The moduli this crate supports. The characteristic must be odd (the
    /// wedge-square constructions divide by 2 implicitly), and the exhaustive
    /// enumerations that back the higher layers only stay tractable for small p.
    pub const SUPPORTED: [u32; 4] = [3, 5, 7, 11];

    pub fn new(p: u32) -> Result<Prime, FieldError> {
        if Self::SUPPORTED.contains(&p) {
            Ok(Prime(p))
        } else {
            Err(FieldError::UnsupportedModulus(p))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Reduces an arbitrary integer into `0..p`.
    pub fn reduce_i64(self, x: i64) -> u32 {
        x.rem_euclid(self.0 as i64) as u32
    }

    pub fn reduce(self, x: u32) -> u32 {
        x % self.0
    }

    pub fn add(self, a: u32, b: u32) -> u32 {
        (a + b) % self.0
    }

    pub fn sub(self, a: u32, b: u32) -> u32 {
        (a + self.0 - b % self.0) % self.0
    }

    pub fn neg(self, a: u32) -> u32 {
        (self.0 - a % self.0) % self.0
    }

    pub fn mul(self, a: u32, b: u32) -> u32 {
        (a * b) % self.0
    }

    /// Multiplicative inverse of a nonzero residue, by scanning the (tiny) field.
    ///
    /// # Panics
    /// Panics if `a ≡ 0`, which is always a logic error at call sites.
    pub fn inv(self, a: u32) -> u32 {
        let a = a % self.0;
        assert!(a != 0, "inverse of zero in F_{}", self.0);
        (1..self.0).find(|&b| self.mul(a, b) == 1).unwrap()
    }

    /// All residues `0..p`.
    pub fn elements(self) -> impl Iterator<Item = u32> {
        0..self.0
    }
}

impl TryFrom<u32> for Prime {
    type Error = FieldError;

    fn try_from(p: u32) -> Result<Prime, FieldError> {
        Prime::new(p)
    }
}

impl From<Prime> for u32 {
    fn from(p: Prime) -> u32 {
        p.0
    }
}

impl std::fmt::Display for Prime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}
