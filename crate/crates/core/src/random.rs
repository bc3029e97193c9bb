//! Randomness sources: live CSPRNGs and scripted tapes for exact replay.

use std::collections::VecDeque;

use num_bigint::{BigUint, RandBigInt};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// Anything that can hand out protocol randomness.
pub trait Randomness {
    /// Draws an integer in `[low, high)`. Scripted sources return their next
    /// tape value verbatim, even when it falls outside the range.
    fn draw(&mut self, low: &BigUint, high: &BigUint) -> Result<BigUint>;
}

impl<R: RngCore + ?Sized> Randomness for R {
    fn draw(&mut self, low: &BigUint, high: &BigUint) -> Result<BigUint> {
        Ok(self.gen_biguint_range(low, high))
    }
}

/// A fixed sequence of integers consumed in draw order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tape {
    values: VecDeque<BigUint>,
}

impl Tape {
    pub fn new<I, T>(values: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigUint>,
    {
        Tape {
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> impl Iterator<Item = &BigUint> {
        self.values.iter()
    }
}

impl Randomness for Tape {
    fn draw(&mut self, _low: &BigUint, _high: &BigUint) -> Result<BigUint> {
        self.values.pop_front().ok_or(Error::TapeExhausted)
    }
}

/// Per-party source used by the ceremony harness.
#[derive(Clone, Debug)]
pub enum Source {
    Live(Box<ChaCha20Rng>),
    Scripted(Tape),
}

impl Source {
    pub fn seeded(seed: u64) -> Self {
        Source::Live(Box::new(rng_from_seed(seed)))
    }
}

impl Randomness for Source {
    fn draw(&mut self, low: &BigUint, high: &BigUint) -> Result<BigUint> {
        match self {
            Source::Live(rng) => rng.draw(low, high),
            Source::Scripted(tape) => tape.draw(low, high),
        }
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Fresh OS-seeded generator.
pub fn rng_from_entropy() -> ChaCha20Rng {
    ChaCha20Rng::from_entropy()
}

/// Independent seed for trial `index` of a batch rooted at `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
