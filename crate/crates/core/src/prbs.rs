//! PRBS stimulus generation and BER checking.
//!
//! Generators are Fibonacci LFSRs using the standard maximal-length
//! polynomials x^7+x^6+1, x^15+x^14+1 and x^31+x^28+1. The output bit is the
//! register MSB shifted out on each step; the feedback bit enters at the LSB.

use crate::error::Error;
use crate::types::Bitstream;

/// Mismatch rate above which the aligner reports no lock.
pub const NO_LOCK_MISMATCH_RATE: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LfsrSpec {
    order: u32,
    taps: (u32, u32),
    seed: u64,
}

impl LfsrSpec {
    pub fn new(order: u32, seed: u64) -> Result<Self, Error> {
        let taps = match order {
            7 => (7, 6),
            15 => (15, 14),
            31 => (31, 28),
            other => return Err(Error::InvalidLfsr(format!("unsupported order {other}"))),
        };
        let mask = (1u64 << order) - 1;
        if seed & mask == 0 || seed > mask {
            return Err(Error::InvalidLfsr(format!(
                "seed {seed:#x} must be nonzero and fit in {order} bits"
            )));
        }
        Ok(Self { order, taps, seed })
    }

    pub fn prbs7(seed: u64) -> Result<Self, Error> {
        Self::new(7, seed)
    }

    pub fn prbs15(seed: u64) -> Result<Self, Error> {
        Self::new(15, seed)
    }

    pub fn prbs31(seed: u64) -> Result<Self, Error> {
        Self::new(31, seed)
    }

    /// All-ones state mask for a supported order.
    pub fn order_mask(order: u32) -> Result<u64, Error> {
        match order {
            7 | 15 | 31 => Ok((1u64 << order) - 1),
            other => Err(Error::InvalidLfsr(format!("unsupported order {other}"))),
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn taps(&self) -> (u32, u32) {
        self.taps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn period(&self) -> u64 {
        (1u64 << self.order) - 1
    }

    /// Same polynomial, started from another state.
    pub fn with_seed(&self, seed: u64) -> Result<Self, Error> {
        Self::new(self.order, seed)
    }

    pub fn lfsr(&self) -> Lfsr {
        Lfsr {
            spec: *self,
            state: self.seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Lfsr {
    spec: LfsrSpec,
    state: u64,
}

impl Lfsr {
    pub fn state(&self) -> u64 {
        self.state
    }

    fn mask(&self) -> u64 {
        (1u64 << self.spec.order) - 1
    }

    /// Emits one bit and advances the register.
    #[inline]
    pub fn next_bit(&mut self) -> bool {
        let (a, b) = self.spec.taps;
        let s = self.state;
        let out = (s >> (a - 1)) & 1;
        let fb = out ^ ((s >> (b - 1)) & 1);
        self.state = ((s << 1) | fb) & self.mask();
        out == 1
    }

    /// Jumps `k` steps ahead in O(order^2 log k) via the GF(2) transition
    /// matrix, without producing output.
    pub fn advance(&mut self, k: u64) {
        let mut result = StepMatrix::identity(self.spec.order);
        let mut base = StepMatrix::step(&self.spec);
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = base.compose(&result);
            }
            base = base.compose(&base);
            k >>= 1;
        }
        self.state = result.apply(self.state);
    }

    pub fn take_bits(&mut self, n: usize) -> Bitstream {
        (0..n).map(|_| self.next_bit()).collect()
    }
}

impl Iterator for Lfsr {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        Some(self.next_bit())
    }
}

/// Linear map on LFSR states, stored column-wise: `cols[j]` is the image of
/// the basis state with only bit `j` set.
struct StepMatrix {
    cols: Vec<u64>,
}

impl StepMatrix {
    fn identity(order: u32) -> Self {
        Self {
            cols: (0..order).map(|j| 1u64 << j).collect(),
        }
    }

    fn step(spec: &LfsrSpec) -> Self {
        let cols = (0..spec.order)
            .map(|j| {
                let mut l = Lfsr {
                    spec: *spec,
                    state: 1u64 << j,
                };
                l.next_bit();
                l.state
            })
            .collect();
        Self { cols }
    }

    fn apply(&self, v: u64) -> u64 {
        self.cols
            .iter()
            .enumerate()
            .filter(|(j, _)| (v >> j) & 1 == 1)
            .fold(0, |acc, (_, c)| acc ^ c)
    }

    /// `self ∘ other`
    fn compose(&self, other: &Self) -> Self {
        Self {
            cols: other.cols.iter().map(|&c| self.apply(c)).collect(),
        }
    }
}

/// First `n` bits of the sequence started from `spec`'s seed.
pub fn prbs_generate(spec: &LfsrSpec, n: usize) -> Bitstream {
    spec.lfsr().take_bits(n)
}

/// Outcome of aligning a received stream against a reference PRBS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alignment {
    Locked {
        /// Received bit `lag + i` corresponds to reference bit `i`.
        lag: usize,
        errors: usize,
        /// Bits compared at the chosen lag.
        compared: usize,
    },
    NoLock {
        best_lag: usize,
        mismatches: usize,
        /// Bits in the common scoring window.
        compared: usize,
    },
}

/// Finds the delay in `[0, max_lag]` that best matches `received` against the
/// sequence regenerated from `reference`, then counts mismatches over the full
/// overlap at that delay.
///
/// Lags are ranked on a common window of `len - max_lag` bits so every
/// candidate is scored on the same number of comparisons; ties go to the
/// smallest lag.
pub fn prbs_align_and_count_errors(
    reference: &LfsrSpec,
    received: &Bitstream,
    max_lag: usize,
) -> Result<Alignment, Error> {
    let needed = reference.order() as usize + max_lag;
    let rx = received.bits();
    if rx.len() <= needed {
        return Err(Error::TooShort {
            len: rx.len(),
            needed,
        });
    }
    let reference_bits = prbs_generate(reference, rx.len());
    let ref_bits = reference_bits.bits();
    let window = rx.len() - max_lag;

    let mismatches = |lag: usize, len: usize| -> usize {
        rx[lag..lag + len]
            .iter()
            .zip(&ref_bits[..len])
            .filter(|(a, b)| a != b)
            .count()
    };

    let (best_lag, best) = (0..=max_lag)
        .map(|lag| (lag, mismatches(lag, window)))
        .min_by_key(|&(lag, m)| (m, lag))
        .expect("lag range is nonempty");

    if best as f64 / window as f64 > NO_LOCK_MISMATCH_RATE {
        return Ok(Alignment::NoLock {
            best_lag,
            mismatches: best,
            compared: window,
        });
    }
    let compared = rx.len() - best_lag;
    Ok(Alignment::Locked {
        lag: best_lag,
        errors: mismatches(best_lag, compared),
        compared,
    })
}
