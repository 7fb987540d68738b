//! Shared signal and data containers.

use std::fmt::Write as _;

use crate::error::Error;

/// Uniformly sampled voltage trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    /// Voltages, one per sample.
    pub samples: Vec<f64>,
    /// Sample period in seconds.
    pub dt: f64,
    /// Time of the first sample in seconds.
    pub t0: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, dt: f64, t0: f64) -> Result<Self, Error> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("waveform dt must be > 0, got {dt}")));
        }
        Ok(Self { samples, dt, t0 })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time_of(&self, index: usize) -> f64 {
        self.t0 + index as f64 * self.dt
    }

    /// Arithmetic mean of the samples, 0 for an empty trace.
    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    /// Two-column CSV (`time_s,volts`) with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 24 + 16);
        out.push_str("time_s,volts\n");
        for (i, v) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "{:e},{}", self.time_of(i), v);
        }
        out
    }

    /// Keeps at most `max_samples` leading samples.
    pub fn truncated(&self, max_samples: usize) -> Self {
        Self {
            samples: self.samples[..self.samples.len().min(max_samples)].to_vec(),
            dt: self.dt,
            t0: self.t0,
        }
    }
}

/// Ordered sequence of logical bits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Bitstream(pub Vec<bool>);

impl Bitstream {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Builds a stream from 0/1 integers; any other value is rejected.
    pub fn from_levels(levels: &[u8]) -> Result<Self, Error> {
        levels
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidInput(format!("bit value {other} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl From<Vec<bool>> for Bitstream {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl FromIterator<bool> for Bitstream {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Logic level per analog sample, as produced by the receiver front end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitalWaveform {
    pub levels: Vec<bool>,
    pub samples_per_ui: usize,
}

impl DigitalWaveform {
    pub fn new(levels: Vec<bool>, samples_per_ui: usize) -> Self {
        Self { levels, samples_per_ui }
    }

    /// Ideal rectangular NRZ rendering of `bits`, `samples_per_ui` samples per bit.
    pub fn from_bits(bits: &Bitstream, samples_per_ui: usize) -> Self {
        let levels = bits
            .bits()
            .iter()
            .flat_map(|&b| std::iter::repeat_n(b, samples_per_ui))
            .collect();
        Self { levels, samples_per_ui }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Number of whole unit intervals covered.
    pub fn ui_count(&self) -> usize {
        self.levels.len() / self.samples_per_ui
    }
}

/// Number of parallel streams in a frame.
pub const FRAME_STREAMS: usize = 8;
/// Bits per parallel stream word.
pub const WORD_BITS: usize = 32;
/// Serial bits carried by one frame.
pub const FRAME_BITS: usize = FRAME_STREAMS * WORD_BITS;

/// Eight 32-bit parallel words handled by the serializer as one unit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ParallelFrame {
    pub streams: [u32; FRAME_STREAMS],
}

impl ParallelFrame {
    pub fn new(streams: [u32; FRAME_STREAMS]) -> Self {
        Self { streams }
    }
}
