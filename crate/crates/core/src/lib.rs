//! Behavioral simulator of an all-digital serial link: serializer, voltage-mode
//! driver, lossy channel, resistive-feedback receiver front end, blind
//! oversampling CDR and deserializer, plus BER, sweep and budget reporting.

pub mod afe;
pub mod cdr;
pub mod cli;
pub mod config;
pub mod error;
pub mod eye;
pub mod fsm;
pub mod link;
pub mod metrics;
pub mod prbs;
pub mod rng;
pub mod types;

pub use config::{CdrConfig, LinkConfig};
pub use error::Error;
pub use types::{Bitstream, DigitalWaveform, ParallelFrame, Waveform};
