//! Analog front-end behavioral models.
//!
//! Every stage maps a sampled voltage trace onto another trace with the same
//! grid. Stages are also usable incrementally (`process` on successive
//! chunks) so long runs never hold a full analog trace in memory; feeding a
//! trace in chunks produces exactly the same samples as feeding it whole.
//!
//! Time convention: sample `n` carries the input held over `(t[n-1], t[n]]`,
//! which makes the first-order recurrences below exact samples of the
//! continuous RC responses.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::LinkConfig;
use crate::error::Error;
use crate::types::{Bitstream, DigitalWaveform, Waveform};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Lowpass,
    Highpass,
}

/// Exactly discretized single-pole RC section.
///
/// Lowpass: `y[n] = a*x[n] + (1-a)*y[n-1]` with `a = 1 - exp(-dt/tau)`.
/// Highpass is the complement `x[n] - lowpass(x)[n]`.
#[derive(Debug, Clone)]
pub struct FirstOrderFilter {
    kind: FilterKind,
    tau: f64,
    alpha: f64,
    memory: Option<f64>,
}

impl FirstOrderFilter {
    /// `tau = 0` is an all-pass lowpass (and a highpass that blocks everything);
    /// `tau = inf` freezes the lowpass memory.
    pub fn new(kind: FilterKind, tau: f64, dt: f64) -> Result<Self, Error> {
        if tau.is_nan() || tau < 0.0 {
            return Err(Error::InvalidInput(format!("filter tau must be >= 0, got {tau}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("filter dt must be > 0, got {dt}")));
        }
        Ok(Self {
            kind,
            tau,
            alpha: -(-dt / tau).exp_m1(),
            memory: None,
        })
    }

    pub fn lowpass(tau: f64, dt: f64) -> Result<Self, Error> {
        Self::new(FilterKind::Lowpass, tau, dt)
    }

    pub fn highpass(tau: f64, dt: f64) -> Result<Self, Error> {
        Self::new(FilterKind::Highpass, tau, dt)
    }

    /// Presets the internal lowpass state (the capacitor voltage). Without a
    /// preset the filter starts in steady state with its first input.
    pub fn with_initial(mut self, level: f64) -> Self {
        self.memory = Some(level);
        self
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn step(&mut self, x: f64) -> f64 {
        let prev = *self.memory.get_or_insert(x);
        let lp = self.alpha * x + (1.0 - self.alpha) * prev;
        self.memory = Some(lp);
        match self.kind {
            FilterKind::Lowpass => lp,
            FilterKind::Highpass => x - lp,
        }
    }

    pub fn process(&mut self, buf: &mut [f64]) {
        for v in buf {
            *v = self.step(*v);
        }
    }
}

/// Voltage-mode driver: rail-to-rail NRZ into an RC load.
#[derive(Debug, Clone)]
pub struct Driver {
    vdd: f64,
    samples_per_ui: usize,
    filter: FirstOrderFilter,
}

impl Driver {
    pub fn new(cfg: &LinkConfig) -> Result<Self, Error> {
        Ok(Self {
            vdd: cfg.vdd,
            samples_per_ui: cfg.samples_per_ui,
            filter: FirstOrderFilter::lowpass(cfg.driver_tau_s(), cfg.dt())?,
        })
    }

    /// Appends `samples_per_ui` filtered samples per bit to `out`.
    pub fn render(&mut self, bits: &[bool], out: &mut Vec<f64>) {
        out.reserve(bits.len() * self.samples_per_ui);
        for &b in bits {
            let level = if b { self.vdd } else { 0.0 };
            for _ in 0..self.samples_per_ui {
                out.push(self.filter.step(level));
            }
        }
    }

    /// Holds the line at a constant level for `samples` samples.
    pub fn idle(&mut self, level: bool, samples: usize, out: &mut Vec<f64>) {
        let v = if level { self.vdd } else { 0.0 };
        out.extend((0..samples).map(|_| self.filter.step(v)));
    }
}

/// Flat insertion loss followed by a single-pole bandwidth limit.
#[derive(Debug, Clone)]
pub struct Channel {
    gain: f64,
    filter: FirstOrderFilter,
}

impl Channel {
    pub fn new(cfg: &LinkConfig) -> Result<Self, Error> {
        Ok(Self {
            gain: cfg.channel_gain(),
            filter: FirstOrderFilter::lowpass(cfg.channel_tau_s(), cfg.dt())?,
        })
    }

    pub fn process(&mut self, buf: &mut [f64]) {
        for v in buf {
            *v = self.filter.step(*v * self.gain);
        }
    }
}

/// Off-chip coupling capacitor plus the self-bias of the feedback inverter:
/// blocks DC and re-centres the signal at `vdd/2`.
#[derive(Debug, Clone)]
pub struct AcCoupler {
    bias: f64,
    filter: FirstOrderFilter,
}

impl AcCoupler {
    /// `dc_level` is the input level the coupling capacitor is charged to at
    /// the start, i.e. the long-run mean of the incoming signal.
    pub fn new(cfg: &LinkConfig, dc_level: f64) -> Result<Self, Error> {
        Ok(Self {
            bias: cfg.vdd / 2.0,
            filter: FirstOrderFilter::highpass(cfg.ac_coupling_tau_s(), cfg.dt())?
                .with_initial(dc_level),
        })
    }

    pub fn process(&mut self, buf: &mut [f64]) {
        for v in buf {
            *v = self.filter.step(*v) + self.bias;
        }
    }
}

/// Resistive-feedback inverter, rail-to-rail inverter and sampling flip-flop
/// input, collapsed into gain, clamp and a comparator with a dead zone.
///
/// The inverter chain has an even number of inversions overall, so logic
/// polarity is preserved.
#[derive(Debug, Clone)]
pub struct Receiver {
    vdd: f64,
    gain: f64,
    deadzone: f64,
    noise_sigma: f64,
    rng: ChaCha8Rng,
}

impl Receiver {
    pub fn new(cfg: &LinkConfig, rng: ChaCha8Rng) -> Self {
        Self {
            vdd: cfg.vdd,
            gain: cfg.rx_gain,
            deadzone: cfg.rx_deadzone,
            noise_sigma: cfg.noise_sigma,
            rng,
        }
    }

    /// Logic level for one input sample already biased at `vdd/2`.
    #[inline]
    pub fn resolve(&mut self, v: f64) -> bool {
        let mid = 0.5 * self.vdd;
        let noise = if self.noise_sigma > 0.0 {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            self.noise_sigma * z
        } else {
            0.0
        };
        let excursion = v - mid;
        if excursion.abs() <= self.deadzone {
            return if self.noise_sigma > 0.0 {
                noise > 0.0
            } else {
                self.rng.random::<bool>()
            };
        }
        let amplified = (mid + self.gain * (excursion + noise)).clamp(0.0, self.vdd);
        amplified > mid
    }

    pub fn process(&mut self, buf: &[f64], out: &mut Vec<bool>) {
        out.extend(buf.iter().map(|&v| self.resolve(v)));
    }
}

/// Ideal NRZ bits through the driver RC. The line is assumed to have idled at
/// the first bit's level before `t0 = 0`.
pub fn drive(bits: &Bitstream, cfg: &LinkConfig) -> Result<Waveform, Error> {
    let mut driver = Driver::new(cfg)?;
    let mut samples = Vec::new();
    driver.render(bits.bits(), &mut samples);
    Waveform::new(samples, cfg.dt(), 0.0)
}

pub fn channel(w: &Waveform, cfg: &LinkConfig) -> Result<Waveform, Error> {
    let mut ch = Channel::new(cfg)?;
    let mut samples = w.samples.clone();
    ch.process(&mut samples);
    Waveform::new(samples, w.dt, w.t0)
}

/// High-pass with `ac_coupling_tau`, re-biased at `vdd/2`. The coupling
/// capacitor starts charged to the mean of `w`.
pub fn ac_couple_and_bias(w: &Waveform, cfg: &LinkConfig) -> Result<Waveform, Error> {
    let mut ac = AcCoupler::new(cfg, w.mean())?;
    let mut samples = w.samples.clone();
    ac.process(&mut samples);
    Waveform::new(samples, w.dt, w.t0)
}

/// Per-sample logic decision on a trace biased at `vdd/2`.
pub fn rx_resolve(w: &Waveform, cfg: &LinkConfig, rng: ChaCha8Rng) -> DigitalWaveform {
    let mut rx = Receiver::new(cfg, rng);
    let mut levels = Vec::with_capacity(w.len());
    rx.process(&w.samples, &mut levels);
    DigitalWaveform::new(levels, cfg.samples_per_ui)
}
