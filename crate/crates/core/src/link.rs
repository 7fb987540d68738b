//! End-to-end link: PRBS source, driver, channel, AC coupling, receiver, CDR,
//! then alignment and error counting. Also hosts the loss and sensitivity
//! searches built on top of single runs.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::afe::{AcCoupler, Channel, Driver, Receiver};
use crate::cdr::{recover_groups, sample_phases_jittered, CdrOutput, PhaseGroups, WindowDecision};
use crate::config::LinkConfig;
use crate::error::Error;
use crate::fsm::{deserialize, serialize};
use crate::prbs::{prbs_align_and_count_errors, prbs_generate, Alignment, LfsrSpec};
use crate::rng::{stream_rng, STREAM_FRAMES, STREAM_GLITCH, STREAM_RX_NOISE};
use crate::types::{Bitstream, DigitalWaveform, ParallelFrame, Waveform};

/// Shortest run accepted by [`run_link`].
pub const MIN_RUN_BITS: usize = 1000;

/// Bits pushed through the analog stages per block.
const CHUNK_BITS: usize = 4096;

/// Slack on top of the FIFO depth when searching for the end-to-end delay.
const LAG_SLACK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidalJitter {
    /// Peak displacement of the sampling instants, in UI.
    pub amplitude_ui: f64,
    pub period_ui: f64,
}

impl SinusoidalJitter {
    pub fn offset_ui(&self, ui: usize) -> f64 {
        self.amplitude_ui * (TAU * ui as f64 / self.period_ui).sin()
    }
}

/// Test-bench impairments applied on top of the configured link.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Impairments {
    /// Extra delay of the received waveform, in UI. Rounded to the sample grid.
    pub phase_offset_ui: f64,
    pub jitter: Option<SinusoidalJitter>,
    /// Probability of flipping each oversampled CDR sample. Flips are kept
    /// isolated: no two land within two samples of each other.
    pub glitch_rate: f64,
}

impl Impairments {
    fn check(&self) -> Result<(), Error> {
        if !(self.phase_offset_ui.is_finite() && self.phase_offset_ui >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "phase offset {} UI must be finite and non-negative",
                self.phase_offset_ui
            )));
        }
        if !(0.0..1.0).contains(&self.glitch_rate) {
            return Err(Error::InvalidInput(format!(
                "glitch rate {} must be in [0, 1)",
                self.glitch_rate
            )));
        }
        if let Some(j) = self.jitter {
            if !(j.amplitude_ui.is_finite() && j.amplitude_ui >= 0.0)
                || !(j.period_ui.is_finite() && j.period_ui > 0.0)
            {
                return Err(Error::InvalidInput(format!("bad jitter {j:?}")));
            }
        }
        Ok(())
    }
}

/// Outcome of one PRBS run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub n_bits: usize,
    /// Bits compared after lock and alignment.
    pub bit_count: usize,
    pub error_count: usize,
    /// `error_count / bit_count`.
    pub ber: f64,
    /// False when the received stream never matched the PRBS. The counts
    /// then hold the best-lag mismatch figures and `ber` sits near 0.5.
    pub locked: bool,
    /// First recovered bit that is compared (CDR settling plus alignment lag).
    pub preamble_bits: usize,
    pub lock_ui: usize,
    pub aligned_lag: usize,
    pub phase_switches: usize,
    pub fifo_events: usize,
    pub windows: Vec<WindowDecision>,
    pub fingerprint: String,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.locked && self.error_count == 0
    }

    pub fn final_phase(&self) -> Option<usize> {
        self.windows.last().map(|w| w.selected_after)
    }

    /// `key,value`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        let final_phase = self.final_phase().map_or("none".to_string(), |p| p.to_string());
        let rows: [(&str, String); 12] = [
            ("n_bits", self.n_bits.to_string()),
            ("bit_count", self.bit_count.to_string()),
            ("error_count", self.error_count.to_string()),
            ("ber", format!("{:?}", self.ber)),
            ("locked", self.locked.to_string()),
            ("preamble_bits", self.preamble_bits.to_string()),
            ("lock_ui", self.lock_ui.to_string()),
            ("aligned_lag", self.aligned_lag.to_string()),
            ("phase_switches", self.phase_switches.to_string()),
            ("fifo_events", self.fifo_events.to_string()),
            ("final_phase", final_phase),
            ("config_fingerprint", self.fingerprint.clone()),
        ];
        for (k, v) in rows {
            let _ = writeln!(s, "{k},{v}");
        }
        s
    }

    /// `window,end_ui,candidate,selected_phase`
    pub fn phase_trace_csv(&self) -> String {
        let mut s = String::from("window,end_ui,candidate,selected_phase\n");
        for (i, w) in self.windows.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{}", i, w.end_ui, w.candidate, w.selected_after);
        }
        s
    }
}

/// SHA-256 of the canonical config text, hex encoded.
pub fn config_fingerprint(cfg: &LinkConfig) -> String {
    let digest = Sha256::digest(cfg.to_config_string().as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// UI by which a well-behaved CDR has settled: one window to observe plus
/// the hysteresis confirmations.
pub fn acquisition_bound_ui(cfg: &LinkConfig) -> usize {
    cfg.cdr.window_ui * (cfg.cdr.jitter_hysteresis + 1)
}

/// Largest end-to-end delay, in UI, the aligner searches.
pub fn max_lag(cfg: &LinkConfig) -> usize {
    cfg.cdr.fifo_depth + LAG_SLACK
}

/// Analog path from bits to the receiver's logic trace, processed in blocks.
/// The line idles at the first bit's level for the offset delay.
fn receive(cfg: &LinkConfig, bits: &[bool], delay_samples: usize) -> Result<DigitalWaveform, Error> {
    let spu = cfg.samples_per_ui;
    let total = bits.len() * spu;
    let mut driver = Driver::new(cfg)?;
    let mut channel = Channel::new(cfg)?;
    let mut coupler = AcCoupler::new(cfg, 0.5 * cfg.vdd * cfg.channel_gain())?;
    let mut rx = Receiver::new(cfg, stream_rng(cfg.rng_seed, STREAM_RX_NOISE));

    let mut levels = Vec::with_capacity(total);
    let mut buf = Vec::with_capacity((CHUNK_BITS + 1) * spu + delay_samples);
    if let Some(&first) = bits.first() {
        driver.idle(first, delay_samples, &mut buf);
    }
    for chunk in bits.chunks(CHUNK_BITS) {
        driver.render(chunk, &mut buf);
        channel.process(&mut buf);
        coupler.process(&mut buf);
        let take = buf.len().min(total - levels.len());
        rx.process(&buf[..take], &mut levels);
        buf.clear();
    }
    Ok(DigitalWaveform::new(levels, spu))
}

fn inject_glitches(groups: &mut PhaseGroups, rate: f64, seed: u64) {
    if rate <= 0.0 {
        return;
    }
    let mut rng = stream_rng(seed, STREAM_GLITCH);
    let n = groups.samples.len();
    let mut i = 0;
    while i < n {
        if rng.random_bool(rate) {
            groups.samples[i] = !groups.samples[i];
            i += 3;
        } else {
            i += 1;
        }
    }
}

fn simulate(cfg: &LinkConfig, bits: &[bool], imp: &Impairments) -> Result<CdrOutput, Error> {
    imp.check()?;
    let delay = (imp.phase_offset_ui * cfg.samples_per_ui as f64).round() as usize;
    let digital = receive(cfg, bits, delay)?;
    let jitter = imp.jitter;
    let mut groups = sample_phases_jittered(&digital, cfg, |k| {
        jitter.map_or(0.0, |j| j.offset_ui(k))
    })?;
    inject_glitches(&mut groups, imp.glitch_rate, cfg.rng_seed);
    Ok(recover_groups(&groups, &cfg.cdr))
}

/// Reference spec advanced by `k` bits.
fn advanced(spec: &LfsrSpec, k: usize) -> Result<LfsrSpec, Error> {
    let mut l = spec.lfsr();
    l.advance(k as u64);
    spec.with_seed(l.state())
}

pub fn run_link(cfg: &LinkConfig, n_bits: usize) -> Result<RunReport, Error> {
    run_link_with(cfg, n_bits, &Impairments::default())
}

/// Full PRBS run. Counting starts at the CDR lock point, or at
/// [`acquisition_bound_ui`] if the CDR is still moving then, and is then
/// shifted by the alignment lag.
pub fn run_link_with(cfg: &LinkConfig, n_bits: usize, imp: &Impairments) -> Result<RunReport, Error> {
    let cfg = cfg.clone().validate()?;
    if n_bits < MIN_RUN_BITS {
        return Err(Error::TooShort {
            len: n_bits,
            needed: MIN_RUN_BITS,
        });
    }
    let spec = cfg.prbs_spec()?;
    let tx = prbs_generate(&spec, n_bits);
    let cdr = simulate(&cfg, tx.bits(), imp)?;

    let start = cdr.lock_ui.min(acquisition_bound_ui(&cfg));
    let rx = Bitstream(cdr.recovered_bits.bits()[start..].to_vec());
    let alignment = prbs_align_and_count_errors(&advanced(&spec, start)?, &rx, max_lag(&cfg))?;
    let (locked, lag, errors, compared) = match alignment {
        Alignment::Locked {
            lag,
            errors,
            compared,
        } => (true, lag, errors, compared),
        Alignment::NoLock {
            best_lag,
            mismatches,
            compared,
        } => (false, best_lag, mismatches, compared),
    };

    Ok(RunReport {
        n_bits,
        bit_count: compared,
        error_count: errors,
        ber: errors as f64 / compared as f64,
        locked,
        preamble_bits: start + lag,
        lock_ui: cdr.lock_ui,
        aligned_lag: lag,
        phase_switches: cdr.phase_switches,
        fifo_events: cdr.fifo_events,
        windows: cdr.windows,
        fingerprint: config_fingerprint(&cfg),
    })
}

fn check_bracket(lo: f64, hi: f64, resolution: f64) -> Result<(), Error> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidBracket(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::InvalidBracket(format!("resolution {resolution} must be positive")));
    }
    Ok(())
}

fn passes_at_loss(cfg: &LinkConfig, n_bits: usize, loss_db: f64) -> Result<bool, Error> {
    let probe = LinkConfig {
        channel_loss_db: loss_db,
        ..cfg.clone()
    };
    Ok(run_link(&probe, n_bits)?.passed())
}

/// Largest channel loss with an error-free run, to within `resolution_db`.
/// `loss_lo` must pass and `loss_hi` must fail.
pub fn max_loss_search(
    cfg: &LinkConfig,
    n_bits: usize,
    loss_lo: f64,
    loss_hi: f64,
    resolution_db: f64,
) -> Result<f64, Error> {
    check_bracket(loss_lo, loss_hi, resolution_db)?;
    if !passes_at_loss(cfg, n_bits, loss_lo)? {
        return Err(Error::InvalidBracket(format!("{loss_lo} dB already fails")));
    }
    if passes_at_loss(cfg, n_bits, loss_hi)? {
        return Err(Error::InvalidBracket(format!("{loss_hi} dB still passes")));
    }
    let (mut lo, mut hi) = (loss_lo, loss_hi);
    while hi - lo > resolution_db {
        let mid = 0.5 * (lo + hi);
        if passes_at_loss(cfg, n_bits, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Link with the channel replaced by an ideal attenuator that delivers a
/// settled peak-to-peak swing of `swing_v` to the receiver.
pub fn injected_swing_config(cfg: &LinkConfig, swing_v: f64) -> LinkConfig {
    LinkConfig {
        channel_loss_db: 20.0 * (cfg.vdd / swing_v).log10(),
        channel_bw: Some(f64::INFINITY),
        ..cfg.clone()
    }
}

fn passes_at_swing(cfg: &LinkConfig, n_bits: usize, swing_v: f64) -> Result<bool, Error> {
    Ok(run_link(&injected_swing_config(cfg, swing_v), n_bits)?.passed())
}

/// Smallest injected swing, in volts peak-to-peak, with an error-free run,
/// to within `resolution_v`. `swing_lo` must fail and `swing_hi` must pass.
pub fn sensitivity_search(
    cfg: &LinkConfig,
    n_bits: usize,
    swing_lo: f64,
    swing_hi: f64,
    resolution_v: f64,
) -> Result<f64, Error> {
    check_bracket(swing_lo, swing_hi, resolution_v)?;
    if swing_lo <= 0.0 || swing_hi > cfg.vdd {
        return Err(Error::InvalidBracket(format!(
            "swing bracket [{swing_lo}, {swing_hi}] must lie in (0, vdd]"
        )));
    }
    if passes_at_swing(cfg, n_bits, swing_lo)? {
        return Err(Error::InvalidBracket(format!("{swing_lo} V already passes")));
    }
    if !passes_at_swing(cfg, n_bits, swing_hi)? {
        return Err(Error::InvalidBracket(format!("{swing_hi} V still fails")));
    }
    let (mut lo, mut hi) = (swing_lo, swing_hi);
    while hi - lo > resolution_v {
        let mid = 0.5 * (lo + hi);
        if passes_at_swing(cfg, n_bits, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub n_bits: usize,
    pub loss_lo_db: f64,
    pub loss_hi_db: f64,
    pub loss_resolution_db: f64,
    pub swing_lo_v: f64,
    pub swing_hi_v: f64,
    pub swing_resolution_v: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            n_bits: 100_000,
            loss_lo_db: 20.0,
            loss_hi_db: 45.0,
            loss_resolution_db: 0.25,
            swing_lo_v: 0.001,
            swing_hi_v: 0.2,
            swing_resolution_v: 0.000_25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub bitrate: f64,
    pub sensitivity_v: f64,
    pub max_loss_db: f64,
}

/// Sensitivity and maximum loss per bitrate, sorted by bitrate.
pub fn sensitivity_sweep(
    base: &LinkConfig,
    bitrates: &[f64],
    settings: &SweepSettings,
) -> Result<Vec<SweepRow>, Error> {
    if bitrates.is_empty() {
        return Err(Error::InvalidInput("bitrate list is empty".into()));
    }
    let mut rows = bitrates
        .par_iter()
        .map(|&bitrate| {
            let cfg = LinkConfig {
                bitrate,
                ..base.clone()
            }
            .validate()?;
            Ok(SweepRow {
                bitrate,
                sensitivity_v: sensitivity_search(
                    &cfg,
                    settings.n_bits,
                    settings.swing_lo_v,
                    settings.swing_hi_v,
                    settings.swing_resolution_v,
                )?,
                max_loss_db: max_loss_search(
                    &cfg,
                    settings.n_bits,
                    settings.loss_lo_db,
                    settings.loss_hi_db,
                    settings.loss_resolution_db,
                )?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    rows.sort_by(|a, b| a.bitrate.total_cmp(&b.bitrate));
    Ok(rows)
}

/// `bitrate_hz,sensitivity_v,max_loss_db`
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("bitrate_hz,sensitivity_v,max_loss_db\n");
    for r in rows {
        let _ = writeln!(s, "{:?},{:?},{:?}", r.bitrate, r.sensitivity_v, r.max_loss_db);
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossPoint {
    pub loss_db: f64,
    pub report: RunReport,
}

/// One run per loss value, sorted by loss.
pub fn loss_sweep(cfg: &LinkConfig, n_bits: usize, losses: &[f64]) -> Result<Vec<LossPoint>, Error> {
    let mut points = losses
        .par_iter()
        .map(|&loss_db| {
            let probe = LinkConfig {
                channel_loss_db: loss_db,
                ..cfg.clone()
            };
            Ok(LossPoint {
                loss_db,
                report: run_link(&probe, n_bits)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    points.sort_by(|a, b| a.loss_db.total_cmp(&b.loss_db));
    Ok(points)
}

/// `loss_db,bit_count,error_count,ber,locked`
pub fn loss_sweep_csv(points: &[LossPoint]) -> String {
    let mut s = String::from("loss_db,bit_count,error_count,ber,locked\n");
    for p in points {
        let r = &p.report;
        let _ = writeln!(
            s,
            "{:?},{},{},{:?},{}",
            p.loss_db, r.bit_count, r.error_count, r.ber, r.locked
        );
    }
    s
}

pub fn random_frames(seed: u64, n: usize) -> Vec<ParallelFrame> {
    let mut rng = stream_rng(seed, STREAM_FRAMES);
    (0..n).map(|_| ParallelFrame::new(rng.random())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameTransfer {
    pub frames: Vec<ParallelFrame>,
    /// Trailing payload bits that did not fill a frame.
    pub leftover_bits: usize,
    pub aligned_lag: usize,
    pub lock_ui: usize,
}

/// Sends `frames` after a PRBS preamble of `preamble_bits`, aligns on the
/// preamble, and deserializes the payload that follows it.
pub fn transfer_frames(
    cfg: &LinkConfig,
    frames: &[ParallelFrame],
    preamble_bits: usize,
) -> Result<FrameTransfer, Error> {
    let cfg = cfg.clone().validate()?;
    let spec = cfg.prbs_spec()?;
    let lag_limit = max_lag(&cfg);
    let needed = acquisition_bound_ui(&cfg) + lag_limit + spec.order() as usize + 1;
    if preamble_bits < needed {
        return Err(Error::TooShort {
            len: preamble_bits,
            needed,
        });
    }
    let payload = serialize(frames);
    let mut bits = prbs_generate(&spec, preamble_bits).0;
    bits.extend_from_slice(payload.bits());
    // Flush the CDR pipeline with continuation bits.
    bits.extend(prbs_generate(&spec, lag_limit + 1).0);
    let cdr = simulate(&cfg, &bits, &Impairments::default())?;

    let start = cdr.lock_ui.min(acquisition_bound_ui(&cfg));
    let rx = cdr.recovered_bits.bits();
    let preamble = Bitstream(rx[start..preamble_bits].to_vec());
    let lag = match prbs_align_and_count_errors(&advanced(&spec, start)?, &preamble, lag_limit)? {
        Alignment::Locked { lag, .. } => lag,
        Alignment::NoLock { .. } => {
            return Err(Error::InvalidInput("link did not lock on the preamble".into()))
        }
    };
    let begin = preamble_bits + lag;
    let (out, leftover_bits) = deserialize(&Bitstream(rx[begin..begin + payload.len()].to_vec()));
    Ok(FrameTransfer {
        frames: out,
        leftover_bits,
        aligned_lag: lag,
        lock_ui: cdr.lock_ui,
    })
}

/// Snapshots of each analog stage for plotting and eye analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkWaveforms {
    pub driver: Waveform,
    pub channel: Waveform,
    /// After AC coupling and bias: the receiver input.
    pub rx_input: Waveform,
    pub rx_logic: DigitalWaveform,
}

/// First `n_ui` UI of the PRBS through every analog stage.
pub fn capture_waveforms(cfg: &LinkConfig, n_ui: usize) -> Result<LinkWaveforms, Error> {
    let cfg = cfg.clone().validate()?;
    let tx = prbs_generate(&cfg.prbs_spec()?, n_ui);
    let mut driver = Driver::new(&cfg)?;
    let mut channel = Channel::new(&cfg)?;
    let mut coupler = AcCoupler::new(&cfg, 0.5 * cfg.vdd * cfg.channel_gain())?;
    let mut rx = Receiver::new(&cfg, stream_rng(cfg.rng_seed, STREAM_RX_NOISE));

    let mut drv = Vec::new();
    driver.render(tx.bits(), &mut drv);
    let mut ch = drv.clone();
    channel.process(&mut ch);
    let mut rx_in = ch.clone();
    coupler.process(&mut rx_in);
    let mut levels = Vec::with_capacity(rx_in.len());
    rx.process(&rx_in, &mut levels);

    let dt = cfg.dt();
    Ok(LinkWaveforms {
        driver: Waveform::new(drv, dt, 0.0)?,
        channel: Waveform::new(ch, dt, 0.0)?,
        rx_input: Waveform::new(rx_in, dt, 0.0)?,
        rx_logic: DigitalWaveform::new(levels, cfg.samples_per_ui),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean() -> LinkConfig {
        LinkConfig {
            channel_loss_db: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn lossless_link_is_error_free() {
        let r = run_link(&clean(), 20_000).unwrap();
        assert!(r.locked);
        assert_eq!(r.error_count, 0);
        assert_eq!(r.bit_count + r.preamble_bits, 20_000);
        assert_eq!(r.ber, 0.0);
    }

    #[test]
    fn short_runs_are_rejected() {
        assert!(matches!(run_link(&clean(), 999), Err(Error::TooShort { .. })));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = LinkConfig {
            vdd: -1.0,
            ..Default::default()
        };
        assert!(matches!(run_link(&cfg, 5000), Err(Error::Config(_))));
    }

    #[test]
    fn swing_inside_dead_zone_does_not_lock() {
        let cfg = LinkConfig {
            channel_loss_db: 40.0,
            ..Default::default()
        };
        let r = run_link(&cfg, 20_000).unwrap();
        assert!(!r.locked);
        assert!(r.ber > 0.25 && r.ber < 0.6, "{}", r.ber);
        assert_eq!(r.ber, r.error_count as f64 / r.bit_count as f64);
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = LinkConfig {
            noise_sigma: 0.004,
            ..Default::default()
        };
        assert_eq!(run_link(&cfg, 5000).unwrap(), run_link(&cfg, 5000).unwrap());
    }

    #[test]
    fn fingerprint_tracks_config() {
        let a = config_fingerprint(&LinkConfig::default());
        assert_eq!(a.len(), 64);
        assert_eq!(a, config_fingerprint(&LinkConfig::default()));
        let other = LinkConfig {
            rng_seed: 2,
            ..Default::default()
        };
        assert_ne!(a, config_fingerprint(&other));
    }

    #[test]
    fn report_csv_has_header_and_keys() {
        let csv = run_link(&clean(), 3000).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("key,value"));
        assert!(csv.contains("\nerror_count,0\n"));
        assert!(csv.contains("\nber,0.0\n"));
    }

    #[test]
    fn bad_brackets() {
        let cfg = clean();
        assert!(matches!(
            max_loss_search(&cfg, 2000, 10.0, 5.0, 0.25),
            Err(Error::InvalidBracket(_))
        ));
        assert!(matches!(
            max_loss_search(&cfg, 2000, 40.0, 45.0, 0.25),
            Err(Error::InvalidBracket(_))
        ));
        let ideal = LinkConfig {
            rx_deadzone: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            max_loss_search(&ideal, 2000, 20.0, 45.0, 0.25),
            Err(Error::InvalidBracket(_))
        ));
    }

    #[test]
    fn empty_sweep_is_an_error() {
        assert!(sensitivity_sweep(&clean(), &[], &SweepSettings::default()).is_err());
    }

    #[test]
    fn frames_cross_the_link() {
        let frames = random_frames(11, 40);
        let t = transfer_frames(&LinkConfig::default(), &frames, 1000).unwrap();
        assert_eq!(t.frames, frames);
        assert_eq!(t.leftover_bits, 0);
    }

    #[test]
    fn injected_swing_is_settled_receiver_swing() {
        let cfg = injected_swing_config(&LinkConfig::default(), 0.032);
        assert!((cfg.channel_gain() * cfg.vdd - 0.032).abs() < 1e-12);
        assert!(cfg.channel_bw_hz().is_infinite());
    }

    #[test]
    fn waveform_capture_lengths() {
        let w = capture_waveforms(&LinkConfig::default(), 150).unwrap();
        assert_eq!(w.driver.len(), 150 * 60);
        assert_eq!(w.rx_input.len(), w.rx_logic.len());
        assert!(w.rx_input.is_finite());
    }
}
