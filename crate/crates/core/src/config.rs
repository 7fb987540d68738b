//! Link configuration, validation and the `key = value` config file format.
//!
//! Keys are the field names of [`LinkConfig`]; CDR fields are prefixed with
//! `cdr.`. Fields whose default is derived from other fields (`driver_tau`,
//! `channel_bw`, `ac_coupling_tau`, `prbs_seed`) accept the literal `auto`.

use std::fmt;
use std::fmt::Write as _;

use crate::error::Error;
use crate::prbs::LfsrSpec;

/// Blind-oversampling CDR knobs. `glitch_filter_len` and `jitter_hysteresis`
/// are the externally programmed scan bits.
#[derive(Debug, Clone, PartialEq)]
pub struct CdrConfig {
    /// Samples taken per UI. Odd, at least 3.
    pub phases: usize,
    /// Decision window length in UIs.
    pub window_ui: usize,
    /// UIs buffered between sampler and bit output.
    pub fifo_depth: usize,
    /// Longest sample run treated as a glitch; 0 disables the filter.
    pub glitch_filter_len: usize,
    /// Consecutive windows a new candidate must win before it is adopted.
    pub jitter_hysteresis: usize,
}

impl Default for CdrConfig {
    fn default() -> Self {
        Self {
            phases: 5,
            window_ui: 64,
            fifo_depth: 16,
            glitch_filter_len: 1,
            jitter_hysteresis: 2,
        }
    }
}

/// Full parameterization of one link simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    /// Line rate in bits/s.
    pub bitrate: f64,
    /// Supply voltage; the driver swings rail to rail.
    pub vdd: f64,
    /// Analog grid points per UI.
    pub samples_per_ui: usize,
    /// Driver RC time constant; `None` means `driver_r_out * driver_load_cap`.
    pub driver_tau: Option<f64>,
    /// Driver output resistance in ohms.
    pub driver_r_out: f64,
    /// Capacitive load the driver is sized for, in farads.
    pub driver_load_cap: f64,
    /// Flat insertion loss in dB.
    pub channel_loss_db: f64,
    /// Channel -3 dB bandwidth in Hz; `None` means `1.5 * bitrate`. May be infinite.
    pub channel_bw: Option<f64>,
    /// AC coupling high-pass time constant; `None` means 1e7 UI.
    pub ac_coupling_tau: Option<f64>,
    /// Small-signal gain of the feedback inverter stage.
    pub rx_gain: f64,
    /// Comparator dead-zone half-width in volts.
    pub rx_deadzone: f64,
    /// Input-referred Gaussian noise std-dev in volts.
    pub noise_sigma: f64,
    /// PRBS register length (7, 15 or 31).
    pub prbs_order: u32,
    /// Initial LFSR state; `None` means all ones.
    pub prbs_seed: Option<u64>,
    pub cdr: CdrConfig,
    pub rng_seed: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            bitrate: 2e9,
            vdd: 1.8,
            samples_per_ui: 60,
            driver_tau: None,
            driver_r_out: 25.0,
            driver_load_cap: 2e-12,
            channel_loss_db: 34.0,
            channel_bw: None,
            ac_coupling_tau: None,
            rx_gain: 100.0,
            rx_deadzone: 0.016,
            noise_sigma: 0.0,
            prbs_order: 31,
            prbs_seed: None,
            cdr: CdrConfig::default(),
            rng_seed: 1,
        }
    }
}

/// Channel bandwidth as a multiple of the bitrate when `channel_bw` is `auto`.
pub const DEFAULT_CHANNEL_BW_PER_BITRATE: f64 = 1.5;
/// AC coupling time constant in UIs when `ac_coupling_tau` is `auto`.
pub const DEFAULT_AC_COUPLING_UI: f64 = 1e7;

/// One violated constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub value: String,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}: {}", self.field, self.value, self.reason)
    }
}

impl LinkConfig {
    /// Unit interval in seconds.
    pub fn ui(&self) -> f64 {
        1.0 / self.bitrate
    }

    /// Analog grid sample period in seconds.
    pub fn dt(&self) -> f64 {
        self.ui() / self.samples_per_ui as f64
    }

    pub fn driver_tau_s(&self) -> f64 {
        self.driver_tau
            .unwrap_or(self.driver_r_out * self.driver_load_cap)
    }

    pub fn channel_bw_hz(&self) -> f64 {
        self.channel_bw
            .unwrap_or(DEFAULT_CHANNEL_BW_PER_BITRATE * self.bitrate)
    }

    /// Channel pole time constant, zero for infinite bandwidth.
    pub fn channel_tau_s(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * self.channel_bw_hz())
    }

    pub fn ac_coupling_tau_s(&self) -> f64 {
        self.ac_coupling_tau
            .unwrap_or(DEFAULT_AC_COUPLING_UI * self.ui())
    }

    /// Linear amplitude factor of the flat channel loss.
    pub fn channel_gain(&self) -> f64 {
        10f64.powf(-self.channel_loss_db / 20.0)
    }

    pub fn prbs_spec(&self) -> Result<LfsrSpec, Error> {
        let mask = LfsrSpec::order_mask(self.prbs_order)?;
        LfsrSpec::new(self.prbs_order, self.prbs_seed.unwrap_or(mask))
    }

    /// Checks every invariant and returns the config unchanged, or the full
    /// list of violations.
    pub fn validate(self) -> Result<Self, Error> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::Config(violations))
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut check = |ok: bool, field: &str, value: String, reason: &str| {
            if !ok {
                v.push(Violation {
                    field: field.to_string(),
                    value,
                    reason: reason.to_string(),
                });
            }
        };
        let pos = |x: f64| x > 0.0 && x.is_finite();
        let nonneg = |x: f64| x >= 0.0 && x.is_finite();

        check(pos(self.bitrate), "bitrate", fmt_f(self.bitrate), "must be > 0");
        check(pos(self.vdd), "vdd", fmt_f(self.vdd), "must be > 0");
        check(
            self.samples_per_ui >= 8,
            "samples_per_ui",
            self.samples_per_ui.to_string(),
            "must be >= 8",
        );
        if let Some(t) = self.driver_tau {
            check(nonneg(t), "driver_tau", fmt_f(t), "must be >= 0");
        }
        check(nonneg(self.driver_r_out), "driver_r_out", fmt_f(self.driver_r_out), "must be >= 0");
        check(
            nonneg(self.driver_load_cap),
            "driver_load_cap",
            fmt_f(self.driver_load_cap),
            "must be >= 0",
        );
        check(
            nonneg(self.channel_loss_db),
            "channel_loss_db",
            fmt_f(self.channel_loss_db),
            "must be >= 0",
        );
        if let Some(bw) = self.channel_bw {
            check(bw > 0.0, "channel_bw", fmt_f(bw), "must be > 0");
        }
        if let Some(t) = self.ac_coupling_tau {
            check(t > 0.0, "ac_coupling_tau", fmt_f(t), "must be > 0");
        }
        check(pos(self.rx_gain), "rx_gain", fmt_f(self.rx_gain), "must be > 0");
        check(nonneg(self.rx_deadzone), "rx_deadzone", fmt_f(self.rx_deadzone), "must be >= 0");
        check(nonneg(self.noise_sigma), "noise_sigma", fmt_f(self.noise_sigma), "must be >= 0");
        match LfsrSpec::order_mask(self.prbs_order) {
            Ok(mask) => {
                if let Some(seed) = self.prbs_seed {
                    check(
                        seed != 0 && seed <= mask,
                        "prbs_seed",
                        seed.to_string(),
                        "must be nonzero and fit in prbs_order bits",
                    );
                }
            }
            Err(_) => check(
                false,
                "prbs_order",
                self.prbs_order.to_string(),
                "must be 7, 15 or 31",
            ),
        }

        let cdr = &self.cdr;
        check(
            cdr.phases >= 3 && cdr.phases % 2 == 1,
            "cdr.phases",
            cdr.phases.to_string(),
            "must be odd and >= 3",
        );
        check(
            cdr.phases == 0 || self.samples_per_ui % cdr.phases == 0,
            "samples_per_ui",
            self.samples_per_ui.to_string(),
            "must be divisible by cdr.phases",
        );
        check(cdr.window_ui >= 8, "cdr.window_ui", cdr.window_ui.to_string(), "must be >= 8");
        check(cdr.fifo_depth >= 4, "cdr.fifo_depth", cdr.fifo_depth.to_string(), "must be >= 4");
        check(
            cdr.glitch_filter_len < cdr.phases,
            "cdr.glitch_filter_len",
            cdr.glitch_filter_len.to_string(),
            "must be < cdr.phases",
        );
        check(
            cdr.jitter_hysteresis >= 1,
            "cdr.jitter_hysteresis",
            cdr.jitter_hysteresis.to_string(),
            "must be >= 1",
        );
        v
    }

    /// Parses a config file. Keys not present keep their defaults; the result
    /// is not validated.
    pub fn from_config_str(text: &str) -> Result<Self, Error> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::ConfigParse { message, .. } => Error::ConfigParse { line: i + 1, message },
                other => other,
            })?;
        }
        Ok(cfg)
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        match key {
            "bitrate" => self.bitrate = parse_f(key, value)?,
            "vdd" => self.vdd = parse_f(key, value)?,
            "samples_per_ui" => self.samples_per_ui = parse_u(key, value)? as usize,
            "driver_tau" => self.driver_tau = parse_auto_f(key, value)?,
            "driver_r_out" => self.driver_r_out = parse_f(key, value)?,
            "driver_load_cap" => self.driver_load_cap = parse_f(key, value)?,
            "channel_loss_db" => self.channel_loss_db = parse_f(key, value)?,
            "channel_bw" => self.channel_bw = parse_auto_f(key, value)?,
            "ac_coupling_tau" => self.ac_coupling_tau = parse_auto_f(key, value)?,
            "rx_gain" => self.rx_gain = parse_f(key, value)?,
            "rx_deadzone" => self.rx_deadzone = parse_f(key, value)?,
            "noise_sigma" => self.noise_sigma = parse_f(key, value)?,
            "prbs_order" => self.prbs_order = parse_u(key, value)? as u32,
            "prbs_seed" => {
                self.prbs_seed = if value == "auto" {
                    None
                } else {
                    Some(parse_u(key, value)?)
                }
            }
            "rng_seed" => self.rng_seed = parse_u(key, value)?,
            "cdr.phases" => self.cdr.phases = parse_u(key, value)? as usize,
            "cdr.window_ui" => self.cdr.window_ui = parse_u(key, value)? as usize,
            "cdr.fifo_depth" => self.cdr.fifo_depth = parse_u(key, value)? as usize,
            "cdr.glitch_filter_len" => self.cdr.glitch_filter_len = parse_u(key, value)? as usize,
            "cdr.jitter_hysteresis" => self.cdr.jitter_hysteresis = parse_u(key, value)? as usize,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Canonical config file text; `from_config_str` reads it back exactly.
    pub fn to_config_string(&self) -> String {
        let auto = |v: Option<f64>| v.map_or_else(|| "auto".to_string(), fmt_f);
        let mut s = String::new();
        let _ = writeln!(s, "bitrate = {}", fmt_f(self.bitrate));
        let _ = writeln!(s, "vdd = {}", fmt_f(self.vdd));
        let _ = writeln!(s, "samples_per_ui = {}", self.samples_per_ui);
        let _ = writeln!(s, "driver_tau = {}", auto(self.driver_tau));
        let _ = writeln!(s, "driver_r_out = {}", fmt_f(self.driver_r_out));
        let _ = writeln!(s, "driver_load_cap = {}", fmt_f(self.driver_load_cap));
        let _ = writeln!(s, "channel_loss_db = {}", fmt_f(self.channel_loss_db));
        let _ = writeln!(s, "channel_bw = {}", auto(self.channel_bw));
        let _ = writeln!(s, "ac_coupling_tau = {}", auto(self.ac_coupling_tau));
        let _ = writeln!(s, "rx_gain = {}", fmt_f(self.rx_gain));
        let _ = writeln!(s, "rx_deadzone = {}", fmt_f(self.rx_deadzone));
        let _ = writeln!(s, "noise_sigma = {}", fmt_f(self.noise_sigma));
        let _ = writeln!(s, "prbs_order = {}", self.prbs_order);
        let _ = writeln!(
            s,
            "prbs_seed = {}",
            self.prbs_seed.map_or_else(|| "auto".to_string(), |v| v.to_string())
        );
        let _ = writeln!(s, "rng_seed = {}", self.rng_seed);
        let _ = writeln!(s, "cdr.phases = {}", self.cdr.phases);
        let _ = writeln!(s, "cdr.window_ui = {}", self.cdr.window_ui);
        let _ = writeln!(s, "cdr.fifo_depth = {}", self.cdr.fifo_depth);
        let _ = writeln!(s, "cdr.glitch_filter_len = {}", self.cdr.glitch_filter_len);
        let _ = writeln!(s, "cdr.jitter_hysteresis = {}", self.cdr.jitter_hysteresis);
        s
    }
}

/// Locale-free float formatting that round-trips through `str::parse`.
pub(crate) fn fmt_f(x: f64) -> String {
    format!("{x:?}")
}

fn parse_f(key: &str, value: &str) -> Result<f64, Error> {
    value.parse::<f64>().map_err(|_| Error::ConfigParse {
        line: 0,
        message: format!("`{key}` expects a number, got `{value}`"),
    })
}

fn parse_auto_f(key: &str, value: &str) -> Result<Option<f64>, Error> {
    if value == "auto" {
        Ok(None)
    } else {
        parse_f(key, value).map(Some)
    }
}

fn parse_u(key: &str, value: &str) -> Result<u64, Error> {
    let parsed = match value.strip_prefix("0x").or_else(|| value.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => value.parse::<u64>(),
    };
    parsed.map_err(|_| Error::ConfigParse {
        line: 0,
        message: format!("`{key}` expects a non-negative integer, got `{value}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fields(err: Error) -> Vec<String> {
        match err {
            Error::Config(v) => v.into_iter().map(|x| x.field).collect(),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn default_is_valid() {
        assert!(LinkConfig::default().validate().is_ok());
    }

    #[test]
    fn negative_loss_is_named() {
        let cfg = LinkConfig {
            channel_loss_db: -1.0,
            ..Default::default()
        };
        assert_eq!(fields(cfg.validate().unwrap_err()), vec!["channel_loss_db"]);
    }

    #[test]
    fn even_phase_count_is_named() {
        let mut cfg = LinkConfig::default();
        cfg.cdr.phases = 4;
        let f = fields(cfg.validate().unwrap_err());
        assert!(f.contains(&"cdr.phases".to_string()), "{f:?}");
    }

    #[test]
    fn all_violations_are_reported() {
        let mut cfg = LinkConfig {
            bitrate: 0.0,
            vdd: -1.0,
            rx_deadzone: -0.1,
            samples_per_ui: 4,
            ..Default::default()
        };
        cfg.cdr.window_ui = 2;
        cfg.cdr.jitter_hysteresis = 0;
        let f = fields(cfg.validate().unwrap_err());
        for name in [
            "bitrate",
            "vdd",
            "rx_deadzone",
            "samples_per_ui",
            "cdr.window_ui",
            "cdr.jitter_hysteresis",
        ] {
            assert!(f.contains(&name.to_string()), "{name} missing from {f:?}");
        }
    }

    #[test]
    fn indivisible_grid_is_rejected() {
        let cfg = LinkConfig {
            samples_per_ui: 64,
            ..Default::default()
        };
        assert_eq!(fields(cfg.validate().unwrap_err()), vec!["samples_per_ui"]);
    }

    #[test]
    fn derived_defaults() {
        let cfg = LinkConfig::default();
        assert!((cfg.driver_tau_s() - 50e-12).abs() < 1e-24);
        assert_eq!(cfg.channel_bw_hz(), 3e9);
        assert!((cfg.ac_coupling_tau_s() - 5e-3).abs() < 1e-15);
        let c = LinkConfig {
            driver_r_out: 50.0,
            ..Default::default()
        };
        assert!((c.driver_tau_s() - 100e-12).abs() < 1e-24);
    }

    #[test]
    fn parses_comments_and_auto() {
        let text = "# corner\nchannel_loss_db = 20 # trailing\n\ndriver_tau = 1e-10\nchannel_bw = inf\ncdr.phases = 7\nsamples_per_ui = 63\n";
        let cfg = LinkConfig::from_config_str(text).unwrap();
        assert_eq!(cfg.channel_loss_db, 20.0);
        assert_eq!(cfg.driver_tau, Some(1e-10));
        assert_eq!(cfg.channel_bw, Some(f64::INFINITY));
        assert_eq!(cfg.cdr.phases, 7);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn unknown_key_and_bad_value() {
        assert!(matches!(
            LinkConfig::from_config_str("bogus = 1"),
            Err(Error::UnknownKey(k)) if k == "bogus"
        ));
        assert!(matches!(
            LinkConfig::from_config_str("vdd = 1.8\nvdd = high"),
            Err(Error::ConfigParse { line: 2, .. })
        ));
        assert!(matches!(
            LinkConfig::from_config_str("just words"),
            Err(Error::ConfigParse { line: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn config_text_round_trips(
            loss in 0.0f64..60.0,
            bw in prop::option::of(1e8f64..1e11),
            seed in any::<u64>(),
            dz in 0.0f64..0.1,
            phases in prop::sample::select(vec![3usize, 5, 7]),
        ) {
            let mut cfg = LinkConfig {
                channel_loss_db: loss,
                channel_bw: bw,
                rng_seed: seed,
                rx_deadzone: dz,
                ..Default::default()
            };
            cfg.cdr.phases = phases;
            let back = LinkConfig::from_config_str(&cfg.to_config_string()).unwrap();
            prop_assert_eq!(back, cfg);
        }

        #[test]
        fn validation_is_idempotent(loss in -5.0f64..50.0, spu in 1usize..100, phases in 1usize..9) {
            let mut cfg = LinkConfig { channel_loss_db: loss, samples_per_ui: spu, ..Default::default() };
            cfg.cdr.phases = phases;
            let once = cfg.clone().validate();
            match once {
                Ok(c) => prop_assert_eq!(c.clone().validate().unwrap(), c),
                Err(Error::Config(v)) => prop_assert_eq!(cfg.violations(), v),
                Err(e) => prop_assert!(false, "unexpected {}", e),
            }
        }
    }
}
