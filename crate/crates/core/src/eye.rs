//! Eye diagram: the waveform folded modulo one UI into a phase by voltage
//! histogram.

use std::fmt::Write as _;

use crate::config::LinkConfig;
use crate::error::Error;
use crate::types::Waveform;

/// Shortest waveform accepted by [`eye_diagram`], in UI.
pub const MIN_EYE_UI: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct EyeDiagram {
    pub phase_bins: usize,
    pub volt_bins: usize,
    pub v_min: f64,
    pub v_max: f64,
    /// Row-major by phase: `counts[phase * volt_bins + volt]`.
    pub counts: Vec<u64>,
}

/// Sample `i` lands in phase bin `i mod samples_per_ui`; voltages are binned
/// uniformly over the waveform's own range.
pub fn eye_diagram(w: &Waveform, cfg: &LinkConfig, bins_v: usize) -> Result<EyeDiagram, Error> {
    let spu = cfg.samples_per_ui;
    if spu == 0 || bins_v == 0 {
        return Err(Error::InvalidInput("eye needs at least one bin per axis".into()));
    }
    let needed = MIN_EYE_UI * spu;
    if w.len() < needed {
        return Err(Error::TooShort {
            len: w.len(),
            needed,
        });
    }
    if !w.is_finite() {
        return Err(Error::InvalidInput("waveform has non-finite samples".into()));
    }
    let (v_min, v_max) = w
        .samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = v_max - v_min;
    let mut counts = vec![0u64; spu * bins_v];
    for (i, &v) in w.samples.iter().enumerate() {
        let vb = if span > 0.0 {
            (((v - v_min) / span * bins_v as f64) as usize).min(bins_v - 1)
        } else {
            0
        };
        counts[(i % spu) * bins_v + vb] += 1;
    }
    Ok(EyeDiagram {
        phase_bins: spu,
        volt_bins: bins_v,
        v_min,
        v_max,
        counts,
    })
}

impl EyeDiagram {
    pub fn count(&self, phase: usize, volt: usize) -> u64 {
        self.counts[phase * self.volt_bins + volt]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_height(&self) -> f64 {
        (self.v_max - self.v_min) / self.volt_bins as f64
    }

    /// Height of the tallest empty stretch at `phase` that has occupied bins
    /// both below and above it, in volts. `None` when the column has no gap.
    pub fn opening(&self, phase: usize) -> Option<f64> {
        let col = &self.counts[phase * self.volt_bins..(phase + 1) * self.volt_bins];
        let occupied: Vec<usize> = (0..col.len()).filter(|&i| col[i] > 0).collect();
        occupied
            .windows(2)
            .map(|p| p[1] - p[0] - 1)
            .filter(|&gap| gap > 0)
            .max()
            .map(|gap| gap as f64 * self.bin_height())
    }

    /// `phase_bin,volt_bin,count`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("phase_bin,volt_bin,count\n");
        for p in 0..self.phase_bins {
            for v in 0..self.volt_bins {
                let _ = writeln!(s, "{p},{v},{}", self.count(p, v));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::afe::drive;
    use crate::types::Bitstream;

    fn cfg() -> LinkConfig {
        LinkConfig::default()
    }

    #[test]
    fn constant_waveform_is_one_row() {
        let c = cfg();
        let w = Waveform::new(vec![0.9; 200 * 60], c.dt(), 0.0).unwrap();
        let e = eye_diagram(&w, &c, 32).unwrap();
        assert_eq!(e.total(), 200 * 60);
        for p in 0..60 {
            assert_eq!(e.count(p, 0), 200);
        }
    }

    #[test]
    fn too_short_is_rejected() {
        let c = cfg();
        let w = Waveform::new(vec![0.0; 99 * 60], c.dt(), 0.0).unwrap();
        assert!(matches!(eye_diagram(&w, &c, 8), Err(Error::TooShort { .. })));
    }

    #[test]
    fn alternating_pattern_opening_matches_scan() {
        let c = cfg();
        let bits: Bitstream = (0..400).map(|i| i % 2 == 0).collect();
        let w = drive(&bits, &c).unwrap();
        let bins = 200;
        let e = eye_diagram(&w, &c, bins).unwrap();
        assert_eq!(e.total() as usize, w.len());

        // Direct scan at the centre phase: lowest "one" minus highest "zero".
        let phase = 30;
        let (mut low_one, mut high_zero) = (f64::INFINITY, f64::NEG_INFINITY);
        for (k, &b) in bits.bits().iter().enumerate() {
            let v = w.samples[k * 60 + phase];
            if b {
                low_one = low_one.min(v);
            } else {
                high_zero = high_zero.max(v);
            }
        }
        let scanned = low_one - high_zero;
        let measured = e.opening(phase).unwrap();
        assert!(measured <= scanned + 1e-12);
        assert!(scanned - measured <= 2.0 * e.bin_height() + 1e-12, "{measured} vs {scanned}");
        // Periodic steady state of an RC driven by a square wave of one UI
        // per level: the half-UI sample of a rising bit starts from the low
        // extreme vdd*a/(1+a), a = exp(-UI/tau). The first few bits start
        // from the idle level instead, hence the loose tolerance.
        let r = c.ui() / c.driver_tau_s();
        let a = (-r).exp();
        let v_low = c.vdd * a / (1.0 + a);
        let v_mid = c.vdd - (c.vdd - v_low) * (-r * (phase + 1) as f64 / 60.0).exp();
        let closed_form = 2.0 * v_mid - c.vdd;
        assert!((scanned - closed_form).abs() < 1e-6, "{scanned} vs {closed_form}");
    }

    #[test]
    fn csv_lists_every_cell() {
        let c = cfg();
        let w = Waveform::new(vec![0.1; 100 * 60], c.dt(), 0.0).unwrap();
        let csv = eye_diagram(&w, &c, 4).unwrap().to_csv();
        assert_eq!(csv.lines().count(), 1 + 60 * 4);
        assert!(csv.starts_with("phase_bin,volt_bin,count\n0,0,100\n0,1,0\n"));
    }
}
