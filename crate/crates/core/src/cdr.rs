//! Blind-oversampling clock and data recovery.
//!
//! The resolved logic trace is sampled at `phases` equally spaced instants per
//! UI. Runs of at most `glitch_filter_len` samples are removed, then a
//! decision block histograms where transitions fall between adjacent phases.
//! At the end of every window the sampling phase opposite the busiest
//! transition bin becomes the candidate; it replaces the selected phase only
//! after winning `jitter_hysteresis` windows in a row. Samples pass through a
//! FIFO and the output bit is read at the selected phase.
//!
//! When the selected phase moves across the UI boundary (e.g. from the last
//! phase to phase 0) the FIFO read pointer advances or retreats by one group,
//! so the recovered stream neither drops nor repeats a bit.

use std::fmt::Write as _;

use crate::config::{CdrConfig, LinkConfig};
use crate::error::Error;
use crate::types::{Bitstream, DigitalWaveform};

/// Per-UI groups of `phases` logic samples, stored flat in time order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseGroups {
    pub phases: usize,
    pub samples: Vec<bool>,
}

impl PhaseGroups {
    pub fn new(phases: usize, samples: Vec<bool>) -> Self {
        debug_assert_eq!(samples.len() % phases, 0);
        Self { phases, samples }
    }

    pub fn ui_count(&self) -> usize {
        self.samples.len() / self.phases
    }

    pub fn group(&self, ui: usize) -> &[bool] {
        &self.samples[ui * self.phases..(ui + 1) * self.phases]
    }

    pub fn groups(&self) -> impl Iterator<Item = &[bool]> {
        self.samples.chunks_exact(self.phases)
    }

    pub fn glitch_filtered(&self, max_len: usize) -> Self {
        Self {
            phases: self.phases,
            samples: glitch_filter(&self.samples, max_len),
        }
    }
}

fn phase_step(samples_per_ui: usize, phases: usize) -> Result<usize, Error> {
    if phases == 0 || samples_per_ui % phases != 0 {
        return Err(Error::IndivisiblePhases {
            samples_per_ui,
            phases,
        });
    }
    Ok(samples_per_ui / phases)
}

/// Decimates the logic trace to `phases` samples per UI, each taken at the
/// middle of its sub-interval.
pub fn sample_phases(digital: &DigitalWaveform, cfg: &LinkConfig) -> Result<PhaseGroups, Error> {
    sample_phases_jittered(digital, cfg, |_| 0.0)
}

/// Like [`sample_phases`], with every sampling instant of UI `k` displaced by
/// `offset_ui(k)` UIs (positive is later). Instants falling outside the trace
/// are clamped to its ends.
pub fn sample_phases_jittered(
    digital: &DigitalWaveform,
    cfg: &LinkConfig,
    offset_ui: impl Fn(usize) -> f64,
) -> Result<PhaseGroups, Error> {
    let spu = digital.samples_per_ui;
    let phases = cfg.cdr.phases;
    let step = phase_step(spu, phases)?;
    let n_ui = digital.ui_count();
    let last = digital.len().saturating_sub(1) as isize;
    let mut samples = Vec::with_capacity(n_ui * phases);
    for k in 0..n_ui {
        let shift = (offset_ui(k) * spu as f64).round() as isize;
        let base = (k * spu + step / 2) as isize + shift;
        for i in 0..phases {
            let idx = (base + (i * step) as isize).clamp(0, last) as usize;
            samples.push(digital.levels[idx]);
        }
    }
    Ok(PhaseGroups::new(phases, samples))
}

/// Removes short runs from a sample stream.
///
/// Runs are visited left to right. An interior run (one with a neighbour on
/// both sides, hence flanked by the opposite value) of at most `max_len`
/// samples takes the value of the already-filtered sample before it. The
/// first and last run are never changed. `max_len = 0` is the identity.
pub fn glitch_filter(samples: &[bool], max_len: usize) -> Vec<bool> {
    if max_len == 0 || samples.is_empty() {
        return samples.to_vec();
    }
    let mut runs: Vec<(bool, usize)> = Vec::new();
    for &s in samples {
        match runs.last_mut() {
            Some((v, n)) if *v == s => *n += 1,
            _ => runs.push((s, 1)),
        }
    }
    let total_runs = runs.len();
    let mut out = Vec::with_capacity(samples.len());
    for (i, &(value, len)) in runs.iter().enumerate() {
        let interior = i > 0 && i + 1 < total_runs;
        let v = if interior && len <= max_len {
            *out.last().expect("interior run has a predecessor")
        } else {
            value
        };
        out.extend(std::iter::repeat_n(v, len));
    }
    out
}

/// Result of one closed decision window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowDecision {
    /// UI index of the last group in the window.
    pub end_ui: usize,
    pub histogram: Vec<u32>,
    pub candidate: usize,
    pub selected_before: usize,
    pub selected_after: usize,
}

/// Decision-block state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdrState {
    /// Transition counts per bin; bin `i` counts changes between phase `i`
    /// and phase `i+1`, the last bin the change across the UI boundary.
    pub phase_histogram: Vec<u32>,
    pub selected_phase: usize,
    /// Candidate awaiting adoption and the number of consecutive windows it won.
    pub pending_phase: Option<(usize, usize)>,
    /// Groups accumulated in the current window.
    pub ui_counter: usize,
    /// UIs consumed since reset.
    pub ui_total: usize,
    last_sample: Option<bool>,
}

impl CdrState {
    /// Fresh state selecting the middle phase.
    pub fn new(cfg: &CdrConfig) -> Self {
        Self::with_phase(cfg, cfg.phases / 2)
    }

    pub fn with_phase(cfg: &CdrConfig, phase: usize) -> Self {
        Self {
            phase_histogram: vec![0; cfg.phases],
            selected_phase: phase % cfg.phases,
            pending_phase: None,
            ui_counter: 0,
            ui_total: 0,
            last_sample: None,
        }
    }

    /// Phase that samples furthest from transition bin `bin`.
    pub fn opposite_phase(bin: usize, phases: usize) -> usize {
        (bin + phases.div_ceil(2)) % phases
    }

    /// Candidate phase from the current histogram. Ties between bins favour
    /// the one whose candidate is already selected, then the lowest bin.
    pub fn candidate(&self) -> usize {
        let phases = self.phase_histogram.len();
        let max = *self.phase_histogram.iter().max().unwrap_or(&0);
        let tied: Vec<usize> = (0..phases)
            .filter(|&b| self.phase_histogram[b] == max)
            .collect();
        tied.iter()
            .map(|&b| Self::opposite_phase(b, phases))
            .find(|&p| p == self.selected_phase)
            .unwrap_or_else(|| Self::opposite_phase(tied[0], phases))
    }

    /// Consumes one UI group. Returns the decision when this group closes a
    /// window.
    pub fn update(&mut self, group: &[bool], cfg: &CdrConfig) -> Option<WindowDecision> {
        debug_assert_eq!(group.len(), cfg.phases);
        let last_bin = cfg.phases - 1;
        if let (Some(prev), Some(&first)) = (self.last_sample, group.first()) {
            if prev != first {
                self.phase_histogram[last_bin] += 1;
            }
        }
        for (i, pair) in group.windows(2).enumerate() {
            if pair[0] != pair[1] {
                self.phase_histogram[i] += 1;
            }
        }
        self.last_sample = group.last().copied();
        self.ui_counter += 1;
        self.ui_total += 1;
        if self.ui_counter < cfg.window_ui {
            return None;
        }

        let candidate = self.candidate();
        let selected_before = self.selected_phase;
        if candidate == self.selected_phase {
            self.pending_phase = None;
        } else {
            let wins = match self.pending_phase {
                Some((p, n)) if p == candidate => n + 1,
                _ => 1,
            };
            if wins >= cfg.jitter_hysteresis {
                self.selected_phase = candidate;
                self.pending_phase = None;
            } else {
                self.pending_phase = Some((candidate, wins));
            }
        }
        let decision = WindowDecision {
            end_ui: self.ui_total - 1,
            histogram: std::mem::replace(&mut self.phase_histogram, vec![0; cfg.phases]),
            candidate,
            selected_before,
            selected_after: self.selected_phase,
        };
        self.ui_counter = 0;
        Some(decision)
    }
}

/// Functional form of [`CdrState::update`].
pub fn update_decision(mut state: CdrState, group: &[bool], cfg: &CdrConfig) -> CdrState {
    state.update(group, cfg);
    state
}

/// Signed shortest move from phase `from` to `to` on a ring of `phases`.
fn ring_delta(from: usize, to: usize, phases: usize) -> isize {
    let d = ((to + phases - from) % phases) as isize;
    if d > phases as isize / 2 {
        d - phases as isize
    } else {
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdrOutput {
    /// One bit per input UI. The first `latency_ui` bits are pipeline fill.
    pub recovered_bits: Bitstream,
    /// Selected phase at the end of each window.
    pub phase_trace: Vec<usize>,
    pub windows: Vec<WindowDecision>,
    /// First UI from which the selected phase no longer changes.
    pub lock_ui: usize,
    /// FIFO overflow plus underflow count.
    pub fifo_events: usize,
    /// Nominal FIFO delay between sampling a group and reading it.
    pub latency_ui: usize,
    pub phase_switches: usize,
}

impl CdrOutput {
    /// `window,end_ui,candidate,selected_phase`
    pub fn phase_trace_csv(&self) -> String {
        let mut s = String::from("window,end_ui,candidate,selected_phase\n");
        for (i, w) in self.windows.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{}", i, w.end_ui, w.candidate, w.selected_after);
        }
        s
    }

    /// `window,bin,count`
    pub fn histogram_csv(&self) -> String {
        let mut s = String::from("window,bin,count\n");
        for (i, w) in self.windows.iter().enumerate() {
            for (bin, c) in w.histogram.iter().enumerate() {
                let _ = writeln!(s, "{i},{bin},{c}");
            }
        }
        s
    }
}

/// Runs sampler, glitch filter, decision block and FIFO over a whole trace.
pub fn recover(digital: &DigitalWaveform, cfg: &LinkConfig) -> Result<CdrOutput, Error> {
    let groups = sample_phases(digital, cfg)?;
    Ok(recover_groups(&groups, &cfg.cdr))
}

/// Glitch filter, decision block and FIFO over pre-sampled groups.
pub fn recover_groups(groups: &PhaseGroups, cfg: &CdrConfig) -> CdrOutput {
    let filtered = groups.glitch_filtered(cfg.glitch_filter_len);
    let n_ui = filtered.ui_count();
    let phases = cfg.phases;
    let latency = cfg.fifo_depth / 2;
    // FIFO occupancy is `latency - offset`; it must stay within [0, depth].
    let min_offset = latency as isize - cfg.fifo_depth as isize;
    let max_offset = latency as isize;

    let mut state = CdrState::new(cfg);
    let mut offset: isize = 0;
    let mut fifo_events = 0;
    let mut lock_ui = 0;
    let mut phase_switches = 0;
    let mut windows = Vec::with_capacity(n_ui / cfg.window_ui + 1);
    let mut bits = Vec::with_capacity(n_ui);

    for ui in 0..n_ui {
        if let Some(dec) = state.update(filtered.group(ui), cfg) {
            if dec.selected_after != dec.selected_before {
                let from = dec.selected_before as isize;
                let to = from + ring_delta(dec.selected_before, dec.selected_after, phases);
                if to >= phases as isize {
                    offset += 1;
                } else if to < 0 {
                    offset -= 1;
                }
                if offset > max_offset || offset < min_offset {
                    fifo_events += 1;
                    offset = offset.clamp(min_offset, max_offset);
                }
                phase_switches += 1;
                lock_ui = ui + 1;
            }
            windows.push(dec);
        }
        let read = ui as isize - latency as isize + offset;
        let bit = if read >= 0 && (read as usize) < n_ui {
            filtered.group(read as usize)[state.selected_phase]
        } else {
            false
        };
        bits.push(bit);
    }

    CdrOutput {
        recovered_bits: Bitstream(bits),
        phase_trace: windows.iter().map(|w| w.selected_after).collect(),
        windows,
        lock_ui,
        fifo_events,
        latency_ui: latency,
        phase_switches,
    }
}
