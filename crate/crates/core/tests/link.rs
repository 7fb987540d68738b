use proptest::prelude::*;

use serdes_sim::link::{
    max_loss_search, random_frames, run_link, run_link_with, sensitivity_sweep, sweep_csv,
    transfer_frames, Impairments, SweepSettings,
};
use serdes_sim::{LinkConfig, ParallelFrame};

fn with_loss(loss_db: f64) -> LinkConfig {
    LinkConfig {
        channel_loss_db: loss_db,
        ..Default::default()
    }
}

#[test]
fn ber_is_monotone_in_loss() {
    let grid = [0.0, 20.0, 30.0, 34.0, 34.5, 35.0, 36.0, 40.0];
    let bers: Vec<f64> = grid
        .iter()
        .map(|&l| run_link(&with_loss(l), 20_000).unwrap().ber)
        .collect();
    for (pair, losses) in bers.windows(2).zip(grid.windows(2)) {
        assert!(pair[0] <= pair[1], "ber fell from {} to {} between {losses:?} dB", pair[0], pair[1]);
    }
    assert_eq!(bers[0], 0.0);
    assert!(*bers.last().unwrap() > 0.25);
}

#[test]
fn ber_is_monotone_in_noise() {
    let sigmas = [0.0, 0.001, 0.004, 0.008, 0.016];
    let bers: Vec<f64> = sigmas
        .iter()
        .map(|&s| {
            let cfg = LinkConfig {
                noise_sigma: s,
                ..Default::default()
            };
            run_link(&cfg, 20_000).unwrap().ber
        })
        .collect();
    assert!(bers.windows(2).all(|p| p[0] <= p[1]), "{bers:?}");
    assert!(*bers.last().unwrap() > 0.0);
}

#[test]
fn doubling_the_dead_zone_costs_six_db() {
    let base = max_loss_search(&LinkConfig::default(), 100_000, 10.0, 45.0, 0.25).unwrap();
    let wide = LinkConfig {
        rx_deadzone: 0.032,
        ..Default::default()
    };
    let halved = max_loss_search(&wide, 100_000, 10.0, 45.0, 0.25).unwrap();
    let expected = 20.0 * 2f64.log10();
    // two searches, each within one resolution step of its edge
    assert!(((base - halved) - expected).abs() <= 0.5, "{base} -> {halved}");
}

#[test]
fn fixed_channel_bandwidth_penalizes_higher_bitrates() {
    let cfg = LinkConfig {
        channel_bw: Some(1.5e9),
        ..Default::default()
    };
    let settings = SweepSettings {
        n_bits: 50_000,
        ..Default::default()
    };
    let rows = sensitivity_sweep(&cfg, &[2e9, 1e9], &settings).unwrap();
    assert_eq!(rows[0].bitrate, 1e9);
    assert!(rows[1].max_loss_db < rows[0].max_loss_db - 1.0, "{rows:?}");
    // the receiver itself is rate independent
    assert!((rows[0].sensitivity_v - rows[1].sensitivity_v).abs() < 0.001);
    let csv = sweep_csv(&rows);
    assert!(csv.starts_with("bitrate_hz,sensitivity_v,max_loss_db\n1000000000.0,"));
}

#[test]
fn sweep_order_does_not_depend_on_input_order() {
    let settings = SweepSettings {
        n_bits: 5000,
        ..Default::default()
    };
    let cfg = LinkConfig::default();
    let a = sensitivity_sweep(&cfg, &[1.5e9, 1e9], &settings).unwrap();
    let b = sensitivity_sweep(&cfg, &[1e9, 1.5e9], &settings).unwrap();
    assert_eq!(sweep_csv(&a), sweep_csv(&b));
}

#[test]
fn noisy_runs_repeat_exactly() {
    let cfg = LinkConfig {
        noise_sigma: 0.005,
        rng_seed: 77,
        ..Default::default()
    };
    let imp = Impairments {
        glitch_rate: 1e-4,
        phase_offset_ui: 0.3,
        ..Default::default()
    };
    let a = run_link_with(&cfg, 30_000, &imp).unwrap();
    let b = run_link_with(&cfg, 30_000, &imp).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn seeds_change_noisy_outcomes() {
    let run = |seed| {
        let cfg = LinkConfig {
            noise_sigma: 0.012,
            rng_seed: seed,
            ..Default::default()
        };
        run_link(&cfg, 30_000).unwrap().error_count
    };
    assert_ne!(run(1), run(2));
}

#[test]
fn default_link_carries_a_thousand_frames() {
    let frames = random_frames(3, 1000);
    let t = transfer_frames(&LinkConfig::default(), &frames, 2000).unwrap();
    assert_eq!(t.frames, frames);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn frames_survive_passing_links(
        words in prop::collection::vec(any::<[u32; 8]>(), 1..12),
        loss in 0.0f64..30.0,
        seed in 1u64..1000,
    ) {
        let frames: Vec<ParallelFrame> = words.into_iter().map(ParallelFrame::new).collect();
        let cfg = LinkConfig { channel_loss_db: loss, rng_seed: seed, ..Default::default() };
        let t = transfer_frames(&cfg, &frames, 1000).unwrap();
        prop_assert_eq!(t.frames, frames);
        prop_assert_eq!(t.leftover_bits, 0);
    }

    #[test]
    fn clean_links_lock_for_any_static_offset(offset in 0.0f64..3.0) {
        let imp = Impairments { phase_offset_ui: offset, ..Default::default() };
        let r = run_link_with(&with_loss(0.0), 5000, &imp).unwrap();
        prop_assert!(r.passed());
        prop_assert_eq!(r.ber, r.error_count as f64 / r.bit_count as f64);
    }
}
