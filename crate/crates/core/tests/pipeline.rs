use dfrt_core::engine::{Engine, EngineConfig};
use dfrt_core::estimators::EstimatorKind;
use dfrt_core::metrics::{band_segmental_snr, relative_error_db};
use dfrt_core::signal::{mix_at_snr, sine, white_noise};
use dfrt_core::stage_control::{AttenLimit, StageDecision};

const HOP: usize = 480;

fn tone_in_noise(seconds: f64, seed: u64) -> (Vec<f32>, Vec<f32>) {
    let n = (48_000.0 * seconds) as usize;
    let clean = sine(1000.0, 0.3, 48_000, n);
    let noise = white_noise(n, seed, 0.3);
    let (mix, _) = mix_at_snr(&clean, &noise, 0.0);
    (clean, mix)
}

fn oracle_seg_snr(clean: &[f32], mix: &[f32], df_enabled: bool) -> f64 {
    let mut cfg = EngineConfig::default().with_estimator(EstimatorKind::Oracle);
    cfg.stages.df_enabled = df_enabled;
    let mut e = Engine::with_reference(cfg).unwrap();
    let out = e.process_buffer(mix, Some(clean), false).unwrap().samples;
    band_segmental_snr(clean, &out, &cfg.stft, 4800.0).unwrap()
}

/// Streams `x` hop by hop, calling `at_hop` before each hop; warm-up hops yield zeros.
fn stream(e: &mut Engine, x: &[f32], clean: Option<&[f32]>, mut at_hop: impl FnMut(usize, &Engine)) -> Vec<f32> {
    let mut y = Vec::with_capacity(x.len());
    let mut out = vec![0.0; HOP];
    for (i, hop) in x.chunks_exact(HOP).enumerate() {
        at_hop(i, e);
        let emitted = match clean {
            Some(c) => e.process_hop_with_reference(hop, &c[i * HOP..(i + 1) * HOP], &mut out),
            None => e.process_hop(hop, &mut out),
        };
        if emitted.unwrap() {
            y.extend_from_slice(&out);
        } else {
            y.extend_from_slice(&[0.0; HOP]);
        }
    }
    y
}

#[test]
fn deep_filter_beats_erb_only_on_tone_in_noise() {
    for seed in [1, 2] {
        let (clean, mix) = tone_in_noise(3.0, seed);
        let full = oracle_seg_snr(&clean, &mix, true);
        let erb = oracle_seg_snr(&clean, &mix, false);
        assert!(full - erb >= 3.0, "seed {seed}: full {full:.2} dB, erb-only {erb:.2} dB");
    }
}

#[test]
fn oracle_improves_over_noisy_input() {
    let (clean, mix) = tone_in_noise(2.0, 5);
    let noisy = band_segmental_snr(&clean, &mix, &EngineConfig::default().stft, 4800.0).unwrap();
    assert!(oracle_seg_snr(&clean, &mix, true) > noisy + 10.0);
}

#[test]
fn output_count_is_input_minus_latency() {
    let mut e = Engine::new(EngineConfig::default()).unwrap();
    let mut out = vec![0.0; HOP];
    let x = white_noise(HOP * 50, 3, 0.1);
    let emitted: usize = x.chunks_exact(HOP).map(|h| e.process_hop(h, &mut out).unwrap() as usize * HOP).sum();
    assert_eq!(emitted, x.len() - 1920);
}

#[test]
fn df_toggle_matches_df_off_engine_after_switch() {
    let (clean, x) = tone_in_noise(2.0, 7);
    let oracle = EngineConfig::default().with_estimator(EstimatorKind::Oracle);
    let switch = 80;
    let mut toggled = Engine::with_reference(oracle).unwrap();
    let y = stream(&mut toggled, &x, Some(&clean), |i, e| {
        if i == switch {
            let mut cfg = e.snapshot_config();
            cfg.stages.df_enabled = false;
            e.update_config(cfg).unwrap();
        }
    });
    let mut off_cfg = oracle;
    off_cfg.stages.df_enabled = false;
    let mut reference = Engine::with_reference(off_cfg).unwrap();
    let r = stream(&mut reference, &x, Some(&clean), |_, _| {});

    // one more hop for the overlap-add tail of the last frame filtered with DF
    let settle = (switch + 2) * HOP;
    assert_ne!(&y[HOP * 10..switch * HOP], &r[HOP * 10..switch * HOP]);
    assert_eq!(&y[settle..], &r[settle..]);
}

#[test]
fn atten_zero_mid_stream_gives_delayed_input() {
    let (_, x) = tone_in_noise(2.0, 11);
    let switch = 60;
    let mut e = Engine::new(EngineConfig::default()).unwrap();
    let y = stream(&mut e, &x, None, |i, e| {
        if i == switch {
            let mut cfg = e.snapshot_config();
            cfg.atten = AttenLimit::new(0.0).unwrap();
            e.update_config(cfg).unwrap();
        }
    });
    let start = (switch + 2) * HOP;
    let early = relative_error_db(&x[10 * HOP - 1920..switch * HOP - 1920], &y[10 * HOP..switch * HOP]);
    let late = relative_error_db(&x[start - 1920..x.len() - 1920], &y[start..]);
    assert!(early > -20.0, "processing was active before the switch: {early:.1} dB");
    assert!(late < -60.0, "{late:.1} dB");
}

#[test]
fn threshold_change_reflected_within_ten_hops() {
    let (_, x) = tone_in_noise(2.0, 13);
    let switch = 60;
    let mut e = Engine::new(EngineConfig::default()).unwrap();
    let meters = e.meters();
    stream(&mut e, &x, None, |i, e| {
        if i == switch {
            let mut cfg = e.snapshot_config();
            cfg.thresholds.silence_below_db = 30.0;
            cfg.thresholds.df_off_above_db = 35.0;
            e.update_config(cfg).unwrap();
        }
    });
    let m = meters.drain();
    // meters are emitted from hop 4 on; hop h carries frame h - 2
    let first_after = m.iter().position(|f| f.frame_index as usize >= switch - 2).unwrap();
    assert!(m[first_after..first_after + 10].iter().all(|f| f.decision == StageDecision::Silence || f.xi_db >= 30.0));
    assert!(m[..first_after].iter().any(|f| f.decision != StageDecision::Silence));
}

#[test]
fn meters_within_clamp_and_finite() {
    let (clean, mix) = tone_in_noise(2.0, 17);
    let mut e = Engine::with_reference(EngineConfig::default().with_estimator(EstimatorKind::Oracle)).unwrap();
    let out = e.process_buffer(&mix, Some(&clean), true).unwrap();
    assert_eq!(out.meters.len(), mix.len().div_ceil(HOP));
    for m in &out.meters {
        assert!((-15.0..=35.0).contains(&m.xi_db));
        for v in [m.mean_gain, m.df_delta_db, m.in_rms_db, m.out_rms_db] {
            assert!(v.is_finite());
        }
    }
}

#[test]
fn identical_runs_are_bit_identical() {
    let (clean, mix) = tone_in_noise(1.5, 19);
    for kind in [EstimatorKind::Passthrough, EstimatorKind::Blind, EstimatorKind::Oracle] {
        let run = || {
            let mut e = Engine::with_reference(EngineConfig::default().with_estimator(kind)).unwrap();
            e.process_buffer(&mix, Some(&clean), false).unwrap().samples
        };
        let (a, b) = (run(), run());
        assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()), "{kind}");
    }
}

#[test]
fn reset_reproduces_first_run() {
    let (_, mix) = tone_in_noise(1.0, 23);
    let mut e = Engine::new(EngineConfig::default()).unwrap();
    let a = e.process_buffer(&mix, None, false).unwrap().samples;
    e.reset();
    let b = e.process_buffer(&mix, None, false).unwrap().samples;
    assert_eq!(a, b);
}

#[test]
fn blind_estimator_attenuates_stationary_noise() {
    let x = white_noise(48_000 * 4, 29, 0.1);
    let mut e = Engine::new(EngineConfig::default()).unwrap();
    let y = e.process_buffer(&x, None, false).unwrap().samples;
    let tail = 48_000 * 3;
    let ein: f64 = x[tail..].iter().map(|v| (*v as f64).powi(2)).sum();
    let eout: f64 = y[tail..].iter().map(|v| (*v as f64).powi(2)).sum();
    assert!(10.0 * (eout / ein).log10() < -10.0);
}
