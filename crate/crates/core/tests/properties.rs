use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use adaptive_pilot::channel::{init_channel_with, step_channel, true_frequency_response, MODEL_RHO};
use adaptive_pilot::controller::{cross_correlation, select_pattern, BoundarySet, Feedback};
use adaptive_pilot::grid::{build_grid, data_rate_fraction};
use adaptive_pilot::harness::link::fixed_schedule_grid;
use adaptive_pilot::phy::{demodulate, modulate};
use adaptive_pilot::{run_link, CellRole, ChannelProfile, LinkConfig, LinkMode, Modulation, PilotLayout};

fn config(n: usize, modulation: Modulation, seed: u64) -> LinkConfig {
    LinkConfig {
        num_subcarriers: n,
        cp_length: n / 8,
        pilots_per_sounding: n,
        symbol_time: 1.0 / (n as f64 * 15e3),
        modulation,
        rng_seed: seed,
        ..LinkConfig::default()
    }
}

fn modulation() -> impl Strategy<Value = Modulation> {
    prop_oneof![Just(Modulation::Qpsk), Just(Modulation::Qam16)]
}

fn random_bits(count: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(0..2u8)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_rebuild_is_identical_and_pilots_unit(
        log_n in 3u32..8,
        period in 1usize..6,
        symbols in 1usize..20,
        seed in any::<u64>(),
        m in modulation(),
    ) {
        let cfg = config(1 << log_n, m, seed);
        let bits = random_bits(symbols * cfg.num_subcarriers * cfg.bits_per_symbol(), seed ^ 1);
        let layout = PilotLayout::block(period);
        let (a, _) = build_grid(&cfg, &layout, symbols, &bits).unwrap();
        let (b, _) = build_grid(&cfg, &layout, symbols, &bits).unwrap();
        prop_assert_eq!(&a, &b);
        for t in 0..symbols {
            for k in 0..cfg.num_subcarriers {
                if a.role(t, k) == CellRole::Pilot {
                    prop_assert!((a.get(t, k).norm() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn ofdm_round_trip_and_parseval(
        log_n in 3u32..8,
        symbols in 1usize..8,
        seed in any::<u64>(),
        m in modulation(),
    ) {
        let cfg = config(1 << log_n, m, seed);
        let n = cfg.num_subcarriers;
        let bits = random_bits(symbols * n * cfg.bits_per_symbol(), seed);
        let (grid, _) = build_grid(&cfg, &PilotLayout::block(3), symbols, &bits).unwrap();
        let sig = modulate(&grid, &cfg);
        let back = demodulate(&sig, &cfg).unwrap();
        for t in 0..symbols {
            let useful = &sig.symbol(t)[cfg.cp_length..];
            let time_energy: f64 = useful.iter().map(|x| x.norm_sqr()).sum();
            let freq_energy: f64 = grid.row(t).iter().map(|x| x.norm_sqr()).sum();
            prop_assert!((time_energy - freq_energy).abs() <= 1e-9 * freq_energy);
            for k in 0..n {
                prop_assert!((back.get(t, k) - grid.get(t, k)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn pattern_period_is_power_of_two_times_base(r in 0.0..=1.0f64, n in 1usize..6, id in 1usize..=5) {
        let b = BoundarySet::table(id).unwrap();
        let p = select_pattern(r, &b, n, 64);
        prop_assert_eq!(p.period, (1 << p.index) * n);
    }

    #[test]
    fn adaptive_overhead_never_exceeds_pattern_one(
        seed in any::<u64>(),
        model in 1usize..=5,
        n in 1usize..4,
        snr in prop_oneof![Just(f64::INFINITY), 0.0..30.0f64],
        window in 200usize..3000,
    ) {
        let cfg = LinkConfig {
            base_pilot_period: n,
            snr_db: snr,
            ber_window: window,
            ..LinkConfig::default()
        };
        let profile = ChannelProfile::model(model).unwrap();
        let symbols = 600;
        let fixed = run_link(&cfg, &profile, LinkMode::FixedPattern(1), symbols, seed).unwrap();
        let adaptive = run_link(&cfg, &profile, LinkMode::Adaptive(BoundarySet::default()), symbols, seed).unwrap();
        prop_assert_eq!(fixed.pilot_symbols as usize, symbols.div_ceil(n));
        prop_assert!(adaptive.pilot_symbols <= fixed.pilot_symbols);
        prop_assert!(adaptive.data_rate_fraction >= fixed.data_rate_fraction);
        let occ: f64 = adaptive.pattern_occupancy().iter().sum();
        prop_assert!((occ - 1.0).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&adaptive.ber));
    }

    #[test]
    fn runs_are_reproducible(seed in any::<u64>(), model in 1usize..=5, delay in 0usize..3) {
        let cfg = LinkConfig { snr_db: 12.0, feedback_delay: delay, ber_window: 1000, ..LinkConfig::default() };
        let profile = ChannelProfile::model(model).unwrap();
        let mode = LinkMode::Adaptive(BoundarySet::table(3).unwrap());
        let a = run_link(&cfg, &profile, mode, 400, seed).unwrap();
        let b = run_link(&cfg, &profile, mode, 400, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn overhead_strictly_decreases_with_pattern() {
    let cfg = LinkConfig::default();
    for n in 1..4 {
        let symbols = 8 * n * 16;
        let rates: Vec<f64> = (0..4)
            .map(|i| data_rate_fraction(&fixed_schedule_grid(&cfg, (1 << i) * n, symbols).unwrap()))
            .collect();
        for i in 0..4 {
            let period = ((1 << i) * n) as f64;
            assert!((1.0 - rates[i] - 1.0 / period).abs() < 1e-12);
        }
        assert!(rates.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn feedback_is_a_single_scalar() {
    // one discriminant plus one f64
    assert!(std::mem::size_of::<Feedback>() <= 16);
}

#[test]
fn consecutive_response_correlation_grows_with_rho() {
    let steps = 10_000;
    let n = 64;
    let mut means = Vec::new();
    for &rho in &MODEL_RHO {
        let profile = ChannelProfile::default().with_rho(rho);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut state = init_channel_with(&profile, &mut rng);
        let mut prev = true_frequency_response(&state, &profile, n);
        let mut acc = 0.0;
        for _ in 0..steps {
            state = step_channel(&state, &profile, &mut rng);
            let h = true_frequency_response(&state, &profile, n);
            acc += cross_correlation(&prev, &h).unwrap();
            prev = h;
        }
        means.push(acc / steps as f64);
    }
    assert!((means[0] - 1.0).abs() < 1e-12);
    assert!(means.windows(2).all(|w| w[0] > w[1]), "{means:?}");
}

#[test]
fn static_channel_hold_matches_frequent_sounding() {
    // with rho = 1 a held estimate is as good as a fresh one
    let cfg = LinkConfig {
        snr_db: 8.0,
        ..LinkConfig::default()
    };
    let profile = ChannelProfile::model(1).unwrap();
    let (mut e2, mut b2, mut e4, mut b4) = (0u64, 0u64, 0u64, 0u64);
    for trial in 0..40 {
        let seed = 1000 + trial;
        let p2 = run_link(&cfg, &profile, LinkMode::FixedPattern(2), 2000, seed).unwrap();
        let p4 = run_link(&cfg, &profile, LinkMode::FixedPattern(4), 2000, seed).unwrap();
        e2 += p2.bit_errors;
        b2 += p2.total_bits;
        e4 += p4.bit_errors;
        b4 += p4.total_bits;
    }
    let (ber2, ber4) = (e2 as f64 / b2 as f64, e4 as f64 / b4 as f64);
    assert!((ber2 / ber4 - 1.0).abs() < 0.15, "{ber2} vs {ber4}");

    let noiseless = LinkConfig {
        snr_db: f64::INFINITY,
        ..cfg
    };
    let once = run_link(&noiseless, &profile, LinkMode::FixedPattern(4), 3000, 5).unwrap();
    assert_eq!(once.bit_errors, 0);
}

#[test]
fn unit_constellation_energy_through_the_link() {
    for m in [Modulation::Qpsk, Modulation::Qam16] {
        let energy: f64 = m.alphabet().iter().map(|(_, s)| s.norm_sqr()).sum::<f64>() / m.alphabet().len() as f64;
        assert!((energy - 1.0).abs() < 1e-12);
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(m.demap(z).len(), m.bits_per_symbol());
    }
}
