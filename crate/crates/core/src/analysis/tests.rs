use super::*;
use crate::economy::FirmMetrics;
use crate::ModelParams;
use alloc::vec;

fn frame(step: u64, avg_price: f64, firms: &[(f64, f64, f64)]) -> MetricsFrame {
    MetricsFrame {
        step,
        firms: firms
            .iter()
            .map(|&(price, sales, profit)| FirmMetrics {
                price,
                sales,
                output: sales,
                demand: sales,
                profit,
                reward: None,
                assets: 1.0,
                bankrupt: false,
            })
            .collect(),
        avg_price,
        nominal_gdp: 0.0,
        real_gdp: 0.0,
        price_index: 1.0,
        employment: 0,
        consumption: 0.0,
    }
}

fn summary(delta: f64, sales: f64) -> FirmSummary {
    FirmSummary { firm: 0, median_log_price_delta: delta, median_sales: sales, mean_reward: 0.0 }
}

#[test]
fn median_textbook() {
    assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    assert_eq!(median(&mut [7.0]), 7.0);
}

#[test]
fn constant_series_summary() {
    let frames: Vec<_> = (1..=9).map(|t| frame(t, 2.0, &[(2.0, 5.0, 0.5)])).collect();
    let s = summarize_firm(&frames, 0).unwrap();
    assert_eq!(s.median_log_price_delta, 0.0);
    assert_eq!(s.median_sales, 5.0);
    assert!((s.mean_reward - 0.5).abs() < 1e-12);
}

#[test]
fn odd_series_summary() {
    let sales = [5.0, 1.0, 9.0, 3.0, 7.0];
    let frames: Vec<_> = sales
        .iter()
        .enumerate()
        .map(|(i, &s)| frame(i as u64 + 1, 1.0, &[(1.0, s, s)]))
        .collect();
    let s = summarize_firm(&frames, 0).unwrap();
    assert_eq!(s.median_sales, 5.0);
    assert_eq!(s.mean_reward, 5.0);
    assert!(summarize_firm(&[], 0).is_err());
}

#[test]
fn rewards_take_precedence_over_profit() {
    let mut f = frame(1, 1.0, &[(1.0, 1.0, 3.0)]);
    f.firms[0].reward = Some(-100.0);
    assert_eq!(summarize_firm(&[f], 0).unwrap().mean_reward, -100.0);
}

#[test]
fn classify_examples() {
    let t = StrategyThresholds::default();
    assert_eq!(classify_strategy(&summary(1.2, 0.1), 1.0, &t), StrategyLabel::MarketPower);
    assert_eq!(classify_strategy(&summary(-0.1, 3.0), 1.0, &t), StrategyLabel::Dumping);
    assert_eq!(classify_strategy(&summary(0.0, 1.0), 1.0, &t), StrategyLabel::PerfectCompetition);
    // High price with market-sized volume is not market power.
    assert_eq!(classify_strategy(&summary(1.2, 1.0), 1.0, &t), StrategyLabel::PerfectCompetition);
}

#[test]
fn classify_is_total() {
    let t = StrategyThresholds::default();
    for d in [-5.0, -0.05, 0.0, 0.25, 0.3, f64::NAN, f64::INFINITY] {
        for s in [0.0, 0.49, 0.5, 1.5, 1.51, 100.0] {
            let a = classify_strategy(&summary(d, s), 1.0, &t);
            assert_eq!(a, classify_strategy(&summary(d, s), 1.0, &t));
        }
    }
}

#[test]
fn gdp_constant_series() {
    let s = gdp_stats(&[vec![7.0; 50]], 20).unwrap();
    assert_eq!((s.mean, s.std, s.mean_se, s.std_se), (7.0, 0.0, 0.0, 0.0));
}

#[test]
fn gdp_two_episodes_by_hand() {
    let s = gdp_stats(&[vec![1.0, 2.0, 3.0], vec![4.0, 4.0, 6.0]], 2).unwrap();
    assert!((s.mean - 3.75).abs() < 1e-12);
    assert!((s.std - 0.75).abs() < 1e-12);
    assert!((s.mean_se - 1.25).abs() < 1e-12);
    assert!((s.std_se - 0.25).abs() < 1e-12);
    assert_eq!(s.episodes, 2);
}

#[test]
fn gdp_window_too_long() {
    assert!(matches!(gdp_stats(&[vec![1.0; 10]], 11), Err(Error::WindowTooLong { .. })));
    assert!(gdp_stats::<Vec<f64>>(&[], 5).is_err());
}

#[test]
fn window_moments_ignore_order() {
    let a = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
    let mut b = a;
    b[2..].reverse();
    let (m1, s1) = window_moments(&a, 6).unwrap();
    let (m2, s2) = window_moments(&b, 6).unwrap();
    assert!((m1 - m2).abs() < 1e-12 && (s1 - s2).abs() < 1e-12);
}

#[test]
fn recovery_scans_from_the_given_step() {
    let steps = [1, 2, 3, 4, 5];
    let dev = [0.0, 30.0, 5.0, 0.5, 0.2];
    assert_eq!(recovery_step(&steps, &dev, 3, 1.0), Some(4));
    assert_eq!(recovery_step(&steps, &dev, 3, 0.1), None);
}

fn irf_config() -> ExperimentConfig {
    ExperimentConfig {
        num_rl_agents: 1,
        sim_steps: 40,
        burn_in_steps: 10,
        model: ModelParams {
            num_workers: 150,
            num_cfirms: 12,
            num_kfirms: 3,
            num_capitalists: 6,
            search_depth: 3,
            ..ModelParams::default()
        },
        ..ExperimentConfig::default()
    }
}

#[test]
fn irf_settings_validation() {
    let cfg = irf_config();
    let ok = IrfSettings { shock_size: 0.3, shock_duration: 1, t_shock: 20, num_seeds: 2 };
    ok.validate(&cfg).unwrap();
    assert!(IrfSettings { t_shock: 10, ..ok }.validate(&cfg).is_err());
    assert!(IrfSettings { t_shock: 51, ..ok }.validate(&cfg).is_err());
    assert!(IrfSettings { num_seeds: 0, ..ok }.validate(&cfg).is_err());
    assert!(IrfSettings { shock_duration: 0, ..ok }.validate(&cfg).is_err());
    assert!(IrfSettings { shock_size: -1.0, ..ok }.validate(&cfg).is_err());
}

#[test]
fn null_shock_is_identically_zero() {
    let cfg = irf_config();
    let settings = IrfSettings { shock_size: 0.0, shock_duration: 1, t_shock: 20, num_seeds: 2 };
    let irf = impulse_response(&cfg, &cfg.fresh_policies(), settings).unwrap();
    for s in [&irf.consumption, &irf.real_gdp, &irf.deflator] {
        assert!(s.mean.iter().all(|&v| v == 0.0));
        assert!(s.se.iter().all(|&v| v == 0.0));
    }
    assert_eq!(irf.steps.len(), cfg.episode_len());
}

#[test]
fn positive_shock_lifts_consumption_on_impact() {
    // The tiny economy sells out every shelf, so use the reference size.
    let cfg = ExperimentConfig { model: ModelParams::default(), ..irf_config() };
    let settings = IrfSettings { shock_size: 0.3, shock_duration: 1, t_shock: 20, num_seeds: 2 };
    let irf = impulse_response(&cfg, &cfg.fresh_policies(), settings).unwrap();
    let at = settings.t_shock as usize - 1;
    assert!(irf.consumption.mean[at] > 0.0);
    assert!(irf.consumption.mean[..at].iter().all(|&v| v == 0.0));
    assert!(irf.real_gdp.mean[..at].iter().all(|&v| v == 0.0));
}

#[test]
fn pairs_average_across_seeds() {
    let settings = IrfSettings { shock_size: 0.3, shock_duration: 1, t_shock: 2, num_seeds: 2 };
    let pairs = [
        PairedDeviation { seed: 0, consumption: vec![0.0, 10.0], real_gdp: vec![0.0, 2.0], deflator: vec![0.0, 0.0] },
        PairedDeviation { seed: 1, consumption: vec![0.0, 20.0], real_gdp: vec![0.0, 4.0], deflator: vec![0.0, 0.0] },
    ];
    let irf = aggregate_irf(settings, &pairs).unwrap();
    assert_eq!(irf.consumption.mean, vec![0.0, 15.0]);
    assert_eq!(irf.consumption.se[1], 5.0);
    assert_eq!(irf.real_gdp.mean[1], 3.0);
    assert_eq!(irf.steps, vec![1, 2]);
    assert!(aggregate_irf(settings, &[]).is_err());
}
