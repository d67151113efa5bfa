mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rbnoise::fitting::*;
use rbnoise::noise_models::{self, Filter, NoiseModelParams};

const NS: f64 = 1e-9;
const US: f64 = 1e-6;

fn tau_grid() -> Vec<f64> {
    [10.0, 20.0, 30.0, 40.0, 60.0, 80.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0, 450.0]
        .iter()
        .map(|t| t * NS)
        .collect()
}

fn exact<M: FitModel>(model: &M, theta: &[f64], x: &[f64]) -> FitData {
    FitData::new(x.to_vec(), x.iter().map(|&v| model.predict(theta, v)).collect(), None).unwrap()
}

/// Data with Gaussian noise of relative size `rel_noise`, sigma reported.
fn noisy<M: FitModel>(model: &M, theta: &[f64], x: &[f64], rel_noise: f64, seed: u64) -> FitData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, 1.0).unwrap();
    let clean: Vec<f64> = x.iter().map(|&v| model.predict(theta, v)).collect();
    let sigma: Vec<f64> = clean.iter().map(|c| rel_noise * c.abs().max(1e-300)).collect();
    let y = clean.iter().zip(&sigma).map(|(c, s)| c + s * n.sample(&mut rng)).collect();
    FitData::new(x.to_vec(), y, Some(sigma)).unwrap()
}

fn check_gradient<M: FitModel>(model: &M, theta: &[f64], x: f64) {
    let a = model.gradient(theta, x).expect("analytic gradient");
    let n = numeric_gradient(model, theta, x);
    for (i, (ga, gn)) in a.iter().zip(&n).enumerate() {
        // compare ∂f/∂lnθ; the second term is the finite-difference roundoff floor ~ε|f|/h
        let tol = 1e-6 * (ga * theta[i]).abs() + 1e-8 * model.predict(theta, x).abs();
        assert!(
            ((ga - gn) * theta[i]).abs() <= tol,
            "{}: param {i} at x={x}: analytic {ga} vs numeric {gn}",
            model.name()
        );
    }
}

fn telegraph_model(t1: f64) -> IdleErrorModel {
    IdleErrorModel::new(Terms::TELEGRAPH, Some(t1), Filter::Ramsey)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobians_match_finite_differences(
        t_sw in 20e-9f64..5e-6, df in 50e3f64..2e6, t_phi1 in 5e-6f64..100e-6, t_phi2 in 0.5e-6f64..20e-6,
        s1f in 1e8f64..1e10, tau in 5e-9f64..1e-6, echo in any::<bool>(),
        a in 0.2f64..0.6, p in 0.9f64..0.9999, b in 0.3f64..0.6, m in 1.0f64..300.0,
        s_star in 0.5f64..10.0, alpha in 0.5f64..1.5, s_white in 1.0f64..20.0, f in 1e-3f64..0.999,
    ) {
        let filter = if echo { Filter::Echo } else { Filter::Ramsey };
        let all = Terms { white: true, correlated: true, one_over_f: true, telegraph: true };
        let mut model = IdleErrorModel::new(all, Some(26.7e-6), filter);
        model.f_c = 1e-3;
        check_gradient(&model, &[t_phi1, t_phi2, s1f, t_sw, df], tau);
        check_gradient(&DecayModel, &[a, p, b], m);
        check_gradient(&VisibilityModel, &[t_phi1, t_phi2, a, b * 0.1], tau * 5.0);
        check_gradient(&ExpDecayModel, &[a, t_phi1, b * 0.1], tau * 20.0);
        check_gradient(&FluxPsdModel { f_n: 1.0 }, &[s_star, alpha, s_white], f);
        check_gradient(&PowerSeriesModel::new(&[1, 2], &["a", "b"]), &[a, p], m);
    }
}

fn stat_config() -> ProptestConfig {
    ProptestConfig {
        cases: 32,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// Refits `draws` independent noise realisations of one parameter point and
/// checks that the truth lies within 3σ in at least 95% of the fits (99.7%
/// expected for calibrated errors) and that the rms pull is close to one.
fn calibrated(truth: &[f64], seed: u64, draws: usize, fit: impl Fn(u64) -> FitReport) -> Result<(), TestCaseError> {
    let mut inside = vec![0usize; truth.len()];
    let mut pull2 = vec![0.0; truth.len()];
    for d in 0..draws {
        let r = fit(seed.wrapping_add(d as u64));
        prop_assert!(r.converged, "{}", r.to_text());
        for (i, t) in truth.iter().enumerate() {
            let pull = (r.params[i] - t) / r.uncertainties[i];
            inside[i] += (pull.abs() <= 3.0) as usize;
            pull2[i] += pull * pull;
        }
    }
    for i in 0..truth.len() {
        let rms = (pull2[i] / draws as f64).sqrt();
        prop_assert!(inside[i] as f64 >= 0.95 * draws as f64, "param {i}: {}/{draws} within 3σ", inside[i]);
        // 20 draws put ~16% sampling spread on the rms pull; this only catches gross miscalibration
        prop_assert!(rms > 0.4 && rms < 2.0, "param {i}: rms pull {rms}");
    }
    Ok(())
}

// 1% relative noise
proptest! {
    #![proptest_config(stat_config())]

    #[test]
    fn telegraph_round_trip(t_sw in 50e-9f64..300e-9, df in 150e3f64..600e3, t1 in 15e-6f64..40e-6, seed in any::<u64>()) {
        calibrated(&[t_sw, df], seed, 20, |s| {
            fit_telegraph_model(&noisy(&telegraph_model(t1), &[t_sw, df], &tau_grid(), 0.01, s), t1).unwrap().report
        })?;
    }

    #[test]
    fn visibility_round_trip(
        t_phi1 in 5e-6f64..20e-6, t_phi2 in 2e-6f64..8e-6, a in 0.8f64..0.95, b in 0.005f64..0.05, seed in any::<u64>(),
    ) {
        let theta = [t_phi1, t_phi2, a, b];
        // sampled until the envelope has decayed into the offset
        let t_max = 3.0 * t_phi2.min(t_phi1);
        let ts: Vec<f64> = (0..=40).map(|i| i as f64 * t_max / 40.0).collect();
        calibrated(&theta, seed, 20, |s| fit_visibility(&noisy(&VisibilityModel, &theta, &ts, 0.01, s)).unwrap())?;
    }

    #[test]
    fn decay_round_trip(a in 0.3f64..0.5, p in 0.95f64..0.999, b in 0.45f64..0.55, seed in any::<u64>()) {
        let m_max = (3.0 / (1.0 - p)).min(1000.0);
        let ms: Vec<f64> = (0..=20).map(|i| 1.0 + (i as f64 * m_max / 20.0).round()).collect();
        calibrated(&[a, p, b], seed, 20, |s| {
            fit_auto(&DecayModel, &noisy(&DecayModel, &[a, p, b], &ms, 0.01, s), &FitOptions::default()).unwrap()
        })?;
    }

    #[test]
    fn t1_round_trip(a in 0.8f64..1.0, t1 in 10e-6f64..50e-6, b in 0.0f64..0.05, seed in any::<u64>()) {
        let ts: Vec<f64> = (0..=30).map(|i| i as f64 * 4.0 * t1 / 30.0).collect();
        calibrated(&[a, t1, b], seed, 20, |s| fit_t1(&noisy(&ExpDecayModel, &[a, t1, b], &ts, 0.01, s)).unwrap())?;
    }
}

#[test]
fn noiseless_inversion() {
    let ms: Vec<f64> = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 300.0].to_vec();
    let r = fit_auto(&DecayModel, &exact(&DecayModel, &[0.5, 0.99, 0.5], &ms), &FitOptions::default()).unwrap();
    for (v, t) in r.params.iter().zip([0.5, 0.99, 0.5]) {
        assert!(common::rel(*v, t) < 1e-6, "decay {:?}", r.params);
    }

    let model = telegraph_model(26.7e-6);
    let fit = fit_telegraph_model(&exact(&model, &[84e-9, 479e3], &tau_grid()), 26.7e-6).unwrap();
    assert!(common::rel(fit.t_sw().0, 84e-9) < 1e-6);
    assert!(common::rel(fit.delta_f10().0, 479e3) < 1e-6);

    let ts: Vec<f64> = (0..26).map(|i| i as f64 * 0.2 * US).collect();
    let theta = [6.8 * US, 2.8 * US, 0.88, 0.015];
    let r = fit_visibility(&exact(&VisibilityModel, &theta, &ts)).unwrap();
    for (v, t) in r.params.iter().zip(theta) {
        assert!(common::rel(*v, t) < 1e-6, "visibility {:?}", r.params);
    }

    let ts: Vec<f64> = (0..30).map(|i| i as f64 * 3.0 * US).collect();
    let r = fit_t1(&exact(&ExpDecayModel, &[0.97, 26.7 * US, 0.02], &ts)).unwrap();
    assert!(common::rel(r.value("t1"), 26.7 * US) < 1e-6);
}

#[test]
fn init_at_truth_converges_immediately() {
    let model = telegraph_model(26.7e-6);
    let data = exact(&model, &[84e-9, 479e3], &tau_grid());
    let r = fit_nonlinear(&model, &data, &[84e-9, 479e3], &FitOptions::default()).unwrap();
    assert!(r.converged && r.iterations <= 2, "iterations {}", r.iterations);
    let ms: Vec<f64> = (1..=30).map(|m| m as f64 * 10.0).collect();
    let r = fit_nonlinear(&DecayModel, &exact(&DecayModel, &[0.5, 0.99, 0.5], &ms), &[0.5, 0.99, 0.5], &FitOptions::default())
        .unwrap();
    assert!(r.converged && r.iterations <= 2);
}

#[test]
fn residual_is_non_increasing() {
    let model = telegraph_model(26.7e-6);
    let data = noisy(&model, &[84e-9, 479e3], &tau_grid(), 0.02, 7);
    let init = [400e-9, 100e3];
    let mut prev = f64::INFINITY;
    for k in 0..30 {
        let opts = FitOptions { max_iterations: k, ..FitOptions::default() };
        let r = fit_nonlinear(&model, &data, &init, &opts).unwrap();
        assert!(r.chi2 <= prev * (1.0 + 1e-12), "iteration {k}: {} > {prev}", r.chi2);
        prev = r.chi2;
    }
}

#[test]
fn bootstrap_spread_matches_covariance() {
    let model = telegraph_model(26.7e-6);
    let truth = [84e-9, 479e3];
    let base = noisy(&model, &truth, &tau_grid(), 0.02, 11);
    let fit = fit_telegraph_model(&base, 26.7e-6).unwrap();
    // parametric bootstrap: redraw the noise around the fitted curve
    let fitted = fit.report.params.clone();
    let sigma = base.sigma.clone().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = Normal::new(0.0, 1.0).unwrap();
    let mut samples = vec![Vec::new(), Vec::new()];
    for _ in 0..400 {
        let y = base.x.iter().zip(&sigma).map(|(&x, s)| model.predict(&fitted, x) + s * n.sample(&mut rng)).collect();
        let d = FitData::new(base.x.clone(), y, Some(sigma.clone())).unwrap();
        let r = fit_telegraph_model(&d, 26.7e-6).unwrap();
        samples[0].push(r.report.params[0]);
        samples[1].push(r.report.params[1]);
    }
    for i in 0..2 {
        let (mean, se) = common::mean_se(&samples[i]);
        let sd = se * (samples[i].len() as f64).sqrt();
        let ratio = sd / fit.report.uncertainties[i];
        assert!((ratio - 1.0).abs() < 0.3, "param {i}: bootstrap sd {sd} vs covariance {} (mean {mean})", fit.report.uncertainties[i]);
    }
}

#[test]
fn fit_without_sigma_scales_covariance() {
    let model = telegraph_model(26.7e-6);
    let d = noisy(&model, &[84e-9, 479e3], &tau_grid(), 0.01, 3);
    let unweighted = FitData::new(d.x.clone(), d.y.clone(), None).unwrap();
    let r = fit_telegraph_model(&unweighted, 26.7e-6).unwrap();
    assert!(r.report.uncertainties.iter().all(|&u| u > 0.0 && u.is_finite()));
    assert_eq!(r.report.dof, d.len() - 2);
}

#[test]
fn telegraph_asymptotes_bracket_the_curve() {
    let a = TelegraphAsymptotes { t1: 26.7e-6, t_sw: 84e-9, delta_f10: 479e3 };
    let model = telegraph_model(26.7e-6);
    let theta = [84e-9, 479e3];
    let small = 1e-9;
    assert!(common::rel(model.predict(&theta, small), a.short_time(small)) < 1e-2);
    let big = 100.0 * 84e-9;
    assert!(common::rel(model.predict(&theta, big), a.long_time(big)) < 1e-2);
    for tau in tau_grid() {
        let r = model.predict(&theta, tau);
        assert!(r <= a.short_time(tau) * (1.0 + 1e-12) && r >= a.long_time(tau));
    }
}

#[test]
fn device_rows_round_trip() {
    // (T₁, T_sw, Δf₁₀)
    let rows = [(26.7e-6, 84e-9, 479e3), (15.7e-6, 183e-9, 274e3), (22.2e-6, 201e-9, 199e3), (15.7e-6, 32e-9, 528e3)];
    for (i, &(t1, t_sw, df)) in rows.iter().enumerate() {
        let model = telegraph_model(t1);
        let data = noisy(&model, &[t_sw, df], &tau_grid(), 0.02, 100 + i as u64);
        let fit = fit_telegraph_model(&data, t1).unwrap();
        assert!(common::rel(fit.t_sw().0, t_sw) < 0.15, "row {i}: t_sw {:?}", fit.t_sw());
        assert!(common::rel(fit.delta_f10().0, df) < 0.15, "row {i}: df {:?}", fit.delta_f10());
    }
}

#[test]
fn zero_telegraph_gives_amplitude_consistent_with_zero() {
    let t1 = 26.7e-6;
    let x = tau_grid();
    let y: Vec<f64> = x.iter().map(|t| t / (3.0 * t1)).collect();
    let sigma = vec![2e-6; x.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = Normal::new(0.0, 1.0).unwrap();
    let y = y.iter().zip(&sigma).map(|(v, s)| v + s * n.sample(&mut rng)).collect();
    let fit = fit_telegraph_model(&FitData::new(x, y, Some(sigma)).unwrap(), t1).unwrap();
    let (t_sw, df) = (fit.t_sw().0, fit.delta_f10().0);
    // the fitted telegraph term is below the noise everywhere on the grid
    let extra = telegraph_model(t1).predict(&[t_sw, df], 450e-9) - 450e-9 / (3.0 * t1);
    assert!(extra < 3.0 * 2e-6, "telegraph contribution {extra} (t_sw {t_sw}, df {df})");
}

#[test]
fn white_only_data_gives_telegraph_consistent_with_zero() {
    let terms = Terms::WHITE_TELEGRAPH;
    let t1 = 30e-6;
    let x = tau_grid();
    let clean: Vec<f64> = x.iter().map(|t| t / (3.0 * t1) + 2.0 * t / 20e-6 / 6.0).collect();
    let sigma: Vec<f64> = clean.iter().map(|c| 0.01 * c).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = Normal::new(0.0, 1.0).unwrap();
    let y = clean.iter().zip(&sigma).map(|(v, s)| v + s * n.sample(&mut rng)).collect();
    let fit = fit_full_model(&FitData::new(x.clone(), y, Some(sigma.clone())).unwrap(), terms, Some(t1), Filter::Ramsey)
        .unwrap();
    let model = IdleErrorModel::new(Terms::TELEGRAPH, None, Filter::Ramsey);
    let tel = model.predict(&[fit.report.value("t_sw"), fit.report.value("delta_f10")], 450e-9);
    assert!(tel < 3.0 * sigma[sigma.len() - 1], "telegraph part {tel}: {}", fit.report.to_text());
}

#[test]
fn operating_point_rows() {
    // (T₁, T_φ1, T_sw, Δf₁₀); recovered within 20% except the quasi-static row
    let rows = [(36.2e-6, 15.5e-6, 263e-9, 469e3), (31.3e-6, 12.4e-6, 98e-9, 484e3)];
    for (i, &(t1, tp1, t_sw, df)) in rows.iter().enumerate() {
        let model = IdleErrorModel::new(Terms::WHITE_TELEGRAPH, Some(t1), Filter::Ramsey);
        let data = exact(&model, &[tp1, t_sw, df], &tau_grid());
        let fit = fit_full_model(&data, Terms::WHITE_TELEGRAPH, Some(t1), Filter::Ramsey).unwrap();
        for (name, truth) in [("t_phi1", tp1), ("t_sw", t_sw), ("delta_f10", df)] {
            assert!(common::rel(fit.report.value(name), truth) < 0.2, "row {i} {name}: {}", fit.report.to_text());
        }
    }
    // T_sw far beyond the grid: reported as a correlated-noise equivalent
    let model = IdleErrorModel::new(Terms::WHITE_TELEGRAPH, Some(30.6e-6), Filter::Ramsey);
    let data = exact(&model, &[20.6e-6, 182e-6, 184e3], &tau_grid());
    let fit = fit_full_model(&data, Terms::WHITE_TELEGRAPH, Some(30.6e-6), Filter::Ramsey).unwrap();
    let t_phi2 = fit.correlated_equivalent_t_phi2.expect("quasi-static regime flagged");
    assert!(common::rel(t_phi2, noise_models::telegraph_equivalent_t_phi2(184e3)) < 0.2, "{t_phi2}");
}

#[test]
fn visibility_fixtures_round_trip() {
    let ramsey = [6.8 * US, 2.8 * US, 0.88, 0.015];
    let echo = [15.1 * US, 7.5 * US, 0.88, 0.021];
    for (theta, t_max, seed) in [(ramsey, 5.0 * US, 1u64), (echo, 12.0 * US, 2)] {
        let ts: Vec<f64> = (0..=50).map(|i| i as f64 * t_max / 50.0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = Normal::new(0.0, 0.001).unwrap();
        let y = ts.iter().map(|&t| VisibilityModel.predict(&theta, t) + n.sample(&mut rng)).collect();
        let r = fit_visibility(&FitData::new(ts.clone(), y, Some(vec![0.001; ts.len()])).unwrap()).unwrap();
        for (i, truth) in theta.iter().enumerate() {
            assert!(common::rel(r.params[i], *truth) < 0.1, "param {i}: {}", r.to_text());
        }
        assert!((VisibilityModel.predict(&theta, 0.0) - (theta[2] + theta[3])).abs() < 1e-15);
    }
}

#[test]
fn flux_psd_fixture_and_symmetry() {
    let model = FluxPsdModel { f_n: 1.0 };
    let theta = [2.4, 0.99, 9.7];
    let freqs: Vec<f64> = (1..=200).map(|k| k as f64 / 200.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = Normal::new(0.0, 0.1).unwrap();
    let psd: Vec<f64> = freqs.iter().map(|&f| model.spectrum(&theta, f) * (1.0 + n.sample(&mut rng))).collect();
    let fit = fit_flux_noise_psd(&freqs, &psd, 1.0).unwrap();
    assert!(common::rel(fit.report.value("s_star"), 2.4) < 0.25, "{}", fit.report.to_text());
    assert!((fit.report.value("alpha") - 0.99).abs() < 0.1);
    assert!(common::rel(fit.report.value("s_white"), 9.7) < 0.25);
    assert!(common::rel(fit.one_over_f_line(1.0), fit.report.value("s_star")) < 1e-12);
    // at Nyquist the aliased term equals the direct one
    let direct = 2.4 * 1.0f64.powf(-0.99);
    assert!((model.spectrum(&theta, 1.0) - 9.7 - 2.0 * direct).abs() < 1e-12);
}

#[test]
fn flux_psd_white_only() {
    let freqs: Vec<f64> = (1..=200).map(|k| k as f64 / 200.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = Normal::new(0.0, 0.1).unwrap();
    let psd: Vec<f64> = freqs.iter().map(|_| 9.7 * (1.0 + n.sample(&mut rng))).collect();
    let fit = fit_flux_noise_psd(&freqs, &psd, 1.0).unwrap();
    assert!(common::rel(fit.report.value("s_white"), 9.7) < 0.25, "{}", fit.report.to_text());
    let one_over_f_at_nyquist = 2.0 * fit.report.value("s_star");
    assert!(one_over_f_at_nyquist < 0.1 * 9.7, "{}", fit.report.to_text());
}

#[test]
fn flux_to_phase_strength_conversion() {
    assert_eq!(flux_to_phase_strength(2.4, 0.0), 0.0);
    let s = flux_to_phase_strength(2.4, 4.81e9);
    assert!(common::rel(s, (2.0 * PI * 4.81e9).powi(2) * 2.4e-12) < 1e-14);
    // quadratic in the slope
    let slopes = [3.39e9, 4.81e9, 6.95e9, 9.23e9];
    let s: Vec<f64> = slopes.iter().map(|&d| flux_to_phase_strength(2.4, d)).collect();
    assert!(s.windows(2).all(|w| w[0] < w[1]));
    assert!(common::rel(s[3] / s[0], (9.23f64 / 3.39).powi(2)) < 1e-12);
    // thick line: 1/f idle error at 450 ns is far below the telegraph-dominated value
    let f_c = 1.0 / 600.0;
    let r_1f = noise_models::phi2_one_over_f(450e-9, s[1], f_c, Filter::Ramsey).unwrap() / 6.0;
    let r_tel = noise_models::phi2_telegraph(450e-9, 479e3, 84e-9, Filter::Ramsey).unwrap() / 6.0;
    assert!(r_1f < 0.1 * r_tel, "1/f {r_1f} vs telegraph {r_tel}");
}

#[test]
fn error_budget_components() {
    let p = NoiseModelParams::default()
        .with_t1(26.7e-6)
        .with_white(73.8e-6)
        .with_correlated(1.231e-6)
        .with_one_over_f(1e9, 1.0 / 600.0)
        .with_telegraph(84e-9, 479e3);
    let b = error_budget(&p, 40e-9).unwrap();
    let t1 = b.ramsey.t1.unwrap();
    assert!((t1 - 5e-4).abs() < 0.5e-4, "{t1}");
    for filter in [Filter::Ramsey, Filter::Echo] {
        let total = noise_models::rb_error_from_variance(&p, 40e-9, filter).unwrap();
        let terms = if filter == Filter::Ramsey { b.ramsey } else { b.echo };
        assert!((terms.total() - total).abs() <= 1e-15 * total);
    }
    assert!(b.echo_total() < b.ramsey_total());
    let zero = error_budget(&NoiseModelParams::default(), 40e-9).unwrap();
    assert_eq!(zero.ramsey_total(), 0.0);
    assert_eq!(zero.echo_total(), 0.0);
    assert!(b.to_csv().lines().count() == 7);
}

#[test]
fn gate_error_fixtures() {
    let durations: Vec<f64> = (1..=12).map(|k| k as f64 * 20.0).collect();
    // (family, linear, quadratic) in 1e-6 per ns and per ns²
    let table = [(GateFamily::I, 17.0, Some(0.22)), (GateFamily::XX, 20.0, None), (GateFamily::Z, 24.0, Some(0.18)), (GateFamily::YX, 22.0, None)];
    for (k, (family, lin, quad)) in table.into_iter().enumerate() {
        let clean: Vec<f64> = durations.iter().map(|&t| 1e-6 * (lin * t + quad.unwrap_or(0.0) * t * t)).collect();
        let sigma: Vec<f64> = clean.iter().map(|c| 0.03 * c).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(20 + k as u64);
        let n = Normal::new(0.0, 1.0).unwrap();
        let y = clean.iter().zip(&sigma).map(|(c, s)| c + s * n.sample(&mut rng)).collect();
        let fit = fit_gate_error_vs_duration(family, &FitData::new(durations.clone(), y, Some(sigma)).unwrap()).unwrap();
        assert!(common::rel(fit.linear().0, lin * 1e-6) < 0.15, "{:?}: {}", family, fit.report.to_text());
        match quad {
            Some(q) => assert!(common::rel(fit.quadratic().unwrap().0, q * 1e-6) < 0.15),
            None => assert!(fit.quadratic().is_none()),
        }
    }
    // pure quadratic input: linear coefficient consistent with zero
    let y: Vec<f64> = durations.iter().map(|&t| 0.2e-6 * t * t).collect();
    let fit = fit_gate_error_vs_duration(GateFamily::I, &FitData::new(durations.clone(), y, None).unwrap()).unwrap();
    assert!(fit.linear().0.abs() <= 3.0 * fit.linear().1 + 1e-15);
}

#[test]
fn twirled_relation_round_trip() {
    // the exact relation separates from the small-angle one at large ⟨φ²⟩
    let (t1, tp1, t_sw, df) = (36.2e-6, 15.5e-6, 263e-9, 469e3);
    let model = IdleErrorModel::new(Terms::WHITE_TELEGRAPH, Some(t1), Filter::Ramsey).with_relation(PhaseRelation::Twirled);
    let small = IdleErrorModel::new(Terms::WHITE_TELEGRAPH, Some(t1), Filter::Ramsey);
    let theta = [tp1, t_sw, df];
    let tau = 450e-9;
    assert!(model.predict(&theta, tau) < small.predict(&theta, tau));
    assert!(common::rel(model.predict(&theta, 2e-9), small.predict(&theta, 2e-9)) < 1e-3);
    let data = noisy(&model, &theta, &tau_grid(), 0.01, 21);
    let fit = fit_idle_model(&model, &data).unwrap();
    for (name, truth) in [("t_phi1", tp1), ("t_sw", t_sw), ("delta_f10", df)] {
        assert!(common::rel(fit.report.value(name), truth) < 0.1, "{name}: {}", fit.report.to_text());
    }
}
