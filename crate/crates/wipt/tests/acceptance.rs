//! Acceptance suite: one test per criterion, each printing a PASS line and
//! enforcing its runtime budget. Brute-force oracles live in this file and
//! recompute every quantity from first principles, independent of the
//! solver code paths they check.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use wipt::allocate::{
    mimo_eigen_allocate, modified_waterfill, saturation_allocate, superposed_waveform_allocate,
    waterfill, SuperposedOptions,
};
use wipt::channel::{ChannelRealization, FrequencyGrid};
use wipt::harvester::{
    fit_sigmoid, invert_sigmoid, sigmoid_dc_power, zdc_from_rf_moments, DiodeNonlinearParams,
    HarvesterModel, LinearParams, MeasurementPoint, SaturationParams,
};
use wipt::multiuser::{
    energy_beamform_linear, evaluate_grid_beam, evaluate_scenario, gridsearch_frontier,
    weighted_eigen_saturation, BeamformerSet, GridResolution, MultiuserScenario,
};
use wipt::region::{
    region_cscg_only_nonlinear, region_diode_nonlinear_multisubband,
    region_diode_nonlinear_single, region_linear_single, ReceiverArch, Strategy,
};
use wipt::signal::{
    analytic_moments, evaluate_zdc_timedomain, rf_moments_single_subband, sample_symbols,
    superposed_zdc, superposed_zdc_grad, InputDistribution, ToneBasis, WaveformSpec,
};

fn report(criterion: &str, elapsed: Duration, budget: Duration) {
    println!(
        "[acceptance] {criterion}: PASS ({:.2}s of {:.0}s budget)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(
        elapsed <= budget,
        "{criterion} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

fn flat_siso_channel(gains_sq: &[f64]) -> ChannelRealization {
    let n = gains_sq.len();
    let grid = FrequencyGrid::new((2 * n.max(4)) as f64 * 1e6, 1e6, n, 1e6).unwrap();
    let gains: Vec<Complex64> = gains_sq
        .iter()
        .map(|&g| Complex64::new(g.sqrt(), 0.0))
        .collect();
    ChannelRealization::from_siso_gains(&gains, grid).unwrap()
}

/// Criterion 1: single-subband linear-model regions at the reference
/// parameters (k2 = 0.5, |h|^2 = 12, P = 10, sigma^2 = 3).
#[test]
fn criterion_1_linear_single_subband_regions() {
    let start = Instant::now();
    let (g, p, s, k2) = (12.0, 10.0, 3.0, 0.5);
    let n = 65;

    let ideal = region_linear_single(g, p, s, k2, ReceiverArch::Ideal, n).unwrap();
    let corner = &ideal.hull[0];
    let r_star = 41f64.log2();
    assert!((corner.rate - r_star).abs() < 1e-9);
    assert!((corner.energy - 60.0).abs() < 1e-9);

    // TS: the straight segment between (log2(41), 0) and (0, 60).
    let ts = region_linear_single(g, p, s, k2, ReceiverArch::TimeSwitching, n).unwrap();
    assert_eq!(ts.boundary.len(), n);
    for (i, pt) in ts.boundary.iter().enumerate() {
        let tau = i as f64 / (n - 1) as f64;
        assert!((pt.rate - (1.0 - tau) * r_star).abs() < 1e-9);
        assert!((pt.energy - tau * 60.0).abs() < 1e-9);
    }

    // PS (worst-case split) strictly dominates TS at every interior grid
    // point with rho = tau (equal energy, higher rate).
    let ps = region_linear_single(g, p, s, k2, ReceiverArch::worst_case_ps(s), n).unwrap();
    for i in 1..n - 1 {
        let (pt_ps, pt_ts) = (&ps.boundary[i], &ts.boundary[i]);
        assert!((pt_ps.energy - pt_ts.energy).abs() < 1e-9);
        assert!(
            pt_ps.rate > pt_ts.rate + 1e-9,
            "rho=tau grid point {i}: PS rate {} vs TS rate {}",
            pt_ps.rate,
            pt_ts.rate
        );
    }
    report("criterion 1 (linear single-subband regions)", start.elapsed(), Duration::from_secs(1));
}

/// Criterion 2: saturation model closed forms and parameter recovery.
#[test]
fn criterion_2_sigmoid_model() {
    let start = Instant::now();
    // Reference circuit in watt units: a = 5.365/mW, b = 0.2308 mW,
    // p_sat = 10.73 mW.
    let params = SaturationParams::new(5365.0, 0.2308e-3, 10.73e-3).unwrap();
    assert_eq!(sigmoid_dc_power(0.0, &params).unwrap(), 0.0);
    let at_b = sigmoid_dc_power(params.b, &params).unwrap();
    assert!(
        (at_b - 3.81e-3).abs() / 3.81e-3 < 0.005,
        "P_dc(b) = {at_b}"
    );

    // Noiseless generate-then-fit at 20 log-spaced input powers.
    let points: Vec<MeasurementPoint> = (0..20)
        .map(|i| {
            let t = i as f64 / 19.0;
            let p_rf = 1e-5 * (1e-2f64 / 1e-5).powf(t);
            MeasurementPoint::new(p_rf, sigmoid_dc_power(p_rf, &params).unwrap()).unwrap()
        })
        .collect();
    let fit = fit_sigmoid(&points).unwrap();
    for (name, got, truth) in [
        ("a", fit.params.a, params.a),
        ("b", fit.params.b, params.b),
        ("p_sat", fit.params.p_sat, params.p_sat),
    ] {
        assert!(
            (got - truth).abs() / truth < 0.01,
            "{name}: fitted {got}, truth {truth}"
        );
    }
    report("criterion 2 (sigmoid closed forms and fit)", start.elapsed(), Duration::from_secs(1));
}

/// Criterion 3: modified water-filling against a 10^4-point grid oracle on
/// gains [4, 1].
#[test]
fn criterion_3_modified_waterfilling_oracle() {
    let start = Instant::now();
    let gains = [4.0, 1.0];
    let (noise, budget, k2) = (1.0, 1.0, 1.0);
    let e_max = k2 * budget * 4.0;
    let steps = 10_000;

    for i in 0..16 {
        let e_target = e_max * i as f64 / 15.0;
        let alloc = modified_waterfill(&gains, noise, budget, e_target, k2).unwrap();
        let solver_rate = alloc.rate(&gains, noise);

        // Exhaustive oracle over p0 with p1 = P - p0.
        let mut oracle_rate = f64::MIN;
        for j in 0..=steps {
            let p0 = budget * j as f64 / steps as f64;
            let p1 = budget - p0;
            if k2 * (4.0 * p0 + p1) < e_target - 1e-12 {
                continue;
            }
            let rate = (1.0 + 4.0 * p0 / noise).log2() + (1.0 + p1 / noise).log2();
            oracle_rate = oracle_rate.max(rate);
        }
        assert!(
            (solver_rate - oracle_rate).abs() < 1e-3,
            "E = {e_target}: solver {solver_rate}, oracle {oracle_rate}"
        );
        // Constraints honored.
        assert!(alloc.powers.iter().sum::<f64>() <= budget + 1e-8);
        assert!(k2 * alloc.received_power(&gains) >= e_target - 1e-8 * e_max);

        if i == 0 {
            let wf = waterfill(&gains, noise, budget).unwrap();
            assert_eq!(alloc.powers, wf.powers, "E = 0 must reduce to classical WF");
        }
        if i == 15 {
            assert!((alloc.powers[0] - budget).abs() < 1e-9, "E_max must collapse to one subband");
            assert!(alloc.powers[1].abs() < 1e-9);
        }
    }
    report("criterion 3 (modified water-filling vs grid oracle)", start.elapsed(), Duration::from_secs(5));
}

/// Criterion 4: moment agreement and the input-distribution energy ordering.
#[test]
fn criterion_4_moment_and_ordering_suite() {
    let start = Instant::now();
    let n = 100_000;
    let dists = [
        InputDistribution::Cw { power: 1.0 },
        InputDistribution::Cscg { power: 1.0 },
        InputDistribution::RealGaussian { power: 1.0 },
        InputDistribution::AsymmetricGaussian { p_real: 0.8, p_imag: 0.2 },
        InputDistribution::Flash { scale: 2.5, power: 1.0 },
    ];
    for (idx, dist) in dists.iter().enumerate() {
        let samples = sample_symbols(dist, n, 1000 + idx as u64).unwrap();
        let m = analytic_moments(dist).unwrap();
        let p2: Vec<f64> = samples.iter().map(|x| x.norm_sqr()).collect();
        let p4: Vec<f64> = p2.iter().map(|v| v * v).collect();
        for (vals, expect) in [(&p2, m.m2), (&p4, m.m4)] {
            let mean = vals.iter().sum::<f64>() / n as f64;
            let var =
                vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            assert!(
                (mean - expect).abs() <= 4.0 * se.max(1e-12),
                "{dist:?}: mean {mean} vs {expect} (se {se})"
            );
        }
    }

    // Energy ordering at equal average power under k2 = 0.17, k4 = 19.145.
    let h = DiodeNonlinearParams::new(0.17, 19.145).unwrap();
    let zdc = |dist: &InputDistribution| -> f64 {
        let (m2, m4) = rf_moments_single_subband(dist, 1.0).unwrap();
        zdc_from_rf_moments(m2, m4, &h).unwrap()
    };
    let z_cw = zdc(&InputDistribution::Cw { power: 1.0 });
    let z_cscg = zdc(&InputDistribution::Cscg { power: 1.0 });
    let z_real = zdc(&InputDistribution::RealGaussian { power: 1.0 });
    assert!(z_real > z_cscg && z_cscg > z_cw, "{z_real} > {z_cscg} > {z_cw}");

    // Flash overtakes the real Gaussian exactly when l^2 > 3.
    let z_flash = |l: f64| zdc(&InputDistribution::Flash { scale: l, power: 1.0 });
    assert!(z_flash(1.7) < z_real); // 1.7^2 = 2.89
    assert!(z_flash(1.75) > z_real); // 1.75^2 = 3.0625
    assert!((z_flash(3f64.sqrt()) - z_real).abs() < 1e-9);
    // Strictly increasing in l.
    let mut last = z_flash(1.0);
    for i in 1..=20 {
        let z = z_flash(1.0 + 0.45 * i as f64);
        assert!(z > last);
        last = z;
    }
    report("criterion 4 (moments and energy ordering)", start.elapsed(), Duration::from_secs(10));
}

/// Criterion 5: the fourth-order term scales linearly with the tone count
/// for in-phase multisines but stays flat for CSCG modulation.
#[test]
fn criterion_5_multisine_scaling() {
    let start = Instant::now();
    let h = DiodeNonlinearParams::new(0.17, 19.145).unwrap();
    let power = 1.0;
    let sizes = [4usize, 8, 16, 32, 64];

    let mut k4_terms = Vec::new();
    for &n in &sizes {
        let ch = flat_siso_channel(&vec![1.0; n]);
        let amp = (power / n as f64).sqrt();
        let wf = WaveformSpec::FixedSymbols(vec![Complex64::new(amp, 0.0); n]);
        let est = evaluate_zdc_timedomain(&wf, &ch, &h, 0, 0, 0).unwrap();
        k4_terms.push((n as f64, est.z_dc - h.k2 * est.rf.m2));
    }
    // Least-squares line fit and its R^2.
    let n_pts = k4_terms.len() as f64;
    let mean_x = k4_terms.iter().map(|p| p.0).sum::<f64>() / n_pts;
    let mean_y = k4_terms.iter().map(|p| p.1).sum::<f64>() / n_pts;
    let sxx: f64 = k4_terms.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = k4_terms.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let ss_tot: f64 = k4_terms.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = k4_terms
        .iter()
        .map(|p| (p.1 - (mean_y + slope * (p.0 - mean_x))).powi(2))
        .sum();
    let r_sq = 1.0 - ss_res / ss_tot;
    assert!(r_sq > 0.99, "multisine k4-term linearity R^2 = {r_sq}");
    assert!(slope > 0.0);

    // CSCG-modulated multicarrier: each doubling of N grows z_dc by < 1.5x.
    let mut last: Option<f64> = None;
    for &n in &sizes {
        let ch = flat_siso_channel(&vec![1.0; n]);
        let per = power / n as f64;
        let wf = WaveformSpec::PerSubband(vec![InputDistribution::Cscg { power: per }; n]);
        let est = evaluate_zdc_timedomain(&wf, &ch, &h, 2000, 0, 42).unwrap();
        if let Some(prev) = last {
            let factor: f64 = est.z_dc / prev;
            assert!(
                factor < 1.5,
                "CSCG z_dc grew by {factor} when doubling to N = {n}"
            );
        }
        last = Some(est.z_dc);
    }
    report("criterion 5 (multisine vs modulated scaling)", start.elapsed(), Duration::from_secs(30));
}

/// Criterion 6: shape of the single-subband nonlinear region with
/// asymmetric Gaussian inputs.
#[test]
fn criterion_6_nonlinear_single_subband_shape() {
    let start = Instant::now();
    let h = DiodeNonlinearParams::new(0.17, 19.145).unwrap();
    let (g, p, s) = (1.0, 1.0, 1e-4);
    let region = region_diode_nonlinear_single(g, p, s, &h, 4.0, 65).unwrap();
    let asym: Vec<_> = region
        .boundary
        .iter()
        .filter(|pt| matches!(pt.strategy, Strategy::AsymmetricGaussian { .. }))
        .collect();

    // Fourth-moment ratio between the P_r = P and P_r = P/2 endpoints is
    // exactly 3:2.
    let k4_term = |pt: &wipt::region::REPoint| (pt.energy - h.k2 * g * p) / (h.k4 * 1.5 * g * g);
    let m4_first = k4_term(asym.first().unwrap());
    let m4_last = k4_term(asym.last().unwrap());
    assert!(
        (m4_last / m4_first - 1.5).abs() < 1e-9,
        "m4 ratio {}",
        m4_last / m4_first
    );

    // Monotone boundary from the max-rate (CSCG-like) endpoint to the
    // max-energy (real-Gaussian-like) endpoint.
    for w in asym.windows(2) {
        assert!(w[1].rate <= w[0].rate + 1e-12);
        assert!(w[1].energy >= w[0].energy - 1e-12);
    }
    report("criterion 6 (nonlinear single-subband shape)", start.elapsed(), Duration::from_secs(5));
}

/// Criterion 7: superposed-waveform region at N = 4 dominates the CSCG-only
/// region and pins both extreme points; the solver gradient agrees with
/// finite differences.
#[test]
fn criterion_7_superposed_region() {
    let start = Instant::now();
    let gains_sq = [1.2, 1.0, 0.8, 0.6];
    let ch = flat_siso_channel(&gains_sq);
    let h = DiodeNonlinearParams::new(0.17, 19.145).unwrap();
    let (power, noise) = (1.0, 0.1);
    let opts = SuperposedOptions::default();

    let region = region_diode_nonlinear_multisubband(
        &ch,
        power,
        noise,
        &h,
        ReceiverArch::Ideal,
        33,
        &opts,
    )
    .unwrap();
    let cscg = region_cscg_only_nonlinear(&ch, power, noise, &h, 33).unwrap();

    // Dominance on >= 90% of a shared rate grid.
    let r_shared = region.max_rate().min(cscg.max_rate());
    let grid_n = 50;
    let mut dominated = 0;
    for i in 0..grid_n {
        let r = r_shared * i as f64 / (grid_n - 1) as f64;
        let sup = region.energy_at_rate(r).unwrap();
        let base = cscg.energy_at_rate(r).unwrap();
        if sup >= base * (1.0 - 1e-9) {
            dominated += 1;
        }
    }
    assert!(
        dominated * 10 >= grid_n * 9,
        "superposed hull dominates CSCG-only hull at only {dominated}/{grid_n} grid points"
    );

    // Extreme point P_P = 0: the max-rate point is the CSCG water-filling
    // point.
    let wf = waterfill(&gains_sq, noise, power).unwrap();
    let r_max = wf.rate(&gains_sq, noise);
    let v_wf = wf.received_power(&gains_sq);
    let z_wf = h.k2 * v_wf + h.k4 * 3.0 * v_wf * v_wf;
    assert!((region.max_rate() - r_max).abs() < 1e-6);
    assert!(region.energy_at_rate(r_max).unwrap() >= z_wf * (1.0 - 1e-9));
    let max_rate_point = region.boundary.iter().max_by(|a, b| a.rate.partial_cmp(&b.rate).unwrap()).unwrap();
    if let Strategy::Superposed { p_power, .. } = &max_rate_point.strategy {
        assert!(p_power.iter().all(|&v| v.abs() < 1e-9), "P_P != 0 at max rate");
    } else {
        panic!("unexpected strategy at the max-rate point");
    }

    // Extreme point P_I = 0: the region contains the multisine-only point
    // (the solver may legitimately beat it at zero rate by mixing in
    // information power, whose Gaussian fourth moment also feeds the
    // rectifier).
    let basis = ToneBasis::new(&ch.grid, ch.grid.min_samples_per_period()).unwrap();
    let uniform_ms = vec![power / 4.0; 4];
    let strongest_ms = vec![power, 0.0, 0.0, 0.0];
    let zeros = vec![0.0; 4];
    let z_ms = superposed_zdc(&gains_sq, &uniform_ms, &zeros, &h, &basis)
        .max(superposed_zdc(&gains_sq, &strongest_ms, &zeros, &h, &basis));
    assert!(
        region.max_energy() >= z_ms * (1.0 - 1e-9),
        "region top {} misses the multisine-only point {z_ms}",
        region.max_energy()
    );

    // Analytic gradient vs central finite differences at 100 random
    // interior points, 1e-5 relative.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let pp: Vec<f64> = (0..4).map(|_| rng.random_range(0.02..0.5)).collect();
        let pi: Vec<f64> = (0..4).map(|_| rng.random_range(0.02..0.5)).collect();
        let (gpp, gpi) = superposed_zdc_grad(&gains_sq, &pp, &pi, &h, &basis);
        let eps = 1e-6;
        for i in 0..4 {
            for (which, grad) in [(0, gpp[i]), (1, gpi[i])] {
                let mut hi_pp = pp.clone();
                let mut lo_pp = pp.clone();
                let mut hi_pi = pi.clone();
                let mut lo_pi = pi.clone();
                if which == 0 {
                    hi_pp[i] += eps;
                    lo_pp[i] -= eps;
                } else {
                    hi_pi[i] += eps;
                    lo_pi[i] -= eps;
                }
                let fd = (superposed_zdc(&gains_sq, &hi_pp, &hi_pi, &h, &basis)
                    - superposed_zdc(&gains_sq, &lo_pp, &lo_pi, &h, &basis))
                    / (2.0 * eps);
                assert!(
                    (grad - fd).abs() / fd.abs().max(1e-9) < 1e-5,
                    "gradient mismatch: {grad} vs {fd}"
                );
            }
        }
    }
    report("criterion 7 (superposed-waveform region)", start.elapsed(), Duration::from_secs(120));
}

/// Five sigmoid ERs with varied ceilings, one IR, two transmit antennas.
fn mismatch_scenario() -> MultiuserScenario {
    let c = Complex64::new;
    let sat = |a, b, p| HarvesterModel::Saturation(SaturationParams::new(a, b, p).unwrap());
    MultiuserScenario {
        ir_channels: vec![vec![c(1.0, 0.0), c(0.3, 0.4)]],
        er_channels: vec![
            vec![c(1.3, 0.0), c(0.2, -0.1)],
            vec![c(0.1, 0.2), c(0.9, 0.0)],
            vec![c(0.5, -0.4), c(0.3, 0.3)],
            vec![c(-0.2, 0.6), c(0.4, -0.5)],
            vec![c(0.7, 0.1), c(-0.6, 0.2)],
        ],
        budget: 1.0,
        noise_sq: 0.1,
        sinr_targets: vec![0.0],
        er_harvesters: vec![
            sat(120.0, 0.03, 0.04),
            sat(12.0, 0.25, 0.5),
            sat(20.0, 0.15, 0.3),
            sat(15.0, 0.2, 0.35),
            sat(25.0, 0.1, 0.25),
        ],
    }
}

/// Criterion 8: allocating with the linear model and harvesting through the
/// sigmoids lands strictly inside the saturation-aware frontier.
#[test]
fn criterion_8_saturation_mismatch() {
    let start = Instant::now();
    let sigmoid_sc = mismatch_scenario();
    let mut linear_sc = sigmoid_sc.clone();
    linear_sc.er_harvesters =
        vec![
            HarvesterModel::Linear(LinearParams::new(1.0, 1.0).unwrap());
            linear_sc.er_channels.len()
        ];

    let resolution = GridResolution::default();
    let aware = gridsearch_frontier(&sigmoid_sc, &resolution).unwrap();
    let linear_frontier = gridsearch_frontier(&linear_sc, &resolution).unwrap();

    // Re-evaluate the linear-optimal beams under the true sigmoids.
    let mut strictly_inside = 0;
    let mut checked = 0;
    for p in &linear_frontier.hull {
        let Strategy::Beamformer { theta, phi, power } = p.strategy else {
            panic!("grid frontier must carry beam parameters");
        };
        let (rate, dc) = evaluate_grid_beam(&sigmoid_sc, theta, phi, power).unwrap();
        let frontier = aware
            .energy_at_rate(rate)
            .expect("mismatch rate inside the aware frontier's range");
        assert!(
            dc <= frontier * (1.0 + 1e-9),
            "mismatch point ({rate}, {dc}) escapes the aware frontier {frontier}"
        );
        checked += 1;
        if dc < frontier * (1.0 - 1e-3) {
            strictly_inside += 1;
        }
    }
    assert!(checked > 0);
    assert!(
        strictly_inside >= 1,
        "no mismatch point lies strictly inside the aware frontier"
    );
    report("criterion 8 (saturation mismatch)", start.elapsed(), Duration::from_secs(120));
}

/// Criterion 9: every solver matches its brute-force oracle on at least 50
/// randomized small instances.
#[test]
fn criterion_9_oracle_suite() {
    let start = Instant::now();

    // --- water-filling vs exhaustive simplex grid, N in {2, 3} ---
    let wf_cases: Vec<u64> = (0..50).collect();
    wf_cases.par_iter().for_each(|&case| {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + case);
        let n = 2 + (case % 2) as usize;
        let gains: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..4.0)).collect();
        let noise = rng.random_range(0.2..2.0);
        let budget = rng.random_range(0.5..3.0);
        let alloc = waterfill(&gains, noise, budget).unwrap();
        let solver_rate = alloc.rate(&gains, noise);
        let oracle_rate = grid_rate_oracle(&gains, noise, budget, None, 0.0);
        assert!(
            solver_rate >= oracle_rate - 1e-3,
            "case {case}: WF {solver_rate} vs oracle {oracle_rate}"
        );
        assert!(alloc.powers.iter().sum::<f64>() <= budget * (1.0 + 1e-8));
    });

    // --- modified water-filling vs constrained grid ---
    wf_cases.par_iter().for_each(|&case| {
        let mut rng = ChaCha8Rng::seed_from_u64(9100 + case);
        let n = 2 + (case % 2) as usize;
        let gains: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..4.0)).collect();
        let noise = rng.random_range(0.2..2.0);
        let budget = rng.random_range(0.5..3.0);
        let g_max = gains.iter().cloned().fold(0.0, f64::max);
        let frac = rng.random_range(0.0..1.0);
        let wf_recv = waterfill(&gains, noise, budget).unwrap().received_power(&gains);
        let target = wf_recv + frac * (budget * g_max - wf_recv);
        let alloc =
            wipt::allocate::modified_waterfill_received(&gains, noise, budget, target).unwrap();
        let solver_rate = alloc.rate(&gains, noise);
        let oracle_rate = grid_rate_oracle(&gains, noise, budget, Some(target), 1e-9);
        assert!(
            solver_rate >= oracle_rate - 1e-3,
            "case {case}: modified WF {solver_rate} vs oracle {oracle_rate}"
        );
        assert!(alloc.received_power(&gains) >= target - 1e-8 * target.max(1.0));
        // KKT residuals.
        assert!(alloc.budget_residual < 1e-8 * budget.max(1.0));
        assert!(alloc.energy_slack < 1e-8 * target.max(1.0));
    });

    // --- MIMO eigenmode allocation vs direct covariance grid (2x2) ---
    (0..50u64).into_par_iter().for_each(|case| {
        let mut rng = ChaCha8Rng::seed_from_u64(9200 + case);
        let h = nalgebra::DMatrix::from_fn(2, 2, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let noise = rng.random_range(0.2..2.0);
        let budget = rng.random_range(0.5..2.0);
        let k2 = 1.0;
        let hh = h.adjoint() * &h;
        let lam_max = nalgebra::SymmetricEigen::new(hh.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::MIN, f64::max);
        let e_target = rng.random_range(0.0..1.0) * k2 * budget * lam_max;
        let design = mimo_eigen_allocate(&h, noise, budget, e_target, k2).unwrap();

        // Oracle: sweep covariances Q = U diag(p, P-p) U^H directly.
        let mut oracle_rate = f64::MIN;
        let steps = 36;
        for it in 0..=steps {
            let theta = std::f64::consts::FRAC_PI_2 * it as f64 / steps as f64;
            for ip in 0..=steps {
                let phi = std::f64::consts::TAU * ip as f64 / steps as f64;
                let u1 = nalgebra::DVector::from_vec(vec![
                    Complex64::new(theta.cos(), 0.0),
                    Complex64::from_polar(theta.sin(), phi),
                ]);
                let u2 = nalgebra::DVector::from_vec(vec![
                    Complex64::new(-theta.sin(), 0.0),
                    Complex64::from_polar(theta.cos(), phi),
                ]);
                for is in 0..=40 {
                    let p1 = budget * is as f64 / 40.0;
                    let q = (&u1 * u1.adjoint()).map(|z| z * p1)
                        + (&u2 * u2.adjoint()).map(|z| z * (budget - p1));
                    let hqh = &h * &q * h.adjoint();
                    let received = hqh[(0, 0)].re + hqh[(1, 1)].re;
                    if k2 * received < e_target - 1e-9 {
                        continue;
                    }
                    let m = nalgebra::DMatrix::<Complex64>::identity(2, 2)
                        + hqh.map(|z| z / noise);
                    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
                    oracle_rate = oracle_rate.max(det.log2());
                }
            }
        }
        assert!(
            design.rate >= oracle_rate - 1e-3,
            "case {case}: MIMO rate {} vs covariance-grid oracle {oracle_rate}",
            design.rate
        );
        let q = design.covariance();
        let trace = q[(0, 0)].re + q[(1, 1)].re;
        assert!(trace <= budget * (1.0 + 1e-8));
        assert!(k2 * design.received_power() >= e_target * (1.0 - 1e-8) - 1e-12);
    });

    // --- saturation allocation: inversion chain plus constrained grid ---
    (0..50u64).into_par_iter().for_each(|case| {
        let mut rng = ChaCha8Rng::seed_from_u64(9300 + case);
        let n = 2 + (case % 2) as usize;
        let gains: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..4.0)).collect();
        let noise = rng.random_range(0.2..2.0);
        let budget = rng.random_range(0.5..3.0);
        let ab = rng.random_range(0.2..1.4);
        let b = rng.random_range(0.1..1.0);
        let params = SaturationParams::new(ab / b, b, rng.random_range(0.05..0.5)).unwrap();
        let g_max = gains.iter().cloned().fold(0.0, f64::max);
        let e_max = sigmoid_dc_power(budget * g_max, &params).unwrap();
        let e_target = rng.random_range(0.0..0.95) * e_max;
        let alloc = saturation_allocate(&gains, noise, budget, e_target, &params).unwrap();
        let achieved = sigmoid_dc_power(alloc.received_power(&gains), &params).unwrap();
        assert!(achieved >= e_target * (1.0 - 1e-6));
        let required = invert_sigmoid(e_target, &params).unwrap();
        let oracle_rate = grid_rate_oracle(&gains, noise, budget, Some(required), 1e-9);
        assert!(
            alloc.rate(&gains, noise) >= oracle_rate - 1e-3,
            "case {case}: saturation-constrained rate vs oracle"
        );
    });

    // --- superposed waveform vs 3-parameter grid (N = 2) ---
    (0..50u64).into_par_iter().for_each(|case| {
        let mut rng = ChaCha8Rng::seed_from_u64(9400 + case);
        let gains_sq = [rng.random_range(0.3..2.0), rng.random_range(0.3..2.0)];
        let noise = rng.random_range(0.1..0.5);
        let budget = 1.0;
        let h = DiodeNonlinearParams::new(0.17, 19.145).unwrap();
        let ch = flat_siso_channel(&gains_sq);
        let r_max = waterfill(&gains_sq, noise, budget)
            .unwrap()
            .rate(&gains_sq, noise);
        let r_floor = rng.random_range(0.0..0.95) * r_max;
        let sol = superposed_waveform_allocate(
            &ch,
            budget,
            r_floor,
            &h,
            noise,
            &SuperposedOptions::default(),
        )
        .unwrap();
        assert!(sol.rate >= r_floor * (1.0 - 1e-6) - 1e-9);

        // Independent oracle: direct time-domain fourth moment over the
        // same tone grid (q = 8, 9 cycles per period).
        let steps = 40;
        let m = 64;
        let mut best = f64::MIN;
        for i0 in 0..=steps {
            for i1 in 0..=steps {
                for j0 in 0..=steps {
                    let pp0 = budget * i0 as f64 / steps as f64;
                    let pp1 = budget * i1 as f64 / steps as f64;
                    let pi0 = budget * j0 as f64 / steps as f64;
                    let used = pp0 + pp1 + pi0;
                    if used > budget {
                        continue;
                    }
                    let pi1 = budget - used;
                    let rate = (1.0 + gains_sq[0] * pi0 / noise).log2()
                        + (1.0 + gains_sq[1] * pi1 / noise).log2();
                    if rate < r_floor {
                        continue;
                    }
                    let u = gains_sq[0] * pp0 + gains_sq[1] * pp1;
                    let v = gains_sq[0] * pi0 + gains_sq[1] * pi1;
                    let a0 = (gains_sq[0] * pp0).sqrt();
                    let a1 = (gains_sq[1] * pp1).sqrt();
                    let mut d4 = 0.0;
                    for k in 0..m {
                        let t = k as f64 / m as f64;
                        let d = a0 * (std::f64::consts::TAU * 8.0 * t).cos()
                            + a1 * (std::f64::consts::TAU * 9.0 * t).cos();
                        d4 += d * d * d * d;
                    }
                    d4 /= m as f64;
                    let z = h.k2 * (u + v) + h.k4 * (4.0 * d4 + 6.0 * u * v + 3.0 * v * v);
                    best = best.max(z);
                }
            }
        }
        assert!(
            sol.z_dc >= best * (1.0 - 0.02),
            "case {case}: superposed z_dc {} vs oracle {best}",
            sol.z_dc
        );
    });

    // --- linear energy beamforming vs random beams ---
    (0..50u64).into_par_iter().for_each(|case| {
        let mut rng = ChaCha8Rng::seed_from_u64(9500 + case);
        let j = 1 + (case % 3) as usize;
        let ers: Vec<Vec<Complex64>> = (0..j)
            .map(|_| {
                (0..2)
                    .map(|_| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    })
                    .collect()
            })
            .collect();
        let power = rng.random_range(0.5..2.0);
        let beam = energy_beamform_linear(&ers, power).unwrap();
        let received = |w: &[Complex64]| -> f64 {
            ers.iter()
                .map(|g| {
                    g.iter()
                        .zip(w)
                        .map(|(a, b)| a * b)
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .sum()
        };
        let best = received(&beam);
        for _ in 0..10_000 {
            let mut w: Vec<Complex64> = (0..2)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in w.iter_mut() {
                *z *= power.sqrt() / norm;
            }
            assert!(received(&w) <= best * (1.0 + 1e-9));
        }
    });

    // --- weighted eigenmode never below the linear baseline ---
    (0..50u64).into_par_iter().for_each(|case| {
        let mut rng = ChaCha8Rng::seed_from_u64(9600 + case);
        let j = 1 + (case % 4) as usize;
        let ers: Vec<Vec<Complex64>> = (0..j)
            .map(|_| {
                (0..2)
                    .map(|_| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    })
                    .collect()
            })
            .collect();
        let sigmoids: Vec<SaturationParams> = (0..j)
            .map(|_| {
                let ab = rng.random_range(0.2..1.4);
                let b = rng.random_range(0.05..1.0);
                SaturationParams::new(ab / b, b, rng.random_range(0.05..1.0)).unwrap()
            })
            .collect();
        let power = rng.random_range(0.5..2.0);
        let result = weighted_eigen_saturation(&ers, power, &sigmoids, 60).unwrap();
        let linear = energy_beamform_linear(&ers, power).unwrap();
        let linear_dc: f64 = ers
            .iter()
            .zip(&sigmoids)
            .map(|(g, s)| {
                let r = g
                    .iter()
                    .zip(&linear)
                    .map(|(a, b)| a * b)
                    .sum::<Complex64>()
                    .norm_sqr();
                sigmoid_dc_power(r, s).unwrap()
            })
            .sum();
        assert!(
            result.sum_dc >= linear_dc - 1e-9,
            "case {case}: weighted {} below linear {linear_dc}",
            result.sum_dc
        );
    });

    // --- scenario evaluation vs dense re-computation ---
    (0..50u64).into_par_iter().for_each(|case| {
        let mut rng = ChaCha8Rng::seed_from_u64(9700 + case);
        let rnd = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
            (0..2)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        };
        let scenario = MultiuserScenario {
            ir_channels: vec![rnd(&mut rng), rnd(&mut rng)],
            er_channels: vec![rnd(&mut rng)],
            budget: 10.0,
            noise_sq: rng.random_range(0.05..1.0),
            sinr_targets: vec![0.0, 0.0],
            er_harvesters: vec![HarvesterModel::Linear(LinearParams::new(1.0, 1.0).unwrap())],
        };
        let beams = vec![rnd(&mut rng), rnd(&mut rng)];
        let eval =
            evaluate_scenario(&scenario, &BeamformerSet::info_only(beams.clone())).unwrap();
        for k in 0..2 {
            let dotp = |a: &[Complex64], b: &[Complex64]| a[0] * b[0] + a[1] * b[1];
            let sig = dotp(&scenario.ir_channels[k], &beams[k]).norm_sqr();
            let int = dotp(&scenario.ir_channels[k], &beams[1 - k]).norm_sqr();
            let expect = sig / (int + scenario.noise_sq);
            assert!((eval.sinr[k] - expect).abs() <= 1e-12 * expect.max(1.0));
        }
    });

    // --- grid frontier: enumerated points never dominate it ---
    (0..50u64).into_par_iter().for_each(|case| {
        let mut rng = ChaCha8Rng::seed_from_u64(9800 + case);
        let rnd = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
            (0..2)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        };
        let scenario = MultiuserScenario {
            ir_channels: vec![rnd(&mut rng)],
            er_channels: vec![rnd(&mut rng), rnd(&mut rng)],
            budget: 1.0,
            noise_sq: 0.1,
            sinr_targets: vec![0.0],
            er_harvesters: vec![
                HarvesterModel::Linear(LinearParams::new(1.0, 1.0).unwrap());
                2
            ],
        };
        let region = gridsearch_frontier(
            &scenario,
            &GridResolution {
                n_theta: 61,
                n_phi: 121,
                n_power: 1,
            },
        )
        .unwrap();
        for _ in 0..400 {
            let theta = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            let (rate, dc) = evaluate_grid_beam(&scenario, theta, phi, 1.0).unwrap();
            if let Some(frontier) = region.energy_at_rate(rate) {
                // Off-grid beams may poke past the sampled frontier by at
                // most the grid resolution.
                assert!(
                    dc <= frontier + 0.05 * region.max_energy().max(1e-12),
                    "case {case}: ({rate}, {dc}) vs frontier {frontier}"
                );
            }
        }
    });

    report("criterion 9 (randomized oracle suite)", start.elapsed(), Duration::from_secs(600));
}

/// Exhaustive rate oracle over the power simplex (step budget/1000) with an
/// optional received-power floor.
fn grid_rate_oracle(
    gains: &[f64],
    noise: f64,
    budget: f64,
    min_received: Option<f64>,
    tol: f64,
) -> f64 {
    let steps = 1000;
    let mut best = f64::MIN;
    match gains.len() {
        2 => {
            for i in 0..=steps {
                let p0 = budget * i as f64 / steps as f64;
                let p1 = budget - p0;
                let received = gains[0] * p0 + gains[1] * p1;
                if let Some(floor) = min_received {
                    if received < floor - tol - 1e-12 {
                        continue;
                    }
                }
                let rate = (1.0 + gains[0] * p0 / noise).log2() + (1.0 + gains[1] * p1 / noise).log2();
                best = best.max(rate);
            }
        }
        3 => {
            for i in 0..=steps {
                let p0 = budget * i as f64 / steps as f64;
                for j in 0..=(steps - i) {
                    let p1 = budget * j as f64 / steps as f64;
                    let p2 = budget - p0 - p1;
                    let received = gains[0] * p0 + gains[1] * p1 + gains[2] * p2;
                    if let Some(floor) = min_received {
                        if received < floor - tol - 1e-12 {
                            continue;
                        }
                    }
                    let rate = (1.0 + gains[0] * p0 / noise).log2()
                        + (1.0 + gains[1] * p1 / noise).log2()
                        + (1.0 + gains[2] * p2 / noise).log2();
                    best = best.max(rate);
                }
            }
        }
        _ => panic!("oracle supports N <= 3"),
    }
    best
}
