//! Input distributions, waveform synthesis, and RF moment evaluation.
//!
//! The harvested-energy proxy `z_dc = k2*E[y^2] + k4*E[y^4]` depends on the
//! second and fourth moments of the received RF signal
//! `y(t) = sqrt(2) Re{sum_n h_n x_n e^(j 2 pi f_n t)}`. Moments are available
//! two ways:
//!
//! - analytically per distribution (the fourth baseband moment picks up a
//!   factor 3/2 at RF from the time average of cos^4), and
//! - by Monte Carlo over symbol draws combined with time averaging over one
//!   waveform period `1/delta_f`.
//!
//! Noise is excluded from all harvested-energy computations; it only enters
//! rate expressions elsewhere.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, FrequencyGrid};
use crate::error::{Error, Result};
use crate::harvester::DiodeNonlinearParams;

/// Deterministic multisine component plus CSCG information power on one
/// subband of a superposed waveform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperposedSubband {
    /// Power of the deterministic power symbol, `|x_P,n|^2`.
    pub p_power: f64,
    /// Phase of the deterministic power symbol (radians).
    pub phase_power: f64,
    /// Variance of the CSCG information symbol.
    pub p_info: f64,
}

/// Multisine power waveform superposed on a CSCG-modulated information
/// waveform. The per-subband Ricean K-factor is `p_power / p_info`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperposedWaveform {
    pub subbands: Vec<SuperposedSubband>,
    pub budget: f64,
}

impl SuperposedWaveform {
    pub fn new(subbands: Vec<SuperposedSubband>, budget: f64) -> Result<Self> {
        if subbands.is_empty() {
            return Err(Error::Domain("waveform needs at least one subband".into()));
        }
        if subbands.iter().any(|s| s.p_power < 0.0 || s.p_info < 0.0) {
            return Err(Error::Domain("subband powers must be nonnegative".into()));
        }
        let total: f64 = subbands.iter().map(|s| s.p_power + s.p_info).sum();
        if (total - budget).abs() > 1e-9 * budget.max(1.0) {
            return Err(Error::Domain(format!(
                "subband powers sum to {total}, declared budget is {budget}"
            )));
        }
        Ok(Self { subbands, budget })
    }

    pub fn has_randomness(&self) -> bool {
        self.subbands.iter().any(|s| s.p_info > 0.0)
    }
}

/// Baseband input distribution of a single symbol stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum InputDistribution {
    /// Unmodulated continuous wave of the given average power.
    Cw { power: f64 },
    /// Circularly symmetric complex Gaussian.
    Cscg { power: f64 },
    /// Real zero-mean Gaussian placed on the in-phase dimension.
    RealGaussian { power: f64 },
    /// Independent real/imaginary Gaussians with unequal powers.
    AsymmetricGaussian { p_real: f64, p_imag: f64 },
    /// Two-mass-point distribution: amplitude 0 with probability `1 - 1/l^2`,
    /// amplitude `l*sqrt(P)` with probability `1/l^2`, uniform phase.
    Flash { scale: f64, power: f64 },
    /// Multisine-plus-CSCG waveform; per-subband structure, so scalar moment
    /// queries do not apply.
    Superposed(SuperposedWaveform),
}

impl InputDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            InputDistribution::Cw { power }
            | InputDistribution::Cscg { power }
            | InputDistribution::RealGaussian { power } => {
                if *power < 0.0 {
                    return Err(Error::Domain("power must be nonnegative".into()));
                }
            }
            InputDistribution::AsymmetricGaussian { p_real, p_imag } => {
                if *p_real < 0.0 || *p_imag < 0.0 {
                    return Err(Error::Domain("powers must be nonnegative".into()));
                }
            }
            InputDistribution::Flash { scale, power } => {
                if *power < 0.0 {
                    return Err(Error::Domain("power must be nonnegative".into()));
                }
                if *scale < 1.0 {
                    return Err(Error::Domain(format!("flash scale must be >= 1, got {scale}")));
                }
            }
            InputDistribution::Superposed(w) => {
                SuperposedWaveform::new(w.subbands.clone(), w.budget)?;
            }
        }
        Ok(())
    }

    pub fn total_power(&self) -> f64 {
        match self {
            InputDistribution::Cw { power }
            | InputDistribution::Cscg { power }
            | InputDistribution::RealGaussian { power }
            | InputDistribution::Flash { power, .. } => *power,
            InputDistribution::AsymmetricGaussian { p_real, p_imag } => p_real + p_imag,
            InputDistribution::Superposed(w) => w.budget,
        }
    }
}

/// Second and fourth absolute moments of a baseband symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentPair {
    pub m2: f64,
    pub m4: f64,
}

/// Closed-form `E[|x|^2]` and `E[|x|^4]` per distribution.
pub fn analytic_moments(dist: &InputDistribution) -> Result<MomentPair> {
    dist.validate()?;
    let (m2, m4) = match dist {
        InputDistribution::Cw { power } => (*power, power * power),
        InputDistribution::Cscg { power } => (*power, 2.0 * power * power),
        InputDistribution::RealGaussian { power } => (*power, 3.0 * power * power),
        InputDistribution::AsymmetricGaussian { p_real, p_imag } => {
            // E[(xr^2 + xi^2)^2] with independent zero-mean Gaussians.
            let m4 = 3.0 * p_real * p_real + 2.0 * p_real * p_imag + 3.0 * p_imag * p_imag;
            (p_real + p_imag, m4)
        }
        InputDistribution::Flash { scale, power } => {
            (*power, scale * scale * power * power)
        }
        InputDistribution::Superposed(_) => {
            return Err(Error::Unsupported(
                "superposed waveforms have per-subband structure; use evaluate_zdc_timedomain"
                    .into(),
            ))
        }
    };
    Ok(MomentPair { m2, m4 })
}

fn draw_symbol(dist: &InputDistribution, rng: &mut ChaCha8Rng) -> Complex64 {
    match dist {
        InputDistribution::Cw { power } => Complex64::new(power.sqrt(), 0.0),
        InputDistribution::Cscg { power } => {
            let sd = (power / 2.0).sqrt();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(sd * re, sd * im)
        }
        InputDistribution::RealGaussian { power } => {
            let re: f64 = StandardNormal.sample(rng);
            Complex64::new(power.sqrt() * re, 0.0)
        }
        InputDistribution::AsymmetricGaussian { p_real, p_imag } => {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(p_real.sqrt() * re, p_imag.sqrt() * im)
        }
        InputDistribution::Flash { scale, power } => {
            let u: f64 = rng.random();
            let r = if u < 1.0 / (scale * scale) {
                scale * power.sqrt()
            } else {
                0.0
            };
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(r, phase)
        }
        InputDistribution::Superposed(_) => unreachable!("rejected by caller"),
    }
}

/// Draw `n` i.i.d. symbols. Same `(dist, n, seed)` always yields the same
/// array.
pub fn sample_symbols(dist: &InputDistribution, n: usize, seed: u64) -> Result<Vec<Complex64>> {
    dist.validate()?;
    if n == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    if matches!(dist, InputDistribution::Superposed(_)) {
        return Err(Error::Unsupported(
            "superposed waveforms are drawn per subband inside evaluate_zdc_timedomain".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| draw_symbol(dist, &mut rng)).collect())
}

/// Counter-based per-run seed so Monte Carlo results are independent of
/// execution order and worker count (splitmix64 over the pair).
fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Precomputed `cos`/`sin` of every tone on one uniformly sampled waveform
/// period `1/delta_f`.
///
/// When `f0` is an integer multiple of `delta_f` (all grids used here), the
/// phase is reduced with exact integer arithmetic, so tone orthogonality on
/// the grid holds to machine precision and time averages of products of up
/// to four tones are exact.
#[derive(Debug, Clone)]
pub struct ToneBasis {
    pub n_tones: usize,
    pub n_samples: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl ToneBasis {
    pub fn new(grid: &FrequencyGrid, n_samples: usize) -> Result<Self> {
        let min = grid.min_samples_per_period();
        if n_samples < min {
            return Err(Error::Domain(format!(
                "{n_samples} samples per period undersamples the waveform; need at least {min} \
                 (four times the Nyquist rate of the highest carrier)"
            )));
        }
        let n = grid.n_subbands;
        let mut cos = vec![0.0; n * n_samples];
        let mut sin = vec![0.0; n * n_samples];
        for band in 0..n {
            let ratio = grid.subband_freq(band) / grid.delta_f;
            let ratio_int = ratio.round();
            let exact = (ratio - ratio_int).abs() < 1e-9 && ratio_int < 2.0_f64.powi(40);
            for k in 0..n_samples {
                let cycles = if exact {
                    // q*k mod M stays well inside the exact-integer range.
                    let q = ratio_int as u64;
                    ((q * k as u64) % n_samples as u64) as f64 / n_samples as f64
                } else {
                    ratio * k as f64 / n_samples as f64
                };
                let (s, c) = (std::f64::consts::TAU * cycles).sin_cos();
                cos[band * n_samples + k] = c;
                sin[band * n_samples + k] = s;
            }
        }
        Ok(Self {
            n_tones: n,
            n_samples,
            cos,
            sin,
        })
    }

    #[inline]
    pub fn cos_row(&self, band: usize) -> &[f64] {
        &self.cos[band * self.n_samples..(band + 1) * self.n_samples]
    }

    #[inline]
    pub fn sin_row(&self, band: usize) -> &[f64] {
        &self.sin[band * self.n_samples..(band + 1) * self.n_samples]
    }

    /// `y_k = sqrt(2) * Re{ sum_n c_n e^(j 2 pi f_n t_k) }` for complex
    /// per-tone coefficients `c_n`.
    pub fn synthesize(&self, coeffs: &[Complex64], out: &mut [f64]) {
        out.fill(0.0);
        for (band, c) in coeffs.iter().enumerate() {
            let cr = self.cos_row(band);
            let sr = self.sin_row(band);
            for k in 0..self.n_samples {
                out[k] += c.re * cr[k] - c.im * sr[k];
            }
        }
        let root2 = std::f64::consts::SQRT_2;
        for y in out.iter_mut() {
            *y *= root2;
        }
    }
}

/// Sample `y(t) = sqrt(2) Re{sum_n h_n x_n e^(j 2 pi f_n t)}` on a uniform
/// grid spanning exactly one period `1/delta_f`.
pub fn synthesize_rf(
    per_subband_symbols: &[Complex64],
    channel: &ChannelRealization,
    grid: &FrequencyGrid,
    n_samples: usize,
) -> Result<Vec<f64>> {
    let gains = channel.siso_gains()?;
    if per_subband_symbols.len() != grid.n_subbands || gains.len() != grid.n_subbands {
        return Err(Error::DimensionMismatch(format!(
            "expected {} per-subband symbols and gains",
            grid.n_subbands
        )));
    }
    let basis = ToneBasis::new(grid, n_samples)?;
    let coeffs: Vec<Complex64> = per_subband_symbols
        .iter()
        .zip(&gains)
        .map(|(x, h)| h * x)
        .collect();
    let mut out = vec![0.0; n_samples];
    basis.synthesize(&coeffs, &mut out);
    Ok(out)
}

/// RF-domain second and fourth moments of a single-subband transmission:
/// `m2_rf = |h|^2 E[|x|^2]`, `m4_rf = (3/2) |h|^4 E[|x|^4]`. The 3/2 is the
/// time average of the carrier's cos^4 scaled by the sqrt(2) RF convention.
pub fn rf_moments_single_subband(
    dist: &InputDistribution,
    channel_gain_sq: f64,
) -> Result<(f64, f64)> {
    if channel_gain_sq < 0.0 {
        return Err(Error::Domain("channel gain squared must be nonnegative".into()));
    }
    let m = analytic_moments(dist)?;
    Ok((
        channel_gain_sq * m.m2,
        1.5 * channel_gain_sq * channel_gain_sq * m.m4,
    ))
}

/// Waveform fed to the time-domain evaluator.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveformSpec {
    /// Multisine power waveform plus CSCG information waveform.
    Superposed(SuperposedWaveform),
    /// Independent scalar distribution per subband.
    PerSubband(Vec<InputDistribution>),
    /// Deterministic per-subband symbols.
    FixedSymbols(Vec<Complex64>),
}

impl WaveformSpec {
    fn n_subbands(&self) -> usize {
        match self {
            WaveformSpec::Superposed(w) => w.subbands.len(),
            WaveformSpec::PerSubband(d) => d.len(),
            WaveformSpec::FixedSymbols(s) => s.len(),
        }
    }

    pub fn has_randomness(&self) -> bool {
        match self {
            WaveformSpec::Superposed(w) => w.has_randomness(),
            WaveformSpec::PerSubband(d) => {
                !d.iter().all(|dist| matches!(dist, InputDistribution::Cw { .. }))
            }
            WaveformSpec::FixedSymbols(_) => false,
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut Vec<Complex64>) {
        out.clear();
        match self {
            WaveformSpec::Superposed(w) => {
                for s in &w.subbands {
                    let det = Complex64::from_polar(s.p_power.sqrt(), s.phase_power);
                    let sd = (s.p_info / 2.0).sqrt();
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    out.push(det + Complex64::new(sd * re, sd * im));
                }
            }
            WaveformSpec::PerSubband(dists) => {
                for d in dists {
                    out.push(draw_symbol(d, rng));
                }
            }
            WaveformSpec::FixedSymbols(s) => out.extend_from_slice(s),
        }
    }
}

/// Time-and-symbol averaged RF moments with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RfStatistics {
    pub m2: f64,
    pub m4: f64,
    pub m2_stderr: f64,
    pub m4_stderr: f64,
}

/// Output of [`evaluate_zdc_timedomain`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZdcEstimate {
    pub rf: RfStatistics,
    pub z_dc: f64,
    pub z_dc_stderr: f64,
    pub mc_runs: usize,
    pub samples_per_period: usize,
}

/// Estimate `z_dc = k2*m2 + k4*m4` by averaging `y^2` and `y^4` over one
/// waveform period and over `mc_runs` independent symbol draws.
///
/// Runs are seeded per run index, so the estimate is bit-identical for any
/// worker count. Deterministic waveforms are evaluated once. Pass
/// `samples_per_period = 0` for the default of eight samples per cycle of
/// the highest carrier.
pub fn evaluate_zdc_timedomain(
    waveform: &WaveformSpec,
    channel: &ChannelRealization,
    harvester: &DiodeNonlinearParams,
    mc_runs: usize,
    samples_per_period: usize,
    seed: u64,
) -> Result<ZdcEstimate> {
    let gains = channel.siso_gains()?;
    let grid = channel.grid;
    if waveform.n_subbands() != grid.n_subbands {
        return Err(Error::DimensionMismatch(format!(
            "waveform has {} subbands, channel has {}",
            waveform.n_subbands(),
            grid.n_subbands
        )));
    }
    if let WaveformSpec::Superposed(w) = waveform {
        SuperposedWaveform::new(w.subbands.clone(), w.budget)?;
    }
    let random = waveform.has_randomness();
    if random && mc_runs == 0 {
        return Err(Error::Domain(
            "mc_runs must be positive for waveforms with random symbols".into(),
        ));
    }
    let runs = if random { mc_runs } else { 1 };
    let n_samples = if samples_per_period == 0 {
        grid.min_samples_per_period()
    } else {
        samples_per_period
    };
    let basis = ToneBasis::new(&grid, n_samples)?;

    // Per-run time averages of y^2 and y^4.
    let per_run: Vec<(f64, f64)> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, run as u64));
            let mut symbols = Vec::with_capacity(grid.n_subbands);
            waveform.draw(&mut rng, &mut symbols);
            let coeffs: Vec<Complex64> = symbols
                .iter()
                .zip(&gains)
                .map(|(x, h)| h * x)
                .collect();
            let mut y = vec![0.0; n_samples];
            basis.synthesize(&coeffs, &mut y);
            let mut s2 = 0.0;
            let mut s4 = 0.0;
            for &v in &y {
                let v2 = v * v;
                s2 += v2;
                s4 += v2 * v2;
            }
            (s2 / n_samples as f64, s4 / n_samples as f64)
        })
        .collect();

    let rn = runs as f64;
    let m2 = per_run.iter().map(|r| r.0).sum::<f64>() / rn;
    let m4 = per_run.iter().map(|r| r.1).sum::<f64>() / rn;
    let z_runs: Vec<f64> = per_run
        .iter()
        .map(|r| harvester.k2 * r.0 + harvester.k4 * r.1)
        .collect();
    let z_dc = z_runs.iter().sum::<f64>() / rn;
    let stderr = |values: &[f64], mean: f64| -> f64 {
        if values.len() < 2 {
            return 0.0;
        }
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (values.len() - 1) as f64;
        (var / values.len() as f64).sqrt()
    };
    let m2_runs: Vec<f64> = per_run.iter().map(|r| r.0).collect();
    let m4_runs: Vec<f64> = per_run.iter().map(|r| r.1).collect();
    Ok(ZdcEstimate {
        rf: RfStatistics {
            m2,
            m4,
            m2_stderr: stderr(&m2_runs, m2),
            m4_stderr: stderr(&m4_runs, m4),
        },
        z_dc,
        z_dc_stderr: stderr(&z_runs, z_dc),
        mc_runs: runs,
        samples_per_period: n_samples,
    })
}

/// Exact `z_dc` of a superposed waveform with coherent power-symbol phases:
/// the Gaussian information expectation is taken in closed form, the
/// deterministic multisine is time-averaged on the tone grid.
///
/// `m4 = 4*avg(D^4) + 12*avg(D^2)*v + 3*v^2` with
/// `D(t) = sum_n sqrt(g_n p_power_n) cos(2 pi f_n t)` and
/// `v = sum_n g_n p_info_n`.
pub fn superposed_zdc(
    gains_sq: &[f64],
    p_power: &[f64],
    p_info: &[f64],
    harvester: &DiodeNonlinearParams,
    basis: &ToneBasis,
) -> f64 {
    let n = gains_sq.len();
    debug_assert_eq!(p_power.len(), n);
    debug_assert_eq!(p_info.len(), n);
    debug_assert_eq!(basis.n_tones, n);
    let u: f64 = (0..n).map(|i| gains_sq[i] * p_power[i]).sum();
    let v: f64 = (0..n).map(|i| gains_sq[i] * p_info[i]).sum();
    let m = basis.n_samples;
    let mut d4 = 0.0;
    let mut d = vec![0.0; m];
    for i in 0..n {
        let amp = (gains_sq[i] * p_power[i]).sqrt();
        if amp == 0.0 {
            continue;
        }
        let cr = basis.cos_row(i);
        for k in 0..m {
            d[k] += amp * cr[k];
        }
    }
    for &dk in &d {
        let d2k = dk * dk;
        d4 += d2k * d2k;
    }
    d4 /= m as f64;
    let m2 = u + v;
    let m4 = 4.0 * d4 + 6.0 * u * v + 3.0 * v * v;
    harvester.k2 * m2 + harvester.k4 * m4
}

/// Analytic gradient of [`superposed_zdc`] with respect to the per-subband
/// powers, `(d z / d p_power, d z / d p_info)`.
///
/// The multisine term has square-root cusps where `p_power_n = 0` while
/// other tones are active; the gradient there is the one-sided limit with
/// the amplitude clamped away from zero.
pub fn superposed_zdc_grad(
    gains_sq: &[f64],
    p_power: &[f64],
    p_info: &[f64],
    harvester: &DiodeNonlinearParams,
    basis: &ToneBasis,
) -> (Vec<f64>, Vec<f64>) {
    let n = gains_sq.len();
    let m = basis.n_samples;
    let u: f64 = (0..n).map(|i| gains_sq[i] * p_power[i]).sum();
    let v: f64 = (0..n).map(|i| gains_sq[i] * p_info[i]).sum();
    let mut d = vec![0.0; m];
    for i in 0..n {
        let amp = (gains_sq[i] * p_power[i]).sqrt();
        if amp == 0.0 {
            continue;
        }
        let cr = basis.cos_row(i);
        for k in 0..m {
            d[k] += amp * cr[k];
        }
    }
    let d3: Vec<f64> = d.iter().map(|&x| x * x * x).collect();

    let mut grad_pp = vec![0.0; n];
    let mut grad_pi = vec![0.0; n];
    for i in 0..n {
        let g = gains_sq[i];
        // d z / d p_info: only m2, the cross term, and 3v^2 depend on it.
        grad_pi[i] = harvester.k2 * g + harvester.k4 * 6.0 * g * (u + v);

        // d z / d p_power via d4 and the cross term.
        let cr = basis.cos_row(i);
        let mut avg_d3c = 0.0;
        for k in 0..m {
            avg_d3c += d3[k] * cr[k];
        }
        avg_d3c /= m as f64;
        // Keeps the one-sided gradient finite at p_power = 0 without
        // touching interior points; the floor scales with the waveform.
        let floor = 1e-12 * (u + v).sqrt().max(1e-300);
        let amp = (g * p_power[i]).sqrt().max(floor);
        let dd4_dpp = 2.0 * g / amp * avg_d3c;
        grad_pp[i] = harvester.k2 * g + harvester.k4 * (4.0 * dd4_dpp + 6.0 * g * v);
    }
    (grad_pp, grad_pi)
}
