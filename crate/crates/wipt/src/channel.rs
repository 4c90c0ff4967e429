//! Frequency-domain MIMO channel construction from multipath components.
//!
//! The transmit signal occupies `N` evenly spaced subbands `f_n = f0 + n*df`.
//! Each subband sees a flat complex gain per (rx, tx) pair, obtained by
//! summing path phasors `alpha_l * exp(j(-2*pi*f_n*tau_l + zeta))`.
//! Noise never enters here; it belongs to rate expressions downstream.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evenly spaced subband layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    /// Base carrier frequency (Hz).
    pub f0: f64,
    /// Subband spacing (Hz).
    pub delta_f: f64,
    /// Number of subbands.
    pub n_subbands: usize,
    /// Per-subband bandwidth (Hz), at most `delta_f`.
    pub f_w: f64,
}

impl FrequencyGrid {
    pub fn new(f0: f64, delta_f: f64, n_subbands: usize, f_w: f64) -> Result<Self> {
        if !(f0 > 0.0 && delta_f > 0.0 && f_w > 0.0) {
            return Err(Error::Domain(format!(
                "grid frequencies must be positive, got f0={f0}, delta_f={delta_f}, f_w={f_w}"
            )));
        }
        if n_subbands == 0 {
            return Err(Error::Domain("need at least one subband".into()));
        }
        if f_w > delta_f * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "subband bandwidth f_w={f_w} exceeds spacing delta_f={delta_f}"
            )));
        }
        Ok(Self {
            f0,
            delta_f,
            n_subbands,
            f_w,
        })
    }

    /// Carrier frequency of subband `n`.
    pub fn subband_freq(&self, n: usize) -> f64 {
        self.f0 + n as f64 * self.delta_f
    }

    /// Highest carrier frequency.
    pub fn max_freq(&self) -> f64 {
        self.subband_freq(self.n_subbands - 1)
    }

    /// Smallest sample count per period `1/delta_f` accepted by the RF
    /// synthesizer: sample rate of four times the Nyquist rate of the
    /// highest carrier.
    pub fn min_samples_per_period(&self) -> usize {
        (8.0 * self.max_freq() / self.delta_f).ceil() as usize
    }
}

/// Per-path phase shifts `zeta`, indexable by (rx, tx, subband).
///
/// Most test channels use a phase that does not depend on the subband, so
/// compact forms are provided alongside the full tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PhaseShift {
    /// Same phase for every (rx, tx, subband).
    Constant(f64),
    /// One phase per (rx, tx) pair, row-major `[rx][tx]`, subband-independent.
    PerAntenna(Vec<f64>),
    /// Full tensor, row-major `[rx][tx][subband]`.
    Full(Vec<f64>),
}

impl PhaseShift {
    fn get(&self, rx: usize, tx: usize, n: usize, m_t: usize, n_subbands: usize) -> f64 {
        match self {
            PhaseShift::Constant(z) => *z,
            PhaseShift::PerAntenna(v) => v[rx * m_t + tx],
            PhaseShift::Full(v) => v[(rx * m_t + tx) * n_subbands + n],
        }
    }

    fn check_len(&self, m_r: usize, m_t: usize, n_subbands: usize) -> Result<()> {
        let ok = match self {
            PhaseShift::Constant(_) => true,
            PhaseShift::PerAntenna(v) => v.len() == m_r * m_t,
            PhaseShift::Full(v) => v.len() == m_r * m_t * n_subbands,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                "phase tensor length does not match (m_r, m_t, n_subbands)".into(),
            ))
        }
    }
}

/// One multipath component: amplitude gain, delay, and phase shifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathComponent {
    pub alpha: f64,
    pub tau: f64,
    pub zeta: PhaseShift,
}

impl PathComponent {
    pub fn new(alpha: f64, tau: f64, zeta: PhaseShift) -> Result<Self> {
        if alpha < 0.0 || tau < 0.0 {
            return Err(Error::Domain(format!(
                "path gain and delay must be nonnegative, got alpha={alpha}, tau={tau}"
            )));
        }
        Ok(Self { alpha, tau, zeta })
    }

    /// Path with a single phase for all antennas and subbands.
    pub fn simple(alpha: f64, tau: f64, zeta: f64) -> Result<Self> {
        Self::new(alpha, tau, PhaseShift::Constant(zeta))
    }
}

/// Per-subband complex MIMO frequency response.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// One `m_r x m_t` matrix per subband.
    pub subbands: Vec<DMatrix<Complex64>>,
    pub grid: FrequencyGrid,
    /// Set when the path delay spread violates the narrowband condition
    /// `max |tau_l - tau_l'| < 1/f_w`; the flat-per-subband model is then an
    /// approximation of dubious quality.
    pub narrowband_violation: bool,
}

impl ChannelRealization {
    pub fn m_r(&self) -> usize {
        self.subbands[0].nrows()
    }

    pub fn m_t(&self) -> usize {
        self.subbands[0].ncols()
    }

    pub fn n_subbands(&self) -> usize {
        self.subbands.len()
    }

    /// Entry `h_{rx, tx}` at subband `n`.
    pub fn entry(&self, n: usize, rx: usize, tx: usize) -> Complex64 {
        self.subbands[n][(rx, tx)]
    }

    /// Per-subband scalar gains for a SISO channel.
    pub fn siso_gains(&self) -> Result<Vec<Complex64>> {
        if self.m_r() != 1 || self.m_t() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected SISO channel, got {}x{}",
                self.m_r(),
                self.m_t()
            )));
        }
        Ok(self.subbands.iter().map(|m| m[(0, 0)]).collect())
    }

    /// `|h_n|^2` per subband for a SISO channel.
    pub fn siso_gains_sq(&self) -> Result<Vec<f64>> {
        Ok(self.siso_gains()?.iter().map(|h| h.norm_sqr()).collect())
    }

    /// Build directly from per-subband gains (SISO convenience, unit `f_w`).
    pub fn from_siso_gains(gains: &[Complex64], grid: FrequencyGrid) -> Result<Self> {
        if gains.len() != grid.n_subbands {
            return Err(Error::DimensionMismatch(format!(
                "{} gains for {} subbands",
                gains.len(),
                grid.n_subbands
            )));
        }
        if gains.iter().any(|g| !g.re.is_finite() || !g.im.is_finite()) {
            return Err(Error::Domain("channel gains must be finite".into()));
        }
        Ok(Self {
            subbands: gains
                .iter()
                .map(|&g| DMatrix::from_element(1, 1, g))
                .collect(),
            grid,
            narrowband_violation: false,
        })
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            grid: self.grid,
            m_r: self.m_r(),
            m_t: self.m_t(),
            narrowband_violation: self.narrowband_violation,
            h: self
                .subbands
                .iter()
                .map(|m| {
                    (0..m.nrows())
                        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                        .collect()
                })
                .collect(),
        }
    }
}

/// JSON wire form: entries as `[re, im]` pairs indexed `[subband][rx][tx]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelJson {
    pub grid: FrequencyGrid,
    pub m_r: usize,
    pub m_t: usize,
    #[serde(default)]
    pub narrowband_violation: bool,
    pub h: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChannelJson {
    pub fn into_realization(self) -> Result<ChannelRealization> {
        if self.h.len() != self.grid.n_subbands {
            return Err(Error::DimensionMismatch(
                "subband count does not match grid".into(),
            ));
        }
        let mut subbands = Vec::with_capacity(self.h.len());
        for mat in &self.h {
            if mat.len() != self.m_r || mat.iter().any(|row| row.len() != self.m_t) {
                return Err(Error::DimensionMismatch(
                    "channel matrix dimensions inconsistent".into(),
                ));
            }
            let m = DMatrix::from_fn(self.m_r, self.m_t, |i, j| {
                Complex64::new(mat[i][j][0], mat[i][j][1])
            });
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Domain("channel entries must be finite".into()));
            }
            subbands.push(m);
        }
        Ok(ChannelRealization {
            subbands,
            grid: self.grid,
            narrowband_violation: self.narrowband_violation,
        })
    }
}

/// Sum the path phasors into per-subband frequency responses,
/// `h_{i,m,n} = sum_l alpha_l * exp(j(-2*pi*f_n*tau_l + zeta_{i,m,n,l}))`.
pub fn frequency_response(
    paths: &[PathComponent],
    grid: FrequencyGrid,
    m_t: usize,
    m_r: usize,
) -> Result<ChannelRealization> {
    if paths.is_empty() {
        return Err(Error::Domain("path list must not be empty".into()));
    }
    if m_t == 0 || m_r == 0 {
        return Err(Error::Domain("antenna counts must be positive".into()));
    }
    for p in paths {
        p.zeta.check_len(m_r, m_t, grid.n_subbands)?;
    }

    let tau_min = paths.iter().map(|p| p.tau).fold(f64::INFINITY, f64::min);
    let tau_max = paths.iter().map(|p| p.tau).fold(0.0, f64::max);
    let narrowband_violation = (tau_max - tau_min) >= 1.0 / grid.f_w;

    let n = grid.n_subbands;
    let mut subbands = Vec::with_capacity(n);
    for band in 0..n {
        let f_n = grid.subband_freq(band);
        let m = DMatrix::from_fn(m_r, m_t, |i, j| {
            paths
                .iter()
                .map(|p| {
                    let phase = -2.0 * std::f64::consts::PI * f_n * p.tau
                        + p.zeta.get(i, j, band, m_t, n);
                    Complex64::from_polar(p.alpha, phase)
                })
                .sum::<Complex64>()
        });
        subbands.push(m);
    }
    Ok(ChannelRealization {
        subbands,
        grid,
        narrowband_violation,
    })
}

/// Deterministic random test channel: `n_paths` components with Rayleigh
/// amplitudes normalized to `sum E[alpha_l^2] = 1`, delays uniform within
/// `1/f_w`, and per-(rx, tx) uniform phases. Same seed, same realization.
pub fn random_channel(
    seed: u64,
    grid: FrequencyGrid,
    m_t: usize,
    m_r: usize,
    n_paths: usize,
) -> Result<ChannelRealization> {
    if n_paths == 0 {
        return Err(Error::Domain("need at least one path".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma_sq = 1.0 / n_paths as f64; // E[alpha^2] per path
    let mut paths = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        // Rayleigh amplitude via inverse CDF, E[alpha^2] = sigma_sq.
        let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
        let alpha = (sigma_sq * (-u.ln())).sqrt();
        let tau = rng.random_range(0.0..1.0 / grid.f_w);
        let zeta: Vec<f64> = (0..m_r * m_t)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        paths.push(PathComponent::new(alpha, tau, PhaseShift::PerAntenna(zeta))?);
    }
    frequency_response(&paths, grid, m_t, m_r)
}
