//! Desk-scale multi-user SWIPT with separated information and energy
//! receivers.
//!
//! A transmitter with `M_t` antennas serves `K` single-antenna information
//! receivers (IRs) through per-user beams carrying CSCG symbols and powers
//! `J` single-antenna energy receivers (ERs) from the same transmission.
//! Dedicated energy beams are off by default: when the IRs cannot cancel
//! them they only hurt the SINR, so the optimal strategy drops them. A flag
//! re-enables them for evaluation-only studies.
//!
//! The exact SINR-constrained beamforming optimum is not solved here; a
//! dense grid search over the two-antenna beam manifold serves as the
//! correctness anchor, with a weighted-eigenmode fixed point as the fast
//! heuristic for saturating ERs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harvester::{HarvesterModel, SaturationParams};
use crate::region::{pareto_hull, EnergyUnits, ModelTag, REPoint, ReceiverArch, RERegion, Strategy};

/// Channels, budget, and per-ER harvesters of one downlink scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiuserScenario {
    /// IR channels, one row vector (length `M_t`) per IR.
    pub ir_channels: Vec<Vec<Complex64>>,
    /// ER channels, one row vector (length `M_t`) per ER.
    pub er_channels: Vec<Vec<Complex64>>,
    pub budget: f64,
    pub noise_sq: f64,
    /// Per-IR SINR targets.
    pub sinr_targets: Vec<f64>,
    /// Per-ER harvester model.
    pub er_harvesters: Vec<HarvesterModel>,
}

impl MultiuserScenario {
    pub fn validate(&self) -> Result<()> {
        if self.ir_channels.is_empty() || self.er_channels.is_empty() {
            return Err(Error::Domain("need at least one IR and one ER".into()));
        }
        let m_t = self.ir_channels[0].len();
        if m_t == 0 {
            return Err(Error::Domain("channels must have at least one antenna".into()));
        }
        if self
            .ir_channels
            .iter()
            .chain(&self.er_channels)
            .any(|c| c.len() != m_t)
        {
            return Err(Error::DimensionMismatch(
                "all channels must share the transmit antenna count".into(),
            ));
        }
        if self.sinr_targets.len() != self.ir_channels.len() {
            return Err(Error::DimensionMismatch(
                "one SINR target per IR required".into(),
            ));
        }
        if self.sinr_targets.iter().any(|&g| g < 0.0) {
            return Err(Error::Domain("SINR targets must be nonnegative".into()));
        }
        if self.er_harvesters.len() != self.er_channels.len() {
            return Err(Error::DimensionMismatch(
                "one harvester model per ER required".into(),
            ));
        }
        if self.budget <= 0.0 || self.noise_sq <= 0.0 {
            return Err(Error::Domain("budget and noise must be positive".into()));
        }
        Ok(())
    }

    pub fn m_t(&self) -> usize {
        self.ir_channels[0].len()
    }

    pub fn to_json(&self) -> ScenarioJson {
        let pack = |chs: &[Vec<Complex64>]| -> Vec<Vec<[f64; 2]>> {
            chs.iter()
                .map(|c| c.iter().map(|z| [z.re, z.im]).collect())
                .collect()
        };
        ScenarioJson {
            ir_channels: pack(&self.ir_channels),
            er_channels: pack(&self.er_channels),
            budget: self.budget,
            noise_sq: self.noise_sq,
            sinr_targets: self.sinr_targets.clone(),
            er_harvesters: self.er_harvesters.clone(),
        }
    }
}

/// JSON wire form with channels as `[re, im]` arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioJson {
    pub ir_channels: Vec<Vec<[f64; 2]>>,
    pub er_channels: Vec<Vec<[f64; 2]>>,
    pub budget: f64,
    pub noise_sq: f64,
    pub sinr_targets: Vec<f64>,
    pub er_harvesters: Vec<HarvesterModel>,
}

impl ScenarioJson {
    pub fn into_scenario(self) -> Result<MultiuserScenario> {
        let unpack = |chs: Vec<Vec<[f64; 2]>>| -> Vec<Vec<Complex64>> {
            chs.into_iter()
                .map(|c| c.into_iter().map(|z| Complex64::new(z[0], z[1])).collect())
                .collect()
        };
        let scenario = MultiuserScenario {
            ir_channels: unpack(self.ir_channels),
            er_channels: unpack(self.er_channels),
            budget: self.budget,
            noise_sq: self.noise_sq,
            sinr_targets: self.sinr_targets,
            er_harvesters: self.er_harvesters,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Information beams (one per IR) and optional dedicated energy beams.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    pub info_beams: Vec<Vec<Complex64>>,
    pub energy_beams: Vec<Vec<Complex64>>,
}

impl BeamformerSet {
    pub fn info_only(info_beams: Vec<Vec<Complex64>>) -> Self {
        Self {
            info_beams,
            energy_beams: Vec::new(),
        }
    }

    pub fn total_power(&self) -> f64 {
        self.info_beams
            .iter()
            .chain(&self.energy_beams)
            .map(|b| b.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }
}

fn dot(channel: &[Complex64], beam: &[Complex64]) -> Complex64 {
    channel.iter().zip(beam).map(|(h, w)| h * w).sum()
}

/// Per-receiver outcome of a fixed beamformer set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioEvaluation {
    /// SINR per IR.
    pub sinr: Vec<f64>,
    /// `log2(1 + sinr)` per IR.
    pub rates: Vec<f64>,
    /// Received RF power per ER.
    pub received_rf: Vec<f64>,
    /// Harvested DC per ER through its own harvester model.
    pub harvested_dc: Vec<f64>,
}

/// Exact quadratic-form evaluation of SINRs and per-ER powers. Energy
/// beams, when present, act as uncancelable interference at the IRs.
pub fn evaluate_scenario(
    scenario: &MultiuserScenario,
    beams: &BeamformerSet,
) -> Result<ScenarioEvaluation> {
    scenario.validate()?;
    let m_t = scenario.m_t();
    if beams.info_beams.len() != scenario.ir_channels.len() {
        return Err(Error::DimensionMismatch("one info beam per IR required".into()));
    }
    if beams
        .info_beams
        .iter()
        .chain(&beams.energy_beams)
        .any(|b| b.len() != m_t)
    {
        return Err(Error::DimensionMismatch(
            "beam length must equal the antenna count".into(),
        ));
    }
    if beams.total_power() > scenario.budget * (1.0 + 1e-9) {
        return Err(Error::Domain(format!(
            "beams spend {} but the budget is {}",
            beams.total_power(),
            scenario.budget
        )));
    }

    let mut sinr = Vec::with_capacity(scenario.ir_channels.len());
    for (k, h) in scenario.ir_channels.iter().enumerate() {
        let signal = dot(h, &beams.info_beams[k]).norm_sqr();
        let mut interference = 0.0;
        for (j, b) in beams.info_beams.iter().enumerate() {
            if j != k {
                interference += dot(h, b).norm_sqr();
            }
        }
        for v in &beams.energy_beams {
            interference += dot(h, v).norm_sqr();
        }
        sinr.push(signal / (interference + scenario.noise_sq));
    }
    let rates = sinr.iter().map(|&g| (1.0 + g).log2()).collect();

    let mut received_rf = Vec::with_capacity(scenario.er_channels.len());
    let mut harvested_dc = Vec::with_capacity(scenario.er_channels.len());
    for (j, g) in scenario.er_channels.iter().enumerate() {
        let p: f64 = beams
            .info_beams
            .iter()
            .chain(&beams.energy_beams)
            .map(|b| dot(g, b).norm_sqr())
            .sum();
        received_rf.push(p);
        harvested_dc.push(scenario.er_harvesters[j].dc_from_cscg_rf(p)?);
    }
    Ok(ScenarioEvaluation {
        sinr,
        rates,
        received_rf,
        harvested_dc,
    })
}

/// Fix the arbitrary global phase so eigenvector-based beams are
/// deterministic: first component of largest modulus made real positive.
fn normalize_phase(beam: &mut [Complex64]) {
    let pivot = beam
        .iter()
        .cloned()
        .max_by(|a, b| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap())
        .unwrap_or_default();
    if pivot.norm_sqr() > 0.0 {
        let rot = pivot.conj() / pivot.norm();
        for z in beam.iter_mut() {
            *z *= rot;
        }
    }
}

fn dominant_eigenbeam(weighted: &DMatrix<Complex64>, power: f64) -> Vec<Complex64> {
    let eig = nalgebra::SymmetricEigen::new(weighted.clone());
    let mut best = 0;
    for i in 0..eig.eigenvalues.len() {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    let col = eig.eigenvectors.column(best);
    let norm = col.norm();
    let mut beam: Vec<Complex64> = col.iter().map(|z| z * (power.sqrt() / norm)).collect();
    normalize_phase(&mut beam);
    beam
}

/// Sum-received-power-optimal single beam under the linear model:
/// `sqrt(P) * v_max(sum_j g_j^H g_j)`. With one ER this is MRT.
pub fn energy_beamform_linear(er_channels: &[Vec<Complex64>], power: f64) -> Result<Vec<Complex64>> {
    if er_channels.is_empty() {
        return Err(Error::Domain("need at least one ER".into()));
    }
    let m_t = er_channels[0].len();
    if er_channels.iter().any(|c| c.len() != m_t) {
        return Err(Error::DimensionMismatch("ER channels must share length".into()));
    }
    if er_channels
        .iter()
        .all(|c| c.iter().all(|z| z.norm_sqr() == 0.0))
    {
        return Err(Error::Domain("all ER channels are zero".into()));
    }
    if power.is_nan() || power <= 0.0 {
        return Err(Error::Domain("power must be positive".into()));
    }
    let mut gram = DMatrix::<Complex64>::zeros(m_t, m_t);
    for g in er_channels {
        for a in 0..m_t {
            for b in 0..m_t {
                gram[(a, b)] += g[a].conj() * g[b];
            }
        }
    }
    Ok(dominant_eigenbeam(&gram, power))
}

/// Result of the weighted-eigenmode fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedBeamResult {
    pub beam: Vec<Complex64>,
    pub sum_dc: f64,
    pub iterations: usize,
    /// Ten consecutive candidates failed to improve the best sum-DC.
    pub stagnated: bool,
}

/// Energy beam for saturating ERs: iterate
/// `beam <- sqrt(P) * v_max(sum_j beta_j g_j^H g_j)` with `beta_j` the slope
/// of ER j's sigmoid at its current received power, keeping the best iterate
/// seen. Saturated receivers get small weights, steering power toward the
/// ones that can still use it. Starts from the linear-model beam, so the
/// returned sum-DC never falls below that baseline. Heuristic: the exact
/// dual weights of the underlying convex program are not computed.
pub fn weighted_eigen_saturation(
    er_channels: &[Vec<Complex64>],
    power: f64,
    sigmoids: &[SaturationParams],
    max_iter: usize,
) -> Result<WeightedBeamResult> {
    if sigmoids.len() != er_channels.len() {
        return Err(Error::DimensionMismatch(
            "one sigmoid parameter set per ER required".into(),
        ));
    }
    let sum_dc_of = |beam: &[Complex64]| -> Result<f64> {
        let mut total = 0.0;
        for (g, s) in er_channels.iter().zip(sigmoids) {
            total += crate::harvester::sigmoid_dc_power(dot(g, beam).norm_sqr(), s)?;
        }
        Ok(total)
    };

    let m_t = er_channels[0].len();
    let mut current = energy_beamform_linear(er_channels, power)?;
    let mut best = current.clone();
    let mut best_dc = sum_dc_of(&current)?;
    let mut non_improving = 0;
    let mut iterations = 0;
    let mut stagnated = false;
    for _ in 0..max_iter {
        iterations += 1;
        let mut weighted = DMatrix::<Complex64>::zeros(m_t, m_t);
        for (g, s) in er_channels.iter().zip(sigmoids) {
            let received = dot(g, &current).norm_sqr();
            let beta = s.dc_power_derivative(received);
            for a in 0..m_t {
                for b in 0..m_t {
                    weighted[(a, b)] += g[a].conj() * g[b] * beta;
                }
            }
        }
        current = dominant_eigenbeam(&weighted, power);
        let dc = sum_dc_of(&current)?;
        if dc > best_dc {
            best_dc = dc;
            best = current.clone();
            non_improving = 0;
        } else {
            non_improving += 1;
            if non_improving >= 10 {
                stagnated = true;
                break;
            }
        }
    }
    Ok(WeightedBeamResult {
        beam: best,
        sum_dc: best_dc,
        iterations,
        stagnated,
    })
}

/// Grid density for the exhaustive frontier search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridResolution {
    /// Points on `theta in [0, pi/2]`.
    pub n_theta: usize,
    /// Points on `phi in [0, 2 pi)`.
    pub n_phi: usize,
    /// Transmit power levels; only used when some ER saturates (scaling a
    /// full-power beam down is never Pareto-improving otherwise).
    pub n_power: usize,
}

impl Default for GridResolution {
    fn default() -> Self {
        Self {
            n_theta: 181,
            n_phi: 361,
            n_power: 32,
        }
    }
}

impl GridResolution {
    pub fn halved(&self) -> Self {
        Self {
            n_theta: (self.n_theta / 2).max(2),
            n_phi: (self.n_phi / 2).max(2),
            n_power: (self.n_power / 2).max(1),
        }
    }
}

/// Rate and summed DC of the parametrized beam
/// `w = sqrt(power) [cos(theta), sin(theta) e^(j phi)]` in a `K = 1`
/// scenario.
pub fn evaluate_grid_beam(
    scenario: &MultiuserScenario,
    theta: f64,
    phi: f64,
    power: f64,
) -> Result<(f64, f64)> {
    let beam = vec![
        Complex64::new(power.sqrt() * theta.cos(), 0.0),
        Complex64::from_polar(power.sqrt() * theta.sin(), phi),
    ];
    let eval = evaluate_scenario(scenario, &BeamformerSet::info_only(vec![beam]))?;
    Ok((eval.rates[0], eval.harvested_dc.iter().sum()))
}

/// Exhaustive Pareto frontier of (IR rate, sum ER DC) over unit beams
/// `[cos(theta), sin(theta) e^(j phi)]` for a two-antenna, single-IR
/// scenario. The brute-force oracle for every beamforming claim.
pub fn gridsearch_frontier(
    scenario: &MultiuserScenario,
    resolution: &GridResolution,
) -> Result<RERegion> {
    scenario.validate()?;
    if scenario.m_t() != 2 || scenario.ir_channels.len() != 1 {
        return Err(Error::Unsupported(format!(
            "grid search covers M_t = 2, K = 1; got M_t = {}, K = {}",
            scenario.m_t(),
            scenario.ir_channels.len()
        )));
    }
    let any_sigmoid = scenario
        .er_harvesters
        .iter()
        .any(|h| matches!(h, HarvesterModel::Saturation(_)));
    let n_power = if any_sigmoid { resolution.n_power } else { 1 };
    let power_levels: Vec<f64> = (1..=n_power)
        .map(|i| scenario.budget * i as f64 / n_power as f64)
        .collect();

    let thetas: Vec<f64> = (0..resolution.n_theta)
        .map(|i| std::f64::consts::FRAC_PI_2 * i as f64 / (resolution.n_theta - 1).max(1) as f64)
        .collect();
    let phis: Vec<f64> = (0..resolution.n_phi)
        .map(|i| std::f64::consts::TAU * i as f64 / resolution.n_phi as f64)
        .collect();

    // Evaluate row by row (fixed theta), Pareto-filter locally, then merge.
    let rows: Vec<Vec<REPoint>> = thetas
        .par_iter()
        .map(|&theta| {
            let mut pts = Vec::new();
            for &phi in &phis {
                for &pw in &power_levels {
                    if let Ok((rate, dc)) = evaluate_grid_beam(scenario, theta, phi, pw) {
                        pts.push(REPoint {
                            rate,
                            energy: dc,
                            param: theta,
                            strategy: Strategy::Beamformer {
                                theta,
                                phi,
                                power: pw,
                            },
                        });
                    }
                }
            }
            pareto_filter(pts)
        })
        .collect();
    let all: Vec<REPoint> = rows.into_iter().flatten().collect();
    let boundary = pareto_filter(all);
    let model = if any_sigmoid {
        ModelTag::Saturation
    } else {
        ModelTag::Linear
    };
    let hull = pareto_hull(&boundary);
    Ok(RERegion {
        model,
        arch: ReceiverArch::Ideal,
        energy_units: EnergyUnits::Watts,
        boundary,
        hull,
    })
}

/// Keep only non-dominated points, sorted by rate ascending.
fn pareto_filter(mut pts: Vec<REPoint>) -> Vec<REPoint> {
    pts.sort_by(|a, b| {
        b.rate
            .partial_cmp(&a.rate)
            .unwrap()
            .then(b.energy.partial_cmp(&a.energy).unwrap())
    });
    let mut out: Vec<REPoint> = Vec::new();
    let mut best_energy = f64::NEG_INFINITY;
    for p in pts {
        if p.energy > best_energy {
            best_energy = p.energy;
            out.push(p);
        }
    }
    out.reverse();
    out
}
