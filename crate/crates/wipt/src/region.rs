//! Rate-energy (R-E) region construction.
//!
//! A region is a list of boundary points (one per sweep value of the
//! constraint parameter) plus its upper-right convex hull. Time sharing
//! makes every point on the hull achievable, so the hull is the reported
//! frontier. Energy units differ per harvester model: watts for the linear
//! and saturation models, the `z_dc` current proxy for the diode nonlinear
//! model; regions carry a units tag so mismatched overlays can be refused.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::allocate::{
    mimo_eigen_allocate, modified_waterfill_received, superposed_waveform_allocate, waterfill,
    SuperposedOptions,
};
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::harvester::{sigmoid_dc_power, DiodeNonlinearParams, SaturationParams};

/// SWIPT receiver architecture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "arch", rename_all = "snake_case")]
pub enum ReceiverArch {
    /// Decodes and harvests the very same signal. Not buildable, upper
    /// bounds the practical receivers.
    Ideal,
    /// Alternates between decode slots and harvest slots.
    TimeSwitching,
    /// Splits a fraction `rho` of the received power to the harvester.
    /// Noise splits into antenna noise (scaled by `1-rho` at the decoder)
    /// and RF-to-baseband processing noise (not scaled).
    PowerSplitting { sigma_a_sq: f64, sigma_p_sq: f64 },
}

impl ReceiverArch {
    /// Worst-case split for PS: all noise in the processing stage.
    pub fn worst_case_ps(sigma_sq: f64) -> Self {
        ReceiverArch::PowerSplitting {
            sigma_a_sq: 0.0,
            sigma_p_sq: sigma_sq,
        }
    }

    fn validate(&self, sigma_sq: f64) -> Result<()> {
        if let ReceiverArch::PowerSplitting {
            sigma_a_sq,
            sigma_p_sq,
        } = self
        {
            if *sigma_a_sq < 0.0 || *sigma_p_sq < 0.0 || sigma_a_sq + sigma_p_sq <= 0.0 {
                return Err(Error::Domain(
                    "PS noise components must be nonnegative and not both zero".into(),
                ));
            }
            if (sigma_a_sq + sigma_p_sq - sigma_sq).abs() > 1e-9 * sigma_sq.max(1.0) {
                return Err(Error::Domain(format!(
                    "PS noise split {sigma_a_sq}+{sigma_p_sq} does not sum to sigma^2={sigma_sq}"
                )));
            }
        }
        Ok(())
    }

    /// Effective decoder noise after splitting `1-rho` of the signal to it.
    fn ps_effective_noise(&self, rho: f64) -> f64 {
        match self {
            ReceiverArch::PowerSplitting {
                sigma_a_sq,
                sigma_p_sq,
            } => ((1.0 - rho) * sigma_a_sq + sigma_p_sq) / (1.0 - rho),
            _ => unreachable!("only called for PS"),
        }
    }
}

/// Units of the energy axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyUnits {
    Watts,
    ZdcProxy,
}

/// Harvester model the region was computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    Linear,
    DiodeNonlinear,
    Saturation,
}

/// Transmit/receive strategy attaining a boundary point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    IdealCorner,
    TimeShare { tau: f64 },
    PowerSplit { rho: f64 },
    PowerAllocation { powers: Vec<f64> },
    EigenAllocation { powers: Vec<f64> },
    PowerSplitAllocation { rho: f64, powers: Vec<f64> },
    AsymmetricGaussian { p_real: f64, p_imag: f64 },
    Flash { scale: f64 },
    Superposed { p_power: Vec<f64>, p_info: Vec<f64> },
    SuperposedPs { rho: f64, p_power: Vec<f64>, p_info: Vec<f64> },
    Beamformer { theta: f64, phi: f64, power: f64 },
}

/// One achievable (rate, energy) pair with the strategy that attains it and
/// the sweep parameter that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct REPoint {
    pub rate: f64,
    pub energy: f64,
    pub param: f64,
    pub strategy: Strategy,
}

/// Boundary sweep plus its Pareto-dominant upper-right convex hull.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RERegion {
    pub model: ModelTag,
    pub arch: ReceiverArch,
    pub energy_units: EnergyUnits,
    pub boundary: Vec<REPoint>,
    pub hull: Vec<REPoint>,
}

impl RERegion {
    fn assemble(
        model: ModelTag,
        arch: ReceiverArch,
        energy_units: EnergyUnits,
        boundary: Vec<REPoint>,
    ) -> Self {
        let hull = pareto_hull(&boundary);
        Self {
            model,
            arch,
            energy_units,
            boundary,
            hull,
        }
    }

    pub fn max_rate(&self) -> f64 {
        self.hull.last().map(|p| p.rate).unwrap_or(0.0)
    }

    pub fn max_energy(&self) -> f64 {
        self.hull.first().map(|p| p.energy).unwrap_or(0.0)
    }

    /// Best achievable energy at a given rate on the hull (time sharing
    /// between adjacent hull points). `None` beyond the maximum rate.
    pub fn energy_at_rate(&self, rate: f64) -> Option<f64> {
        if self.hull.is_empty() {
            return None;
        }
        let first = &self.hull[0];
        if rate <= first.rate {
            return Some(first.energy);
        }
        for w in self.hull.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if rate <= b.rate {
                let t = (rate - a.rate) / (b.rate - a.rate);
                return Some(a.energy + t * (b.energy - a.energy));
            }
        }
        let tol = 1e-9 * self.max_rate().abs().max(1.0);
        if rate <= self.max_rate() + tol {
            return Some(self.hull.last().unwrap().energy);
        }
        None
    }

    /// `rate,energy,param` CSV rows with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rate,energy,param\n");
        for p in &self.boundary {
            out.push_str(&format!("{:.12e},{:.12e},{:.12e}\n", p.rate, p.energy, p.param));
        }
        out
    }
}

/// Pareto-filter then build the upper concave envelope, ordered by
/// increasing rate (so energy is nonincreasing along it).
pub fn pareto_hull(points: &[REPoint]) -> Vec<REPoint> {
    let mut pts: Vec<&REPoint> = points
        .iter()
        .filter(|p| p.rate.is_finite() && p.energy.is_finite())
        .collect();
    if pts.is_empty() {
        return Vec::new();
    }
    // Sort by rate descending, energy descending; a point survives if its
    // energy strictly exceeds everything with at least its rate.
    pts.sort_by(|a, b| {
        b.rate
            .partial_cmp(&a.rate)
            .unwrap()
            .then(b.energy.partial_cmp(&a.energy).unwrap())
    });
    let mut pareto: Vec<&REPoint> = Vec::new();
    let mut best_energy = f64::NEG_INFINITY;
    for p in pts {
        if p.energy > best_energy {
            pareto.push(p);
            best_energy = p.energy;
        }
    }
    pareto.reverse(); // now rate ascending, energy descending

    // Upper concave envelope (monotone chain).
    let mut hull: Vec<&REPoint> = Vec::new();
    for p in pareto {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.rate - a.rate) * (p.energy - a.energy)
                - (b.energy - a.energy) * (p.rate - a.rate);
            // b below or on the chord a-p: not a hull vertex.
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.into_iter().cloned().collect()
}

fn rho_grid(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Log-spaced sweep of a constraint parameter over `(0, max]`, with the
/// unconstrained endpoint prepended.
fn constraint_grid(max: f64, n_points: usize) -> Vec<f64> {
    let n = n_points.max(2);
    let mut grid = vec![0.0];
    let lo = max * 1e-3;
    for i in 0..n - 1 {
        let t = i as f64 / (n - 2).max(1) as f64;
        grid.push(lo * (max / lo).powf(t));
    }
    grid
}

/// Single-subband SISO region under the linear harvester model. The ideal
/// receiver has no tradeoff (a rectangle); TS traces its diagonal; PS traces
/// the concave curve between the same corners.
pub fn region_linear_single(
    gain_sq: f64,
    power: f64,
    sigma_sq: f64,
    k2: f64,
    arch: ReceiverArch,
    n_points: usize,
) -> Result<RERegion> {
    if !(power > 0.0 && sigma_sq > 0.0 && gain_sq >= 0.0 && k2 > 0.0) {
        return Err(Error::Domain(
            "power, noise, and k2 must be positive; gain nonnegative".into(),
        ));
    }
    arch.validate(sigma_sq)?;
    let r_star = (1.0 + gain_sq * power / sigma_sq).log2();
    let e_star = k2 * gain_sq * power;
    let boundary = match arch {
        ReceiverArch::Ideal => vec![REPoint {
            rate: r_star,
            energy: e_star,
            param: 0.0,
            strategy: Strategy::IdealCorner,
        }],
        ReceiverArch::TimeSwitching => rho_grid(n_points)
            .into_iter()
            .map(|tau| REPoint {
                rate: (1.0 - tau) * r_star,
                energy: tau * e_star,
                param: tau,
                strategy: Strategy::TimeShare { tau },
            })
            .collect(),
        ReceiverArch::PowerSplitting {
            sigma_a_sq,
            sigma_p_sq,
        } => rho_grid(n_points)
            .into_iter()
            .map(|rho| {
                let denom = (1.0 - rho) * sigma_a_sq + sigma_p_sq;
                let rate = if denom > 0.0 {
                    (1.0 + (1.0 - rho) * gain_sq * power / denom).log2()
                } else {
                    0.0
                };
                REPoint {
                    rate,
                    energy: rho * e_star,
                    param: rho,
                    strategy: Strategy::PowerSplit { rho },
                }
            })
            .collect(),
    };
    Ok(RERegion::assemble(
        ModelTag::Linear,
        arch,
        EnergyUnits::Watts,
        boundary,
    ))
}

fn strategy_powers(powers: Vec<f64>, eigen: bool) -> Strategy {
    if eigen {
        Strategy::EigenAllocation { powers }
    } else {
        Strategy::PowerAllocation { powers }
    }
}

/// Shared sweep machinery for the linear model over a set of parallel
/// subchannels (frequency subbands or MIMO eigenmodes).
fn linear_region_over_gains(
    gains: &[f64],
    power: f64,
    sigma_sq: f64,
    k2: f64,
    arch: ReceiverArch,
    n_points: usize,
    eigen: bool,
) -> Result<RERegion> {
    arch.validate(sigma_sq)?;
    let g_max = gains.iter().cloned().fold(0.0, f64::max);
    let v_max = power * g_max;
    let e_max = k2 * v_max;
    let wf = waterfill(gains, sigma_sq, power)?;
    let r_wf = wf.rate(gains, sigma_sq);

    let boundary = match arch {
        ReceiverArch::Ideal => {
            let mut pts = Vec::with_capacity(n_points);
            for e in constraint_grid(e_max, n_points) {
                let alloc = modified_waterfill_received(gains, sigma_sq, power, e / k2)?;
                pts.push(REPoint {
                    rate: alloc.rate(gains, sigma_sq),
                    energy: k2 * alloc.received_power(gains),
                    param: e,
                    strategy: strategy_powers(alloc.powers, eigen),
                });
            }
            pts
        }
        ReceiverArch::TimeSwitching => {
            // Time sharing between the water-filling slot and an
            // energy-only slot on the strongest subchannel; nothing is
            // harvested during the decode slot.
            rho_grid(n_points)
                .into_iter()
                .map(|tau| REPoint {
                    rate: (1.0 - tau) * r_wf,
                    energy: tau * e_max,
                    param: tau,
                    strategy: Strategy::TimeShare { tau },
                })
                .collect()
        }
        ReceiverArch::PowerSplitting { .. } => {
            let n_rho = n_points.clamp(9, 33);
            let n_e = (n_points / 2).max(9);
            let mut pts = Vec::new();
            for rho in rho_grid(n_rho) {
                if rho >= 1.0 {
                    pts.push(REPoint {
                        rate: 0.0,
                        energy: k2 * v_max,
                        param: rho,
                        strategy: Strategy::PowerSplit { rho },
                    });
                    continue;
                }
                let noise_eff = arch.ps_effective_noise(rho);
                for v in constraint_grid(v_max, n_e) {
                    let alloc = modified_waterfill_received(gains, noise_eff, power, v)?;
                    pts.push(REPoint {
                        rate: alloc.rate(gains, noise_eff),
                        energy: rho * k2 * alloc.received_power(gains),
                        param: rho,
                        strategy: Strategy::PowerSplitAllocation {
                            rho,
                            powers: alloc.powers,
                        },
                    });
                }
            }
            pts
        }
    };
    Ok(RERegion::assemble(
        ModelTag::Linear,
        arch,
        EnergyUnits::Watts,
        boundary,
    ))
}

/// Multi-subband SISO region under the linear model: every ideal-receiver
/// boundary point is a modified water-filling allocation.
pub fn region_linear_multisubband(
    channel: &ChannelRealization,
    power: f64,
    sigma_sq: f64,
    k2: f64,
    arch: ReceiverArch,
    n_points: usize,
) -> Result<RERegion> {
    let gains = channel.siso_gains_sq()?;
    linear_region_over_gains(&gains, power, sigma_sq, k2, arch, n_points, false)
}

/// Single-subband MIMO region under the linear model: eigenmode
/// transmission with modified water-filling across the eigenvalues of
/// `H^H H`.
pub fn region_mimo_linear(
    h: &DMatrix<Complex64>,
    power: f64,
    sigma_sq: f64,
    k2: f64,
    arch: ReceiverArch,
    n_points: usize,
) -> Result<RERegion> {
    // One probe solve fixes the eigen gains; sweeps reuse them.
    let probe = mimo_eigen_allocate(h, sigma_sq, power, 0.0, k2)?;
    linear_region_over_gains(&probe.eigen_gains, power, sigma_sq, k2, arch, n_points, true)
}

/// Single-subband region under the diode nonlinear model: the asymmetric
/// Gaussian family trades rate for fourth-moment energy, and time sharing
/// with flash signaling extends the region upward at low rate.
pub fn region_diode_nonlinear_single(
    gain_sq: f64,
    power: f64,
    sigma_sq: f64,
    harvester: &DiodeNonlinearParams,
    flash_l_max: f64,
    n_points: usize,
) -> Result<RERegion> {
    if !(power > 0.0 && sigma_sq > 0.0 && gain_sq >= 0.0) {
        return Err(Error::Domain("power and noise must be positive".into()));
    }
    if flash_l_max < 1.0 {
        return Err(Error::Domain(format!(
            "flash scale ceiling must be >= 1, got {flash_l_max}"
        )));
    }
    let n = n_points.max(2);
    let g = gain_sq;
    let mut boundary = Vec::new();

    // Asymmetric Gaussian sweep: p_real from P/2 (CSCG) to P (real
    // Gaussian). Rate uses the two-real-subchannel form with per-dimension
    // noise sigma^2/2.
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let p_real = power / 2.0 + t * power / 2.0;
        let p_imag = power - p_real;
        let rate = 0.5 * (1.0 + 2.0 * g * p_real / sigma_sq).log2()
            + 0.5 * (1.0 + 2.0 * g * p_imag / sigma_sq).log2();
        let m4 = 3.0 * p_real * p_real + 2.0 * p_real * p_imag + 3.0 * p_imag * p_imag;
        let energy = harvester.k2 * g * power + harvester.k4 * 1.5 * g * g * m4;
        boundary.push(REPoint {
            rate,
            energy,
            param: p_real,
            strategy: Strategy::AsymmetricGaussian { p_real, p_imag },
        });
    }

    // Flash family: rate credited as zero (points serve as time-sharing
    // anchors), energy grows as l^2.
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let l = 1.0 + t * (flash_l_max - 1.0);
        let energy = harvester.k2 * g * power + harvester.k4 * 1.5 * g * g * l * l * power * power;
        boundary.push(REPoint {
            rate: 0.0,
            energy,
            param: l,
            strategy: Strategy::Flash { scale: l },
        });
    }

    Ok(RERegion::assemble(
        ModelTag::DiodeNonlinear,
        ReceiverArch::Ideal,
        EnergyUnits::ZdcProxy,
        boundary,
    ))
}

/// CSCG-only comparison region under the diode nonlinear model: received
/// power `v` is swept with the modified water-filling and mapped through
/// `z = k2 v + 3 k4 v^2` (the CSCG RF fourth moment is `3 v^2`).
pub fn region_cscg_only_nonlinear(
    channel: &ChannelRealization,
    power: f64,
    sigma_sq: f64,
    harvester: &DiodeNonlinearParams,
    n_points: usize,
) -> Result<RERegion> {
    let gains = channel.siso_gains_sq()?;
    let g_max = gains.iter().cloned().fold(0.0, f64::max);
    let v_max = power * g_max;
    let mut boundary = Vec::new();
    for v in constraint_grid(v_max, n_points) {
        let alloc = modified_waterfill_received(&gains, sigma_sq, power, v)?;
        let received = alloc.received_power(&gains);
        boundary.push(REPoint {
            rate: alloc.rate(&gains, sigma_sq),
            energy: harvester.k2 * received + harvester.k4 * 3.0 * received * received,
            param: v,
            strategy: Strategy::PowerAllocation {
                powers: alloc.powers,
            },
        });
    }
    Ok(RERegion::assemble(
        ModelTag::DiodeNonlinear,
        ReceiverArch::Ideal,
        EnergyUnits::ZdcProxy,
        boundary,
    ))
}

/// Multi-subband region under the diode nonlinear model via superposed
/// multisine + CSCG waveforms, sweeping the rate floor.
///
/// PS scales the harvester branch by `rho` in the second-order term and
/// `rho^2` in the fourth-order term (the voltage splits by sqrt(rho)); TS
/// time-shares the rate-only and energy-only extremes.
pub fn region_diode_nonlinear_multisubband(
    channel: &ChannelRealization,
    power: f64,
    sigma_sq: f64,
    harvester: &DiodeNonlinearParams,
    arch: ReceiverArch,
    n_points: usize,
    opts: &SuperposedOptions,
) -> Result<RERegion> {
    arch.validate(sigma_sq)?;
    let gains = channel.siso_gains_sq()?;
    let r_max = waterfill(&gains, sigma_sq, power)?.rate(&gains, sigma_sq);

    let solve =
        |rate_floor: f64, noise: f64, k2: f64, k4: f64| -> Result<crate::allocate::SuperposedAllocation> {
            let h = DiodeNonlinearParams::new(k2, k4)?;
            superposed_waveform_allocate(channel, power, rate_floor, &h, noise, opts)
        };

    let boundary = match arch {
        ReceiverArch::Ideal => {
            let mut pts = Vec::new();
            for r in constraint_grid(r_max, n_points) {
                let sol = solve(r, sigma_sq, harvester.k2, harvester.k4)?;
                pts.push(REPoint {
                    rate: sol.rate,
                    energy: sol.z_dc,
                    param: r,
                    strategy: Strategy::Superposed {
                        p_power: sol.waveform.subbands.iter().map(|s| s.p_power).collect(),
                        p_info: sol.waveform.subbands.iter().map(|s| s.p_info).collect(),
                    },
                });
            }
            pts
        }
        ReceiverArch::TimeSwitching => {
            let z_ms = solve(0.0, sigma_sq, harvester.k2, harvester.k4)?.z_dc;
            rho_grid(n_points)
                .into_iter()
                .map(|tau| REPoint {
                    rate: (1.0 - tau) * r_max,
                    energy: tau * z_ms,
                    param: tau,
                    strategy: Strategy::TimeShare { tau },
                })
                .collect()
        }
        ReceiverArch::PowerSplitting { .. } => {
            let n_rho = n_points.clamp(5, 17);
            let n_r = (n_points / 2).max(7);
            let mut pts = Vec::new();
            for rho in rho_grid(n_rho) {
                if rho <= 0.0 {
                    continue; // nothing harvested
                }
                if rho >= 1.0 {
                    let sol = solve(0.0, sigma_sq, harvester.k2, harvester.k4)?;
                    pts.push(REPoint {
                        rate: 0.0,
                        energy: sol.z_dc,
                        param: rho,
                        strategy: Strategy::SuperposedPs {
                            rho,
                            p_power: sol.waveform.subbands.iter().map(|s| s.p_power).collect(),
                            p_info: sol.waveform.subbands.iter().map(|s| s.p_info).collect(),
                        },
                    });
                    continue;
                }
                let noise_eff = arch.ps_effective_noise(rho);
                let r_max_rho = waterfill(&gains, noise_eff, power)?.rate(&gains, noise_eff);
                for r in constraint_grid(r_max_rho, n_r) {
                    let sol = solve(
                        r,
                        noise_eff,
                        harvester.k2 * rho,
                        harvester.k4 * rho * rho,
                    )?;
                    pts.push(REPoint {
                        rate: sol.rate,
                        energy: sol.z_dc,
                        param: rho,
                        strategy: Strategy::SuperposedPs {
                            rho,
                            p_power: sol.waveform.subbands.iter().map(|s| s.p_power).collect(),
                            p_info: sol.waveform.subbands.iter().map(|s| s.p_info).collect(),
                        },
                    });
                }
            }
            pts
        }
    };
    Ok(RERegion::assemble(
        ModelTag::DiodeNonlinear,
        arch,
        EnergyUnits::ZdcProxy,
        boundary,
    ))
}

/// Region under the saturation model: sweep the DC target through the
/// inverted sigmoid; the energy axis is DC watts and flattens at `p_sat`.
pub fn region_saturation(
    channel: &ChannelRealization,
    power: f64,
    sigma_sq: f64,
    params: &SaturationParams,
    arch: ReceiverArch,
    n_points: usize,
) -> Result<RERegion> {
    arch.validate(sigma_sq)?;
    let gains = channel.siso_gains_sq()?;
    let g_max = gains.iter().cloned().fold(0.0, f64::max);
    let v_max = power * g_max;
    let e_attain = sigmoid_dc_power(v_max, params)?;
    let wf = waterfill(&gains, sigma_sq, power)?;
    let r_wf = wf.rate(&gains, sigma_sq);

    let boundary = match arch {
        ReceiverArch::Ideal => {
            let mut pts = Vec::new();
            for v in constraint_grid(v_max, n_points) {
                let alloc = modified_waterfill_received(&gains, sigma_sq, power, v)?;
                let received = alloc.received_power(&gains);
                pts.push(REPoint {
                    rate: alloc.rate(&gains, sigma_sq),
                    energy: sigmoid_dc_power(received, params)?,
                    param: v,
                    strategy: Strategy::PowerAllocation {
                        powers: alloc.powers,
                    },
                });
            }
            pts
        }
        ReceiverArch::TimeSwitching => rho_grid(n_points)
            .into_iter()
            .map(|tau| REPoint {
                rate: (1.0 - tau) * r_wf,
                energy: tau * e_attain,
                param: tau,
                strategy: Strategy::TimeShare { tau },
            })
            .collect(),
        ReceiverArch::PowerSplitting { .. } => {
            let n_rho = n_points.clamp(9, 33);
            let n_e = (n_points / 2).max(9);
            let mut pts = Vec::new();
            for rho in rho_grid(n_rho) {
                if rho >= 1.0 {
                    pts.push(REPoint {
                        rate: 0.0,
                        energy: e_attain,
                        param: rho,
                        strategy: Strategy::PowerSplit { rho },
                    });
                    continue;
                }
                let noise_eff = arch.ps_effective_noise(rho);
                for v in constraint_grid(v_max, n_e) {
                    let alloc = modified_waterfill_received(&gains, noise_eff, power, v)?;
                    let received = alloc.received_power(&gains);
                    pts.push(REPoint {
                        rate: alloc.rate(&gains, noise_eff),
                        energy: sigmoid_dc_power(rho * received, params)?,
                        param: rho,
                        strategy: Strategy::PowerSplitAllocation {
                            rho,
                            powers: alloc.powers,
                        },
                    });
                }
            }
            pts
        }
    };
    Ok(RERegion::assemble(
        ModelTag::Saturation,
        arch,
        EnergyUnits::Watts,
        boundary,
    ))
}

/// Rate and true sigmoid DC of a fixed per-subband allocation. Used to
/// evaluate allocations designed under one model against another
/// (resource-allocation mismatch studies).
pub fn evaluate_allocation_under_sigmoid(
    gains: &[f64],
    powers: &[f64],
    sigma_sq: f64,
    params: &SaturationParams,
) -> Result<(f64, f64)> {
    if gains.len() != powers.len() {
        return Err(Error::DimensionMismatch(
            "gains and powers must have equal length".into(),
        ));
    }
    let rate: f64 = powers
        .iter()
        .zip(gains)
        .map(|(p, g)| (1.0 + g * p / sigma_sq).log2())
        .sum();
    let received: f64 = powers.iter().zip(gains).map(|(p, g)| p * g).sum();
    Ok((rate, sigmoid_dc_power(received, params)?))
}
