//! Power allocation and single-user beamforming solvers.
//!
//! - Classical water-filling for rate maximization.
//! - Modified water-filling with an added received-energy constraint: the
//!   per-subband water level `1/(lambda - beta*|h_n|^2)` rises with the
//!   channel gain, so allocations become greedier as the energy target grows.
//! - MIMO eigenmode allocation (the same solver on the eigenvalues of
//!   `H^H H`).
//! - Saturation-constrained allocation: invert the sigmoid to a received
//!   power target, then reuse the modified water-filling machinery.
//! - Projected-gradient allocation of a superposed multisine-plus-CSCG
//!   waveform under a rate floor (achievable inner bound, not claimed
//!   optimal).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harvester::{invert_sigmoid, DiodeNonlinearParams, SaturationParams};
use crate::signal::{superposed_zdc, superposed_zdc_grad, SuperposedSubband, SuperposedWaveform, ToneBasis};

/// Absolute tolerance on constraint residuals.
const RESIDUAL_TOL: f64 = 1e-10;
/// Iteration cap for the dual bisections.
const BISECT_CAP: usize = 200;

/// Per-subband (or per-eigenmode) power allocation with its dual variables
/// and constraint residuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    /// Dual of the sum-power constraint.
    pub lambda: f64,
    /// Dual of the received-energy constraint (zero when inactive).
    pub beta: f64,
    /// `|sum powers - budget|`.
    pub budget_residual: f64,
    /// Complementary slackness `beta * (received - target)`.
    pub energy_slack: f64,
    pub iterations: usize,
}

impl PowerAllocation {
    /// `sum_n g_n p_n` for the gains this allocation was solved against.
    pub fn received_power(&self, gains: &[f64]) -> f64 {
        self.powers.iter().zip(gains).map(|(p, g)| p * g).sum()
    }

    /// `sum_n log2(1 + g_n p_n / sigma^2)`.
    pub fn rate(&self, gains: &[f64], noise: f64) -> f64 {
        self.powers
            .iter()
            .zip(gains)
            .map(|(p, g)| (1.0 + g * p / noise).log2())
            .sum()
    }
}

fn check_gains(gains: &[f64], noise: f64, budget: f64) -> Result<()> {
    if gains.is_empty() {
        return Err(Error::Domain("need at least one subband".into()));
    }
    if gains.iter().any(|&g| g < 0.0 || !g.is_finite()) {
        return Err(Error::Domain("channel gains must be finite and nonnegative".into()));
    }
    if !gains.iter().any(|&g| g > 0.0) {
        return Err(Error::Domain("all channel gains are zero".into()));
    }
    if noise.is_nan() || noise <= 0.0 {
        return Err(Error::Domain(format!("noise power must be positive, got {noise}")));
    }
    if budget.is_nan() || budget <= 0.0 {
        return Err(Error::Domain(format!("power budget must be positive, got {budget}")));
    }
    Ok(())
}

/// Powers for a given pair of duals:
/// `p_n = max(1/(lambda - beta g_n) - sigma^2/g_n, 0)`.
fn powers_for_duals(gains: &[f64], noise: f64, lambda: f64, beta: f64) -> Vec<f64> {
    gains
        .iter()
        .map(|&g| {
            if g <= 0.0 {
                return 0.0;
            }
            let denom = lambda - beta * g;
            if denom <= 0.0 {
                // Water level diverged for this subband; callers keep lambda
                // above beta * max(g), so this only guards roundoff.
                return f64::INFINITY;
            }
            (1.0 / denom - noise / g).max(0.0)
        })
        .collect()
}

/// Find `lambda` spending exactly the budget for a fixed `beta`. The spend
/// is continuous and strictly decreasing in `lambda` on the bracket.
fn solve_lambda(gains: &[f64], noise: f64, budget: f64, beta: f64) -> Result<(f64, usize)> {
    let g_max = gains.iter().cloned().fold(0.0, f64::max);
    let mut lo = beta * g_max;
    // Upper end: all subbands shut off.
    let mut hi = gains
        .iter()
        .filter(|&&g| g > 0.0)
        .map(|&g| g / noise + beta * g)
        .fold(0.0, f64::max)
        .max(lo * (1.0 + 1e-12) + 1e-300);
    // Nudge the lower end until the spend is finite.
    let mut lo_eps = (hi - lo) * 1e-15;
    for _ in 0..200 {
        let spend: f64 = powers_for_duals(gains, noise, lo + lo_eps, beta).iter().sum();
        if spend.is_finite() && spend > budget {
            break;
        }
        if spend.is_finite() && spend <= budget {
            // Even the near-singular water level underspends: lambda sits in
            // [lo, lo + lo_eps); return the finite end.
            return Ok((lo + lo_eps, 0));
        }
        lo_eps *= 8.0;
    }
    lo += lo_eps;

    let mut iters = 0;
    for _ in 0..BISECT_CAP {
        iters += 1;
        let mid = 0.5 * (lo + hi);
        let spend: f64 = powers_for_duals(gains, noise, mid, beta).iter().sum();
        if (spend - budget).abs() <= RESIDUAL_TOL * budget {
            return Ok((mid, iters));
        }
        if spend > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Bisection on a monotone function: the midpoint is still the best
    // bracket estimate, but the residual did not reach tolerance.
    let mid = 0.5 * (lo + hi);
    let spend: f64 = powers_for_duals(gains, noise, mid, beta).iter().sum();
    if (spend - budget).abs() <= 1e-6 * budget {
        Ok((mid, iters))
    } else {
        Err(Error::Convergence {
            reason: format!("lambda bisection stalled at spend {spend} for budget {budget}"),
            iterations: iters,
            best: None,
        })
    }
}

/// Classical water-filling: maximize `sum log2(1 + g_n p_n / sigma^2)`
/// subject to `sum p_n <= P`.
pub fn waterfill(gains: &[f64], noise: f64, budget: f64) -> Result<PowerAllocation> {
    check_gains(gains, noise, budget)?;
    let (lambda, iterations) = solve_lambda(gains, noise, budget, 0.0)?;
    let powers = powers_for_duals(gains, noise, lambda, 0.0);
    let spend: f64 = powers.iter().sum();
    Ok(PowerAllocation {
        powers,
        lambda,
        beta: 0.0,
        budget_residual: (spend - budget).abs(),
        energy_slack: 0.0,
        iterations,
    })
}

/// All power on the strongest subband(s); ties split equally so the result
/// is deterministic.
fn strongest_subband_allocation(gains: &[f64], budget: f64) -> Vec<f64> {
    let g_max = gains.iter().cloned().fold(0.0, f64::max);
    let ties: Vec<usize> = gains
        .iter()
        .enumerate()
        .filter(|(_, &g)| g >= g_max * (1.0 - 1e-12))
        .map(|(i, _)| i)
        .collect();
    let mut powers = vec![0.0; gains.len()];
    for &i in &ties {
        powers[i] = budget / ties.len() as f64;
    }
    powers
}

/// Modified water-filling against a received-power target
/// `sum g_n p_n >= target`.
///
/// Nested bisection: the outer loop raises the energy dual `beta` until the
/// received power meets the target, the inner loop picks `lambda` to spend
/// the budget. Received power is nondecreasing in `beta`, so both loops are
/// monotone.
pub fn modified_waterfill_received(
    gains: &[f64],
    noise: f64,
    budget: f64,
    target_received: f64,
) -> Result<PowerAllocation> {
    check_gains(gains, noise, budget)?;
    if target_received < 0.0 {
        return Err(Error::Domain("received-power target must be nonnegative".into()));
    }
    let g_max = gains.iter().cloned().fold(0.0, f64::max);
    let max_received = budget * g_max;
    if target_received > max_received * (1.0 + 1e-9) {
        return Err(Error::Infeasible {
            reason: format!(
                "received-power target {target_received} exceeds the single-subband maximum"
            ),
            max_attainable: Some(max_received),
        });
    }

    // Unconstrained water-filling already meets the target?
    let wf = waterfill(gains, noise, budget)?;
    if wf.received_power(gains) >= target_received - RESIDUAL_TOL * max_received {
        return Ok(wf);
    }

    // Target at the very edge of feasibility: the dual diverges, return the
    // boundary allocation directly.
    if target_received >= max_received * (1.0 - 1e-9) {
        let powers = strongest_subband_allocation(gains, budget);
        let spend: f64 = powers.iter().sum();
        let received: f64 = powers.iter().zip(gains).map(|(p, g)| p * g).sum();
        return Ok(PowerAllocation {
            powers,
            lambda: f64::NAN,
            beta: f64::INFINITY,
            budget_residual: (spend - budget).abs(),
            energy_slack: (received - target_received).abs(),
            iterations: 0,
        });
    }

    // Bracket beta: received(beta) grows from the water-filling value toward
    // the single-subband maximum.
    let received_at = |beta: f64| -> Result<(f64, f64)> {
        let (lambda, _) = solve_lambda(gains, noise, budget, beta)?;
        let powers = powers_for_duals(gains, noise, lambda, beta);
        Ok((
            powers.iter().zip(gains).map(|(p, g)| p * g).sum(),
            lambda,
        ))
    };
    let mut beta_lo = 0.0;
    let mut beta_hi = 1.0 / g_max.max(1e-300);
    let mut iters = 0;
    loop {
        iters += 1;
        let (received, _) = received_at(beta_hi)?;
        if received >= target_received {
            break;
        }
        beta_lo = beta_hi;
        beta_hi *= 2.0;
        if iters > BISECT_CAP {
            return Err(Error::Convergence {
                reason: "energy dual bracket search exceeded iteration cap".into(),
                iterations: iters,
                best: None,
            });
        }
    }
    let scale = max_received;
    let mut result = None;
    for _ in 0..BISECT_CAP {
        iters += 1;
        let beta = 0.5 * (beta_lo + beta_hi);
        let (received, lambda) = received_at(beta)?;
        if (received - target_received).abs() <= RESIDUAL_TOL * scale {
            result = Some((beta, lambda));
            break;
        }
        if received < target_received {
            beta_lo = beta;
        } else {
            beta_hi = beta;
        }
    }
    let (beta, lambda) = match result {
        Some(r) => r,
        None => {
            // Fall back to the upper end of the bracket, which meets the
            // target by construction.
            let (_, lambda) = received_at(beta_hi)?;
            (beta_hi, lambda)
        }
    };
    let powers = powers_for_duals(gains, noise, lambda, beta);
    let spend: f64 = powers.iter().sum();
    let received: f64 = powers.iter().zip(gains).map(|(p, g)| p * g).sum();
    Ok(PowerAllocation {
        powers,
        lambda,
        beta,
        budget_residual: (spend - budget).abs(),
        energy_slack: beta * (received - target_received).abs(),
        iterations: iters,
    })
}

/// Modified water-filling with the energy target expressed through the
/// linear harvester: `k2 * sum g_n p_n >= e_target`.
pub fn modified_waterfill(
    gains: &[f64],
    noise: f64,
    budget: f64,
    e_target: f64,
    k2: f64,
) -> Result<PowerAllocation> {
    if k2.is_nan() || k2 <= 0.0 {
        return Err(Error::Domain(format!("k2 must be positive, got {k2}")));
    }
    if e_target < 0.0 {
        return Err(Error::Domain("energy target must be nonnegative".into()));
    }
    modified_waterfill_received(gains, noise, budget, e_target / k2).map_err(|e| match e {
        Error::Infeasible { reason, max_attainable } => Error::Infeasible {
            reason,
            max_attainable: max_attainable.map(|m| m * k2),
        },
        other => other,
    })
}

/// Eigenmode transmit covariance for a single-subband MIMO channel.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceDesign {
    /// Unitary eigenbasis of `H^H H` (columns), strongest mode first.
    pub eigen_basis: DMatrix<Complex64>,
    /// Eigenvalues of `H^H H`, strongest first.
    pub eigen_gains: Vec<f64>,
    /// Powers on the eigenmodes with duals and residuals.
    pub allocation: PowerAllocation,
    /// `sum log2(1 + gamma_i p_i / sigma^2)`.
    pub rate: f64,
}

impl CovarianceDesign {
    /// Reconstruct `Q = V diag(p) V^H`.
    pub fn covariance(&self) -> DMatrix<Complex64> {
        let n = self.eigen_basis.nrows();
        let mut q = DMatrix::<Complex64>::zeros(n, n);
        for (i, &p) in self.allocation.powers.iter().enumerate() {
            let v = self.eigen_basis.column(i);
            q += (v * v.adjoint()).map(|z| z * p);
        }
        q
    }

    /// `k2 * Tr(H Q H^H)` evaluated through the eigen gains.
    pub fn received_power(&self) -> f64 {
        self.allocation.received_power(&self.eigen_gains)
    }
}

/// Rate-optimal covariance under a transmit budget and a received-energy
/// floor `k2 * Tr(H Q H^H) >= e_target`: eigendecompose `H^H H` and run the
/// modified water-filling over the eigenmodes.
pub fn mimo_eigen_allocate(
    h: &DMatrix<Complex64>,
    noise: f64,
    budget: f64,
    e_target: f64,
    k2: f64,
) -> Result<CovarianceDesign> {
    if h.iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(Error::Domain("channel matrix is zero".into()));
    }
    let hh = h.adjoint() * h;
    let eig = nalgebra::SymmetricEigen::new(hh);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let eigen_gains: Vec<f64> = order
        .iter()
        .map(|&i| eig.eigenvalues[i].max(0.0))
        .collect();
    let mut eigen_basis = DMatrix::<Complex64>::zeros(h.ncols(), h.ncols());
    for (col, &i) in order.iter().enumerate() {
        eigen_basis.set_column(col, &eig.eigenvectors.column(i));
    }
    let allocation = modified_waterfill(&eigen_gains, noise, budget, e_target, k2)?;
    let rate = allocation.rate(&eigen_gains, noise);
    Ok(CovarianceDesign {
        eigen_basis,
        eigen_gains,
        allocation,
        rate,
    })
}

/// Rate-optimal allocation under a saturation-model DC target: invert the
/// sigmoid into a received-power requirement (the received-power constraint
/// is tight at the optimum), then solve the modified water-filling.
pub fn saturation_allocate(
    gains: &[f64],
    noise: f64,
    budget: f64,
    e_target: f64,
    params: &SaturationParams,
) -> Result<PowerAllocation> {
    check_gains(gains, noise, budget)?;
    let required_received = invert_sigmoid(e_target, params)?;
    let g_max = gains.iter().cloned().fold(0.0, f64::max);
    let max_received = budget * g_max;
    if required_received > max_received * (1.0 + 1e-9) {
        let max_dc = crate::harvester::sigmoid_dc_power(max_received, params)?;
        return Err(Error::Infeasible {
            reason: format!(
                "DC target {e_target} needs received power {required_received}, budget allows {max_received}"
            ),
            max_attainable: Some(max_dc),
        });
    }
    modified_waterfill_received(gains, noise, budget, required_received)
}

/// Options for the superposed-waveform solver.
#[derive(Debug, Clone, Copy)]
pub struct SuperposedOptions {
    /// Projected-gradient iteration cap per start.
    pub max_iterations: usize,
    /// Grid resolution of the outer information-power search.
    pub n_info_grid: usize,
    /// Samples per waveform period for the multisine quadrature
    /// (0 = grid default).
    pub samples_per_period: usize,
}

impl Default for SuperposedOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            n_info_grid: 25,
            samples_per_period: 0,
        }
    }
}

/// Superposed-waveform allocation result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperposedAllocation {
    pub waveform: SuperposedWaveform,
    pub rate: f64,
    pub z_dc: f64,
    pub iterations: usize,
}

/// Euclidean projection onto the simplex `{x >= 0, sum x = total}`.
fn project_simplex(x: &[f64], total: f64) -> Vec<f64> {
    debug_assert!(total >= 0.0);
    if total == 0.0 {
        return vec![0.0; x.len()];
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - total) / (i + 1) as f64;
        if i + 1 == sorted.len() || sorted[i + 1] <= t {
            theta = t;
            break;
        }
    }
    x.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Smallest total information power whose water-filling rate reaches
/// `r_target`; the water-filling structure is rate-optimal, hence also
/// power-minimal at a fixed rate.
fn min_info_power_for_rate(gains: &[f64], noise: f64, budget: f64, r_target: f64) -> Result<f64> {
    if r_target <= 0.0 {
        return Ok(0.0);
    }
    let rate_at = |p: f64| -> Result<f64> {
        Ok(waterfill(gains, noise, p)?.rate(gains, noise))
    };
    let r_full = rate_at(budget)?;
    if r_target > r_full + 1e-9 {
        return Err(Error::Infeasible {
            reason: format!("rate floor {r_target} exceeds full-power water-filling rate"),
            max_attainable: Some(r_full),
        });
    }
    if r_target >= r_full {
        return Ok(budget);
    }
    let mut lo = 0.0;
    let mut hi = budget;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == 0.0 {
            break;
        }
        if rate_at(mid)? < r_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-14 * budget {
            break;
        }
    }
    Ok(hi)
}

/// Largest received power `sum g_n p_n` reachable while keeping the
/// water-filling rate at or above `r_target` with the full budget as
/// information power. Received power is nonincreasing in the rate
/// requirement, so a bisection on the received target suffices.
pub fn max_received_for_rate(
    gains: &[f64],
    noise: f64,
    budget: f64,
    r_target: f64,
) -> Result<PowerAllocation> {
    check_gains(gains, noise, budget)?;
    let g_max = gains.iter().cloned().fold(0.0, f64::max);
    let mut lo = waterfill(gains, noise, budget)?.received_power(gains);
    let mut hi = budget * g_max;
    let rate_at = |v: f64| -> Result<f64> {
        Ok(modified_waterfill_received(gains, noise, budget, v)?.rate(gains, noise))
    };
    if rate_at(hi)? >= r_target {
        return modified_waterfill_received(gains, noise, budget, hi);
    }
    if rate_at(lo)? < r_target - 1e-9 {
        return Err(Error::Infeasible {
            reason: format!("rate floor {r_target} exceeds the water-filling rate"),
            max_attainable: Some(rate_at(lo)?),
        });
    }
    for _ in 0..BISECT_CAP {
        let mid = 0.5 * (lo + hi);
        if rate_at(mid)? >= r_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * (budget * g_max).max(1.0) {
            break;
        }
    }
    modified_waterfill_received(gains, noise, budget, lo)
}

/// Maximize `z_dc` of a superposed multisine + CSCG waveform subject to a
/// sum-power budget and a rate floor.
///
/// Power-symbol phases are matched to the channel in closed form
/// (`phase_n = -arg h_n`). The information powers follow the water-filling
/// structure for a swept total information budget; the multisine powers are
/// found by projected gradient ascent over the remaining-budget simplex with
/// Armijo backtracking (0.5 halving, 0.1 slope fraction), multi-started from
/// the all-multisine, all-information, 50/50, and uniform profiles. Each
/// accepted step improves `z_dc`, so the result is a certified achievable
/// point; global optimality is not claimed.
pub fn superposed_waveform_allocate(
    channel: &crate::channel::ChannelRealization,
    budget: f64,
    rate_floor: f64,
    harvester: &DiodeNonlinearParams,
    noise: f64,
    opts: &SuperposedOptions,
) -> Result<SuperposedAllocation> {
    let gains_c = channel.siso_gains()?;
    let gains: Vec<f64> = gains_c.iter().map(|h| h.norm_sqr()).collect();
    check_gains(&gains, noise, budget)?;
    if rate_floor < 0.0 {
        return Err(Error::Domain("rate floor must be nonnegative".into()));
    }
    let n = gains.len();
    let grid = channel.grid;
    let samples = if opts.samples_per_period == 0 {
        grid.min_samples_per_period()
    } else {
        opts.samples_per_period
    };
    let basis = ToneBasis::new(&grid, samples)?;

    let sigma_min = min_info_power_for_rate(&gains, noise, budget, rate_floor)?;

    // Candidate information budgets: the extremes plus a grid between them.
    // Information powers follow the water-filling structure for each budget.
    let mut sigmas = vec![sigma_min, budget, sigma_min + 0.5 * (budget - sigma_min)];
    for i in 0..opts.n_info_grid {
        let t = (i + 1) as f64 / (opts.n_info_grid + 1) as f64;
        sigmas.push(sigma_min + t * (budget - sigma_min));
    }
    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::with_capacity(sigmas.len() + 1);
    for &sigma in &sigmas {
        let sigma = sigma.clamp(sigma_min, budget);
        let pi = if sigma > 0.0 {
            waterfill(&gains, noise, sigma)?.powers
        } else {
            vec![0.0; n]
        };
        candidates.push((sigma, pi));
    }
    // Pure-information candidate tuned for energy instead of rate: the best
    // CSCG-only strategy at this rate floor. Including it guarantees the
    // superposed region dominates the CSCG-only region.
    candidates.push((budget, max_received_for_rate(&gains, noise, budget, rate_floor)?.powers));

    let objective = |pp: &[f64], pi: &[f64]| -> f64 {
        superposed_zdc(&gains, pp, pi, harvester, &basis)
    };

    let mut best: Option<(f64, Vec<f64>, Vec<f64>, usize)> = None;
    let mut total_iters = 0;
    for (sigma, pi) in &candidates {
        let pp_budget = budget - sigma;
        let pi = pi.clone();

        // Multisine starting profiles on the remaining budget.
        let uniform = vec![pp_budget / n as f64; n];
        let strongest = strongest_subband_allocation(&gains, pp_budget);
        let prop: Vec<f64> = {
            let w: f64 = gains.iter().map(|g| g * g).sum();
            gains.iter().map(|g| pp_budget * g * g / w).collect()
        };
        for start in [uniform, strongest, prop] {
            let mut pp = if pp_budget > 0.0 {
                project_simplex(&start, pp_budget)
            } else {
                vec![0.0; n]
            };
            let mut value = objective(&pp, &pi);
            let mut iters = 0;
            if pp_budget > 0.0 {
                for _ in 0..opts.max_iterations {
                    iters += 1;
                    let (gpp, _) = superposed_zdc_grad(&gains, &pp, &pi, harvester, &basis);
                    let gnorm = gpp.iter().map(|g| g * g).sum::<f64>().sqrt();
                    if gnorm < 1e-300 {
                        break;
                    }
                    let mut t = pp_budget / gnorm;
                    let mut moved = false;
                    for _ in 0..40 {
                        let trial: Vec<f64> =
                            pp.iter().zip(&gpp).map(|(p, g)| p + t * g).collect();
                        let cand = project_simplex(&trial, pp_budget);
                        let slope: f64 = gpp
                            .iter()
                            .zip(cand.iter().zip(&pp))
                            .map(|(g, (c, p))| g * (c - p))
                            .sum();
                        let cand_val = objective(&cand, &pi);
                        if cand_val >= value + 0.1 * slope.max(0.0) && cand_val > value {
                            let step: f64 = cand
                                .iter()
                                .zip(&pp)
                                .map(|(c, p)| (c - p) * (c - p))
                                .sum::<f64>()
                                .sqrt();
                            pp = cand;
                            value = cand_val;
                            moved = true;
                            if step <= 1e-13 * budget {
                                iters = opts.max_iterations; // converged
                            }
                            break;
                        }
                        t *= 0.5;
                    }
                    if !moved || iters >= opts.max_iterations {
                        break;
                    }
                }
            }
            total_iters += iters;
            let better = match &best {
                None => true,
                Some((bv, bpp, bpi, _)) => {
                    value > *bv + 1e-15 * bv.abs()
                        || ((value - bv).abs() <= 1e-15 * bv.abs()
                            && lex_less(&pp, &pi, bpp, bpi))
                }
            };
            if better {
                best = Some((value, pp.clone(), pi.clone(), total_iters));
            }
        }
    }

    let (z_dc, pp, pi, iterations) = best.expect("at least one start ran");
    let subbands: Vec<SuperposedSubband> = (0..n)
        .map(|i| SuperposedSubband {
            p_power: pp[i],
            phase_power: -gains_c[i].arg(),
            p_info: pi[i],
        })
        .collect();
    // Normalize roundoff so the declared budget invariant holds exactly.
    let total: f64 = subbands.iter().map(|s| s.p_power + s.p_info).sum();
    let waveform = SuperposedWaveform::new(subbands, total)?;
    let rate: f64 = pi
        .iter()
        .zip(&gains)
        .map(|(p, g)| (1.0 + g * p / noise).log2())
        .sum();
    if rate < rate_floor - 1e-6 * rate_floor.max(1.0) {
        return Err(Error::Convergence {
            reason: format!("achieved rate {rate} is below the floor {rate_floor}"),
            iterations,
            best: None,
        });
    }
    Ok(SuperposedAllocation {
        waveform,
        rate,
        z_dc,
        iterations,
    })
}

/// Deterministic tie-break for equal objectives.
fn lex_less(pp_a: &[f64], pi_a: &[f64], pp_b: &[f64], pi_b: &[f64]) -> bool {
    for (a, b) in pp_a.iter().chain(pi_a).zip(pp_b.iter().chain(pi_b)) {
        if a < b {
            return true;
        }
        if a > b {
            return false;
        }
    }
    false
}
