//! Energy-harvester (rectenna) models.
//!
//! Three behavioral models map received RF signal statistics to delivered DC
//! power (or its current proxy `z_dc`):
//!
//! - **Linear**: DC output proportional to received RF power, constant
//!   RF-to-DC efficiency. Valid deep in the diode square-law regime.
//! - **Diode nonlinear**: truncated Taylor expansion of the diode I-V curve,
//!   `z_dc = k2*E[y_rf^2] + k4*E[y_rf^4]`. The fourth moment makes the
//!   harvested power depend on the waveform and modulation, not just power.
//! - **Saturation**: logistic map from received RF power to DC power with a
//!   hard ceiling `p_sat`, capturing diode breakdown. Parameters come from
//!   curve fits against measured circuits.
//!
//! All powers are in watts. Milliwatt/dBm conversions happen only at the CLI
//! boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the linear harvester model.
///
/// `k2` is the current-per-watt coefficient used with the `z_dc` proxy;
/// `e3` is the dimensionless RF-to-DC efficiency used with the power form
/// `P_dc = e3 * P_rf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub k2: f64,
    pub e3: f64,
}

impl LinearParams {
    pub fn new(k2: f64, e3: f64) -> Result<Self> {
        if k2.is_nan() || k2 <= 0.0 {
            return Err(Error::Domain(format!("k2 must be positive, got {k2}")));
        }
        if !(0.0..=1.0).contains(&e3) {
            return Err(Error::Domain(format!("e3 must be in [0, 1], got {e3}")));
        }
        Ok(Self { k2, e3 })
    }
}

/// Parameters of the diode nonlinear model, Taylor truncation fixed at
/// fourth order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiodeNonlinearParams {
    pub k2: f64,
    pub k4: f64,
}

impl DiodeNonlinearParams {
    pub fn new(k2: f64, k4: f64) -> Result<Self> {
        if !(k2 > 0.0 && k4 > 0.0) {
            return Err(Error::Domain(format!(
                "diode coefficients must be positive, got k2={k2}, k4={k4}"
            )));
        }
        Ok(Self { k2, k4 })
    }
}

/// Parameters of the saturation (logistic) model.
///
/// `omega` is derived from `a` and `b` on construction and never stored
/// independently (including on the JSON wire), so the zero-input
/// cancellation stays exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationParams {
    pub a: f64,
    pub b: f64,
    pub p_sat: f64,
    omega: f64,
}

#[derive(Serialize, Deserialize)]
struct SaturationParamsWire {
    a: f64,
    b: f64,
    p_sat: f64,
}

impl Serialize for SaturationParams {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SaturationParamsWire {
            a: self.a,
            b: self.b,
            p_sat: self.p_sat,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SaturationParams {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = SaturationParamsWire::deserialize(deserializer)?;
        SaturationParams::new(wire.a, wire.b, wire.p_sat).map_err(serde::de::Error::custom)
    }
}

impl SaturationParams {
    pub fn new(a: f64, b: f64, p_sat: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && p_sat > 0.0) {
            return Err(Error::Domain(format!(
                "saturation parameters must be positive, got a={a}, b={b}, p_sat={p_sat}"
            )));
        }
        Ok(Self {
            a,
            b,
            p_sat,
            omega: 1.0 / (1.0 + f64::exp(a * b)),
        })
    }

    /// The derived constant `1 / (1 + exp(a*b))`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Derivative of [`sigmoid_dc_power`] with respect to the received RF
    /// power, `p_sat * a * s(1-s) / (1 - omega)` with `s` the raw logistic.
    pub fn dc_power_derivative(&self, p_rf: f64) -> f64 {
        let s = logistic(self.a * (p_rf - self.b));
        self.p_sat * self.a * s * (1.0 - s) / (1.0 - self.omega)
    }
}

/// One measured operating point of a real harvesting circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPoint {
    pub p_rf: f64,
    pub p_dc: f64,
}

impl MeasurementPoint {
    pub fn new(p_rf: f64, p_dc: f64) -> Result<Self> {
        if p_rf < 0.0 || p_dc < 0.0 {
            return Err(Error::Domain(format!(
                "measurement powers must be nonnegative, got ({p_rf}, {p_dc})"
            )));
        }
        Ok(Self { p_rf, p_dc })
    }
}

/// Tagged union over the three harvester models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum HarvesterModel {
    Linear(LinearParams),
    DiodeNonlinear(DiodeNonlinearParams),
    Saturation(SaturationParams),
}

impl HarvesterModel {
    /// DC output (or `z_dc` proxy for the diode model) for a given average
    /// received RF power carried by CSCG symbols.
    ///
    /// The diode variant needs the fourth RF moment; for a CSCG received
    /// signal of average power `p` that moment is `3 p^2` (Gaussian RF
    /// envelope), which is what multi-user beams carrying CSCG symbols
    /// produce.
    pub fn dc_from_cscg_rf(&self, p_rf: f64) -> Result<f64> {
        match self {
            HarvesterModel::Linear(lp) => linear_dc_power(p_rf, lp),
            HarvesterModel::DiodeNonlinear(dp) => {
                if p_rf < 0.0 {
                    return Err(Error::Domain(format!("p_rf must be nonnegative, got {p_rf}")));
                }
                Ok(dp.k2 * p_rf + dp.k4 * 3.0 * p_rf * p_rf)
            }
            HarvesterModel::Saturation(sp) => sigmoid_dc_power(p_rf, sp),
        }
    }
}

/// `P_dc = e3 * P_rf`.
pub fn linear_dc_power(p_rf: f64, params: &LinearParams) -> Result<f64> {
    if p_rf < 0.0 {
        return Err(Error::Domain(format!("p_rf must be nonnegative, got {p_rf}")));
    }
    Ok(params.e3 * p_rf)
}

/// `z_dc = k2*m2 + k4*m4` from the second and fourth moments of the RF
/// signal. Rejects moment pairs violating `m4 >= m2^2` (Jensen), with a tiny
/// relative slack for roundoff.
pub fn zdc_from_rf_moments(m2: f64, m4: f64, params: &DiodeNonlinearParams) -> Result<f64> {
    if m2 < 0.0 || m4 < 0.0 {
        return Err(Error::Domain(format!(
            "moments must be nonnegative, got m2={m2}, m4={m4}"
        )));
    }
    if m4 < m2 * m2 * (1.0 - 1e-9) {
        return Err(Error::Domain(format!(
            "invalid moment pair: m4={m4} < m2^2={}",
            m2 * m2
        )));
    }
    Ok(params.k2 * m2 + params.k4 * m4)
}

#[inline]
fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + f64::exp(-u))
}

/// Saturation-model DC power `(psi - p_sat*omega) / (1 - omega)` with
/// `psi = p_sat / (1 + exp(-a (p_rf - b)))`.
///
/// The logistic at `p_rf = 0` evaluates to exactly the stored `omega`
/// (bit-identical expression), so the output is exactly zero there.
pub fn sigmoid_dc_power(p_rf: f64, params: &SaturationParams) -> Result<f64> {
    if p_rf < 0.0 {
        return Err(Error::Domain(format!("p_rf must be nonnegative, got {p_rf}")));
    }
    let s = logistic(params.a * (p_rf - params.b));
    Ok(params.p_sat * (s - params.omega) / (1.0 - params.omega))
}

/// Unique received RF power producing a target DC output under the
/// saturation model.
///
/// Inverts [`sigmoid_dc_power`] in closed form. Targets at or above `p_sat`
/// are infeasible no matter how much power is transmitted.
pub fn invert_sigmoid(e_target: f64, params: &SaturationParams) -> Result<f64> {
    if e_target < 0.0 {
        return Err(Error::Domain(format!(
            "target DC power must be nonnegative, got {e_target}"
        )));
    }
    if e_target >= params.p_sat {
        return Err(Error::Infeasible {
            reason: format!(
                "target DC power {e_target} >= saturation ceiling {}",
                params.p_sat
            ),
            max_attainable: Some(params.p_sat),
        });
    }
    let psi = e_target * (1.0 - params.omega) + params.p_sat * params.omega;
    // p_sat/psi - 1 = (1 - omega)(p_sat - e)/psi; the factored form stays
    // accurate when the target sits close to the ceiling.
    let log_term =
        (1.0 - params.omega).ln() + (params.p_sat - e_target).ln() - psi.ln();
    let p_rf = params.b - log_term / params.a;
    // The closed form returns a roundoff-size negative for e_target = 0.
    Ok(p_rf.max(0.0))
}

/// Result of a sigmoid curve fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmoidFit {
    pub params: SaturationParams,
    /// Euclidean norm of the residual vector at the solution.
    pub residual: f64,
    pub iterations: usize,
}

/// Least-squares fit of `(a, b, p_sat)` to measured `(p_rf, p_dc)` points.
///
/// Damped Gauss-Newton with multi-start: `b` is seeded from quantiles of the
/// measured `p_rf` values and `p_sat` from `1.05 * max p_dc`; the logistic
/// residual surface is multimodal in `b`, so a single start is not reliable.
pub fn fit_sigmoid(points: &[MeasurementPoint]) -> Result<SigmoidFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: points.len(),
        });
    }
    let max_dc = points.iter().map(|p| p.p_dc).fold(0.0, f64::max);
    if max_dc <= 0.0 {
        return Err(Error::Degenerate(
            "all measured DC powers are zero; no sigmoid can be fitted".into(),
        ));
    }

    let mut p_rf_sorted: Vec<f64> = points.iter().map(|p| p.p_rf).filter(|&x| x > 0.0).collect();
    p_rf_sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if p_rf_sorted.is_empty() {
        return Err(Error::Degenerate("all measured RF powers are zero".into()));
    }
    let quantile = |q: f64| -> f64 {
        let idx = ((p_rf_sorted.len() - 1) as f64 * q).round() as usize;
        p_rf_sorted[idx]
    };

    let p_sat0 = 1.05 * max_dc;
    let mut best: Option<(SaturationParams, f64, usize)> = None;
    let mut any_converged = false;
    for bq in [0.2, 0.4, 0.6, 0.8] {
        let b0 = quantile(bq);
        for a_scale in [0.5, 2.0, 8.0] {
            let a0 = a_scale / b0;
            let (params, residual, iters, converged) =
                gauss_newton_sigmoid(points, a0, b0, p_sat0, 200);
            any_converged |= converged;
            let better = match &best {
                None => true,
                Some((_, r, _)) => residual < *r,
            };
            if better {
                best = Some((params, residual, iters));
            }
        }
    }

    let (params, residual, iterations) = best.expect("at least one start ran");
    if !any_converged {
        return Err(Error::Convergence {
            reason: "no Gauss-Newton start converged".into(),
            iterations,
            best: Some((params.a, params.b, params.p_sat, residual)),
        });
    }
    Ok(SigmoidFit {
        params,
        residual,
        iterations,
    })
}

/// One damped Gauss-Newton run in log-parameter space. The three parameters
/// span several decades (a in 1/W against b, p_sat in W), so stepping in
/// `(ln a, ln b, ln p_sat)` keeps the normal equations conditioned, makes
/// positivity automatic, and gives scale-free stopping rules. Returns
/// (params, residual norm, iterations, converged flag).
fn gauss_newton_sigmoid(
    points: &[MeasurementPoint],
    a0: f64,
    b0: f64,
    p_sat0: f64,
    max_iter: usize,
) -> (SaturationParams, f64, usize, bool) {
    let mut x = [a0.ln(), b0.ln(), p_sat0.ln()];

    let residual_norm_sq = |x: &[f64; 3]| -> f64 {
        let (a, b, p_sat) = (x[0].exp(), x[1].exp(), x[2].exp());
        let omega = 1.0 / (1.0 + f64::exp(a * b));
        points
            .iter()
            .map(|pt| {
                let s = logistic(a * (pt.p_rf - b));
                let r = p_sat * (s - omega) / (1.0 - omega) - pt.p_dc;
                r * r
            })
            .sum()
    };

    let mut cost = residual_norm_sq(&x);
    let mut converged = false;
    let mut iters = 0;
    for it in 0..max_iter {
        iters = it + 1;
        let (a, b, p_sat) = (x[0].exp(), x[1].exp(), x[2].exp());
        let omega = 1.0 / (1.0 + f64::exp(a * b));
        let denom = 1.0 - omega;
        let mut jtj = nalgebra::Matrix3::<f64>::zeros();
        let mut jtr = nalgebra::Vector3::<f64>::zeros();
        for pt in points {
            let s = logistic(a * (pt.p_rf - b));
            let f = p_sat * (s - omega) / denom;
            let r = f - pt.p_dc;
            let ds_da = s * (1.0 - s) * (pt.p_rf - b);
            let ds_db = -a * s * (1.0 - s);
            let dw_da = -b * omega * (1.0 - omega);
            let dw_db = -a * omega * (1.0 - omega);
            let df_ds = p_sat / denom;
            let df_dw = p_sat * (s - 1.0) / (denom * denom);
            // Chain rule through the log reparametrization.
            let j = nalgebra::Vector3::new(
                (df_ds * ds_da + df_dw * dw_da) * a,
                (df_ds * ds_db + df_dw * dw_db) * b,
                f, // d f / d ln p_sat = f
            );
            jtj += j * j.transpose();
            jtr += j * r;
        }
        // Tiny Tikhonov term keeps the normal equations solvable when the
        // Jacobian loses rank (e.g. all points deep in saturation).
        let trace_scale = (jtj[(0, 0)] + jtj[(1, 1)] + jtj[(2, 2)]) / 3.0;
        for d in 0..3 {
            jtj[(d, d)] += 1e-12 * (trace_scale + f64::MIN_POSITIVE);
        }
        let Some(delta) = jtj.lu().solve(&(-jtr)) else {
            break;
        };

        // Halve the step until the cost drops. The box keeps exp() away
        // from underflow on runaway directions; a start that pushes against
        // it just loses the multi-start on residual.
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let nx = [
                (x[0] + t * delta[0]).clamp(-300.0, 300.0),
                (x[1] + t * delta[1]).clamp(-300.0, 300.0),
                (x[2] + t * delta[2]).clamp(-300.0, 300.0),
            ];
            let c = residual_norm_sq(&nx);
            if c < cost {
                let step = t * delta.amax();
                x = nx;
                let impr = (cost - c) / cost.max(f64::MIN_POSITIVE);
                cost = c;
                accepted = true;
                // Log-space steps are relative steps; 1e-12 leaves the
                // parameters converged well past any reporting precision.
                if step < 1e-12 || impr < 1e-14 {
                    converged = true;
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // Stationary within line-search resolution.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    let params = SaturationParams::new(x[0].exp(), x[1].exp(), x[2].exp())
        .expect("log-space parameters are positive");
    (params, cost.sqrt(), iters, converged)
}

/// Parse a measurement dataset in `p_rf_watt,p_dc_watt` CSV form.
pub fn parse_measurements_csv(text: &str) -> Result<Vec<MeasurementPoint>> {
    let mut out = Vec::new();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty measurement file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["p_rf_watt", "p_dc_watt"] {
        return Err(Error::Parse(format!(
            "expected header 'p_rf_watt,p_dc_watt', got '{header}'"
        )));
    }
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Parse(format!("line {}: expected 2 fields", i + 2)));
        }
        let p_rf: f64 = fields[0]
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", i + 2)))?;
        let p_dc: f64 = fields[1]
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", i + 2)))?;
        out.push(MeasurementPoint::new(p_rf, p_dc)?);
    }
    Ok(out)
}
