//! Model parameters and the exact distributional quantities of the weighted
//! typical cell: volume moments, cumulants of the log-volume and the
//! high-dimensional limit quantities (Berry–Esseen scale, mod-Gaussian frame,
//! scaled cumulant generating function).
//!
//! Moments are assembled in the log domain throughout; gamma arguments grow
//! like d²/2.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::{
    digamma, ln_gamma_ratio_unchecked, ln_gamma_unchecked, log_barnes_g, polygamma_unchecked,
    trigamma,
};

/// Largest cumulant order served by [`cumulant`].
pub const MAX_CUMULANT_ORDER: u32 = 10;

/// The parameter quadruple (d, β, ν, γ). The tessellation lives in R^{d−1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: u32,
    pub beta: f64,
    pub nu: f64,
    pub gamma: f64,
}

impl ModelParams {
    /// Builds and validates in one step.
    pub fn new(d: u32, beta: f64, nu: f64, gamma: f64) -> Result<Self> {
        validate(Self { d, beta, nu, gamma })
    }

    pub(crate) fn df(&self) -> f64 {
        f64::from(self.d)
    }

    /// Ambient dimension d − 1 of the tessellation.
    pub fn dim(&self) -> usize {
        self.d as usize - 1
    }

    /// Exponent of the radius density r^{A−1} e^{−rate·r^{c}}: returns (A, c).
    pub fn radius_exponents(&self) -> (f64, f64) {
        let d = self.df();
        let a = 2.0 * d * self.beta + d * d + self.nu * (d - 1.0) + 1.0;
        (a, d + 1.0 + 2.0 * self.beta)
    }
}

/// Checks every parameter constraint and reports all that fail.
pub fn validate(params: ModelParams) -> Result<ModelParams> {
    let mut problems = Vec::new();
    if params.d < 2 {
        problems.push(format!("d must be at least 2 (got {})", params.d));
    }
    if !(params.beta > -1.0) || !params.beta.is_finite() {
        problems.push(format!("beta must exceed −1 (got {})", params.beta));
    }
    if !(params.nu >= -1.0) || !params.nu.is_finite() {
        problems.push(format!("nu must be ≥ −1 (got {})", params.nu));
    }
    if !(params.gamma > 0.0) || !params.gamma.is_finite() {
        problems.push(format!("gamma must be positive (got {})", params.gamma));
    }
    if problems.is_empty() {
        Ok(params)
    } else {
        Err(Error::InvalidParams(problems))
    }
}

/// γ Γ(d/2) / (2√π Γ((d+1)/2)), the radius constant as it is usually stated.
///
/// It carries no β dependence and agrees with [`radius_rate`] only in the
/// β → −1 limit up to a factor 2; samplers and tail limits use
/// [`radius_rate`].
pub fn m_const(params: &ModelParams) -> f64 {
    let d = params.df();
    params.gamma * (ln_gamma_unchecked(d / 2.0) - ln_gamma_unchecked((d + 1.0) / 2.0)).exp()
        / (2.0 * PI.sqrt())
}

/// Rate of the radius law: the intensity measure of the region
/// {(v, h): ‖v‖² + h < r²} equals `radius_rate · r^{d+1+2β}`.
///
/// Equals γ Γ(d/2+β+1) / (√π Γ((d+1)/2+β+1)); this is the base that appears
/// in the volume-moment formula and in the normalizing constant α.
pub fn radius_rate(params: &ModelParams) -> f64 {
    log_radius_rate(params).exp()
}

fn log_radius_rate(params: &ModelParams) -> f64 {
    let d = params.df();
    let b = params.beta;
    params.gamma.ln() - ln_gamma_ratio_unchecked(d / 2.0 + b + 1.0, 0.5) - 0.5 * PI.ln()
}

/// c_{d,β} = Γ(d/2+β+1) / (π^{d/2} Γ(β+1)), the height-density constant of
/// the Poisson input.
pub fn c_const(params: &ModelParams) -> f64 {
    c_const_raw(params.df(), params.beta)
}

pub(crate) fn c_const_raw(d: f64, beta: f64) -> f64 {
    (ln_gamma_unchecked(d / 2.0 + beta + 1.0) - 0.5 * d * PI.ln() - ln_gamma_unchecked(beta + 1.0))
        .exp()
}

/// log of the normalizing constant of the joint density of (R, Y₁, …, Y_d).
pub fn log_alpha(params: &ModelParams) -> f64 {
    let d = params.df();
    let (b, nu) = (params.beta, params.nu);
    let q = d + 2.0 * b + 1.0;
    let shape = d + (nu - 1.0) * (d - 1.0) / q;
    let mut v = -0.5 * d * (d - 1.0) * PI.ln();
    v += (nu + 1.0) * ln_gamma_unchecked(d);
    v += q.ln();
    v += ln_gamma_unchecked((d * (d + nu + 2.0 * b) - nu + 1.0) / 2.0);
    v -= ln_gamma_unchecked(d * (d + nu + 2.0 * b) / 2.0 + 1.0);
    v -= ln_gamma_unchecked(shape);
    v += shape * log_radius_rate(params);
    v += d * (ln_gamma_unchecked((d + nu) / 2.0 + b + 1.0) - ln_gamma_unchecked(b + 1.0));
    for i in 1..params.d {
        let i = f64::from(i);
        v += ln_gamma_unchecked(i / 2.0) - ln_gamma_unchecked((i + nu + 1.0) / 2.0);
    }
    v
}

/// log E[Vol(Z)^s] for the ν-weighted typical cell.
///
/// Defined for s > −ν−1. At s = −ν−1 the value is returned only when every
/// gamma argument stays strictly positive.
pub fn log_volume_moment(params: &ModelParams, s: f64) -> Result<f64> {
    validate(*params)?;
    let d = params.df();
    let (b, nu) = (params.beta, params.nu);
    let boundary = -nu - 1.0;
    if !s.is_finite() || s < boundary {
        return Err(Error::Domain {
            function: "log_volume_moment",
            value: s,
            reason: "requires s ≥ −ν−1",
        });
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let q = d + 2.0 * b + 1.0;
    // (base argument at s = 0, increment per unit s)
    let pieces = [
        ((d * (d + 2.0 * b) + nu * (d - 1.0) + 1.0) / 2.0, (d - 1.0) / 2.0),
        (d * (d + nu + 2.0 * b) / 2.0 + 1.0, d / 2.0),
        (d + (nu - 1.0) * (d - 1.0) / q, (d - 1.0) / q),
        ((d + nu) / 2.0 + b + 1.0, 0.5),
    ];
    let ok = |x: f64| x > 0.0;
    if !pieces.iter().all(|&(x, h)| ok(x) && ok(x + s * h)) || !ok((1.0 + nu + s + 1.0) / 2.0) {
        return Err(Error::Domain {
            function: "log_volume_moment",
            value: s,
            reason: "a gamma argument is non-positive",
        });
    }
    let ratio = |(x, h): (f64, f64)| ln_gamma_ratio_unchecked(x, s * h);

    let mut v = -s * ln_gamma_unchecked(d);
    v -= s * (d - 1.0) / q * log_radius_rate(params);
    v -= ratio(pieces[0]);
    v += ratio(pieces[1]);
    v += ratio(pieces[2]);
    v -= d * ratio(pieces[3]);
    for i in 1..params.d {
        v += ln_gamma_ratio_unchecked((f64::from(i) + nu + 1.0) / 2.0, s / 2.0);
    }
    Ok(v)
}

/// One cumulant of the log-volume, with the fixed-parameter bound attached
/// when its preconditions hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CumulantReport {
    pub order: u32,
    pub value: f64,
    pub bound: Option<f64>,
}

/// m-th cumulant of Y = log Vol(Z), from the polygamma expansion of the
/// derivatives of the log-moment function at 0.
pub fn cumulant(params: &ModelParams, m: u32) -> Result<CumulantReport> {
    validate(*params)?;
    if m == 0 || m > MAX_CUMULANT_ORDER {
        return Err(Error::UnsupportedOrder {
            order: m,
            max: MAX_CUMULANT_ORDER,
        });
    }
    let d = params.df();
    let (b, nu) = (params.beta, params.nu);
    let x = d + 2.0 * b + nu;
    let q = d + 2.0 * b + 1.0;
    let args = [d * x / 2.0, (d * x - (nu - 1.0)) / q, (d * x - (nu - 1.0)) / 2.0, x / 2.0];
    if let Some(&bad) = args.iter().find(|&&a| !(a > 0.0)) {
        return Err(Error::Domain {
            function: "cumulant",
            value: bad,
            reason: "polygamma argument must be positive",
        });
    }
    let k = m - 1;
    let mf = f64::from(m);
    let pg = |a: f64| polygamma_unchecked(k, a);
    let two_m = 2f64.powi(m as i32);

    let mut v = 0.0;
    if m == 1 {
        v += (d - 1.0) / q
            * (0.5 * PI.ln() + ln_gamma_ratio_unchecked((d + 2.0 * b + 2.0) / 2.0, 0.5)
                - params.gamma.ln())
            - ln_gamma_unchecked(d);
    }
    v += d.powf(mf) / two_m * pg(args[0]);
    v += ((d - 1.0) / q).powf(mf) * pg(args[1]);
    v -= (d - 1.0).powf(mf) / two_m * pg(args[2]);
    v -= d / two_m * pg(args[3]);
    let mut tail = 0.0;
    for i in 1..params.d {
        tail += pg((f64::from(i) + nu + 1.0) / 2.0);
    }
    v += tail / two_m;
    let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
    let fact = factorial(m - 1);
    v -= sign * fact * (d - 1.0) / x.powf(mf);

    Ok(CumulantReport {
        order: m,
        value: v,
        bound: fixed_order_bound(params, m),
    })
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * f64::from(k))
}

/// 18(β+2)^{m−1}(m−1)!/(ν+2)^{m−2}, valid for m ≥ 3 and d > max(4, 1−2β−ν).
pub fn fixed_order_bound(params: &ModelParams, m: u32) -> Option<f64> {
    let d = params.df();
    let (b, nu) = (params.beta, params.nu);
    if m < 3 || !(d > 4f64.max(1.0 - 2.0 * b - nu)) {
        return None;
    }
    Some(18.0 * (b + 2.0).powi(m as i32 - 1) * factorial(m - 1) / (nu + 2.0).powi(m as i32 - 2))
}

/// The general bound
/// (11d+3+6(β+2)^{m−1})(m−1)!/(4(d+2β+ν)^{m−1}) + 4(m−1)!/(ν+2)^{m−2},
/// valid for m ≥ 3, d ≥ 3 and d + 2β + ν > 1.
pub fn general_cumulant_bound(params: &ModelParams, m: u32) -> Option<f64> {
    let d = params.df();
    let (b, nu) = (params.beta, params.nu);
    let x = d + 2.0 * b + nu;
    if m < 3 || params.d < 3 || !(x > 1.0) {
        return None;
    }
    let fact = factorial(m - 1);
    let mi = m as i32;
    Some(
        (11.0 * d + 3.0 + 6.0 * (b + 2.0).powi(mi - 1)) * fact / (4.0 * x.powi(mi - 1))
            + 4.0 * fact / (nu + 2.0).powi(mi - 2),
    )
}

/// C_ν = −½ψ(ν+2) − ((ν+1)/2)ψ'(ν+2) + ⅛ψ'((ν+2)/2).
pub fn c_nu(nu: f64) -> Result<f64> {
    if !(nu >= -1.0) || !nu.is_finite() {
        return Err(Error::Domain {
            function: "c_nu",
            value: nu,
            reason: "requires ν ≥ −1",
        });
    }
    Ok(-0.5 * digamma(nu + 2.0)? - 0.5 * (nu + 1.0) * trigamma(nu + 2.0)?
        + 0.125 * trigamma((nu + 2.0) / 2.0)?)
}

/// Leading-order mean and variance of the log-volume as d → ∞:
/// (−d log d + ((11+2ν)/4) log d + d/2 − log γ, ½ log d + C_ν).
pub fn mean_variance_asymptotic(params: &ModelParams) -> Result<(f64, f64)> {
    validate(*params)?;
    let d = params.df();
    let ld = d.ln();
    let mean = -d * ld + (11.0 + 2.0 * params.nu) / 4.0 * ld + d / 2.0 - params.gamma.ln();
    Ok((mean, 0.5 * ld + c_nu(params.nu)?))
}

/// 2(β+2)/((ν+2)√(log d)) for a real dimension argument.
pub fn berry_esseen_epsilon(d: f64, beta: f64, nu: f64) -> Result<f64> {
    if !(d > 1.0) {
        return Err(Error::Domain {
            function: "berry_esseen_epsilon",
            value: d,
            reason: "requires log d > 0",
        });
    }
    Ok(2.0 * (beta + 2.0) / ((nu + 2.0) * d.ln().sqrt()))
}

pub fn berry_esseen_scale(params: &ModelParams) -> Result<f64> {
    validate(*params)?;
    berry_esseen_epsilon(params.df(), params.beta, params.nu)
}

/// Which constants to use for the mod-Gaussian centering and variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameConvention {
    /// m_d = (9/4+ν/2)log(d/2) − (d+ν+2β)/2 − 1 + log(π/(4γ))
    ///       − 3(β+1)log d/(d+2β+1) − log (d−1)!,
    /// w_d = ½ log(d/2) − 1.
    Stated,
    /// The stated pair shifted to m_d + ½ + 4 log 2 and w_d + ½. With these the
    /// renormalized exact log-MGF converges to the Barnes-G limiting function;
    /// with the stated pair it converges to log ψ(t) + (½ + 4 log 2)t + t²/4.
    MomentConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModGaussianFrame {
    pub centering: f64,
    pub variance: f64,
    /// Lower edge −ν−1 of the real strip where the MGF is finite.
    pub strip_lower: f64,
    pub convention: FrameConvention,
}

pub fn mod_gaussian_frame(params: &ModelParams, convention: FrameConvention) -> Result<ModGaussianFrame> {
    validate(*params)?;
    let d = params.df();
    let (b, nu) = (params.beta, params.nu);
    let l = (d / 2.0).ln();
    let mut centering = (2.25 + nu / 2.0) * l - (d + nu + 2.0 * b) / 2.0 - 1.0
        + (PI / (4.0 * params.gamma)).ln()
        - 3.0 * (b + 1.0) * d.ln() / (d + 2.0 * b + 1.0)
        - ln_gamma_unchecked(d);
    let mut variance = 0.5 * l - 1.0;
    if convention == FrameConvention::MomentConsistent {
        centering += 0.5 + 4.0 * std::f64::consts::LN_2;
        variance += 0.5;
    }
    Ok(ModGaussianFrame {
        centering,
        variance,
        strip_lower: -nu - 1.0,
        convention,
    })
}

/// log ψ(t) for the limiting function
/// ψ(t) = G((ν+2)/2) G((ν+3)/2) / (G((ν+2+t)/2) G((ν+3+t)/2)).
pub fn mod_gaussian_limit(nu: f64, t: f64) -> Result<f64> {
    if !(t > -nu - 1.0) {
        return Err(Error::Domain {
            function: "mod_gaussian_limit",
            value: t,
            reason: "requires t > −ν−1",
        });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(log_barnes_g((nu + 2.0) / 2.0)? + log_barnes_g((nu + 3.0) / 2.0)?
        - log_barnes_g((nu + 2.0 + t) / 2.0)?
        - log_barnes_g((nu + 3.0 + t) / 2.0)?)
}

/// log E Vol^t − m_d t − w_d t²/2 − log ψ(t), using the moment-consistent
/// frame. Tends to 0 as d → ∞ at rate O((1+|t|³)/d).
pub fn mod_gaussian_residual(params: &ModelParams, t: f64) -> Result<f64> {
    mod_gaussian_residual_with(params, t, FrameConvention::MomentConsistent)
}

pub fn mod_gaussian_residual_with(
    params: &ModelParams,
    t: f64,
    convention: FrameConvention,
) -> Result<f64> {
    let frame = mod_gaussian_frame(params, convention)?;
    let limit = mod_gaussian_limit(params.nu, t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(log_volume_moment(params, t)? - frame.centering * t - frame.variance * t * t / 2.0 - limit)
}

/// (2/log(d/2)) · (log E e^{tY} − t E Y): the log-MGF of
/// X_d = 2(Y − E Y)/log(d/2) at (t/2)log(d/2), divided by the speed
/// ½ log(d/2). Converges to t²/2.
pub fn ldp_scaled_cgf(params: &ModelParams, t: f64) -> Result<f64> {
    validate(*params)?;
    if params.d < 3 {
        return Err(Error::Domain {
            function: "ldp_scaled_cgf",
            value: params.df(),
            reason: "requires d ≥ 3 so that log(d/2) > 0",
        });
    }
    // The boundary t = −ν−1 itself is left to the moment formula, which
    // accepts it when every gamma argument stays positive.
    if !(t >= -params.nu - 1.0) {
        return Err(Error::Domain {
            function: "ldp_scaled_cgf",
            value: t,
            reason: "MGF argument must not fall below −ν−1",
        });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let mean = cumulant(params, 1)?.value;
    let speed = 0.5 * (params.df() / 2.0).ln();
    Ok((log_volume_moment(params, t)? - t * mean) / speed)
}
