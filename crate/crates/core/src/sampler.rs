//! Exact sampling of the weighted typical cell from its product form: an
//! independent radius R times a Vol^{ν+1}-tilted tuple of beta points.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::Serialize;
use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{log_tau, log_volume_flat, simplex_log_volume, Simplex};
use crate::model::{log_volume_moment, radius_rate, validate, ModelParams};
use crate::specfun::ln_gamma_unchecked;

/// Default cap on rejection attempts per accepted tuple.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 10_000_000;

/// A seeded generator identified by (seed, stream id). Distinct stream ids
/// select disjoint ChaCha streams under the same key.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSample {
    pub radius: f64,
    pub points: Vec<Vec<f64>>,
    pub simplex: Simplex,
    pub log_volume: f64,
    pub attempts: u64,
}

/// Sampler with the parameter-dependent distributions prepared once.
#[derive(Debug, Clone)]
pub struct CellSampler {
    params: ModelParams,
    dim: usize,
    radius_shape: Gamma<f64>,
    inv_c: f64,
    log_rate: f64,
    weight_gamma: Gamma<f64>,
    log_tau: f64,
    max_attempts: u64,
}

impl CellSampler {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let params = validate(*params)?;
        let (a, c) = params.radius_exponents();
        assert!(a / c > 0.0, "radius shape must be positive");
        let radius_shape = Gamma::new(a / c, 1.0).expect("positive gamma shape");
        let weight_gamma = Gamma::new(params.beta + 1.0, 1.0).expect("positive gamma shape");
        Ok(Self {
            params,
            dim: params.dim(),
            radius_shape,
            inv_c: 1.0 / c,
            log_rate: radius_rate(&params).ln(),
            weight_gamma,
            log_tau: log_tau(params.dim()),
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        })
    }

    pub fn with_max_attempts(mut self, max_attempts: u64) -> Self {
        self.max_attempts = max_attempts.max(1);
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// R with density ∝ r^{A−1} e^{−rate·r^c}: G ~ Gamma(A/c) and R = (G/rate)^{1/c}.
    pub fn sample_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g: f64 = self.radius_shape.sample(rng);
        ((g.ln() - self.log_rate) * self.inv_c).exp()
    }

    /// A point of the unit ball in R^{d−1} with density ∝ (1 − ‖x‖²)^β.
    pub fn sample_beta_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        self.fill_beta_point(rng, &mut x);
        x
    }

    fn fill_beta_point<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        // With X standard normal in R^{d−1} and G ~ Gamma(β+1), the point
        // X / √(‖X‖² + 2G) has uniform direction and squared norm
        // (‖X‖²/2) / (‖X‖²/2 + G) ~ Beta((d−1)/2, β+1).
        let mut norm2 = 0.0;
        for x in out.iter_mut() {
            *x = StandardNormal.sample(rng);
            norm2 += *x * *x;
        }
        let g: f64 = self.weight_gamma.sample(rng);
        let f = 1.0 / (norm2 + 2.0 * g).sqrt();
        out.iter_mut().for_each(|x| *x *= f);
    }

    /// Fills `buf` with d beta points (vertex-major) accepted with
    /// probability (Δ/τ)^{ν+1}; returns (log Δ, attempts).
    fn fill_weighted(&self, rng: &mut (impl Rng + ?Sized), buf: &mut [f64]) -> Result<(f64, u64)> {
        let exponent = self.params.nu + 1.0;
        for attempt in 1..=self.max_attempts {
            for p in buf.chunks_exact_mut(self.dim) {
                self.fill_beta_point(rng, p);
            }
            let log_delta = log_volume_flat(self.dim, buf);
            if exponent == 0.0 {
                return Ok((log_delta, attempt));
            }
            let log_w = exponent * (log_delta - self.log_tau);
            assert!(log_w <= 1e-9, "acceptance weight exceeds 1: log w = {log_w}");
            let u: f64 = rng.random();
            if u.ln() < log_w {
                return Ok((log_delta, attempt));
            }
        }
        Err(Error::LowAcceptance {
            attempts: self.max_attempts,
            rate: 0.0,
        })
    }

    /// d beta points with joint density ∝ Δ^{ν+1} Π(1 − ‖y_i‖²)^β, and the
    /// number of proposals used.
    pub fn sample_weighted_points<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<Vec<f64>>, u64)> {
        let mut buf = vec![0.0; self.dim * (self.dim + 1)];
        let (_, attempts) = self.fill_weighted(rng, &mut buf)?;
        Ok((buf.chunks_exact(self.dim).map(<[f64]>::to_vec).collect(), attempts))
    }

    pub fn sample_cell<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CellSample> {
        let radius = self.sample_radius(rng);
        let mut buf = vec![0.0; self.dim * (self.dim + 1)];
        let (_, attempts) = self.fill_weighted(rng, &mut buf)?;
        let unit = Simplex::from_flat(self.dim, buf)?;
        let simplex = unit.affine(radius, &vec![0.0; self.dim]);
        let points = unit.vertices().map(<[f64]>::to_vec).collect();
        Ok(CellSample {
            radius,
            points,
            log_volume: simplex_log_volume(&simplex),
            simplex,
            attempts,
        })
    }

    /// log Vol of a fresh cell without materializing it, plus attempts.
    pub fn sample_log_volume<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut Vec<f64>) -> Result<(f64, u64)> {
        let radius = self.sample_radius(rng);
        let (log_delta, attempts) = self.sample_log_delta(rng, buf)?;
        Ok((self.dim as f64 * radius.ln() + log_delta, attempts))
    }

    /// log Δ, the volume of the weighted beta simplex alone (Vol = R^{d−1} Δ),
    /// plus attempts. `buf` is left holding the points.
    pub fn sample_log_delta<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut Vec<f64>) -> Result<(f64, u64)> {
        buf.resize(self.dim * (self.dim + 1), 0.0);
        self.fill_weighted(rng, buf)
    }
}

pub fn sample_radius(params: &ModelParams, rng: &mut RngStream) -> Result<f64> {
    Ok(CellSampler::new(params)?.sample_radius(rng))
}

pub fn sample_beta_point(params: &ModelParams, rng: &mut RngStream) -> Result<Vec<f64>> {
    Ok(CellSampler::new(params)?.sample_beta_point(rng))
}

pub fn sample_weighted_points(params: &ModelParams, rng: &mut RngStream) -> Result<(Vec<Vec<f64>>, u64)> {
    CellSampler::new(params)?.sample_weighted_points(rng)
}

pub fn sample_cell(params: &ModelParams, rng: &mut RngStream) -> Result<CellSample> {
    CellSampler::new(params)?.sample_cell(rng)
}

/// log E[R^k] for the radius law of `params`.
pub fn log_radius_moment(params: &ModelParams, k: f64) -> f64 {
    let (a, c) = params.radius_exponents();
    -k / c * radius_rate(params).ln() + ln_gamma_unchecked((a + k) / c) - ln_gamma_unchecked(a / c)
}

/// log E[Δ^s] for d independent (unweighted) beta points, read off the ν = −1
/// volume moments by removing the radius factor.
pub fn log_unweighted_delta_moment(params: &ModelParams, s: f64) -> Result<f64> {
    let base = ModelParams { nu: -1.0, ..*params };
    let dim = params.dim() as f64;
    Ok(log_volume_moment(&base, s)? - log_radius_moment(&base, s * dim))
}

/// Exact acceptance probability of the rejection step, E[(Δ/τ)^{ν+1}].
pub fn acceptance_rate(params: &ModelParams) -> Result<f64> {
    let e = params.nu + 1.0;
    Ok((log_unweighted_delta_moment(params, e)? - e * log_tau(params.dim())).exp())
}

#[derive(Debug, Serialize)]
struct SampleRow {
    stream: u64,
    index: u64,
    radius: f64,
    log_volume: f64,
    attempts: u64,
}

/// Draws `count` cells from `rng` and writes them as CSV with columns
/// stream, index, radius, log_volume, attempts.
pub fn write_samples_csv<W: Write>(
    sampler: &CellSampler,
    rng: &mut RngStream,
    count: u64,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for index in 0..count {
        let cell = sampler.sample_cell(rng)?;
        w.serialize(SampleRow {
            stream: rng.stream_id(),
            index,
            radius: cell.radius,
            log_volume: cell.log_volume,
            attempts: cell.attempts,
        })
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}
