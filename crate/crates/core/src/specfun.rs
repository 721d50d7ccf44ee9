//! Real-argument log-gamma, polygamma and Barnes G, plus closed forms for
//! half-integer-step sums of digamma and trigamma values.
//!
//! Everything works in the log domain where the value itself would overflow.
//! Small arguments are handled with Taylor series in ζ(k) around 1 or 2, so
//! relative accuracy holds near the zeros of log Γ and log G. Large arguments
//! use recurrence plus the Bernoulli asymptotic expansions.

use crate::error::{Error, Result};

/// Default largest polygamma order accepted by [`polygamma`].
pub const MAX_POLYGAMMA_ORDER: u32 = 12;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// ζ'(−1), the constant term of the Barnes G asymptotic expansion.
const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_94;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// ζ(k) − 1 for k = 2, 3, …, 41.
const ZETA_MINUS_ONE: [f64; 40] = [
    0.6449340668482264,
    0.2020569031595943,
    0.08232323371113819,
    0.03692775514336993,
    0.01734306198444914,
    0.008349277381922827,
    0.00407735619794434,
    0.0020083928260822143,
    0.0009945751278180853,
    0.0004941886041194645,
    0.0002460865533080483,
    0.00012271334757848915,
    6.124813505870483e-05,
    3.058823630702049e-05,
    1.528225940865187e-05,
    7.637197637899763e-06,
    3.81729326499984e-06,
    1.908212716553939e-06,
    9.539620338727962e-07,
    4.769329867878064e-07,
    2.38450502727733e-07,
    1.1921992596531106e-07,
    5.960818905125948e-08,
    2.980350351465228e-08,
    1.4901554828365043e-08,
    7.45071178983543e-09,
    3.725334024788457e-09,
    1.862659723513049e-09,
    9.313274324196682e-10,
    4.656629065033784e-10,
    2.3283118336765053e-10,
    1.164155017270052e-10,
    5.820772087902701e-11,
    2.9103850444971e-11,
    1.4551921891041985e-11,
    7.275959835057482e-12,
    3.637979547378651e-12,
    1.818989650307066e-12,
    9.094947840263888e-13,
    4.547473783042154e-13,
];

/// Bernoulli numbers B_2, B_4, …, B_30.
const BERNOULLI_EVEN: [f64; 15] = [
    0.16666666666666666,
    -0.03333333333333333,
    0.023809523809523808,
    -0.03333333333333333,
    0.07575757575757576,
    -0.2531135531135531,
    1.1666666666666667,
    -7.092156862745098,
    54.971177944862156,
    -529.1242424242424,
    6192.123188405797,
    -86580.25311355312,
    1425517.1666666667,
    -27298231.067816094,
    601580873.9006424,
];

/// Polygamma order ψ^(m); `m = 0` is the digamma function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolygammaOrder(u32);

impl PolygammaOrder {
    pub const DIGAMMA: Self = Self(0);
    pub const TRIGAMMA: Self = Self(1);

    pub fn new(m: u32) -> Result<Self> {
        Self::with_max(m, MAX_POLYGAMMA_ORDER)
    }

    pub fn with_max(m: u32, max: u32) -> Result<Self> {
        if m > max {
            return Err(Error::UnsupportedOrder { order: m, max });
        }
        Ok(Self(m))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// Parameters of a half-step polygamma sum Σ_{j=1}^{k} f((j+a)/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSumClosedForm {
    pub k: u32,
    pub a: f64,
    /// Parity of `k`: 0 when even, 1 when odd.
    pub c: u32,
}

impl HalfSumClosedForm {
    pub fn new(k: u32, a: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::Domain {
                function: "halfsum",
                value: f64::from(k),
                reason: "k must be at least 2",
            });
        }
        check_positive("halfsum", a)?;
        Ok(Self { k, a, c: k % 2 })
    }
}

fn check_positive(function: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function,
            value: x,
            reason: "requires a finite positive argument",
        })
    }
}

fn zeta(k: usize) -> f64 {
    match k {
        2..=41 => 1.0 + ZETA_MINUS_ONE[k - 2],
        _ => 1.0 + 2f64.powi(-(k as i32)) + 3f64.powi(-(k as i32)),
    }
}

fn zeta_minus_one(k: usize) -> f64 {
    match k {
        2..=41 => ZETA_MINUS_ONE[k - 2],
        _ => 2f64.powi(-(k as i32)) + 3f64.powi(-(k as i32)),
    }
}

/// log Γ(2 + z) for |z| ≤ 1/2.
fn ln_gamma_near_two(z: f64) -> f64 {
    let mut sum = (1.0 - EULER_GAMMA) * z;
    // zk = (−z)^k
    let mut zk = -z;
    for k in 2..=48usize {
        zk *= -z;
        let term = zeta_minus_one(k) * zk / k as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn ln_gamma_stirling(x: f64) -> f64 {
    (x - 0.5) * x.ln() - x + 0.5 * LN_2PI + stirling_correction(x)
}

/// log Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive("log_gamma", x)?;
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        ln_gamma_unchecked(x + 1.0) - x.ln()
    } else if x < 1.5 {
        ln_gamma_near_two(x - 1.0) - (x - 1.0).ln_1p()
    } else if x <= 2.5 {
        ln_gamma_near_two(x - 2.0)
    } else if x < 15.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y > 2.5 {
            y -= 1.0;
            prod *= y;
        }
        ln_gamma_near_two(y - 2.0) + prod.ln()
    } else {
        ln_gamma_stirling(x)
    }
}

/// Stirling series without the leading terms: log Γ(x) − [(x−½)log x − x + ½log 2π].
fn stirling_correction(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut pow = inv;
    for (i, b) in BERNOULLI_EVEN.iter().take(10).enumerate() {
        let k = (i + 1) as f64;
        corr += b / (2.0 * k * (2.0 * k - 1.0)) * pow;
        pow *= inv2;
    }
    corr
}

/// log Γ(x + h) − log Γ(x), without the cancellation of a plain difference
/// when x is large.
pub fn ln_gamma_ratio(x: f64, h: f64) -> Result<f64> {
    check_positive("ln_gamma_ratio", x)?;
    check_positive("ln_gamma_ratio", x + h)?;
    Ok(ln_gamma_ratio_unchecked(x, h))
}

pub(crate) fn ln_gamma_ratio_unchecked(x: f64, h: f64) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    let lo = x.min(x + h);
    if lo < 15.0 {
        return ln_gamma_unchecked(x + h) - ln_gamma_unchecked(x);
    }
    (x - 0.5) * (h / x).ln_1p() + h * (x + h).ln() - h + stirling_correction(x + h)
        - stirling_correction(x)
}

/// ψ^(m)(x) for x > 0.
pub fn polygamma(order: PolygammaOrder, x: f64) -> Result<f64> {
    check_positive("polygamma", x)?;
    let v = polygamma_unchecked(order.get(), x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain {
            function: "polygamma",
            value: x,
            reason: "result overflows f64",
        })
    }
}

pub fn digamma(x: f64) -> Result<f64> {
    polygamma(PolygammaOrder::DIGAMMA, x)
}

pub fn trigamma(x: f64) -> Result<f64> {
    polygamma(PolygammaOrder::TRIGAMMA, x)
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * f64::from(k))
}

pub(crate) fn polygamma_unchecked(m: u32, x: f64) -> f64 {
    let threshold = 10.0 + f64::from(m);
    let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
    let m_fact = factorial(m);

    // ψ^(m)(x) = ψ^(m)(x+n) + (−1)^{m+1} m! Σ_{k<n} (x+k)^{−(m+1)}
    let mut shifted = 0.0;
    let mut y = x;
    while y < threshold {
        shifted += y.powi(-(m as i32) - 1);
        y += 1.0;
    }
    shifted *= sign * m_fact;

    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let asym = if m == 0 {
        let mut s = y.ln() - 0.5 * inv;
        let mut pow = inv2;
        for (i, b) in BERNOULLI_EVEN.iter().enumerate() {
            let k2 = 2.0 * (i + 1) as f64;
            s -= b / k2 * pow;
            pow *= inv2;
        }
        s
    } else {
        let inv_m = inv.powi(m as i32);
        let mut s = factorial(m - 1) * inv_m + 0.5 * m_fact * inv_m * inv;
        let mut pow = inv_m * inv2;
        for (i, b) in BERNOULLI_EVEN.iter().enumerate() {
            let k2 = 2 * (i as u32 + 1);
            // (2k + m − 1)! / (2k)!
            let rising: f64 = (k2 + 1..k2 + m).map(f64::from).product();
            s += b * rising * pow;
            pow *= inv2;
        }
        sign * s
    };
    shifted + asym
}

/// log G(1 + z) for |z| ≤ 1/2 via its Taylor series.
fn ln_barnes_g_near_one(z: f64) -> f64 {
    let mut sum = 0.5 * z * (LN_2PI - 1.0) - 0.5 * (1.0 + EULER_GAMMA) * z * z;
    let mut zk = z * z;
    for k in 3..=64usize {
        zk *= z;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        let term = sign * zeta(k - 1) * zk / k as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn ln_barnes_g_asymptotic(x: f64) -> f64 {
    let z = x - 1.0;
    let lz = z.ln();
    let inv2 = 1.0 / (z * z);
    let mut s = 0.5 * z * z * lz - 0.75 * z * z + 0.5 * z * LN_2PI - lz / 12.0 + ZETA_PRIME_MINUS_ONE;
    let mut pow = inv2;
    for k in 1..BERNOULLI_EVEN.len() {
        let kf = k as f64;
        s += BERNOULLI_EVEN[k] / (4.0 * kf * (kf + 1.0)) * pow;
        pow *= inv2;
        if pow < 1e-40 {
            break;
        }
    }
    s
}

/// log G(x) for x > 0, where G is the Barnes G-function (G(1) = 1,
/// G(x+1) = Γ(x) G(x)).
pub fn log_barnes_g(x: f64) -> Result<f64> {
    check_positive("log_barnes_g", x)?;
    Ok(ln_barnes_g_unchecked(x))
}

fn ln_barnes_g_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        ln_barnes_g_unchecked(x + 1.0) - ln_gamma_unchecked(x)
    } else if x <= 1.5 {
        ln_barnes_g_near_one(x - 1.0)
    } else if x < 20.0 {
        let mut y = x;
        let mut acc = 0.0;
        while y > 1.5 {
            y -= 1.0;
            acc += ln_gamma_unchecked(y);
        }
        ln_barnes_g_near_one(y - 1.0) + acc
    } else {
        ln_barnes_g_asymptotic(x)
    }
}

/// (1/2) Σ_{j=1}^{k} ψ((j+a)/2), evaluated in closed form.
///
/// The constant term is `1 + c/2`; the form with `1 + 2c` is off by 3/2
/// for odd `k`.
pub fn digamma_halfsum(k: u32, a: f64) -> Result<f64> {
    let h = HalfSumClosedForm::new(k, a)?;
    let (kf, c) = (f64::from(h.k), f64::from(h.c));
    let psi = |x: f64| polygamma_unchecked(0, x);
    Ok(((kf - c) / 2.0 + a / 2.0 - 0.5) * psi(a + kf - c - 1.0)
        + c / 2.0 * psi(kf + a - 1.0)
        + 0.25 * psi((kf + a) / 2.0)
        - (a / 2.0 - 0.5) * psi(a + 1.0)
        - 0.25 * psi(a / 2.0 + 1.0)
        - kf / 2.0 * (1.0 + std::f64::consts::LN_2)
        + 1.0
        + c / 2.0)
}

/// (1/4) Σ_{j=1}^{k} ψ'((j+a)/2), evaluated in closed form.
pub fn trigamma_halfsum(k: u32, a: f64) -> Result<f64> {
    let h = HalfSumClosedForm::new(k, a)?;
    let (kf, c) = (f64::from(h.k), f64::from(h.c));
    let psi = |x: f64| polygamma_unchecked(0, x);
    let tri = |x: f64| polygamma_unchecked(1, x);
    let top = kf + a - c + 1.0;
    Ok(0.5 * (psi(top) - psi(a + 1.0)) + a / 2.0 * (tri(top) - tri(a + 1.0))
        - 0.125 * (tri(top / 2.0) - tri((a + 1.0) / 2.0))
        + (kf - c) / 2.0 * tri(top)
        + c / 4.0 * tri((kf + a) / 2.0))
}
