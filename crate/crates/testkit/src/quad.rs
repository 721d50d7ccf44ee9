use quadrature::double_exponential;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{FRAC_PI_2, PI};

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    double_exponential::integrate(f, a, b, tol).integral
}

/// ∫₀^∞ f, through r = t / (1 − t).
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let u = 1.0 - t;
            f(t / u) / (u * u)
        },
        0.0,
        1.0,
        tol,
    )
}

/// ∫₀^∞ r^k e^{−rate·r^c} dr.
pub fn radial_integral(k: f64, rate: f64, c: f64) -> f64 {
    integrate_half_line(
        |r| {
            if r <= 0.0 {
                0.0
            } else {
                (k * r.ln() - rate * r.powf(c)).exp()
            }
        },
        1e-14,
    )
}

/// ∫∫_{[−1,1]²} |y₁ − y₂|^p (1 − y₁²)^β (1 − y₂²)^β dy₁ dy₂, with y = sin θ
/// so that the weight becomes cos^{2β+1} θ, and the inner integral split at
/// the diagonal.
pub fn beta_pair_integral(beta: f64, p: f64) -> f64 {
    let e = 2.0 * beta + 1.0;
    let w = |t: f64| t.cos().max(0.0).powf(e);
    let inner = |t2: f64| {
        let y2 = t2.sin();
        let g = |t1: f64| w(t1) * (t1.sin() - y2).abs().powf(p);
        integrate(&g, -FRAC_PI_2, t2, 1e-13) + integrate(&g, t2, FRAC_PI_2, 1e-13)
    };
    integrate(|t2| w(t2) * inner(t2), -FRAC_PI_2, FRAC_PI_2, 1e-12)
}

/// The radius rate for the planar case, γΓ(β+2)/(√π Γ(β+5/2)).
pub fn planar_radius_rate(beta: f64, gamma: f64) -> f64 {
    gamma * (ln_gamma(beta + 2.0) - ln_gamma(beta + 2.5)).exp() / PI.sqrt()
}

/// log E Vol^s of the weighted typical cell at d = 2 by quadrature:
/// Vol = R·|Y₁ − Y₂| with R ∝ r^{4β+4+ν} e^{−rate·r^{3+2β}} and the pair
/// tilted by |y₁ − y₂|^{ν+1}.
pub fn planar_log_volume_moment(beta: f64, nu: f64, gamma: f64, s: f64) -> f64 {
    let (k, c) = (4.0 * beta + 4.0 + nu, 3.0 + 2.0 * beta);
    let rate = planar_radius_rate(beta, gamma);
    let radial = radial_integral(k + s, rate, c).ln() - radial_integral(k, rate, c).ln();
    let pair = beta_pair_integral(beta, nu + 1.0 + s).ln() - beta_pair_integral(beta, nu + 1.0).ln();
    radial + pair
}

/// log of the unnormalized total mass of the planar cell density
/// (everything except the constant α).
pub fn planar_log_mass(beta: f64, nu: f64, gamma: f64) -> f64 {
    let (k, c) = (4.0 * beta + 4.0 + nu, 3.0 + 2.0 * beta);
    let rate = planar_radius_rate(beta, gamma);
    radial_integral(k, rate, c).ln() + beta_pair_integral(beta, nu + 1.0).ln()
}
