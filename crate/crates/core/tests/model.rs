use betadt::model::*;
use betadt::specfun::{digamma, log_barnes_g, log_gamma, trigamma, EULER_GAMMA};
use betadt::Error;
use betadt_testkit::quad;
use proptest::prelude::*;
use std::f64::consts::PI;

fn p(d: u32, beta: f64, nu: f64, gamma: f64) -> ModelParams {
    ModelParams::new(d, beta, nu, gamma).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn validation_reports_every_problem() {
    assert!(ModelParams::new(3, 0.0, 0.0, 1.0).is_ok());
    let msg = ModelParams::new(2, -1.0, 0.0, 1.0).unwrap_err().to_string();
    assert!(msg.contains("beta must exceed −1"), "{msg}");
    let msg = ModelParams::new(3, 0.0, -1.5, 1.0).unwrap_err().to_string();
    assert!(msg.contains("nu must be ≥ −1"), "{msg}");
    match ModelParams::new(1, -2.0, -3.0, 0.0) {
        Err(Error::InvalidParams(v)) => assert_eq!(v.len(), 4),
        other => panic!("{other:?}"),
    }
}

#[test]
fn constants() {
    assert!(rel(m_const(&p(2, 0.0, 0.0, 1.0)), 1.0 / PI) < 1e-14);
    assert!(rel(m_const(&p(3, 5.0, 0.0, 1.0)), 0.25) < 1e-14);
    assert!(rel(m_const(&p(4, 0.0, 0.0, 1.0)), 2.0 / (3.0 * PI)) < 1e-14);
    assert!(rel(c_const(&p(2, 0.0, 0.0, 1.0)), 1.0 / PI) < 1e-14);
    assert!(rel(c_const(&p(2, 1.0, 0.0, 1.0)), 2.0 / PI) < 1e-14);
    let want = (log_gamma(3.5).unwrap() - 2.0 * PI.ln() - log_gamma(1.5).unwrap()).exp();
    assert!(rel(c_const(&p(4, 0.5, 0.0, 1.0)), want) < 1e-14);
    // d = 3, β = 0: Γ(5/2) / (√π Γ(3)) = 3/8.
    assert!(rel(radius_rate(&p(3, 0.0, 0.0, 1.0)), 0.375) < 1e-14);
}

/// The displayed α recomputed term by term with an independent log-gamma.
#[test]
fn alpha_term_by_term_planar() {
    use statrs::function::gamma::ln_gamma as lg;
    for (beta, nu, gamma) in [(0.0, 0.0, 1.0), (1.0, -1.0, 2.0), (-0.5, 1.0, 1.0), (2.5, 0.5, 0.7)] {
        let d = 2.0;
        let q = d + 2.0 * beta + 1.0;
        let shape = d + (nu - 1.0) * (d - 1.0) / q;
        let rate = gamma * (lg(d / 2.0 + beta + 1.0) - lg((d + 1.0) / 2.0 + beta + 1.0)).exp() / PI.sqrt();
        let want = -PI.ln() + (nu + 1.0) * lg(d) + (d + 1.0 + 2.0 * beta).ln()
            + lg((d * (d + nu + 2.0 * beta) - nu + 1.0) / 2.0)
            - lg(d * (d + nu + 2.0 * beta) / 2.0 + 1.0)
            - lg(shape)
            + shape * rate.ln()
            + d * (lg((d + nu) / 2.0 + beta + 1.0) - lg(beta + 1.0))
            + lg(0.5) - lg((1.0 + nu + 1.0) / 2.0);
        let got = log_alpha(&p(2, beta, nu, gamma));
        assert!((got - want).abs() < 1e-12, "β={beta} ν={nu}: {got} vs {want}");
    }
}

/// α normalizes the planar cell density (radius integral times the tilted
/// pair integral, both by quadrature).
#[test]
fn alpha_normalizes_planar_density() {
    for (beta, nu, gamma) in [(0.0, 0.0, 1.0), (1.0, -1.0, 2.0), (-0.5, 1.0, 1.0), (0.5, 0.5, 1.5)] {
        let total = log_alpha(&p(2, beta, nu, gamma)) + quad::planar_log_mass(beta, nu, gamma);
        assert!(total.abs() < 1e-8, "β={beta} ν={nu}: log mass {total}");
    }
}

#[test]
fn alpha_ratio_is_a_moment() {
    for params in [p(3, 0.0, 0.0, 1.0), p(5, 1.5, -1.0, 2.0), p(8, -0.5, 1.0, 0.3)] {
        for s in [0.5, 1.0, 2.5] {
            let shifted = ModelParams { nu: params.nu + s, ..params };
            let lhs = log_alpha(&params) - log_alpha(&shifted);
            let rhs = log_volume_moment(&params, s).unwrap();
            assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0), "{params:?} s={s}: {lhs} vs {rhs}");
        }
    }
}

/// Twelve (β, ν, s) combinations at d = 2 against quadrature of the product
/// representation.
#[test]
fn planar_moments_match_quadrature() {
    let cases = [
        (0.0, 0.0, 1.0),
        (0.0, 0.0, 2.0),
        (0.0, -1.0, 0.5),
        (0.0, 1.0, 1.0),
        (1.0, 0.0, 0.5),
        (1.0, -1.0, 2.0),
        (1.0, 1.0, 1.5),
        (-0.5, 0.0, 1.0),
        (-0.5, -1.0, 1.0),
        (-0.5, 1.0, 0.5),
        (2.5, 0.5, 3.0),
        (0.3, -0.7, -0.2),
    ];
    for (beta, nu, s) in cases {
        for gamma in [1.0, 2.0] {
            let got = log_volume_moment(&p(2, beta, nu, gamma), s).unwrap();
            let want = quad::planar_log_volume_moment(beta, nu, gamma, s);
            assert!(rel(got.exp(), want.exp()) < 1e-8, "β={beta} ν={nu} s={s} γ={gamma}: {got} vs {want}");
        }
    }
}

#[test]
fn moment_domain() {
    let params = p(3, 0.0, 0.0, 1.0);
    assert_eq!(log_volume_moment(&params, 0.0).unwrap(), 0.0);
    assert!(matches!(log_volume_moment(&params, -1.5), Err(Error::Domain { .. })));
    assert!(log_volume_moment(&params, -0.9).is_ok());
    assert!(log_volume_moment(&params, -1.0).is_ok());
    // At ν = −1 the boundary is s = 0, where every argument is positive.
    assert!(log_volume_moment(&p(3, 0.0, -1.0, 1.0), -0.5).is_err());
}

#[test]
fn gamma_scaling_law() {
    for (d, beta, nu) in [(2, 0.0, 0.0), (3, 1.0, -1.0), (7, -0.5, 2.0), (40, 3.0, 0.5)] {
        for s in [-0.5, 0.5, 1.0, 3.0].into_iter().filter(|&s| s > -nu - 1.0) {
            let q = f64::from(d) + 2.0 * beta + 1.0;
            let a = log_volume_moment(&p(d, beta, nu, 2.0), s).unwrap();
            let b = log_volume_moment(&p(d, beta, nu, 1.0), s).unwrap();
            let want = -s * f64::from(d - 1) / q * 2f64.ln();
            assert!((a - b - want).abs() < 1e-12 * b.abs().max(1.0));
        }
    }
}

fn fd_derivative(params: &ModelParams, m: u32) -> f64 {
    // Larger steps for the higher orders keep cancellation error in check.
    let h = [1e-3, 1e-3, 4e-3, 1e-2][m as usize - 1];
    let f = |k: i32| log_volume_moment(params, f64::from(k) * h).unwrap();
    if params.nu == -1.0 {
        // s = 0 is the edge of the domain: one-sided stencils.
        return match m {
            1 => (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / (12.0 * h),
            2 => (35.0 * f(0) - 104.0 * f(1) + 114.0 * f(2) - 56.0 * f(3) + 11.0 * f(4)) / (12.0 * h * h),
            3 => (-5.0 * f(0) + 18.0 * f(1) - 24.0 * f(2) + 14.0 * f(3) - 3.0 * f(4)) / (2.0 * h.powi(3)),
            4 => (3.0 * f(0) - 14.0 * f(1) + 26.0 * f(2) - 24.0 * f(3) + 11.0 * f(4) - 2.0 * f(5)) / h.powi(4),
            _ => unreachable!(),
        };
    }
    match m {
        1 => (8.0 * (f(1) - f(-1)) - (f(2) - f(-2))) / (12.0 * h),
        2 => (-f(2) + 16.0 * f(1) - 30.0 * f(0) + 16.0 * f(-1) - f(-2)) / (12.0 * h * h),
        3 => (-f(3) + 8.0 * f(2) - 13.0 * f(1) + 13.0 * f(-1) - 8.0 * f(-2) + f(-3)) / (8.0 * h.powi(3)),
        4 => (-f(3) + 12.0 * f(2) - 39.0 * f(1) + 56.0 * f(0) - 39.0 * f(-1) + 12.0 * f(-2) - f(-3))
            / (6.0 * h.powi(4)),
        _ => unreachable!(),
    }
}

/// Grid shared by the cumulant checks.
fn cumulant_grid() -> Vec<ModelParams> {
    let mut v = Vec::new();
    for d in [2, 3, 4, 6, 10, 25, 100] {
        for beta in [-0.5, 0.0, 1.0, 4.0] {
            for nu in [-1.0, 0.0, 1.0, 3.0] {
                if f64::from(d) + 2.0 * beta + nu > 0.0 {
                    v.push(p(d, beta, nu, 1.0));
                }
            }
        }
    }
    v
}

#[test]
fn cumulants_match_finite_differences() {
    for params in cumulant_grid() {
        for m in 1..=4 {
            let c = cumulant(&params, m).unwrap().value;
            let fd = fd_derivative(&params, m);
            let scale = c.abs().max(if m <= 2 { 1e-3 } else { 1e-2 });
            // Near the polygamma pole the O(h²) stencil error dominates.
            let near_pole = f64::from(params.d) + 2.0 * params.beta + params.nu < 2.0;
            let tol = if params.nu == -1.0 {
                [1e-8, 1e-5, 1e-2, 2e-2][m as usize - 1]
            } else if near_pole && m >= 3 {
                1e-2
            } else {
                [1e-9, 1e-6, 1e-3, 1e-3][m as usize - 1]
            };
            assert!((c - fd).abs() <= tol * scale.max(1.0), "{params:?} m={m}: {c} vs {fd}");
        }
        assert!(cumulant(&params, 2).unwrap().value > 0.0);
    }
}

#[test]
fn cumulant_errors() {
    let params = p(3, 0.0, 0.0, 1.0);
    assert!(matches!(cumulant(&params, 0), Err(Error::UnsupportedOrder { .. })));
    assert!(matches!(cumulant(&params, 11), Err(Error::UnsupportedOrder { .. })));
    // (d + 2β + ν)/2 ≤ 0 leaves the polygamma domain.
    assert!(matches!(cumulant(&p(2, -0.9, -1.0, 1.0), 2), Err(Error::Domain { .. })));
}

#[test]
fn cumulant_bounds_hold() {
    for d in [3, 4, 5, 6, 8, 12, 20, 50, 200, 1000] {
        for beta in [-0.9, -0.5, 0.0, 0.5, 1.0, 3.0, 10.0] {
            for nu in [-1.0, -0.5, 0.0, 1.0, 2.0, 5.0] {
                let params = p(d, beta, nu, 1.0);
                for m in 3..=8 {
                    let Ok(c) = cumulant(&params, m) else { continue };
                    if let Some(b) = c.bound {
                        assert!(c.value.abs() <= b, "{params:?} m={m}");
                    }
                    if let Some(b) = general_cumulant_bound(&params, m) {
                        assert!(c.value.abs() <= b, "{params:?} m={m} general");
                    }
                }
            }
        }
    }
    assert!(fixed_order_bound(&p(4, 0.0, 0.0, 1.0), 3).is_none());
    assert!(fixed_order_bound(&p(5, 0.0, 0.0, 1.0), 2).is_none());
}

#[test]
fn c_nu_values() {
    let want = EULER_GAMMA / 2.0 + PI * PI / 16.0;
    assert!((c_nu(-1.0).unwrap() - want).abs() < 1e-13);
    let want = -0.5 * digamma(2.0).unwrap() - 0.5 * trigamma(2.0).unwrap() + 0.125 * trigamma(1.0).unwrap();
    assert!((c_nu(0.0).unwrap() - want).abs() < 1e-13);
    assert!(c_nu(-1.5).is_err());
    for i in 0..100 {
        assert!(c_nu(-1.0 + 0.37 * f64::from(i)).unwrap().is_finite());
    }
}

#[test]
fn mean_variance_asymptotics_hold() {
    for nu in [-1.0, 0.0, 1.0] {
        let params = p(10_000, 0.0, nu, 1.0);
        let (_, var) = mean_variance_asymptotic(&params).unwrap();
        assert!((cumulant(&params, 2).unwrap().value - var).abs() <= 0.05);
    }
    let gaps: Vec<f64> = [1_000, 10_000, 100_000]
        .iter()
        .map(|&d| {
            let params = p(d, 0.0, 0.0, 1.0);
            (cumulant(&params, 1).unwrap().value - mean_variance_asymptotic(&params).unwrap().0).abs()
        })
        .collect();
    assert!(gaps[1] <= gaps[0] * 1.01 + 1e-9 && gaps[2] <= gaps[1] * 1.01 + 1e-9, "{gaps:?}");
    let params = p(1000, 0.0, 0.0, 1.0);
    let (_, var) = mean_variance_asymptotic(&params).unwrap();
    assert!((cumulant(&params, 2).unwrap().value - var).abs() <= 0.05);
}

#[test]
fn berry_esseen() {
    assert!((berry_esseen_epsilon(1f64.exp(), -1.0, -1.0).unwrap() - 2.0).abs() < 1e-14);
    assert!((berry_esseen_epsilon(4f64.exp(), 0.0, 0.0).unwrap() - 1.0).abs() < 1e-14);
    let eps: Vec<f64> = [3, 10, 100].iter().map(|&d| berry_esseen_scale(&p(d, 0.0, 0.0, 1.0)).unwrap()).collect();
    assert!(eps[0] > eps[1] && eps[1] > eps[2]);
}

#[test]
fn mod_gaussian_pieces() {
    let d = 2.0 * (2f64).exp();
    let f = mod_gaussian_frame(&p(15, 0.0, 0.0, 1.0), FrameConvention::Stated).unwrap();
    assert!((0.5 * (d / 2.0).ln() - 1.0).abs() < 1e-15);
    assert_eq!(f.strip_lower, -1.0);
    let f = mod_gaussian_frame(&p(4, 0.0, 0.0, 1.0), FrameConvention::Stated).unwrap();
    let want = 2.25 * 2f64.ln() - 3.0 + (PI / 4.0).ln() - 3.0 * 4f64.ln() / 5.0 - 6f64.ln();
    assert!((f.centering - want).abs() < 1e-13);
    assert_eq!(mod_gaussian_limit(0.0, 0.0).unwrap(), 0.0);
    assert!(mod_gaussian_limit(0.0, 1.0).unwrap().abs() < 1e-13);
    let want = log_barnes_g(1.5).unwrap() - log_barnes_g(2.5).unwrap();
    assert!((mod_gaussian_limit(0.0, 2.0).unwrap() - want).abs() < 1e-13);
    assert!((want + log_gamma(1.5).unwrap()).abs() < 1e-13);
    assert!(mod_gaussian_limit(0.0, -1.0).is_err());
}

#[test]
fn mod_gaussian_residual_decays() {
    for nu in [-1.0, 0.0] {
        for beta in [0.0, 1.0] {
            // Only t inside the strip (−ν−1, ∞).
            for t in [-0.5, 0.25, 0.5, 1.0, 2.0].into_iter().filter(|&t| t > -nu - 1.0) {
                let r: Vec<f64> = [100, 1000, 10_000]
                    .iter()
                    .map(|&d| mod_gaussian_residual(&p(d, beta, nu, 1.0), t).unwrap().abs())
                    .collect();
                assert!(r[0] >= r[1] && r[1] >= r[2] && r[2] <= 0.02, "ν={nu} β={beta} t={t}: {r:?}");
            }
            if nu > -1.0 {
                assert_eq!(mod_gaussian_residual(&p(1000, beta, nu, 1.0), 0.0).unwrap(), 0.0);
            }
        }
    }
}

/// In the stated frame the residual settles at (½ + 4 log 2)t + t²/4.
#[test]
fn stated_frame_offset() {
    let params = p(100_000, 0.0, 0.0, 1.0);
    for t in [0.5, 1.0, 2.0] {
        let r = mod_gaussian_residual_with(&params, t, FrameConvention::Stated).unwrap();
        let offset = (0.5 + 4.0 * 2f64.ln()) * t + t * t / 4.0;
        assert!((r - offset).abs() < 1e-3, "t={t}: {r} vs {offset}");
    }
}

#[test]
fn ldp_limit() {
    let params = p(1_000_000, 0.0, 0.0, 1.0);
    assert_eq!(ldp_scaled_cgf(&params, 0.0).unwrap(), 0.0);
    for t in [-1.0, -0.5, 0.5, 1.0, 1.5] {
        let v = ldp_scaled_cgf(&params, t).unwrap();
        assert!((v - t * t / 2.0).abs() <= 0.05, "t={t}: {v}");
    }
    assert!(ldp_scaled_cgf(&params, -1.0 - 1e-9).is_err());
    assert!(ldp_scaled_cgf(&p(1000, 0.0, -1.0, 1.0), -0.5).is_err());
    assert!(ldp_scaled_cgf(&p(2, 0.0, 0.0, 1.0), 0.5).is_err());
    // Convex along t at a few dimensions.
    for d in [10, 1000, 100_000] {
        let f: Vec<f64> = (0..=20)
            .map(|i| ldp_scaled_cgf(&p(d, 0.0, 0.0, 1.0), -0.9 + 0.12 * f64::from(i)).unwrap())
            .collect();
        assert!(f.windows(3).all(|w| w[0] + w[2] - 2.0 * w[1] >= -1e-10));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn log_moment_is_convex(d in 2u32..60, beta in -0.9f64..5.0, nu in -1.0f64..4.0, s in -0.5f64..4.0) {
        let params = p(d, beta, nu, 1.0);
        let s = s.max(-nu - 0.9);
        let h = 0.05;
        let f = |x: f64| log_volume_moment(&params, x).unwrap();
        prop_assert!(f(s + h) + f(s - h) - 2.0 * f(s) >= -1e-8);
    }

    #[test]
    fn alpha_is_finite(d in 2u32..200, beta in -0.9f64..10.0, nu in -1.0f64..10.0) {
        prop_assert!(log_alpha(&p(d, beta, nu, 1.0)).is_finite());
    }
}
