use betadt::geometry::log_tau;
use betadt::model::*;
use betadt::sampler::*;
use betadt_testkit::quad;
use betadt_testkit::stats::{correlation, ks_statistic, MeanSe};
use statrs::distribution::{ContinuousCDF, Gamma};
use statrs::function::beta::beta_reg;

fn p(d: u32, beta: f64, nu: f64, gamma: f64) -> ModelParams {
    ModelParams::new(d, beta, nu, gamma).unwrap()
}

/// E R^k from the sampler against the radial integral done by quadrature.
#[test]
fn radius_moments() {
    for (i, params) in [p(2, 0.0, 0.0, 1.0), p(3, 1.0, -1.0, 2.0), p(6, -0.5, 1.0, 0.5)].iter().enumerate() {
        let (a, c) = params.radius_exponents();
        let rate = radius_rate(params);
        let s = CellSampler::new(params).unwrap();
        let mut rng = RngStream::new(100, i as u64);
        let r: Vec<f64> = (0..100_000).map(|_| s.sample_radius(&mut rng)).collect();
        for k in [1.0, 2.0, 3.0] {
            let want = quad::radial_integral(a - 1.0 + k, rate, c) / quad::radial_integral(a - 1.0, rate, c);
            assert!((log_radius_moment(params, k).exp() / want - 1.0).abs() < 1e-8);
            let m: MeanSe = r.iter().map(|x| x.powf(k)).collect();
            assert!(m.z(want).abs() < 4.0, "{params:?} k={k}: {} ± {} vs {want}", m.mean(), m.se());
        }
        // rate·R^c is Gamma(A/c, 1).
        let g = Gamma::new(a / c, 1.0).unwrap();
        let ks = ks_statistic(&r.iter().map(|x| rate * x.powf(c)).collect::<Vec<_>>(), |x| g.cdf(x));
        assert!(ks < 0.006, "{params:?}: KS {ks}");
    }
}

/// At d = 2 a beta point is a scalar with P(Y ≤ y) = ½ + ½ sgn(y) I_{y²}(½, β+1).
#[test]
fn planar_beta_points_ks() {
    for (i, beta) in [-0.5, 0.0, 2.0].into_iter().enumerate() {
        let s = CellSampler::new(&p(2, beta, 0.0, 1.0)).unwrap();
        let mut rng = RngStream::new(200, i as u64);
        let y: Vec<f64> = (0..100_000).map(|_| s.sample_beta_point(&mut rng)[0]).collect();
        let cdf = |x: f64| {
            let x = x.clamp(-1.0, 1.0);
            0.5 + 0.5 * x.signum() * beta_reg(0.5, beta + 1.0, x * x)
        };
        let ks = ks_statistic(&y, cdf);
        assert!(ks <= 0.005, "β={beta}: KS {ks}");
    }
}

#[test]
fn beta_point_norm_and_mean() {
    for (i, (d, beta)) in [(3, 0.0), (5, 1.5), (10, -0.5)].into_iter().enumerate() {
        let s = CellSampler::new(&p(d, beta, 0.0, 1.0)).unwrap();
        let mut rng = RngStream::new(300, i as u64);
        let dim = (d - 1) as usize;
        let mut norm = MeanSe::default();
        let mut coord = vec![MeanSe::default(); dim];
        for _ in 0..50_000 {
            let y = s.sample_beta_point(&mut rng);
            norm.push(y.iter().map(|x| x * x).sum());
            for (m, x) in coord.iter_mut().zip(&y) {
                m.push(*x);
            }
        }
        let want = f64::from(d - 1) / (f64::from(d) + 2.0 * beta + 1.0);
        assert!(norm.z(want).abs() < 4.0, "d={d}: {} vs {want}", norm.mean());
        assert!(coord.iter().all(|m| m.z(0.0).abs() < 4.5));
    }
}

/// Weighted pair at d = 2: E|Y₁ − Y₂| under the tilt |Y₁ − Y₂|^{ν+1} is a
/// ratio of pair integrals.
#[test]
fn planar_weighted_pair_mean() {
    for (i, (beta, nu)) in [(0.0, 0.0), (1.0, 1.0), (-0.5, -1.0)].into_iter().enumerate() {
        let s = CellSampler::new(&p(2, beta, nu, 1.0)).unwrap();
        let mut rng = RngStream::new(400, i as u64);
        let m: MeanSe = (0..100_000)
            .map(|_| {
                let (y, _) = s.sample_weighted_points(&mut rng).unwrap();
                (y[0][0] - y[1][0]).abs()
            })
            .collect();
        let want = quad::beta_pair_integral(beta, nu + 2.0) / quad::beta_pair_integral(beta, nu + 1.0);
        assert!(m.z(want).abs() < 4.0, "β={beta} ν={nu}: {} ± {} vs {want}", m.mean(), m.se());
    }
}

#[test]
fn acceptance_matches_empirical_rate() {
    for (i, params) in [p(2, 0.0, 0.0, 1.0), p(3, 0.0, 0.0, 1.0), p(4, 1.0, 1.0, 1.0)].iter().enumerate() {
        let s = CellSampler::new(params).unwrap();
        let mut rng = RngStream::new(500, i as u64);
        let n = 20_000;
        let attempts: u64 = (0..n).map(|_| s.sample_weighted_points(&mut rng).unwrap().1).sum();
        let rate = acceptance_rate(params).unwrap();
        let emp = n as f64 / attempts as f64;
        // Attempts per draw are geometric: sd of the mean is √(1−q)/q/√n.
        let se = (1.0 - rate).sqrt() / rate / (n as f64).sqrt();
        assert!((1.0 / emp - 1.0 / rate).abs() < 4.0 * se, "{params:?}: {emp} vs {rate}");
    }
    // d = 2 cross-check with quadrature: E|Y₁−Y₂| / (τ · (pair mass)) with τ = 2.
    let want = quad::beta_pair_integral(0.0, 1.0) / quad::beta_pair_integral(0.0, 0.0) / log_tau(1).exp();
    assert!((acceptance_rate(&p(2, 0.0, 0.0, 1.0)).unwrap() / want - 1.0).abs() < 1e-8);
}

#[test]
fn volume_moments_match_closed_form() {
    let cases = [p(2, 0.0, 0.0, 1.0), p(3, 0.0, 0.0, 1.0), p(4, 0.5, -1.0, 2.0), p(5, 2.0, 1.0, 1.0)];
    for (i, params) in cases.iter().enumerate() {
        let s = CellSampler::new(params).unwrap();
        let mut rng = RngStream::new(600, i as u64);
        let mut buf = Vec::new();
        let lv: Vec<f64> = (0..50_000).map(|_| s.sample_log_volume(&mut rng, &mut buf).unwrap().0).collect();
        for t in [0.5, 1.0] {
            let m: MeanSe = lv.iter().map(|x| (t * x).exp()).collect();
            let want = log_volume_moment(params, t).unwrap().exp();
            assert!(m.z(want).abs() < 4.0, "{params:?} t={t}: {} ± {} vs {want}", m.mean(), m.se());
        }
        let m: MeanSe = lv.iter().copied().collect();
        let want = cumulant(params, 1).unwrap().value;
        assert!(m.z(want).abs() < 4.0, "{params:?}: mean log vol {} vs {want}", m.mean());
    }
}

/// Radius and shape are independent.
#[test]
fn radius_and_shape_uncorrelated() {
    let s = CellSampler::new(&p(4, 0.0, 0.0, 1.0)).unwrap();
    let mut rng = RngStream::new(700, 0);
    let (mut lr, mut ld) = (Vec::new(), Vec::new());
    for _ in 0..20_000 {
        let c = s.sample_cell(&mut rng).unwrap();
        lr.push(c.radius.ln());
        ld.push(c.log_volume - 3.0 * c.radius.ln());
    }
    let r = correlation(&lr, &ld);
    assert!(r.abs() < 4.0 / (lr.len() as f64).sqrt(), "corr {r}");
}

#[test]
fn free_functions_follow_the_stream() {
    let params = p(3, 0.0, 0.0, 1.0);
    let s = CellSampler::new(&params).unwrap();
    let a = sample_cell(&params, &mut RngStream::new(5, 9)).unwrap();
    let b = s.sample_cell(&mut RngStream::new(5, 9)).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        sample_radius(&params, &mut RngStream::new(1, 1)).unwrap(),
        s.sample_radius(&mut RngStream::new(1, 1))
    );
}
