//! Small statistics used by the experiments.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::report::Fit;

/// Streaming mean and standard error (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanSe {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanSe {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combines two accumulators (Chan et al.).
    pub fn merge(&mut self, other: &MeanSe) {
        if other.n == 0 {
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn se(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    /// Standardized distance of the mean from `target`.
    pub fn z(&self, target: f64) -> f64 {
        (self.mean - target) / self.se()
    }
}

impl FromIterator<f64> for MeanSe {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = MeanSe::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Weighted least squares of y on x with weights 1/se². The slope standard
/// error is inflated by the residual dispersion when that exceeds 1, and the
/// interval uses Student t with n − 2 degrees of freedom. With `se = None`
/// this is ordinary least squares with the usual residual-based error.
pub fn linear_fit(name: &str, x: &[f64], y: &[f64], se: Option<&[f64]>, level: f64) -> Fit {
    let n = x.len();
    assert_eq!(n, y.len());
    let w: Vec<f64> = match se {
        Some(se) => se.iter().map(|s| 1.0 / (s * s)).collect(),
        None => vec![1.0; n],
    };
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * (x - mx) * (x - mx)).sum();
    let sxy: f64 = (0..n).map(|i| w[i] * (x[i] - mx) * (y[i] - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dof = n.saturating_sub(2);
    let chi2: f64 = (0..n).map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2)).sum();
    let dispersion = if dof == 0 { f64::NAN } else { chi2 / dof as f64 };
    let scale = match se {
        Some(_) => dispersion.max(1.0),
        None => dispersion,
    };
    let slope_se = (scale / sxx).sqrt();
    let q = if dof == 0 {
        f64::NAN
    } else {
        StudentsT::new(0.0, 1.0, dof as f64)
            .expect("valid t distribution")
            .inverse_cdf(0.5 + level / 2.0)
    };
    Fit {
        name: name.to_string(),
        slope,
        slope_se,
        intercept,
        ci_level: level,
        ci_low: slope - q * slope_se,
        ci_high: slope + q * slope_se,
        points: n,
    }
}

/// sup |F_n − Φ| of the sample against the standard normal. Sorts in place.
pub fn ks_normal(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let phi = Normal::standard();
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = phi.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Conservative standard error of a KS statistic from n samples:
/// √(F(1−F)/n) ≤ 0.5/√n at the location of the supremum.
pub fn ks_se(n: usize) -> f64 {
    0.5 / (n as f64).sqrt()
}

/// Kish effective sample size (Σw)²/Σw² from the two sums.
pub fn effective_sample_size(sum: f64, sum_sq: f64) -> f64 {
    if sum_sq > 0.0 {
        sum * sum / sum_sq
    } else {
        0.0
    }
}

/// Whether `values` fall from first to last by more than `k` combined
/// standard errors, with no step rising by more than `k` of its own.
pub fn decreases_beyond_noise(values: &[f64], ses: &[f64], k: f64) -> bool {
    let n = values.len();
    if n < 2 {
        return false;
    }
    let gap = |i: usize, j: usize| (values[i] - values[j]) / (ses[i].hypot(ses[j]));
    gap(0, n - 1) > k && (1..n).all(|i| gap(i - 1, i) > -k)
}
