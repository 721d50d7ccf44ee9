use betadt::model::log_volume_moment;
use betadt::sampler::CellSampler;

use crate::config::{or_default, ExperimentConfig};
use crate::error::Result;
use crate::parallel::run_streams;
use crate::report::{ExperimentReport, Table};
use crate::stats::MeanSe;

/// Monte Carlo E Vol^s against the closed form, for s on the t-grid
/// (default {0.5, 1, 2}). Verdict: every |z| < 4.
pub fn run_moment_check(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let s_grid = or_default(&config.t_grid, || vec![0.5, 1.0, 2.0]);
    let want: Vec<f64> = s_grid
        .iter()
        .map(|&s| log_volume_moment(&config.params, s).map(f64::exp))
        .collect::<betadt::Result<_>>()?;
    let sampler = CellSampler::new(&config.params)?;
    let parts = run_streams(config.seed, 0, config.budget, |rng, n| {
        let mut acc = vec![MeanSe::default(); s_grid.len()];
        let mut buf = Vec::new();
        for _ in 0..n {
            let (lv, _) = sampler.sample_log_volume(rng, &mut buf)?;
            for (m, &s) in acc.iter_mut().zip(&s_grid) {
                m.push((s * lv).exp());
            }
        }
        Ok(acc)
    })?;
    let mut acc = vec![MeanSe::default(); s_grid.len()];
    for part in &parts {
        for (a, p) in acc.iter_mut().zip(part) {
            a.merge(p);
        }
    }
    let mut report = ExperimentReport::new("moments", config);
    let mut table = Table::new("moments", &["s", "closed_form", "mc_mean", "mc_se", "z"]);
    let mut worst: f64 = 0.0;
    for ((&s, &w), m) in s_grid.iter().zip(&want).zip(&acc) {
        let z = m.z(w);
        worst = worst.max(z.abs());
        table.push(vec![s, w, m.mean(), m.se(), z]);
    }
    report.tables.push(table);
    let p = config.params;
    report.verdict(
        1,
        "moment identity",
        worst < 4.0,
        "E Vol^s equals the closed-form moment",
        format!("(d={}, β={}, ν={}, γ={}): max |z| {worst:.2} over s {s_grid:?}", p.d, p.beta, p.nu, p.gamma),
    );
    Ok(report)
}
