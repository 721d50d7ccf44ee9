use betadt::model::log_volume_moment;
use betadt::sampler::RngStream;
use betadt::tessellation::{
    build_triangulation, empty_power_sphere_violations, estimate_typical_moment, expected_point_count,
    sample_poisson, sample_poisson_with_margin, suggested_h_max, window_for_cells, RegularTriangulation, Window,
};
use std::collections::BTreeSet;

use crate::config::{or_default, ExperimentConfig};
use crate::error::{Error, Result};
use crate::report::{ExperimentReport, Table};

/// Points in the brute-force duality check.
const BRUTE_FORCE_POINTS: f64 = 200.0;

/// Ergodic E Vol^s from one planar tessellation with `budget` expected
/// cells against the closed form (5% tolerance), plus a brute-force
/// duality check on a separate sample of about 200 points.
pub fn run_tessellation_check(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let p = config.params;
    if p.d != 3 {
        return Err(Error::config(format!("the tessellation check is planar, d = 3 (got {})", p.d)));
    }
    let s_grid = or_default(&config.t_grid, || vec![1.0, 2.0]);
    let cells = config.budget as f64;
    let window = window_for_cells(&p, cells)?;
    let set = sample_poisson(&p, &window, suggested_h_max(&p, cells), &mut RngStream::new(config.seed, 0))?;
    let tri = build_triangulation(set)?;
    let mut report = ExperimentReport::new("tessellation", config);
    let mut table = Table::new("ergodic", &["s", "cells_used", "estimate", "closed_form", "relative_error"]);
    let mut worst: f64 = 0.0;
    for &s in &s_grid {
        let est = estimate_typical_moment(&tri, p.nu, s, &window)?;
        let want = log_volume_moment(&p, s)?.exp();
        let err = (est.estimate / want - 1.0).abs();
        worst = worst.max(err);
        table.push(vec![s, est.cells_used as f64, est.estimate, want, err]);
    }
    report.tables.push(table);
    report.verdict(
        8,
        "ergodic moments",
        worst <= 0.05,
        "Palm moment formula against the constructed tessellation",
        format!("(β={}, ν={}): max relative error {worst:.4} over s {s_grid:?}", p.beta, p.nu),
    );

    let small = brute_force_sample(config)?;
    let all: Vec<usize> = (0..small.cells.len()).collect();
    let violations = empty_power_sphere_violations(&small, &all);
    let built: BTreeSet<Vec<usize>> = small
        .cells
        .iter()
        .map(|c| {
            let mut v = c.vertices.clone();
            v.sort_unstable();
            v
        })
        .collect();
    let brute = brute_force_regular_triangles(&small);
    report.verdict(
        8,
        "duality brute force",
        violations == 0 && built == brute,
        "each cell has an empty power circle and the cells are exactly the brute-force triples",
        format!(
            "{} points: {} cells built, {} brute-force triples, {violations} power-circle violations",
            small.input.len(),
            built.len(),
            brute.len()
        ),
    );
    Ok(report)
}

/// A triangulation of about 200 points with no margin, so every input point
/// is part of the brute-force problem.
fn brute_force_sample(config: &ExperimentConfig) -> Result<RegularTriangulation> {
    let p = config.params;
    let h_max = suggested_h_max(&p, BRUTE_FORCE_POINTS);
    let per_area = expected_point_count(&p, &Window::cube(2, 1.0)?, h_max);
    let w = Window::cube(2, (BRUTE_FORCE_POINTS / per_area).sqrt())?;
    let set = sample_poisson_with_margin(&p, &w, h_max, 0.0, &mut RngStream::new(config.seed, 1))?;
    Ok(build_triangulation(set)?)
}

/// Every triple whose power circle contains no other input point, by
/// enumeration over all triples and all points (O(n⁴)).
pub fn brute_force_regular_triangles(tri: &RegularTriangulation) -> BTreeSet<Vec<usize>> {
    let inp = &tri.input;
    let n = inp.len();
    let pos: Vec<[f64; 2]> = (0..n).map(|i| [inp.position(i)[0], inp.position(i)[1]]).collect();
    let h = inp.heights();
    let lift = |q: usize| pos[q][0] * pos[q][0] + pos[q][1] * pos[q][1] + h[q];
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                // Apex z solves 2(v_q − v_i)·z = lift(q) − lift(i) for q = j, k.
                let (a, b) = ([pos[j][0] - pos[i][0], pos[j][1] - pos[i][1]], [pos[k][0] - pos[i][0], pos[k][1] - pos[i][1]]);
                let det = 2.0 * (a[0] * b[1] - a[1] * b[0]);
                if det == 0.0 {
                    continue;
                }
                let (r1, r2) = (lift(j) - lift(i), lift(k) - lift(i));
                let z = [(r1 * b[1] - r2 * a[1]) / det, (a[0] * r2 - b[0] * r1) / det];
                let power = |q: usize| (z[0] - pos[q][0]).powi(2) + (z[1] - pos[q][1]).powi(2) + h[q];
                let k_val = power(i);
                if (0..n).filter(|&q| q != i && q != j && q != k).all(|q| power(q) > k_val) {
                    out.insert(vec![i, j, k]);
                }
            }
        }
    }
    out
}
