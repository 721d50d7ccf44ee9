use betadt::model::*;
use betadt::sampler::RngStream;
use betadt::tessellation::*;
use betadt::Error;
use betadt_testkit::stats::{ks_statistic, MeanSe};
use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashMap};

fn planar(beta: f64, nu: f64) -> ModelParams {
    ModelParams::new(3, beta, nu, 1.0).unwrap()
}

fn line(beta: f64) -> ModelParams {
    ModelParams::new(2, beta, 0.0, 1.0).unwrap()
}

fn explicit(params: ModelParams, pos: &[[f64; 2]], h: &[f64]) -> WeightedPointSet {
    let window = Window::cube(2, 1.0).unwrap();
    WeightedPointSet::from_parts(params, window, 0.0, 1.0, pos.concat(), h.to_vec()).unwrap()
}

fn triples(tri: &RegularTriangulation) -> BTreeSet<Vec<usize>> {
    tri.cells
        .iter()
        .map(|c| {
            let mut v = c.vertices.clone();
            v.sort_unstable();
            v
        })
        .collect()
}

/// Every triple whose power circle no other point undercuts, found by
/// solving for the apex directly.
fn brute_force_planar(pos: &[[f64; 2]], h: &[f64]) -> BTreeSet<Vec<usize>> {
    let n = pos.len();
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let row = |q: usize| {
                    (
                        [2.0 * (pos[q][0] - pos[i][0]), 2.0 * (pos[q][1] - pos[i][1])],
                        pos[q][0].powi(2) + pos[q][1].powi(2) + h[q] - pos[i][0].powi(2) - pos[i][1].powi(2) - h[i],
                    )
                };
                let ((a, r1), (b, r2)) = (row(j), row(k));
                let m = Matrix2::new(a[0], a[1], b[0], b[1]);
                let Some(z) = m.lu().solve(&Vector2::new(r1, r2)) else {
                    continue;
                };
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

#[test]
fn planar_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for trial in 0..4 {
        let n = 60;
        let pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let spread = [0.0, 1e-3, 0.02, 0.1][trial];
        let h: Vec<f64> = (0..n).map(|_| spread * rng.random::<f64>()).collect();
        let tri = build_triangulation(explicit(planar(0.0, 0.0), &pos, &h)).unwrap();
        assert_eq!(triples(&tri), brute_force_planar(&pos, &h), "trial {trial}");
    }
}

#[test]
fn line_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 200;
    let x: Vec<f64> = (0..n).map(|_| 10.0 * rng.random::<f64>()).collect();
    let h: Vec<f64> = (0..n).map(|_| 0.05 * rng.random::<f64>()).collect();
    let set = WeightedPointSet::from_parts(line(0.0), Window::cube(1, 10.0).unwrap(), 0.0, 1.0, x.clone(), h.clone())
        .unwrap();
    let tri = build_triangulation(set).unwrap();
    let mut want = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if x[i] >= x[j] {
                continue;
            }
            // Lifted segment (x, x² + h) from i to j lies below every other lift.
            let f = |q: usize| x[q] * x[q] + h[q];
            let slope = (f(j) - f(i)) / (x[j] - x[i]);
            if (0..n).filter(|&q| q != i && q != j).all(|q| f(q) > f(i) + slope * (x[q] - x[i])) {
                want.insert(vec![i.min(j), i.max(j)]);
            }
        }
    }
    assert_eq!(triples(&tri), want);
}

#[test]
fn equal_heights_give_delaunay() {
    let params = planar(0.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 500;
    let pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    let tri = build_triangulation(explicit(params, &pos, &vec![0.25; n])).unwrap();
    for c in &tri.cells {
        // Apex is the circumcentre.
        let k = c.power - 0.25;
        for q in 0..n {
            let d2 = (c.apex[0] - pos[q][0]).powi(2) + (c.apex[1] - pos[q][1]).powi(2);
            assert!(d2 >= k * (1.0 - 1e-9));
        }
    }
    // Every point is a vertex, so Euler gives 2n − 2 − hull triangles.
    let hull = convex_hull_len(&pos);
    assert_eq!(tri.cells.len(), 2 * n - 2 - hull);
}

fn convex_hull(pos: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p = pos.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

fn convex_hull_len(pos: &[[f64; 2]]) -> usize {
    convex_hull(pos).len()
}

#[test]
fn heavy_point_is_redundant() {
    let pos = [[0.0, 0.0], [1.0, 0.0], [0.1, 1.0], [0.45, 0.4]];
    let tri = build_triangulation(explicit(planar(0.0, 0.0), &pos, &[0.0, 0.0, 0.0, 5.0])).unwrap();
    assert_eq!(tri.cells.len(), 1);
    let tri = build_triangulation(explicit(planar(0.0, 0.0), &pos, &[0.0; 4])).unwrap();
    assert_eq!(tri.cells.len(), 3);
}

#[test]
fn cells_tile_the_hull_of_vertices() {
    let params = planar(1.0, 0.0);
    let w = window_for_cells(&params, 300.0).unwrap();
    let set = sample_poisson(&params, &w, suggested_h_max(&params, 3000.0), &mut RngStream::new(13, 0)).unwrap();
    let tri = build_triangulation(set).unwrap();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for c in &tri.cells {
        let v = &c.vertices;
        for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
            *edges.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    assert!(edges.values().all(|&m| m == 1 || m == 2));
    let used: BTreeSet<usize> = tri.cells.iter().flat_map(|c| c.vertices.clone()).collect();
    let pts: Vec<[f64; 2]> = used.iter().map(|&i| [tri.input.position(i)[0], tri.input.position(i)[1]]).collect();
    let hull = convex_hull(&pts);
    let boundary = edges.values().filter(|&&m| m == 1).count();
    assert_eq!(boundary, hull.len());
    let hull_area: f64 = (0..hull.len())
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
            0.5 * (a[0] * b[1] - a[1] * b[0])
        })
        .sum();
    let cell_area: f64 = tri.cells.iter().map(|c| c.volume).sum();
    assert!((cell_area - hull_area).abs() < 1e-9 * hull_area);
}

#[test]
fn poisson_count_mean() {
    let params = planar(0.5, 0.0);
    let w = Window::cube(2, 3.0).unwrap();
    let (h_max, margin) = (2.0, 0.5);
    let want = expected_point_count(&params, &w.enlarged(margin), h_max);
    let mut rng = RngStream::new(14, 0);
    let m: MeanSe = (0..1000)
        .map(|_| sample_poisson_with_margin(&params, &w, h_max, margin, &mut rng).unwrap().len() as f64)
        .collect();
    let se = (want / 1000.0).sqrt();
    assert!((m.mean() - want).abs() < 3.0 * se, "{} vs {want}", m.mean());
    assert!((m.variance() / want - 1.0).abs() < 0.15);
}

#[test]
fn heights_follow_the_power_law() {
    for (i, beta) in [0.0, 3.0].into_iter().enumerate() {
        let params = planar(beta, 0.0);
        let per_area = expected_point_count(&params, &Window::cube(2, 1.0).unwrap(), 2.0);
        let w = Window::cube(2, (50_000.0 / per_area).sqrt()).unwrap();
        let set = sample_poisson_with_margin(&params, &w, 2.0, 0.0, &mut RngStream::new(15, i as u64)).unwrap();
        assert!(set.len() > 40_000);
        let u: Vec<f64> = set.heights().iter().map(|h| (h / 2.0).powf(beta + 1.0)).collect();
        let ks = ks_statistic(&u, |x| x.clamp(0.0, 1.0));
        assert!(ks <= 0.01, "β={beta}: KS {ks}");
    }
}

#[test]
fn tiny_cap_is_not_certified() {
    let params = planar(0.0, 0.0);
    let w = window_for_cells(&params, 100.0).unwrap();
    let set = sample_poisson(&params, &w, 0.05, &mut RngStream::new(16, 0)).unwrap();
    let tri = build_triangulation(set).unwrap();
    assert!(!verify_height_cap(&tri));
    assert!(matches!(estimate_typical_moment(&tri, 0.0, 1.0, &w), Err(Error::Uncertified(_))));
}

#[test]
fn raising_the_cap_keeps_certified_cells() {
    for (i, params) in [planar(0.0, 0.0), planar(2.0, 0.0), line(1.0)].into_iter().enumerate() {
        let w = window_for_cells(&params, 200.0).unwrap();
        let h = suggested_h_max(&params, 2000.0);
        let mut rng = RngStream::new(17, i as u64);
        let set = sample_poisson(&params, &w, h, &mut rng).unwrap();
        let tri = build_triangulation(set.clone()).unwrap();
        assert!(verify_height_cap(&tri) && verify_margin(&tri));
        let mut bigger = set;
        bigger.extend_height(2.0 * h, &mut rng).unwrap();
        assert!(bigger.len() > tri.input.len());
        let tri2 = build_triangulation(bigger).unwrap();
        let window_cells = |t: &RegularTriangulation| -> BTreeSet<Vec<usize>> {
            t.cells_in(&w)
                .map(|c| {
                    let mut v = c.vertices.clone();
                    v.sort_unstable();
                    v
                })
                .collect()
        };
        assert_eq!(window_cells(&tri), window_cells(&tri2));
    }
}

#[test]
fn translation_invariance() {
    let params = planar(1.0, 0.0);
    let w = window_for_cells(&params, 200.0).unwrap();
    let set = sample_poisson(&params, &w, suggested_h_max(&params, 2000.0), &mut RngStream::new(18, 0)).unwrap();
    let shift = [0.375, -1.25];
    let a = build_triangulation(set.clone()).unwrap();
    let b = build_triangulation(set.translated(&shift)).unwrap();
    assert_eq!(triples(&a), triples(&b));
    let ea = estimate_typical_moment(&a, 0.0, 1.0, &a.input.window).unwrap();
    let eb = estimate_typical_moment(&b, 0.0, 1.0, &b.input.window).unwrap();
    assert_eq!(ea.cells_used, eb.cells_used);
    assert!((ea.estimate / eb.estimate - 1.0).abs() < 1e-9);
}

#[test]
fn zeroth_moment_is_one_and_selection_can_be_empty() {
    let params = line(0.0);
    let w = window_for_cells(&params, 100.0).unwrap();
    let set = sample_poisson(&params, &w, suggested_h_max(&params, 1000.0), &mut RngStream::new(19, 0)).unwrap();
    let tri = build_triangulation(set).unwrap();
    let e = estimate_typical_moment(&tri, 1.0, 0.0, &w).unwrap();
    assert_eq!(e.estimate, 1.0);
    assert_eq!(e.cells_used + e.boundary_discarded, tri.cells.len());
    let far = w.translated(&[1e6]);
    assert!(matches!(estimate_typical_moment(&tri, 0.0, 1.0, &far), Err(Error::EmptySelection(_))));
}

/// Window estimates of E Vol under ν = 0 and ν = 1 on the line approach the
/// closed form as the window grows.
#[test]
fn line_estimates_converge() {
    for nu in [0.0, 1.0] {
        let params = line(0.5);
        let want = log_volume_moment(&ModelParams { nu, ..params }, 1.0).unwrap().exp();
        let mut errs = Vec::new();
        for cells in [2_000.0, 20_000.0, 200_000.0] {
            let w = window_for_cells(&params, cells).unwrap();
            let set = sample_poisson(&params, &w, suggested_h_max(&params, 10.0 * cells), &mut RngStream::new(20, 0)).unwrap();
            let tri = build_triangulation(set).unwrap();
            errs.push((estimate_typical_moment(&tri, nu, 1.0, &w).unwrap().estimate / want - 1.0).abs());
        }
        assert!(errs[2] < 0.01, "ν={nu}: {errs:?}");
    }
}

#[test]
fn svg_is_deterministic() {
    let preset = figure_preset(5.0).unwrap();
    let draw = || {
        let set = sample_poisson(&preset.params, &preset.window, preset.h_max, &mut RngStream::new(21, 0)).unwrap();
        let tri = build_triangulation(set).unwrap();
        svg_string(&tri, &preset.window).unwrap()
    };
    let a = draw();
    assert_eq!(a, draw());
    assert!(a.starts_with("<svg") && a.contains("<line"));
}

#[test]
fn svg_of_an_empty_view() {
    let preset = figure_preset(5.0).unwrap();
    let set = sample_poisson(&preset.params, &preset.window, preset.h_max, &mut RngStream::new(22, 0)).unwrap();
    let tri = build_triangulation(set).unwrap();
    let away = preset.window.translated(&[1e4, 1e4]);
    let svg = svg_string(&tri, &away).unwrap();
    assert!(!svg.contains("<line"));
    assert!(svg.trim_end().ends_with("</svg>"));
    let lp = line(0.0);
    let set = sample_poisson(&lp, &Window::cube(1, 10.0).unwrap(), 1.0, &mut RngStream::new(22, 1)).unwrap();
    let tri = build_triangulation(set).unwrap();
    assert!(matches!(svg_string(&tri, &tri.input.window), Err(Error::UnsupportedDimension(_))));
}

/// Larger β gives more regular pictures: smaller relative spread of areas.
#[test]
fn larger_beta_is_more_regular() {
    let cv = |beta: f64| {
        let preset = figure_preset(beta).unwrap();
        let set = sample_poisson(&preset.params, &preset.window, preset.h_max, &mut RngStream::new(23, 0)).unwrap();
        let tri = build_triangulation(set).unwrap();
        let m: MeanSe = tri.cells_in(&preset.window).map(|c| c.volume).collect();
        m.variance().sqrt() / m.mean()
    };
    let (a, b) = (cv(5.0), cv(15.0));
    assert!(b < a, "CV β=15 {b} vs β=5 {a}");
}

#[test]
fn csv_and_manifest() {
    let params = planar(0.0, 0.0);
    let w = window_for_cells(&params, 50.0).unwrap();
    let set = sample_poisson(&params, &w, suggested_h_max(&params, 500.0), &mut RngStream::new(24, 3)).unwrap();
    let tri = build_triangulation(set).unwrap();
    let mut out = Vec::new();
    write_cells_csv(&tri, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("cell,v0_x,v0_y,v1_x,v1_y,v2_x,v2_y,volume,apex_x,apex_y,power,in_window\n"));
    assert_eq!(text.lines().count(), tri.cells.len() + 1);

    let manifest = RunManifest::new(&tri, 24, 3);
    let json: serde_json::Value = serde_json::from_str(&manifest.to_json()).unwrap();
    assert_eq!(json["schema_version"], MANIFEST_SCHEMA_VERSION);
    assert_eq!(json["seed"], 24);
    assert_eq!(json["points"], tri.input.len());
    assert_eq!(json["height_cap_certified"], true);
}

#[test]
fn unsupported_dimension() {
    let params = ModelParams::new(4, 0.0, 0.0, 1.0).unwrap();
    let w = Window::new(vec![0.0; 3], vec![1.0; 3]);
    assert!(w.is_err());
    let p2 = planar(0.0, 0.0);
    let set = WeightedPointSet::from_parts(params, Window::cube(2, 1.0).unwrap(), 0.0, 1.0, vec![], vec![]);
    assert!(matches!(set, Err(Error::DimensionMismatch { .. })));
    let few = explicit(p2, &[[0.0, 0.0], [1.0, 0.0]], &[0.0, 0.0]);
    assert!(matches!(build_triangulation(few), Err(Error::DegenerateConfiguration(_))));
}
