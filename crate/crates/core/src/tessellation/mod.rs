//! β-Delaunay tessellations on a window, for d − 1 ∈ {1, 2}.
//!
//! The Poisson input lives on an enlarged box and is truncated at a height
//! cap. Each cell carries its apex z (the dual Laguerre vertex) and the common
//! power K of its points at z. Truncation is checked a posteriori: a missing
//! point is either higher than the cap or farther than the margin, and in
//! both cases cannot undercut K once K is below both.

pub mod predicates;

mod output;
mod planar;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{c_const, log_volume_moment, radius_rate, validate, ModelParams};
use crate::specfun::ln_gamma_unchecked;

pub use output::{
    figure_preset, render_svg, svg_string, write_cells_csv, FigurePreset, RunManifest, MANIFEST_SCHEMA_VERSION,
};

/// Axis-aligned box [lo, hi) in R^1 or R^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if !(1..=2).contains(&lo.len()) {
            return Err(Error::UnsupportedDimension(format!(
                "windows live in R^1 or R^2, got R^{}",
                lo.len()
            )));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::Degenerate("window needs lo < hi in every coordinate".into()));
        }
        Ok(Self { lo, hi })
    }

    /// [0, side)^dim.
    pub fn cube(dim: usize, side: f64) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![side; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| a <= x && x < b)
    }

    pub fn enlarged(&self, margin: f64) -> Self {
        Self {
            lo: self.lo.iter().map(|a| a - margin).collect(),
            hi: self.hi.iter().map(|b| b + margin).collect(),
        }
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        Self {
            lo: self.lo.iter().zip(shift).map(|(a, s)| a + s).collect(),
            hi: self.hi.iter().zip(shift).map(|(b, s)| b + s).collect(),
        }
    }

    /// Distance from an interior point to the complement of the box.
    fn inner_distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(x, (a, b))| (x - a).min(b - x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Truncated Poisson input: positions on `sampling_box` (the window padded by
/// `margin`) and heights in [0, h_max].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedPointSet {
    pub params: ModelParams,
    pub window: Window,
    pub sampling_box: Window,
    pub margin: f64,
    pub h_max: f64,
    positions: Vec<f64>,
    heights: Vec<f64>,
}

impl WeightedPointSet {
    /// Builds a point set from explicit data; positions are vertex-major.
    pub fn from_parts(
        params: ModelParams,
        window: Window,
        margin: f64,
        h_max: f64,
        positions: Vec<f64>,
        heights: Vec<f64>,
    ) -> Result<Self> {
        let dim = window.dim();
        if params.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: params.dim(),
                got: dim,
            });
        }
        if positions.len() != dim * heights.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * heights.len(),
                got: positions.len(),
            });
        }
        if positions.iter().chain(&heights).any(|x| !x.is_finite()) {
            return Err(Error::Degenerate("non-finite input coordinate".into()));
        }
        Ok(Self {
            params,
            sampling_box: window.enlarged(margin),
            window,
            margin,
            h_max,
            positions,
            heights,
        })
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.positions[i * d..(i + 1) * d]
    }

    pub fn height(&self, i: usize) -> f64 {
        self.heights[i]
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Raises the cap to `new_h_max` by adding the points of the layer
    /// (h_max, new_h_max]; the result has the law of a fresh sample at the
    /// new cap.
    pub fn extend_height<R: Rng + ?Sized>(&mut self, new_h_max: f64, rng: &mut R) -> Result<()> {
        if !(new_h_max > self.h_max) || !new_h_max.is_finite() {
            return Err(Error::Domain {
                function: "extend_height",
                value: new_h_max,
                reason: "new cap must exceed the current one",
            });
        }
        let e = self.params.beta + 1.0;
        let (lo, hi) = (self.h_max.powf(e), new_h_max.powf(e));
        let mean = self.params.gamma * c_const(&self.params) * self.sampling_box.volume() * (hi - lo) / e;
        let n = poisson_count(mean, rng)?;
        for _ in 0..n {
            self.push_uniform_position(rng);
            let u: f64 = rng.random();
            self.heights.push((lo + u * (hi - lo)).powf(1.0 / e));
        }
        self.h_max = new_h_max;
        Ok(())
    }

    /// The same configuration shifted by `shift`, window included.
    pub fn translated(&self, shift: &[f64]) -> Self {
        let d = self.dim();
        let positions = self
            .positions
            .chunks_exact(d)
            .flat_map(|p| p.iter().zip(shift).map(|(x, s)| x + s))
            .collect();
        Self {
            params: self.params,
            window: self.window.translated(shift),
            sampling_box: self.sampling_box.translated(shift),
            margin: self.margin,
            h_max: self.h_max,
            positions,
            heights: self.heights.clone(),
        }
    }

    fn push_uniform_position<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for k in 0..self.dim() {
            let (a, b) = (self.sampling_box.lo[k], self.sampling_box.hi[k]);
            self.positions.push(a + (b - a) * rng.random::<f64>());
        }
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|_| Error::Domain {
        function: "sample_poisson",
        value: mean,
        reason: "Poisson mean must be finite and positive",
    })?;
    Ok(dist.sample(rng) as u64)
}

/// Mean number of input points on `region` × [0, h_max].
pub fn expected_point_count(params: &ModelParams, region: &Window, h_max: f64) -> f64 {
    let e = params.beta + 1.0;
    params.gamma * c_const(params) * region.volume() * h_max.powf(e) / e
}

/// Mean cell volume, the reciprocal of the cell intensity.
pub fn mean_cell_volume(params: &ModelParams) -> Result<f64> {
    let typical = ModelParams { nu: 0.0, ..*params };
    Ok(log_volume_moment(&typical, 1.0)?.exp())
}

/// Twice the mean apex-to-vertex distance √K of the typical cell.
pub fn expected_cell_diameter(params: &ModelParams) -> f64 {
    let typical = ModelParams { nu: 0.0, ..*params };
    let (a, c) = typical.radius_exponents();
    let log_mean = -radius_rate(&typical).ln() / c + ln_gamma_unchecked((a + 1.0) / c) - ln_gamma_unchecked(a / c);
    2.0 * log_mean.exp()
}

/// Three expected cell diameters.
pub fn default_margin(params: &ModelParams) -> f64 {
    3.0 * expected_cell_diameter(params)
}

/// A height cap that the largest power among about `cells` typical cells
/// stays below with high probability. K is R² for the typical cell, and
/// rate·R^c is Gamma(A/c) distributed; the cap sits far in that tail.
pub fn suggested_h_max(params: &ModelParams, cells: f64) -> f64 {
    let typical = ModelParams { nu: 0.0, ..*params };
    let (a, c) = typical.radius_exponents();
    let k = a / c;
    let g = k + 10.0 * k.sqrt() + cells.max(1.0).ln() + 10.0;
    (g / radius_rate(&typical)).powf(2.0 / c)
}

/// A square (or interval) window expected to hold `cells` cells.
pub fn window_for_cells(params: &ModelParams, cells: f64) -> Result<Window> {
    let dim = params.dim();
    let side = (cells * mean_cell_volume(params)?).powf(1.0 / dim as f64);
    Window::cube(dim, side)
}

pub fn sample_poisson<R: Rng + ?Sized>(
    params: &ModelParams,
    window: &Window,
    h_max: f64,
    rng: &mut R,
) -> Result<WeightedPointSet> {
    sample_poisson_with_margin(params, window, h_max, default_margin(params), rng)
}

pub fn sample_poisson_with_margin<R: Rng + ?Sized>(
    params: &ModelParams,
    window: &Window,
    h_max: f64,
    margin: f64,
    rng: &mut R,
) -> Result<WeightedPointSet> {
    let params = validate(*params)?;
    if !(h_max > 0.0 && h_max.is_finite()) {
        return Err(Error::Domain {
            function: "sample_poisson",
            value: h_max,
            reason: "height cap must be positive",
        });
    }
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::Domain {
            function: "sample_poisson",
            value: margin,
            reason: "margin must be non-negative",
        });
    }
    let mut set = WeightedPointSet::from_parts(params, window.clone(), margin, h_max, Vec::new(), Vec::new())?;
    let n = poisson_count(expected_point_count(&params, &set.sampling_box, h_max), rng)?;
    let inv = 1.0 / (params.beta + 1.0);
    set.positions.reserve(n as usize * set.dim());
    set.heights.reserve(n as usize);
    for _ in 0..n {
        set.push_uniform_position(rng);
        let u: f64 = rng.random();
        set.heights.push(h_max * u.powf(inv));
    }
    Ok(set)
}

/// A simplex of the tessellation with its dual vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    /// Indices into the input; counterclockwise in the plane.
    pub vertices: Vec<usize>,
    pub apex: Vec<f64>,
    /// Common power K of the cell's points at the apex.
    pub power: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularTriangulation {
    pub input: WeightedPointSet,
    pub cells: Vec<Cell>,
}

impl RegularTriangulation {
    /// Cells whose apex lies in `window`.
    pub fn cells_in<'a>(&'a self, window: &'a Window) -> impl Iterator<Item = &'a Cell> + 'a {
        self.cells.iter().filter(move |c| window.contains(&c.apex))
    }

    /// Power of input point `i` at `z`.
    pub fn power_at(&self, z: &[f64], i: usize) -> f64 {
        let v = self.input.position(i);
        z.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + self.input.height(i)
    }

    /// K below both the height cap and the squared distance from the apex to
    /// the edge of the sampling box.
    pub fn is_certified(&self, cell: &Cell) -> bool {
        let reach = self.input.sampling_box.inner_distance(&cell.apex);
        cell.power < self.input.h_max && reach > 0.0 && cell.power < reach * reach
    }
}

pub fn build_triangulation(pts: WeightedPointSet) -> Result<RegularTriangulation> {
    let cells = match pts.dim() {
        1 => build_line(&pts)?,
        2 => build_plane(&pts)?,
        d => {
            return Err(Error::UnsupportedDimension(format!(
                "triangulation implemented for R^1 and R^2, got R^{d}"
            )))
        }
    };
    Ok(RegularTriangulation { input: pts, cells })
}

fn build_line(pts: &WeightedPointSet) -> Result<Vec<Cell>> {
    if pts.len() < 2 {
        return Err(Error::DegenerateConfiguration(format!(
            "need at least 2 points, got {}",
            pts.len()
        )));
    }
    let x = |i: usize| pts.position(i)[0];
    let wp = |i: usize| (x(i), pts.height(i));
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| x(a).total_cmp(&x(b)));
    if let Some(w) = order.windows(2).find(|w| x(w[0]) == x(w[1])) {
        return Err(Error::DegenerateConfiguration(format!(
            "points {} and {} share a position",
            w[0], w[1]
        )));
    }
    let mut hull: Vec<usize> = Vec::new();
    for &i in &order {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            match predicates::lifted_turn1d(wp(a), wp(b), wp(i)) {
                Ordering::Greater => break,
                Ordering::Less => {
                    hull.pop();
                }
                Ordering::Equal => {
                    return Err(Error::DegenerateConfiguration(format!(
                        "lifted points {a}, {b}, {i} are collinear"
                    )))
                }
            }
        }
        hull.push(i);
    }
    Ok(hull
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let (xa, ha, xb, hb) = (x(a), pts.height(a), x(b), pts.height(b));
            let len = xb - xa;
            let u = (len * len + hb - ha) / (2.0 * len);
            Cell {
                vertices: vec![a, b],
                apex: vec![xa + u],
                power: u * u + ha,
                volume: len,
            }
        })
        .collect())
}

fn build_plane(pts: &WeightedPointSet) -> Result<Vec<Cell>> {
    let pos: Vec<[f64; 2]> = (0..pts.len()).map(|i| [pts.position(i)[0], pts.position(i)[1]]).collect();
    let tris = planar::regular_triangulation(&pos, pts.heights())?;
    Ok(tris
        .into_iter()
        .map(|t| {
            let (a, b, c) = (pos[t[0]], pos[t[1]], pos[t[2]]);
            let (ha, hb, hc) = (pts.height(t[0]), pts.height(t[1]), pts.height(t[2]));
            let (e1, e2) = ([b[0] - a[0], b[1] - a[1]], [c[0] - a[0], c[1] - a[1]]);
            let det = e1[0] * e2[1] - e1[1] * e2[0];
            // 2 e_k · u = |e_k|² + h_k − h_a, with z = a + u.
            let r1 = 0.5 * (e1[0] * e1[0] + e1[1] * e1[1] + hb - ha);
            let r2 = 0.5 * (e2[0] * e2[0] + e2[1] * e2[1] + hc - ha);
            let u = [(r1 * e2[1] - r2 * e1[1]) / det, (e1[0] * r2 - e2[0] * r1) / det];
            Cell {
                vertices: t.to_vec(),
                apex: vec![a[0] + u[0], a[1] + u[1]],
                power: u[0] * u[0] + u[1] * u[1] + ha,
                volume: 0.5 * det,
            }
        })
        .collect())
}

/// True iff every cell with apex in the window has power below the height
/// cap, so that no point above the cap could change those cells.
pub fn verify_height_cap(tri: &RegularTriangulation) -> bool {
    tri.cells_in(&tri.input.window).all(|c| c.power < tri.input.h_max)
}

/// True iff every cell with apex in the window is also shielded by the
/// margin: its power is below the squared distance to the sampling box edge.
pub fn verify_margin(tri: &RegularTriangulation) -> bool {
    tri.cells_in(&tri.input.window).all(|c| {
        let reach = tri.input.sampling_box.inner_distance(&c.apex);
        reach > 0.0 && c.power < reach * reach
    })
}

/// Relative tolerance of the floating-point empty-power-sphere check.
pub const POWER_CHECK_TOLERANCE: f64 = 1e-9;

/// Counts points that undercut the power of one of `cells` (indices into
/// `tri.cells`), checking every input point. Near-ties are settled exactly.
pub fn empty_power_sphere_violations(tri: &RegularTriangulation, cells: &[usize]) -> usize {
    let n = tri.input.len();
    let mut bad = 0;
    for &ci in cells {
        let cell = &tri.cells[ci];
        for p in 0..n {
            if cell.vertices.contains(&p) {
                continue;
            }
            let pw = tri.power_at(&cell.apex, p);
            let scale = cell.power.abs().max(pw.abs()).max(1.0);
            if pw - cell.power > POWER_CHECK_TOLERANCE * scale {
                continue;
            }
            if exact_undercuts(tri, cell, p) {
                bad += 1;
            }
        }
    }
    bad
}

fn exact_undercuts(tri: &RegularTriangulation, cell: &Cell, p: usize) -> bool {
    let inp = &tri.input;
    match inp.dim() {
        1 => {
            let wp = |i: usize| (inp.position(i)[0], inp.height(i));
            let (a, b) = (cell.vertices[0], cell.vertices[1]);
            let (xa, xb, xp) = (wp(a).0, wp(b).0, wp(p).0);
            // p undercuts iff its lift is below the line through a and b.
            let turn = if xp < xa {
                predicates::lifted_turn1d(wp(p), wp(a), wp(b)).reverse()
            } else if xp > xb {
                predicates::lifted_turn1d(wp(a), wp(b), wp(p)).reverse()
            } else {
                predicates::lifted_turn1d(wp(a), wp(p), wp(b))
            };
            turn != Ordering::Less
        }
        _ => {
            let wp = |i: usize| ([inp.position(i)[0], inp.position(i)[1]], inp.height(i));
            let v = &cell.vertices;
            predicates::power2d(wp(v[0]), wp(v[1]), wp(v[2]), wp(p)) != Ordering::Less
        }
    }
}

/// Ratio estimator Σ Vol^{ν+s} / Σ Vol^ν over cells with apex in the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErgodicEstimate {
    pub s: f64,
    pub nu: f64,
    pub estimate: f64,
    pub cells_used: usize,
    pub boundary_discarded: usize,
}

pub fn estimate_typical_moment(
    tri: &RegularTriangulation,
    nu: f64,
    s: f64,
    window: &Window,
) -> Result<ErgodicEstimate> {
    let (mut num, mut den) = (0.0, 0.0);
    let (mut used, mut discarded) = (0usize, 0usize);
    for cell in &tri.cells {
        if !window.contains(&cell.apex) {
            discarded += 1;
            continue;
        }
        if !tri.is_certified(cell) {
            return Err(Error::Uncertified(format!(
                "cell with apex {:?} has power {} (cap {}, margin {})",
                cell.apex, cell.power, tri.input.h_max, tri.input.margin
            )));
        }
        let lv = cell.volume.ln();
        num += ((nu + s) * lv).exp();
        den += (nu * lv).exp();
        used += 1;
    }
    if used == 0 {
        return Err(Error::EmptySelection("no cell apex inside the window".into()));
    }
    Ok(ErgodicEstimate {
        s,
        nu,
        estimate: if s == 0.0 { 1.0 } else { num / den },
        cells_used: used,
        boundary_discarded: discarded,
    })
}
