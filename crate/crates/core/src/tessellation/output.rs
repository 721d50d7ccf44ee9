//! SVG drawings, CSV cell dumps and JSON run manifests.

use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{suggested_h_max, verify_height_cap, window_for_cells, RegularTriangulation, Window};
use crate::error::{Error, Result};
use crate::model::ModelParams;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Planar parameters and a window for a picture of moderate size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigurePreset {
    pub params: ModelParams,
    pub window: Window,
    pub h_max: f64,
}

/// Presets in the style of the usual β = 5 and β = 15 pictures: the plane
/// (d = 3), typical cells, about 400 cells in view.
pub fn figure_preset(beta: f64) -> Result<FigurePreset> {
    let params = ModelParams::new(3, beta, 0.0, 1.0)?;
    Ok(FigurePreset {
        window: window_for_cells(&params, 400.0)?,
        h_max: suggested_h_max(&params, 4000.0),
        params,
    })
}

/// Cell edges clipped to `window`, as a standalone SVG document.
pub fn svg_string(tri: &RegularTriangulation, window: &Window) -> Result<String> {
    if window.dim() != 2 || tri.input.dim() != 2 {
        return Err(Error::UnsupportedDimension("SVG output needs a planar tessellation".into()));
    }
    let (w, h) = (window.hi[0] - window.lo[0], window.hi[1] - window.lo[1]);
    let px = 800.0 / w.max(h);
    let (width, height) = (w * px, h * px);

    let mut edges: Vec<(usize, usize)> = tri
        .cells
        .iter()
        .flat_map(|c| {
            let v = &c.vertices;
            [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])]
        })
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    edges.sort_unstable();
    edges.dedup();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<g stroke="black" stroke-width="0.8" fill="none">"#);
    for (a, b) in edges {
        let (p, q) = (tri.input.position(a), tri.input.position(b));
        if let Some((s, t)) = clip(window, [p[0], p[1]], [q[0], q[1]]) {
            let map = |v: [f64; 2]| ((v[0] - window.lo[0]) * px, (window.hi[1] - v[1]) * px);
            let ((x1, y1), (x2, y2)) = (map(s), map(t));
            let _ = writeln!(svg, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#);
        }
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

pub fn render_svg(tri: &RegularTriangulation, window: &Window, path: &Path) -> Result<()> {
    std::fs::write(path, svg_string(tri, window)?)?;
    Ok(())
}

/// Liang–Barsky clipping of the segment p→q against the window.
fn clip(window: &Window, p: [f64; 2], q: [f64; 2]) -> Option<([f64; 2], [f64; 2])> {
    let d = [q[0] - p[0], q[1] - p[1]];
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..2 {
        for (num, den) in [(p[k] - window.lo[k], -d[k]), (window.hi[k] - p[k], d[k])] {
            if den == 0.0 {
                if num < 0.0 {
                    return None;
                }
            } else {
                let t = num / den;
                if den < 0.0 {
                    t0 = t0.max(t);
                } else {
                    t1 = t1.min(t);
                }
            }
        }
    }
    if t0 >= t1 {
        return None;
    }
    let at = |t: f64| [p[0] + t * d[0], p[1] + t * d[1]];
    Some((at(t0), at(t1)))
}

/// One row per cell: vertex coordinates, volume, apex, power and whether the
/// apex lies in the window.
pub fn write_cells_csv<W: Write>(tri: &RegularTriangulation, out: W) -> Result<()> {
    let dim = tri.input.dim();
    let axes = ["x", "y"];
    let mut header = vec!["cell".to_string()];
    for k in 0..=dim {
        for a in &axes[..dim] {
            header.push(format!("v{k}_{a}"));
        }
    }
    header.push("volume".into());
    for a in &axes[..dim] {
        header.push(format!("apex_{a}"));
    }
    header.extend(["power".to_string(), "in_window".to_string()]);

    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header).map_err(csv_error)?;
    for (i, c) in tri.cells.iter().enumerate() {
        let mut row = vec![i.to_string()];
        for &v in &c.vertices {
            row.extend(tri.input.position(v).iter().map(f64::to_string));
        }
        row.push(c.volume.to_string());
        row.extend(c.apex.iter().map(f64::to_string));
        row.push(c.power.to_string());
        row.push(u8::from(tri.input.window.contains(&c.apex)).to_string());
        w.write_record(&row).map_err(csv_error)?;
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

/// Everything needed to regenerate a tessellation run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub params: ModelParams,
    pub window: Window,
    pub sampling_box: Window,
    pub margin: f64,
    pub h_max: f64,
    pub seed: u64,
    pub stream: u64,
    pub points: usize,
    pub cells: usize,
    pub cells_in_window: usize,
    pub height_cap_certified: bool,
}

impl RunManifest {
    pub fn new(tri: &RegularTriangulation, seed: u64, stream: u64) -> Self {
        let inp = &tri.input;
        Self {
            schema_version: MANIFEST_SCHEMA_VERSION,
            params: inp.params,
            window: inp.window.clone(),
            sampling_box: inp.sampling_box.clone(),
            margin: inp.margin,
            h_max: inp.h_max,
            seed,
            stream,
            points: inp.len(),
            cells: tri.cells.len(),
            cells_in_window: tri.cells_in(&inp.window).count(),
            height_cap_certified: verify_height_cap(tri),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
