//! Simplices in R^n: volume, circumsphere, vertex-matching distance and the
//! deviation of a simplex's shape from the regular simplex.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::ln_gamma_unchecked;

/// A simplex with `dim + 1` vertices in R^dim, stored row by row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simplex {
    dim: usize,
    coords: Vec<f64>,
}

impl Simplex {
    pub fn new(dim: usize, vertices: &[Vec<f64>]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::UnsupportedDimension("simplex dimension must be ≥ 1".into()));
        }
        if vertices.len() != dim + 1 {
            return Err(Error::DimensionMismatch {
                expected: dim + 1,
                got: vertices.len(),
            });
        }
        let mut coords = Vec::with_capacity(dim * (dim + 1));
        for v in vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            coords.extend_from_slice(v);
        }
        Self::from_flat(dim, coords)
    }

    /// Builds from `(dim + 1) * dim` coordinates, vertex-major.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() != dim * (dim + 1) {
            return Err(Error::DimensionMismatch {
                expected: dim * (dim + 1),
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Degenerate("non-finite vertex coordinate".into()));
        }
        Ok(Self { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Applies x ↦ a·x + b to every vertex.
    pub fn affine(&self, scale: f64, shift: &[f64]) -> Simplex {
        let coords = self
            .coords
            .chunks_exact(self.dim)
            .flat_map(|v| v.iter().zip(shift).map(move |(x, b)| scale * x + b))
            .collect();
        Simplex {
            dim: self.dim,
            coords,
        }
    }
}

/// Volume of the simplex spanned by `dim + 1` flat vertices, in log form.
/// Returns −∞ for a degenerate simplex.
pub fn log_volume_flat(dim: usize, coords: &[f64]) -> f64 {
    let v0 = &coords[..dim];
    match dim {
        1 => (coords[1] - coords[0]).abs().ln(),
        2 => {
            let (ax, ay) = (coords[2] - v0[0], coords[3] - v0[1]);
            let (bx, by) = (coords[4] - v0[0], coords[5] - v0[1]);
            (0.5 * (ax * by - ay * bx).abs()).ln()
        }
        3 => {
            let e = |k: usize| {
                let v = &coords[3 * k..3 * k + 3];
                [v[0] - v0[0], v[1] - v0[1], v[2] - v0[2]]
            };
            let (a, b, c) = (e(1), e(2), e(3));
            let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0]);
            (det.abs() / 6.0).ln()
        }
        _ => {
            let mut m = Vec::with_capacity(dim * dim);
            for k in 1..=dim {
                let v = &coords[k * dim..(k + 1) * dim];
                m.extend(v.iter().zip(v0).map(|(x, y)| x - y));
            }
            log_abs_det_in_place(&mut m, dim) - ln_gamma_unchecked(dim as f64 + 1.0)
        }
    }
}

/// log |det| of a row-major n×n matrix by LU with partial pivoting; the
/// buffer is overwritten. Returns −∞ for a singular matrix.
pub fn log_abs_det_in_place(m: &mut [f64], n: usize) -> f64 {
    // Pivots are multiplied and only folded into the log when the running
    // product leaves a safe range, which saves a logarithm per column.
    let (mut acc, mut prod) = (0.0, 1.0f64);
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|r| (r, m[r * n + col].abs()))
            .fold((col, -1.0), |best, x| if x.1 > best.1 { x } else { best });
        if pmax == 0.0 {
            return f64::NEG_INFINITY;
        }
        if piv != col {
            for j in 0..n {
                m.swap(piv * n + j, col * n + j);
            }
        }
        let p = m[col * n + col];
        prod *= p.abs();
        if !(1e-150..=1e150).contains(&prod) {
            acc += prod.ln();
            prod = 1.0;
        }
        let (top, rest) = m.split_at_mut((col + 1) * n);
        let pivot_row = &top[col * n + col + 1..col * n + n];
        for row in rest.chunks_exact_mut(n) {
            let f = row[col] / p;
            if f != 0.0 {
                for (x, y) in row[col + 1..].iter_mut().zip(pivot_row) {
                    *x -= f * y;
                }
            }
        }
    }
    acc + prod.ln()
}

pub fn simplex_volume(s: &Simplex) -> f64 {
    log_volume_flat(s.dim, &s.coords).exp()
}

pub fn simplex_log_volume(s: &Simplex) -> f64 {
    log_volume_flat(s.dim, &s.coords)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circumsphere {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Volume below `DEGENERACY_RATIO · radius^dim` counts as degenerate.
pub const DEGENERACY_RATIO: f64 = 1e-12;

pub fn circumsphere(s: &Simplex) -> Result<Circumsphere> {
    let n = s.dim;
    let v0 = s.vertex(0);
    let n0: f64 = v0.iter().map(|x| x * x).sum();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for i in 1..=n {
        let vi = s.vertex(i);
        for j in 0..n {
            a[(i - 1, j)] = 2.0 * (vi[j] - v0[j]);
        }
        rhs[i - 1] = vi.iter().map(|x| x * x).sum::<f64>() - n0;
    }
    let center = a
        .lu()
        .solve(&rhs)
        .filter(|c| c.iter().all(|x| x.is_finite()))
        .ok_or_else(|| Error::Degenerate("circumsphere system is singular".into()))?;
    let center: Vec<f64> = center.iter().copied().collect();
    let radius = dist(&center, v0);
    let vol = simplex_volume(s);
    if !(vol >= DEGENERACY_RATIO * radius.powi(n as i32)) {
        return Err(Error::Degenerate(format!(
            "volume {vol:.3e} below threshold for circumradius {radius:.3e}"
        )));
    }
    Ok(Circumsphere { center, radius })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Smallest s such that every vertex of `s1` lies within s of some vertex
/// of `s2`.
pub fn rho_pair(s1: &Simplex, s2: &Simplex) -> Result<f64> {
    if s1.dim != s2.dim {
        return Err(Error::DimensionMismatch {
            expected: s1.dim,
            got: s2.dim,
        });
    }
    Ok(s1
        .vertices()
        .map(|v| s2.vertices().map(|w| dist(v, w)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

/// Volume of the regular `dim`-simplex inscribed in the unit sphere.
pub fn tau(dim: usize) -> f64 {
    log_tau(dim).exp()
}

pub fn log_tau(dim: usize) -> f64 {
    let n = dim as f64;
    0.5 * (n + 1.0).ln() - ln_gamma_unchecked(n + 1.0) + 0.5 * n * ((n + 1.0) / n).ln()
}

/// Vertices of a regular `dim`-simplex inscribed in the unit sphere.
pub fn regular_simplex(dim: usize) -> Simplex {
    // Standard basis of R^{dim+1}, centred, expressed in an orthonormal basis
    // of the hyperplane Σx = 0 and scaled to unit norm.
    let n = dim + 1;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for k in 1..n {
        // Helmert vectors
        let kf = k as f64;
        let norm = (kf * (kf + 1.0)).sqrt();
        let mut v = vec![0.0; n];
        for x in v.iter_mut().take(k) {
            *x = 1.0 / norm;
        }
        v[k] = -kf / norm;
        basis.push(v);
    }
    let scale = (n as f64 / (n as f64 - 1.0)).sqrt();
    let mut coords = Vec::with_capacity(n * dim);
    for i in 0..n {
        for b in &basis {
            coords.push(scale * b[i]);
        }
    }
    Simplex { dim, coords }
}

/// ρ(S): distance from the circumsphere-normalized simplex to the nearest
/// regular simplex inscribed in the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeDeviation {
    pub value: f64,
    /// True when `value` is only known to bound the infimum from above
    /// (dimension ≥ 3).
    pub upper_bound: bool,
}

pub fn rho_shape(s: &Simplex) -> Result<ShapeDeviation> {
    let sphere = circumsphere(s)?;
    let shift: Vec<f64> = sphere.center.iter().map(|c| -c / sphere.radius).collect();
    let normalized = s.affine(1.0 / sphere.radius, &shift);
    match s.dim {
        1 => Ok(ShapeDeviation {
            value: 0.0,
            upper_bound: false,
        }),
        2 => Ok(ShapeDeviation {
            value: rho_shape_planar(&normalized),
            upper_bound: false,
        }),
        _ => Ok(ShapeDeviation {
            value: rho_shape_search(&normalized),
            upper_bound: true,
        }),
    }
}

/// Triangles on the unit circle: the nearest inscribed equilateral triangle
/// in the vertex-matching distance.
///
/// With angles taken mod 2π/3 every rotation θ of the template puts some
/// template vertex at circular distance dist(φ_i, θ) from vertex i, so the
/// problem is the 1-centre problem on a circle of length 2π/3: the optimum
/// is half of the shortest arc covering all residues.
fn rho_shape_planar(s: &Simplex) -> f64 {
    let period = 2.0 * PI / 3.0;
    let mut r: Vec<f64> = s
        .vertices()
        .map(|v| v[1].atan2(v[0]).rem_euclid(period))
        .collect();
    r.sort_by(f64::total_cmp);
    let mut largest_gap = period - (r[2] - r[0]);
    for w in r.windows(2) {
        largest_gap = largest_gap.max(w[1] - w[0]);
    }
    let half_arc = 0.5 * (period - largest_gap);
    // vertices may sit off the unit circle by rounding; measure actual chords
    let theta = {
        let start = r
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let next = if i + 1 < r.len() { r[i + 1] } else { r[0] + period };
                (next - x, next)
            })
            .fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a })
            .1;
        start + half_arc
    };
    let template: Vec<[f64; 2]> = (0..3)
        .map(|k| {
            let a = theta + period * k as f64;
            [a.cos(), a.sin()]
        })
        .collect();
    s.vertices()
        .map(|v| {
            template
                .iter()
                .map(|t| dist(v, t))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Objective: vertex-matching distance from `s` to `q · template`.
fn matching_distance(s: &Simplex, template: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    let rotated = q * template;
    s.vertices()
        .map(|v| {
            rotated
                .column_iter()
                .map(|c| c.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
        .sqrt()
}

fn procrustes(target: &DMatrix<f64>, template: &DMatrix<f64>) -> DMatrix<f64> {
    // argmin_Q ‖Q·template − target‖_F over O(n)
    let m = target * template.transpose();
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    u * vt
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    // Heap's algorithm
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    out.push(a.clone());
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn rotation_in_plane(n: usize, i: usize, j: usize, angle: f64) -> DMatrix<f64> {
    let mut r = DMatrix::<f64>::identity(n, n);
    let (c, s) = (angle.cos(), angle.sin());
    r[(i, i)] = c;
    r[(j, j)] = c;
    r[(i, j)] = -s;
    r[(j, i)] = s;
    r
}

/// Largest dimension for which all vertex assignments are tried.
const EXHAUSTIVE_ASSIGNMENT_DIM: usize = 5;

fn rho_shape_search(s: &Simplex) -> f64 {
    let n = s.dim;
    let template_simplex = regular_simplex(n);
    let template = DMatrix::from_iterator(n, n + 1, template_simplex.coords.iter().copied());
    let target = DMatrix::from_iterator(n, n + 1, s.coords.iter().copied());

    let perms = if n <= EXHAUSTIVE_ASSIGNMENT_DIM {
        permutations(n + 1)
    } else {
        vec![(0..=n).collect()]
    };
    let mut starts: Vec<(f64, DMatrix<f64>)> = perms
        .iter()
        .map(|perm| {
            let permuted = DMatrix::from_fn(n, n + 1, |r, c| target[(r, perm[c])]);
            let q = procrustes(&permuted, &template);
            (matching_distance(s, &template, &q), q)
        })
        .collect();
    let identity = DMatrix::<f64>::identity(n, n);
    starts.push((matching_distance(s, &template, &identity), identity));
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    starts.truncate(4);

    starts
        .into_iter()
        .map(|(f0, q0)| refine_rotation(s, &template, q0, f0))
        .fold(f64::INFINITY, f64::min)
}

/// Coordinate pattern search over plane rotations, left-multiplied.
fn refine_rotation(s: &Simplex, template: &DMatrix<f64>, mut q: DMatrix<f64>, mut best: f64) -> f64 {
    let n = s.dim;
    let mut step = 0.1;
    while step > 1e-10 {
        let mut improved = false;
        for i in 0..n {
            for j in i + 1..n {
                for sign in [1.0, -1.0] {
                    let cand = rotation_in_plane(n, i, j, sign * step) * &q;
                    let f = matching_distance(s, template, &cand);
                    if f < best {
                        best = f;
                        q = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}
