//! Incremental (Bowyer–Watson) regular triangulation of weighted points in the
//! plane, equivalent to the lower convex hull of the lifted points
//! (v, ‖v‖² + h). Points whose lift lies above the current hull are redundant
//! and are skipped; vertices buried by a later insertion disappear with the
//! cavity that swallows them.
//!
//! The outside of the convex hull is covered by ghost triangles (a, b, ∞)
//! sharing a symbolic vertex at infinity, so hull edges are exact rather than
//! an artefact of a finite bounding triangle.

use std::cmp::Ordering;

use super::predicates::{orient2d, power2d, power_on_segment};
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;
const INF: u32 = u32::MAX - 1;

#[derive(Debug, Clone, Copy)]
struct Tri {
    /// Counterclockwise vertex indices; a ghost holds `INF` in slot 2.
    v: [u32; 3],
    /// `n[i]` is the neighbour across the edge opposite `v[i]`.
    n: [u32; 3],
    alive: bool,
}

impl Tri {
    fn is_ghost(&self) -> bool {
        self.v[2] == INF
    }
}

struct Builder<'a> {
    pos: &'a [[f64; 2]],
    h: &'a [f64],
    tris: Vec<Tri>,
    free: Vec<u32>,
    last: u32,
    walk_state: u64,
    mark: Vec<u32>,
    epoch: u32,
    cavity: Vec<u32>,
}

/// Triangles (counterclockwise index triples into the input) of the regular
/// triangulation of `pos` with heights `h`.
pub(crate) fn regular_triangulation(pos: &[[f64; 2]], h: &[f64]) -> Result<Vec<[usize; 3]>> {
    if pos.len() < 3 {
        return Err(Error::DegenerateConfiguration(format!(
            "need at least 3 points, got {}",
            pos.len()
        )));
    }
    let order = spatial_order(pos);
    let seed = initial_triangle(pos, &order)?;
    let mut b = Builder::new(pos, h, seed);
    for &i in &order {
        if !seed.contains(&i) {
            b.insert(i as u32)?;
        }
    }
    Ok(b.finish())
}

/// First three points in insertion order that span a proper triangle,
/// returned counterclockwise.
fn initial_triangle(pos: &[[f64; 2]], order: &[usize]) -> Result<[usize; 3]> {
    let a = order[0];
    let b = order
        .iter()
        .copied()
        .find(|&i| pos[i] != pos[a])
        .ok_or_else(|| Error::DegenerateConfiguration("all points coincide".into()))?;
    for &c in order {
        match orient2d(pos[a], pos[b], pos[c]) {
            Ordering::Greater => return Ok([a, b, c]),
            Ordering::Less => return Ok([a, c, b]),
            Ordering::Equal => {}
        }
    }
    Err(Error::DegenerateConfiguration("all points are collinear".into()))
}

impl<'a> Builder<'a> {
    fn new(pos: &'a [[f64; 2]], h: &'a [f64], seed: [usize; 3]) -> Self {
        let [a, b, c] = seed.map(|i| i as u32);
        // Triangle 0 is real; ghosts 1, 2, 3 sit across its edges
        // (b, c), (c, a), (a, b) respectively, each with the hull edge reversed.
        let tris = vec![
            Tri {
                v: [a, b, c],
                n: [1, 2, 3],
                alive: true,
            },
            Tri {
                v: [c, b, INF],
                n: [3, 2, 0],
                alive: true,
            },
            Tri {
                v: [a, c, INF],
                n: [1, 3, 0],
                alive: true,
            },
            Tri {
                v: [b, a, INF],
                n: [2, 1, 0],
                alive: true,
            },
        ];
        Self {
            pos,
            h,
            mark: vec![0; tris.len()],
            tris,
            free: Vec::new(),
            last: 0,
            walk_state: 0x9E37_79B9_7F4A_7C15,
            epoch: 0,
            cavity: Vec::new(),
        }
    }

    fn wp(&self, i: u32) -> ([f64; 2], f64) {
        (self.pos[i as usize], self.h[i as usize])
    }

    fn next_rand(&mut self) -> u64 {
        // xorshift64*, only to break walk cycles deterministically.
        let mut x = self.walk_state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.walk_state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Triangle containing p (closed), or a ghost whose hull edge sees p,
    /// by a stochastic visibility walk.
    fn locate(&mut self, p: [f64; 2]) -> u32 {
        let mut t = self.last;
        if !self.tris[t as usize].alive {
            t = self.tris.iter().position(|t| t.alive).expect("live triangle") as u32;
        }
        if self.tris[t as usize].is_ghost() {
            t = self.tris[t as usize].n[2];
        }
        'walk: loop {
            let tri = self.tris[t as usize];
            if tri.is_ghost() {
                return t;
            }
            let start = (self.next_rand() % 3) as usize;
            for k in 0..3 {
                let i = (start + k) % 3;
                let a = self.pos[tri.v[(i + 1) % 3] as usize];
                let b = self.pos[tri.v[(i + 2) % 3] as usize];
                if orient2d(a, b, p) == Ordering::Less {
                    t = tri.n[i];
                    continue 'walk;
                }
            }
            return t;
        }
    }

    /// Conflict of p with triangle t: `Greater` means t must go.
    fn conflict(&self, t: u32, p: u32) -> Ordering {
        let tri = &self.tris[t as usize];
        let v = tri.v;
        if !tri.is_ghost() {
            return power2d(self.wp(v[0]), self.wp(v[1]), self.wp(v[2]), self.wp(p));
        }
        // The ghost's hull edge runs v0 → v1 with the outside on its left.
        let (a, b, q) = (self.pos[v[0] as usize], self.pos[v[1] as usize], self.pos[p as usize]);
        match orient2d(a, b, q) {
            Ordering::Equal => {
                let along = |x: [f64; 2]| (x[0] - a[0]) * (b[0] - a[0]) + (x[1] - a[1]) * (b[1] - a[1]);
                let (s, len) = (along(q), along(b));
                if s > 0.0 && s < len {
                    power_on_segment(self.wp(v[0]), self.wp(v[1]), self.wp(p))
                } else {
                    Ordering::Less
                }
            }
            other => other,
        }
    }

    fn alloc(&mut self, tri: Tri) -> u32 {
        if let Some(i) = self.free.pop() {
            self.tris[i as usize] = tri;
            self.mark[i as usize] = 0;
            i
        } else {
            self.tris.push(tri);
            self.mark.push(0);
            (self.tris.len() - 1) as u32
        }
    }

    fn insert(&mut self, p: u32) -> Result<()> {
        let pp = self.pos[p as usize];
        let start = self.locate(pp);
        match self.conflict(start, p) {
            Ordering::Greater => {}
            // Lift of p is above the hull: redundant. An exact tie with the
            // containing plane would make the diagram degenerate.
            Ordering::Equal => return Err(tie(p, "power tie with the containing triangle")),
            Ordering::Less => return Ok(()),
        }

        // Cavity: connected set of triangles whose power circle p undercuts.
        self.epoch += 1;
        let epoch = self.epoch;
        self.cavity.clear();
        self.cavity.push(start);
        self.mark[start as usize] = epoch;
        let mut head = 0;
        let mut boundary: Vec<(u32, u32, u32)> = Vec::new();
        while head < self.cavity.len() {
            let t = self.cavity[head];
            head += 1;
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let nb = tri.n[i];
                let edge = (tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb);
                if self.mark[nb as usize] == epoch {
                    continue;
                }
                match self.conflict(nb, p) {
                    Ordering::Greater => {
                        self.mark[nb as usize] = epoch;
                        self.cavity.push(nb);
                    }
                    Ordering::Equal => return Err(tie(p, "power tie with a neighbouring triangle")),
                    Ordering::Less => boundary.push(edge),
                }
            }
        }
        for k in 0..self.cavity.len() {
            let t = self.cavity[k];
            self.tris[t as usize].alive = false;
            self.free.push(t);
        }

        // Star the cavity from p: one triangle per boundary edge (a, b),
        // written (a, b, p), or (p, a, ∞) / (b, p, ∞) style ghosts when the
        // edge touches infinity so that ∞ stays in slot 2.
        let mut created = Vec::with_capacity(boundary.len());
        for &(a, b, nb) in &boundary {
            let (v, n) = if a == INF {
                ([b, p, INF], [NONE, nb, NONE])
            } else if b == INF {
                ([p, a, INF], [nb, NONE, NONE])
            } else {
                if orient2d(self.pos[a as usize], self.pos[b as usize], pp) != Ordering::Greater {
                    return Err(tie(p, "cavity is not star-shaped from the new vertex"));
                }
                ([a, b, p], [NONE, NONE, nb])
            };
            let t = self.alloc(Tri { v, n, alive: true });
            let other = &mut self.tris[nb as usize];
            let j = (0..3)
                .find(|&j| other.v[(j + 1) % 3] == b && other.v[(j + 2) % 3] == a)
                .expect("neighbour shares the edge");
            other.n[j] = t;
            created.push(t);
        }
        // Link the fan around p: each new triangle has two edges at p, and
        // its directed edge (x, p) is met by the reversed (p, x) of another.
        let mut into_p: Vec<(u32, u32, usize)> = Vec::with_capacity(created.len());
        for &t in &created {
            let v = self.tris[t as usize].v;
            for j in 0..3 {
                if v[(j + 2) % 3] == p {
                    into_p.push((v[(j + 1) % 3], t, j));
                }
            }
        }
        into_p.sort_unstable();
        for &t in &created {
            let v = self.tris[t as usize].v;
            for j in 0..3 {
                if v[(j + 1) % 3] == p {
                    let x = v[(j + 2) % 3];
                    let idx = into_p
                        .binary_search_by_key(&x, |&(s, _, _)| s)
                        .map_err(|_| tie(p, "open cavity boundary"))?;
                    let (_, u, k) = into_p[idx];
                    self.tris[t as usize].n[j] = u;
                    self.tris[u as usize].n[k] = t;
                }
            }
        }
        self.last = *created.last().expect("non-empty cavity");
        Ok(())
    }

    fn finish(self) -> Vec<[usize; 3]> {
        self.tris
            .iter()
            .filter(|t| t.alive && !t.is_ghost())
            .map(|t| [t.v[0] as usize, t.v[1] as usize, t.v[2] as usize])
            .collect()
    }
}

fn tie(p: u32, what: &str) -> Error {
    Error::DegenerateConfiguration(format!("inserting point {p}: {what}"))
}

/// Insertion order along a Hilbert curve, so that consecutive points are
/// close and the walk from the last triangle stays short.
fn spatial_order(pos: &[[f64; 2]]) -> Vec<usize> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pos {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let side = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    const ORDER: u32 = 16;
    let cells = f64::from(1u32 << ORDER);
    let mut keyed: Vec<(u64, usize)> = pos
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let x = (((p[0] - lo[0]) / side) * (cells - 1.0)) as u32;
            let y = (((p[1] - lo[1]) / side) * (cells - 1.0)) as u32;
            (hilbert_index(ORDER, x, y), i)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

fn hilbert_index(order: u32, mut x: u32, mut y: u32) -> u64 {
    let n = 1u32 << order;
    let mut d = 0u64;
    let mut s = n >> 1;
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += u64::from(s) * u64::from(s) * u64::from((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = n - 1 - x;
                y = n - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s >>= 1;
    }
    d
}
