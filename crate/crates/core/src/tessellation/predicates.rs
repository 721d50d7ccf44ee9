//! Orientation and power predicates. A floating-point evaluation is trusted
//! when the determinant clears a relative tolerance against its permanent;
//! otherwise the sign is recomputed exactly over the rationals.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;

/// Below this |det| / permanent ratio the float sign is not trusted.
pub const FILTER_TOLERANCE: f64 = 1e-10;

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}

fn sign_of(x: &BigRational) -> Ordering {
    if x.is_zero() {
        Ordering::Equal
    } else if x.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

fn filtered(det: f64, perm: f64) -> Option<Ordering> {
    if det.abs() > FILTER_TOLERANCE * perm {
        det.partial_cmp(&0.0)
    } else {
        None
    }
}

/// Sign of (b − a) × (c − a): `Greater` when a, b, c turn counterclockwise.
pub fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Ordering {
    let (l, r) = ((b[0] - a[0]) * (c[1] - a[1]), (b[1] - a[1]) * (c[0] - a[0]));
    filtered(l - r, l.abs() + r.abs()).unwrap_or_else(|| {
        let (ax, ay) = (q(a[0]), q(a[1]));
        let det = (q(b[0]) - &ax) * (q(c[1]) - &ay) - (q(b[1]) - &ay) * (q(c[0]) - &ax);
        sign_of(&det)
    })
}

/// Power test for weighted points (position, height) in the plane.
///
/// With a, b, c counterclockwise, returns `Greater` iff p has strictly smaller
/// power than the common power K at the apex of (a, b, c), i.e. lifted p lies
/// below the plane through the lifted triangle.
pub fn power2d(a: ([f64; 2], f64), b: ([f64; 2], f64), c: ([f64; 2], f64), p: ([f64; 2], f64)) -> Ordering {
    let row = |v: ([f64; 2], f64)| {
        let (x, y) = (v.0[0] - p.0[0], v.0[1] - p.0[1]);
        let sq = x * x + y * y;
        [x, y, sq + (v.1 - p.1), sq + v.1.abs() + p.1.abs()]
    };
    let (ra, rb, rc) = (row(a), row(b), row(c));
    let m1 = rb[1] * rc[2] - rb[2] * rc[1];
    let m2 = rb[0] * rc[2] - rb[2] * rc[0];
    let m3 = rb[0] * rc[1] - rb[1] * rc[0];
    let det = ra[0] * m1 - ra[1] * m2 + ra[2] * m3;
    let p1 = (rb[1] * rc[3]).abs() + (rb[3] * rc[1]).abs();
    let p2 = (rb[0] * rc[3]).abs() + (rb[3] * rc[0]).abs();
    let p3 = (rb[0] * rc[1]).abs() + (rb[1] * rc[0]).abs();
    let perm = ra[0].abs() * p1 + ra[1].abs() * p2 + ra[3] * p3;
    filtered(det, perm).unwrap_or_else(|| power2d_exact(a, b, c, p))
}

fn power2d_exact(a: ([f64; 2], f64), b: ([f64; 2], f64), c: ([f64; 2], f64), p: ([f64; 2], f64)) -> Ordering {
    let (px, py, ph) = (q(p.0[0]), q(p.0[1]), q(p.1));
    let row = |v: ([f64; 2], f64)| {
        let x = q(v.0[0]) - &px;
        let y = q(v.0[1]) - &py;
        let w = &x * &x + &y * &y + q(v.1) - &ph;
        [x, y, w]
    };
    let (ra, rb, rc) = (row(a), row(b), row(c));
    let det = &ra[0] * (&rb[1] * &rc[2] - &rb[2] * &rc[1]) - &ra[1] * (&rb[0] * &rc[2] - &rb[2] * &rc[0])
        + &ra[2] * (&rb[0] * &rc[1] - &rb[1] * &rc[0]);
    sign_of(&det)
}

/// Turn of the lifted points (x, x² + h) on the line: `Greater` when the
/// middle point lies strictly below the chord of the outer two
/// (for xa < xb < xc).
pub fn lifted_turn1d(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Ordering {
    let (db, dc) = (b.0 - a.0, c.0 - a.0);
    let wb = db * (b.0 + a.0) + (b.1 - a.1);
    let wc = dc * (c.0 + a.0) + (c.1 - a.1);
    let (l, r) = (db * wc, wb * dc);
    let scale = |d: f64, x: f64, h: f64| d.abs() * (x.abs() + a.0.abs()) + h.abs() + a.1.abs();
    let perm = db.abs() * scale(dc, c.0, c.1) + scale(db, b.0, b.1) * dc.abs();
    filtered(l - r, perm).unwrap_or_else(|| {
        let lift = |v: (f64, f64)| {
            let x = q(v.0);
            let w = &x * &x + q(v.1);
            (x, w)
        };
        let ((xa, wa), (xb, wb), (xc, wc)) = (lift(a), lift(b), lift(c));
        let det = (&xb - &xa) * (&wc - &wa) - (&wb - &wa) * (&xc - &xa);
        sign_of(&det)
    })
}

/// Power test against a segment, for p collinear with a and b: `Greater`
/// when the lift of p lies strictly below the lifted chord of a and b.
/// Only reached in degenerate layouts, so it is always evaluated exactly.
pub fn power_on_segment(a: ([f64; 2], f64), b: ([f64; 2], f64), p: ([f64; 2], f64)) -> Ordering {
    let pt = |v: ([f64; 2], f64)| (q(v.0[0]), q(v.0[1]));
    let lift = |v: ([f64; 2], f64)| {
        let (x, y) = pt(v);
        &x * &x + &y * &y + q(v.1)
    };
    let ((ax, ay), (bx, by), (px, py)) = (pt(a), pt(b), pt(p));
    let (ex, ey) = (&bx - &ax, &by - &ay);
    let len2 = &ex * &ex + &ey * &ey;
    let s = (&px - &ax) * &ex + (&py - &ay) * &ey;
    // len2 · L(p) against (len2 − s) L(a) + s L(b).
    let chord = (&len2 - &s) * lift(a) + &s * lift(b);
    sign_of(&(chord - len2 * lift(p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_basics() {
        assert_eq!(orient2d([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]), Ordering::Greater);
        assert_eq!(orient2d([0.0, 0.0], [0.0, 1.0], [1.0, 0.0]), Ordering::Less);
        assert_eq!(orient2d([0.0, 0.0], [1.0, 1.0], [2.0, 2.0]), Ordering::Equal);
        // Nearly collinear: the float filter defers to the exact path.
        let e = 2f64.powi(-51);
        assert_eq!(orient2d([0.0, 0.0], [1.0, 1.0], [3.0, 3.0 + e]), Ordering::Greater);
    }

    #[test]
    fn power_reduces_to_incircle() {
        let (a, b, c) = (([1.0, 0.0], 0.0), ([0.0, 1.0], 0.0), ([-1.0, 0.0], 0.0));
        assert_eq!(power2d(a, b, c, ([0.0, 0.0], 0.0)), Ordering::Greater);
        assert_eq!(power2d(a, b, c, ([0.0, -1.0], 0.0)), Ordering::Equal);
        assert_eq!(power2d(a, b, c, ([2.0, 0.0], 0.0)), Ordering::Less);
        // Raising the query height by more than K = 1 removes the conflict.
        assert_eq!(power2d(a, b, c, ([0.0, 0.0], 1.5)), Ordering::Less);
        assert_eq!(power2d(a, b, c, ([0.0, 0.0], 1.0)), Ordering::Equal);
    }

    #[test]
    fn lifted_turn_on_the_line() {
        assert_eq!(lifted_turn1d((-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)), Ordering::Greater);
        assert_eq!(lifted_turn1d((-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)), Ordering::Equal);
        assert_eq!(lifted_turn1d((-1.0, 0.0), (0.0, 2.0), (1.0, 0.0)), Ordering::Less);
    }

    #[test]
    fn segment_power() {
        let (a, b) = (([0.0, 0.0], 0.0), ([2.0, 2.0], 0.0));
        assert_eq!(power_on_segment(a, b, ([1.0, 1.0], 0.0)), Ordering::Greater);
        assert_eq!(power_on_segment(a, b, ([1.0, 1.0], 2.0)), Ordering::Equal);
        assert_eq!(power_on_segment(a, b, ([1.0, 1.0], 3.0)), Ordering::Less);
    }
}
