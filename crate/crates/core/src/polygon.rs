//! Exact closed convex polygons in the plane, possibly degenerate (segment, point, empty).
//!
//! These are the domains of linear flows between 2-faces. A domain is kept as
//! its vertex cycle; its half-plane description is derived from the edges.

use num_traits::{Signed, Zero};

use crate::linalg::{Affine2, AffineFn2};
use crate::num::{int, primitive_scale, rat_to_f64, Rat};

pub type P2 = [Rat; 2];

/// `{x : normal·x ≤ bound}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfPlane {
    pub normal: [Rat; 2],
    pub bound: Rat,
}

impl HalfPlane {
    pub fn value(&self, x: &P2) -> Rat {
        &self.normal[0] * &x[0] + &self.normal[1] * &x[1] - &self.bound
    }

    /// Preimage under an affine map: `{x : normal·φ(x) ≤ bound}`.
    pub fn pullback(&self, map: &Affine2<Rat>) -> HalfPlane {
        let f = AffineFn2 { coeffs: self.normal.clone(), constant: -self.bound.clone() }.pullback(map);
        HalfPlane { normal: f.coeffs, bound: -f.constant }.primitive()
    }

    /// The same half-plane with coprime integer coefficients, which keeps clipping cheap.
    pub fn primitive(self) -> HalfPlane {
        let [a, b] = self.normal;
        match primitive_scale(&[a.clone(), b.clone(), self.bound.clone()]) {
            Some(s) => HalfPlane { normal: [&a * &s, &b * &s], bound: &self.bound * &s },
            None => HalfPlane { normal: [a, b], bound: self.bound },
        }
    }
}

fn cross(o: &P2, a: &P2, b: &P2) -> Rat {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon {
    /// Counter-clockwise, no repeated or collinear consecutive vertices.
    verts: Vec<P2>,
}

impl ConvexPolygon {
    pub fn empty() -> Self {
        ConvexPolygon { verts: Vec::new() }
    }

    /// Builds from points already in convex position (any cyclic order, either orientation).
    pub fn from_cycle(points: Vec<P2>) -> Self {
        let mut p = ConvexPolygon { verts: points };
        p.normalize();
        p
    }

    /// Convex hull of arbitrary points (monotone chain).
    pub fn hull(mut points: Vec<P2>) -> Self {
        points.sort();
        points.dedup();
        if points.len() < 3 {
            return ConvexPolygon::from_cycle(points);
        }
        let mut lower: Vec<P2> = Vec::new();
        for p in &points {
            while lower.len() >= 2 && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive() {
                lower.pop();
            }
            lower.push(p.clone());
        }
        let mut upper: Vec<P2> = Vec::new();
        for p in points.iter().rev() {
            while upper.len() >= 2 && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive() {
                upper.pop();
            }
            upper.push(p.clone());
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        ConvexPolygon::from_cycle(lower)
    }

    pub fn vertices(&self) -> &[P2] {
        &self.verts
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.verts.len() >= 3
    }

    /// Twice the signed area of a vertex cycle.
    fn doubled_area(pts: &[P2]) -> Rat {
        let n = pts.len();
        (0..n).fold(Rat::zero(), |acc, k| {
            let (a, b) = (&pts[k], &pts[(k + 1) % n]);
            acc + &a[0] * &b[1] - &a[1] * &b[0]
        })
    }

    pub fn area(&self) -> Rat {
        Self::doubled_area(&self.verts) / int(2)
    }

    fn normalize(&mut self) {
        self.verts.dedup();
        while self.verts.len() > 1 && self.verts.first() == self.verts.last() {
            self.verts.pop();
        }
        if self.verts.len() < 3 {
            return;
        }
        let a2 = Self::doubled_area(&self.verts);
        if a2.is_zero() {
            // Collinear: keep the two extreme points.
            let lo = self.verts.iter().min().cloned();
            let hi = self.verts.iter().max().cloned();
            self.verts = match (lo, hi) {
                (Some(lo), Some(hi)) if lo != hi => vec![lo, hi],
                (Some(lo), _) => vec![lo],
                _ => Vec::new(),
            };
            return;
        }
        if a2.is_negative() {
            self.verts.reverse();
        }
        loop {
            let n = self.verts.len();
            let Some(k) = (0..n).find(|&k| cross(&self.verts[(k + n - 1) % n], &self.verts[k], &self.verts[(k + 1) % n]).is_zero()) else {
                break;
            };
            self.verts.remove(k);
            if self.verts.len() < 3 {
                break;
            }
        }
        if let Some(k) = (0..self.verts.len()).min_by(|&a, &b| self.verts[a].cmp(&self.verts[b])) {
            self.verts.rotate_left(k);
        }
    }

    /// Intersection with a closed half-plane.
    pub fn clip(&self, h: &HalfPlane) -> ConvexPolygon {
        let n = self.verts.len();
        if n == 0 {
            return self.clone();
        }
        match self.float_side(h) {
            Some(true) => return self.clone(),
            Some(false) => return ConvexPolygon::empty(),
            None => {}
        }
        let vals: Vec<Rat> = self.verts.iter().map(|p| h.value(p)).collect();
        if vals.iter().all(|v| !v.is_positive()) {
            return self.clone();
        }
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..n {
            let (p, vp) = (&self.verts[k], &vals[k]);
            let (q, vq) = (&self.verts[(k + 1) % n], &vals[(k + 1) % n]);
            if !vp.is_positive() {
                out.push(p.clone());
            }
            if (vp.is_negative() && vq.is_positive()) || (vp.is_positive() && vq.is_negative()) {
                let t = vp / (vp - vq);
                out.push([&p[0] + &t * (&q[0] - &p[0]), &p[1] + &t * (&q[1] - &p[1])]);
            }
        }
        // A line meets at most two boundary points of a proper polygon, so three or
        // more output points are already a proper counter-clockwise cycle.
        if n >= 3 && out.len() >= 3 {
            return ConvexPolygon { verts: out };
        }
        ConvexPolygon::from_cycle(out)
    }

    /// `Some(true)` if every vertex satisfies `h` with room to spare in floating
    /// point, `Some(false)` if every vertex violates it likewise.
    fn float_side(&self, h: &HalfPlane) -> Option<bool> {
        let [a, b] = [rat_to_f64(&h.normal[0]), rat_to_f64(&h.normal[1])];
        let c = rat_to_f64(&h.bound);
        let (mut inside, mut outside) = (true, true);
        for p in &self.verts {
            let (x, y) = (rat_to_f64(&p[0]), rat_to_f64(&p[1]));
            let margin = 1e-9 * ((a * x).abs() + (b * y).abs() + c.abs());
            let v = a * x + b * y - c;
            inside &= v < -margin;
            outside &= v > margin;
            if !inside && !outside {
                return None;
            }
        }
        Some(inside)
    }

    pub fn clip_all<'a>(&self, hs: impl IntoIterator<Item = &'a HalfPlane>) -> ConvexPolygon {
        let mut p = self.clone();
        for h in hs {
            if p.is_empty() {
                break;
            }
            p = p.clip(h);
        }
        p
    }

    /// Half-planes through the edges (full-dimensional polygons only).
    pub fn halfplanes(&self) -> Vec<HalfPlane> {
        let n = self.verts.len();
        if n < 3 {
            return self.degenerate_halfplanes();
        }
        (0..n)
            .map(|k| {
                let (a, b) = (&self.verts[k], &self.verts[(k + 1) % n]);
                // Interior is to the left of a→b.
                let normal = [&b[1] - &a[1], &a[0] - &b[0]];
                let bound = &normal[0] * &a[0] + &normal[1] * &a[1];
                HalfPlane { normal, bound }
            })
            .collect()
    }

    fn degenerate_halfplanes(&self) -> Vec<HalfPlane> {
        let hp = |n0: Rat, n1: Rat, p: &P2| {
            let bound = &n0 * &p[0] + &n1 * &p[1];
            HalfPlane { normal: [n0, n1], bound }
        };
        match self.verts.as_slice() {
            [] => vec![hp(int(0), int(0), &[int(0), int(0)]).shifted(int(-1))],
            [p] => vec![
                hp(int(1), int(0), p),
                hp(int(-1), int(0), p),
                hp(int(0), int(1), p),
                hp(int(0), int(-1), p),
            ],
            [a, b] => {
                let d = [&b[0] - &a[0], &b[1] - &a[1]];
                vec![
                    hp(-d[1].clone(), d[0].clone(), a),
                    hp(d[1].clone(), -d[0].clone(), a),
                    hp(d[0].clone(), d[1].clone(), b),
                    hp(-d[0].clone(), -d[1].clone(), a),
                ]
            }
            _ => unreachable!(),
        }
    }

    pub fn contains(&self, x: &P2) -> bool {
        match self.verts.len() {
            0 => false,
            1 => &self.verts[0] == x,
            2 => {
                let (a, b) = (&self.verts[0], &self.verts[1]);
                cross(a, b, x).is_zero() && {
                    let t0 = (&x[0] - &a[0]) * (&b[0] - &a[0]) + (&x[1] - &a[1]) * (&b[1] - &a[1]);
                    let len = (&b[0] - &a[0]) * (&b[0] - &a[0]) + (&b[1] - &a[1]) * (&b[1] - &a[1]);
                    !t0.is_negative() && t0 <= len
                }
            }
            n => (0..n).all(|k| !cross(&self.verts[k], &self.verts[(k + 1) % n], x).is_negative()),
        }
    }

    pub fn contains_interior(&self, x: &P2) -> bool {
        let n = self.verts.len();
        n >= 3 && (0..n).all(|k| cross(&self.verts[k], &self.verts[(k + 1) % n], x).is_positive())
    }

    /// Average of the vertices; an interior point when full-dimensional.
    pub fn vertex_centroid(&self) -> Option<P2> {
        let n = self.verts.len();
        if n == 0 {
            return None;
        }
        let (sx, sy) = self.verts.iter().fold((Rat::zero(), Rat::zero()), |(a, b), p| (a + &p[0], b + &p[1]));
        let k = int(n as i64);
        Some([sx / &k, sy / k])
    }

    pub fn min_of(&self, f: &AffineFn2<Rat>) -> Option<Rat> {
        self.verts.iter().map(|p| f.eval(p)).min()
    }

    pub fn max_of(&self, f: &AffineFn2<Rat>) -> Option<Rat> {
        self.verts.iter().map(|p| f.eval(p)).max()
    }

    /// Image under an invertible affine map.
    pub fn map(&self, m: &Affine2<Rat>) -> ConvexPolygon {
        let mut verts: Vec<P2> = self.verts.iter().map(|p| m.apply(p)).collect();
        if verts.len() < 3 {
            return ConvexPolygon::from_cycle(verts);
        }
        if m.linear.det().is_negative() {
            verts.reverse();
        }
        ConvexPolygon { verts }
    }

    pub fn intersect(&self, other: &ConvexPolygon) -> ConvexPolygon {
        self.clip_all(other.halfplanes().iter())
    }
}

impl HalfPlane {
    fn shifted(mut self, by: Rat) -> Self {
        self.bound += by;
        self
    }
}
