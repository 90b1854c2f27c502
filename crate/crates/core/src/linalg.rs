//! Small fixed-size linear algebra, generic over [`Scalar`].
//!
//! Coordinates on R⁴ are Lagrangian `(x1, x2, y1, y2)`. The complex structure
//! and the other two quaternion units act by signed coordinate permutations,
//! so they are exact for any scalar type.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::num::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vec4<T>(pub [T; 4]);

impl<T: Scalar> Vec4<T> {
    pub fn new(x1: T, x2: T, y1: T, y2: T) -> Self {
        Vec4([x1, x2, y1, y2])
    }

    pub fn zero() -> Self {
        Vec4([T::zero(), T::zero(), T::zero(), T::zero()])
    }

    pub fn unit(k: usize) -> Self {
        let mut v = Self::zero();
        v.0[k] = T::one();
        v
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, o: &Self) -> T {
        let [a0, a1, a2, a3] = &self.0;
        let [b0, b1, b2, b3] = &o.0;
        a0.clone() * b0.clone() + a1.clone() * b1.clone() + a2.clone() * b2.clone() + a3.clone() * b3.clone()
    }

    pub fn scale(&self, s: &T) -> Self {
        Vec4(self.0.clone().map(|x| x * s.clone()))
    }

    /// Standard complex structure: `i(x1,x2,y1,y2) = (-y1,-y2,x1,x2)`.
    pub fn quat_i(&self) -> Self {
        let [x1, x2, y1, y2] = self.0.clone();
        Vec4([-y1, -y2, x1, x2])
    }

    /// `j(x1,x2,y1,y2) = (-x2,x1,y2,-y1)`.
    pub fn quat_j(&self) -> Self {
        let [x1, x2, y1, y2] = self.0.clone();
        Vec4([-x2, x1, y2, -y1])
    }

    /// `k = ij`, so `k(x1,x2,y1,y2) = (-y2,y1,-x2,x1)`.
    pub fn quat_k(&self) -> Self {
        let [x1, x2, y1, y2] = self.0.clone();
        Vec4([-y2, y1, -x2, x1])
    }

    /// Standard symplectic form `ω₀(u,v) = ⟨iu, v⟩ = Σ dxₖ∧dyₖ`.
    pub fn omega(&self, o: &Self) -> T {
        self.quat_i().dot(o)
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Vec4<U> {
        Vec4([f(&self.0[0]), f(&self.0[1]), f(&self.0[2]), f(&self.0[3])])
    }

    pub fn to_f64(&self) -> Vec4<f64> {
        self.map(Scalar::to_f64_lossy)
    }
}

impl Vec4<f64> {
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl<T> Index<usize> for Vec4<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec4<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Scalar> Add for &Vec4<T> {
    type Output = Vec4<T>;
    fn add(self, o: &Vec4<T>) -> Vec4<T> {
        Vec4(std::array::from_fn(|k| self.0[k].clone() + o.0[k].clone()))
    }
}

impl<T: Scalar> Sub for &Vec4<T> {
    type Output = Vec4<T>;
    fn sub(self, o: &Vec4<T>) -> Vec4<T> {
        Vec4(std::array::from_fn(|k| self.0[k].clone() - o.0[k].clone()))
    }
}

impl<T: Scalar> Neg for &Vec4<T> {
    type Output = Vec4<T>;
    fn neg(self) -> Vec4<T> {
        Vec4(self.0.clone().map(|x| -x))
    }
}

/// Row-major 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2<T>(pub [[T; 2]; 2]);

impl<T: Scalar> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn from_cols(c0: [T; 2], c1: [T; 2]) -> Self {
        let [a, c] = c0;
        let [b, d] = c1;
        Self::new(a, b, c, d)
    }

    pub fn a(&self) -> &T {
        &self.0[0][0]
    }
    pub fn b(&self) -> &T {
        &self.0[0][1]
    }
    pub fn c(&self) -> &T {
        &self.0[1][0]
    }
    pub fn d(&self) -> &T {
        &self.0[1][1]
    }

    pub fn det(&self) -> T {
        self.a().clone() * self.d().clone() - self.b().clone() * self.c().clone()
    }

    pub fn trace(&self) -> T {
        self.a().clone() + self.d().clone()
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a().clone(), self.c().clone(), self.b().clone(), self.d().clone())
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.is_zero() {
            return None;
        }
        Some(Self::new(
            self.d().clone() / det.clone(),
            -self.b().clone() / det.clone(),
            -self.c().clone() / det.clone(),
            self.a().clone() / det,
        ))
    }

    pub fn apply(&self, v: &[T; 2]) -> [T; 2] {
        [
            self.a().clone() * v[0].clone() + self.b().clone() * v[1].clone(),
            self.c().clone() * v[0].clone() + self.d().clone() * v[1].clone(),
        ]
    }

    pub fn sub_identity(&self) -> Self {
        Self::new(self.a().clone() - T::one(), self.b().clone(), self.c().clone(), self.d().clone() - T::one())
    }

    pub fn is_identity(&self) -> bool {
        self.a().is_one() && self.b().is_zero() && self.c().is_zero() && self.d().is_one()
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let mut m = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                m = m.max((self.0[r][c].clone() - o.0[r][c].clone()).abs().to_f64_lossy());
            }
        }
        m
    }

    pub fn to_f64(&self) -> Mat2<f64> {
        Mat2(self.0.clone().map(|row| row.map(|x| x.to_f64_lossy())))
    }
}

impl<T: Scalar> Mul for &Mat2<T> {
    type Output = Mat2<T>;
    fn mul(self, o: &Mat2<T>) -> Mat2<T> {
        let m = |r: usize, c: usize| {
            self.0[r][0].clone() * o.0[0][c].clone() + self.0[r][1].clone() * o.0[1][c].clone()
        };
        Mat2([[m(0, 0), m(0, 1)], [m(1, 0), m(1, 1)]])
    }
}

/// Affine map `x ↦ linear·x + offset` on R².
#[derive(Clone, Debug, PartialEq)]
pub struct Affine2<T> {
    pub linear: Mat2<T>,
    pub offset: [T; 2],
}

impl<T: Scalar> Affine2<T> {
    pub fn identity() -> Self {
        Affine2 { linear: Mat2::identity(), offset: [T::zero(), T::zero()] }
    }

    /// The unique affine map sending `0, e₁, e₂` to the three given images.
    pub fn from_images(origin: [T; 2], img_e1: [T; 2], img_e2: [T; 2]) -> Self {
        let c0 = [img_e1[0].clone() - origin[0].clone(), img_e1[1].clone() - origin[1].clone()];
        let c1 = [img_e2[0].clone() - origin[0].clone(), img_e2[1].clone() - origin[1].clone()];
        Affine2 { linear: Mat2::from_cols(c0, c1), offset: origin }
    }

    pub fn apply(&self, x: &[T; 2]) -> [T; 2] {
        let [u, v] = self.linear.apply(x);
        [u + self.offset[0].clone(), v + self.offset[1].clone()]
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &Self) -> Self {
        Affine2 { linear: &self.linear * &inner.linear, offset: self.apply(&inner.offset) }
    }

    pub fn inverse(&self) -> Option<Self> {
        let inv = self.linear.inverse()?;
        let [u, v] = inv.apply(&self.offset);
        Some(Affine2 { linear: inv, offset: [-u, -v] })
    }

    /// Fixed points of the map, as an affine subspace intersected with nothing.
    pub fn fixed_points(&self) -> FixedSet<T> {
        let m = self.linear.sub_identity();
        let rhs = [-self.offset[0].clone(), -self.offset[1].clone()];
        if let Some(inv) = m.inverse() {
            return FixedSet::Point(inv.apply(&rhs));
        }
        // Rank ≤ 1: either M = I or a single line of solutions.
        let rows = [[m.a().clone(), m.b().clone(), rhs[0].clone()], [m.c().clone(), m.d().clone(), rhs[1].clone()]];
        let nonzero: Vec<&[T; 3]> = rows.iter().filter(|r| !(r[0].is_zero() && r[1].is_zero())).collect();
        if nonzero.is_empty() {
            return if rhs[0].is_zero() && rhs[1].is_zero() { FixedSet::Plane } else { FixedSet::Empty };
        }
        let line = nonzero[0];
        // Every row must be a multiple of the chosen one, including its right-hand side.
        for r in &rows {
            let cross01 = r[0].clone() * line[1].clone() - r[1].clone() * line[0].clone();
            let cross02 = r[0].clone() * line[2].clone() - r[2].clone() * line[0].clone();
            let cross12 = r[1].clone() * line[2].clone() - r[2].clone() * line[1].clone();
            if !cross01.is_zero() || !cross02.is_zero() || !cross12.is_zero() {
                return FixedSet::Empty;
            }
        }
        FixedSet::Line { normal: [line[0].clone(), line[1].clone()], value: line[2].clone() }
    }
}

/// Solution set of `φ(x) = x` for an affine map of the plane.
#[derive(Clone, Debug, PartialEq)]
pub enum FixedSet<T> {
    Empty,
    Point([T; 2]),
    /// `{x : normal·x = value}`.
    Line { normal: [T; 2], value: T },
    Plane,
}

/// Affine functional `x ↦ coeffs·x + constant` on R².
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFn2<T> {
    pub coeffs: [T; 2],
    pub constant: T,
}

impl<T: Scalar> AffineFn2<T> {
    pub fn zero() -> Self {
        AffineFn2 { coeffs: [T::zero(), T::zero()], constant: T::zero() }
    }

    pub fn eval(&self, x: &[T; 2]) -> T {
        self.coeffs[0].clone() * x[0].clone() + self.coeffs[1].clone() * x[1].clone() + self.constant.clone()
    }

    /// `self ∘ map`.
    pub fn pullback(&self, map: &Affine2<T>) -> Self {
        let l = &map.linear;
        AffineFn2 {
            coeffs: [
                self.coeffs[0].clone() * l.a().clone() + self.coeffs[1].clone() * l.c().clone(),
                self.coeffs[0].clone() * l.b().clone() + self.coeffs[1].clone() * l.d().clone(),
            ],
            constant: self.eval(&map.offset),
        }
    }

    pub fn plus(&self, o: &Self) -> Self {
        AffineFn2 {
            coeffs: [self.coeffs[0].clone() + o.coeffs[0].clone(), self.coeffs[1].clone() + o.coeffs[1].clone()],
            constant: self.constant.clone() + o.constant.clone(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[0].is_zero() && self.coeffs[1].is_zero()
    }
}

/// Determinant of a square matrix by Gaussian elimination (partial pivoting by magnitude).
pub fn det<T: Scalar>(rows: &[Vec<T>]) -> T {
    let n = rows.len();
    let mut m: Vec<Vec<T>> = rows.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let Some(piv) = (col..n).filter(|&r| !m[r][col].is_zero()).max_by(|&x, &y| {
            m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
        }) else {
            return T::zero();
        };
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det = det * p.clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone() / p.clone();
            for c in col..n {
                let v = m[col][c].clone() * f.clone();
                m[r][c] = m[r][c].clone() - v;
            }
        }
    }
    det
}

/// Row-reduces `rows` in place and returns the rank.
pub fn rank<T: Scalar>(rows: &[Vec<T>]) -> usize {
    let mut m: Vec<Vec<T>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..ncols {
        let Some(piv) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(piv, r);
        let p = m[r][col].clone();
        for i in 0..m.len() {
            if i == r || m[i][col].is_zero() {
                continue;
            }
            let f = m[i][col].clone() / p.clone();
            for c in col..ncols {
                let v = m[r][c].clone() * f.clone();
                m[i][c] = m[i][c].clone() - v;
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Solves the square system `a·x = b`; `None` if singular.
pub fn solve<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = a.len();
    let mut m: Vec<Vec<T>> = a.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(bi.clone());
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n).filter(|&r| !m[r][col].is_zero()).max_by(|&x, &y| {
            m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        m.swap(piv, col);
        let p = m[col][col].clone();
        for c in col..=n {
            m[col][c] = m[col][c].clone() / p.clone();
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in col..=n {
                let v = m[col][c].clone() * f.clone();
                m[r][c] = m[r][c].clone() - v;
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

/// A vector orthogonal to the three given vectors (generalized cross product);
/// zero iff they are linearly dependent.
pub fn normal_of<T: Scalar>(a: &Vec4<T>, b: &Vec4<T>, c: &Vec4<T>) -> Vec4<T> {
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&k| k != skip).collect();
        let rows: Vec<Vec<T>> = [a, b, c].iter().map(|v| cols.iter().map(|&k| v.0[k].clone()).collect()).collect();
        det(&rows)
    };
    Vec4([minor(0), -minor(1), minor(2), -minor(3)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat, Rat};

    fn v(a: i64, b: i64, c: i64, d: i64) -> Vec4<Rat> {
        Vec4::new(int(a), int(b), int(c), int(d))
    }

    #[test]
    fn quaternion_relations_hold() {
        for k in 0..4 {
            let e = Vec4::<Rat>::unit(k);
            assert_eq!(e.quat_i().quat_i(), -&e);
            assert_eq!(e.quat_j().quat_j(), -&e);
            assert_eq!(e.quat_k().quat_k(), -&e);
            // k = ij
            assert_eq!(e.quat_j().quat_i(), e.quat_k());
        }
    }

    #[test]
    fn quaternion_units_are_orthogonal() {
        let basis: Vec<Vec4<Rat>> = (0..4).map(Vec4::unit).collect();
        for u in &basis {
            for w in &basis {
                assert_eq!(u.quat_i().dot(&w.quat_i()), u.dot(w));
                assert_eq!(u.quat_j().dot(&w.quat_j()), u.dot(w));
                assert_eq!(u.quat_k().dot(&w.quat_k()), u.dot(w));
                // i preserves ω₀; j and k anticommute with i and reverse it.
                assert_eq!(u.quat_i().omega(&w.quat_i()), u.omega(w));
                assert_eq!(u.quat_j().omega(&w.quat_j()), -u.omega(w));
                assert_eq!(u.quat_k().omega(&w.quat_k()), -u.omega(w));
            }
        }
    }

    #[test]
    fn omega_is_sum_of_dx_dy() {
        assert_eq!(v(1, 0, 0, 0).omega(&v(0, 0, 1, 0)), int(1));
        assert_eq!(v(0, 1, 0, 0).omega(&v(0, 0, 0, 1)), int(1));
        assert_eq!(v(1, 0, 0, 0).omega(&v(0, 1, 0, 0)), int(0));
    }

    #[test]
    fn determinant_and_solve_agree() {
        let a = vec![
            vec![int(2), int(1), int(0), int(0)],
            vec![int(1), int(3), int(1), int(0)],
            vec![int(0), int(1), int(4), int(1)],
            vec![int(0), int(0), int(1), int(5)],
        ];
        assert_eq!(det(&a), int(2 * (3 * 19 - 5) - 19));
        let x = solve(&a, &[int(1), int(2), int(3), int(4)]).unwrap();
        for (row, bi) in a.iter().zip([1, 2, 3, 4]) {
            let s: Rat = row.iter().zip(&x).map(|(p, q)| p * q).sum();
            assert_eq!(s, int(bi));
        }
        assert_eq!(rank(&a), 4);
        assert_eq!(rank(&[vec![int(1), int(2)], vec![int(2), int(4)]]), 1);
    }

    #[test]
    fn normal_of_is_orthogonal() {
        let (a, b, c) = (v(1, 2, 0, 1), v(0, 1, 3, 1), v(2, 0, 1, 1));
        let n = normal_of(&a, &b, &c);
        assert!(!n.is_zero());
        assert_eq!(n.dot(&a), int(0));
        assert_eq!(n.dot(&b), int(0));
        assert_eq!(n.dot(&c), int(0));
        assert!(normal_of(&a, &b, &(&a + &b)).is_zero());
    }

    #[test]
    fn affine_fixed_sets() {
        let m = Affine2 { linear: Mat2::new(int(2), int(0), int(0), int(3)), offset: [int(1), int(2)] };
        assert_eq!(m.fixed_points(), FixedSet::Point([int(-1), int(-1)]));
        assert_eq!(Affine2::<Rat>::identity().fixed_points(), FixedSet::Plane);
        let shift = Affine2 { linear: Mat2::identity(), offset: [int(1), int(0)] };
        assert_eq!(shift.fixed_points(), FixedSet::Empty);
        let shear = Affine2 { linear: Mat2::new(int(1), int(1), int(0), int(1)), offset: [int(-2), int(0)] };
        match shear.fixed_points() {
            FixedSet::Line { normal, value } => {
                // y = 2
                assert_eq!(normal[0], int(0));
                assert_eq!(value.clone() / normal[1].clone(), int(2));
            }
            other => panic!("expected a line, got {other:?}"),
        }
    }

    #[test]
    fn affine_composition_and_pullback() {
        let f = Affine2 { linear: Mat2::new(int(1), int(2), int(0), int(1)), offset: [rat(1, 2), int(0)] };
        let g = Affine2 { linear: Mat2::new(int(0), int(-1), int(1), int(0)), offset: [int(1), int(1)] };
        let x = [rat(1, 3), int(2)];
        assert_eq!(g.after(&f).apply(&x), g.apply(&f.apply(&x)));
        let inv = f.inverse().unwrap();
        assert_eq!(inv.apply(&f.apply(&x)), x);
        let h = AffineFn2 { coeffs: [int(3), int(-1)], constant: int(5) };
        assert_eq!(h.pullback(&f).eval(&x), h.eval(&f.apply(&x)));
    }
}
