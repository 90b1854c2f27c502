//! Symplectic 2×2 matrices with their lifts to the universal cover.
//!
//! A lift is a matrix together with a [`RotBracket`] locating its rotation number:
//! an integer, a half-integer, or an open interval between consecutive multiples
//! of 1/2. Brackets are tracked internally in half-units.

use std::f64::consts::PI;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::{Mat2F, Rat};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sp2Class {
    PositiveHyperbolic,
    NegativeHyperbolic,
    PositiveShear,
    NegativeShear,
    PositiveElliptic,
    NegativeElliptic,
    Identity,
}

impl Sp2Class {
    /// Classes whose lifts have integral rotation number.
    pub fn is_positive_real(self) -> bool {
        matches!(self, Sp2Class::PositiveHyperbolic | Sp2Class::PositiveShear | Sp2Class::Identity)
    }

    pub fn is_negative_real(self) -> bool {
        matches!(self, Sp2Class::NegativeHyperbolic | Sp2Class::NegativeShear)
    }
}

pub fn classify(m: &Mat2F, tol: f64) -> Result<Sp2Class> {
    let tr = m.trace();
    if tr > 2.0 + tol {
        return Ok(Sp2Class::PositiveHyperbolic);
    }
    if tr < -2.0 - tol {
        return Ok(Sp2Class::NegativeHyperbolic);
    }
    if (tr - 2.0).abs() <= tol {
        return if m.max_abs_diff(&Mat2::identity()) <= tol {
            Ok(Sp2Class::Identity)
        } else {
            Err(Error::AmbiguousClassification { trace: tr })
        };
    }
    if (tr + 2.0).abs() <= tol {
        let minus_id = Mat2::new(-1.0, 0.0, 0.0, -1.0);
        return if m.max_abs_diff(&minus_id) <= tol {
            Ok(Sp2Class::NegativeShear)
        } else {
            Err(Error::AmbiguousClassification { trace: tr })
        };
    }
    let positive = if m.c().abs() > tol { *m.c() > 0.0 } else { *m.b() < 0.0 };
    Ok(if positive { Sp2Class::PositiveElliptic } else { Sp2Class::NegativeElliptic })
}

/// Class of an exact rational symplectic map `t` expressed in a basis whose
/// symplectic area is `form`; used when the float classification is unreliable.
pub fn classify_exact(t: &Mat2<Rat>, form: &Rat) -> Sp2Class {
    let two = Rat::from_integer(2.into());
    let tr = t.trace();
    if tr > two {
        Sp2Class::PositiveHyperbolic
    } else if tr < -two.clone() {
        Sp2Class::NegativeHyperbolic
    } else if tr == two {
        if t.is_identity() { Sp2Class::Identity } else { Sp2Class::PositiveShear }
    } else if tr == -two {
        Sp2Class::NegativeShear
    } else {
        // det[x, Tx] for x = e₁ is the lower-left entry; the frame rescales it by `form`.
        let c = t.c();
        let c = if c.is_zero() { -t.b().clone() } else { c.clone() };
        if c.is_positive() == form.is_positive() {
            Sp2Class::PositiveElliptic
        } else {
            Sp2Class::NegativeElliptic
        }
    }
}

/// Fractional part of the rotation number in `[0, 1)`.
pub fn mod_rotation(m: &Mat2F, tol: f64) -> Result<f64> {
    let class = classify(m, tol)?;
    Ok(match class {
        c if c.is_positive_real() => 0.0,
        c if c.is_negative_real() => 0.5,
        c => {
            let theta = (m.trace() / 2.0).clamp(-1.0, 1.0).acos() / (2.0 * PI);
            if c == Sp2Class::PositiveElliptic { theta } else { 1.0 - theta }
        }
    })
}

/// Where the rotation number of a lift lies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RotBracket {
    /// Exactly `n`.
    Integer(i64),
    /// Exactly `n + 1/2`.
    HalfInteger(i64),
    /// In `(n, n + 1/2)`.
    OpenLow(i64),
    /// In `(n − 1/2, n)`.
    OpenHigh(i64),
}

impl RotBracket {
    /// Lower end in half-units.
    pub fn lower_half(self) -> i64 {
        match self {
            RotBracket::Integer(n) | RotBracket::OpenLow(n) => 2 * n,
            RotBracket::HalfInteger(n) => 2 * n + 1,
            RotBracket::OpenHigh(n) => 2 * n - 1,
        }
    }

    /// Upper end in half-units.
    pub fn upper_half(self) -> i64 {
        match self {
            RotBracket::Integer(n) => 2 * n,
            RotBracket::HalfInteger(n) | RotBracket::OpenLow(n) => 2 * n + 1,
            RotBracket::OpenHigh(n) => 2 * n,
        }
    }

    pub fn is_point(self) -> bool {
        matches!(self, RotBracket::Integer(_) | RotBracket::HalfInteger(_))
    }

    pub fn lower(self) -> Rat {
        Rat::new(self.lower_half().into(), 2.into())
    }

    pub fn upper(self) -> Rat {
        Rat::new(self.upper_half().into(), 2.into())
    }

    fn point(h: i64) -> Self {
        if h.rem_euclid(2) == 0 { RotBracket::Integer(h.div_euclid(2)) } else { RotBracket::HalfInteger(h.div_euclid(2)) }
    }

    /// The open interval `(l/2, (l+1)/2)`.
    fn open(l: i64) -> Self {
        if l.rem_euclid(2) == 0 { RotBracket::OpenLow(l.div_euclid(2)) } else { RotBracket::OpenHigh((l + 1).div_euclid(2)) }
    }

    fn fits(self, class: Sp2Class) -> bool {
        match self {
            RotBracket::Integer(_) => class.is_positive_real(),
            RotBracket::HalfInteger(_) => class.is_negative_real(),
            RotBracket::OpenLow(_) => class == Sp2Class::PositiveElliptic,
            RotBracket::OpenHigh(_) => class == Sp2Class::NegativeElliptic,
        }
    }
}

impl std::fmt::Display for RotBracket {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        let half = |h: i64| if h % 2 == 0 { format!("{}", h / 2) } else { format!("{}/2", h) };
        if self.is_point() {
            write!(f, "{}", half(self.lower_half()))
        } else {
            write!(f, "({}, {})", half(self.lower_half()), half(self.upper_half()))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftedSp2 {
    pub mat: Mat2F,
    pub class: Sp2Class,
    pub bracket: RotBracket,
}

impl LiftedSp2 {
    pub fn identity() -> Self {
        LiftedSp2 { mat: Mat2::identity(), class: Sp2Class::Identity, bracket: RotBracket::Integer(0) }
    }

    /// Lift of a flow-graph edge matrix, which is positive elliptic with rotation
    /// in `(0, 1/2)` whatever its floating-point trace says.
    pub fn edge(m: Mat2F) -> Self {
        LiftedSp2 { mat: m, class: Sp2Class::PositiveElliptic, bracket: RotBracket::OpenLow(0) }
    }
}

/// Lift of a positive elliptic matrix with rotation number in `(0, 1/2)`.
pub fn edge_lift(m: Mat2F, tol: f64) -> Result<LiftedSp2> {
    match classify(&m, tol) {
        Ok(Sp2Class::PositiveElliptic) => Ok(LiftedSp2::edge(m)),
        _ => Err(Error::NotElliptic { trace: m.trace() }),
    }
}

/// `a·b` where `a` has rotation in `(0, 1/2)`; the product's rotation lies in
/// `[ρ(b), ρ(b) + 1/2]`, which pins the bracket once the class is known.
pub fn mul_left_small(a: &LiftedSp2, b: &LiftedSp2, tol: f64) -> Result<LiftedSp2> {
    let mat = &a.mat * &b.mat;
    let class = classify(&mat, tol)?;
    mul_left_small_as(a, b, mat, class)
}

/// As [`mul_left_small`], with the product's class supplied by the caller.
pub fn mul_left_small_as(a: &LiftedSp2, b: &LiftedSp2, mat: Mat2F, class: Sp2Class) -> Result<LiftedSp2> {
    debug_assert_eq!(a.bracket, RotBracket::OpenLow(0));
    let (lo, hi) = (b.bracket.lower_half(), b.bracket.upper_half());
    let cands: Vec<RotBracket> = if b.bracket.is_point() {
        // Closed range [lo, lo + 1].
        vec![RotBracket::point(lo), RotBracket::point(lo + 1), RotBracket::open(lo)]
    } else {
        // Open range (lo, hi + 1) = (lo, lo + 2).
        vec![RotBracket::point(lo + 1), RotBracket::open(lo), RotBracket::open(hi)]
    };
    let mut fitting = cands.into_iter().filter(|c| c.fits(class));
    match (fitting.next(), fitting.next()) {
        (Some(bracket), None) => Ok(LiftedSp2 { mat, class, bracket }),
        _ => Err(Error::BracketConflict),
    }
}

/// Turns `v` by `m`; returns the unit image and the signed angle swept, in turns.
pub fn turn_step(m: &Mat2F, v: [f64; 2]) -> ([f64; 2], f64) {
    let w = m.apply(&v);
    let angle = (v[0] * w[1] - v[1] * w[0]).atan2(v[0] * w[0] + v[1] * w[1]);
    let n = w[0].hypot(w[1]);
    ([w[0] / n, w[1] / n], angle / (2.0 * PI))
}

/// Lift of `mat` whose class is known and whose lifted path turns some vector by
/// `turns`. Every vector's winding lies within half a turn of the rotation number,
/// on the side fixed by the class; `margin` guards those boundaries.
pub fn lift_from_turns(mat: Mat2F, class: Sp2Class, turns: f64, margin: f64) -> Result<LiftedSp2> {
    let near = |x: f64| (x - x.round()).abs() < margin;
    let bracket = match class {
        Sp2Class::PositiveElliptic | Sp2Class::NegativeElliptic => {
            let half = 2.0 * turns;
            if near(half) {
                return Err(Error::BracketConflict);
            }
            let b = RotBracket::open(half.floor() as i64);
            if !b.fits(class) {
                return Err(Error::BracketConflict);
            }
            b
        }
        c if c.is_positive_real() => {
            if near(turns + 0.5) {
                return Err(Error::BracketConflict);
            }
            RotBracket::Integer(turns.round() as i64)
        }
        _ => {
            if near(turns) {
                return Err(Error::BracketConflict);
            }
            RotBracket::HalfInteger((turns - 0.5).round() as i64)
        }
    };
    Ok(LiftedSp2 { mat, class, bracket })
}

/// Conley–Zehnder index `⌊ρ⌋ + ⌈ρ⌉`, or `None` when 1 is an eigenvalue.
pub fn cz_from(l: &LiftedSp2) -> Option<i64> {
    match l.bracket {
        RotBracket::OpenLow(n) => Some(2 * n + 1),
        RotBracket::OpenHigh(n) => Some(2 * n - 1),
        RotBracket::HalfInteger(n) => Some(2 * n + 1),
        RotBracket::Integer(n) => (l.class == Sp2Class::PositiveHyperbolic).then_some(2 * n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::int;

    fn rot(turns: f64) -> Mat2F {
        let a = 2.0 * PI * turns;
        Mat2::new(a.cos(), -a.sin(), a.sin(), a.cos())
    }

    const T: f64 = DEFAULT_TOL;

    #[test]
    fn classes() {
        let m = Mat2::new(0.0, -1.0, 1.0, 1.0);
        assert_eq!(classify(&m, T).unwrap(), Sp2Class::PositiveElliptic);
        assert_eq!(classify(&Mat2::identity(), T).unwrap(), Sp2Class::Identity);
        assert_eq!(classify(&Mat2::new(-1.0, 0.0, 0.0, -1.0), T).unwrap(), Sp2Class::NegativeShear);
        assert_eq!(classify(&Mat2::new(2.0, 0.0, 0.0, 0.5), T).unwrap(), Sp2Class::PositiveHyperbolic);
        assert_eq!(classify(&Mat2::new(-2.0, 0.0, 0.0, -0.5), T).unwrap(), Sp2Class::NegativeHyperbolic);
        assert_eq!(classify(&rot(0.7), T).unwrap(), Sp2Class::NegativeElliptic);
        assert!(matches!(classify(&Mat2::new(1.0, 1.0, 0.0, 1.0), T), Err(Error::AmbiguousClassification { .. })));
    }

    #[test]
    fn lifts_from_winding() {
        let (mut v, mut turns) = ([1.0, 0.0], 0.0);
        for _ in 0..3 {
            let (w, t) = turn_step(&rot(0.3), v);
            v = w;
            turns += t;
        }
        assert!((turns - 0.9).abs() < 1e-12);
        let l = lift_from_turns(rot(0.9), Sp2Class::NegativeElliptic, turns, 1e-6).unwrap();
        assert_eq!(cz_from(&l), Some(1));
        let h = lift_from_turns(Mat2::new(2.0, 0.0, 0.0, 0.5), Sp2Class::PositiveHyperbolic, 1.1, 1e-6).unwrap();
        assert_eq!(h.bracket, RotBracket::Integer(1));
        assert!(lift_from_turns(rot(0.5), Sp2Class::PositiveElliptic, 0.5, 1e-6).is_err());
    }

    #[test]
    fn rotation_fractions() {
        assert!((mod_rotation(&Mat2::new(0.0, -1.0, 1.0, 1.0), T).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert!((mod_rotation(&rot(0.3), T).unwrap() - 0.3).abs() < 1e-12);
        assert!((mod_rotation(&rot(0.7), T).unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(mod_rotation(&Mat2::new(2.0, 0.0, 0.0, 0.5), T).unwrap(), 0.0);
    }

    #[test]
    fn edge_lifts() {
        let a = edge_lift(Mat2::new(0.0, -1.0, 1.0, 1.0), T).unwrap();
        assert_eq!(a.bracket, RotBracket::OpenLow(0));
        assert!(edge_lift(Mat2::new(1.0, -1.0, 1.0, 0.0), T).is_ok());
        assert!(matches!(edge_lift(Mat2::new(2.0, 0.0, 0.0, 0.5), T), Err(Error::NotElliptic { .. })));
    }

    #[test]
    fn twelve_sixth_turns_make_two() {
        let e = edge_lift(Mat2::new(0.0, -1.0, 1.0, 1.0), T).unwrap();
        let mut acc = LiftedSp2::identity();
        let mut lowers = Vec::new();
        for _ in 0..12 {
            acc = mul_left_small(&e, &acc, T).unwrap();
            lowers.push(acc.bracket.lower_half());
        }
        assert_eq!(acc.bracket, RotBracket::Integer(2));
        assert_eq!(cz_from(&acc), None);
        assert!(lowers.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn identity_on_right_keeps_left_bracket() {
        let e = edge_lift(rot(0.2), T).unwrap();
        assert_eq!(mul_left_small(&e, &LiftedSp2::identity(), T).unwrap().bracket, RotBracket::OpenLow(0));
    }

    #[test]
    fn quarter_turns_make_half_turn() {
        let q = edge_lift(rot(0.25), T).unwrap();
        let h = mul_left_small(&q, &q, T).unwrap();
        assert_eq!(h.class, Sp2Class::NegativeShear);
        assert_eq!(h.bracket, RotBracket::HalfInteger(0));
        assert_eq!(cz_from(&h), Some(1));
    }

    #[test]
    fn cz_values() {
        let mk = |bracket, class| LiftedSp2 { mat: Mat2::identity(), class, bracket };
        assert_eq!(cz_from(&mk(RotBracket::Integer(2), Sp2Class::PositiveShear)), None);
        assert_eq!(cz_from(&mk(RotBracket::OpenLow(1), Sp2Class::PositiveElliptic)), Some(3));
        assert_eq!(cz_from(&mk(RotBracket::HalfInteger(1), Sp2Class::NegativeShear)), Some(3));
        assert_eq!(cz_from(&mk(RotBracket::OpenHigh(2), Sp2Class::NegativeElliptic)), Some(3));
        assert_eq!(cz_from(&mk(RotBracket::Integer(1), Sp2Class::PositiveHyperbolic)), Some(2));
    }

    #[test]
    fn exact_classes() {
        let one = int(1);
        assert_eq!(classify_exact(&Mat2::identity(), &one), Sp2Class::Identity);
        assert_eq!(classify_exact(&Mat2::new(int(1), int(1), int(0), int(1)), &one), Sp2Class::PositiveShear);
        assert_eq!(classify_exact(&Mat2::new(int(0), int(-1), int(1), int(1)), &one), Sp2Class::PositiveElliptic);
        assert_eq!(classify_exact(&Mat2::new(int(0), int(-1), int(1), int(1)), &int(-3)), Sp2Class::NegativeElliptic);
        assert_eq!(classify_exact(&Mat2::new(int(3), int(1), int(2), int(1)), &one), Sp2Class::PositiveHyperbolic);
    }

    #[test]
    fn display() {
        assert_eq!(RotBracket::Integer(2).to_string(), "2");
        assert_eq!(RotBracket::OpenLow(1).to_string(), "(1, 3/2)");
        assert_eq!(RotBracket::OpenHigh(1).to_string(), "(1/2, 1)");
        assert_eq!(RotBracket::HalfInteger(-1).to_string(), "-1/2");
    }
}
