//! A few standard polytopes.

use crate::linalg::Vec4;
use crate::num::{int, rat};
use crate::polytope::Polytope;
use crate::Vec4Q;

/// The 24-cell with vertices `±e_k` and `(±1/2, ±1/2, ±1/2, ±1/2)`.
pub fn twenty_four_cell() -> Polytope {
    let mut pts = Vec::with_capacity(24);
    for k in 0..4 {
        for s in [1, -1] {
            let mut v: Vec4Q = Vec4::zero();
            v.0[k] = int(s);
            pts.push(v);
        }
    }
    for m in 0..16 {
        pts.push(Vec4([0, 1, 2, 3].map(|b| if m >> b & 1 == 1 { rat(1, 2) } else { rat(-1, 2) })));
    }
    Polytope::convex_hull(&pts).expect("24-cell")
}

/// Convex hull of 0 and the unit vectors.
pub fn standard_simplex() -> Polytope {
    let mut pts = vec![Vec4::zero()];
    pts.extend((0..4).map(Vec4::unit));
    Polytope::convex_hull(&pts).expect("simplex")
}

/// `[-1, 1]⁴`.
pub fn hypercube() -> Polytope {
    let pts: Vec<Vec4Q> = (0..16).map(|m| Vec4([0, 1, 2, 3].map(|b| int(if m >> b & 1 == 1 { 1 } else { -1 })))).collect();
    Polytope::convex_hull(&pts).expect("hypercube")
}

/// Parses rows like `"1/3, -2/3, 2/3, 0"` into a hull.
pub fn from_rows(rows: &[&str]) -> crate::Result<Polytope> {
    let pts = rows
        .iter()
        .map(|r| {
            let c: Vec<_> = r.split(',').map(|t| crate::num::parse_rat(t.trim())).collect::<Result<_, _>>()
                .map_err(|e| crate::Error::Parse(e.0))?;
            <[_; 4]>::try_from(c).map(Vec4).map_err(|_| crate::Error::Parse(format!("{r}: expected 4 coordinates")))
        })
        .collect::<crate::Result<Vec<Vec4Q>>>()?;
    Polytope::convex_hull(&pts)
}
