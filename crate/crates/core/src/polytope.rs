//! Exact convex polytopes in R⁴: hull, face lattice, cones, Reeb cones, volume.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det, rank, solve, Vec4};
use crate::lp::in_cone;
use crate::num::{format_rat, int, primitive_scale, serde_rat, serde_rat_vec, Rat};
use crate::polygon::ConvexPolygon;
use crate::Vec4Q;

/// `{x : ⟨normal, x⟩ ≤ offset}`, with `normal` a primitive integer vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfSpace {
    pub normal: Vec4Q,
    pub offset: Rat,
}

impl HalfSpace {
    /// Rescales so the normal is a primitive integer vector. `None` for a zero normal.
    pub fn normalized(normal: Vec4Q, offset: Rat) -> Option<HalfSpace> {
        let s = primitive_scale(&normal.0)?;
        Some(HalfSpace { normal: normal.scale(&s), offset: offset * s })
    }

    pub fn slack(&self, x: &Vec4Q) -> Rat {
        &self.offset - self.normal.dot(x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub dim: usize,
    pub vertex_ids: Vec<usize>,
    pub facet_ids: Vec<usize>,
    /// Lexicographically least vertex.
    pub basepoint: Vec4Q,
    /// `dim` primitive integer vectors spanning the tangent space.
    pub affine_basis: Vec<Vec4Q>,
}

impl Face {
    /// Coordinates of a point of the face's affine hull in `affine_basis` (2-faces only).
    pub fn local_coords(&self, x: &Vec4Q) -> [Rat; 2] {
        debug_assert_eq!(self.dim, 2);
        let (u, v) = (&self.affine_basis[0], &self.affine_basis[1]);
        let d = x - &self.basepoint;
        for i in 0..4 {
            for j in i + 1..4 {
                let m = &u[i] * &v[j] - &u[j] * &v[i];
                if !m.is_zero() {
                    let s = (&d[i] * &v[j] - &d[j] * &v[i]) / &m;
                    let t = (&u[i] * &d[j] - &u[j] * &d[i]) / &m;
                    return [s, t];
                }
            }
        }
        unreachable!("2-face basis is independent")
    }

    pub fn ambient(&self, st: &[Rat; 2]) -> Vec4Q {
        let mut x = self.basepoint.clone();
        for (c, b) in st.iter().zip(&self.affine_basis) {
            x = &x + &b.scale(c);
        }
        x
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceLattice {
    faces: [Vec<Face>; 4],
    /// `down[k][i]`: the (k−1)-faces bounding k-face `i`.
    down: [Vec<Vec<usize>>; 4],
    /// `up[k][i]`: the (k+1)-faces containing k-face `i`.
    up: [Vec<Vec<usize>>; 4],
}

impl FaceLattice {
    pub fn faces(&self, dim: usize) -> &[Face] {
        &self.faces[dim]
    }

    pub fn face(&self, dim: usize, id: usize) -> &Face {
        &self.faces[dim][id]
    }

    pub fn boundary(&self, dim: usize, id: usize) -> &[usize] {
        &self.down[dim][id]
    }

    pub fn coboundary(&self, dim: usize, id: usize) -> &[usize] {
        &self.up[dim][id]
    }

    pub fn counts(&self) -> [usize; 4] {
        [0, 1, 2, 3].map(|k| self.faces[k].len())
    }

    pub fn euler(&self) -> i64 {
        let [v, e, f, c] = self.counts().map(|n| n as i64);
        v - e + f - c
    }
}

/// A convex polytope with nonempty interior, in dual representation.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vec4Q>,
    facets: Vec<HalfSpace>,
    /// `incidence[v][f]`: vertex `v` lies on facet `f`.
    incidence: Vec<Vec<bool>>,
    lattice: FaceLattice,
}

fn affine_rank(points: &[&Vec4Q]) -> usize {
    match points.split_first() {
        None => 0,
        Some((p0, rest)) => rank(&rest.iter().map(|p| (*p - *p0).0.to_vec()).collect::<Vec<_>>()),
    }
}

fn sub4(a: &[BigInt; 4], b: &[BigInt; 4]) -> [BigInt; 4] {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2], &a[3] - &b[3]]
}

fn dot4(a: &[BigInt; 4], b: &[BigInt; 4]) -> BigInt {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2] + &a[3] * &b[3]
}

/// Primitive integer vector orthogonal to three integer vectors, `None` if they are dependent.
fn int_normal(a: &[BigInt; 4], b: &[BigInt; 4], c: &[BigInt; 4]) -> Option<[BigInt; 4]> {
    let det3 = |i: usize, j: usize, k: usize| {
        &a[i] * (&b[j] * &c[k] - &b[k] * &c[j]) - &a[j] * (&b[i] * &c[k] - &b[k] * &c[i])
            + &a[k] * (&b[i] * &c[j] - &b[j] * &c[i])
    };
    let n = [det3(1, 2, 3), -det3(0, 2, 3), det3(0, 1, 3), -det3(0, 1, 2)];
    let g = n.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return None;
    }
    Some(n.map(|x| x / &g))
}

fn primitive(v: Vec4Q) -> Vec4Q {
    match primitive_scale(&v.0) {
        Some(s) => v.scale(&s),
        None => v,
    }
}

impl Polytope {
    /// Convex hull of at least five affinely spanning points.
    pub fn convex_hull(points: &[Vec4Q]) -> Result<Polytope> {
        let mut pts: Vec<Vec4Q> = Vec::with_capacity(points.len());
        for p in points {
            if !pts.contains(p) {
                pts.push(p.clone());
            }
        }
        if pts.len() < 5 || affine_rank(&pts.iter().collect::<Vec<_>>()) < 4 {
            return Err(Error::DegenerateInput(format!("{} distinct points do not span R⁴", pts.len())));
        }
        // Work on integer points: scale by the common denominator.
        let den = pts.iter().flat_map(|p| p.0.iter()).fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let ipts: Vec<[BigInt; 4]> =
            pts.iter().map(|p| p.0.clone().map(|x| (x * Rat::from_integer(den.clone())).to_integer())).collect();
        let mut found: HashSet<([BigInt; 4], BigInt)> = HashSet::new();
        let n = pts.len();
        for a in 0..n {
            for b in a + 1..n {
                let db = sub4(&ipts[b], &ipts[a]);
                for c in b + 1..n {
                    let dc = sub4(&ipts[c], &ipts[a]);
                    for d in c + 1..n {
                        let Some(nrm) = int_normal(&db, &dc, &sub4(&ipts[d], &ipts[a])) else { continue };
                        let off = dot4(&nrm, &ipts[a]);
                        let neg = (nrm.clone().map(|x| -x), -off.clone());
                        if found.contains(&neg) || found.contains(&(nrm.clone(), off.clone())) {
                            continue;
                        }
                        let (mut above, mut below) = (false, false);
                        for q in &ipts {
                            match dot4(&nrm, q).cmp(&off) {
                                Ordering::Greater => above = true,
                                Ordering::Less => below = true,
                                Ordering::Equal => {}
                            }
                            if above && below {
                                break;
                            }
                        }
                        match (above, below) {
                            (false, _) => {
                                found.insert((nrm, off));
                            }
                            (true, false) => {
                                found.insert(neg);
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        let facets: Vec<HalfSpace> = found
            .into_iter()
            .map(|(nrm, off)| HalfSpace {
                normal: Vec4(nrm.map(Rat::from_integer)),
                offset: Rat::new(off, den.clone()),
            })
            .collect();
        let vertices: Vec<Vec4Q> = pts
            .into_iter()
            .filter(|p| {
                let tight: Vec<Vec<Rat>> =
                    facets.iter().filter(|h| h.slack(p).is_zero()).map(|h| h.normal.0.to_vec()).collect();
                rank(&tight) == 4
            })
            .collect();
        Self::assemble(vertices, facets)
    }

    /// Bounded intersection of half-spaces; redundant inequalities are dropped.
    pub fn from_halfspaces(halfspaces: &[HalfSpace]) -> Result<Polytope> {
        let mut hs: Vec<HalfSpace> = Vec::new();
        for h in halfspaces {
            let h = HalfSpace::normalized(h.normal.clone(), h.offset.clone())
                .ok_or_else(|| Error::DegenerateInput("half-space with zero normal".into()))?;
            if !hs.contains(&h) {
                hs.push(h);
            }
        }
        let m = hs.len();
        let mut cands: Vec<Vec4Q> = Vec::new();
        for a in 0..m {
            for b in a + 1..m {
                for c in b + 1..m {
                    for d in c + 1..m {
                        let rows: Vec<Vec<Rat>> = [a, b, c, d].iter().map(|&k| hs[k].normal.0.to_vec()).collect();
                        let rhs: Vec<Rat> = [a, b, c, d].iter().map(|&k| hs[k].offset.clone()).collect();
                        let Some(x) = solve(&rows, &rhs) else { continue };
                        let x = Vec4([x[0].clone(), x[1].clone(), x[2].clone(), x[3].clone()]);
                        if hs.iter().all(|h| !h.slack(&x).is_negative()) && !cands.contains(&x) {
                            cands.push(x);
                        }
                    }
                }
            }
        }
        let p = Self::convex_hull(&cands).map_err(|_| Error::Unbounded)?;
        // A facet of the vertex hull that is not an input inequality means the region is unbounded.
        if p.facets.iter().any(|f| !hs.contains(f)) {
            return Err(Error::Unbounded);
        }
        Ok(p)
    }

    fn assemble(vertices: Vec<Vec4Q>, mut facets: Vec<HalfSpace>) -> Result<Polytope> {
        facets.sort();
        let incidence: Vec<Vec<bool>> =
            vertices.iter().map(|v| facets.iter().map(|f| f.slack(v).is_zero()).collect()).collect();
        let lattice = build_lattice(&vertices, &facets, &incidence)?;
        Ok(Polytope { vertices, facets, incidence, lattice })
    }

    pub fn vertices(&self) -> &[Vec4Q] {
        &self.vertices
    }

    pub fn facets(&self) -> &[HalfSpace] {
        &self.facets
    }

    pub fn incidence(&self) -> &[Vec<bool>] {
        &self.incidence
    }

    pub fn lattice(&self) -> &FaceLattice {
        &self.lattice
    }

    pub fn centroid(&self) -> Vec4Q {
        let n = int(self.vertices.len() as i64);
        let sum = self.vertices.iter().fold(Vec4::zero(), |acc, v| &acc + v);
        sum.scale(&(Rat::one() / n))
    }

    pub fn contains_origin_strictly(&self) -> bool {
        self.facets.iter().all(|f| f.offset.is_positive())
    }

    pub fn translate(&self, t: &Vec4Q) -> Polytope {
        let vertices = self.vertices.iter().map(|v| v + t).collect();
        let facets =
            self.facets.iter().map(|f| HalfSpace { normal: f.normal.clone(), offset: &f.offset + f.normal.dot(t) }).collect();
        Self::assemble(vertices, facets).expect("translation preserves the lattice")
    }

    /// Dilation by `r > 0` about the origin.
    pub fn scale(&self, r: &Rat) -> Polytope {
        assert!(r.is_positive(), "scale factor must be positive");
        let vertices = self.vertices.iter().map(|v| v.scale(r)).collect();
        let facets = self.facets.iter().map(|f| HalfSpace { normal: f.normal.clone(), offset: &f.offset * r }).collect();
        Self::assemble(vertices, facets).expect("dilation preserves the lattice")
    }

    /// Translates by minus the vertex centroid unless 0 is already interior.
    pub fn recenter(&self) -> Result<(Polytope, Vec4Q)> {
        if self.contains_origin_strictly() {
            return Ok((self.clone(), Vec4::zero()));
        }
        let t = -&self.centroid();
        let p = self.translate(&t);
        if !p.contains_origin_strictly() {
            return Err(Error::OriginOnBoundary);
        }
        Ok((p, t))
    }

    pub fn facet_normal(&self, f: usize) -> &Vec4Q {
        &self.facets[f].normal
    }

    pub fn tangent_cone(&self, dim: usize, id: usize) -> Cone {
        let face = self.lattice.face(dim, id);
        let n = int(face.vertex_ids.len() as i64);
        let center =
            face.vertex_ids.iter().fold(Vec4::zero(), |acc, &v| &acc + &self.vertices[v]).scale(&(Rat::one() / n));
        let generators = self.vertices.iter().map(|v| v - &center).filter(|g| !g.is_zero()).collect();
        let inequalities = face.facet_ids.iter().map(|&f| self.facets[f].normal.clone()).collect();
        Cone { generators, inequalities, dim: 4 }
    }

    pub fn normal_cone(&self, dim: usize, id: usize) -> Cone {
        let face = self.lattice.face(dim, id);
        let generators = face.facet_ids.iter().map(|&f| self.facets[f].normal.clone()).collect();
        Cone { generators, inequalities: Vec::new(), dim: 4 - dim }
    }

    /// Orientation of a 2-face: which adjacent facet the Reeb flow enters.
    pub fn orientation(&self, face: usize) -> TwoFaceOrientation {
        let f = self.lattice.face(2, face);
        let (a, b) = (f.facet_ids[0], f.facet_ids[1]);
        let s = self.facets[a].normal.quat_i().dot(&self.facets[b].normal);
        let (entry_facet, exit_facet) = if s.is_positive() { (b, a) } else { (a, b) };
        let sign = if s.is_zero() { 0 } else if s.is_positive() { 1 } else { -1 };
        TwoFaceOrientation { face, entry_facet, exit_facet, lagrangian: sign == 0, sign }
    }

    /// `ω₀(u, v)` for the 2-face's affine basis.
    pub fn face_form(&self, face: usize) -> Rat {
        let b = &self.lattice.face(2, face).affine_basis;
        b[0].omega(&b[1])
    }

    pub fn symplectic_report(&self) -> SymplecticReport {
        let lagrangian = (0..self.lattice.faces(2).len()).filter(|&k| self.face_form(k).is_zero()).collect();
        SymplecticReport { lagrangian }
    }

    pub fn is_symplectic(&self) -> bool {
        self.symplectic_report().lagrangian.is_empty()
    }

    /// The Reeb ray `i·N⁺ ∩ T⁺` of a face with its classification.
    pub fn reeb_cone(&self, dim: usize, id: usize) -> Result<ReebCone> {
        let face = self.lattice.face(dim, id);
        let normals: Vec<&Vec4Q> = face.facet_ids.iter().map(|&f| &self.facets[f].normal).collect();
        let tangent = |w: &Vec4Q| normals.iter().all(|n| !n.dot(w).is_positive());
        match dim {
            3 => Ok(ReebCone { ray: normals[0].quat_i(), kind: ReebKind::Facet(face.facet_ids[0]) }),
            2 => {
                let o = self.orientation(id);
                if o.lagrangian {
                    return Err(Error::LagrangianFace(id));
                }
                Ok(ReebCone { ray: self.facets[o.entry_facet].normal.quat_i(), kind: ReebKind::Enters(o.entry_facet) })
            }
            1 => {
                let good: Vec<usize> =
                    face.facet_ids.iter().copied().filter(|&f| tangent(&self.facets[f].normal.quat_i())).collect();
                let d = &self.vertices[face.vertex_ids[1]] - &self.vertices[face.vertex_ids[0]];
                let gens: Vec<Vec4Q> = normals.iter().map(|n| (*n).clone()).collect();
                let bad: Vec<Vec4Q> =
                    [d.clone(), -&d].into_iter().filter(|w| in_cone(&gens, &(-&w.quat_i()))).collect();
                match (good.as_slice(), bad.as_slice()) {
                    ([f], []) => Ok(ReebCone { ray: self.facets[*f].normal.quat_i(), kind: ReebKind::Enters(*f) }),
                    ([], [w]) => Ok(ReebCone { ray: w.clone(), kind: ReebKind::BadEdge }),
                    _ => Err(Error::NotWellPosed { dim, face: id }),
                }
            }
            0 => {
                if let Some(&f) = face.facet_ids.iter().find(|&&f| tangent(&self.facets[f].normal.quat_i())) {
                    return Ok(ReebCone { ray: self.facets[f].normal.quat_i(), kind: ReebKind::Enters(f) });
                }
                let gens: Vec<Vec4Q> = normals.iter().map(|n| (*n).clone()).collect();
                for &e in self.lattice.coboundary(0, id) {
                    let edge = self.lattice.face(1, e);
                    let other = edge.vertex_ids.iter().copied().find(|&v| v != face.vertex_ids[0]).unwrap();
                    let w = &self.vertices[other] - &self.vertices[face.vertex_ids[0]];
                    if in_cone(&gens, &(-&w.quat_i())) {
                        return Ok(ReebCone { ray: w, kind: ReebKind::EntersBadEdge(e) });
                    }
                }
                Err(Error::NotWellPosed { dim, face: id })
            }
            _ => panic!("face dimension {dim} out of range"),
        }
    }

    /// Exact 4-volume by a pulling triangulation of the boundary coned to the centroid.
    pub fn volume(&self) -> Rat {
        let c = self.centroid();
        let lat = &self.lattice;
        let rel = |v: usize| (&self.vertices[v] - &c).0.to_vec();
        let mut total = Rat::zero();
        for f in 0..lat.faces(3).len() {
            let v0 = lat.face(3, f).vertex_ids[lex_least(&self.vertices, &lat.face(3, f).vertex_ids)];
            for &g in lat.boundary(3, f) {
                let gf = lat.face(2, g);
                if gf.vertex_ids.contains(&v0) {
                    continue;
                }
                let w0 = gf.vertex_ids[lex_least(&self.vertices, &gf.vertex_ids)];
                for &e in lat.boundary(2, g) {
                    let ev = &lat.face(1, e).vertex_ids;
                    if ev.contains(&w0) {
                        continue;
                    }
                    total += det(&[rel(v0), rel(w0), rel(ev[0]), rel(ev[1])]).abs();
                }
            }
        }
        total / int(24)
    }

    /// Vertices of a 2-face in its local coordinates, as a counter-clockwise polygon.
    pub fn face_polygon(&self, face: usize) -> ConvexPolygon {
        let f = self.lattice.face(2, face);
        ConvexPolygon::hull(f.vertex_ids.iter().map(|&v| f.local_coords(&self.vertices[v])).collect())
    }

    pub fn from_json(text: &str) -> Result<Polytope> {
        let doc: PolytopeDoc = serde_json::from_str(text)?;
        match (doc.vertices, doc.halfspaces) {
            (Some(vs), None) => {
                let pts = vs
                    .into_iter()
                    .enumerate()
                    .map(|(k, row)| {
                        <[Rat; 4]>::try_from(row)
                            .map(Vec4)
                            .map_err(|r| Error::Parse(format!("vertices[{k}]: expected 4 coordinates, got {}", r.len())))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::convex_hull(&pts)
            }
            (None, Some(hs)) => {
                let hs = hs
                    .into_iter()
                    .enumerate()
                    .map(|(k, h)| {
                        <[Rat; 4]>::try_from(h.normal)
                            .map(|n| HalfSpace { normal: Vec4(n), offset: h.offset })
                            .map_err(|r| Error::Parse(format!("halfspaces[{k}].normal: expected 4 entries, got {}", r.len())))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::from_halfspaces(&hs)
            }
            _ => Err(Error::Parse("expected exactly one of \"vertices\" or \"halfspaces\"".into())),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let row = |v: &Vec4Q| v.0.iter().map(format_rat).collect::<Vec<_>>();
        serde_json::json!({
            "vertices": self.vertices.iter().map(row).collect::<Vec<_>>(),
            "halfspaces": self.facets.iter().map(|h| serde_json::json!({
                "normal": row(&h.normal),
                "offset": format_rat(&h.offset),
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolytopeDoc {
    #[serde(default, deserialize_with = "de_rows")]
    vertices: Option<Vec<Vec<Rat>>>,
    #[serde(default)]
    halfspaces: Option<Vec<HalfSpaceDoc>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HalfSpaceDoc {
    #[serde(with = "serde_rat_vec")]
    normal: Vec<Rat>,
    #[serde(with = "serde_rat")]
    offset: Rat,
}

fn de_rows<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Vec<Rat>>>, D::Error> {
    #[derive(Deserialize)]
    struct Row(#[serde(with = "serde_rat_vec")] Vec<Rat>);
    let rows: Vec<Row> = Vec::deserialize(d)?;
    Ok(Some(rows.into_iter().map(|r| r.0).collect()))
}

fn lex_least(vertices: &[Vec4Q], ids: &[usize]) -> usize {
    (0..ids.len()).min_by(|&a, &b| vertices[ids[a]].cmp(&vertices[ids[b]])).unwrap()
}

fn build_lattice(vertices: &[Vec4Q], facets: &[HalfSpace], incidence: &[Vec<bool>]) -> Result<FaceLattice> {
    let on_facet: Vec<Vec<usize>> =
        (0..facets.len()).map(|f| (0..vertices.len()).filter(|&v| incidence[v][f]).collect()).collect();
    let facets_of = |vs: &[usize]| -> Vec<usize> {
        (0..facets.len()).filter(|&f| vs.iter().all(|&v| incidence[v][f])).collect()
    };

    let mut sets: [Vec<Vec<usize>>; 4] = Default::default();
    let mut index: [BTreeMap<Vec<usize>, usize>; 4] = Default::default();
    let mut down: [Vec<Vec<usize>>; 4] = Default::default();
    for v in 0..vertices.len() {
        index[0].insert(vec![v], v);
        sets[0].push(vec![v]);
    }
    for (f, vs) in on_facet.iter().enumerate() {
        index[3].insert(vs.clone(), f);
        sets[3].push(vs.clone());
    }
    for k in (2..=3).rev() {
        down[k] = vec![Vec::new(); sets[k].len()];
        for g in 0..sets[k].len() {
            let gs = sets[k][g].clone();
            let own = facets_of(&gs);
            for (f, fv) in on_facet.iter().enumerate() {
                if own.contains(&f) {
                    continue;
                }
                let s: Vec<usize> = gs.iter().copied().filter(|v| fv.contains(v)).collect();
                if s.len() < k || affine_rank(&s.iter().map(|&v| &vertices[v]).collect::<Vec<_>>()) != k - 1 {
                    continue;
                }
                let next = sets[k - 1].len();
                let id = *index[k - 1].entry(s.clone()).or_insert(next);
                if id == next {
                    sets[k - 1].push(s);
                }
                if !down[k][g].contains(&id) {
                    down[k][g].push(id);
                }
            }
        }
    }
    // Edges bound by their two endpoints.
    down[1] = sets[1].clone();
    down[0] = vec![Vec::new(); sets[0].len()];

    let mut up: [Vec<Vec<usize>>; 4] = Default::default();
    for k in 0..4 {
        up[k] = vec![Vec::new(); sets[k].len()];
    }
    for k in 1..4 {
        for (g, ds) in down[k].iter_mut().enumerate() {
            ds.sort_unstable();
            for &d in ds.iter() {
                up[k - 1][d].push(g);
            }
        }
    }

    let mut faces: [Vec<Face>; 4] = Default::default();
    for k in 0..4 {
        for (id, vs) in sets[k].iter().enumerate() {
            let base_id = vs[lex_least(vertices, vs)];
            let base = vertices[base_id].clone();
            let affine_basis = match k {
                0 => Vec::new(),
                1 => {
                    let other = vs.iter().copied().find(|&v| v != base_id).unwrap();
                    vec![primitive(&vertices[other] - &base)]
                }
                2 => {
                    let mut nbrs: Vec<&Vec4Q> = down[2][id]
                        .iter()
                        .filter(|&&e| sets[1][e].contains(&base_id))
                        .map(|&e| &vertices[*sets[1][e].iter().find(|&&v| v != base_id).unwrap()])
                        .collect();
                    nbrs.sort();
                    if nbrs.len() != 2 {
                        return Err(Error::Lattice(format!("2-face {id} has {} edges at its base vertex", nbrs.len())));
                    }
                    nbrs.iter().map(|w| primitive(*w - &base)).collect()
                }
                _ => {
                    let mut others: Vec<&Vec4Q> = vs.iter().filter(|&&v| v != base_id).map(|&v| &vertices[v]).collect();
                    others.sort();
                    let mut basis: Vec<Vec4Q> = Vec::new();
                    for w in others {
                        let cand = primitive(w - &base);
                        let mut rows: Vec<Vec<Rat>> = basis.iter().map(|b| b.0.to_vec()).collect();
                        rows.push(cand.0.to_vec());
                        if rank(&rows) > basis.len() {
                            basis.push(cand);
                        }
                        if basis.len() == 3 {
                            break;
                        }
                    }
                    basis
                }
            };
            faces[k].push(Face { dim: k, vertex_ids: vs.clone(), facet_ids: facets_of(vs), basepoint: base, affine_basis });
        }
    }
    let lattice = FaceLattice { faces, down, up };
    if lattice.euler() != 0 {
        return Err(Error::Lattice(format!("Euler characteristic {} for counts {:?}", lattice.euler(), lattice.counts())));
    }
    if let Some(f) = lattice.faces(2).iter().position(|f| f.facet_ids.len() != 2) {
        return Err(Error::Lattice(format!("2-face {f} does not lie on exactly two facets")));
    }
    Ok(lattice)
}

/// A polyhedral cone, by generators and/or by inequalities `⟨a, w⟩ ≤ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cone {
    pub generators: Vec<Vec4Q>,
    pub inequalities: Vec<Vec4Q>,
    pub dim: usize,
}

impl Cone {
    pub fn satisfies(&self, w: &Vec4Q) -> bool {
        self.inequalities.iter().all(|a| !a.dot(w).is_positive())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoFaceOrientation {
    pub face: usize,
    /// Facet whose 3-face the Reeb flow enters through this 2-face.
    pub entry_facet: usize,
    /// Facet whose 3-face the flow leaves through this 2-face.
    pub exit_facet: usize,
    pub lagrangian: bool,
    /// Sign of `⟨i·n_a, n_b⟩` for the two facets `a < b`.
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ReebKind {
    /// Interior of this facet's 3-face.
    Facet(usize),
    /// Points into this facet's 3-face.
    Enters(usize),
    /// Tangent to the 1-face itself.
    BadEdge,
    /// Points along this bad 1-face.
    EntersBadEdge(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReebCone {
    pub ray: Vec4Q,
    pub kind: ReebKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymplecticReport {
    pub lagrangian: Vec<usize>,
}
