//! The flow graph: nodes are 2-faces, edges are affine flow maps through 3-faces.
//!
//! Each 2-face carries local coordinates from its affine basis. An edge from `F₁`
//! to `F₂` through the 3-face `E` records the set of points of closed `F₁` whose
//! Reeb trajectory in `E` exits through closed `F₂`, the affine map between the
//! two charts, and the action (integral of λ₀) of the connecting segment.

use rayon::prelude::*;
use serde_json::{json, Value};

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::linalg::{Affine2, AffineFn2, Mat2};
use crate::num::{format_rat, int, Rat};
use crate::polygon::{ConvexPolygon, HalfPlane};
use crate::polytope::Polytope;
use crate::sp2::{self, classify_exact, lift_from_turns, mul_left_small, mul_left_small_as, turn_step, LiftedSp2};
use crate::{Affine2Q, Mat2F, Vec4F, Vec4Q};

/// Per-2-face data.
#[derive(Clone, Debug)]
pub struct Node {
    pub face: usize,
    /// Facet whose 3-face the Reeb flow enters through this face.
    pub entry_facet: usize,
    pub exit_facet: usize,
    /// The closed face in local coordinates.
    pub polygon: ConvexPolygon,
    /// `ω₀(u, v)` for the face's affine basis.
    pub form: Rat,
    /// Local coordinates → quaternionic frame of the entry facet.
    pub frame: Mat2F,
}

#[derive(Clone, Debug)]
pub struct FlowEdge {
    pub id: usize,
    pub src: usize,
    pub dst: usize,
    /// Facet whose 3-face the segments cross.
    pub through: usize,
    /// Closed, full-dimensional, in `src` coordinates.
    pub domain: ConvexPolygon,
    pub domain_halfplanes: Vec<HalfPlane>,
    /// `src` coordinates → `dst` coordinates.
    pub map: Affine2Q,
    pub inverse: Affine2Q,
    /// Action of the segment from a point of `src`.
    pub action: AffineFn2<Rat>,
    pub sp2: Mat2F,
    pub lift: LiftedSp2,
}

#[derive(Clone, Debug)]
pub struct FlowGraph {
    polytope: Polytope,
    pub nodes: Vec<Node>,
    pub edges: Vec<FlowEdge>,
    out: Vec<Vec<usize>>,
    /// Lagrangian 2-faces; these nodes carry no edges.
    pub lagrangian: Vec<usize>,
    pub tol: f64,
}

/// Direction `i·n` of the Reeb field on a facet; the field itself is `2·i·n / offset`.
pub fn reeb_direction(p: &Polytope, facet: usize) -> (Vec4Q, Rat) {
    let h = &p.facets()[facet];
    (h.normal.quat_i(), int(2) / &h.offset)
}

fn unit(v: &Vec4Q) -> Vec4F {
    let f = v.to_f64();
    let n = f.norm();
    f.map(|x| x / n)
}

/// Quaternionic frame of a 2-face in its local coordinates.
fn frame(p: &Polytope, face: usize, entry: usize) -> Mat2F {
    let nu = unit(&p.facets()[entry].normal);
    let (jn, kn) = (nu.quat_j(), nu.quat_k());
    let b = &p.lattice().face(2, face).affine_basis;
    let (u, v) = (b[0].to_f64(), b[1].to_f64());
    Mat2::from_cols([u.dot(&jn), u.dot(&kn)], [v.dot(&jn), v.dot(&kn)])
}

/// The closed-form transition matrix `τ_F ∘ (τ'_F)⁻¹` of a 2-face.
pub fn transition_matrix(p: &Polytope, face: usize) -> Result<Mat2F> {
    let o = p.orientation(face);
    if o.lagrangian {
        return Err(Error::LagrangianFace(face));
    }
    let nu = unit(&p.facets()[o.entry_facet].normal);
    let nup = unit(&p.facets()[o.exit_facet].normal);
    let a1 = nup.dot(&nu);
    let a2 = nup.quat_i().dot(&nu);
    let a3 = nup.quat_j().dot(&nu);
    let a4 = nup.quat_k().dot(&nu);
    Ok(Mat2::new(
        (a1 * a2 - a3 * a4) / a2,
        -(a2 * a2 + a4 * a4) / a2,
        (a2 * a2 + a3 * a3) / a2,
        (a1 * a2 + a3 * a4) / a2,
    ))
}

impl FlowGraph {
    /// Builds the graph of a symplectic polytope with 0 in its interior.
    pub fn build(p: &Polytope, tol: f64) -> Result<FlowGraph> {
        Self::build_with(p, tol, false)
    }

    /// As [`FlowGraph::build`], but Lagrangian 2-faces are kept as isolated nodes.
    /// The Reeb direction on a facet is parallel to each of its Lagrangian faces,
    /// so no flow line through the interior of a facet ends on one.
    pub fn build_avoiding_lagrangian(p: &Polytope, tol: f64) -> Result<FlowGraph> {
        Self::build_with(p, tol, true)
    }

    fn build_with(p: &Polytope, tol: f64, allow_lagrangian: bool) -> Result<FlowGraph> {
        if !p.contains_origin_strictly() {
            return Err(Error::DegenerateInput("origin must be interior; recenter first".into()));
        }
        let lagrangian = p.symplectic_report().lagrangian;
        if !lagrangian.is_empty() && !allow_lagrangian {
            return Err(Error::NonSymplectic(lagrangian));
        }
        let lat = p.lattice();
        let nodes: Vec<Node> = (0..lat.faces(2).len())
            .map(|k| {
                let o = p.orientation(k);
                Node {
                    face: k,
                    entry_facet: o.entry_facet,
                    exit_facet: o.exit_facet,
                    polygon: p.face_polygon(k),
                    form: p.face_form(k),
                    frame: frame(p, k, o.entry_facet),
                }
            })
            .collect();
        let per_facet: Vec<Result<Vec<FlowEdge>>> =
            (0..p.facets().len()).into_par_iter().map(|f| edges_through(p, &nodes, f)).collect();
        let mut edges = Vec::new();
        for r in per_facet {
            edges.extend(r?);
        }
        edges.sort_by_key(|e| (e.src, e.dst, e.through));
        let mut out = vec![Vec::new(); nodes.len()];
        for (k, e) in edges.iter_mut().enumerate() {
            e.id = k;
            out[e.src].push(k);
        }
        Ok(FlowGraph { polytope: p.clone(), nodes, edges, out, lagrangian, tol })
    }

    pub fn polytope(&self) -> &Polytope {
        &self.polytope
    }

    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    pub fn ambient(&self, node: usize, x: &[Rat; 2]) -> Vec4Q {
        self.polytope.lattice().face(2, node).ambient(x)
    }

    pub fn to_json(&self) -> Value {
        let lat = self.polytope.lattice();
        let mat = |m: &Mat2<Rat>| json!([[format_rat(m.a()), format_rat(m.b())], [format_rat(m.c()), format_rat(m.d())]]);
        let pt = |x: &[Rat; 2]| json!([format_rat(&x[0]), format_rat(&x[1])]);
        json!({
            "nodes": self.nodes.iter().map(|n| {
                let f = lat.face(2, n.face);
                json!({
                    "id": n.face,
                    "vertices": f.vertex_ids,
                    "entry_facet": n.entry_facet,
                    "exit_facet": n.exit_facet,
                    "basepoint": f.basepoint.0.iter().map(format_rat).collect::<Vec<_>>(),
                    "basis": f.affine_basis.iter().map(|b| b.0.iter().map(format_rat).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "frame": n.frame.0,
                })
            }).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| json!({
                "id": e.id,
                "src": e.src,
                "dst": e.dst,
                "through": e.through,
                "domain": e.domain.vertices().iter().map(pt).collect::<Vec<_>>(),
                "map": {"linear": mat(&e.map.linear), "offset": pt(&e.map.offset)},
                "action": {"coeffs": pt(&e.action.coeffs), "constant": format_rat(&e.action.constant)},
                "sp2": e.sp2.0,
                "bracket": e.lift.bracket.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn edges_through(p: &Polytope, nodes: &[Node], facet: usize) -> Result<Vec<FlowEdge>> {
    let lat = p.lattice();
    let hs = p.facets();
    let (r, _) = reeb_direction(p, facet);
    let c_e = &hs[facet].offset;
    let faces = lat.boundary(3, facet);
    let other = |g: usize| nodes[g].entry_facet + nodes[g].exit_facet - facet;
    let rate = |g: usize| hs[other(g)].normal.dot(&r);
    let entrances: Vec<usize> = faces.iter().copied().filter(|&g| rate(g).is_negative()).collect();
    let exits: Vec<usize> = faces.iter().copied().filter(|&g| rate(g).is_positive()).collect();
    let walls: Vec<usize> = faces.iter().map(|&g| other(g)).collect();

    let mut out = Vec::new();
    for &f1 in &entrances {
        debug_assert_eq!(nodes[f1].entry_facet, facet);
        let face1 = lat.face(2, f1);
        let (b, u, v) = (&face1.basepoint, &face1.affine_basis[0], &face1.affine_basis[1]);
        for &f2 in &exits {
            let m2 = &hs[other(f2)];
            let d2 = m2.normal.dot(&r);
            // Hitting time of the exit wall, affine in local coordinates.
            let time = AffineFn2 {
                coeffs: [-m2.normal.dot(u) / &d2, -m2.normal.dot(v) / &d2],
                constant: m2.slack(b) / &d2,
            };
            let land = |st: &[Rat; 2]| {
                let x = face1.ambient(st);
                &x + &r.scale(&time.eval(st))
            };
            let cuts: Vec<HalfPlane> = walls
                .iter()
                .map(|&m| {
                    let h = &hs[m];
                    let a0 = h.normal.dot(&(u + &r.scale(&time.coeffs[0])));
                    let a1 = h.normal.dot(&(v + &r.scale(&time.coeffs[1])));
                    let bound = &h.offset - h.normal.dot(&(b + &r.scale(&time.constant)));
                    HalfPlane { normal: [a0, a1], bound }
                })
                .collect();
            let domain = nodes[f1].polygon.clip_all(cuts.iter());
            if !domain.is_full_dimensional() {
                continue;
            }
            let face2 = lat.face(2, f2);
            let z = int(0);
            let o = int(1);
            let map = Affine2::from_images(
                face2.local_coords(&land(&[z.clone(), z.clone()])),
                face2.local_coords(&land(&[o.clone(), z.clone()])),
                face2.local_coords(&land(&[z, o])),
            );
            let half_c = c_e / int(2);
            let action = AffineFn2 {
                coeffs: [&time.coeffs[0] * &half_c, &time.coeffs[1] * &half_c],
                constant: &time.constant * &half_c,
            };
            let tinv = nodes[f1].frame.inverse().ok_or(Error::LagrangianFace(f1))?;
            let sp2 = &(&nodes[f2].frame * &map.linear.to_f64()) * &tinv;
            let lift = LiftedSp2::edge(sp2.clone());
            let inverse = map.inverse().ok_or(Error::LagrangianFace(f2))?;
            let domain_halfplanes = domain.halfplanes();
            out.push(FlowEdge { id: 0, src: f1, dst: f2, through: facet, domain, domain_halfplanes, map, inverse, action, sp2, lift });
        }
    }
    Ok(out)
}

/// Distance in turns from a bracket boundary below which a winding is not trusted.
pub const WINDING_MARGIN: f64 = 1e-6;

/// A path in the flow graph with its composed flow.
#[derive(Clone, Debug)]
pub struct PathFlow {
    pub base: usize,
    pub end: usize,
    pub edges: Vec<usize>,
    /// Endpoints, in the chart of the end face, of the trajectories that start
    /// on the closed base face and follow the whole path. For a closed path its
    /// fixed points in here are exactly those in the preimage.
    pub domain: ConvexPolygon,
    /// Base coordinates → end coordinates.
    pub map: Affine2Q,
    /// Action accumulated along the path, as a function of the endpoint.
    pub action: AffineFn2<Rat>,
    pub lift: Result<LiftedSp2, Error>,
    /// Unit image of `(1, 0)` under the edge matrices so far, and the turns it swept.
    pub probe: [f64; 2],
    pub turns: f64,
}

impl PathFlow {
    pub fn start(g: &FlowGraph, node: usize) -> PathFlow {
        PathFlow {
            base: node,
            end: node,
            edges: Vec::new(),
            domain: g.nodes[node].polygon.clone(),
            map: Affine2::identity(),
            action: AffineFn2::zero(),
            lift: Ok(LiftedSp2::identity()),
            probe: [1.0, 0.0],
            turns: 0.0,
        }
    }

    fn extend_geometry(&self, e: &FlowEdge) -> PathFlow {
        assert_eq!(e.src, self.end, "edge does not continue the path");
        let mut edges = self.edges.clone();
        edges.push(e.id);
        let (probe, step) = turn_step(&e.lift.mat, self.probe);
        PathFlow {
            base: self.base,
            end: e.dst,
            edges,
            domain: self.domain.clip_all(e.domain_halfplanes.iter()).map(&e.map),
            map: e.map.after(&self.map),
            action: self.action.plus(&e.action).pullback(&e.inverse),
            lift: Err(Error::BracketConflict),
            probe,
            turns: self.turns + step,
        }
    }

    /// Appends an edge. The domain may become empty; callers prune on that.
    pub fn compose(&self, e: &FlowEdge, tol: f64) -> PathFlow {
        let mut next = self.extend_geometry(e);
        next.lift = self.lift.as_ref().map_err(Clone::clone).and_then(|l| mul_left_small(&e.lift, l, tol));
        next
    }

    /// Appends an edge returning to the base face. The class of the closed
    /// product is taken from the exact composed map, which is conjugate to it.
    /// If an open product was too close to parabolic to classify, the bracket
    /// comes from the winding of the probe vector instead.
    pub fn close(&self, g: &FlowGraph, e: &FlowEdge) -> PathFlow {
        let mut next = self.extend_geometry(e);
        assert_eq!(next.end, next.base, "edge does not close the path");
        let class = classify_exact(&next.map.linear, &g.nodes[self.base].form);
        let mat = match &self.lift {
            Ok(l) => &e.lift.mat * &l.mat,
            Err(_) => self.edges.iter().chain([&e.id]).fold(Mat2::identity(), |m, &id| &g.edges[id].lift.mat * &m),
        };
        next.lift = match &self.lift {
            Ok(l) => mul_left_small_as(&e.lift, l, mat, class),
            Err(_) => lift_from_turns(mat, class, next.turns, WINDING_MARGIN),
        };
        next
    }

    /// Recomputes a path from scratch; closed paths get the exact final class.
    pub fn from_edges(g: &FlowGraph, edges: &[usize]) -> PathFlow {
        let first = &g.edges[edges[0]];
        let mut pf = PathFlow::start(g, first.src);
        for (k, &id) in edges.iter().enumerate() {
            let e = &g.edges[id];
            pf = if k + 1 == edges.len() && e.dst == pf.base { pf.close(g, e) } else { pf.compose(e, g.tol) };
        }
        pf
    }
}

/// `Mᵀ Ω_dst M = Ω_src` for 2×2 maps reduces to `det(M)·ω_dst = ω_src`.
pub fn preserves_form(e: &FlowEdge, g: &FlowGraph) -> bool {
    e.map.linear.det() * &g.nodes[e.dst].form == g.nodes[e.src].form
}

pub use sp2::DEFAULT_TOL;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vec4;
    use crate::num::rat;
    use num_traits::Zero;

    fn cell24() -> Polytope {
        let mut pts = Vec::new();
        for k in 0..4 {
            for s in [1, -1] {
                let mut c = [int(0), int(0), int(0), int(0)];
                c[k] = int(s);
                pts.push(Vec4(c));
            }
        }
        for m in 0..16 {
            let c = [0, 1, 2, 3].map(|b| if m >> b & 1 == 1 { rat(1, 2) } else { rat(-1, 2) });
            pts.push(Vec4(c));
        }
        Polytope::convex_hull(&pts).unwrap()
    }

    #[test]
    fn reeb_direction_follows_i() {
        let p = cell24();
        let f = p.facets().iter().position(|h| h.normal == Vec4::new(int(1), int(0), int(1), int(0))).unwrap();
        let (r, scale) = reeb_direction(&p, f);
        assert_eq!(r, Vec4::new(int(-1), int(0), int(1), int(0)));
        assert_eq!(scale, int(2));
        for k in 0..p.facets().len() {
            let (r, _) = reeb_direction(&p, k);
            assert!(r.dot(&p.facets()[k].normal).is_zero());
        }
    }

    #[test]
    fn frames_are_symplectic() {
        let p = cell24();
        let g = FlowGraph::build(&p, DEFAULT_TOL).unwrap();
        for n in &g.nodes {
            let form = crate::num::rat_to_f64(&n.form);
            assert!((n.frame.det() - form).abs() < 1e-9);
        }
    }

    #[test]
    fn edge_matrix_is_transition_matrix() {
        let p = cell24();
        let g = FlowGraph::build(&p, DEFAULT_TOL).unwrap();
        assert_eq!(g.edges.len(), 96);
        for e in &g.edges {
            let psi = transition_matrix(&p, e.dst).unwrap();
            assert!(e.sp2.max_abs_diff(&psi) < 1e-9, "{:?} vs {:?}", e.sp2, psi);
            assert!((psi.trace() - 1.0).abs() < 1e-9);
            assert!(preserves_form(e, &g));
            assert!(!e.domain.min_of(&e.action).unwrap().is_negative());
        }
    }

    #[test]
    fn composition_is_associative_with_recomputation() {
        let p = cell24();
        let g = FlowGraph::build(&p, DEFAULT_TOL).unwrap();
        let mut pf = PathFlow::start(&g, 0);
        for _ in 0..5 {
            let e = &g.edges[g.out_edges(pf.end)[0]];
            pf = pf.compose(e, g.tol);
        }
        let again = PathFlow::from_edges(&g, &pf.edges);
        assert_eq!(again.map, pf.map);
        assert_eq!(again.action, pf.action);
        assert_eq!(again.domain, pf.domain);
        assert_eq!(again.lift.unwrap().bracket, pf.lift.unwrap().bracket);
    }
}
