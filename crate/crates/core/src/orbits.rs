//! Closed orbits of the flow graph.
//!
//! A depth-first search over edge paths composes the flows exactly, prunes on
//! empty domains and on the caps of a [`SearchQuery`], and solves for fixed points
//! whenever a path returns to its start. Each cycle is reported once, rotated to
//! start at its smallest node with the lexicographically least edge sequence.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::flow::{FlowGraph, PathFlow};
use crate::linalg::FixedSet;
use crate::num::{format_rat, rat_to_f64, Rat};
use crate::polygon::{ConvexPolygon, HalfPlane, P2};
use crate::sp2::{cz_from, LiftedSp2, RotBracket};
use crate::Vec4Q;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchQuery {
    /// Largest action reported; `None` for no cap.
    pub action_cap: Option<Rat>,
    /// Largest rotation number reported; `None` for no cap.
    pub rho_cap: Option<Rat>,
    pub max_segments: Option<usize>,
    pub per_threeface_cap: Option<usize>,
    /// Report orbits touching face boundaries (Type 2).
    pub include_boundary: bool,
}

impl SearchQuery {
    pub fn new(action_cap: Option<Rat>, max_segments: Option<usize>) -> Self {
        SearchQuery { action_cap, rho_cap: None, max_segments, per_threeface_cap: None, include_boundary: true }
    }

    /// The search terminates only if actions or lengths are bounded.
    pub fn is_valid(&self) -> bool {
        self.action_cap.is_some() || self.max_segments.is_some()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub facet: usize,
    pub start: Vec4Q,
    pub end: Vec4Q,
}

/// A positive-dimensional set of fixed points.
#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    /// Vertices of the fixed set within the domain, in base coordinates.
    pub vertices: Vec<P2>,
    pub action_min: Rat,
    pub action_max: Rat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRecord {
    pub id: usize,
    /// Edge ids, starting at the smallest node.
    pub cycle: Vec<usize>,
    /// 2-faces visited, starting with the base.
    pub nodes: Vec<usize>,
    pub fixed_point: P2,
    pub action: Rat,
    pub family: Option<Family>,
    pub lift: Option<LiftedSp2>,
    pub cz: Option<i64>,
    pub nondegenerate: bool,
    pub orbit_type: u8,
    pub segments: Vec<Segment>,
    /// Trace of the exact return map in base coordinates.
    pub exact_trace: Rat,
    /// Set when rotation data could not be determined.
    pub flag: Option<String>,
}

impl OrbitRecord {
    pub fn bracket(&self) -> Option<RotBracket> {
        self.lift.as_ref().map(|l| l.bracket)
    }

    pub fn is_poisoned(&self) -> bool {
        self.flag.is_some()
    }

    pub fn to_json(&self) -> Value {
        let pt4 = |v: &Vec4Q| v.0.iter().map(format_rat).collect::<Vec<_>>();
        json!({
            "id": self.id,
            "cycle": self.nodes,
            "edges": self.cycle,
            "fixed_point": self.fixed_point.iter().map(format_rat).collect::<Vec<_>>(),
            "action": format_rat(&self.action),
            "bracket": self.bracket().map(|b| b.to_string()),
            "class": self.lift.as_ref().map(|l| format!("{:?}", l.class)),
            "cz": self.cz,
            "nondegenerate": self.nondegenerate,
            "type": self.orbit_type,
            "degenerate_family": self.family.as_ref().map(|f| json!({
                "vertices": f.vertices.iter().map(|p| p.iter().map(format_rat).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "action_min": format_rat(&f.action_min),
                "action_max": format_rat(&f.action_max),
            })),
            "segments": self.segments.iter().map(|s| json!({
                "facet": s.facet, "start": pt4(&s.start), "end": pt4(&s.end),
            })).collect::<Vec<_>>(),
            "flag": self.flag,
        })
    }
}

/// True if `cycle` is the least of its rotations that start at its first node.
pub fn is_canonical(g: &FlowGraph, cycle: &[usize]) -> bool {
    let s = g.edges[cycle[0]].src;
    (1..cycle.len()).filter(|&k| g.edges[cycle[k]].src == s).all(|k| {
        let rot = cycle[k..].iter().chain(&cycle[..k]);
        cycle.iter().cmp(rot) != std::cmp::Ordering::Greater
    })
}

/// Builds the record for a closed path, or `None` if it has no fixed point in its domain.
pub fn annotate(g: &FlowGraph, pf: &PathFlow) -> Option<OrbitRecord> {
    let (point, family) = match pf.map.fixed_points() {
        FixedSet::Empty => return None,
        FixedSet::Point(x) => {
            if !pf.domain.contains(&x) {
                return None;
            }
            (x, None)
        }
        FixedSet::Line { normal, value } => {
            let up = HalfPlane { normal: normal.clone(), bound: value.clone() };
            let down = HalfPlane { normal: [-normal[0].clone(), -normal[1].clone()], bound: -value };
            let set = pf.domain.clip(&up).clip(&down);
            (set.vertex_centroid()?, Some(family_of(&set, pf)))
        }
        FixedSet::Plane => (pf.domain.vertex_centroid()?, Some(family_of(&pf.domain, pf))),
    };
    // A point that returns in zero time sits on a bad 1-face and does not move.
    let moves = match &family {
        Some(f) => !f.action_max.is_zero(),
        None => !pf.action.eval(&point).is_zero(),
    };
    moves.then(|| record_at(g, pf, point, family))
}

fn family_of(set: &ConvexPolygon, pf: &PathFlow) -> Family {
    Family {
        vertices: set.vertices().to_vec(),
        action_min: set.min_of(&pf.action).unwrap(),
        action_max: set.max_of(&pf.action).unwrap(),
    }
}

/// Largest accepted gap between the traces of the tracked and the exact return map.
pub const TRACE_DRIFT: f64 = 1e-6;

fn record_at(g: &FlowGraph, pf: &PathFlow, x: P2, family: Option<Family>) -> OrbitRecord {
    let mut segments = Vec::with_capacity(pf.edges.len());
    let mut nodes = Vec::with_capacity(pf.edges.len());
    let mut boundary = false;
    let mut cur = x.clone();
    for &id in &pf.edges {
        let e = &g.edges[id];
        nodes.push(e.src);
        boundary |= !g.nodes[e.src].polygon.contains_interior(&cur);
        let next = e.map.apply(&cur);
        segments.push(Segment { facet: e.through, start: g.ambient(e.src, &cur), end: g.ambient(e.dst, &next) });
        cur = next;
    }
    let m = pf.map.linear.sub_identity();
    let nondegenerate = !m.det().is_zero();
    let (lift, mut flag) = match &pf.lift {
        Ok(l) => (Some(l.clone()), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let exact_trace = pf.map.linear.trace();
    if let Some(l) = &lift {
        let drift = (l.mat.trace() - rat_to_f64(&exact_trace)).abs();
        if drift > TRACE_DRIFT {
            flag = Some(format!("floating-point return map drifted from the exact trace by {drift:.3e}"));
        }
    }
    let cz = match (&lift, nondegenerate) {
        (Some(l), true) => {
            let cz = cz_from(l);
            if cz.is_none() {
                flag = Some(format!("bracket {} contradicts exact nondegeneracy", l.bracket));
            }
            cz
        }
        _ => None,
    };
    OrbitRecord {
        id: 0,
        cycle: pf.edges.clone(),
        nodes,
        action: pf.action.eval(&x),
        fixed_point: x,
        family,
        lift,
        cz,
        nondegenerate,
        orbit_type: if boundary { 2 } else { 1 },
        segments,
        exact_trace,
        flag,
    }
}

/// Shared state for a search whose action cap tightens to the best action found.
struct Cap<'a> {
    fixed: Option<&'a Rat>,
    best: Option<&'a Mutex<Option<Rat>>>,
}

impl Cap<'_> {
    fn exceeded(&self, a: &Rat) -> bool {
        if self.fixed.is_some_and(|l| a > l) {
            return true;
        }
        self.best.is_some_and(|m| m.lock().unwrap().as_ref().is_some_and(|b| a > b))
    }

    fn offer(&self, a: &Rat) {
        if let Some(m) = self.best {
            let mut b = m.lock().unwrap();
            if b.as_ref().map_or(true, |cur| a < cur) {
                *b = Some(a.clone());
            }
        }
    }
}

struct Dfs<'a> {
    g: &'a FlowGraph,
    q: &'a SearchQuery,
    cap: Cap<'a>,
    start: usize,
    depth_limit: usize,
    visits: Vec<usize>,
    out: Vec<OrbitRecord>,
}

impl Dfs<'_> {
    fn admit(&self, rec: &OrbitRecord) -> bool {
        let action = rec.family.as_ref().map_or(&rec.action, |f| &f.action_min);
        if self.cap.exceeded(action) || (rec.orbit_type == 2 && !self.q.include_boundary) {
            return false;
        }
        match (&self.q.rho_cap, rec.bracket()) {
            (Some(r), Some(b)) => &b.lower() <= r,
            _ => true,
        }
    }

    fn run(&mut self, pf: &PathFlow) {
        if pf.edges.len() + 1 > self.depth_limit {
            return;
        }
        for &id in self.g.out_edges(pf.end) {
            let e = &self.g.edges[id];
            if e.dst < self.start || self.q.per_threeface_cap.is_some_and(|c| self.visits[e.through] >= c) {
                continue;
            }
            if e.dst == self.start {
                let closed = pf.close(self.g, e);
                if !closed.domain.is_empty() && is_canonical(self.g, &closed.edges) {
                    if let Some(rec) = annotate(self.g, &closed) {
                        if self.admit(&rec) {
                            self.cap.offer(&rec.action);
                            self.out.push(rec);
                        }
                    }
                }
            }
            let next = pf.compose(e, self.g.tol);
            let Some(lo) = next.domain.min_of(&next.action) else { continue };
            if self.cap.exceeded(&lo) {
                continue;
            }
            if let (Some(r), Ok(l)) = (&self.q.rho_cap, &next.lift) {
                if &l.bracket.lower() > r {
                    continue;
                }
            }
            self.visits[e.through] += 1;
            self.run(&next);
            self.visits[e.through] -= 1;
        }
    }
}

/// Depth bound used when neither segments nor 3-face visits are capped. Paths
/// of zero action can circle a bad 1-face indefinitely; no orbit needs more
/// segments than this in practice.
pub fn fallback_depth(g: &FlowGraph) -> usize {
    4 * g.nodes.len()
}

fn search(g: &FlowGraph, q: &SearchQuery, best: Option<&Mutex<Option<Rat>>>) -> Vec<OrbitRecord> {
    assert!(q.is_valid(), "query needs an action cap or a segment cap");
    let depth_limit = match (q.max_segments, q.per_threeface_cap) {
        (Some(m), _) => m,
        (None, Some(c)) => c * g.polytope().facets().len(),
        (None, None) => fallback_depth(g),
    };
    let per_start: Vec<Vec<OrbitRecord>> = (0..g.nodes.len())
        .into_par_iter()
        .map(|s| {
            let mut dfs = Dfs {
                g,
                q,
                cap: Cap { fixed: q.action_cap.as_ref(), best },
                start: s,
                depth_limit,
                visits: vec![0; g.polytope().facets().len()],
                out: Vec::new(),
            };
            dfs.run(&PathFlow::start(g, s));
            dfs.out
        })
        .collect();
    let mut all: Vec<OrbitRecord> = per_start.into_iter().flatten().collect();
    for (k, r) in all.iter_mut().enumerate() {
        r.id = k;
    }
    all
}

/// All closed orbits within the query's caps.
pub fn enumerate(g: &FlowGraph, q: &SearchQuery) -> Vec<OrbitRecord> {
    search(g, q, None)
}

/// Orbits found while pruning against the best action seen so far. Every orbit of
/// minimal action is among them; others may be missing.
pub fn enumerate_minimal(g: &FlowGraph, q: &SearchQuery) -> Vec<OrbitRecord> {
    let best = Mutex::new(None);
    let recs = search(g, q, Some(&best));
    let Some(min) = best.into_inner().unwrap() else { return Vec::new() };
    let mut keep: Vec<OrbitRecord> = recs.into_iter().filter(|r| r.action == min).collect();
    for (k, r) in keep.iter_mut().enumerate() {
        r.id = k;
    }
    keep
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZollVerdict {
    Certified,
    NotCertified,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZollCertificate {
    pub c: Rat,
    /// Cycles (node lists) whose return map is the identity with constant action `c`.
    pub witnesses: Vec<Vec<usize>>,
    /// 2-faces tiled, up to measure zero, by images of witness domains.
    pub covered: Vec<usize>,
    /// 2-faces meeting some witness domain image.
    pub touched: Vec<usize>,
    pub verdict: ZollVerdict,
}

impl ZollCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "c": format_rat(&self.c),
            "verdict": format!("{:?}", self.verdict),
            "witnesses": self.witnesses,
            "covered": self.covered.len(),
            "touched": self.touched.len(),
            "faces": self.covered.len().max(self.touched.len()),
        })
    }
}

/// Sufficient test for being combinatorially Zoll at action `c`: the domains of
/// closed cycles with identity return map and constant action `c` must tile
/// every non-Lagrangian 2-face. A negative verdict proves nothing.
pub fn zoll_check(g: &FlowGraph, c: &Rat, per_threeface_cap: Option<usize>) -> ZollCertificate {
    let q = SearchQuery {
        action_cap: Some(c.clone()),
        rho_cap: None,
        max_segments: None,
        per_threeface_cap,
        include_boundary: true,
    };
    let mut pieces: BTreeMap<usize, Vec<ConvexPolygon>> = BTreeMap::new();
    let mut witnesses = Vec::new();
    for rec in enumerate(g, &q) {
        let Some(fam) = &rec.family else { continue };
        let pf = PathFlow::from_edges(g, &rec.cycle);
        let identity = pf.map.linear.is_identity() && pf.map.offset.iter().all(Zero::is_zero);
        if !identity || !pf.domain.is_full_dimensional() || fam.action_min != *c || fam.action_max != *c {
            continue;
        }
        witnesses.push(rec.nodes.clone());
        let mut image = pf.domain.clone();
        for &id in &rec.cycle {
            let e = &g.edges[id];
            pieces.entry(e.src).or_default().push(image.clone());
            image = image.map(&e.map);
        }
    }
    let touched: Vec<usize> = pieces.keys().copied().collect();
    let covered: Vec<usize> = pieces
        .iter()
        .filter(|(&node, ps)| {
            let total = ps.iter().fold(Rat::zero(), |acc, p| acc + p.area());
            let disjoint = ps
                .iter()
                .enumerate()
                .all(|(i, a)| ps[i + 1..].iter().all(|b| !a.intersect(b).is_full_dimensional()));
            total == g.nodes[node].polygon.area() && disjoint
        })
        .map(|(&n, _)| n)
        .collect();
    let verdict = if covered.len() + g.lagrangian.len() == g.nodes.len() { ZollVerdict::Certified } else { ZollVerdict::NotCertified };
    ZollCertificate { c: c.clone(), witnesses, covered, touched, verdict }
}

/// `true` if the rotation bracket is known and lies strictly below `r`.
pub fn rho_below(rec: &OrbitRecord, r: &Rat) -> bool {
    rec.bracket().is_some_and(|b| &b.upper() < r || (!b.is_point() && &b.upper() == r))
}
