#![allow(dead_code)]

use std::path::PathBuf;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reeb4::linalg::{Affine2, FixedSet, Vec4};
use reeb4::num::{format_rat, int, rat, Rat};
use reeb4::orbits::OrbitRecord;
use reeb4::polygon::HalfPlane;
use reeb4::search::perturb;
use reeb4::sp2::{classify_exact, RotBracket, Sp2Class};
use reeb4::{FlowGraph, Polytope, Vec4Q};

pub fn data(name: &str) -> Polytope {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    Polytope::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

pub fn simplex_points() -> Vec<Vec4Q> {
    let mut pts = vec![Vec4::zero()];
    for i in 0..4 {
        let mut v: Vec4Q = Vec4::zero();
        v.0[i] = int(1);
        pts.push(v);
    }
    pts
}

/// Symplectic rational perturbation of the standard simplex (5 vertices) or of
/// the simplex with one vertex beyond its far facet (6 vertices).
pub fn perturbed_simplex(n: usize, seed: u64) -> Polytope {
    assert!(n == 5 || n == 6);
    let mut pts = simplex_points();
    if n == 6 {
        pts.push(Vec4([rat(2, 5), rat(2, 5), rat(2, 5), rat(2, 5)]));
    }
    let base = Polytope::convex_hull(&pts).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Ok(p) = perturb(&base, &rat(1, 5), 100, rng.gen()) {
            if p.vertices().len() == n {
                return p;
            }
        }
    }
}

pub fn random_rational(rng: &mut ChaCha8Rng, den: i64) -> Rat {
    Rat::new(BigInt::from(rng.gen_range(-den..=den)), BigInt::from(den))
}

/// Identity of an orbit up to the bookkeeping fields.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct OrbitKey {
    pub cycle: Vec<usize>,
    pub action: String,
    pub bracket: Option<String>,
    pub cz: Option<i64>,
    pub orbit_type: u8,
}

pub fn key_of(r: &OrbitRecord) -> OrbitKey {
    OrbitKey {
        cycle: r.cycle.clone(),
        action: format_rat(&r.action),
        bracket: r.bracket().map(|b| b.to_string()),
        cz: r.cz,
        orbit_type: r.orbit_type,
    }
}

pub fn keys(recs: &[OrbitRecord]) -> Vec<OrbitKey> {
    let mut k: Vec<OrbitKey> = recs.iter().map(key_of).collect();
    k.sort();
    k
}

fn canonical(g: &FlowGraph, cycle: &[usize]) -> bool {
    let start = g.edges[cycle[0]].src;
    (0..cycle.len()).filter(|&k| g.edges[cycle[k]].src == start).all(|k| {
        let mut rot = cycle[k..].to_vec();
        rot.extend_from_slice(&cycle[..k]);
        cycle <= &rot[..]
    })
}

/// Every closed walk of at most `max_len` edges that starts at its smallest node,
/// in canonical rotation. No geometric pruning.
pub fn closed_walks(g: &FlowGraph, max_len: usize) -> Vec<Vec<usize>> {
    fn go(g: &FlowGraph, start: usize, at: usize, path: &mut Vec<usize>, max_len: usize, out: &mut Vec<Vec<usize>>) {
        if path.len() == max_len {
            return;
        }
        for &e in g.out_edges(at) {
            let dst = g.edges[e].dst;
            if dst < start {
                continue;
            }
            path.push(e);
            if dst == start && canonical(g, path) {
                out.push(path.clone());
            }
            go(g, start, dst, path, max_len, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    for s in 0..g.nodes.len() {
        go(g, s, s, &mut Vec::new(), max_len, &mut out);
    }
    out
}

/// Total counterclockwise angle swept by `(1, 0)` under the edge matrices in turn.
/// Each edge matrix is positive elliptic, so every step turns by an angle in (0, π).
pub fn winding_turns(g: &FlowGraph, cycle: &[usize]) -> f64 {
    let mut v = [1.0f64, 0.0];
    let mut total = 0.0;
    for &e in cycle {
        let m = &g.edges[e].sp2.0;
        let w = [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
        total += (v[0] * w[1] - v[1] * w[0]).atan2(v[0] * w[0] + v[1] * w[1]);
        let n = w[0].hypot(w[1]);
        v = [w[0] / n, w[1] / n];
    }
    total / (2.0 * std::f64::consts::PI)
}

/// Bracket from a winding number and the exact class of the return map.
pub fn bracket_from_winding(turns: f64, class: Sp2Class) -> RotBracket {
    match class {
        Sp2Class::PositiveElliptic => RotBracket::OpenLow(turns.floor() as i64),
        Sp2Class::NegativeElliptic => RotBracket::OpenHigh(turns.floor() as i64 + 1),
        c if c.is_positive_real() => RotBracket::Integer(turns.round() as i64),
        _ => RotBracket::HalfInteger((turns - 0.5).round() as i64),
    }
}

/// `⌊ρ⌋ + ⌈ρ⌉` for a rotation number located by `b`.
pub fn floor_plus_ceil(b: RotBracket) -> i64 {
    match b {
        RotBracket::Integer(n) => 2 * n,
        RotBracket::HalfInteger(n) | RotBracket::OpenLow(n) => 2 * n + 1,
        RotBracket::OpenHigh(n) => 2 * n - 1,
    }
}

/// Evaluates one closed walk from scratch: exact return map, fixed set inside
/// the domain, action, type, rotation bracket and CZ index.
pub fn evaluate_walk(g: &FlowGraph, cycle: &[usize], bound: &Rat) -> Option<OrbitKey> {
    let base = g.edges[cycle[0]].src;
    let map = cycle.iter().fold(Affine2::identity(), |m, &e| g.edges[e].map.after(&m));
    // Points of the base face that flow along the whole walk, for fixed sets of positive dimension.
    let domain = || {
        let mut d = g.nodes[base].polygon.clone();
        let mut m = Affine2::identity();
        for &e in cycle {
            let edge = &g.edges[e];
            let cuts: Vec<HalfPlane> = edge.domain.halfplanes().iter().map(|h| h.pullback(&m)).collect();
            d = d.clip_all(cuts.iter());
            m = edge.map.after(&m);
        }
        d
    };
    let follows = |x: &[Rat; 2]| {
        let mut cur = x.clone();
        g.nodes[base].polygon.contains(&cur)
            && cycle.iter().all(|&e| {
                let edge = &g.edges[e];
                let ok = edge.domain.contains(&cur);
                cur = edge.map.apply(&cur);
                ok
            })
    };
    let fixed = match map.fixed_points() {
        FixedSet::Empty => return None,
        FixedSet::Point(x) => follows(&x).then(|| vec![x])?,
        FixedSet::Line { normal, value } => {
            let up = HalfPlane { normal: normal.clone(), bound: value.clone() };
            let down = HalfPlane { normal: [-normal[0].clone(), -normal[1].clone()], bound: -value };
            domain().clip(&up).clip(&down).vertices().to_vec()
        }
        FixedSet::Plane => domain().vertices().to_vec(),
    };
    if fixed.is_empty() {
        return None;
    }
    let action_at = |x: &[Rat; 2]| -> (Rat, bool) {
        let mut cur = x.clone();
        let mut a = Rat::zero();
        let mut boundary = false;
        for &e in cycle {
            let edge = &g.edges[e];
            assert!(edge.domain.contains(&cur));
            boundary |= !g.nodes[edge.src].polygon.contains_interior(&cur);
            a += edge.action.eval(&cur);
            cur = edge.map.apply(&cur);
        }
        assert_eq!(&cur, x);
        (a, boundary)
    };
    let n = fixed.len();
    let rep = if n == 1 {
        fixed[0].clone()
    } else {
        let s = fixed.iter().fold([Rat::zero(), Rat::zero()], |s, p| [&s[0] + &p[0], &s[1] + &p[1]]);
        let k = int(n as i64);
        [&s[0] / &k, &s[1] / &k]
    };
    let actions: Vec<Rat> = fixed.iter().map(|x| action_at(x).0).collect();
    let lo = actions.iter().min().unwrap();
    let hi = actions.iter().max().unwrap();
    if hi.is_zero() || lo > bound {
        return None;
    }
    let (action, boundary) = action_at(&rep);
    let class = classify_exact(&map.linear, &g.nodes[base].form);
    let bracket = bracket_from_winding(winding_turns(g, cycle), class);
    let nondegenerate = !map.linear.sub_identity().det().is_zero();
    let cz = nondegenerate.then(|| floor_plus_ceil(bracket));
    Some(OrbitKey {
        cycle: cycle.to_vec(),
        action: format_rat(&action),
        bracket: Some(bracket.to_string()),
        cz,
        orbit_type: if boundary { 2 } else { 1 },
    })
}

/// Orbits of action at most `bound` with at most `max_len` segments, by exhaustion.
pub fn brute_force(g: &FlowGraph, bound: &Rat, max_len: usize) -> Vec<OrbitKey> {
    let mut k: Vec<OrbitKey> =
        closed_walks(g, max_len).iter().filter_map(|c| evaluate_walk(g, c, bound)).collect();
    k.sort();
    k
}
