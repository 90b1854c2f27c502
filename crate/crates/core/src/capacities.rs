//! EHZ capacity, systolic ratio, and the capacities `A_k`.
//!
//! The EHZ capacity is the least action of a closed orbit. It suffices to search
//! orbits crossing each 3-face at most once, including those that touch face
//! boundaries; any such candidate bounds the capacity from above, and some
//! minimizer is among them.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::flow::FlowGraph;
use crate::num::{format_rat, int, Rat};
use crate::orbits::{enumerate, enumerate_minimal, OrbitRecord, SearchQuery};
use crate::polytope::Polytope;
use crate::sp2::DEFAULT_TOL;
use crate::linalg::{solve, Vec4};
use crate::Vec4Q;

/// A polytope translated to contain 0 in its interior, with its flow graph.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub polytope: Polytope,
    pub translation: Vec4Q,
    pub graph: FlowGraph,
}

pub fn prepare(p: &Polytope, tol: f64) -> Result<Prepared> {
    let (polytope, translation) = p.recenter()?;
    let graph = FlowGraph::build(&polytope, tol)?;
    Ok(Prepared { polytope, translation, graph })
}

/// As [`prepare`], keeping Lagrangian 2-faces as isolated nodes.
pub fn prepare_avoiding_lagrangian(p: &Polytope, tol: f64) -> Result<Prepared> {
    let (polytope, translation) = p.recenter()?;
    let graph = FlowGraph::build_avoiding_lagrangian(&polytope, tol)?;
    Ok(Prepared { polytope, translation, graph })
}

#[derive(Clone, Debug)]
pub struct EhzResult {
    pub value: Rat,
    pub minimizers: Vec<OrbitRecord>,
    /// Lagrangian 2-faces the orbits were required to avoid. When nonempty the
    /// value is the least action of such orbits, an upper bound for the capacity.
    pub avoided: Vec<usize>,
}

pub fn ehz_query(g: &FlowGraph) -> SearchQuery {
    SearchQuery {
        action_cap: None,
        rho_cap: None,
        max_segments: Some(g.polytope().facets().len()),
        per_threeface_cap: Some(1),
        include_boundary: true,
    }
}

pub fn ehz_of_graph(g: &FlowGraph) -> Result<EhzResult> {
    let minimizers = enumerate_minimal(g, &ehz_query(g));
    let value = minimizers.first().map(|r| r.action.clone()).ok_or(Error::NoOrbit)?;
    Ok(EhzResult { value, minimizers, avoided: g.lagrangian.clone() })
}

pub fn ehz(p: &Polytope) -> Result<EhzResult> {
    ehz_of_graph(&prepare(p, DEFAULT_TOL)?.graph)
}

/// Least action of closed orbits avoiding Lagrangian 2-faces; equals [`ehz`] on
/// symplectic polytopes.
pub fn ehz_avoiding_lagrangian(p: &Polytope) -> Result<EhzResult> {
    ehz_of_graph(&prepare_avoiding_lagrangian(p, DEFAULT_TOL)?.graph)
}

/// `ehz² / (2·vol)`.
pub fn systolic_ratio(p: &Polytope) -> Result<Rat> {
    let c = ehz(p)?.value;
    Ok(sys_from(&c, &p.volume()))
}

pub fn sys_from(ehz: &Rat, volume: &Rat) -> Rat {
    ehz * ehz / (int(2) * volume)
}

/// Settings for [`ehz_limit`].
#[derive(Clone, Debug)]
pub struct LimitOptions {
    /// Largest perturbation size sampled.
    pub eps: Rat,
    /// Largest numerator and denominator degree tried for the fitted rational function.
    pub max_degree: usize,
    /// Directions tried before giving up.
    pub attempts: u32,
    pub seed: u64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { eps: Rat::new(1.into(), 10_000.into()), max_degree: 6, attempts: 4, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct EhzLimit {
    pub value: Rat,
    pub degree: usize,
    pub eps: Rat,
    pub samples: usize,
    pub seed: u64,
}

/// EHZ capacity of a polytope that may have Lagrangian 2-faces, as the limit of
/// `ehz(X + εD)` for a random rational vertex displacement `D`.
///
/// For small `ε` the minimizing orbit keeps its combinatorics and its action is
/// a rational function of `ε`. That function is recovered exactly from samples
/// `ε/1, ε/2, …`, accepted only once it also predicts two further samples, and
/// evaluated at 0.
pub fn ehz_limit(p: &Polytope, opts: &LimitOptions) -> Result<EhzLimit> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut eps = opts.eps.clone();
    let hundred = Rat::from_integer(100.into());
    for _ in 0..opts.attempts {
        let seed = rng.gen();
        if let Some(mut lim) = limit_along(p, &direction(p, seed), &eps, opts.max_degree)? {
            lim.seed = seed;
            return Ok(lim);
        }
        eps /= hundred.clone();
    }
    Err(Error::PerturbationFailed(opts.attempts))
}

fn direction(p: &Polytope, seed: u64) -> Vec<Vec4Q> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || Rat::new(BigInt::from(rng.gen_range(-1000..=1000)), BigInt::from(1000));
    p.vertices().iter().map(|_| Vec4([draw(), draw(), draw(), draw()])).collect()
}

/// `None` when the samples do not fit a low-degree rational function.
fn limit_along(p: &Polytope, dir: &[Vec4Q], eps: &Rat, max_degree: usize) -> Result<Option<EhzLimit>> {
    let n = p.vertices().len();
    let mut xs: Vec<Rat> = Vec::new();
    let mut fs: Vec<Rat> = Vec::new();
    for d in 0..=max_degree {
        while xs.len() < 2 * d + 3 {
            let x = eps / Rat::from_integer(BigInt::from(xs.len() + 1));
            let pts: Vec<Vec4Q> = p.vertices().iter().zip(dir).map(|(v, w)| v + &w.scale(&x)).collect();
            let q = Polytope::convex_hull(&pts)?;
            if q.vertices().len() != n || !q.is_symplectic() {
                return Ok(None);
            }
            fs.push(ehz(&q)?.value);
            xs.push(x);
        }
        let fit = 2 * d + 1;
        if let Some((num, den)) = fit_rational(&xs[..fit], &fs[..fit], d) {
            let predicts = (fit..fit + 2).all(|k| {
                let qx = eval_poly(&den, &xs[k]);
                !qx.is_zero() && eval_poly(&num, &xs[k]) / qx == fs[k]
            });
            if predicts {
                return Ok(Some(EhzLimit { value: num[0].clone(), degree: d, eps: eps.clone(), samples: xs.len(), seed: 0 }));
            }
        }
    }
    Ok(None)
}

fn eval_poly(c: &[Rat], x: &Rat) -> Rat {
    c.iter().rev().fold(Rat::zero(), |acc, a| acc * x + a)
}

/// `P/Q` of degrees `≤ d` with `Q(0) = 1` through the `2d + 1` points.
fn fit_rational(xs: &[Rat], fs: &[Rat], d: usize) -> Option<(Vec<Rat>, Vec<Rat>)> {
    let rows: Vec<Vec<Rat>> = xs
        .iter()
        .zip(fs)
        .map(|(x, f)| {
            let pow: Vec<Rat> = std::iter::successors(Some(Rat::one()), |a| Some(a * x)).take(d + 1).collect();
            pow.iter().cloned().chain(pow[1..].iter().map(|a| -(a * f))).collect()
        })
        .collect();
    let sol = solve(&rows, fs)?;
    let num = sol[..=d].to_vec();
    let den = std::iter::once(Rat::one()).chain(sol[d + 1..].iter().cloned()).collect();
    Some((num, den))
}

/// EHZ capacity, through [`ehz_limit`] when the polytope has Lagrangian 2-faces.
pub fn ehz_general(p: &Polytope, opts: &LimitOptions) -> Result<Rat> {
    if p.is_symplectic() {
        Ok(ehz(p)?.value)
    } else {
        Ok(ehz_limit(p, opts)?.value)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AkValue {
    Value(Rat),
    /// No qualifying orbit with action below this bound.
    Unknown(Rat),
}

impl AkValue {
    pub fn value(&self) -> Option<&Rat> {
        match self {
            AkValue::Value(v) => Some(v),
            AkValue::Unknown(_) => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AkValue::Value(v) => json!(format_rat(v)),
            AkValue::Unknown(l) => json!({"unknown_below": format_rat(l)}),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LNondegReport {
    pub bound: Rat,
    pub nondegenerate: bool,
    /// Records with action ≤ bound that are Type 2, degenerate, or lack rotation data.
    pub offending: Vec<usize>,
}

/// Search used for `A_k`: actions up to `bound`, each 3-face crossed at most
/// `per_threeface_cap` times so that multiple covers are found.
pub fn ak_query(g: &FlowGraph, bound: &Rat, per_threeface_cap: usize) -> SearchQuery {
    SearchQuery {
        action_cap: Some(bound.clone()),
        rho_cap: None,
        max_segments: Some(per_threeface_cap * g.polytope().facets().len()),
        per_threeface_cap: Some(per_threeface_cap),
        include_boundary: true,
    }
}

pub fn l_nondegenerate(records: &[OrbitRecord], bound: &Rat) -> LNondegReport {
    let offending: Vec<usize> = records
        .iter()
        .filter(|r| {
            let a = r.family.as_ref().map_or(&r.action, |f| &f.action_min);
            a <= bound && (r.orbit_type == 2 || !r.nondegenerate || r.is_poisoned())
        })
        .map(|r| r.id)
        .collect();
    LNondegReport { bound: bound.clone(), nondegenerate: offending.is_empty(), offending }
}

/// Least action below `bound` of a nondegenerate Type 1 orbit with index `2k+1`.
pub fn a_k(records: &[OrbitRecord], k: i64, bound: &Rat) -> AkValue {
    records
        .iter()
        .filter(|r| r.orbit_type == 1 && r.nondegenerate && r.cz == Some(2 * k + 1) && &r.action < bound)
        .map(|r| r.action.clone())
        .min()
        .map_or(AkValue::Unknown(bound.clone()), AkValue::Value)
}

/// `A₂ / (2·A₁)` when both are defined.
pub fn a2_test(a1: &AkValue, a2: &AkValue) -> Option<Rat> {
    match (a1.value(), a2.value()) {
        (Some(a1), Some(a2)) if !a1.is_zero() => Some(a2 / (int(2) * a1)),
        _ => None,
    }
}

#[derive(Clone, Debug)]
pub struct AkOptions {
    /// Orbits with action up to this bound are enumerated.
    pub bound: Rat,
    pub kmax: i64,
    pub per_threeface_cap: usize,
}

#[derive(Clone, Debug)]
pub struct ReportOptions {
    pub tol: f64,
    /// Accept Lagrangian 2-faces, computing orbits that avoid them.
    pub avoid_lagrangian: bool,
    pub ak: Option<AkOptions>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { tol: DEFAULT_TOL, avoid_lagrangian: false, ak: None }
    }
}

#[derive(Clone, Debug)]
pub struct CapacityReport {
    pub translation: Vec4Q,
    pub ehz: Rat,
    pub volume: Rat,
    pub sys: Rat,
    pub minimizers: Vec<OrbitRecord>,
    pub avoided: Vec<usize>,
    pub ak_bound: Option<Rat>,
    pub ak_table: BTreeMap<i64, AkValue>,
    pub l_nondeg: Option<LNondegReport>,
    pub a2_ratio: Option<Rat>,
    /// Enumerated orbits whose rotation data could not be determined.
    pub poisoned: Vec<usize>,
}

impl CapacityReport {
    /// EHZ and systolic ratio, plus `A_1..=A_kmax` when requested.
    pub fn compute(p: &Polytope, opts: &ReportOptions) -> Result<CapacityReport> {
        let prep = if opts.avoid_lagrangian {
            prepare_avoiding_lagrangian(p, opts.tol)?
        } else {
            prepare(p, opts.tol)?
        };
        let e = ehz_of_graph(&prep.graph)?;
        let volume = p.volume();
        let sys = sys_from(&e.value, &volume);
        let mut report = CapacityReport {
            translation: prep.translation,
            ehz: e.value,
            volume,
            sys,
            minimizers: e.minimizers,
            avoided: e.avoided,
            ak_bound: None,
            ak_table: BTreeMap::new(),
            l_nondeg: None,
            a2_ratio: None,
            poisoned: Vec::new(),
        };
        if let Some(ak) = &opts.ak {
            let recs = enumerate(&prep.graph, &ak_query(&prep.graph, &ak.bound, ak.per_threeface_cap));
            report.l_nondeg = Some(l_nondegenerate(&recs, &ak.bound));
            report.poisoned = recs.iter().filter(|r| r.is_poisoned()).map(|r| r.id).collect();
            for k in 1..=ak.kmax.max(2) {
                report.ak_table.insert(k, a_k(&recs, k, &ak.bound));
            }
            report.a2_ratio = a2_test(&report.ak_table[&1], &report.ak_table[&2]);
            report.ak_bound = Some(ak.bound.clone());
        }
        Ok(report)
    }

    pub fn is_poisoned(&self) -> bool {
        !self.poisoned.is_empty() || self.minimizers.iter().any(OrbitRecord::is_poisoned)
    }

    /// A ratio above 1 would contradict `A₂ ≤ 2·A₁`.
    pub fn a2_counterexample(&self) -> bool {
        self.a2_ratio.as_ref().is_some_and(|r| r > &int(1))
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "translation": self.translation.0.iter().map(format_rat).collect::<Vec<_>>(),
            "ehz": format_rat(&self.ehz),
            "volume": format_rat(&self.volume),
            "sys": format_rat(&self.sys),
            "lagrangian_faces_avoided": self.avoided,
            "minimizers": self.minimizers.iter().map(|r| json!({
                "cycle": r.nodes, "action": format_rat(&r.action), "type": r.orbit_type,
                "bracket": r.bracket().map(|b| b.to_string()), "cz": r.cz,
            })).collect::<Vec<_>>(),
        });
        if let (Some(bound), Some(l), Value::Object(m)) = (&self.ak_bound, &self.l_nondeg, &mut v) {
            m.insert("ak_bound".into(), json!(format_rat(bound)));
            m.insert(
                "ak".into(),
                Value::Object(self.ak_table.iter().map(|(k, v)| (k.to_string(), v.to_json())).collect()),
            );
            m.insert(
                "l_nondegenerate".into(),
                json!({ "bound": format_rat(&l.bound), "holds": l.nondegenerate, "offending": l.offending }),
            );
            m.insert("a2_ratio".into(), json!(self.a2_ratio.as_ref().map(format_rat)));
            m.insert("a2_counterexample".into(), json!(self.a2_counterexample()));
            m.insert("poisoned".into(), json!(self.poisoned));
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;
    use crate::shapes::{standard_simplex, twenty_four_cell};

    #[test]
    fn twenty_four_cell_capacities() {
        let p = twenty_four_cell();
        let e = ehz(&p).unwrap();
        assert_eq!(e.value, int(2));
        assert_eq!(e.minimizers.len(), 8);
        assert!(e.avoided.is_empty());
        assert_eq!(systolic_ratio(&p).unwrap(), int(1));
        assert_eq!(ehz(&p.scale(&rat(7, 5))).unwrap().value, rat(98, 25));
    }

    #[test]
    fn lagrangian_faces_are_rejected_or_avoided() {
        let p = standard_simplex();
        assert!(matches!(ehz(&p), Err(Error::NonSymplectic(_))));
        // Every closed orbit of the standard simplex meets a Lagrangian face.
        assert_eq!(ehz_avoiding_lagrangian(&p).unwrap_err(), Error::NoOrbit);
        let q = crate::shapes::from_rows(&["0,0,0,0", "1,-1/3,0,0", "0,-1/3,1,0", "-2/3,-1,2/3,0", "0,0,0,1"]).unwrap();
        let e = ehz_avoiding_lagrangian(&q).unwrap();
        assert_eq!(e.avoided.len(), 2);
        assert_eq!(e.value, rat(1, 4));
    }

    #[test]
    fn l_nondegeneracy_of_twenty_four_cell() {
        let prep = prepare(&twenty_four_cell(), DEFAULT_TOL).unwrap();
        let recs = enumerate(&prep.graph, &ak_query(&prep.graph, &int(3), 1));
        let rep = l_nondegenerate(&recs, &int(3));
        assert!(!rep.nondegenerate);
        assert_eq!(rep.offending.len(), 8);
        assert!(l_nondegenerate(&recs, &int(1)).nondegenerate);
        assert_eq!(a_k(&recs, 1, &int(1)), AkValue::Unknown(int(1)));
    }

    #[test]
    fn a2_ratio() {
        assert_eq!(a2_test(&AkValue::Value(int(1)), &AkValue::Value(rat(3, 2))), Some(rat(3, 4)));
        assert_eq!(a2_test(&AkValue::Value(int(1)), &AkValue::Unknown(int(5))), None);
    }

    #[test]
    fn rational_fit_recovers_value_at_zero() {
        let f = |x: &Rat| (int(1) + x) / (int(2) - x * x);
        let xs: Vec<Rat> = (1..=5).map(|k| rat(1, k)).collect();
        let fs: Vec<Rat> = xs.iter().map(f).collect();
        let (num, den) = fit_rational(&xs, &fs, 2).unwrap();
        assert_eq!(&num[0] / &den[0], rat(1, 2));
        assert_eq!(eval_poly(&num, &rat(1, 7)) / eval_poly(&den, &rat(1, 7)), f(&rat(1, 7)));
    }

    #[test]
    fn report_json() {
        let opts = ReportOptions { ak: Some(AkOptions { bound: int(3), kmax: 2, per_threeface_cap: 1 }), ..Default::default() };
        let r = CapacityReport::compute(&twenty_four_cell(), &opts).unwrap();
        let v = r.to_json();
        assert_eq!(v["ehz"], "2");
        assert_eq!(v["sys"], "1");
        assert_eq!(v["volume"], "2");
        assert_eq!(v["l_nondegenerate"]["holds"], false);
        assert!(!r.is_poisoned());
    }
}
