//! Rational vertex perturbations and a hill climber for the systolic ratio.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::capacities::systolic_ratio;
use crate::error::{Error, Result};
use crate::linalg::Vec4;
use crate::num::{format_rat, rat_approx, rat_to_f64, Rat};
use crate::polytope::Polytope;
use crate::Vec4Q;

pub const PERTURB_ATTEMPTS: u32 = 32;

fn offset(rng: &mut ChaCha8Rng, magnitude: &Rat, denominator: i64) -> Rat {
    let k = rng.gen_range(-denominator..=denominator);
    magnitude * Rat::new(BigInt::from(k), BigInt::from(denominator))
}

fn jitter(p: &Polytope, magnitude: &Rat, denominator: i64, rng: &mut ChaCha8Rng) -> Result<Polytope> {
    let pts: Vec<Vec4Q> = p
        .vertices()
        .iter()
        .map(|v| Vec4(std::array::from_fn(|i| &v.0[i] + offset(rng, magnitude, denominator))))
        .collect();
    Polytope::convex_hull(&pts)
}

/// Adds offsets `m·k/denominator`, `k` uniform in `[-denominator, denominator]`, to every vertex
/// coordinate and re-hulls, retrying until the result is symplectic.
pub fn perturb(p: &Polytope, magnitude: &Rat, denominator: i64, seed: u64) -> Result<Polytope> {
    let denominator = denominator.max(1);
    if magnitude.is_zero() {
        return if p.is_symplectic() { Ok(p.clone()) } else { Err(Error::PerturbationFailed(1)) };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..PERTURB_ATTEMPTS {
        if let Ok(q) = jitter(p, magnitude, denominator, &mut rng) {
            if q.is_symplectic() {
                return Ok(q);
            }
        }
    }
    Err(Error::PerturbationFailed(PERTURB_ATTEMPTS))
}

/// Symplectic polytope with exactly `n` vertices drawn from the grid `(1/grid)·Z⁴ ∩ [-1, 1]⁴`.
pub fn random_polytope(n: usize, grid: i64, rng: &mut ChaCha8Rng) -> Result<Polytope> {
    let grid = grid.max(1);
    for _ in 0..1000 {
        let pts: Vec<Vec4Q> = (0..n)
            .map(|_| {
                Vec4(std::array::from_fn(|_| {
                    Rat::new(BigInt::from(rng.gen_range(-grid..=grid)), BigInt::from(grid))
                }))
            })
            .collect();
        if let Ok(p) = Polytope::convex_hull(&pts) {
            if p.vertices().len() == n && p.is_symplectic() {
                return Ok(p);
            }
        }
    }
    Err(Error::PerturbationFailed(1000))
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub iterations: usize,
    pub step: Rat,
    /// Vertex coordinates stay on the grid `(1/grid)·Z`.
    pub grid: i64,
    /// Consecutive rejections before the step is halved.
    pub patience: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { iterations: 1000, step: Rat::new(1.into(), 100.into()), grid: 10_000, patience: 50, restarts: 1, seed: 0 }
    }
}

pub enum Start {
    From(Polytope),
    Random(usize),
}

#[derive(Clone, Debug)]
pub struct SearchState {
    pub polytope: Polytope,
    pub sys: Rat,
    pub best: Rat,
    pub best_polytope: Polytope,
    pub step: Rat,
    pub restart: usize,
    pub accepted: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TracePoint {
    pub restart: usize,
    pub iteration: usize,
    pub best: Rat,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub best: SearchState,
    pub runs: Vec<SearchState>,
    pub trace: Vec<TracePoint>,
}

impl SearchOutcome {
    pub fn to_json(&self) -> Value {
        json!({
            "best_sys": format_rat(&self.best.best),
            "best_sys_float": rat_to_f64(&self.best.best),
            "best_restart": self.best.restart,
            "best_polytope": self.best.best_polytope.to_json(),
            "runs": self.runs.iter().map(|r| json!({
                "restart": r.restart, "best_sys": format_rat(&r.best), "accepted": r.accepted,
                "failed": r.failed, "final_step": format_rat(&r.step),
            })).collect::<Vec<_>>(),
            "trace": self.trace.iter().map(|t| json!([t.restart, t.iteration, rat_to_f64(&t.best)])).collect::<Vec<_>>(),
        })
    }
}

fn round_to_grid(x: &Rat, grid: i64) -> Rat {
    let g = BigInt::from(grid);
    Rat::new((x * Rat::from_integer(g.clone())).round().to_integer(), g)
}

/// Rescales to volume close to 1, snapping coordinates to the grid.
fn normalize(p: &Polytope, grid: i64) -> Result<Polytope> {
    let vol = rat_to_f64(&p.volume());
    let r = rat_approx(vol.powf(-0.25), 1 << 20);
    let pts: Vec<Vec4Q> =
        p.vertices().iter().map(|v| Vec4(std::array::from_fn(|i| round_to_grid(&(&v.0[i] * &r), grid)))).collect();
    Polytope::convex_hull(&pts)
}

fn evaluate(p: &Polytope, n: usize) -> Option<Rat> {
    if p.vertices().len() != n || !p.is_symplectic() {
        return None;
    }
    systolic_ratio(p).ok()
}

/// Strict-improvement hill climbing from `start`; returns the final state and the best-so-far trace.
pub fn hill_climb(start: &Polytope, cfg: &SearchConfig, restart: usize) -> Result<(SearchState, Vec<TracePoint>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(restart as u64));
    let n = start.vertices().len();
    let sys = systolic_ratio(start)?;
    let mut st = SearchState {
        polytope: start.clone(),
        sys: sys.clone(),
        best: sys.clone(),
        best_polytope: start.clone(),
        step: cfg.step.clone(),
        restart,
        accepted: 0,
        failed: 0,
    };
    let mut trace = vec![TracePoint { restart, iteration: 0, best: sys }];
    let mut stale = 0;
    for it in 1..=cfg.iterations {
        let span = (&st.step * Rat::from_integer(cfg.grid.into())).floor().to_integer().to_i64().unwrap_or(0);
        if span < 1 {
            break;
        }
        let unit = Rat::new(BigInt::from(span), BigInt::from(cfg.grid));
        let cand = jitter(&st.polytope, &unit, span, &mut rng).and_then(|q| normalize(&q, cfg.grid));
        match cand.ok().and_then(|q| evaluate(&q, n).map(|s| (q, s))) {
            Some((q, s)) if s > st.sys => {
                st.polytope = q;
                st.sys = s;
                st.accepted += 1;
                stale = 0;
                if st.sys > st.best {
                    st.best = st.sys.clone();
                    st.best_polytope = st.polytope.clone();
                    trace.push(TracePoint { restart, iteration: it, best: st.best.clone() });
                }
                continue;
            }
            Some(_) => {}
            None => st.failed += 1,
        }
        stale += 1;
        if stale >= cfg.patience {
            st.step /= Rat::from_integer(2.into());
            stale = 0;
        }
    }
    Ok((st, trace))
}

/// Independent restarts run concurrently; results are ordered by restart index.
pub fn search(start: &Start, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let runs: Vec<Result<(SearchState, Vec<TracePoint>)>> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (r as u64).rotate_left(32));
            let p0 = match start {
                Start::From(p) if r == 0 => p.clone(),
                Start::From(p) => perturb(p, &cfg.step, cfg.grid, rng.gen())?,
                Start::Random(n) => random_polytope(*n, 12, &mut rng)?,
            };
            hill_climb(&p0, cfg, r)
        })
        .collect();
    let mut states = Vec::new();
    let mut trace = Vec::new();
    for run in runs {
        let (s, t) = run?;
        states.push(s);
        trace.extend(t);
    }
    let best = states
        .iter()
        .fold(None::<&SearchState>, |acc, s| match acc {
            Some(b) if b.best >= s.best => Some(b),
            _ => Some(s),
        })
        .expect("at least one restart")
        .clone();
    Ok(SearchOutcome { best, runs: states, trace })
}

/// Whether a trace's best-so-far values never decrease within each restart.
pub fn trace_is_monotone(trace: &[TracePoint]) -> bool {
    trace.windows(2).all(|w| w[0].restart != w[1].restart || (w[0].best <= w[1].best && w[0].iteration < w[1].iteration))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use crate::num::{int, rat};

    fn simplex() -> Polytope {
        let mut pts = vec![Vec4::zero()];
        for i in 0..4 {
            let mut v: Vec4Q = Vec4::zero();
            v.0[i] = int(1);
            pts.push(v);
        }
        Polytope::convex_hull(&pts).unwrap()
    }

    #[test]
    fn zero_magnitude_is_identity_or_fails() {
        let s = simplex();
        assert!(!s.is_symplectic());
        assert_eq!(perturb(&s, &Rat::zero(), 1000, 1).unwrap_err(), Error::PerturbationFailed(1));
    }

    #[test]
    fn perturbation_is_deterministic_and_symplectic() {
        let s = simplex();
        let a = perturb(&s, &rat(1, 1000), 1000, 7).unwrap();
        let b = perturb(&s, &rat(1, 1000), 1000, 7).unwrap();
        assert!(a.is_symplectic());
        assert_eq!(a.vertices(), b.vertices());
        for (v, w) in a.vertices().iter().zip(s.vertices()) {
            for i in 0..4 {
                assert!((&v.0[i] - &w.0[i]).abs() <= rat(1, 1000));
            }
        }
    }

    #[test]
    fn random_polytope_has_requested_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_polytope(6, 10, &mut rng).unwrap();
        assert_eq!(p.vertices().len(), 6);
        assert!(p.is_symplectic());
    }

    #[test]
    fn grid_rounding() {
        assert_eq!(round_to_grid(&rat(1, 3), 10), rat(3, 10));
        assert_eq!(round_to_grid(&rat(-7, 20), 10), rat(-2, 5));
    }

    #[test]
    fn hill_climb_trace_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = random_polytope(5, 10, &mut rng).unwrap();
        let cfg = SearchConfig { iterations: 30, patience: 5, ..SearchConfig::default() };
        let (st, trace) = hill_climb(&p, &cfg, 0).unwrap();
        assert!(trace_is_monotone(&trace));
        assert!(st.best >= trace[0].best);
        assert_eq!(trace.last().unwrap().best, st.best);
    }
}
