use reeb4::capacities::{prepare, prepare_avoiding_lagrangian, ehz_of_graph, AkOptions, CapacityReport, Prepared, ReportOptions};
use reeb4::num::format_rat;
use reeb4::orbits::{enumerate, zoll_check, SearchQuery};
use reeb4::polytope::ReebKind;
use reeb4::search::{perturb, search, SearchConfig, Start};
use reeb4::{Error, Polytope};
use serde_json::{json, Map, Value};

use crate::{Command, Failure, RunConfig};

pub struct Output {
    pub report: Value,
    pub poisoned: bool,
}

impl Output {
    fn clean(report: Value) -> Self {
        Output { report, poisoned: false }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Output, Failure> {
    if cfg.command == Command::Search {
        return cmd_search(cfg);
    }
    let (p, perturbed) = load(cfg)?;
    let mut out = match cfg.command {
        Command::Analyze => Output::clean(analyze(&p)),
        Command::Orbits => cmd_orbits(cfg, &p)?,
        Command::Ehz | Command::Sys => cmd_capacities(cfg, &p, None)?,
        Command::Ak => {
            let bound = cfg.action_cap.clone().ok_or_else(|| Failure::Usage("ak needs the action bound --action-max".into()))?;
            let ak = AkOptions { bound, kmax: cfg.k.max(1), per_threeface_cap: cfg.per_threeface_cap.unwrap_or(2) };
            cmd_capacities(cfg, &p, Some(ak))?
        }
        Command::Zoll => cmd_zoll(cfg, &p)?,
        Command::Graph => Output::clean(graph(cfg, &p)?.graph.to_json()),
        Command::Search => unreachable!(),
    };
    if let (Some(v), Value::Object(m)) = (perturbed, &mut out.report) {
        m.insert("perturbed_vertices".into(), v);
    }
    Ok(out)
}

fn read_polytope(cfg: &RunConfig) -> Result<Polytope, Failure> {
    let path = cfg.input.as_ref().ok_or_else(|| Failure::Usage("--input is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Polytope::from_json(&text).map_err(|e| match e {
        Error::Parse(m) => Failure::Run(Error::Parse(format!("{}: {m}", path.display()))),
        other => Failure::Run(other),
    })
}

fn vertex_json(p: &Polytope) -> Value {
    json!(p.vertices().iter().map(|v| v.0.iter().map(format_rat).collect::<Vec<_>>()).collect::<Vec<_>>())
}

/// The input polytope, perturbed when requested.
fn load(cfg: &RunConfig) -> Result<(Polytope, Option<Value>), Failure> {
    let p = read_polytope(cfg)?;
    match &cfg.perturb {
        Some(m) if cfg.command != Command::Analyze => {
            let q = perturb(&p, m, cfg.denominator, cfg.seed)?;
            let v = vertex_json(&q);
            Ok((q, Some(v)))
        }
        _ => Ok((p, None)),
    }
}

fn graph(cfg: &RunConfig, p: &Polytope) -> Result<Prepared, Failure> {
    Ok(if cfg.avoid_lagrangian { prepare_avoiding_lagrangian(p, cfg.tol)? } else { prepare(p, cfg.tol)? })
}

pub fn analyze(p: &Polytope) -> Value {
    let lat = p.lattice();
    let (mut good, mut bad, mut ill_posed) = (0, 0, 0);
    for k in 0..lat.faces(1).len() {
        match p.reeb_cone(1, k).map(|c| c.kind) {
            Ok(ReebKind::BadEdge) => bad += 1,
            Ok(_) => good += 1,
            Err(_) => ill_posed += 1,
        }
    }
    let lagrangian = p.symplectic_report().lagrangian;
    let translation = match p.recenter() {
        Ok((_, t)) => json!(t.0.iter().map(format_rat).collect::<Vec<_>>()),
        Err(e) => json!({ "error": e.to_string() }),
    };
    json!({
        "counts": lat.counts(),
        "euler": lat.euler(),
        "symplectic": lagrangian.is_empty(),
        "lagrangian_faces": lagrangian,
        "one_faces": { "good": good, "bad": bad, "ill_posed": ill_posed },
        "volume": format_rat(&p.volume()),
        "translation": translation,
        "vertices": vertex_json(p),
    })
}

fn cmd_orbits(cfg: &RunConfig, p: &Polytope) -> Result<Output, Failure> {
    let q = SearchQuery {
        action_cap: cfg.action_cap.clone(),
        rho_cap: cfg.rho_cap.clone(),
        max_segments: cfg.max_segments,
        per_threeface_cap: cfg.per_threeface_cap,
        include_boundary: true,
    };
    if !q.is_valid() {
        return Err(Failure::Usage("orbits needs --action-max or --max-segments".into()));
    }
    let prep = graph(cfg, p)?;
    let recs = enumerate(&prep.graph, &q);
    let poisoned = recs.iter().any(|r| r.is_poisoned());
    Ok(Output {
        report: json!({
            "translation": prep.translation.0.iter().map(format_rat).collect::<Vec<_>>(),
            "lagrangian_faces_avoided": prep.graph.lagrangian,
            "count": recs.len(),
            "orbits": recs.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        }),
        poisoned,
    })
}

fn cmd_capacities(cfg: &RunConfig, p: &Polytope, ak: Option<AkOptions>) -> Result<Output, Failure> {
    // EHZ values are exact; only the index-dependent A_k table can be poisoned.
    let wants_ak = ak.is_some();
    let opts = ReportOptions { tol: cfg.tol, avoid_lagrangian: cfg.avoid_lagrangian, ak };
    let r = CapacityReport::compute(p, &opts)?;
    let mut v = r.to_json();
    if cfg.command == Command::Sys {
        v.as_object_mut().expect("object").remove("minimizers");
    }
    Ok(Output { report: v, poisoned: wants_ak && r.is_poisoned() })
}

fn cmd_zoll(cfg: &RunConfig, p: &Polytope) -> Result<Output, Failure> {
    let prep = graph(cfg, p)?;
    let c = ehz_of_graph(&prep.graph)?.value;
    let cert = zoll_check(&prep.graph, &c, Some(cfg.per_threeface_cap.unwrap_or(1)));
    let mut v = cert.to_json();
    let m = v.as_object_mut().expect("object");
    m.insert("ehz".into(), json!(format_rat(&c)));
    m.insert("lagrangian_faces_avoided".into(), json!(prep.graph.lagrangian));
    Ok(Output::clean(v))
}

fn cmd_search(cfg: &RunConfig) -> Result<Output, Failure> {
    let start = match &cfg.input {
        Some(_) => Start::From(load(cfg)?.0),
        None => Start::Random(cfg.vertices),
    };
    let sc = SearchConfig {
        iterations: cfg.iters,
        step: cfg.step.clone(),
        grid: cfg.denominator,
        patience: 50,
        restarts: cfg.restarts,
        seed: cfg.seed,
    };
    Ok(Output::clean(search(&start, &sc)?.to_json()))
}

/// One `key: value` line per top-level field.
pub fn render_text(v: &Value) -> String {
    let empty = Map::new();
    let mut s = String::new();
    for (k, x) in v.as_object().unwrap_or(&empty) {
        let shown = match x {
            Value::String(t) => t.clone(),
            other => other.to_string(),
        };
        s.push_str(&format!("{k}: {shown}\n"));
    }
    s
}
