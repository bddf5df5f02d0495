mod grid;
mod operator;

use anyhow::Result;
use serde_json::json;

use crate::config::{Experiment, ExperimentConfig};
use crate::report::Report;

pub use grid::{domain, potential};
pub use operator::{draw_case, Case};

/// Runs the configured experiment. Report contents depend only on the
/// config (including the seed), never on timing or thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let kind = cfg.kind()?;
    let name = cfg.name.clone().unwrap_or_else(|| kind.name().to_string());
    let mut rep = Report::new(kind.name(), &name, cfg.seed, parameters(cfg));
    match kind {
        Experiment::DysonVerify => operator::dyson_verify(cfg, &mut rep)?,
        Experiment::Duhamel => operator::duhamel(cfg, &mut rep)?,
        Experiment::Mixed => operator::mixed(cfg, &mut rep)?,
        Experiment::ResolventScan => operator::resolvent_scan(cfg, &mut rep)?,
        Experiment::HeatKernel => grid::heat_kernel(cfg, &mut rep)?,
        Experiment::BqProbe => grid::bq_probe(cfg, &mut rep)?,
        Experiment::WeylCheck => grid::weyl_check(cfg, &mut rep)?,
        Experiment::HeatTrace => grid::heat_trace(cfg, &mut rep)?,
    }
    Ok(rep)
}

fn parameters(cfg: &ExperimentConfig) -> serde_json::Value {
    let mut p = json!({ "cases": cfg.cases, "quad_panels": cfg.quad_panels });
    let set = |p: &mut serde_json::Value, k: &str, v: serde_json::Value| {
        p[k] = v;
    };
    if let Some(v) = cfg.p {
        set(&mut p, "p", json!(v));
    }
    if let Some(v) = cfg.q {
        set(&mut p, "q", json!(v));
    }
    if let Some(v) = cfg.n_max {
        set(&mut p, "n_max", json!(v));
    }
    if let Ok(ts) = cfg.times() {
        set(&mut p, "times", json!(ts));
    }
    if let Some(op) = &cfg.operator {
        set(
            &mut p,
            "operator",
            json!({
                "dim": op.dim,
                "spectrum": op.spectrum,
                "skew": op.skew,
                "perturbation_scale": op.perturbation_scale,
                "observable_scale": op.observable_scale,
            }),
        );
    }
    if let Some(d) = &cfg.domain {
        let mut dj = json!({ "kind": format!("{:?}", d.kind).to_lowercase(), "n": d.n, "dim": d.dim });
        if let Some(l) = d.length {
            dj["length"] = json!(l);
        }
        if let Some(l) = d.lengths {
            dj["lengths"] = json!(l);
        }
        if let Some(r) = d.half_width {
            dj["half_width"] = json!(r);
        }
        set(&mut p, "domain", dj);
    }
    if let Some(v) = &cfg.potential {
        let mut vj = json!({ "scale": v.scale });
        if let Some(e) = &v.expr {
            vj["expr"] = json!(e);
        }
        if let Some(c) = &v.csv {
            vj["csv"] = json!(c.to_string_lossy());
        }
        set(&mut p, "potential", vj);
    }
    p
}
