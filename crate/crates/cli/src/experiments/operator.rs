//! Experiments on seeded random pairs `(A, B)`.

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use schatten_semigroup::dyson::{self, default_n_max, dyson_terms, mixed_expansion, tail_certificate};
use schatten_semigroup::resolvent::{resolvent_difference_scan_with, spectral_enclosure_pair, vertical_decay_scan};
use schatten_semigroup::schatten::schatten_norm;
use schatten_semigroup::{random, DenseOperator64, Generator64, SchattenIndex64};

use crate::config::{ExperimentConfig, OperatorSpec, ScanSpec};
use crate::report::{num, Report, Table, Verdict};

pub struct Case {
    pub index: usize,
    pub seed: u64,
    pub a: DenseOperator64,
    pub b: DenseOperator64,
    /// Second perturbation, only used by `mixed`.
    pub b0: DenseOperator64,
}

/// Case `k` draws from its own stream seeded with `seed + k`, so cases are
/// independent of the thread schedule.
pub fn draw_case(op: &OperatorSpec, seed: u64, k: usize) -> Case {
    let s = seed.wrapping_add(k as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(s);
    let a = random::accretive(op.dim, op.spectrum[0], op.spectrum[1], op.skew, &mut rng);
    let b = random::gaussian(op.dim, op.perturbation_scale, &mut rng);
    let b0 = random::gaussian(op.dim, op.observable_scale, &mut rng);
    Case { index: k, seed: s, a, b, b0 }
}

fn cases(cfg: &ExperimentConfig) -> Result<Vec<Case>> {
    let op = cfg.operator.as_ref().context("config needs an [operator] table")?;
    Ok((0..cfg.cases).map(|k| draw_case(op, cfg.seed, k)).collect())
}

fn index(q: f64) -> Result<SchattenIndex64> {
    Ok(SchattenIndex64::new(q)?)
}

fn nums(v: &[f64]) -> Value {
    json!(v)
}

/// Runs `f` over all cases in parallel and returns results in case order.
fn per_case<R: Send>(cases: &[Case], f: impl Fn(&Case) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
    cases.par_iter().map(f).collect()
}

pub fn dyson_verify(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let q = index(cfg.q_index()?)?;
    let n_max = match cfg.n_max {
        Some(n) => n,
        None => default_n_max(q)?,
    };
    let ts = cfg.times()?;
    let tol = &cfg.tolerances;
    let cs = cases(cfg)?;

    struct Row {
        t: f64,
        ledger_norms: Vec<f64>,
        indices: Vec<f64>,
        envelope: Vec<f64>,
        tail_bound: f64,
        truncation_error: f64,
        resolution_error: f64,
        omega: f64,
        tail_terms: usize,
    }
    let out = per_case(&cs, |c| {
        let g = Generator64::new(c.a.clone())?;
        let exact_gen = Generator64::new(&c.a + &c.b)?;
        ts.iter()
            .map(|&t| {
                let l = dyson_terms(&g, &c.b, q, t, n_max, cfg.quad_panels)?;
                let err = schatten_norm(&(&l.partial_sum() - &exact_gen.evolve(t)?), SchattenIndex64::trace())?;
                let cert = tail_certificate(&g, &c.b, q, t)?;
                Ok(Row {
                    t,
                    envelope: (1..=l.n_max()).map(|n| cert.bound(n)).collect(),
                    indices: l.indices.iter().map(|i| i.as_f64()).collect(),
                    ledger_norms: l.term_norms.clone(),
                    tail_bound: l.tail_bound,
                    truncation_error: err,
                    resolution_error: l.resolution_error,
                    omega: cert.omega,
                    tail_terms: l.tail.as_ref().map_or(0, |s| s.terms_used),
                })
            })
            .collect::<Result<Vec<Row>>>()
    })?;

    let mut table = Table::new("terms", &["case", "t", "n", "index", "norm", "envelope"]);
    let mut results = Vec::new();
    for (c, rows) in cs.iter().zip(&out) {
        let mut recs = Vec::new();
        for r in rows {
            let limit = r.tail_bound.max(tol.truncation_floor);
            rep.verdict(Verdict::le(
                format!("case {} t={}: truncation error <= max(tail bound, floor)", c.index, r.t),
                r.truncation_error,
                r.tail_bound,
                tol.truncation_floor,
                r.truncation_error <= limit,
            ));
            let worst = r
                .ledger_norms
                .iter()
                .zip(&r.envelope)
                .map(|(x, b)| x / b)
                .fold(0.0f64, f64::max);
            rep.verdict(Verdict::le(
                format!("case {} t={}: max_n ||S_n|| / (e^(omega t) / (2^n t^2))", c.index, r.t),
                worst,
                1.0,
                tol.relative,
                worst <= 1.0 + tol.relative,
            ));
            for (n, ((x, i), e)) in r.ledger_norms.iter().zip(&r.indices).zip(&r.envelope).enumerate() {
                table.push(vec![c.index.to_string(), num(r.t), (n + 1).to_string(), num(*i), num(*x), num(*e)]);
            }
            recs.push(json!({
                "t": r.t,
                "tail_bound": r.tail_bound,
                "truncation_error": r.truncation_error,
                "resolution_error": r.resolution_error,
                "omega": r.omega,
                "tail_terms_used": r.tail_terms,
                "indices": nums(&r.indices),
                "term_norms": nums(&r.ledger_norms),
                "envelope": nums(&r.envelope),
            }));
        }
        results.push(json!({ "case": c.index, "seed": c.seed, "dim": c.a.dim(), "records": recs }));
    }
    rep.results = json!({ "n_max": n_max, "cases": results });
    rep.tables.push(table);
    Ok(())
}

pub fn duhamel(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let q = index(cfg.q_index()?)?;
    let ts = cfg.times()?;
    let tol = cfg.tolerances.duhamel;
    let cs = cases(cfg)?;
    let out = per_case(&cs, |c| {
        let g = Generator64::new(c.a.clone())?;
        ts.iter()
            .map(|&t| Ok(dyson::duhamel_report(&g, &c.b, q, t, cfg.quad_panels)?))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut table = Table::new("residuals", &["case", "t", "residual", "resolution_error"]);
    let mut results = Vec::new();
    for (c, rows) in cs.iter().zip(&out) {
        let mut recs = Vec::new();
        for (&t, r) in ts.iter().zip(rows) {
            rep.verdict(Verdict::le(format!("case {} t={t}: Duhamel residual", c.index), r.residual, 0.0, tol, r.residual <= tol));
            table.push(vec![c.index.to_string(), num(t), num(r.residual), num(r.resolution_error)]);
            recs.push(json!({ "t": t, "residual": r.residual, "resolution_error": r.resolution_error }));
        }
        results.push(json!({ "case": c.index, "seed": c.seed, "records": recs }));
    }
    rep.results = json!({ "cases": results });
    rep.tables.push(table);
    Ok(())
}

pub fn mixed(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let p = index(cfg.p.context("mixed needs p")?)?;
    let q = index(cfg.q_index()?)?;
    let n_max = match cfg.n_max {
        Some(n) => n,
        None => default_n_max(q)?,
    };
    let ts = cfg.times()?;
    let rel = cfg.tolerances.relative;
    let (ell, r_indices) = dyson::mixed_indices(p, q, n_max)?;
    let cs = cases(cfg)?;
    let out = per_case(&cs, |c| {
        let g = Generator64::new(c.a.clone())?;
        let full = Generator64::new(&c.a + &c.b)?;
        ts.iter()
            .map(|&t| {
                let m = mixed_expansion(&g, &c.b, &c.b0, p, q, t, n_max)?;
                let head = m.terms[..=m.ell].iter().fold(DenseOperator64::zeros(c.a.dim()), |acc, s| &acc + s);
                let w = schatten_norm(&(&(&c.b0 * &full.evolve(t)?) - &head), SchattenIndex64::trace())?;
                Ok((t, m, w))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut table = Table::new("terms", &["case", "t", "n", "r_n", "norm"]);
    let mut results = Vec::new();
    for (c, rows) in cs.iter().zip(&out) {
        let mut recs = Vec::new();
        for (t, m, w) in rows {
            rep.verdict(Verdict::le(
                format!("case {} t={t}: ||sum_(n>ell) B0 S_n||_1 <= certified bound", c.index),
                *w,
                m.w_norm_bound,
                rel,
                *w <= m.w_norm_bound * (1.0 + rel),
            ));
            for (n, (r, x)) in m.r_indices.iter().zip(&m.term_norms).enumerate() {
                table.push(vec![c.index.to_string(), num(*t), n.to_string(), num(*r), num(*x)]);
            }
            recs.push(json!({
                "t": t,
                "w_norm": w,
                "w_norm_bound": m.w_norm_bound,
                "term_norms": nums(&m.term_norms),
            }));
        }
        results.push(json!({ "case": c.index, "seed": c.seed, "records": recs }));
    }
    rep.results = json!({ "ell": ell, "r_indices": nums(&r_indices), "cases": results });
    rep.tables.push(table);
    Ok(())
}

pub fn resolvent_scan(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let q = index(cfg.q_index()?)?;
    let scan = cfg.scan.clone().unwrap_or(ScanSpec { x: 0.0, y_max: 1e3, points: 48, enclosure_margin: 0.1 });
    let tol = &cfg.tolerances;
    let cs = cases(cfg)?;
    let out = per_case(&cs, |c| {
        let g1 = Generator64::new(c.a.clone())?;
        let g2 = Generator64::new(&c.a + &c.b)?;
        let decay = vertical_decay_scan(&g1, &c.b, q, scan.x, scan.y_max, scan.points)?;
        let diff = resolvent_difference_scan_with(&g1, &g2, q, scan.x, scan.y_max, scan.points)?;
        let env = spectral_enclosure_pair(&g1, &g2, scan.enclosure_margin)?;
        Ok((decay, diff, env))
    })?;
    let mut table = Table::new("scan", &["case", "y", "decay_norm", "difference_norm", "identity_residual"]);
    let mut results = Vec::new();
    for (c, (decay, diff, env)) in cs.iter().zip(&out) {
        let slope = decay.fitted_decay.with_context(|| format!("case {}: too few points in the top decade", c.index))?;
        let dslope = diff.fitted_decay.with_context(|| format!("case {}: too few points in the top decade", c.index))?;
        rep.verdict(Verdict::le(
            format!("case {}: fitted decay slope of ||B R(x+iy, A)||_q", c.index),
            slope,
            tol.max_decay_slope,
            0.0,
            slope <= tol.max_decay_slope,
        ));
        let res = diff.max_identity_residual();
        rep.verdict(Verdict::le(
            format!("case {}: second resolvent identity residual", c.index),
            res,
            0.0,
            tol.identity_residual,
            res <= tol.identity_residual,
        ));
        for (k, y) in decay.ys.iter().enumerate() {
            let j = diff.ys.iter().position(|v| v == y);
            let (dn, ir) = match j {
                Some(j) => (num(diff.norms[j]), num(diff.identity_residuals[j])),
                None => (String::new(), String::new()),
            };
            table.push(vec![c.index.to_string(), num(*y), num(decay.norms[k]), dn, ir]);
        }
        results.push(json!({
            "case": c.index,
            "seed": c.seed,
            "decay": { "ys": nums(&decay.ys), "norms": nums(&decay.norms), "fitted_slope": slope, "skipped": nums(&decay.skipped) },
            "difference": {
                "ys": nums(&diff.ys),
                "norms": nums(&diff.norms),
                "fitted_slope": dslope,
                "identity_residuals": nums(&diff.identity_residuals),
                "skipped": nums(&diff.skipped),
            },
            "enclosure": { "margin": env.margin, "xs": nums(&env.xs), "F": nums(&env.f) },
        }));
    }
    rep.results = json!({ "x": scan.x, "y_max": scan.y_max, "points": scan.points, "cases": results });
    rep.tables.push(table);
    Ok(())
}
