//! TOML experiment configuration.
//!
//! ```toml
//! experiment = "dyson-verify"
//! seed = 7
//! q = 2.0
//!
//! [operator]
//! dim = 6
//!
//! [times]
//! values = [0.1, 0.5, 1.0]
//! ```
//!
//! See `configs/` for one file per experiment and the README for every key.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    DysonVerify,
    Duhamel,
    Mixed,
    ResolventScan,
    HeatKernel,
    BqProbe,
    WeylCheck,
    HeatTrace,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::DysonVerify,
        Experiment::Duhamel,
        Experiment::Mixed,
        Experiment::ResolventScan,
        Experiment::HeatKernel,
        Experiment::BqProbe,
        Experiment::WeylCheck,
        Experiment::HeatTrace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::DysonVerify => "dyson-verify",
            Experiment::Duhamel => "duhamel",
            Experiment::Mixed => "mixed",
            Experiment::ResolventScan => "resolvent-scan",
            Experiment::HeatKernel => "heat-kernel",
            Experiment::BqProbe => "bq-probe",
            Experiment::WeylCheck => "weyl-check",
            Experiment::HeatTrace => "heat-trace",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Experiment::DysonVerify => "Dyson terms against exp(-(A+B)t), certified tail and per-term envelope",
            Experiment::Duhamel => "Duhamel residual of the perturbed semigroup",
            Experiment::Mixed => "mixed-index expansion B0 S_n(t) and remainder bound",
            Experiment::ResolventScan => "resolvent decay along a vertical line, second resolvent identity",
            Experiment::HeatKernel => "discrete Dirichlet heat kernel against a Gaussian bound",
            Experiment::BqProbe => "Schatten norms of V exp(-At) as t -> 0 on a truncated box",
            Experiment::WeylCheck => "Weyl-type lower bound for Re(lambda_n) of -Laplacian + V",
            Experiment::HeatTrace => "Hilbert-Schmidt and trace-series bounds for exp(-(A+V)t)",
        }
    }

    fn needs_operator(self) -> bool {
        matches!(
            self,
            Experiment::DysonVerify | Experiment::Duhamel | Experiment::Mixed | Experiment::ResolventScan
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .with_context(|| format!("unknown experiment '{s}'; run list-experiments for the names"))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// Report file stem; defaults to the config file stem.
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the config file.
    pub output: Option<PathBuf>,
    /// Number of seeded random (A, B) cases.
    #[serde(default = "one")]
    pub cases: usize,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub n_max: Option<usize>,
    #[serde(default = "default_panels")]
    pub quad_panels: usize,
    pub operator: Option<OperatorSpec>,
    pub domain: Option<DomainSpec>,
    pub potential: Option<PotentialSpec>,
    pub times: Option<TimeGrid>,
    pub scan: Option<ScanSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// `weyl-check`: number of eigenvalues examined.
    pub n_check: Option<usize>,

    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn one() -> usize {
    1
}

fn default_panels() -> usize {
    schatten_semigroup::dyson::DEFAULT_QUAD_PANELS
}

/// Seeded random pair: `A` accretive with eigenvalues in `spectrum`, `B`
/// Gaussian with entry scale `perturbation_scale`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub dim: usize,
    #[serde(default = "default_spectrum")]
    pub spectrum: [f64; 2],
    #[serde(default = "default_skew")]
    pub skew: f64,
    #[serde(default = "default_pert")]
    pub perturbation_scale: f64,
    /// `mixed`: scale of the second perturbation `B0`.
    #[serde(default = "default_pert")]
    pub observable_scale: f64,
}

fn default_spectrum() -> [f64; 2] {
    [0.2, 2.0]
}

fn default_skew() -> f64 {
    0.3
}

fn default_pert() -> f64 {
    0.8
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKindSpec {
    Interval,
    Rectangle,
    Box,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKindSpec,
    /// Interior points per axis.
    pub n: usize,
    /// Interval length (default pi) or rectangle side lengths.
    pub length: Option<f64>,
    pub lengths: Option<[f64; 2]>,
    /// `box`: half width `R` of `[-R, R]^d`.
    pub half_width: Option<f64>,
    #[serde(default = "one")]
    pub dim: usize,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub expr: Option<String>,
    /// CSV of `x, Re V, Im V`, relative to the config file.
    pub csv: Option<PathBuf>,
    #[serde(default = "unit")]
    pub scale: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub values: Option<Vec<f64>>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub count: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
}

impl TimeGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let ts = match (&self.values, self.t_max, self.count) {
            (Some(v), None, None) => v.clone(),
            (None, Some(t_max), Some(count)) => {
                ensure!(count >= 1, "times.count must be >= 1");
                let t_min = self.t_min.unwrap_or(t_max / count as f64);
                ensure!(t_min > 0.0 && t_min <= t_max, "times: need 0 < t_min <= t_max");
                if count == 1 {
                    vec![t_max]
                } else {
                    (0..count)
                        .map(|k| {
                            let s = k as f64 / (count - 1) as f64;
                            match self.spacing {
                                Spacing::Linear => t_min + s * (t_max - t_min),
                                Spacing::Log => t_min * (t_max / t_min).powf(s),
                            }
                        })
                        .collect()
                }
            }
            _ => bail!("times: give either 'values' or 't_max' with 'count'"),
        };
        ensure!(!ts.is_empty(), "times: empty grid");
        for &t in &ts {
            ensure!(t.is_finite() && t > 0.0, "times: every t must be finite and > 0, got {t}");
        }
        Ok(ts)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    #[serde(default)]
    pub x: f64,
    #[serde(default = "default_y_max")]
    pub y_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_margin")]
    pub enclosure_margin: f64,
}

fn default_y_max() -> f64 {
    1e3
}

fn default_points() -> usize {
    48
}

fn default_margin() -> f64 {
    0.1
}

/// Thresholds used by the verdicts; each is echoed next to its verdict.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Absolute floor on the Dyson truncation check.
    pub truncation_floor: f64,
    pub duhamel: f64,
    /// Largest admissible fitted resolvent decay slope.
    pub max_decay_slope: f64,
    pub identity_residual: f64,
    /// Window for the fitted `t`-exponent of the `q = 2` probe.
    pub exponent_window: [f64; 2],
    /// Relative slack on inequality verdicts.
    pub relative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            truncation_floor: 1e-6,
            duhamel: 1e-8,
            max_decay_slope: -0.9,
            identity_residual: 1e-9,
            exponent_window: [-0.35, -0.15],
            relative: 1e-10,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("malformed config {}", path.display()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if cfg.name.is_none() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn kind(&self) -> Result<Experiment> {
        self.experiment.parse()
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        self.times.as_ref().context("config needs a [times] table")?.points()
    }

    pub fn q_index(&self) -> Result<f64> {
        self.q.context("config needs the Schatten index q")
    }

    pub fn validate(&self) -> Result<()> {
        let kind = self.kind()?;
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if let Some(v) = v {
                ensure!(v.is_finite() && v >= 1.0, "Schatten index {name} = {v} violates {name} >= 1");
            }
        }
        ensure!(self.cases >= 1, "cases must be >= 1");
        ensure!(self.quad_panels >= 1, "quad_panels must be >= 1");
        if kind.needs_operator() {
            let op = self.operator.as_ref().context("config needs an [operator] table")?;
            ensure!(op.dim >= 1, "operator.dim must be >= 1");
            ensure!(
                op.spectrum[0] <= op.spectrum[1] && op.spectrum.iter().all(|x| x.is_finite()),
                "operator.spectrum must be a finite [lo, hi] with lo <= hi"
            );
        } else {
            let d = self.domain.as_ref().context("config needs a [domain] table")?;
            ensure!(d.n >= 8, "domain.n must be >= 8");
        }
        match kind {
            Experiment::DysonVerify | Experiment::Duhamel => {
                self.q_index()?;
                self.times()?;
            }
            Experiment::Mixed => {
                let (p, q) = (self.p.context("mixed needs p")?, self.q_index()?);
                ensure!(p >= q, "mixed expansion needs p >= q, got p = {p}, q = {q}");
                self.times()?;
            }
            Experiment::ResolventScan => {
                self.q_index()?;
                if let Some(s) = &self.scan {
                    ensure!(s.points >= 8, "scan.points must be >= 8");
                    ensure!(s.y_max > 0.0 && s.y_max.is_finite(), "scan.y_max must be positive");
                    ensure!(s.enclosure_margin > 0.0, "scan.enclosure_margin must be positive");
                }
            }
            Experiment::HeatKernel | Experiment::HeatTrace => {
                self.times()?;
            }
            Experiment::BqProbe => {
                self.q_index()?;
                self.times()?;
            }
            Experiment::WeylCheck => {}
        }
        if let Some(pot) = &self.potential {
            ensure!(
                !(pot.expr.is_some() && pot.csv.is_some()),
                "potential: give either 'expr' or 'csv', not both"
            );
            if let Some(csv) = &pot.csv {
                let path = self.resolve(csv);
                ensure!(path.is_file(), "potential file {} does not exist", path.display());
            }
            if let Some(e) = &pot.expr {
                schatten_semigroup::schrodinger::parse_expression(e)?;
            }
        }
        Ok(())
    }
}
