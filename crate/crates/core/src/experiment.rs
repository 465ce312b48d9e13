//! Configuration-driven experiments writing CSV rows and a JSON summary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::compute_green;
use crate::io::{measure_table, CsvTable, Meta};
use crate::lattice::{build_lattice, DomainSpec, LatticeDomain};
use crate::levels::{extract_level_measure, scale_sequences, LevelKind};
use crate::stats;
use crate::walk::{cover_time, ray_knight_verify, run_walk, sandwich_once, Horizon, Start, WalkConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Thick,
    Thin,
    Light,
    Avoided,
    Cover,
    Rayknight,
    Sandwich,
}

impl ExperimentKind {
    pub fn level(self) -> Option<LevelKind> {
        match self {
            Self::Thick => Some(LevelKind::Thick),
            Self::Thin => Some(LevelKind::Thin),
            Self::Light => Some(LevelKind::Light),
            Self::Avoided => Some(LevelKind::Avoided),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Thick => "thick",
            Self::Thin => "thin",
            Self::Light => "light",
            Self::Avoided => "avoided",
            Self::Cover => "cover",
            Self::Rayknight => "rayknight",
            Self::Sandwich => "sandwich",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "thick" => Self::Thick,
            "thin" => Self::Thin,
            "light" => Self::Light,
            "avoided" => Self::Avoided,
            "cover" => Self::Cover,
            "rayknight" => Self::Rayknight,
            "sandwich" => Self::Sandwich,
            _ => return Err(Error::Parameter(format!(
                "invalid kind `{s}`; expected thick|thin|light|avoided|cover|rayknight|sandwich"
            ))),
        })
    }
}

/// Where the walk starts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartRule {
    /// At `ϱ`.
    Boundary,
    /// The lattice point nearest a domain corner.
    Arbitrary,
    /// A fixed lattice point.
    Vertex([i64; 2]),
}

impl std::str::FromStr for StartRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boundary" => Ok(Self::Boundary),
            "arbitrary" => Ok(Self::Arbitrary),
            _ => {
                let parts: Vec<&str> = s.split(',').collect();
                let bad = || Error::Parameter(format!("start `{s}`: expected boundary|arbitrary|i,j"));
                if parts.len() != 2 {
                    return Err(bad());
                }
                let i = parts[0].trim().parse().map_err(|_| bad())?;
                let j = parts[1].trim().parse().map_err(|_| bad())?;
                Ok(Self::Vertex([i, j]))
            }
        }
    }
}

impl StartRule {
    pub fn resolve(&self, domain: &LatticeDomain) -> Result<Start> {
        Ok(match *self {
            StartRule::Boundary => Start::Boundary,
            StartRule::Arbitrary => Start::Vertex(domain.corner_vertex()),
            StartRule::Vertex(p) => Start::Vertex(domain.index_of(p).ok_or(Error::OutsideDomain(p))?),
        })
    }
}

fn default_domain() -> DomainSpec {
    DomainSpec::unit_square()
}

fn default_start() -> StartRule {
    StartRule::Boundary
}

fn default_out() -> PathBuf {
    PathBuf::from("walklab-out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_domain")]
    pub domain: DomainSpec,
    #[serde(rename = "N")]
    pub n: u32,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub lambda: f64,
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_start")]
    pub start: StartRule,
    #[serde(default)]
    pub radius: Option<usize>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Also write the atoms of replicate 0.
    #[serde(default)]
    pub atoms: bool,
    /// Boundary time for `rayknight`.
    #[serde(default)]
    pub t: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::Parameter("reps must be at least 1".into()));
        }
        self.domain.validate()?;
        if let Some(kind) = self.kind.level() {
            scale_sequences(self.n, self.theta, self.lambda, kind)?;
        }
        match self.kind {
            ExperimentKind::Sandwich if !(self.theta > 0.0) => {
                Err(Error::Parameter(format!("sandwich: theta = {} must be positive", self.theta)))
            }
            ExperimentKind::Rayknight if self.t.is_some_and(|t| !(t > 0.0)) => {
                Err(Error::Parameter("rayknight: t must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Paths written by [`run_experiment`].
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub rows: PathBuf,
    pub summary: PathBuf,
    pub extra: Vec<PathBuf>,
    pub table: CsvTable,
}

const HIST_MAX: usize = 16;

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let domain = build_lattice(&config.domain, config.n)?;
    let start = config.start.resolve(&domain)?;
    let meta = Meta::new(config.seed, config)?;
    std::fs::create_dir_all(&config.out)?;
    let name = config.kind.name();
    let mut extra = Vec::new();
    let log_n = (config.n as f64).ln();

    let table = match config.kind.level() {
        Some(kind) => {
            let scales = scale_sequences(config.n, config.theta, config.lambda, kind)?;
            let steps = scales.steps(domain.deg_total());
            let rows: Vec<(Vec<String>, Vec<u64>, Option<CsvTable>)> = (0..config.reps as u64)
                .into_par_iter()
                .map(|k| {
                    let wc = WalkConfig::new(start, Horizon::Steps(steps), config.seed).replicate(k);
                    let field = run_walk(&domain, &wc)?;
                    let m = extract_level_measure(&field, &domain, &scales, config.radius, config.seed)?;
                    let l = field.interior();
                    let max = l.iter().copied().fold(0.0, f64::max);
                    let min = l.iter().copied().fold(f64::INFINITY, f64::min);
                    let mut hist = vec![0u64; HIST_MAX + 1];
                    for &x in l {
                        hist[((4.0 * x).round() as usize).min(HIST_MAX)] += 1;
                    }
                    let above = m.mass_where(|h| h >= 0.0);
                    let row = vec![
                        k.to_string(),
                        steps.to_string(),
                        m.atoms.len().to_string(),
                        m.total_mass().to_string(),
                        above.to_string(),
                        (max / (log_n * log_n)).to_string(),
                        (min / (log_n * log_n)).to_string(),
                    ];
                    let atoms = (k == 0 && config.atoms).then(|| measure_table(&m));
                    Ok((row, hist, atoms))
                })
                .collect::<Result<_>>()?;
            let mut t = CsvTable::new([
                "replicate", "steps", "atoms", "mass", "mass_h_nonneg", "max_l_norm", "min_l_norm",
            ]);
            let mut hist_total = vec![0u64; HIST_MAX + 1];
            for (row, hist, atoms) in rows {
                t.rows.push(row);
                for (a, b) in hist_total.iter_mut().zip(hist) {
                    *a += b;
                }
                if let Some(a) = atoms {
                    let p = config.out.join(format!("{name}_atoms.csv"));
                    a.save(&meta, &p)?;
                    extra.push(p);
                }
            }
            let mut h = CsvTable::new(["visits", "sites_per_replicate"]);
            for (v, c) in hist_total.iter().enumerate() {
                let label = if v == HIST_MAX { format!("{v}+") } else { v.to_string() };
                h.push([label, (*c as f64 / config.reps as f64).to_string()]);
            }
            let p = config.out.join(format!("{name}_visits.csv"));
            h.save(&meta, &p)?;
            extra.push(p);
            t
        }
        None => match config.kind {
            ExperimentKind::Cover => {
                let scale = 4.0 / std::f64::consts::PI * (config.n as f64).powi(2) * log_n * log_n;
                let rows: Vec<u64> = (0..config.reps as u64)
                    .into_par_iter()
                    .map(|k| cover_time(&domain, start, config.seed, k))
                    .collect::<Result<_>>()?;
                let mut t = CsvTable::new(["replicate", "cover_steps", "ratio"]);
                for (k, s) in rows.iter().enumerate() {
                    t.push([k.to_string(), s.to_string(), (*s as f64 / scale).to_string()]);
                }
                t
            }
            ExperimentKind::Sandwich => {
                let t_n = 2.0 * crate::G * config.theta * log_n * log_n;
                let rows: Vec<(bool, bool)> = (0..config.reps as u64)
                    .into_par_iter()
                    .map(|k| sandwich_once(&domain, t_n, log_n, config.seed, k))
                    .collect::<Result<_>>()?;
                let mut t = CsvTable::new(["replicate", "holds", "clipped"]);
                for (k, (h, c)) in rows.iter().enumerate() {
                    t.push([k.to_string(), (*h as u8).to_string(), (*c as u8).to_string()]);
                }
                t
            }
            _ => {
                let green = compute_green(&domain)?;
                let t_b = config.t.unwrap_or(4.0);
                let u = domain.center_vertex();
                let r = ray_knight_verify(&domain, &green, t_b, config.reps, config.seed, u)?;
                let mut t = CsvTable::new([
                    "vertex", "t", "reps", "exact_mean", "left_mean", "right_mean", "left_error_se",
                    "mean_error_se", "ks_statistic", "ks_pvalue",
                ]);
                t.push([
                    r.vertex.to_string(),
                    r.t.to_string(),
                    r.reps.to_string(),
                    r.exact_mean.to_string(),
                    r.left_mean.to_string(),
                    r.right_mean.to_string(),
                    r.left_error_se.to_string(),
                    r.mean_error_se.to_string(),
                    r.ks_statistic.to_string(),
                    r.ks_pvalue.to_string(),
                ]);
                t
            }
        },
    };

    let rows_path = config.out.join(format!("{name}_rows.csv"));
    table.save(&meta, &rows_path)?;
    let summary_path = config.out.join(format!("{name}_summary.json"));
    std::fs::write(&summary_path, summary_json(config, &meta, &table)?)?;
    Ok(ExperimentOutput { rows: rows_path, summary: summary_path, extra, table })
}

/// Medians, quartiles and means of every numeric column.
pub fn summary_json(config: &ExperimentConfig, meta: &Meta, table: &CsvTable) -> Result<String> {
    let mut cols = BTreeMap::new();
    for (c, name) in table.header.iter().enumerate() {
        if name == "replicate" {
            continue;
        }
        let v: Vec<f64> = table.rows.iter().filter_map(|r| r[c].parse().ok()).collect();
        if v.is_empty() {
            continue;
        }
        let mut s = BTreeMap::new();
        s.insert("median", stats::median(&v));
        s.insert("q1", stats::quantile(&v, 0.25));
        s.insert("q3", stats::quantile(&v, 0.75));
        s.insert("mean", stats::mean(&v));
        cols.insert(name.clone(), s);
    }
    let doc = serde_json::json!({
        "version": crate::VERSION,
        "seed": meta.seed,
        "config_hash": meta.config_hash,
        "config": config,
        "rows": table.rows.len(),
        "columns": cols,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}
