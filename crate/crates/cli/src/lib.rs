//! Argument handling for the `walklab` binary.
//!
//! Every subcommand reads the same flag set. A `--config` TOML file is read
//! first and flags replace its keys.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use walklab::experiment::{run_experiment, ExperimentConfig};
use walklab::fields::{sample_dgff, ZeroAverage};
use walklab::green::{compute_green, GreenOperator};
use walklab::io::{domain_to_json, field_table, histogram_svg, measure_table, trace_table, CsvTable, Meta};
use walklab::lattice::{build_lattice, DomainSpec, LatticeDomain};
use walklab::levels::{extract_level_measure, scale_sequences};
use walklab::verify::{verify_suite, Overrides, CHECKS};
use walklab::walk::{run_walk, Horizon, WalkConfig};
use walklab::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "walklab", version, about = "Local times of planar random walks and the Gaussian free field")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lattice domains.
    Domain {
        #[command(subcommand)]
        action: DomainAction,
    },
    /// Green operator.
    Green {
        #[command(subcommand)]
        action: GreenAction,
    },
    /// Free-field samples.
    Field {
        #[command(subcommand)]
        action: FieldAction,
    },
    /// Single walks.
    Walk {
        #[command(subcommand)]
        action: WalkAction,
    },
    /// Level-set point measures.
    Levelsets {
        #[command(subcommand)]
        action: LevelAction,
    },
    /// Run acceptance checks; exits 1 if any fails.
    Verify {
        /// `all`, or one of the names printed by `--list`.
        #[arg(default_value = "all")]
        selector: String,
        /// Replace a tolerance: `check.label=value` or `label=value`.
        #[arg(long = "tol", value_name = "KEY=VALUE")]
        tol: Vec<String>,
        /// Print the check names and exit.
        #[arg(long)]
        list: bool,
        /// Write the reports as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Replicated experiment writing CSV rows and a JSON summary.
    Experiment {
        #[command(flatten)]
        flags: Flags,
        /// Also write an SVG histogram of visit counts.
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum DomainAction {
    /// Write the lattice domain as JSON.
    Build(Flags),
}

#[derive(Subcommand, Debug)]
pub enum GreenAction {
    /// Write the Green matrix in the binary format.
    Compute(Flags),
}

#[derive(Subcommand, Debug)]
pub enum FieldAction {
    /// Write `--reps` free-field samples as CSV.
    Sample {
        #[command(flatten)]
        flags: Flags,
        /// Write the zero-average part instead.
        #[arg(long)]
        zero_average: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum WalkAction {
    /// Write the discrete local time at `floor(t_N deg(D_N))` steps.
    Run {
        #[command(flatten)]
        flags: Flags,
        /// Explicit step count instead of the one implied by `--theta`.
        #[arg(long)]
        steps: Option<u64>,
        /// `steps`, `time` or `boundary`.
        #[arg(long, default_value = "steps")]
        mode: String,
        /// Horizon for `time` (continuous time) or `boundary` (local time at the boundary vertex).
        #[arg(long)]
        horizon: Option<f64>,
        /// Run `--reps` replicates and write one summary row per run.
        #[arg(long)]
        trace: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum LevelAction {
    /// Write the atoms of one level-set measure.
    Extract(Flags),
}

/// Flags shared by all subcommands.
#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// TOML file with the same keys; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `square`, `rect:W,H`, `disk:R` or `polygon:x,y;x,y;...`.
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(long = "N")]
    pub n: Option<u32>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// thick|thin|light|avoided|cover|rayknight|sandwich.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `boundary`, `arbitrary` or `i,j`.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_shape(s: &str) -> Result<DomainSpec> {
    let bad = || Error::Parameter(format!("shape `{s}`: expected square|rect:W,H|disk:R|polygon:x,y;x,y;..."));
    let nums = |t: &str| -> Result<Vec<f64>> {
        t.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect()
    };
    let (head, tail) = s.split_once(':').unwrap_or((s, ""));
    let spec = match head {
        "square" | "unit-square" => DomainSpec::unit_square(),
        "rect" => match nums(tail)?[..] {
            [w, h] => DomainSpec::rectangle(w, h),
            _ => return Err(bad()),
        },
        "disk" => match nums(tail)?[..] {
            [r] => DomainSpec::disk(r),
            _ => return Err(bad()),
        },
        "polygon" => {
            let pts = tail
                .split(';')
                .map(|p| match nums(p)?[..] {
                    [x, y] => Ok([x, y]),
                    _ => Err(bad()),
                })
                .collect::<Result<Vec<_>>>()?;
            DomainSpec::polygon(pts)
        }
        _ => return Err(bad()),
    };
    spec.validate()?;
    Ok(spec)
}

fn to_toml<T: serde::Serialize>(v: &T) -> Result<toml::Value> {
    toml::Value::try_from(v).map_err(|e| Error::Format(e.to_string()))
}

impl Flags {
    /// File keys, then flags, then `fallback` for keys still missing.
    pub fn resolve(&self, fallback: &[(&str, toml::Value)]) -> Result<ExperimentConfig> {
        let mut table = match &self.config {
            Some(p) => std::fs::read_to_string(p)?.parse::<toml::Table>().map_err(|e| Error::Format(e.to_string()))?,
            None => toml::Table::new(),
        };
        if let Some(s) = &self.shape {
            table.insert("domain".into(), to_toml(&parse_shape(s)?)?);
        }
        let mut put = |k: &str, v: Option<toml::Value>| {
            if let Some(v) = v {
                table.insert(k.into(), v);
            }
        };
        put("N", self.n.map(|n| toml::Value::Integer(n.into())));
        put("theta", self.theta.map(toml::Value::Float));
        put("lambda", self.lambda.map(toml::Value::Float));
        put("kind", self.kind.clone().map(toml::Value::String));
        put("reps", self.reps.map(|r| toml::Value::Integer(r as i64)));
        put("seed", self.seed.map(|s| toml::Value::Integer(s as i64)));
        put("radius", self.radius.map(|r| toml::Value::Integer(r as i64)));
        put("out", self.out.as_ref().map(|p| toml::Value::String(p.display().to_string())));
        if let Some(s) = &self.start {
            let rule: walklab::experiment::StartRule = s.parse()?;
            table.insert("start".into(), to_toml(&rule)?);
        }
        for (k, v) in fallback {
            table.entry(k.to_string()).or_insert_with(|| v.clone());
        }
        if let Some(k) = table.get("kind").and_then(|v| v.as_str()) {
            k.parse::<walklab::experiment::ExperimentKind>()?;
        }
        let cfg: ExperimentConfig = table.try_into().map_err(|e: toml::de::Error| Error::Format(e.to_string()))?;
        Ok(cfg)
    }
}

fn lattice(cfg: &ExperimentConfig) -> Result<LatticeDomain> {
    build_lattice(&cfg.domain, cfg.n)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `--out` for commands writing one file; the experiment default
/// directory name means "not given".
fn single_out(cfg: &ExperimentConfig, flags: &Flags) -> Option<PathBuf> {
    flags.out.clone().or_else(|| flags.config.as_ref().map(|_| cfg.out.clone()))
}

fn save_table(table: &CsvTable, cfg: &ExperimentConfig, out: Option<&Path>) -> Result<()> {
    let meta = Meta::new(cfg.seed, cfg)?;
    match out {
        Some(p) => table.save(&meta, p),
        None => table.write(&meta, std::io::stdout().lock()),
    }
}

fn walk_steps(cfg: &ExperimentConfig, domain: &LatticeDomain) -> u64 {
    let log_n = (cfg.n as f64).ln();
    (2.0 * walklab::G * cfg.theta * log_n * log_n * domain.deg_total() as f64).floor() as u64
}

fn any_kind() -> Vec<(&'static str, toml::Value)> {
    vec![("kind", toml::Value::String("thick".into())), ("reps", toml::Value::Integer(1))]
}

pub fn parse_overrides(items: &[String]) -> Result<Overrides> {
    items
        .iter()
        .map(|s| {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Parameter(format!("tolerance `{s}`: expected KEY=VALUE")))?;
            let v = v.parse::<f64>().map_err(|_| Error::Parameter(format!("tolerance `{s}`: bad number")))?;
            Ok((k.to_string(), v))
        })
        .collect::<Result<HashMap<_, _>>>()
}

/// Run one command; the returned value is the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Domain { action: DomainAction::Build(flags) } => {
            let cfg = flags.resolve(&any_kind())?;
            let d = lattice(&cfg)?;
            eprintln!(
                "N={} vertices={} deg_rho={} deg_total={}{}",
                d.scale(),
                d.len(),
                d.deg_rho(),
                d.deg_total(),
                if d.was_pruned() { " (pruned to largest component)" } else { "" }
            );
            write_or_print(single_out(&cfg, &flags).as_deref(), &(domain_to_json(&d)? + "\n"))?;
        }
        Command::Green { action: GreenAction::Compute(flags) } => {
            let cfg = flags.resolve(&any_kind())?;
            let d = lattice(&cfg)?;
            let g = compute_green(&d)?;
            eprintln!("n={} residual={:.3e} symmetry={:.3e}", g.dim(), g.residual(&d), g.symmetry_defect());
            let out = single_out(&cfg, &flags).unwrap_or_else(|| PathBuf::from("green.bin"));
            g.save(&out)?;
        }
        Command::Field { action: FieldAction::Sample { flags, zero_average } } => {
            let cfg = flags.resolve(&any_kind())?;
            let d = lattice(&cfg)?;
            let g: GreenOperator = compute_green(&d)?;
            let mut samples = sample_dgff(&g, cfg.seed, cfg.reps)?;
            if zero_average {
                let za = ZeroAverage::new(&g)?;
                samples = samples.iter().map(|s| za.decompose(s).hat).collect();
            }
            save_table(&field_table(&d, &samples), &cfg, single_out(&cfg, &flags).as_deref())?;
        }
        Command::Walk { action: WalkAction::Run { flags, steps, mode, horizon, trace } } => {
            let cfg = flags.resolve(&any_kind())?;
            let d = lattice(&cfg)?;
            let need = |what: &str| Error::Parameter(format!("walk run: --mode {what} needs --horizon"));
            let horizon = match mode.as_str() {
                "steps" => Horizon::Steps(match steps {
                    Some(s) => s,
                    None if cfg.theta > 0.0 => walk_steps(&cfg, &d),
                    None => return Err(Error::Parameter("walk run: give --theta > 0 or --steps".into())),
                }),
                "time" => Horizon::Time(horizon.ok_or_else(|| need("time"))?),
                "boundary" => Horizon::Boundary(horizon.ok_or_else(|| need("boundary"))?),
                m => return Err(Error::Parameter(format!("walk run: mode `{m}`; expected steps|time|boundary"))),
            };
            let start = cfg.start.resolve(&d)?;
            let out = single_out(&cfg, &flags);
            if trace {
                let runs = (0..cfg.reps as u64)
                    .map(|k| Ok((k, run_walk(&d, &WalkConfig::new(start, horizon, cfg.seed).replicate(k))?)))
                    .collect::<Result<Vec<_>>>()?;
                return save_table(&trace_table(&d, &runs), &cfg, out.as_deref()).map(|_| 0);
            }
            let f = run_walk(&d, &WalkConfig::new(start, horizon, cfg.seed))?;
            let mut t = CsvTable::new(["i", "j", "local_time"]);
            for (v, l) in f.interior().iter().enumerate() {
                let p = d.point(v);
                t.push([p[0].to_string(), p[1].to_string(), l.to_string()]);
            }
            save_table(&t, &cfg, out.as_deref())?;
        }
        Command::Levelsets { action: LevelAction::Extract(flags) } => {
            let cfg = flags.resolve(&[("reps", toml::Value::Integer(1))])?;
            let level = cfg
                .kind
                .level()
                .ok_or_else(|| Error::Parameter("levelsets: kind must be thick|thin|light|avoided".into()))?;
            cfg.validate()?;
            let d = lattice(&cfg)?;
            let scales = scale_sequences(cfg.n, cfg.theta, cfg.lambda, level)?;
            let start = cfg.start.resolve(&d)?;
            let f = run_walk(&d, &WalkConfig::new(start, Horizon::Steps(scales.steps(d.deg_total())), cfg.seed))?;
            let m = extract_level_measure(&f, &d, &scales, cfg.radius, cfg.seed)?;
            eprintln!("atoms={} mass={:.6}", m.atoms.len(), m.total_mass());
            save_table(&measure_table(&m), &cfg, single_out(&cfg, &flags).as_deref())?;
        }
        Command::Verify { selector, tol, list, json } => {
            if list {
                for (name, c, what) in CHECKS {
                    println!("{c:>2} {name:<20} {what}");
                }
                return Ok(0);
            }
            let reports = verify_suite(&selector, &parse_overrides(&tol)?)?;
            for r in &reports {
                print!("{r}");
            }
            let failed = reports.iter().filter(|r| !r.pass()).count();
            println!("{} checks, {} failed", reports.len(), failed);
            if let Some(p) = json {
                std::fs::write(p, serde_json::to_string_pretty(&reports)?)?;
            }
            return Ok(if failed == 0 { 0 } else { 1 });
        }
        Command::Experiment { flags, svg } => {
            let cfg = flags.resolve(&[])?;
            let out = run_experiment(&cfg)?;
            eprintln!("wrote {} and {}", out.rows.display(), out.summary.display());
            for p in &out.extra {
                eprintln!("wrote {}", p.display());
            }
            if svg {
                if let Some(v) = out.extra.iter().find(|p| p.to_string_lossy().ends_with("_visits.csv")) {
                    let text = std::fs::read_to_string(v)?;
                    let (labels, counts): (Vec<String>, Vec<f64>) = text
                        .lines()
                        .skip(2)
                        .filter_map(|l| l.split_once(','))
                        .map(|(a, b)| (a.to_string(), b.parse().unwrap_or(0.0)))
                        .unzip();
                    let p = v.with_extension("svg");
                    std::fs::write(&p, histogram_svg("visits per site", &labels, &counts))?;
                    eprintln!("wrote {}", p.display());
                }
            }
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_parse() {
        assert_eq!(parse_shape("square").unwrap(), DomainSpec::unit_square());
        assert_eq!(parse_shape("rect:2,1").unwrap(), DomainSpec::rectangle(2.0, 1.0));
        assert_eq!(parse_shape("disk:0.5").unwrap(), DomainSpec::disk(0.5));
        assert!(parse_shape("polygon:0,0;1,0;0,1").is_ok());
        assert!(parse_shape("blob").is_err());
        assert!(parse_shape("rect:1").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "N = 32\nkind = \"avoided\"\ntheta = 0.3\nreps = 4\nseed = 9\n").unwrap();
        let flags = Flags { config: Some(p), n: Some(64), ..Default::default() };
        let cfg = flags.resolve(&[]).unwrap();
        assert_eq!(cfg.n, 64);
        assert_eq!(cfg.reps, 4);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn bad_kind_is_a_usage_error() {
        let flags = Flags { n: Some(8), reps: Some(1), kind: Some("warm".into()), ..Default::default() };
        let e = flags.resolve(&[]).unwrap_err().to_string();
        assert!(e.contains("thick|thin|light|avoided"), "{e}");
    }

    #[test]
    fn overrides_parse() {
        let o = parse_overrides(&["potential-kernel.a(1,0)=1e-20".into()]).unwrap();
        assert_eq!(o["potential-kernel.a(1,0)"], 1e-20);
        assert!(parse_overrides(&["x".into()]).is_err());
    }
}
