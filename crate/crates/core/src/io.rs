//! File formats: domain JSON, Green binary (see [`crate::green`]) and CSV
//! tables that start with a `#` metadata line.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::continuum::ContinuumGrid;
use crate::error::{Error, Result};
use crate::fields::FieldSample;
use crate::lattice::{DomainSpec, LatticeDomain};
use crate::levels::{PointMeasure, QSequence};
use crate::walk::{fluctuations, Horizon, LocalTimeField, Mode};

#[derive(Serialize, Deserialize)]
struct DomainDoc {
    #[serde(rename = "N")]
    n: u32,
    shape: Option<DomainSpec>,
    vertices: Vec<[i64; 2]>,
    boundary_edge_count: Vec<u8>,
}

pub fn domain_to_json(domain: &LatticeDomain) -> Result<String> {
    let doc = DomainDoc {
        n: domain.scale(),
        shape: domain.spec().cloned(),
        vertices: domain.vertices().to_vec(),
        boundary_edge_count: domain.boundary_edge_count().to_vec(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn domain_from_json(s: &str) -> Result<LatticeDomain> {
    let doc: DomainDoc = serde_json::from_str(s)?;
    let d = LatticeDomain::from_points(doc.n, doc.vertices)?;
    if d.boundary_edge_count() != doc.boundary_edge_count.as_slice() {
        return Err(Error::Format("boundary_edge_count disagrees with the vertex set".into()));
    }
    Ok(d)
}

/// First 16 hex digits of the SHA-256 of the value's JSON form.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

/// Metadata carried on the first line of every CSV.
#[derive(Clone, Debug)]
pub struct Meta {
    pub seed: u64,
    pub config_hash: String,
}

impl Meta {
    pub fn new<T: Serialize>(seed: u64, config: &T) -> Result<Self> {
        Ok(Self { seed, config_hash: config_hash(config)? })
    }

    pub fn line(&self) -> String {
        format!("# walklab {} seed={} config={}", crate::VERSION, self.seed, self.config_hash)
    }
}

/// CSV with the metadata line and a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push<S: ToString>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(|v| v.to_string()).collect());
    }

    pub fn write<W: Write>(&self, meta: &Meta, mut w: W) -> Result<()> {
        writeln!(w, "{}", meta.line())?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            out.write_record(r).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, meta: &Meta, path: &Path) -> Result<()> {
        self.write(meta, std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Columns `x_i, x_j, value, replicate`.
pub fn field_table(domain: &LatticeDomain, samples: &[FieldSample]) -> CsvTable {
    let mut t = CsvTable::new(["x_i", "x_j", "value", "replicate"]);
    for s in samples {
        for (v, h) in s.values.iter().enumerate() {
            let p = domain.point(v);
            t.push([p[0].to_string(), p[1].to_string(), h.to_string(), s.replicate.to_string()]);
        }
    }
    t
}

/// Columns `kind, x, y, h, weight` and `p_{dx}_{dy}` per window offset.
pub fn measure_table(m: &PointMeasure) -> CsvTable {
    let mut header: Vec<String> = ["kind", "x", "y", "h", "weight"].map(String::from).to_vec();
    if let Some(r) = m.radius {
        header.extend(crate::fields::window_offsets(r).iter().map(|z| format!("p_{}_{}", z[0], z[1])));
    }
    let mut t = CsvTable::new(header);
    for a in &m.atoms {
        let mut row = vec![
            m.kind.to_string(),
            a.position[0].to_string(),
            a.position[1].to_string(),
            a.value.map(|v| v.to_string()).unwrap_or_default(),
            m.weight_per_atom.to_string(),
        ];
        if let Some(p) = &a.profile {
            row.extend(p.iter().map(|v| v.to_string()));
        }
        t.push(row);
    }
    t
}

/// Columns `n, q_n`.
pub fn q_table(q: &QSequence) -> CsvTable {
    let mut t = CsvTable::new(["n", "q_n"]);
    for (n, v) in q.q.iter().enumerate() {
        t.push([n.to_string(), v.to_string()]);
    }
    t
}

/// Columns `x, y, value`.
pub fn grid_table(g: &ContinuumGrid) -> CsvTable {
    let mut t = CsvTable::new(["x", "y", "value"]);
    for (p, v) in g.points.iter().zip(&g.values) {
        t.push([p[0].to_string(), p[1].to_string(), v.to_string()]);
    }
    t
}

/// Per-replicate walk summaries. `U` and `T` are filled for boundary-time
/// runs only; `covered` says every vertex of `D_N` has positive local time.
pub fn trace_table(domain: &LatticeDomain, runs: &[(u64, LocalTimeField)]) -> CsvTable {
    let mut t = CsvTable::new([
        "replicate", "mode", "horizon", "steps", "tau_rho", "U", "T", "max_local_time", "min_local_time", "covered",
    ]);
    for (k, f) in runs {
        let l = f.interior();
        let max = l.iter().copied().fold(0.0, f64::max);
        let min = l.iter().copied().fold(f64::INFINITY, f64::min);
        let (tau, u, tn) = match f.horizon {
            Horizon::Boundary(b) => {
                let r = fluctuations(f, domain, b);
                (r.tau_rho.to_string(), r.u.to_string(), r.t_norm.to_string())
            }
            _ => (String::new(), String::new(), String::new()),
        };
        let mode = match f.mode {
            Mode::DiscreteSteps => "discrete-steps",
            Mode::ContinuousTime => "continuous-time",
            Mode::BoundaryTime => "boundary-time",
        };
        t.push([
            k.to_string(),
            mode.to_string(),
            f.horizon.value().to_string(),
            f.steps.to_string(),
            tau,
            u,
            tn,
            max.to_string(),
            min.to_string(),
            (min > 0.0).to_string(),
        ]);
    }
    t
}

/// Minimal SVG bar chart.
pub fn histogram_svg(title: &str, labels: &[String], counts: &[f64]) -> String {
    let (w, h, pad) = (640.0, 360.0, 40.0);
    let max = counts.iter().copied().fold(0.0, f64::max).max(1e-300);
    let bw = (w - 2.0 * pad) / counts.len().max(1) as f64;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n<text x=\"{pad}\" y=\"24\" font-size=\"14\">{title}</text>\n"
    );
    for (i, (c, l)) in counts.iter().zip(labels).enumerate() {
        let bh = (h - 2.0 * pad) * c / max;
        let x = pad + i as f64 * bw;
        s += &format!(
            "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{bh:.1}\" fill=\"steelblue\"><title>{l}: {c}</title></rect>\n",
            h - pad - bh,
            (bw - 1.0).max(0.5)
        );
    }
    s + "</svg>\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;

    #[test]
    fn domain_json_roundtrip() {
        let d = build_lattice(&DomainSpec::disk(1.0), 8).unwrap();
        let s = domain_to_json(&d).unwrap();
        assert!(s.contains("\"N\": 8"));
        let back = domain_from_json(&s).unwrap();
        assert_eq!(back.vertices(), d.vertices());
        assert_eq!(back.deg_total(), d.deg_total());
    }

    #[test]
    fn csv_has_meta_and_header() {
        let mut t = CsvTable::new(["n", "q_n"]);
        t.push(["0", "1"]);
        let mut buf = Vec::new();
        t.write(&Meta { seed: 5, config_hash: "abc".into() }, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# walklab ") && lines[0].ends_with("seed=5 config=abc"));
        assert_eq!(lines[1], "n,q_n");
        assert_eq!(lines[2], "0,1");
    }
}
