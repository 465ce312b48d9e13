use serde::Serialize;

use super::{LevelKind, ScaleSequences};
use crate::error::{Error, Result};
use crate::fields::window_offsets;
use crate::lattice::LatticeDomain;
use crate::walk::{Horizon, LocalTimeField, Mode};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub site: [i64; 2],
    /// `x/N`.
    pub position: [f64; 2],
    /// Rescaled local time (thick/thin), raw local time (light), absent
    /// for avoided points.
    pub value: Option<f64>,
    pub profile: Option<Vec<f64>>,
}

/// Atomic measure `W⁻¹ Σ δ_{x/N} ⊗ δ_value (⊗ δ_profile)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointMeasure {
    pub kind: LevelKind,
    pub atoms: Vec<Atom>,
    pub weight_per_atom: f64,
    pub scales: ScaleSequences,
    pub seed: u64,
    pub radius: Option<usize>,
    /// Profile reads that fell outside `D_N` and were taken as 0.
    pub outside_reads: usize,
}

impl PointMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.len() as f64 * self.weight_per_atom
    }

    /// Mass of atoms whose value passes `keep`.
    pub fn mass_where(&self, keep: impl Fn(f64) -> bool) -> f64 {
        self.atoms.iter().filter(|a| a.value.is_some_and(&keep)).count() as f64 * self.weight_per_atom
    }
}

/// Extract the `kind` measure from a discrete field at horizon
/// `⌊t_N deg(D_N)⌋`.
pub fn extract_level_measure(
    field: &LocalTimeField,
    domain: &LatticeDomain,
    scales: &ScaleSequences,
    radius: Option<usize>,
    seed: u64,
) -> Result<PointMeasure> {
    let want = Horizon::Steps(scales.steps(domain.deg_total()));
    if field.mode != Mode::DiscreteSteps || field.horizon != want {
        return Err(Error::Parameter(format!(
            "field horizon {:?} does not match the scales' horizon {:?}",
            field.horizon, want
        )));
    }
    let l = field.interior();
    let kind = scales.kind;
    let norm = (2.0 * scales.a_n).sqrt();
    let offsets = radius.map(window_offsets);
    let mut outside = 0;
    let mut atoms = Vec::new();
    for (v, &lx) in l.iter().enumerate() {
        let value = match kind {
            LevelKind::Thick | LevelKind::Thin => Some((lx - scales.a_n) / norm),
            LevelKind::Light => Some(lx),
            LevelKind::Avoided => {
                if lx != 0.0 {
                    continue;
                }
                None
            }
        };
        let site = domain.point(v);
        let profile = offsets.as_ref().map(|offs| {
            offs.iter()
                .map(|z| {
                    let lz = match domain.index_of([site[0] + z[0], site[1] + z[1]]) {
                        Some(w) => l[w],
                        None => {
                            outside += 1;
                            0.0
                        }
                    };
                    match kind {
                        LevelKind::Thick | LevelKind::Thin => (lx - lz) / norm,
                        _ => lz,
                    }
                })
                .collect()
        });
        atoms.push(Atom { site, position: domain.position(v), value, profile });
    }
    Ok(PointMeasure {
        kind,
        atoms,
        weight_per_atom: 1.0 / scales.normalizer(),
        scales: *scales,
        seed,
        radius,
        outside_reads: outside,
    })
}
