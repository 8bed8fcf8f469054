//! Monte Carlo harness and statistical verification.
//!
//! [`run_mc`] draws one atom cloud per path on a window covering every
//! requested target, solves once, and records every spatial average
//! `F_R(t)` and point probe `u(t, x)` from the same solution. Path `i` always
//! uses stream `i` of the keyed generator, and results are gathered in path
//! order, so a [`SampleSet`] depends only on its [`McConfig`].

pub mod diagnostics;
pub mod distance;
pub mod estimate;

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{sample_cloud, window_for_targets, SpaceTimeWindow, Target};
use crate::levy::JumpLaw;
use crate::rng::{path_rng, DOMAIN_PATHS};
use crate::solver::solve;

pub use diagnostics::{
    holder_diagnostic, stationarity_check, variance_diagnostic, HolderFit, VarianceTable,
};
pub use distance::{distance_report, ks_distance, two_sample_ks, w1_distance, DistanceReport, Normalization};
pub use estimate::Estimate;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McConfig {
    pub master_seed: u64,
    pub n_paths: usize,
    pub law: JumpLaw,
    /// Times `t_j` at which `F_R(t_j)` is recorded for every radius.
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    /// Point probes `(t, x)` for `u(t, x)`.
    pub probes: Vec<(f64, f64)>,
    /// Worker threads; `None` lets rayon decide. Never affects the output.
    pub threads: Option<usize>,
    /// Random stream domain; runs in different domains are independent.
    pub domain: u64,
}

impl McConfig {
    pub fn new(master_seed: u64, n_paths: usize, law: JumpLaw) -> Self {
        Self {
            master_seed,
            n_paths,
            law,
            times: Vec::new(),
            radii: Vec::new(),
            probes: Vec::new(),
            threads: None,
            domain: DOMAIN_PATHS,
        }
    }

    fn targets(&self) -> Vec<Target> {
        let mut targets: Vec<Target> = self
            .times
            .iter()
            .flat_map(|&t| self.radii.iter().map(move |&radius| Target::Average { t, radius }))
            .collect();
        targets.extend(self.probes.iter().map(|&(t, x)| Target::Point { t, x }));
        targets
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidArgument("n_paths must be at least 1".into()));
        }
        if self.times.iter().any(|t| !(*t >= 0.0)) || self.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidArgument("times must be >= 0 and radii > 0".into()));
        }
        if self.probes.iter().any(|(t, x)| !(*t >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument("probe times must be >= 0".into()));
        }
        if !self.radii.is_empty() && self.times.is_empty() {
            return Err(Error::InvalidArgument("radii given without times".into()));
        }
        Ok(())
    }
}

/// Column key of a spatial average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AverageKey {
    pub t: f64,
    pub radius: f64,
}

/// Column key of a point probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeKey {
    pub t: f64,
    pub x: f64,
}

/// Per-path records, stored column-wise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    pub master_seed: u64,
    pub n_paths: usize,
    pub domain: u64,
    pub law: JumpLaw,
    pub window: SpaceTimeWindow,
    pub atom_counts: Vec<usize>,
    pub average_keys: Vec<AverageKey>,
    pub averages: Vec<Vec<f64>>,
    pub probe_keys: Vec<ProbeKey>,
    pub probes: Vec<Vec<f64>>,
}

impl SampleSet {
    /// Samples of `F_R(t)`, if that pair was recorded.
    pub fn average(&self, t: f64, radius: f64) -> Option<&[f64]> {
        self.average_keys
            .iter()
            .position(|k| k.t == t && k.radius == radius)
            .map(|i| self.averages[i].as_slice())
    }

    /// Samples of `u(t, x)`, if that probe was recorded.
    pub fn probe(&self, t: f64, x: f64) -> Option<&[f64]> {
        self.probe_keys
            .iter()
            .position(|k| k.t == t && k.x == x)
            .map(|i| self.probes[i].as_slice())
    }

    pub fn times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = Vec::new();
        for k in &self.average_keys {
            if !ts.contains(&k.t) {
                ts.push(k.t);
            }
        }
        ts
    }

    pub fn radii(&self) -> Vec<f64> {
        let mut rs: Vec<f64> = Vec::new();
        for k in &self.average_keys {
            if !rs.contains(&k.radius) {
                rs.push(k.radius);
            }
        }
        rs
    }

    /// RFC 4180 CSV, one row per path, numbers with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut header = vec!["path".to_string(), "atoms".to_string()];
        header.extend(self.average_keys.iter().map(|k| format!("F(t={};R={})", k.t, k.radius)));
        header.extend(self.probe_keys.iter().map(|k| format!("u(t={};x={})", k.t, k.x)));
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.n_paths {
            write!(out, "{},{}", i, self.atom_counts[i])?;
            for col in self.averages.iter().chain(&self.probes) {
                write!(out, ",{}", fmt17(col[i]))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Fixed 17-significant-digit rendering, so equal bits give equal text.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

struct PathRecord {
    atoms: usize,
    averages: Vec<f64>,
    probes: Vec<f64>,
}

fn simulate_path(cfg: &McConfig, window: &SpaceTimeWindow, keys: &[AverageKey], index: usize) -> Result<PathRecord> {
    let mut rng = path_rng(cfg.master_seed, cfg.domain, index as u64);
    let cloud = sample_cloud(window, &cfg.law, &mut rng)?;
    let sol = solve(&cloud, &cfg.law)?;
    let averages = keys
        .iter()
        .map(|k| sol.spatial_average(k.t, k.radius))
        .collect::<Result<Vec<_>>>()?;
    let probes = cfg
        .probes
        .iter()
        .map(|&(t, x)| sol.eval_u(t, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(PathRecord { atoms: cloud.len(), averages, probes })
}

pub fn run_mc(cfg: &McConfig) -> Result<SampleSet> {
    cfg.validate()?;
    cfg.law.ensure_centered()?;
    let window = window_for_targets(&cfg.targets())?;
    let keys: Vec<AverageKey> = cfg
        .times
        .iter()
        .flat_map(|&t| cfg.radii.iter().map(move |&radius| AverageKey { t, radius }))
        .collect();

    let run = || -> Result<Vec<PathRecord>> {
        (0..cfg.n_paths)
            .into_par_iter()
            .map(|i| simulate_path(cfg, &window, &keys, i))
            .collect()
    };
    let records = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(run)?,
        None => run()?,
    };

    let mut averages = vec![Vec::with_capacity(cfg.n_paths); keys.len()];
    let mut probes = vec![Vec::with_capacity(cfg.n_paths); cfg.probes.len()];
    let mut atom_counts = Vec::with_capacity(cfg.n_paths);
    for rec in records {
        atom_counts.push(rec.atoms);
        for (col, v) in averages.iter_mut().zip(rec.averages) {
            col.push(v);
        }
        for (col, v) in probes.iter_mut().zip(rec.probes) {
            col.push(v);
        }
    }
    Ok(SampleSet {
        master_seed: cfg.master_seed,
        n_paths: cfg.n_paths,
        domain: cfg.domain,
        law: cfg.law.clone(),
        window,
        atom_counts,
        average_keys: keys,
        averages,
        probe_keys: cfg.probes.iter().map(|&(t, x)| ProbeKey { t, x }).collect(),
        probes,
    })
}
