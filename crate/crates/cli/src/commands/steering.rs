use std::path::PathBuf;

use binarise::classicality::steering_critical_visibility;
use binarise::constructions::{mub_assemblage, random_steering_instance, StateModel};
use binarise::qcore::{maximally_entangled, seeded_rng};
use binarise::scenarios::{binarise_assemblage, Assemblage, CorrelationObject, VisibilityFamily};
use clap::ValueEnum;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{check_monotone, timed, Context, Mode, Solved};
use crate::error::{CliError, CliResult};
use crate::output::{round_v, Emitter, InstanceRecord, RunManifest};

/// Number of histogram bins for the gap distribution.
pub const GAP_BINS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Mub,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteeringParams {
    pub construction: Construction,
    pub d: usize,
    /// Number of bases for `mub`.
    pub k: usize,
    /// Number of random bases for `random`.
    pub n_meas: usize,
    pub trials: usize,
    pub seed: u64,
    /// Rank of random mixed states; pure when absent.
    pub rank: Option<usize>,
    pub mode: Mode,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub trial_seed: Option<u64>,
    pub v_multi: Option<f64>,
    pub v_bin: Option<f64>,
    pub gap: Option<f64>,
}

#[derive(Serialize)]
struct BinRow {
    bin_low: f64,
    bin_high: f64,
    count: usize,
}

#[derive(Clone, Debug)]
pub struct SteeringReport {
    pub rows: Vec<TrialRow>,
    pub csv: PathBuf,
    pub histogram: PathBuf,
    pub certificates: Vec<PathBuf>,
}

fn label(p: &SteeringParams) -> String {
    match p.construction {
        Construction::Mub => format!("mub-d{}-k{}", p.d, p.k),
        Construction::Random => match p.rank {
            Some(r) => format!("random-d{}-m{}-r{r}-s{}", p.d, p.n_meas, p.seed),
            None => format!("random-d{}-m{}-s{}", p.d, p.n_meas, p.seed),
        },
    }
}

/// Per-trial seeds, drawn from one ChaCha20 stream seeded by `seed`.
pub fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = seeded_rng(seed);
    (0..trials).map(|_| rng.next_u64()).collect()
}

struct TrialResult {
    multi: Option<Solved>,
    bin: Option<Solved>,
}

fn solve_trial(family: VisibilityFamily<Assemblage>, stem: &str, mode: Mode) -> CliResult<TrialResult> {
    let solve = |family: &VisibilityFamily<Assemblage>, tag: &str| -> CliResult<Solved> {
        let (result, seconds) = timed(|| steering_critical_visibility(family));
        let analysis = result?;
        Ok(Solved {
            stem: format!("{stem}-{tag}"),
            certificate: analysis.certificate,
            object: CorrelationObject::Assemblage(family.quantum().clone()),
            v_lp: analysis.v_lp,
            seconds,
        })
    };
    let multi = mode.multi().then(|| solve(&family, "multi")).transpose()?;
    let bin = if mode.binarised() {
        Some(solve(&family.map(binarise_assemblage)?, "binarised")?)
    } else {
        None
    };
    Ok(TrialResult { multi, bin })
}

fn histogram(gaps: &[f64]) -> Vec<BinRow> {
    if gaps.is_empty() {
        return Vec::new();
    }
    let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-12 {
        return vec![BinRow {
            bin_low: lo,
            bin_high: hi,
            count: gaps.len(),
        }];
    }
    let width = (hi - lo) / GAP_BINS as f64;
    let mut counts = vec![0usize; GAP_BINS];
    for &g in gaps {
        let i = (((g - lo) / width) as usize).min(GAP_BINS - 1);
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| BinRow {
            bin_low: lo + i as f64 * width,
            bin_high: lo + (i + 1) as f64 * width,
            count,
        })
        .collect()
}

pub fn run(ctx: &Context, params: &SteeringParams) -> CliResult<SteeringReport> {
    let p = *params;
    if p.d < 2 {
        return Err(CliError::Usage(format!("dimension must be at least 2, got {}", p.d)));
    }
    let name = label(&p);
    let emitter = Emitter::create(&ctx.out.join("steering").join(&name))?;
    let (seeds, families): (Vec<Option<u64>>, Vec<CliResult<VisibilityFamily<Assemblage>>>) = match p.construction {
        Construction::Mub => (0..p.trials)
            .map(|_| {
                (
                    None,
                    mub_assemblage(p.d, p.k, &maximally_entangled(p.d)).map_err(CliError::from),
                )
            })
            .unzip(),
        Construction::Random => {
            let model = match p.rank {
                Some(rank) => StateModel::Mixed { rank },
                None => StateModel::Pure,
            };
            trial_seeds(p.seed, p.trials)
                .into_iter()
                .map(|s| {
                    (
                        Some(s),
                        random_steering_instance(p.d, p.n_meas, s, model).map_err(CliError::from),
                    )
                })
                .unzip()
        }
    };
    let families = families.into_iter().collect::<CliResult<Vec<_>>>()?;
    let results: Vec<TrialResult> = ctx.pool.install(|| {
        families
            .into_par_iter()
            .enumerate()
            .map(|(i, family)| solve_trial(family, &format!("trial{i:04}"), p.mode))
            .collect::<CliResult<Vec<_>>>()
    })?;

    let mut manifest = RunManifest::new("steering", json!(p), seeds.iter().flatten().copied().collect());
    let mut rows = Vec::new();
    let mut certificates = Vec::new();
    let mut gaps = Vec::new();
    for (i, (result, seed)) in results.iter().zip(&seeds).enumerate() {
        let mut record = InstanceRecord {
            label: format!("trial{i:04}"),
            ..InstanceRecord::default()
        };
        for solved in [&result.multi, &result.bin].into_iter().flatten() {
            let cert = emitter.write_certified(&solved.stem, &solved.certificate, &solved.object)?;
            certificates.push(emitter.path(&cert));
            record.certificates.push(cert);
            record.solve_time += solved.seconds;
        }
        let v_multi = result.multi.as_ref().map(|s| round_v(s.v()));
        let v_bin = result.bin.as_ref().map(|s| round_v(s.v()));
        let gap = match (&result.multi, &result.bin) {
            (Some(m), Some(b)) => {
                check_monotone(&format!("{name} trial {i}"), m.v(), b.v(), ctx.monotonicity_tol())?;
                let g = round_v(b.v() - m.v());
                gaps.push(g);
                Some(g)
            }
            _ => None,
        };
        record.v_multi = v_multi;
        record.v_bin = v_bin;
        if let Some(g) = gap {
            record.values.insert("gap".into(), json!(g));
        }
        if let Some(s) = seed {
            record.values.insert("trial_seed".into(), json!(s));
        }
        manifest.instances.push(record);
        rows.push(TrialRow {
            trial: i,
            trial_seed: *seed,
            v_multi,
            v_bin,
            gap,
        });
    }
    let csv = emitter.write_csv(
        "results.csv",
        &["trial", "trial_seed", "v_multi", "v_bin", "gap"],
        &rows,
    )?;
    let histogram = emitter.write_csv(
        "gap_histogram.csv",
        &["bin_low", "bin_high", "count"],
        &histogram(&gaps),
    )?;
    emitter.finish_manifest("manifest.json", manifest)?;
    Ok(SteeringReport {
        rows,
        csv,
        histogram,
        certificates,
    })
}
