use std::path::PathBuf;

use binarise::classicality::{bell_critical_visibility_with, SolveOptions};
use binarise::constructions::{cglmp_instance, StateChoice};
use binarise::scenarios::{binarise_bell, CorrelationObject};
use serde::Serialize;
use serde_json::json;

use super::{check_monotone, options_with_progress, timed, Context, Mode, Solved};
use crate::error::{CliError, CliResult};
use crate::output::{round_v, Emitter, InstanceRecord, RunManifest};

/// Binarised instances from this `N` on report solver progress.
pub const PROGRESS_FROM_N: usize = 6;

pub fn state_name(state: StateChoice) -> &'static str {
    match state {
        StateChoice::Optimal => "optimal",
        StateChoice::MaximallyEntangled => "maxent",
    }
}

pub fn check_dimension(n: usize) -> CliResult<()> {
    if (2..=8).contains(&n) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("N must lie in 2..=8, got {n}")))
    }
}

pub(crate) fn solve_cglmp(n: usize, state: StateChoice, binarised: bool) -> CliResult<Solved> {
    let inst = cglmp_instance(n, state)?;
    let tag = if binarised { "binarised" } else { "multi" };
    let stem = format!("N{n}-{}-{tag}", state_name(state));
    let family = if binarised {
        inst.family.map(binarise_bell)?
    } else {
        inst.family
    };
    let options = if binarised && n >= PROGRESS_FROM_N {
        options_with_progress(&format!("cglmp {stem}"))
    } else {
        SolveOptions::default()
    };
    let (result, seconds) = timed(|| bell_critical_visibility_with(&family, &options));
    let analysis = result?;
    Ok(Solved {
        stem,
        certificate: analysis.certificate,
        object: CorrelationObject::Bell(family.quantum().clone()),
        v_lp: analysis.v_lp,
        seconds,
    })
}

#[derive(Serialize)]
struct Row<'a> {
    n: usize,
    mode: &'a str,
    state: &'a str,
    v_crit: f64,
    solve_time: f64,
}

#[derive(Clone, Debug)]
pub struct CglmpReport {
    pub v_multi: Option<f64>,
    pub v_bin: Option<f64>,
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub certificates: Vec<PathBuf>,
}

pub fn run(ctx: &Context, n: usize, mode: Mode, state: StateChoice) -> CliResult<CglmpReport> {
    check_dimension(n)?;
    let emitter = Emitter::create(&ctx.out.join("cglmp"))?;
    let mut manifest = RunManifest::new("cglmp", json!({"n": n, "mode": mode, "state": state}), vec![]);
    let (multi, bin) = ctx.pool.install(|| {
        rayon::join(
            || mode.multi().then(|| solve_cglmp(n, state, false)).transpose(),
            || mode.binarised().then(|| solve_cglmp(n, state, true)).transpose(),
        )
    });
    let (multi, bin) = (multi?, bin?);

    let mut rows = Vec::new();
    let mut certificates = Vec::new();
    for (solved, tag) in [(&multi, "multi"), (&bin, "binarised")] {
        let Some(s) = solved else { continue };
        let cert = emitter.write_certified(&s.stem, &s.certificate, &s.object)?;
        certificates.push(emitter.path(&cert));
        let mut values = serde_json::Map::new();
        values.insert("classical_bound".into(), json!(s.certificate.classical_bound));
        values.insert("achieved_value".into(), json!(s.certificate.achieved_value));
        values.insert("v_lp".into(), json!(s.v_lp));
        manifest.instances.push(InstanceRecord {
            label: s.stem.clone(),
            v_multi: (tag == "multi").then(|| round_v(s.v())),
            v_bin: (tag == "binarised").then(|| round_v(s.v())),
            values,
            solve_time: s.seconds,
            certificates: vec![cert],
        });
        rows.push(Row {
            n,
            mode: tag,
            state: state_name(state),
            v_crit: round_v(s.v()),
            solve_time: s.seconds,
        });
    }
    let stem = format!("N{n}-{}", state_name(state));
    let csv = emitter.write_csv(
        &format!("{stem}.csv"),
        &["n", "mode", "state", "v_crit", "solve_time"],
        &rows,
    )?;
    let manifest_path = emitter.finish_manifest(&format!("{stem}.manifest.json"), manifest)?;
    let v_multi = multi.as_ref().map(|s| s.v());
    let v_bin = bin.as_ref().map(|s| s.v());
    if let (Some(m), Some(b)) = (v_multi, v_bin) {
        check_monotone(&stem, m, b, ctx.monotonicity_tol())?;
    }
    Ok(CglmpReport {
        v_multi,
        v_bin,
        csv,
        manifest: manifest_path,
        certificates,
    })
}
