use std::path::PathBuf;

use binarise::classicality::{
    pm_critical_visibility, rac_binarised_witness_classical_max, rac_binarised_witness_value,
};
use binarise::constructions::{rac_instance, SeesawConfig};
use binarise::scenarios::{binarise_pm, CorrelationObject};
use serde::Serialize;
use serde_json::json;

use super::{check_monotone, timed, Context, Mode, Solved};
use crate::error::{CliError, CliResult};
use crate::output::{round_v, Emitter, InstanceRecord, RunManifest};

#[derive(Serialize)]
struct Row<'a> {
    d: usize,
    mode: &'a str,
    v_crit: f64,
    witness_value: Option<f64>,
    witness_noise_value: Option<f64>,
    witness_bound: Option<f64>,
    solve_time: f64,
}

#[derive(Clone, Debug)]
pub struct RacReport {
    pub success: f64,
    pub v_multi: Option<f64>,
    pub v_bin: Option<f64>,
    /// Binarised witness on the quantum endpoint and on the noise endpoint.
    pub witness: Option<(f64, f64)>,
    pub witness_bound: Option<f64>,
    pub csv: PathBuf,
    pub certificates: Vec<PathBuf>,
}

pub fn run(ctx: &Context, d: usize, mode: Mode, seed: u64) -> CliResult<RacReport> {
    if d < 2 {
        return Err(CliError::Usage(format!("RAC dimension must be at least 2, got {d}")));
    }
    if d != 3 {
        eprintln!("note: RAC d={d} is outside the reference configuration d=3");
    }
    let emitter = Emitter::create(&ctx.out.join("rac"))?;
    let config = SeesawConfig {
        seed,
        ..SeesawConfig::default()
    };
    let instance = rac_instance(d, &config)?;
    let mut manifest = RunManifest::new("rac", json!({"d": d, "mode": mode, "seesaw": config}), vec![seed]);
    let bin_family = instance.family.map(binarise_pm)?;
    let solve = |binarised: bool| -> CliResult<Solved> {
        let family = if binarised { &bin_family } else { &instance.family };
        let (result, seconds) = timed(|| pm_critical_visibility(family, d));
        let analysis = result?;
        Ok(Solved {
            stem: format!("d{d}-{}", if binarised { "binarised" } else { "multi" }),
            certificate: analysis.certificate,
            object: CorrelationObject::PrepareMeasure(family.quantum().clone()),
            v_lp: analysis.v_lp,
            seconds,
        })
    };
    let (multi, bin) = ctx.pool.install(|| {
        rayon::join(
            || mode.multi().then(|| solve(false)).transpose(),
            || mode.binarised().then(|| solve(true)).transpose(),
        )
    });
    let (multi, bin) = (multi?, bin?);
    let witness = if mode.binarised() {
        Some((
            rac_binarised_witness_value(bin_family.quantum())?,
            rac_binarised_witness_value(bin_family.noise())?,
        ))
    } else {
        None
    };
    let witness_bound = witness.map(|_| rac_binarised_witness_classical_max(d) as f64 / 8.0);

    let mut rows = Vec::new();
    let mut certificates = Vec::new();
    for (solved, tag) in [(&multi, "multi"), (&bin, "binarised")] {
        let Some(s) = solved else { continue };
        let cert = emitter.write_certified(&s.stem, &s.certificate, &s.object)?;
        certificates.push(emitter.path(&cert));
        let is_bin = tag == "binarised";
        let mut values = serde_json::Map::new();
        values.insert("success".into(), json!(instance.success));
        values.insert("classical_bound".into(), json!(s.certificate.classical_bound));
        values.insert("achieved_value".into(), json!(s.certificate.achieved_value));
        values.insert("v_lp".into(), json!(s.v_lp));
        if let (true, Some((w1, w0)), Some(b)) = (is_bin, witness, witness_bound) {
            values.insert("witness_value".into(), json!(w1));
            values.insert("witness_noise_value".into(), json!(w0));
            values.insert("witness_bound".into(), json!(b));
            values.insert("witness_violated".into(), json!(w1 > b));
            values.insert("witness_noise_violated".into(), json!(w0 > b));
        }
        manifest.instances.push(InstanceRecord {
            label: s.stem.clone(),
            v_multi: (!is_bin).then(|| round_v(s.v())),
            v_bin: is_bin.then(|| round_v(s.v())),
            values,
            solve_time: s.seconds,
            certificates: vec![cert],
        });
        rows.push(Row {
            d,
            mode: tag,
            v_crit: round_v(s.v()),
            witness_value: witness.filter(|_| is_bin).map(|w| w.0),
            witness_noise_value: witness.filter(|_| is_bin).map(|w| w.1),
            witness_bound: witness_bound.filter(|_| is_bin),
            solve_time: s.seconds,
        });
    }
    let csv = emitter.write_csv(
        &format!("d{d}.csv"),
        &[
            "d",
            "mode",
            "v_crit",
            "witness_value",
            "witness_noise_value",
            "witness_bound",
            "solve_time",
        ],
        &rows,
    )?;
    emitter.finish_manifest(&format!("d{d}.manifest.json"), manifest)?;
    let v_multi = multi.as_ref().map(|s| s.v());
    let v_bin = bin.as_ref().map(|s| s.v());
    if let (Some(m), Some(b)) = (v_multi, v_bin) {
        check_monotone(&format!("rac d={d}"), m, b, ctx.monotonicity_tol())?;
    }
    Ok(RacReport {
        success: instance.success,
        v_multi,
        v_bin,
        witness,
        witness_bound,
        csv,
        certificates,
    })
}
