use std::path::PathBuf;

use binarise::constructions::StateChoice;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::cglmp::{check_dimension, solve_cglmp};
use super::{check_monotone, Context};
use crate::error::{CliError, CliResult};
use crate::output::{round_v, Emitter, InstanceRecord, RunManifest};

/// Reference critical visibilities for `N = 2..=8`, as fractions.
pub const PAPER_MULTI: [f64; 7] = [0.707, 0.686, 0.673, 0.663, 0.656, 0.650, 0.645];
pub const PAPER_BINARISED: [f64; 7] = [0.707, 0.794, 0.814, 0.834, 0.843, 0.853, 0.859];
pub const MULTI_TOL: f64 = 0.003;
pub const BINARISED_TOL: f64 = 0.005;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub row: &'static str,
    pub n: usize,
    pub v_crit: f64,
    pub paper: f64,
    pub deviation: f64,
    pub within_tolerance: bool,
    pub solve_time: f64,
}

#[derive(Clone, Debug)]
pub struct Table2Report {
    pub cells: Vec<Cell>,
    pub table: PathBuf,
    pub cells_csv: PathBuf,
    pub certificates: Vec<PathBuf>,
}

impl Table2Report {
    pub fn flagged(&self) -> Vec<&Cell> {
        self.cells.iter().filter(|c| !c.within_tolerance).collect()
    }
}

pub fn run(ctx: &Context, max_n: usize) -> CliResult<Table2Report> {
    check_dimension(max_n)?;
    let emitter = Emitter::create(&ctx.out.join("table2"))?;
    let jobs: Vec<(usize, bool)> = (2..=max_n).flat_map(|n| [(n, false), (n, true)]).collect();
    let solved = ctx.pool.install(|| {
        jobs.par_iter()
            .map(|&(n, bin)| solve_cglmp(n, StateChoice::Optimal, bin))
            .collect::<CliResult<Vec<_>>>()
    })?;

    let mut manifest = RunManifest::new("reproduce-table2", json!({"max_n": max_n}), vec![]);
    let mut cells = Vec::new();
    let mut certificates = Vec::new();
    for (&(n, bin), s) in jobs.iter().zip(&solved) {
        let cert = emitter.write_certified(&format!("certificates/{}", s.stem), &s.certificate, &s.object)?;
        certificates.push(emitter.path(&cert));
        let (row, paper, tol) = if bin {
            (
                "binarised",
                PAPER_BINARISED[n - 2],
                ctx.tolerance.unwrap_or(BINARISED_TOL),
            )
        } else {
            ("multi", PAPER_MULTI[n - 2], ctx.tolerance.unwrap_or(MULTI_TOL))
        };
        let v = round_v(s.v());
        let deviation = round_v(v - paper);
        cells.push(Cell {
            row,
            n,
            v_crit: v,
            paper,
            deviation,
            within_tolerance: deviation.abs() <= tol + 1e-12,
            solve_time: s.seconds,
        });
        let mut values = serde_json::Map::new();
        values.insert("paper".into(), json!(paper));
        values.insert("deviation".into(), json!(deviation));
        manifest.instances.push(InstanceRecord {
            label: s.stem.clone(),
            v_multi: (!bin).then_some(v),
            v_bin: bin.then_some(v),
            values,
            solve_time: s.seconds,
            certificates: vec![cert],
        });
    }
    for pair in solved.chunks(2) {
        check_monotone(&pair[0].stem, pair[0].v(), pair[1].v(), super::DEFAULT_MONOTONICITY_TOL)?;
    }

    let mut header = vec!["row".to_string()];
    header.extend((2..=max_n).map(|n| format!("N{n}")));
    let mut text = header.join(",") + "\n";
    for row in ["multi", "binarised"] {
        let values: Vec<String> = cells
            .iter()
            .filter(|c| c.row == row)
            .map(|c| c.v_crit.to_string())
            .collect();
        text += &format!("{row},{}\n", values.join(","));
    }
    let table = emitter.write_text("table2.csv", &text)?;
    let cells_csv = emitter.write_csv(
        "cells.csv",
        &[
            "row",
            "n",
            "v_crit",
            "paper",
            "deviation",
            "within_tolerance",
            "solve_time",
        ],
        &cells,
    )?;
    emitter.finish_manifest("manifest.json", manifest)?;
    let report = Table2Report {
        cells,
        table,
        cells_csv,
        certificates,
    };
    let flagged = report.flagged();
    if !flagged.is_empty() {
        let list: Vec<String> = flagged
            .iter()
            .map(|c| format!("{} N={}: {} vs {}", c.row, c.n, c.v_crit, c.paper))
            .collect();
        return Err(CliError::Invariant(format!(
            "cells outside tolerance: {}",
            list.join(", ")
        )));
    }
    Ok(report)
}
