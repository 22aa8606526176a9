use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use binarise::classicality::{Certificate, ProgressHook, SolveOptions};
use binarise::scenarios::CorrelationObject;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub mod cglmp;
pub mod rac;
pub mod steering;
pub mod table2;
pub mod verify;

/// Slack allowed when checking `v_bin >= v_multi`.
pub const DEFAULT_MONOTONICITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Multi,
    #[value(alias = "bin")]
    Binarised,
    Both,
}

impl Mode {
    pub fn multi(self) -> bool {
        matches!(self, Mode::Multi | Mode::Both)
    }

    pub fn binarised(self) -> bool {
        matches!(self, Mode::Binarised | Mode::Both)
    }
}

pub struct Context {
    pub out: PathBuf,
    pub pool: rayon::ThreadPool,
    /// Overrides the default comparison tolerance of a command.
    pub tolerance: Option<f64>,
}

impl Context {
    pub fn new(out: PathBuf, workers: Option<usize>, tolerance: Option<f64>) -> CliResult<Self> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = workers {
            if w == 0 {
                return Err(CliError::Usage("--workers must be at least 1".into()));
            }
            builder = builder.num_threads(w);
        }
        let pool = builder.build().map_err(|e| CliError::Usage(e.to_string()))?;
        if let Some(t) = tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return Err(CliError::Usage(format!(
                    "--tolerance must be a nonnegative number, got {t}"
                )));
            }
        }
        Ok(Self { out, pool, tolerance })
    }

    pub fn monotonicity_tol(&self) -> f64 {
        self.tolerance.unwrap_or(DEFAULT_MONOTONICITY_TOL)
    }
}

/// One finished solve: the certificate, the object it refers to and timing.
pub struct Solved {
    pub stem: String,
    pub certificate: Certificate,
    pub object: CorrelationObject,
    pub v_lp: f64,
    pub seconds: f64,
}

impl Solved {
    pub fn v(&self) -> f64 {
        self.certificate.v_critical
    }
}

pub(crate) fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

/// Solver options that report interior-point iterations on stderr.
pub(crate) fn options_with_progress(label: &str) -> SolveOptions {
    let label = label.to_string();
    let hook: ProgressHook = Arc::new(move |iteration| {
        eprintln!("[{label}] interior-point iteration {iteration}");
        true
    });
    SolveOptions {
        progress: Some(hook),
        ..SolveOptions::default()
    }
}

pub(crate) fn check_monotone(label: &str, v_multi: f64, v_bin: f64, tol: f64) -> CliResult<()> {
    if v_bin < v_multi - tol {
        Err(CliError::Invariant(format!(
            "{label}: binarised visibility {v_bin:.9} below multi-outcome {v_multi:.9}"
        )))
    } else {
        Ok(())
    }
}
