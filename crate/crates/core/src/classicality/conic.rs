//! Thin builder over the Clarabel interior-point solver for the LPs and SDPs
//! in this crate. Constraint rows are collected as triplets per cone block
//! and assembled into CSC form at solve time.

use std::sync::Arc;
use std::time::Instant;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultInfo, DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Called once per interior-point iteration with the iteration count;
/// returning `false` aborts the solve.
pub type ProgressHook = Arc<dyn Fn(u32) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct SolveOptions {
    pub max_iter: u32,
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub progress: Option<ProgressHook>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol_gap: 1e-9,
            tol_feas: 1e-9,
            progress: None,
        }
    }
}

impl std::fmt::Debug for SolveOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolveOptions")
            .field("max_iter", &self.max_iter)
            .field("tol_gap", &self.tol_gap)
            .field("tol_feas", &self.tol_feas)
            .field("progress", &self.progress.is_some())
            .finish()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub status: String,
    pub iterations: u32,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Wall time including model assembly, seconds.
    pub solve_time: f64,
    pub variables: usize,
    pub constraints: usize,
}

#[derive(Default)]
struct Block {
    rows: usize,
    triplets: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
}

impl Block {
    fn push(&mut self, entries: impl IntoIterator<Item = (usize, f64)>, rhs: f64) -> usize {
        let row = self.rows;
        self.triplets
            .extend(entries.into_iter().filter(|e| e.1 != 0.0).map(|(c, v)| (row, c, v)));
        self.rhs.push(rhs);
        self.rows += 1;
        row
    }
}

/// `minimize c.x` subject to equality rows `a.x = b`, inequality rows
/// `a.x <= b`, and PSD blocks `B - sum_j x_j A_j` given in scaled
/// upper-triangular column-major form.
#[derive(Default)]
pub struct ConicProgram {
    vars: usize,
    objective: Vec<(usize, f64)>,
    eq: Block,
    le: Block,
    psd: Vec<(usize, Block)>,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub x: Vec<f64>,
    pub eq_duals: Vec<f64>,
    pub le_duals: Vec<f64>,
    pub stats: SolverStats,
}

pub fn triangle_len(side: usize) -> usize {
    side * (side + 1) / 2
}

/// Position of `(row, col)` with `row <= col` in the packed triangle.
pub fn triangle_index(row: usize, col: usize) -> usize {
    debug_assert!(row <= col);
    col * (col + 1) / 2 + row
}

impl ConicProgram {
    pub fn new(vars: usize) -> Self {
        Self {
            vars,
            ..Default::default()
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn set_objective(&mut self, col: usize, value: f64) {
        self.objective.push((col, value));
    }

    pub fn add_eq(&mut self, entries: impl IntoIterator<Item = (usize, f64)>, rhs: f64) -> usize {
        self.eq.push(entries, rhs)
    }

    pub fn add_le(&mut self, entries: impl IntoIterator<Item = (usize, f64)>, rhs: f64) -> usize {
        self.le.push(entries, rhs)
    }

    pub fn eq_rows(&self) -> usize {
        self.eq.rows
    }

    /// Registers a PSD block of side `side`. `entries[k]` lists the
    /// `(column, coefficient)` pairs of the `k`-th packed slot, where the
    /// slack is `-sum coefficient * x` (so the constraint reads
    /// `sum_j x_j M_j >= 0`). Off-diagonal slots must already carry the
    /// `sqrt(2)` scaling.
    pub fn add_psd(&mut self, side: usize, entries: Vec<Vec<(usize, f64)>>) {
        assert_eq!(entries.len(), triangle_len(side));
        let mut block = Block::default();
        for slot in entries {
            block.push(slot.into_iter().map(|(c, v)| (c, -v)), 0.0);
        }
        self.psd.push((side, block));
    }

    pub fn solve(&self, options: &SolveOptions) -> Result<ConicSolution> {
        let start = Instant::now();
        let n = self.vars;
        let mut q = vec![0.0; n];
        for &(c, v) in &self.objective {
            q[c] += v;
        }
        let mut triplets = Vec::with_capacity(
            self.eq.triplets.len()
                + self.le.triplets.len()
                + self.psd.iter().map(|(_, b)| b.triplets.len()).sum::<usize>(),
        );
        let mut b = Vec::new();
        let mut offset = 0;
        let mut cones = Vec::new();
        for (block, cone) in [
            (&self.eq, SupportedConeT::ZeroConeT(self.eq.rows)),
            (&self.le, SupportedConeT::NonnegativeConeT(self.le.rows)),
        ] {
            if block.rows == 0 {
                continue;
            }
            triplets.extend(block.triplets.iter().map(|&(r, c, v)| (r + offset, c, v)));
            b.extend_from_slice(&block.rhs);
            offset += block.rows;
            cones.push(cone);
        }
        let eq_offset = 0;
        let le_offset = self.eq.rows;
        for (side, block) in &self.psd {
            triplets.extend(block.triplets.iter().map(|&(r, c, v)| (r + offset, c, v)));
            b.extend_from_slice(&block.rhs);
            offset += block.rows;
            cones.push(SupportedConeT::PSDTriangleConeT(*side));
        }
        let m = offset;
        let a = csc_from_triplets(m, n, triplets);
        let p = CscMatrix::zeros((n, n));

        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(options.max_iter)
            .tol_gap_abs(options.tol_gap)
            .tol_gap_rel(options.tol_gap)
            .tol_feas(options.tol_feas)
            .presolve_enable(false)
            .build()
            .map_err(|e| Error::Solver(format!("settings: {e}")))?;
        let mut solver =
            DefaultSolver::new(&p, &q, &a, &b, &cones, settings).map_err(|e| Error::Solver(format!("setup: {e:?}")))?;
        if let Some(hook) = options.progress.clone() {
            solver.set_termination_callback(move |info: &DefaultInfo<f64>| !hook(info.iterations));
        }
        solver.solve();
        let sol = &solver.solution;
        let stats = SolverStats {
            status: format!("{:?}", sol.status),
            iterations: sol.iterations,
            primal_residual: sol.r_prim,
            dual_residual: sol.r_dual,
            primal_objective: sol.obj_val,
            dual_objective: sol.obj_val_dual,
            solve_time: start.elapsed().as_secs_f64(),
            variables: n,
            constraints: m,
        };
        match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => Ok(ConicSolution {
                x: sol.x.clone(),
                eq_duals: sol.z[eq_offset..eq_offset + self.eq.rows].to_vec(),
                le_duals: sol.z[le_offset..le_offset + self.le.rows].to_vec(),
                stats,
            }),
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => Err(Error::NoiseNotClassical),
            SolverStatus::CallbackTerminated => Err(Error::Aborted),
            other => Err(Error::Solver(format!(
                "{other:?} after {} iterations (primal residual {:.2e}, dual residual {:.2e})",
                stats.iterations, stats.primal_residual, stats.dual_residual
            ))),
        }
    }
}

fn csc_from_triplets(m: usize, n: usize, mut triplets: Vec<(usize, usize, f64)>) -> CscMatrix<f64> {
    triplets.sort_unstable_by_key(|&(r, c, _)| (c, r));
    let mut colptr = vec![0usize; n + 1];
    let mut rowval = Vec::with_capacity(triplets.len());
    let mut nzval: Vec<f64> = Vec::with_capacity(triplets.len());
    let mut last: Option<(usize, usize)> = None;
    for (r, c, v) in triplets {
        if last == Some((r, c)) {
            *nzval.last_mut().expect("previous entry") += v;
            continue;
        }
        rowval.push(r);
        nzval.push(v);
        colptr[c + 1] += 1;
        last = Some((r, c));
    }
    for c in 0..n {
        colptr[c + 1] += colptr[c];
    }
    CscMatrix::new(m, n, colptr, rowval, nzval)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp_with_duals() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0 -> (1.6, 1.2)
        let mut lp = ConicProgram::new(2);
        lp.set_objective(0, -1.0);
        lp.set_objective(1, -1.0);
        lp.add_le([(0, 1.0), (1, 2.0)], 4.0);
        lp.add_le([(0, 3.0), (1, 1.0)], 6.0);
        lp.add_le([(0, -1.0)], 0.0);
        lp.add_le([(1, -1.0)], 0.0);
        let sol = lp.solve(&SolveOptions::default()).unwrap();
        assert!((sol.x[0] - 1.6).abs() < 1e-7 && (sol.x[1] - 1.2).abs() < 1e-7);
        // shadow prices (0.4, 0.2)
        assert!((sol.le_duals[0] - 0.4).abs() < 1e-6 && (sol.le_duals[1] - 0.2).abs() < 1e-6);
    }

    #[test]
    fn small_sdp() {
        // max t s.t. [[1, t], [t, 1]] >= 0  -> t = 1; variables (t, one) with one fixed.
        let mut sdp = ConicProgram::new(2);
        sdp.set_objective(0, -1.0);
        sdp.add_eq([(1, 1.0)], 1.0);
        let s2 = std::f64::consts::SQRT_2;
        sdp.add_psd(2, vec![vec![(1, 1.0)], vec![(0, s2)], vec![(1, 1.0)]]);
        let sol = sdp.solve(&SolveOptions::default()).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_is_reported() {
        let mut lp = ConicProgram::new(1);
        lp.add_eq([(0, 1.0)], 1.0);
        lp.add_le([(0, 1.0)], 0.0);
        assert!(matches!(
            lp.solve(&SolveOptions::default()),
            Err(Error::NoiseNotClassical)
        ));
    }
}
