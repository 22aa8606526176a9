//! Local-model LP for Bell behaviors.
//!
//! Alice's deterministic response tables are enumerated; for each table
//! `lambda` Bob holds an unnormalized response `q[lambda][y][b]` whose total
//! weight is `w[lambda]`. Matching is done in Collins-Gisin coordinates
//! (normalization, both marginals, and the joint terms with `a < N_A - 1`,
//! `b < N_B - 1`), which determine a no-signaling behavior completely.

use super::certificate::{bell_local_bound, dot, normalize, orient, Certificate, CertificateKind, Coefficients};
use super::conic::{ConicProgram, SolveOptions};
use super::strategies::{strategy_count, write_digits};
use crate::error::{Error, Result};
use crate::scenarios::{BellBehavior, BellScenario, ScenarioDescriptor, VisibilityFamily};

/// Upper limit on Alice's strategy count for the efficient formulation.
pub const MAX_ALICE_STRATEGIES: usize = 1 << 17;

#[derive(Clone, Debug)]
pub struct BellAnalysis {
    /// Optimal value of the LP.
    pub v_lp: f64,
    pub certificate: Certificate,
}

#[derive(Clone, Copy)]
enum Row {
    Norm,
    MarginalA(usize, usize),
    MarginalB(usize, usize),
    Joint(usize, usize, usize, usize),
}

fn cg_rows(s: &BellScenario) -> Vec<Row> {
    let mut rows = vec![Row::Norm];
    for x in 0..s.inputs_a {
        for a in 0..s.outcomes_a - 1 {
            rows.push(Row::MarginalA(a, x));
        }
    }
    for y in 0..s.inputs_b {
        for b in 0..s.outcomes_b - 1 {
            rows.push(Row::MarginalB(b, y));
        }
    }
    for x in 0..s.inputs_a {
        for y in 0..s.inputs_b {
            for a in 0..s.outcomes_a - 1 {
                for b in 0..s.outcomes_b - 1 {
                    rows.push(Row::Joint(a, b, x, y));
                }
            }
        }
    }
    rows
}

fn cg_value(p: &BellBehavior, row: Row) -> f64 {
    let s = p.scenario();
    match row {
        Row::Norm => 1.0,
        Row::MarginalA(a, x) => (0..s.outcomes_b).map(|b| p.get(a, b, x, 0)).sum(),
        Row::MarginalB(b, y) => (0..s.outcomes_a).map(|a| p.get(a, b, 0, y)).sum(),
        Row::Joint(a, b, x, y) => p.get(a, b, x, y),
    }
}

/// Spreads a multiplier on a CG row onto the full tensor so that
/// `tensor . p` reproduces the row value for every no-signaling `p`.
fn scatter(s: &BellScenario, row: Row, weight: f64, out: &mut [f64]) {
    match row {
        Row::Norm => {
            for a in 0..s.outcomes_a {
                for b in 0..s.outcomes_b {
                    out[s.index(a, b, 0, 0)] += weight;
                }
            }
        }
        Row::MarginalA(a, x) => {
            for b in 0..s.outcomes_b {
                out[s.index(a, b, x, 0)] += weight;
            }
        }
        Row::MarginalB(b, y) => {
            for a in 0..s.outcomes_a {
                out[s.index(a, b, 0, y)] += weight;
            }
        }
        Row::Joint(a, b, x, y) => out[s.index(a, b, x, y)] += weight,
    }
}

fn check_family(family: &VisibilityFamily<BellBehavior>) -> Result<BellScenario> {
    let s = *family.quantum().scenario();
    if *family.noise().scenario() != s {
        return Err(Error::ScenarioMismatch("quantum and noise scenarios differ".into()));
    }
    for p in [family.quantum(), family.noise()] {
        let defect = p.signaling_defect();
        if defect > crate::scenarios::SIGNALING_REJECT_TOL {
            return Err(Error::Signaling(defect));
        }
    }
    Ok(s)
}

/// Largest `v` for which `v * quantum + (1 - v) * noise` is local, with the
/// dual Bell inequality as certificate.
pub fn bell_critical_visibility(family: &VisibilityFamily<BellBehavior>) -> Result<BellAnalysis> {
    bell_critical_visibility_with(family, &SolveOptions::default())
}

pub fn bell_critical_visibility_with(
    family: &VisibilityFamily<BellBehavior>,
    options: &SolveOptions,
) -> Result<BellAnalysis> {
    let s = check_family(family)?;
    let strategies = strategy_count(s.inputs_a, s.outcomes_a)
        .filter(|&c| c <= MAX_ALICE_STRATEGIES)
        .ok_or_else(|| Error::TooLarge(format!("{}^{} Alice strategies", s.outcomes_a, s.inputs_a)))?;
    let free_b = s.outcomes_b - 1;
    let w_col = |l: usize| 1 + l;
    let q_col = |l: usize, y: usize, b: usize| 1 + strategies + (l * s.inputs_b + y) * free_b + b;
    let vars = 1 + strategies + strategies * s.inputs_b * free_b;
    let mut lp = ConicProgram::new(vars);
    lp.set_objective(0, -1.0);

    let tables: Vec<Vec<usize>> = (0..strategies)
        .map(|k| {
            let mut t = vec![0; s.inputs_a];
            write_digits(k, s.outcomes_a, &mut t);
            t
        })
        .collect();

    let rows = cg_rows(&s);
    let (quantum, noise) = (family.quantum(), family.noise());
    for &row in &rows {
        let q = cg_value(quantum, row);
        let n = cg_value(noise, row);
        let mut entries: Vec<(usize, f64)> = vec![(0, -(q - n))];
        match row {
            Row::Norm => entries.extend((0..strategies).map(|l| (w_col(l), 1.0))),
            Row::MarginalA(a, x) => {
                entries.extend((0..strategies).filter(|&l| tables[l][x] == a).map(|l| (w_col(l), 1.0)))
            }
            Row::MarginalB(b, y) => entries.extend((0..strategies).map(|l| (q_col(l, y, b), 1.0))),
            Row::Joint(a, b, x, y) => entries.extend(
                (0..strategies)
                    .filter(|&l| tables[l][x] == a)
                    .map(|l| (q_col(l, y, b), 1.0)),
            ),
        }
        lp.add_eq(entries, n);
    }
    for l in 0..strategies {
        if free_b == 0 {
            lp.add_le([(w_col(l), -1.0)], 0.0);
        }
        for y in 0..s.inputs_b {
            let mut sum: Vec<(usize, f64)> = (0..free_b).map(|b| (q_col(l, y, b), 1.0)).collect();
            for b in 0..free_b {
                lp.add_le([(q_col(l, y, b), -1.0)], 0.0);
            }
            if free_b > 0 {
                sum.push((w_col(l), -1.0));
                lp.add_le(sum, 0.0);
            }
        }
    }
    lp.add_le([(0, 1.0)], 1.0);

    let solution = lp.solve(options)?;
    let v_lp = solution.x[0];

    let mut coefficients = vec![0.0; s.len()];
    for (&row, &y) in rows.iter().zip(&solution.eq_duals) {
        scatter(&s, row, y, &mut coefficients);
    }
    normalize(&mut coefficients);
    let certificate = finish_bell_certificate(&s, coefficients, quantum, noise, solution.stats)?;
    Ok(BellAnalysis { v_lp, certificate })
}

pub(crate) fn finish_bell_certificate(
    s: &BellScenario,
    mut coefficients: Vec<f64>,
    quantum: &BellBehavior,
    noise: &BellBehavior,
    stats: super::conic::SolverStats,
) -> Result<Certificate> {
    let negated: Vec<f64> = coefficients.iter().map(|c| -c).collect();
    let o = orient(
        bell_local_bound(s, &coefficients)?,
        bell_local_bound(s, &negated)?,
        dot(&coefficients, quantum.probabilities()),
        dot(&coefficients, noise.probabilities()),
    );
    if o.sign < 0.0 {
        coefficients = negated;
    }
    Ok(Certificate {
        kind: CertificateKind::Bell,
        scenario: ScenarioDescriptor::Bell(*s),
        coefficients: Coefficients::Real(coefficients),
        classical_bound: o.bound,
        achieved_value: o.achieved,
        noise_value: o.noise,
        v_critical: o.v,
        solver_stats: stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{cglmp_instance, StateChoice};

    #[test]
    fn pr_box_mixture() {
        // PR box against white noise crosses the CHSH bound at v = 1/2
        let s = BellScenario::symmetric(2, 2).unwrap();
        let pr = BellBehavior::new(
            s,
            BellBehavior::tensor_from_fn(&s, |a, b, x, y| if (a ^ b) == (x & y) { 0.5 } else { 0.0 }),
        )
        .unwrap();
        let family = VisibilityFamily::new(pr, BellBehavior::uniform(s)).unwrap();
        let r = bell_critical_visibility(&family).unwrap();
        assert!((r.v_lp - 0.5).abs() < 1e-7, "{}", r.v_lp);
        assert!((r.certificate.v_critical - 0.5).abs() < 1e-6);
    }

    #[test]
    fn chsh_optimal_state() {
        let inst = cglmp_instance(2, StateChoice::Optimal).unwrap();
        let r = bell_critical_visibility(&inst.family).unwrap();
        assert!((r.v_lp - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6, "{}", r.v_lp);
    }

    #[test]
    fn local_quantum_point_gives_one() {
        let s = BellScenario::symmetric(2, 3).unwrap();
        let det = BellBehavior::deterministic(s, &[0, 2], &[1, 1]).unwrap();
        let family = VisibilityFamily::new(det, BellBehavior::uniform(s)).unwrap();
        let r = bell_critical_visibility(&family).unwrap();
        assert!((r.v_lp - 1.0).abs() < 1e-7);
        assert_eq!(r.certificate.v_critical, 1.0);
    }
}
