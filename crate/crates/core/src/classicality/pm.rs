//! Classical-model LP for prepare-and-measure behaviors with bounded
//! message dimension.
//!
//! Alice's encodings `x -> m` are enumerated up to message relabeling
//! (restricted growth strings). For each encoding `lambda` with weight
//! `w[lambda]`, Bob answers message `m` on setting `y` with unnormalized
//! probabilities `r[lambda][m][y][b]`, the last outcome taking the slack.

use super::certificate::{dot, normalize, orient, pm_classical_bound, Certificate, CertificateKind, Coefficients};
use super::conic::{ConicProgram, SolveOptions, SolverStats};
use super::strategies::{canonical_encodings, messages_used};
use crate::error::{Error, Result};
use crate::scenarios::{PmBehavior, PmScenario, ScenarioDescriptor, VisibilityFamily, CLICK};

/// Upper limit on the number of canonical encodings.
pub const MAX_ENCODINGS: usize = 200_000;

#[derive(Clone, Debug)]
pub struct PmAnalysis {
    pub v_lp: f64,
    pub certificate: Certificate,
}

pub fn pm_critical_visibility(family: &VisibilityFamily<PmBehavior>, message_dimension: usize) -> Result<PmAnalysis> {
    pm_critical_visibility_with(family, message_dimension, &SolveOptions::default())
}

pub fn pm_critical_visibility_with(
    family: &VisibilityFamily<PmBehavior>,
    message_dimension: usize,
    options: &SolveOptions,
) -> Result<PmAnalysis> {
    let s = *family.quantum().scenario();
    if *family.noise().scenario() != s {
        return Err(Error::ScenarioMismatch("quantum and noise scenarios differ".into()));
    }
    if message_dimension == 0 {
        return Err(Error::InvalidParameter("message dimension must be >= 1".into()));
    }
    let encodings = canonical_encodings(s.preparations, message_dimension);
    if encodings.len() > MAX_ENCODINGS {
        return Err(Error::TooLarge(format!("{} encodings", encodings.len())));
    }
    let free = s.outcomes - 1;
    // column offsets of each encoding's response block
    let mut offsets = Vec::with_capacity(encodings.len());
    let mut next = 1 + encodings.len();
    for enc in &encodings {
        offsets.push(next);
        next += messages_used(enc) * s.settings * free;
    }
    let r_col = |l: usize, m: usize, y: usize, b: usize| offsets[l] + (m * s.settings + y) * free + b;
    let mut lp = ConicProgram::new(next);
    lp.set_objective(0, -1.0);

    let (quantum, noise) = (family.quantum(), family.noise());
    lp.add_eq((0..encodings.len()).map(|l| (1 + l, 1.0)), 1.0);
    let mut rows = Vec::new();
    for x in 0..s.preparations {
        for y in 0..s.settings {
            for b in 0..free {
                let n = noise.get(b, x, y);
                let delta = quantum.get(b, x, y) - n;
                let entries = std::iter::once((0, -delta)).chain(
                    encodings
                        .iter()
                        .enumerate()
                        .map(|(l, enc)| (r_col(l, enc[x], y, b), 1.0)),
                );
                lp.add_eq(entries, n);
                rows.push((b, x, y));
            }
        }
    }
    for (l, enc) in encodings.iter().enumerate() {
        if free == 0 {
            lp.add_le([(1 + l, -1.0)], 0.0);
            continue;
        }
        for m in 0..messages_used(enc) {
            for y in 0..s.settings {
                for b in 0..free {
                    lp.add_le([(r_col(l, m, y, b), -1.0)], 0.0);
                }
                let sum = (0..free)
                    .map(|b| (r_col(l, m, y, b), 1.0))
                    .chain(std::iter::once((1 + l, -1.0)));
                lp.add_le(sum, 0.0);
            }
        }
    }
    lp.add_le([(0, 1.0)], 1.0);

    let solution = lp.solve(options)?;
    let mut coefficients = vec![0.0; s.len()];
    let duals = &solution.eq_duals;
    for b in 0..s.outcomes {
        coefficients[s.index(b, 0, 0)] += duals[0];
    }
    for (&(b, x, y), &w) in rows.iter().zip(&duals[1..]) {
        coefficients[s.index(b, x, y)] += w;
    }
    normalize(&mut coefficients);
    let certificate = finish_pm_certificate(&s, message_dimension, coefficients, quantum, noise, solution.stats)?;
    Ok(PmAnalysis {
        v_lp: solution.x[0],
        certificate,
    })
}

pub(crate) fn finish_pm_certificate(
    s: &PmScenario,
    message_dimension: usize,
    mut coefficients: Vec<f64>,
    quantum: &PmBehavior,
    noise: &PmBehavior,
    stats: SolverStats,
) -> Result<Certificate> {
    let negated: Vec<f64> = coefficients.iter().map(|c| -c).collect();
    let o = orient(
        pm_classical_bound(s, message_dimension, &coefficients)?,
        pm_classical_bound(s, message_dimension, &negated)?,
        dot(&coefficients, quantum.probabilities()),
        dot(&coefficients, noise.probabilities()),
    );
    if o.sign < 0.0 {
        coefficients = negated;
    }
    Ok(Certificate {
        kind: CertificateKind::Pm,
        scenario: ScenarioDescriptor::PrepareMeasure {
            scenario: *s,
            message_dimension: Some(message_dimension),
        },
        coefficients: Coefficients::Real(coefficients),
        classical_bound: o.bound,
        achieved_value: o.achieved,
        noise_value: o.noise,
        v_critical: o.v,
        solver_stats: stats,
    })
}

/// Largest `v` admitting an input-independent model, i.e. the `d = 1`
/// value in closed form: `v * delta(b|x,y) + noise(b|x,y)` must not depend
/// on `x`.
pub fn pm_no_communication_visibility(family: &VisibilityFamily<PmBehavior>) -> Result<f64> {
    let s = *family.quantum().scenario();
    let (q, n) = (family.quantum(), family.noise());
    let mut interval = (0.0f64, 1.0f64);
    for y in 0..s.settings {
        for b in 0..s.outcomes {
            for x in 1..s.preparations {
                // (n_x - n_0) + v (d_x - d_0) = 0
                let dn = n.get(b, x, y) - n.get(b, 0, y);
                let dd = (q.get(b, x, y) - n.get(b, x, y)) - (q.get(b, 0, y) - n.get(b, 0, y));
                if dd.abs() < 1e-12 {
                    if dn.abs() > 1e-12 {
                        return Err(Error::NoiseNotClassical);
                    }
                    continue;
                }
                let root = -dn / dd;
                interval = (interval.0.max(root), interval.1.min(root));
            }
        }
    }
    if interval.0 > interval.1 + 1e-9 {
        return Err(Error::NoiseNotClassical);
    }
    Ok(interval.1)
}

fn rac_symbol(x: usize, y: usize, d: usize) -> usize {
    if y == 0 {
        x / d
    } else {
        x % d
    }
}

/// Integer weights of the binarised RAC witness: `+8` for a click on the
/// correct port, `-5` for a click on any other port, `0` for no click.
/// Dividing by 8 gives the witness with classical bound 9 at `d = 3`.
pub fn rac_binarised_witness_integer(d: usize) -> Vec<i64> {
    let s = PmScenario::new(d * d, 2, d).expect("d >= 1").binarised();
    let mut c = vec![0i64; s.len()];
    for x in 0..d * d {
        for y in 0..2 {
            for b in 0..d {
                c[s.index(CLICK, x, y * d + b)] = if b == rac_symbol(x, y, d) { 8 } else { -5 };
            }
        }
    }
    c
}

pub fn rac_binarised_witness(d: usize) -> Vec<f64> {
    rac_binarised_witness_integer(d)
        .into_iter()
        .map(|c| c as f64 / 8.0)
        .collect()
}

pub fn rac_binarised_witness_value(p: &PmBehavior) -> Result<f64> {
    let s = *p.scenario();
    let d = s.settings / 2;
    if s.outcomes != 2 || s.settings != 2 * d || s.preparations != d * d || d == 0 {
        return Err(Error::ScenarioMismatch(format!("not a binarised RAC scenario: {s:?}")));
    }
    Ok(dot(&rac_binarised_witness(d), p.probabilities()))
}

/// Exact maximum of the integer witness over deterministic classical
/// strategies with `d`-dimensional messages. Bob clicks on a port exactly
/// when the summed weight of the preparations sharing a message is positive.
pub fn rac_binarised_witness_classical_max(d: usize) -> i64 {
    let s = PmScenario::new(d * d, 2, d).expect("d >= 1").binarised();
    let c = rac_binarised_witness_integer(d);
    let mut best = i64::MIN;
    for enc in canonical_encodings(d * d, d) {
        let mut total = 0i64;
        for m in 0..messages_used(&enc) {
            for yt in 0..s.settings {
                let sum: i64 = (0..d * d)
                    .filter(|&x| enc[x] == m)
                    .map(|x| c[s.index(CLICK, x, yt)])
                    .sum();
                total += sum.max(0);
            }
        }
        best = best.max(total);
    }
    best
}
