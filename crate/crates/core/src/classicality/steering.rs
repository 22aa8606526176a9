//! Local-hidden-state SDP for assemblages.
//!
//! Each deterministic response function `lambda` carries a PSD operator
//! `tau[lambda]`, stored as `d^2` real coordinates in the orthonormal
//! Hermitian basis of [`hermitian_basis`]. Positivity is imposed on the
//! real embedding `[[Re, -Im], [Im, Re]]`.

use num_complex::Complex64;

use super::certificate::{orient, steering_lhs_bound, steering_value, Certificate, CertificateKind, Coefficients};
use super::conic::{triangle_index, triangle_len, ConicProgram, SolveOptions};
use super::strategies::{strategy_count, write_digits};
use crate::error::{Error, Result};
use crate::qcore::{trace_product, CMatrix, HermitianOperator};
use crate::scenarios::{Assemblage, ScenarioDescriptor, VisibilityFamily};

/// Upper limit on the number of hidden states.
pub const MAX_HIDDEN_STATES: usize = 100_000;

#[derive(Clone, Debug)]
pub struct SteeringAnalysis {
    pub v_lp: f64,
    pub certificate: Certificate,
}

/// `E_jj` for each `j`, then `(E_jl + E_lj)/sqrt 2` and
/// `i (E_jl - E_lj)/sqrt 2` for each `j < l`, in row-major pair order.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(d * d);
    for j in 0..d {
        let mut m = CMatrix::zeros(d, d);
        m[(j, j)] = Complex64::new(1.0, 0.0);
        basis.push(m);
    }
    for j in 0..d {
        for l in j + 1..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, l)] = Complex64::new(h, 0.0);
            m[(l, j)] = Complex64::new(h, 0.0);
            basis.push(m);
        }
    }
    for j in 0..d {
        for l in j + 1..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, l)] = Complex64::new(0.0, h);
            m[(l, j)] = Complex64::new(0.0, -h);
            basis.push(m);
        }
    }
    basis
}

fn coordinates(basis: &[CMatrix], op: &HermitianOperator) -> Vec<f64> {
    basis.iter().map(|b| trace_product(b, op.matrix())).collect()
}

/// Packed upper triangle of the real embedding of `b`, with off-diagonal
/// slots scaled by `sqrt 2`.
fn embedded_triangle(b: &CMatrix) -> Vec<f64> {
    let d = b.nrows();
    let side = 2 * d;
    let entry = |r: usize, c: usize| -> f64 {
        let z = b[(r % d, c % d)];
        match (r < d, c < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    };
    let mut out = vec![0.0; triangle_len(side)];
    for c in 0..side {
        for r in 0..=c {
            let scale = if r == c { 1.0 } else { std::f64::consts::SQRT_2 };
            out[triangle_index(r, c)] = scale * entry(r, c);
        }
    }
    out
}

fn check_family(family: &VisibilityFamily<Assemblage>) -> Result<(usize, usize, usize)> {
    let (q, n) = (family.quantum(), family.noise());
    let shape = (q.inputs(), q.outcomes(), q.dim());
    if shape != (n.inputs(), n.outcomes(), n.dim()) {
        return Err(Error::ScenarioMismatch(
            "quantum and noise assemblages differ in shape".into(),
        ));
    }
    Ok(shape)
}

pub fn steering_critical_visibility(family: &VisibilityFamily<Assemblage>) -> Result<SteeringAnalysis> {
    steering_critical_visibility_with(family, &SolveOptions::default())
}

pub fn steering_critical_visibility_with(
    family: &VisibilityFamily<Assemblage>,
    options: &SolveOptions,
) -> Result<SteeringAnalysis> {
    let (inputs, outcomes, d) = check_family(family)?;
    let hidden = strategy_count(inputs, outcomes)
        .filter(|&c| c <= MAX_HIDDEN_STATES)
        .ok_or_else(|| Error::TooLarge(format!("{outcomes}^{inputs} hidden states")))?;
    let basis = hermitian_basis(d);
    let dd = basis.len();
    let t_col = |l: usize, k: usize| 1 + l * dd + k;
    let mut sdp = ConicProgram::new(1 + hidden * dd);
    sdp.set_objective(0, -1.0);

    let tables: Vec<Vec<usize>> = (0..hidden)
        .map(|k| {
            let mut t = vec![0; inputs];
            write_digits(k, outcomes, &mut t);
            t
        })
        .collect();
    let (quantum, noise) = (family.quantum(), family.noise());
    for x in 0..inputs {
        for a in 0..outcomes - 1 {
            let qc = coordinates(&basis, quantum.get(a, x));
            let nc = coordinates(&basis, noise.get(a, x));
            for k in 0..dd {
                let entries = std::iter::once((0, -(qc[k] - nc[k])))
                    .chain((0..hidden).filter(|&l| tables[l][x] == a).map(|l| (t_col(l, k), 1.0)));
                sdp.add_eq(entries, nc[k]);
            }
        }
    }
    let rho_row = sdp.eq_rows();
    let qc = coordinates(&basis, quantum.rho_b());
    let nc = coordinates(&basis, noise.rho_b());
    for k in 0..dd {
        let entries = std::iter::once((0, -(qc[k] - nc[k]))).chain((0..hidden).map(|l| (t_col(l, k), 1.0)));
        sdp.add_eq(entries, nc[k]);
    }
    sdp.add_le([(0, 1.0)], 1.0);

    let triangles: Vec<Vec<f64>> = basis.iter().map(embedded_triangle).collect();
    let slots = triangle_len(2 * d);
    for l in 0..hidden {
        let entries = (0..slots)
            .map(|slot| {
                (0..dd)
                    .filter(|&k| triangles[k][slot] != 0.0)
                    .map(|k| (t_col(l, k), triangles[k][slot]))
                    .collect()
            })
            .collect();
        sdp.add_psd(2 * d, entries);
    }

    let solution = sdp.solve(options)?;
    let y = &solution.eq_duals;
    let combine = |weights: &[f64]| -> CMatrix {
        let mut m = CMatrix::zeros(d, d);
        for (b, &w) in basis.iter().zip(weights) {
            m += b * Complex64::new(w, 0.0);
        }
        m
    };
    let rho_term = combine(&y[rho_row..rho_row + dd]);
    let mut matrices = Vec::with_capacity(inputs * outcomes);
    for x in 0..inputs {
        for a in 0..outcomes {
            let mut m = if a < outcomes - 1 {
                let row = (x * (outcomes - 1) + a) * dd;
                combine(&y[row..row + dd])
            } else {
                CMatrix::zeros(d, d)
            };
            if x == 0 {
                m += &rho_term;
            }
            matrices.push(m);
        }
    }
    let scale = matrices
        .iter()
        .flat_map(|m| m.iter().map(|z| z.norm()))
        .fold(0.0f64, f64::max);
    let operators = matrices
        .into_iter()
        .map(|m| {
            let m = if scale > 0.0 { m / Complex64::new(scale, 0.0) } else { m };
            HermitianOperator::new(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let negated: Vec<HermitianOperator> = operators.iter().map(|f| f.scale(-1.0)).collect();
    let o = orient(
        steering_lhs_bound(inputs, outcomes, &operators)?,
        steering_lhs_bound(inputs, outcomes, &negated)?,
        steering_value(&operators, quantum),
        steering_value(&operators, noise),
    );
    let operators = if o.sign < 0.0 { negated } else { operators };
    Ok(SteeringAnalysis {
        v_lp: solution.x[0],
        certificate: Certificate {
            kind: CertificateKind::Steering,
            scenario: ScenarioDescriptor::Steering {
                inputs,
                outcomes,
                dim: d,
            },
            coefficients: Coefficients::Operators(operators),
            classical_bound: o.bound,
            achieved_value: o.achieved,
            noise_value: o.noise,
            v_critical: o.v,
            solver_stats: solution.stats,
        },
    })
}
