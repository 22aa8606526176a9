//! Dense two-phase-style feasibility simplex with Bland's rule. Used only by
//! the brute-force membership oracles, so it shares no code with the
//! interior-point path it cross-checks.

const PIVOT_EPS: f64 = 1e-11;
const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    /// Nonnegative weights with `sum_j w_j columns[j] = rhs`.
    Feasible(Vec<f64>),
    /// `y` with `y . columns[j] <= 0` for every `j` and `y . rhs > 0`.
    Infeasible(Vec<f64>),
}

/// Decides whether `rhs` lies in the cone spanned by `columns` by
/// minimizing the sum of artificial variables.
pub fn cone_feasibility(columns: &[Vec<f64>], rhs: &[f64]) -> Feasibility {
    let m = rhs.len();
    let n = columns.len();
    let width = n + m + 1;
    let sign: Vec<f64> = rhs.iter().map(|&r| if r < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut t = vec![0.0; m * width];
    for i in 0..m {
        let row = &mut t[i * width..(i + 1) * width];
        for (j, col) in columns.iter().enumerate() {
            row[j] = sign[i] * col[i];
        }
        row[n + i] = 1.0;
        row[width - 1] = sign[i] * rhs[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // reduced costs of min sum(artificials)
    let mut cost = vec![0.0; width];
    for i in 0..m {
        for j in 0..width {
            if j < n || j == width - 1 {
                cost[j] -= t[i * width + j];
            }
        }
    }

    loop {
        let Some(enter) = (0..n + m).find(|&j| cost[j] < -PIVOT_EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i * width + enter];
            if a > PIVOT_EPS {
                let ratio = t[i * width + width - 1] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((pivot_row, _)) = leave else {
            // unbounded direction cannot occur: objective bounded below by 0
            break;
        };
        pivot(&mut t, &mut cost, width, m, pivot_row, enter);
        basis[pivot_row] = enter;
    }

    let objective = -cost[width - 1];
    let scale = 1.0 + rhs.iter().map(|r| r.abs()).sum::<f64>();
    if objective <= FEASIBILITY_TOL * scale {
        let mut weights = vec![0.0; n];
        for (i, &bi) in basis.iter().enumerate() {
            if bi < n {
                weights[bi] = t[i * width + width - 1].max(0.0);
            }
        }
        Feasibility::Feasible(weights)
    } else {
        // y_i = 1 - reduced cost of artificial i, in the sign-flipped rows
        let y = (0..m).map(|i| sign[i] * (1.0 - cost[n + i])).collect();
        Feasibility::Infeasible(y)
    }
}

fn pivot(t: &mut [f64], cost: &mut [f64], width: usize, m: usize, r: usize, c: usize) {
    let p = t[r * width + c];
    for j in 0..width {
        t[r * width + j] /= p;
    }
    let pivot_row: Vec<f64> = t[r * width..(r + 1) * width].to_vec();
    for i in 0..m {
        if i == r {
            continue;
        }
        let f = t[i * width + c];
        if f != 0.0 {
            for j in 0..width {
                t[i * width + j] -= f * pivot_row[j];
            }
        }
    }
    let f = cost[c];
    if f != 0.0 {
        for j in 0..width {
            cost[j] -= f * pivot_row[j];
        }
    }
}
