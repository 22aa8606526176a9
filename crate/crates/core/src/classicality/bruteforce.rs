//! Reference membership tests over the full set of joint deterministic
//! strategies, solved with the dense simplex in [`super::simplex`]. They
//! are slow and exist to cross-check the efficient formulations.

use super::simplex::{cone_feasibility, Feasibility};
use super::strategies::{strategy_count, write_digits};
use crate::error::{Error, Result};
use crate::scenarios::{BellBehavior, Mixable, PmBehavior, VisibilityFamily};

/// Cap on joint deterministic strategies.
pub const MAX_JOINT_STRATEGIES: usize = 1_000_000;
/// Cap on the dense tableau size (rows times columns).
const MAX_TABLEAU: usize = 50_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Membership {
    /// Convex weights over the joint deterministic points, in enumeration order.
    Classical(Vec<f64>),
    /// Functional `f` with `f . d <= 0` on every deterministic point and
    /// `f . p > 0`, indexed like the behavior tensor.
    Nonclassical(Vec<f64>),
}

impl Membership {
    pub fn is_classical(&self) -> bool {
        matches!(self, Membership::Classical(_))
    }
}

fn decide(columns: Vec<Vec<f64>>, target: &[f64]) -> Result<Membership> {
    if columns.len() * target.len() > MAX_TABLEAU {
        return Err(Error::TooLarge(format!("{} x {} tableau", target.len(), columns.len())));
    }
    Ok(match cone_feasibility(&columns, target) {
        Feasibility::Feasible(w) => Membership::Classical(w),
        Feasibility::Infeasible(y) => Membership::Nonclassical(y),
    })
}

/// Deterministic points `D(a|x) D(b|y)` for every pair of response tables,
/// Alice's table most significant.
pub fn bell_deterministic_points(p: &BellBehavior) -> Result<Vec<Vec<f64>>> {
    let s = *p.scenario();
    let count_a = strategy_count(s.inputs_a, s.outcomes_a);
    let count_b = strategy_count(s.inputs_b, s.outcomes_b);
    let (ca, cb) = match (count_a, count_b) {
        (Some(a), Some(b)) if a.checked_mul(b).is_some_and(|t| t <= MAX_JOINT_STRATEGIES) => (a, b),
        _ => return Err(Error::TooLarge("joint strategy count exceeds 10^6".into())),
    };
    let mut ta = vec![0; s.inputs_a];
    let mut tb = vec![0; s.inputs_b];
    let mut points = Vec::with_capacity(ca * cb);
    for i in 0..ca {
        write_digits(i, s.outcomes_a, &mut ta);
        for j in 0..cb {
            write_digits(j, s.outcomes_b, &mut tb);
            let mut point = vec![0.0; s.len()];
            for x in 0..s.inputs_a {
                for y in 0..s.inputs_b {
                    point[s.index(ta[x], tb[y], x, y)] = 1.0;
                }
            }
            points.push(point);
        }
    }
    Ok(points)
}

/// Whether `p` is a convex mixture of deterministic local points. Each point
/// satisfies normalization per `(x, y)`, so no separate weight row is needed.
pub fn bell_membership_bruteforce(p: &BellBehavior) -> Result<Membership> {
    decide(bell_deterministic_points(p)?, p.probabilities())
}

/// Deterministic classical PM points: every (unreduced) encoding
/// `x -> m < d` composed with every decoder `(m, y) -> b`.
pub fn pm_deterministic_points(p: &PmBehavior, message_dimension: usize) -> Result<Vec<Vec<f64>>> {
    let s = *p.scenario();
    let d = message_dimension;
    if d == 0 {
        return Err(Error::InvalidParameter("message dimension must be >= 1".into()));
    }
    let encoders = strategy_count(s.preparations, d);
    let decoders = strategy_count(d * s.settings, s.outcomes);
    let (ce, cd) = match (encoders, decoders) {
        (Some(e), Some(c)) if e.checked_mul(c).is_some_and(|t| t <= MAX_JOINT_STRATEGIES) => (e, c),
        _ => return Err(Error::TooLarge("joint strategy count exceeds 10^6".into())),
    };
    let mut enc = vec![0; s.preparations];
    let mut dec = vec![0; d * s.settings];
    let mut points = Vec::with_capacity(ce * cd);
    for i in 0..ce {
        write_digits(i, d, &mut enc);
        for j in 0..cd {
            write_digits(j, s.outcomes, &mut dec);
            let mut point = vec![0.0; s.len()];
            for x in 0..s.preparations {
                for y in 0..s.settings {
                    point[s.index(dec[enc[x] * s.settings + y], x, y)] = 1.0;
                }
            }
            points.push(point);
        }
    }
    Ok(points)
}

pub fn pm_membership_bruteforce(p: &PmBehavior, message_dimension: usize) -> Result<Membership> {
    decide(pm_deterministic_points(p, message_dimension)?, p.probabilities())
}

/// Largest `v` with a classical family member, by bisection to `tolerance`.
/// The noise endpoint must be classical.
pub fn bisect_visibility<T: Mixable>(
    family: &VisibilityFamily<T>,
    tolerance: f64,
    mut is_classical: impl FnMut(&T) -> Result<bool>,
) -> Result<f64> {
    if !is_classical(family.noise())? {
        return Err(Error::NoiseNotClassical);
    }
    if is_classical(family.quantum())? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if is_classical(&family.at(mid)?)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn bell_bruteforce_visibility(family: &VisibilityFamily<BellBehavior>, tolerance: f64) -> Result<f64> {
    let points = bell_deterministic_points(family.quantum())?;
    bisect_visibility(family, tolerance, |p| {
        if points.len() * p.probabilities().len() > MAX_TABLEAU {
            return Err(Error::TooLarge("tableau".into()));
        }
        Ok(matches!(
            cone_feasibility(&points, p.probabilities()),
            Feasibility::Feasible(_)
        ))
    })
}

pub fn pm_bruteforce_visibility(
    family: &VisibilityFamily<PmBehavior>,
    message_dimension: usize,
    tolerance: f64,
) -> Result<f64> {
    let points = pm_deterministic_points(family.quantum(), message_dimension)?;
    bisect_visibility(family, tolerance, |p| {
        if points.len() * p.probabilities().len() > MAX_TABLEAU {
            return Err(Error::TooLarge("tableau".into()));
        }
        Ok(matches!(
            cone_feasibility(&points, p.probabilities()),
            Feasibility::Feasible(_)
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{cglmp_instance, StateChoice};
    use crate::scenarios::BellScenario;

    #[test]
    fn chsh_optimum_is_nonlocal_with_tsirelson_ratio() {
        let inst = cglmp_instance(2, StateChoice::Optimal).unwrap();
        let p = inst.family.quantum();
        let Membership::Nonclassical(y) = bell_membership_bruteforce(p).unwrap() else {
            panic!("CHSH optimum must be nonlocal");
        };
        let points = bell_deterministic_points(p).unwrap();
        let value: f64 = y.iter().zip(p.probabilities()).map(|(a, b)| a * b).sum();
        assert!(value > 1e-6);
        for d in &points {
            assert!(y.iter().zip(d).map(|(a, b)| a * b).sum::<f64>() <= 1e-9);
        }
    }

    #[test]
    fn mixtures_of_deterministic_points_are_local() {
        let s = BellScenario::symmetric(2, 2).unwrap();
        let d1 = BellBehavior::deterministic(s, &[0, 1], &[1, 1]).unwrap();
        let d2 = BellBehavior::deterministic(s, &[1, 1], &[0, 1]).unwrap();
        let mix = d1.affine(&d2, 0.3).unwrap();
        assert!(bell_membership_bruteforce(&mix).unwrap().is_classical());
    }
}
