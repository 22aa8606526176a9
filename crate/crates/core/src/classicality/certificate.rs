//! Dual certificates (Bell, prepare-and-measure and steering inequalities),
//! their exact classical bounds, JSON form, and independent verification.

use serde::{Deserialize, Serialize};

use super::conic::SolverStats;
use super::strategies::{canonical_encodings, messages_used, strategy_count, write_digits};
use crate::error::{Error, Result};
use crate::qcore::{trace_product, CMatrix, HermitianOperator};
use crate::scenarios::{
    bell_to_nested, nested_to_bell, nested_to_operator, nested_to_pm, operator_to_nested, pm_to_nested, Assemblage,
    BellScenario, CorrelationObject, PmScenario, ScenarioDescriptor, INDEX_CONVENTION,
};

pub const VALUE_TOL: f64 = 1e-7;
pub const BOUND_TOL: f64 = 1e-6;
pub const VISIBILITY_TOL: f64 = 1e-6;
/// Cap on the number of deterministic response functions enumerated.
pub const MAX_STRATEGIES: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Bell,
    Pm,
    Steering,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    /// Indexed like the behavior tensor.
    Real(Vec<f64>),
    /// `operators[x * outcomes + a]`, paired with `sigma_{a|x}` via `tr(F sigma)`.
    Operators(Vec<HermitianOperator>),
}

/// A linear functional `f` with `f(classical) <= classical_bound`, the value
/// it takes on the quantum endpoint and on the noise endpoint, and the
/// visibility at which the family crosses the bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub scenario: ScenarioDescriptor,
    pub coefficients: Coefficients,
    pub classical_bound: f64,
    pub achieved_value: f64,
    pub noise_value: f64,
    pub v_critical: f64,
    pub solver_stats: SolverStats,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub kind: CertificateKind,
    pub scenario: ScenarioDescriptor,
    pub index_convention: String,
    /// Bell: `[x][y][a][b]`; PM: `[x][y][b]`; steering: `[x][a][row][col] = [re, im]`.
    pub coefficients: serde_json::Value,
    pub classical_bound: f64,
    pub achieved_value: f64,
    pub noise_value: f64,
    pub v_critical: f64,
    pub enumeration_order: String,
    pub solver_stats: SolverStats,
}

impl Certificate {
    pub fn violation(&self) -> f64 {
        self.achieved_value - self.classical_bound
    }

    pub fn to_document(&self) -> Result<CertificateDocument> {
        let coefficients = match (&self.coefficients, &self.scenario) {
            (Coefficients::Real(c), ScenarioDescriptor::Bell(s)) => serde_json::to_value(bell_to_nested(s, c))?,
            (Coefficients::Real(c), ScenarioDescriptor::PrepareMeasure { scenario, .. }) => {
                serde_json::to_value(pm_to_nested(scenario, c))?
            }
            (Coefficients::Operators(ops), ScenarioDescriptor::Steering { inputs, outcomes, .. }) => {
                let nested: Vec<Vec<_>> = (0..*inputs)
                    .map(|x| {
                        (0..*outcomes)
                            .map(|a| operator_to_nested(&ops[x * outcomes + a]))
                            .collect()
                    })
                    .collect();
                serde_json::to_value(nested)?
            }
            _ => {
                return Err(Error::ScenarioMismatch(
                    "coefficient type does not match scenario".into(),
                ))
            }
        };
        Ok(CertificateDocument {
            kind: self.kind,
            scenario: self.scenario,
            index_convention: INDEX_CONVENTION.into(),
            coefficients,
            classical_bound: self.classical_bound,
            achieved_value: self.achieved_value,
            noise_value: self.noise_value,
            v_critical: self.v_critical,
            enumeration_order: "lex".into(),
            solver_stats: self.solver_stats.clone(),
        })
    }

    pub fn from_document(doc: &CertificateDocument) -> Result<Self> {
        let coefficients = match (doc.kind, &doc.scenario) {
            (CertificateKind::Bell, ScenarioDescriptor::Bell(s)) => {
                let nested: Vec<Vec<Vec<Vec<f64>>>> = serde_json::from_value(doc.coefficients.clone())?;
                Coefficients::Real(nested_to_bell(s, &nested)?)
            }
            (CertificateKind::Pm, ScenarioDescriptor::PrepareMeasure { scenario, .. }) => {
                let nested: Vec<Vec<Vec<f64>>> = serde_json::from_value(doc.coefficients.clone())?;
                Coefficients::Real(nested_to_pm(scenario, &nested)?)
            }
            (CertificateKind::Steering, ScenarioDescriptor::Steering { inputs, outcomes, dim }) => {
                let nested: Vec<Vec<Vec<Vec<[f64; 2]>>>> = serde_json::from_value(doc.coefficients.clone())?;
                if nested.len() != *inputs || nested.iter().any(|r| r.len() != *outcomes) {
                    return Err(Error::DimensionMismatch("coefficient table shape".into()));
                }
                let ops = nested
                    .iter()
                    .flatten()
                    .map(|rows| nested_to_operator(rows))
                    .collect::<Result<Vec<_>>>()?;
                if ops.iter().any(|o| o.dim() != *dim) {
                    return Err(Error::DimensionMismatch("coefficient operator dimension".into()));
                }
                Coefficients::Operators(ops)
            }
            _ => {
                return Err(Error::ScenarioMismatch(
                    "certificate kind does not match its scenario".into(),
                ))
            }
        };
        if doc.enumeration_order != "lex" {
            return Err(Error::InvalidParameter(format!(
                "unknown enumeration order {}",
                doc.enumeration_order
            )));
        }
        Ok(Self {
            kind: doc.kind,
            scenario: doc.scenario,
            coefficients,
            classical_bound: doc.classical_bound,
            achieved_value: doc.achieved_value,
            noise_value: doc.noise_value,
            v_critical: doc.v_critical,
            solver_stats: doc.solver_stats.clone(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document()?)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CertificateDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `max` of `sum c(a,b,x,y) p(a,b|x,y)` over deterministic local points:
/// Alice's tables are enumerated, Bob best-responds per input.
pub fn bell_local_bound(s: &BellScenario, coefficients: &[f64]) -> Result<f64> {
    let count = strategy_count(s.inputs_a, s.outcomes_a)
        .filter(|&c| c <= MAX_STRATEGIES)
        .ok_or_else(|| Error::TooLarge(format!("{}^{} Alice strategies", s.outcomes_a, s.inputs_a)))?;
    let mut table = vec![0usize; s.inputs_a];
    let mut best = f64::NEG_INFINITY;
    for k in 0..count {
        write_digits(k, s.outcomes_a, &mut table);
        let mut total = 0.0;
        for y in 0..s.inputs_b {
            let mut top = f64::NEG_INFINITY;
            for b in 0..s.outcomes_b {
                let v: f64 = table
                    .iter()
                    .enumerate()
                    .map(|(x, &a)| coefficients[s.index(a, b, x, y)])
                    .sum();
                top = top.max(v);
            }
            total += top;
        }
        best = best.max(total);
    }
    Ok(best)
}

/// Maximum over classical strategies sending one of `message_dimension`
/// messages: canonical encodings, Bob best-responds per `(message, y)`.
pub fn pm_classical_bound(s: &PmScenario, message_dimension: usize, coefficients: &[f64]) -> Result<f64> {
    if message_dimension == 0 {
        return Err(Error::InvalidParameter("message dimension must be >= 1".into()));
    }
    let encodings = canonical_encodings(s.preparations, message_dimension);
    if encodings.len() > MAX_STRATEGIES {
        return Err(Error::TooLarge(format!("{} encodings", encodings.len())));
    }
    let mut best = f64::NEG_INFINITY;
    let mut bucket = vec![0.0; s.outcomes];
    for enc in &encodings {
        let used = messages_used(enc);
        let mut total = 0.0;
        for y in 0..s.settings {
            for m in 0..used {
                bucket.iter_mut().for_each(|v| *v = 0.0);
                for (x, _) in enc.iter().enumerate().filter(|(_, &e)| e == m) {
                    for (b, slot) in bucket.iter_mut().enumerate() {
                        *slot += coefficients[s.index(b, x, y)];
                    }
                }
                total += bucket.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            }
        }
        best = best.max(total);
    }
    Ok(best)
}

/// `max_lambda lambda_max(sum_x F_{lambda(x)|x})` over deterministic
/// response functions.
pub fn steering_lhs_bound(inputs: usize, outcomes: usize, operators: &[HermitianOperator]) -> Result<f64> {
    let count = strategy_count(inputs, outcomes)
        .filter(|&c| c <= MAX_STRATEGIES)
        .ok_or_else(|| Error::TooLarge(format!("{outcomes}^{inputs} response functions")))?;
    let dim = operators
        .first()
        .map(HermitianOperator::dim)
        .ok_or_else(|| Error::InvalidParameter("no operators".into()))?;
    let mut table = vec![0usize; inputs];
    let mut best = f64::NEG_INFINITY;
    for k in 0..count {
        write_digits(k, outcomes, &mut table);
        let mut total = CMatrix::zeros(dim, dim);
        for (x, &a) in table.iter().enumerate() {
            total += operators[x * outcomes + a].matrix();
        }
        best = best.max(HermitianOperator::new(total)?.max_eigenvalue());
    }
    Ok(best)
}

pub fn steering_value(operators: &[HermitianOperator], assemblage: &Assemblage) -> f64 {
    operators
        .iter()
        .zip(assemblage.operators())
        .map(|(f, s)| trace_product(f.matrix(), s.matrix()))
        .sum()
}

/// Chosen sign of a raw dual functional and the resulting numbers.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Orientation {
    pub sign: f64,
    pub bound: f64,
    pub achieved: f64,
    pub noise: f64,
    pub v: f64,
}

/// Visibility at which `v * achieved + (1 - v) * noise` reaches `bound`, or
/// 1 when the quantum endpoint does not exceed it.
pub fn crossing_visibility(bound: f64, achieved: f64, noise: f64) -> f64 {
    if achieved > bound + 1e-12 {
        ((bound - noise) / (achieved - noise)).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

/// The dual functional is only defined up to sign conventions of the
/// solver; pick whichever sign certifies the smaller visibility.
pub(crate) fn orient(bound_pos: f64, bound_neg: f64, achieved: f64, noise: f64) -> Orientation {
    let pos = Orientation {
        sign: 1.0,
        bound: bound_pos,
        achieved,
        noise,
        v: crossing_visibility(bound_pos, achieved, noise),
    };
    let neg = Orientation {
        sign: -1.0,
        bound: bound_neg,
        achieved: -achieved,
        noise: -noise,
        v: crossing_visibility(bound_neg, -achieved, -noise),
    };
    if neg.v < pos.v {
        neg
    } else {
        pos
    }
}

/// Scales real coefficients to unit max-norm.
pub(crate) fn normalize(coefficients: &mut [f64]) -> f64 {
    let scale = coefficients.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    if scale > 0.0 {
        coefficients.iter_mut().for_each(|c| *c /= scale);
    }
    scale
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    /// The object exceeds the classical bound.
    pub violation: bool,
    pub recomputed_value: f64,
    pub recomputed_bound: f64,
    pub value_residual: f64,
    pub bound_residual: f64,
    pub visibility_residual: f64,
    pub messages: Vec<String>,
}

fn check_scenario(cert: &Certificate, object: &CorrelationObject) -> Result<()> {
    let matches = match (&cert.scenario, object.descriptor()) {
        (
            ScenarioDescriptor::PrepareMeasure { scenario, .. },
            ScenarioDescriptor::PrepareMeasure { scenario: other, .. },
        ) => *scenario == other && cert.kind == CertificateKind::Pm,
        (ScenarioDescriptor::Bell(s), ScenarioDescriptor::Bell(o)) => *s == o && cert.kind == CertificateKind::Bell,
        (a @ ScenarioDescriptor::Steering { .. }, b) => *a == b && cert.kind == CertificateKind::Steering,
        _ => false,
    };
    if matches {
        Ok(())
    } else {
        Err(Error::ScenarioMismatch(format!(
            "certificate for {:?} applied to object {:?}",
            cert.scenario,
            object.descriptor()
        )))
    }
}

/// Recomputes the functional value on `object` and the classical bound
/// by exhaustive maximization, and checks both against the certificate.
/// A scenario mismatch is an error; every other defect is a failed report.
pub fn verify_certificate(cert: &Certificate, object: &CorrelationObject) -> Result<VerificationReport> {
    check_scenario(cert, object)?;
    let (value, bound) = match (&cert.coefficients, object, &cert.scenario) {
        (Coefficients::Real(c), CorrelationObject::Bell(p), ScenarioDescriptor::Bell(s)) => {
            (dot(c, p.probabilities()), bell_local_bound(s, c)?)
        }
        (
            Coefficients::Real(c),
            CorrelationObject::PrepareMeasure(p),
            ScenarioDescriptor::PrepareMeasure {
                scenario,
                message_dimension,
            },
        ) => {
            let d = message_dimension
                .ok_or_else(|| Error::ScenarioMismatch("PM certificate without message dimension".into()))?;
            (dot(c, p.probabilities()), pm_classical_bound(scenario, d, c)?)
        }
        (Coefficients::Operators(ops), CorrelationObject::Assemblage(s), _) => (
            steering_value(ops, s),
            steering_lhs_bound(s.inputs(), s.outcomes(), ops)?,
        ),
        _ => return Err(Error::ScenarioMismatch("coefficient type does not match object".into())),
    };
    let mut messages = Vec::new();
    let finite = [
        cert.classical_bound,
        cert.achieved_value,
        cert.noise_value,
        cert.v_critical,
    ]
    .iter()
    .all(|x| x.is_finite());
    if !finite {
        messages.push("non-finite number in certificate".into());
    }
    let value_residual = (value - cert.achieved_value).abs();
    if !(value_residual <= VALUE_TOL * cert.achieved_value.abs().max(1.0)) {
        messages.push(format!(
            "functional evaluates to {value:.12} on the object, certificate claims {:.12}",
            cert.achieved_value
        ));
    }
    let bound_residual = bound - cert.classical_bound;
    let bound_scale = bound.abs().max(1.0);
    if !(bound_residual <= BOUND_TOL * bound_scale) {
        messages.push(format!(
            "classical bound violated: a classical point reaches {bound:.12} > claimed {:.12}",
            cert.classical_bound
        ));
    } else if !(bound_residual >= -BOUND_TOL * bound_scale) {
        messages.push(format!(
            "claimed bound {:.12} is not the classical maximum {bound:.12}",
            cert.classical_bound
        ));
    }
    let expected_v = crossing_visibility(cert.classical_bound, cert.achieved_value, cert.noise_value);
    let visibility_residual = (expected_v - cert.v_critical).abs();
    if !(visibility_residual <= VISIBILITY_TOL) {
        messages.push(format!(
            "v_critical {:.9} inconsistent with bound/value/noise ({expected_v:.9})",
            cert.v_critical
        ));
    }
    if !(0.0..=1.0).contains(&cert.v_critical) {
        messages.push(format!("v_critical {} outside [0, 1]", cert.v_critical));
    }
    Ok(VerificationReport {
        passed: messages.is_empty(),
        violation: value > bound + BOUND_TOL * bound_scale,
        recomputed_value: value,
        recomputed_bound: bound,
        value_residual,
        bound_residual,
        visibility_residual,
        messages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{BellBehavior, PmBehavior};

    #[test]
    fn chsh_local_bound() {
        // CHSH in correlator form: sum_{xy} (-1)^{xy} E_xy, local max 2
        let s = BellScenario::symmetric(2, 2).unwrap();
        let c = BellBehavior::tensor_from_fn(&s, |a, b, x, y| {
            let sign = if x * y == 1 { -1.0 } else { 1.0 };
            let parity = if a == b { 1.0 } else { -1.0 };
            sign * parity
        });
        assert!((bell_local_bound(&s, &c).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn orientation_prefers_violated_sign() {
        let o = orient(1.0, 3.0, -4.0, 0.0);
        assert_eq!(o.sign, -1.0);
        assert!((o.v - 0.75).abs() < 1e-12);
        let o = orient(1.0, 3.0, 0.5, 0.0);
        assert_eq!(o.v, 1.0);
    }

    #[test]
    fn pm_bound_without_communication_is_best_constant() {
        let s = PmScenario::new(2, 1, 2).unwrap();
        // reward b == x
        let c = PmBehavior::tensor_from_fn(&s, |b, x, _| if b == x { 1.0 } else { 0.0 });
        assert_eq!(pm_classical_bound(&s, 1, &c).unwrap(), 1.0);
        assert_eq!(pm_classical_bound(&s, 2, &c).unwrap(), 2.0);
    }
}
