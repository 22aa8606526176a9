//! Scenario descriptors, behavior and assemblage containers, and the
//! binarisation maps into the enlarged click/no-click scenario.
//!
//! Conventions shared by every module and file format:
//!
//! * Binarised inputs are flattened row-major, `x_tilde = x * N + a`.
//! * Binary outcome `0` is the click (`1`), outcome `1` is no-click (`⊥`).
//! * Bell tensors are stored with axes `(x, y, a, b)`, prepare-and-measure
//!   tensors with `(x, y, b)`, assemblage operators with `(x, a)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{CMatrix, HermitianOperator, C64, PSD_FLOOR};

pub const NORMALIZATION_TOL: f64 = 1e-10;
pub const NO_SIGNALING_TOL: f64 = 1e-9;
/// Marginal mismatch beyond which binarisation refuses a Bell behavior.
pub const SIGNALING_REJECT_TOL: f64 = 1e-8;
/// Largest negative eigenvalue of `rho_B - sigma` clipped during binarisation.
pub const COMPLEMENT_CLIP_TOL: f64 = 1e-8;
pub const INDEX_CONVENTION: &str = "x_tilde = x*N + a";

pub const CLICK: usize = 0;
pub const NO_CLICK: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellScenario {
    pub inputs_a: usize,
    pub inputs_b: usize,
    pub outcomes_a: usize,
    pub outcomes_b: usize,
}

impl BellScenario {
    pub fn new(inputs_a: usize, inputs_b: usize, outcomes_a: usize, outcomes_b: usize) -> Result<Self> {
        if inputs_a == 0 || inputs_b == 0 || outcomes_a == 0 || outcomes_b == 0 {
            return Err(Error::InvalidParameter("Bell scenario sizes must be positive".into()));
        }
        Ok(Self {
            inputs_a,
            inputs_b,
            outcomes_a,
            outcomes_b,
        })
    }

    pub fn symmetric(inputs: usize, outcomes: usize) -> Result<Self> {
        Self::new(inputs, inputs, outcomes, outcomes)
    }

    pub fn len(&self) -> usize {
        self.inputs_a * self.inputs_b * self.outcomes_a * self.outcomes_b
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize, x: usize, y: usize) -> usize {
        ((x * self.inputs_b + y) * self.outcomes_a + a) * self.outcomes_b + b
    }

    /// The `(M*N, 2)` scenario reached after both parties binarise.
    pub fn binarised(&self) -> Self {
        Self {
            inputs_a: self.inputs_a * self.outcomes_a,
            inputs_b: self.inputs_b * self.outcomes_b,
            outcomes_a: 2,
            outcomes_b: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PmScenario {
    pub preparations: usize,
    pub settings: usize,
    pub outcomes: usize,
}

impl PmScenario {
    pub fn new(preparations: usize, settings: usize, outcomes: usize) -> Result<Self> {
        if preparations == 0 || settings == 0 || outcomes == 0 {
            return Err(Error::InvalidParameter(
                "prepare-and-measure sizes must be positive".into(),
            ));
        }
        Ok(Self {
            preparations,
            settings,
            outcomes,
        })
    }

    pub fn len(&self) -> usize {
        self.preparations * self.settings * self.outcomes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, b: usize, x: usize, y: usize) -> usize {
        (x * self.settings + y) * self.outcomes + b
    }

    pub fn binarised(&self) -> Self {
        Self {
            preparations: self.preparations,
            settings: self.settings * self.outcomes,
            outcomes: 2,
        }
    }
}

fn check_probability_range(probs: &[f64]) -> Result<()> {
    if let Some(bad) = probs
        .iter()
        .find(|p| !p.is_finite() || **p < -1e-12 || **p > 1.0 + 1e-12)
    {
        return Err(Error::NotNormalized(format!("entry {bad} outside [0, 1]")));
    }
    Ok(())
}

/// `p(a,b|x,y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BellBehavior {
    scenario: BellScenario,
    probs: Vec<f64>,
}

impl BellBehavior {
    /// Validates shape, range and per-context normalization. No-signaling is
    /// checked by the consumers that need it, see [`BellBehavior::signaling_defect`].
    pub fn new(scenario: BellScenario, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != scenario.len() {
            return Err(Error::DimensionMismatch(format!(
                "tensor of length {} for scenario of size {}",
                probs.len(),
                scenario.len()
            )));
        }
        check_probability_range(&probs)?;
        let block = scenario.outcomes_a * scenario.outcomes_b;
        for (context, chunk) in probs.chunks(block).enumerate() {
            let total: f64 = chunk.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::NotNormalized(format!("context {context} sums to {total}")));
            }
        }
        Ok(Self { scenario, probs })
    }

    pub fn tensor_from_fn(scenario: &BellScenario, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Vec<f64> {
        let mut probs = vec![0.0; scenario.len()];
        for x in 0..scenario.inputs_a {
            for y in 0..scenario.inputs_b {
                for a in 0..scenario.outcomes_a {
                    for b in 0..scenario.outcomes_b {
                        probs[scenario.index(a, b, x, y)] = f(a, b, x, y);
                    }
                }
            }
        }
        probs
    }

    pub fn uniform(scenario: BellScenario) -> Self {
        let value = 1.0 / (scenario.outcomes_a * scenario.outcomes_b) as f64;
        Self {
            scenario,
            probs: vec![value; scenario.len()],
        }
    }

    /// Product of deterministic responses `a = alice[x]`, `b = bob[y]`.
    pub fn deterministic(scenario: BellScenario, alice: &[usize], bob: &[usize]) -> Result<Self> {
        if alice.len() != scenario.inputs_a
            || bob.len() != scenario.inputs_b
            || alice.iter().any(|&a| a >= scenario.outcomes_a)
            || bob.iter().any(|&b| b >= scenario.outcomes_b)
        {
            return Err(Error::ScenarioMismatch(
                "response table does not fit the scenario".into(),
            ));
        }
        let probs = Self::tensor_from_fn(
            &scenario,
            |a, b, x, y| {
                if alice[x] == a && bob[y] == b {
                    1.0
                } else {
                    0.0
                }
            },
        );
        Ok(Self { scenario, probs })
    }

    pub fn scenario(&self) -> &BellScenario {
        &self.scenario
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.probs[self.scenario.index(a, b, x, y)]
    }

    fn raw_marginal_a(&self, a: usize, x: usize, y: usize) -> f64 {
        (0..self.scenario.outcomes_b).map(|b| self.get(a, b, x, y)).sum()
    }

    fn raw_marginal_b(&self, b: usize, x: usize, y: usize) -> f64 {
        (0..self.scenario.outcomes_a).map(|a| self.get(a, b, x, y)).sum()
    }

    /// `p_A(a|x)`, averaged over Bob's inputs.
    pub fn marginal_a(&self, a: usize, x: usize) -> f64 {
        let my = self.scenario.inputs_b;
        (0..my).map(|y| self.raw_marginal_a(a, x, y)).sum::<f64>() / my as f64
    }

    /// `p_B(b|y)`, averaged over Alice's inputs.
    pub fn marginal_b(&self, b: usize, y: usize) -> f64 {
        let mx = self.scenario.inputs_a;
        (0..mx).map(|x| self.raw_marginal_b(b, x, y)).sum::<f64>() / mx as f64
    }

    /// Largest spread of a single-party marginal across the other party's inputs.
    pub fn signaling_defect(&self) -> f64 {
        let s = &self.scenario;
        let mut worst = 0.0f64;
        for x in 0..s.inputs_a {
            for a in 0..s.outcomes_a {
                let values = (0..s.inputs_b).map(|y| self.raw_marginal_a(a, x, y));
                worst = worst.max(spread(values));
            }
        }
        for y in 0..s.inputs_b {
            for b in 0..s.outcomes_b {
                let values = (0..s.inputs_a).map(|x| self.raw_marginal_b(b, x, y));
                worst = worst.max(spread(values));
            }
        }
        worst
    }

    pub fn is_no_signaling(&self) -> bool {
        self.signaling_defect() <= NO_SIGNALING_TOL
    }
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

/// `p(b|x,y)` for preparation `x` and measurement setting `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct PmBehavior {
    scenario: PmScenario,
    probs: Vec<f64>,
}

impl PmBehavior {
    pub fn new(scenario: PmScenario, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != scenario.len() {
            return Err(Error::DimensionMismatch(format!(
                "tensor of length {} for scenario of size {}",
                probs.len(),
                scenario.len()
            )));
        }
        check_probability_range(&probs)?;
        for (context, chunk) in probs.chunks(scenario.outcomes).enumerate() {
            let total: f64 = chunk.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::NotNormalized(format!("context {context} sums to {total}")));
            }
        }
        Ok(Self { scenario, probs })
    }

    pub fn tensor_from_fn(scenario: &PmScenario, mut f: impl FnMut(usize, usize, usize) -> f64) -> Vec<f64> {
        let mut probs = vec![0.0; scenario.len()];
        for x in 0..scenario.preparations {
            for y in 0..scenario.settings {
                for b in 0..scenario.outcomes {
                    probs[scenario.index(b, x, y)] = f(b, x, y);
                }
            }
        }
        probs
    }

    pub fn uniform(scenario: PmScenario) -> Self {
        Self {
            scenario,
            probs: vec![1.0 / scenario.outcomes as f64; scenario.len()],
        }
    }

    /// `p(b|x,y) = [b = response(x, y)]`.
    pub fn deterministic(scenario: PmScenario, response: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let probs = Self::tensor_from_fn(&scenario, |b, x, y| if response(x, y) == b { 1.0 } else { 0.0 });
        Self::new(scenario, probs)
    }

    pub fn scenario(&self) -> &PmScenario {
        &self.scenario
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn get(&self, b: usize, x: usize, y: usize) -> f64 {
        self.probs[self.scenario.index(b, x, y)]
    }
}

/// Subnormalized conditional states `sigma_{a|x}` with `rho_B = sum_a sigma_{a|x}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Assemblage {
    inputs: usize,
    outcomes: usize,
    operators: Vec<HermitianOperator>,
    rho_b: HermitianOperator,
}

impl Assemblage {
    /// `operators[x * outcomes + a] = sigma_{a|x}`.
    pub fn new(inputs: usize, outcomes: usize, operators: Vec<HermitianOperator>) -> Result<Self> {
        if inputs == 0 || outcomes == 0 || operators.len() != inputs * outcomes {
            return Err(Error::DimensionMismatch(format!(
                "{} operators for {inputs} inputs x {outcomes} outcomes",
                operators.len()
            )));
        }
        let dim = operators[0].dim();
        let mut checked = Vec::with_capacity(operators.len());
        for op in operators {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch("mixed operator dimensions".into()));
            }
            let min = op.min_eigenvalue();
            if min < PSD_FLOOR {
                return Err(Error::NotPsd(min));
            }
            checked.push(HermitianOperator::from_hermitian_unchecked(op.into_matrix(), true));
        }
        let reduced = |x: usize| {
            let mut total = CMatrix::zeros(dim, dim);
            for a in 0..outcomes {
                total += checked[x * outcomes + a].matrix();
            }
            HermitianOperator::from_hermitian_unchecked(total, true)
        };
        let rho_b = reduced(0);
        for x in 1..inputs {
            let deviation = reduced(x).max_entry_distance(&rho_b);
            if deviation > NO_SIGNALING_TOL {
                return Err(Error::Signaling(deviation));
            }
        }
        let trace = rho_b.trace();
        if (trace - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(format!("rho_B has trace {trace}")));
        }
        Ok(Self {
            inputs,
            outcomes,
            operators: checked,
            rho_b,
        })
    }

    /// Assemblage where Alice's `measurements` act on the first factor of
    /// `state`: `sigma_{a|x} = tr_A[(A_{a|x} (x) 1) rho]`.
    pub fn from_state(
        state: &HermitianOperator,
        measurements: &[crate::qcore::Measurement],
        dim_b: usize,
    ) -> Result<Self> {
        let outcomes = measurements
            .first()
            .map(|m| m.outcomes())
            .ok_or_else(|| Error::InvalidParameter("no measurements".into()))?;
        let mut operators = Vec::with_capacity(measurements.len() * outcomes);
        for m in measurements {
            if m.outcomes() != outcomes {
                return Err(Error::DimensionMismatch(
                    "measurements with different outcome counts".into(),
                ));
            }
            for effect in m.effects() {
                operators.push(state.steered_operator(effect, dim_b)?);
            }
        }
        Self::new(measurements.len(), outcomes, operators)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn dim(&self) -> usize {
        self.rho_b.dim()
    }

    pub fn operators(&self) -> &[HermitianOperator] {
        &self.operators
    }

    pub fn get(&self, a: usize, x: usize) -> &HermitianOperator {
        &self.operators[x * self.outcomes + a]
    }

    pub fn rho_b(&self) -> &HermitianOperator {
        &self.rho_b
    }

    pub fn total_trace(&self) -> f64 {
        self.operators.iter().map(HermitianOperator::trace).sum()
    }
}

/// Two-outcome Bell behavior on inputs `(x, a)`, `(y, b)`.
pub fn binarise_bell(p: &BellBehavior) -> Result<BellBehavior> {
    let defect = p.signaling_defect();
    if defect > SIGNALING_REJECT_TOL {
        return Err(Error::Signaling(defect));
    }
    let s = p.scenario();
    let bin = s.binarised();
    let marg_a: Vec<f64> = (0..s.inputs_a * s.outcomes_a)
        .map(|xt| p.marginal_a(xt % s.outcomes_a, xt / s.outcomes_a))
        .collect();
    let marg_b: Vec<f64> = (0..s.inputs_b * s.outcomes_b)
        .map(|yt| p.marginal_b(yt % s.outcomes_b, yt / s.outcomes_b))
        .collect();
    let probs = BellBehavior::tensor_from_fn(&bin, |ca, cb, xt, yt| {
        let (x, a) = (xt / s.outcomes_a, xt % s.outcomes_a);
        let (y, b) = (yt / s.outcomes_b, yt % s.outcomes_b);
        let joint = p.get(a, b, x, y);
        match (ca, cb) {
            (CLICK, CLICK) => joint,
            (CLICK, _) => marg_a[xt] - joint,
            (_, CLICK) => marg_b[yt] - joint,
            _ => 1.0 - marg_a[xt] - marg_b[yt] + joint,
        }
    });
    BellBehavior::new(bin, probs)
}

/// Click probability `p(b|x,y)` on binary setting `y_tilde = y * N + b`.
pub fn binarise_pm(p: &PmBehavior) -> Result<PmBehavior> {
    let s = p.scenario();
    let bin = s.binarised();
    let probs = PmBehavior::tensor_from_fn(&bin, |click, x, yt| {
        let value = p.get(yt % s.outcomes, x, yt / s.outcomes);
        if click == CLICK {
            value
        } else {
            1.0 - value
        }
    });
    PmBehavior::new(bin, probs)
}

/// `sigma_bin(1|(x,a)) = sigma(a|x)`, `sigma_bin(⊥|(x,a)) = rho_B - sigma(a|x)`.
pub fn binarise_assemblage(s: &Assemblage) -> Result<Assemblage> {
    let mut operators = Vec::with_capacity(2 * s.operators.len());
    for sigma in &s.operators {
        let complement = s.rho_b.sub(sigma)?.floor_to_psd(COMPLEMENT_CLIP_TOL)?;
        operators.push(sigma.clone());
        operators.push(complement);
    }
    Ok(Assemblage {
        inputs: s.inputs * s.outcomes,
        outcomes: 2,
        operators,
        rho_b: s.rho_b.clone(),
    })
}

/// Objects that can be mixed entrywise.
pub trait Mixable: Sized {
    /// `v * self + (1 - v) * other`.
    fn affine(&self, other: &Self, v: f64) -> Result<Self>;
}

impl Mixable for BellBehavior {
    fn affine(&self, other: &Self, v: f64) -> Result<Self> {
        if self.scenario != other.scenario {
            return Err(Error::ScenarioMismatch("endpoints differ in scenario".into()));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(q, n)| v * q + (1.0 - v) * n)
            .collect();
        Ok(Self {
            scenario: self.scenario,
            probs,
        })
    }
}

impl Mixable for PmBehavior {
    fn affine(&self, other: &Self, v: f64) -> Result<Self> {
        if self.scenario != other.scenario {
            return Err(Error::ScenarioMismatch("endpoints differ in scenario".into()));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(q, n)| v * q + (1.0 - v) * n)
            .collect();
        Ok(Self {
            scenario: self.scenario,
            probs,
        })
    }
}

impl Mixable for Assemblage {
    fn affine(&self, other: &Self, v: f64) -> Result<Self> {
        if self.inputs != other.inputs || self.outcomes != other.outcomes || self.dim() != other.dim() {
            return Err(Error::ScenarioMismatch("endpoints differ in shape".into()));
        }
        let operators = self
            .operators
            .iter()
            .zip(&other.operators)
            .map(|(q, n)| q.affine(n, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            inputs: self.inputs,
            outcomes: self.outcomes,
            operators,
            rho_b: self.rho_b.affine(&other.rho_b, v)?,
        })
    }
}

/// `object(v) = v * quantum + (1 - v) * noise`.
#[derive(Clone, Debug, PartialEq)]
pub struct VisibilityFamily<T> {
    quantum: T,
    noise: T,
}

impl<T: Mixable> VisibilityFamily<T> {
    pub fn new(quantum: T, noise: T) -> Result<Self> {
        // shape check
        quantum.affine(&noise, 0.5)?;
        Ok(Self { quantum, noise })
    }

    pub fn quantum(&self) -> &T {
        &self.quantum
    }

    pub fn noise(&self) -> &T {
        &self.noise
    }

    pub fn at(&self, v: f64) -> Result<T> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("visibility {v} outside [0, 1]")));
        }
        self.quantum.affine(&self.noise, v)
    }

    /// Applies `f` to both endpoints.
    pub fn map<U: Mixable>(&self, f: impl Fn(&T) -> Result<U>) -> Result<VisibilityFamily<U>> {
        VisibilityFamily::new(f(&self.quantum)?, f(&self.noise)?)
    }
}

pub fn family_at<T: Mixable>(family: &VisibilityFamily<T>, v: f64) -> Result<T> {
    family.at(v)
}

// ---------------------------------------------------------------------------
// JSON documents

type ComplexEntry = [f64; 2];

fn matrix_to_nested(m: &CMatrix) -> Vec<Vec<ComplexEntry>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn nested_to_matrix(rows: &[Vec<ComplexEntry>]) -> Result<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("operator rows are ragged".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

pub(crate) fn operator_to_nested(op: &HermitianOperator) -> Vec<Vec<ComplexEntry>> {
    matrix_to_nested(op.matrix())
}

pub(crate) fn nested_to_operator(rows: &[Vec<ComplexEntry>]) -> Result<HermitianOperator> {
    HermitianOperator::new(nested_to_matrix(rows)?)
}

pub(crate) fn bell_to_nested(s: &BellScenario, flat: &[f64]) -> Vec<Vec<Vec<Vec<f64>>>> {
    (0..s.inputs_a)
        .map(|x| {
            (0..s.inputs_b)
                .map(|y| {
                    (0..s.outcomes_a)
                        .map(|a| (0..s.outcomes_b).map(|b| flat[s.index(a, b, x, y)]).collect())
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub(crate) fn nested_to_bell(s: &BellScenario, tensor: &[Vec<Vec<Vec<f64>>>]) -> Result<Vec<f64>> {
    let shape_err = || Error::DimensionMismatch("tensor shape does not match scenario".into());
    if tensor.len() != s.inputs_a {
        return Err(shape_err());
    }
    let mut flat = vec![0.0; s.len()];
    for (x, tx) in tensor.iter().enumerate() {
        if tx.len() != s.inputs_b {
            return Err(shape_err());
        }
        for (y, ty) in tx.iter().enumerate() {
            if ty.len() != s.outcomes_a {
                return Err(shape_err());
            }
            for (a, ta) in ty.iter().enumerate() {
                if ta.len() != s.outcomes_b {
                    return Err(shape_err());
                }
                for (b, &value) in ta.iter().enumerate() {
                    flat[s.index(a, b, x, y)] = value;
                }
            }
        }
    }
    Ok(flat)
}

pub(crate) fn pm_to_nested(s: &PmScenario, flat: &[f64]) -> Vec<Vec<Vec<f64>>> {
    (0..s.preparations)
        .map(|x| {
            (0..s.settings)
                .map(|y| (0..s.outcomes).map(|b| flat[s.index(b, x, y)]).collect())
                .collect()
        })
        .collect()
}

pub(crate) fn nested_to_pm(s: &PmScenario, tensor: &[Vec<Vec<f64>>]) -> Result<Vec<f64>> {
    let shape_err = || Error::DimensionMismatch("tensor shape does not match scenario".into());
    if tensor.len() != s.preparations {
        return Err(shape_err());
    }
    let mut flat = vec![0.0; s.len()];
    for (x, tx) in tensor.iter().enumerate() {
        if tx.len() != s.settings {
            return Err(shape_err());
        }
        for (y, ty) in tx.iter().enumerate() {
            if ty.len() != s.outcomes {
                return Err(shape_err());
            }
            for (b, &value) in ty.iter().enumerate() {
                flat[s.index(b, x, y)] = value;
            }
        }
    }
    Ok(flat)
}

/// Scenario block shared by object and certificate documents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScenarioDescriptor {
    Bell(BellScenario),
    PrepareMeasure {
        #[serde(flatten)]
        scenario: PmScenario,
        /// Classical message alphabet, present on certificates.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        message_dimension: Option<usize>,
    },
    Steering {
        inputs: usize,
        outcomes: usize,
        dim: usize,
    },
}

/// On-disk form of a behavior or assemblage.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectDocument {
    Bell {
        scenario: BellScenario,
        index_convention: String,
        /// `tensor[x][y][a][b]`
        tensor: Vec<Vec<Vec<Vec<f64>>>>,
    },
    PrepareMeasure {
        scenario: PmScenario,
        index_convention: String,
        /// `tensor[x][y][b]`
        tensor: Vec<Vec<Vec<f64>>>,
    },
    Assemblage {
        inputs: usize,
        outcomes: usize,
        dim: usize,
        index_convention: String,
        /// `operators[x][a][row][col] = [re, im]`
        operators: Vec<Vec<Vec<Vec<ComplexEntry>>>>,
    },
}

/// A deserialized object.
#[derive(Clone, Debug, PartialEq)]
pub enum CorrelationObject {
    Bell(BellBehavior),
    PrepareMeasure(PmBehavior),
    Assemblage(Assemblage),
}

impl CorrelationObject {
    pub fn descriptor(&self) -> ScenarioDescriptor {
        match self {
            Self::Bell(p) => ScenarioDescriptor::Bell(*p.scenario()),
            Self::PrepareMeasure(p) => ScenarioDescriptor::PrepareMeasure {
                scenario: *p.scenario(),
                message_dimension: None,
            },
            Self::Assemblage(s) => ScenarioDescriptor::Steering {
                inputs: s.inputs(),
                outcomes: s.outcomes(),
                dim: s.dim(),
            },
        }
    }

    pub fn to_document(&self) -> ObjectDocument {
        match self {
            Self::Bell(p) => ObjectDocument::Bell {
                scenario: *p.scenario(),
                index_convention: INDEX_CONVENTION.into(),
                tensor: bell_to_nested(p.scenario(), p.probabilities()),
            },
            Self::PrepareMeasure(p) => ObjectDocument::PrepareMeasure {
                scenario: *p.scenario(),
                index_convention: INDEX_CONVENTION.into(),
                tensor: pm_to_nested(p.scenario(), p.probabilities()),
            },
            Self::Assemblage(s) => ObjectDocument::Assemblage {
                inputs: s.inputs(),
                outcomes: s.outcomes(),
                dim: s.dim(),
                index_convention: INDEX_CONVENTION.into(),
                operators: (0..s.inputs())
                    .map(|x| (0..s.outcomes()).map(|a| operator_to_nested(s.get(a, x))).collect())
                    .collect(),
            },
        }
    }

    pub fn from_document(doc: &ObjectDocument) -> Result<Self> {
        match doc {
            ObjectDocument::Bell { scenario, tensor, .. } => Ok(Self::Bell(BellBehavior::new(
                *scenario,
                nested_to_bell(scenario, tensor)?,
            )?)),
            ObjectDocument::PrepareMeasure { scenario, tensor, .. } => Ok(Self::PrepareMeasure(PmBehavior::new(
                *scenario,
                nested_to_pm(scenario, tensor)?,
            )?)),
            ObjectDocument::Assemblage {
                inputs,
                outcomes,
                dim,
                operators,
                ..
            } => {
                if operators.len() != *inputs || operators.iter().any(|o| o.len() != *outcomes) {
                    return Err(Error::DimensionMismatch("operator table shape".into()));
                }
                let ops = operators
                    .iter()
                    .flatten()
                    .map(|rows| nested_to_operator(rows))
                    .collect::<Result<Vec<_>>>()?;
                if ops.iter().any(|o| o.dim() != *dim) {
                    return Err(Error::DimensionMismatch("operator dimension".into()));
                }
                Ok(Self::Assemblage(Assemblage::new(*inputs, *outcomes, ops)?))
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ObjectDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{born_bipartite, haar_random_basis, maximally_entangled, Measurement};

    fn perfectly_correlated() -> BellBehavior {
        let s = BellScenario::symmetric(2, 2).unwrap();
        let probs = BellBehavior::tensor_from_fn(&s, |a, b, x, y| {
            if x == y {
                if a == b {
                    0.5
                } else {
                    0.0
                }
            } else {
                0.25
            }
        });
        BellBehavior::new(s, probs).unwrap()
    }

    #[test]
    fn uniform_binarises_to_product_of_flat_marginals() {
        for n in 2..5 {
            let p = BellBehavior::uniform(BellScenario::symmetric(2, n).unwrap());
            let bin = binarise_bell(&p).unwrap();
            let nf = n as f64;
            for xt in 0..2 * n {
                for yt in 0..2 * n {
                    assert!((bin.get(CLICK, CLICK, xt, yt) - 1.0 / (nf * nf)).abs() < 1e-15);
                    let one_sided = 1.0 / nf - 1.0 / (nf * nf);
                    assert!((bin.get(CLICK, NO_CLICK, xt, yt) - one_sided).abs() < 1e-15);
                    assert!((bin.get(NO_CLICK, CLICK, xt, yt) - one_sided).abs() < 1e-15);
                    let none = (1.0 - 1.0 / nf).powi(2);
                    assert!((bin.get(NO_CLICK, NO_CLICK, xt, yt) - none).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn perfectly_correlated_binarisation() {
        let bin = binarise_bell(&perfectly_correlated()).unwrap();
        for x in 0..2 {
            let (xt, yt) = (x * 2, x * 2);
            assert_eq!(bin.get(CLICK, CLICK, xt, yt), 0.5);
            assert_eq!(bin.get(CLICK, NO_CLICK, xt, yt), 0.0);
            assert_eq!(bin.get(NO_CLICK, NO_CLICK, xt, yt), 0.5);
        }
    }

    #[test]
    fn signaling_input_is_rejected() {
        let s = BellScenario::symmetric(2, 2).unwrap();
        // Alice's outcome copies Bob's input.
        let probs = BellBehavior::tensor_from_fn(&s, |a, b, _x, y| if a == y && b == 0 { 1.0 } else { 0.0 });
        let p = BellBehavior::new(s, probs).unwrap();
        assert!(matches!(binarise_bell(&p), Err(Error::Signaling(_))));
    }

    #[test]
    fn binarised_pm_of_deterministic_is_point() {
        let s = PmScenario::new(4, 2, 3).unwrap();
        let f = |x: usize, y: usize| (x + y) % 3;
        let p = PmBehavior::deterministic(s, f).unwrap();
        let bin = binarise_pm(&p).unwrap();
        for x in 0..4 {
            for y in 0..2 {
                for b in 0..3 {
                    let expected = if b == f(x, y) { 1.0 } else { 0.0 };
                    assert_eq!(bin.get(CLICK, x, y * 3 + b), expected);
                    assert_eq!(bin.get(NO_CLICK, x, y * 3 + b), 1.0 - expected);
                }
            }
        }
        let u = binarise_pm(&PmBehavior::uniform(s)).unwrap();
        assert!(u
            .probabilities()
            .chunks(2)
            .all(|c| (c[CLICK] - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn flat_assemblage_binarisation() {
        let n = 3;
        let dim = 2;
        let rho = HermitianOperator::maximally_mixed(dim);
        let ops = vec![rho.scale(1.0 / n as f64); 2 * n];
        let s = Assemblage::new(2, n, ops).unwrap();
        let bin = binarise_assemblage(&s).unwrap();
        assert_eq!(bin.inputs(), 2 * n);
        let click = HermitianOperator::identity(dim).scale(1.0 / (n * dim) as f64);
        let none = HermitianOperator::identity(dim).scale((1.0 - 1.0 / n as f64) / dim as f64);
        for xt in 0..2 * n {
            assert!(bin.get(CLICK, xt).max_entry_distance(&click) < 1e-15);
            assert!(bin.get(NO_CLICK, xt).max_entry_distance(&none) < 1e-15);
        }
    }

    #[test]
    fn phi_plus_assemblage_binarises_to_rank_one_clicks() {
        let state = maximally_entangled(2);
        let s = Assemblage::from_state(&state, &[Measurement::computational(2)], 2).unwrap();
        let bin = binarise_assemblage(&s).unwrap();
        for xt in 0..2 {
            let click = bin.get(CLICK, xt);
            assert!((click.trace() - 0.5).abs() < 1e-12);
            let ev = click.eigenvalues();
            assert!(ev[0].abs() < 1e-12 && (ev[1] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn malformed_complement_is_rejected() {
        let rho = HermitianOperator::maximally_mixed(2);
        let bad = Assemblage {
            inputs: 1,
            outcomes: 1,
            operators: vec![rho.scale(1.5)],
            rho_b: rho,
        };
        assert!(matches!(binarise_assemblage(&bad), Err(Error::NotPsd(_))));
    }

    #[test]
    fn family_endpoints_and_midpoint() {
        let s = BellScenario::symmetric(1, 2).unwrap();
        let q = BellBehavior::new(s, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let n = BellBehavior::new(s, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let f = VisibilityFamily::new(q.clone(), n.clone()).unwrap();
        assert_eq!(family_at(&f, 1.0).unwrap(), q);
        assert_eq!(family_at(&f, 0.0).unwrap(), n);
        let mid = family_at(&f, 0.5).unwrap();
        for (m, e) in mid.probabilities().iter().zip([0.3, 0.1, 0.15, 0.45]) {
            assert!((m - e).abs() < 1e-15);
        }
        assert!(family_at(&f, 1.5).is_err());
        assert!(family_at(&f, -0.1).is_err());
    }

    #[test]
    fn documents_round_trip_bit_exactly() {
        let state = maximally_entangled(2);
        let alice = [haar_random_basis(2, 1), haar_random_basis(2, 2)];
        let bob = [haar_random_basis(2, 3), haar_random_basis(2, 4)];
        let p = born_bipartite(&state, &alice, &bob).unwrap();
        let obj = CorrelationObject::Bell(p);
        let back = CorrelationObject::from_json(&obj.to_json().unwrap()).unwrap();
        assert_eq!(obj, back);

        let s = Assemblage::from_state(&state, &alice, 2).unwrap();
        let obj = CorrelationObject::Assemblage(s);
        let back = CorrelationObject::from_json(&obj.to_json().unwrap()).unwrap();
        let (CorrelationObject::Assemblage(a), CorrelationObject::Assemblage(b)) = (&obj, &back) else {
            panic!("kind changed");
        };
        for (x, y) in a.operators().iter().zip(b.operators()) {
            assert_eq!(x.matrix(), y.matrix());
        }
    }
}
