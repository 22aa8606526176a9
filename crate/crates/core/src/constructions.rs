//! Concrete quantum instances: CGLMP states and measurements, random access
//! codes, mutually unbiased bases and random steering assemblages, each
//! packaged as a white-noise [`VisibilityFamily`].

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{
    born_bipartite, born_prepare_measure, haar_random_basis_with, haar_random_state_with, haar_random_unitary,
    maximally_entangled, schmidt_state, seeded_rng, CMatrix, CVector, HermitianOperator, Measurement, C64,
};
use crate::scenarios::{Assemblage, BellBehavior, PmBehavior, VisibilityFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateChoice {
    /// Schmidt coefficients minimizing the CGLMP expression.
    Optimal,
    #[serde(rename = "maxent")]
    MaximallyEntangled,
}

/// Phase offsets of the Fourier bases. Alice: `exp(2 pi i j (a + alpha_x)/N)`,
/// Bob: `exp(-2 pi i j (b + beta_y)/N)`.
pub const ALICE_PHASES: [f64; 2] = [0.0, 0.5];
pub const BOB_PHASES: [f64; 2] = [-0.25, 0.25];

#[derive(Clone, Debug)]
pub struct CglmpInstance {
    pub n: usize,
    pub state_choice: StateChoice,
    /// Normalized Schmidt coefficients of the state in the `|jj>` basis.
    pub schmidt: Vec<C64>,
    pub state: HermitianOperator,
    pub alice: Vec<Measurement>,
    pub bob: Vec<Measurement>,
    pub family: VisibilityFamily<BellBehavior>,
}

fn fourier_basis(n: usize, offset: f64, sign: f64) -> CMatrix {
    let norm = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |j, k| {
        let phase = sign * 2.0 * PI * j as f64 * (k as f64 + offset) / n as f64;
        C64::from_polar(norm, phase)
    })
}

pub fn cglmp_measurements(n: usize) -> (Vec<Measurement>, Vec<Measurement>) {
    let alice = ALICE_PHASES
        .iter()
        .map(|&alpha| Measurement::from_basis(&fourier_basis(n, alpha, 1.0)).expect("unitary"))
        .collect();
    let bob = BOB_PHASES
        .iter()
        .map(|&beta| Measurement::from_basis(&fourier_basis(n, beta, -1.0)).expect("unitary"))
        .collect();
    (alice, bob)
}

/// `(x, y, strict)` terms: `P(A_2<B_2) + P(B_2<A_1) + P(A_1<B_1) + P(B_1<=A_2)`.
/// `alice_smaller` selects `A < B` versus `B < A` (or `B <= A` when not strict).
const CGLMP_TERMS: [(usize, usize, bool, bool); 4] = [
    (1, 1, true, true),
    (0, 1, false, true),
    (0, 0, true, true),
    (1, 0, false, false),
];

fn cglmp_indicator(n: usize) -> impl Fn(usize, usize, usize, usize) -> f64 {
    move |a, b, x, y| {
        debug_assert!(a < n && b < n);
        CGLMP_TERMS
            .iter()
            .filter(|&&(tx, ty, alice_smaller, strict)| {
                tx == x
                    && ty == y
                    && match (alice_smaller, strict) {
                        (true, _) => a < b,
                        (false, true) => b < a,
                        (false, false) => b <= a,
                    }
            })
            .count() as f64
    }
}

/// Left-hand side of the CGLMP inequality; local models give at least 1.
pub fn cglmp_value(p: &BellBehavior) -> Result<f64> {
    let s = p.scenario();
    if s.inputs_a != 2 || s.inputs_b != 2 || s.outcomes_a != s.outcomes_b {
        return Err(Error::ScenarioMismatch(format!(
            "CGLMP needs 2 inputs and equal outcome counts per party, got {s:?}"
        )));
    }
    let n = s.outcomes_a;
    let coeff = cglmp_indicator(n);
    let mut total = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..n {
                for b in 0..n {
                    total += coeff(a, b, x, y) * p.get(a, b, x, y);
                }
            }
        }
    }
    Ok(total)
}

/// The CGLMP operator `sum coeff * A_a|x (x) B_b|y` restricted to the span
/// of `{|jj>}`, as an `n x n` Hermitian matrix.
fn cglmp_schmidt_operator(alice: &[Measurement], bob: &[Measurement], n: usize) -> CMatrix {
    let coeff = cglmp_indicator(n);
    let mut out = CMatrix::zeros(n, n);
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..n {
                for b in 0..n {
                    let c = coeff(a, b, x, y);
                    if c == 0.0 {
                        continue;
                    }
                    let ea = alice[x].effect(a).matrix();
                    let eb = bob[y].effect(b).matrix();
                    for j in 0..n {
                        for k in 0..n {
                            out[(j, k)] += ea[(j, k)] * eb[(j, k)] * c;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Schmidt vector minimizing the CGLMP expression for the fixed Fourier
/// measurements: the lowest eigenvector of the Bell operator restricted to
/// `span{|jj>}`, with the global phase fixed so the first entry is real
/// and nonnegative.
pub fn cglmp_optimal_schmidt(n: usize) -> Vec<C64> {
    let (alice, bob) = cglmp_measurements(n);
    let op =
        HermitianOperator::new(cglmp_schmidt_operator(&alice, &bob, n)).expect("restricted Bell operator is Hermitian");
    let (values, vectors) = op.eigen();
    let (best, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty spectrum");
    let column: Vec<C64> = vectors.column(best).iter().copied().collect();
    let anchor = column
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("nonzero vector");
    let phase = anchor.conj() / anchor.norm();
    let mut coefficients: Vec<C64> = column.iter().map(|c| c * phase).collect();
    let first_phase = if coefficients[0].norm() > 1e-12 {
        coefficients[0].conj() / coefficients[0].norm()
    } else {
        C64::new(1.0, 0.0)
    };
    for c in &mut coefficients {
        *c *= first_phase;
    }
    coefficients
}

pub fn cglmp_instance(n: usize, state_choice: StateChoice) -> Result<CglmpInstance> {
    if !(2..=8).contains(&n) {
        return Err(Error::InvalidParameter(format!("CGLMP dimension {n} outside 2..=8")));
    }
    let (alice, bob) = cglmp_measurements(n);
    let schmidt = match state_choice {
        StateChoice::Optimal => cglmp_optimal_schmidt(n),
        StateChoice::MaximallyEntangled => {
            vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n]
        }
    };
    let state = match state_choice {
        StateChoice::Optimal => schmidt_state(&schmidt)?,
        StateChoice::MaximallyEntangled => maximally_entangled(n),
    };
    let quantum = born_bipartite(&state, &alice, &bob)?;
    let noise = born_bipartite(&HermitianOperator::maximally_mixed(n * n), &alice, &bob)?;
    Ok(CglmpInstance {
        n,
        state_choice,
        schmidt,
        state,
        alice,
        bob,
        family: VisibilityFamily::new(quantum, noise)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeesawConfig {
    pub restarts: usize,
    /// Stop a restart once an iteration improves by less than this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
    /// Accepted distance from the known optimum.
    pub acceptance: f64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            tolerance: 1e-9,
            max_iterations: 2000,
            seed: 0,
            acceptance: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RacInstance {
    pub d: usize,
    /// `preparations[x1 * d + x2]`.
    pub preparations: Vec<HermitianOperator>,
    pub measurements: Vec<Measurement>,
    pub success: f64,
    pub family: VisibilityFamily<PmBehavior>,
}

/// `1/2 + 1/(2 sqrt d)`.
pub fn rac_quantum_optimum(d: usize) -> f64 {
    0.5 + 0.5 / (d as f64).sqrt()
}

/// `1/2 + 1/(2d)`.
pub fn rac_classical_bound(d: usize) -> f64 {
    0.5 + 0.5 / d as f64
}

fn rac_symbol(x: usize, y: usize, d: usize) -> usize {
    if y == 0 {
        x / d
    } else {
        x % d
    }
}

/// Average success probability `(1/2d^2) sum_{x,y} p(b = x_y | x, y)`.
pub fn rac_success(p: &PmBehavior) -> Result<f64> {
    let s = p.scenario();
    let d = s.outcomes;
    if s.settings != 2 || s.preparations != d * d {
        return Err(Error::ScenarioMismatch(format!(
            "RAC needs d^2 preparations, 2 settings and d outcomes, got {s:?}"
        )));
    }
    let mut total = 0.0;
    for x in 0..d * d {
        for y in 0..2 {
            total += p.get(rac_symbol(x, y, d), x, y);
        }
    }
    Ok(total / (2 * d * d) as f64)
}

fn rac_score(states: &[CVector], bases: &[CMatrix], d: usize) -> f64 {
    let mut total = 0.0;
    for (x, psi) in states.iter().enumerate() {
        for (y, basis) in bases.iter().enumerate() {
            let e = basis.column(rac_symbol(x, y, d));
            total += e.dotc(psi).norm_sqr();
        }
    }
    total / (2 * d * d) as f64
}

fn best_states(bases: &[CMatrix], d: usize) -> Vec<CVector> {
    (0..d * d)
        .map(|x| {
            let mut op = CMatrix::zeros(d, d);
            for (y, basis) in bases.iter().enumerate() {
                let e = basis.column(rac_symbol(x, y, d));
                op += &e * e.adjoint();
            }
            let (values, vectors) = HermitianOperator::new(op).expect("sum of projectors").eigen();
            let top = values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .expect("nonempty");
            vectors.column(top).into_owned()
        })
        .collect()
}

/// One ascent step on `sum_b <u_b|O_b|u_b>`: the polar factor of
/// `[O_0 u_0, ..., O_{d-1} u_{d-1}]`.
fn improve_basis(basis: &CMatrix, states: &[CVector], y: usize, d: usize) -> CMatrix {
    let mut g = CMatrix::zeros(d, d);
    for b in 0..d {
        let u = basis.column(b);
        let mut col = CVector::zeros(d);
        for (x, psi) in states.iter().enumerate() {
            if rac_symbol(x, y, d) == b {
                col += psi * psi.dotc(&u);
            }
        }
        g.set_column(b, &col);
    }
    let svd = g.svd(true, true);
    svd.u.expect("requested") * svd.v_t.expect("requested")
}

fn seesaw_run<R: Rng + ?Sized>(rng: &mut R, d: usize, config: &SeesawConfig) -> (f64, Vec<CVector>, Vec<CMatrix>) {
    let mut bases: Vec<CMatrix> = (0..2).map(|_| haar_random_unitary(rng, d)).collect();
    let mut states = best_states(&bases, d);
    let mut score = rac_score(&states, &bases, d);
    for _ in 0..config.max_iterations {
        for y in 0..2 {
            bases[y] = improve_basis(&bases[y], &states, y, d);
        }
        states = best_states(&bases, d);
        let next = rac_score(&states, &bases, d);
        let step = next - score;
        score = next;
        if step.abs() < config.tolerance {
            break;
        }
    }
    (score, states, bases)
}

/// Random access code instance found by seesaw from random starts.
pub fn rac_instance(d: usize, config: &SeesawConfig) -> Result<RacInstance> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("RAC dimension {d} < 2")));
    }
    let target = rac_quantum_optimum(d);
    let mut rng = seeded_rng(config.seed);
    let mut best: Option<(f64, Vec<CVector>, Vec<CMatrix>)> = None;
    for _ in 0..config.restarts.max(1) {
        let run = seesaw_run(&mut rng, d, config);
        if best.as_ref().is_none_or(|b| run.0 > b.0) {
            best = Some(run);
        }
        if best.as_ref().is_some_and(|b| (target - b.0).abs() < config.tolerance) {
            break;
        }
    }
    let (score, states, bases) = best.expect("at least one restart");
    if (score - target).abs() > config.acceptance {
        return Err(Error::SeesawFailed {
            best: score,
            target,
            restarts: config.restarts,
        });
    }
    let preparations = states
        .iter()
        .map(HermitianOperator::projector)
        .collect::<Result<Vec<_>>>()?;
    let measurements = bases.iter().map(Measurement::from_basis).collect::<Result<Vec<_>>>()?;
    let quantum = born_prepare_measure(&preparations, &measurements)?;
    let mixed = vec![HermitianOperator::maximally_mixed(d); d * d];
    let noise = born_prepare_measure(&mixed, &measurements)?;
    let success = rac_success(&quantum)?;
    Ok(RacInstance {
        d,
        preparations,
        measurements,
        success,
        family: VisibilityFamily::new(quantum, noise)?,
    })
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| n % p != 0)
}

/// Mutually unbiased bases in prime dimension.
#[derive(Clone, Debug)]
pub struct MubSet {
    pub d: usize,
    /// Unitary matrices whose columns are the basis vectors.
    pub bases: Vec<CMatrix>,
}

impl MubSet {
    /// Computational basis followed by the quadratic-phase Fourier bases
    /// `|e_j^(m)> = d^{-1/2} sum_t w^{m t^2 + j t} |t>`, `m = 0..d-1`, with
    /// `w = exp(2 pi i / d)` (for `d = 2` the quadratic phase is `i^{m t^2}`).
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if !is_prime(d) {
            return Err(Error::InvalidParameter(format!(
                "MUB construction needs prime dimension, got {d}"
            )));
        }
        if k < 2 || k > d + 1 {
            return Err(Error::InvalidParameter(format!(
                "number of bases {k} outside 2..={}",
                d + 1
            )));
        }
        let norm = 1.0 / (d as f64).sqrt();
        let mut bases = vec![CMatrix::identity(d, d)];
        for m in 0..k - 1 {
            bases.push(CMatrix::from_fn(d, d, |t, j| {
                let (t, j, m) = (t as f64, j as f64, m as f64);
                let quadratic = if d == 2 {
                    PI * m * t * t / 2.0
                } else {
                    2.0 * PI * m * t * t / d as f64
                };
                C64::from_polar(norm, quadratic + 2.0 * PI * j * t / d as f64)
            }));
        }
        Ok(Self { d, bases })
    }

    /// Largest `| |<e_i|f_j>|^2 - 1/d |` over pairs of distinct bases.
    pub fn unbiasedness_defect(&self) -> f64 {
        let target = 1.0 / self.d as f64;
        let mut worst = 0.0f64;
        for (m, u) in self.bases.iter().enumerate() {
            for v in &self.bases[m + 1..] {
                let overlaps = u.adjoint() * v;
                for z in overlaps.iter() {
                    worst = worst.max((z.norm_sqr() - target).abs());
                }
            }
        }
        worst
    }

    pub fn measurements(&self) -> Vec<Measurement> {
        self.bases
            .iter()
            .map(|b| Measurement::from_basis(b).expect("unitary"))
            .collect()
    }
}

/// Assemblage family where Alice measures on the first factor of `state`
/// and the noise endpoint replaces `state` by the maximally mixed state.
pub fn steering_family(
    state: &HermitianOperator,
    measurements: &[Measurement],
) -> Result<VisibilityFamily<Assemblage>> {
    let dim_a = measurements
        .first()
        .map(Measurement::dim)
        .ok_or_else(|| Error::InvalidParameter("no measurements".into()))?;
    if state.dim() % dim_a != 0 {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} not divisible by {dim_a}",
            state.dim()
        )));
    }
    let dim_b = state.dim() / dim_a;
    let quantum = Assemblage::from_state(state, measurements, dim_b)?;
    let noise = Assemblage::from_state(&HermitianOperator::maximally_mixed(state.dim()), measurements, dim_b)?;
    VisibilityFamily::new(quantum, noise)
}

pub fn mub_assemblage(d: usize, k: usize, state: &HermitianOperator) -> Result<VisibilityFamily<Assemblage>> {
    let mubs = MubSet::new(d, k)?;
    if state.dim() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "state of dim {} for two qudits of dim {d}",
            state.dim()
        )));
    }
    steering_family(state, &mubs.measurements())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum StateModel {
    /// Haar-random pure state on `d x d`.
    Pure,
    /// Induced-measure mixed state of the given rank.
    Mixed { rank: usize },
}

/// Random bipartite state and `n_meas` independent Haar-random bases for
/// Alice. The state is drawn first, then the bases, from one ChaCha20 stream.
pub fn random_steering_instance(
    d: usize,
    n_meas: usize,
    seed: u64,
    model: StateModel,
) -> Result<VisibilityFamily<Assemblage>> {
    if d < 2 || n_meas < 2 {
        return Err(Error::InvalidParameter(format!(
            "need d >= 2 and n_meas >= 2, got d={d}, n_meas={n_meas}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let rank = match model {
        StateModel::Pure => 1,
        StateModel::Mixed { rank } => rank,
    };
    let state = haar_random_state_with(&mut rng, d * d, rank)?;
    let measurements: Vec<Measurement> = (0..n_meas).map(|_| haar_random_basis_with(&mut rng, d)).collect();
    steering_family(&state, &measurements)
}

/// Two parties with `inputs` Haar-random bases each on a state
/// `sum_j c_j |jj>` with `c_j^2` proportional to uniform draws from
/// `[1/2, 1]`, against white noise. Local unitaries on the state are
/// absorbed by the random bases.
pub fn random_bell_family(d: usize, inputs: usize, seed: u64) -> Result<VisibilityFamily<BellBehavior>> {
    if d < 2 || inputs < 1 {
        return Err(Error::InvalidParameter(format!(
            "need d >= 2 and inputs >= 1, got d={d}, inputs={inputs}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let weights: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let schmidt: Vec<C64> = weights.iter().map(|w| C64::new((w / total).sqrt(), 0.0)).collect();
    let state = schmidt_state(&schmidt)?;
    let alice: Vec<Measurement> = (0..inputs).map(|_| haar_random_basis_with(&mut rng, d)).collect();
    let bob: Vec<Measurement> = (0..inputs).map(|_| haar_random_basis_with(&mut rng, d)).collect();
    let quantum = born_bipartite(&state, &alice, &bob)?;
    let noise = born_bipartite(&HermitianOperator::maximally_mixed(d * d), &alice, &bob)?;
    VisibilityFamily::new(quantum, noise)
}

/// Haar-random pure preparations and basis measurements in dimension `d`,
/// against maximally mixed preparations.
pub fn random_pm_family(
    d: usize,
    preparations: usize,
    settings: usize,
    seed: u64,
) -> Result<VisibilityFamily<PmBehavior>> {
    if d < 2 || preparations < 1 || settings < 1 {
        return Err(Error::InvalidParameter("need d >= 2 and nonempty alphabets".into()));
    }
    let mut rng = seeded_rng(seed);
    let states = (0..preparations)
        .map(|_| haar_random_state_with(&mut rng, d, 1))
        .collect::<Result<Vec<_>>>()?;
    let measurements: Vec<Measurement> = (0..settings).map(|_| haar_random_basis_with(&mut rng, d)).collect();
    let quantum = born_prepare_measure(&states, &measurements)?;
    let mixed = vec![HermitianOperator::maximally_mixed(d); preparations];
    let noise = born_prepare_measure(&mixed, &measurements)?;
    VisibilityFamily::new(quantum, noise)
}

/// Reproducibility record written next to exported instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceManifest {
    pub construction: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub software_version: String,
}

impl InstanceManifest {
    pub fn new(construction: &str, parameters: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            construction: construction.into(),
            parameters,
            seed,
            software_version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::BellScenario;

    #[test]
    fn uniform_cglmp_value_counts_outcome_pairs() {
        for n in 2..6 {
            let p = BellBehavior::uniform(BellScenario::symmetric(2, n).unwrap());
            // oracle: count pairs with a<b, b<a, b<=a
            let (mut strict, mut weak) = (0usize, 0usize);
            for a in 0..n {
                for b in 0..n {
                    strict += usize::from(a < b);
                    weak += usize::from(b <= a);
                }
            }
            let expected = (3 * strict + weak) as f64 / (n * n) as f64;
            assert!((cglmp_value(&p).unwrap() - expected).abs() < 1e-14);
        }
        let p = BellBehavior::uniform(BellScenario::symmetric(2, 2).unwrap());
        assert!((cglmp_value(&p).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn all_zero_deterministic_point_is_tight() {
        let s = BellScenario::symmetric(2, 4).unwrap();
        let p = BellBehavior::deterministic(s, &[0, 0], &[0, 0]).unwrap();
        assert_eq!(cglmp_value(&p).unwrap(), 1.0);
    }

    #[test]
    fn cglmp_rejects_wrong_scenario() {
        let p = BellBehavior::uniform(BellScenario::symmetric(3, 2).unwrap());
        assert!(matches!(cglmp_value(&p), Err(Error::ScenarioMismatch(_))));
    }

    #[test]
    fn cglmp_unsupported_dimension() {
        assert!(cglmp_instance(1, StateChoice::Optimal).is_err());
        assert!(cglmp_instance(9, StateChoice::Optimal).is_err());
    }

    #[test]
    fn noise_endpoint_is_uniform() {
        for n in [2, 3, 5] {
            let inst = cglmp_instance(n, StateChoice::Optimal).unwrap();
            let expected = 1.0 / (n * n) as f64;
            assert!(inst
                .family
                .noise()
                .probabilities()
                .iter()
                .all(|p| (p - expected).abs() < 1e-12));
        }
    }

    #[test]
    fn mub_set_is_unbiased() {
        for d in [2, 3, 5, 7] {
            let mubs = MubSet::new(d, d + 1).unwrap();
            assert!(mubs.unbiasedness_defect() < 1e-10, "d={d}");
            for b in &mubs.bases {
                let err = (b.adjoint() * b - CMatrix::identity(d, d)).norm();
                assert!(err < 1e-10);
            }
        }
        assert!(MubSet::new(4, 2).is_err());
        assert!(MubSet::new(3, 5).is_err());
        assert!(MubSet::new(3, 1).is_err());
    }

    #[test]
    fn maximally_entangled_mub_assemblage() {
        let f = mub_assemblage(3, 2, &maximally_entangled(3)).unwrap();
        let s = f.quantum();
        assert!(s.rho_b().max_entry_distance(&HermitianOperator::maximally_mixed(3)) < 1e-12);
        for op in s.operators() {
            assert!((op.trace() - 1.0 / 3.0).abs() < 1e-12);
            let ev = op.eigenvalues();
            assert!(ev[..2].iter().all(|e| e.abs() < 1e-12));
        }
    }

    #[test]
    fn random_instances_are_reproducible() {
        let a = random_steering_instance(3, 2, 11, StateModel::Pure).unwrap();
        let b = random_steering_instance(3, 2, 11, StateModel::Pure).unwrap();
        assert_eq!(a, b);
        let c = random_steering_instance(3, 2, 12, StateModel::Pure).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn families_valid_at_sample_points() {
        let f = random_steering_instance(3, 3, 5, StateModel::Mixed { rank: 2 }).unwrap();
        for v in [0.0, 0.5, 1.0] {
            let s = f.at(v).unwrap();
            let rebuilt = Assemblage::new(s.inputs(), s.outcomes(), s.operators().to_vec()).unwrap();
            assert!((rebuilt.rho_b().trace() - 1.0).abs() < 1e-10);
        }
        let inst = cglmp_instance(3, StateChoice::Optimal).unwrap();
        for v in [0.0, 0.5, 1.0] {
            let p = inst.family.at(v).unwrap();
            BellBehavior::new(*p.scenario(), p.probabilities().to_vec()).unwrap();
            assert!(p.is_no_signaling());
        }
    }

    #[test]
    fn rac_success_of_constant_guess_is_one_over_d() {
        let d = 3;
        let s = crate::scenarios::PmScenario::new(d * d, 2, d).unwrap();
        let p = PmBehavior::deterministic(s, |_, _| 0).unwrap();
        assert!((rac_success(&p).unwrap() - 1.0 / d as f64).abs() < 1e-15);
        let q = PmBehavior::uniform(s);
        assert!((rac_success(&q).unwrap() - 1.0 / d as f64).abs() < 1e-15);
    }
}
