//! Dense complex linear algebra for the small Hilbert spaces used here
//! (at most a few dozen dimensions): Hermitian operators, measurements,
//! binarised click banks, Born-rule evaluation and Haar sampling.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scenarios::{BellBehavior, BellScenario, PmBehavior, PmScenario};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest tolerated anti-Hermitian entry before construction is rejected.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Eigenvalue floor for the PSD check.
pub const PSD_FLOOR: f64 = -1e-9;
/// Entrywise tolerance for `sum of effects = identity`.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Tolerance on unit trace of states fed into the Born rule.
pub const TRACE_TOL: f64 = 1e-9;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    psd: bool,
}

impl HermitianOperator {
    /// Symmetrizes `matrix` as `(A + A^dagger)/2`. Fails if the discarded
    /// anti-Hermitian part exceeds [`HERMITIAN_TOL`].
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let adjoint = matrix.adjoint();
        let anti = max_abs(&((&matrix - &adjoint) * C64::new(0.5, 0.0)));
        if anti > HERMITIAN_TOL {
            return Err(Error::NotHermitian(anti));
        }
        let matrix = (&matrix + adjoint) * C64::new(0.5, 0.0);
        Ok(Self { matrix, psd: false })
    }

    /// Like [`HermitianOperator::new`] but also requires the minimum
    /// eigenvalue to be at least [`PSD_FLOOR`].
    pub fn new_psd(matrix: CMatrix) -> Result<Self> {
        let mut op = Self::new(matrix)?;
        let min = op.min_eigenvalue();
        if min < PSD_FLOOR {
            return Err(Error::NotPsd(min));
        }
        op.psd = true;
        Ok(op)
    }

    pub(crate) fn from_hermitian_unchecked(matrix: CMatrix, psd: bool) -> Self {
        Self { matrix, psd }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
            psd: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
            psd: true,
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::identity(dim).scale(1.0 / dim as f64)
    }

    /// Rank-one projector onto `vector`, normalized first.
    pub fn projector(vector: &CVector) -> Result<Self> {
        let norm = vector.norm();
        if norm < 1e-14 {
            return Err(Error::InvalidParameter("projector onto zero vector".into()));
        }
        let v = vector.unscale(norm);
        Ok(Self {
            matrix: &v * v.adjoint(),
            psd: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_flagged_psd(&self) -> bool {
        self.psd
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Eigen-decomposition `(eigenvalues, eigenvectors as columns)`, unsorted.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        let eig = SymmetricEigen::new(self.matrix.clone());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |acc, e| acc.max(e.abs()))
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.hs_inner(self)
    }

    /// Hilbert-Schmidt inner product `Re tr(A B)` of two Hermitian operators.
    pub fn hs_inner(&self, other: &Self) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * C64::new(factor, 0.0),
            psd: self.psd && factor >= 0.0,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
            psd: self.psd && other.psd,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            matrix: &self.matrix - &other.matrix,
            psd: false,
        })
    }

    /// `v * self + (1 - v) * other`.
    pub fn affine(&self, other: &Self, v: f64) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            matrix: &self.matrix * C64::new(v, 0.0) + &other.matrix * C64::new(1.0 - v, 0.0),
            psd: self.psd && other.psd && (0.0..=1.0).contains(&v),
        })
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
            psd: self.psd && other.psd,
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_entry_distance(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        max_abs(&(&self.matrix - &other.matrix))
    }

    /// Trace norm distance `||A - B||_1 / 2`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        let diff = self.sub(other)?;
        Ok(0.5 * diff.eigenvalues().iter().map(|e| e.abs()).sum::<f64>())
    }

    /// Clips eigenvalues in `[-tolerance, 0)` to zero. Anything more negative
    /// is an error.
    pub fn floor_to_psd(&self, tolerance: f64) -> Result<Self> {
        let (values, vectors) = self.eigen();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -tolerance {
            return Err(Error::NotPsd(min));
        }
        if min >= 0.0 {
            return Ok(Self {
                matrix: self.matrix.clone(),
                psd: true,
            });
        }
        let clipped = CVector::from_iterator(values.len(), values.iter().map(|&e| C64::new(e.max(0.0), 0.0)));
        let matrix = &vectors * CMatrix::from_diagonal(&clipped) * vectors.adjoint();
        let matrix = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self { matrix, psd: true })
    }

    /// `tr_A[(A (x) 1) rho]` for `self = rho` on `dim_a * dim_b`.
    pub fn steered_operator(&self, effect_a: &Self, dim_b: usize) -> Result<Self> {
        let dim_a = effect_a.dim();
        if dim_a * dim_b != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "effect of dim {dim_a} and Bob dim {dim_b} do not factor state dim {}",
                self.dim()
            )));
        }
        let rho = &self.matrix;
        let a = &effect_a.matrix;
        let mut out = CMatrix::zeros(dim_b, dim_b);
        for i in 0..dim_a {
            for k in 0..dim_a {
                let coeff = a[(i, k)];
                if coeff.norm() == 0.0 {
                    continue;
                }
                // sum_{i,k} A_{ik} <k|rho|i>_A
                for r in 0..dim_b {
                    for c in 0..dim_b {
                        out[(r, c)] += coeff * rho[(k * dim_b + r, i * dim_b + c)];
                    }
                }
            }
        }
        Ok(Self::new(out)?.with_psd_flag(self.psd && effect_a.psd))
    }

    /// Partial trace over the first factor of `dim_a * dim_b`.
    pub fn partial_trace_first(&self, dim_a: usize) -> Result<Self> {
        if dim_a == 0 || self.dim() % dim_a != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{dim_a} does not divide {}",
                self.dim()
            )));
        }
        self.steered_operator(&Self::identity(dim_a), self.dim() / dim_a)
    }

    fn with_psd_flag(mut self, psd: bool) -> Self {
        self.psd = psd;
        self
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(())
    }
}

/// `Re tr(A B)` without building the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = a[(i, j)];
            let y = b[(j, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

/// A POVM `{E_k}` on a `dim`-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    dim: usize,
    effects: Vec<HermitianOperator>,
}

impl Measurement {
    pub fn new(effects: Vec<HermitianOperator>) -> Result<Self> {
        let dim = effects
            .first()
            .map(HermitianOperator::dim)
            .ok_or_else(|| Error::InvalidParameter("measurement without effects".into()))?;
        let mut total = CMatrix::zeros(dim, dim);
        for effect in &effects {
            if effect.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "effect of dim {} in measurement of dim {dim}",
                    effect.dim()
                )));
            }
            let min = effect.min_eigenvalue();
            if min < PSD_FLOOR {
                return Err(Error::NotPsd(min));
            }
            total += effect.matrix();
        }
        let deviation = max_abs(&(total - CMatrix::identity(dim, dim)));
        if deviation > COMPLETENESS_TOL {
            return Err(Error::Incomplete(deviation));
        }
        let effects = effects.into_iter().map(|e| e.with_psd_flag(true)).collect();
        Ok(Self { dim, effects })
    }

    /// Rank-one projective measurement onto the columns of `basis`.
    pub fn from_basis(basis: &CMatrix) -> Result<Self> {
        let effects = basis
            .column_iter()
            .map(|c| HermitianOperator::projector(&c.into_owned()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(effects)
    }

    pub fn computational(dim: usize) -> Self {
        Self::from_basis(&CMatrix::identity(dim, dim)).expect("identity is a basis")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn effect(&self, k: usize) -> &HermitianOperator {
        &self.effects[k]
    }
}

/// Single-port click/no-click measurements `{F_1|k, 1 - F_1|k}`. Nothing
/// ties the click effects together; that is exactly the untrusted part.
#[derive(Clone, Debug, PartialEq)]
pub struct BinarisedBank {
    dim: usize,
    clicks: Vec<HermitianOperator>,
}

impl BinarisedBank {
    pub fn new(clicks: Vec<HermitianOperator>) -> Result<Self> {
        let dim = clicks
            .first()
            .map(HermitianOperator::dim)
            .ok_or_else(|| Error::InvalidParameter("empty binarised bank".into()))?;
        let identity = HermitianOperator::identity(dim);
        let mut checked = Vec::with_capacity(clicks.len());
        for click in clicks {
            if click.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "click effect of dim {} in bank of dim {dim}",
                    click.dim()
                )));
            }
            let min = click.min_eigenvalue();
            if min < PSD_FLOOR {
                return Err(Error::NotPsd(min));
            }
            let min_complement = identity.sub(&click)?.min_eigenvalue();
            if min_complement < PSD_FLOOR {
                return Err(Error::NotPsd(min_complement));
            }
            checked.push(click.with_psd_flag(true));
        }
        Ok(Self { dim, clicks: checked })
    }

    /// One port per effect of `measurement`.
    pub fn from_measurement(measurement: &Measurement) -> Self {
        Self {
            dim: measurement.dim(),
            clicks: measurement.effects().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ports(&self) -> usize {
        self.clicks.len()
    }

    pub fn click(&self, port: usize) -> &HermitianOperator {
        &self.clicks[port]
    }

    /// `1 - F_1|k`.
    pub fn no_click(&self, port: usize) -> HermitianOperator {
        HermitianOperator::identity(self.dim)
            .sub(&self.clicks[port])
            .expect("same dimension")
            .with_psd_flag(true)
    }
}

/// Operator-norm distance of the click effects' sum from the identity.
pub fn binarisation_defect(bank: &BinarisedBank) -> f64 {
    let mut total = CMatrix::zeros(bank.dim, bank.dim);
    for click in &bank.clicks {
        total += click.matrix();
    }
    total -= CMatrix::identity(bank.dim, bank.dim);
    HermitianOperator::from_hermitian_unchecked(total, false).operator_norm()
}

fn check_state(state: &HermitianOperator, dim: usize) -> Result<()> {
    if state.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "state of dim {} where {dim} expected",
            state.dim()
        )));
    }
    let trace = state.trace();
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::NotNormalized(format!("state trace {trace}")));
    }
    Ok(())
}

fn uniform_measurements(measurements: &[Measurement]) -> Result<(usize, usize)> {
    let first = measurements
        .first()
        .ok_or_else(|| Error::InvalidParameter("no measurements".into()))?;
    for m in measurements {
        if m.dim() != first.dim() || m.outcomes() != first.outcomes() {
            return Err(Error::DimensionMismatch(
                "measurements of one party must share dimension and outcome count".into(),
            ));
        }
    }
    Ok((first.dim(), first.outcomes()))
}

/// `p(a,b|x,y) = tr[rho (A_a|x (x) B_b|y)]`.
pub fn born_bipartite(state: &HermitianOperator, alice: &[Measurement], bob: &[Measurement]) -> Result<BellBehavior> {
    let (dim_a, outcomes_a) = uniform_measurements(alice)?;
    let (dim_b, outcomes_b) = uniform_measurements(bob)?;
    check_state(state, dim_a * dim_b)?;
    let scenario = BellScenario::new(alice.len(), bob.len(), outcomes_a, outcomes_b)?;
    // Reduce to Bob's side once per Alice effect, then pair with Bob's effects.
    let mut steered = Vec::with_capacity(alice.len() * outcomes_a);
    for m in alice {
        for effect in m.effects() {
            steered.push(state.steered_operator(effect, dim_b)?);
        }
    }
    let probs = BellBehavior::tensor_from_fn(&scenario, |a, b, x, y| {
        trace_product(steered[x * outcomes_a + a].matrix(), bob[y].effect(b).matrix())
    });
    BellBehavior::new(scenario, probs)
}

/// `p(b|x,y) = tr(rho_x E_b|y)`.
pub fn born_prepare_measure(preparations: &[HermitianOperator], measurements: &[Measurement]) -> Result<PmBehavior> {
    let (dim, outcomes) = uniform_measurements(measurements)?;
    for rho in preparations {
        check_state(rho, dim)?;
    }
    let scenario = PmScenario::new(preparations.len(), measurements.len(), outcomes)?;
    let probs = PmBehavior::tensor_from_fn(&scenario, |b, x, y| {
        trace_product(preparations[x].matrix(), measurements[y].effect(b).matrix())
    });
    PmBehavior::new(scenario, probs)
}

/// Deterministic generator used for every seeded sampler in the crate:
/// ChaCha20 seeded with `seed_from_u64`.
pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// `rows x cols` matrix of i.i.d. standard complex Gaussians
/// `(g1 + i g2)/sqrt(2)`, filled column-major.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

/// Haar unitary via QR of a Ginibre matrix with the phases of `diag(R)`
/// moved into `Q`.
pub fn haar_random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = ginibre(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Induced-measure mixed state: `G G^dagger / tr` with `G` a `dim x rank`
/// Ginibre matrix, equivalent to tracing out a `rank`-dimensional ancilla
/// from a Haar pure state.
pub fn haar_random_state_with<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<HermitianOperator> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidParameter(format!("rank {rank} must lie in 1..={dim}")));
    }
    let g = ginibre(rng, dim, rank);
    let rho = &g * g.adjoint();
    let trace: f64 = rho.diagonal().iter().map(|z| z.re).sum();
    let rho = rho.unscale(trace);
    Ok(HermitianOperator::new(rho)?.with_psd_flag(true))
}

pub fn haar_random_state(dim: usize, rank: usize, seed: u64) -> Result<HermitianOperator> {
    haar_random_state_with(&mut seeded_rng(seed), dim, rank)
}

pub fn haar_random_basis_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Measurement {
    Measurement::from_basis(&haar_random_unitary(rng, dim)).expect("unitary columns form a basis")
}

pub fn haar_random_basis(dim: usize, seed: u64) -> Measurement {
    haar_random_basis_with(&mut seeded_rng(seed), dim)
}

/// `sum_j c_j |j>|j>` normalized, as a density operator on `dim^2`.
pub fn schmidt_state(coefficients: &[C64]) -> Result<HermitianOperator> {
    let dim = coefficients.len();
    let mut psi = CVector::zeros(dim * dim);
    for (j, c) in coefficients.iter().enumerate() {
        psi[j * dim + j] = *c;
    }
    HermitianOperator::projector(&psi)
}

pub fn maximally_entangled(dim: usize) -> HermitianOperator {
    schmidt_state(&vec![C64::new(1.0, 0.0); dim]).expect("nonzero vector")
}
