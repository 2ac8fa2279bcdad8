//! Party-structured density operators, ensembles, flag bases, and the named
//! state families used throughout the certification suite.

use num_complex::Complex64;
use rand::Rng;
use std::fmt;

use crate::eigen::hermitian_eigensystem;
use crate::error::{CoreError, Result};
use crate::matrix::{
    basis_vector, outer, projector, vec_tensor, ComplexMatrix, ONE, ZERO,
};
use crate::sample::{random_unit_vector, uniform_simplex_weights};
use crate::tensor;

pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
pub const DENSITY_TRACE_TOL: f64 = 1e-10;
pub const DENSITY_EIGENVALUE_FLOOR: f64 = -1e-10;
pub const ENSEMBLE_WEIGHT_TOL: f64 = 1e-12;
pub const FLAG_ORTHONORMALITY_TOL: f64 = 1e-12;

/// Register owner label. Primes mark ancillas: `A'` and `A''` belong to the
/// same site as `A`, so cuts and locality group them together.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Party(String);

impl Party {
    pub fn new(label: impl Into<String>) -> Self {
        Party(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Label with trailing primes stripped: the site that owns the register.
    pub fn site(&self) -> &str {
        self.0.trim_end_matches('\'')
    }

    pub fn primed(&self) -> Party {
        Party(format!("{}'", self.0))
    }

    pub fn same_site(&self, other: &Party) -> bool {
        self.site() == other.site()
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Party {
    fn from(label: &str) -> Self {
        Party::new(label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub party: Party,
    pub dim: usize,
}

impl Register {
    pub fn new(party: impl Into<Party>, dim: usize) -> Self {
        Register {
            party: party.into(),
            dim,
        }
    }
}

/// Density operator over an ordered list of labelled registers. The first
/// listed register varies slowest in the row-major matrix index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    registers: Vec<Register>,
}

impl DensityOperator {
    /// Validates every invariant: register product matches the matrix
    /// dimension, Hermiticity, unit trace, and positive semidefiniteness.
    pub fn new(matrix: ComplexMatrix, registers: Vec<Register>) -> Result<Self> {
        let state = Self::with_structure(matrix, registers)?;
        state.check_numerics()?;
        Ok(state)
    }

    /// Checks only structure (shapes and labels), not the spectral
    /// invariants; for internal pipelines that preserve positivity by
    /// construction. Numeric invariants are still re-asserted by tests.
    pub(crate) fn trusted(matrix: ComplexMatrix, registers: Vec<Register>) -> Self {
        Self::with_structure(matrix, registers).expect("structurally valid state")
    }

    fn with_structure(matrix: ComplexMatrix, registers: Vec<Register>) -> Result<Self> {
        if registers.is_empty() {
            return Err(CoreError::structural("a state needs at least one register"));
        }
        if registers.iter().any(|r| r.dim == 0) {
            return Err(CoreError::structural("register dimensions must be positive"));
        }
        let mut labels: Vec<&str> = registers.iter().map(|r| r.party.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != registers.len() {
            return Err(CoreError::structural("register labels must be distinct"));
        }
        let total: usize = registers.iter().map(|r| r.dim).product();
        if !matrix.is_square() || matrix.rows != total {
            return Err(CoreError::structural(format!(
                "matrix dimension {} does not match register product {}",
                matrix.rows, total
            )));
        }
        Ok(DensityOperator { matrix, registers })
    }

    fn check_numerics(&self) -> Result<()> {
        let defect = self.matrix.hermitian_defect();
        if defect > DENSITY_HERMITIAN_TOL {
            return Err(CoreError::contract(format!(
                "state is not Hermitian: defect {:.3e}",
                defect
            )));
        }
        let trace = self.matrix.trace();
        if (trace.re - 1.0).abs() > DENSITY_TRACE_TOL || trace.im.abs() > DENSITY_TRACE_TOL {
            return Err(CoreError::contract(format!(
                "state trace {} is not 1",
                trace.re
            )));
        }
        let spec = hermitian_eigensystem(&self.matrix)?;
        if spec.min_eigenvalue() < DENSITY_EIGENVALUE_FLOOR {
            return Err(CoreError::contract(format!(
                "state has negative eigenvalue {:.3e}",
                spec.min_eigenvalue()
            )));
        }
        Ok(())
    }

    /// Re-asserts the numeric invariants; used by tests on pipeline outputs.
    pub fn validate(&self) -> Result<()> {
        self.check_numerics()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(|r| r.dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn register_index(&self, party: &Party) -> Option<usize> {
        self.registers.iter().position(|r| &r.party == party)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).trace().re
    }

    fn fresh_primed_label(&self, base: &Party) -> Party {
        let mut candidate = base.primed();
        while self.register_index(&candidate).is_some() {
            candidate = candidate.primed();
        }
        candidate
    }

    /// True if any register belongs to the given site.
    pub fn has_site(&self, site: &str) -> bool {
        self.registers.iter().any(|r| r.party.site() == site)
    }

    pub fn site_register_indices(&self, site: &str) -> Vec<usize> {
        (0..self.registers.len())
            .filter(|&k| self.registers[k].party.site() == site)
            .collect()
    }

    /// Splits registers into (cut side, rest) by party label.
    pub fn bipartition(&self, cut: &[Party]) -> Result<(Vec<usize>, Vec<usize>)> {
        for p in cut {
            if self.register_index(p).is_none() {
                return Err(CoreError::structural(format!("unknown party {}", p)));
            }
        }
        let left: Vec<usize> = (0..self.registers.len())
            .filter(|&k| cut.contains(&self.registers[k].party))
            .collect();
        let right: Vec<usize> = (0..self.registers.len())
            .filter(|&k| !cut.contains(&self.registers[k].party))
            .collect();
        if left.is_empty() || right.is_empty() {
            return Err(CoreError::structural(
                "bipartition must leave registers on both sides",
            ));
        }
        Ok((left, right))
    }

    /// Default cut for bipartite measures: every register sharing the first
    /// register's site versus the rest.
    pub fn default_cut(&self) -> Vec<Party> {
        let site = self.registers[0].party.site().to_owned();
        self.registers
            .iter()
            .filter(|r| r.party.site() == site)
            .map(|r| r.party.clone())
            .collect()
    }

    /// Matrix with the cut-side registers grouped in front, and the two
    /// grouped dimensions. Register order within each side is preserved.
    pub fn grouped_matrix(&self, cut: &[Party]) -> Result<(ComplexMatrix, usize, usize)> {
        let (left, right) = self.bipartition(cut)?;
        let dims = self.dims();
        let d_left: usize = left.iter().map(|&k| dims[k]).product();
        let d_right: usize = right.iter().map(|&k| dims[k]).product();
        let order: Vec<usize> = left.iter().chain(right.iter()).copied().collect();
        let already_ordered = order.iter().enumerate().all(|(k, &o)| k == o);
        let m = if already_ordered {
            self.matrix.clone()
        } else {
            tensor::permute_subsystems(&self.matrix, &dims, &order)?
        };
        Ok((m, d_left, d_right))
    }

    /// Partial transpose of the registers on the cut side of the bipartition.
    pub fn partial_transpose_cut(&self, cut: &[Party]) -> Result<ComplexMatrix> {
        let (left, _) = self.bipartition(cut)?;
        tensor::partial_transpose_subset(&self.matrix, &self.dims(), &left)
    }

    /// Traces out one register by label.
    pub fn trace_out(&self, party: &Party) -> Result<DensityOperator> {
        let index = self
            .register_index(party)
            .ok_or_else(|| CoreError::structural(format!("unknown party {}", party)))?;
        if self.registers.len() == 1 {
            return Err(CoreError::structural("cannot trace out the only register"));
        }
        let matrix = tensor::partial_trace(&self.matrix, &self.dims(), index)?;
        let registers: Vec<Register> = self
            .registers
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != index)
            .map(|(_, r)| r.clone())
            .collect();
        Ok(DensityOperator::trusted(matrix, registers))
    }

    /// Marginal keeping only the registers of one site.
    pub fn site_marginal(&self, site: &str) -> Result<DensityOperator> {
        let keep = self.site_register_indices(site);
        if keep.is_empty() {
            return Err(CoreError::structural(format!("unknown site {}", site)));
        }
        let drop: Vec<usize> = (0..self.registers.len())
            .filter(|k| !keep.contains(k))
            .collect();
        if drop.is_empty() {
            return Ok(self.clone());
        }
        let matrix = tensor::partial_trace_subset(&self.matrix, &self.dims(), &drop)?;
        let registers: Vec<Register> = keep.iter().map(|&k| self.registers[k].clone()).collect();
        Ok(DensityOperator::trusted(matrix, registers))
    }

    /// Conjugates by a unitary acting on a single register.
    pub fn apply_local_unitary(&self, party: &Party, u: &ComplexMatrix) -> Result<DensityOperator> {
        let index = self
            .register_index(party)
            .ok_or_else(|| CoreError::structural(format!("unknown party {}", party)))?;
        let embedded = tensor::embed_local(u, &self.dims(), index)?;
        let matrix = embedded
            .matmul(&self.matrix)
            .matmul(&embedded.adjoint())
            .hermitian_part();
        Ok(DensityOperator::trusted(matrix, self.registers.clone()))
    }

    /// Tensor with an ancilla state owned by `site`; the ancilla register
    /// gets a fresh primed label of that site and is appended last.
    pub fn embed_ancilla(&self, sigma: &DensityOperator, site: &str) -> Result<DensityOperator> {
        if sigma.registers.len() != 1 {
            return Err(CoreError::structural("ancilla must be a single register"));
        }
        if !self.has_site(site) {
            return Err(CoreError::structural(format!("unknown site {}", site)));
        }
        let label = self.fresh_primed_label(&Party::new(site));
        let matrix = self.matrix.tensor(&sigma.matrix);
        let mut registers = self.registers.clone();
        registers.push(Register::new(label, sigma.dim()));
        Ok(DensityOperator::trusted(matrix, registers))
    }
}

/// Probabilistic mixture of states sharing one register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    weights: Vec<f64>,
    states: Vec<DensityOperator>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, states: Vec<DensityOperator>) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(CoreError::structural(
                "ensemble needs matching, nonempty weight and state lists",
            ));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(CoreError::contract("ensemble weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > ENSEMBLE_WEIGHT_TOL {
            return Err(CoreError::contract(format!(
                "ensemble weights sum to {}, expected 1",
                total
            )));
        }
        let layout = states[0].registers().to_vec();
        for s in &states[1..] {
            if s.registers() != layout.as_slice() {
                return Err(CoreError::structural(
                    "ensemble states must share one register layout",
                ));
            }
        }
        Ok(Ensemble { weights, states })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DensityOperator)> {
        self.weights.iter().copied().zip(self.states.iter())
    }

    /// Weighted average state (the deterministic coarse-graining).
    pub fn average(&self) -> DensityOperator {
        let mut acc = ComplexMatrix::zeros(self.states[0].dim(), self.states[0].dim());
        for (w, s) in self.iter() {
            acc = acc.add(&s.matrix().scale_re(w));
        }
        DensityOperator::trusted(acc, self.states[0].registers().to_vec())
    }
}

/// Orthonormal flag vectors on a register owned by `party`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlagBasis {
    party: Party,
    vectors: Vec<Vec<Complex64>>,
}

impl FlagBasis {
    pub fn new(party: impl Into<Party>, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(CoreError::structural("flag basis needs at least one vector"));
        }
        let dim = vectors[0].len();
        if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(CoreError::structural("flag vectors must share one dimension"));
        }
        if vectors.len() > dim {
            return Err(CoreError::structural("more flag vectors than the dimension"));
        }
        for i in 0..vectors.len() {
            for j in i..vectors.len() {
                let overlap = crate::matrix::inner(&vectors[i], &vectors[j]);
                let expected = if i == j { ONE } else { ZERO };
                if (overlap - expected).norm() > FLAG_ORTHONORMALITY_TOL {
                    return Err(CoreError::contract(format!(
                        "flag vectors {} and {} are not orthonormal",
                        i, j
                    )));
                }
            }
        }
        Ok(FlagBasis {
            party: party.into(),
            vectors,
        })
    }

    /// Computational basis `|0>, ..., |dim-1>`.
    pub fn computational(party: impl Into<Party>, dim: usize) -> Self {
        let vectors = (0..dim).map(|k| basis_vector(dim, k)).collect();
        FlagBasis {
            party: party.into(),
            vectors,
        }
    }

    pub fn party(&self) -> &Party {
        &self.party
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dimension of the register the vectors live on.
    pub fn vector_dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vector(&self, k: usize) -> &[Complex64] {
        &self.vectors[k]
    }

    pub fn is_complete(&self) -> bool {
        self.len() == self.vector_dim()
    }
}

/// Builds `sum_i p_i rho_i (x) |i><i|` with the flag register appended as a
/// fresh primed label of `flag_party`'s site.
pub fn flag_mix(
    ensemble: &Ensemble,
    flag_party: &Party,
    basis: &FlagBasis,
) -> Result<DensityOperator> {
    if ensemble.len() > basis.len() {
        return Err(CoreError::structural(format!(
            "ensemble of {} states exceeds {} flag vectors",
            ensemble.len(),
            basis.len()
        )));
    }
    let template = &ensemble.states()[0];
    if !template.has_site(flag_party.site()) {
        return Err(CoreError::structural(format!(
            "unknown site {}",
            flag_party.site()
        )));
    }
    let flag_dim = basis.vector_dim();
    let total = template.dim() * flag_dim;
    let mut acc = ComplexMatrix::zeros(total, total);
    for (k, (w, state)) in ensemble.iter().enumerate() {
        let flag = projector(basis.vector(k));
        acc = acc.add(&state.matrix().tensor(&flag).scale_re(w));
    }
    let label = template.fresh_primed_label(flag_party);
    let mut registers = template.registers().to_vec();
    registers.push(Register::new(label, flag_dim));
    Ok(DensityOperator::trusted(acc, registers))
}

/// Pure state `(1/sqrt d) sum_k |kk>` on registers A and B of dimension `d`.
pub fn max_entangled(d: usize) -> DensityOperator {
    assert!(d >= 2, "maximally entangled state needs dimension at least 2");
    let mut v = vec![ZERO; d * d];
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    for k in 0..d {
        v[k * d + k] = amp;
    }
    DensityOperator::trusted(
        outer(&v, &v),
        vec![Register::new("A", d), Register::new("B", d)],
    )
}

/// Isotropic family `F P + (1-F)(I-P)/(d^2-1)` with `P` the maximally
/// entangled projector.
pub fn isotropic(d: usize, fidelity: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(CoreError::structural(format!(
            "fidelity {} outside [0, 1]",
            fidelity
        )));
    }
    let p = max_entangled(d);
    let total = d * d;
    let rest = ComplexMatrix::identity(total)
        .sub(p.matrix())
        .scale_re((1.0 - fidelity) / (total as f64 - 1.0));
    let matrix = p.matrix().scale_re(fidelity).add(&rest);
    Ok(DensityOperator::trusted(matrix, p.registers().to_vec()))
}

/// Convex mixture of Haar-random product states with flat-Dirichlet weights.
pub fn random_separable<R: Rng + ?Sized>(
    dims: (usize, usize),
    terms: usize,
    rng: &mut R,
) -> DensityOperator {
    assert!(terms >= 1);
    let (da, db) = dims;
    let total = da * db;
    let weights = uniform_simplex_weights(terms, rng);
    let mut acc = ComplexMatrix::zeros(total, total);
    for &w in &weights {
        let a = random_unit_vector(da, rng);
        let b = random_unit_vector(db, rng);
        let prod = vec_tensor(&a, &b);
        acc = acc.add(&projector(&prod).scale_re(w));
    }
    DensityOperator::trusted(
        acc.hermitian_part(),
        vec![Register::new("A", da), Register::new("B", db)],
    )
}

/// Default number of product terms for [`random_separable`]: the square of
/// the total dimension, wide enough that the sampled hull is not thin.
pub fn default_separable_terms(dims: (usize, usize)) -> usize {
    (dims.0 * dims.1).pow(2)
}
