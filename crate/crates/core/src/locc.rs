//! Local instruments, transcript-conditioned measurement protocols, and the
//! constructive channel primitives: measurement dilated from a unitary,
//! basis dephasing, phase-averaged dephasing, and the decoupling twirl.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{CoreError, Result};
use crate::matrix::{projector, ComplexMatrix, ZERO};
use crate::sample::haar_unitary;
use crate::states::{DensityOperator, Ensemble, FlagBasis, Party, Register};
use crate::tensor::embed_local;

/// Completeness tolerance for `sum K_i^dagger K_i = I`.
pub const KRAUS_COMPLETENESS_TOL: f64 = 1e-10;

/// Outcomes with probability below this are dropped before renormalization.
pub const OUTCOME_PRUNE_THRESHOLD: f64 = 1e-14;

/// A generalized local measurement: Kraus operators on one party's register,
/// implicitly tensored with identity elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausInstrument {
    party: Party,
    kraus_ops: Vec<ComplexMatrix>,
    outcome_labels: Vec<String>,
}

impl KrausInstrument {
    pub fn new(party: impl Into<Party>, kraus_ops: Vec<ComplexMatrix>) -> Result<Self> {
        let labels = (0..kraus_ops.len()).map(|k| k.to_string()).collect();
        Self::with_labels(party, kraus_ops, labels)
    }

    pub fn with_labels(
        party: impl Into<Party>,
        kraus_ops: Vec<ComplexMatrix>,
        outcome_labels: Vec<String>,
    ) -> Result<Self> {
        if kraus_ops.is_empty() {
            return Err(CoreError::structural("instrument needs at least one operator"));
        }
        if outcome_labels.len() != kraus_ops.len() {
            return Err(CoreError::structural("one label per Kraus operator"));
        }
        let dim = kraus_ops[0].rows;
        if kraus_ops
            .iter()
            .any(|k| !k.is_square() || k.rows != dim)
        {
            return Err(CoreError::structural(
                "Kraus operators must be square and share one dimension",
            ));
        }
        let mut gram = ComplexMatrix::zeros(dim, dim);
        for k in &kraus_ops {
            gram = gram.add(&k.adjoint().matmul(k));
        }
        let defect = gram.sub(&ComplexMatrix::identity(dim)).max_abs_entry();
        if defect > KRAUS_COMPLETENESS_TOL {
            return Err(CoreError::contract(format!(
                "instrument is not complete: defect {:.3e}",
                defect
            )));
        }
        Ok(KrausInstrument {
            party: party.into(),
            kraus_ops,
            outcome_labels,
        })
    }

    /// The trivial one-outcome instrument `{I}`.
    pub fn identity(party: impl Into<Party>, dim: usize) -> Self {
        KrausInstrument {
            party: party.into(),
            kraus_ops: vec![ComplexMatrix::identity(dim)],
            outcome_labels: vec!["0".to_owned()],
        }
    }

    /// Projective readout of a complete orthonormal basis.
    pub fn projective(party: impl Into<Party>, basis: &FlagBasis) -> Result<Self> {
        if !basis.is_complete() {
            return Err(CoreError::structural(
                "projective readout needs a complete basis",
            ));
        }
        let ops = (0..basis.len()).map(|k| projector(basis.vector(k))).collect();
        KrausInstrument::new(party, ops)
    }

    pub fn party(&self) -> &Party {
        &self.party
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }

    pub fn outcome_labels(&self) -> &[String] {
        &self.outcome_labels
    }

    pub fn len(&self) -> usize {
        self.kraus_ops.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dimension of the register the operators act on.
    pub fn dim(&self) -> usize {
        self.kraus_ops[0].rows
    }
}

/// Outcome-indexed instrument application; weights are the renormalized
/// probabilities of the surviving outcomes.
fn apply_instrument_indexed(
    rho: &DensityOperator,
    inst: &KrausInstrument,
) -> Result<Vec<(usize, f64, DensityOperator)>> {
    let index = rho.register_index(inst.party()).ok_or_else(|| {
        CoreError::structural(format!("state has no register {}", inst.party()))
    })?;
    let dims = rho.dims();
    if dims[index] != inst.dim() {
        return Err(CoreError::structural(format!(
            "instrument dimension {} does not match register {} of dimension {}",
            inst.dim(),
            inst.party(),
            dims[index]
        )));
    }
    let mut survivors = Vec::new();
    for (k, op) in inst.kraus_ops().iter().enumerate() {
        let embedded = embed_local(op, &dims, index)?;
        let raw = embedded.matmul(rho.matrix()).matmul(&embedded.adjoint());
        let p = raw.trace().re;
        if p < OUTCOME_PRUNE_THRESHOLD {
            continue;
        }
        let state = DensityOperator::trusted(
            raw.scale_re(1.0 / p).hermitian_part(),
            rho.registers().to_vec(),
        );
        survivors.push((k, p, state));
    }
    let total: f64 = survivors.iter().map(|(_, p, _)| *p).sum();
    Ok(survivors
        .into_iter()
        .map(|(k, p, s)| (k, p / total, s))
        .collect())
}

/// Applies a local instrument: outcome probabilities `Tr(K rho K^dagger)`
/// and conditional states, with sub-threshold outcomes pruned.
pub fn apply_instrument(rho: &DensityOperator, inst: &KrausInstrument) -> Result<Ensemble> {
    let outcomes = apply_instrument_indexed(rho, inst)?;
    let weights = outcomes.iter().map(|(_, p, _)| *p).collect();
    let states = outcomes.into_iter().map(|(_, _, s)| s).collect();
    Ensemble::new(weights, states)
}

/// Dilates a unitary on `register (x) ancilla` into an instrument on the
/// register: attach the ancilla in `|0>`, apply `u`, then read the ancilla
/// out in the given complete basis. `K_i = (I (x) <i|) u (I (x) |0>)`.
pub fn measurement_from_unitary(
    party: impl Into<Party>,
    u: &ComplexMatrix,
    ancilla_dim: usize,
    readout_basis: &FlagBasis,
) -> Result<KrausInstrument> {
    if ancilla_dim == 0 || !u.is_square() || u.rows % ancilla_dim != 0 {
        return Err(CoreError::structural(
            "unitary dimension must be a multiple of the ancilla dimension",
        ));
    }
    let defect = u.unitary_defect();
    if defect > 1e-10 {
        return Err(CoreError::contract(format!(
            "dilation needs a unitary: defect {:.3e}",
            defect
        )));
    }
    if readout_basis.vector_dim() != ancilla_dim || !readout_basis.is_complete() {
        return Err(CoreError::structural(
            "readout basis must be complete on the ancilla",
        ));
    }
    let d = u.rows / ancilla_dim;
    let mut ops = Vec::with_capacity(ancilla_dim);
    for i in 0..readout_basis.len() {
        let v = readout_basis.vector(i);
        let mut k = ComplexMatrix::zeros(d, d);
        for m in 0..d {
            for n in 0..d {
                let mut acc = ZERO;
                for (a, amp) in v.iter().enumerate() {
                    acc += amp.conj() * u.get(m * ancilla_dim + a, n * ancilla_dim);
                }
                k.set(m, n, acc);
            }
        }
        ops.push(k);
    }
    KrausInstrument::new(party, ops)
}

/// Pinching channel: `sum_i P_i rho P_i` over the complete basis projectors
/// on one register.
pub fn dephase(
    rho: &DensityOperator,
    party: &Party,
    basis: &FlagBasis,
) -> Result<DensityOperator> {
    let index = rho
        .register_index(party)
        .ok_or_else(|| CoreError::structural(format!("state has no register {}", party)))?;
    let dims = rho.dims();
    if basis.vector_dim() != dims[index] || !basis.is_complete() {
        return Err(CoreError::structural(
            "dephasing basis must span the register",
        ));
    }
    let mut acc = ComplexMatrix::zeros(rho.dim(), rho.dim());
    for i in 0..basis.len() {
        let p = embed_local(&projector(basis.vector(i)), &dims, index)?;
        acc = acc.add(&p.matmul(rho.matrix()).matmul(&p));
    }
    Ok(DensityOperator::trusted(
        acc.hermitian_part(),
        rho.registers().to_vec(),
    ))
}

/// Uniform average over the `d` relative-phase unitaries
/// `V_k = sum_j omega^{jk} |j><j|` in the given basis, `omega = e^{2 pi i/d}`.
/// Equals [`dephase`] by the finite Fourier identity; computed as the
/// literal average.
pub fn random_phase_dephasing_average(
    rho: &DensityOperator,
    party: &Party,
    basis: &FlagBasis,
) -> Result<DensityOperator> {
    let index = rho
        .register_index(party)
        .ok_or_else(|| CoreError::structural(format!("state has no register {}", party)))?;
    let dims = rho.dims();
    let d = dims[index];
    if basis.vector_dim() != d || !basis.is_complete() {
        return Err(CoreError::structural(
            "dephasing basis must span the register",
        ));
    }
    let mut acc = ComplexMatrix::zeros(rho.dim(), rho.dim());
    for k in 0..d {
        let mut v = ComplexMatrix::zeros(d, d);
        for j in 0..d {
            let phase = Complex64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64,
            );
            let pj = projector(basis.vector(j)).scale(phase);
            v = v.add(&pj);
        }
        let embedded = embed_local(&v, &dims, index)?;
        acc = acc.add(&embedded.matmul(rho.matrix()).matmul(&embedded.adjoint()));
    }
    Ok(DensityOperator::trusted(
        acc.scale_re(1.0 / d as f64).hermitian_part(),
        rho.registers().to_vec(),
    ))
}

/// Shift-and-clock (generalized Pauli) unitary `X^a Z^b` on dimension `d`.
fn weyl_unitary(d: usize, a: usize, b: usize) -> ComplexMatrix {
    let mut w = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        let phase = Complex64::from_polar(
            1.0,
            2.0 * std::f64::consts::PI * (j * b) as f64 / d as f64,
        );
        w.set((j + a) % d, j, phase);
    }
    w
}

/// Averages over all `d^2` shift-and-clock unitaries on one register, which
/// replaces that register by the maximally mixed state in place:
/// the output equals `Tr_party(rho) (x) I/d` on the same register.
pub fn twirl_decouple(rho: &DensityOperator, party: &Party) -> Result<DensityOperator> {
    let index = rho
        .register_index(party)
        .ok_or_else(|| CoreError::structural(format!("state has no register {}", party)))?;
    let dims = rho.dims();
    let d = dims[index];
    let mut acc = ComplexMatrix::zeros(rho.dim(), rho.dim());
    for a in 0..d {
        for b in 0..d {
            let w = embed_local(&weyl_unitary(d, a, b), &dims, index)?;
            acc = acc.add(&w.matmul(rho.matrix()).matmul(&w.adjoint()));
        }
    }
    Ok(DensityOperator::trusted(
        acc.scale_re(1.0 / (d * d) as f64).hermitian_part(),
        rho.registers().to_vec(),
    ))
}

/// Haar-random instrument with `n_outcomes` outcomes on a `d`-dimensional
/// register, dilated from a Haar unitary on `d * n_outcomes`.
pub fn sample_local_instrument<R: Rng + ?Sized>(
    party: impl Into<Party>,
    d: usize,
    n_outcomes: usize,
    rng: &mut R,
) -> KrausInstrument {
    assert!(n_outcomes >= 1);
    let u = haar_unitary(d * n_outcomes, rng);
    let readout = FlagBasis::computational("readout", n_outcomes);
    measurement_from_unitary(party, &u, n_outcomes, &readout)
        .expect("dilation of a Haar unitary is complete")
}

/// A finite transcript tree: each node measures with a local instrument and
/// continues into one subtree per outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum ProtocolNode {
    Stop,
    Round {
        instrument: KrausInstrument,
        branches: Vec<ProtocolNode>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    root: ProtocolNode,
}

impl Protocol {
    pub fn new(root: ProtocolNode) -> Result<Self> {
        fn check(node: &ProtocolNode) -> Result<()> {
            if let ProtocolNode::Round {
                instrument,
                branches,
            } = node
            {
                if branches.len() != instrument.len() {
                    return Err(CoreError::structural(
                        "protocol node needs one branch per outcome",
                    ));
                }
                for b in branches {
                    check(b)?;
                }
            }
            Ok(())
        }
        check(&root)?;
        Ok(Protocol { root })
    }

    /// The do-nothing protocol.
    pub fn identity() -> Self {
        Protocol {
            root: ProtocolNode::Stop,
        }
    }

    pub fn single_round(instrument: KrausInstrument) -> Self {
        let branches = vec![ProtocolNode::Stop; instrument.len()];
        Protocol {
            root: ProtocolNode::Round {
                instrument,
                branches,
            },
        }
    }

    pub fn root(&self) -> &ProtocolNode {
        &self.root
    }

    pub fn leaf_count(&self) -> usize {
        fn count(node: &ProtocolNode) -> usize {
            match node {
                ProtocolNode::Stop => 1,
                ProtocolNode::Round { branches, .. } => branches.iter().map(count).sum(),
            }
        }
        count(&self.root)
    }

    /// Party labels of every instrument in the tree, in first-use order.
    pub fn parties(&self) -> Vec<Party> {
        fn walk(node: &ProtocolNode, out: &mut Vec<Party>) {
            if let ProtocolNode::Round {
                instrument,
                branches,
            } = node
            {
                if !out.contains(instrument.party()) {
                    out.push(instrument.party().clone());
                }
                for b in branches {
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }
}

/// Samples a `rounds`-deep protocol cycling through the given registers in
/// order; every transcript node draws an independent local instrument.
pub fn sample_locc_protocol<R: Rng + ?Sized>(
    registers: &[Register],
    rounds: usize,
    outcomes_per_round: usize,
    rng: &mut R,
) -> Protocol {
    assert!(rounds >= 1, "a protocol needs at least one round");
    assert!(!registers.is_empty());
    fn sample_node<R: Rng + ?Sized>(
        registers: &[Register],
        depth: usize,
        rounds: usize,
        outcomes: usize,
        rng: &mut R,
    ) -> ProtocolNode {
        if depth == rounds {
            return ProtocolNode::Stop;
        }
        let reg = &registers[depth % registers.len()];
        let instrument = sample_local_instrument(reg.party.clone(), reg.dim, outcomes, rng);
        let branches = (0..instrument.len())
            .map(|_| sample_node(registers, depth + 1, rounds, outcomes, rng))
            .collect();
        ProtocolNode::Round {
            instrument,
            branches,
        }
    }
    Protocol {
        root: sample_node(registers, 0, rounds, outcomes_per_round, rng),
    }
}

/// Runs the transcript tree, returning the leaf ensemble of conditioned
/// states with their transcript probabilities.
pub fn run_protocol(rho: &DensityOperator, protocol: &Protocol) -> Result<Ensemble> {
    fn walk(
        rho: &DensityOperator,
        node: &ProtocolNode,
        weight: f64,
        out: &mut Vec<(f64, DensityOperator)>,
    ) -> Result<()> {
        match node {
            ProtocolNode::Stop => {
                out.push((weight, rho.clone()));
                Ok(())
            }
            ProtocolNode::Round {
                instrument,
                branches,
            } => {
                for (k, p, state) in apply_instrument_indexed(rho, instrument)? {
                    walk(&state, &branches[k], weight * p, out)?;
                }
                Ok(())
            }
        }
    }
    let mut leaves = Vec::new();
    walk(rho, protocol.root(), 1.0, &mut leaves)?;
    let weights = leaves.iter().map(|(w, _)| *w).collect();
    let states = leaves.into_iter().map(|(_, s)| s).collect();
    Ensemble::new(weights, states)
}
