//! Relative entropy distance to the positive-partial-transpose set, computed
//! by projected gradient descent with Armijo backtracking.
//!
//! The feasible set (unit-trace positive operators whose partial transpose is
//! positive) contains every separable state, so the converged value lower
//! bounds the relative entropy of entanglement; on two-qubit and
//! qubit-qutrit systems the two sets coincide and the bound is tight.

use crate::eigen::hermitian_eigensystem;
use crate::error::{CoreError, Result};
use crate::matrix::ComplexMatrix;
use crate::measures::{cross_log_term, relative_entropy_gradient, self_log_term};
use crate::states::DensityOperator;
use crate::tensor::partial_transpose_subset;

const MAX_OUTER_ITERATIONS: usize = 600;
const MAX_DYKSTRA_ITERATIONS: usize = 150;
const DYKSTRA_TOL: f64 = 1e-11;
const ARMIJO_SLOPE: f64 = 1e-4;
const ARMIJO_SHRINK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;
/// Steps move along the unit-Frobenius descent direction, so anything beyond
/// the feasible set's diameter is wasted.
const MAX_STEP: f64 = 1.0;
/// Consecutive sub-tolerance decreases required before declaring convergence;
/// a single tiny step only means the line search got briefly cornered.
const STALL_PATIENCE: usize = 3;
/// Consecutive full line-search sweeps (from the maximal step all the way
/// down the dyadic ladder) that must fail before the iterate is declared
/// optimal at floating-point resolution.
const DEAD_END_PATIENCE: usize = 2;
/// Interior mixing weight keeping every iterate full rank; the identity is
/// invariant under partial transposition, so feasibility is preserved.
const INTERIOR_MIX: f64 = 1e-9;
/// Entries below this witness an exactly classical register: the state is
/// block diagonal along its computational basis and the problem decomposes.
const CLASSICAL_BLOCK_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct PptResult {
    /// Lower bound on the relative entropy of entanglement, in nats.
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Minimizes `S(rho|sigma)` over unit-trace operators with positive partial
/// transpose across the default cut. Stops when successive objective values
/// differ by less than `tol`.
pub fn ppt_relative_entropy(rho: &DensityOperator, tol: f64) -> Result<PptResult> {
    if tol <= 0.0 {
        return Err(CoreError::structural("tolerance must be positive"));
    }
    let sites: std::collections::BTreeSet<&str> =
        rho.registers().iter().map(|r| r.party.site()).collect();
    if sites.len() < 2 {
        // Every state is feasible across a trivial cut; sigma = rho wins.
        return Ok(PptResult {
            value: 0.0,
            converged: true,
            iterations: 0,
        });
    }
    // A register along which the state is exactly block diagonal is classical:
    // pinching any feasible sigma onto the blocks stays feasible and never
    // increases the divergence, so the optimum splits into the blocks and the
    // whole value is the weighted sum of the per-block optima.
    if let Some(blocks) = classical_register_blocks(rho) {
        let mut value = 0.0;
        let mut converged = true;
        let mut iterations = 0;
        for (weight, block) in blocks {
            let sub = ppt_relative_entropy(&block, tol)?;
            value += weight * sub.value;
            converged &= sub.converged;
            iterations = iterations.max(sub.iterations);
        }
        return Ok(PptResult {
            value,
            converged,
            iterations,
        });
    }
    let cut = rho.default_cut();
    let (rho_grouped, da, db) = rho.grouped_matrix(&cut)?;
    let d = da * db;
    let rho_spec = hermitian_eigensystem(&rho_grouped)?;
    let s_self = self_log_term(&rho_spec);
    let objective = |m: &ComplexMatrix| -> Result<f64> {
        let spec = hermitian_eigensystem(m)?;
        Ok(s_self - cross_log_term(&rho_grouped, &spec))
    };

    // Warm start: the PPT projection of the state itself is near-optimal
    // whenever the state is close to the feasible set, which is exactly the
    // regime where a cold uniform start crawls.
    let mut sigma = ComplexMatrix::identity(d).scale_re(1.0 / d as f64);
    let mut value = objective(&sigma)?;
    let projected = project_ppt_density(&rho_grouped, da, db)?;
    let projected_value = objective(&projected)?;
    if projected_value.is_finite() && projected_value < value {
        sigma = projected;
        value = projected_value;
    }

    let mut base_step = MAX_STEP;
    let mut stalls = 0;
    let mut dead_ends = 0;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..MAX_OUTER_ITERATIONS {
        iterations += 1;
        let sigma_spec = hermitian_eigensystem(&sigma)?;
        let grad = relative_entropy_gradient(&rho_grouped, &sigma_spec);
        // Near-singular iterates blow the divided-difference kernel up by
        // 1/lambda_min; only the direction of the gradient is trustworthy,
        // so walk the unit-Frobenius direction and line-search the length.
        let norm = grad.frobenius_norm();
        if norm == 0.0 || !norm.is_finite() {
            converged = norm == 0.0;
            break;
        }
        let direction = grad.scale_re(1.0 / norm);

        let mut step = if dead_ends > 0 {
            MAX_STEP
        } else {
            (base_step * 2.0).min(MAX_STEP)
        };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let raw = sigma.sub(&direction.scale_re(step));
            let candidate = project_ppt_density(&raw, da, db)?;
            let cand_value = objective(&candidate)?;
            let slope = grad.matmul(&candidate.sub(&sigma)).trace().re;
            if cand_value.is_finite() && cand_value <= value + ARMIJO_SLOPE * slope {
                accepted = Some((candidate, cand_value));
                break;
            }
            step *= ARMIJO_SHRINK;
        }
        let Some((next, next_value)) = accepted else {
            // The whole dyadic ladder from the maximal step found no descent;
            // one more full sweep guards against projection slop.
            dead_ends += 1;
            if dead_ends >= DEAD_END_PATIENCE {
                converged = true;
                break;
            }
            continue;
        };
        dead_ends = 0;
        base_step = step;
        let decrease = value - next_value;
        sigma = next;
        value = next_value;
        if decrease.abs() < tol {
            stalls += 1;
            if stalls >= STALL_PATIENCE {
                converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
    }

    Ok(PptResult {
        value: value.max(0.0),
        converged,
        iterations,
    })
}

/// Finds a register whose computational basis exactly block-diagonalizes the
/// state and returns the normalized diagonal blocks, weighted by their trace,
/// with that register removed. Negligible-weight blocks are dropped.
fn classical_register_blocks(rho: &DensityOperator) -> Option<Vec<(f64, DensityOperator)>> {
    let dims = rho.dims();
    if dims.len() < 2 {
        return None;
    }
    let m = rho.matrix();
    let total = rho.dim();
    for (r, &dr) in dims.iter().enumerate() {
        let stride: usize = dims[r + 1..].iter().product();
        let digit = |idx: usize| (idx / stride) % dr;
        let coherent = (0..total).any(|i| {
            (0..total).any(|j| digit(i) != digit(j) && m.get(i, j).norm() > CLASSICAL_BLOCK_TOL)
        });
        if coherent {
            continue;
        }
        let sub_total = total / dr;
        let mut registers = rho.registers().to_vec();
        registers.remove(r);
        let mut blocks = Vec::new();
        for a in 0..dr {
            let rows: Vec<usize> = (0..total).filter(|&i| digit(i) == a).collect();
            let mut block = ComplexMatrix::zeros(sub_total, sub_total);
            for (bi, &i) in rows.iter().enumerate() {
                for (bj, &j) in rows.iter().enumerate() {
                    block.set(bi, bj, m.get(i, j));
                }
            }
            let weight = block.trace().re;
            if weight <= CLASSICAL_BLOCK_TOL {
                continue;
            }
            blocks.push((
                weight,
                DensityOperator::trusted(block.scale_re(1.0 / weight), registers.clone()),
            ));
        }
        return Some(blocks);
    }
    None
}

/// Dykstra projection onto the intersection of the density set and the
/// positive-partial-transpose set, finished with an interior mix so the
/// relative entropy stays finite.
fn project_ppt_density(m: &ComplexMatrix, da: usize, db: usize) -> Result<ComplexMatrix> {
    let d = da * db;
    let dims = [da, db];
    let mut x = m.hermitian_part();
    let mut p = ComplexMatrix::zeros(d, d);
    let mut q = ComplexMatrix::zeros(d, d);

    for _ in 0..MAX_DYKSTRA_ITERATIONS {
        let y = project_density(&x.add(&p))?;
        p = x.add(&p).sub(&y);
        let shifted = y.add(&q);
        let new_x = project_pt_positive(&shifted, &dims)?;
        q = shifted.sub(&new_x);
        let drift = new_x.sub(&y).frobenius_norm();
        x = new_x;
        if drift <= DYKSTRA_TOL * x.frobenius_norm().max(1.0) {
            break;
        }
    }
    let settled = project_density(&x.add(&p))?;
    let uniform = ComplexMatrix::identity(d).scale_re(1.0 / d as f64);
    Ok(settled
        .scale_re(1.0 - INTERIOR_MIX)
        .add(&uniform.scale_re(INTERIOR_MIX)))
}

/// Nearest (Frobenius) unit-trace positive operator: project the spectrum
/// onto the probability simplex.
fn project_density(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = hermitian_eigensystem(&m.hermitian_part())?;
    let tau = simplex_shift(spec.eigenvalues());
    Ok(spec.apply_fn(|l| (l + tau).max(0.0)))
}

/// Shift `tau` such that `l -> max(l + tau, 0)` lands on the simplex;
/// expects eigenvalues sorted in descending order.
fn simplex_shift(descending: &[f64]) -> f64 {
    let mut cumulative = 0.0;
    let mut tau = (1.0 - descending.iter().sum::<f64>()) / descending.len() as f64;
    for (j, &l) in descending.iter().enumerate() {
        cumulative += l;
        let candidate = (1.0 - cumulative) / (j + 1) as f64;
        if l + candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    tau
}

/// Nearest operator whose partial transpose over the first factor is
/// positive: transpose, clamp the spectrum, transpose back.
fn project_pt_positive(m: &ComplexMatrix, dims: &[usize]) -> Result<ComplexMatrix> {
    let transposed = partial_transpose_subset(&m.hermitian_part(), dims, &[0])?;
    let clamped = hermitian_eigensystem(&transposed)?.apply_fn(|l| l.max(0.0));
    partial_transpose_subset(&clamped, dims, &[0])
}
