//! Entropic functionals in natural log units.

use crate::eigen::hermitian_eigensystem;
use crate::error::Result;
use crate::matrix::ComplexMatrix;
use crate::tensor::expectation;

/// Eigenvalues below this contribute zero to `lambda ln lambda` terms.
pub const ENTROPY_EIGENVALUE_CUTOFF: f64 = 1e-15;

/// Eigenvalues of the second argument below this count as its kernel when
/// testing the support condition of the relative entropy.
pub const SUPPORT_EIGENVALUE_CUTOFF: f64 = 1e-12;

/// Probability mass of the first argument allowed on the kernel of the
/// second before the relative entropy is declared infinite.
pub const SUPPORT_OVERLAP_TOL: f64 = 1e-10;

/// `-sum lambda ln lambda` over the spectrum of a density operator, in nats.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let spec = hermitian_eigensystem(rho)?;
    let mut s = 0.0;
    for &lambda in spec.eigenvalues() {
        if lambda >= ENTROPY_EIGENVALUE_CUTOFF {
            s -= lambda * lambda.ln();
        }
    }
    Ok(s)
}

/// Relative entropy `S(rho|sigma) = Tr rho ln rho - Tr rho ln sigma` in nats.
///
/// Returns `f64::INFINITY` when the support of `rho` leaks outside the
/// support of `sigma`; small negative rounding residue is clamped to zero.
pub fn relative_entropy(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.rows != sigma.rows || !rho.is_square() || !sigma.is_square() {
        return Err(crate::error::CoreError::structural(
            "relative entropy needs square operators of equal dimension",
        ));
    }
    let rho_spec = hermitian_eigensystem(rho)?;
    let mut tr_rho_ln_rho = 0.0;
    for &lambda in rho_spec.eigenvalues() {
        if lambda >= ENTROPY_EIGENVALUE_CUTOFF {
            tr_rho_ln_rho += lambda * lambda.ln();
        }
    }

    let sigma_spec = hermitian_eigensystem(sigma)?;
    let mut tr_rho_ln_sigma = 0.0;
    let mut kernel_mass = 0.0;
    for (k, &mu) in sigma_spec.eigenvalues().iter().enumerate() {
        let w = sigma_spec.eigenvector(k);
        let overlap = expectation(rho, &w).re.max(0.0);
        if mu <= SUPPORT_EIGENVALUE_CUTOFF {
            kernel_mass += overlap;
        } else {
            tr_rho_ln_sigma += overlap * mu.ln();
        }
    }
    if kernel_mass > SUPPORT_OVERLAP_TOL {
        return Ok(f64::INFINITY);
    }
    Ok((tr_rho_ln_rho - tr_rho_ln_sigma).max(0.0))
}
