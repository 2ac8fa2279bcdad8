//! Entanglement measures packaged behind a uniform evaluation handle, plus
//! an independent lower-bound oracle used to disambiguate solver noise.

mod controls;
mod negativity;
mod ppt;
mod ree;

pub use controls::{control_purity, control_reduction_entropy};
pub use negativity::{negativity, negativity_measure};
pub use ppt::{ppt_relative_entropy, PptResult};
pub use ree::{ree, ree_measure, ProductTerm, ReeConfig, ReeResult, SeparableApprox};

use num_complex::Complex64;
use std::sync::Arc;

use crate::eigen::HermitianSpectrum;
use crate::entropy::{ENTROPY_EIGENVALUE_CUTOFF, SUPPORT_EIGENVALUE_CUTOFF, SUPPORT_OVERLAP_TOL};
use crate::matrix::ComplexMatrix;
use crate::states::DensityOperator;

type EvalFn = Arc<dyn Fn(&DensityOperator) -> f64 + Send + Sync>;

/// A named measure: a deterministic evaluation function, its convexity
/// declaration, and optionally an independent oracle evaluation used to
/// second-guess borderline violations of optimization-based measures.
#[derive(Clone)]
pub struct MeasureHandle {
    name: String,
    declared_convex: bool,
    eval: EvalFn,
    oracle: Option<EvalFn>,
}

impl MeasureHandle {
    pub fn new(
        name: impl Into<String>,
        declared_convex: bool,
        eval: impl Fn(&DensityOperator) -> f64 + Send + Sync + 'static,
    ) -> Self {
        MeasureHandle {
            name: name.into(),
            declared_convex,
            eval: Arc::new(eval),
            oracle: None,
        }
    }

    pub fn with_oracle(
        mut self,
        oracle: impl Fn(&DensityOperator) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.oracle = Some(Arc::new(oracle));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn declared_convex(&self) -> bool {
        self.declared_convex
    }

    pub fn evaluate(&self, rho: &DensityOperator) -> f64 {
        (self.eval)(rho)
    }

    pub fn has_oracle(&self) -> bool {
        self.oracle.is_some()
    }

    pub fn oracle_evaluate(&self, rho: &DensityOperator) -> Option<f64> {
        self.oracle.as_ref().map(|f| f(rho))
    }
}

impl std::fmt::Debug for MeasureHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MeasureHandle")
            .field("name", &self.name)
            .field("declared_convex", &self.declared_convex)
            .field("has_oracle", &self.oracle.is_some())
            .finish()
    }
}

/// Looks up a built-in measure by its command-line name.
pub fn builtin_measure(name: &str) -> Option<MeasureHandle> {
    match name {
        "negativity" => Some(negativity_measure()),
        "ree" => Some(ree_measure(ReeConfig::default())),
        "control-purity" => Some(control_purity()),
        "control-reduction-entropy" => Some(control_reduction_entropy()),
        _ => None,
    }
}

pub const BUILTIN_MEASURE_NAMES: [&str; 4] = [
    "negativity",
    "ree",
    "control-purity",
    "control-reduction-entropy",
];

/// Whether a built-in measure is expected to certify as a monotone.
pub fn builtin_expected_monotone(name: &str) -> Option<bool> {
    match name {
        "negativity" | "ree" => Some(true),
        "control-purity" | "control-reduction-entropy" => Some(false),
        _ => None,
    }
}

/// `Tr rho ln sigma` computed from `sigma`'s spectrum; `-inf` when `rho`
/// puts more than [`SUPPORT_OVERLAP_TOL`] mass on `sigma`'s kernel.
pub(crate) fn cross_log_term(rho: &ComplexMatrix, sigma_spec: &HermitianSpectrum) -> f64 {
    let mut acc = 0.0;
    let mut kernel_mass = 0.0;
    for (k, &mu) in sigma_spec.eigenvalues().iter().enumerate() {
        let v = sigma_spec.eigenvector(k);
        let q = crate::tensor::expectation(rho, &v).re.max(0.0);
        if mu <= SUPPORT_EIGENVALUE_CUTOFF {
            kernel_mass += q;
        } else {
            acc += q * mu.ln();
        }
    }
    if kernel_mass > SUPPORT_OVERLAP_TOL {
        f64::NEG_INFINITY
    } else {
        acc
    }
}

/// `Tr rho ln rho` over the spectrum of `rho` with the entropy cutoff.
pub(crate) fn self_log_term(rho_spec: &HermitianSpectrum) -> f64 {
    rho_spec
        .eigenvalues()
        .iter()
        .filter(|&&x| x >= ENTROPY_EIGENVALUE_CUTOFF)
        .map(|&x| x * x.ln())
        .sum()
}

/// Gradient of `sigma -> S(rho|sigma)` at a full-rank `sigma`, via the
/// derivative of the matrix logarithm: in `sigma`'s eigenbasis the kernel is
/// the divided difference `k(a, b) = (ln a - ln b)/(a - b)`, `k(a, a) = 1/a`,
/// and the gradient is `-W (rho_tilde o K) W^dagger`.
pub(crate) fn relative_entropy_gradient(
    rho: &ComplexMatrix,
    sigma_spec: &HermitianSpectrum,
) -> ComplexMatrix {
    let d = sigma_spec.dim();
    let w = sigma_spec.eigenvectors();
    let mu = sigma_spec.eigenvalues();
    let rho_tilde = w.adjoint().matmul(rho).matmul(w);
    let mut core = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let k = log_divided_difference(mu[i], mu[j]);
            core.set(i, j, rho_tilde.get(i, j) * Complex64::new(-k, 0.0));
        }
    }
    w.matmul(&core).matmul(&w.adjoint()).hermitian_part()
}

fn log_divided_difference(a: f64, b: f64) -> f64 {
    let a = a.max(SUPPORT_EIGENVALUE_CUTOFF);
    let b = b.max(SUPPORT_EIGENVALUE_CUTOFF);
    if (a - b).abs() <= 1e-12 * a.max(b) {
        1.0 / (0.5 * (a + b))
    } else {
        (a.ln() - b.ln()) / (a - b)
    }
}
