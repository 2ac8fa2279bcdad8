//! Deliberately non-monotone control measures: the certifier must reject
//! both, each through a different failing condition.

use crate::entropy::von_neumann_entropy;
use crate::measures::MeasureHandle;
use crate::states::DensityOperator;

/// Purity `Tr rho^2`. Convex and locally unitary invariant, but it scales
/// under flag mixing (`sum p_i^2 Tr rho_i^2` against `sum p_i Tr rho_i^2`),
/// so the flag-affinity check must fail.
pub fn control_purity() -> MeasureHandle {
    MeasureHandle::new("control-purity", true, |rho: &DensityOperator| rho.purity())
}

/// Entropy of the first site's marginal. Concave in the state, so the
/// convexity check must fail.
pub fn control_reduction_entropy() -> MeasureHandle {
    MeasureHandle::new("control-reduction-entropy", false, |rho: &DensityOperator| {
        let site = rho.registers()[0].party.site().to_owned();
        let marginal = rho.site_marginal(&site).expect("state has its own site");
        von_neumann_entropy(marginal.matrix()).expect("marginal of a valid state")
    })
}
