//! Negativity: the trace norm of the partial transpose across a cut.

use crate::eigen::trace_norm;
use crate::error::Result;
use crate::measures::MeasureHandle;
use crate::states::{DensityOperator, Party};

/// Trace norm of the partial transpose across the given cut. Equals 1
/// exactly when the state is PPT across that cut, and exceeds 1 otherwise;
/// both transpose sides give the same value.
pub fn negativity(rho: &DensityOperator, cut: &[Party]) -> Result<f64> {
    let pt = rho.partial_transpose_cut(cut)?;
    trace_norm(&pt)
}

/// Measure handle using the default cut (the first register's site versus
/// the rest), so primed ancilla registers stay on their owner's side.
pub fn negativity_measure() -> MeasureHandle {
    MeasureHandle::new("negativity", true, |rho: &DensityOperator| {
        negativity(rho, &rho.default_cut()).expect("negativity on a valid state")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{haar_unitary, random_density, rng_from_seed};
    use crate::states::{
        flag_mix, max_entangled, random_separable, DensityOperator, Ensemble, FlagBasis, Party,
        Register,
    };

    fn pair(seed: u64, da: usize, db: usize) -> DensityOperator {
        let mut rng = rng_from_seed(seed);
        DensityOperator::new(
            random_density(da * db, da * db, &mut rng),
            vec![Register::new("A", da), Register::new("B", db)],
        )
        .unwrap()
    }

    #[test]
    fn separable_states_have_unit_negativity() {
        for seed in [1u64, 2, 3] {
            let mut rng = rng_from_seed(seed);
            let rho = random_separable((2, 3), 8, &mut rng);
            let v = negativity(&rho, &[Party::new("A")]).unwrap();
            assert!((v - 1.0).abs() < 1e-10, "negativity {}", v);
        }
    }

    #[test]
    fn maximally_entangled_negativity_equals_the_dimension() {
        // Partial-transpose spectrum +-1/d with multiplicities d(d+1)/2 and
        // d(d-1)/2 gives trace norm (d^2+d)/2d + (d^2-d)/2d = d.
        for d in [2usize, 3, 4] {
            let v = negativity(&max_entangled(d), &[Party::new("A")]).unwrap();
            assert!((v - d as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn both_transpose_sides_agree() {
        let rho = pair(5, 2, 3);
        let a = negativity(&rho, &[Party::new("A")]).unwrap();
        let b = negativity(&rho, &[Party::new("B")]).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn negativity_distributes_over_flag_mixtures() {
        let (r1, r2, r3) = (pair(7, 2, 2), pair(8, 2, 2), pair(9, 2, 2));
        let weights = vec![0.2, 0.5, 0.3];
        let ens = Ensemble::new(weights.clone(), vec![r1, r2, r3]).unwrap();
        let basis = FlagBasis::computational("B'", 3);
        let flagged = flag_mix(&ens, &Party::new("B"), &basis).unwrap();
        let whole = negativity_measure().evaluate(&flagged);
        let split: f64 = ens
            .iter()
            .map(|(w, s)| w * negativity(s, &[Party::new("A")]).unwrap())
            .sum();
        assert!((whole - split).abs() < 1e-10, "{} vs {}", whole, split);
    }

    #[test]
    fn negativity_is_invariant_under_local_unitaries_and_ancillas() {
        let rho = pair(11, 3, 2);
        let base = negativity_measure().evaluate(&rho);
        let mut rng = rng_from_seed(13);
        let rotated = rho
            .apply_local_unitary(&Party::new("A"), &haar_unitary(3, &mut rng))
            .unwrap()
            .apply_local_unitary(&Party::new("B"), &haar_unitary(2, &mut rng))
            .unwrap();
        assert!((negativity_measure().evaluate(&rotated) - base).abs() < 1e-10);

        let sigma = DensityOperator::new(
            random_density(2, 2, &mut rng),
            vec![Register::new("X", 2)],
        )
        .unwrap();
        let padded = rho.embed_ancilla(&sigma, "B").unwrap();
        assert!((negativity_measure().evaluate(&padded) - base).abs() < 1e-10);
    }
}
