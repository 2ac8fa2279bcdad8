//! Deterministic state fixtures shared by the criterion benchmarks.

use entcert_core::sample::{random_density, rng_from_seed, uniform_simplex_weights};
use entcert_core::states::{flag_mix, max_entangled};
use entcert_core::{DensityOperator, Ensemble, FlagBasis, Party, Register};

/// Full-rank bipartite state on registers `A` (dim `da`) and `B` (dim `db`).
pub fn bipartite_state(seed: u64, da: usize, db: usize) -> DensityOperator {
    let mut rng = rng_from_seed(seed);
    DensityOperator::new(
        random_density(da * db, da * db, &mut rng),
        vec![Register::new("A", da), Register::new("B", db)],
    )
    .expect("sampled matrix is a density operator")
}

/// Maximally entangled pair of qubits.
pub fn bell_pair() -> DensityOperator {
    max_entangled(2)
}

/// Two-member flagged mixture of full-rank two-qubit states, with the flag
/// register attached on the `B` side.
pub fn flagged_pair(seed: u64) -> DensityOperator {
    let mut rng = rng_from_seed(seed);
    let weights = uniform_simplex_weights(2, &mut rng);
    let members: Vec<_> = (0..2)
        .map(|_| {
            DensityOperator::new(
                random_density(4, 4, &mut rng),
                vec![Register::new("A", 2), Register::new("B", 2)],
            )
            .expect("sampled matrix is a density operator")
        })
        .collect();
    let ensemble = Ensemble::new(weights, members).expect("weights and members line up");
    let flag_party = Party::from("B");
    let basis = FlagBasis::computational(flag_party.primed(), 2);
    flag_mix(&ensemble, &flag_party, &basis).expect("flag mixture is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate_and_repeat() {
        let a = bipartite_state(11, 2, 3);
        let b = bipartite_state(11, 2, 3);
        assert!(a.validate().is_ok());
        assert_eq!(a.matrix().max_abs_entry(), b.matrix().max_abs_entry());

        let f = flagged_pair(5);
        assert!(f.validate().is_ok());
        assert_eq!(f.registers().len(), 3);
        assert!(bell_pair().validate().is_ok());
    }
}
