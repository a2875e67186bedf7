use serde::{Deserialize, Serialize};

use crate::attack::general::strip_reflect_zeros;
use crate::attack::{accept_and_condition, GeneralAttack, OperationSchedule};
use crate::error::Result;
use crate::quantum::pure_fidelity;

/// Outcome of checking the entanglement-based reduction on one attack.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReductionReport {
    /// Measured accept probability of the entanglement-based test.
    pub accept_probability: f64,
    /// 2^(-reflect_count), the value the reduction demands exactly.
    pub expected_accept: f64,
    /// Overlap^2 between the accepted entanglement-based state and the
    /// prepare-and-measure state with its deterministic record bits
    /// stripped. The reduction demands 1.
    pub state_fidelity: f64,
    /// Both checks within `tol`.
    pub passed: bool,
}

/// Checks the reduction for one attack and schedule: the acceptance
/// probability must equal 2^(-reflect_count), and conditioned on
/// acceptance the entanglement-based state must coincide with the
/// prepare-and-measure state. `tol` bounds the numerical deviation.
pub fn verify_reduction(
    attack: &GeneralAttack,
    schedule: &OperationSchedule,
    tol: f64,
) -> Result<ReductionReport> {
    let tau = attack.build_eqrng_state()?;
    let (accept_probability, conditioned) = accept_and_condition(&tau, schedule)?;
    let psi = attack.build_sqrng_state(schedule)?;
    let stripped = strip_reflect_zeros(&psi, schedule)?;
    let state_fidelity = pure_fidelity(&conditioned, &stripped)?;
    let expected_accept = schedule.expected_accept();
    let passed = (accept_probability - expected_accept).abs() <= tol && state_fidelity >= 1.0 - tol;
    Ok(ReductionReport {
        accept_probability,
        expected_accept,
        state_fidelity,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::{sample_random_attack, CollectiveAttack};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn honest_attack_passes_for_every_schedule() {
        let single = CollectiveAttack::honest_noiseless().to_general().unwrap();
        let attack = GeneralAttack::product_power(&single, 2).unwrap();
        for theta in ["11", "01", "10", "00"] {
            let schedule = OperationSchedule::parse(theta).unwrap();
            let report = verify_reduction(&attack, &schedule, 1e-9).unwrap();
            assert!(report.passed, "failed at theta={theta}: {report:?}");
        }
    }

    #[test]
    fn sampled_attacks_pass_with_random_schedules() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let rounds = rng.random_range(1..=3);
            let d_out = rng.random_range(1..=4);
            let attack = sample_random_attack(rounds, d_out, &mut rng).unwrap();
            let theta: String = (0..rounds)
                .map(|_| if rng.random::<bool>() { '1' } else { '0' })
                .collect();
            let schedule = OperationSchedule::parse(&theta).unwrap();
            let report = verify_reduction(&attack, &schedule, 1e-9).unwrap();
            assert!(
                report.passed,
                "rounds={rounds} d_out={d_out} theta={theta}: {report:?}"
            );
            assert!((report.accept_probability - report.expected_accept).abs() < 1e-12);
            assert!(report.state_fidelity > 1.0 - 1e-12);
        }
    }

    #[test]
    fn schedule_length_mismatch_is_an_error() {
        let single = CollectiveAttack::honest_noiseless().to_general().unwrap();
        let schedule = OperationSchedule::parse("01").unwrap();
        assert!(verify_reduction(&single, &schedule, 1e-9).is_err());
    }
}
