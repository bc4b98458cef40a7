//! Validator round accounting for the public chain.
//!
//! A round follows the classic three-phase pattern: the leader
//! broadcasts the proposal, then every validator exchanges prepare and
//! commit votes with every other. With `n` validators that is
//! `(n - 1) + 2 * n * (n - 1)` messages. The round reaches commitment
//! only when the validator set can absorb the declared number of
//! byzantine members, `n >= 3 * f + 1`. A single validator commits
//! trivially and sends nothing.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConsensusRoundOutcome {
    pub committed: bool,
    pub messages: u64,
}

pub fn consensus_commit(validators: u32, faulty: u32) -> ConsensusRoundOutcome {
    let n = u64::from(validators);
    let messages = if n == 0 { 0 } else { (n - 1) + 2 * n * (n - 1) };
    // Written as the canonical quorum inequality rather than `> 3f`.
    #[allow(clippy::int_plus_one)]
    let committed = validators >= 3 * faulty + 1;
    ConsensusRoundOutcome { committed, messages }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_validators_one_faulty_commit_in_27_messages() {
        let outcome = consensus_commit(4, 1);
        assert!(outcome.committed);
        assert_eq!(outcome.messages, 27);
    }

    #[test]
    fn quorum_threshold() {
        assert!(!consensus_commit(3, 1).committed);
        assert!(consensus_commit(4, 1).committed);
        assert!(!consensus_commit(6, 2).committed);
        assert!(consensus_commit(7, 2).committed);
        assert!(consensus_commit(1, 0).committed);
    }

    #[test]
    fn single_validator_sends_nothing() {
        assert_eq!(consensus_commit(1, 0).messages, 0);
        assert_eq!(consensus_commit(0, 0).messages, 0);
    }

    #[test]
    fn formula_matches_enumerated_exchange() {
        // Count the messages one by one: leader proposal to each other
        // validator, then all-to-all prepare and commit votes.
        for n in 1u32..=20 {
            let mut count = 0u64;
            for receiver in 0..n {
                if receiver != 0 {
                    count += 1;
                }
            }
            for _phase in 0..2 {
                for sender in 0..n {
                    for receiver in 0..n {
                        if sender != receiver {
                            count += 1;
                        }
                    }
                }
            }
            assert_eq!(consensus_commit(n, 0).messages, count, "n = {n}");
        }
    }
}
