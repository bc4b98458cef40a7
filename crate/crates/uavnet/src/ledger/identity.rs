//! UAV identities and service contracts, derived by replaying the
//! private chain. The registry is never stored separately; any reader
//! with the chain reconstructs the same state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::chain::{Chain, Rect, Transaction};
use super::LedgerError;

/// Control messages exchanged for one relay authentication check: the
/// challenge to the candidate and its credential response.
pub const AUTH_CONTROL_MESSAGES: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityAction {
    Register,
    Revoke,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityStatus {
    Active,
    Revoked,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityRecord {
    pub drone_id: String,
    pub provider: String,
    pub credential: String,
    pub status: IdentityStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroneContract {
    pub drone_id: String,
    pub provider: String,
    pub service_area: Rect,
    pub valid_from_s: f64,
    pub valid_to_s: f64,
    pub resource_commitment: String,
}

impl DroneContract {
    pub fn covers(&self, x: f64, y: f64, t_s: f64) -> bool {
        t_s >= self.valid_from_s && t_s <= self.valid_to_s && self.service_area.contains(x, y)
    }
}

/// Identity and contract state at the head of a chain.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct IdentityRegistry {
    records: BTreeMap<String, IdentityRecord>,
    contracts: Vec<DroneContract>,
}

impl IdentityRegistry {
    /// Folds every transaction in chain order. Errors surface states an
    /// honest chain cannot reach (append-time validation forbids them),
    /// so a failure here means a forged or corrupted history.
    pub fn replay(chain: &Chain) -> Result<IdentityRegistry, LedgerError> {
        let mut registry = IdentityRegistry::default();
        for block in &chain.blocks {
            for tx in &block.transactions {
                registry.apply(tx)?;
            }
        }
        Ok(registry)
    }

    fn apply(&mut self, tx: &Transaction) -> Result<(), LedgerError> {
        match tx {
            Transaction::IdentityRegistration { drone_id, provider, credential, action } => {
                match action {
                    IdentityAction::Register => {
                        if self.status_of(drone_id) == Some(IdentityStatus::Active) {
                            return Err(LedgerError::DuplicateIdentity {
                                drone_id: drone_id.clone(),
                            });
                        }
                        self.records.insert(
                            drone_id.clone(),
                            IdentityRecord {
                                drone_id: drone_id.clone(),
                                provider: provider.clone(),
                                credential: credential.clone(),
                                status: IdentityStatus::Active,
                            },
                        );
                    }
                    IdentityAction::Revoke => {
                        let record = self.records.get_mut(drone_id).ok_or_else(|| {
                            LedgerError::NoActiveIdentity { drone_id: drone_id.clone() }
                        })?;
                        record.status = IdentityStatus::Revoked;
                    }
                }
            }
            Transaction::ContractSignature { contract } => {
                if self.status_of(&contract.drone_id) != Some(IdentityStatus::Active) {
                    return Err(LedgerError::NoActiveIdentity {
                        drone_id: contract.drone_id.clone(),
                    });
                }
                self.contracts.push(contract.clone());
            }
            Transaction::DeliveryReceipt { .. } => {}
        }
        Ok(())
    }

    pub fn status_of(&self, drone_id: &str) -> Option<IdentityStatus> {
        self.records.get(drone_id).map(|r| r.status)
    }

    pub fn record(&self, drone_id: &str) -> Option<&IdentityRecord> {
        self.records.get(drone_id)
    }

    pub fn contracts_for<'a>(
        &'a self,
        drone_id: &'a str,
    ) -> impl Iterator<Item = &'a DroneContract> + 'a {
        self.contracts.iter().filter(move |c| c.drone_id == drone_id)
    }

    pub fn active_count(&self) -> usize {
        self.records.values().filter(|r| r.status == IdentityStatus::Active).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuthResult {
    pub accepted: bool,
    pub control_messages: u64,
}

/// Challenge-response check against the replayed registry. Costs
/// [`AUTH_CONTROL_MESSAGES`] whether or not it accepts.
pub fn authenticate(registry: &IdentityRegistry, drone_id: &str, credential: &str) -> AuthResult {
    let accepted = registry
        .record(drone_id)
        .map(|r| r.status == IdentityStatus::Active && r.credential == credential)
        .unwrap_or(false);
    AuthResult { accepted, control_messages: AUTH_CONTROL_MESSAGES }
}

/// Appends a registration block proposed by the issuing provider.
/// Fails if the drone already holds an active identity.
pub fn register_identity(
    chain: &Chain,
    drone_id: &str,
    provider: &str,
    credential: &str,
    timestamp_us: u64,
) -> Result<Chain, LedgerError> {
    let registry = IdentityRegistry::replay(chain)?;
    if registry.status_of(drone_id) == Some(IdentityStatus::Active) {
        return Err(LedgerError::DuplicateIdentity { drone_id: drone_id.to_string() });
    }
    chain.append_block(
        vec![Transaction::IdentityRegistration {
            drone_id: drone_id.to_string(),
            provider: provider.to_string(),
            credential: credential.to_string(),
            action: IdentityAction::Register,
        }],
        provider,
        timestamp_us,
    )
}

/// Appends a revocation block. Fails if the drone has no active identity.
pub fn revoke_identity(
    chain: &Chain,
    drone_id: &str,
    provider: &str,
    timestamp_us: u64,
) -> Result<Chain, LedgerError> {
    let registry = IdentityRegistry::replay(chain)?;
    if registry.status_of(drone_id) != Some(IdentityStatus::Active) {
        return Err(LedgerError::NoActiveIdentity { drone_id: drone_id.to_string() });
    }
    let credential = registry
        .record(drone_id)
        .map(|r| r.credential.clone())
        .unwrap_or_default();
    chain.append_block(
        vec![Transaction::IdentityRegistration {
            drone_id: drone_id.to_string(),
            provider: provider.to_string(),
            credential,
            action: IdentityAction::Revoke,
        }],
        provider,
        timestamp_us,
    )
}

/// Appends a signed service contract. The drone must hold an active
/// identity and the validity window and area must be well-formed.
pub fn sign_contract(
    chain: &Chain,
    contract: DroneContract,
    timestamp_us: u64,
) -> Result<Chain, LedgerError> {
    if !contract.service_area.is_well_formed() {
        return Err(LedgerError::MalformedServiceArea);
    }
    if !(contract.valid_from_s.is_finite() && contract.valid_to_s.is_finite())
        || contract.valid_to_s < contract.valid_from_s
    {
        return Err(LedgerError::InvalidContractWindow {
            drone_id: contract.drone_id.clone(),
            valid_from_s: contract.valid_from_s,
            valid_to_s: contract.valid_to_s,
        });
    }
    let registry = IdentityRegistry::replay(chain)?;
    if registry.status_of(&contract.drone_id) != Some(IdentityStatus::Active) {
        return Err(LedgerError::NoActiveIdentity { drone_id: contract.drone_id.clone() });
    }
    let proposer = contract.provider.clone();
    chain.append_block(
        vec![Transaction::ContractSignature { contract }],
        &proposer,
        timestamp_us,
    )
}

#[cfg(test)]
mod tests {
    use super::super::chain::ChainMode;
    use super::*;

    fn private_chain() -> Chain {
        Chain::genesis(ChainMode::Private, vec!["provider-a".into(), "provider-b".into()])
            .unwrap()
    }

    fn area() -> Rect {
        Rect { x_min: 0.0, y_min: 0.0, x_max: 1500.0, y_max: 1500.0 }
    }

    #[test]
    fn register_then_authenticate() {
        let chain =
            register_identity(&private_chain(), "u0", "provider-a", "cred-u0", 5).unwrap();
        let registry = IdentityRegistry::replay(&chain).unwrap();
        assert_eq!(registry.status_of("u0"), Some(IdentityStatus::Active));
        assert_eq!(registry.active_count(), 1);

        let ok = authenticate(&registry, "u0", "cred-u0");
        assert!(ok.accepted);
        assert_eq!(ok.control_messages, 2);

        let wrong = authenticate(&registry, "u0", "cred-forged");
        assert!(!wrong.accepted);
        assert_eq!(wrong.control_messages, 2);

        assert!(!authenticate(&registry, "u99", "cred-u0").accepted);
    }

    #[test]
    fn duplicate_active_registration_rejected() {
        let chain =
            register_identity(&private_chain(), "u0", "provider-a", "cred-u0", 5).unwrap();
        let err = register_identity(&chain, "u0", "provider-b", "cred-again", 6).unwrap_err();
        assert_eq!(err, LedgerError::DuplicateIdentity { drone_id: "u0".into() });
    }

    #[test]
    fn revoked_identity_fails_auth_and_can_reregister() {
        let chain =
            register_identity(&private_chain(), "u0", "provider-a", "cred-u0", 5).unwrap();
        let chain = revoke_identity(&chain, "u0", "provider-a", 9).unwrap();
        let registry = IdentityRegistry::replay(&chain).unwrap();
        assert_eq!(registry.status_of("u0"), Some(IdentityStatus::Revoked));
        assert!(!authenticate(&registry, "u0", "cred-u0").accepted);

        // A fresh credential can be issued after revocation.
        let chain = register_identity(&chain, "u0", "provider-b", "cred-u0-v2", 12).unwrap();
        let registry = IdentityRegistry::replay(&chain).unwrap();
        assert!(authenticate(&registry, "u0", "cred-u0-v2").accepted);
        assert!(!authenticate(&registry, "u0", "cred-u0").accepted);
    }

    #[test]
    fn revoking_unknown_identity_fails() {
        let err = revoke_identity(&private_chain(), "u7", "provider-a", 1).unwrap_err();
        assert_eq!(err, LedgerError::NoActiveIdentity { drone_id: "u7".into() });
    }

    #[test]
    fn contract_requires_active_identity_and_sane_window() {
        let chain =
            register_identity(&private_chain(), "u1", "provider-b", "cred-u1", 2).unwrap();

        let good = DroneContract {
            drone_id: "u1".into(),
            provider: "provider-b".into(),
            service_area: area(),
            valid_from_s: 0.0,
            valid_to_s: 60.0,
            resource_commitment: "relay".into(),
        };
        let chain = sign_contract(&chain, good.clone(), 3).unwrap();
        let registry = IdentityRegistry::replay(&chain).unwrap();
        let stored: Vec<_> = registry.contracts_for("u1").collect();
        assert_eq!(stored, vec![&good]);
        assert!(good.covers(100.0, 100.0, 30.0));
        assert!(!good.covers(100.0, 100.0, 61.0));
        assert!(!good.covers(-1.0, 100.0, 30.0));

        let backwards = DroneContract { valid_from_s: 50.0, valid_to_s: 10.0, ..good.clone() };
        assert!(matches!(
            sign_contract(&chain, backwards, 4).unwrap_err(),
            LedgerError::InvalidContractWindow { .. }
        ));

        let unregistered = DroneContract { drone_id: "u9".into(), ..good };
        assert_eq!(
            sign_contract(&chain, unregistered, 5).unwrap_err(),
            LedgerError::NoActiveIdentity { drone_id: "u9".into() }
        );
    }

    #[test]
    fn replay_rejects_forged_duplicate_history() {
        // Hand-build a chain whose transactions bypass the op-level checks.
        let chain = private_chain()
            .append_block(
                vec![
                    Transaction::IdentityRegistration {
                        drone_id: "u0".into(),
                        provider: "provider-a".into(),
                        credential: "c1".into(),
                        action: IdentityAction::Register,
                    },
                    Transaction::IdentityRegistration {
                        drone_id: "u0".into(),
                        provider: "provider-b".into(),
                        credential: "c2".into(),
                        action: IdentityAction::Register,
                    },
                ],
                "provider-a",
                1,
            )
            .unwrap();
        assert_eq!(
            IdentityRegistry::replay(&chain).unwrap_err(),
            LedgerError::DuplicateIdentity { drone_id: "u0".into() }
        );
    }
}
