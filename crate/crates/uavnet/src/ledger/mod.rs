//! Permissioned ledger: two hash-pointer chains and a consensus model.
//!
//! The private chain is writable by infrastructure providers only and
//! carries UAV identities and service contracts. The public chain holds
//! delivery receipts committed by validator rounds. Integrity rests on
//! per-block digests over a canonical byte serialization; any field
//! mutation breaks either the block's own digest or the next block's
//! back-pointer.

mod chain;
mod consensus;
mod identity;

pub use chain::{
    block_digest, parse_chain_export, verify_blocks, Block, Chain, ChainMode, Digest, Rect,
    Transaction, VerifyFailure, GENESIS_PREV,
};
pub use consensus::{consensus_commit, ConsensusRoundOutcome};
pub use identity::{
    authenticate, register_identity, revoke_identity, sign_contract, AuthResult, DroneContract,
    IdentityAction, IdentityRecord, IdentityRegistry, IdentityStatus, AUTH_CONTROL_MESSAGES,
};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LedgerError {
    #[error("a private chain needs a non-empty member set")]
    EmptyMembership,
    #[error("proposer {proposer:?} is not a member of the private chain")]
    NotMember { proposer: String },
    #[error("drone {drone_id:?} already has an active identity")]
    DuplicateIdentity { drone_id: String },
    #[error("drone {drone_id:?} has no active identity")]
    NoActiveIdentity { drone_id: String },
    #[error("contract for {drone_id:?} has an empty validity window ({valid_from_s}..{valid_to_s})")]
    InvalidContractWindow { drone_id: String, valid_from_s: f64, valid_to_s: f64 },
    #[error("contract service area is malformed")]
    MalformedServiceArea,
    #[error("chain verification failed at block {index}: {reason}")]
    Verify { index: u64, reason: String },
    #[error("chain export parse error: {0}")]
    ExportParse(String),
}
