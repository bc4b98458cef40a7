//! Blocks, digests, and the append/verify rules shared by both chains.
//!
//! # Canonical serialization
//!
//! A block's digest is FNV-1a (64-bit) over the following byte layout,
//! all integers little-endian, floats as IEEE-754 bit patterns:
//!
//! ```text
//! index        u64
//! prev_hash    u64
//! tx_count     u64
//! transactions in order, each:
//!   tag        u8    (0 identity, 1 contract, 2 receipt)
//!   fields in declaration order; strings as u64 length + UTF-8 bytes
//! proposer     string (u64 length + UTF-8 bytes)
//! timestamp_us u64
//! ```
//!
//! The `hash` field itself is never part of the digested bytes. The
//! JSONL export carries every digested field verbatim, so a parsed
//! export re-verifies without extra context.

use serde::{Deserialize, Serialize};

use super::identity::{DroneContract, IdentityAction};
use super::LedgerError;

pub type Digest = u64;

/// `prev_hash` of every genesis block.
pub const GENESIS_PREV: Digest = 0;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainMode {
    Private,
    Public,
}

/// Axis-aligned service rectangle, corners in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn is_well_formed(&self) -> bool {
        self.x_min.is_finite()
            && self.y_min.is_finite()
            && self.x_max.is_finite()
            && self.y_max.is_finite()
            && self.x_min <= self.x_max
            && self.y_min <= self.y_max
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Transaction {
    IdentityRegistration {
        drone_id: String,
        provider: String,
        credential: String,
        action: IdentityAction,
    },
    ContractSignature {
        contract: DroneContract,
    },
    DeliveryReceipt {
        flow: u32,
        src: String,
        dst: String,
        hops: u32,
        timestamp_us: u64,
    },
}

impl Transaction {
    fn canonical_bytes(&self, out: &mut Vec<u8>) {
        fn put_str(out: &mut Vec<u8>, s: &str) {
            out.extend_from_slice(&(s.len() as u64).to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        }
        match self {
            Transaction::IdentityRegistration { drone_id, provider, credential, action } => {
                out.push(0);
                put_str(out, drone_id);
                put_str(out, provider);
                put_str(out, credential);
                out.push(match action {
                    IdentityAction::Register => 0,
                    IdentityAction::Revoke => 1,
                });
            }
            Transaction::ContractSignature { contract } => {
                out.push(1);
                put_str(out, &contract.drone_id);
                put_str(out, &contract.provider);
                for v in [
                    contract.service_area.x_min,
                    contract.service_area.y_min,
                    contract.service_area.x_max,
                    contract.service_area.y_max,
                    contract.valid_from_s,
                    contract.valid_to_s,
                ] {
                    out.extend_from_slice(&v.to_bits().to_le_bytes());
                }
                put_str(out, &contract.resource_commitment);
            }
            Transaction::DeliveryReceipt { flow, src, dst, hops, timestamp_us } => {
                out.push(2);
                out.extend_from_slice(&u64::from(*flow).to_le_bytes());
                put_str(out, src);
                put_str(out, dst);
                out.extend_from_slice(&u64::from(*hops).to_le_bytes());
                out.extend_from_slice(&timestamp_us.to_le_bytes());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub index: u64,
    #[serde(with = "hex_digest")]
    pub prev_hash: Digest,
    #[serde(with = "hex_digest")]
    pub hash: Digest,
    pub proposer: String,
    pub timestamp_us: u64,
    pub transactions: Vec<Transaction>,
}

mod hex_digest {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&format!("{v:016x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<u64, D::Error> {
        let s = String::deserialize(de)?;
        u64::from_str_radix(&s, 16).map_err(serde::de::Error::custom)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub fn block_digest(
    index: u64,
    prev_hash: Digest,
    transactions: &[Transaction],
    proposer: &str,
    timestamp_us: u64,
) -> Digest {
    let mut bytes = Vec::with_capacity(64 + transactions.len() * 64);
    bytes.extend_from_slice(&index.to_le_bytes());
    bytes.extend_from_slice(&prev_hash.to_le_bytes());
    bytes.extend_from_slice(&(transactions.len() as u64).to_le_bytes());
    for tx in transactions {
        tx.canonical_bytes(&mut bytes);
    }
    bytes.extend_from_slice(&(proposer.len() as u64).to_le_bytes());
    bytes.extend_from_slice(proposer.as_bytes());
    bytes.extend_from_slice(&timestamp_us.to_le_bytes());
    fnv1a(&bytes)
}

impl Block {
    fn sealed(
        index: u64,
        prev_hash: Digest,
        transactions: Vec<Transaction>,
        proposer: String,
        timestamp_us: u64,
    ) -> Block {
        let hash = block_digest(index, prev_hash, &transactions, &proposer, timestamp_us);
        Block { index, prev_hash, hash, proposer, timestamp_us, transactions }
    }
}

/// Where a chain failed verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyFailure {
    pub index: u64,
    pub reason: String,
}

/// Structural and cryptographic check over a block sequence: indexes run
/// 0..len, the genesis back-pointer is zero, every `prev_hash` matches
/// the predecessor's `hash`, and every `hash` matches a recomputed
/// digest of the block's own contents.
pub fn verify_blocks(blocks: &[Block]) -> Result<(), VerifyFailure> {
    if blocks.is_empty() {
        return Err(VerifyFailure { index: 0, reason: "chain is empty".into() });
    }
    for (i, block) in blocks.iter().enumerate() {
        let expect_index = i as u64;
        if block.index != expect_index {
            return Err(VerifyFailure {
                index: expect_index,
                reason: format!("index {} out of sequence", block.index),
            });
        }
        let expect_prev = if i == 0 { GENESIS_PREV } else { blocks[i - 1].hash };
        if block.prev_hash != expect_prev {
            return Err(VerifyFailure {
                index: expect_index,
                reason: "previous-hash link broken".into(),
            });
        }
        let recomputed = block_digest(
            block.index,
            block.prev_hash,
            &block.transactions,
            &block.proposer,
            block.timestamp_us,
        );
        if block.hash != recomputed {
            return Err(VerifyFailure {
                index: expect_index,
                reason: "stored hash does not match block contents".into(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub mode: ChainMode,
    pub members: Vec<String>,
    pub blocks: Vec<Block>,
}

impl Chain {
    /// Starts a chain with its genesis block. A private chain requires at
    /// least one member; the member set is fixed for the chain's life.
    pub fn genesis(mode: ChainMode, members: Vec<String>) -> Result<Chain, LedgerError> {
        if mode == ChainMode::Private && members.is_empty() {
            return Err(LedgerError::EmptyMembership);
        }
        let block = Block::sealed(0, GENESIS_PREV, Vec::new(), "genesis".into(), 0);
        Ok(Chain { mode, members, blocks: vec![block] })
    }

    pub fn is_member(&self, proposer: &str) -> bool {
        self.members.iter().any(|m| m == proposer)
    }

    pub fn head(&self) -> &Block {
        self.blocks.last().expect("chain always holds at least the genesis block")
    }

    /// Appends a sealed block and returns the extended chain; `self` is
    /// untouched. On a private chain the proposer must be a member.
    pub fn append_block(
        &self,
        transactions: Vec<Transaction>,
        proposer: &str,
        timestamp_us: u64,
    ) -> Result<Chain, LedgerError> {
        if self.mode == ChainMode::Private && !self.is_member(proposer) {
            return Err(LedgerError::NotMember { proposer: proposer.to_string() });
        }
        let head = self.head();
        let block = Block::sealed(
            head.index + 1,
            head.hash,
            transactions,
            proposer.to_string(),
            timestamp_us,
        );
        let mut blocks = self.blocks.clone();
        blocks.push(block);
        Ok(Chain { mode: self.mode, members: self.members.clone(), blocks })
    }

    pub fn verify(&self) -> Result<(), VerifyFailure> {
        verify_blocks(&self.blocks)
    }

    /// One JSON object per block, in chain order.
    pub fn export_jsonl(&self) -> String {
        let mut out = String::new();
        for block in &self.blocks {
            out.push_str(&serde_json::to_string(block).expect("block serializes"));
            out.push('\n');
        }
        out
    }
}

/// Parses a JSONL export back into its block sequence.
pub fn parse_chain_export(text: &str) -> Result<Vec<Block>, LedgerError> {
    text.lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| {
            serde_json::from_str::<Block>(line)
                .map_err(|e| LedgerError::ExportParse(e.to_string()))
        })
        .collect()
}
