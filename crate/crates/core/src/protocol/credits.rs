use thiserror::Error;

use super::PeerId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("peer {peer} would drop to {balance} credits, below -{limit}")]
    BelowLimit { peer: PeerId, balance: i64, limit: i64 },
    #[error("credit amount must be positive")]
    NonPositive,
}

/// Persistent per-peer credit balances. Transfers are zero-sum; seeding
/// rewards are minted and tracked so that `total() == minted()` always.
#[derive(Debug, Clone, PartialEq)]
pub struct CreditLedger {
    balances: Vec<i64>,
    limit: i64,
    minted: i64,
}

impl CreditLedger {
    pub fn new(peers: usize, credit_limit: u64) -> Self {
        CreditLedger {
            balances: vec![0; peers],
            limit: credit_limit as i64,
            minted: 0,
        }
    }

    pub fn limit(&self) -> i64 {
        self.limit
    }

    pub fn balance(&self, peer: PeerId) -> i64 {
        self.balances[peer as usize]
    }

    pub fn balances(&self) -> &[i64] {
        &self.balances
    }

    pub fn can_spend(&self, peer: PeerId, amount: i64) -> bool {
        self.balances[peer as usize] - amount >= -self.limit
    }

    /// Zero-sum move of `amount` credits.
    pub fn transfer(&mut self, from: PeerId, to: PeerId, amount: i64) -> Result<(), LedgerError> {
        if amount <= 0 {
            return Err(LedgerError::NonPositive);
        }
        if !self.can_spend(from, amount) {
            return Err(LedgerError::BelowLimit {
                peer: from,
                balance: self.balances[from as usize] - amount,
                limit: self.limit,
            });
        }
        self.balances[from as usize] -= amount;
        self.balances[to as usize] += amount;
        Ok(())
    }

    /// Seeding reward: new credits with no payer.
    pub fn mint(&mut self, peer: PeerId, amount: i64) {
        self.balances[peer as usize] += amount;
        self.minted += amount;
    }

    pub fn minted(&self) -> i64 {
        self.minted
    }

    pub fn total(&self) -> i64 {
        self.balances.iter().sum()
    }

    pub fn floor_respected(&self) -> bool {
        self.balances.iter().all(|&b| b >= -self.limit)
    }
}

/// Voluntary zero-sum gift, typically to a buddy who hit the credit floor.
/// The ledger is untouched on error.
pub fn donate_credits(ledger: &mut CreditLedger, from: PeerId, to: PeerId, amount: i64) -> Result<(), LedgerError> {
    ledger.transfer(from, to, amount)
}

/// Credits earned for serving `pieces_to_non_buddies` pieces while seeding.
pub fn seeding_reward(ledger: &mut CreditLedger, peer: PeerId, pieces_to_non_buddies: u32) {
    if pieces_to_non_buddies > 0 {
        ledger.mint(peer, pieces_to_non_buddies as i64);
    }
}
