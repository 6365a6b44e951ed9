use std::cell::Cell;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;
pub const DEFAULT_TIME_BUDGET: Duration = Duration::from_secs(60);

/// Search-node and wall-clock allowance shared by every search started under it.
///
/// Exhausting either limit turns the running operation into
/// [`Error::BudgetExceeded`], which callers must keep apart from a negative
/// answer.
#[derive(Debug)]
pub struct Budget {
    node_limit: u64,
    deadline: Option<Instant>,
    used: Cell<u64>,
}

impl Budget {
    pub fn new(node_limit: u64, time_limit: Option<Duration>) -> Self {
        Budget {
            node_limit,
            deadline: time_limit.map(|d| Instant::now() + d),
            used: Cell::new(0),
        }
    }

    pub fn nodes(node_limit: u64) -> Self {
        Self::new(node_limit, None)
    }

    pub fn unlimited() -> Self {
        Self::new(u64::MAX, None)
    }

    pub fn used(&self) -> u64 {
        self.used.get()
    }

    pub fn node_limit(&self) -> u64 {
        self.node_limit
    }

    /// Charge `n` search nodes.
    #[inline]
    pub fn charge(&self, n: u64) -> Result<()> {
        let used = self.used.get().saturating_add(n);
        self.used.set(used);
        if used > self.node_limit {
            return Err(Error::BudgetExceeded { nodes: used });
        }
        // the clock is only consulted every 4096 nodes
        if let Some(deadline) = self.deadline {
            if (used & 0xfff) < n && Instant::now() > deadline {
                return Err(Error::BudgetExceeded { nodes: used });
            }
        }
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::new(DEFAULT_NODE_BUDGET, Some(DEFAULT_TIME_BUDGET))
    }
}
