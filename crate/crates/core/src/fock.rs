//! Truncated four-mode Fock space used as the oracle substrate.

use std::collections::HashMap;

use crate::error::{FwmError, Result};

/// Supported truncation bound for oracle-scale computations.
pub const MAX_TRUNCATION: u32 = 12;

/// All Fock 4-tuples with total quanta <= T, in a fixed deterministic
/// (lexicographic) order, with an index lookup table.
#[derive(Debug, Clone)]
pub struct TruncatedFockSpace {
    pub max_total_quanta: u32,
    pub basis: Vec<[u32; 4]>,
    index: HashMap<[u32; 4], usize>,
}

impl TruncatedFockSpace {
    pub fn new(t: u32) -> Result<Self> {
        if t > MAX_TRUNCATION {
            return Err(FwmError::TruncationTooLarge(t, MAX_TRUNCATION));
        }
        let mut basis = Vec::new();
        for n0 in 0..=t {
            for n1 in 0..=(t - n0) {
                for n2 in 0..=(t - n0 - n1) {
                    for n3 in 0..=(t - n0 - n1 - n2) {
                        basis.push([n0, n1, n2, n3]);
                    }
                }
            }
        }
        let index = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        Ok(Self {
            max_total_quanta: t,
            basis,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, tuple: &[u32; 4]) -> Option<usize> {
        self.index.get(tuple).copied()
    }
}
