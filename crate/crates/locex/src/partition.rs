//! Partitions of observation indices into permutation blocks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A partition of the observation indices `0..len` into disjoint, covering,
/// nonempty blocks. The blocks define the within-block permutation group
/// used by the randomization tests: every bijection that maps each block
/// onto itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
    len: usize,
}

impl BlockPartition {
    /// Build a partition, validating that the blocks are nonempty, disjoint,
    /// and cover `0..len` exactly. Block member lists are stored sorted.
    pub fn new(blocks: Vec<Vec<usize>>, len: usize) -> Result<Self> {
        let mut seen = vec![false; len];
        let mut blocks = blocks;
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            block.sort_unstable();
            for &i in block.iter() {
                if i >= len {
                    return Err(Error::InvalidPartition(format!(
                        "index {i} out of range for {len} observations"
                    )));
                }
                if seen[i] {
                    return Err(Error::InvalidPartition(format!(
                        "index {i} appears in more than one block"
                    )));
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!(
                "index {missing} is not covered by any block"
            )));
        }
        Ok(BlockPartition { blocks, len })
    }

    /// The all-singleton partition (trivial permutation group).
    pub fn singletons(len: usize) -> Self {
        BlockPartition { blocks: (0..len).map(|i| vec![i]).collect(), len }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of observation indices covered.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Order of the within-block permutation group, `prod_k |T_k|!`, or
    /// `None` if it exceeds `cap`.
    pub fn group_order_capped(&self, cap: u64) -> Option<u64> {
        let mut order: u64 = 1;
        for block in &self.blocks {
            for m in 2..=(block.len() as u64) {
                order = order.checked_mul(m)?;
                if order > cap {
                    return None;
                }
            }
        }
        Some(order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_partition_round_trips() {
        let p = BlockPartition::new(vec![vec![2, 0], vec![1]], 3).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1]]);
        assert_eq!(p.len(), 3);
        assert_eq!(p.n_blocks(), 2);
    }

    #[test]
    fn overlap_gap_and_range_are_rejected() {
        assert!(BlockPartition::new(vec![vec![0], vec![0, 1]], 2).is_err());
        assert!(BlockPartition::new(vec![vec![0]], 2).is_err());
        assert!(BlockPartition::new(vec![vec![0, 5]], 2).is_err());
        assert!(BlockPartition::new(vec![vec![], vec![0]], 1).is_err());
    }

    #[test]
    fn group_order_multiplies_block_factorials() {
        let p = BlockPartition::new(vec![vec![0, 1], vec![2, 3, 4], vec![5]], 6).unwrap();
        assert_eq!(p.group_order_capped(1 << 20), Some(2 * 6));
        assert_eq!(p.group_order_capped(5), None);
        assert_eq!(BlockPartition::singletons(4).group_order_capped(10), Some(1));
    }
}
