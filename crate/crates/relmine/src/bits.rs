//! Fixed-universe bitsets backed by `u64` blocks. Used for both row sets and
//! attribute sets; all set algebra in the miner bottoms out here.

use std::cmp::Ordering;

const BLOCK: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub(crate) struct BitSet {
    universe: usize,
    blocks: Vec<u64>,
}

impl BitSet {
    pub fn empty(universe: usize) -> Self {
        BitSet {
            universe,
            blocks: vec![0; universe.div_ceil(BLOCK)],
        }
    }

    /// All of `0..universe`.
    pub fn full(universe: usize) -> Self {
        let mut s = BitSet {
            universe,
            blocks: vec![!0u64; universe.div_ceil(BLOCK)],
        };
        s.mask_tail();
        s
    }

    #[cfg(test)]
    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = BitSet::empty(universe);
        for i in indices {
            s.insert(i);
        }
        s
    }

    fn mask_tail(&mut self) {
        let used = self.universe % BLOCK;
        if used != 0 {
            if let Some(last) = self.blocks.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
    }

    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.universe);
        self.blocks[i / BLOCK] |= 1u64 << (i % BLOCK);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && self.blocks[i / BLOCK] & (1u64 << (i % BLOCK)) != 0
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= b;
        }
    }

    pub fn intersection_len(&self, other: &BitSet) -> usize {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset_of(&self, other: &BitSet) -> bool {
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &BitSet) -> bool {
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & b == 0)
    }

    /// `self \ {v}` is a subset of `base`. `v` need not be in `self`.
    pub fn subset_of_ignoring(&self, base: &BitSet, v: usize) -> bool {
        let vb = v / BLOCK;
        let vbit = 1u64 << (v % BLOCK);
        for (i, (a, b)) in self.blocks.iter().zip(&base.blocks).enumerate() {
            let mut excess = a & !b;
            if i == vb {
                excess &= !vbit;
            }
            if excess != 0 {
                return false;
            }
        }
        true
    }

    pub fn complement(&self) -> BitSet {
        let mut s = BitSet {
            universe: self.universe,
            blocks: self.blocks.iter().map(|b| !b).collect(),
        };
        s.mask_tail();
        s
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &block)| {
            let mut rest = block;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let tz = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(bi * BLOCK + tz)
                }
            })
        })
    }

    /// Lexicographic order on the ascending member sequences: at the first
    /// position where the sequences differ, the smaller element wins, and a
    /// proper prefix sorts before its extensions.
    pub fn cmp_lex(&self, other: &BitSet) -> Ordering {
        debug_assert_eq!(self.universe, other.universe);
        for (i, (a, b)) in self.blocks.iter().zip(&other.blocks).enumerate() {
            let diff = a ^ b;
            if diff == 0 {
                continue;
            }
            let low = diff & diff.wrapping_neg();
            if a & low != 0 {
                return Ordering::Less;
            }
            // `other` holds the smallest differing element; `self` still
            // sorts first when it has nothing beyond the shared prefix.
            let le_low = low | (low - 1);
            if a & !le_low != 0 || self.blocks[i + 1..].iter().any(|&x| x != 0) {
                return Ordering::Greater;
            }
            return Ordering::Less;
        }
        Ordering::Equal
    }
}
