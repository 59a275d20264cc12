//! Union-find and equivalence relations stored as partitions.

use std::collections::HashMap;
use std::hash::Hash;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }
}

/// An equivalence relation on `0..n`, stored as its blocks.
///
/// Block ids are assigned in order of first occurrence, so two partitions of
/// the same relation compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    block: Vec<u32>,
    blocks: Vec<Vec<u32>>,
}

impl Partition {
    pub fn identity(n: usize) -> Self {
        Partition {
            block: (0..n as u32).collect(),
            blocks: (0..n as u32).map(|i| vec![i]).collect(),
        }
    }

    /// Everything related to everything.
    pub fn total(n: usize) -> Self {
        Self::from_labels(&vec![0u8; n])
    }

    /// Worlds with equal labels share a block.
    pub fn from_labels<L: Hash + Eq>(labels: &[L]) -> Self {
        let mut ids: HashMap<&L, u32> = HashMap::new();
        let mut block = Vec::with_capacity(labels.len());
        let mut blocks: Vec<Vec<u32>> = Vec::new();
        for (x, l) in labels.iter().enumerate() {
            let next = ids.len() as u32;
            let id = *ids.entry(l).or_insert(next);
            if id as usize == blocks.len() {
                blocks.push(Vec::new());
            }
            blocks[id as usize].push(x as u32);
            block.push(id);
        }
        Partition { block, blocks }
    }

    /// Reflexive-symmetric-transitive closure of `pairs`.
    pub fn closure_of<I: IntoIterator<Item = (usize, usize)>>(n: usize, pairs: I) -> Self {
        let mut uf = UnionFind::new(n);
        for (a, b) in pairs {
            uf.union(a, b);
        }
        let roots: Vec<usize> = (0..n).map(|x| uf.find(x)).collect();
        Self::from_labels(&roots)
    }

    pub fn len(&self) -> usize {
        self.block.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block.is_empty()
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.block[x] as usize
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn members(&self, b: usize) -> &[u32] {
        &self.blocks[b]
    }

    pub fn class_of(&self, x: usize) -> &[u32] {
        self.members(self.block_of(x))
    }

    pub fn related(&self, x: usize, y: usize) -> bool {
        self.block[x] == self.block[y]
    }

    /// Every ordered pair of the relation, reflexive pairs included.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.blocks.iter().flat_map(|b| {
            b.iter()
                .flat_map(move |&x| b.iter().map(move |&y| (x as usize, y as usize)))
        })
    }

    /// A spanning set of pairs: each member paired with its block's first
    /// element. Its equivalence closure is this partition.
    pub fn spanning_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.blocks
            .iter()
            .flat_map(|b| b[1..].iter().map(move |&y| (b[0] as usize, y as usize)))
    }

    /// Restrict to the worlds in `keep` (given in increasing order), renumbered
    /// by position.
    pub fn restrict(&self, keep: &[usize]) -> Partition {
        let labels: Vec<u32> = keep.iter().map(|&x| self.block[x]).collect();
        Self::from_labels(&labels)
    }
}
