//! Permutations, set partitions and integer partitions, with the small
//! amount of surgery (`add_delta`, cycle-type enumeration) the cumulant
//! machinery needs.
//!
//! Public indices are 1-based, matching the convention `{1..n}`; storage
//! is 0-based internally.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CombinatoricsError {
    #[error("index {index} out of range for partition of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

/// A bijection of `{1..n}`, stored as 0-based images.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// Build from 1-based images; panics if not a bijection.
    pub fn from_images(images: &[usize]) -> Self {
        let n = images.len();
        let mut seen = vec![false; n];
        for &im in images {
            assert!(im >= 1 && im <= n && !seen[im - 1], "not a bijection");
            seen[im - 1] = true;
        }
        Permutation {
            images: images.iter().map(|&i| i - 1).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Build from a list of cycles in 1-based notation, e.g. `[[1,2],[3,4,5]]`.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        for cycle in cycles {
            for w in 0..cycle.len() {
                let from = cycle[w] - 1;
                let to = cycle[(w + 1) % cycle.len()] - 1;
                images[from] = to;
            }
        }
        Permutation { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Image of a 1-based point.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1] + 1
    }

    /// Cycles as lists of 1-based points, each starting at its minimum,
    /// sorted by minimum.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.images.len();
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i + 1);
                i = self.images[i];
            }
            cycles.push(cycle);
        }
        cycles
    }

    pub fn cycle_type(&self) -> IntegerPartition {
        let mut parts: Vec<usize> = self.cycles().iter().map(|c| c.len()).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        IntegerPartition { parts }
    }

    /// `rho . self . rho^-1`.
    pub fn conjugate_by(&self, rho: &Permutation) -> Permutation {
        let n = self.images.len();
        let mut images = vec![0; n];
        for i in 0..n {
            images[rho.images[i]] = rho.images[self.images[i]];
        }
        Permutation { images }
    }

    pub fn has_fixed_point(&self) -> bool {
        self.images.iter().enumerate().any(|(i, &im)| i == im)
    }
}

/// A partition of a finite set of positive integers into disjoint
/// nonempty blocks, stored sorted (within blocks and by block minimum).
///
/// The ground set is arbitrary: partitions of slot subsets keep their
/// global slot labels rather than being re-indexed from 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Self {
        for block in &mut blocks {
            block.sort_unstable();
        }
        blocks.sort();
        let p = SetPartition { blocks };
        debug_assert!(p.is_valid());
        p
    }

    fn is_valid(&self) -> bool {
        let mut all: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        all.len() == n && self.blocks.iter().all(|b| !b.is_empty())
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn ground_size(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    pub fn has_singleton(&self) -> bool {
        self.blocks.iter().any(|b| b.len() == 1)
    }

    /// All set partitions of the given ground set.
    pub fn enumerate_of(ground: &[usize]) -> Vec<SetPartition> {
        let mut out = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        fn rec(
            pos: usize,
            ground: &[usize],
            blocks: &mut Vec<Vec<usize>>,
            out: &mut Vec<SetPartition>,
        ) {
            if pos == ground.len() {
                out.push(SetPartition::new(blocks.clone()));
                return;
            }
            for i in 0..blocks.len() {
                blocks[i].push(ground[pos]);
                rec(pos + 1, ground, blocks, out);
                blocks[i].pop();
            }
            blocks.push(vec![ground[pos]]);
            rec(pos + 1, ground, blocks, out);
            blocks.pop();
        }
        rec(0, ground, &mut blocks, &mut out);
        out
    }

    /// All set partitions of `{1..n}`.
    pub fn enumerate(n: usize) -> Vec<SetPartition> {
        let ground: Vec<usize> = (1..=n).collect();
        SetPartition::enumerate_of(&ground)
    }
}

/// Non-increasing positive parts summing to `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegerPartition {
    parts: Vec<usize>,
}

impl IntegerPartition {
    pub fn new(mut parts: Vec<usize>) -> Self {
        assert!(parts.iter().all(|&p| p > 0), "parts must be positive");
        parts.sort_unstable_by(|a, b| b.cmp(a));
        IntegerPartition { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn sum(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn length(&self) -> usize {
        self.parts.len()
    }

    pub fn min_part(&self) -> usize {
        self.parts.last().copied().unwrap_or(0)
    }

    /// True if no part equals 1.
    pub fn has_no_singleton_part(&self) -> bool {
        self.min_part() >= 2
    }

    pub fn count_ones(&self) -> usize {
        self.parts.iter().filter(|&&p| p == 1).count()
    }

    /// `mu + delta_i` (1-based `i`): increment part `i`, or append a part 1
    /// when `i = length + 1`; result re-sorted.
    pub fn add_delta(&self, i: usize) -> Result<IntegerPartition, CombinatoricsError> {
        if i == 0 || i > self.parts.len() + 1 {
            return Err(CombinatoricsError::IndexOutOfRange {
                index: i,
                len: self.parts.len(),
            });
        }
        let mut parts = self.parts.clone();
        if i == parts.len() + 1 {
            parts.push(1);
        } else {
            parts[i - 1] += 1;
        }
        Ok(IntegerPartition::new(parts))
    }

    /// All integer partitions of `n`, in no particular order.
    pub fn enumerate(n: usize) -> Vec<IntegerPartition> {
        let mut out = Vec::new();
        let mut current = Vec::new();
        fn rec(remaining: usize, max: usize, current: &mut Vec<usize>, out: &mut Vec<IntegerPartition>) {
            if remaining == 0 {
                out.push(IntegerPartition {
                    parts: current.clone(),
                });
                return;
            }
            for part in (1..=remaining.min(max)).rev() {
                current.push(part);
                rec(remaining - part, part, current, out);
                current.pop();
            }
        }
        rec(n, n, &mut current, &mut out);
        out
    }

    /// Compact label like "322" (parts > 9 separated by dots).
    pub fn label(&self) -> String {
        if self.parts.iter().all(|&p| p <= 9) {
            self.parts.iter().map(|p| p.to_string()).collect()
        } else {
            self.parts
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(".")
        }
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (j, x) in block.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for IntegerPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// All permutations of `{1..n}` with the given cycle type.
pub fn enumerate_by_cycle_type(lambda: &IntegerPartition) -> Vec<Permutation> {
    let n = lambda.sum();
    let mut out = Vec::new();
    for sigma in all_permutations(n) {
        if &sigma.cycle_type() == lambda {
            out.push(sigma);
        }
    }
    out
}

/// All permutations of `{1..n}` (Heap's algorithm).
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut items: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    fn heap(k: usize, items: &mut Vec<usize>, out: &mut Vec<Permutation>) {
        if k <= 1 {
            out.push(Permutation {
                images: items.clone(),
            });
            return;
        }
        for i in 0..k {
            heap(k - 1, items, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut items, &mut out);
    out
}
