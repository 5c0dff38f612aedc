//! Noncrossing pair partitions, nearest outer blocks, and adaptedness to
//! star words.
//!
//! Blocks are indexed `1..=s` in order of their left legs. Index `0` is the
//! imaginary block `{0, m+1}`, which is never stored but acts as the nearest
//! outer block of every outermost block.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_limit, Error, Result};
use crate::word::StarWord;
use crate::Limits;

/// Index of the imaginary block.
pub const IMAGINARY: usize = 0;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairPartition {
    m: usize,
    blocks: Vec<(usize, usize)>,
    outer: Vec<usize>,
}

impl PairPartition {
    /// Builds a partition of `[m]` from `(left, right)` pairs in any order.
    pub fn new(m: usize, mut blocks: Vec<(usize, usize)>) -> Result<Self> {
        if !m.is_multiple_of(2) {
            return Err(Error::InvalidWordLength(m));
        }
        if blocks.len() * 2 != m {
            return Err(Error::InvalidPartition(format!(
                "{} blocks cannot cover {m} points",
                blocks.len()
            )));
        }
        for b in blocks.iter_mut() {
            if b.0 > b.1 {
                *b = (b.1, b.0);
            }
            if b.0 == b.1 || b.0 == 0 || b.1 > m {
                return Err(Error::InvalidPartition(format!(
                    "block ({}, {}) is not a pair inside 1..={m}",
                    b.0, b.1
                )));
            }
        }
        blocks.sort_unstable();
        let mut seen = vec![false; m + 1];
        for &(l, r) in &blocks {
            for p in [l, r] {
                if std::mem::replace(&mut seen[p], true) {
                    return Err(Error::InvalidPartition(format!("point {p} used twice")));
                }
            }
        }
        let outer = outer_map(m, &blocks)?;
        Ok(PairPartition { m, blocks, outer })
    }

    fn from_sorted(m: usize, blocks: Vec<(usize, usize)>) -> Self {
        let outer = outer_map(m, &blocks).expect("generator emits noncrossing partitions");
        PairPartition { m, blocks, outer }
    }

    pub fn empty() -> Self {
        PairPartition {
            m: 0,
            blocks: Vec::new(),
            outer: Vec::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of real blocks.
    pub fn s(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    /// Block `k` (1-based).
    pub fn block(&self, k: usize) -> (usize, usize) {
        self.blocks[k - 1]
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.s() {
            Err(Error::IndexError {
                index: k,
                len: self.s(),
            })
        } else {
            Ok(())
        }
    }

    /// Index of the nearest outer block of block `k`, or [`IMAGINARY`].
    pub fn nearest_outer(&self, k: usize) -> Result<usize> {
        self.check_index(k)?;
        Ok(self.outer[k - 1])
    }

    /// Unchecked variant of [`nearest_outer`](Self::nearest_outer).
    pub fn outer(&self, k: usize) -> usize {
        self.outer[k - 1]
    }

    /// `o(V_k)` for `k = 1..=s`.
    pub fn outer_map(&self) -> &[usize] {
        &self.outer
    }

    /// Children of every block in the nesting forest, `0` included, each list
    /// ordered by left leg.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.s() + 1];
        for (i, &o) in self.outer.iter().enumerate() {
            ch[o].push(i + 1);
        }
        ch
    }

    /// Nesting depth of block `k`; the imaginary block has depth 0.
    pub fn depth(&self, k: usize) -> usize {
        let mut d = 0;
        let mut cur = k;
        while cur != IMAGINARY {
            cur = self.outer[cur - 1];
            d += 1;
        }
        d
    }

    /// Reflection `i ↦ m+1-i`, the partition underlying the adjoint word.
    pub fn mirrored(&self) -> Self {
        let m = self.m;
        let blocks = self
            .blocks
            .iter()
            .map(|&(l, r)| (m + 1 - r, m + 1 - l))
            .collect();
        PairPartition::new(m, blocks).expect("mirror of a valid partition")
    }

    /// Index of the block with the given left leg, if any.
    pub fn block_with_left(&self, left: usize) -> Option<usize> {
        self.blocks
            .binary_search_by_key(&left, |b| b.0)
            .ok()
            .map(|i| i + 1)
    }
}

fn outer_map(m: usize, blocks: &[(usize, usize)]) -> Result<Vec<usize>> {
    // Sweep positions left to right with a stack of open blocks.
    let mut at = vec![(0usize, false); m + 1];
    for (i, &(l, r)) in blocks.iter().enumerate() {
        at[l] = (i + 1, true);
        at[r] = (i + 1, false);
    }
    let mut outer = vec![IMAGINARY; blocks.len()];
    let mut stack: Vec<usize> = Vec::new();
    for &(k, opens) in &at[1..] {
        if opens {
            outer[k - 1] = stack.last().copied().unwrap_or(IMAGINARY);
            stack.push(k);
        } else if stack.pop() != Some(k) {
            return Err(Error::InvalidPartition(format!(
                "block {:?} crosses another block",
                blocks[k - 1]
            )));
        }
    }
    Ok(outer)
}

impl fmt::Display for PairPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (l, r)) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "[{l},{r}]")?;
        }
        f.write_str("]")
    }
}

impl Serialize for PairPartition {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[usize; 2]> = self.blocks.iter().map(|&(l, r)| [l, r]).collect();
        pairs.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PairPartition {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[usize; 2]>::deserialize(de)?;
        let blocks: Vec<_> = pairs.iter().map(|p| (p[0], p[1])).collect();
        PairPartition::new(2 * blocks.len(), blocks).map_err(serde::de::Error::custom)
    }
}

/// Which pairing rule a block must satisfy to be admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdaptMode {
    /// Free creation/annihilation words: left leg starred, right leg plain.
    Creation,
    /// Words in `η = ℘ + ℘*`: exactly one leg starred.
    Eta,
}

impl std::str::FromStr for AdaptMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "creation" => Ok(AdaptMode::Creation),
            "eta" => Ok(AdaptMode::Eta),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

/// Whether the positions `i < j` (1-based) may form a block.
pub fn block_admissible(w: &StarWord, mode: AdaptMode, i: usize, j: usize) -> bool {
    let (a, b) = (w.at(i), w.at(j));
    if a.label != b.label {
        return false;
    }
    match mode {
        AdaptMode::Creation => a.starred && !b.starred,
        AdaptMode::Eta => a.starred != b.starred,
    }
}

pub fn is_adapted(p: &PairPartition, w: &StarWord, mode: AdaptMode) -> Result<bool> {
    if p.m() != w.len() {
        return Err(Error::LengthMismatch {
            partition: p.m(),
            word: w.len(),
        });
    }
    Ok(p.blocks()
        .iter()
        .all(|&(l, r)| block_admissible(w, mode, l, r)))
}

/// All noncrossing pair partitions of `[m]`, lexicographic by block list.
pub fn enumerate_nc2(m: usize, limits: &Limits) -> Result<Vec<PairPartition>> {
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidWordLength(m));
    }
    check_limit("m", m, limits.max_points)?;
    Ok(generate(m, &|_, _| true))
}

/// Noncrossing pair partitions adapted to `w`; empty for odd lengths.
///
/// Equal to filtering [`enumerate_nc2`] by [`is_adapted`], with inadmissible
/// blocks pruned during generation.
pub fn adapted_partitions(
    w: &StarWord,
    mode: AdaptMode,
    limits: &Limits,
) -> Result<Vec<PairPartition>> {
    let m = w.len();
    if !m.is_multiple_of(2) {
        return Ok(Vec::new());
    }
    check_limit("m", m, limits.max_points)?;
    Ok(generate(m, &|i, j| block_admissible(w, mode, i, j)))
}

fn generate(m: usize, admit: &dyn Fn(usize, usize) -> bool) -> Vec<PairPartition> {
    pairings(1, m, admit)
        .into_iter()
        .map(|blocks| PairPartition::from_sorted(m, blocks))
        .collect()
}

// Noncrossing pairings of lo..=hi. Position `lo` pairs with j at even offset;
// inside (lo, j) and outside (j, hi] recurse independently.
fn pairings(
    lo: usize,
    hi: usize,
    admit: &dyn Fn(usize, usize) -> bool,
) -> Vec<Vec<(usize, usize)>> {
    if lo > hi {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for j in (lo + 1..=hi).step_by(2) {
        if !admit(lo, j) {
            continue;
        }
        let inside = pairings(lo + 1, j - 1, admit);
        if inside.is_empty() {
            continue;
        }
        let outside = pairings(j + 1, hi, admit);
        for a in &inside {
            for b in &outside {
                let mut blocks = Vec::with_capacity(1 + a.len() + b.len());
                blocks.push((lo, j));
                blocks.extend_from_slice(a);
                blocks.extend_from_slice(b);
                out.push(blocks);
            }
        }
    }
    out
}

/// Star placement on a block and its nearest outer block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockPairType {
    /// Right leg of the block and left leg of its outer block starred.
    Type1,
    /// Left leg of the block and right leg of its outer block starred.
    Type2,
    /// Both left legs starred.
    Type3,
    /// Both right legs starred.
    Type4,
}

pub fn classify_block_pair(p: &PairPartition, w: &StarWord, k: usize) -> Result<BlockPairType> {
    let o = p.nearest_outer(k)?;
    if !is_adapted(p, w, AdaptMode::Eta)? {
        return Err(Error::NotAdapted);
    }
    if o == IMAGINARY {
        return Err(Error::NoOuterBlock(k));
    }
    let inner_left = w.at(p.block(k).0).starred;
    let outer_left = w.at(p.block(o).0).starred;
    Ok(match (inner_left, outer_left) {
        (false, true) => BlockPairType::Type1,
        (true, false) => BlockPairType::Type2,
        (true, true) => BlockPairType::Type3,
        (false, false) => BlockPairType::Type4,
    })
}
