//! Color-order regions of colored pair partitions and their exact volumes.
//!
//! Each block `V_k` carries a color `x_k ∈ [0,1]` and the imaginary block
//! carries `x_0`. A word constrains `x_k` against `x_{o(k)}` only, so the
//! region is cut out by at most `s` strict comparisons. Its volume is the
//! number of linear extensions of those comparisons divided by `(s+1)!`.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_limit, Error, Result};
use crate::partitions::{is_adapted, AdaptMode, PairPartition};
use crate::rational::{self, Rational};
use crate::word::StarWord;
use crate::{factorial, Limits};

/// Hard ceiling on poset size: the DP table holds `2^size` 128-bit counters.
pub const MAX_POSET_HARD: usize = 24;

/// Strict order constraints `x_a < x_b` on colors `0..size`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ColorPoset {
    size: usize,
    constraints: Vec<(usize, usize)>,
}

impl ColorPoset {
    pub fn new(size: usize, constraints: Vec<(usize, usize)>) -> Result<Self> {
        for &(a, b) in &constraints {
            if a >= size || b >= size {
                return Err(Error::InvalidPoset(format!(
                    "constraint ({a}, {b}) outside 0..{size}"
                )));
            }
        }
        let q = ColorPoset { size, constraints };
        if q.has_cycle() {
            return Err(Error::InvalidPoset("constraints contain a cycle".into()));
        }
        Ok(q)
    }

    /// `k` elements, no constraints.
    pub fn antichain(size: usize) -> Self {
        ColorPoset {
            size,
            constraints: Vec::new(),
        }
    }

    /// `0 < 1 < … < size-1`.
    pub fn chain(size: usize) -> Self {
        ColorPoset {
            size,
            constraints: (1..size).map(|i| (i - 1, i)).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn constraints(&self) -> &[(usize, usize)] {
        &self.constraints
    }

    /// Whether `colors` satisfies every constraint strictly.
    pub fn contains(&self, colors: &[f64]) -> bool {
        self.constraints.iter().all(|&(a, b)| colors[a] < colors[b])
    }

    fn contains_closed(&self, colors: &[f64]) -> bool {
        self.constraints
            .iter()
            .all(|&(a, b)| colors[a] <= colors[b])
    }

    fn has_cycle(&self) -> bool {
        // Kahn's algorithm
        let mut indeg = vec![0usize; self.size];
        let mut succ = vec![Vec::new(); self.size];
        for &(a, b) in &self.constraints {
            indeg[b] += 1;
            succ[a].push(b);
        }
        let mut ready: Vec<usize> = (0..self.size).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(v) = ready.pop() {
            seen += 1;
            for &b in &succ[v] {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    ready.push(b);
                }
            }
        }
        seen != self.size
    }
}

/// How a block's color compares with the color of its nearest outer block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    /// `x_k < x_{o(k)}`
    Below,
    /// `x_k > x_{o(k)}`
    Above,
    Free,
}

/// Builds the poset on `0..=s` from a per-block relation to the nearest outer
/// block. Returns `None` if some block's relation is empty.
pub fn poset_from_relations(
    p: &PairPartition,
    relation: impl Fn(usize) -> Option<Relation>,
) -> Option<ColorPoset> {
    let mut constraints = Vec::with_capacity(p.s());
    for k in 1..=p.s() {
        let o = p.outer(k);
        match relation(k)? {
            Relation::Below => constraints.push((k, o)),
            Relation::Above => constraints.push((o, k)),
            Relation::Free => {}
        }
    }
    // Every edge joins a block to its nearest outer, so the graph is a forest.
    Some(ColorPoset {
        size: p.s() + 1,
        constraints,
    })
}

/// The region `V(π)` for a partition adapted to `w`.
///
/// In [`AdaptMode::Eta`] a block whose left leg is starred sits below its
/// nearest outer block and one whose left leg is plain sits above it. In
/// [`AdaptMode::Creation`] every block sits below its outer block, which is
/// the region for triangle indicators on all positions.
pub fn region_constraints(p: &PairPartition, w: &StarWord, mode: AdaptMode) -> Result<ColorPoset> {
    if !is_adapted(p, w, mode)? {
        return Err(Error::NotAdapted);
    }
    let q = poset_from_relations(p, |k| {
        Some(match mode {
            AdaptMode::Creation => Relation::Below,
            AdaptMode::Eta if w.at(p.block(k).0).starred => Relation::Below,
            AdaptMode::Eta => Relation::Above,
        })
    });
    Ok(q.expect("every block has a relation"))
}

/// Number of strict total orders extending `q`, by DP over downsets.
pub fn count_linear_extensions(q: &ColorPoset, limits: &Limits) -> Result<BigUint> {
    check_limit("poset size", q.size, limits.max_poset.min(MAX_POSET_HARD))?;
    Ok(BigUint::from(downset_dp(q)))
}

fn downset_dp(q: &ColorPoset) -> u128 {
    let n = q.size;
    let mut preds = vec![0u32; n];
    for &(a, b) in &q.constraints {
        preds[b] |= 1 << a;
    }
    // ways[S] = number of orderings of S that place S as an initial segment.
    // n <= 24, so every count is at most 24! < 2^80.
    let full = (1usize << n) - 1;
    let mut ways = vec![0u128; full + 1];
    ways[0] = 1;
    for set in 0..full {
        let here = ways[set];
        if here == 0 {
            continue;
        }
        let mut free = !set & full;
        while free != 0 {
            let x = free.trailing_zeros() as usize;
            free &= free - 1;
            if preds[x] as usize & !set == 0 {
                ways[set | (1 << x)] += here;
            }
        }
    }
    ways[full]
}

/// Linear extensions by checking all `size!` permutations. Oracle for
/// [`count_linear_extensions`]; only sensible for small posets.
pub fn count_linear_extensions_brute(q: &ColorPoset) -> u64 {
    fn walk(perm: &mut Vec<usize>, used: &mut [bool], q: &ColorPoset, rank: &mut [usize]) -> u64 {
        if perm.len() == q.size {
            for (r, &x) in perm.iter().enumerate() {
                rank[x] = r;
            }
            return q.constraints.iter().all(|&(a, b)| rank[a] < rank[b]) as u64;
        }
        let mut total = 0;
        for x in 0..q.size {
            if !used[x] {
                used[x] = true;
                perm.push(x);
                total += walk(perm, used, q, rank);
                perm.pop();
                used[x] = false;
            }
        }
        total
    }
    let mut rank = vec![0; q.size];
    walk(&mut Vec::new(), &mut vec![false; q.size], q, &mut rank)
}

/// Volume of the region in `[0,1]^size`.
pub fn poset_volume(q: &ColorPoset, limits: &Limits) -> Result<Rational> {
    let count = count_linear_extensions(q, limits)?;
    Ok(rational::from_counts(&count, &factorial(q.size)))
}

/// `Vol(π)` for a partition adapted to `w`.
pub fn volume(
    p: &PairPartition,
    w: &StarWord,
    mode: AdaptMode,
    limits: &Limits,
) -> Result<Rational> {
    poset_volume(&region_constraints(p, w, mode)?, limits)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Fraction of uniform points of `[0,1]^size` inside the region.
pub fn monte_carlo_volume(q: &ColorPoset, samples: u64, seed: u64) -> VolumeEstimate {
    mc_volume(q, samples, seed, ColorPoset::contains)
}

/// Same as [`monte_carlo_volume`] with `<=` in place of `<`.
pub fn monte_carlo_volume_closed(q: &ColorPoset, samples: u64, seed: u64) -> VolumeEstimate {
    mc_volume(q, samples, seed, ColorPoset::contains_closed)
}

fn mc_volume(
    q: &ColorPoset,
    samples: u64,
    seed: u64,
    inside: fn(&ColorPoset, &[f64]) -> bool,
) -> VolumeEstimate {
    assert!(samples >= 1, "at least one sample");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut colors = vec![0.0f64; q.size];
    let mut hits = 0u64;
    for _ in 0..samples {
        for c in colors.iter_mut() {
            *c = rng.gen::<f64>();
        }
        hits += inside(q, &colors) as u64;
    }
    let p = hits as f64 / samples as f64;
    let stderr = (p * (1.0 - p) / (samples.max(2) - 1) as f64).sqrt();
    VolumeEstimate {
        estimate: p,
        stderr,
        samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::enumerate_nc2;
    use crate::rational::ratio;
    use itertools::Itertools;

    fn pp(blocks: &[(usize, usize)]) -> PairPartition {
        PairPartition::new(2 * blocks.len(), blocks.to_vec()).unwrap()
    }

    fn lim() -> Limits {
        Limits::default()
    }

    // independent permutation oracle
    fn perms_oracle(q: &ColorPoset) -> usize {
        (0..q.size())
            .permutations(q.size())
            .filter(|perm| {
                let mut pos = vec![0; q.size()];
                for (i, &x) in perm.iter().enumerate() {
                    pos[x] = i;
                }
                q.constraints().iter().all(|&(a, b)| pos[a] < pos[b])
            })
            .count()
    }

    // hook length for a forest whose every edge points child < parent
    fn hook_oracle(q: &ColorPoset) -> BigUint {
        let n = q.size();
        let mut parent = vec![None; n];
        for &(a, b) in q.constraints() {
            assert!(parent[a].replace(b).is_none());
        }
        let mut sub = vec![1usize; n];
        for v in 0..n {
            let mut cur = parent[v];
            while let Some(p) = cur {
                sub[p] += 1;
                cur = parent[p];
            }
        }
        factorial(n) / sub.iter().fold(BigUint::from(1u32), |a, &h| a * h)
    }

    #[test]
    fn six_point_nested_region() {
        // blocks: 1 = {1,6}, 2 = {2,5}, 3 = {3,4}; 0 imaginary
        let p = pp(&[(1, 6), (2, 5), (3, 4)]);
        let w = StarWord::tt_power(3);
        let q = region_constraints(&p, &w, AdaptMode::Eta).unwrap();
        assert_eq!(q.constraints(), &[(1, 0), (1, 2), (3, 2)]);
        assert_eq!(count_linear_extensions(&q, &lim()).unwrap(), 5u32.into());
    }

    #[test]
    fn single_block_region() {
        let p = pp(&[(1, 2)]);
        let q = region_constraints(&p, &"*1,1".parse().unwrap(), AdaptMode::Eta).unwrap();
        assert_eq!(q.constraints(), &[(1, 0)]);
        let q = region_constraints(&p, &"1,*1".parse().unwrap(), AdaptMode::Eta).unwrap();
        assert_eq!(q.constraints(), &[(0, 1)]);
        assert_eq!(
            region_constraints(&p, &"1,1".parse().unwrap(), AdaptMode::Eta),
            Err(Error::NotAdapted)
        );
    }

    #[test]
    fn creation_chain_region() {
        let p = pp(&[(1, 6), (2, 5), (3, 4)]);
        let w: StarWord = "*1,*1,*1,1,1,1".parse().unwrap();
        let q = region_constraints(&p, &w, AdaptMode::Creation).unwrap();
        // C < B < A < imaginary
        assert_eq!(q.constraints(), &[(1, 0), (2, 1), (3, 2)]);
        assert_eq!(
            volume(&p, &w, AdaptMode::Creation, &lim()).unwrap(),
            ratio(1, 24)
        );
    }

    #[test]
    fn extension_count_examples() {
        assert_eq!(
            count_linear_extensions(&ColorPoset::chain(4), &lim()).unwrap(),
            1u32.into()
        );
        // z<y, w<y, y<x with x=0, y=1, z=2, w=3
        let q = ColorPoset::new(4, vec![(2, 1), (3, 1), (1, 0)]).unwrap();
        assert_eq!(count_linear_extensions(&q, &lim()).unwrap(), 2u32.into());
        for k in 0..=7 {
            assert_eq!(
                count_linear_extensions(&ColorPoset::antichain(k), &lim()).unwrap(),
                factorial(k)
            );
        }
    }

    #[test]
    fn poset_validation_and_limits() {
        assert!(ColorPoset::new(2, vec![(0, 2)]).is_err());
        assert!(ColorPoset::new(3, vec![(0, 1), (1, 2), (2, 0)]).is_err());
        assert!(matches!(
            count_linear_extensions(&ColorPoset::antichain(23), &lim()),
            Err(Error::LimitExceeded { .. })
        ));
        let mut big = lim();
        big.max_poset = 40;
        assert!(count_linear_extensions(&ColorPoset::antichain(25), &big).is_err());
    }

    #[test]
    fn six_point_volumes() {
        // canonical order: [[1,2],[3,4],[5,6]] .. [[1,6],[2,5],[3,4]]
        let w = StarWord::tt_power(3);
        let got: Vec<Rational> = enumerate_nc2(6, &lim())
            .unwrap()
            .iter()
            .map(|p| volume(p, &w, AdaptMode::Eta, &lim()).unwrap())
            .collect();
        let want = [6, 5, 5, 6, 5].map(|c| ratio(c, 24));
        assert_eq!(got, want);
    }

    #[test]
    fn empty_partition_volume_is_one() {
        let v = volume(
            &PairPartition::empty(),
            &StarWord::default(),
            AdaptMode::Eta,
            &lim(),
        );
        assert_eq!(v.unwrap(), ratio(1, 1));
    }

    #[test]
    fn dp_matches_both_oracles() {
        for m in (0..=10).step_by(2) {
            let w = StarWord::tt_power(m / 2);
            for p in enumerate_nc2(m, &lim()).unwrap() {
                let q = region_constraints(&p, &w, AdaptMode::Eta).unwrap();
                let dp = count_linear_extensions(&q, &lim()).unwrap();
                assert_eq!(dp, BigUint::from(perms_oracle(&q)));
                assert_eq!(dp, BigUint::from(count_linear_extensions_brute(&q)));

                let c = region_constraints(&p, &w.adjoint(), AdaptMode::Eta).unwrap();
                assert_eq!(
                    count_linear_extensions(&c, &lim()).unwrap(),
                    BigUint::from(perms_oracle(&c))
                );
            }
        }
    }

    #[test]
    fn creation_regions_match_hook_lengths() {
        for m in (0..=14).step_by(2) {
            for p in enumerate_nc2(m, &lim()).unwrap() {
                let q = poset_from_relations(&p, |_| Some(Relation::Below)).unwrap();
                assert_eq!(
                    count_linear_extensions(&q, &lim()).unwrap(),
                    hook_oracle(&q)
                );
            }
        }
    }

    #[test]
    fn volumes_are_in_unit_interval() {
        for n in 0..=5 {
            let w = StarWord::tt_power(n);
            let mut total = Rational::from_integer(0.into());
            let parts = enumerate_nc2(2 * n, &lim()).unwrap();
            for p in &parts {
                let v = volume(p, &w, AdaptMode::Eta, &lim()).unwrap();
                assert!(v > ratio(0, 1) && v <= ratio(1, 1));
                total += v;
            }
            assert!(total <= Rational::from_integer(parts.len().into()));
        }
    }

    #[test]
    fn monte_carlo_chain() {
        let est = monte_carlo_volume(&ColorPoset::chain(4), 1_000_000, 7);
        assert!((est.estimate - 1.0 / 24.0).abs() <= 3.0 * est.stderr);
    }

    #[test]
    fn monte_carlo_empty_constraints() {
        let est = monte_carlo_volume(&ColorPoset::antichain(5), 1000, 1);
        assert_eq!(est.estimate, 1.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn monte_carlo_six_point_and_closed_variant() {
        let w = StarWord::tt_power(3);
        for (i, p) in enumerate_nc2(6, &lim()).unwrap().iter().enumerate() {
            let q = region_constraints(p, &w, AdaptMode::Eta).unwrap();
            let exact = rational::to_f64(&volume(p, &w, AdaptMode::Eta, &lim()).unwrap());
            let open = monte_carlo_volume(&q, 1_000_000, 100 + i as u64);
            assert!((open.estimate - exact).abs() <= 4.0 * open.stderr, "{p}");
            let closed = monte_carlo_volume_closed(&q, 1_000_000, 100 + i as u64);
            // same draws, ties have probability zero
            assert_eq!(open.estimate, closed.estimate);
            let other = monte_carlo_volume_closed(&q, 1_000_000, 900 + i as u64);
            let se = (open.stderr.powi(2) + other.stderr.powi(2)).sqrt();
            assert!((open.estimate - other.estimate).abs() <= 4.0 * se);
        }
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let q = ColorPoset::chain(3);
        assert_eq!(
            monte_carlo_volume(&q, 5000, 3),
            monte_carlo_volume(&q, 5000, 3)
        );
    }
}
