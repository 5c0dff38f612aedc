//! Ordered rooted trees, the bijection with noncrossing pair partitions, and
//! alternating labelings.
//!
//! Vertices are numbered in preorder with the root at `0`. Under the
//! bijection vertex `k` is block `k` of the partition (blocks are ordered by
//! left leg, which is preorder of the nesting forest) and the root is the
//! imaginary block.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{check_limit, Error, Result};
use crate::partitions::PairPartition;
use crate::{factorial, Limits};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderedTree {
    children: Vec<Vec<usize>>,
}

impl OrderedTree {
    /// Builds a tree rooted at vertex `0` from child lists. Vertices are
    /// renumbered into preorder.
    pub fn from_children(children: Vec<Vec<usize>>) -> Result<Self> {
        let v = children.len();
        if v == 0 {
            return Err(Error::InvalidTree("no vertices".into()));
        }
        let mut has_parent = vec![false; v];
        for (p, ch) in children.iter().enumerate() {
            for &c in ch {
                if c >= v {
                    return Err(Error::InvalidTree(format!("vertex {c} out of range")));
                }
                if c == 0 || std::mem::replace(&mut has_parent[c], true) {
                    return Err(Error::InvalidTree(format!(
                        "vertex {c} has more than one parent (seen under {p})"
                    )));
                }
            }
        }
        let mut order = Vec::with_capacity(v);
        let mut stack = vec![0usize];
        while let Some(x) = stack.pop() {
            order.push(x);
            stack.extend(children[x].iter().rev());
        }
        if order.len() != v {
            return Err(Error::InvalidTree("not connected to the root".into()));
        }
        let mut new_id = vec![0; v];
        for (i, &old) in order.iter().enumerate() {
            new_id[old] = i;
        }
        let children = order
            .iter()
            .map(|&old| children[old].iter().map(|&c| new_id[c]).collect())
            .collect();
        Ok(OrderedTree { children })
    }

    pub fn single() -> Self {
        OrderedTree {
            children: vec![Vec::new()],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.children.len()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut par = vec![None; self.vertex_count()];
        for (p, ch) in self.children.iter().enumerate() {
            for &c in ch {
                par[c] = Some(p);
            }
        }
        par
    }

    /// Depth of every vertex, root at depth 0.
    pub fn depths(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertex_count()];
        // preorder: parents come first
        for p in 0..self.vertex_count() {
            for &c in &self.children[p] {
                d[c] = d[p] + 1;
            }
        }
        d
    }

    fn to_node(&self, v: usize, label: &dyn Fn(usize) -> Option<usize>) -> TreeNode {
        TreeNode {
            label: label(v),
            children: self.children[v]
                .iter()
                .map(|&c| self.to_node(c, label))
                .collect(),
        }
    }
}

/// JSON form of a tree: `{"label": 3, "children": [...]}`. Unlabeled shapes
/// omit `label`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
    #[serde(default)]
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    fn flatten(&self, children: &mut Vec<Vec<usize>>, labels: &mut Vec<Option<usize>>) -> usize {
        let id = children.len();
        children.push(Vec::new());
        labels.push(self.label);
        for c in &self.children {
            let cid = c.flatten(children, labels);
            children[id].push(cid);
        }
        id
    }
}

impl Serialize for OrderedTree {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_node(0, &|_| None).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for OrderedTree {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let node = TreeNode::deserialize(de)?;
        let mut children = Vec::new();
        node.flatten(&mut children, &mut Vec::new());
        OrderedTree::from_children(children).map_err(serde::de::Error::custom)
    }
}

/// An ordered tree with labels `1..=v`, one per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledOrderedTree {
    tree: OrderedTree,
    labels: Vec<usize>,
}

impl LabeledOrderedTree {
    pub fn new(tree: OrderedTree, labels: Vec<usize>) -> Result<Self> {
        let v = tree.vertex_count();
        if labels.len() != v {
            return Err(Error::InvalidTree(format!(
                "{} labels for {v} vertices",
                labels.len()
            )));
        }
        let mut seen = vec![false; v + 1];
        for &l in &labels {
            if l == 0 || l > v || std::mem::replace(&mut seen[l], true) {
                return Err(Error::InvalidTree(format!(
                    "labels must be a permutation of 1..={v}"
                )));
            }
        }
        Ok(LabeledOrderedTree { tree, labels })
    }

    pub fn tree(&self) -> &OrderedTree {
        &self.tree
    }

    /// Label of each vertex, in preorder.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Relabels by `i ↦ v+1-i`, which exchanges the two alternation types.
    pub fn reversed(&self) -> Self {
        let v = self.labels.len();
        LabeledOrderedTree {
            tree: self.tree.clone(),
            labels: self.labels.iter().map(|&l| v + 1 - l).collect(),
        }
    }
}

impl Serialize for LabeledOrderedTree {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.tree
            .to_node(0, &|v| Some(self.labels[v]))
            .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for LabeledOrderedTree {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let node = TreeNode::deserialize(de)?;
        let mut children = Vec::new();
        let mut labels = Vec::new();
        node.flatten(&mut children, &mut labels);
        let labels: Vec<usize> = labels
            .into_iter()
            .map(|l| l.ok_or_else(|| D::Error::custom("vertex without label")))
            .collect::<std::result::Result<_, _>>()?;
        // flatten already emits preorder
        let tree = OrderedTree::from_children(children).map_err(D::Error::custom)?;
        LabeledOrderedTree::new(tree, labels).map_err(D::Error::custom)
    }
}

/// All ordered rooted trees on `v` vertices.
///
/// The order matches [`crate::partitions::enumerate_nc2`] under
/// [`tree_to_partition`]: the first subtree of the root grows first.
pub fn enumerate_ordered_trees(v: usize, limits: &Limits) -> Result<Vec<OrderedTree>> {
    if v == 0 {
        return Err(Error::InvalidTree(
            "a tree needs at least one vertex".into(),
        ));
    }
    check_limit("vertices", v, limits.max_vertices)?;
    Ok(forests(v - 1)
        .into_iter()
        .map(|f| {
            let root = TreeNode {
                label: None,
                children: f,
            };
            let mut children = Vec::new();
            root.flatten(&mut children, &mut Vec::new());
            OrderedTree { children }
        })
        .collect())
}

// Ordered forests with k vertices in total.
fn forests(k: usize) -> Vec<Vec<TreeNode>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=k {
        let firsts = forests(first - 1);
        let rests = forests(k - first);
        for below in &firsts {
            for rest in &rests {
                let mut f = Vec::with_capacity(1 + rest.len());
                f.push(TreeNode {
                    label: None,
                    children: below.clone(),
                });
                f.extend(rest.iter().cloned());
                out.push(f);
            }
        }
    }
    out
}

/// `γ`: non-root vertices become blocks; a vertex's parent becomes the nearest
/// outer block, and siblings appear left to right.
pub fn tree_to_partition(t: &OrderedTree) -> PairPartition {
    fn walk(t: &OrderedTree, v: usize, next: &mut usize, blocks: &mut Vec<(usize, usize)>) {
        for &c in t.children(v) {
            *next += 1;
            let left = *next;
            walk(t, c, next, blocks);
            *next += 1;
            blocks.push((left, *next));
        }
    }
    let mut blocks = Vec::with_capacity(t.vertex_count() - 1);
    let mut next = 0;
    walk(t, 0, &mut next, &mut blocks);
    PairPartition::new(next, blocks).expect("walk emits a noncrossing pairing")
}

/// Inverse of [`tree_to_partition`].
pub fn partition_to_tree(p: &PairPartition) -> OrderedTree {
    // block index order is preorder of the nesting forest already
    OrderedTree {
        children: p.children(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlternationType {
    /// Labels start by descending from the root: `x1 > x2 < x3 > …`.
    TypeI,
    /// Labels start by ascending from the root: `x1 < x2 > x3 < …`.
    TypeII,
}

impl AlternationType {
    // whether an edge from a parent at `depth` needs parent label > child label
    fn descends_at(self, depth: usize) -> bool {
        depth.is_multiple_of(2) == (self == AlternationType::TypeI)
    }

    fn edge_ok(self, depth: usize, parent: usize, child: usize) -> bool {
        if self.descends_at(depth) {
            parent > child
        } else {
            parent < child
        }
    }
}

impl std::str::FromStr for AlternationType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "typei" | "i" | "1" => Ok(AlternationType::TypeI),
            "typeii" | "ii" | "2" => Ok(AlternationType::TypeII),
            _ => Err(Error::Parse(format!("unknown alternation type {s:?}"))),
        }
    }
}

/// Local check: every edge compares labels in the direction fixed by the
/// parent's depth parity.
pub fn is_alternating(t: &LabeledOrderedTree, which: AlternationType) -> bool {
    let depth = t.tree.depths();
    (0..t.tree.vertex_count()).all(|p| {
        t.tree
            .children(p)
            .iter()
            .all(|&c| which.edge_ok(depth[p], t.labels[p], t.labels[c]))
    })
}

/// All alternating labelings of the shape `t`, in lexicographic label order.
pub fn alternating_labelings(t: &OrderedTree, which: AlternationType) -> Vec<LabeledOrderedTree> {
    let mut out = Vec::new();
    label_walk(t, which, &mut |labels| {
        out.push(LabeledOrderedTree {
            tree: t.clone(),
            labels: labels.to_vec(),
        })
    });
    out
}

/// Number of alternating labelings of the shape `t`.
pub fn count_alternating_labelings(t: &OrderedTree, which: AlternationType) -> u64 {
    let mut n = 0;
    label_walk(t, which, &mut |_| n += 1);
    n
}

fn label_walk(t: &OrderedTree, which: AlternationType, emit: &mut dyn FnMut(&[usize])) {
    struct Walk<'a> {
        parent: Vec<Option<usize>>,
        depth: Vec<usize>,
        which: AlternationType,
        labels: Vec<usize>,
        used: Vec<bool>,
        emit: &'a mut dyn FnMut(&[usize]),
    }

    impl Walk<'_> {
        // assign vertex `v` (preorder, so its parent is already labeled)
        fn step(&mut self, v: usize) {
            let n = self.labels.len();
            if v == n {
                (self.emit)(&self.labels);
                return;
            }
            for l in 1..=n {
                if self.used[l] {
                    continue;
                }
                if let Some(p) = self.parent[v] {
                    if !self.which.edge_ok(self.depth[p], self.labels[p], l) {
                        continue;
                    }
                }
                self.used[l] = true;
                self.labels[v] = l;
                self.step(v + 1);
                self.used[l] = false;
            }
        }
    }

    let n = t.vertex_count();
    let mut walk = Walk {
        parent: t.parents(),
        depth: t.depths(),
        which,
        labels: vec![0; n],
        used: vec![false; n + 1],
        emit,
    };
    walk.step(0);
}

/// Alternating labeled ordered trees on `n+1` vertices of the given type.
pub fn enumerate_alternating(
    n: usize,
    which: AlternationType,
    limits: &Limits,
) -> Result<Vec<LabeledOrderedTree>> {
    check_limit("n", n, limits.max_alternating)?;
    let shapes = enumerate_ordered_trees(
        n + 1,
        &Limits {
            max_vertices: n + 1,
            ..*limits
        },
    )?;
    Ok(shapes
        .iter()
        .flat_map(|s| alternating_labelings(s, which))
        .collect())
}

/// `|ℒ_n| = (n+1)! C_n = (2n)!/n!`, labeled ordered trees on `n+1` vertices.
pub fn count_labeled_ordered_trees(n: usize) -> BigUint {
    factorial(2 * n) / factorial(n)
}
