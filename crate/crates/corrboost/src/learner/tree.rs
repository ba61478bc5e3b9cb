//! Hamming trees: binary trees whose every node carries a stump. Inner nodes
//! route by φ only (+1 → left, −1 → right); leaves output the full ±1 vote
//! vector v·φ(x).
//!
//! Growth is top-down and best-first: the leaf whose replacement by an inner
//! node plus two child stumps gives the largest increase in total tree edge
//! is split, until the leaf budget is reached or no split improves the edge.
//! Every node's stump is learned on a fresh draw of d′ candidate features.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{learn_stump, Stump, StumpFit, WyMatrix};
use crate::space::{FeatureKey, FeatureSpace, RowSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub stump: Stump,
    pub left: Option<u32>,
    pub right: Option<u32>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.left.is_none()
    }
}

/// Node 0 is the root. A single-node tree is exactly its root stump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingTree {
    pub nodes: Vec<TreeNode>,
}

impl HammingTree {
    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Follows φ decisions to a leaf; returns the leaf index and its φ value.
    pub fn route(&self, value: &impl Fn(&FeatureKey) -> f64) -> (usize, f64) {
        let mut idx = 0usize;
        loop {
            let node = &self.nodes[idx];
            let phi = node.stump.phi_of_value(value(&node.stump.feature));
            match (node.left, node.right) {
                (Some(l), Some(r)) => idx = if phi > 0.0 { l as usize } else { r as usize },
                _ => return (idx, phi),
            }
        }
    }

    /// Writes the ±1 output vector of the reached leaf into `out`.
    pub fn output_into(&self, value: &impl Fn(&FeatureKey) -> f64, out: &mut [f64]) {
        let (leaf, phi) = self.route(value);
        self.nodes[leaf].stump.output_into(phi, out);
    }

    pub fn output_for_row(&self, space: &dyn FeatureSpace, row: usize, out: &mut [f64]) {
        self.output_into(&|key: &FeatureKey| space.value(key, row), out);
    }

    /// Every feature key used anywhere in the tree.
    pub fn feature_keys(&self) -> impl Iterator<Item = &FeatureKey> {
        self.nodes.iter().map(|n| &n.stump.feature)
    }
}

/// A grown tree with its total training edge and the edge after each
/// accepted split (strictly increasing).
#[derive(Debug)]
pub struct TreeFit {
    pub tree: HammingTree,
    pub edge: f64,
    pub growth_edges: Vec<f64>,
}

struct GrowLeaf {
    node: usize,
    plan: Option<SplitPlan>,
}

struct SplitPlan {
    plus_rows: Vec<u32>,
    minus_rows: Vec<u32>,
    plus: StumpFit,
    minus: StumpFit,
    gain: f64,
}

pub fn learn_tree(
    space: &dyn FeatureSpace,
    wy: &WyMatrix,
    n_leaves: usize,
    d_prime: usize,
    rng: &mut dyn RngCore,
) -> Result<TreeFit> {
    if n_leaves < 1 {
        return Err(Error::InvalidConfig("tree needs at least 1 leaf".into()));
    }
    let n = space.n_rows();

    let fit_node = |rows: &RowSet, rng: &mut dyn RngCore| -> Result<StumpFit> {
        let candidates = space.sample(rng, d_prime);
        learn_stump(space, wy, rows, &candidates)
    };

    let all = RowSet::all(n);
    let root_fit = fit_node(&all, rng)?;
    let mut nodes = vec![TreeNode {
        stump: root_fit.stump.clone(),
        left: None,
        right: None,
    }];
    let mut total_edge = root_fit.edge;
    let mut growth_edges = vec![total_edge];

    let make_leaf =
        |node: usize, rows: RowSet, fit: StumpFit, rng: &mut dyn RngCore| -> Result<GrowLeaf> {
            let plan = plan_split(space, &rows, &fit, n, &fit_node, rng)?;
            Ok(GrowLeaf { node, plan })
        };

    let mut leaves = vec![make_leaf(0, all, root_fit, rng)?];

    while leaves.len() < n_leaves {
        let mut best: Option<(usize, f64)> = None;
        for (i, leaf) in leaves.iter().enumerate() {
            if let Some(plan) = &leaf.plan {
                if plan.gain > 0.0 && best.is_none_or(|(_, g)| plan.gain > g) {
                    best = Some((i, plan.gain));
                }
            }
        }
        let Some((leaf_idx, gain)) = best else {
            break; // no split improves the edge; stop early
        };

        let leaf = leaves.swap_remove(leaf_idx);
        let plan = leaf.plan.expect("chosen leaf has a plan");
        let left = nodes.len();
        nodes.push(TreeNode {
            stump: plan.plus.stump.clone(),
            left: None,
            right: None,
        });
        let right = nodes.len();
        nodes.push(TreeNode {
            stump: plan.minus.stump.clone(),
            left: None,
            right: None,
        });
        nodes[leaf.node].left = Some(left as u32);
        nodes[leaf.node].right = Some(right as u32);

        let plus_rows = RowSet::from_rows(plan.plus_rows, n);
        let minus_rows = RowSet::from_rows(plan.minus_rows, n);
        leaves.push(make_leaf(left, plus_rows, plan.plus, rng)?);
        leaves.push(make_leaf(right, minus_rows, plan.minus, rng)?);

        total_edge += gain;
        growth_edges.push(total_edge);
    }

    Ok(TreeFit {
        tree: HammingTree { nodes },
        edge: total_edge,
        growth_edges,
    })
}

/// Learns the two child stumps a leaf would split into. `None` when the
/// leaf's φ does not separate its rows.
fn plan_split(
    space: &dyn FeatureSpace,
    rows: &RowSet,
    fit: &StumpFit,
    n: usize,
    fit_node: &impl Fn(&RowSet, &mut dyn RngCore) -> Result<StumpFit>,
    rng: &mut dyn RngCore,
) -> Result<Option<SplitPlan>> {
    let mut plus_rows = Vec::new();
    let mut minus_rows = Vec::new();
    for &row in rows.rows() {
        if fit.stump.phi(space, row as usize) > 0.0 {
            plus_rows.push(row);
        } else {
            minus_rows.push(row);
        }
    }
    if plus_rows.is_empty() || minus_rows.is_empty() {
        return Ok(None);
    }
    let plus = fit_node(&RowSet::from_rows(plus_rows.clone(), n), rng)?;
    let minus = fit_node(&RowSet::from_rows(minus_rows.clone(), n), rng)?;
    let gain = plus.edge + minus.edge - fit.edge;
    Ok(Some(SplitPlan {
        plus_rows,
        minus_rows,
        plus,
        minus,
        gain,
    }))
}
