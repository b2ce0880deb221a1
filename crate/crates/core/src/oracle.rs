//! Exact evaluation of deterministic policies and exhaustive minimization over
//! them on small instances.
//!
//! A deterministic policy is a tree indexed by the feedback history. Routing
//! every state through the tree partitions `[1..M]` into leaves, and the
//! expected distortion under the Bayes estimator is `Σ 2 (|leaf| - 1)⁺ / M`.
//!
//! The search space is reduced by symmetry: the prior is uniform and the loss
//! is invariant under relabeling, so only the number of directions a node
//! takes from the cell of states routed to it matters. The canonical
//! representative probes the lowest-indexed members of that cell.
//! [`minimize_naive`] enumerates raw masks instead and serves as the
//! ground-truth cross-check on tiny instances.

use std::collections::BTreeMap;

use num::{BigInt, BigRational};
use rand::RngCore;
use rayon::prelude::*;

use crate::domain::{BeamIndex, BlockConfig, DistortionValue, InputMask};
use crate::error::{Error, Result};
use crate::estimator::{init_ambiguity, AmbiguitySet};
use crate::policy::{Policy, ProbeContext};

/// Default cap on the number of enumerated trees.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Largest `M` accepted by [`minimize_naive`].
const NAIVE_MAX_DIRECTIONS: u32 = 20;

/// Probe per feedback history. Histories absent from the map probe nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyTree {
    cfg: BlockConfig,
    nodes: BTreeMap<Vec<bool>, InputMask>,
}

impl PolicyTree {
    pub fn new(cfg: &BlockConfig) -> Self {
        PolicyTree { cfg: *cfg, nodes: BTreeMap::new() }
    }

    pub fn cfg(&self) -> &BlockConfig {
        &self.cfg
    }

    /// Sets the probe used after observing `history`.
    pub fn set(&mut self, history: &[bool], mask: InputMask) -> Result<()> {
        if history.len() >= self.cfg.l() as usize {
            return Err(Error::HistoryOutOfRange { len: history.len(), depth: self.cfg.l() });
        }
        mask.check(&self.cfg)?;
        if mask.is_empty() {
            self.nodes.remove(history);
        } else {
            self.nodes.insert(history.to_vec(), mask);
        }
        Ok(())
    }

    pub fn probe(&self, history: &[bool]) -> InputMask {
        self.nodes.get(history).cloned().unwrap_or_else(|| InputMask::empty(&self.cfg))
    }

    /// Realizes `policy` as a tree by visiting every history some state can
    /// produce. A randomized policy is sampled once per node.
    pub fn from_policy(cfg: &BlockConfig, policy: &dyn Policy, rng: &mut dyn RngCore) -> Result<Self> {
        let mut tree = PolicyTree::new(cfg);
        let mut stack = vec![(Vec::new(), init_ambiguity(cfg))];
        while let Some((history, routed)) = stack.pop() {
            let ctx = ProbeContext {
                cfg,
                use_index: history.len() as u32 + 1,
                feedback: &history,
                ambiguity: &routed,
            };
            let mask = policy.next_probe(&ctx, rng)?;
            mask.check(cfg)?;
            if history.len() + 1 < cfg.l() as usize {
                for y in [false, true] {
                    if let Ok(child) = routed.update(&mask, y) {
                        let mut h = history.clone();
                        h.push(y);
                        stack.push((h, child));
                    }
                }
            }
            tree.set(&history, mask)?;
        }
        Ok(tree)
    }

    /// `(history, probe)` rows for every non-empty node, histories in
    /// length-then-lexicographic order, `-` standing for the empty history.
    pub fn table(&self) -> Vec<(String, String)> {
        let mut rows: Vec<_> = self.nodes.iter().collect();
        rows.sort_by(|(a, _), (b, _)| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        rows.into_iter()
            .map(|(h, mask)| {
                let key = if h.is_empty() {
                    "-".to_string()
                } else {
                    h.iter().map(|&y| if y { '1' } else { '0' }).collect()
                };
                (key, mask.to_string())
            })
            .collect()
    }

    /// Compact one-line form `-:{1,2};0:{3};1:{1}`.
    pub fn render(&self) -> String {
        self.table()
            .into_iter()
            .map(|(h, m)| format!("{h}:{m}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

fn validate_tree(cfg: &BlockConfig, tree: &PolicyTree) -> Result<()> {
    if tree.cfg.m() != cfg.m() || tree.cfg.l() != cfg.l() {
        return Err(Error::DimensionMismatch { expected: cfg.m(), got: tree.cfg.m() });
    }
    tree.nodes.values().try_for_each(|mask| mask.check(cfg))
}

/// Feedback history of every state, grouped: the leaves partition `[1..M]`.
pub fn leaf_partition(cfg: &BlockConfig, tree: &PolicyTree) -> Result<BTreeMap<Vec<bool>, Vec<BeamIndex>>> {
    validate_tree(cfg, tree)?;
    let mut leaves: BTreeMap<Vec<bool>, Vec<BeamIndex>> = BTreeMap::new();
    let mut history = Vec::with_capacity(cfg.l() as usize);
    for state in cfg.directions() {
        history.clear();
        for _ in 0..cfg.l() {
            let y = tree.nodes.get(&history).is_some_and(|mask| mask.contains(state));
            history.push(y);
        }
        leaves.entry(history.clone()).or_default().push(state);
    }
    Ok(leaves)
}

/// Expected per-block distortion of `tree` under the Bayes estimator.
pub fn evaluate_policy_exact(cfg: &BlockConfig, tree: &PolicyTree) -> Result<DistortionValue> {
    let leaves = leaf_partition(cfg, tree)?;
    let numer: u64 = leaves.values().map(|states| leaf_cost(states.len())).sum();
    Ok(DistortionValue::from_ratio(numer as i64, cfg.m() as i64))
}

/// Realizes and evaluates a deterministic (or sampled) policy.
pub fn evaluate_policy(cfg: &BlockConfig, policy: &dyn Policy, rng: &mut dyn RngCore) -> Result<DistortionValue> {
    evaluate_policy_exact(cfg, &PolicyTree::from_policy(cfg, policy, rng)?)
}

/// `2 (b - 1)⁺`, the leaf's contribution scaled by `M`.
fn leaf_cost(size: usize) -> u64 {
    2 * size.saturating_sub(1) as u64
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub min_distortion: DistortionValue,
    pub argmin_tree: PolicyTree,
    pub policies_evaluated: u128,
}

/// Number of symmetry-reduced trees for `cfg`, saturating at `u128::MAX`.
pub fn reduced_tree_count(cfg: &BlockConfig) -> u128 {
    let m = cfg.m() as usize;
    let b = cfg.b_peak() as usize;
    // counts[a] holds the number of subtrees for a cell of size a with r uses left
    let mut counts = vec![1u128; m + 1];
    for _ in 0..cfg.l() {
        let next: Vec<u128> = (0..=m)
            .map(|a| {
                if a == 0 {
                    return 1;
                }
                (0..=a.min(b)).fold(0u128, |acc, t| acc.saturating_add(counts[t].saturating_mul(counts[a - t])))
            })
            .collect();
        counts = next;
    }
    counts[m]
}

/// Number of raw trees (every node picks any admissible mask).
pub fn naive_tree_count(cfg: &BlockConfig) -> u128 {
    let masks = admissible_mask_count(cfg);
    let nodes = match 1u128.checked_shl(cfg.l()) {
        Some(p) => p - 1,
        None => return u128::MAX,
    };
    let mut total = 1u128;
    for _ in 0..nodes {
        total = total.saturating_mul(masks);
        if total == u128::MAX {
            break;
        }
    }
    total
}

fn admissible_mask_count(cfg: &BlockConfig) -> u128 {
    let m = cfg.m() as u128;
    let mut binom = 1u128;
    let mut total = 1u128;
    for w in 1..=cfg.b_peak() as u128 {
        binom = binom.saturating_mul(m - w + 1) / w;
        total = total.saturating_add(binom);
    }
    total
}

#[derive(Clone)]
struct Cell {
    history: Vec<bool>,
    members: Vec<u32>,
}

struct Best {
    cost: u64,
    probes: Vec<(Vec<bool>, Vec<u32>)>,
}

struct ReducedSearch<'a> {
    cfg: &'a BlockConfig,
    evaluated: u128,
    best: Option<Best>,
}

impl ReducedSearch<'_> {
    /// Assigns a probe size to `work[pos]` and recurses; `work` grows with the
    /// children of each assigned node, so order is breadth-first by creation.
    fn descend(&mut self, work: &mut Vec<Cell>, taken: &mut Vec<usize>, pos: usize, cost: u64) {
        if pos == work.len() {
            self.evaluated += 1;
            if self.best.as_ref().is_none_or(|b| cost < b.cost) {
                let probes = work
                    .iter()
                    .zip(taken.iter())
                    .map(|(cell, &t)| (cell.history.clone(), cell.members[..t].to_vec()))
                    .collect();
                self.best = Some(Best { cost, probes });
            }
            return;
        }
        let size = work[pos].members.len();
        let last_use = work[pos].history.len() + 1 == self.cfg.l() as usize;
        for t in 0..=size.min(self.cfg.b_peak() as usize) {
            taken.push(t);
            if last_use {
                self.descend(work, taken, pos + 1, cost + leaf_cost(t) + leaf_cost(size - t));
            } else {
                let pushed = push_children(work, pos, t);
                self.descend(work, taken, pos + 1, cost);
                work.truncate(work.len() - pushed);
            }
            taken.pop();
        }
    }
}

fn push_children(work: &mut Vec<Cell>, pos: usize, t: usize) -> usize {
    let cell = work[pos].clone();
    let mut pushed = 0;
    if t < cell.members.len() {
        let mut history = cell.history.clone();
        history.push(false);
        work.push(Cell { history, members: cell.members[t..].to_vec() });
        pushed += 1;
    }
    if t > 0 {
        let mut history = cell.history;
        history.push(true);
        work.push(Cell { history, members: cell.members[..t].to_vec() });
        pushed += 1;
    }
    pushed
}

/// Exact minimum expected distortion over all deterministic policies.
///
/// Refuses with [`Error::BudgetExceeded`] when the reduced search space is
/// larger than `budget`. Work is split over the root probe size; the result
/// does not depend on scheduling.
pub fn minimize_over_policies(cfg: &BlockConfig, budget: u128) -> Result<OracleResult> {
    let estimate = reduced_tree_count(cfg);
    if estimate > budget {
        return Err(Error::BudgetExceeded { estimate, budget });
    }
    let m = cfg.m() as usize;
    let root = Cell { history: Vec::new(), members: (1..=cfg.m()).collect() };
    let partials: Vec<(u128, Option<Best>)> = (0..=m.min(cfg.b_peak() as usize))
        .into_par_iter()
        .map(|t| {
            let mut search = ReducedSearch { cfg, evaluated: 0, best: None };
            let mut work = vec![root.clone()];
            let mut taken = vec![t];
            if cfg.l() == 1 {
                search.descend(&mut work, &mut taken, 1, leaf_cost(t) + leaf_cost(m - t));
            } else {
                push_children(&mut work, 0, t);
                search.descend(&mut work, &mut taken, 1, 0);
            }
            (search.evaluated, search.best)
        })
        .collect();

    let evaluated: u128 = partials.iter().map(|(n, _)| n).sum();
    // first strict minimum in root order
    let best = partials
        .into_iter()
        .filter_map(|(_, best)| best)
        .reduce(|a, b| if b.cost < a.cost { b } else { a })
        .ok_or_else(|| Error::Invariant("empty policy space".into()))?;

    let mut tree = PolicyTree::new(cfg);
    for (history, members) in &best.probes {
        tree.set(history, InputMask::new(cfg, members.iter().copied())?)?;
    }
    let min_distortion = DistortionValue::from_ratio(best.cost as i64, cfg.m() as i64);
    let check = evaluate_policy_exact(cfg, &tree)?;
    if check != min_distortion {
        return Err(Error::Invariant(format!(
            "argmin tree evaluates to {check}, search reported {min_distortion}"
        )));
    }
    Ok(OracleResult { min_distortion, argmin_tree: tree, policies_evaluated: evaluated })
}

/// Minimization by brute force over raw masks at every node of the full
/// history tree. Only for tiny instances.
pub fn minimize_naive(cfg: &BlockConfig, budget: u128) -> Result<OracleResult> {
    let estimate = naive_tree_count(cfg);
    if cfg.m() > NAIVE_MAX_DIRECTIONS || estimate > budget {
        return Err(Error::BudgetExceeded { estimate, budget });
    }
    let masks: Vec<InputMask> = (0u64..1 << cfg.m())
        .filter(|bits| bits.count_ones() <= cfg.b_peak())
        .map(|bits| InputMask::new(cfg, (0..cfg.m()).filter(|i| bits >> i & 1 == 1).map(|i| i + 1)))
        .collect::<Result<_>>()?;

    let histories: Vec<Vec<bool>> = (0..cfg.l())
        .flat_map(|depth| {
            (0u64..1 << depth).map(move |code| (0..depth).rev().map(|i| code >> i & 1 == 1).collect())
        })
        .collect();

    let mut digits = vec![0usize; histories.len()];
    let mut best: Option<(DistortionValue, PolicyTree)> = None;
    let mut evaluated = 0u128;
    loop {
        let mut tree = PolicyTree::new(cfg);
        for (history, &d) in histories.iter().zip(&digits) {
            tree.set(history, masks[d].clone())?;
        }
        let value = evaluate_policy_exact(cfg, &tree)?;
        evaluated += 1;
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, tree));
        }
        // odometer over node choices
        let mut i = 0;
        loop {
            if i == digits.len() {
                let (min_distortion, argmin_tree) = best.expect("at least one tree");
                return Ok(OracleResult { min_distortion, argmin_tree, policies_evaluated: evaluated });
            }
            digits[i] += 1;
            if digits[i] < masks.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Exact expected distortion of a randomized policy that ignores feedback
/// and draws a uniform weight-`weight` mask every use, by enumerating all
/// mask sequences. Only for tiny instances.
pub fn evaluate_nonadaptive_uniform(cfg: &BlockConfig, weight: u32) -> Result<DistortionValue> {
    if cfg.m() > NAIVE_MAX_DIRECTIONS {
        return Err(Error::BudgetExceeded { estimate: u128::MAX, budget: 0 });
    }
    let masks: Vec<u64> = (0u64..1 << cfg.m()).filter(|b| b.count_ones() == weight).collect();
    let sequences = (masks.len() as u128).checked_pow(cfg.l()).unwrap_or(u128::MAX);
    if sequences > DEFAULT_BUDGET {
        return Err(Error::BudgetExceeded { estimate: sequences, budget: DEFAULT_BUDGET });
    }
    let mut total = 0u128;
    let mut digits = vec![0usize; cfg.l() as usize];
    loop {
        // states sharing the same output pattern share a leaf
        let mut leaves: BTreeMap<u64, usize> = BTreeMap::new();
        for s in 0..cfg.m() {
            let pattern = digits.iter().fold(0u64, |acc, &d| acc << 1 | (masks[d] >> s & 1));
            *leaves.entry(pattern).or_default() += 1;
        }
        total += leaves.values().map(|&b| leaf_cost(b) as u128).sum::<u128>();
        let mut i = 0;
        loop {
            if i == digits.len() {
                let denom = BigInt::from(sequences) * BigInt::from(cfg.m());
                return Ok(DistortionValue::from_rational(BigRational::new(BigInt::from(total), denom)));
            }
            digits[i] += 1;
            if digits[i] < masks.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Set of states that end in the same leaf as `state`.
pub fn leaf_of(cfg: &BlockConfig, tree: &PolicyTree, state: BeamIndex) -> Result<AmbiguitySet> {
    let leaves = leaf_partition(cfg, tree)?;
    let members = leaves
        .into_values()
        .find(|states| states.contains(&state))
        .ok_or_else(|| Error::Invariant(format!("state {state} not routed to any leaf")))?;
    AmbiguitySet::from_members(cfg, members.into_iter().map(BeamIndex::get))
}
