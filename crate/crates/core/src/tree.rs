//! Materialized bounded behavior: every history of length below the horizon
//! together with its one-shot choice function.

use std::ops::ControlFlow;

use crate::catalog::{Catalog, ProblemId};
use crate::error::AatError;
use crate::oracle::{BehaviorOracle, ChoiceDataset, DatasetOracle};
use crate::universe::{Alt, AltSet};

/// Default length of the menu sequences explored by bounded checks.
pub const DEFAULT_HORIZON: usize = 4;

/// Refuse to materialize trees bigger than this many edges.
pub const MAX_EDGES: usize = 40_000_000;

const NO_CHILD: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(pub(crate) u32);

/// One period of a sequence: the problem faced and the choice made.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub problem: ProblemId,
    pub choice: Alt,
}

#[derive(Clone, Copy, Debug)]
struct Edge {
    problem: ProblemId,
    choice: Alt,
    child: u32,
}

#[derive(Clone, Debug, Default)]
struct Node {
    edges: Vec<Edge>,
}

/// The behavior of an oracle on all problem sequences of length at most
/// `horizon`. Node `h` stores `c̃(h)(p)` for every problem `p` the source
/// answers; nodes exist for histories shorter than the horizon.
#[derive(Clone, Debug)]
pub struct ChoiceTree {
    catalog: Catalog,
    horizon: usize,
    complete: bool,
    nodes: Vec<Node>,
}

impl ChoiceTree {
    /// Queries the oracle on every sequence of length `<= horizon`.
    pub fn explore(oracle: &dyn BehaviorOracle, horizon: usize) -> Result<ChoiceTree, AatError> {
        if horizon == 0 {
            return Err(AatError::Precondition("horizon must be at least 1".into()));
        }
        let catalog = oracle.catalog().clone();
        let m = catalog.len();
        if !oracle.is_partial() {
            let mut total: usize = 0;
            let mut level: usize = 1;
            for _ in 0..horizon {
                level = level.saturating_mul(m);
                total = total.saturating_add(level);
            }
            if total > MAX_EDGES {
                return Err(AatError::LimitExceeded(format!(
                    "{m} problems at horizon {horizon} need {total} sequences (limit {MAX_EDGES})"
                )));
            }
        }
        let mut tree = ChoiceTree {
            catalog,
            horizon,
            complete: !oracle.is_partial(),
            nodes: vec![Node::default()],
        };
        match oracle.engine() {
            Some(engine) => tree.grow_engine(engine, 0, AltSet::EMPTY, 0),
            None => {
                let mut path = Vec::with_capacity(horizon);
                tree.grow_oracle(oracle, 0, &mut path);
            }
        }
        Ok(tree)
    }

    /// The observed part of a dataset, as far as its longest observation.
    pub fn from_dataset(dataset: &ChoiceDataset) -> Result<ChoiceTree, AatError> {
        let oracle = DatasetOracle::new(dataset)?;
        let horizon = dataset
            .observations()
            .iter()
            .map(|o| o.choices.len())
            .max()
            .unwrap_or(0)
            .max(1);
        let mut tree = ChoiceTree {
            catalog: oracle.catalog().clone(),
            horizon,
            complete: false,
            nodes: vec![Node::default()],
        };
        tree.grow_dataset(&oracle, 0, &mut Vec::new());
        Ok(tree)
    }

    fn grow_engine(&mut self, engine: &crate::model::Engine, node: usize, chosen: AltSet, depth: usize) {
        let m = self.catalog.len();
        let leaf = depth + 1 >= self.horizon;
        let mut edges = Vec::with_capacity(m);
        for p in self.catalog.ids() {
            edges.push(Edge {
                problem: p,
                choice: engine.step(chosen, p),
                child: NO_CHILD,
            });
        }
        if !leaf {
            for e in edges.iter_mut() {
                e.child = self.nodes.len() as u32;
                self.nodes.push(Node::default());
            }
        }
        self.nodes[node].edges = edges.clone();
        if !leaf {
            for e in edges {
                self.grow_engine(engine, e.child as usize, chosen.with(e.choice), depth + 1);
            }
        }
    }

    fn grow_oracle(&mut self, oracle: &dyn BehaviorOracle, node: usize, path: &mut Vec<ProblemId>) {
        let leaf = path.len() + 1 >= self.horizon;
        let mut edges = Vec::with_capacity(self.catalog.len());
        for p in self.catalog.ids() {
            match oracle.choose_at(path, p) {
                Some(c) => {
                    debug_assert!(self.catalog.mask(p).contains(c), "oracle chose outside the menu");
                    edges.push(Edge {
                        problem: p,
                        choice: c,
                        child: NO_CHILD,
                    })
                }
                None => self.complete = false,
            }
        }
        if !leaf {
            for e in edges.iter_mut() {
                e.child = self.nodes.len() as u32;
                self.nodes.push(Node::default());
            }
        }
        self.nodes[node].edges = edges.clone();
        if !leaf {
            for e in edges {
                path.push(e.problem);
                self.grow_oracle(oracle, e.child as usize, path);
                path.pop();
            }
        }
    }

    fn grow_dataset(&mut self, oracle: &DatasetOracle, node: usize, path: &mut Vec<ProblemId>) {
        let observed = oracle.observed_after(path).unwrap_or_default();
        let leaf = path.len() + 1 >= self.horizon;
        let mut edges = Vec::with_capacity(observed.len());
        for (p, c) in observed {
            let has_more = !leaf && {
                path.push(p);
                let more = oracle.observed_after(path).is_some_and(|v| !v.is_empty());
                path.pop();
                more
            };
            let child = if has_more {
                self.nodes.push(Node::default());
                (self.nodes.len() - 1) as u32
            } else {
                NO_CHILD
            };
            edges.push(Edge {
                problem: p,
                choice: c,
                child,
            });
        }
        self.nodes[node].edges = edges.clone();
        for e in edges {
            if e.child != NO_CHILD {
                path.push(e.problem);
                self.grow_dataset(oracle, e.child as usize, path);
                path.pop();
            }
        }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// True when every sequence within the horizon is answered.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    fn edge(&self, node: NodeId, p: ProblemId) -> Option<&Edge> {
        let edges = &self.nodes[node.0 as usize].edges;
        if edges.len() == self.catalog.len() {
            edges.get(p.index())
        } else {
            edges
                .binary_search_by(|e| e.problem.cmp(&p))
                .ok()
                .map(|i| &edges[i])
        }
    }

    /// `c̃(h)(p)` where `node` is `h`.
    pub fn choice(&self, node: NodeId, p: ProblemId) -> Option<Alt> {
        self.edge(node, p).map(|e| e.choice)
    }

    pub fn child(&self, node: NodeId, p: ProblemId) -> Option<NodeId> {
        self.edge(node, p)
            .and_then(|e| (e.child != NO_CHILD).then_some(NodeId(e.child)))
    }

    /// The default choice `c₀(p)`.
    pub fn default_choice(&self, p: ProblemId) -> Option<Alt> {
        self.choice(self.root(), p)
    }

    /// Answered problems at a node with their choices.
    pub fn answers(&self, node: NodeId) -> impl Iterator<Item = (ProblemId, Alt)> + '_ {
        self.nodes[node.0 as usize]
            .edges
            .iter()
            .map(|e| (e.problem, e.choice))
    }

    pub fn node_at(&self, history: &[ProblemId]) -> Option<NodeId> {
        let mut node = self.root();
        for &p in history {
            node = self.child(node, p)?;
        }
        Some(node)
    }

    /// The node reached by the problems of a path.
    pub fn node_along(&self, steps: &[Step]) -> Option<NodeId> {
        let mut node = self.root();
        for s in steps {
            node = self.child(node, s.problem)?;
        }
        Some(node)
    }

    /// `c̃(h)(p)` with `h` given as the problems of a path.
    pub fn choose_after(&self, steps: &[Step], p: ProblemId) -> Option<Alt> {
        self.node_along(steps).and_then(|n| self.choice(n, p))
    }

    pub fn choose(&self, history: &[ProblemId], p: ProblemId) -> Option<Alt> {
        self.node_at(history).and_then(|n| self.choice(n, p))
    }

    /// Choices along a problem sequence, if it is inside the tree.
    pub fn run(&self, problems: &[ProblemId]) -> Option<Vec<Alt>> {
        let mut node = self.root();
        let mut out = Vec::with_capacity(problems.len());
        for (i, &p) in problems.iter().enumerate() {
            out.push(self.choice(node, p)?);
            if i + 1 < problems.len() {
                node = self.child(node, p)?;
            }
        }
        Some(out)
    }

    /// Visits every answered sequence (the path ends with its last step) in
    /// lexicographic order, prefixes first.
    pub fn for_each_sequence<B>(&self, mut f: impl FnMut(&[Step]) -> ControlFlow<B>) -> Option<B> {
        let mut path = Vec::with_capacity(self.horizon);
        match self.seq_rec(0, &mut path, &mut f) {
            ControlFlow::Break(b) => Some(b),
            ControlFlow::Continue(()) => None,
        }
    }

    fn seq_rec<B>(
        &self,
        node: usize,
        path: &mut Vec<Step>,
        f: &mut impl FnMut(&[Step]) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        for e in &self.nodes[node].edges {
            path.push(Step {
                problem: e.problem,
                choice: e.choice,
            });
            f(path)?;
            if e.child != NO_CHILD {
                self.seq_rec(e.child as usize, path, f)?;
            }
            path.pop();
        }
        ControlFlow::Continue(())
    }

    /// Visits every history node in pre-order with the steps leading to it
    /// and the node ids from the root down to it.
    pub fn for_each_node<B>(
        &self,
        mut f: impl FnMut(&[Step], &[NodeId]) -> ControlFlow<B>,
    ) -> Option<B> {
        let mut path = Vec::with_capacity(self.horizon);
        let mut ids = vec![self.root()];
        match self.node_rec(&mut path, &mut ids, &mut f) {
            ControlFlow::Break(b) => Some(b),
            ControlFlow::Continue(()) => None,
        }
    }

    fn node_rec<B>(
        &self,
        path: &mut Vec<Step>,
        ids: &mut Vec<NodeId>,
        f: &mut impl FnMut(&[Step], &[NodeId]) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        f(path, ids)?;
        let node = ids.last().expect("nonempty").0 as usize;
        for e in &self.nodes[node].edges {
            if e.child != NO_CHILD {
                path.push(Step {
                    problem: e.problem,
                    choice: e.choice,
                });
                ids.push(NodeId(e.child));
                self.node_rec(path, ids, f)?;
                ids.pop();
                path.pop();
            }
        }
        ControlFlow::Continue(())
    }

    /// Alternatives chosen somewhere within the horizon.
    pub fn ever_chosen(&self) -> AltSet {
        self.nodes
            .iter()
            .flat_map(|n| n.edges.iter())
            .fold(AltSet::EMPTY, |s, e| s.with(e.choice))
    }

    /// Alternatives chosen by default from some problem.
    pub fn default_image(&self) -> AltSet {
        self.answers(self.root()).fold(AltSet::EMPTY, |s, (_, c)| s.with(c))
    }

    /// Every alternative chosen anywhere in the tree. Equals the default
    /// image for AAT behavior on a complete tree, since an alternative's
    /// first choice is always a default choice.
    pub fn chosen_anywhere(&self) -> AltSet {
        let mut s = AltSet::EMPTY;
        self.for_each_sequence::<()>(|path| {
            s = s.with(path[path.len() - 1].choice);
            std::ops::ControlFlow::Continue(())
        });
        s
    }
}

/// Problems and choices of a path.
pub fn split_steps(steps: &[Step]) -> (Vec<ProblemId>, Vec<Alt>) {
    steps.iter().map(|s| (s.problem, s.choice)).unzip()
}

/// Set of choices made along a path.
pub fn chosen_along(steps: &[Step]) -> AltSet {
    steps.iter().fold(AltSet::EMPTY, |s, st| s.with(st.choice))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::FnOracle;

    #[test]
    fn engine_and_generic_exploration_agree() {
        let model = fixtures::late_warp();
        let fast = ChoiceTree::explore(&model, 3).unwrap();
        let generic = FnOracle::new(model.catalog().clone(), |_, h: &[ProblemId], p| {
            model.choose_at(h, p).unwrap()
        });
        let slow = ChoiceTree::explore(&generic, 3).unwrap();
        assert_eq!(fast.node_count(), slow.node_count());
        let mut a = Vec::new();
        fast.for_each_sequence::<()>(|s| {
            a.push(s.to_vec());
            ControlFlow::Continue(())
        });
        let mut b = Vec::new();
        slow.for_each_sequence::<()>(|s| {
            b.push(s.to_vec());
            ControlFlow::Continue(())
        });
        assert_eq!(a, b);
        let m = model.catalog().len();
        assert_eq!(a.len(), m + m * m + m * m * m);
    }

    #[test]
    fn sequences_come_in_lexicographic_order() {
        let model = fixtures::worst_first();
        let tree = ChoiceTree::explore(&model, 2).unwrap();
        let mut seqs: Vec<Vec<ProblemId>> = Vec::new();
        tree.for_each_sequence::<()>(|s| {
            seqs.push(s.iter().map(|st| st.problem).collect());
            ControlFlow::Continue(())
        });
        let mut sorted = seqs.clone();
        sorted.sort();
        assert_eq!(seqs, sorted);
    }

    #[test]
    fn refuses_huge_trees() {
        let u = crate::universe::Universe::new(["a", "b", "c", "d", "e", "f", "g"]).unwrap();
        let model = crate::model::AatModel::full_attention(
            crate::model::Utility::from_ranking(&u, &u.alts().collect::<Vec<_>>()).unwrap(),
            &u,
        );
        assert!(matches!(
            ChoiceTree::explore(&model, 5),
            Err(AatError::LimitExceeded(_))
        ));
    }
}
