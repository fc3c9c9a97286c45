//! Behavior oracles: anything that answers "what is chosen from this
//! problem after that history".

use std::collections::BTreeMap;

use crate::catalog::{Catalog, Problem, ProblemId};
use crate::error::AatError;
use crate::model::{AatModel, Engine};
use crate::universe::{Alt, Menu, Universe};

/// A deterministic sequential choice rule over the problems of a catalog.
///
/// The answer depends only on the history and the current problem, so future
/// independence holds by construction. Partial oracles return `None` where
/// they have no data.
pub trait BehaviorOracle {
    fn catalog(&self) -> &Catalog;

    fn choose_at(&self, history: &[ProblemId], problem: ProblemId) -> Option<Alt>;

    /// Stepping tables for oracles that are AAT models. Tree exploration
    /// uses them to collapse histories to chosen sets.
    fn engine(&self) -> Option<&Engine> {
        None
    }

    /// True when some queries may go unanswered.
    fn is_partial(&self) -> bool {
        false
    }
}

impl BehaviorOracle for AatModel {
    fn catalog(&self) -> &Catalog {
        AatModel::catalog(self)
    }

    fn choose_at(&self, history: &[ProblemId], problem: ProblemId) -> Option<Alt> {
        let e = AatModel::engine(self);
        let (_, chosen) = e.run(history);
        Some(e.step(chosen, problem))
    }

    fn engine(&self) -> Option<&Engine> {
        Some(AatModel::engine(self))
    }
}

impl<T: BehaviorOracle + ?Sized> BehaviorOracle for &T {
    fn catalog(&self) -> &Catalog {
        (**self).catalog()
    }
    fn choose_at(&self, history: &[ProblemId], problem: ProblemId) -> Option<Alt> {
        (**self).choose_at(history, problem)
    }
    fn engine(&self) -> Option<&Engine> {
        (**self).engine()
    }
    fn is_partial(&self) -> bool {
        (**self).is_partial()
    }
}

/// An oracle given by a closure over problem histories.
pub struct FnOracle<F> {
    catalog: Catalog,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(&Catalog, &[ProblemId], ProblemId) -> Alt,
{
    pub fn new(catalog: Catalog, f: F) -> Self {
        FnOracle { catalog, f }
    }
}

impl<F> BehaviorOracle for FnOracle<F>
where
    F: Fn(&Catalog, &[ProblemId], ProblemId) -> Alt,
{
    fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    fn choose_at(&self, history: &[ProblemId], problem: ProblemId) -> Option<Alt> {
        let a = (self.f)(&self.catalog, history, problem);
        debug_assert!(self.catalog.mask(problem).contains(a));
        Some(a)
    }
}

/// Looks up plain menus in the oracle's catalog and asks it.
pub fn choose_menus(
    oracle: &dyn BehaviorOracle,
    history: &[Menu],
    menu: Menu,
) -> Result<Option<Alt>, AatError> {
    let cat = oracle.catalog();
    let find = |m: Menu| {
        cat.find(m, None).ok_or_else(|| {
            AatError::InvalidMenu(format!(
                "{} is not an unframed problem of this oracle",
                cat.universe().show_set(m.set())
            ))
        })
    };
    let h: Vec<ProblemId> = history.iter().map(|&m| find(m)).collect::<Result<_, _>>()?;
    Ok(oracle.choose_at(&h, find(menu)?))
}

/// One observed sequence: problems faced and choices made.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub problems: Vec<Problem>,
    pub choices: Vec<Alt>,
}

impl Observation {
    pub fn plain(menus: Vec<Menu>, choices: Vec<Alt>) -> Observation {
        Observation {
            problems: menus
                .into_iter()
                .map(|menu| Problem { menu, frame: None })
                .collect(),
            choices,
        }
    }
}

/// Finite prefixes of observed choice sequences.
#[derive(Clone, Debug)]
pub struct ChoiceDataset {
    universe: Universe,
    observations: Vec<Observation>,
    framed: bool,
}

impl ChoiceDataset {
    pub fn new(universe: Universe, observations: Vec<Observation>) -> Result<ChoiceDataset, AatError> {
        let mut framed = None;
        for (k, o) in observations.iter().enumerate() {
            if o.problems.len() != o.choices.len() {
                return Err(AatError::InvalidDataset(format!(
                    "observation {k} has {} menus but {} choices",
                    o.problems.len(),
                    o.choices.len()
                )));
            }
            for (t, (p, &c)) in o.problems.iter().zip(&o.choices).enumerate() {
                universe.menu_from_set(p.menu.set(), false)?;
                if !p.menu.contains(c) {
                    return Err(AatError::InvalidDataset(format!(
                        "observation {k}, period {}: `{}` is not in {}",
                        t + 1,
                        universe.label(c),
                        universe.show_set(p.menu.set())
                    )));
                }
                let f = p.frame.is_some();
                if *framed.get_or_insert(f) != f {
                    return Err(AatError::InvalidDataset(
                        "framed and unframed menus are mixed".into(),
                    ));
                }
            }
        }
        Ok(ChoiceDataset {
            universe,
            observations,
            framed: framed.unwrap_or(false),
        })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn is_framed(&self) -> bool {
        self.framed
    }

    /// Alternatives that appear in some observed menu.
    pub fn observed_alternatives(&self) -> crate::universe::AltSet {
        self.observations
            .iter()
            .flat_map(|o| o.problems.iter())
            .fold(crate::universe::AltSet::EMPTY, |s, p| s.union(p.menu.set()))
    }
}

#[derive(Clone, Debug, Default)]
struct TrieNode {
    edges: BTreeMap<ProblemId, (Alt, usize, usize)>,
}

/// A partial oracle answering exactly the observed (history, problem) pairs.
#[derive(Clone, Debug)]
pub struct DatasetOracle {
    catalog: Catalog,
    nodes: Vec<TrieNode>,
}

impl DatasetOracle {
    pub fn new(dataset: &ChoiceDataset) -> Result<DatasetOracle, AatError> {
        let universe = dataset.universe();
        let catalog = if dataset.is_framed() {
            let mut ps: Vec<Problem> = dataset
                .observations()
                .iter()
                .flat_map(|o| o.problems.iter().cloned())
                .collect();
            ps.sort();
            ps.dedup();
            Catalog::framed_partial(universe, ps)?
        } else {
            Catalog::frameless(universe, false)
        };
        let mut nodes = vec![TrieNode::default()];
        for (k, o) in dataset.observations().iter().enumerate() {
            let mut node = 0usize;
            for (t, (p, &c)) in o.problems.iter().zip(&o.choices).enumerate() {
                let id = catalog
                    .find(p.menu, p.frame.as_ref())
                    .expect("catalog built from the observations");
                match nodes[node].edges.get(&id).copied() {
                    Some((prev, child, first)) => {
                        if prev != c {
                            return Err(AatError::InconsistentDataset {
                                first,
                                second: k,
                                period: t + 1,
                            });
                        }
                        node = child;
                    }
                    None => {
                        let child = nodes.len();
                        nodes.push(TrieNode::default());
                        nodes[node].edges.insert(id, (c, child, k));
                        node = child;
                    }
                }
            }
        }
        Ok(DatasetOracle { catalog, nodes })
    }

    /// Observed continuations from a history: `(problem, choice)` pairs.
    pub(crate) fn observed_after(&self, history: &[ProblemId]) -> Option<Vec<(ProblemId, Alt)>> {
        let node = self.node_of(history)?;
        Some(self.nodes[node].edges.iter().map(|(&p, &(c, _, _))| (p, c)).collect())
    }

    fn node_of(&self, history: &[ProblemId]) -> Option<usize> {
        let mut node = 0usize;
        for p in history {
            node = self.nodes[node].edges.get(p)?.1;
        }
        Some(node)
    }
}

impl BehaviorOracle for DatasetOracle {
    fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    fn choose_at(&self, history: &[ProblemId], problem: ProblemId) -> Option<Alt> {
        let node = self.node_of(history)?;
        self.nodes[node].edges.get(&problem).map(|e| e.0)
    }

    fn is_partial(&self) -> bool {
        true
    }
}

pub fn oracle_from_dataset(dataset: &ChoiceDataset) -> Result<DatasetOracle, AatError> {
    DatasetOracle::new(dataset)
}
