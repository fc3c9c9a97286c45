//! The set of choice problems an oracle answers: plain menus, or menus
//! paired with a frame.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::AatError;
use crate::universe::{Alt, AltSet, Menu, Universe};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProblemId(pub(crate) u16);

impl ProblemId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// How a menu is presented.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Frame {
    /// A presentation with no structure beyond its tag.
    Generic(String),
    /// An ordered list, top first. `y` precedes `x` means `y` is listed above.
    List(Vec<Alt>),
    /// A set of recommended alternatives.
    Rec(AltSet),
}

impl Frame {
    /// Is `y` listed above `x`? Only meaningful for lists.
    pub fn listed_above(&self, y: Alt, x: Alt) -> bool {
        match self {
            Frame::List(order) => {
                let py = order.iter().position(|&a| a == y);
                let px = order.iter().position(|&a| a == x);
                matches!((py, px), (Some(py), Some(px)) if py < px)
            }
            _ => false,
        }
    }

    fn validate(&self, menu: Menu, universe: &Universe) -> Result<(), AatError> {
        match self {
            Frame::Generic(tag) if tag.is_empty() => {
                Err(AatError::InvalidFrame("generic frame with empty tag".into()))
            }
            Frame::Generic(_) => Ok(()),
            Frame::List(order) => {
                let s = AltSet::from_alts(order.iter().copied());
                if s != menu.set() || order.len() != menu.len() {
                    Err(AatError::InvalidFrame(format!(
                        "list frame is not an ordering of {}",
                        universe.show_set(menu.set())
                    )))
                } else {
                    Ok(())
                }
            }
            Frame::Rec(s) => {
                if s.is_subset(menu.set()) {
                    Ok(())
                } else {
                    Err(AatError::InvalidFrame(format!(
                        "recommendation {} is not inside {}",
                        universe.show_set(*s),
                        universe.show_set(menu.set())
                    )))
                }
            }
        }
    }

    pub fn describe(&self, universe: &Universe) -> String {
        match self {
            Frame::Generic(tag) => format!("generic:{tag}"),
            Frame::List(order) => format!(
                "list:{}",
                order
                    .iter()
                    .map(|&a| universe.label(a))
                    .collect::<Vec<_>>()
                    .join(">")
            ),
            Frame::Rec(s) => format!("rec:{}", universe.show_set(*s)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Problem {
    pub menu: Menu,
    pub frame: Option<Frame>,
}

#[derive(Debug)]
struct Inner {
    universe: Universe,
    problems: Vec<Problem>,
    masks: Vec<AltSet>,
    index: HashMap<Problem, ProblemId>,
    framed: bool,
    singletons: bool,
}

/// An ordered, finite collection of choice problems. Problem ids follow the
/// canonical order (menu first, then frame), so enumerating ids in order
/// enumerates menu sequences lexicographically.
#[derive(Clone, Debug)]
pub struct Catalog(Arc<Inner>);

impl Eq for Catalog {}

impl PartialEq for Catalog {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.universe == other.0.universe && self.0.problems == other.0.problems)
    }
}

impl Catalog {
    /// Every menu of the universe, unframed.
    pub fn frameless(universe: &Universe, singletons: bool) -> Catalog {
        let problems = universe
            .menus(singletons)
            .into_iter()
            .map(|menu| Problem { menu, frame: None })
            .collect();
        Catalog::build(universe.clone(), problems, false, singletons)
    }

    /// An explicit framed collection. Every menu of the universe must appear
    /// under at least one frame.
    pub fn framed(universe: &Universe, problems: Vec<Problem>) -> Result<Catalog, AatError> {
        Catalog::framed_inner(universe, problems, true)
    }

    /// A framed collection that need not cover every menu, as in a dataset.
    pub fn framed_partial(universe: &Universe, problems: Vec<Problem>) -> Result<Catalog, AatError> {
        Catalog::framed_inner(universe, problems, false)
    }

    fn framed_inner(
        universe: &Universe,
        mut problems: Vec<Problem>,
        cover: bool,
    ) -> Result<Catalog, AatError> {
        for p in &problems {
            if p.menu.len() < 2 || !p.menu.set().is_subset(universe.all()) {
                return Err(AatError::InvalidMenu(format!(
                    "framed problem on {} is not a menu of the universe",
                    universe.show_set(p.menu.set())
                )));
            }
            match &p.frame {
                Some(f) => f.validate(p.menu, universe)?,
                None => {
                    return Err(AatError::InvalidFrame(format!(
                        "problem on {} has no frame",
                        universe.show_set(p.menu.set())
                    )))
                }
            }
        }
        problems.sort();
        for w in problems.windows(2) {
            if w[0] == w[1] {
                return Err(AatError::InvalidFrame(format!(
                    "duplicate framed problem on {}",
                    universe.show_set(w[0].menu.set())
                )));
            }
        }
        for m in universe.menus(false).into_iter().filter(|_| cover) {
            if !problems.iter().any(|p| p.menu == m) {
                return Err(AatError::InvalidFrame(format!(
                    "menu {} appears under no frame",
                    universe.show_set(m.set())
                )));
            }
        }
        if problems.len() > u16::MAX as usize {
            return Err(AatError::LimitExceeded("too many framed problems".into()));
        }
        Ok(Catalog::build(universe.clone(), problems, true, false))
    }

    fn build(universe: Universe, problems: Vec<Problem>, framed: bool, singletons: bool) -> Catalog {
        let masks = problems.iter().map(|p| p.menu.set()).collect();
        let index = problems
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), ProblemId(i as u16)))
            .collect();
        Catalog(Arc::new(Inner {
            universe,
            problems,
            masks,
            index,
            framed,
            singletons,
        }))
    }

    pub fn universe(&self) -> &Universe {
        &self.0.universe
    }

    pub fn len(&self) -> usize {
        self.0.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.problems.is_empty()
    }

    pub fn is_framed(&self) -> bool {
        self.0.framed
    }

    pub fn has_singletons(&self) -> bool {
        self.0.singletons
    }

    pub fn ids(&self) -> impl Iterator<Item = ProblemId> {
        (0..self.len()).map(|i| ProblemId(i as u16))
    }

    pub fn problem(&self, id: ProblemId) -> &Problem {
        &self.0.problems[id.index()]
    }

    pub fn problems(&self) -> &[Problem] {
        &self.0.problems
    }

    pub fn mask(&self, id: ProblemId) -> AltSet {
        self.0.masks[id.index()]
    }

    pub fn masks(&self) -> &[AltSet] {
        &self.0.masks
    }

    pub fn find(&self, menu: Menu, frame: Option<&Frame>) -> Option<ProblemId> {
        let key = Problem {
            menu,
            frame: frame.cloned(),
        };
        self.0.index.get(&key).copied()
    }

    /// The canonical-first problem on `menu`.
    pub fn first_for(&self, menu: AltSet) -> Option<ProblemId> {
        self.ids().find(|&id| self.mask(id) == menu)
    }

    /// Human-readable rendering of a problem.
    pub fn show(&self, id: ProblemId) -> String {
        let p = self.problem(id);
        let u = self.universe();
        match &p.frame {
            None => u.show_set(p.menu.set()),
            Some(f) => format!("{}[{}]", u.show_set(p.menu.set()), f.describe(u)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn framed_catalog_requires_coverage() {
        let u = Universe::new(["x", "y", "z"]).unwrap();
        let x = u.alt("x").unwrap();
        let y = u.alt("y").unwrap();
        let xy = u.menu(&["x", "y"]).unwrap();
        let only = vec![Problem {
            menu: xy,
            frame: Some(Frame::List(vec![x, y])),
        }];
        assert!(Catalog::framed(&u, only).is_err());
    }

    #[test]
    fn list_frame_must_order_the_menu() {
        let u = Universe::new(["x", "y", "z"]).unwrap();
        let x = u.alt("x").unwrap();
        let xy = u.menu(&["x", "y"]).unwrap();
        let f = Frame::List(vec![x]);
        assert!(f.validate(xy, &u).is_err());
    }

    #[test]
    fn listed_above_follows_position() {
        let f = Frame::List(vec![Alt(2), Alt(0), Alt(1)]);
        assert!(f.listed_above(Alt(2), Alt(1)));
        assert!(!f.listed_above(Alt(1), Alt(0)));
    }
}
