//! Alternatives, alternative sets and menus.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::AatError;

/// Largest universe the engine accepts. Sets are stored as `u32` bitmasks
/// and several tables are indexed by mask.
pub const MAX_ALTERNATIVES: usize = 16;

/// An alternative, identified by its position in the sorted universe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alt(pub(crate) u8);

impl Alt {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Alt {
        debug_assert!(i < MAX_ALTERNATIVES);
        Alt(i as u8)
    }
}

/// A set of alternatives as a bitmask over universe positions.
///
/// Ordering is the canonical one: lexicographic on the sorted member list,
/// so `{x,y} < {x,y,z} < {x,z}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct AltSet(pub(crate) u32);

impl AltSet {
    pub const EMPTY: AltSet = AltSet(0);

    pub fn from_bits(bits: u32) -> AltSet {
        AltSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn singleton(a: Alt) -> AltSet {
        AltSet(1 << a.0)
    }

    pub fn from_alts<I: IntoIterator<Item = Alt>>(alts: I) -> AltSet {
        alts.into_iter().fold(AltSet::EMPTY, |s, a| s.with(a))
    }

    pub fn contains(self, a: Alt) -> bool {
        self.0 & (1 << a.0) != 0
    }

    pub fn with(self, a: Alt) -> AltSet {
        AltSet(self.0 | (1 << a.0))
    }

    pub fn without(self, a: Alt) -> AltSet {
        AltSet(self.0 & !(1 << a.0))
    }

    pub fn union(self, other: AltSet) -> AltSet {
        AltSet(self.0 | other.0)
    }

    pub fn intersection(self, other: AltSet) -> AltSet {
        AltSet(self.0 & other.0)
    }

    pub fn difference(self, other: AltSet) -> AltSet {
        AltSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: AltSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Members in increasing universe order.
    pub fn iter(self) -> impl Iterator<Item = Alt> {
        let bits = self.0;
        (0..32u8).filter(move |i| bits & (1 << i) != 0).map(Alt)
    }

    pub fn first(self) -> Option<Alt> {
        if self.0 == 0 {
            None
        } else {
            Some(Alt(self.0.trailing_zeros() as u8))
        }
    }

    /// All subsets of `self` (including the empty set and `self`).
    pub fn subsets(self) -> impl Iterator<Item = AltSet> {
        let full = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(AltSet(cur))
        })
    }
}

impl Ord for AltSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for AltSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A choice set. Normally at least two alternatives; singletons only appear
/// when a domain is explicitly built with them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Menu(pub(crate) AltSet);

impl Menu {
    pub fn set(self) -> AltSet {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.len()
    }

    pub fn is_empty(self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(self, a: Alt) -> bool {
        self.0.contains(a)
    }

    pub fn iter(self) -> impl Iterator<Item = Alt> {
        self.0.iter()
    }
}

/// A history is the list of menus faced so far.
pub type History = Vec<Menu>;

/// The finite, sorted set of alternatives.
#[derive(Clone, PartialEq, Eq)]
pub struct Universe {
    labels: Arc<[String]>,
}

impl fmt::Debug for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels.iter()).finish()
    }
}

impl Universe {
    pub fn new<I, S>(labels: I) -> Result<Universe, AatError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v: Vec<String> = labels.into_iter().map(Into::into).collect();
        if v.iter().any(|l| l.is_empty()) {
            return Err(AatError::InvalidUniverse("empty alternative label".into()));
        }
        v.sort();
        for w in v.windows(2) {
            if w[0] == w[1] {
                return Err(AatError::DuplicateAlternative(w[0].clone()));
            }
        }
        if v.len() < 2 {
            return Err(AatError::InvalidUniverse(
                "a universe needs at least two alternatives".into(),
            ));
        }
        if v.len() > MAX_ALTERNATIVES {
            return Err(AatError::InvalidUniverse(format!(
                "{} alternatives exceeds the supported maximum of {MAX_ALTERNATIVES}",
                v.len()
            )));
        }
        Ok(Universe { labels: v.into() })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, a: Alt) -> &str {
        &self.labels[a.index()]
    }

    pub fn alt(&self, label: &str) -> Result<Alt, AatError> {
        self.labels
            .binary_search_by(|l| l.as_str().cmp(label))
            .map(Alt::from_index)
            .map_err(|_| AatError::UnknownAlternative(label.to_string()))
    }

    pub fn alts(&self) -> impl Iterator<Item = Alt> {
        (0..self.len()).map(Alt::from_index)
    }

    pub fn all(&self) -> AltSet {
        AltSet(((1u64 << self.len()) - 1) as u32)
    }

    /// All menus in canonical order. With `singletons`, one-element sets are
    /// included too.
    pub fn menus(&self, singletons: bool) -> Vec<Menu> {
        let min = if singletons { 1 } else { 2 };
        let mut v: Vec<Menu> = self
            .all()
            .subsets()
            .filter(|s| s.len() >= min)
            .map(Menu)
            .collect();
        v.sort();
        v
    }

    pub fn set<S: AsRef<str>>(&self, labels: &[S]) -> Result<AltSet, AatError> {
        let mut s = AltSet::EMPTY;
        for l in labels {
            let a = self.alt(l.as_ref())?;
            if s.contains(a) {
                return Err(AatError::InvalidMenu(format!(
                    "alternative `{}` listed twice",
                    l.as_ref()
                )));
            }
            s = s.with(a);
        }
        Ok(s)
    }

    pub fn menu<S: AsRef<str>>(&self, labels: &[S]) -> Result<Menu, AatError> {
        let s = self.set(labels)?;
        self.menu_from_set(s, false)
    }

    pub fn menu_from_set(&self, s: AltSet, singletons: bool) -> Result<Menu, AatError> {
        if !s.is_subset(self.all()) {
            return Err(AatError::InvalidMenu("members outside the universe".into()));
        }
        let min = if singletons { 1 } else { 2 };
        if s.len() < min {
            return Err(AatError::InvalidMenu(format!(
                "menu {} has fewer than {min} alternatives",
                self.set_key(s)
            )));
        }
        Ok(Menu(s))
    }

    /// Parses a menu key such as `x|y|z`.
    pub fn parse_key(&self, key: &str) -> Result<AltSet, AatError> {
        let parts: Vec<&str> = key.split('|').collect();
        self.set(&parts)
    }

    pub fn set_labels(&self, s: AltSet) -> Vec<String> {
        s.iter().map(|a| self.label(a).to_string()).collect()
    }

    /// Canonical key: sorted member labels joined by `|`.
    pub fn set_key(&self, s: AltSet) -> String {
        self.set_labels(s).join("|")
    }

    pub fn menu_key(&self, m: Menu) -> String {
        self.set_key(m.0)
    }

    /// `{x,y}` style rendering for messages.
    pub fn show_set(&self, s: AltSet) -> String {
        format!("{{{}}}", self.set_labels(s).join(","))
    }
}
