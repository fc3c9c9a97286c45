//! Attention Across Time: simulation, bounded axiom checking, identification
//! and representation of sequential choice with lasting consideration.
//!
//! Alternatives are small indices into a [`Universe`]; menus are bitmasks.
//! Checks run over a [`ChoiceTree`], the behavior of an oracle on every menu
//! sequence up to a horizon, and report violations with replayable
//! [`Witness`]es.

pub mod axioms;
pub mod catalog;
pub mod compat;
pub mod error;
pub mod fixtures;
pub mod frames;
pub mod generate;
pub mod identify;
pub mod io;
pub mod model;
pub mod oracle;
pub mod popsim;
pub mod represent;
pub mod structures;
pub mod tree;
pub mod universe;
pub mod verdict;
pub mod witness;

pub use catalog::{Catalog, Frame, Problem, ProblemId};
pub use error::AatError;
pub use model::{AatModel, AttentionFunction, Engine, Utility};
pub use oracle::{BehaviorOracle, ChoiceDataset, DatasetOracle, FnOracle, Observation};
pub use tree::{ChoiceTree, Step, DEFAULT_HORIZON};
pub use universe::{Alt, AltSet, History, Menu, Universe};
pub use verdict::{Law, Verdict, VerdictReport};
pub use witness::{Evidence, ObservedSequence, Witness};
