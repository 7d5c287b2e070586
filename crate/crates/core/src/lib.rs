pub mod closure;
pub mod error;
pub mod formula;
pub mod lattice;
pub mod relation;
pub mod rulebase;
pub mod structures;
pub mod witness;

pub use closure::{Class, Engine, RuleDb};
pub use error::{Error, Result};
pub use formula::{Formula, Macro, MacroEnv, Var};
pub use lattice::Lattice;
pub use relation::{Element, Kind, Relation, RelationSet, Sort, Symmetry, Universe};
pub use rulebase::Catalog;
pub use structures::{IdPoint, Interval, Structure};
pub use witness::{SampleBounds, Witness, WitnessCatalog};
