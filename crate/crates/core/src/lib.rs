//! Local-symmetry verification for networks of guarded-command processes.

pub mod balance;
pub mod bundled;
pub mod compositional;
pub mod dsl;
pub mod lts;
pub mod model;
pub mod spaces;
pub mod mucalc;
pub mod relations;
pub mod tiles;

pub use balance::{largest_balance, representatives, BalanceRelation, RepresentativeScheme, Similarity};
pub use compositional::{strongest_compositional_invariant, CompositionalInvariant, Theta};
pub use dsl::{parse_formula, parse_model, pretty_print, ModelDocument};
pub use lts::{LabeledTs, LtsBuilder, StateId, TransitionLabel};
pub use model::{
    Domain, EdgeId, GlobalState, LocalState, ModelError, NodeId, PortMode, ProcessNetwork,
    Template,
};
pub use mucalc::{evaluate, holds, Formula, FormulaError, Label};
pub use relations::{CheckVerdict, Counterexample};
pub use spaces::{build_global_space, build_local_space, PropositionSet};
pub use tiles::{Family, TileSet};
