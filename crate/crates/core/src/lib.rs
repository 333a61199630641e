//! Finitary sumset laboratory.
//!
//! Bounded-universe set arithmetic over integer windows and finite groups,
//! Følner-family densities, greedy IP-set extraction, Nathanson and
//! productset decompositions, product-free search, quasirandomness degrees
//! and ladder/equation indices. Every positive answer comes with data that
//! can be re-checked without re-running the search.

pub mod density;
pub mod groups;
pub mod modp;
pub mod quasirandom;
pub mod rational;
pub mod sets;
pub mod stability;
pub mod sumsets;

pub use density::{DensityError, DensityMode, DensityReport, FolnerFamily, MeasureApprox};
pub use groups::{ConjugacyData, GroupError, GroupTable};
pub use quasirandom::{CharacterDegrees, QuasiError, QuasiExperimentReport};
pub use rational::Rational;
pub use sets::{Ambient, AmbientKind, FpBudget, GroupSubset, IntWindow, IntWindowSet, ProductWord, SetError, Subset};
pub use stability::{FiniteRelation, IndexKind, IndexReport, RelationError};
pub use sumsets::{DecompositionCertificate, IpCertificate, SumsetError};
