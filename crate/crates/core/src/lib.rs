//! Genealogies of populations under recurrent selective sweeps.
//!
//! * [`partition`]: set partitions, two-coin / paintbox / stick-breaking samplers
//!   and their exact laws.
//! * [`sweep`]: forward Moran-model sweeps with selection and recombination,
//!   traced backward to the sample genealogy; the recurrent-sweep population.
//! * [`coalescent`]: Lambda-coalescent rates and samplers, the sweep-derived
//!   Xi-coalescent, and the Kingman coupling.
//! * [`stats`]: mutation overlay, segregating sites, pairwise differences,
//!   external branches, the `G_n(b)` recursion and `rho`.

pub mod coalescent;
pub mod error;
pub mod mc;
pub mod numeric;
pub mod partition;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
