//! Lambda- and Xi-coalescents: rates, samplers, exact small-sample laws and
//! the Kingman coupling.

mod lambda;
mod lattice;
mod measure;
mod path;
mod xi;

pub use lambda::{coupled_kingman_lambda, simulate_lambda, CoupledPaths};
pub use lattice::{lambda_lattice_law, xi_lattice_law};
pub use measure::{Density, LambdaMeasure, TotalRates};
pub use path::{apply_groups, GenealogyPath, Merger, PathEnd};
pub use xi::{simulate_xi_sweep, XiSweepMeasure};
