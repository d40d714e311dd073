//! Mutation overlay, sample statistics, neutrality-test numerators and the
//! exact segregating-site analytics.

mod analytic;
mod dstat;
mod genealogy;

pub use analytic::{
    coupling_identity_frequency, coupling_identity_probability, expected_external_length, expected_pairwise,
    expected_segregating, external_branch_deficit, gnb, gnb_row, rho, rho_at_level, xi_gnb_estimate, RhoResult,
    RHO_MAX_LEVEL,
};
pub use dstat::{d_statistics, DStatConfig, DStatConstants, DStatistics, Normalization};
pub use genealogy::{branches, overlay_mutations, sample_statistics, Branch, MutatedGenealogy, SampleStats};
