//! Exact results at desk scale: annealed moments from closed-form
//! coefficients and combinatorial counts, quenched enumeration of one graph,
//! and a brute-force disorder oracle.

pub mod coefficients;
pub mod counts;
pub mod enumerate;
pub mod moments;
pub mod oracle;

pub use coefficients::{expected_weight_log, moment_coefficients, MomentCoefficients};
pub use counts::{ln_biguint, pair_spin_count, spin_count, LnFactorials};
pub use enumerate::{enumerate_partition, enumerate_partition_capped, write_law_csv, QuenchedSummary, DEFAULT_MAX_SITES};
pub use moments::{
    annealed_moments, expected_partition_log, second_moment_log, variance_ratio, AnnealedMoments, VarianceRatio,
};
pub use oracle::{disorder_oracle, Moment};
