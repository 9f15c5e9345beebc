//! Dimension theory of infinite-entropy Bernoulli measures on Gauss-like maps,
//! computed in log space.

pub mod digit;
mod error;
pub mod estimators;
pub mod maps;
pub mod measures;
pub mod numeric;
pub mod orbits;
pub mod partition;
pub mod sequence;
pub mod source;

pub use digit::{parse_digits, Digit, DEFAULT_N_TABLE};
pub use error::{Error, Result};
pub use estimators::{
    ball_measure_bracket, case_split_upper, ineqsums_check, lower_cover_ratio, neighbor_upper_ratio,
    symbolic_dimension, symbolic_dimension_gauss_map, BallBracket, CoverEstimate, EstimateFlag, EstimateKind,
    IneqParams, IneqReport, SplitCase,
};
pub use maps::{ContinuantState, MapModel};
pub use measures::{DigitMeasure, MeasureKind, MeasureStats, StatsRow, VolumeLemma};
pub use orbits::{generate_orbit, Orbit, OrbitStream, StepView};
pub use partition::{PartitionKind, PartitionSpec, TailCheck};
pub use sequence::{Sequence, TailRule};
pub use source::{parse_table, MeasureSource, PartitionSource, TableFile};
