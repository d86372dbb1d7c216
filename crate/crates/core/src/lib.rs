//! Disaggregation difficulty for event-based non-intrusive load monitoring.
//!
//! The crate learns, from per-appliance training signals, the power
//! distribution and participation index of every appliance mode transition,
//! and scores how hard a set of appliances is to disaggregate with an
//! entropy-weighted metric (the DDM). The metric extends to any partition of
//! the appliances into separately metered blocks, and [`optimize`] searches
//! every partition to expose the meters / difficulty / cost trade-off.
//!
//! Pipeline:
//!
//! 1. [`signal`]: uniform-rate power signals and forward-fill resampling.
//! 2. [`event`]: threshold-free min/max-ratio event detection.
//! 3. [`cluster`] and [`fit`]: k-means with elbow selection, per-transition
//!    Gaussian or smoothed-histogram distributions, participation indices.
//!    [`extract`] composes them into an [`AppliancePopulation`].
//! 4. [`ddm`]: mixture density, posteriors, entropies and the metric itself,
//!    integrated on an [`AlphaGrid`]; [`oracle`] is an independent
//!    Monte-Carlo estimate of the same quantity.
//! 5. [`partition`] and [`optimize`]: restricted-growth enumeration of
//!    partitions and the per-meter-count trade-off.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! evaluation and the command-line front-end live in `ddm-kit`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cluster;
pub mod ddm;
pub mod error;
pub mod event;
pub mod extract;
pub mod fit;
pub mod fixtures;
pub mod model;
pub mod optimize;
pub mod oracle;
pub mod partition;
pub mod quadrature;
pub mod signal;
pub mod synth;

pub use ddm::{DdmConfig, DdmReport, Evaluator, LogBase};
pub use error::{Error, Result};
pub use event::EventRecord;
pub use model::{Appliance, AppliancePopulation, PowerDistribution, TransitionModel, Violation};
pub use partition::{ConstraintSet, Partition};
pub use quadrature::AlphaGrid;
pub use signal::PowerSignal;
