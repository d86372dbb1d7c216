use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::model::Violation;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Total participation is zero, nothing to normalize against.
    DegeneratePopulation,
    /// Population failed validation.
    InvalidPopulation(Vec<Violation>),
    InvalidDistribution(String),
    InvalidSignal(String),
    UpsamplingUnsupported { native: f64, target: f64 },
    /// Asked for more clusters than there are points.
    TooFewPoints { points: usize, k: usize },
    NoEvents,
    InvalidPartition(String),
    InfeasibleConstraints(String),
    TooManyAppliances { n: usize, limit: usize },
    InvalidArgument(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegeneratePopulation => write!(f, "degenerate population: total participation is 0"),
            Error::InvalidPopulation(violations) => {
                write!(f, "invalid population:")?;
                for v in violations {
                    write!(f, " [{v}]")?;
                }
                Ok(())
            }
            Error::InvalidDistribution(msg) => write!(f, "invalid power distribution: {msg}"),
            Error::InvalidSignal(msg) => write!(f, "invalid power signal: {msg}"),
            Error::UpsamplingUnsupported { native, target } => write!(
                f,
                "upsampling unsupported: target period {target} s is shorter than native period {native} s"
            ),
            Error::TooFewPoints { points, k } => {
                write!(f, "cannot form {k} clusters from {points} points")
            }
            Error::NoEvents => write!(f, "no events in training data"),
            Error::InvalidPartition(msg) => write!(f, "invalid partition: {msg}"),
            Error::InfeasibleConstraints(msg) => write!(f, "infeasible constraint set: {msg}"),
            Error::TooManyAppliances { n, limit } => write!(
                f,
                "{n} appliances exceed the exhaustive enumeration limit of {limit}; set a max_meters bound"
            ),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
