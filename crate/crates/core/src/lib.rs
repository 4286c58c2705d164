pub mod data;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod eval;
pub mod linalg;
pub mod mixture;
pub mod partitional;
pub mod rng;
pub mod specfun;
pub mod synthetic;

pub use data::{Dataset, UnitVector};
pub use distributions::{VmfParams, WatsonParams};
pub use error::{Error, Result};
pub use estimation::KappaMethod;
pub use linalg::ScatterMatrix;
pub use mixture::{Assignment, EmConfig, Family, FitReport, InitStrategy, MixtureModel};
pub use partitional::{Partition, PartitionConfig, Similarity};
