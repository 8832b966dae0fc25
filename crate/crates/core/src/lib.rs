//! Ordered statistics decoding of short byte-aligned block codes with a
//! byte-level source prior.

pub mod bm;
pub mod bounds;
pub mod channel;
pub mod codes;
pub mod corpus;
pub mod error;
pub mod fusion;
pub mod gf;
pub mod harness;
pub mod numeric;
pub mod osd;
pub mod prior;
pub mod seed;

pub use codes::CodeSpec;
pub use error::{Error, Result};
pub use fusion::ScoreTable;
pub use osd::{DecodeParams, DecodeResult, Decoder, Family};
pub use prior::{PriorBackend, PriorMatrix};
pub use bm::{BmOutcome, BmStatus};
pub use bounds::{na_bler, NaPoint};
pub use channel::{Channel, ChannelConfig, ChannelKind, GeParams, Observation};
pub use corpus::Trial;
pub use harness::{PointStats, RunConfig, Simulation};
pub use osd::{tep_count, MrbContext};
