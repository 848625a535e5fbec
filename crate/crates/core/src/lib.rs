//! Discovery and cataloguing of atmospheric OGC web services.
//!
//! The crate crawls a (real or simulated) web for OGC service endpoints,
//! parses their capabilities documents, keeps the atmospheric ones in a
//! relational catalogue, and serves search, statistics, quality scores and
//! workflow composition over HTTP.

pub mod api;
pub mod capabilities;
pub mod catalogue;
pub mod clock;
pub mod config;
pub mod cql;
pub mod crawl;
pub mod harvest;
pub mod model;
pub mod scoring;
pub mod semantic;
pub mod stats;
pub mod transport;
pub mod workflow;

pub use capabilities::{LayerDraft, ServiceDraft};
pub use catalogue::{Catalogue, LayerId, ServiceId, WorkspaceId};
pub use clock::{Clock, ManualClock, SystemClock};
pub use model::{BoundingBox, ServiceType, TimeExtent};
pub use semantic::{RelevanceVerdict, Vocabulary};
pub use transport::{HttpTransport, SimulatedWeb, Transport};
