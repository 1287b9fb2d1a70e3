//! Measurement of technical leverage across versioned library releases:
//! corpus model, ingestion, size counting, release chains, change metrics
//! and the statistics built on them.

pub mod chains;
pub mod ingest;
pub mod loc;
pub mod metrics;
pub mod model;
pub mod stats;
