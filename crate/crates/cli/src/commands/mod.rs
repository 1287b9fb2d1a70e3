pub mod analyze;
pub mod measure;
pub mod plot;
pub mod stats;
