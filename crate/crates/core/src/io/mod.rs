pub mod ingest;
pub mod model_spec;
pub mod report;
