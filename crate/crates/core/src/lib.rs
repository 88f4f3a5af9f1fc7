pub mod attention;
pub mod datamodel;
pub mod econ;
pub mod ingest;
pub mod studies;
pub mod synth;
