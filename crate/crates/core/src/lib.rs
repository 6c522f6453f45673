pub mod detector;
pub mod device;
pub mod engine;
pub mod features;
pub mod matcher;
pub mod motifs;
pub mod navigator;
pub mod silhouette;
pub mod snapshot;
pub mod synth;
