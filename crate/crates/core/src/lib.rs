pub mod cli;
pub mod compactness;
pub mod error;
pub mod grid;
pub mod hmeasure;
pub mod mikhlin;
pub mod operators;
pub mod profile;
pub mod report;
pub mod symbols;
