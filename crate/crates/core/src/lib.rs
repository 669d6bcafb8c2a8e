pub mod audit;
pub mod clustering;
pub mod error;
pub mod experiment;
pub mod fairness;
pub mod generators;
pub mod instance;
pub mod oracle;
pub mod search;
pub mod solver;
pub mod transport;
pub mod welfare;
