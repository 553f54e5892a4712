pub mod app;
pub mod cli;
pub mod engine;
pub mod node;
pub mod options;
pub mod output;
pub mod scheduler;
pub mod transport;
pub mod worker;
