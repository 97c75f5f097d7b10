pub mod bitset;
pub mod cli;
pub mod env;
pub mod error;
pub mod experiments;
pub mod interaction;
pub mod oracle;
pub mod organism;
pub mod scenario;
pub mod sim;
pub mod task;
pub mod tiebreak;
