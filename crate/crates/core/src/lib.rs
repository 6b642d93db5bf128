//! Exhaustive SAT search for Kochen–Specker graphs with orderly generation,
//! unembeddable-subgraph blocking and checkable proof certificates.

pub mod cnc;
pub mod cnf;
pub mod embed;
pub mod graph;
pub mod og;
pub mod pipeline;
pub mod sat;
pub mod verify;
