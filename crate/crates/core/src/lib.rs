//! Hybrid test generation for MiniDUT programs: a coverage-guided greybox
//! fuzzer and a concolic engine that take turns whenever one of them stalls.

pub mod dut;
pub mod coverage;
pub mod exec;
pub mod sym;
pub mod solver;
pub mod gen;
pub mod budget;
pub mod fuzz;
pub mod phase;
pub mod concolic;
pub mod oracle;
pub mod corpus;
pub mod campaign;
pub mod report;
