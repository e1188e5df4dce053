//! The benchmark corpus, embedded so benches need no working directory.

use crate::dut::{load, DutError, InstrumentedProgram};

pub struct Entry {
    pub name: &'static str,
    pub source: &'static str,
}

pub const CORPUS: [Entry; 6] = [
    Entry { name: "fig2", source: include_str!("../../../corpus/fig2.dut") },
    Entry { name: "loop_eq", source: include_str!("../../../corpus/loop_eq.dut") },
    Entry { name: "motiv", source: include_str!("../../../corpus/motiv.dut") },
    Entry { name: "nested_magic", source: include_str!("../../../corpus/nested_magic.dut") },
    Entry { name: "single_branch", source: include_str!("../../../corpus/single_branch.dut") },
    Entry { name: "straightline", source: include_str!("../../../corpus/straightline.dut") },
];

pub fn source(name: &str) -> Option<&'static str> {
    CORPUS.iter().find(|e| e.name == name).map(|e| e.source)
}

pub fn program(name: &str) -> Option<Result<InstrumentedProgram, DutError>> {
    source(name).map(|s| load(name, s))
}
