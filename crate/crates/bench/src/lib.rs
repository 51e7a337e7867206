//! Fixtures shared by the benchmarks.

use oliver_core::action::SemidirectContext;
use oliver_core::corpus::{self, Instance};
use oliver_core::group::DEFAULT_CAP;

/// The module behind a corpus entry.
pub fn module(name: &str) -> SemidirectContext {
    match corpus::build(name, DEFAULT_CAP).expect("corpus entries build") {
        Instance::Module(ctx) => ctx,
        Instance::Group { .. } => panic!("{name} is a group instance"),
    }
}
