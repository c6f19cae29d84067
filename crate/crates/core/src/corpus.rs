//! The example programs, embedded so benchmarks and tests need no paths.

use crate::program::Program;
use crate::syntax::{Loader, SyntaxError};

pub const FILES: &[(&str, &str)] = &[
    ("cars.toy", include_str!("../../../corpus/cars.toy")),
    ("equation10.toy", include_str!("../../../corpus/equation10.toy")),
    ("equation20.toy", include_str!("../../../corpus/equation20.toy")),
    ("lazy_lists.toy", include_str!("../../../corpus/lazy_lists.toy")),
    ("goal_table.toy", include_str!("../../../corpus/goal_table.toy")),
    ("golomb.toy", include_str!("../../../corpus/golomb.toy")),
    ("magic.toy", include_str!("../../../corpus/magic.toy")),
    ("map.toy", include_str!("../../../corpus/map.toy")),
    ("pythagoras.toy", include_str!("../../../corpus/pythagoras.toy")),
    ("queens.toy", include_str!("../../../corpus/queens.toy")),
    ("smm.toy", include_str!("../../../corpus/smm.toy")),
    ("suudoku.toy", include_str!("../../../corpus/suudoku.toy")),
    ("sorting.toy", include_str!("../../../corpus/sorting.toy")),
];

pub fn source(name: &str) -> Option<&'static str> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Compiles an embedded program; includes resolve against the other corpus
/// files and the prelude.
pub fn load(name: &str) -> Result<Program, SyntaxError> {
    let text = source(name).ok_or_else(|| SyntaxError::new(Default::default(), format!("no corpus file {name}")))?;
    Loader::with_sources(FILES.iter().copied()).load_source(text, &format!("<memory>/{name}"), None)
}
