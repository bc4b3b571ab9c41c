//! The bundled MiniObj subject classes.

pub const MIN: &str = include_str!("../../../fixtures/min.mo");
pub const SLIST: &str = include_str!("../../../fixtures/slist.mo");
pub const STACK: &str = include_str!("../../../fixtures/stack.mo");
pub const BST: &str = include_str!("../../../fixtures/bst.mo");
pub const COMPOSITE: &str = include_str!("../../../fixtures/composite.mo");

/// `(file stem, target class, source)` for every fixture.
pub const ALL: [(&str, &str, &str); 5] = [
    ("min", "MinOps", MIN),
    ("slist", "SList", SLIST),
    ("stack", "Stack", STACK),
    ("bst", "Bst", BST),
    ("composite", "Composite", COMPOSITE),
];
