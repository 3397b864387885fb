//! Library surface of the CLI: serialization and SVG building, shared by
//! the binary and its integration tests.

pub mod output;
pub mod svg;
