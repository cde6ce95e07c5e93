//! Library backing the `qmix` command-line tool: file formats, run
//! reports, and the command implementations (kept out of `main` so the
//! integration tests can call them in-process).

pub mod commands;
pub mod format;
pub mod report;
