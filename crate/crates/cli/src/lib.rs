//! The `tgrw` command-line tool: system documents in, JSON run reports out.
//!
//! The library half exists so the document model and the command dispatch
//! can be unit- and integration-tested without spawning the binary; the
//! binary in `main.rs` is a thin wrapper around [`exec::main_entry`].

pub mod doc;
pub mod exec;
