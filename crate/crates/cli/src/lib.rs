//! File formats, JSON exports, subcommands and the session server around
//! `guardtrack-core`.

pub mod commands;
pub mod export;
pub mod format;
pub mod serve;
