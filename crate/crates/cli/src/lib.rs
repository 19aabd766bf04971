//! Command-line front end and HTTP proof-session service for lyapdl.

pub mod commands;
pub mod server;
