//! Command line front end and streaming service for `vdrig` rigs.

pub mod camera;
pub mod commands;
pub mod config;
pub mod protocol;
pub mod service;
pub mod session;
