//! Shared helpers for integration tests.

pub mod fd_burgers;
