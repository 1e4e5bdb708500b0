//! Command-line front end and live server for the emotive-follow simulator.

pub mod server;
