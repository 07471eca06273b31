//! HTTP service and command-line front end for [`prefixrank`].

pub mod cli;
pub mod service;
