//! File formats, threading, batch evaluation and the HTTP service for
//! [`lpseg_core`].

pub mod error;
pub mod exec;
pub mod io;
pub mod manifest;
pub mod optimize;
pub mod report;
pub mod service;

pub use error::{Error, ErrorKind, Result};
pub use exec::Threaded;
