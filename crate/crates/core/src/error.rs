use std::fmt;

/// Errors raised by the simulation and verification layers.
///
/// The CLI maps `Config`/`Usage` to exit code 1 and `Guard` to exit code 2;
/// everything else is reported as an internal failure.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid configuration value (bad grid size, missing key, ...).
    Config(String),
    /// API misuse such as mixing wave functions from different grids.
    Usage(String),
    /// An enumeration would exceed its hard capacity guard.
    Capacity(String),
    /// Arguments outside the mathematical domain of an identity.
    Domain(String),
    /// Requested resolution cannot be represented on the grid.
    Resolution(String),
    /// A numerical consistency check failed (e.g. imaginary residue).
    Consistency(String),
    /// A physics guard tripped during a run (packet reached the grid edge).
    Guard(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Usage(msg) => write!(f, "usage error: {msg}"),
            Error::Capacity(msg) => write!(f, "capacity error: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Resolution(msg) => write!(f, "resolution error: {msg}"),
            Error::Consistency(msg) => write!(f, "numerical consistency error: {msg}"),
            Error::Guard(msg) => write!(f, "physics guard: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
