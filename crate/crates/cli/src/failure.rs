use std::fmt;

/// A command failure, carrying the process exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, bad config, unwritable outputs. Exit code 1.
    Usage(String),
    /// Unreadable or malformed input data. Exit code 2.
    Data(String),
    /// Solver breakdown or infeasible iterate. Exit code 3.
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    /// Classifies a library error raised while loading input data.
    pub fn data(e: arpgda::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

impl From<arpgda::Error> for Failure {
    fn from(e: arpgda::Error) -> Self {
        if e.is_data_error() {
            Failure::Data(e.to_string())
        } else if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "error: {m}"),
            Failure::Data(m) => write!(f, "data error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;
