use std::fmt;
use std::process::ExitCode;

use cluster_virial::Error;

/// Exit status classes of the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    CriterionFailure,
    Usage,
    Numerical,
}

impl Kind {
    pub fn code(self) -> u8 {
        match self {
            Kind::CriterionFailure => 1,
            Kind::Usage => 2,
            Kind::Numerical => 3,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.kind.code())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        kind: Kind::Usage,
        error: error.into(),
    }
}

pub fn criteria(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        kind: Kind::CriterionFailure,
        error: error.into(),
    }
}

/// Numerical failures map to exit code 3, everything else is an input problem.
impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::Numerical(_) => Kind::Numerical,
            _ => Kind::Usage,
        };
        Failure {
            kind,
            error: e.into(),
        }
    }
}

/// Attaches context to core errors without losing their class.
pub trait Context<T> {
    fn context_for(self, what: impl fmt::Display) -> Result<T, Failure>;
}

impl<T> Context<T> for Result<T, Error> {
    fn context_for(self, what: impl fmt::Display) -> Result<T, Failure> {
        self.map_err(|e| {
            let mut f = Failure::from(e);
            f.error = f.error.context(what.to_string());
            f
        })
    }
}
