use std::fmt;

use cubic_cw_core::Error;

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl CliError {
    /// 2 usage, 3 coexistence without conditioning, 4 numerical guard, 1 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Core(e) => match e {
                Error::Coexistence { .. } => 3,
                Error::Bracket(_) | Error::Integrability(_) | Error::NoCoexistence { .. } => 4,
                Error::Domain(_) | Error::InvalidParams(_) | Error::CriticalPoint | Error::EmptyCondition { .. } => 2,
            },
            Self::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "{m}"),
            Self::Core(e @ Error::Coexistence { .. }) => {
                write!(f, "{e}; rerun with --condition low|high to work inside one phase")
            }
            Self::Core(e) => write!(f, "{e}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        let coex = CliError::from(Error::Coexistence { k: 0.5, j: 0.87, minimizers: vec![0.0, 0.65] });
        assert_eq!(coex.exit_code(), 3);
        assert!(coex.to_string().contains("--condition"));
        assert_eq!(CliError::from(Error::Bracket("b".into())).exit_code(), 4);
        assert_eq!(CliError::from(Error::Integrability("i".into())).exit_code(), 4);
        assert_eq!(CliError::from(Error::NoCoexistence { k: 1.0, lo: 0.0, hi: 1.0 }).exit_code(), 4);
        assert_eq!(CliError::from(Error::InvalidParams("p".into())).exit_code(), 2);
    }
}
