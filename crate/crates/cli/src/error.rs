use std::fmt;
use std::process::ExitCode;

use editdec::decoder::DecodeError;
use editdec::scorer::ScorerError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Usage = 1,
    Data = 2,
    Scorer = 3,
}

/// A failure tagged with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.kind as u8)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub fn usage(msg: impl fmt::Display) -> Failure {
    Failure {
        kind: Kind::Usage,
        error: anyhow::anyhow!("{msg}"),
    }
}

pub fn data(msg: impl fmt::Display) -> Failure {
    Failure {
        kind: Kind::Data,
        error: anyhow::anyhow!("{msg}"),
    }
}

pub fn scorer(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        kind: Kind::Scorer,
        error: e.into(),
    }
}

/// Scorer-side decode failures exit with 3, configuration problems with 1.
pub fn decode_failure(sentence: usize, e: DecodeError) -> Failure {
    let kind = match e {
        DecodeError::Scorer(_) | DecodeError::EmptyVocabulary => Kind::Scorer,
        DecodeError::InvalidConfig(_) => Kind::Usage,
    };
    Failure {
        kind,
        error: anyhow::Error::new(e).context(format!("sentence {}", sentence + 1)),
    }
}

impl From<ScorerError> for Failure {
    fn from(e: ScorerError) -> Self {
        scorer(e)
    }
}

pub trait Context<T> {
    fn data_ctx(self, what: impl fmt::Display) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> Context<T> for Result<T, E> {
    fn data_ctx(self, what: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| Failure {
            kind: Kind::Data,
            error: e.into().context(what.to_string()),
        })
    }
}
