use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate token {token:?}")]
    DuplicateToken { line: usize, token: String },

    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("vector lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("token {0:?} not found in embedding table")]
    MissingToken(String),

    #[error("cue {0:?} has zero presentations")]
    ZeroPresentations(String),

    #[error("duplicate record for pair ({cue:?}, {response:?})")]
    DuplicatePair { cue: String, response: String },

    #[error("line {line}: token {token:?} tagged {second} but earlier tagged {first}")]
    ConflictingPos {
        line: usize,
        token: String,
        first: String,
        second: String,
    },

    #[error("missing column {0:?}")]
    MissingColumn(String),

    #[error("partitions cover different node sets ({left} vs {right} nodes)")]
    NodeSetMismatch { left: usize, right: usize },

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("graph has zero total edge weight")]
    ZeroWeight,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration errors:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code: 1 usage/config, 2 data, 3 internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => 1,
            Error::Invariant(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T, E: Into<Error>> StageExt<T> for std::result::Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.into().at_stage(stage))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_see_through_stages() {
        assert_eq!(Error::Config(vec![]).exit_code(), 1);
        assert_eq!(Error::MissingColumn("cue".into()).exit_code(), 2);
        assert_eq!(Error::Invariant("nesting".into()).exit_code(), 3);
        let staged: Result<()> = Err(Error::Invariant("x".into()));
        let e = staged.stage("study2").unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().starts_with("stage study2: "));
    }
}
