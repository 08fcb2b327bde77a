use std::path::PathBuf;

use crate::schemes::SchemeKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("episode needs at least {min} slots (two communication cycles), got {got}")]
    EpisodeTooShort { min: usize, got: usize },

    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("`{key}` out of range: {message}")]
    OutOfRange { key: String, message: String },

    #[error("unknown preset `{0}` (expected fig5..fig10)")]
    UnknownPreset(String),

    #[error("episode failed for {scheme} gamma={gamma} replication={replication}: {source}")]
    Episode {
        scheme: SchemeKind,
        gamma: usize,
        replication: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("no data: no message was recorded")]
    NoData,

    #[error("nothing to write: result table is empty")]
    EmptyTable,

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
