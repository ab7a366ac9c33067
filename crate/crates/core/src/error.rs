use thiserror::Error;

use crate::alignment::AlignError;
use crate::catalog::CatalogError;
use crate::embed::EmbedError;
use crate::runstore::RunStoreError;
use crate::textprep::TextError;
use crate::topics::TopicError;
use crate::validation::ValidationError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Any failure surfaced by the pipeline. Each stage keeps its own error enum;
/// this type only aggregates them for callers that drive several stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    RunStore(#[from] RunStoreError),
    #[error("config: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
