//! Contextual Query Language subset, constraint evaluation and faceted
//! catalogue search.

mod ast;
mod eval;
mod parser;
mod search;
mod thumbnail;

pub use self::ast::{CmpOp, CqlExpr, Literal};
pub use self::eval::{evaluate, like_match, CqlRecord};
pub use self::parser::{parse_cql, SyntaxError};
pub use self::search::{
    search, search_entries, SearchError, SearchPage, SearchQuery, SearchResult, DEFAULT_LIMIT, MAX_LIMIT,
};
pub use self::thumbnail::{thumbnail_url, PREVIEW_FEATURES, THUMBNAIL_HEIGHT, THUMBNAIL_WIDTH};
