//! Query languages and the in-memory search index.

pub mod index;
pub mod query;
mod tokenize;

pub use index::{
    build_index, FacetCount, FacetResult, Filter, Hit, SearchConfig, SearchError, SearchIndex, SearchRequest,
    SearchResponse, FACET_FIELDS, FULL_TEXT_FIELDS, MAX_PAGE_SIZE,
};
pub use query::{parse_advanced, parse_basic, to_canonical, QueryAst, QueryError, QueryErrorKind};
pub use tokenize::{tokenize, words};
