//! Structural analysis of SQL queries: parsing, name resolution, feature
//! extraction, query similarity, corpus statistics and an LLM generation
//! harness.

pub mod catalog;
pub mod frontend;
pub mod resolve;

pub use catalog::{CanonicalColumn, CatalogError, SchemaCatalog};
pub use frontend::{enumerate_subqueries, parse, split_statements, Dialect, NodeId, ParseError, QueryNode, QueryTree};
pub use resolve::{resolve, ResolveError, ResolveMode};
pub mod features;

pub use features::{feature_vector, feature_vector_with, Feature, FeatureOptions, FeatureVector};
pub mod corpus;
pub mod similarity;

pub use corpus::{corpus_stats, normalize_means, CorpusError, CorpusStats, Metric, NormalizedMeans};
pub use similarity::{compare, jaccard, summarize, FailurePolicy, ModelSimilaritySummary, SimilarityReport};
pub mod harness;
