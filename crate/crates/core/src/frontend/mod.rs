//! Lexing, parsing and rendering of SQL statements.

mod ast;
mod convert;
mod error;
pub(crate) mod render;

use sqlparser::ast::Statement;
use sqlparser::parser::Parser;
use sqlparser::tokenizer::{Token, Tokenizer};

pub use ast::*;
pub use error::ParseError;
pub use render::canonical_number;

pub(crate) use convert::ident as normalize_ident;
use error::{syntax_from_message, LineIndex};

pub(crate) fn syntax_error(text: &str, message: &str) -> ParseError {
    syntax_from_message(message, &LineIndex::new(text))
}

/// Parse one statement into a [`QueryTree`].
///
/// Comments are dropped by the tokenizer; string literals are kept as written.
pub fn parse(sql: &str, dialect: Dialect) -> Result<QueryTree, ParseError> {
    let index = LineIndex::new(sql);
    let parser_dialect = dialect.parser_dialect();
    let statements = Parser::new(parser_dialect.as_ref())
        .try_with_sql(sql)
        .and_then(|mut p| p.parse_statements())
        .map_err(|e| syntax_from_message(&e.to_string(), &index))?;

    let query = match statements.as_slice() {
        [] => {
            return Err(ParseError::Syntax { offset: sql.len(), expected: "a statement".into(), found: "EOF".into() })
        }
        [Statement::Query(q)] => q,
        [other] => {
            return Err(ParseError::UnsupportedConstruct {
                name: statement_name(other),
                offset: first_token_offset(sql, dialect, &index),
            });
        }
        many => return Err(ParseError::MultipleStatements { count: many.len() }),
    };

    let mut lowering = convert::Lowering::new(&index);
    let root = lowering.query(query, None)?;
    Ok(QueryTree { nodes: lowering.finish(), root, source_text: sql.to_string(), dialect, resolution: None })
}

/// Every proper descendant of the root in pre-order: subqueries in FROM,
/// WHERE, SELECT, HAVING and other expression positions, CTE bodies and
/// set-operation operands.
pub fn enumerate_subqueries(tree: &QueryTree) -> Vec<&QueryNode> {
    tree.descendants(tree.root()).into_iter().map(|id| tree.node(id)).collect()
}

/// One statement cut out of a multi-statement script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatementSlice {
    pub text: String,
    /// Byte offset of `text` within the script.
    pub offset: usize,
}

/// Split a script at top-level semicolons. Pieces holding only whitespace
/// and comments are dropped. Semicolons inside literals, quoted identifiers
/// and comments do not split.
pub fn split_statements(script: &str, dialect: Dialect) -> Result<Vec<StatementSlice>, ParseError> {
    let index = LineIndex::new(script);
    let parser_dialect = dialect.parser_dialect();
    let tokens = Tokenizer::new(parser_dialect.as_ref(), script)
        .tokenize_with_location()
        .map_err(|e| syntax_from_message(&e.to_string(), &index))?;

    let mut out = Vec::new();
    let mut start = 0;
    let mut has_content = false;
    for tok in &tokens {
        match &tok.token {
            Token::SemiColon => {
                let end = index.offset(tok.span.start);
                push_piece(&mut out, script, start, end, has_content);
                start = end + 1;
                has_content = false;
            }
            Token::Whitespace(_) | Token::EOF => {}
            _ => has_content = true,
        }
    }
    push_piece(&mut out, script, start, script.len(), has_content);
    Ok(out)
}

fn push_piece(out: &mut Vec<StatementSlice>, script: &str, start: usize, end: usize, has_content: bool) {
    if !has_content {
        return;
    }
    let raw = &script[start..end];
    let lead = raw.len() - raw.trim_start().len();
    out.push(StatementSlice { text: raw.trim().to_string(), offset: start + lead });
}

fn first_token_offset(sql: &str, dialect: Dialect, index: &LineIndex<'_>) -> usize {
    let parser_dialect = dialect.parser_dialect();
    Tokenizer::new(parser_dialect.as_ref(), sql)
        .tokenize_with_location()
        .ok()
        .and_then(|toks| toks.into_iter().find(|t| !matches!(t.token, Token::Whitespace(_))))
        .map(|t| index.offset(t.span.start))
        .unwrap_or(0)
}

fn statement_name(s: &Statement) -> String {
    let text = s.to_string();
    let words: Vec<&str> = text.split_whitespace().take(2).collect();
    match words.as_slice() {
        [first, second] if matches!(first.to_ascii_uppercase().as_str(), "CREATE" | "DROP" | "ALTER") => {
            format!("{} {}", first.to_ascii_uppercase(), second.to_ascii_uppercase())
        }
        [first, ..] => first.to_ascii_uppercase(),
        [] => "statement".into(),
    }
}

impl QueryTree {
    /// Render as SQL text that re-parses to an equal tree.
    pub fn to_sql(&self) -> String {
        render::Renderer::faithful(&self.nodes).node(self.root)
    }
}

impl std::fmt::Display for QueryTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_sql())
    }
}
