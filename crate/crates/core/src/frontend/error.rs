use std::sync::LazyLock;

use regex::Regex;
use sqlparser::tokenizer::Location;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {expected}, found {found}")]
    Syntax { offset: usize, expected: String, found: String },
    #[error("unsupported construct `{name}` at byte {offset}")]
    UnsupportedConstruct { name: String, offset: usize },
    #[error("expected exactly one statement, found {count}")]
    MultipleStatements { count: usize },
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnsupportedConstruct { offset, .. } => Some(*offset),
            ParseError::MultipleStatements { .. } => None,
        }
    }
}

/// Maps sqlparser's 1-based (line, column-in-chars) locations to byte offsets.
pub(crate) struct LineIndex<'a> {
    text: &'a str,
    line_starts: Vec<usize>,
}

impl<'a> LineIndex<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { text, line_starts }
    }

    pub fn offset(&self, loc: Location) -> usize {
        self.offset_of(loc.line, loc.column)
    }

    pub fn offset_of(&self, line: u64, column: u64) -> usize {
        if line == 0 {
            return 0;
        }
        let Some(&start) = self.line_starts.get(line as usize - 1) else {
            return self.text.len();
        };
        let rest = &self.text[start..];
        rest.char_indices().nth(column.saturating_sub(1) as usize).map(|(i, _)| start + i).unwrap_or(self.text.len())
    }
}

static LOCATION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r" at Line: (\d+), Column: (\d+)\s*$").expect("valid regex"));
static EXPECTED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?s)Expected: (.*), found: (.*)$").expect("valid regex"));

/// Convert a sqlparser error message into a structured syntax error.
pub(crate) fn syntax_from_message(message: &str, index: &LineIndex<'_>) -> ParseError {
    let mut body = message.trim_start_matches("sql parser error: ").to_string();
    let mut offset = 0;
    if let Some(caps) = LOCATION.captures(&body) {
        let line = caps[1].parse().unwrap_or(0);
        let column = caps[2].parse().unwrap_or(0);
        offset = index.offset_of(line, column);
        let cut = caps.get(0).map(|m| m.start()).unwrap_or(body.len());
        body.truncate(cut);
    }
    match EXPECTED.captures(&body) {
        Some(caps) => ParseError::Syntax { offset, expected: caps[1].to_string(), found: caps[2].to_string() },
        None => ParseError::Syntax { offset, expected: body, found: String::new() },
    }
}
