//! Lexical normalization of Groovy source ahead of tokenization.
//!
//! The rules rewrite an app so that every statement sits on its own line and
//! every block brace is easy to track:
//!
//! ```text
//! strip_comments -> join_input_calls -> join_map_literals
//!     -> split_conditionals -> split_statements
//! ```
//!
//! All scanning is done over a masked shadow of each line (see [`scan`]), so
//! commas, braces and semicolons inside string literals or comments never
//! trigger a rewrite. Rewrites only move line boundaries and drop comments
//! and `;` separators; every other token survives unchanged.

pub mod scan;

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use scan::{classify, scan_single, shadow_line, Class, LineState};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PreprocessError {
    #[error("unterminated block comment starting on line {line}")]
    UnterminatedBlockComment { line: u32 },
    #[error("unbalanced parentheses in call starting on line {line}")]
    UnbalancedParens { line: u32 },
    #[error("unbalanced brackets in literal starting on line {line}")]
    UnbalancedBrackets { line: u32 },
    #[error("unbalanced braces at line {line}")]
    UnbalancedBraces { line: u32 },
}

/// Source text as read from disk, split into lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSource {
    pub app_name: String,
    pub lines: Vec<String>,
}

impl RawSource {
    pub fn from_text(app_name: impl Into<String>, text: &str) -> Self {
        RawSource {
            app_name: app_name.into(),
            lines: text.lines().map(|l| l.trim_end_matches('\r').to_owned()).collect(),
        }
    }

    pub fn text(&self) -> String {
        self.lines.join("\n")
    }
}

/// Which rewrite produced a log record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewriteRule {
    StripComments,
    JoinInput,
    JoinMap,
    MergeBrace,
    SplitAfterOpen,
    SplitBeforeClose,
    SplitAfterClose,
    SplitStatement,
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RewriteRule::StripComments => "strip_comments",
            RewriteRule::JoinInput => "join_input",
            RewriteRule::JoinMap => "join_map",
            RewriteRule::MergeBrace => "merge_brace",
            RewriteRule::SplitAfterOpen => "split_after_open",
            RewriteRule::SplitBeforeClose => "split_before_close",
            RewriteRule::SplitAfterClose => "split_after_close",
            RewriteRule::SplitStatement => "split_statement",
        };
        f.write_str(s)
    }
}

/// One applied rewrite: which rule fired and the 1-based line of the original
/// source it touched. Kept for debugging and golden tests only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteRecord {
    pub rule: RewriteRule,
    pub line: u32,
}

/// Output of [`normalize`]: one statement per line, block braces regular.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedSource {
    pub app_name: String,
    pub lines: Vec<String>,
    pub rewrite_log: Vec<RewriteRecord>,
}

impl NormalizedSource {
    pub fn text(&self) -> String {
        self.lines.join("\n")
    }

    pub fn to_raw(&self) -> RawSource {
        RawSource {
            app_name: self.app_name.clone(),
            lines: self.lines.clone(),
        }
    }
}

/// Working document: lines plus the original 1-based line each came from.
struct Doc {
    lines: Vec<String>,
    origin: Vec<u32>,
}

impl Doc {
    fn new(src: &RawSource) -> Self {
        Doc {
            lines: src.lines.clone(),
            origin: (1..=src.lines.len() as u32).collect(),
        }
    }
}

/// Runs the full rule chain and validates brace balance.
pub fn normalize(src: &RawSource) -> Result<NormalizedSource, PreprocessError> {
    let mut doc = Doc::new(src);
    let mut log = Vec::new();
    strip_comments_doc(&mut doc, &mut log)?;
    join_input_calls_doc(&mut doc, &mut log)?;
    join_map_literals_doc(&mut doc, &mut log)?;
    split_conditionals_doc(&mut doc, &mut log)?;
    split_statements_doc(&mut doc, &mut log)?;
    validate_braces(&doc)?;
    Ok(NormalizedSource {
        app_name: src.app_name.clone(),
        lines: doc.lines,
        rewrite_log: log,
    })
}

macro_rules! single_rule_op {
    ($(#[$doc:meta])* $name:ident, $inner:ident) => {
        $(#[$doc])*
        pub fn $name(src: &RawSource) -> Result<RawSource, PreprocessError> {
            let mut doc = Doc::new(src);
            let mut log = Vec::new();
            $inner(&mut doc, &mut log)?;
            Ok(RawSource {
                app_name: src.app_name.clone(),
                lines: doc.lines,
            })
        }
    };
}

single_rule_op!(
    /// Removes `//` and `/* ... */` comments. A block comment spanning lines
    /// splices the code before and after it onto one line.
    strip_comments,
    strip_comments_doc
);
single_rule_op!(
    /// Joins multi-line `input` calls (parenthesized or comma-continued) onto
    /// one line. Expects comments to be gone already.
    join_input_calls,
    join_input_calls_doc
);
single_rule_op!(
    /// Joins multi-line `[k: v, ...]` literals in assignments onto one line.
    join_map_literals,
    join_map_literals_doc
);
single_rule_op!(
    /// Normalizes block braces: every block-opening `{` ends its line, every
    /// block-closing `}` sits alone, and a `{` on the line after its header
    /// is merged up. Applies to conditionals, loops, try/catch/finally and
    /// method definitions alike; braces inside parentheses are untouched.
    split_conditionals,
    split_conditionals_doc
);
single_rule_op!(
    /// Splits `;`-separated statements onto separate lines, dropping the
    /// separators. `;` inside parentheses (e.g. a `for` header) is kept.
    split_statements,
    split_statements_doc
);

fn strip_comments_doc(doc: &mut Doc, log: &mut Vec<RewriteRecord>) -> Result<(), PreprocessError> {
    let classified = classify(&doc.lines)?;
    let mut out_lines = Vec::with_capacity(doc.lines.len());
    let mut out_origin = Vec::with_capacity(doc.lines.len());
    // (text, origin, any comment bytes removed)
    let mut acc: Option<(String, u32, bool)> = None;

    for (i, line) in doc.lines.iter().enumerate() {
        let classes = &classified.classes[i];
        let kept_bytes: Vec<u8> = line
            .bytes()
            .zip(classes)
            .filter(|(_, c)| **c != Class::Comment)
            .map(|(b, _)| b)
            .collect();
        // comments are whole characters, so the remainder stays valid UTF-8
        let kept = String::from_utf8(kept_bytes).expect("comment removal preserves UTF-8");
        let removed = kept.len() != line.len();
        if removed {
            log.push(RewriteRecord {
                rule: RewriteRule::StripComments,
                line: doc.origin[i],
            });
        }
        let (text, origin, touched) = match acc.take() {
            Some((s, o, t)) => (s + &kept, o, t || removed),
            None => (kept, doc.origin[i], removed),
        };
        if matches!(
            classified.end_state[i],
            LineState::BlockComment { .. }
        ) {
            acc = Some((text, origin, touched));
            continue;
        }
        let text = if touched {
            text.trim_end().to_owned()
        } else {
            text
        };
        out_lines.push(text);
        out_origin.push(origin);
    }
    // classify() already rejected an unterminated block comment, so acc is
    // always flushed
    debug_assert!(acc.is_none());
    doc.lines = out_lines;
    doc.origin = out_origin;
    Ok(())
}

fn first_word(shadow: &str) -> &str {
    let t = shadow.trim_start();
    let end = t
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '$'))
        .unwrap_or(t.len());
    &t[..end]
}

fn join_input_calls_doc(
    doc: &mut Doc,
    log: &mut Vec<RewriteRecord>,
) -> Result<(), PreprocessError> {
    join_continuations(doc, log, RewriteRule::JoinInput, |shadow, start_state| {
        *start_state == LineState::Code && first_word(shadow) == "input"
    })
}

fn join_map_literals_doc(
    doc: &mut Doc,
    log: &mut Vec<RewriteRecord>,
) -> Result<(), PreprocessError> {
    join_continuations(doc, log, RewriteRule::JoinMap, |shadow, start_state| {
        *start_state == LineState::Code
            && has_assignment_eq(shadow)
            && scan::bracket_balance(shadow) > 0
    })
}

/// True when the shadow contains a plain `=` outside comparison/compound
/// operators, at any nesting depth.
fn has_assignment_eq(shadow: &str) -> bool {
    let b = shadow.as_bytes();
    for (i, &c) in b.iter().enumerate() {
        if c != b'=' {
            continue;
        }
        let prev = if i > 0 { b[i - 1] } else { b' ' };
        let next = if i + 1 < b.len() { b[i + 1] } else { b' ' };
        if prev != b'=' && next != b'=' && !matches!(prev, b'!' | b'<' | b'>') {
            return true;
        }
    }
    false
}

fn join_continuations(
    doc: &mut Doc,
    log: &mut Vec<RewriteRecord>,
    rule: RewriteRule,
    starts: impl Fn(&str, &LineState) -> bool,
) -> Result<(), PreprocessError> {
    let classified = classify(&doc.lines)?;
    let n = doc.lines.len();
    let mut out_lines = Vec::with_capacity(n);
    let mut out_origin = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let shadow = shadow_line(&doc.lines[i], &classified.classes[i]);
        if !starts(&shadow, &classified.start_state[i]) {
            out_lines.push(doc.lines[i].clone());
            out_origin.push(doc.origin[i]);
            i += 1;
            continue;
        }
        let origin = doc.origin[i];
        let mut cur = doc.lines[i].clone();
        let mut j = i + 1;
        loop {
            let (sh, end) = scan_single(&cur);
            if end != LineState::Code {
                break; // never join across a multi-line string
            }
            let parens = scan::paren_balance(&sh);
            let brackets = scan::bracket_balance(&sh);
            let more = parens > 0 || brackets > 0 || sh.trim_end().ends_with(',');
            if !more {
                break;
            }
            if j >= n {
                if parens > 0 {
                    return Err(PreprocessError::UnbalancedParens { line: origin });
                }
                if brackets > 0 {
                    return Err(PreprocessError::UnbalancedBrackets { line: origin });
                }
                break; // trailing comma at EOF: leave it
            }
            cur = format!("{} {}", cur.trim_end(), doc.lines[j].trim());
            log.push(RewriteRecord { rule, line: origin });
            j += 1;
        }
        out_lines.push(cur);
        out_origin.push(origin);
        i = j;
    }
    doc.lines = out_lines;
    doc.origin = out_origin;
    Ok(())
}

/// True for a complete block header that still lacks its `{`: a conditional,
/// loop, try/catch/finally, or a method definition.
fn is_block_header(shadow: &str) -> bool {
    let t = shadow.trim();
    if t.is_empty() || t.contains('{') || has_assignment_eq(shadow) {
        return false;
    }
    match t {
        "else" | "do" | "try" | "finally" => return true,
        _ => {}
    }
    if !t.ends_with(')') || scan::paren_balance(shadow) != 0 {
        return false;
    }
    let w1 = first_word(t);
    match w1 {
        "if" | "for" | "while" | "switch" | "catch" => return true,
        "else" => return true, // else if (...)
        "def" | "private" | "public" | "protected" | "static" => return true,
        _ => {}
    }
    // `Type name(...)` method definition: two identifier words before `(`
    let rest = t[w1.len()..].trim_start();
    let w2 = first_word(rest);
    !w1.is_empty()
        && !w2.is_empty()
        && w1.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && rest[w2.len()..].trim_start().starts_with('(')
}

fn leading_ws(line: &str) -> &str {
    &line[..line.len() - line.trim_start().len()]
}

fn split_conditionals_doc(
    doc: &mut Doc,
    log: &mut Vec<RewriteRecord>,
) -> Result<(), PreprocessError> {
    // queue of pending lines; emitted lines carry paren depth and string
    // state forward
    let mut queue: VecDeque<(String, u32)> = doc
        .lines
        .iter()
        .cloned()
        .zip(doc.origin.iter().copied())
        .collect();
    let mut out_lines = Vec::with_capacity(doc.lines.len());
    let mut out_origin = Vec::with_capacity(doc.lines.len());
    let mut depth: i32 = 0;
    let mut in_string: Option<scan::StrKind> = None;

    while let Some((line, origin)) = queue.pop_front() {
        if let Some(kind) = in_string {
            if triple_closes_on(&line, kind) {
                in_string = None;
            }
            out_lines.push(line);
            out_origin.push(origin);
            continue;
        }
        let (shadow, end_state) = scan_single(&line);
        let bytes = shadow.as_bytes();
        let mut d = depth;
        let mut split_at: Option<(usize, RewriteRule)> = None;
        for (idx, &b) in bytes.iter().enumerate() {
            match b {
                b'(' | b'[' => d += 1,
                b')' | b']' => d = (d - 1).max(0),
                b'{' if d == 0 => {
                    if shadow[idx + 1..].trim().is_empty() {
                        continue;
                    }
                    split_at = Some((idx, RewriteRule::SplitAfterOpen));
                }
                b'}' if d == 0 => {
                    if !shadow[..idx].trim().is_empty() {
                        split_at = Some((idx, RewriteRule::SplitBeforeClose));
                    } else if !shadow[idx + 1..].trim().is_empty() {
                        split_at = Some((idx, RewriteRule::SplitAfterClose));
                    } else {
                        continue;
                    }
                }
                _ => {}
            }
            if split_at.is_some() {
                break;
            }
        }

        if let Some((idx, rule)) = split_at {
            let indent = leading_ws(&line).to_owned();
            let (first, rest) = match rule {
                RewriteRule::SplitBeforeClose => (line[..idx].trim_end().to_owned(), &line[idx..]),
                _ => (line[..=idx].to_owned(), &line[idx + 1..]),
            };
            log.push(RewriteRecord { rule, line: origin });
            queue.push_front((format!("{indent}{}", rest.trim()), origin));
            queue.push_front((first, origin));
            continue;
        }

        // merge a lone `{` (or `{ ...`) up into its block header
        if end_state == LineState::Code && is_block_header(&shadow) {
            let mut blanks = 0;
            let mut opens_block = false;
            while let Some((next, _)) = queue.get(blanks) {
                if next.trim().is_empty() {
                    blanks += 1;
                    continue;
                }
                opens_block = next.trim_start().starts_with('{');
                break;
            }
            if opens_block {
                for _ in 0..blanks {
                    queue.pop_front();
                }
                let (next, _) = queue.pop_front().unwrap();
                log.push(RewriteRecord {
                    rule: RewriteRule::MergeBrace,
                    line: origin,
                });
                queue.push_front((format!("{} {}", line.trim_end(), next.trim_start()), origin));
                continue;
            }
        }

        for &b in bytes {
            match b {
                b'(' | b'[' => depth += 1,
                b')' | b']' => depth = (depth - 1).max(0),
                _ => {}
            }
        }
        if let LineState::Triple(kind) = end_state {
            in_string = Some(kind);
        }
        out_lines.push(line);
        out_origin.push(origin);
    }
    doc.lines = out_lines;
    doc.origin = out_origin;
    Ok(())
}

/// True when a line that started inside a triple-quoted literal of `kind`
/// closes it.
fn triple_closes_on(line: &str, kind: scan::StrKind) -> bool {
    let opener = match kind {
        scan::StrKind::TripleSingle => "'''",
        _ => "\"\"\"",
    };
    let probe = vec![opener.to_owned(), line.to_owned()];
    match classify(&probe) {
        Ok(c) => c.end_state[1] == LineState::Code,
        Err(_) => true,
    }
}

fn split_statements_doc(
    doc: &mut Doc,
    log: &mut Vec<RewriteRecord>,
) -> Result<(), PreprocessError> {
    let classified = classify(&doc.lines)?;
    let mut out_lines = Vec::with_capacity(doc.lines.len());
    let mut out_origin = Vec::with_capacity(doc.lines.len());
    let mut depth: i32 = 0;

    for (i, line) in doc.lines.iter().enumerate() {
        if classified.start_state[i] != LineState::Code {
            out_lines.push(line.clone());
            out_origin.push(doc.origin[i]);
            continue;
        }
        let shadow = shadow_line(line, &classified.classes[i]);
        let mut cuts = Vec::new();
        let mut d = depth;
        for (idx, b) in shadow.bytes().enumerate() {
            match b {
                b'(' | b'[' => d += 1,
                b')' | b']' => d = (d - 1).max(0),
                b';' if d == 0 => cuts.push(idx),
                _ => {}
            }
        }
        depth = d;
        if cuts.is_empty() {
            out_lines.push(line.clone());
            out_origin.push(doc.origin[i]);
            continue;
        }
        let indent = leading_ws(line).to_owned();
        let mut start = 0;
        let mut pieces = Vec::new();
        for cut in cuts.iter().chain(std::iter::once(&line.len())) {
            let piece = line[start..*cut].trim();
            if !piece.is_empty() {
                pieces.push(piece.to_owned());
            }
            start = cut + 1;
        }
        if pieces.is_empty() {
            // the line held only semicolons; keep an empty line in its place
            out_lines.push(indent.trim_end().to_owned());
            out_origin.push(doc.origin[i]);
            continue;
        }
        for (k, piece) in pieces.iter().enumerate() {
            if k > 0 {
                log.push(RewriteRecord {
                    rule: RewriteRule::SplitStatement,
                    line: doc.origin[i],
                });
            }
            out_lines.push(format!("{indent}{piece}"));
            out_origin.push(doc.origin[i]);
        }
    }
    doc.lines = out_lines;
    doc.origin = out_origin;
    Ok(())
}

/// Confirms block braces (outside parentheses and strings) pair up across the
/// whole document.
fn validate_braces(doc: &Doc) -> Result<(), PreprocessError> {
    let classified = classify(&doc.lines)?;
    let mut block: i32 = 0;
    let mut depth: i32 = 0;
    for (i, line) in doc.lines.iter().enumerate() {
        let shadow = shadow_line(line, &classified.classes[i]);
        for b in shadow.bytes() {
            match b {
                b'(' | b'[' => depth += 1,
                b')' | b']' => depth = (depth - 1).max(0),
                b'{' if depth == 0 => block += 1,
                b'}' if depth == 0 => {
                    block -= 1;
                    if block < 0 {
                        return Err(PreprocessError::UnbalancedBraces {
                            line: doc.origin[i],
                        });
                    }
                }
                _ => {}
            }
        }
    }
    if block != 0 {
        let line = doc.origin.last().copied().unwrap_or(0);
        return Err(PreprocessError::UnbalancedBraces { line });
    }
    Ok(())
}
