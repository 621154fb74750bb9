//! Tokenization and method chunking over normalized source.
//!
//! Splitting is lexical: whitespace separates tokens, punctuation characters
//! are tokens of their own, string literals stay whole. A `"${...}"`
//! interpolation additionally emits the identifiers it embeds, since tainted
//! values flow through interpolation. Bare string literals and numbers are
//! abstracted to `aStr` / `aNum` when counting token frequencies, so the
//! vocabulary does not explode with one key per literal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::preprocessor::scan::{classify, Class, Classified, LineState};
use crate::preprocessor::NormalizedSource;

/// Tokens of one source line.
pub type TokenLine = Vec<String>;

/// Token frequency map for a set of method chunks.
pub type BagOfWords = BTreeMap<String, u64>;

/// Frequency key used for all string literals.
pub const ABSTRACT_STR: &str = "aStr";
/// Frequency key used for all numeric literals.
pub const ABSTRACT_NUM: &str = "aNum";

/// One top-level method (or the `preferences` block) with its token lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodChunk {
    pub method_name: String,
    pub signature_tokens: TokenLine,
    /// Lines after the signature, through the closing `}`.
    pub body: Vec<TokenLine>,
    /// 1-based line number of the signature in the normalized source.
    pub start_line: u32,
}

/// Result of chunking a token stream: the `preferences` block, when present,
/// and every top-level method definition. A missing `preferences` block means
/// source identification will come back empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitMethods {
    pub preferences: Option<MethodChunk>,
    pub methods: Vec<MethodChunk>,
}

fn ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$' || b >= 0x80
}

/// Splits every line of `src` into tokens.
pub fn tokenize(src: &NormalizedSource) -> Vec<TokenLine> {
    let classified = classify(&src.lines).unwrap_or_else(|_| lenient(&src.lines));
    src.lines
        .iter()
        .enumerate()
        .map(|(i, line)| {
            tokenize_line(
                line,
                &classified.classes[i],
                classified.start_state[i] != LineState::Code,
            )
        })
        .collect()
}

fn lenient(lines: &[String]) -> Classified {
    Classified {
        classes: lines.iter().map(|l| vec![Class::Code; l.len()]).collect(),
        start_state: vec![LineState::Code; lines.len()],
        end_state: vec![LineState::Code; lines.len()],
    }
}

fn tokenize_line(line: &str, classes: &[Class], starts_in_string: bool) -> TokenLine {
    let bytes = line.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match classes[i] {
            Class::Comment => i += 1,
            Class::Str => {
                let start = i;
                while i < bytes.len() && classes[i] == Class::Str {
                    i += 1;
                }
                let mut text = line[start..i].to_owned();
                if starts_in_string && start == 0 {
                    // continuation of a multi-line literal: keep it
                    // string-classed so frequency counting sees aStr
                    text.insert(0, '"');
                }
                let interpolated = text.starts_with('"');
                tokens.push(text);
                if interpolated {
                    let literal = tokens.last().unwrap().clone();
                    emit_interpolation_idents(&literal, &mut tokens);
                }
            }
            Class::Code => {
                let b = bytes[i];
                if b.is_ascii_whitespace() {
                    i += 1;
                } else if b.is_ascii_digit() {
                    let start = i;
                    while i < bytes.len() && classes[i] == Class::Code && bytes[i].is_ascii_digit()
                    {
                        i += 1;
                    }
                    if i + 1 < bytes.len()
                        && bytes[i] == b'.'
                        && classes[i] == Class::Code
                        && bytes[i + 1].is_ascii_digit()
                        && classes[i + 1] == Class::Code
                    {
                        i += 1;
                        while i < bytes.len()
                            && classes[i] == Class::Code
                            && bytes[i].is_ascii_digit()
                        {
                            i += 1;
                        }
                    }
                    tokens.push(line[start..i].to_owned());
                } else if ident_byte(b) {
                    let start = i;
                    while i < bytes.len() && classes[i] == Class::Code && ident_byte(bytes[i]) {
                        i += 1;
                    }
                    tokens.push(line[start..i].to_owned());
                } else {
                    // one punctuation character per token
                    let ch_len = line[i..].chars().next().map_or(1, char::len_utf8);
                    tokens.push(line[i..i + ch_len].to_owned());
                    i += ch_len;
                }
            }
        }
    }
    tokens
}

/// Pulls identifier tokens out of `${...}` and `$name` interpolations.
fn emit_interpolation_idents(literal: &str, tokens: &mut Vec<String>) {
    let bytes = literal.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\\' {
            i += 2;
            continue;
        }
        if bytes[i] == b'$' && i + 1 < bytes.len() {
            if bytes[i + 1] == b'{' {
                let start = i + 2;
                let end = literal[start..]
                    .find('}')
                    .map(|p| start + p)
                    .unwrap_or(literal.len());
                push_idents(&literal[start..end], tokens);
                i = end + 1;
                continue;
            }
            if ident_byte(bytes[i + 1]) && !bytes[i + 1].is_ascii_digit() {
                let start = i + 1;
                let mut end = start;
                while end < bytes.len() && (ident_byte(bytes[end]) || bytes[end] == b'.') {
                    end += 1;
                }
                push_idents(&literal[start..end], tokens);
                i = end;
                continue;
            }
        }
        i += 1;
    }
}

fn push_idents(expr: &str, tokens: &mut Vec<String>) {
    let mut word = String::new();
    for ch in expr.chars() {
        if ch.is_ascii_alphanumeric() || ch == '_' {
            word.push(ch);
        } else if !word.is_empty() {
            if !word.chars().next().unwrap().is_ascii_digit() {
                tokens.push(std::mem::take(&mut word));
            } else {
                word.clear();
            }
        }
    }
    if !word.is_empty() && !word.chars().next().unwrap().is_ascii_digit() {
        tokens.push(word);
    }
}

fn net_paren(tokens: &[String]) -> i32 {
    tokens.iter().fold(0, |acc, t| match t.as_str() {
        "(" => acc + 1,
        ")" => acc - 1,
        _ => acc,
    })
}

fn net_brace(tokens: &[String]) -> i32 {
    tokens.iter().fold(0, |acc, t| match t.as_str() {
        "{" => acc + 1,
        "}" => acc - 1,
        _ => acc,
    })
}

const MODIFIERS: &[&str] = &["private", "public", "protected", "static"];

fn is_method_signature(tokens: &[TokenLine], i: usize) -> bool {
    let t = &tokens[i];
    if t.last().map(String::as_str) != Some("{") || !t.iter().any(|x| x == "(") {
        return false;
    }
    let mut k = 0;
    while k < t.len() && MODIFIERS.contains(&t[k].as_str()) {
        k += 1;
    }
    if k >= t.len() {
        return false;
    }
    if t[k] == "def" {
        return true;
    }
    // `Type name(...)`: two identifiers before the first paren
    t.len() > k + 2
        && is_ident(&t[k])
        && is_ident(&t[k + 1])
        && t[k + 2] == "("
}

fn is_ident(t: &str) -> bool {
    let mut chars = t.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '$' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
}

fn method_name_of(signature: &TokenLine) -> String {
    signature
        .iter()
        .position(|t| t == "(")
        .and_then(|p| p.checked_sub(1))
        .map(|p| signature[p].clone())
        .unwrap_or_default()
}

/// Groups token lines into the `preferences` block and top-level method
/// chunks. The `definition(...)` call is skipped entirely; loose top-level
/// lines outside any construct are ignored.
pub fn split_methods(lines: &[TokenLine]) -> SplitMethods {
    let mut out = SplitMethods::default();
    let mut i = 0;
    while i < lines.len() {
        let t = &lines[i];
        if t.is_empty() {
            i += 1;
            continue;
        }
        if t[0] == "definition" && t.get(1).map(String::as_str) == Some("(") {
            let mut bal = net_paren(t);
            i += 1;
            while bal > 0 && i < lines.len() {
                bal += net_paren(&lines[i]);
                i += 1;
            }
            continue;
        }
        let block_open = t.last().map(String::as_str) == Some("{");
        let is_prefs = t[0] == "preferences" && block_open;
        if is_prefs || is_method_signature(lines, i) {
            let start_line = (i + 1) as u32;
            let signature = t.clone();
            let mut body = Vec::new();
            let mut depth = net_brace(t);
            i += 1;
            while depth > 0 && i < lines.len() {
                depth += net_brace(&lines[i]);
                body.push(lines[i].clone());
                i += 1;
            }
            let chunk = MethodChunk {
                method_name: if is_prefs {
                    "preferences".to_owned()
                } else {
                    method_name_of(&signature)
                },
                signature_tokens: signature,
                body,
                start_line,
            };
            if is_prefs {
                out.preferences = Some(chunk);
            } else {
                out.methods.push(chunk);
            }
            continue;
        }
        log::debug!("skipping top-level line outside any method: {:?}", t);
        i += 1;
    }
    out
}

/// True for a token carrying a string literal.
pub fn is_string_token(t: &str) -> bool {
    t.starts_with('"') || t.starts_with('\'')
}

/// True for an integer or decimal literal, sign included.
pub fn is_numeric_token(t: &str) -> bool {
    let t = t.strip_prefix(['+', '-']).unwrap_or(t);
    if t.is_empty() {
        return false;
    }
    let mut dots = 0;
    for c in t.chars() {
        match c {
            '0'..='9' => {}
            '.' => dots += 1,
            _ => return false,
        }
    }
    dots <= 1 && t != "." && !t.starts_with('.') && !t.ends_with('.')
}

/// Maps a token to its frequency key: literals collapse to `aStr` / `aNum`.
pub fn abstract_token(t: &str) -> &str {
    if is_string_token(t) {
        ABSTRACT_STR
    } else if is_numeric_token(t) {
        ABSTRACT_NUM
    } else {
        t
    }
}

/// Counts abstracted token frequencies over the given chunks, signatures
/// included.
pub fn bag_of_words(chunks: &[MethodChunk]) -> BagOfWords {
    let mut bag = BagOfWords::new();
    for chunk in chunks {
        for line in std::iter::once(&chunk.signature_tokens).chain(chunk.body.iter()) {
            for token in line {
                *bag.entry(abstract_token(token).to_owned()).or_insert(0) += 1;
            }
        }
    }
    bag
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocessor::{normalize, RawSource};

    fn norm(lines: &[&str]) -> NormalizedSource {
        normalize(&RawSource {
            app_name: "t".into(),
            lines: lines.iter().map(|s| s.to_string()).collect(),
        })
        .unwrap()
    }

    fn toks(line: &str) -> Vec<String> {
        tokenize(&norm(&[line])).remove(0)
    }

    #[test]
    fn string_literal_is_one_token() {
        assert_eq!(toks(r#"x = "hello world""#), ["x", "=", "\"hello world\""]);
    }

    #[test]
    fn punctuation_tokens_are_single_characters() {
        assert_eq!(
            toks("foo(a, b)"),
            ["foo", "(", "a", ",", "b", ")"]
        );
        assert_eq!(toks("a == b"), ["a", "=", "=", "b"]);
        assert_eq!(toks("m.call()"), ["m", ".", "call", "(", ")"]);
    }

    #[test]
    fn numbers_stay_whole() {
        assert_eq!(toks("x = 5"), ["x", "=", "5"]);
        assert_eq!(toks("pi = 3.14"), ["pi", "=", "3.14"]);
        assert_eq!(toks("a.b"), ["a", ".", "b"]);
        assert_eq!(toks("x = -5"), ["x", "=", "-", "5"]);
    }

    #[test]
    fn gstring_emits_literal_and_embedded_idents() {
        assert_eq!(
            toks(r#"msg = "now ${evt.value} on""#),
            ["msg", "=", "\"now ${evt.value} on\"", "evt", "value"]
        );
        assert_eq!(
            toks(r#"log.debug "got $settings""#),
            ["log", ".", "debug", "\"got $settings\"", "settings"]
        );
    }

    #[test]
    fn single_quoted_strings_do_not_interpolate() {
        assert_eq!(toks(r#"m = 'a ${x}'"#), ["m", "=", "'a ${x}'"]);
    }

    #[test]
    fn empty_line_gives_empty_token_line() {
        let lines = tokenize(&norm(&["", "x = 1"]));
        assert!(lines[0].is_empty());
        assert_eq!(lines[1], ["x", "=", "1"]);
    }

    #[test]
    fn split_finds_preferences_and_methods() {
        let src = norm(&[
            "definition(",
            "    name: \"t\",",
            "    category: \"c\")",
            "preferences {",
            "    section(\"s\") {",
            "        input(\"newMode\", \"mode\")",
            "    }",
            "}",
            "def installed() {",
            "    initialize()",
            "}",
            "private String render(x) {",
            "    return x",
            "}",
        ]);
        let split = split_methods(&tokenize(&src));
        let prefs = split.preferences.expect("preferences chunk");
        assert_eq!(prefs.method_name, "preferences");
        assert!(prefs.body.iter().any(|l| l.first().map(String::as_str) == Some("input")));
        let names: Vec<&str> = split.methods.iter().map(|m| m.method_name.as_str()).collect();
        assert_eq!(names, ["installed", "render"]);
        assert_eq!(split.methods[0].start_line, 9);
        assert_eq!(split.methods[0].body.len(), 2);
        assert_eq!(split.methods[0].body[1], ["}"]);
    }

    #[test]
    fn definition_only_file_yields_nothing() {
        let src = norm(&["definition(", "    name: \"only\")"]);
        let split = split_methods(&tokenize(&src));
        assert!(split.preferences.is_none());
        assert!(split.methods.is_empty());
    }

    #[test]
    fn nested_blocks_stay_in_one_chunk() {
        let src = norm(&[
            "def go() {",
            "    if (a) {",
            "        f()",
            "    }",
            "    phones.each { p -> g(p) }",
            "}",
        ]);
        let split = split_methods(&tokenize(&src));
        assert_eq!(split.methods.len(), 1);
        let body = &split.methods[0].body;
        assert_eq!(body.last().unwrap(), &["}"]);
    }

    #[test]
    fn frequency_counting_abstracts_literals() {
        let chunks = vec![MethodChunk {
            method_name: "m".into(),
            signature_tokens: vec!["def".into(), "x".into(), "=".into(), "\"abc\"".into()],
            body: vec![vec!["x".into(), "=".into(), "5".into()]],
            start_line: 1,
        }];
        let bag = bag_of_words(&chunks);
        assert_eq!(bag["def"], 1);
        assert_eq!(bag["x"], 2);
        assert_eq!(bag["="], 2);
        assert_eq!(bag[ABSTRACT_STR], 1);
        assert_eq!(bag[ABSTRACT_NUM], 1);
        assert!(!bag.contains_key("\"abc\""));
        assert!(!bag.contains_key("5"));
    }

    #[test]
    fn frequency_total_matches_token_count() {
        let src = norm(&[
            "def go() {",
            "    def m = \"x ${a.b} y\"",
            "    send(m, 3.5)",
            "}",
        ]);
        let lines = tokenize(&src);
        let split = split_methods(&lines);
        let bag = bag_of_words(&split.methods);
        let total: u64 = bag.values().sum();
        let raw: usize = split.methods[0]
            .body
            .iter()
            .map(Vec::len)
            .sum::<usize>()
            + split.methods[0].signature_tokens.len();
        assert_eq!(total, raw as u64);
    }

    #[test]
    fn empty_chunk_list_gives_empty_bag() {
        assert!(bag_of_words(&[]).is_empty());
    }

    #[test]
    fn numeric_token_predicate() {
        for ok in ["0", "42", "3.14", "-5", "+9.5"] {
            assert!(is_numeric_token(ok), "{ok}");
        }
        for bad in ["x", "1e5", "inf", "NaN", ".", "1.", ".5", "1.2.3", ""] {
            assert!(!is_numeric_token(bad), "{bad}");
        }
    }
}
