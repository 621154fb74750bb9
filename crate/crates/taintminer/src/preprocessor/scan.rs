//! Byte classification for Groovy-ish source. Every byte of every line is
//! classed as code, comment, or string-literal content so the rewrite rules
//! can count structure without being fooled by quoted or commented text.
//!
//! Single- and double-quoted strings auto-close at end of line (they cannot
//! legally span lines); triple-quoted strings and block comments carry state
//! across lines.

use super::PreprocessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Code,
    Comment,
    Str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrKind {
    Single,
    Double,
    TripleSingle,
    TripleDouble,
}

impl StrKind {
    fn quote(self) -> u8 {
        match self {
            StrKind::Single | StrKind::TripleSingle => b'\'',
            StrKind::Double | StrKind::TripleDouble => b'"',
        }
    }

    fn is_triple(self) -> bool {
        matches!(self, StrKind::TripleSingle | StrKind::TripleDouble)
    }
}

/// Scanner state that survives a line boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineState {
    #[default]
    Code,
    BlockComment {
        start_line: u32,
    },
    Triple(StrKind),
}

#[derive(Debug)]
pub struct Classified {
    /// One class per byte of each line.
    pub classes: Vec<Vec<Class>>,
    /// State in force when each line starts.
    pub start_state: Vec<LineState>,
    /// State in force after each line ends.
    pub end_state: Vec<LineState>,
}

enum Mode {
    Code,
    Str(StrKind),
    BlockComment(u32),
}

/// Classifies every byte of `lines`. Line numbers in errors are 1-based.
pub fn classify(lines: &[String]) -> Result<Classified, PreprocessError> {
    let mut classes = Vec::with_capacity(lines.len());
    let mut start_state = Vec::with_capacity(lines.len());
    let mut end_state = Vec::with_capacity(lines.len());
    let mut state = LineState::Code;

    for (idx, line) in lines.iter().enumerate() {
        start_state.push(state);
        let b = line.as_bytes();
        let mut cls = vec![Class::Code; b.len()];
        let mut mode = match state {
            LineState::Code => Mode::Code,
            LineState::BlockComment { start_line } => Mode::BlockComment(start_line),
            LineState::Triple(kind) => Mode::Str(kind),
        };
        let mut i = 0;
        while i < b.len() {
            match mode {
                Mode::Code => {
                    if b[i] == b'/' && i + 1 < b.len() && b[i + 1] == b'/' {
                        for c in cls.iter_mut().skip(i) {
                            *c = Class::Comment;
                        }
                        i = b.len();
                    } else if b[i] == b'/' && i + 1 < b.len() && b[i + 1] == b'*' {
                        cls[i] = Class::Comment;
                        cls[i + 1] = Class::Comment;
                        i += 2;
                        mode = Mode::BlockComment(idx as u32 + 1);
                    } else if b[i] == b'\'' || b[i] == b'"' {
                        let q = b[i];
                        if i + 2 < b.len() && b[i + 1] == q && b[i + 2] == q {
                            cls[i] = Class::Str;
                            cls[i + 1] = Class::Str;
                            cls[i + 2] = Class::Str;
                            i += 3;
                            mode = Mode::Str(if q == b'\'' {
                                StrKind::TripleSingle
                            } else {
                                StrKind::TripleDouble
                            });
                        } else {
                            cls[i] = Class::Str;
                            i += 1;
                            mode = Mode::Str(if q == b'\'' {
                                StrKind::Single
                            } else {
                                StrKind::Double
                            });
                        }
                    } else {
                        i += 1;
                    }
                }
                Mode::Str(kind) => {
                    cls[i] = Class::Str;
                    if b[i] == b'\\' && i + 1 < b.len() {
                        cls[i + 1] = Class::Str;
                        i += 2;
                    } else if kind.is_triple() {
                        let q = kind.quote();
                        if b[i] == q && i + 2 < b.len() && b[i + 1] == q && b[i + 2] == q {
                            cls[i + 1] = Class::Str;
                            cls[i + 2] = Class::Str;
                            i += 3;
                            mode = Mode::Code;
                        } else if b[i] == q
                            && i + 2 == b.len()
                            && b[i + 1] == q
                        {
                            // two quotes at EOL do not close a triple
                            cls[i + 1] = Class::Str;
                            i += 2;
                        } else {
                            i += 1;
                        }
                    } else if b[i] == kind.quote() {
                        i += 1;
                        mode = Mode::Code;
                    } else {
                        i += 1;
                    }
                }
                Mode::BlockComment(_) => {
                    cls[i] = Class::Comment;
                    if b[i] == b'*' && i + 1 < b.len() && b[i + 1] == b'/' {
                        cls[i + 1] = Class::Comment;
                        i += 2;
                        mode = Mode::Code;
                    } else {
                        i += 1;
                    }
                }
            }
        }
        state = match mode {
            Mode::BlockComment(start_line) => LineState::BlockComment { start_line },
            Mode::Str(kind) if kind.is_triple() => LineState::Triple(kind),
            _ => LineState::Code,
        };
        end_state.push(state);
        classes.push(cls);
    }

    if let LineState::BlockComment { start_line } = state {
        return Err(PreprocessError::UnterminatedBlockComment { line: start_line });
    }
    Ok(Classified {
        classes,
        start_state,
        end_state,
    })
}

/// Rebuilds a line with string bytes replaced by `_` and comment bytes by a
/// space, preserving byte offsets.
pub fn shadow_line(line: &str, classes: &[Class]) -> String {
    let mut out = Vec::with_capacity(line.len());
    for (b, c) in line.bytes().zip(classes) {
        out.push(match c {
            Class::Code => b,
            Class::Str => b'_',
            Class::Comment => b' ',
        });
    }
    // masked bytes are ASCII and code bytes are copied verbatim, so the
    // result is valid UTF-8
    String::from_utf8(out).expect("shadow preserves UTF-8")
}

/// Scans one line starting from plain code state; returns its shadow and the
/// state in force at end of line.
pub fn scan_single(line: &str) -> (String, LineState) {
    let lines = [line.to_owned()];
    // a single line can never end inside a block comment without erroring,
    // and an unterminated `/*` on one line is reported by the caller's full
    // scan; fall back to an all-comment shadow here
    match classify(&lines) {
        Ok(c) => (shadow_line(line, &c.classes[0]), c.end_state[0]),
        Err(_) => {
            let shadow: String = line.bytes().map(|_| ' ').collect();
            (shadow, LineState::Code)
        }
    }
}

pub fn paren_balance(shadow: &str) -> i32 {
    shadow.bytes().fold(0, |acc, b| match b {
        b'(' => acc + 1,
        b')' => acc - 1,
        _ => acc,
    })
}

pub fn bracket_balance(shadow: &str) -> i32 {
    shadow.bytes().fold(0, |acc, b| match b {
        b'[' => acc + 1,
        b']' => acc - 1,
        _ => acc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lines(src: &[&str]) -> Vec<String> {
        src.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn quotes_inside_line_comment_do_not_open_strings() {
        let ls = lines(&["x = 1 // don't care", "y = 'a'"]);
        let c = classify(&ls).unwrap();
        assert_eq!(shadow_line(&ls[0], &c.classes[0]), "x = 1              ");
        assert_eq!(shadow_line(&ls[1], &c.classes[1]), "y = ___");
    }

    #[test]
    fn comment_markers_inside_strings_stay_string() {
        let ls = lines(&[r#"url = "http://a/b""#]);
        let c = classify(&ls).unwrap();
        assert_eq!(shadow_line(&ls[0], &c.classes[0]), "url = ____________");
    }

    #[test]
    fn block_comment_carries_across_lines() {
        let ls = lines(&["a /* start", "middle", "end */ b"]);
        let c = classify(&ls).unwrap();
        assert_eq!(shadow_line(&ls[0], &c.classes[0]), "a         ");
        assert_eq!(shadow_line(&ls[1], &c.classes[1]), "      ");
        assert_eq!(shadow_line(&ls[2], &c.classes[2]), "       b");
        assert!(matches!(c.start_state[1], LineState::BlockComment { .. }));
        assert_eq!(c.end_state[2], LineState::Code);
    }

    #[test]
    fn unterminated_block_comment_reports_start_line() {
        let ls = lines(&["fine", "x /* open", "never closed"]);
        let err = classify(&ls).unwrap_err();
        assert!(matches!(
            err,
            PreprocessError::UnterminatedBlockComment { line: 2 }
        ));
    }

    #[test]
    fn triple_quoted_string_spans_lines() {
        let ls = lines(&["s = \"\"\"first", "mid ( ; {", "last\"\"\" + x"]);
        let c = classify(&ls).unwrap();
        assert!(matches!(c.end_state[0], LineState::Triple(_)));
        assert_eq!(shadow_line(&ls[1], &c.classes[1]), "_________");
        assert_eq!(shadow_line(&ls[2], &c.classes[2]), "_______ + x");
    }

    #[test]
    fn single_quote_auto_closes_at_eol() {
        let ls = lines(&["bad = 'oops", "next = 1"]);
        let c = classify(&ls).unwrap();
        assert_eq!(c.end_state[0], LineState::Code);
        assert_eq!(shadow_line(&ls[1], &c.classes[1]), "next = 1");
    }

    #[test]
    fn escaped_quote_does_not_close() {
        let ls = lines(&[r#"m = "a\"b" + c"#]);
        let c = classify(&ls).unwrap();
        assert_eq!(shadow_line(&ls[0], &c.classes[0]), "m = ______ + c");
    }

    #[test]
    fn gstring_braces_are_masked() {
        let ls = lines(&[r#"m = "v: ${x.y}" + 1"#]);
        let c = classify(&ls).unwrap();
        assert_eq!(shadow_line(&ls[0], &c.classes[0]), "m = ___________ + 1");
    }

    #[test]
    fn balances_ignore_masked_bytes() {
        let (shadow, _) = scan_single(r#"input("a", "(((")"#);
        assert_eq!(paren_balance(&shadow), 0);
        let (shadow, _) = scan_single(r#"def m = [a: "]]]","#);
        assert_eq!(bracket_balance(&shadow), 1);
    }
}
