//! Generative checks of the preprocessor invariants: normalizing twice
//! changes nothing, and nothing but comments, line boundaries, and `;`
//! separators is ever added or removed. Inputs are random app-shaped
//! sources built from deliberately awkward pieces: comment markers and
//! braces inside strings, semicolon chains, single-line conditionals,
//! multi-line input calls and map literals, block comments across lines.

mod common;

use proptest::prelude::*;

use taintminer::preprocessor::{normalize, strip_comments, RawSource};

const KEYWORDS: &[&str] = &[
    "if", "else", "for", "while", "def", "do", "try", "catch", "finally", "new", "return",
];

fn word() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9]{0,5}".prop_filter("keywords make unbalanced templates", |w| {
        !KEYWORDS.contains(&w.as_str())
    })
}

fn tricky_string() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("all quiet".to_string()),
        Just("a; b; c".to_string()),
        Just("open { close }".to_string()),
        Just("see // not a comment".to_string()),
        Just("mid /* not a comment */ end".to_string()),
        Just("it's here".to_string()),
        word().prop_map(|w| format!("${{{w}}} ready")),
    ]
}

/// One logical statement as the physical lines it occupies.
fn statement() -> impl Strategy<Value = Vec<String>> {
    prop_oneof![
        (word(), tricky_string()).prop_map(|(v, s)| vec![format!("    def {v} = \"{s}\"")]),
        (word(), word()).prop_map(|(a, b)| vec![format!("    {a} = {b}")]),
        (word(), tricky_string()).prop_map(|(f, s)| vec![format!("    {f}(\"{s}\")")]),
        tricky_string().prop_map(|s| vec![format!("    log.debug \"{s}\"")]),
        (word(), word(), tricky_string())
            .prop_map(|(g, f, s)| vec![format!("    if ({g}) {{ {f}(\"{s}\") }}")]),
        (word(), word()).prop_map(|(g, f)| vec![
            format!("    if ({g}) {{"),
            format!("        {f}()"),
            "    }".to_string(),
            "    else {".to_string(),
            "        unschedule()".to_string(),
            "    }".to_string(),
        ]),
        (word(), word()).prop_map(|(a, b)| vec![format!("    {a}(); {b}()")]),
        word().prop_map(|v| vec![
            format!("    def {v} = [one: 1,"),
            "        two: 2]".to_string(),
        ]),
        Just(vec![
            "    /* a note".to_string(),
            "       spanning lines */ state.n = 0".to_string(),
        ]),
        Just(vec![
            "    for (i = 0; i < 3; i++) {".to_string(),
            "        poke()".to_string(),
            "    }".to_string(),
        ]),
        word().prop_map(|f| vec![format!("    {f}() // trailing note")]),
    ]
}

fn messy_app() -> impl Strategy<Value = String> {
    (
        word(),
        any::<bool>(),
        prop::collection::vec(statement(), 1..8),
        prop::collection::vec(statement(), 0..5),
    )
        .prop_map(|(source, multiline_input, handler, helper)| {
            let mut text = String::new();
            text.push_str("/** Generated for the invariant checks. */\n");
            text.push_str("definition(name: \"Messy\", namespace: \"generated\")\n\n");
            text.push_str("preferences {\n    section {\n");
            if multiline_input {
                text.push_str(&format!(
                    "        input(\"{source}\",\n            \"text\")\n"
                ));
            } else {
                text.push_str(&format!("        input \"{source}\", \"text\"\n"));
            }
            text.push_str("    }\n}\n\n");
            text.push_str("def handler(evt) {\n");
            for lines in &handler {
                for line in lines {
                    text.push_str(line);
                    text.push('\n');
                }
            }
            text.push_str("}\n");
            if !helper.is_empty() {
                text.push_str("\ndef helper() {\n");
                for lines in &helper {
                    for line in lines {
                        text.push_str(line);
                        text.push('\n');
                    }
                }
                text.push_str("}\n");
            }
            text
        })
}

proptest! {
    #[test]
    fn normalizing_twice_changes_nothing(text in messy_app()) {
        let norm = normalize(&RawSource::from_text("generated", &text))
            .expect("generated apps are balanced");
        let again = normalize(&norm.to_raw()).expect("normalized output still parses");
        prop_assert_eq!(&again.lines, &norm.lines);
    }

    #[test]
    fn normalizing_conserves_tokens(text in messy_app()) {
        let raw = RawSource::from_text("generated", &text);
        let norm = normalize(&raw).expect("generated apps are balanced");
        let uncommented = strip_comments(&raw).expect("comment pass succeeds");
        prop_assert_eq!(
            common::token_multiset(&uncommented.text()),
            common::token_multiset(&norm.text())
        );
    }
}
