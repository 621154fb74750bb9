//! Shared helpers for the integration suites: a seeded generator of small
//! synthetic apps whose leak behavior is decided by the statements drawn,
//! not recorded anywhere, so the miner and the reference checker can be
//! compared on programs neither has seen.

// Each suite pulls a different subset of these helpers.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const CLEAN_WORDS: &[&str] = &["steady", "idle", "ready", "quiet", "synced"];
const SINKS: &[&str] = &["sendSms", "sendPush", "sendNotification", "httpPost"];

/// One synthetic app: handler statements are drawn from templates covering
/// direct leaks, carried leaks, kills, reorders, tainted and clean
/// conditionals, one-hop indirection, multi-argument calls, and fully
/// benign bodies. At most 30 lines each.
pub fn synth_app(rng: &mut ChaCha8Rng, idx: usize) -> (String, String) {
    let name = format!("synth_{idx:03}");
    let with_phone = rng.gen_bool(0.5);
    let uses_relay = rng.gen_bool(0.6);
    let sink = *SINKS.choose(rng).expect("sink pool is non-empty");

    let mut body: Vec<String> = Vec::new();
    // Local carriers seen so far, with the taint each had when declared;
    // reassignments below update this view exactly as a reader would.
    let mut carriers: Vec<(String, bool)> = Vec::new();
    let statements = rng.gen_range(4..=9);
    for _ in 0..statements {
        let template = rng.gen_range(0..10);
        match template {
            0 => {
                let v = format!("v{}", carriers.len());
                body.push(format!("    def {v} = secret"));
                carriers.push((v, true));
            }
            1 => {
                let v = format!("v{}", carriers.len());
                let w = CLEAN_WORDS.choose(rng).expect("word pool is non-empty");
                body.push(format!("    def {v} = \"{w}\""));
                carriers.push((v, false));
            }
            2 => {
                if let Some(i) = pick(rng, carriers.len()) {
                    let taint = rng.gen_bool(0.5);
                    if taint {
                        body.push(format!("    {} = secret", carriers[i].0));
                    } else {
                        let w = CLEAN_WORDS.choose(rng).expect("word pool is non-empty");
                        body.push(format!("    {} = \"{w}\"", carriers[i].0));
                    }
                    carriers[i].1 = taint;
                }
            }
            3 => {
                if let Some(i) = pick(rng, carriers.len()) {
                    body.push(format!("    {sink}({})", carriers[i].0));
                }
            }
            4 => body.push(format!("    {sink}(secret)")),
            5 => {
                let w = CLEAN_WORDS.choose(rng).expect("word pool is non-empty");
                body.push(format!("    {sink}(\"{w}\")"));
            }
            6 => {
                let arg = match pick(rng, carriers.len()) {
                    Some(i) if rng.gen_bool(0.7) => carriers[i].0.clone(),
                    _ => "secret".into(),
                };
                if with_phone {
                    body.push(format!("    {sink}(phone, {arg})"));
                } else {
                    body.push(format!("    {sink}(\"note\", {arg})"));
                }
            }
            7 if uses_relay => {
                let arg = match pick(rng, carriers.len()) {
                    Some(i) if rng.gen_bool(0.6) => carriers[i].0.clone(),
                    _ if rng.gen_bool(0.5) => "secret".into(),
                    _ => "\"ok\"".into(),
                };
                body.push(format!("    relay({arg})"));
            }
            8 => {
                let guard = match pick(rng, carriers.len()) {
                    Some(i) if rng.gen_bool(0.6) => carriers[i].0.clone(),
                    _ if rng.gen_bool(0.5) => "secret".into(),
                    _ => "evt".into(),
                };
                body.push(format!("    if ({guard}) {{"));
                let inner = rng.gen_range(0..3);
                match inner {
                    0 => {
                        let w = CLEAN_WORDS.choose(rng).expect("word pool is non-empty");
                        body.push(format!("        {sink}(\"{w}\")"));
                    }
                    1 if uses_relay => body.push("        relay(\"ping\")".into()),
                    _ => body.push("        log.debug \"branch taken\"".into()),
                }
                body.push("    }".into());
            }
            _ => match pick(rng, carriers.len()) {
                Some(i) => body.push(format!("    log.debug {}", carriers[i].0)),
                None => body.push("    log.info \"nothing to do\"".into()),
            },
        }
        if body.len() >= 11 {
            break;
        }
    }

    let mut text = String::new();
    text.push_str(&format!(
        "definition(name: \"Synth {idx}\", namespace: \"synth\")\n"
    ));
    text.push_str("preferences {\n    section {\n        input \"secret\", \"text\"\n");
    if with_phone {
        text.push_str("        input \"phone\", \"phone\"\n");
    }
    text.push_str("    }\n}\n");
    text.push_str("def installed() {\n    subscribe(location, \"mode\", handler)\n}\n");
    text.push_str("def handler(evt) {\n");
    for line in &body {
        text.push_str(line);
        text.push('\n');
    }
    text.push_str("}\n");
    if uses_relay {
        text.push_str(&format!("def relay(p) {{\n    {sink}(p)\n}}\n"));
    }
    (name, text)
}

fn pick(rng: &mut ChaCha8Rng, len: usize) -> Option<usize> {
    if len == 0 {
        None
    } else {
        Some(rng.gen_range(0..len))
    }
}

pub fn synth_corpus(n: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| synth_app(&mut rng, i)).collect()
}

/// Comment-insensitive token multiset: string literals stay single tokens,
/// `;` is dropped (statement splitting deletes the separators it acts on).
pub fn token_multiset(text: &str) -> BTreeMap<String, u64> {
    let mut tokens = BTreeMap::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() || c == ';' {
            i += 1;
        } else if c == '"' || c == '\'' {
            let quote = c;
            let start = i;
            i += 1;
            while i < bytes.len() {
                if bytes[i] == b'\\' {
                    i += 2;
                } else if bytes[i] as char == quote {
                    i += 1;
                    break;
                } else {
                    i += 1;
                }
            }
            *tokens.entry(text[start..i.min(text.len())].to_string()).or_insert(0) += 1;
        } else if c.is_alphanumeric() || c == '_' || c == '$' {
            let start = i;
            while i < bytes.len()
                && ((bytes[i] as char).is_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'$')
            {
                i += 1;
            }
            *tokens.entry(text[start..i].to_string()).or_insert(0) += 1;
        } else {
            *tokens.entry(c.to_string()).or_insert(0) += 1;
            i += 1;
        }
    }
    tokens
}
