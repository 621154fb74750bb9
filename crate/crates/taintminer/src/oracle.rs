//! Brute-force reference checker for mined verdicts.
//!
//! Re-derives an app's tainted flows by direct string scanning and regular
//! expressions, sharing no code with the tokenizer or the miner. The mutant
//! generator takes its ground-truth labels from here, and the test suite
//! compares these verdicts against mined reports. Forwarding methods are
//! summarized one level deep, matching the miner's default.
//!
//! Slow and blunt by design: every line is rescanned from scratch, nothing
//! is cached, and clarity wins over speed everywhere.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;

use crate::taintmodel::{FlowCategory, Label, SinkSet};

/// What the checker concluded about one app.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOutcome {
    pub label: Label,
    pub counts: [u64; 6],
}

impl OracleOutcome {
    fn clean() -> Self {
        OracleOutcome {
            label: Label::NonVulnerable,
            counts: [0; 6],
        }
    }
}

fn word_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[A-Za-z_$][A-Za-z0-9_$]*").unwrap())
}

fn signature_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^\s*(?:(?:private|public|protected|static)\s+)*(?:def|[A-Za-z_][A-Za-z0-9_$]*)\s+([A-Za-z_$][A-Za-z0-9_$]*)\s*\((.*)\)\s*\{$",
        )
        .unwrap()
    })
}

fn lone_word_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r#"^(?:"([A-Za-z_$][A-Za-z0-9_$]*)"|'([A-Za-z_$][A-Za-z0-9_$]*)'|([A-Za-z_$][A-Za-z0-9_$]*))$"#).unwrap()
    })
}

const GUARD_WORDS: &[&str] = &[
    "if", "else", "while", "for", "switch", "catch", "return", "assert", "new", "def",
];

const TIMER_CALLS: &[&str] = &["runIn", "schedule", "subscribe"];

/// Judges one raw app source against a sink list.
pub fn judge(text: &str, sinks: &SinkSet) -> OracleOutcome {
    let scrubbed = scrub_comments(text);
    let units = flatten(&scrubbed);
    let (pref_units, procs) = carve(&units);

    let mut mentions_sink = false;
    'gate: for p in &procs {
        for u in std::iter::once(&p.header).chain(p.body.iter()) {
            if words_of(&mask(u))
                .iter()
                .any(|w| sinks.contains(w))
            {
                mentions_sink = true;
                break 'gate;
            }
        }
    }
    if !mentions_sink {
        return OracleOutcome::clean();
    }

    let sources = sources_from(&pref_units);
    let runs: Vec<ProcRun> = procs.iter().map(|p| interpret(p, &sources)).collect();

    let mut sensitive: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for run in &runs {
        for (idx, param) in run.params.iter().enumerate() {
            let forwards = run.calls.iter().any(|c| {
                !c.synthetic
                    && sinks.contains(&c.callee)
                    && c.arg_words.iter().any(|ws| ws.iter().any(|w| w == param))
            });
            if forwards {
                sensitive.entry(run.name.clone()).or_default().insert(idx);
            }
        }
    }

    let mut counts = [0u64; 6];
    for run in &runs {
        for call in &run.calls {
            if sinks.contains(&call.callee) {
                let mut seen = BTreeSet::new();
                for (_, ident, is_source) in &call.tainted {
                    if !seen.insert(ident.clone()) {
                        continue;
                    }
                    let cat = if *is_source {
                        FlowCategory::ScSn
                    } else {
                        FlowCategory::EScSn
                    };
                    counts[cat.index()] += 1;
                }
                if seen.is_empty() && call.in_tainted_conditional {
                    counts[FlowCategory::SnC.index()] += 1;
                }
            } else if let Some(idxs) = sensitive.get(&call.callee) {
                let mut seen = BTreeSet::new();
                for (ai, ident, is_source) in &call.tainted {
                    if !idxs.contains(ai) || !seen.insert(ident.clone()) {
                        continue;
                    }
                    let cat = if *is_source {
                        FlowCategory::ScESn
                    } else {
                        FlowCategory::EScESn
                    };
                    counts[cat.index()] += 1;
                }
                if seen.is_empty() && call.in_tainted_conditional {
                    counts[FlowCategory::ESnC.index()] += 1;
                }
            }
        }
    }

    let label = if counts.iter().any(|&c| c > 0) {
        Label::Vulnerable
    } else {
        Label::NonVulnerable
    };
    OracleOutcome { label, counts }
}

/// Replaces comment text with spaces, keeping newlines and strings intact.
fn scrub_comments(text: &str) -> String {
    #[derive(PartialEq)]
    enum S {
        Code,
        Line,
        Block,
        Str(char, bool), // quote char, triple
    }
    let mut out = String::with_capacity(text.len());
    let chars: Vec<char> = text.chars().collect();
    let mut st = S::Code;
    let mut interp = 0usize;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match st {
            S::Code => {
                if c == '/' && chars.get(i + 1) == Some(&'/') {
                    st = S::Line;
                    out.push(' ');
                    out.push(' ');
                    i += 2;
                    continue;
                }
                if c == '/' && chars.get(i + 1) == Some(&'*') {
                    st = S::Block;
                    out.push(' ');
                    out.push(' ');
                    i += 2;
                    continue;
                }
                if c == '"' || c == '\'' {
                    let triple = chars.get(i + 1) == Some(&c) && chars.get(i + 2) == Some(&c);
                    st = S::Str(c, triple);
                    interp = 0;
                    if triple {
                        out.push(c);
                        out.push(c);
                        out.push(c);
                        i += 3;
                        continue;
                    }
                }
                out.push(c);
                i += 1;
            }
            S::Line => {
                if c == '\n' {
                    out.push('\n');
                    st = S::Code;
                } else {
                    out.push(' ');
                }
                i += 1;
            }
            S::Block => {
                if c == '*' && chars.get(i + 1) == Some(&'/') {
                    out.push(' ');
                    out.push(' ');
                    st = S::Code;
                    i += 2;
                    continue;
                }
                out.push(if c == '\n' { '\n' } else { ' ' });
                i += 1;
            }
            S::Str(q, triple) => {
                if c == '\\' && i + 1 < chars.len() {
                    out.push(c);
                    out.push(chars[i + 1]);
                    i += 2;
                    continue;
                }
                if q == '"' && c == '$' && chars.get(i + 1) == Some(&'{') {
                    interp += 1;
                    out.push(c);
                    out.push('{');
                    i += 2;
                    continue;
                }
                if c == '}' && interp > 0 {
                    interp -= 1;
                    out.push(c);
                    i += 1;
                    continue;
                }
                if interp == 0 && c == q {
                    if triple {
                        if chars.get(i + 1) == Some(&q) && chars.get(i + 2) == Some(&q) {
                            out.push(q);
                            out.push(q);
                            out.push(q);
                            st = S::Code;
                            i += 3;
                            continue;
                        }
                    } else {
                        st = S::Code;
                    }
                }
                if c == '\n' && !triple {
                    // unterminated one-line literal: close it at the line end
                    st = S::Code;
                }
                out.push(c);
                i += 1;
            }
        }
    }
    out
}

/// Breaks scrubbed text into statement units: one per line, plus extra
/// breaks at top-level `;`, after `{`, and around `}`.
fn flatten(scrubbed: &str) -> Vec<String> {
    let mut units = Vec::new();
    for line in scrubbed.lines() {
        let mut cur = String::new();
        let mut parens = 0i32;
        let chars: Vec<char> = line.chars().collect();
        let mut in_str: Option<(char, bool)> = None;
        let mut interp = 0usize;
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if let Some((q, triple)) = in_str {
                cur.push(c);
                if c == '\\' {
                    if let Some(&n) = chars.get(i + 1) {
                        cur.push(n);
                        i += 2;
                        continue;
                    }
                } else if q == '"' && c == '$' && chars.get(i + 1) == Some(&'{') {
                    interp += 1;
                    cur.push('{');
                    i += 2;
                    continue;
                } else if c == '}' && interp > 0 {
                    interp -= 1;
                } else if interp == 0 && c == q {
                    if triple {
                        if chars.get(i + 1) == Some(&q) && chars.get(i + 2) == Some(&q) {
                            cur.push(q);
                            cur.push(q);
                            in_str = None;
                            i += 3;
                            continue;
                        }
                    } else {
                        in_str = None;
                    }
                }
                i += 1;
                continue;
            }
            match c {
                '"' | '\'' => {
                    let triple = chars.get(i + 1) == Some(&c) && chars.get(i + 2) == Some(&c);
                    in_str = Some((c, triple));
                    interp = 0;
                    cur.push(c);
                    if triple {
                        cur.push(c);
                        cur.push(c);
                        i += 3;
                        continue;
                    }
                }
                '(' | '[' => {
                    parens += 1;
                    cur.push(c);
                }
                ')' | ']' => {
                    parens -= 1;
                    cur.push(c);
                }
                ';' if parens == 0 => {
                    push_unit(&mut units, &mut cur);
                }
                '{' if parens == 0 => {
                    cur.push('{');
                    push_unit(&mut units, &mut cur);
                }
                '}' if parens == 0 => {
                    push_unit(&mut units, &mut cur);
                    units.push("}".to_owned());
                }
                _ => cur.push(c),
            }
            i += 1;
        }
        push_unit(&mut units, &mut cur);
    }
    units
}

fn push_unit(units: &mut Vec<String>, cur: &mut String) {
    let trimmed = cur.trim();
    if !trimmed.is_empty() {
        units.push(trimmed.to_owned());
    }
    cur.clear();
}

/// Replaces string literals with their interpolated identifier words so that
/// only code words remain.
fn mask(unit: &str) -> String {
    let mut out = String::with_capacity(unit.len());
    let chars: Vec<char> = unit.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c != '"' && c != '\'' {
            out.push(c);
            i += 1;
            continue;
        }
        let q = c;
        let triple = chars.get(i + 1) == Some(&q) && chars.get(i + 2) == Some(&q);
        i += if triple { 3 } else { 1 };
        let mut body = String::new();
        while i < chars.len() {
            if chars[i] == '\\' {
                i += 2;
                body.push(' ');
                body.push(' ');
                continue;
            }
            if chars[i] == q {
                if triple {
                    if chars.get(i + 1) == Some(&q) && chars.get(i + 2) == Some(&q) {
                        i += 3;
                        break;
                    }
                } else {
                    i += 1;
                    break;
                }
            }
            body.push(chars[i]);
            i += 1;
        }
        out.push(' ');
        if q == '"' {
            for word in interpolated_words(&body) {
                out.push(' ');
                out.push_str(&word);
            }
        }
        out.push(' ');
    }
    out
}

/// Identifier words used by `${...}` and `$name` interpolations.
fn interpolated_words(body: &str) -> Vec<String> {
    let mut words = Vec::new();
    let chars: Vec<char> = body.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] != '$' {
            i += 1;
            continue;
        }
        if chars.get(i + 1) == Some(&'{') {
            let start = i + 2;
            let mut end = start;
            while end < chars.len() && chars[end] != '}' {
                end += 1;
            }
            harvest(&chars[start..end], &mut words);
            i = end + 1;
            continue;
        }
        let start = i + 1;
        let mut end = start;
        while end < chars.len()
            && (chars[end].is_ascii_alphanumeric() || chars[end] == '_' || chars[end] == '.')
        {
            end += 1;
        }
        if end > start && !chars[start].is_ascii_digit() {
            harvest(&chars[start..end], &mut words);
        }
        i = end.max(i + 1);
    }
    words
}

fn harvest(expr: &[char], words: &mut Vec<String>) {
    let text: String = expr
        .iter()
        .map(|&c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                ' '
            }
        })
        .collect();
    for w in text.split_whitespace() {
        if !w.chars().next().unwrap().is_ascii_digit() {
            words.push(w.to_owned());
        }
    }
}

fn words_of(masked: &str) -> Vec<String> {
    word_re()
        .find_iter(masked)
        .map(|m| m.as_str().to_owned())
        .collect()
}

#[derive(Debug)]
struct Proc {
    name: String,
    params: Vec<String>,
    header: String,
    body: Vec<String>,
}

/// Splits units into the preferences block and the method blocks.
fn carve(units: &[String]) -> (Vec<String>, Vec<Proc>) {
    let mut prefs = Vec::new();
    let mut procs = Vec::new();
    let mut i = 0;
    while i < units.len() {
        let unit = &units[i];
        if unit == "preferences {" || unit.trim_end() == "preferences {" {
            let (body, next) = block_body(units, i);
            prefs = body;
            i = next;
            continue;
        }
        if let Some(caps) = signature_re().captures(&mask(unit)) {
            let name = caps.get(1).unwrap().as_str().to_owned();
            let params = parse_params(caps.get(2).unwrap().as_str());
            let (body, next) = block_body(units, i);
            procs.push(Proc {
                name,
                params,
                header: unit.clone(),
                body,
            });
            i = next;
            continue;
        }
        i += 1;
    }
    (prefs, procs)
}

/// Units belonging to the block opened at `start`, plus the index after it.
fn block_body(units: &[String], start: usize) -> (Vec<String>, usize) {
    let mut depth = brace_delta(&units[start]);
    let mut body = Vec::new();
    let mut i = start + 1;
    while depth > 0 && i < units.len() {
        depth += brace_delta(&units[i]);
        body.push(units[i].clone());
        i += 1;
    }
    (body, i)
}

fn brace_delta(unit: &str) -> i32 {
    let masked = mask(unit);
    let mut d = 0i32;
    for c in masked.chars() {
        match c {
            '{' => d += 1,
            '}' => d -= 1,
            _ => {}
        }
    }
    d
}

fn parse_params(raw: &str) -> Vec<String> {
    split_top_commas(raw)
        .into_iter()
        .filter_map(|p| {
            let left = p.split('=').next().unwrap_or("");
            words_of(left).into_iter().next_back()
        })
        .collect()
}

/// Splits on commas outside parentheses and brackets.
fn split_top_commas(raw: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for c in raw.chars() {
        match c {
            '(' | '[' => {
                depth += 1;
                cur.push(c);
            }
            ')' | ']' => {
                depth -= 1;
                cur.push(c);
            }
            ',' if depth == 0 => parts.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    if !cur.trim().is_empty() || !parts.is_empty() {
        parts.push(cur);
    }
    parts
}

/// Source names declared by `input` units inside preferences.
fn sources_from(pref_units: &[String]) -> BTreeSet<String> {
    let mut sources = BTreeSet::new();
    for unit in pref_units {
        let Some(rest) = unit.strip_prefix("input") else {
            continue;
        };
        if rest
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
        {
            continue; // a longer word such as inputValue
        }
        let rest = rest.trim_start();
        let args_raw = match rest.strip_prefix('(') {
            Some(inner) => inner.trim_end().trim_end_matches(')'),
            None => rest,
        };
        let args = split_top_commas(args_raw);
        let first_word = |a: &str| {
            let t = a.trim_start();
            word_re()
                .find(t)
                .filter(|m| m.start() == 0)
                .map(|m| m.as_str().to_owned())
        };
        let keyword = |a: &str| {
            let t = a.trim_start();
            first_word(t).is_some_and(|w| t[w.len()..].trim_start().starts_with(':'))
        };
        let all_keyword = !args.is_empty() && args.iter().all(|a| keyword(a));
        let picked = if all_keyword {
            args.iter()
                .find(|a| first_word(a).as_deref() == Some("name"))
                .and_then(|a| a.split_once(':'))
                .map(|(_, v)| v.trim())
        } else {
            args.iter().find(|a| !keyword(a)).map(|a| a.trim())
        };
        if let Some(p) = picked {
            let name = p.trim_matches(|c| c == '"' || c == '\'').trim();
            if !name.is_empty() && word_re().find(name).is_some_and(|m| m.as_str() == name) {
                sources.insert(name.to_owned());
            }
        }
    }
    sources
}

#[derive(Debug)]
struct CallRecord {
    callee: String,
    arg_words: Vec<Vec<String>>,
    tainted: Vec<(usize, String, bool)>,
    in_tainted_conditional: bool,
    synthetic: bool,
}

#[derive(Debug)]
struct ProcRun {
    name: String,
    params: Vec<String>,
    calls: Vec<CallRecord>,
}

struct Frame {
    conditional: bool,
    tainted: bool,
    trigger: Option<String>,
}

/// Replays a method body unit by unit, tracking derived taint and
/// collecting every call with the taint state in force at its own unit.
fn interpret(proc: &Proc, sources: &BTreeSet<String>) -> ProcRun {
    let mut derived: BTreeSet<String> = BTreeSet::new();
    let mut stack: Vec<Frame> = Vec::new();
    let mut pending: Option<(bool, Option<String>)> = None;
    let mut calls = Vec::new();

    for unit in &proc.body {
        if unit == "}" {
            pending = match stack.pop() {
                Some(f) if f.conditional => Some((f.tainted, f.trigger)),
                _ => None,
            };
            continue;
        }
        let inherited = pending.take();
        let masked = mask(unit);

        record_calls(&masked, sources, &derived, &stack, &mut calls);
        apply_assignment(&masked, sources, &mut derived);

        if masked.trim_end().ends_with('{') {
            stack.push(open_frame(&masked, sources, &derived, inherited));
        }
    }

    ProcRun {
        name: proc.name.clone(),
        params: proc.params.clone(),
        calls,
    }
}

fn open_frame(
    masked: &str,
    sources: &BTreeSet<String>,
    derived: &BTreeSet<String>,
    inherited: Option<(bool, Option<String>)>,
) -> Frame {
    let head = words_of(masked).into_iter().next().unwrap_or_default();
    if head != "if" && head != "else" {
        return Frame {
            conditional: false,
            tainted: false,
            trigger: None,
        };
    }
    let guard = match masked.find('(') {
        Some(open) => match close_of(masked, open) {
            Some(close) => &masked[open + 1..close],
            None => &masked[open + 1..],
        },
        None => "",
    };
    let own = words_of(guard)
        .into_iter()
        .find(|w| sources.contains(w) || derived.contains(w));
    let (inh_taint, inh_trigger) = match (head.as_str(), inherited) {
        ("else", Some((t, trig))) => (t, trig),
        _ => (false, None),
    };
    Frame {
        conditional: true,
        tainted: own.is_some() || inh_taint,
        trigger: own.or(inh_trigger),
    }
}

/// Byte offset of the `)` matching the `(` at `open`.
fn close_of(masked: &str, open: usize) -> Option<usize> {
    let mut depth = 0i32;
    for (pos, c) in masked.char_indices().skip_while(|&(p, _)| p < open) {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(pos);
                }
            }
            _ => {}
        }
    }
    None
}

fn record_calls(
    masked: &str,
    sources: &BTreeSet<String>,
    derived: &BTreeSet<String>,
    stack: &[Frame],
    calls: &mut Vec<CallRecord>,
) {
    let in_tainted = stack.iter().any(|f| f.conditional && f.tainted);
    for m in word_re().find_iter(masked) {
        let name = m.as_str();
        if GUARD_WORDS.contains(&name) {
            continue;
        }
        let after = masked[m.end()..].trim_start();
        if !after.starts_with('(') {
            continue;
        }
        let open = m.end() + (masked[m.end()..].len() - after.len());
        let Some(close) = close_of(masked, open) else {
            continue;
        };
        let args = split_top_commas(&masked[open + 1..close]);
        let arg_words: Vec<Vec<String>> = args.iter().map(|a| words_of(a)).collect();
        let mut tainted = Vec::new();
        let mut seen = BTreeSet::new();
        for (ai, ws) in arg_words.iter().enumerate() {
            for w in ws {
                let is_source = sources.contains(w);
                if (is_source || derived.contains(w)) && seen.insert((ai, w.clone())) {
                    tainted.push((ai, w.clone(), is_source));
                }
            }
        }
        let is_timer = TIMER_CALLS.contains(&name);
        calls.push(CallRecord {
            callee: name.to_owned(),
            arg_words,
            tainted,
            in_tainted_conditional: in_tainted,
            synthetic: false,
        });
        if is_timer {
            if let Some(handler) = args.iter().rev().find_map(|a| {
                lone_word_re().captures(a.trim()).and_then(|c| {
                    c.get(1)
                        .or_else(|| c.get(2))
                        .or_else(|| c.get(3))
                        .map(|g| g.as_str().to_owned())
                })
            }) {
                calls.push(CallRecord {
                    callee: handler,
                    arg_words: Vec::new(),
                    tainted: Vec::new(),
                    in_tainted_conditional: in_tainted,
                    synthetic: true,
                });
            }
        }
    }
}

/// Applies the first top-level assignment of the unit to the derived set.
fn apply_assignment(masked: &str, sources: &BTreeSet<String>, derived: &mut BTreeSet<String>) {
    let chars: Vec<char> = masked.chars().collect();
    let mut depth = 0i32;
    for i in 0..chars.len() {
        match chars[i] {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            '=' if depth == 0 => {
                let prev = chars[..i].iter().rev().find(|c| !c.is_whitespace());
                let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
                if matches!(prev, Some('=') | Some('!') | Some('<') | Some('>'))
                    || next == Some(&'=')
                {
                    continue;
                }
                let compound = matches!(prev, Some('+') | Some('-') | Some('*') | Some('/'));
                let left_end = if compound {
                    masked[..i].rfind(|c: char| "+-*/".contains(c)).unwrap_or(0)
                } else {
                    i
                };
                let prev_word_is_target = masked[..left_end]
                    .trim_end()
                    .chars()
                    .next_back()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$');
                if !prev_word_is_target {
                    return;
                }
                let Some(target) = words_of(&masked[..left_end]).into_iter().next_back() else {
                    return;
                };
                let rhs = &masked[i + 1..];
                let tainted = words_of(rhs)
                    .iter()
                    .any(|w| sources.contains(w) || derived.contains(w));
                if tainted {
                    derived.insert(target);
                } else if !compound {
                    derived.remove(&target);
                }
                return;
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowsminer;
    use crate::preprocessor::{normalize, RawSource};

    const TEMPLATE: &str = include_str!("../tests/fixtures/template.groovy");
    const FLOW_CASE: &str = include_str!("../tests/fixtures/flow_sensitive.groovy");
    const PATH_CASE: &str = include_str!("../tests/fixtures/path_sensitive.groovy");
    const CONTEXT_CASE: &str = include_str!("../tests/fixtures/context_sensitive.groovy");

    fn counts(text: &str) -> [u64; 6] {
        judge(text, &SinkSet::default_set()).counts
    }

    #[test]
    fn template_has_one_forwarded_flow() {
        let out = judge(TEMPLATE, &SinkSet::default_set());
        assert_eq!(out.counts, [0, 0, 0, 1, 0, 0]);
        assert_eq!(out.label, Label::Vulnerable);
    }

    #[test]
    fn assignment_order_matters() {
        assert_eq!(counts(FLOW_CASE), [0, 1, 0, 0, 0, 0]);
        let swapped = FLOW_CASE.replace(
            "    def var1 = \"all quiet\"\n    var1 = phone\n",
            "    def var1 = phone\n    var1 = \"all quiet\"\n",
        );
        assert_eq!(counts(&swapped), [0; 6]);
    }

    #[test]
    fn tainted_guard_flags_clean_sink() {
        assert_eq!(counts(PATH_CASE), [0, 0, 0, 0, 1, 0]);
        let clean = PATH_CASE.replace("if (awayMode) {", "if (evt) {");
        assert_eq!(counts(&clean), [0; 6]);
    }

    #[test]
    fn argument_position_gates_forwarded_flow() {
        assert_eq!(counts(CONTEXT_CASE), [0, 0, 0, 1, 0, 0]);
    }

    #[test]
    fn repeated_argument_counts_once() {
        let text = "preferences {\n  input(\"phone\", \"phone\")\n}\ndef go() {\n  sendSms(phone, phone)\n}\n";
        assert_eq!(counts(text), [1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn direct_flow_wins_over_conditional() {
        let text = "preferences {\n  input(\"secret\", \"text\")\n}\ndef go() {\n  if (secret) {\n    sendPush(secret)\n  }\n}\n";
        assert_eq!(counts(text), [1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn else_inherits_guard() {
        let text = "preferences {\n  input(\"secret\", \"text\")\n}\ndef go() {\n  if (secret) {\n    log.debug \"on\"\n  } else {\n    sendPush(\"off\")\n  }\n}\n";
        assert_eq!(counts(text), [0, 0, 0, 0, 1, 0]);
    }

    #[test]
    fn interpolation_carries_taint() {
        let text = "preferences {\n  input(\"phone\", \"phone\")\n}\ndef go() {\n  sendSms(\"dial ${phone} now\")\n}\n";
        assert_eq!(counts(text), [1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn single_quotes_do_not_interpolate() {
        let text = "preferences {\n  input(\"phone\", \"phone\")\n}\ndef go() {\n  sendSms('dial ${phone} now')\n}\n";
        assert_eq!(counts(text), [0; 6]);
    }

    #[test]
    fn sink_in_comment_or_string_stays_quiet() {
        let commented = "def go() {\n  // sendSms(phone)\n  log.debug 'x'\n}\n";
        assert_eq!(counts(commented), [0; 6]);
        let quoted = "def go() {\n  log.debug 'try sendSms later'\n}\n";
        assert_eq!(counts(quoted), [0; 6]);
    }

    #[test]
    fn kill_clears_derived_taint() {
        let text = "preferences {\n  input(\"phone\", \"phone\")\n}\ndef go() {\n  def v = phone\n  v = \"quiet\"\n  sendSms(v)\n}\n";
        assert_eq!(counts(text), [0; 6]);
    }

    #[test]
    fn one_line_braced_conditional_is_unfolded() {
        let text = "preferences {\n  input(\"secret\", \"text\")\n}\ndef go() {\n  if (secret) { sendPush(\"hi\") }\n}\n";
        assert_eq!(counts(text), [0, 0, 0, 0, 1, 0]);
    }

    #[test]
    fn timer_handler_inside_tainted_guard_counts() {
        let text = "preferences {\n  input(\"secret\", \"text\")\n}\ndef go() {\n  if (secret) {\n    runIn(60, fire)\n  }\n}\ndef fire(msg) {\n  sendPush(msg)\n}\n";
        assert_eq!(counts(text), [0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn verdicts_match_the_miner_on_fixtures() {
        let sinks = SinkSet::default_set();
        for (name, text) in [
            ("template", TEMPLATE),
            ("flow", FLOW_CASE),
            ("path", PATH_CASE),
            ("context", CONTEXT_CASE),
        ] {
            let mined = flowsminer::mine(
                &normalize(&RawSource::from_text(name, text)).unwrap(),
                &sinks,
            );
            let judged = judge(text, &sinks);
            assert_eq!(judged.counts, mined.flow_counts(), "app {name}");
            assert_eq!(
                judged.label == Label::Vulnerable,
                mined.is_vulnerable(),
                "app {name}"
            );
        }
    }
}
