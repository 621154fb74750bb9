//! Tainted-flow mining over tokenized methods.
//!
//! ```text
//! normalized source
//!   -> tokenize/split          (lexer)
//!   -> sink-token gate         (skip apps that never mention a sink)
//!   -> find_sources            (input declarations in preferences)
//!   -> analyze_method          (extended sources + every invocation)
//!   -> find_extended_sinks     (params forwarded to sinks)
//!   -> flows                   (six categories)
//! ```
//!
//! Taint is tracked lexically and linearly: an assignment whose right side
//! mentions a tainted name taints its target, a plain reassignment to a clean
//! value kills it, and each call is judged against the taint state in force
//! on its own line. A conditional is tainted when its guard mentions a source
//! or extended source; its `else` branch inherits the guard.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::lexer::{self, MethodChunk, TokenLine};
use crate::preprocessor::NormalizedSource;
use crate::taintmodel::{
    ExtendedSinkEntry, FlowCategory, MethodInvocation, SinkSet, SourceSet, TaintedFlow,
};

/// Names that look like calls but never are.
const KEYWORDS: &[&str] = &[
    "if", "else", "while", "for", "switch", "catch", "return", "assert", "new", "def",
];

/// Calls that dispatch to a handler named by an argument.
const DISPATCHERS: &[&str] = &["runIn", "schedule", "subscribe"];

/// Everything mining learned about one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodData {
    pub name: String,
    pub signature: String,
    pub params: Vec<String>,
    pub ext_sources: BTreeSet<String>,
    pub invocations: Vec<MethodInvocation>,
}

/// Options for [`mine_with`].
#[derive(Debug, Clone, Default)]
pub struct MineOptions {
    /// Chase extended sinks through further forwarding methods to a fixpoint.
    pub transitive: bool,
}

/// Full mining result for one app.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinerReport {
    #[serde(rename = "app")]
    pub app_name: String,
    pub sources: SourceSet,
    #[serde(skip)]
    pub all_methods: Vec<MethodData>,
    pub extended_sinks: Vec<ExtendedSinkEntry>,
    pub flows: Vec<TaintedFlow>,
    /// Wall-clock mining time; reported on the console, kept out of
    /// serialized reports so identical inputs give identical bytes.
    #[serde(skip)]
    pub elapsed_ms: f64,
}

impl MinerReport {
    /// Flow totals in category order.
    pub fn flow_counts(&self) -> [u64; 6] {
        let mut counts = [0u64; 6];
        for f in &self.flows {
            counts[f.category.index()] += 1;
        }
        counts
    }

    pub fn is_vulnerable(&self) -> bool {
        !self.flows.is_empty()
    }
}

/// Reads source identifiers off the `input` lines of the preferences block.
/// The first positional argument names the source; with keyword arguments
/// only, the `name:` value does.
pub fn find_sources(preferences: Option<&MethodChunk>) -> SourceSet {
    let mut sources = SourceSet::new();
    let Some(chunk) = preferences else {
        return sources;
    };
    for line in std::iter::once(&chunk.signature_tokens).chain(chunk.body.iter()) {
        if line.first().map(String::as_str) != Some("input") {
            continue;
        }
        let args = input_args(line);
        if args.is_empty() {
            log::warn!("malformed input line skipped: {:?}", line);
            continue;
        }
        let keyword_only = args.iter().all(|a| is_keyword_arg(a));
        let name = if keyword_only {
            args.iter()
                .find(|a| a.first().map(String::as_str) == Some("name"))
                .and_then(|a| a.get(2))
                .map(|t| unquote(t).to_owned())
        } else {
            args.iter()
                .find(|a| !is_keyword_arg(a))
                .and_then(|a| a.first())
                .map(|t| unquote(t).to_owned())
        };
        match name {
            Some(n) if !n.is_empty() => sources.insert(n),
            _ => log::warn!("input line without a usable name skipped: {:?}", line),
        }
    }
    sources
}

fn is_keyword_arg(arg: &[String]) -> bool {
    arg.len() >= 2 && is_ident(&arg[0]) && arg[1] == ":"
}

/// Argument tokens of an `input` line, parenthesized or not.
fn input_args(line: &TokenLine) -> Vec<Vec<String>> {
    if line.get(1).map(String::as_str) == Some("(") {
        match matching_paren(line, 1) {
            Some(close) => split_args(&line[2..close]),
            None => Vec::new(),
        }
    } else {
        split_args(&line[1..])
    }
}

fn unquote(t: &str) -> &str {
    for q in ["\"\"\"", "'''", "\"", "'"] {
        if t.len() >= 2 * q.len() && t.starts_with(q) && t.ends_with(q) {
            return &t[q.len()..t.len() - q.len()];
        }
    }
    t
}

fn is_ident(t: &str) -> bool {
    let mut chars = t.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '$' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
}

/// Index of the `)` matching the `(` at `open`, scanning token-wise.
fn matching_paren(tokens: &[String], open: usize) -> Option<usize> {
    let mut depth = 0i32;
    for (i, t) in tokens.iter().enumerate().skip(open) {
        match t.as_str() {
            "(" => depth += 1,
            ")" => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Splits tokens on commas outside nested parens/brackets.
fn split_args(tokens: &[String]) -> Vec<Vec<String>> {
    let mut args = Vec::new();
    let mut cur = Vec::new();
    let mut depth = 0i32;
    for t in tokens {
        match t.as_str() {
            "(" | "[" => {
                depth += 1;
                cur.push(t.clone());
            }
            ")" | "]" => {
                depth -= 1;
                cur.push(t.clone());
            }
            "," if depth == 0 => args.push(std::mem::take(&mut cur)),
            _ => cur.push(t.clone()),
        }
    }
    if !cur.is_empty() {
        args.push(cur);
    }
    args
}

#[derive(Debug)]
struct Block {
    conditional: bool,
    tainted: bool,
    trigger: Option<String>,
}

/// Walks one method body: builds its extended-source set line by line and
/// records every invocation together with the taint state at its own line.
pub fn analyze_method(chunk: &MethodChunk, sources: &SourceSet) -> MethodData {
    let params = parse_params(&chunk.signature_tokens);
    let mut ext: BTreeSet<String> = BTreeSet::new();
    let mut blocks: Vec<Block> = Vec::new();
    let mut pending_else: Option<(bool, Option<String>)> = None;
    let mut invocations = Vec::new();

    // calls written inside the signature (e.g. default parameter values)
    scan_invocations(
        &chunk.signature_tokens,
        chunk.start_line,
        chunk,
        sources,
        &ext,
        &blocks,
        &mut invocations,
        true,
    );

    for (k, line) in chunk.body.iter().enumerate() {
        let line_no = chunk.start_line + 1 + k as u32;
        if line.is_empty() {
            continue;
        }
        if line[0] == "}" {
            pending_else = match blocks.pop() {
                Some(b) if b.conditional => Some((b.tainted, b.trigger)),
                _ => None,
            };
            continue;
        }
        let inherited = pending_else.take();

        scan_invocations(
            line,
            line_no,
            chunk,
            sources,
            &ext,
            &blocks,
            &mut invocations,
            false,
        );
        apply_assignment(line, sources, &mut ext);

        if line.last().map(String::as_str) == Some("{") {
            blocks.push(open_block(line, sources, &ext, inherited));
        }
    }

    MethodData {
        name: chunk.method_name.clone(),
        signature: chunk.signature_tokens.join(" "),
        params,
        ext_sources: ext,
        invocations,
    }
}

/// Parameter names between the parens of a signature; type prefixes and
/// default values are dropped.
fn parse_params(signature: &TokenLine) -> Vec<String> {
    let Some(open) = signature.iter().position(|t| t == "(") else {
        return Vec::new();
    };
    let Some(close) = matching_paren(signature, open) else {
        return Vec::new();
    };
    split_args(&signature[open + 1..close])
        .into_iter()
        .filter_map(|arg| {
            let upto = arg.iter().position(|t| t == "=").unwrap_or(arg.len());
            arg[..upto]
                .iter()
                .rev()
                .find(|t| is_ident(t)).cloned()
        })
        .collect()
}

fn open_block(
    line: &TokenLine,
    sources: &SourceSet,
    ext: &BTreeSet<String>,
    inherited: Option<(bool, Option<String>)>,
) -> Block {
    let head = line[0].as_str();
    if head == "if" || head == "else" {
        let cond = condition_tokens(line);
        let own = cond
            .iter()
            .find(|t| is_ident(t) && (sources.contains(t) || ext.contains(t.as_str())))
            .cloned();
        let (inherit_tainted, inherit_trigger) = match (head, inherited) {
            ("else", Some((t, trig))) => (t, trig),
            _ => (false, None),
        };
        Block {
            conditional: true,
            tainted: own.is_some() || inherit_tainted,
            trigger: own.or(inherit_trigger),
        }
    } else {
        Block {
            conditional: false,
            tainted: false,
            trigger: None,
        }
    }
}

/// Tokens inside the guard parens of an `if`/`else if` line.
fn condition_tokens(line: &TokenLine) -> Vec<String> {
    let Some(open) = line.iter().position(|t| t == "(") else {
        return Vec::new();
    };
    match matching_paren(line, open) {
        Some(close) => line[open + 1..close].to_vec(),
        None => line[open + 1..].to_vec(),
    }
}

/// Applies the gen/kill rule of a top-level assignment on this line.
fn apply_assignment(line: &TokenLine, sources: &SourceSet, ext: &mut BTreeSet<String>) {
    let Some((idx, compound)) = assignment_index(line) else {
        return;
    };
    let target_pos = if compound { idx - 2 } else { idx - 1 };
    let Some(target) = line.get(target_pos).filter(|t| is_ident(t)) else {
        return;
    };
    let val = &line[idx + 1..];
    let tainted = val
        .iter()
        .any(|t| is_ident(t) && (sources.contains(t) || ext.contains(t.as_str())));
    if tainted {
        ext.insert(target.clone());
    } else if !compound {
        ext.remove(target.as_str());
    }
}

/// Position of a top-level plain `=` (not ==, !=, <=, >=); reports whether a
/// `+= -= *= /=` style compound operator precedes it.
fn assignment_index(line: &TokenLine) -> Option<(usize, bool)> {
    let mut depth = 0i32;
    for (i, t) in line.iter().enumerate() {
        match t.as_str() {
            "(" | "[" => depth += 1,
            ")" | "]" => depth -= 1,
            "=" if depth == 0 && i > 0 => {
                let prev = line[i - 1].as_str();
                let next = line.get(i + 1).map(String::as_str);
                if prev == "=" || matches!(prev, "!" | "<" | ">") || next == Some("=") {
                    continue;
                }
                if matches!(prev, "+" | "-" | "*" | "/") {
                    if i >= 2 {
                        return Some((i, true));
                    }
                    continue;
                }
                return Some((i, false));
            }
            _ => {}
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn scan_invocations(
    line: &TokenLine,
    line_no: u32,
    chunk: &MethodChunk,
    sources: &SourceSet,
    ext: &BTreeSet<String>,
    blocks: &[Block],
    out: &mut Vec<MethodInvocation>,
    is_signature: bool,
) {
    let conditional_depth = blocks.iter().filter(|b| b.conditional).count() as u32;
    let tainted_cond = blocks.iter().any(|b| b.conditional && b.tainted);
    let trigger = blocks
        .iter()
        .rev()
        .find(|b| b.conditional && b.tainted)
        .and_then(|b| b.trigger.clone());

    let mut skip_first_call = is_signature;
    for i in 0..line.len() {
        if !is_ident(&line[i]) || KEYWORDS.contains(&line[i].as_str()) {
            continue;
        }
        if line.get(i + 1).map(String::as_str) != Some("(") {
            continue;
        }
        if skip_first_call {
            // the method's own name in its signature is not a call
            skip_first_call = false;
            continue;
        }
        let Some(close) = matching_paren(line, i + 1) else {
            continue;
        };
        let args = split_args(&line[i + 2..close]);
        let tainted_args = site_tainted_args(&args, sources, ext);
        let inv = MethodInvocation {
            callee: line[i].clone(),
            argument_exprs: args.clone(),
            enclosing_method: chunk.method_name.clone(),
            line_no,
            conditional_depth,
            enclosing_tainted_conditional: tainted_cond,
            conditional_trigger: trigger.clone(),
            tainted_args,
        };
        let dispatch = DISPATCHERS.contains(&inv.callee.as_str());
        out.push(inv);
        if dispatch {
            if let Some(handler) = dispatch_target(&args) {
                out.push(MethodInvocation {
                    callee: handler,
                    argument_exprs: Vec::new(),
                    enclosing_method: chunk.method_name.clone(),
                    line_no,
                    conditional_depth,
                    enclosing_tainted_conditional: tainted_cond,
                    conditional_trigger: trigger.clone(),
                    tainted_args: Vec::new(),
                });
            }
        }
    }
}

/// Arguments referencing a source or extended source right now:
/// (arg index, identifier, is-declared-source), deduplicated.
fn site_tainted_args(
    args: &[Vec<String>],
    sources: &SourceSet,
    ext: &BTreeSet<String>,
) -> Vec<(usize, String, bool)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (ai, arg) in args.iter().enumerate() {
        for t in arg {
            if !is_ident(t) {
                continue;
            }
            let is_source = sources.contains(t);
            if (is_source || ext.contains(t.as_str())) && seen.insert((ai, t.clone())) {
                out.push((ai, t.clone(), is_source));
            }
        }
    }
    out
}

/// The handler a runIn/schedule/subscribe call dispatches to: its last bare
/// identifier (or quoted identifier) argument.
fn dispatch_target(args: &[Vec<String>]) -> Option<String> {
    for arg in args.iter().rev() {
        if arg.len() != 1 {
            continue;
        }
        let t = unquote(&arg[0]);
        if is_ident(t) {
            return Some(t.to_owned());
        }
    }
    None
}

/// Finds methods that pass one of their parameters to a sink. With
/// `transitive`, forwarding through further methods is chased to a fixpoint;
/// the recorded underlying sink is always a real sink name.
pub fn find_extended_sinks(
    methods: &[MethodData],
    sinks: &SinkSet,
    transitive: bool,
) -> Vec<ExtendedSinkEntry> {
    let mut entries: BTreeSet<ExtendedSinkEntry> = BTreeSet::new();
    for m in methods {
        for (ip, p) in m.params.iter().enumerate() {
            for inv in &m.invocations {
                if !sinks.contains(&inv.callee) {
                    continue;
                }
                if inv.argument_exprs.iter().flatten().any(|t| t == p) {
                    entries.insert(ExtendedSinkEntry {
                        method_name: m.name.clone(),
                        param_name: p.clone(),
                        param_index: ip,
                        underlying_sink: inv.callee.clone(),
                    });
                }
            }
        }
    }
    if transitive {
        loop {
            let mut found = Vec::new();
            {
                let index = sensitive_index_map(&entries);
                for m in methods {
                    for (ip, p) in m.params.iter().enumerate() {
                        for inv in &m.invocations {
                            let Some(sensitive) = index.get(inv.callee.as_str()) else {
                                continue;
                            };
                            for (ai, arg) in inv.argument_exprs.iter().enumerate() {
                                let Some(underlying) = sensitive.get(&ai) else {
                                    continue;
                                };
                                if arg.iter().any(|t| t == p) {
                                    found.push(ExtendedSinkEntry {
                                        method_name: m.name.clone(),
                                        param_name: p.clone(),
                                        param_index: ip,
                                        underlying_sink: underlying.clone(),
                                    });
                                }
                            }
                        }
                    }
                }
            }
            let mut added = false;
            for e in found {
                added |= entries.insert(e);
            }
            if !added {
                break;
            }
        }
    }
    entries.into_iter().collect()
}

/// method -> sensitive parameter index -> underlying sink
fn sensitive_index_map<'a, I>(entries: I) -> BTreeMap<&'a str, BTreeMap<usize, String>>
where
    I: IntoIterator<Item = &'a ExtendedSinkEntry>,
{
    let mut map: BTreeMap<&'a str, BTreeMap<usize, String>> = BTreeMap::new();
    for e in entries {
        map.entry(e.method_name.as_str())
            .or_default()
            .entry(e.param_index)
            .or_insert_with(|| e.underlying_sink.clone());
    }
    map
}

/// Mines one app with default options.
pub fn mine(src: &NormalizedSource, sinks: &SinkSet) -> MinerReport {
    mine_with(src, sinks, &MineOptions::default())
}

/// Mines one app: gate, sources, per-method analysis, extended sinks, flows.
pub fn mine_with(src: &NormalizedSource, sinks: &SinkSet, opts: &MineOptions) -> MinerReport {
    let started = Instant::now();
    let lines = lexer::tokenize(src);
    let split = lexer::split_methods(&lines);
    let bag = lexer::bag_of_words(&split.methods);

    let gate_open = sinks.iter().any(|s| bag.contains_key(s));
    if !gate_open {
        return MinerReport {
            app_name: src.app_name.clone(),
            sources: SourceSet::new(),
            all_methods: Vec::new(),
            extended_sinks: Vec::new(),
            flows: Vec::new(),
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        };
    }

    let sources = find_sources(split.preferences.as_ref());
    let methods: Vec<MethodData> = split
        .methods
        .iter()
        .map(|c| analyze_method(c, &sources))
        .collect();
    let extended_sinks = find_extended_sinks(&methods, sinks, opts.transitive);
    let sensitive = sensitive_index_map(&extended_sinks);

    let mut flows = Vec::new();
    for m in &methods {
        for inv in &m.invocations {
            if sinks.contains(&inv.callee) {
                let mut hit = false;
                let mut seen = BTreeSet::new();
                for (_, ident, is_source) in &inv.tainted_args {
                    if !seen.insert(ident.clone()) {
                        continue;
                    }
                    hit = true;
                    flows.push(TaintedFlow {
                        enclosing_method: m.name.clone(),
                        callee: inv.callee.clone(),
                        line_no: inv.line_no,
                        tainted_param: ident.clone(),
                        category: if *is_source {
                            FlowCategory::ScSn
                        } else {
                            FlowCategory::EScSn
                        },
                    });
                }
                if !hit && inv.enclosing_tainted_conditional {
                    flows.push(TaintedFlow {
                        enclosing_method: m.name.clone(),
                        callee: inv.callee.clone(),
                        line_no: inv.line_no,
                        tainted_param: inv.conditional_trigger.clone().unwrap_or_default(),
                        category: FlowCategory::SnC,
                    });
                }
            } else if let Some(idxs) = sensitive.get(inv.callee.as_str()) {
                let mut hit = false;
                let mut seen = BTreeSet::new();
                for (ai, ident, is_source) in &inv.tainted_args {
                    if !idxs.contains_key(ai) || !seen.insert(ident.clone()) {
                        continue;
                    }
                    hit = true;
                    flows.push(TaintedFlow {
                        enclosing_method: m.name.clone(),
                        callee: inv.callee.clone(),
                        line_no: inv.line_no,
                        tainted_param: ident.clone(),
                        category: if *is_source {
                            FlowCategory::ScESn
                        } else {
                            FlowCategory::EScESn
                        },
                    });
                }
                if !hit && inv.enclosing_tainted_conditional {
                    flows.push(TaintedFlow {
                        enclosing_method: m.name.clone(),
                        callee: inv.callee.clone(),
                        line_no: inv.line_no,
                        tainted_param: inv.conditional_trigger.clone().unwrap_or_default(),
                        category: FlowCategory::ESnC,
                    });
                }
            }
        }
    }

    MinerReport {
        app_name: src.app_name.clone(),
        sources,
        all_methods: methods,
        extended_sinks,
        flows,
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    }
}
