//! Shared taint vocabulary: sink and source sets, extended sinks, method
//! invocation records, the six flow categories, and app labels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sink methods assumed when no sink file is supplied.
pub const DEFAULT_SINKS: &[&str] = &[
    "sendSms",
    "sendPush",
    "httpPost",
    "httpGet",
    "httpPostJson",
    "sendNotification",
    "sendNotificationToContacts",
    "sendPushMessage",
];

#[derive(Debug, Error)]
pub enum TaintModelError {
    #[error("sink file not found: {0}")]
    FileNotFound(String),
    #[error("failed to read sink file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown flow category label: {0}")]
    UnknownCategory(String),
    #[error("unknown app label: {0}")]
    UnknownLabel(String),
    #[error("extended sink {method}({param}) names {sink}, which is not a configured sink")]
    UnknownUnderlyingSink {
        method: String,
        param: String,
        sink: String,
    },
}

/// The set of sensitive sink method names mining runs against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SinkSet {
    names: BTreeSet<String>,
}

impl SinkSet {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SinkSet {
            names: names.into_iter().map(Into::into).collect(),
        }
    }

    /// The built-in sink list used when no file or env override is given.
    pub fn default_set() -> Self {
        SinkSet::new(DEFAULT_SINKS.iter().copied())
    }

    /// Reads one sink name per line; blank lines and `#` comments are skipped,
    /// duplicates collapse.
    pub fn load(path: &Path) -> Result<Self, TaintModelError> {
        if !path.exists() {
            return Err(TaintModelError::FileNotFound(path.display().to_string()));
        }
        let text = std::fs::read_to_string(path).map_err(|source| TaintModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let names = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect();
        Ok(SinkSet { names })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }
}

/// Source identifiers declared through `input` lines in `preferences`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SourceSet {
    names: BTreeSet<String>,
}

impl SourceSet {
    pub fn new() -> Self {
        SourceSet::default()
    }

    pub fn insert(&mut self, name: impl Into<String>) {
        self.names.insert(name.into());
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }
}

impl<S: Into<String>> FromIterator<S> for SourceSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        SourceSet {
            names: iter.into_iter().map(Into::into).collect(),
        }
    }
}

/// Per-method extended source sets, keyed by method name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExtendedSourceSet {
    per_method: BTreeMap<String, BTreeSet<String>>,
}

impl ExtendedSourceSet {
    pub fn insert(&mut self, method: impl Into<String>, name: impl Into<String>) {
        self.per_method
            .entry(method.into())
            .or_default()
            .insert(name.into());
    }

    pub fn for_method(&self, method: &str) -> impl Iterator<Item = &str> {
        self.per_method
            .get(method)
            .into_iter()
            .flatten()
            .map(String::as_str)
    }

    pub fn contains(&self, method: &str, name: &str) -> bool {
        self.per_method
            .get(method)
            .is_some_and(|s| s.contains(name))
    }
}

/// The six flow categories, in the order used for feature columns and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlowCategory {
    /// Source used directly at a sink.
    #[serde(rename = "Sc_Sn")]
    ScSn,
    /// Extended source reaches a sink.
    #[serde(rename = "eSc_Sn")]
    EScSn,
    /// Source passed at a sensitive index of an extended sink.
    #[serde(rename = "Sc_eSn")]
    ScESn,
    /// Extended source passed at a sensitive index of an extended sink.
    #[serde(rename = "eSc_eSn")]
    EScESn,
    /// Sink invoked inside a tainted conditional without tainted arguments.
    #[serde(rename = "Sn_C")]
    SnC,
    /// Extended sink invoked inside a tainted conditional without tainted
    /// arguments at its sensitive indices.
    #[serde(rename = "eSn_C")]
    ESnC,
}

impl FlowCategory {
    pub const ALL: [FlowCategory; 6] = [
        FlowCategory::ScSn,
        FlowCategory::EScSn,
        FlowCategory::ScESn,
        FlowCategory::EScESn,
        FlowCategory::SnC,
        FlowCategory::ESnC,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FlowCategory::ScSn => "Sc_Sn",
            FlowCategory::EScSn => "eSc_Sn",
            FlowCategory::ScESn => "Sc_eSn",
            FlowCategory::EScESn => "eSc_eSn",
            FlowCategory::SnC => "Sn_C",
            FlowCategory::ESnC => "eSn_C",
        }
    }

    /// Position of the category in [`FlowCategory::ALL`] and in feature rows.
    pub fn index(self) -> usize {
        FlowCategory::ALL.iter().position(|c| *c == self).unwrap()
    }
}

impl fmt::Display for FlowCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FlowCategory {
    type Err = TaintModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FlowCategory::ALL
            .iter()
            .copied()
            .find(|c| c.label() == s)
            .ok_or_else(|| TaintModelError::UnknownCategory(s.to_owned()))
    }
}

/// One method call found while scanning a method body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodInvocation {
    pub callee: String,
    /// Token sequences of each argument, split on top-level commas.
    pub argument_exprs: Vec<Vec<String>>,
    pub enclosing_method: String,
    pub line_no: u32,
    /// Number of enclosing if/else blocks at the call site.
    pub conditional_depth: u32,
    pub enclosing_tainted_conditional: bool,
    /// Guard identifier of the innermost tainted enclosing conditional.
    pub conditional_trigger: Option<String>,
    /// Arguments that referenced a source or extended source when the call was
    /// scanned: (argument index, identifier, true when a declared source).
    pub tainted_args: Vec<(usize, String, bool)>,
}

/// A method that forwards one of its parameters to a sink.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExtendedSinkEntry {
    pub method_name: String,
    pub param_name: String,
    /// Index of the parameter in the method signature.
    pub param_index: usize,
    pub underlying_sink: String,
}

impl ExtendedSinkEntry {
    pub fn new(
        method_name: impl Into<String>,
        param_name: impl Into<String>,
        param_index: usize,
        underlying_sink: impl Into<String>,
        sinks: &SinkSet,
    ) -> Result<Self, TaintModelError> {
        let entry = ExtendedSinkEntry {
            method_name: method_name.into(),
            param_name: param_name.into(),
            param_index,
            underlying_sink: underlying_sink.into(),
        };
        if !sinks.contains(&entry.underlying_sink) {
            return Err(TaintModelError::UnknownUnderlyingSink {
                method: entry.method_name,
                param: entry.param_name,
                sink: entry.underlying_sink,
            });
        }
        Ok(entry)
    }
}

/// One mined flow: a tainted value (or tainted guard) reaching a sink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaintedFlow {
    #[serde(rename = "method")]
    pub enclosing_method: String,
    pub callee: String,
    #[serde(rename = "line")]
    pub line_no: u32,
    #[serde(rename = "param")]
    pub tainted_param: String,
    pub category: FlowCategory,
}

/// Ground-truth class of an app.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "vulnerable")]
    Vulnerable,
    #[serde(rename = "non-vulnerable")]
    NonVulnerable,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Vulnerable => "vulnerable",
            Label::NonVulnerable => "non-vulnerable",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = TaintModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vulnerable" => Ok(Label::Vulnerable),
            "non-vulnerable" | "nonvulnerable" | "non_vulnerable" => Ok(Label::NonVulnerable),
            other => Err(TaintModelError::UnknownLabel(other.to_owned())),
        }
    }
}
