//! Synthetic labeled corpus generation.
//!
//! Labeled SmartApp datasets are scarce, so this module grows one out of
//! benign seed apps. Each generated app is a seed with a single rewrite
//! spliced into the body of its first method, plus a few harmless filler
//! statements so the corpus does not collapse into a handful of identical
//! texts. Six ready-made seeds ship with the crate; any directory of benign
//! apps with declared inputs works as well.
//!
//! The rewrites come in sibling pairs. The vulnerable and the benign variant
//! of a rewrite emit exactly the same statements when read as a token
//! multiset and differ only in statement order or in which identifier lands
//! where. Word counts alone therefore carry almost no information about the
//! label, while mined flow counts separate the two classes cleanly. Rewrites
//! also stay inside the seed's own vocabulary apart from one helper method
//! name, so a mutant reads like a sibling of its seed rather than a stranger.
//!
//! Labels are not taken on faith from the rewrite that was applied: every
//! generated app is run through the independent reference analyzer and
//! labeled by its verdict.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::flowsminer::find_sources;
use crate::lexer::{bag_of_words, split_methods, tokenize};
use crate::oracle;
use crate::preprocessor::{normalize, RawSource};
use crate::taintmodel::{Label, SinkSet};

/// Default share of vulnerable apps in a generated corpus.
pub const DEFAULT_VULN_RATIO: f64 = 858.0 / 1186.0;

/// Default number of mutants grown from each seed.
pub const DEFAULT_PER_SEED: usize = 18;

/// Name of the helper method the call-indirection rewrite introduces; the
/// only token a mutant may use that its seed does not.
pub const HELPER_NAME: &str = "deliver";

/// Clean local the rewrites lean on. Its defining line is part of the splice,
/// so it never carries taint.
const CLEAN_IDENT: &str = "note";

const FILLER_WORDS: [&str; 8] = [
    "steady", "quiet", "ready", "synced", "nominal", "idle", "waiting", "armed",
];

#[derive(Debug, Error)]
pub enum MutgenError {
    #[error("no seed apps supplied")]
    NoSeeds,
    #[error("every seed needs at least 2 mutants, got {0}")]
    BadCount(usize),
    #[error("vulnerable ratio {0} is not strictly between 0 and 1")]
    BadRatio(f64),
    #[error("seed {0} declares no input, so there is nothing to leak")]
    NoInput(String),
    #[error("seed {0} has no method definition line to splice behind")]
    NoSplicePoint(String),
    #[error("seed {app} is not usable: {reason}")]
    BadSeed { app: String, reason: String },
}

/// One of the rewrites a seed app can receive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MutationKind {
    /// Emits a capture, a wipe, and a send of the same local; the order of
    /// the last two decides whether the send still sees the captured input.
    ReorderStatements,
    /// Puts a harmless send inside an `if`; the guard is either the input or
    /// a clean local, and the unused one is mentioned in a log line.
    ConditionalWrap,
    /// Routes an argument through a one-hop helper that forwards to a sink;
    /// the argument is either the input or a clean local.
    CallIndirection,
}

impl MutationKind {
    pub const ALL: [MutationKind; 3] = [
        MutationKind::ReorderStatements,
        MutationKind::ConditionalWrap,
        MutationKind::CallIndirection,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MutationKind::ReorderStatements => "reorder_statements",
            MutationKind::ConditionalWrap => "conditional_wrap",
            MutationKind::CallIndirection => "call_indirection",
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A benign app the generator can splice rewrites into.
#[derive(Debug, Clone)]
pub struct SeedApp {
    /// Short name, also the prefix of every mutant derived from this seed.
    pub slug: String,
    pub text: String,
    /// The declared input the vulnerable rewrite variants leak.
    pub source: String,
    /// The sink the rewrites call.
    pub sink: String,
}

/// Checks a candidate seed and works out which input it would leak and which
/// sink the rewrites should call: the first declared input in name order, and
/// the first configured sink the seed already mentions (or the first
/// configured sink at all for seeds that mention none).
pub fn derive_seed(
    slug: impl Into<String>,
    text: impl Into<String>,
    sinks: &SinkSet,
) -> Result<SeedApp, MutgenError> {
    let slug = slug.into();
    let text = text.into();

    let norm = normalize(&RawSource::from_text(slug.clone(), &text)).map_err(|e| {
        MutgenError::BadSeed { app: slug.clone(), reason: e.to_string() }
    })?;
    let split = split_methods(&tokenize(&norm));

    let sources = find_sources(split.preferences.as_ref());
    let Some(source) = sources.iter().next().map(str::to_string) else {
        return Err(MutgenError::NoInput(slug));
    };

    let bag = bag_of_words(&split.methods);
    let Some(sink) = sinks
        .iter()
        .find(|s| bag.contains_key(*s))
        .or_else(|| sinks.iter().next())
        .map(str::to_string)
    else {
        return Err(MutgenError::BadSeed { app: slug, reason: "sink set is empty".into() });
    };

    if !text.lines().any(is_splice_line) {
        return Err(MutgenError::NoSplicePoint(slug));
    }

    Ok(SeedApp { slug, text, source, sink })
}

/// Slug and text of the six seed apps embedded in the crate, in slug order.
pub fn builtin_seed_texts() -> [(&'static str, &'static str); 6] {
    [
        ("cam_pinger", include_str!("seeds/cam_pinger.groovy")),
        ("damp_alert", include_str!("seeds/damp_alert.groovy")),
        ("door_greeter", include_str!("seeds/door_greeter.groovy")),
        ("heat_check", include_str!("seeds/heat_check.groovy")),
        ("night_watch", include_str!("seeds/night_watch.groovy")),
        ("porch_light", include_str!("seeds/porch_light.groovy")),
    ]
}

/// The embedded seed apps, readied against the default sink set.
pub fn builtin_seeds() -> Vec<SeedApp> {
    builtin_seed_texts()
        .into_iter()
        .map(|(slug, text)| {
            derive_seed(slug, text, &SinkSet::default_set())
                .expect("embedded seed apps must be usable")
        })
        .collect()
}

/// A generated app together with its verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutant {
    pub name: String,
    pub kind: MutationKind,
    pub label: Label,
    pub text: String,
}

pub struct GenParams {
    /// Mutants grown from each seed app.
    pub per_seed: usize,
    pub vuln_ratio: f64,
    pub seed: u64,
    pub sinks: SinkSet,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            per_seed: DEFAULT_PER_SEED,
            vuln_ratio: DEFAULT_VULN_RATIO,
            seed: 42,
            sinks: SinkSet::default_set(),
        }
    }
}

/// The splice goes right after the first method definition line.
fn is_splice_line(line: &str) -> bool {
    line.starts_with("def ") && line.contains('(') && line.trim_end().ends_with('{')
}

fn filler_statement(rng: &mut ChaCha8Rng) -> String {
    let word = FILLER_WORDS[rng.gen_range(0..FILLER_WORDS.len())];
    match rng.gen_range(0..5u8) {
        0 => format!("log.debug \"{word}\""),
        1 => format!("log.trace \"{word}\""),
        2 => format!("state.beat = {}", rng.gen_range(1..60)),
        3 => format!("state.beat = state.beat + {}", rng.gen_range(1..60)),
        _ => "unschedule()".to_string(),
    }
}

/// Renders the spliced statements and any helper method for one rewrite.
///
/// The two polarities of a kind must consume the same random draws and emit
/// the same token multiset; only placement may differ.
fn site_lines(
    seed: &SeedApp,
    kind: MutationKind,
    vuln: bool,
    rng: &mut ChaCha8Rng,
) -> (Vec<String>, Vec<String>) {
    let src = seed.source.as_str();
    let sink = seed.sink.as_str();
    match kind {
        MutationKind::ReorderStatements => {
            let lit = FILLER_WORDS[rng.gen_range(0..FILLER_WORDS.len())];
            let grab = format!("def carry = {src}");
            let send = format!("{sink}(carry)");
            let wipe = format!("carry = \"{lit}\"");
            let body = if vuln {
                vec![grab, send, wipe]
            } else {
                vec![grab, wipe, send]
            };
            (body, Vec::new())
        }
        MutationKind::ConditionalWrap => {
            let keep = FILLER_WORDS[rng.gen_range(0..FILLER_WORDS.len())];
            let lit = FILLER_WORDS[rng.gen_range(0..FILLER_WORDS.len())];
            let (guard, mention) = if vuln { (src, CLEAN_IDENT) } else { (CLEAN_IDENT, src) };
            let body = vec![
                format!("def {CLEAN_IDENT} = \"{keep}\""),
                format!("if ({guard}) {{"),
                format!("    {sink}(\"{lit}\")"),
                "}".to_string(),
                format!("log.debug {mention}"),
            ];
            (body, Vec::new())
        }
        MutationKind::CallIndirection => {
            let keep = FILLER_WORDS[rng.gen_range(0..FILLER_WORDS.len())];
            let (arg, mention) = if vuln { (src, CLEAN_IDENT) } else { (CLEAN_IDENT, src) };
            let body = vec![
                format!("def {CLEAN_IDENT} = \"{keep}\""),
                format!("{HELPER_NAME}({arg})"),
                format!("log.debug {mention}"),
            ];
            let helper = vec![
                String::new(),
                format!("def {HELPER_NAME}(payload) {{"),
                format!("    {sink}(payload)"),
                "}".to_string(),
            ];
            (body, helper)
        }
    }
}

/// Splices one rewrite plus filler into a seed.
fn build_mutant_text(
    seed: &SeedApp,
    kind: MutationKind,
    vuln: bool,
    rng: &mut ChaCha8Rng,
) -> String {
    let before: Vec<String> = (0..rng.gen_range(0..=2)).map(|_| filler_statement(rng)).collect();
    let after: Vec<String> = (0..rng.gen_range(0..=2)).map(|_| filler_statement(rng)).collect();
    let (site, tail) = site_lines(seed, kind, vuln, rng);

    let mut out: Vec<String> = Vec::new();
    let mut spliced = false;
    for line in seed.text.lines() {
        out.push(line.to_string());
        if !spliced && is_splice_line(line) {
            spliced = true;
            for s in before.iter().chain(site.iter()).chain(after.iter()) {
                out.push(format!("    {s}"));
            }
        }
    }
    for line in tail {
        out.push(line);
    }
    let mut text = out.join("\n");
    text.push('\n');
    text
}

/// Applies one rewrite to one seed and labels the result by analysis.
pub fn mutate(
    seed: &SeedApp,
    kind: MutationKind,
    vuln: bool,
    rng_seed: u64,
    sinks: &SinkSet,
) -> Mutant {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let text = build_mutant_text(seed, kind, vuln, &mut rng);
    let label = oracle::judge(&text, sinks).label;
    Mutant { name: format!("{}_m00", seed.slug), kind, label, text }
}

/// Grows `per_seed` labeled mutants from every seed. Deterministic for a
/// given parameter set and seed order; each seed gets a mix of both classes.
pub fn generate_corpus(
    seeds: &[SeedApp],
    params: &GenParams,
) -> Result<Vec<Mutant>, MutgenError> {
    if seeds.is_empty() {
        return Err(MutgenError::NoSeeds);
    }
    if params.per_seed < 2 {
        return Err(MutgenError::BadCount(params.per_seed));
    }
    if !(params.vuln_ratio > 0.0 && params.vuln_ratio < 1.0) {
        return Err(MutgenError::BadRatio(params.vuln_ratio));
    }
    let per = params.per_seed;
    let n_vuln = ((per as f64 * params.vuln_ratio).round() as usize).clamp(1, per - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut out = Vec::with_capacity(seeds.len() * per);
    for seed_app in seeds {
        let mut aims: Vec<bool> = (0..per).map(|j| j < n_vuln).collect();
        aims.shuffle(&mut rng);
        for (j, &aim) in aims.iter().enumerate() {
            let kind = MutationKind::ALL[rng.gen_range(0..MutationKind::ALL.len())];
            let text = build_mutant_text(seed_app, kind, aim, &mut rng);
            let label = oracle::judge(&text, &params.sinks).label;
            out.push(Mutant {
                name: format!("{}_m{:02}", seed_app.slug, j),
                kind,
                label,
                text,
            });
        }
    }
    Ok(out)
}

/// Writes one `.groovy` file per mutant plus a `manifest.csv` of verdicts.
/// Returns the manifest path.
pub fn write_corpus(dir: &Path, mutants: &[Mutant]) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut manifest = String::from("file,label,mutation_kind\n");
    for m in mutants {
        let file = format!("{}.groovy", m.name);
        fs::write(dir.join(&file), &m.text)?;
        manifest.push_str(&format!("{file},{},{}\n", m.label, m.kind));
    }
    let path = dir.join("manifest.csv");
    fs::write(&path, manifest)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    use std::collections::BTreeSet;

    use crate::flowsminer::{mine_with, MineOptions};
    use crate::taintmodel::FlowCategory;

    fn bag_of(name: &str, text: &str) -> crate::lexer::BagOfWords {
        let norm = normalize(&RawSource::from_text(name, text)).expect("app should normalize");
        let split = split_methods(&tokenize(&norm));
        bag_of_words(&split.methods)
    }

    fn counts_of(name: &str, text: &str) -> [u64; 6] {
        let norm = normalize(&RawSource::from_text(name, text)).expect("app should normalize");
        mine_with(&norm, &SinkSet::default_set(), &MineOptions::default()).flow_counts()
    }

    #[test]
    fn builtin_seeds_derive_expected_roles() {
        let seeds = builtin_seeds();
        let roles: Vec<(&str, &str, &str)> = seeds
            .iter()
            .map(|s| (s.slug.as_str(), s.source.as_str(), s.sink.as_str()))
            .collect();
        assert_eq!(
            roles,
            vec![
                ("cam_pinger", "camUrl", "httpGet"),
                ("damp_alert", "alertMsg", "sendNotification"),
                ("door_greeter", "guestCode", "sendPushMessage"),
                ("heat_check", "ownerEmail", "sendSms"),
                ("night_watch", "watchMode", "sendPush"),
                ("porch_light", "phone", "sendSms"),
            ]
        );
    }

    #[test]
    fn seeds_are_benign() {
        let sinks = SinkSet::default_set();
        for seed in builtin_seeds() {
            let outcome = oracle::judge(&seed.text, &sinks);
            assert_eq!(outcome.label, Label::NonVulnerable, "seed {}", seed.slug);
            assert_eq!(outcome.counts, [0; 6], "seed {}", seed.slug);
            assert_eq!(counts_of(&seed.slug, &seed.text), [0; 6], "seed {}", seed.slug);
        }
    }

    #[test]
    fn deriving_an_inputless_app_fails() {
        let text = "def installed() {\n    log.debug \"hi\"\n}\n";
        let err = derive_seed("bare", text, &SinkSet::default_set()).unwrap_err();
        assert!(matches!(err, MutgenError::NoInput(ref s) if s == "bare"));
    }

    #[test]
    fn sibling_rewrites_share_a_bag_but_not_a_text() {
        for kind in MutationKind::ALL {
            for seed in builtin_seeds() {
                let mut rng_v = ChaCha8Rng::seed_from_u64(9);
                let mut rng_n = rng_v.clone();
                let vuln = build_mutant_text(&seed, kind, true, &mut rng_v);
                let safe = build_mutant_text(&seed, kind, false, &mut rng_n);
                assert_ne!(vuln, safe, "{kind} on {}", seed.slug);
                assert_eq!(
                    bag_of("v", &vuln),
                    bag_of("n", &safe),
                    "{kind} on {} should be invisible to word counts",
                    seed.slug
                );
            }
        }
    }

    #[test]
    fn mutants_stay_inside_the_seed_vocabulary() {
        for kind in MutationKind::ALL {
            for seed in builtin_seeds() {
                for vuln in [true, false] {
                    let mut rng = ChaCha8Rng::seed_from_u64(17);
                    let text = build_mutant_text(&seed, kind, vuln, &mut rng);
                    let seed_keys: BTreeSet<String> =
                        bag_of(&seed.slug, &seed.text).into_keys().collect();
                    let mutant_keys: BTreeSet<String> = bag_of("m", &text).into_keys().collect();

                    let stray: Vec<&String> = mutant_keys
                        .difference(&seed_keys)
                        .filter(|k| k.as_str() != HELPER_NAME)
                        .collect();
                    assert!(stray.is_empty(), "{kind} on {} leaked tokens {stray:?}", seed.slug);

                    let inter = mutant_keys.intersection(&seed_keys).count();
                    let union = mutant_keys.union(&seed_keys).count();
                    let jaccard = inter as f64 / union as f64;
                    assert!(jaccard >= 0.9, "{kind} on {}: jaccard {jaccard}", seed.slug);
                }
            }
        }
    }

    #[test]
    fn each_rewrite_lands_its_intended_verdict() {
        let sinks = SinkSet::default_set();
        let expected_category = [
            (MutationKind::ReorderStatements, FlowCategory::EScSn),
            (MutationKind::ConditionalWrap, FlowCategory::SnC),
            (MutationKind::CallIndirection, FlowCategory::ScESn),
        ];
        for (kind, category) in expected_category {
            for seed in builtin_seeds() {
                let hot = mutate(&seed, kind, true, 3, &sinks);
                assert_eq!(hot.label, Label::Vulnerable, "{kind} on {}", seed.slug);
                let mut want = [0u64; 6];
                want[category.index()] = 1;
                let outcome = oracle::judge(&hot.text, &sinks);
                assert_eq!(outcome.counts, want, "{kind} on {}", seed.slug);
                assert_eq!(counts_of(&seed.slug, &hot.text), want, "miner on {kind} {}", seed.slug);

                let cold = mutate(&seed, kind, false, 3, &sinks);
                assert_eq!(cold.label, Label::NonVulnerable, "{kind} on {}", seed.slug);
                let outcome = oracle::judge(&cold.text, &sinks);
                assert_eq!(outcome.counts, [0; 6], "{kind} on {}", seed.slug);
                assert_eq!(counts_of(&seed.slug, &cold.text), [0; 6], "miner on {kind} {}", seed.slug);
            }
        }
    }

    #[test]
    fn corpus_is_deterministic_and_hits_the_per_seed_split() {
        let seeds = builtin_seeds();
        let params = GenParams {
            per_seed: 10,
            vuln_ratio: 0.6,
            seed: 11,
            sinks: SinkSet::default_set(),
        };
        let first = generate_corpus(&seeds, &params).unwrap();
        let second = generate_corpus(&seeds, &params).unwrap();
        assert_eq!(first, second);

        assert_eq!(first.len(), 60);
        let vulns = first.iter().filter(|m| m.label == Label::Vulnerable).count();
        assert_eq!(vulns, 36);
        for chunk in first.chunks(10) {
            let per_seed_vulns = chunk.iter().filter(|m| m.label == Label::Vulnerable).count();
            assert_eq!(per_seed_vulns, 6, "each seed should carry its share");
        }

        let kinds: BTreeSet<&str> = first.iter().map(|m| m.kind.label()).collect();
        assert_eq!(kinds.len(), 3, "all rewrite kinds should show up");

        let names: BTreeSet<&str> = first.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names.len(), first.len(), "names must be unique");
        assert_eq!(first[0].name, "cam_pinger_m00");
        assert_eq!(first[59].name, "porch_light_m09");
    }

    #[test]
    fn default_parameters_grow_the_documented_mix() {
        let corpus = generate_corpus(&builtin_seeds(), &GenParams::default()).unwrap();
        assert_eq!(corpus.len(), 6 * DEFAULT_PER_SEED);
        let vulns = corpus.iter().filter(|m| m.label == Label::Vulnerable).count();
        assert_eq!(vulns, 6 * 13);
    }

    #[test]
    fn degenerate_parameters_are_rejected() {
        let seeds = builtin_seeds();
        let err = generate_corpus(&[], &GenParams::default()).unwrap_err();
        assert!(matches!(err, MutgenError::NoSeeds));

        let err = generate_corpus(&seeds, &GenParams { per_seed: 1, ..GenParams::default() })
            .unwrap_err();
        assert!(matches!(err, MutgenError::BadCount(1)));

        let err = generate_corpus(&seeds, &GenParams { vuln_ratio: 0.0, ..GenParams::default() })
            .unwrap_err();
        assert!(matches!(err, MutgenError::BadRatio(_)));

        let err = generate_corpus(&seeds, &GenParams { vuln_ratio: 1.5, ..GenParams::default() })
            .unwrap_err();
        assert!(matches!(err, MutgenError::BadRatio(_)));
    }

    #[test]
    fn written_corpus_has_files_and_manifest() {
        let seeds = builtin_seeds();
        let params = GenParams { per_seed: 2, vuln_ratio: 0.5, seed: 2, sinks: SinkSet::default_set() };
        let corpus = generate_corpus(&seeds[..2], &params).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_corpus(dir.path(), &corpus).unwrap();

        let body = std::fs::read_to_string(&manifest).unwrap();
        let mut lines = body.lines();
        assert_eq!(lines.next(), Some("file,label,mutation_kind"));
        assert_eq!(lines.count(), corpus.len());

        for m in &corpus {
            let on_disk = std::fs::read_to_string(dir.path().join(format!("{}.groovy", m.name))).unwrap();
            assert_eq!(on_disk, m.text);
            assert!(body.contains(&format!("{}.groovy,{},{}", m.name, m.label, m.kind)));
        }
    }
}
