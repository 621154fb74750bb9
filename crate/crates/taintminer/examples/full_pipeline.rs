//! The whole pipeline in one run: generate a labeled corpus, normalize,
//! mine, vectorize, train, evaluate, then score an app the models never
//! saw. The `taintminer pipeline` subcommand does the same against files on
//! disk.

use std::collections::BTreeMap;

use taintminer::flowsminer::mine;
use taintminer::lexer::{bag_of_words, split_methods, tokenize};
use taintminer::ml::{evaluate, predict, train, TrainParams, CLASSIFIER_NAMES};
use taintminer::mutgen::{builtin_seeds, generate_corpus, mutate, GenParams, MutationKind};
use taintminer::preprocessor::{normalize, NormalizedSource, RawSource};
use taintminer::taintmodel::{FlowCategory, SinkSet};
use taintminer::vectorizer::{assemble, FeatureMatrix, FeatureRow};

fn prepared(name: &str, text: &str) -> NormalizedSource {
    normalize(&RawSource::from_text(name, text)).expect("generated app parses")
}

fn main() {
    let sinks = SinkSet::default_set();
    let seeds = builtin_seeds();
    let mutants = generate_corpus(&seeds, &GenParams::default()).expect("defaults are sane");
    println!("generated {} labeled mutants from {} seeds", mutants.len(), seeds.len());

    let mut bags = BTreeMap::new();
    let mut reports = BTreeMap::new();
    let mut labels = BTreeMap::new();
    for m in &mutants {
        let norm = prepared(&m.name, &m.text);
        let split = split_methods(&tokenize(&norm));
        bags.insert(m.name.clone(), bag_of_words(&split.methods));
        reports.insert(m.name.clone(), mine(&norm, &sinks));
        labels.insert(m.name.clone(), m.label);
    }
    let matrix = assemble(&bags, &reports, Some(&labels), 5).expect("labels cover the corpus");
    let models = train(&matrix, &TrainParams::default()).expect("matrix is labeled");
    let report = evaluate(&models, &matrix).expect("stored split still applies");
    println!("trained and evaluated on a {}-row holdout:", report.n_test);
    for (name, m) in &report.models {
        println!("  {:<14} accuracy {:.3}, auc {:.3}", name, m.accuracy, m.auc);
    }

    // A fresh mutant the corpus has never seen: different rng stream, same
    // seed app. Its row is built against the trained column layout.
    let unseen = mutate(&seeds[2], MutationKind::CallIndirection, true, 4242, &sinks);
    let norm = prepared("unseen", &unseen.text);
    let split = split_methods(&tokenize(&norm));
    let bag = bag_of_words(&split.methods);
    let mined = mine(&norm, &sinks);

    let token_cols = models.columns.len() - FlowCategory::ALL.len();
    let mut values: Vec<f64> = models.columns[..token_cols]
        .iter()
        .map(|t| bag.get(t).copied().unwrap_or(0) as f64)
        .collect();
    values.extend(mined.flow_counts().map(|c| c as f64));
    let single = FeatureMatrix {
        columns: models.columns.clone(),
        rows: vec![FeatureRow { app: "unseen".into(), label: None, values }],
    };

    println!("\nscoring an unseen vulnerable mutant of {}:", seeds[2].slug);
    for name in CLASSIFIER_NAMES {
        let p = &predict(&models, &single, name).expect("columns line up")[0];
        println!("  {:<14} score {:.3} -> {}", name, p.score, p.label);
    }
}
