//! Trains the four classifiers on a generated corpus and scores them on the
//! stratified holdout. Everything runs in memory: mutants come from the
//! embedded seeds, features from the regular pipeline.

use std::collections::BTreeMap;

use taintminer::flowsminer::mine;
use taintminer::lexer::{bag_of_words, split_methods, tokenize};
use taintminer::ml::{evaluate, train, TrainParams};
use taintminer::mutgen::{builtin_seeds, generate_corpus, GenParams};
use taintminer::preprocessor::{normalize, RawSource};
use taintminer::taintmodel::SinkSet;
use taintminer::vectorizer::assemble;

fn main() {
    let params = GenParams { per_seed: 30, ..GenParams::default() };
    let mutants = generate_corpus(&builtin_seeds(), &params).expect("parameters are sane");
    println!(
        "corpus: {} mutants, {} vulnerable",
        mutants.len(),
        mutants.iter().filter(|m| m.label.as_str() == "vulnerable").count()
    );

    let sinks = SinkSet::default_set();
    let mut bags = BTreeMap::new();
    let mut reports = BTreeMap::new();
    let mut labels = BTreeMap::new();
    for m in &mutants {
        let norm = normalize(&RawSource::from_text(m.name.clone(), &m.text)).expect("mutant parses");
        let split = split_methods(&tokenize(&norm));
        bags.insert(m.name.clone(), bag_of_words(&split.methods));
        reports.insert(m.name.clone(), mine(&norm, &sinks));
        labels.insert(m.name.clone(), m.label);
    }
    let matrix = assemble(&bags, &reports, Some(&labels), 5).expect("labels cover the corpus");
    println!("features: {} columns\n", matrix.width());

    let models = train(&matrix, &TrainParams::default()).expect("matrix is labeled");
    let report = evaluate(&models, &matrix).expect("stored split still applies");

    println!(
        "holdout of {} rows (seed {}, {:.0}% train):",
        report.n_test,
        report.seed,
        report.train_fraction * 100.0
    );
    println!("{:<14} {:>9} {:>9} {:>9} {:>9}", "classifier", "accuracy", "f1", "mcc", "auc");
    for (name, m) in &report.models {
        println!(
            "{:<14} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            name, m.accuracy, m.f1, m.mcc, m.auc
        );
    }
}
