//! Grows labeled mutants from one embedded seed and shows what each rewrite
//! kind splices in. Labels are assigned by the independent oracle, never by
//! construction, and sibling rewrites keep identical token bags so the
//! label lives in the flow structure alone.

use std::collections::BTreeMap;

use taintminer::lexer::{bag_of_words, split_methods, tokenize};
use taintminer::mutgen::{builtin_seeds, mutate, MutationKind};
use taintminer::oracle::judge;
use taintminer::preprocessor::{normalize, RawSource};
use taintminer::taintmodel::SinkSet;

fn bag_of(text: &str) -> BTreeMap<String, u64> {
    let norm = normalize(&RawSource::from_text("x", text)).expect("mutant parses");
    bag_of_words(&split_methods(&tokenize(&norm)).methods)
}

fn main() {
    let sinks = SinkSet::default_set();
    let seed = builtin_seeds().into_iter().next().expect("embedded seeds exist");
    println!(
        "seed {} (source {}, sink {}), {} lines\n",
        seed.slug,
        seed.source,
        seed.sink,
        seed.text.lines().count()
    );

    for kind in MutationKind::ALL {
        let vuln = mutate(&seed, kind, true, 7, &sinks);
        let safe = mutate(&seed, kind, false, 7, &sinks);

        println!("== {kind}");
        for m in [&vuln, &safe] {
            let verdict = judge(&m.text, &sinks);
            println!("   oracle says {:<14} for the {} variant", verdict.label.to_string(), m.label);
            assert_eq!(m.label, verdict.label);
        }
        println!(
            "   sibling token bags identical: {}",
            bag_of(&vuln.text) == bag_of(&safe.text)
        );
        let spliced: Vec<&str> = vuln
            .text
            .lines()
            .filter(|l| !seed.text.contains(l.trim()))
            .collect();
        println!("   lines not in the seed:");
        for line in spliced {
            println!("     {line}");
        }
        println!();
    }
}
