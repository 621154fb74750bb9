//! Turns a small corpus into the feature matrix: one row per app, token
//! count columns first, then the six flow-category columns. Prints the CSV
//! to stdout.

use std::collections::BTreeMap;

use taintminer::flowsminer::mine;
use taintminer::lexer::{bag_of_words, split_methods, tokenize};
use taintminer::preprocessor::{normalize, RawSource};
use taintminer::taintmodel::{Label, SinkSet};
use taintminer::vectorizer::assemble;

const LEAKY: &str = r#"definition(name: "A", namespace: "demo")
preferences {
    section {
        input "phone", "phone"
    }
}
def installed() {
    subscribe(location, "mode", onMode)
}
def onMode(evt) {
    sendSms(phone, "mode changed")
}
"#;

const CAREFUL: &str = r#"definition(name: "B", namespace: "demo")
preferences {
    section {
        input "phone", "phone"
    }
}
def installed() {
    subscribe(location, "mode", onMode)
}
def onMode(evt) {
    sendPush("mode changed")
}
"#;

const QUIET: &str = r#"definition(name: "C", namespace: "demo")
preferences {
    section {
        input "phone", "phone"
    }
}
def installed() {
    subscribe(location, "mode", onMode)
}
def onMode(evt) {
    log.debug "mode changed"
}
"#;

fn main() {
    let corpus = [
        ("leaky", LEAKY, Some(Label::Vulnerable)),
        ("careful", CAREFUL, Some(Label::NonVulnerable)),
        ("quiet", QUIET, Some(Label::NonVulnerable)),
    ];
    let sinks = SinkSet::default_set();

    let mut bags = BTreeMap::new();
    let mut reports = BTreeMap::new();
    let mut labels = BTreeMap::new();
    for (name, text, label) in corpus {
        let norm = normalize(&RawSource::from_text(name, text)).expect("app parses");
        let split = split_methods(&tokenize(&norm));
        bags.insert(name.to_string(), bag_of_words(&split.methods));
        reports.insert(name.to_string(), mine(&norm, &sinks));
        if let Some(label) = label {
            labels.insert(name.to_string(), label);
        }
    }

    // min_apps = 2: a token must appear in at least two apps to get a column.
    let matrix = assemble(&bags, &reports, Some(&labels), 2).expect("labels cover the corpus");
    println!(
        "{} apps x {} features ({} token columns + 6 flow columns)\n",
        matrix.rows.len(),
        matrix.width(),
        matrix.width() - 6
    );
    let mut csv = Vec::new();
    matrix.to_csv(&mut csv).expect("matrix serializes");
    print!("{}", String::from_utf8(csv).expect("csv is utf-8"));
}
