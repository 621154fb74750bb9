//! Tokenizes an app and builds its bag of words. String and numeric
//! literals collapse to the `aStr` and `aNum` placeholders, so two apps that
//! differ only in message wording or thresholds share a bag.

use taintminer::lexer::{bag_of_words, split_methods, tokenize};
use taintminer::preprocessor::{normalize, RawSource};

const APP: &str = r#"definition(name: "Heat Demo", namespace: "demo", author: "demo")

preferences {
    section {
        input "thermostat", "capability.temperatureMeasurement"
        input "phone", "phone"
    }
}

def installed() {
    subscribe(thermostat, "temperature", onReading)
}

def onReading(evt) {
    if (evt.doubleValue > 85) {
        sendSms(phone, "it is warm today")
    }
}
"#;

fn main() {
    let norm = normalize(&RawSource::from_text("heat_demo", APP)).expect("demo app parses");
    let lines = tokenize(&norm);
    let split = split_methods(&lines);

    println!("methods found:");
    for m in &split.methods {
        println!("  {} (line {}, {} body lines)", m.method_name, m.start_line, m.body.len());
    }

    let handler = split
        .methods
        .iter()
        .find(|m| m.method_name == "onReading")
        .expect("handler exists");
    println!("\ntoken lines of onReading:");
    for line in &handler.body {
        println!("  {:?}", line);
    }

    let bag = bag_of_words(&split.methods);
    println!("\nbag of words over method chunks ({} distinct tokens):", bag.len());
    for (token, count) in &bag {
        println!("  {count:>2}  {token}");
    }
    println!(
        "\nliterals collapsed: aStr={} aNum={}; \"it is warm today\" and 85 are gone",
        bag.get("aStr").copied().unwrap_or(0),
        bag.get("aNum").copied().unwrap_or(0)
    );
}
