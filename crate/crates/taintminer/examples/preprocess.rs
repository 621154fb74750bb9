//! Shows what normalization does to messy Groovy: comments go away,
//! semicolon chains split, conditional braces move onto their own lines,
//! and every statement ends up alone on its line.

use taintminer::preprocessor::{normalize, RawSource};

const MESSY: &str = r#"/**
 * Forwards the door code to the porter.
 */
definition(name: "Door Demo", namespace: "demo", author: "demo")

preferences {
    section("Setup") {
        input "doorCode", "text"; input "porter", "phone" // two on one line
    }
}

def installed() { subscribe(door, "contact.open", onOpen) }

def onOpen(evt) {
    def msg = "code is ${doorCode}"
    if (porter) { sendSms(porter, msg) } else { log.debug msg }
}
"#;

fn main() {
    let raw = RawSource::from_text("door_demo", MESSY);
    let norm = normalize(&raw).expect("the demo app parses");

    println!("raw lines: {}", MESSY.lines().count());
    println!("normalized lines: {}\n", norm.lines.len());
    for (i, line) in norm.lines.iter().enumerate() {
        println!("{:>3} | {line}", i + 1);
    }

    let again = normalize(&RawSource::from_text("door_demo", &norm.lines.join("\n")))
        .expect("normalized output still parses");
    println!(
        "\nnormalizing twice changes nothing: {}",
        again.lines == norm.lines
    );
}
