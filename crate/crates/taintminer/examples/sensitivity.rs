//! Demonstrates the three sensitivity properties of the miner on the
//! fixture apps, pairing each with a rewritten twin that the miner must
//! clear.
//!
//! - flow sensitivity: taint follows statement order, so overwriting a
//!   variable with a literal after the tainted use removes nothing, while
//!   overwriting before the sink call removes the flow
//! - path sensitivity: a clean value sent under a source-tainted guard is
//!   still a flow, of the conditional kind
//! - context sensitivity: calls into a forwarding method are judged per
//!   call site, so one tainted and one clean call yield exactly one flow

use std::fs;
use std::path::Path;

use taintminer::flowsminer::mine;
use taintminer::preprocessor::{normalize, RawSource};
use taintminer::taintmodel::SinkSet;

fn flows_of(name: &str, text: &str) -> Vec<String> {
    let norm = normalize(&RawSource::from_text(name, text)).expect("app parses");
    mine(&norm, &SinkSet::default_set())
        .flows
        .iter()
        .map(|f| format!("{} at line {} ({})", f.category.label(), f.line_no, f.tainted_param))
        .collect()
}

fn show(title: &str, fixture: &str, twin_title: &str, twin: &str) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let text = fs::read_to_string(dir.join(fixture)).expect("fixture exists");

    println!("== {title} ({fixture})");
    let flows = flows_of(title, &text);
    match flows.as_slice() {
        [] => println!("   no flows"),
        some => some.iter().for_each(|f| println!("   flow: {f}")),
    }
    println!("   {twin_title}:");
    let flows = flows_of(title, twin);
    match flows.as_slice() {
        [] => println!("   no flows"),
        some => some.iter().for_each(|f| println!("   flow: {f}")),
    }
    println!();
}

const FLOW_TWIN: &str = r#"definition(name: "Forwarder", namespace: "examples")
preferences {
    section("Notify") {
        input("phone", "phone", title: "Number?")
    }
}
def installed() {
    initialize()
}
def initialize() {
    runIn(300, forwardStatus)
}
def forwardStatus() {
    def var1 = phone
    var1 = "all quiet"
    sendSms(var1)
}
"#;

const PATH_TWIN: &str = r#"definition(name: "Quiet Hours", namespace: "examples")
preferences {
    section("Watch this mode") {
        input("awayMode", "mode", title: "Mode?")
    }
}
def installed() {
    initialize()
}
def initialize() {
    subscribe(location, "mode", checkMode)
}
def checkMode(evt) {
    def alert = "house empty"
    if (alert) {
        sendPush(alert)
    }
}
"#;

const CONTEXT_TWIN: &str = r#"definition(name: "Digest Sender", namespace: "examples")
preferences {
    section("Share this code") {
        input("doorCode", "text", title: "Code?")
    }
}
def installed() {
    initialize()
}
def initialize() {
    runIn(600, sendDigest)
}
def sendDigest() {
    relay("weekly summary")
}
def relay(content) {
    sendPush(content)
}
"#;

fn main() {
    show(
        "flow sensitivity",
        "flow_sensitive.groovy",
        "twin with the assignments swapped, so the literal wins",
        FLOW_TWIN,
    );
    show(
        "path sensitivity",
        "path_sensitive.groovy",
        "twin guarded by the clean local instead of the source",
        PATH_TWIN,
    );
    show(
        "context sensitivity",
        "context_sensitive.groovy",
        "twin keeping only the clean call into the forwarder",
        CONTEXT_TWIN,
    );
}
