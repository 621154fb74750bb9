//! Mines tainted flows from an app that leaks one of its inputs through a
//! helper method, and prints each flow with its category:
//!
//! - `Sc_Sn`    declared source straight into a sink call
//! - `eSc_Sn`   a variable carrying source data into a sink call
//! - `Sc_eSn`   declared source into a method that forwards to a sink
//! - `eSc_eSn`  carried data into such a forwarding method
//! - `Sn_C`     sink call guarded by a source-tainted conditional
//! - `eSn_C`    forwarding call guarded by a source-tainted conditional

use taintminer::flowsminer::mine;
use taintminer::preprocessor::{normalize, RawSource};
use taintminer::taintmodel::SinkSet;

const LEAKY: &str = r#"definition(name: "Relay Demo", namespace: "demo", author: "demo")

preferences {
    section {
        input "secretPin", "text"
        input "phone", "phone"
        input "door", "capability.contactSensor"
    }
}

def installed() {
    subscribe(door, "contact.open", onOpen)
}

def onOpen(evt) {
    def keeper = secretPin
    sendSms(phone, secretPin)
    relay(keeper)
    if (secretPin) {
        sendPush("somebody is at the door")
    }
}

def relay(payload) {
    sendPush(payload)
}
"#;

fn main() {
    let norm = normalize(&RawSource::from_text("relay_demo", LEAKY)).expect("demo app parses");
    let report = mine(&norm, &SinkSet::default_set());

    println!("sources: {:?}", report.sources.iter().collect::<Vec<_>>());
    println!("extended sinks:");
    for e in &report.extended_sinks {
        println!(
            "  {}({}) forwards parameter #{} to {}",
            e.method_name, e.param_name, e.param_index, e.underlying_sink
        );
    }

    println!("\nflows:");
    for f in &report.flows {
        println!(
            "  {:<8} line {:>2}: {} -> {}() inside {}",
            f.category.label(),
            f.line_no,
            f.tainted_param,
            f.callee,
            f.enclosing_method
        );
    }

    println!("\nverdict: {}", if report.is_vulnerable() { "vulnerable" } else { "non-vulnerable" });
}
