//! Shows what a few arc labels do to a place with three instances.
//!
//! Each label is attached to an arc of a tiny model, the model is
//! instantiated and the activity is fired from a handful of markings.

use sant::arclabel::{parse_input_label, parse_output_label};
use sant::concretize::concretize;
use sant::formats::parse_model;
use sant::san::Marking;
use sant::terms::Assignment;

fn net(arc: &str) -> sant::san::ConcreteSan {
    let src = format!(
        "template Demo;\nplace P [{{1, 2, 3}}];\nactivity A timed {{ time exponential(1.0); }}\n{arc}\ninit P = 0;\n"
    );
    let t = parse_model(&src).expect("demo model parses");
    concretize(&t, &Assignment::new()).expect("demo model instantiates").san
}

fn show(title: &str, arc: &str) {
    let san = net(arc);
    println!("{title}");
    for m in [[0, 0, 0], [1, 1, 1], [2, 0, 1], [1, 3, 2]] {
        let m = Marking(m.to_vec());
        match san.fire(&m, 0, 1) {
            Ok(next) => println!("  {:?} -> {:?}", m.0, next.0),
            Err(_) => println!("  {:?}    disabled", m.0),
        }
    }
}

fn main() {
    for label in ["", "+2", "1 -> +2 / 0", "2 -> 0"] {
        let spec = parse_output_label(label).expect("valid output label");
        show(&format!("output arc \"{label}\" (canonical: \"{spec}\")"), &format!("arc A -> P \"{label}\";"));
    }
    for label in ["", "-1", "[exists = 1] 0", "[2 >= 2] -2"] {
        let spec = parse_input_label(label).expect("valid input label");
        show(&format!("input arc \"{label}\" (canonical: \"{spec}\")"), &format!("arc P -> A \"{label}\";"));
    }

    let err = parse_input_label("[forall >= 1 -1").unwrap_err();
    println!("\nmalformed label: {err}");
}
