//! Runs the template checks on a model with a few deliberate mistakes.

use sant::formats::ModelDocument;
use sant::template::validate_template;

const BROKEN: &str = "\
template Broken;
param n : OrderedSet<Int>;
param rate : Real;
place Up [n];
place Down [n];
activity Fail timed {
    cases rate;
    time exponential(rate);
}
activity Repair timed { time exponential(speed); }
arc Up -> Fail;
arc Fail -> Down;
arc Down -> Repair;
arc Repair -> Up;
init Up = 1;
";

fn main() {
    let doc = ModelDocument::parse(BROKEN).expect("syntax is fine");
    for d in validate_template(&doc.template) {
        match doc.locate(&d) {
            Some(pos) => println!("{}:{}: {d}", pos.line, pos.column),
            None => println!("{d}"),
        }
    }

    let err = ModelDocument::parse("template T;\nplace P [;\n").unwrap_err();
    println!("\nsyntax error at {}: {}", err.pos, err.message);
}
